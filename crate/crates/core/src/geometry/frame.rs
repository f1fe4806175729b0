use std::collections::HashMap;

use super::component::{ComponentField, Slot, SlotKind, Symmetry};
use super::linalg::ExprMatrix;
use super::{DMetric, NConnection, SplitChart};
use crate::expr::{Differentiator, Expr};

/// Memoised coordinate and frame derivatives for one chart and N-connection.
pub struct FrameDiff {
    n: usize,
    nconn: ExprMatrix,
    partials: Vec<Differentiator>,
    memo: HashMap<(usize, Expr), Expr>,
}

impl FrameDiff {
    pub fn new(chart: &SplitChart, nconn: &NConnection) -> FrameDiff {
        FrameDiff {
            n: chart.n(),
            nconn: nconn.rows().clone(),
            partials: chart.names().into_iter().map(Differentiator::new).collect(),
            memo: HashMap::new(),
        }
    }

    pub fn partial(&mut self, alpha: usize, f: &Expr) -> Expr {
        self.partials[alpha].diff(f)
    }

    pub fn e(&mut self, alpha: usize, f: &Expr) -> Expr {
        if alpha >= self.n {
            return self.partial(alpha, f);
        }
        if f.as_const().is_some() {
            return Expr::zero();
        }
        let key = (alpha, f.clone());
        if let Some(d) = self.memo.get(&key) {
            return d.clone();
        }
        let mut d = self.partial(alpha, f);
        for a in 0..self.nconn[alpha].len() {
            let na = self.nconn[alpha][a].clone();
            if na.is_zero() {
                continue;
            }
            let dv = self.partial(self.n + a, f);
            d = d - na * dv;
        }
        self.memo.insert(key, d.clone());
        d
    }
}

/// `e_i f = ∂_i f − N_i^a ∂_a f` for a horizontal index `i`.
pub fn elongated_diff(e: &Expr, i: usize, chart: &SplitChart, nconn: &NConnection) -> Expr {
    assert!(i < chart.n(), "elongated_diff needs a horizontal index");
    FrameDiff::new(chart, nconn).e(i, e)
}

/// Frame matrix `E` (column `ν` holds `e_ν` in the coordinate basis) and
/// coframe matrix `Θ` (row `μ` holds `ϑ^μ`).
pub fn frames(nconn: &NConnection) -> (ExprMatrix, ExprMatrix) {
    let (n, m) = (nconn.n(), nconn.m());
    let mut e = super::linalg::identity(n + m);
    let mut theta = super::linalg::identity(n + m);
    for i in 0..n {
        for a in 0..m {
            e[n + a][i] = -nconn.get(i, a);
            theta[n + a][i] = nconn.get(i, a).clone();
        }
    }
    (e, theta)
}

/// Coordinate-basis metric `Θ^T · diag(g, h) · Θ`.
pub fn assemble_full_metric(metric: &DMetric, nconn: &NConnection) -> ComponentField {
    let (n, m) = (nconn.n(), nconn.m());
    let slots = [Slot::down(SlotKind::Full); 2];
    let (_, theta) = frames(nconn);
    ComponentField::from_fn("gc", &slots, n, m, |ix| {
        let (al, be) = (ix[0], ix[1]);
        Expr::sum((0..n + m).flat_map(|mu| {
            let theta = &theta;
            (0..n + m).filter_map(move |nu| {
                let t = metric.adapted(mu, nu);
                if t.is_zero() || theta[mu][al].is_zero() || theta[nu][be].is_zero() {
                    None
                } else {
                    Some(&theta[mu][al] * &t * &theta[nu][be])
                }
            })
        }))
    })
    .with_symmetry(Symmetry::Symmetric(0, 1))
}

pub(super) fn omega(fd: &mut FrameDiff, n: usize, m: usize) -> ComponentField {
    let slots = [
        Slot::up(SlotKind::V),
        Slot::down(SlotKind::H),
        Slot::down(SlotKind::H),
    ];
    let mut out = ComponentField::zeros("Omega", &slots, n, m)
        .with_symmetry(Symmetry::Antisymmetric(1, 2));
    for a in 0..m {
        for i in 0..n {
            for j in i + 1..n {
                let nj = fd.nconn[j][a].clone();
                let ni = fd.nconn[i][a].clone();
                let w = fd.e(i, &nj) - fd.e(j, &ni);
                out.set(&[a, j, i], -&w);
                out.set(&[a, i, j], w);
            }
        }
    }
    out
}

pub(super) fn anholonomy(
    fd: &mut FrameDiff,
    omega: &ComponentField,
    n: usize,
    m: usize,
) -> ComponentField {
    let slots = [
        Slot::up(SlotKind::Full),
        Slot::down(SlotKind::Full),
        Slot::down(SlotKind::Full),
    ];
    let mut w =
        ComponentField::zeros("W", &slots, n, m).with_symmetry(Symmetry::Antisymmetric(1, 2));
    for b in 0..m {
        for i in 0..n {
            for a in 0..m {
                let nib = fd.nconn[i][b].clone();
                let d = fd.partial(n + a, &nib);
                w.set(&[n + b, n + a, i], -&d);
                w.set(&[n + b, i, n + a], d);
            }
        }
    }
    for a in 0..m {
        for i in 0..n {
            for j in 0..n {
                // W^a_{ji} = Ω^a_{ij}
                w.set(&[n + a, j, i], omega.get(&[a, i, j]).clone());
            }
        }
    }
    w
}
