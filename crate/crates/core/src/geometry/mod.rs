//! N-connection geometry kernel.
//!
//! Everything is expressed in the N-adapted frame
//! `e_i = ∂_i − N_i^a ∂_a`, `e_a = ∂_a` and its dual coframe
//! `ϑ^i = dx^i`, `ϑ^a = dy^a + N_i^a dx^i`. Full indices are zero-based,
//! horizontal first.
//!
//! Index conventions:
//!
//! * `[e_α, e_β] = W^γ_{αβ} e_γ`, with `Ω^a_{ij} = e_i N_j^a − e_j N_i^a`
//!   and `W^a_{ji} = Ω^a_{ij}`.
//! * `D_{e_γ} e_β = Γ^α_{βγ} e_α`; the last lower index is the direction.
//! * `T^α_{βγ} = Γ^α_{γβ} − Γ^α_{βγ} − W^α_{βγ}`.
//! * `R^α_{βγδ} e_α = R(e_δ, e_γ) e_β`, so `R_{βγ} = R^α_{βγα}`.

mod chart;
mod component;
mod connection;
mod curvature;
mod frame;
pub mod linalg;
mod metric;
mod torsion;

use std::cell::RefCell;

use thiserror::Error;

pub use chart::{SplitChart, Subspace};
pub use component::{ComponentField, Slot, SlotKind, Symmetry, Variance};
pub use connection::{
    canonical_dconnection, canonical_dconnection_via_levi_civita, canonical_distortion,
    levi_civita, Connection, DConnection,
};
pub use curvature::{
    curvature, dcurvature, einstein, einstein_mixed, ricci, ricci_from_blocks, scalar,
    scalar_split, DCurvature,
};
pub use frame::{assemble_full_metric, elongated_diff, frames, FrameDiff};
pub use metric::{DMetric, NConnection};
pub use torsion::{dtorsion, nonmetricity, torsion, DTorsion};

use crate::expr::Expr;
use linalg::ExprMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid chart: {0}")]
    Chart(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("bad index: {0}")]
    Index(String),
    #[error("symmetry violated: {0}")]
    Symmetry(String),
    #[error("singular metric block: {0}")]
    Singular(String),
    #[error("symbolic inverse of a dense {0}x{0} block is not supported")]
    UnsupportedInverse(usize),
    #[error("not a d-connection: {0}")]
    NotDConnection(String),
}

/// A chart together with `(g, h, N)`, the inverse blocks and a shared
/// frame-derivative cache. All geometric operations take this context.
pub struct NGeometry {
    chart: SplitChart,
    metric: DMetric,
    nconn: NConnection,
    g_inv: ExprMatrix,
    h_inv: ExprMatrix,
    frame: RefCell<FrameDiff>,
    anholonomy: ComponentField,
    omega: ComponentField,
}

impl NGeometry {
    pub fn new(
        chart: SplitChart,
        metric: DMetric,
        nconn: NConnection,
    ) -> Result<NGeometry, GeometryError> {
        let (n, m) = (chart.n(), chart.m());
        if metric.n() != n || metric.m() != m || nconn.n() != n || nconn.m() != m {
            return Err(GeometryError::Dimension(format!(
                "chart is {n}+{m}, metric is {}+{}, N-connection is {}x{}",
                metric.n(),
                metric.m(),
                nconn.n(),
                nconn.m()
            )));
        }
        let known: std::collections::BTreeSet<_> = chart.names().into_iter().collect();
        let exprs = metric
            .g()
            .iter()
            .chain(metric.h())
            .chain(nconn.rows())
            .flatten();
        for e in exprs {
            for c in e.coordinates() {
                if !known.contains(&*c) {
                    return Err(GeometryError::Chart(format!(
                        "coordinate '{c}' is not part of the chart"
                    )));
                }
            }
        }
        let g_inv = linalg::inverse(metric.g())?;
        let h_inv = linalg::inverse(metric.h())?;
        let mut fd = FrameDiff::new(&chart, &nconn);
        let omega = frame::omega(&mut fd, n, m);
        let anholonomy = frame::anholonomy(&mut fd, &omega, n, m);
        Ok(NGeometry {
            chart,
            metric,
            nconn,
            g_inv,
            h_inv,
            frame: RefCell::new(fd),
            anholonomy,
            omega,
        })
    }

    pub fn chart(&self) -> &SplitChart {
        &self.chart
    }

    pub fn metric(&self) -> &DMetric {
        &self.metric
    }

    pub fn nconnection(&self) -> &NConnection {
        &self.nconn
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    pub fn m(&self) -> usize {
        self.chart.m()
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn g_inv(&self) -> &ExprMatrix {
        &self.g_inv
    }

    pub fn h_inv(&self) -> &ExprMatrix {
        &self.h_inv
    }

    /// `g_{αβ}` of the adapted frame (block diagonal).
    pub fn g(&self, alpha: usize, beta: usize) -> Expr {
        self.metric.adapted(alpha, beta)
    }

    /// `g^{αβ}` of the adapted frame.
    pub fn g_up(&self, alpha: usize, beta: usize) -> Expr {
        let n = self.n();
        match (alpha < n, beta < n) {
            (true, true) => self.g_inv[alpha][beta].clone(),
            (false, false) => self.h_inv[alpha - n][beta - n].clone(),
            _ => Expr::zero(),
        }
    }

    /// Frame derivative `e_α f`.
    pub fn e(&self, alpha: usize, f: &Expr) -> Expr {
        self.frame.borrow_mut().e(alpha, f)
    }

    /// Coordinate derivative `∂_α f`.
    pub fn partial(&self, alpha: usize, f: &Expr) -> Expr {
        self.frame.borrow_mut().partial(alpha, f)
    }

    /// `W^γ_{αβ}`, three full slots, antisymmetric in the lower pair.
    pub fn anholonomy(&self) -> &ComponentField {
        &self.anholonomy
    }

    /// `W^γ_{αβ}` with full indices.
    pub fn w(&self, gamma: usize, alpha: usize, beta: usize) -> &Expr {
        self.anholonomy.get(&[gamma, alpha, beta])
    }

    /// `Ω^a_{ij}`: slots (V up, H down, H down).
    pub fn omega(&self) -> &ComponentField {
        &self.omega
    }

    /// `∂_b N_k^a` (local indices).
    pub fn dn(&self, a: usize, b: usize, k: usize) -> Expr {
        let n = self.n();
        self.partial(n + b, self.nconn.get(k, a))
    }

    /// Expressions whose numeric vanishing makes a point singular.
    pub fn determinants(&self) -> [Expr; 2] {
        [linalg::det(self.metric.g()), linalg::det(self.metric.h())]
    }
}

impl std::fmt::Debug for NGeometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NGeometry")
            .field("chart", &self.chart)
            .field("metric", &self.metric)
            .field("nconnection", &self.nconn)
            .finish_non_exhaustive()
    }
}
