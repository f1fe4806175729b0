use super::component::{ComponentField, Slot, SlotKind, Symmetry};
use super::{Connection, DConnection, NGeometry};
use crate::expr::Expr;

fn prod_sum<I: IntoIterator<Item = (Expr, Expr)>>(pairs: I) -> Expr {
    Expr::sum(
        pairs
            .into_iter()
            .filter(|(a, b)| !a.is_zero() && !b.is_zero())
            .map(|(a, b)| a * b),
    )
}

/// Frame curvature of an arbitrary connection,
/// `R^α_{βγδ} = e_δ Γ^α_{βγ} − e_γ Γ^α_{βδ} + Γ^μ_{βγ} Γ^α_{μδ}
///  − Γ^μ_{βδ} Γ^α_{μγ} − Γ^α_{βμ} W^μ_{δγ}`.
pub fn curvature(geo: &NGeometry, conn: &Connection) -> ComponentField {
    let d = geo.dim();
    let slots = [
        Slot::up(SlotKind::Full),
        Slot::down(SlotKind::Full),
        Slot::down(SlotKind::Full),
        Slot::down(SlotKind::Full),
    ];
    let mut r = ComponentField::zeros("R", &slots, geo.n(), geo.m())
        .with_symmetry(Symmetry::Antisymmetric(2, 3));
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for dd in c + 1..d {
                    let quad = prod_sum((0..d).flat_map(|mu| {
                        [
                            (conn.get(mu, b, c).clone(), conn.get(a, mu, dd).clone()),
                            (-conn.get(mu, b, dd), conn.get(a, mu, c).clone()),
                            (-conn.get(a, b, mu), geo.w(mu, dd, c).clone()),
                        ]
                    }));
                    let v = geo.e(dd, conn.get(a, b, c)) - geo.e(c, conn.get(a, b, dd)) + quad;
                    r.set(&[a, b, dd, c], -&v);
                    r.set(&[a, b, c, dd], v);
                }
            }
        }
    }
    r
}

/// The six d-curvature blocks of a d-connection.
#[derive(Debug, Clone)]
pub struct DCurvature {
    /// `R^i_{hjk}`
    pub hhhh: ComponentField,
    /// `R^a_{bjk}`
    pub vvhh: ComponentField,
    /// `R^i_{jka}`
    pub hhhv: ComponentField,
    /// `R^c_{bka}`
    pub vvhv: ComponentField,
    /// `R^i_{jbc}`
    pub hhvv: ComponentField,
    /// `R^a_{bcd}`
    pub vvvv: ComponentField,
}

impl DCurvature {
    pub fn blocks(&self) -> [&ComponentField; 6] {
        [
            &self.hhhh, &self.vvhh, &self.hhhv, &self.vvhv, &self.hhvv, &self.vvvv,
        ]
    }

    /// Full index of an entry of block `block`.
    pub fn full_index(&self, block: usize, ix: &[usize]) -> [usize; 4] {
        let n = self.hhhh.n();
        let off: [usize; 4] = match block {
            0 => [0, 0, 0, 0],
            1 => [n, n, 0, 0],
            2 => [0, 0, 0, n],
            3 => [n, n, 0, n],
            4 => [0, 0, n, n],
            _ => [n, n, n, n],
        };
        [
            ix[0] + off[0],
            ix[1] + off[1],
            ix[2] + off[2],
            ix[3] + off[3],
        ]
    }
}

/// Block formulas for the curvature of a d-connection.
pub fn dcurvature(geo: &NGeometry, dc: &DConnection) -> DCurvature {
    let (n, m) = (geo.n(), geo.m());
    use SlotKind::{H, V};
    let s = |a, b, c, d| [Slot::up(a), Slot::down(b), Slot::down(c), Slot::down(d)];
    let om = |a: usize, j: usize, k: usize| geo.omega().get(&[a, j, k]).clone();
    // T^b_{ak} = ∂_a N_k^b − L̃^b_{ak}
    let tvh = |b: usize, a: usize, k: usize| geo.dn(b, a, k) - dc.lt(b, a, k);

    let hhhh = ComponentField::from_fn("R", &s(H, H, H, H), n, m, |x| {
        let (i, h, j, k) = (x[0], x[1], x[2], x[3]);
        geo.e(k, dc.l(i, h, j)) - geo.e(j, dc.l(i, h, k))
            + prod_sum((0..n).flat_map(|mm| {
                [
                    (dc.l(mm, h, j).clone(), dc.l(i, mm, k).clone()),
                    (-dc.l(mm, h, k), dc.l(i, mm, j).clone()),
                ]
            }))
            - prod_sum((0..m).map(|a| (dc.c(i, h, a).clone(), om(a, j, k))))
    })
    .with_symmetry(Symmetry::Antisymmetric(2, 3));

    let vvhh = ComponentField::from_fn("R", &s(V, V, H, H), n, m, |x| {
        let (a, b, j, k) = (x[0], x[1], x[2], x[3]);
        geo.e(k, dc.lt(a, b, j)) - geo.e(j, dc.lt(a, b, k))
            + prod_sum((0..m).flat_map(|c| {
                [
                    (dc.lt(c, b, j).clone(), dc.lt(a, c, k).clone()),
                    (-dc.lt(c, b, k), dc.lt(a, c, j).clone()),
                ]
            }))
            - prod_sum((0..m).map(|c| (dc.ct(a, b, c).clone(), om(c, j, k))))
    })
    .with_symmetry(Symmetry::Antisymmetric(2, 3));

    let hhhv = ComponentField::from_fn("R", &s(H, H, H, V), n, m, |x| {
        let (i, j, k, a) = (x[0], x[1], x[2], x[3]);
        // D_k C^i_{ja}
        let dkc = geo.e(k, dc.c(i, j, a))
            + prod_sum((0..n).flat_map(|mm| {
                [
                    (dc.l(i, mm, k).clone(), dc.c(mm, j, a).clone()),
                    (-dc.l(mm, j, k), dc.c(i, mm, a).clone()),
                ]
            }))
            - prod_sum((0..m).map(|b| (dc.lt(b, a, k).clone(), dc.c(i, j, b).clone())));
        geo.e(n + a, dc.l(i, j, k)) - dkc
            + prod_sum((0..m).map(|b| (dc.c(i, j, b).clone(), tvh(b, a, k))))
    });

    let vvhv = ComponentField::from_fn("R", &s(V, V, H, V), n, m, |x| {
        let (c, b, k, a) = (x[0], x[1], x[2], x[3]);
        // D_k C̃^c_{ba}
        let dkc = geo.e(k, dc.ct(c, b, a))
            + prod_sum((0..m).flat_map(|d| {
                [
                    (dc.lt(c, d, k).clone(), dc.ct(d, b, a).clone()),
                    (-dc.lt(d, b, k), dc.ct(c, d, a).clone()),
                    (-dc.lt(d, a, k), dc.ct(c, b, d).clone()),
                ]
            }));
        geo.e(n + a, dc.lt(c, b, k)) - dkc
            + prod_sum((0..m).map(|d| (dc.ct(c, b, d).clone(), tvh(d, a, k))))
    });

    let hhvv = ComponentField::from_fn("R", &s(H, H, V, V), n, m, |x| {
        let (i, j, b, c) = (x[0], x[1], x[2], x[3]);
        geo.e(n + c, dc.c(i, j, b)) - geo.e(n + b, dc.c(i, j, c))
            + prod_sum((0..n).flat_map(|h| {
                [
                    (dc.c(h, j, b).clone(), dc.c(i, h, c).clone()),
                    (-dc.c(h, j, c), dc.c(i, h, b).clone()),
                ]
            }))
    })
    .with_symmetry(Symmetry::Antisymmetric(2, 3));

    let vvvv = ComponentField::from_fn("R", &s(V, V, V, V), n, m, |x| {
        let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
        geo.e(n + d, dc.ct(a, b, c)) - geo.e(n + c, dc.ct(a, b, d))
            + prod_sum((0..m).flat_map(|e| {
                [
                    (dc.ct(e, b, c).clone(), dc.ct(a, e, d).clone()),
                    (-dc.ct(e, b, d), dc.ct(a, e, c).clone()),
                ]
            }))
    })
    .with_symmetry(Symmetry::Antisymmetric(2, 3));

    DCurvature {
        hhhh,
        vvhh,
        hhhv,
        vvhv,
        hhvv,
        vvvv,
    }
}

const FULL2: [Slot; 2] = [Slot::down(SlotKind::Full), Slot::down(SlotKind::Full)];

/// `R_{βγ} = R^α_{βγα}`.
pub fn ricci(r: &ComponentField) -> ComponentField {
    let d = r.n() + r.m();
    ComponentField::from_fn("Ric", &FULL2, r.n(), r.m(), |x| {
        Expr::sum((0..d).map(|t| r.get(&[t, x[0], x[1], t]).clone()))
    })
}

/// Ricci d-tensor from the blocks: `R_{ij} = R^k_{ijk}`, `R_{ia} = −R^k_{ika}`,
/// `R_{ai} = R^b_{aib}`, `R_{ab} = R^c_{abc}`.
pub fn ricci_from_blocks(dc: &DCurvature) -> ComponentField {
    let (n, m) = (dc.hhhh.n(), dc.hhhh.m());
    ComponentField::from_fn("Ric", &FULL2, n, m, |x| {
        let (p, q) = (x[0], x[1]);
        match (p < n, q < n) {
            (true, true) => Expr::sum((0..n).map(|k| dc.hhhh.get(&[k, p, q, k]).clone())),
            (true, false) => -Expr::sum((0..n).map(|k| dc.hhhv.get(&[k, p, k, q - n]).clone())),
            (false, true) => {
                Expr::sum((0..m).map(|b| dc.vvhv.get(&[b, p - n, q, b]).clone()))
            }
            (false, false) => {
                Expr::sum((0..m).map(|c| dc.vvvv.get(&[c, p - n, q - n, c]).clone()))
            }
        }
    })
}

/// `g^{αβ} R_{αβ}` over full indices.
pub fn scalar(geo: &NGeometry, ric: &ComponentField) -> Expr {
    let d = geo.dim();
    prod_sum((0..d).flat_map(|a| (0..d).map(move |b| (geo.g_up(a, b), ric.get(&[a, b]).clone()))))
}

/// `g^{ij} R_{ij} + h^{ab} R_{ab}`.
pub fn scalar_split(geo: &NGeometry, ric: &ComponentField) -> Expr {
    let (n, m) = (geo.n(), geo.m());
    let gi = geo.g_inv();
    let hi = geo.h_inv();
    let hs = prod_sum((0..n).flat_map(|i| {
        (0..n).map(move |j| (gi[i][j].clone(), ric.get(&[i, j]).clone()))
    }));
    let vs = prod_sum((0..m).flat_map(|a| {
        (0..m).map(move |b| (hi[a][b].clone(), ric.get(&[n + a, n + b]).clone()))
    }));
    hs + vs
}

/// `G_{αβ} = R_{αβ} − ½ g_{αβ} R`.
pub fn einstein(geo: &NGeometry, ric: &ComponentField, scalar: &Expr) -> ComponentField {
    ComponentField::from_fn("G", &FULL2, geo.n(), geo.m(), |x| {
        let g = geo.g(x[0], x[1]);
        ric.get(x) - g * scalar * 0.5
    })
}

/// `G^α_β = g^{αγ} G_{γβ}`.
pub fn einstein_mixed(geo: &NGeometry, g_low: &ComponentField) -> ComponentField {
    let d = geo.dim();
    let slots = [Slot::up(SlotKind::Full), Slot::down(SlotKind::Full)];
    ComponentField::from_fn("G", &slots, geo.n(), geo.m(), |x| {
        prod_sum((0..d).map(|c| (geo.g_up(x[0], c), g_low.get(&[c, x[1]]).clone())))
    })
}
