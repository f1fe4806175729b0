use super::component::{ComponentField, Slot, SlotKind};
use super::{GeometryError, NGeometry};
use crate::expr::{simplify, Expr};

const FULL3: [Slot; 3] = [
    Slot::up(SlotKind::Full),
    Slot::down(SlotKind::Full),
    Slot::down(SlotKind::Full),
];

/// Linear connection coefficients `Γ^α_{βγ}` in the adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    gamma: ComponentField,
}

impl Connection {
    pub fn zero(n: usize, m: usize) -> Connection {
        Connection {
            gamma: ComponentField::zeros("Gamma", &FULL3, n, m),
        }
    }

    pub fn from_field(field: ComponentField) -> Result<Connection, GeometryError> {
        if field.slots() != FULL3 {
            return Err(GeometryError::Dimension(format!(
                "{} does not have the slot layout of a connection",
                field.name()
            )));
        }
        Ok(Connection { gamma: field })
    }

    pub fn field(&self) -> &ComponentField {
        &self.gamma
    }

    pub fn into_field(self) -> ComponentField {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.gamma.n()
    }

    pub fn m(&self) -> usize {
        self.gamma.m()
    }

    pub fn dim(&self) -> usize {
        self.n() + self.m()
    }

    /// `Γ^α_{βγ}`.
    pub fn get(&self, alpha: usize, beta: usize, gamma: usize) -> &Expr {
        self.gamma.get(&[alpha, beta, gamma])
    }

    pub fn set(&mut self, alpha: usize, beta: usize, gamma: usize, value: Expr) {
        self.gamma.set(&[alpha, beta, gamma], value);
    }

    /// Componentwise `Γ + P`.
    pub fn deformed(&self, p: &ComponentField) -> Result<Connection, GeometryError> {
        Ok(Connection {
            gamma: self.gamma.zip_with(p, |a, b| a + b)?,
        })
    }

    /// The four split-preserving blocks; mixed components are discarded.
    pub fn d_blocks(&self) -> DConnection {
        let (n, m) = (self.n(), self.m());
        DConnection {
            l: ComponentField::from_fn("L", &DConnection::L_SLOTS, n, m, |x| {
                self.get(x[0], x[1], x[2]).clone()
            }),
            lt: ComponentField::from_fn("Lt", &DConnection::LT_SLOTS, n, m, |x| {
                self.get(n + x[0], n + x[1], x[2]).clone()
            }),
            c: ComponentField::from_fn("C", &DConnection::C_SLOTS, n, m, |x| {
                self.get(x[0], x[1], n + x[2]).clone()
            }),
            ct: ComponentField::from_fn("Ct", &DConnection::CT_SLOTS, n, m, |x| {
                self.get(n + x[0], n + x[1], n + x[2]).clone()
            }),
        }
    }

    /// Components mixing the horizontal and vertical subspaces, i.e. those
    /// a d-connection must not have.
    pub fn mixed_indices(&self) -> Vec<[usize; 3]> {
        let n = self.n();
        let d = self.dim();
        let mut out = Vec::new();
        for a in 0..d {
            for b in 0..d {
                if (a < n) != (b < n) {
                    for c in 0..d {
                        out.push([a, b, c]);
                    }
                }
            }
        }
        out
    }

    pub fn to_dconnection(&self) -> Result<DConnection, GeometryError> {
        for [a, b, c] in self.mixed_indices() {
            let e = self.get(a, b, c);
            if !e.is_zero() && !simplify(e).is_zero() {
                return Err(GeometryError::NotDConnection(format!(
                    "{} = {e}",
                    self.gamma.key(&[a, b, c])
                )));
            }
        }
        Ok(self.d_blocks())
    }
}

/// `Γ^α_{βγ} = (L^i_{jk}, L̃^a_{bk}, C^i_{jc}, C̃^a_{bc})`.
#[derive(Debug, Clone, PartialEq)]
pub struct DConnection {
    pub l: ComponentField,
    pub lt: ComponentField,
    pub c: ComponentField,
    pub ct: ComponentField,
}

impl DConnection {
    pub const L_SLOTS: [Slot; 3] = [
        Slot::up(SlotKind::H),
        Slot::down(SlotKind::H),
        Slot::down(SlotKind::H),
    ];
    pub const LT_SLOTS: [Slot; 3] = [
        Slot::up(SlotKind::V),
        Slot::down(SlotKind::V),
        Slot::down(SlotKind::H),
    ];
    pub const C_SLOTS: [Slot; 3] = [
        Slot::up(SlotKind::H),
        Slot::down(SlotKind::H),
        Slot::down(SlotKind::V),
    ];
    pub const CT_SLOTS: [Slot; 3] = [
        Slot::up(SlotKind::V),
        Slot::down(SlotKind::V),
        Slot::down(SlotKind::V),
    ];

    pub fn zero(n: usize, m: usize) -> DConnection {
        DConnection {
            l: ComponentField::zeros("L", &Self::L_SLOTS, n, m),
            lt: ComponentField::zeros("Lt", &Self::LT_SLOTS, n, m),
            c: ComponentField::zeros("C", &Self::C_SLOTS, n, m),
            ct: ComponentField::zeros("Ct", &Self::CT_SLOTS, n, m),
        }
    }

    pub fn n(&self) -> usize {
        self.l.n()
    }

    pub fn m(&self) -> usize {
        self.l.m()
    }

    pub fn l(&self, i: usize, j: usize, k: usize) -> &Expr {
        self.l.get(&[i, j, k])
    }

    pub fn lt(&self, a: usize, b: usize, k: usize) -> &Expr {
        self.lt.get(&[a, b, k])
    }

    pub fn c(&self, i: usize, j: usize, c: usize) -> &Expr {
        self.c.get(&[i, j, c])
    }

    pub fn ct(&self, a: usize, b: usize, c: usize) -> &Expr {
        self.ct.get(&[a, b, c])
    }

    pub fn blocks(&self) -> [&ComponentField; 4] {
        [&self.l, &self.lt, &self.c, &self.ct]
    }

    pub fn to_connection(&self) -> Connection {
        let (n, m) = (self.n(), self.m());
        let mut out = Connection::zero(n, m);
        for (ix, e) in self.l.iter() {
            out.set(ix[0], ix[1], ix[2], e.clone());
        }
        for (ix, e) in self.lt.iter() {
            out.set(n + ix[0], n + ix[1], ix[2], e.clone());
        }
        for (ix, e) in self.c.iter() {
            out.set(ix[0], ix[1], n + ix[2], e.clone());
        }
        for (ix, e) in self.ct.iter() {
            out.set(n + ix[0], n + ix[1], n + ix[2], e.clone());
        }
        out
    }
}

/// Levi-Civita connection in the adapted frame, from the Koszul formula
/// with the anholonomy corrections.
pub fn levi_civita(geo: &NGeometry) -> Connection {
    let d = geo.dim();
    let (n, m) = (geo.n(), geo.m());
    // eg[a][b][c] = e_a g_{bc}
    let eg: Vec<Vec<Vec<Expr>>> = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| (0..d).map(|c| geo.e(a, &geo.g(b, c))).collect())
                .collect()
        })
        .collect();
    // W_{γαβ} := W^δ_{αβ} g_{δγ}
    let wl = |gamma: usize, alpha: usize, beta: usize| -> Expr {
        Expr::sum((0..d).filter_map(|delta| {
            let w = geo.w(delta, alpha, beta);
            let g = geo.g(delta, gamma);
            (!w.is_zero() && !g.is_zero()).then(|| w * g)
        }))
    };
    // lowered[γ][β][α] = g(∇_{e_α} e_β, e_γ)
    let mut lowered = vec![vec![vec![Expr::zero(); d]; d]; d];
    for (gamma, lg) in lowered.iter_mut().enumerate() {
        for (beta, lgb) in lg.iter_mut().enumerate() {
            for (alpha, slot) in lgb.iter_mut().enumerate() {
                let s = &eg[alpha][beta][gamma] + &eg[beta][alpha][gamma]
                    - &eg[gamma][alpha][beta]
                    + wl(gamma, alpha, beta)
                    - wl(alpha, beta, gamma)
                    + wl(beta, gamma, alpha);
                *slot = s * 0.5;
            }
        }
    }
    let mut out = Connection::zero(n, m);
    for mu in 0..d {
        for beta in 0..d {
            for alpha in 0..d {
                let v = Expr::sum((0..d).filter_map(|gamma| {
                    let gi = geo.g_up(mu, gamma);
                    let l = &lowered[gamma][beta][alpha];
                    (!gi.is_zero() && !l.is_zero()).then(|| gi * l)
                }));
                out.set(mu, beta, alpha, v);
            }
        }
    }
    out.gamma = out.gamma.rename("LC");
    out
}

/// Canonical d-connection from the direct block formulas.
pub fn canonical_dconnection(geo: &NGeometry) -> DConnection {
    let (n, m) = (geo.n(), geo.m());
    let g = geo.metric().g();
    let h = geo.metric().h();
    let gi = geo.g_inv();
    let hi = geo.h_inv();
    let mut out = DConnection::zero(n, m);

    // L^i_{jk} = ½ g^{ir}(e_k g_{jr} + e_j g_{kr} − e_r g_{jk})
    let eg: Vec<Vec<Vec<Expr>>> = (0..n)
        .map(|k| {
            (0..n)
                .map(|a| (0..n).map(|b| geo.e(k, &g[a][b])).collect())
                .collect()
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = Expr::sum((0..n).filter(|&r| !gi[i][r].is_zero()).map(|r| {
                    &gi[i][r] * (&eg[k][j][r] + &eg[j][k][r] - &eg[r][j][k])
                }));
                out.l.set(&[i, j, k], v * 0.5);
            }
        }
    }

    // L̃^a_{bk} = ∂_b N_k^a + ½ h^{ac}(e_k h_{bc} − h_{dc} ∂_b N_k^d − h_{db} ∂_c N_k^d)
    for a in 0..m {
        for b in 0..m {
            for k in 0..n {
                let s = Expr::sum((0..m).filter(|&c| !hi[a][c].is_zero()).map(|c| {
                    let inner = geo.e(k, &h[b][c])
                        - Expr::sum((0..m).map(|dd| &h[dd][c] * geo.dn(dd, b, k)))
                        - Expr::sum((0..m).map(|dd| &h[dd][b] * geo.dn(dd, c, k)));
                    &hi[a][c] * inner
                }));
                out.lt.set(&[a, b, k], geo.dn(a, b, k) + s * 0.5);
            }
        }
    }

    // C^i_{jc} = ½ g^{ik} ∂_c g_{jk}
    for i in 0..n {
        for j in 0..n {
            for c in 0..m {
                let v = Expr::sum(
                    (0..n)
                        .filter(|&k| !gi[i][k].is_zero())
                        .map(|k| &gi[i][k] * geo.partial(n + c, &g[j][k])),
                );
                out.c.set(&[i, j, c], v * 0.5);
            }
        }
    }

    // C̃^a_{bc} = ½ h^{ad}(∂_c h_{bd} + ∂_b h_{cd} − ∂_d h_{bc})
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                let v = Expr::sum((0..m).filter(|&dd| !hi[a][dd].is_zero()).map(|dd| {
                    &hi[a][dd]
                        * (geo.partial(n + c, &h[b][dd]) + geo.partial(n + b, &h[c][dd])
                            - geo.partial(n + dd, &h[b][c]))
                }));
                out.ct.set(&[a, b, c], v * 0.5);
            }
        }
    }
    out
}

/// Canonical d-connection as the Levi-Civita connection plus the
/// distortion: `L = ∇Γ^i_{jk}`, `L̃^a_{bk} = ∇Γ^a_{kb} + ∂_b N_k^a`,
/// `C^i_{jc} = ∇Γ^i_{jc} − ½ g^{ik} Ω^a_{jk} h_{ca}`, `C̃ = ∇Γ^a_{bc}`.
pub fn canonical_dconnection_via_levi_civita(geo: &NGeometry) -> DConnection {
    let lc = levi_civita(geo);
    canonical_from_levi_civita(geo, &lc)
}

pub(crate) fn canonical_from_levi_civita(geo: &NGeometry, lc: &Connection) -> DConnection {
    let (n, m) = (geo.n(), geo.m());
    let gi = geo.g_inv();
    let h = geo.metric().h();
    let om = geo.omega();
    let mut out = lc.d_blocks();
    for a in 0..m {
        for b in 0..m {
            for k in 0..n {
                out.lt
                    .set(&[a, b, k], lc.get(n + a, k, n + b) + geo.dn(a, b, k));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for c in 0..m {
                let p = Expr::sum((0..n).flat_map(|k| {
                    (0..m).filter_map(move |a| {
                        let o = om.get(&[a, j, k]);
                        if gi[i][k].is_zero() || o.is_zero() || h[c][a].is_zero() {
                            None
                        } else {
                            Some(&gi[i][k] * o * &h[c][a])
                        }
                    })
                }));
                out.c.set(&[i, j, c], lc.get(i, j, n + c) - p * 0.5);
            }
        }
    }
    out
}

/// Full distortion `P̂ = Γ̂ − ∇Γ`, built from the Levi-Civita side only.
pub fn canonical_distortion(geo: &NGeometry) -> ComponentField {
    let lc = levi_civita(geo);
    let canon = canonical_from_levi_civita(geo, &lc).to_connection();
    canon
        .field()
        .zip_with(lc.field(), |a, b| a - b)
        .expect("same layout")
        .rename("P")
}
