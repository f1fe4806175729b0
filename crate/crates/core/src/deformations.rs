//! Connection deformations, torsion and nonmetricity traces, and the
//! Proca-like matter sector.

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::geometry::{
    curvature, einstein, einstein_mixed, levi_civita, ricci, scalar, ComponentField,
    Connection, GeometryError, NGeometry, Slot, SlotKind, Symmetry,
};
use crate::sample::{Evaluator, PointError, SetupError};

const FULL3: [Slot; 3] = [
    Slot::up(SlotKind::Full),
    Slot::down(SlotKind::Full),
    Slot::down(SlotKind::Full),
];
const FULL2: [Slot; 2] = [Slot::down(SlotKind::Full), Slot::down(SlotKind::Full)];

/// `P^α_{βγ}` with the same index layout as a connection.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationTensor {
    p: ComponentField,
}

impl DeformationTensor {
    pub fn new(field: ComponentField) -> Result<DeformationTensor, GeometryError> {
        if field.slots() != FULL3 {
            return Err(GeometryError::Dimension(format!(
                "{} does not have the layout P^α_{{βγ}}",
                field.name()
            )));
        }
        Ok(DeformationTensor {
            p: field.rename("P"),
        })
    }

    pub fn zero(n: usize, m: usize) -> DeformationTensor {
        DeformationTensor {
            p: ComponentField::zeros("P", &FULL3, n, m),
        }
    }

    /// `P^α_{βγ} = δ^α_β φ_γ`.
    pub fn weyl(phi: &CovectorField, n: usize, m: usize) -> DeformationTensor {
        DeformationTensor {
            p: ComponentField::from_fn("P", &FULL3, n, m, |x| {
                if x[0] == x[1] {
                    phi.get(x[2]).clone()
                } else {
                    Expr::zero()
                }
            }),
        }
    }

    pub fn field(&self) -> &ComponentField {
        &self.p
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &Expr {
        self.p.get(&[a, b, c])
    }

    pub fn negated(&self) -> DeformationTensor {
        DeformationTensor {
            p: self.p.map(|e| -e),
        }
    }
}

/// `φ_α` in the adapted coframe.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorField {
    comps: Vec<Expr>,
}

impl CovectorField {
    pub fn new(comps: Vec<Expr>) -> CovectorField {
        CovectorField { comps }
    }

    pub fn zero(dim: usize) -> CovectorField {
        CovectorField::new(vec![Expr::zero(); dim])
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn get(&self, a: usize) -> &Expr {
        &self.comps[a]
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn scaled(&self, k: f64) -> CovectorField {
        CovectorField::new(self.comps.iter().map(|e| e.scale(k)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceAnsatzConstants {
    pub kappa0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub mu2: f64,
    pub k: f64,
}

impl Default for TraceAnsatzConstants {
    fn default() -> Self {
        TraceAnsatzConstants {
            kappa0: 1.0,
            kappa1: 1.0,
            kappa2: 1.0,
            mu2: 0.0,
            k: 1.0,
        }
    }
}

/// How the `Λ` trace subtracts the Weyl part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaConvention {
    /// `Λ_γ = g^{βδ} Q_{δγβ} − 𝒬_γ`: the interior product acts on the
    /// `𝒬 g` term once.
    #[default]
    InteriorProduct,
    /// `Λ_γ = g^{βδ} Q_{δγβ} − (n+m) 𝒬_γ`.
    FullTrace,
}

pub fn deform(base: &Connection, p: &DeformationTensor) -> Result<Connection, GeometryError> {
    base.deformed(&p.p)
}

/// Curvature of `Γ̂ + P` from `R̂`, the covariant derivative of `P` along
/// `Γ̂` (with its torsion) and the quadratic `P ∧ P` piece.
pub fn deformed_curvature(
    geo: &NGeometry,
    r_hat: &ComponentField,
    p: &DeformationTensor,
    gamma_hat: &Connection,
) -> ComponentField {
    let d = geo.dim();
    let g = |a: usize, b: usize, c: usize| gamma_hat.get(a, b, c);
    let pp = |a: usize, b: usize, c: usize| p.get(a, b, c);
    let t_hat = crate::geometry::torsion(geo, gamma_hat);

    // ∇̂_δ P^α_{βγ}
    let nabla = |a: usize, b: usize, c: usize, dd: usize| -> Expr {
        let mut s = geo.e(dd, pp(a, b, c));
        for mu in 0..d {
            s = s + mul(g(a, mu, dd), pp(mu, b, c))
                - mul(g(mu, b, dd), pp(a, mu, c))
                - mul(g(mu, c, dd), pp(a, b, mu));
        }
        s
    };
    let mut out = r_hat.clone();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for dd in c + 1..d {
                    let mut s = nabla(a, b, c, dd) - nabla(a, b, dd, c);
                    for mu in 0..d {
                        s = s + mul(t_hat.get(&[mu, dd, c]), pp(a, b, mu))
                            + mul(pp(mu, b, c), pp(a, mu, dd))
                            - mul(pp(mu, b, dd), pp(a, mu, c));
                    }
                    let v = r_hat.get(&[a, b, c, dd]) + &s;
                    out.set(&[a, b, dd, c], -&v);
                    out.set(&[a, b, c, dd], v);
                }
            }
        }
    }
    out
}

fn mul(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        Expr::zero()
    } else {
        a * b
    }
}

/// The torsion, nonmetricity and `Λ` trace covectors.
#[derive(Debug, Clone)]
pub struct Traces {
    pub torsion: CovectorField,
    pub nonmetricity: CovectorField,
    pub lambda: CovectorField,
}

impl Traces {
    pub fn covectors(&self) -> [&CovectorField; 3] {
        [&self.torsion, &self.nonmetricity, &self.lambda]
    }
}

/// `𝒯_γ = T^α_{αγ}`, `𝒬_γ = ¼ g^{αβ} Q_{γαβ}`, and `Λ` per `conv`.
pub fn traces(
    geo: &NGeometry,
    t: &ComponentField,
    q: &ComponentField,
    conv: LambdaConvention,
) -> Traces {
    let d = geo.dim();
    let tt = (0..d)
        .map(|c| Expr::sum((0..d).map(|a| t.get(&[a, a, c]).clone())))
        .collect();
    let contract = |f: &dyn Fn(usize, usize) -> Expr| -> Expr {
        Expr::sum((0..d).flat_map(|a| (0..d).map(move |b| (a, b))).filter_map(|(a, b)| {
            let gi = geo.g_up(a, b);
            let v = f(a, b);
            (!gi.is_zero() && !v.is_zero()).then(|| gi * v)
        }))
    };
    let qq: Vec<Expr> = (0..d)
        .map(|c| contract(&|a, b| q.get(&[c, a, b]).clone()) * 0.25)
        .collect();
    let factor = match conv {
        LambdaConvention::InteriorProduct => 1.0,
        LambdaConvention::FullTrace => d as f64,
    };
    let lambda = (0..d)
        .map(|c| contract(&|b, dd| q.get(&[dd, c, b]).clone()) - qq[c].scale(factor))
        .collect();
    Traces {
        torsion: CovectorField::new(tt),
        nonmetricity: CovectorField::new(qq),
        lambda: CovectorField::new(lambda),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionalityReport {
    pub pass: bool,
    /// Max |𝒯 − κ0φ|, |𝒬 − κ1φ|, |Λ − κ2φ| over the sampled points.
    pub residuals: [f64; 3],
    pub points: usize,
    pub domain_errors: usize,
}

/// Check `𝒯 = κ0 φ`, `𝒬 = κ1 φ`, `Λ = κ2 φ` at the given points.
pub fn proportionality_check(
    geo: &NGeometry,
    traces: &Traces,
    phi: &CovectorField,
    kappa: &TraceAnsatzConstants,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<ProportionalityReport, SetupError> {
    let ks = [kappa.kappa0, kappa.kappa1, kappa.kappa2];
    let mut exprs = Vec::new();
    for (cov, k) in traces.covectors().into_iter().zip(ks) {
        for a in 0..geo.dim() {
            exprs.push(cov.get(a) - phi.get(a).scale(k));
        }
    }
    let ev = Evaluator::new(geo.chart(), &exprs, &geo.determinants(), &Default::default())?;
    let mut residuals = [0.0f64; 3];
    let mut domain_errors = 0;
    for r in ev.eval_many(points) {
        match r {
            Ok(v) => {
                for (k, chunk) in v.chunks(geo.dim()).enumerate() {
                    for x in chunk {
                        residuals[k] = residuals[k].max(x.abs());
                    }
                }
            }
            Err(_) => domain_errors += 1,
        }
    }
    Ok(ProportionalityReport {
        pass: domain_errors == 0 && residuals.iter().all(|r| *r <= tol),
        residuals,
        points: points.len(),
        domain_errors,
    })
}

/// `H_{νμ} = D̂_ν φ_μ − D̂_μ φ_ν + W^γ_{μν} φ_γ` with `D̂_ν φ_μ = e_ν φ_μ − Γ̂^γ_{μν} φ_γ`.
pub fn field_strength(geo: &NGeometry, phi: &CovectorField, gamma_hat: &Connection) -> ComponentField {
    let d = geo.dim();
    let dphi = |nu: usize, mu: usize| -> Expr {
        let mut s = geo.e(nu, phi.get(mu));
        for c in 0..d {
            s = s - mul(gamma_hat.get(c, mu, nu), phi.get(c));
        }
        s
    };
    let mut h = ComponentField::zeros("H", &FULL2, geo.n(), geo.m())
        .with_symmetry(Symmetry::Antisymmetric(0, 1));
    for nu in 0..d {
        for mu in nu + 1..d {
            let mut s = dphi(nu, mu) - dphi(mu, nu);
            for c in 0..d {
                s = s + mul(geo.w(c, mu, nu), phi.get(c));
            }
            h.set(&[mu, nu], -&s);
            h.set(&[nu, mu], s);
        }
    }
    h
}

fn raise_one(geo: &NGeometry, phi: &CovectorField) -> Vec<Expr> {
    let d = geo.dim();
    (0..d)
        .map(|a| Expr::sum((0..d).map(|b| mul(&geo.g_up(a, b), phi.get(b)))))
        .collect()
}

/// `Σ_{αβ} = H_α^μ H_{βμ} − ¼ g_{αβ} H² + μ²(φ_α φ_β − ½ g_{αβ} φ²)`.
pub fn stress(geo: &NGeometry, h: &ComponentField, phi: &CovectorField, mu2: f64) -> ComponentField {
    let d = geo.dim();
    // H_α^μ = g^{μλ} H_{αλ}
    let mixed: Vec<Vec<Expr>> = (0..d)
        .map(|a| {
            (0..d)
                .map(|mu| Expr::sum((0..d).map(|l| mul(&geo.g_up(mu, l), h.get(&[a, l])))))
                .collect()
        })
        .collect();
    let h2 = Expr::sum((0..d).flat_map(|a| {
        let mixed = &mixed;
        (0..d).map(move |mu| {
            // H^{νμ} H_{νμ} = g^{να} H_α^μ H_{νμ}
            Expr::sum((0..d).map(|nu| mul(&mul(&geo.g_up(nu, a), &mixed[a][mu]), h.get(&[nu, mu]))))
        })
    }));
    let up = raise_one(geo, phi);
    let phi2 = Expr::sum((0..d).map(|a| mul(&up[a], phi.get(a))));
    ComponentField::from_fn("Sigma", &FULL2, geo.n(), geo.m(), |x| {
        let (a, b) = (x[0], x[1]);
        let g = geo.g(a, b);
        let hh = Expr::sum((0..d).map(|mu| mul(&mixed[a][mu], h.get(&[b, mu]))));
        let mass = mul(phi.get(a), phi.get(b)) - mul(&g, &phi2) * 0.5;
        hh - mul(&g, &h2) * 0.25 + mass * mu2
    })
    .with_symmetry(Symmetry::Symmetric(0, 1))
}

/// `H² = H^{νμ} H_{νμ}` and `φ² = φ_ν φ^ν`.
pub fn invariants(geo: &NGeometry, h: &ComponentField, phi: &CovectorField) -> (Expr, Expr) {
    let d = geo.dim();
    let h2 = Expr::sum((0..d).flat_map(|nu| (0..d).map(move |mu| (nu, mu))).map(|(nu, mu)| {
        let up = Expr::sum((0..d).flat_map(|a| (0..d).map(move |b| (a, b))).map(|(a, b)| {
            mul(&mul(&geo.g_up(nu, a), &geo.g_up(mu, b)), h.get(&[a, b]))
        }));
        mul(&up, h.get(&[nu, mu]))
    }));
    let up = raise_one(geo, phi);
    let phi2 = Expr::sum((0..d).map(|a| mul(&up[a], phi.get(a))));
    (h2, phi2)
}

/// `D̂_ν H^{νμ} − μ² φ^μ`, evaluated as a residual only.
pub fn proca_residual(
    geo: &NGeometry,
    h: &ComponentField,
    phi: &CovectorField,
    gamma_hat: &Connection,
    mu2: f64,
) -> Vec<Expr> {
    let d = geo.dim();
    let hup: Vec<Vec<Expr>> = (0..d)
        .map(|nu| {
            (0..d)
                .map(|mu| {
                    Expr::sum((0..d).flat_map(|a| (0..d).map(move |b| (a, b))).map(|(a, b)| {
                        mul(&mul(&geo.g_up(nu, a), &geo.g_up(mu, b)), h.get(&[a, b]))
                    }))
                })
                .collect()
        })
        .collect();
    let phi_up = raise_one(geo, phi);
    (0..d)
        .map(|mu| {
            let mut s = Expr::zero();
            for nu in 0..d {
                s = s + geo.e(nu, &hup[nu][mu]);
                for l in 0..d {
                    s = s + mul(gamma_hat.get(nu, l, nu), &hup[l][mu])
                        + mul(gamma_hat.get(mu, l, nu), &hup[nu][l]);
                }
            }
            s - phi_up[mu].scale(mu2)
        })
        .collect()
}

/// Componentwise comparison of the canonical and Levi-Civita Einstein
/// tensors `G^α_β` of one geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcReport {
    /// Component key → max |G_canonical − G_LC| over the points.
    pub difference: Vec<(String, f64)>,
    pub max_difference: f64,
    /// Max |G_LC − Υ| when a source table was supplied.
    pub source_mismatch: Option<f64>,
    pub points: usize,
    pub domain_errors: usize,
    pub also_solves_lc: bool,
}

/// Mixed Einstein tensors `G^α_β` of `canonical` and of the Levi-Civita
/// connection.
pub fn einstein_pair(geo: &NGeometry, canonical: &Connection) -> (ComponentField, ComponentField) {
    let g_of = |conn: &Connection| {
        let ric = ricci(&curvature(geo, conn));
        let s = scalar(geo, &ric);
        einstein_mixed(geo, &einstein(geo, &ric, &s))
    };
    (g_of(canonical), g_of(&levi_civita(geo)))
}

pub fn lc_equivalence(
    geo: &NGeometry,
    canonical: &Connection,
    source: Option<&ComponentField>,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<LcReport, SetupError> {
    let (gc, gl) = einstein_pair(geo, canonical);
    let mut fields = vec![&gc, &gl];
    if let Some(s) = source {
        fields.push(s);
    }
    let ev = Evaluator::for_fields(geo.chart(), &fields, &geo.determinants())?;
    let len = gc.len();
    let mut diff = vec![0.0f64; len];
    let mut mismatch = 0.0f64;
    let mut domain_errors = 0;
    for r in ev.eval_many(points) {
        let v = match r {
            Ok(v) => v,
            Err(PointError::Domain(_)) | Err(PointError::Singular(_)) => {
                domain_errors += 1;
                continue;
            }
        };
        for k in 0..len {
            diff[k] = diff[k].max((v[k] - v[len + k]).abs());
            if source.is_some() {
                mismatch = mismatch.max((v[len + k] - v[2 * len + k]).abs());
            }
        }
    }
    let keys = gc.keys();
    let max_difference = diff.iter().copied().fold(0.0, f64::max);
    let source_mismatch = source.map(|_| mismatch);
    Ok(LcReport {
        also_solves_lc: domain_errors < points.len()
            && max_difference <= tol
            && source_mismatch.map_or(true, |m| m <= tol),
        difference: keys.into_iter().zip(diff).collect(),
        max_difference,
        source_mismatch,
        points: points.len(),
        domain_errors,
    })
}
