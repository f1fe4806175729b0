//! The 5D off-diagonal ansatz on `(x1, x2, x3, v, y5)`:
//! `g = diag(g1, g2, g3)`, `h = diag(h4, h5)`, `N_i^4 = w_i`, `N_i^5 = n_i`.
//!
//! Derivative shorthands below: `a•` is `∂a/∂x2`, `a′` is `∂a/∂x3`,
//! `a*` is `∂a/∂v`.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{diff, Expr};
use crate::geometry::{
    canonical_dconnection, curvature, einstein, einstein_mixed, ricci, scalar, ComponentField,
    DMetric, GeometryError, NConnection, NGeometry, Slot, SlotKind, SplitChart,
};
use crate::sample::{rel_dev, Evaluator, PointError, SetupError};

pub const X1: usize = 0;
pub const X2: usize = 1;
pub const X3: usize = 2;
pub const V: usize = 3;
pub const Y5: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnsatzError {
    #[error("{slot} may not depend on {coord}")]
    Dependence { slot: String, coord: String },
    #[error("g1 must be +1 or -1, got {0}")]
    Signature(f64),
    #[error("{0} is identically zero")]
    Zero(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Setup(#[from] SetupError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz5D {
    pub g1: f64,
    pub g2: Expr,
    pub g3: Expr,
    pub h4: Expr,
    pub h5: Expr,
    pub w: [Expr; 3],
    pub n: [Expr; 3],
}

fn check_deps(slot: &str, e: &Expr, allowed: &[&str]) -> Result<(), AnsatzError> {
    for c in e.coordinates() {
        if !allowed.contains(&&*c) {
            return Err(AnsatzError::Dependence {
                slot: slot.into(),
                coord: c.to_string(),
            });
        }
    }
    Ok(())
}

impl Ansatz5D {
    pub fn flat() -> Ansatz5D {
        Ansatz5D {
            g1: 1.0,
            g2: Expr::one(),
            g3: Expr::one(),
            h4: Expr::one(),
            h5: Expr::one(),
            w: [Expr::zero(), Expr::zero(), Expr::zero()],
            n: [Expr::zero(), Expr::zero(), Expr::zero()],
        }
    }

    pub fn chart() -> SplitChart {
        SplitChart::five_dimensional()
    }

    /// Structural checks of the coordinate dependence.
    pub fn validate(&self) -> Result<(), AnsatzError> {
        if self.g1 != 1.0 && self.g1 != -1.0 {
            return Err(AnsatzError::Signature(self.g1));
        }
        check_deps("g2", &self.g2, &["x2", "x3"])?;
        check_deps("g3", &self.g3, &["x2", "x3"])?;
        let v_sector = ["x1", "x2", "x3", "v"];
        check_deps("h4", &self.h4, &v_sector)?;
        check_deps("h5", &self.h5, &v_sector)?;
        for i in 0..3 {
            check_deps(&format!("w{}", i + 1), &self.w[i], &v_sector)?;
            check_deps(&format!("n{}", i + 1), &self.n[i], &v_sector)?;
        }
        for (name, e) in [("g2", &self.g2), ("g3", &self.g3), ("h4", &self.h4), ("h5", &self.h5)] {
            if e.is_zero() {
                return Err(AnsatzError::Zero(name.into()));
            }
        }
        Ok(())
    }

    pub fn metric(&self) -> DMetric {
        DMetric::diagonal(
            vec![Expr::constant(self.g1), self.g2.clone(), self.g3.clone()],
            vec![self.h4.clone(), self.h5.clone()],
        )
    }

    pub fn nconnection(&self) -> NConnection {
        let rows = (0..3)
            .map(|i| vec![self.w[i].clone(), self.n[i].clone()])
            .collect();
        NConnection::from_rows(rows).expect("3 x 2 table")
    }

    /// Every function of the ansatz, in a fixed order with names.
    pub fn slots(&self) -> Vec<(String, &Expr)> {
        let mut out = vec![
            ("g2".to_string(), &self.g2),
            ("g3".to_string(), &self.g3),
            ("h4".to_string(), &self.h4),
            ("h5".to_string(), &self.h5),
        ];
        for i in 0..3 {
            out.push((format!("w{}", i + 1), &self.w[i]));
        }
        for i in 0..3 {
            out.push((format!("n{}", i + 1), &self.n[i]));
        }
        out
    }
}

/// `(g, N)` of the ansatz as a geometry on the 5D chart.
pub fn build(a: &Ansatz5D) -> Result<NGeometry, AnsatzError> {
    a.validate()?;
    Ok(NGeometry::new(Ansatz5D::chart(), a.metric(), a.nconnection())?)
}

/// Which version of the mixed-component formulas to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedFormVariant {
    /// `R_{4i} = (w_i β − α_i)/2h5`, `γ = 3h5*/2h5 − h4*/2h4`; agrees with
    /// the curvature kernel.
    #[default]
    KernelConsistent,
    /// `R_{4i} = −w_i β/2h5 − α_i/2h5`, `γ = 3h5*/2h5 − h4*/h4`.
    AsPrinted,
}

#[derive(Debug, Clone)]
pub struct RicciClosedForm {
    /// `R²₂ = R³₃`
    pub r22: Expr,
    /// `R⁴₄ = R⁵₅`
    pub r44: Expr,
    pub alpha: [Expr; 3],
    pub beta: Expr,
    pub gamma: Expr,
    /// Lowered `R_{4i}`.
    pub r4i: [Expr; 3],
    /// Lowered `R_{5i}`.
    pub r5i: [Expr; 3],
}

impl RicciClosedForm {
    /// `(name, expression)` pairs of the quantities that have kernel
    /// counterparts.
    pub fn named(&self) -> Vec<(String, Expr)> {
        let mut out = vec![
            ("R^2_-2".to_string(), self.r22.clone()),
            ("R^3_-3".to_string(), self.r22.clone()),
            ("R^4_-4".to_string(), self.r44.clone()),
            ("R^5_-5".to_string(), self.r44.clone()),
        ];
        for i in 0..3 {
            out.push((format!("R_-4-{}", i + 1), self.r4i[i].clone()));
        }
        for i in 0..3 {
            out.push((format!("R_-5-{}", i + 1), self.r5i[i].clone()));
        }
        out
    }
}

/// `ln √|h4 h5|`.
fn log_root(a: &Ansatz5D) -> Expr {
    (&a.h4 * &a.h5).abs().sqrt().ln()
}

pub fn alpha_beta(a: &Ansatz5D) -> ([Expr; 3], Expr) {
    let l = log_root(a);
    let h5s = diff(&a.h5, "v");
    let alpha = ["x1", "x2", "x3"].map(|x| diff(&h5s, x) - &h5s * diff(&l, x));
    let beta = diff(&h5s, "v") - &h5s * diff(&l, "v");
    (alpha, beta)
}

pub fn gamma(a: &Ansatz5D, variant: ClosedFormVariant) -> Expr {
    let h4s = diff(&a.h4, "v");
    let h5s = diff(&a.h5, "v");
    let c = match variant {
        ClosedFormVariant::KernelConsistent => 0.5,
        ClosedFormVariant::AsPrinted => 1.0,
    };
    (h5s * 1.5) / &a.h5 - (h4s * c) / &a.h4
}

pub fn ricci_closed_form(a: &Ansatz5D, variant: ClosedFormVariant) -> RicciClosedForm {
    let d = |e: &Expr, x: &str| diff(e, x);
    let (g2, g3) = (&a.g2, &a.g3);
    let (g2b, g3b) = (d(g2, "x2"), d(g3, "x2"));
    let (g2p, g3p) = (d(g2, "x3"), d(g3, "x3"));
    let bracket = d(&g3b, "x2") - &g2b * &g3b / (g2 * 2.0) - &g3b * &g3b / (g3 * 2.0)
        + d(&g2p, "x3")
        - &g2p * &g3p / (g3 * 2.0)
        - &g2p * &g2p / (g2 * 2.0);
    let r22 = -(bracket / (g2 * g3 * 2.0));

    let (alpha, beta) = alpha_beta(a);
    let r44 = -(&beta / (&a.h4 * &a.h5 * 2.0));
    let gamma = gamma(a, variant);
    let two_h5 = &a.h5 * 2.0;
    let r4i = std::array::from_fn(|i| match variant {
        ClosedFormVariant::KernelConsistent => (&a.w[i] * &beta - &alpha[i]) / &two_h5,
        ClosedFormVariant::AsPrinted => -(&a.w[i] * &beta) / &two_h5 - &alpha[i] / &two_h5,
    });
    let r5i = std::array::from_fn(|i| {
        let ns = d(&a.n[i], "v");
        let nss = d(&ns, "v");
        -(&a.h5 / (&a.h4 * 2.0)) * (nss + &gamma * ns)
    });
    RicciClosedForm {
        r22,
        r44,
        alpha,
        beta,
        gamma,
        r4i,
        r5i,
    }
}

/// Ricci and Einstein tensors of the canonical d-connection from the
/// generic curvature kernel: lowered `R_{αβ}`, mixed `R^α_β`, mixed `G^α_β`.
pub struct KernelTensors {
    pub ricci: ComponentField,
    pub ricci_mixed: ComponentField,
    pub einstein_mixed: ComponentField,
}

pub fn kernel_tensors(geo: &NGeometry) -> KernelTensors {
    let c = canonical_dconnection(geo).to_connection();
    let ric = ricci(&curvature(geo, &c));
    let s = scalar(geo, &ric);
    let g = einstein(geo, &ric, &s);
    KernelTensors {
        ricci_mixed: einstein_mixed(geo, &ric).rename("R"),
        einstein_mixed: einstein_mixed(geo, &g),
        ricci: ric.rename("R"),
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ComponentStat {
    pub max_abs: f64,
    pub max_rel: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnsatzReport {
    pub variant: ClosedFormVariant,
    /// Closed form vs kernel, per named component.
    pub components: Vec<(String, ComponentStat)>,
    pub max_rel: f64,
    /// Largest kernel Ricci component that should vanish.
    pub zero_pattern_max: f64,
    pub points: usize,
    /// `(point index, reason)` for skipped points.
    pub skipped: Vec<(usize, String)>,
}

/// Largest `|h5*|` below which a point violates the closed-form
/// precondition.
pub const H5_STAR_MIN: f64 = 1e-12;

/// Closed forms paired with their kernel counterparts, and the kernel Ricci
/// components that must vanish.
pub struct KernelComparison {
    pub pairs: Vec<(String, Expr, Expr)>,
    pub zeros: Vec<(String, Expr)>,
    /// Block determinants of the built geometry.
    pub guards: Vec<Expr>,
    /// `h5*`, which must not vanish where the closed forms are compared.
    pub h5_star: Expr,
}

pub fn kernel_comparison(
    a: &Ansatz5D,
    variant: ClosedFormVariant,
) -> Result<KernelComparison, AnsatzError> {
    let geo = build(a)?;
    let kt = kernel_tensors(&geo);
    let named = ricci_closed_form(a, variant).named();
    let mut kernel = Vec::new();
    for k in [1, 2, 3, 4] {
        kernel.push(kt.ricci_mixed.get(&[k, k]).clone());
    }
    for b in [V, Y5] {
        for i in 0..3 {
            kernel.push(kt.ricci.get(&[b, i]).clone());
        }
    }
    let pairs = named
        .into_iter()
        .zip(kernel)
        .map(|((n, c), k)| (n, c, k))
        .collect();
    let mut zeros = vec![(kt.ricci_mixed.key(&[0, 0]), kt.ricci_mixed.get(&[0, 0]).clone())];
    for p in 0..5 {
        for q in 0..5 {
            let mixed_v = p >= V && q < V;
            if p != q && !mixed_v {
                zeros.push((kt.ricci.key(&[p, q]), kt.ricci.get(&[p, q]).clone()));
            }
        }
    }
    Ok(KernelComparison {
        pairs,
        zeros,
        guards: geo.determinants().to_vec(),
        h5_star: diff(&a.h5, "v"),
    })
}

/// Compare the closed forms with the kernel at the given points.
pub fn closed_form_vs_kernel(
    a: &Ansatz5D,
    points: &[Vec<f64>],
    variant: ClosedFormVariant,
    floor: f64,
) -> Result<AnsatzReport, AnsatzError> {
    let cmp = kernel_comparison(a, variant)?;
    let named: Vec<String> = cmp.pairs.iter().map(|(n, _, _)| n.clone()).collect();
    let mut exprs: Vec<Expr> = cmp.pairs.iter().map(|(_, c, _)| c.clone()).collect();
    exprs.extend(cmp.pairs.iter().map(|(_, _, k)| k.clone()));
    exprs.extend(cmp.zeros.iter().map(|(_, z)| z.clone()));
    let chart = Ansatz5D::chart();
    let ev = Evaluator::new(&chart, &exprs, &cmp.guards, &Default::default())?;
    let h5s = Evaluator::new(&chart, &[cmp.h5_star], &[], &Default::default())?;

    let k = named.len();
    let mut stats = vec![ComponentStat::default(); k];
    let mut zero_max = 0.0f64;
    let mut skipped = Vec::new();
    let results = ev.eval_many(points);
    for (idx, (pt, r)) in points.iter().zip(results).enumerate() {
        match h5s.eval(pt) {
            Ok(v) if v[0].abs() >= H5_STAR_MIN => {}
            Ok(_) => {
                skipped.push((idx, "h5* = 0".to_string()));
                continue;
            }
            Err(e) => {
                skipped.push((idx, e.to_string()));
                continue;
            }
        }
        let v = match r {
            Ok(v) => v,
            Err(e @ (PointError::Domain(_) | PointError::Singular(_))) => {
                skipped.push((idx, e.to_string()));
                continue;
            }
        };
        for j in 0..k {
            let (c, kv) = (v[j], v[k + j]);
            stats[j].max_abs = stats[j].max_abs.max((c - kv).abs());
            stats[j].max_rel = stats[j].max_rel.max(rel_dev(c, kv, floor));
        }
        for z in &v[2 * k..] {
            zero_max = zero_max.max(z.abs());
        }
    }
    let max_rel = stats.iter().map(|s| s.max_rel).fold(0.0, f64::max);
    Ok(AnsatzReport {
        variant,
        components: named.into_iter().zip(stats).collect(),
        max_rel,
        zero_pattern_max: zero_max,
        points: points.len(),
        skipped,
    })
}

/// Diagonal sources `Υ̂¹₁ = Υ2 + Υ4`, `Υ̂²₂ = Υ̂³₃ = Υ2`, `Υ̂⁴₄ = Υ̂⁵₅ = Υ4`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub upsilon2: Expr,
    pub upsilon4: Expr,
    /// Coupling; the equations read `G^α_β = k Υ̂^α_β`.
    pub k: f64,
}

impl SourceSpec {
    pub fn vacuum() -> SourceSpec {
        SourceSpec {
            upsilon2: Expr::zero(),
            upsilon4: Expr::zero(),
            k: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), AnsatzError> {
        check_deps("Upsilon2", &self.upsilon2, &["x2", "x3", "v"])?;
        check_deps("Upsilon4", &self.upsilon4, &["x2", "x3"])
    }

    /// Mixed `k Υ̂^α_β` as a 5 × 5 table.
    pub fn mixed(&self) -> ComponentField {
        let slots = [Slot::up(SlotKind::Full), Slot::down(SlotKind::Full)];
        let u2 = self.upsilon2.scale(self.k);
        let u4 = self.upsilon4.scale(self.k);
        ComponentField::from_fn("Upsilon", &slots, 3, 2, |x| {
            if x[0] != x[1] {
                return Expr::zero();
            }
            match x[0] {
                0 => &u2 + &u4,
                1 | 2 => u2.clone(),
                _ => u4.clone(),
            }
        })
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EquationStat {
    pub max: f64,
    pub mean: f64,
    pub l2: f64,
    /// Point index and value of the largest residual.
    pub worst: Option<(usize, f64)>,
}

impl EquationStat {
    fn push(&mut self, idx: usize, r: f64, count: &mut usize) {
        let a = r.abs();
        if self.worst.map_or(true, |(_, w)| a > w.abs()) {
            self.worst = Some((idx, r));
        }
        self.max = self.max.max(a);
        self.mean += a;
        self.l2 += a * a;
        *count += 1;
    }

    fn finish(&mut self, count: usize) {
        if count > 0 {
            self.mean /= count as f64;
        }
        self.l2 = self.l2.sqrt();
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SourceReport {
    /// Einstein-block structure `G¹₁ + R²₂ + R⁴₄`, `G²₂ + R⁴₄`, ... (all 0).
    pub structure: Vec<(String, EquationStat)>,
    /// Field equations `G^α_β − kΥ̂^α_β` grouped as in the corollary.
    pub equations: Vec<(String, EquationStat)>,
    pub points: usize,
    pub domain_errors: usize,
}

impl SourceReport {
    pub fn max_structure(&self) -> f64 {
        self.structure.iter().map(|(_, s)| s.max).fold(0.0, f64::max)
    }

    pub fn max_equation(&self) -> f64 {
        self.equations.iter().map(|(_, s)| s.max).fold(0.0, f64::max)
    }
}

/// Names of the five field-equation groups.
pub const EQUATION_GROUPS: [&str; 5] = ["G^1_-1", "G^2_-2=G^3_-3", "G^4_-4=G^5_-5", "R_-4-i", "R_-5-i"];

/// Residual expressions of the five equation groups; each group is a
/// list of expressions that must vanish.
pub fn field_equation_residuals(kt: &KernelTensors, s: &SourceSpec) -> Vec<Vec<Expr>> {
    let g = &kt.einstein_mixed;
    let u = s.mixed();
    let res = |k: usize| g.get(&[k, k]) - u.get(&[k, k]);
    vec![
        vec![res(0)],
        vec![res(1), res(2)],
        vec![res(3), res(4)],
        (0..3).map(|i| kt.ricci.get(&[V, i]).clone()).collect(),
        (0..3).map(|i| kt.ricci.get(&[Y5, i]).clone()).collect(),
    ]
}

/// Einstein-block structure and field-equation residuals, as expressions.
pub struct EinsteinChecks {
    pub structure: Vec<(String, Vec<Expr>)>,
    pub equations: Vec<(String, Vec<Expr>)>,
    pub guards: Vec<Expr>,
}

pub fn einstein_checks(a: &Ansatz5D, s: &SourceSpec) -> Result<EinsteinChecks, AnsatzError> {
    s.validate()?;
    let geo = build(a)?;
    let kt = kernel_tensors(&geo);
    let g = &kt.einstein_mixed;
    let r = &kt.ricci_mixed;
    let r22 = r.get(&[1, 1]);
    let r44 = r.get(&[3, 3]);
    let structure = vec![
        ("G^1_-1+R^2_-2+R^4_-4".to_string(), vec![g.get(&[0, 0]) + r22 + r44]),
        ("G^2_-2+R^4_-4".to_string(), vec![g.get(&[1, 1]) + r44]),
        ("G^3_-3+R^4_-4".to_string(), vec![g.get(&[2, 2]) + r44]),
        ("G^4_-4+R^2_-2".to_string(), vec![g.get(&[3, 3]) + r22]),
        ("G^5_-5+R^2_-2".to_string(), vec![g.get(&[4, 4]) + r22]),
    ];
    let equations = EQUATION_GROUPS
        .iter()
        .map(|n| n.to_string())
        .zip(field_equation_residuals(&kt, s))
        .collect();
    Ok(EinsteinChecks {
        structure,
        equations,
        guards: geo.determinants().to_vec(),
    })
}

pub fn source_compatibility(
    a: &Ansatz5D,
    s: &SourceSpec,
    points: &[Vec<f64>],
) -> Result<SourceReport, AnsatzError> {
    let c = einstein_checks(a, s)?;
    let (st, eq, domain_errors) = residual_stats(&c.guards, &c.structure, &c.equations, points)?;
    Ok(SourceReport {
        structure: st,
        equations: eq,
        points: points.len(),
        domain_errors,
    })
}

type Stats = Vec<(String, EquationStat)>;

/// Evaluate grouped residual expressions and reduce them per group.
pub fn residual_stats(
    guards: &[Expr],
    a: &[(String, Vec<Expr>)],
    b: &[(String, Vec<Expr>)],
    points: &[Vec<f64>],
) -> Result<(Stats, Stats, usize), AnsatzError> {
    let groups: Vec<&(String, Vec<Expr>)> = a.iter().chain(b).collect();
    let exprs: Vec<Expr> = groups.iter().flat_map(|(_, e)| e.iter().cloned()).collect();
    let ev = Evaluator::new(&Ansatz5D::chart(), &exprs, guards, &Default::default())?;
    let mut stats = vec![EquationStat::default(); groups.len()];
    let mut counts = vec![0usize; groups.len()];
    let mut domain_errors = 0;
    for (idx, r) in ev.eval_many(points).into_iter().enumerate() {
        let v = match r {
            Ok(v) => v,
            Err(_) => {
                domain_errors += 1;
                continue;
            }
        };
        let mut off = 0;
        for (g, (_, es)) in groups.iter().enumerate() {
            for x in &v[off..off + es.len()] {
                stats[g].push(idx, *x, &mut counts[g]);
            }
            off += es.len();
        }
    }
    for (s, c) in stats.iter_mut().zip(&counts) {
        s.finish(*c);
    }
    let mut named: Vec<(String, EquationStat)> =
        groups.iter().map(|(n, _)| n.clone()).zip(stats).collect();
    let second = named.split_off(a.len());
    Ok((named, second, domain_errors))
}
