//! Construction of exact 5D solutions from free data: `g2` (or the conformal
//! factor), `h5` (or `h4` and `Υ2`), integration constants, and sources.
//!
//! Every constructed piece is substituted back before it is trusted.

pub mod conformal;
pub mod ode;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ansatz5d::{
    alpha_beta, gamma, ricci_closed_form, source_compatibility, Ansatz5D, AnsatzError, ClosedFormVariant,
    EquationStat, SourceReport, SourceSpec,
};
use crate::expr::{diff, simplify, Expr};
use crate::sample::{Evaluator, SetupError};

pub use conformal::{relax, ConformalGrid, RelaxError, RelaxOptions};
pub use ode::{dopri45, OdeError, OdeTolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    UserGiven,
    ClosedForm,
    OdeIntegrated,
    Quadrature,
    /// Numerical relaxation of the conformal h-sector equation.
    Relaxed,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Setup(#[from] SetupError),
    #[error("{what} at point {point:?}")]
    Precondition { what: String, point: Vec<f64> },
    #[error("beta = 0 but alpha_{index} = {alpha:e} at {point:?}: no w solves R_4i = 0 there")]
    Inconsistent {
        index: usize,
        alpha: f64,
        point: Vec<f64>,
    },
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error("ray at x = {x:?}: {source}")]
    Ray { x: [f64; 3], source: OdeError },
    #[error("quadrature at x = {x:?}, v = {v}: {reason}")]
    Quadrature { x: [f64; 3], v: f64, reason: String },
}

/// Integration constants; all may depend on `x1, x2, x3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constants {
    pub h0: Expr,
    pub n1: [Expr; 3],
    pub n2: [Expr; 3],
    /// Lower limit of `v` quadratures and ODE initial point.
    pub v0: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            h0: Expr::one(),
            n1: [Expr::zero(), Expr::zero(), Expr::zero()],
            n2: [Expr::one(), Expr::one(), Expr::one()],
            v0: 0.0,
        }
    }
}

/// Fixed `(x1, x2, x3)` samples sharing one list of `v` values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayGrid {
    pub rays: Vec<[f64; 3]>,
    pub v: Vec<f64>,
}

impl RayGrid {
    pub fn point(x: &[f64; 3], v: f64) -> Vec<f64> {
        vec![x[0], x[1], x[2], v, 0.0]
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.rays
            .iter()
            .flat_map(|x| self.v.iter().map(move |&v| RayGrid::point(x, v)))
            .collect()
    }
}

/// Function values and `v`-derivatives along rays.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayTable {
    pub grid: RayGrid,
    /// `values[r][k]` at `grid.rays[r]`, `grid.v[k]`.
    pub values: Vec<Vec<f64>>,
    pub derivative: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampled {
    Conformal(ConformalGrid),
    Rays(RayTable),
}

fn evaluator(exprs: &[Expr]) -> Result<Evaluator, SetupError> {
    Evaluator::new(&Ansatz5D::chart(), exprs, &[], &Default::default())
}

fn eval_all(ev: &Evaluator, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, SolveError> {
    ev.eval_many(points)
        .into_iter()
        .zip(points)
        .map(|(r, p)| {
            r.map_err(|e| SolveError::Precondition {
                what: e.to_string(),
                point: p.clone(),
            })
        })
        .collect()
}

fn stat(values: impl IntoIterator<Item = (usize, f64)>) -> EquationStat {
    let mut s = EquationStat::default();
    let mut count = 0usize;
    for (i, r) in values {
        let a = r.abs();
        if s.worst.map_or(true, |(_, w)| a > w.abs()) {
            s.worst = Some((i, r));
        }
        s.max = s.max.max(a);
        s.mean += a;
        s.l2 += a * a;
        count += 1;
    }
    if count > 0 {
        s.mean /= count as f64;
    }
    s.l2 = s.l2.sqrt();
    s
}

/// `2 g2 g3 (−R²₂) − 2 g2 g3 Υ4`, the h-sector equation with denominators
/// cleared.
pub fn h_sector_residual(g2: &Expr, g3: &Expr, upsilon4: &Expr) -> Expr {
    let a = Ansatz5D {
        g2: g2.clone(),
        g3: g3.clone(),
        ..Ansatz5D::flat()
    };
    let r22 = ricci_closed_form(&a, ClosedFormVariant::KernelConsistent).r22;
    let two = g2 * g3 * 2.0;
    -(&two * r22) - two * upsilon4
}

#[derive(Debug, Clone)]
pub enum HMode {
    Verify { g3: Expr },
    /// `g2 = g3 = e^ψ` with `ψ` relaxed on a rectangle; `boundary` gives
    /// Dirichlet data and the initial interior.
    Conformal {
        boundary: Expr,
        x2: (f64, f64),
        x3: (f64, f64),
        counts: (usize, usize),
        options: RelaxOptions,
    },
}

#[derive(Debug, Clone)]
pub enum HSolution {
    Verified { g3: Expr, residual: EquationStat },
    Conformal(ConformalGrid),
}

pub fn solve_h_sector(
    g2: &Expr,
    upsilon4: &Expr,
    mode: HMode,
    points: &[Vec<f64>],
) -> Result<HSolution, SolveError> {
    match mode {
        HMode::Verify { g3 } => {
            let ev = evaluator(&[g2.clone(), h_sector_residual(g2, &g3, upsilon4)])?;
            let vals = eval_all(&ev, points)?;
            if let Some((p, _)) = points.iter().zip(&vals).find(|(_, v)| v[0] == 0.0) {
                return Err(SolveError::Precondition {
                    what: "g2 = 0".into(),
                    point: p.clone(),
                });
            }
            let residual = stat(vals.iter().map(|v| v[1]).enumerate());
            Ok(HSolution::Verified { g3, residual })
        }
        HMode::Conformal {
            boundary,
            x2,
            x3,
            counts,
            options,
        } => {
            let ev = evaluator(&[boundary, upsilon4.clone()])?;
            let at = |a: f64, b: f64, k: usize| {
                ev.eval(&[0.0, a, b, 0.0, 0.0]).map_or(f64::NAN, |v| v[k])
            };
            Ok(HSolution::Conformal(relax(
                x2,
                x3,
                counts,
                |a, b| at(a, b, 0),
                |a, b| at(a, b, 1),
                options,
            )?))
        }
    }
}

/// `h4 = h0² [(√|h5|)*]²`, the h4 for which `R⁴₄` vanishes.
pub fn vacuum_h4(h5: &Expr, h0: &Expr) -> Expr {
    let root = diff(&h5.abs().sqrt(), "v");
    simplify(&(h0 * h0 * &root * root))
}

/// The v-sector equation `R⁴₄ + Υ2`.
pub fn v_sector_residual(h4: &Expr, h5: &Expr, upsilon2: &Expr) -> Expr {
    let a = Ansatz5D {
        h4: h4.clone(),
        h5: h5.clone(),
        ..Ansatz5D::flat()
    };
    let r44 = ricci_closed_form(&a, ClosedFormVariant::KernelConsistent).r44;
    r44 + upsilon2
}

#[derive(Debug, Clone)]
pub struct OdeProblem {
    pub h4: Expr,
    pub upsilon2: Expr,
    pub v0: f64,
    /// `h5` and `h5*` at `v0`, as expressions in `x1, x2, x3`.
    pub h5_0: Expr,
    pub h5s_0: Expr,
    pub grid: RayGrid,
    pub tolerance: OdeTolerance,
}

#[derive(Debug, Clone)]
pub enum VSolution {
    Vacuum { h4: Expr, residual: EquationStat },
    Ode(RayTable),
}

/// Vacuum branch: given `h5`, return `h4` with `R⁴₄ = 0`.
pub fn solve_v_vacuum(h5: &Expr, h0: &Expr, points: &[Vec<f64>]) -> Result<VSolution, SolveError> {
    let h4 = vacuum_h4(h5, h0);
    let ev = evaluator(&[diff(h5, "v"), v_sector_residual(&h4, h5, &Expr::zero())])?;
    let vals = eval_all(&ev, points)?;
    if let Some((p, _)) = points.iter().zip(&vals).find(|(_, v)| v[0].abs() < 1e-12) {
        return Err(SolveError::Precondition {
            what: "h5* = 0".into(),
            point: p.clone(),
        });
    }
    let residual = stat(vals.iter().map(|v| v[1]).enumerate());
    Ok(VSolution::Vacuum { h4, residual })
}

/// Integrate `h5** = h5* [ln√|h4h5|]* + 2 h4 h5 Υ2` along each ray.
pub fn solve_v_ode(p: &OdeProblem) -> Result<VSolution, SolveError> {
    let coeffs = evaluator(&[p.h4.clone(), diff(&p.h4, "v"), p.upsilon2.clone()])?;
    let init = evaluator(&[p.h5_0.clone(), p.h5s_0.clone()])?;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = p
        .grid
        .rays
        .par_iter()
        .map(|x| {
            let ray_err = |source| SolveError::Ray { x: *x, source };
            let y0 = init.eval(&RayGrid::point(x, p.v0)).map_err(|e| {
                ray_err(OdeError::Rhs {
                    t: p.v0,
                    reason: e.to_string(),
                })
            })?;
            let rhs = |v: f64, y: &[f64; 2]| {
                let c = coeffs.eval(&RayGrid::point(x, v)).map_err(|e| e.to_string())?;
                let (h4, h4s, u2) = (c[0], c[1], c[2]);
                if h4 == 0.0 || y[0] == 0.0 {
                    return Err("h4 h5 = 0".to_string());
                }
                let ls = 0.5 * (h4s / h4 + y[1] / y[0]);
                Ok([y[1], y[1] * ls + 2.0 * h4 * y[0] * u2])
            };
            let (below, above): (Vec<f64>, Vec<f64>) = p.grid.v.iter().partition(|&&v| v < p.v0);
            let mut out = BTreeMap::new();
            for side in [below.into_iter().rev().collect::<Vec<_>>(), above] {
                let s = dopri45(rhs, p.v0, [y0[0], y0[1]], &side, p.tolerance).map_err(ray_err)?;
                for (v, y) in side.iter().zip(s.values) {
                    out.insert(v.to_bits(), y);
                }
            }
            let ys: Vec<[f64; 2]> = p.grid.v.iter().map(|v| out[&v.to_bits()]).collect();
            Ok((ys.iter().map(|y| y[0]).collect(), ys.iter().map(|y| y[1]).collect()))
        })
        .collect::<Result<_, SolveError>>()?;
    let (values, derivative) = rows.into_iter().unzip();
    Ok(VSolution::Ode(RayTable {
        grid: p.grid.clone(),
        values,
        derivative,
    }))
}

/// Absolute size below which `β` counts as zero at a sample point.
pub const BETA_ZERO: f64 = 1e-12;

/// `w_i = α_i/β`, which makes `R_{4i} = 0`. Where `β` vanishes on every
/// sample the user's `w_i` is kept, provided `α_i` vanishes there too.
pub fn solve_w(
    h4: &Expr,
    h5: &Expr,
    user: &[Expr; 3],
    points: &[Vec<f64>],
) -> Result<[(Expr, Provenance); 3], SolveError> {
    let a = Ansatz5D {
        h4: h4.clone(),
        h5: h5.clone(),
        ..Ansatz5D::flat()
    };
    let (alpha, beta) = alpha_beta(&a);
    let mut exprs = vec![beta.clone()];
    exprs.extend(alpha.iter().cloned());
    let vals = eval_all(&evaluator(&exprs)?, points)?;
    let beta_vanishes = beta.is_zero() || vals.iter().all(|v| v[0].abs() < BETA_ZERO);
    for (p, v) in points.iter().zip(&vals) {
        if v[0].abs() < BETA_ZERO {
            if let Some(i) = (0..3).find(|&i| v[1 + i].abs() > BETA_ZERO) {
                return Err(SolveError::Inconsistent {
                    index: i + 1,
                    alpha: v[1 + i],
                    point: p.clone(),
                });
            }
        }
    }
    Ok(std::array::from_fn(|i| {
        if beta_vanishes {
            (user[i].clone(), Provenance::UserGiven)
        } else if alpha[i].is_zero() {
            (Expr::zero(), Provenance::ClosedForm)
        } else {
            (simplify(&(&alpha[i] / &beta)), Provenance::ClosedForm)
        }
    }))
}

/// `√|h4| |h5|^{−3/2} = exp(−∫γ dv)`, the `v`-derivative of `n_i` per unit
/// `n2_i`.
pub fn n_kernel(h4: &Expr, h5: &Expr) -> Expr {
    h4.abs().sqrt() * h5.abs().powf(-1.5)
}

/// Candidate antiderivative in `v` when `K` is a power of `v` or an
/// exponential in `v` with `x`-dependent coefficients. Checked only
/// against the sample points.
fn antiderivative(k: &Expr, points: &[Vec<f64>]) -> Result<Option<Expr>, SolveError> {
    if points.is_empty() {
        return Ok(None);
    }
    let ks = diff(k, "v");
    let vq = Expr::coord("v") * &ks / k;
    let eq = &ks / k;
    let candidates = [
        k * Expr::coord("v") / (Expr::one() + &vq),
        k / &eq,
    ];
    for (q, f) in [vq, eq].iter().zip(candidates) {
        let check = evaluator(&[diff(q, "v"), diff(&f, "v") - k, k.clone(), f.clone()])?;
        let ok = check.eval_many(points).into_iter().all(|r| {
            r.is_ok_and(|v| {
                let scale = v[2].abs().max(1.0);
                v[0].abs() < 1e-10 && v[1].abs() < 1e-10 * scale && v[3].is_finite()
            })
        });
        if ok {
            return Ok(Some(simplify(&f)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub enum NSolution {
    Expr(Expr, Provenance),
    Table(RayTable),
}

/// `n_i = n1_i + n2_i ∫ √|h4| |h5|^{−3/2} dv`, which makes `R_{5i} = 0`.
///
/// When an antiderivative `F` is recognised the result is `n1 + n2 F(v)`;
/// otherwise it is tabulated as `n1 + n2 ∫_{v0}^{v}` by quadrature.
pub fn solve_n(
    h4: &Expr,
    h5: &Expr,
    n1: &Expr,
    n2: &Expr,
    v0: f64,
    grid: &RayGrid,
) -> Result<NSolution, SolveError> {
    if n2.is_zero() {
        return Ok(NSolution::Expr(n1.clone(), Provenance::ClosedForm));
    }
    let k = n_kernel(h4, h5);
    if let Some(f) = antiderivative(&k, &grid.points())? {
        return Ok(NSolution::Expr(simplify(&(n1 + n2 * f)), Provenance::ClosedForm));
    }
    let ev = evaluator(&[k, n1.clone(), n2.clone()])?;
    let rows: Vec<(Vec<f64>, Vec<f64>)> = grid
        .rays
        .par_iter()
        .map(|x| {
            let at = |v: f64| ev.eval(&RayGrid::point(x, v));
            let mut vals = Vec::with_capacity(grid.v.len());
            let mut ders = Vec::with_capacity(grid.v.len());
            for &v in &grid.v {
                let err = |reason: String| SolveError::Quadrature { x: *x, v, reason };
                let c = at(v).map_err(|e| err(e.to_string()))?;
                let failed = std::cell::RefCell::new(None);
                let q = quadrature::double_exponential::integrate(
                    |s| match at(s) {
                        Ok(r) => r[0],
                        Err(e) => {
                            failed.borrow_mut().get_or_insert(e.to_string());
                            f64::NAN
                        }
                    },
                    v0,
                    v,
                    1e-13,
                );
                if let Some(reason) = failed.into_inner() {
                    return Err(err(reason));
                }
                if !q.integral.is_finite() || q.error_estimate > 1e-9 {
                    return Err(err(format!("error estimate {:e}", q.error_estimate)));
                }
                vals.push(c[1] + c[2] * q.integral);
                ders.push(c[2] * c[0]);
            }
            Ok((vals, ders))
        })
        .collect::<Result<_, SolveError>>()?;
    let (values, derivative) = rows.into_iter().unzip();
    Ok(NSolution::Table(RayTable {
        grid: grid.clone(),
        values,
        derivative,
    }))
}

/// Sixth-order central first derivative on a uniform table; `None` near the
/// ends.
fn central_diff(f: &[f64], k: usize, step: f64) -> Option<f64> {
    if k < 3 || k + 3 >= f.len() {
        return None;
    }
    let c = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    Some((0..7).map(|j| c[j] * f[k + j - 3]).sum::<f64>() / (60.0 * step))
}

fn uniform_step(v: &[f64]) -> Option<f64> {
    let step = v.get(1)? - v.first()?;
    v.windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() < 1e-12 * step.abs().max(1.0))
        .then_some(step)
}

/// Finite-difference residuals of a tabulated `h5`:
/// `(h5 table derivative mismatch, R⁴₄ + Υ2)`.
pub fn verify_v_table(
    t: &RayTable,
    h4: &Expr,
    upsilon2: &Expr,
) -> Result<(EquationStat, EquationStat), SolveError> {
    let ev = evaluator(&[h4.clone(), diff(h4, "v"), upsilon2.clone()])?;
    let step = uniform_step(&t.grid.v).unwrap_or(f64::NAN);
    let (mut d1, mut eq) = (Vec::new(), Vec::new());
    for (r, x) in t.grid.rays.iter().enumerate() {
        for (k, &v) in t.grid.v.iter().enumerate() {
            let (Some(fd), Some(fdd)) = (
                central_diff(&t.values[r], k, step),
                central_diff(&t.derivative[r], k, step),
            ) else {
                continue;
            };
            let c = ev.eval(&RayGrid::point(x, v)).map_err(|e| SolveError::Precondition {
                what: e.to_string(),
                point: RayGrid::point(x, v),
            })?;
            let (h5, h5s) = (t.values[r][k], t.derivative[r][k]);
            let ls = 0.5 * (c[1] / c[0] + h5s / h5);
            let r44 = -(fdd - h5s * ls) / (2.0 * c[0] * h5);
            let idx = r * t.grid.v.len() + k;
            d1.push((idx, fd - h5s));
            eq.push((idx, r44 + c[2]));
        }
    }
    Ok((stat(d1), stat(eq)))
}

/// Finite-difference residual `n** + γ n*` of a tabulated `n_i`, with the
/// derivative mismatch of the table.
pub fn verify_n_table(
    t: &RayTable,
    h4: &Expr,
    h5: &Expr,
) -> Result<(EquationStat, EquationStat), SolveError> {
    let a = Ansatz5D {
        h4: h4.clone(),
        h5: h5.clone(),
        ..Ansatz5D::flat()
    };
    let ev = evaluator(&[gamma(&a, ClosedFormVariant::KernelConsistent)])?;
    let step = uniform_step(&t.grid.v).unwrap_or(f64::NAN);
    let (mut d1, mut eq) = (Vec::new(), Vec::new());
    for (r, x) in t.grid.rays.iter().enumerate() {
        for (k, &v) in t.grid.v.iter().enumerate() {
            let (Some(fd), Some(fdd)) = (
                central_diff(&t.values[r], k, step),
                central_diff(&t.derivative[r], k, step),
            ) else {
                continue;
            };
            let g = ev.eval(&RayGrid::point(x, v)).map_err(|e| SolveError::Precondition {
                what: e.to_string(),
                point: RayGrid::point(x, v),
            })?[0];
            let idx = r * t.grid.v.len() + k;
            d1.push((idx, fd - t.derivative[r][k]));
            eq.push((idx, fdd + g * t.derivative[r][k]));
        }
    }
    Ok((stat(d1), stat(eq)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BundleStatus {
    Verified,
    Unverified,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorCheck {
    pub name: String,
    pub stat: EquationStat,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    /// Full Einstein-equation residuals; absent when a sector is sampled.
    pub einstein: Option<SourceReport>,
    /// Per-sector substitution checks of sampled constructions.
    pub sectors: Vec<SectorCheck>,
    pub tolerance: f64,
    pub sampled_tolerance: f64,
    pub failures: Vec<String>,
    /// Equations that could not be checked.
    pub unchecked: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SolutionBundle {
    /// Sampled slots hold a parameter named after the slot.
    pub ansatz: Ansatz5D,
    pub source: SourceSpec,
    pub provenance: BTreeMap<String, Provenance>,
    pub constants: Constants,
    pub sampled: BTreeMap<String, Sampled>,
    pub status: BundleStatus,
    pub report: Option<VerificationReport>,
}

/// One resolved ansatz function.
#[derive(Debug, Clone)]
pub enum Part {
    Expr(Expr, Provenance),
    Sampled(Sampled, Provenance),
}

impl Part {
    pub fn user(e: Expr) -> Part {
        Part::Expr(e, Provenance::UserGiven)
    }

    pub fn expr(&self) -> Option<&Expr> {
        match self {
            Part::Expr(e, _) => Some(e),
            Part::Sampled(..) => None,
        }
    }

    fn provenance(&self) -> Provenance {
        match self {
            Part::Expr(_, p) | Part::Sampled(_, p) => *p,
        }
    }
}

/// All sectors of a solve, ready for [`assemble`].
#[derive(Debug, Clone)]
pub struct Parts {
    pub g1: f64,
    pub g2: Part,
    pub g3: Part,
    pub h4: Part,
    pub h5: Part,
    pub w: [Part; 3],
    pub n: [Part; 3],
    pub source: SourceSpec,
    pub constants: Constants,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerance {
    pub einstein: f64,
    pub sampled: f64,
}

impl Default for VerifyTolerance {
    fn default() -> Self {
        VerifyTolerance {
            einstein: 1e-6,
            sampled: 1e-5,
        }
    }
}

/// Collect the parts into a bundle and verify it on `points`.
pub fn assemble(
    parts: Parts,
    points: &[Vec<f64>],
    tol: VerifyTolerance,
) -> Result<SolutionBundle, SolveError> {
    let slots: Vec<(String, &Part)> = [
        ("g2", &parts.g2),
        ("g3", &parts.g3),
        ("h4", &parts.h4),
        ("h5", &parts.h5),
    ]
    .into_iter()
    .map(|(n, p)| (n.to_string(), p))
    .chain((0..3).map(|i| (format!("w{}", i + 1), &parts.w[i])))
    .chain((0..3).map(|i| (format!("n{}", i + 1), &parts.n[i])))
    .collect();

    let mut provenance = BTreeMap::new();
    let mut sampled = BTreeMap::new();
    let mut exprs = BTreeMap::new();
    for (name, part) in &slots {
        provenance.insert(name.clone(), part.provenance());
        let e = match part {
            Part::Expr(e, _) => e.clone(),
            Part::Sampled(s, _) => {
                sampled.insert(name.clone(), s.clone());
                Expr::param(name.as_str())
            }
        };
        exprs.insert(name.clone(), e);
    }
    let ansatz = Ansatz5D {
        g1: parts.g1,
        g2: exprs["g2"].clone(),
        g3: exprs["g3"].clone(),
        h4: exprs["h4"].clone(),
        h5: exprs["h5"].clone(),
        w: std::array::from_fn(|i| exprs[&format!("w{}", i + 1)].clone()),
        n: std::array::from_fn(|i| exprs[&format!("n{}", i + 1)].clone()),
    };

    let mut report = VerificationReport {
        einstein: None,
        sectors: Vec::new(),
        tolerance: tol.einstein,
        sampled_tolerance: tol.sampled,
        failures: Vec::new(),
        unchecked: Vec::new(),
    };
    if sampled.is_empty() {
        let r = source_compatibility(&ansatz, &parts.source, points)?;
        for (name, s) in r.structure.iter().chain(&r.equations) {
            if !(s.max < tol.einstein) {
                report.failures.push(format!("{name}: {:e}", s.max));
            }
        }
        if r.domain_errors > 0 {
            report
                .failures
                .push(format!("{} domain errors", r.domain_errors));
        }
        report.einstein = Some(r);
    } else {
        verify_sampled(&parts, points, &mut report)?;
    }
    let status = if report.failures.is_empty() && report.unchecked.is_empty() {
        BundleStatus::Verified
    } else {
        BundleStatus::Unverified
    };
    Ok(SolutionBundle {
        ansatz,
        source: parts.source,
        provenance,
        constants: parts.constants,
        sampled,
        status,
        report: Some(report),
    })
}

fn verify_sampled(
    parts: &Parts,
    points: &[Vec<f64>],
    report: &mut VerificationReport,
) -> Result<(), SolveError> {
    fn push(report: &mut VerificationReport, name: String, stat: EquationStat, tolerance: f64) {
        let pass = stat.max < tolerance;
        if !pass {
            report.failures.push(format!("{name}: {:e}", stat.max));
        }
        report.sectors.push(SectorCheck {
            name,
            stat,
            tolerance,
            pass,
        });
    }
    let symbolic = |e: Expr| -> Result<EquationStat, SolveError> {
        let vals = eval_all(&evaluator(&[e])?, points)?;
        Ok(stat(vals.iter().map(|v| v[0]).enumerate()))
    };
    let (te, ts) = (report.tolerance, report.sampled_tolerance);
    let u = &parts.source;
    match (&parts.g2, &parts.g3) {
        (Part::Sampled(Sampled::Conformal(g), _), _) => {
            push(report, "conformal discrete residual".into(), stat([(0, g.residual)]), ts);
        }
        (Part::Expr(g2, _), Part::Expr(g3, _)) => {
            let r = symbolic(h_sector_residual(g2, g3, &u.upsilon4.scale(u.k)))?;
            push(report, "h-sector".into(), r, te);
        }
        _ => report.unchecked.push("h-sector".into()),
    }
    match (&parts.h4, &parts.h5) {
        (Part::Expr(h4, _), Part::Sampled(Sampled::Rays(t), _)) => {
            let (d1, eq) = verify_v_table(t, h4, &u.upsilon2.scale(u.k))?;
            push(report, "h5 table derivative".into(), d1, ts);
            push(report, "R^4_-4+Upsilon2".into(), eq, ts);
        }
        (Part::Expr(h4, _), Part::Expr(h5, _)) => {
            let r = symbolic(v_sector_residual(h4, h5, &u.upsilon2.scale(u.k)))?;
            push(report, "R^4_-4+Upsilon2".into(), r, te);
        }
        _ => report.unchecked.push("v-sector".into()),
    }
    let (Some(h4), Some(h5)) = (parts.h4.expr(), parts.h5.expr()) else {
        report.unchecked.push("R_-4-i".into());
        report.unchecked.push("R_-5-i".into());
        return Ok(());
    };
    let mut a = Ansatz5D {
        h4: h4.clone(),
        h5: h5.clone(),
        ..Ansatz5D::flat()
    };
    for i in 0..3 {
        if let Some(w) = parts.w[i].expr() {
            a.w[i] = w.clone();
        }
        if let Some(n) = parts.n[i].expr() {
            a.n[i] = n.clone();
        }
    }
    let cf = ricci_closed_form(&a, ClosedFormVariant::KernelConsistent);
    for i in 0..3 {
        match &parts.w[i] {
            Part::Expr(..) => push(report, format!("R_-4-{}", i + 1), symbolic(cf.r4i[i].clone())?, te),
            Part::Sampled(..) => report.unchecked.push(format!("R_-4-{}", i + 1)),
        }
        match &parts.n[i] {
            Part::Expr(..) => push(report, format!("R_-5-{}", i + 1), symbolic(cf.r5i[i].clone())?, te),
            Part::Sampled(Sampled::Rays(t), _) => {
                let (d1, eq) = verify_n_table(t, h4, h5)?;
                push(report, format!("n{} table derivative", i + 1), d1, ts);
                push(report, format!("n{}**+gamma n{}*", i + 1, i + 1), eq, ts);
            }
            Part::Sampled(..) => report.unchecked.push(format!("R_-5-{}", i + 1)),
        }
    }
    Ok(())
}
