//! Adaptive Dormand–Prince 4(5) stepping for small fixed-size systems.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        OdeTolerance { abs: 1e-10, rel: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("more than {0} steps")]
    TooManySteps(usize),
    #[error("right-hand side failed at t = {t}: {reason}")]
    Rhs { t: f64, reason: String },
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order ones.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

pub const MAX_STEPS: usize = 200_000;

#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    pub values: Vec<[f64; N]>,
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrate `y' = f(t, y)` from `(t0, y0)` and report `y` at each of `ts`,
/// which must be monotone in one direction away from `t0`.
pub fn dopri45<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    ts: &[f64],
    tol: OdeTolerance,
) -> Result<OdeSolution<N>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], String>,
{
    let mut call = |t: f64, y: &[f64; N]| f(t, y).map_err(|reason| OdeError::Rhs { t, reason });
    let mut out = OdeSolution {
        values: Vec::with_capacity(ts.len()),
        accepted: 0,
        rejected: 0,
    };
    let (mut t, mut y) = (t0, y0);
    let span = ts.iter().map(|s| (s - t0).abs()).fold(0.0, f64::max);
    let mut h = (span / 100.0).max(1e-6);
    let mut k = [[0.0; N]; 7];
    k[0] = call(t, &y)?;
    for &target in ts {
        let dir = if target >= t { 1.0 } else { -1.0 };
        while (target - t).abs() > 1e-14 * t.abs().max(1.0) {
            if out.accepted + out.rejected >= MAX_STEPS {
                return Err(OdeError::TooManySteps(MAX_STEPS));
            }
            let step = dir * h.min((target - t).abs());
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    for q in 0..N {
                        ys[q] += step * A[s][j] * kj[q];
                    }
                }
                k[s] = call(t + C[s] * step, &ys)?;
            }
            let mut y_new = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                for q in 0..N {
                    y_new[q] += step * A[6][j] * kj[q];
                }
            }
            let mut err = 0.0f64;
            for q in 0..N {
                let e: f64 = (0..7).map(|j| E[j] * k[j][q]).sum::<f64>() * step;
                let sc = tol.abs + tol.rel * y[q].abs().max(y_new[q].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / N as f64).sqrt();
            if err <= 1.0 {
                t += step;
                y = y_new;
                k[0] = k[6];
                out.accepted += 1;
            } else {
                out.rejected += 1;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step.abs() * fac;
            if h < 1e-13 * t.abs().max(1.0) {
                return Err(OdeError::StepUnderflow { t });
            }
        }
        t = target;
        out.values.push(y);
    }
    Ok(out)
}
