//! Newton–Gauss–Seidel relaxation for `ψ•• + ψ″ = 2Υ4 e^ψ` on a rectangle
//! with Dirichlet data.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalGrid {
    pub x2: Vec<f64>,
    pub x3: Vec<f64>,
    /// Row-major in `(x2, x3)`.
    pub psi: Vec<f64>,
    pub sweeps: usize,
    /// Max discrete residual after every tenth sweep, and the last one.
    pub history: Vec<f64>,
    pub residual: f64,
}

impl ConformalGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.psi[i * self.x3.len() + j]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelaxError {
    #[error("relaxation did not converge in {sweeps} sweeps (residual {residual:e})")]
    NoConvergence {
        sweeps: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("grid needs at least 3 points per side")]
    Grid,
    #[error("non-finite value at ({0}, {1})")]
    NonFinite(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxOptions {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions { tol: 1e-10, max_sweeps: 20_000 }
    }
}

fn linspace(r: (f64, f64), k: usize) -> Vec<f64> {
    (0..k).map(|i| r.0 + (r.1 - r.0) * i as f64 / (k - 1) as f64).collect()
}

/// `boundary(x2, x3)` fixes the edges and seeds the interior;
/// `upsilon4(x2, x3)` is the source.
pub fn relax<B, U>(
    x2: (f64, f64),
    x3: (f64, f64),
    counts: (usize, usize),
    boundary: B,
    upsilon4: U,
    opts: RelaxOptions,
) -> Result<ConformalGrid, RelaxError>
where
    B: Fn(f64, f64) -> f64,
    U: Fn(f64, f64) -> f64,
{
    let (nx, ny) = counts;
    if nx < 3 || ny < 3 {
        return Err(RelaxError::Grid);
    }
    let xs = linspace(x2, nx);
    let ys = linspace(x3, ny);
    let (dx2, dy2) = ((xs[1] - xs[0]).powi(2), (ys[1] - ys[0]).powi(2));
    let id = |i: usize, j: usize| i * ny + j;
    let mut psi = vec![0.0; nx * ny];
    let mut src = vec![0.0; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            psi[id(i, j)] = boundary(xs[i], ys[j]);
            src[id(i, j)] = 2.0 * upsilon4(xs[i], ys[j]);
        }
    }
    let residual = |psi: &[f64], i: usize, j: usize| {
        let c = psi[id(i, j)];
        (psi[id(i + 1, j)] + psi[id(i - 1, j)] - 2.0 * c) / dx2
            + (psi[id(i, j + 1)] + psi[id(i, j - 1)] - 2.0 * c) / dy2
            - src[id(i, j)] * c.exp()
    };
    let mut history = Vec::new();
    for sweep in 1..=opts.max_sweeps {
        for i in 1..nx - 1 {
            for j in 1..ny - 1 {
                let f = residual(&psi, i, j);
                let df = -2.0 / dx2 - 2.0 / dy2 - src[id(i, j)] * psi[id(i, j)].exp();
                psi[id(i, j)] -= f / df;
                if !psi[id(i, j)].is_finite() {
                    return Err(RelaxError::NonFinite(i, j));
                }
            }
        }
        let mut r = 0.0f64;
        for i in 1..nx - 1 {
            for j in 1..ny - 1 {
                r = r.max(residual(&psi, i, j).abs());
            }
        }
        if sweep % 10 == 0 || r < opts.tol {
            history.push(r);
        }
        if r < opts.tol {
            return Ok(ConformalGrid {
                x2: xs,
                x3: ys,
                psi,
                sweeps: sweep,
                history,
                residual: r,
            });
        }
    }
    let residual = history.last().copied().unwrap_or(f64::NAN);
    Err(RelaxError::NoConvergence {
        sweeps: opts.max_sweeps,
        residual,
        history,
    })
}
