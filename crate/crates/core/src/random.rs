//! Seeded generators of smooth random models for the randomized suites.

use rand::Rng;

use crate::ansatz5d::Ansatz5D;
use crate::expr::Expr;
use crate::geometry::linalg::ExprMatrix;
use crate::geometry::{DMetric, GeometryError, NConnection, NGeometry, SplitChart};

/// `amp · sin(Σ c_j x_j + φ)` with `c_j ∈ [−1, 1]`.
pub fn wave<R: Rng>(rng: &mut R, coords: &[String], amp: f64) -> Expr {
    let mut arg = Expr::constant(rng.gen_range(-1.0..1.0));
    for c in coords {
        let k: f64 = rng.gen_range(-1.0..1.0);
        arg = arg + Expr::coord(c.as_str()) * k;
    }
    arg.sin() * amp
}

/// Low-degree polynomial with coefficients in `[−amp, amp]`.
pub fn poly<R: Rng>(rng: &mut R, coords: &[String], amp: f64) -> Expr {
    let mut e = Expr::constant(rng.gen_range(-amp..amp));
    for (p, c) in coords.iter().enumerate() {
        let x = Expr::coord(c.as_str());
        e = e + &x * rng.gen_range(-amp..amp);
        if let Some(d) = coords.get((p + 1) % coords.len()) {
            e = e + x * Expr::coord(d.as_str()) * rng.gen_range(-amp..amp);
        }
    }
    e
}

/// Symmetric, diagonally dominant block of smooth functions.
pub fn spd_block<R: Rng>(rng: &mut R, k: usize, coords: &[String], dense: bool) -> ExprMatrix {
    let mut b = vec![vec![Expr::zero(); k]; k];
    for i in 0..k {
        let base: f64 = rng.gen_range(1.5..2.5);
        b[i][i] = wave(rng, coords, 0.3) + wave(rng, coords, 0.2) + base;
        if dense {
            for j in i + 1..k {
                let o = wave(rng, coords, 0.25);
                b[i][j] = o.clone();
                b[j][i] = o;
            }
        }
    }
    b
}

/// Random `(g, h, N)` on an `n + m` chart with coordinates `x1..xn, y1..ym`.
/// Dense blocks need `n, m ≤ 3`.
pub fn random_geometry<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    dense: bool,
) -> Result<NGeometry, GeometryError> {
    let chart = SplitChart::new(
        (1..=n).map(|i| format!("x{i}")),
        (1..=m).map(|a| format!("y{a}")),
    )?;
    let coords: Vec<String> = chart.names().into_iter().map(String::from).collect();
    let g = spd_block(rng, n, &coords, dense);
    let h = spd_block(rng, m, &coords, dense);
    let rows = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| wave(rng, &coords, 0.5) + poly(rng, &coords, 0.3))
                .collect()
        })
        .collect();
    NGeometry::new(chart, DMetric::new(g, h)?, NConnection::from_rows(rows)?)
}

/// Random smooth 5D ansatz with `h5* ≠ 0` everywhere: `h5 = exp(b v + 0.3 sin(..))`
/// with `|b| ≥ 0.5`.
pub fn random_ansatz<R: Rng>(rng: &mut R) -> Ansatz5D {
    let h: Vec<String> = ["x2", "x3"].map(String::from).to_vec();
    let hv: Vec<String> = ["x2", "x3", "v"].map(String::from).to_vec();
    let exp_block = |rng: &mut R| {
        let b: f64 = rng.gen_range(0.5..1.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        (Expr::coord("v") * b + wave(rng, &hv, 0.3)).exp()
    };
    let h4 = exp_block(rng);
    let h5 = exp_block(rng);
    let h4 = if rng.gen_bool(0.5) { h4 } else { -h4 };
    let g1 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let g2 = wave(rng, &h, 0.4) + rng.gen_range(1.5..2.5);
    let g3 = wave(rng, &h, 0.4) + rng.gen_range(1.5..2.5);
    let w = std::array::from_fn(|_| wave(rng, &hv, 0.5) + poly(rng, &hv, 0.3));
    let n = std::array::from_fn(|_| wave(rng, &hv, 0.5) + poly(rng, &hv, 0.3));
    Ansatz5D { g1, g2, g3, h4, h5, w, n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeded_models_repeat() {
        let a = random_geometry(&mut ChaCha8Rng::seed_from_u64(3), 2, 2, true).unwrap();
        let b = random_geometry(&mut ChaCha8Rng::seed_from_u64(3), 2, 2, true).unwrap();
        assert_eq!(a.metric(), b.metric());
        assert_eq!(a.nconnection(), b.nconnection());
    }
}
