use super::linalg::ExprMatrix;
use super::GeometryError;
use crate::expr::{simplify, Expr};

/// Coefficients `N_i^a`, stored as an `n × m` table (`coeffs[i][a]`).
#[derive(Debug, Clone, PartialEq)]
pub struct NConnection {
    coeffs: ExprMatrix,
    n: usize,
    m: usize,
}

impl NConnection {
    pub fn zero(n: usize, m: usize) -> NConnection {
        NConnection {
            coeffs: vec![vec![Expr::zero(); m]; n],
            n,
            m,
        }
    }

    pub fn from_rows(coeffs: ExprMatrix) -> Result<NConnection, GeometryError> {
        let n = coeffs.len();
        let m = coeffs.first().map_or(0, Vec::len);
        if n == 0 || m == 0 || coeffs.iter().any(|r| r.len() != m) {
            return Err(GeometryError::Dimension(
                "N-connection table must be a non-empty n × m array".into(),
            ));
        }
        Ok(NConnection { coeffs, n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `N_i^a` with zero-based local indices.
    pub fn get(&self, i: usize, a: usize) -> &Expr {
        &self.coeffs[i][a]
    }

    pub fn set(&mut self, i: usize, a: usize, value: Expr) {
        self.coeffs[i][a] = value;
    }

    pub fn rows(&self) -> &ExprMatrix {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(Expr::is_zero)
    }
}

/// Block metric `g_ij ⊕ h_ab` in the N-adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DMetric {
    g: ExprMatrix,
    h: ExprMatrix,
}

impl DMetric {
    pub fn new(g: ExprMatrix, h: ExprMatrix) -> Result<DMetric, GeometryError> {
        for (name, b) in [("g", &g), ("h", &h)] {
            let k = b.len();
            if k == 0 || b.iter().any(|r| r.len() != k) {
                return Err(GeometryError::Dimension(format!(
                    "metric block {name} must be a non-empty square array"
                )));
            }
            for i in 0..k {
                for j in i + 1..k {
                    if b[i][j] != b[j][i] && !simplify(&(&b[i][j] - &b[j][i])).is_zero() {
                        return Err(GeometryError::Symmetry(format!(
                            "{name}_{}{} != {name}_{}{}",
                            i + 1,
                            j + 1,
                            j + 1,
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(DMetric { g, h })
    }

    pub fn diagonal(g: Vec<Expr>, h: Vec<Expr>) -> DMetric {
        fn diag(d: Vec<Expr>) -> ExprMatrix {
            let k = d.len();
            d.into_iter()
                .enumerate()
                .map(|(i, e)| {
                    let mut row = vec![Expr::zero(); k];
                    row[i] = e;
                    row
                })
                .collect()
        }
        DMetric {
            g: diag(g),
            h: diag(h),
        }
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn m(&self) -> usize {
        self.h.len()
    }

    pub fn g(&self) -> &ExprMatrix {
        &self.g
    }

    pub fn h(&self) -> &ExprMatrix {
        &self.h
    }

    /// Component of the block-diagonal adapted metric, full indices.
    pub fn adapted(&self, alpha: usize, beta: usize) -> Expr {
        let n = self.n();
        match (alpha < n, beta < n) {
            (true, true) => self.g[alpha][beta].clone(),
            (false, false) => self.h[alpha - n][beta - n].clone(),
            _ => Expr::zero(),
        }
    }
}
