//! Small dense matrices of expressions.

use super::GeometryError;
use crate::expr::Expr;

pub type ExprMatrix = Vec<Vec<Expr>>;

pub fn identity(n: usize) -> ExprMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Expr::one() } else { Expr::zero() })
                .collect()
        })
        .collect()
}

pub fn is_diagonal(a: &[Vec<Expr>]) -> bool {
    a.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, e)| i == j || e.is_zero()))
}

pub fn matmul(a: &[Vec<Expr>], b: &[Vec<Expr>]) -> ExprMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| Expr::sum((0..inner).map(|k| &row[k] * &b[k][j])))
                .collect()
        })
        .collect()
}

/// Symbolic determinant; cofactor expansion, intended for small blocks.
pub fn det(a: &[Vec<Expr>]) -> Expr {
    match a.len() {
        0 => Expr::one(),
        1 => a[0][0].clone(),
        2 => &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0],
        n => {
            if is_diagonal(a) {
                return (1..n).fold(a[0][0].clone(), |acc, i| acc * &a[i][i]);
            }
            Expr::sum((0..n).filter(|&j| !a[0][j].is_zero()).map(|j| {
                let term = &a[0][j] * det(&minor(a, 0, j));
                if j % 2 == 0 {
                    term
                } else {
                    -term
                }
            }))
        }
    }
}

fn minor(a: &[Vec<Expr>], r: usize, c: usize) -> ExprMatrix {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| *j != c)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

/// Symbolic inverse of a block. Diagonal blocks of any size and general
/// blocks up to 3×3 are supported; the adjugate of larger blocks grows too
/// quickly to be useful.
pub fn inverse(a: &[Vec<Expr>]) -> Result<ExprMatrix, GeometryError> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return Err(GeometryError::Dimension("inverse of a non-square block".into()));
    }
    if is_diagonal(a) {
        let mut out = identity(n);
        for i in 0..n {
            if a[i][i].is_zero() {
                return Err(GeometryError::Singular(format!(
                    "diagonal entry {} is identically zero",
                    i + 1
                )));
            }
            out[i][i] = 1.0 / &a[i][i];
        }
        return Ok(out);
    }
    if n > 3 {
        return Err(GeometryError::UnsupportedInverse(n));
    }
    let d = det(a);
    if d.is_zero() {
        return Err(GeometryError::Singular("block determinant is identically zero".into()));
    }
    let inv_d = 1.0 / &d;
    let mut out = identity(n);
    for i in 0..n {
        for j in 0..n {
            // adj(A)_{ij} = (-1)^{i+j} M_{ji}
            let c = det(&minor(a, j, i));
            let c = if (i + j) % 2 == 0 { c } else { -c };
            out[i][j] = c * &inv_d;
        }
    }
    Ok(out)
}

/// Numeric determinant by partial-pivot elimination.
pub fn det_f64(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
            .unwrap_or(c);
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, Point};

    fn num(m: &[Vec<Expr>], p: &Point) -> Vec<Vec<f64>> {
        m.iter()
            .map(|r| r.iter().map(|e| eval(e, p).unwrap()).collect())
            .collect()
    }

    #[test]
    fn three_by_three_inverse() {
        let x = Expr::coord("x");
        let a = vec![
            vec![2.0 + x.clone(), x.clone() * 0.5, Expr::constant(0.1)],
            vec![x.clone() * 0.5, Expr::constant(3.0), x.sin()],
            vec![Expr::constant(0.1), x.sin(), 1.0 + &x * &x],
        ];
        let inv = inverse(&a).unwrap();
        let p = Point::new().with("x", 0.7);
        let prod = num(&matmul(&a, &inv), &p);
        for (i, row) in prod.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-13, "{i}{j}: {v}");
            }
        }
        let d = eval(&det(&a), &p).unwrap();
        assert!((d - det_f64(num(&a, &p))).abs() < 1e-12);
    }

    #[test]
    fn large_dense_block_is_unsupported() {
        let x = Expr::coord("x");
        let a: ExprMatrix = (0..4)
            .map(|i| (0..4).map(|j| if i == j { Expr::one() } else { x.clone() }).collect())
            .collect();
        assert!(matches!(inverse(&a), Err(GeometryError::UnsupportedInverse(4))));
        let d: ExprMatrix = (0..5)
            .map(|i| (0..5).map(|j| if i == j { x.clone() + 1.0 } else { Expr::zero() }).collect())
            .collect();
        assert!(inverse(&d).is_ok());
    }
}
