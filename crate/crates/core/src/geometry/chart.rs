use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::expr::{Expr, Vocabulary};

/// Whether a full index lies in the horizontal or vertical subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subspace {
    Horizontal,
    Vertical,
}

/// An `(n+m)`-dimensional chart with coordinates `(x^1..x^n, y^{n+1}..y^{n+m})`.
///
/// Indices used throughout the crate are zero-based full indices
/// `0..n+m`; the first `n` are horizontal. Printed component keys use the
/// one-based labels `1..=n+m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitChart {
    horizontal: Vec<String>,
    vertical: Vec<String>,
    signature: Vec<i8>,
}

impl SplitChart {
    pub fn new<H, V, S1, S2>(horizontal: H, vertical: V) -> Result<SplitChart, GeometryError>
    where
        H: IntoIterator<Item = S1>,
        V: IntoIterator<Item = S2>,
        S1: Into<String>,
        S2: Into<String>,
    {
        let horizontal: Vec<String> = horizontal.into_iter().map(Into::into).collect();
        let vertical: Vec<String> = vertical.into_iter().map(Into::into).collect();
        let dim = horizontal.len() + vertical.len();
        SplitChart::with_signature(horizontal, vertical, vec![1; dim])
    }

    pub fn with_signature(
        horizontal: Vec<String>,
        vertical: Vec<String>,
        signature: Vec<i8>,
    ) -> Result<SplitChart, GeometryError> {
        if horizontal.is_empty() || vertical.is_empty() {
            return Err(GeometryError::Chart(
                "both the horizontal and vertical parts need at least one coordinate".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for name in horizontal.iter().chain(&vertical) {
            if !is_identifier(name) {
                return Err(GeometryError::Chart(format!(
                    "'{name}' is not a valid coordinate name"
                )));
            }
            if crate::expr::UnaryOp::is_function_name(name) {
                return Err(GeometryError::Chart(format!(
                    "'{name}' clashes with a function name"
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(GeometryError::Chart(format!("duplicate coordinate '{name}'")));
            }
        }
        if signature.len() != horizontal.len() + vertical.len() {
            return Err(GeometryError::Chart(format!(
                "signature has {} entries for {} coordinates",
                signature.len(),
                horizontal.len() + vertical.len()
            )));
        }
        if signature.iter().any(|s| *s != 1 && *s != -1) {
            return Err(GeometryError::Chart("signature flags must be +1 or -1".into()));
        }
        Ok(SplitChart {
            horizontal,
            vertical,
            signature,
        })
    }

    /// The 5D chart `(x1, x2, x3, v, y5)` used by the off-diagonal ansatz.
    pub fn five_dimensional() -> SplitChart {
        SplitChart::new(["x1", "x2", "x3"], ["v", "y5"]).expect("static chart is valid")
    }

    pub fn n(&self) -> usize {
        self.horizontal.len()
    }

    pub fn m(&self) -> usize {
        self.vertical.len()
    }

    pub fn dim(&self) -> usize {
        self.n() + self.m()
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn subspace(&self, alpha: usize) -> Subspace {
        if alpha < self.n() {
            Subspace::Horizontal
        } else {
            Subspace::Vertical
        }
    }

    pub fn name(&self, alpha: usize) -> &str {
        if alpha < self.n() {
            &self.horizontal[alpha]
        } else {
            &self.vertical[alpha - self.n()]
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.horizontal
            .iter()
            .chain(&self.vertical)
            .map(String::as_str)
            .collect()
    }

    pub fn horizontal_names(&self) -> &[String] {
        &self.horizontal
    }

    pub fn vertical_names(&self) -> &[String] {
        &self.vertical
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names().iter().position(|n| *n == name)
    }

    pub fn coordinate(&self, alpha: usize) -> Expr {
        Expr::coord(self.name(alpha))
    }
}

impl Vocabulary for SplitChart {
    fn is_coordinate(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    fn is_parameter(&self, _name: &str) -> bool {
        false
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_charts() {
        assert!(SplitChart::new(Vec::<String>::new(), ["v"]).is_err());
        assert!(SplitChart::new(["x"], Vec::<String>::new()).is_err());
        assert!(SplitChart::new(["x", "x"], ["v"]).is_err());
        assert!(SplitChart::new(["x"], ["sin"]).is_err());
        assert!(SplitChart::new(["1x"], ["v"]).is_err());
    }

    #[test]
    fn index_layout() {
        let c = SplitChart::five_dimensional();
        assert_eq!((c.n(), c.m(), c.dim()), (3, 2, 5));
        assert_eq!(c.name(3), "v");
        assert_eq!(c.subspace(2), Subspace::Horizontal);
        assert_eq!(c.subspace(4), Subspace::Vertical);
        assert_eq!(c.index_of("y5"), Some(4));
    }
}
