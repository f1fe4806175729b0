//! Numeric evaluation of expression sets over many points.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{Expr, Tape};
use crate::geometry::{ComponentField, SplitChart};

/// Below this magnitude a guard expression (a block determinant) marks
/// the point singular.
pub const SINGULAR_DET: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointError {
    #[error("domain error in `{0}`")]
    Domain(String),
    #[error("singular metric block (determinant {0:e})")]
    Singular(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetupError {
    #[error("{0}")]
    Unbound(String),
    #[error("parameter '{0}' has no value")]
    MissingParameter(String),
}

/// Compiled expressions plus optional singularity guards.
#[derive(Debug, Clone)]
pub struct Evaluator {
    tape: Tape,
    outputs: usize,
    guards: usize,
    params: Vec<f64>,
}

impl Evaluator {
    pub fn new(
        chart: &SplitChart,
        exprs: &[Expr],
        guards: &[Expr],
        params: &BTreeMap<String, f64>,
    ) -> Result<Evaluator, SetupError> {
        let names = chart.names();
        let mut roots = exprs.to_vec();
        roots.extend_from_slice(guards);
        let tape = Tape::compile(&roots, &names).map_err(SetupError::Unbound)?;
        let params = tape
            .params()
            .iter()
            .map(|p| {
                params
                    .get(&**p)
                    .copied()
                    .ok_or_else(|| SetupError::MissingParameter(p.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Evaluator {
            tape,
            outputs: exprs.len(),
            guards: guards.len(),
            params,
        })
    }

    /// Evaluator for every component of the given fields, in order.
    pub fn for_fields(
        chart: &SplitChart,
        fields: &[&ComponentField],
        guards: &[Expr],
    ) -> Result<Evaluator, SetupError> {
        let exprs: Vec<Expr> = fields
            .iter()
            .flat_map(|f| f.values().iter().cloned())
            .collect();
        Evaluator::new(chart, &exprs, guards, &BTreeMap::new())
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn tape_len(&self) -> usize {
        self.tape.len()
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, PointError> {
        let mut scratch = Vec::new();
        let mut out = Vec::new();
        self.eval_with(point, &mut scratch, &mut out)?;
        Ok(out)
    }

    fn eval_with(
        &self,
        point: &[f64],
        scratch: &mut Vec<f64>,
        out: &mut Vec<f64>,
    ) -> Result<(), PointError> {
        self.tape
            .eval_into(point, &self.params, scratch, out)
            .map_err(|e| PointError::Domain(e.node))?;
        for g in out.drain(self.outputs..self.outputs + self.guards) {
            if g.abs() < SINGULAR_DET {
                return Err(PointError::Singular(g));
            }
        }
        Ok(())
    }

    /// Evaluate at every point; results keep the order of `points`
    /// whatever the thread count.
    pub fn eval_many(&self, points: &[Vec<f64>]) -> Vec<Result<Vec<f64>, PointError>> {
        points
            .par_iter()
            .map_init(
                || (Vec::new(), Vec::new()),
                |(scratch, out), p| {
                    self.eval_with(p, scratch, out)?;
                    Ok(out.clone())
                },
            )
            .collect()
    }
}

/// `count` uniform points in the box `ranges` (one `(lo, hi)` per coordinate).
/// A degenerate range `(a, a)` pins that coordinate to `a`.
pub fn random_points<R: Rng>(rng: &mut R, ranges: &[(f64, f64)], count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            ranges
                .iter()
                .map(|&(lo, hi)| if lo < hi { rng.gen_range(lo..hi) } else { lo })
                .collect()
        })
        .collect()
}

/// Relative deviation `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_dev(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn guards_and_domain_errors() {
        let c = SplitChart::new(["x"], ["v"]).unwrap();
        let e = parse("ln(v) + x", &c).unwrap();
        let guard = parse("x", &c).unwrap();
        let ev = Evaluator::new(&c, &[e], &[guard], &BTreeMap::new()).unwrap();
        assert_eq!(ev.eval(&[2.0, 1.0]).unwrap(), vec![2.0]);
        assert!(matches!(ev.eval(&[2.0, -1.0]), Err(PointError::Domain(_))));
        assert!(matches!(ev.eval(&[0.0, 1.0]), Err(PointError::Singular(_))));
        let pts = vec![vec![1.0, 1.0], vec![0.0, 1.0], vec![3.0, 1.0]];
        let r = ev.eval_many(&pts);
        assert!(r[0].is_ok() && r[1].is_err() && r[2].is_ok());
    }
}
