use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{Expr, Node};

/// Coordinate and parameter values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point {
    pub coords: BTreeMap<String, f64>,
    pub params: BTreeMap<String, f64>,
}

impl Point {
    pub fn new() -> Point {
        Point::default()
    }

    pub fn with(mut self, coord: &str, value: f64) -> Point {
        self.coords.insert(coord.to_string(), value);
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Point {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, coord: &str, value: f64) {
        self.coords.insert(coord.to_string(), value);
    }

    pub fn coord(&self, name: &str) -> Option<f64> {
        self.coords.get(name).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{node}`")]
    Domain { node: String },
    #[error("no value bound for '{0}'")]
    Unbound(String),
}

/// Evaluate `e` at `p` in double precision.
///
/// Division by zero, `ln` of a nonpositive number, `sqrt` of a negative
/// number and any non-finite intermediate are reported as
/// [`EvalError::Domain`] naming the offending subexpression.
pub fn eval(e: &Expr, p: &Point) -> Result<f64, EvalError> {
    let mut memo = HashMap::new();
    eval_inner(e, p, &mut memo)
}

fn eval_inner(e: &Expr, p: &Point, memo: &mut HashMap<usize, f64>) -> Result<f64, EvalError> {
    if let Some(v) = memo.get(&e.ptr_key()) {
        return Ok(*v);
    }
    let value = match e.node() {
        Node::Const(c) => *c,
        Node::Coord(s) => p
            .coords
            .get(&**s)
            .copied()
            .ok_or_else(|| EvalError::Unbound(s.to_string()))?,
        Node::Param(s) => p
            .params
            .get(&**s)
            .copied()
            .ok_or_else(|| EvalError::Unbound(s.to_string()))?,
        Node::Unary(op, a) => {
            let x = eval_inner(a, p, memo)?;
            op.apply(x).ok_or_else(|| domain(e))?
        }
        Node::Binary(op, a, b) => {
            let x = eval_inner(a, p, memo)?;
            let y = eval_inner(b, p, memo)?;
            op.apply(x, y).ok_or_else(|| domain(e))?
        }
    };
    memo.insert(e.ptr_key(), value);
    Ok(value)
}

fn domain(e: &Expr) -> EvalError {
    EvalError::Domain {
        node: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Scope};

    #[test]
    fn pole_is_a_domain_error_at_the_division() {
        let s = Scope::new(["v"], Vec::<String>::new());
        let e = parse("1/v", &s).unwrap();
        let err = eval(&e, &Point::new().with("v", 0.0)).unwrap_err();
        assert_eq!(
            err,
            EvalError::Domain {
                node: "1/v".into()
            }
        );
    }

    #[test]
    fn logarithm_and_root_domains() {
        let s = Scope::new(["v"], Vec::<String>::new());
        let p = Point::new().with("v", -1.0);
        assert!(eval(&parse("ln(v)", &s).unwrap(), &p).is_err());
        assert!(eval(&parse("sqrt(v)", &s).unwrap(), &p).is_err());
        assert_eq!(eval(&parse("sqrt(abs(v))", &s).unwrap(), &p).unwrap(), 1.0);
        assert!(eval(&parse("v^0.5", &s).unwrap(), &p).is_err());
    }

    #[test]
    fn unbound_symbols_are_reported() {
        let s = Scope::new(["v", "x"], Vec::<String>::new());
        let e = parse("v + x", &s).unwrap();
        assert_eq!(
            eval(&e, &Point::new().with("v", 1.0)),
            Err(EvalError::Unbound("x".into()))
        );
    }
}
