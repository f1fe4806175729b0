//! Flat instruction tape for evaluating many expressions at many points.
//!
//! Compilation deduplicates structurally identical subtrees across all
//! roots, so quantities that share subexpressions (curvature components,
//! residual sets) are computed once per point.

use std::collections::HashMap;

use thiserror::Error;

use super::{BinaryOp, Expr, Node, Symbol, UnaryOp};

#[derive(Debug, Clone, Copy)]
enum Instr {
    Const(f64),
    Coord(u32),
    Param(u32),
    Unary(UnaryOp, u32),
    Binary(BinaryOp, u32, u32),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error in `{node}`")]
pub struct DomainError {
    pub node: String,
}

/// Compiled set of expressions sharing one instruction stream.
#[derive(Debug, Clone)]
pub struct Tape {
    instrs: Vec<Instr>,
    sources: Vec<Expr>,
    outputs: Vec<u32>,
    coords: Vec<Symbol>,
    params: Vec<Symbol>,
}

impl Tape {
    /// Compile `roots`. Coordinates are bound positionally in the order of
    /// `coords`; any coordinate a root uses must be listed. Parameters are
    /// collected and bound by name via [`Tape::params`].
    pub fn compile(roots: &[Expr], coords: &[&str]) -> Result<Tape, String> {
        let mut b = Builder {
            instrs: Vec::new(),
            sources: Vec::new(),
            memo: HashMap::new(),
            coord_slots: coords
                .iter()
                .enumerate()
                .map(|(i, c)| (Symbol::from(*c), i as u32))
                .collect(),
            params: Vec::new(),
        };
        let mut outputs = Vec::with_capacity(roots.len());
        for r in roots {
            outputs.push(b.emit(r)?);
        }
        Ok(Tape {
            instrs: b.instrs,
            sources: b.sources,
            outputs,
            coords: coords.iter().map(|c| Symbol::from(*c)).collect(),
            params: b.params,
        })
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn coords(&self) -> &[Symbol] {
        &self.coords
    }

    /// Parameter names in the order `eval` expects their values.
    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    /// Evaluate every root; `out` is resized to the number of roots.
    pub fn eval_into(
        &self,
        coords: &[f64],
        params: &[f64],
        scratch: &mut Vec<f64>,
        out: &mut Vec<f64>,
    ) -> Result<(), DomainError> {
        scratch.clear();
        scratch.reserve(self.instrs.len());
        for (i, ins) in self.instrs.iter().enumerate() {
            let v = match *ins {
                Instr::Const(c) => c,
                Instr::Coord(k) => coords[k as usize],
                Instr::Param(k) => params[k as usize],
                Instr::Unary(op, a) => match op.apply(scratch[a as usize]) {
                    Some(v) => v,
                    None => return Err(self.domain(i)),
                },
                Instr::Binary(op, a, b) => {
                    match op.apply(scratch[a as usize], scratch[b as usize]) {
                        Some(v) => v,
                        None => return Err(self.domain(i)),
                    }
                }
            };
            scratch.push(v);
        }
        out.clear();
        out.extend(self.outputs.iter().map(|&k| scratch[k as usize]));
        Ok(())
    }

    pub fn eval(&self, coords: &[f64], params: &[f64]) -> Result<Vec<f64>, DomainError> {
        let mut scratch = Vec::new();
        let mut out = Vec::new();
        self.eval_into(coords, params, &mut scratch, &mut out)?;
        Ok(out)
    }

    fn domain(&self, i: usize) -> DomainError {
        DomainError {
            node: self.sources[i].to_string(),
        }
    }
}

struct Builder {
    instrs: Vec<Instr>,
    sources: Vec<Expr>,
    memo: HashMap<Expr, u32>,
    coord_slots: HashMap<Symbol, u32>,
    params: Vec<Symbol>,
}

impl Builder {
    fn emit(&mut self, e: &Expr) -> Result<u32, String> {
        if let Some(&k) = self.memo.get(e) {
            return Ok(k);
        }
        let ins = match e.node() {
            Node::Const(c) => Instr::Const(*c),
            Node::Coord(s) => match self.coord_slots.get(s) {
                Some(&k) => Instr::Coord(k),
                None => return Err(format!("coordinate '{s}' is not bound by the tape")),
            },
            Node::Param(s) => {
                let k = match self.params.iter().position(|p| p == s) {
                    Some(k) => k,
                    None => {
                        self.params.push(s.clone());
                        self.params.len() - 1
                    }
                };
                Instr::Param(k as u32)
            }
            Node::Unary(op, a) => {
                let a = self.emit(a)?;
                Instr::Unary(*op, a)
            }
            Node::Binary(op, a, b) => {
                let a = self.emit(a)?;
                let b = self.emit(b)?;
                Instr::Binary(*op, a, b)
            }
        };
        let k = self.instrs.len() as u32;
        self.instrs.push(ins);
        self.sources.push(e.clone());
        self.memo.insert(e.clone(), k);
        Ok(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, parse, Point, Scope};

    #[test]
    fn shared_subtrees_compile_once() {
        let s = Scope::new(["x", "v"], ["k"]);
        let a = parse("sin(x*v) + k", &s).unwrap();
        let b = parse("sin(x*v)^2", &s).unwrap();
        let tape = Tape::compile(&[a.clone(), b.clone()], &["x", "v"]).unwrap();
        // x, v, x*v, sin, k, +, 2, ^
        assert_eq!(tape.len(), 8);
        let out = tape.eval(&[0.3, 2.0], &[1.5]).unwrap();
        let p = Point::new().with("x", 0.3).with("v", 2.0).with_param("k", 1.5);
        assert_eq!(out[0], eval(&a, &p).unwrap());
        assert_eq!(out[1], eval(&b, &p).unwrap());
    }

    #[test]
    fn domain_errors_name_the_node() {
        let s = Scope::new(["v"], Vec::<String>::new());
        let e = parse("1 + ln(v)", &s).unwrap();
        let tape = Tape::compile(&[e], &["v"]).unwrap();
        let err = tape.eval(&[-1.0], &[]).unwrap_err();
        assert_eq!(err.node, "ln(v)");
    }

    #[test]
    fn unbound_coordinate_is_rejected() {
        let s = Scope::new(["v", "x"], Vec::<String>::new());
        let e = parse("x*v", &s).unwrap();
        assert!(Tape::compile(&[e], &["v"]).is_err());
    }
}
