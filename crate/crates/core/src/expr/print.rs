use std::fmt;

use super::{BinaryOp, Expr, Node, UnaryOp};

// Precedence levels; a child is parenthesised when its level is below what
// the parent slot requires.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) if *c < 0.0 => UNARY,
        Node::Const(_) | Node::Coord(_) | Node::Param(_) => ATOM,
        Node::Unary(UnaryOp::Neg, _) => UNARY,
        Node::Unary(..) => ATOM,
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => SUM,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PRODUCT,
        Node::Binary(BinaryOp::Pow, ..) => POWER,
    }
}

/// Shortest text that parses back to the same value.
pub(crate) fn format_number(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value:?}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, required: u8) -> fmt::Result {
    if level(e) < required {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e.node() {
        Node::Const(c) => write!(f, "{}", format_number(*c)),
        Node::Coord(s) | Node::Param(s) => write!(f, "{s}"),
        Node::Unary(UnaryOp::Neg, a) => {
            write!(f, "-")?;
            write_child(f, a, UNARY)
        }
        Node::Unary(op, a) => {
            write!(f, "{}(", op.name())?;
            write_expr(f, a)?;
            write!(f, ")")
        }
        Node::Binary(op, a, b) => {
            let (left, right) = match op {
                BinaryOp::Add | BinaryOp::Sub => (SUM, PRODUCT),
                BinaryOp::Mul | BinaryOp::Div => (PRODUCT, UNARY),
                BinaryOp::Pow => (ATOM, UNARY),
            };
            write_child(f, a, left)?;
            match op {
                BinaryOp::Add | BinaryOp::Sub => write!(f, " {} ", op.symbol())?,
                _ => write!(f, "{}", op.symbol())?,
            }
            write_child(f, b, right)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Scope};

    fn scope() -> Scope {
        Scope::new(["x", "y", "v"], ["k"])
    }

    #[test]
    fn minimal_parentheses() {
        let s = scope();
        for (text, printed) in [
            ("x + y*v", "x + y*v"),
            ("(x + y)*v", "(x + y)*v"),
            ("x - (y - v)", "x - (y - v)"),
            ("x - y - v", "x - y - v"),
            ("(x^y)^v", "(x^y)^v"),
            ("x^y^v", "x^y^v"),
            ("-x^2", "-x^2"),
            ("(-x)^2", "(-x)^2"),
            ("x^-2", "x^-2"),
            ("x/(y*v)", "x/(y*v)"),
            ("sin(x + k)", "sin(x + k)"),
            ("x - -2", "x - -2"),
            ("(-2)^x", "(-2)^x"),
            ("0.1*x + 1e-20", "0.1*x + 1e-20"),
        ] {
            let e = parse(text, &s).unwrap();
            assert_eq!(e.to_string(), printed, "input {text}");
            assert_eq!(parse(&e.to_string(), &s).unwrap(), e);
        }
    }

    #[test]
    fn numbers_round_trip() {
        for v in [1.0, -3.0, 0.1, 1.0 / 3.0, 6.02e23, 1e-300, 2.5e15] {
            let text = format_number(v);
            let back: f64 = text.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{text}");
        }
    }
}
