use std::collections::HashMap;

use super::{BinaryOp, Expr, Node, Symbol, UnaryOp};

/// Exact partial derivative with respect to one coordinate.
///
/// Results are memoised on structural identity, so a tree whose subtrees are
/// shared is differentiated once per distinct subtree and the output shares
/// structure in the same way.
pub struct Differentiator {
    coord: Symbol,
    cache: HashMap<Expr, Expr>,
}

impl Differentiator {
    pub fn new(coord: &str) -> Differentiator {
        Differentiator {
            coord: Symbol::from(coord),
            cache: HashMap::new(),
        }
    }

    pub fn coordinate(&self) -> &str {
        &self.coord
    }

    pub fn diff(&mut self, e: &Expr) -> Expr {
        if let Some(d) = self.cache.get(e) {
            return d.clone();
        }
        let d = self.rule(e);
        self.cache.insert(e.clone(), d.clone());
        d
    }

    fn rule(&mut self, e: &Expr) -> Expr {
        match e.node() {
            Node::Const(_) | Node::Param(_) => Expr::zero(),
            Node::Coord(s) => {
                if *s == self.coord {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Unary(op, a) => {
                let da = self.diff(a);
                if da.is_zero() {
                    return Expr::zero();
                }
                match op {
                    UnaryOp::Neg => da.neg(),
                    UnaryOp::Sin => a.cos() * da,
                    UnaryOp::Cos => -(a.sin() * da),
                    UnaryOp::Exp => e * da,
                    UnaryOp::Ln => da / a,
                    UnaryOp::Sqrt => da / (2.0 * e),
                    // d|u| = u'·u/|u|; undefined where u = 0.
                    UnaryOp::Abs => da * a / e,
                }
            }
            Node::Binary(op, a, b) => {
                let da = self.diff(a);
                let db = self.diff(b);
                match op {
                    BinaryOp::Add => da + db,
                    BinaryOp::Sub => da - db,
                    BinaryOp::Mul => da * b + a * db,
                    BinaryOp::Div => {
                        if db.is_zero() {
                            da / b
                        } else {
                            (da * b - a * db) / b.powf(2.0)
                        }
                    }
                    BinaryOp::Pow => {
                        if db.is_zero() {
                            // b · a^(b−1) · a'
                            if da.is_zero() {
                                return Expr::zero();
                            }
                            let reduced = match b.as_const() {
                                Some(c) => a.powf(c - 1.0),
                                None => a.pow(&(b - 1.0)),
                            };
                            b * reduced * da
                        } else if da.is_zero() {
                            e * a.ln() * db
                        } else {
                            e * (db * a.ln() + b * da / a)
                        }
                    }
                }
            }
        }
    }
}

/// `∂e/∂coord`.
pub fn diff(e: &Expr, coord: &str) -> Expr {
    Differentiator::new(coord).diff(e)
}
