//! Value-preserving rewriting into a canonical sum-of-products form.
//!
//! Sums are flattened and like terms (structurally identical monomials)
//! collected; products are flattened into `coefficient · Π baseᵏ` with
//! numeric exponents merged per base. Exponents are only distributed over a
//! product or nested power when the outer exponent is an integer, so no
//! rewrite shrinks the set of points where an expression is defined.

use std::collections::HashMap;

use super::{pow, BinaryOp, Expr, Node, UnaryOp};

/// Simplify `e`. See the module docs for what is (and is not) done.
pub fn simplify(e: &Expr) -> Expr {
    Simplifier::new().simplify(e)
}

/// Memoising simplifier; reuse one instance across related expressions to
/// share work.
#[derive(Default)]
pub struct Simplifier {
    memo: HashMap<Expr, Expr>,
}

impl Simplifier {
    pub fn new() -> Simplifier {
        Simplifier::default()
    }

    pub fn simplify(&mut self, e: &Expr) -> Expr {
        if let Some(s) = self.memo.get(e) {
            return s.clone();
        }
        let out = self.rewrite(e);
        self.memo.insert(e.clone(), out.clone());
        if out != *e {
            self.memo.insert(out.clone(), out.clone());
        }
        out
    }

    fn rewrite(&mut self, e: &Expr) -> Expr {
        match e.node() {
            Node::Const(_) | Node::Coord(_) | Node::Param(_) => e.clone(),
            Node::Unary(UnaryOp::Neg, a) => {
                let a = self.simplify(a);
                let mut sum = LinComb::default();
                sum.add(&a, -1.0);
                sum.build()
            }
            Node::Unary(op, a) => {
                let a = self.simplify(a);
                function_rules(*op, &a)
            }
            Node::Binary(op @ (BinaryOp::Add | BinaryOp::Sub), a, b) => {
                let a = self.simplify(a);
                let b = self.simplify(b);
                let mut sum = LinComb::default();
                sum.add(&a, 1.0);
                sum.add(&b, if *op == BinaryOp::Add { 1.0 } else { -1.0 });
                sum.build()
            }
            Node::Binary(op @ (BinaryOp::Mul | BinaryOp::Div), a, b) => {
                let a = self.simplify(a);
                let b = self.simplify(b);
                let mut prod = Product::new();
                prod.add(&a, 1.0);
                prod.add(&b, if *op == BinaryOp::Mul { 1.0 } else { -1.0 });
                prod.build()
            }
            Node::Binary(BinaryOp::Pow, a, b) => {
                let a = self.simplify(a);
                let b = self.simplify(b);
                match b.as_const() {
                    Some(k) => {
                        let mut prod = Product::new();
                        prod.add(&a, k);
                        prod.build()
                    }
                    None => Expr::binary(BinaryOp::Pow, &a, &b),
                }
            }
        }
    }
}

fn is_integer(k: f64) -> bool {
    k.fract() == 0.0 && k.is_finite()
}

fn function_rules(op: UnaryOp, a: &Expr) -> Expr {
    if let Some(c) = a.as_const() {
        if let Some(y) = op.apply(c) {
            return Expr::constant(y);
        }
    }
    match (op, a.node()) {
        (UnaryOp::Ln, Node::Unary(UnaryOp::Exp, u)) => u.clone(),
        (UnaryOp::Exp, Node::Unary(UnaryOp::Ln, u)) => u.clone(),
        (UnaryOp::Abs, Node::Unary(UnaryOp::Abs | UnaryOp::Neg, u)) => function_rules(op, u),
        (UnaryOp::Abs, Node::Unary(UnaryOp::Exp | UnaryOp::Sqrt, _)) => a.clone(),
        (UnaryOp::Abs, Node::Binary(BinaryOp::Pow, _, k))
            if k.as_const().is_some_and(|k| is_integer(k) && k % 2.0 == 0.0) =>
        {
            a.clone()
        }
        (UnaryOp::Sqrt, Node::Binary(BinaryOp::Pow, u, k)) if k.as_const() == Some(2.0) => {
            function_rules(UnaryOp::Abs, u)
        }
        (UnaryOp::Sqrt, Node::Unary(UnaryOp::Exp, u)) => {
            let mut sum = LinComb::default();
            sum.add(u, 0.5);
            sum.build().exp()
        }
        (UnaryOp::Sin, Node::Unary(UnaryOp::Neg, u)) => Expr::raw_unary(UnaryOp::Sin, u.clone()).neg(),
        (UnaryOp::Cos, Node::Unary(UnaryOp::Neg, u)) => Expr::raw_unary(UnaryOp::Cos, u.clone()),
        _ => Expr::raw_unary(op, a.clone()),
    }
}

/// Linear combination `constant + Σ coef·monomial`.
#[derive(Default)]
struct LinComb {
    constant: f64,
    terms: Vec<(Expr, f64)>,
    index: HashMap<Expr, usize>,
}

impl LinComb {
    /// Add `coef · e`; `e` must already be simplified.
    fn add(&mut self, e: &Expr, coef: f64) {
        match e.node() {
            Node::Const(c) => self.constant += coef * c,
            Node::Binary(BinaryOp::Add, a, b) => {
                self.add(a, coef);
                self.add(b, coef);
            }
            Node::Binary(BinaryOp::Sub, a, b) => {
                self.add(a, coef);
                self.add(b, -coef);
            }
            Node::Unary(UnaryOp::Neg, a) => self.add(a, -coef),
            _ => {
                let mut prod = Product::new();
                prod.add(e, 1.0);
                let (c, mono) = prod.split();
                if c == 0.0 {
                    return;
                }
                match mono.node() {
                    // Distribute numeric factors over a bare sum.
                    Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..)
                    | Node::Unary(UnaryOp::Neg, _) => self.add(&mono, coef * c),
                    Node::Const(k) => self.constant += coef * c * k,
                    _ => self.add_term(mono, coef * c),
                }
            }
        }
    }

    fn add_term(&mut self, mono: Expr, coef: f64) {
        if let Some(&i) = self.index.get(&mono) {
            self.terms[i].1 += coef;
        } else {
            self.index.insert(mono.clone(), self.terms.len());
            self.terms.push((mono, coef));
        }
    }

    fn build(mut self) -> Expr {
        self.terms.retain(|(_, c)| *c != 0.0);
        self.terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut acc: Option<Expr> = None;
        for (mono, c) in &self.terms {
            acc = Some(match acc {
                None => with_coefficient(mono, *c),
                Some(prev) if *c < 0.0 => {
                    Expr::raw_binary(BinaryOp::Sub, prev, with_coefficient(mono, -c))
                }
                Some(prev) => Expr::raw_binary(BinaryOp::Add, prev, with_coefficient(mono, *c)),
            });
        }
        match acc {
            None => Expr::constant(self.constant),
            Some(e) if self.constant > 0.0 => {
                Expr::raw_binary(BinaryOp::Add, e, Expr::constant(self.constant))
            }
            Some(e) if self.constant < 0.0 => {
                Expr::raw_binary(BinaryOp::Sub, e, Expr::constant(-self.constant))
            }
            Some(e) => e,
        }
    }
}

/// `c · mono` in canonical shape: `mono`, `-mono`, `c*mono` or `c*num/den`.
fn with_coefficient(mono: &Expr, c: f64) -> Expr {
    if c == 1.0 {
        return mono.clone();
    }
    if c == -1.0 {
        return Expr::raw_unary(UnaryOp::Neg, mono.clone());
    }
    let k = Expr::constant(c);
    match mono.node() {
        Node::Binary(BinaryOp::Div, num, den) => {
            let num = if num.is_one() {
                k
            } else {
                Expr::raw_binary(BinaryOp::Mul, k, num.clone())
            };
            Expr::raw_binary(BinaryOp::Div, num, den.clone())
        }
        _ => Expr::raw_binary(BinaryOp::Mul, k, mono.clone()),
    }
}

/// Product `coef · Π base^exp` with numeric exponents.
struct Product {
    coef: f64,
    factors: Vec<(Expr, f64)>,
    index: HashMap<Expr, usize>,
}

impl Product {
    fn new() -> Product {
        Product {
            coef: 1.0,
            factors: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Multiply by `e^k`; `e` must already be simplified.
    fn add(&mut self, e: &Expr, k: f64) {
        if k == 0.0 {
            return;
        }
        let integral = is_integer(k);
        match e.node() {
            Node::Const(c) => {
                let v = pow(*c, k);
                if v.is_finite() {
                    self.coef *= v;
                } else {
                    self.add_base(e, k);
                }
            }
            Node::Binary(BinaryOp::Mul, a, b) if integral => {
                self.add(a, k);
                self.add(b, k);
            }
            Node::Binary(BinaryOp::Div, a, b) if integral => {
                self.add(a, k);
                self.add(b, -k);
            }
            Node::Unary(UnaryOp::Neg, a) if integral => {
                if k % 2.0 != 0.0 {
                    self.coef = -self.coef;
                }
                self.add(a, k);
            }
            Node::Binary(BinaryOp::Pow, a, p) if integral && p.as_const().is_some() => {
                let p = p.as_const().unwrap();
                match a.as_const() {
                    Some(c) if !pow(c, p * k).is_finite() || !pow(c, p).is_finite() => {
                        self.add_base(e, k)
                    }
                    _ => self.add(a, p * k),
                }
            }
            _ => self.add_base(e, k),
        }
    }

    fn add_base(&mut self, base: &Expr, k: f64) {
        if let Some(&i) = self.index.get(base) {
            self.factors[i].1 += k;
        } else {
            self.index.insert(base.clone(), self.factors.len());
            self.factors.push((base.clone(), k));
        }
    }

    /// Coefficient and the coefficient-free monomial.
    fn split(mut self) -> (f64, Expr) {
        if self.coef == 0.0 {
            return (0.0, Expr::one());
        }
        self.factors.retain(|(_, k)| *k != 0.0);
        self.factors.sort_by(|a, b| a.0.cmp(&b.0));
        let power = |base: &Expr, k: f64| {
            if k == 1.0 {
                base.clone()
            } else {
                Expr::raw_binary(BinaryOp::Pow, base.clone(), Expr::constant(k))
            }
        };
        let chain = |items: Vec<Expr>| {
            items
                .into_iter()
                .reduce(|acc, f| Expr::raw_binary(BinaryOp::Mul, acc, f))
        };
        let num: Vec<Expr> = self
            .factors
            .iter()
            .filter(|(_, k)| *k > 0.0)
            .map(|(b, k)| power(b, *k))
            .collect();
        let den: Vec<Expr> = self
            .factors
            .iter()
            .filter(|(_, k)| *k < 0.0)
            .map(|(b, k)| power(b, -k))
            .collect();
        let num = chain(num).unwrap_or_else(Expr::one);
        let mono = match chain(den) {
            Some(den) => Expr::raw_binary(BinaryOp::Div, num, den),
            None => num,
        };
        (self.coef, mono)
    }

    fn build(self) -> Expr {
        let (c, mono) = self.split();
        if c == 0.0 {
            return Expr::zero();
        }
        if mono.is_one() {
            return Expr::constant(c);
        }
        with_coefficient(&mono, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, parse, Point, Scope};

    fn s() -> Scope {
        Scope::new(["x", "y", "v", "x2"], ["k"])
    }

    fn simp(text: &str) -> String {
        simplify(&parse(text, &s()).unwrap()).to_string()
    }

    #[test]
    fn identity_elimination() {
        assert_eq!(simp("0*sin(v) + x2*1"), "x2");
    }

    #[test]
    fn like_terms_and_powers() {
        assert_eq!(simp("x + x + 2*x"), "4*x");
        assert_eq!(simp("x*x*y/x"), "x*y");
        assert_eq!(simp("x - x"), "0");
        assert_eq!(simp("x^2*x^3"), "x^5");
        assert_eq!(simp("(x*y)^2/y"), "x^2*y");
        assert_eq!(simp("-(x - y)"), "-x + y");
        assert_eq!(simp("2*(x + y) - 2*x"), "2*y");
        assert_eq!(simp("3 + x - 1"), "x + 2");
        assert_eq!(simp("x/y/x"), "1/y");
        assert_eq!(simp("-x/y*2"), "-2*x/y");
    }

    #[test]
    fn fractional_powers_are_not_distributed() {
        // (x^2)^0.5 is |x|, not x.
        let e = parse("(x^2)^0.5", &s()).unwrap();
        let p = Point::new().with("x", -3.0);
        assert_eq!(eval(&simplify(&e), &p).unwrap(), 3.0);
        let e = parse("(x*y)^0.5", &s()).unwrap();
        let p = Point::new().with("x", -3.0).with("y", -3.0);
        assert_eq!(eval(&simplify(&e), &p).unwrap(), 3.0);
    }

    #[test]
    fn function_rules_apply() {
        assert_eq!(simp("ln(exp(x))"), "x");
        assert_eq!(simp("abs(-exp(x))"), "exp(x)");
        assert_eq!(simp("sqrt(x^2)"), "abs(x)");
        assert_eq!(simp("sqrt(exp(2*v))"), "exp(v)");
        assert_eq!(simp("sin(-x) + sin(x)"), "0");
    }

    #[test]
    fn idempotent_on_samples() {
        for text in [
            "x*y + y*x - 3*(x - y)^2/(x + 1)",
            "exp(x)*exp(x)/exp(x) - sin(v)^2 + k*x^k",
            "-(-(x)) + 0.5*(x + y) - 0.5*y",
        ] {
            let once = simplify(&parse(text, &s()).unwrap());
            assert_eq!(simplify(&once), once, "{text}");
        }
    }
}
