//! Symbolic scalar fields over chart coordinates.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Every node caches a
//! structural hash computed at construction, so equality tests and the
//! common-subexpression tables used by [`Tape`] and [`simplify`] are cheap.
//! Subtrees are shared through `Arc`; sharing never changes what an
//! expression means.
//!
//! The algebra is closed under [`diff`]: constants, coordinates, named
//! parameters, `neg sin cos exp ln sqrt abs`, and `+ - * / ^`.

mod diff;
mod eval;
mod parse;
mod print;
mod simplify;
mod tape;

use std::cmp::Ordering;
use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub use diff::{diff, Differentiator};
pub use eval::{eval, EvalError, Point};
pub use parse::{parse, ParseError, Scope, Vocabulary};
pub use simplify::{simplify, Simplifier};
pub use tape::{DomainError, Tape};

/// Interned-ish symbol name. Cloning is a refcount bump.
pub type Symbol = Arc<str>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
        }
    }

    pub fn is_function_name(name: &str) -> bool {
        UnaryOp::from_function_name(name).is_some()
    }

    pub(crate) fn from_function_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            "abs" => UnaryOp::Abs,
            _ => return None,
        })
    }

    /// Numeric application; `None` when the argument is outside the domain.
    pub(crate) fn apply(self, x: f64) -> Option<f64> {
        let y = match self {
            UnaryOp::Neg => -x,
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Exp => x.exp(),
            UnaryOp::Ln => {
                if x <= 0.0 {
                    return None;
                }
                x.ln()
            }
            UnaryOp::Sqrt => {
                if x < 0.0 {
                    return None;
                }
                x.sqrt()
            }
            UnaryOp::Abs => x.abs(),
        };
        y.is_finite().then_some(y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }

    pub(crate) fn apply(self, a: f64, b: f64) -> Option<f64> {
        let y = match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b == 0.0 {
                    return None;
                }
                a / b
            }
            BinaryOp::Pow => pow(a, b),
        };
        y.is_finite().then_some(y)
    }
}

pub(crate) fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Coord(Symbol),
    Param(Symbol),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    hash: u64,
}

/// Immutable symbolic expression.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl Expr {
    fn from_node(node: Node) -> Expr {
        let mut h = DefaultHasher::new();
        match &node {
            Node::Const(c) => {
                0u8.hash(&mut h);
                c.to_bits().hash(&mut h);
            }
            Node::Coord(s) => {
                1u8.hash(&mut h);
                s.hash(&mut h);
            }
            Node::Param(s) => {
                2u8.hash(&mut h);
                s.hash(&mut h);
            }
            Node::Unary(op, a) => {
                3u8.hash(&mut h);
                op.hash(&mut h);
                a.0.hash.hash(&mut h);
            }
            Node::Binary(op, a, b) => {
                4u8.hash(&mut h);
                op.hash(&mut h);
                a.0.hash.hash(&mut h);
                b.0.hash.hash(&mut h);
            }
        }
        Expr(Arc::new(Inner {
            hash: h.finish(),
            node,
        }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    /// True when both handles point at the same allocation.
    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub(crate) fn ptr_key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    // ---- leaves -------------------------------------------------------

    /// Numeric constant. `-0.0` is normalised to `0.0`.
    pub fn constant(value: f64) -> Expr {
        let value = if value == 0.0 { 0.0 } else { value };
        Expr::from_node(Node::Const(value))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn coord(name: impl Into<Symbol>) -> Expr {
        Expr::from_node(Node::Coord(name.into()))
    }

    pub fn param(name: impl Into<Symbol>) -> Expr {
        Expr::from_node(Node::Param(name.into()))
    }

    // ---- raw constructors (no rewriting) -----------------------------

    pub(crate) fn raw_unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::from_node(Node::Unary(op, a))
    }

    pub(crate) fn raw_binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::from_node(Node::Binary(op, a, b))
    }

    // ---- smart constructors ------------------------------------------
    //
    // These apply only local, value-preserving identities (constant folding,
    // additive/multiplicative units, zero absorption). Negation of a constant
    // is always folded, so `Neg(Const)` never appears in a tree.

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Unary(UnaryOp::Neg, a) => a.clone(),
            _ => Expr::raw_unary(UnaryOp::Neg, self.clone()),
        }
    }

    pub fn unary(op: UnaryOp, a: &Expr) -> Expr {
        if op == UnaryOp::Neg {
            return a.neg();
        }
        if let Some(c) = a.as_const() {
            if let Some(y) = op.apply(c) {
                return Expr::constant(y);
            }
        }
        Expr::raw_unary(op, a.clone())
    }

    pub fn sin(&self) -> Expr {
        Expr::unary(UnaryOp::Sin, self)
    }
    pub fn cos(&self) -> Expr {
        Expr::unary(UnaryOp::Cos, self)
    }
    pub fn exp(&self) -> Expr {
        Expr::unary(UnaryOp::Exp, self)
    }
    pub fn ln(&self) -> Expr {
        Expr::unary(UnaryOp::Ln, self)
    }
    pub fn sqrt(&self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self)
    }
    pub fn abs(&self) -> Expr {
        Expr::unary(UnaryOp::Abs, self)
    }

    pub fn binary(op: BinaryOp, a: &Expr, b: &Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(v) = op.apply(x, y) {
                return Expr::constant(v);
            }
        }
        match op {
            BinaryOp::Add => {
                if a.is_zero() {
                    return b.clone();
                }
                if b.is_zero() {
                    return a.clone();
                }
                if let Node::Unary(UnaryOp::Neg, bb) = b.node() {
                    return Expr::raw_binary(BinaryOp::Sub, a.clone(), bb.clone());
                }
            }
            BinaryOp::Sub => {
                if b.is_zero() {
                    return a.clone();
                }
                if a.is_zero() {
                    return b.neg();
                }
                if a == b {
                    return Expr::zero();
                }
            }
            BinaryOp::Mul => {
                if a.is_zero() || b.is_zero() {
                    return Expr::zero();
                }
                if a.is_one() {
                    return b.clone();
                }
                if b.is_one() {
                    return a.clone();
                }
                if a.as_const() == Some(-1.0) {
                    return b.neg();
                }
                if b.as_const() == Some(-1.0) {
                    return a.neg();
                }
            }
            BinaryOp::Div => {
                if a.is_zero() {
                    return Expr::zero();
                }
                if b.is_one() {
                    return a.clone();
                }
                if b.as_const() == Some(-1.0) {
                    return a.neg();
                }
            }
            BinaryOp::Pow => {
                if b.is_zero() {
                    return Expr::one();
                }
                if b.is_one() {
                    return a.clone();
                }
            }
        }
        Expr::raw_binary(op, a.clone(), b.clone())
    }

    pub fn pow(&self, exponent: &Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, self, exponent)
    }

    pub fn powf(&self, exponent: f64) -> Expr {
        Expr::binary(BinaryOp::Pow, self, &Expr::constant(exponent))
    }

    pub fn scale(&self, factor: f64) -> Expr {
        Expr::binary(BinaryOp::Mul, &Expr::constant(factor), self)
    }

    /// Sum of an iterator of expressions, using the folding constructors.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms
            .into_iter()
            .fold(Expr::zero(), |acc, t| Expr::binary(BinaryOp::Add, &acc, &t))
    }

    // ---- queries -----------------------------------------------------

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    /// Coordinate names this expression depends on.
    pub fn coordinates(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out, true);
        out
    }

    /// Parameter names this expression references.
    pub fn parameters(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out, false);
        out
    }

    pub fn depends_on(&self, coord: &str) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.depends_inner(coord, &mut seen)
    }

    fn depends_inner(&self, coord: &str, seen: &mut std::collections::HashSet<usize>) -> bool {
        if !seen.insert(self.ptr_key()) {
            return false;
        }
        match self.node() {
            Node::Const(_) | Node::Param(_) => false,
            Node::Coord(s) => &**s == coord,
            Node::Unary(_, a) => a.depends_inner(coord, seen),
            Node::Binary(_, a, b) => a.depends_inner(coord, seen) || b.depends_inner(coord, seen),
        }
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>, coords: bool) {
        let mut stack = vec![self.clone()];
        let mut seen = std::collections::HashSet::new();
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr_key()) {
                continue;
            }
            match e.node() {
                Node::Const(_) => {}
                Node::Coord(s) => {
                    if coords {
                        out.insert(s.clone());
                    }
                }
                Node::Param(s) => {
                    if !coords {
                        out.insert(s.clone());
                    }
                }
                Node::Unary(_, a) => stack.push(a.clone()),
                Node::Binary(_, a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
            }
        }
    }

    /// Number of nodes counting shared subtrees once.
    pub fn dag_size(&self) -> usize {
        let mut stack = vec![self.clone()];
        let mut seen = std::collections::HashSet::new();
        while let Some(e) = stack.pop() {
            if !seen.insert(e.structural_hash()) {
                continue;
            }
            match e.node() {
                Node::Unary(_, a) => stack.push(a.clone()),
                Node::Binary(_, a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                _ => {}
            }
        }
        seen.len()
    }

    /// Replace coordinates/parameters by expressions.
    pub fn substitute(&self, map: &dyn Fn(&Node) -> Option<Expr>) -> Expr {
        let mut memo = std::collections::HashMap::new();
        self.substitute_inner(map, &mut memo)
    }

    fn substitute_inner(
        &self,
        map: &dyn Fn(&Node) -> Option<Expr>,
        memo: &mut std::collections::HashMap<usize, Expr>,
    ) -> Expr {
        if let Some(e) = memo.get(&self.ptr_key()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) => self.clone(),
            Node::Coord(_) | Node::Param(_) => map(self.node()).unwrap_or_else(|| self.clone()),
            Node::Unary(op, a) => Expr::unary(*op, &a.substitute_inner(map, memo)),
            Node::Binary(op, a, b) => Expr::binary(
                *op,
                &a.substitute_inner(map, memo),
                &b.substitute_inner(map, memo),
            ),
        };
        memo.insert(self.ptr_key(), out.clone());
        out
    }

    fn variant_rank(&self) -> u8 {
        match self.node() {
            Node::Const(_) => 0,
            Node::Coord(_) => 1,
            Node::Param(_) => 2,
            Node::Unary(..) => 3,
            Node::Binary(..) => 4,
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a.to_bits() == b.to_bits(),
            (Node::Coord(a), Node::Coord(b)) => a == b,
            (Node::Param(a), Node::Param(b)) => a == b,
            (Node::Unary(o1, a1), Node::Unary(o2, a2)) => o1 == o2 && a1 == a2,
            (Node::Binary(o1, a1, b1), Node::Binary(o2, a2, b2)) => {
                o1 == o2 && a1 == a2 && b1 == b2
            }
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

/// Structural total order, used to put sums and products in canonical form.
impl Ord for Expr {
    fn cmp(&self, other: &Expr) -> Ordering {
        if self.ptr_eq(other) {
            return Ordering::Equal;
        }
        let rank = self.variant_rank().cmp(&other.variant_rank());
        if rank != Ordering::Equal {
            return rank;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => a.total_cmp(b),
            (Node::Coord(a), Node::Coord(b)) | (Node::Param(a), Node::Param(b)) => a.cmp(b),
            (Node::Unary(o1, a1), Node::Unary(o2, a2)) => o1.cmp(o2).then_with(|| a1.cmp(a2)),
            (Node::Binary(o1, a1, b1), Node::Binary(o2, a2, b2)) => o1
                .cmp(o2)
                .then_with(|| a1.cmp(a2))
                .then_with(|| b1.cmp(b2)),
            _ => unreachable!("variant ranks already compared"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Expr) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Expr {
        Expr::constant(value)
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl std::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, &self, &rhs)
            }
        }
        impl std::ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, &self, rhs)
            }
        }
        impl std::ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, self, &rhs)
            }
        }
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, self, rhs)
            }
        }
        impl std::ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, &self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::binary($op, self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::binary($op, &Expr::constant(self), &rhs)
            }
        }
        impl std::ops::$trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::binary($op, &Expr::constant(self), rhs)
            }
        }
    };
}

impl_binop!(Add, add, BinaryOp::Add);
impl_binop!(Sub, sub, BinaryOp::Sub);
impl_binop!(Mul, mul, BinaryOp::Mul);
impl_binop!(Div, div, BinaryOp::Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
