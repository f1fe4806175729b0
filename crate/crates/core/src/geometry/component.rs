use std::fmt;

use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::expr::{simplify, Expr, Simplifier};

/// Range of a tensor slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotKind {
    /// `i = 0..n`
    H,
    /// `a = 0..m`
    V,
    /// `α = 0..n+m`
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variance {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub kind: SlotKind,
    pub variance: Variance,
}

impl Slot {
    pub const fn new(kind: SlotKind, variance: Variance) -> Slot {
        Slot { kind, variance }
    }
    pub const fn up(kind: SlotKind) -> Slot {
        Slot::new(kind, Variance::Up)
    }
    pub const fn down(kind: SlotKind) -> Slot {
        Slot::new(kind, Variance::Down)
    }
}

/// Declared index symmetry between two slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

/// Dense table of expressions indexed by a slot signature.
///
/// Indices passed to [`get`](ComponentField::get) are local to each slot:
/// an `H` slot runs over `0..n`, a `V` slot over `0..m`, a `Full` slot over
/// `0..n+m`. Keys are printed with one-based full labels, so vertical local
/// index `0` prints as `n+1`.
#[derive(Clone, PartialEq)]
pub struct ComponentField {
    name: String,
    slots: Vec<Slot>,
    n: usize,
    m: usize,
    data: Vec<Expr>,
    symmetries: Vec<Symmetry>,
}

impl ComponentField {
    pub fn zeros(name: impl Into<String>, slots: &[Slot], n: usize, m: usize) -> ComponentField {
        let len = slots.iter().map(|s| range(s.kind, n, m)).product();
        ComponentField {
            name: name.into(),
            slots: slots.to_vec(),
            n,
            m,
            data: vec![Expr::zero(); len],
            symmetries: Vec::new(),
        }
    }

    pub fn from_fn(
        name: impl Into<String>,
        slots: &[Slot],
        n: usize,
        m: usize,
        mut f: impl FnMut(&[usize]) -> Expr,
    ) -> ComponentField {
        let mut out = ComponentField::zeros(name, slots, n, m);
        for k in 0..out.data.len() {
            let idx = out.unflatten(k);
            out.data[k] = f(&idx);
        }
        out
    }

    pub fn with_symmetry(mut self, s: Symmetry) -> ComponentField {
        self.symmetries.push(s);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rename(mut self, name: impl Into<String>) -> ComponentField {
        self.name = name.into();
        self
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn symmetries(&self) -> &[Symmetry] {
        &self.symmetries
    }

    pub fn shape(&self) -> Vec<usize> {
        self.slots
            .iter()
            .map(|s| range(s.kind, self.n, self.m))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[Expr] {
        &self.data
    }

    fn flatten(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.slots.len(), "index rank mismatch for {}", self.name);
        let mut k = 0;
        for (s, &i) in self.slots.iter().zip(idx) {
            let r = range(s.kind, self.n, self.m);
            assert!(i < r, "index {i} out of range {r} in {}", self.name);
            k = k * r + i;
        }
        k
    }

    pub fn unflatten(&self, mut k: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        for p in (0..shape.len()).rev() {
            idx[p] = k % shape[p];
            k /= shape[p];
        }
        idx
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.data[self.flatten(idx)]
    }

    pub fn try_get(&self, idx: &[usize]) -> Result<&Expr, GeometryError> {
        let shape = self.shape();
        if idx.len() != shape.len() || idx.iter().zip(&shape).any(|(i, r)| i >= r) {
            return Err(GeometryError::Index(format!(
                "{:?} is not a valid index of {} (shape {:?})",
                idx, self.name, shape
            )));
        }
        Ok(self.get(idx))
    }

    pub fn set(&mut self, idx: &[usize], value: Expr) {
        let k = self.flatten(idx);
        self.data[k] = value;
    }

    /// `(local index, expression)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &Expr)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, e)| (self.unflatten(k), e))
    }

    /// One-based full label of a local index in slot `p`.
    pub fn label(&self, p: usize, i: usize) -> usize {
        match self.slots[p].kind {
            SlotKind::H | SlotKind::Full => i + 1,
            SlotKind::V => self.n + i + 1,
        }
    }

    /// Component key such as `R^4_-2-3-4`.
    pub fn key(&self, idx: &[usize]) -> String {
        let mut up = Vec::new();
        let mut down = Vec::new();
        for (p, &i) in idx.iter().enumerate() {
            let l = self.label(p, i).to_string();
            match self.slots[p].variance {
                Variance::Up => up.push(l),
                Variance::Down => down.push(l),
            }
        }
        let mut s = self.name.clone();
        if !up.is_empty() {
            s.push('^');
            s.push_str(&up.join("-"));
        }
        if !down.is_empty() {
            s.push_str("_-");
            s.push_str(&down.join("-"));
        }
        s
    }

    pub fn keys(&self) -> Vec<String> {
        (0..self.data.len())
            .map(|k| self.key(&self.unflatten(k)))
            .collect()
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> ComponentField {
        let mut out = self.clone();
        for e in &mut out.data {
            *e = f(e);
        }
        out
    }

    pub fn zip_with(
        &self,
        other: &ComponentField,
        mut f: impl FnMut(&Expr, &Expr) -> Expr,
    ) -> Result<ComponentField, GeometryError> {
        if self.slots != other.slots || self.n != other.n || self.m != other.m {
            return Err(GeometryError::Dimension(format!(
                "cannot combine {} and {}: index signatures differ",
                self.name, other.name
            )));
        }
        let mut out = self.clone();
        for (e, o) in out.data.iter_mut().zip(&other.data) {
            *e = f(e, o);
        }
        Ok(out)
    }

    pub fn simplified(&self) -> ComponentField {
        let mut s = Simplifier::new();
        self.map(|e| s.simplify(e))
    }

    /// Structurally zero after the smart constructors (no simplification).
    pub fn is_structurally_zero(&self) -> bool {
        self.data.iter().all(Expr::is_zero)
    }

    /// Verify declared symmetries structurally after simplification.
    pub fn check_symmetries(&self) -> Result<(), GeometryError> {
        for sym in &self.symmetries {
            let (p, q, sign) = match *sym {
                Symmetry::Symmetric(p, q) => (p, q, -1.0),
                Symmetry::Antisymmetric(p, q) => (p, q, 1.0),
            };
            for k in 0..self.data.len() {
                let idx = self.unflatten(k);
                if idx[p] >= idx[q] {
                    continue;
                }
                let mut t = idx.clone();
                t.swap(p, q);
                let r = simplify(&(self.get(&idx) + self.get(&t).scale(sign)));
                if !r.is_zero() {
                    return Err(GeometryError::Symmetry(format!(
                        "{} vs {} in {}: residual {r}",
                        self.key(&idx),
                        self.key(&t),
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ComponentField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for k in 0..self.data.len() {
            let e = &self.data[k];
            if !e.is_zero() {
                m.entry(&self.key(&self.unflatten(k)), &format_args!("{e}"));
            }
        }
        m.finish()
    }
}

pub(crate) fn range(kind: SlotKind, n: usize, m: usize) -> usize {
    match kind {
        SlotKind::H => n,
        SlotKind::V => m,
        SlotKind::Full => n + m,
    }
}
