//! Graded variable alphabets.
//!
//! A [`GradedContext`] is an ordered list of named variables with integer
//! degrees. Declaration order is the canonical monomial order: every sign
//! convention downstream is relative to it. Parity is derived from the
//! degree, so "odd" always means odd degree.

use std::fmt;
use std::sync::Arc;

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub degree: i64,
}

impl VarInfo {
    pub fn parity(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }
}

/// Index of a variable in its context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedContext {
    vars: Vec<VarInfo>,
}

impl GradedContext {
    pub fn new<S: Into<String>>(vars: Vec<(S, i64)>) -> Result<Arc<Self>> {
        let vars: Vec<VarInfo> = vars
            .into_iter()
            .map(|(name, degree)| VarInfo {
                name: name.into(),
                degree,
            })
            .collect();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(CoreError::DuplicateVariable(v.name.clone()));
            }
        }
        Ok(Arc::new(GradedContext { vars }))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.vars.len()).map(Var)
    }

    pub fn info(&self, v: Var) -> &VarInfo {
        &self.vars[v.0]
    }

    pub fn name(&self, v: Var) -> &str {
        &self.vars[v.0].name
    }

    pub fn degree(&self, v: Var) -> i64 {
        self.vars[v.0].degree
    }

    /// Parity of a variable: true for odd.
    pub fn parity(&self, v: Var) -> bool {
        self.vars[v.0].parity()
    }

    pub fn lookup(&self, name: &str) -> Result<Var> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .map(Var)
            .ok_or_else(|| CoreError::UnknownVariable(name.to_string()))
    }
}

impl fmt::Display for GradedContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.vars {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}", v.name, v.degree)?;
            first = false;
        }
        Ok(())
    }
}

/// A context of base variables doubled by their conjugates.
///
/// Base variable `i` of degree `e` is paired with the conjugate variable
/// `n_base + i`, named `d_<name>`, of degree `1 - e`. Polynomials over the
/// full context are multivector fields for the base algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubledContext {
    full: Arc<GradedContext>,
    base: Arc<GradedContext>,
    n_base: usize,
}

impl DoubledContext {
    pub fn new<S: Into<String>>(base_vars: Vec<(S, i64)>) -> Result<Arc<Self>> {
        let base_vars: Vec<(String, i64)> =
            base_vars.into_iter().map(|(n, d)| (n.into(), d)).collect();
        let n_base = base_vars.len();
        let mut all = base_vars.clone();
        for (name, deg) in &base_vars {
            all.push((format!("d_{name}"), 1 - *deg));
        }
        let base = GradedContext::new(base_vars)?;
        let full = GradedContext::new(all)?;
        Ok(Arc::new(DoubledContext { full, base, n_base }))
    }

    pub fn full(&self) -> &Arc<GradedContext> {
        &self.full
    }

    pub fn base_context(&self) -> &Arc<GradedContext> {
        &self.base
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn is_base(&self, v: Var) -> bool {
        v.0 < self.n_base
    }

    pub fn is_conjugate(&self, v: Var) -> bool {
        v.0 >= self.n_base
    }

    pub fn conjugate_of(&self, v: Var) -> Var {
        if self.is_base(v) {
            Var(v.0 + self.n_base)
        } else {
            Var(v.0 - self.n_base)
        }
    }

    pub fn base_vars(&self) -> impl Iterator<Item = Var> {
        (0..self.n_base).map(Var)
    }

    pub fn conjugate_vars(&self) -> impl Iterator<Item = Var> + '_ {
        (self.n_base..self.full.len()).map(Var)
    }
}
