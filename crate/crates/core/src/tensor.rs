//! Tensor powers of the polynomial algebra and the graded alternation map.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, One, Zero};

use crate::context::GradedContext;
use crate::error::{CoreError, Result};
use crate::monomial::Monomial;
use crate::perm::Permutation;
use crate::poly::{rat_int, GradedPoly};

/// A finite sum of decomposable tensors of fixed arity, normalized so each
/// slot holds a single monomial. Signs live in the coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyTensor {
    ctx: Arc<GradedContext>,
    arity: usize,
    terms: BTreeMap<Vec<Monomial>, BigRational>,
}

impl PolyTensor {
    pub fn zero(ctx: &Arc<GradedContext>, arity: usize) -> Self {
        PolyTensor {
            ctx: ctx.clone(),
            arity,
            terms: BTreeMap::new(),
        }
    }

    /// Tensor product of polynomial factors, expanded into monomial slots.
    pub fn from_factors(factors: &[GradedPoly]) -> Result<Self> {
        let ctx = factors
            .first()
            .map(|f| f.context().clone())
            .ok_or(CoreError::LengthMismatch(0, 1))?;
        for f in factors {
            if f.context() != &ctx {
                return Err(CoreError::ContextMismatch);
            }
        }
        let mut out = Self::zero(&ctx, factors.len());
        let mut stack: Vec<(Vec<Monomial>, BigRational)> =
            vec![(Vec::new(), BigRational::one())];
        for f in factors {
            let mut next = Vec::new();
            for (prefix, c) in &stack {
                for (m, k) in f.terms() {
                    let mut p = prefix.clone();
                    p.push(m.clone());
                    next.push((p, c * k));
                }
            }
            stack = next;
        }
        for (slots, c) in stack {
            out.add_term(slots, c);
        }
        Ok(out)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Monomial>, &BigRational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, slots: Vec<Monomial>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(slots);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(e) => {
                let sum = e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.into_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.ctx != other.ctx || self.arity != other.arity {
            return Err(CoreError::ContextMismatch);
        }
        let mut out = self.clone();
        for (slots, c) in &other.terms {
            out.add_term(slots.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(&self.ctx, self.arity);
        for (slots, k) in &self.terms {
            out.add_term(slots.clone(), k * c);
        }
        out
    }

    /// Koszul action of a permutation: the slot content at position i moves
    /// to position sigma(i), with a sign for every odd pair that crosses.
    pub fn permute(&self, sigma: &Permutation) -> Result<Self> {
        if sigma.len() != self.arity {
            return Err(CoreError::LengthMismatch(sigma.len(), self.arity));
        }
        let inv = sigma.inverse();
        let mut out = Self::zero(&self.ctx, self.arity);
        for (slots, c) in &self.terms {
            let parities: Vec<bool> = slots.iter().map(|m| m.parity(&self.ctx)).collect();
            let mut sign = false;
            for i in 0..self.arity {
                for j in i + 1..self.arity {
                    // Items i < j cross iff their output order flips.
                    if sigma.0[i] > sigma.0[j] && parities[i] && parities[j] {
                        sign = !sign;
                    }
                }
            }
            let new_slots: Vec<Monomial> =
                (0..self.arity).map(|p| slots[inv.0[p]].clone()).collect();
            let mut nc = c.clone();
            if sign {
                nc = -nc;
            }
            out.add_term(new_slots, nc);
        }
        Ok(out)
    }

    /// Graded alternation: (1/n!) sum over sigma of sign(sigma) times the
    /// Koszul action. Idempotent over the rationals.
    pub fn alt_project(&self) -> Result<Self> {
        let n = self.arity;
        if n == 0 {
            return Ok(self.clone());
        }
        let mut out = Self::zero(&self.ctx, n);
        let mut count = 0i64;
        for sigma in Permutation::all(n) {
            let signed = self
                .permute(&sigma)?
                .scale(&rat_int(sigma.sign() as i64));
            out = out.add(&signed)?;
            count += 1;
        }
        Ok(out.scale(&(BigRational::one() / rat_int(count))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::Var;

    fn ctx() -> Arc<GradedContext> {
        GradedContext::new(vec![("x", 0), ("th1", 1)]).unwrap()
    }

    #[test]
    fn alt_kills_symmetric_even_tensor() {
        let c = ctx();
        let x = GradedPoly::var(&c, Var(0));
        let t = PolyTensor::from_factors(&[x.clone(), x]).unwrap();
        assert!(t.alt_project().unwrap().is_zero());
    }

    #[test]
    fn alt_fixes_odd_diagonal() {
        let c = ctx();
        let th = GradedPoly::var(&c, Var(1));
        let t = PolyTensor::from_factors(&[th.clone(), th]).unwrap();
        // Swapping the two odd slots gives sign(sigma) * Koszul = (-1)(-1) = +1.
        assert_eq!(t.alt_project().unwrap(), t);
    }

    #[test]
    fn alt_is_identity_at_arity_one() {
        let c = ctx();
        let x = GradedPoly::var(&c, Var(0));
        let t = PolyTensor::from_factors(&[x]).unwrap();
        assert_eq!(t.alt_project().unwrap(), t);
    }

    #[test]
    fn alt_is_idempotent() {
        let c = ctx();
        let x = GradedPoly::var(&c, Var(0));
        let th = GradedPoly::var(&c, Var(1));
        for arity in 2..=4usize {
            let mut factors = Vec::new();
            for i in 0..arity {
                factors.push(if i % 2 == 0 { x.clone() } else { th.clone() });
            }
            let t = PolyTensor::from_factors(&factors).unwrap();
            let a1 = t.alt_project().unwrap();
            let a2 = a1.alt_project().unwrap();
            assert_eq!(a1, a2, "arity {arity}");
        }
    }
}
