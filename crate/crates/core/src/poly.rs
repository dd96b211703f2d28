//! Graded-commutative polynomials with exact rational coefficients.
//!
//! Monomials are kept in canonical declaration order; every reordering sign
//! is absorbed into the coefficient, so structural equality is semantic
//! equality. Products follow the Koszul rule: moving an odd factor past an
//! odd factor costs a sign, odd squares vanish.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::context::{GradedContext, Var};
use crate::error::{CoreError, Result};
use crate::monomial::Monomial;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedPoly {
    ctx: Arc<GradedContext>,
    terms: BTreeMap<Monomial, BigRational>,
}

/// Sign for multiplying two canonical monomials, or None when an odd
/// variable would square. The sign counts the odd factors of `b` that must
/// move left past later-declared odd factors of `a`.
fn mul_sign(ctx: &GradedContext, a: &Monomial, b: &Monomial) -> Option<bool> {
    let mut sign = false;
    // tail[j] = odd exponents of `a` strictly after position j-1.
    let n = ctx.len();
    let mut tail = vec![0u32; n + 1];
    for j in (0..n).rev() {
        let aj = if ctx.parity(Var(j)) { a.exp(Var(j)) } else { 0 };
        tail[j] = tail[j + 1] + aj;
    }
    for j in 0..n {
        let v = Var(j);
        if !ctx.parity(v) {
            continue;
        }
        let bj = b.exp(v);
        if bj == 0 {
            continue;
        }
        if bj > 1 || a.exp(v) + bj > 1 {
            return None; // odd square
        }
        if (bj * tail[j + 1]) % 2 == 1 {
            sign = !sign;
        }
    }
    Some(sign)
}

impl GradedPoly {
    pub fn zero(ctx: &Arc<GradedContext>) -> Self {
        GradedPoly {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Arc<GradedContext>) -> Self {
        Self::constant(ctx, BigRational::one())
    }

    pub fn constant(ctx: &Arc<GradedContext>, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(ctx), c);
        }
        GradedPoly {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn var(ctx: &Arc<GradedContext>, v: Var) -> Self {
        Self::from_term(ctx, Monomial::var(ctx, v), BigRational::one())
    }

    pub fn from_term(ctx: &Arc<GradedContext>, m: Monomial, c: BigRational) -> Self {
        let mut p = Self::zero(ctx);
        p.add_term(m, c);
        p
    }

    pub fn context(&self) -> &Arc<GradedContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        // Odd squares vanish even when inserted directly.
        if m.factors()
            .any(|(v, e)| self.ctx.parity(v) && e > 1)
        {
            return;
        }
        let entry = self.terms.entry(m);
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

    pub fn check_same_context(&self, other: &Self) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(CoreError::ContextMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_context(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        let mut out = Self::zero(&self.ctx);
        for (m, k) in &self.terms {
            out.terms.insert(m.clone(), k * c);
        }
        out
    }

    /// Graded-commutative product with Koszul signs.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_context(other)?;
        let mut out = Self::zero(&self.ctx);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(sign) = mul_sign(&self.ctx, ma, mb) {
                    let exps: Vec<u32> = ma
                        .exps()
                        .iter()
                        .zip(mb.exps())
                        .map(|(x, y)| x + y)
                        .collect();
                    let mut c = ca * cb;
                    if sign {
                        c = -c;
                    }
                    out.add_term(Monomial::from_exps(exps), c);
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = Self::one(&self.ctx);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Left partial derivative, a left derivation of degree `-deg(v)`:
    /// d(ab) = d(a) b + (-1)^{|v||a|} a d(b).
    pub fn left_partial(&self, v: Var) -> Result<Self> {
        if v.0 >= self.ctx.len() {
            return Err(CoreError::UnknownVariable(format!("#{}", v.0)));
        }
        let p_v = self.ctx.parity(v);
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e == 0 {
                continue;
            }
            // Sign from moving the derivative past the factors declared
            // before v (the prefix of the canonical monomial).
            let mut sign = false;
            if p_v {
                let prefix: u32 = (0..v.0)
                    .filter(|&i| self.ctx.parity(Var(i)))
                    .map(|i| m.exp(Var(i)))
                    .sum();
                sign = prefix % 2 == 1;
            }
            let mut nm = m.clone();
            nm.set_exp(v, e - 1);
            let mut nc = c * BigRational::from(BigInt::from(e));
            if sign {
                nc = -nc;
            }
            out.add_term(nm, nc);
        }
        Ok(out)
    }

    /// Right partial derivative:
    /// (ab) dr = a (b dr) + (-1)^{|b||v|} (a dr) b.
    pub fn right_partial(&self, v: Var) -> Result<Self> {
        if v.0 >= self.ctx.len() {
            return Err(CoreError::UnknownVariable(format!("#{}", v.0)));
        }
        let p_v = self.ctx.parity(v);
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let e = m.exp(v);
            if e == 0 {
                continue;
            }
            let mut sign = false;
            if p_v {
                let suffix: u32 = (v.0 + 1..self.ctx.len())
                    .filter(|&i| self.ctx.parity(Var(i)))
                    .map(|i| m.exp(Var(i)))
                    .sum();
                sign = suffix % 2 == 1;
            }
            let mut nm = m.clone();
            nm.set_exp(v, e - 1);
            let mut nc = c * BigRational::from(BigInt::from(e));
            if sign {
                nc = -nc;
            }
            out.add_term(nm, nc);
        }
        Ok(out)
    }

    /// Degree of a homogeneous polynomial; None for zero or mixed terms.
    pub fn degree(&self) -> Option<i64> {
        let mut deg = None;
        for m in self.terms.keys() {
            let d = m.degree(&self.ctx);
            match deg {
                None => deg = Some(d),
                Some(e) if e != d => return None,
                _ => {}
            }
        }
        deg
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    /// Parity of a homogeneous polynomial.
    pub fn parity(&self) -> Option<bool> {
        let mut par = None;
        for m in self.terms.keys() {
            let p = m.parity(&self.ctx);
            match par {
                None => par = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        par
    }

    pub fn homogeneous_components(&self) -> Vec<(i64, GradedPoly)> {
        let mut map: BTreeMap<i64, GradedPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let d = m.degree(&self.ctx);
            map.entry(d)
                .or_insert_with(|| Self::zero(&self.ctx))
                .add_term(m.clone(), c.clone());
        }
        map.into_iter().collect()
    }

    /// Splits into parity-homogeneous parts (even, odd).
    pub fn parity_components(&self) -> (GradedPoly, GradedPoly) {
        let mut even = Self::zero(&self.ctx);
        let mut odd = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            if m.parity(&self.ctx) {
                odd.add_term(m.clone(), c.clone());
            } else {
                even.add_term(m.clone(), c.clone());
            }
        }
        (even, odd)
    }

    /// Algebra morphism determined by images of the variables. Every image
    /// must carry the parity of its variable, otherwise signs would not be
    /// well defined.
    pub fn substitute(
        &self,
        target: &Arc<GradedContext>,
        images: &[GradedPoly],
    ) -> Result<GradedPoly> {
        if images.len() != self.ctx.len() {
            return Err(CoreError::LengthMismatch(images.len(), self.ctx.len()));
        }
        for (i, img) in images.iter().enumerate() {
            if let Some(p) = img.parity() {
                if p != self.ctx.parity(Var(i)) {
                    return Err(CoreError::Inhomogeneous);
                }
            }
        }
        let mut out = GradedPoly::zero(target);
        for (m, c) in &self.terms {
            let mut term = GradedPoly::constant(target, c.clone());
            for (v, e) in m.factors() {
                term = term.mul(&images[v.0].pow(e)?)?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Keeps monomials whose total exponent in `vars` is at most `max`.
    pub fn truncate_in_vars(&self, vars: &[Var], max: u32) -> GradedPoly {
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let d: u32 = vars.iter().map(|v| m.exp(*v)).sum();
            if d <= max {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Drops every monomial containing one of `vars`.
    pub fn kill_vars(&self, vars: &[Var]) -> GradedPoly {
        self.truncate_in_vars(vars, 0)
    }

    pub fn max_exponent_in(&self, vars: &[Var]) -> u32 {
        self.terms
            .keys()
            .map(|m| vars.iter().map(|v| m.exp(*v)).sum())
            .max()
            .unwrap_or(0)
    }
}

fn write_rat(f: &mut fmt::Formatter<'_>, c: &BigRational) -> fmt::Result {
    if c.denom().is_one() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            let show_coeff = !abs.is_one() || m.is_one();
            if show_coeff {
                write_rat(f, &abs)?;
            }
            let mut need_star = show_coeff;
            for (v, e) in m.factors() {
                if need_star {
                    write!(f, "*")?;
                }
                write!(f, "{}", self.ctx.name(v))?;
                if e > 1 {
                    write!(f, "^{}", e)?;
                }
                need_star = true;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::GradedContext;

    fn ctx2() -> Arc<GradedContext> {
        GradedContext::new(vec![("x", 0), ("th1", 1), ("th2", 1)]).unwrap()
    }

    #[test]
    fn odd_variables_anticommute() {
        let ctx = ctx2();
        let t1 = GradedPoly::var(&ctx, Var(1));
        let t2 = GradedPoly::var(&ctx, Var(2));
        let ab = t1.mul(&t2).unwrap();
        let ba = t2.mul(&t1).unwrap();
        assert_eq!(ab.neg(), ba);
        assert!(!ab.is_zero());
    }

    #[test]
    fn odd_square_is_zero() {
        let ctx = ctx2();
        let t1 = GradedPoly::var(&ctx, Var(1));
        assert!(t1.mul(&t1).unwrap().is_zero());
    }

    #[test]
    fn even_element_is_central() {
        let ctx = ctx2();
        let x = GradedPoly::var(&ctx, Var(0));
        let t1 = GradedPoly::var(&ctx, Var(1));
        let t2 = GradedPoly::var(&ctx, Var(2));
        let a = x.add(&t1.mul(&t2).unwrap()).unwrap();
        let left = a.mul(&x).unwrap();
        let right = x.mul(&a).unwrap();
        assert_eq!(left, right);
        // x^2 + x*th1*th2
        let x2 = x.mul(&x).unwrap();
        let expected = x2.add(&x.mul(&t1).unwrap().mul(&t2).unwrap()).unwrap();
        assert_eq!(left, expected);
    }

    #[test]
    fn left_partial_signs() {
        let ctx = ctx2();
        let t1 = GradedPoly::var(&ctx, Var(1));
        let t2 = GradedPoly::var(&ctx, Var(2));
        let m = t1.mul(&t2).unwrap();
        assert_eq!(m.left_partial(Var(1)).unwrap(), t2);
        assert_eq!(m.left_partial(Var(2)).unwrap(), t1.neg());
        assert_eq!(m.right_partial(Var(2)).unwrap(), t1);
        assert_eq!(m.right_partial(Var(1)).unwrap(), t2.neg());
    }

    #[test]
    fn mismatched_contexts_are_rejected() {
        let c1 = ctx2();
        let c2 = GradedContext::new(vec![("y", 0)]).unwrap();
        let p = GradedPoly::var(&c1, Var(0));
        let q = GradedPoly::var(&c2, Var(0));
        assert!(p.mul(&q).is_err());
        assert!(p.add(&q).is_err());
    }

    #[test]
    fn display_round_shape() {
        let ctx = ctx2();
        let x = GradedPoly::var(&ctx, Var(0));
        let p = x.pow(2).unwrap().scale(&rat(3, 2));
        assert_eq!(p.to_string(), "3/2*x^2");
    }
}
