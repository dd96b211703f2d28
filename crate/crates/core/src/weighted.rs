//! Operators and polynomial values carrying numeric weights with error
//! bars alongside an exact part. The exact part stays rational; each
//! numeric piece is an exact operator multiplied by one estimated weight.

use std::collections::BTreeMap;

use num::{BigRational, ToPrimitive};

use crate::error::Result;
use crate::hochschild::MultiDiffOp;
use crate::monomial::Monomial;
use crate::poly::GradedPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMethod {
    Exact,
    QuasiMonteCarlo,
}

#[derive(Debug, Clone)]
pub struct GraphWeight {
    pub value: f64,
    pub std_err: f64,
    pub method: WeightMethod,
    pub samples: u64,
    pub exact: Option<BigRational>,
}

impl GraphWeight {
    pub fn exact(q: BigRational) -> Self {
        GraphWeight {
            value: q.to_f64().unwrap_or(0.0),
            std_err: 0.0,
            method: WeightMethod::Exact,
            samples: 0,
            exact: Some(q),
        }
    }

    pub fn estimated(value: f64, std_err: f64, samples: u64) -> Self {
        GraphWeight {
            value,
            std_err,
            method: WeightMethod::QuasiMonteCarlo,
            samples,
            exact: None,
        }
    }
}

/// exact + sum of weight * op contributions.
#[derive(Debug, Clone)]
pub struct WeightedOp {
    pub exact: MultiDiffOp,
    pub numeric: Vec<(GraphWeight, MultiDiffOp)>,
}

impl WeightedOp {
    pub fn zero(base: &std::sync::Arc<crate::context::GradedContext>, arity: usize) -> Self {
        WeightedOp {
            exact: MultiDiffOp::zero(base, arity),
            numeric: Vec::new(),
        }
    }

    pub fn from_exact(op: MultiDiffOp) -> Self {
        WeightedOp {
            numeric: Vec::new(),
            exact: op,
        }
    }

    pub fn arity(&self) -> usize {
        self.exact.arity()
    }

    pub fn is_exact(&self) -> bool {
        self.numeric.iter().all(|(_, op)| op.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut numeric = self.numeric.clone();
        numeric.extend(other.numeric.iter().cloned());
        Ok(WeightedOp {
            exact: self.exact.add(&other.exact)?,
            numeric,
        })
    }

    pub fn neg(&self) -> Self {
        WeightedOp {
            exact: self.exact.neg(),
            numeric: self
                .numeric
                .iter()
                .map(|(w, op)| (w.clone(), op.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        WeightedOp {
            exact: self.exact.scale(c),
            numeric: self
                .numeric
                .iter()
                .map(|(w, op)| (w.clone(), op.scale(c)))
                .collect(),
        }
    }

    /// Maps every operator layer through an exact linear operation.
    pub fn map_ops<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&MultiDiffOp) -> Result<MultiDiffOp>,
    {
        let mut numeric = Vec::with_capacity(self.numeric.len());
        for (w, op) in &self.numeric {
            numeric.push((w.clone(), f(op)?));
        }
        Ok(WeightedOp {
            exact: f(&self.exact)?,
            numeric,
        })
    }

    /// Bilinear expansion over the exact and weighted parts. Products of
    /// two estimated weights multiply values and combine errors to first
    /// order.
    fn combine<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(&MultiDiffOp, &MultiDiffOp) -> Result<MultiDiffOp>,
    {
        let mut out = WeightedOp {
            exact: f(&self.exact, &other.exact)?,
            numeric: Vec::new(),
        };
        for (w, op) in &other.numeric {
            out.numeric.push((w.clone(), f(&self.exact, op)?));
        }
        for (w, op) in &self.numeric {
            out.numeric.push((w.clone(), f(op, &other.exact)?));
        }
        for (w1, op1) in &self.numeric {
            for (w2, op2) in &other.numeric {
                let w = GraphWeight::estimated(
                    w1.value * w2.value,
                    w1.value.abs() * w2.std_err
                        + w2.value.abs() * w1.std_err
                        + w1.std_err * w2.std_err,
                    w1.samples.min(w2.samples),
                );
                out.numeric.push((w, f(op1, op2)?));
            }
        }
        Ok(out)
    }

    /// Gerstenhaber bracket, expanded bilinearly over the parts.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.gerstenhaber_bracket(b))
    }

    /// Gerstenhaber product, expanded bilinearly over the parts.
    pub fn product_g(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a.gerstenhaber_product(b))
    }

    /// Plugs a weighted value into one slot, keeping the surrounding plain
    /// arguments.
    pub fn apply_with_inserted(
        &self,
        before: &[GradedPoly],
        inner: &UncertainPoly,
        after: &[GradedPoly],
    ) -> Result<UncertainPoly> {
        let assemble = |mid: &GradedPoly| -> Vec<GradedPoly> {
            let mut v = before.to_vec();
            v.push(mid.clone());
            v.extend_from_slice(after);
            v
        };
        let mut out = self.apply(&assemble(&inner.exact))?;
        for (w, p) in &inner.noisy {
            let piece = self.apply(&assemble(p))?;
            // exact x noisy and noisy x noisy contributions
            if !piece.exact.is_zero() {
                out.push(w.clone(), piece.exact.clone());
            }
            for (w2, p2) in &piece.noisy {
                let wc = GraphWeight::estimated(
                    w.value * w2.value,
                    w.value.abs() * w2.std_err
                        + w2.value.abs() * w.std_err
                        + w.std_err * w2.std_err,
                    w.samples.min(w2.samples),
                );
                out.push(wc, p2.clone());
            }
        }
        Ok(out)
    }

    pub fn apply(&self, args: &[GradedPoly]) -> Result<UncertainPoly> {
        let mut out = UncertainPoly::new(self.exact.apply(args)?);
        for (w, op) in &self.numeric {
            out.push(w.clone(), op.apply(args)?);
        }
        Ok(out)
    }
}

/// A polynomial whose coefficients are exact plus weighted contributions.
#[derive(Debug, Clone)]
pub struct UncertainPoly {
    pub exact: GradedPoly,
    pub noisy: Vec<(GraphWeight, GradedPoly)>,
}

impl UncertainPoly {
    pub fn new(exact: GradedPoly) -> Self {
        UncertainPoly {
            exact,
            noisy: Vec::new(),
        }
    }

    pub fn zero(ctx: &std::sync::Arc<crate::context::GradedContext>) -> Self {
        Self::new(GradedPoly::zero(ctx))
    }

    pub fn push(&mut self, w: GraphWeight, p: GradedPoly) {
        if !p.is_zero() {
            self.noisy.push((w, p));
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut noisy = self.noisy.clone();
        noisy.extend(other.noisy.iter().cloned());
        Ok(UncertainPoly {
            exact: self.exact.add(&other.exact)?,
            noisy,
        })
    }

    pub fn neg(&self) -> Self {
        UncertainPoly {
            exact: self.exact.neg(),
            noisy: self
                .noisy
                .iter()
                .map(|(w, p)| (w.clone(), p.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        UncertainPoly {
            exact: self.exact.scale(c),
            noisy: self
                .noisy
                .iter()
                .map(|(w, p)| (w.clone(), p.scale(c)))
                .collect(),
        }
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.exact.is_zero() && self.noisy.iter().all(|(_, p)| p.is_zero())
    }

    /// Per-monomial mean and error bound.
    pub fn coefficients(&self) -> BTreeMap<Monomial, (f64, f64)> {
        let mut map: BTreeMap<Monomial, (f64, f64)> = BTreeMap::new();
        for (mono, q) in self.exact.terms() {
            let e = map.entry(mono.clone()).or_insert((0.0, 0.0));
            e.0 += q.to_f64().unwrap_or(0.0);
        }
        for (w, p) in &self.noisy {
            for (mono, q) in p.terms() {
                let c = q.to_f64().unwrap_or(0.0);
                let e = map.entry(mono.clone()).or_insert((0.0, 0.0));
                e.0 += w.value * c;
                e.1 += w.std_err * c.abs();
            }
        }
        map
    }

    /// True when every coefficient is within k sigma of zero (plus a tiny
    /// floor for float round-off).
    pub fn is_zero_within(&self, k_sigma: f64, abs_floor: f64) -> bool {
        self.coefficients()
            .values()
            .all(|(v, e)| v.abs() <= k_sigma * e + abs_floor)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coefficients()
            .values()
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }
}

impl std::fmt::Display for WeightedOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_exact() {
            return write!(f, "{}", self.exact);
        }
        // Collapse to per-term float coefficients with errors.
        let mut acc: BTreeMap<(Vec<Vec<u32>>, Monomial), (f64, f64)> = BTreeMap::new();
        for (q, c, slots) in self.exact.terms_split() {
            let e = acc.entry((slots, c)).or_insert((0.0, 0.0));
            e.0 += q.to_f64().unwrap_or(0.0);
        }
        for (w, op) in &self.numeric {
            for (q, c, slots) in op.terms_split() {
                let qf = q.to_f64().unwrap_or(0.0);
                let e = acc.entry((slots, c)).or_insert((0.0, 0.0));
                e.0 += w.value * qf;
                e.1 += w.std_err * qf.abs();
            }
        }
        if acc.is_empty() {
            return write!(f, "0");
        }
        let base = self.exact.base();
        let mut first = true;
        for ((slots, mono), (v, err)) in acc {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({v:.6}±{err:.6})")?;
            for (var, exp) in mono.factors() {
                write!(f, "*{}", base.name(var))?;
                if exp > 1 {
                    write!(f, "^{exp}")?;
                }
            }
            write!(f, " * D[")?;
            for (j, slot) in slots.iter().enumerate() {
                if j > 0 {
                    write!(f, "|")?;
                }
                let mut firstv = true;
                for (v, &e) in slot.iter().enumerate() {
                    for _ in 0..e {
                        if !firstv {
                            write!(f, " ")?;
                        }
                        write!(f, "{}", base.name(crate::context::Var(v)))?;
                        firstv = false;
                    }
                }
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

impl std::fmt::Display for UncertainPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.noisy.is_empty() {
            return write!(f, "{}", self.exact);
        }
        let coeffs = self.coefficients();
        if coeffs.is_empty() {
            return write!(f, "0");
        }
        let ctx = self.exact.context();
        let mut first = true;
        for (mono, (v, e)) in coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({v:.6}±{e:.6})")?;
            for (var, exp) in mono.factors() {
                write!(f, "*{}", ctx.name(var))?;
                if exp > 1 {
                    write!(f, "^{exp}")?;
                }
            }
        }
        Ok(())
    }
}
