//! Multivector fields as polynomials in a doubled context.
//!
//! The carrier is k[x, d_x]: each base variable of degree e is paired with
//! a conjugate of degree 1 - e. The odd Poisson bracket of degree -1 on
//! this algebra is the Schouten bracket; shifting degrees by one makes it
//! a graded Lie bracket of degree 0.

use std::fmt;
use std::sync::Arc;

use num::BigRational;

use crate::context::{DoubledContext, Var};
use crate::error::{CoreError, Result};
use crate::poly::GradedPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiVector {
    dctx: Arc<DoubledContext>,
    body: GradedPoly,
}

impl MultiVector {
    pub fn new(dctx: &Arc<DoubledContext>, body: GradedPoly) -> Result<Self> {
        if body.context() != dctx.full() {
            return Err(CoreError::ContextMismatch);
        }
        Ok(MultiVector {
            dctx: dctx.clone(),
            body,
        })
    }

    pub fn zero(dctx: &Arc<DoubledContext>) -> Self {
        MultiVector {
            dctx: dctx.clone(),
            body: GradedPoly::zero(dctx.full()),
        }
    }

    pub fn context(&self) -> &Arc<DoubledContext> {
        &self.dctx
    }

    pub fn body(&self) -> &GradedPoly {
        &self.body
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        Ok(MultiVector {
            dctx: self.dctx.clone(),
            body: self.body.add(&other.body)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        MultiVector {
            dctx: self.dctx.clone(),
            body: self.body.neg(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        MultiVector {
            dctx: self.dctx.clone(),
            body: self.body.scale(c),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        Ok(MultiVector {
            dctx: self.dctx.clone(),
            body: self.body.mul(&other.body)?,
        })
    }

    fn check_ctx(&self, other: &Self) -> Result<()> {
        if self.dctx == other.dctx {
            Ok(())
        } else {
            Err(CoreError::ContextMismatch)
        }
    }

    /// Shifted degree: one less than the polynomial degree of the body.
    /// Functions sit in degree -1, vector fields in 0, bivectors in 1.
    pub fn mv_degree(&self) -> Result<i64> {
        match self.body.degree() {
            Some(d) => Ok(d - 1),
            None => Err(CoreError::Inhomogeneous),
        }
    }

    /// Number of conjugate factors, when uniform across terms.
    pub fn conj_arity(&self) -> Option<u32> {
        let conj: Vec<Var> = self.dctx.conjugate_vars().collect();
        let mut arity = None;
        for (m, _) in self.body.terms() {
            let a: u32 = conj.iter().map(|v| m.exp(*v)).sum();
            match arity {
                None => arity = Some(a),
                Some(b) if b != a => return None,
                _ => {}
            }
        }
        arity
    }

    /// Splits by number of conjugate factors.
    pub fn arity_components(&self) -> Vec<(u32, MultiVector)> {
        let conj: Vec<Var> = self.dctx.conjugate_vars().collect();
        let mut map: std::collections::BTreeMap<u32, GradedPoly> = Default::default();
        for (m, c) in self.body.terms() {
            let a: u32 = conj.iter().map(|v| m.exp(*v)).sum();
            map.entry(a)
                .or_insert_with(|| GradedPoly::zero(self.dctx.full()))
                .add_term(m.clone(), c.clone());
        }
        map.into_iter()
            .map(|(a, body)| {
                (
                    a,
                    MultiVector {
                        dctx: self.dctx.clone(),
                        body,
                    },
                )
            })
            .collect()
    }

    /// Schouten bracket in the right/left derivative form:
    /// [g1, g2] = sum_i (g1 <-d_{th_i})(d_{x_i}-> g2) - (g1 <-d_{x_i})(d_{th_i}-> g2).
    pub fn schouten(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        let d = &self.dctx;
        let mut acc = GradedPoly::zero(d.full());
        for b in d.base_vars() {
            let c = d.conjugate_of(b);
            let t1 = self
                .body
                .right_partial(c)?
                .mul(&other.body.left_partial(b)?)?;
            let t2 = self
                .body
                .right_partial(b)?
                .mul(&other.body.left_partial(c)?)?;
            acc = acc.add(&t1)?.sub(&t2)?;
        }
        Ok(MultiVector {
            dctx: d.clone(),
            body: acc,
        })
    }

    /// The same bracket written with left derivatives only:
    /// sum_i (-1)^{(1-e_i)(|g1|-1)} d_{th_i}g1 d_{x_i}g2
    ///     - (-1)^{e_i(|g1|-1)}   d_{x_i}g1 d_{th_i}g2.
    /// Inhomogeneous inputs are treated componentwise.
    pub fn schouten_left_form(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        let d = &self.dctx;
        let mut acc = GradedPoly::zero(d.full());
        for (deg1, g1) in self.body.homogeneous_components() {
            for b in d.base_vars() {
                let c = d.conjugate_of(b);
                let e_i = d.full().degree(b);
                let s1 = ((1 - e_i) * (deg1 - 1)).rem_euclid(2) == 1;
                let s2 = (e_i * (deg1 - 1)).rem_euclid(2) == 1;
                let mut t1 = g1.left_partial(c)?.mul(&other.body.left_partial(b)?)?;
                if s1 {
                    t1 = t1.neg();
                }
                let mut t2 = g1.left_partial(b)?.mul(&other.body.left_partial(c)?)?;
                if !s2 {
                    t2 = t2.neg();
                }
                acc = acc.add(&t1)?.add(&t2)?;
            }
        }
        Ok(MultiVector {
            dctx: d.clone(),
            body: acc,
        })
    }

    /// True iff the bracket of a bivector with itself vanishes exactly.
    pub fn check_poisson(&self) -> Result<bool> {
        let deg = self.mv_degree()?;
        if deg != 1 {
            return Err(CoreError::WrongDegree {
                expected: 1,
                got: deg,
            });
        }
        Ok(self.schouten(self)?.is_zero())
    }
}

impl fmt::Display for MultiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn mv(d: &Arc<DoubledContext>, s: &str) -> MultiVector {
        MultiVector::new(d, parse_poly(d.full(), s).unwrap()).unwrap()
    }

    fn one_var() -> Arc<DoubledContext> {
        DoubledContext::new(vec![("x1", 0)]).unwrap()
    }

    fn two_vars() -> Arc<DoubledContext> {
        DoubledContext::new(vec![("x1", 0), ("x2", 0)]).unwrap()
    }

    fn three_vars() -> Arc<DoubledContext> {
        DoubledContext::new(vec![("x1", 0), ("x2", 0), ("x3", 0)]).unwrap()
    }

    #[test]
    fn vector_field_acts_as_derivative() {
        let d = one_var();
        let xi = mv(&d, "d_x1");
        let f = mv(&d, "x1^2");
        let got = xi.schouten(&f).unwrap();
        assert_eq!(got, mv(&d, "2*x1"));
    }

    #[test]
    fn conjugate_pairing_is_kronecker() {
        // [psi, theta] = 1 for the pair, 0 across pairs. Model theta as an
        // odd base variable; its conjugate d_th is the psi generator.
        let d = DoubledContext::new(vec![("th1", 1), ("th2", 1)]).unwrap();
        let psi1 = mv(&d, "d_th1");
        let th1 = mv(&d, "th1");
        let th2 = mv(&d, "th2");
        assert_eq!(psi1.schouten(&th1).unwrap(), mv(&d, "1"));
        assert!(psi1.schouten(&th2).unwrap().is_zero());
    }

    #[test]
    fn constant_bivector_is_poisson() {
        let d = two_vars();
        let pi = mv(&d, "d_x1*d_x2");
        assert!(pi.check_poisson().unwrap());
    }

    #[test]
    fn kostant_kirillov_is_poisson() {
        let d = two_vars();
        let pi = mv(&d, "x1*d_x1*d_x2");
        assert!(pi.check_poisson().unwrap());
    }

    #[test]
    fn perturbed_bivector_fails_jacobi() {
        let d = three_vars();
        let pi = mv(&d, "x2*d_x1*d_x2 + x1*d_x2*d_x3 + x1*x2*d_x1*d_x3");
        assert!(!pi.check_poisson().unwrap());
    }

    #[test]
    fn shifted_degrees() {
        let d = one_var();
        assert_eq!(mv(&d, "d_x1").mv_degree().unwrap(), 0);
        assert_eq!(mv(&d, "x1").mv_degree().unwrap(), -1);
        let d2 = two_vars();
        assert_eq!(mv(&d2, "d_x1*d_x2").mv_degree().unwrap(), 1);
    }

    #[test]
    fn left_and_right_forms_agree() {
        let d = two_vars();
        for (a, b) in [
            ("x1*d_x1*d_x2", "x2^2*d_x1"),
            ("d_x1*d_x2", "x1*x2"),
            ("x1^2*d_x2", "x2*d_x1*d_x2"),
            ("x1 + x2*d_x1", "d_x1*d_x2 + x1"),
        ] {
            let g1 = mv(&d, a);
            let g2 = mv(&d, b);
            assert_eq!(
                g1.schouten(&g2).unwrap(),
                g1.schouten_left_form(&g2).unwrap(),
                "inputs {a}, {b}"
            );
        }
    }
}
