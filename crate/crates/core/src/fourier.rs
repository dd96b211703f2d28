//! The generator-level transform between multivector fields for the two
//! local models of a vector bundle: the exterior-algebra side
//! k[x, th][d_x, d_th] and the fiberwise-polynomial side k[x, y][d_x, d_y].
//!
//! On generators: d_x -> d_x, th -> -d_y, d_th -> y. The sign is a fixed
//! convention; the inverse sends d_y -> -th and y -> d_th. The map is an
//! isomorphism of graded commutative algebras over the base functions and
//! respects the bracket, which the tests pin down.

use std::sync::Arc;

use crate::context::{DoubledContext, Var};
use crate::error::{CoreError, Result};
use crate::multivector::MultiVector;
use crate::poly::GradedPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourierDictionary {
    a_side: Arc<DoubledContext>,
    b_side: Arc<DoubledContext>,
    n_base: usize,
    n_fiber: usize,
}

impl FourierDictionary {
    pub fn new(base_names: &[&str], fiber_names: &[&str]) -> Result<Self> {
        let mut a_vars: Vec<(String, i64)> =
            base_names.iter().map(|n| (n.to_string(), 0)).collect();
        for f in fiber_names {
            a_vars.push((format!("th_{f}"), 1));
        }
        let mut b_vars: Vec<(String, i64)> =
            base_names.iter().map(|n| (n.to_string(), 0)).collect();
        for f in fiber_names {
            b_vars.push((f.to_string(), 0));
        }
        Ok(FourierDictionary {
            a_side: DoubledContext::new(a_vars)?,
            b_side: DoubledContext::new(b_vars)?,
            n_base: base_names.len(),
            n_fiber: fiber_names.len(),
        })
    }

    pub fn a_side(&self) -> &Arc<DoubledContext> {
        &self.a_side
    }

    pub fn b_side(&self) -> &Arc<DoubledContext> {
        &self.b_side
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn n_fiber(&self) -> usize {
        self.n_fiber
    }

    /// Fiber variables y on the B side (full-context indices).
    pub fn b_fiber_vars(&self) -> Vec<Var> {
        (self.n_base..self.n_base + self.n_fiber).map(Var).collect()
    }

    fn images_a_to_b(&self) -> Vec<GradedPoly> {
        let (n, r) = (self.n_base, self.n_fiber);
        let g = n + r;
        let bf = self.b_side.full();
        let mut images = Vec::with_capacity(2 * g);
        for i in 0..n {
            images.push(GradedPoly::var(bf, Var(i))); // x -> x
        }
        for mu in 0..r {
            // th_mu -> -d_y_mu
            images.push(GradedPoly::var(bf, Var(g + n + mu)).neg());
        }
        for i in 0..n {
            images.push(GradedPoly::var(bf, Var(g + i))); // d_x -> d_x
        }
        for mu in 0..r {
            images.push(GradedPoly::var(bf, Var(n + mu))); // d_th_mu -> y_mu
        }
        images
    }

    fn images_b_to_a(&self) -> Vec<GradedPoly> {
        let (n, r) = (self.n_base, self.n_fiber);
        let g = n + r;
        let af = self.a_side.full();
        let mut images = Vec::with_capacity(2 * g);
        for i in 0..n {
            images.push(GradedPoly::var(af, Var(i))); // x -> x
        }
        for mu in 0..r {
            images.push(GradedPoly::var(af, Var(g + n + mu))); // y -> d_th
        }
        for i in 0..n {
            images.push(GradedPoly::var(af, Var(g + i))); // d_x -> d_x
        }
        for mu in 0..r {
            images.push(GradedPoly::var(af, Var(n + mu)).neg()); // d_y -> -th
        }
        images
    }

    pub fn forward_poly(&self, p: &GradedPoly) -> Result<GradedPoly> {
        if p.context() != self.a_side.full() {
            return Err(CoreError::ContextMismatch);
        }
        p.substitute(self.b_side.full(), &self.images_a_to_b())
    }

    pub fn inverse_poly(&self, p: &GradedPoly) -> Result<GradedPoly> {
        if p.context() != self.b_side.full() {
            return Err(CoreError::ContextMismatch);
        }
        p.substitute(self.a_side.full(), &self.images_b_to_a())
    }

    pub fn forward(&self, mv: &MultiVector) -> Result<MultiVector> {
        MultiVector::new(&self.b_side, self.forward_poly(mv.body())?)
    }

    pub fn inverse(&self, mv: &MultiVector) -> Result<MultiVector> {
        MultiVector::new(&self.a_side, self.inverse_poly(mv.body())?)
    }

    /// Pulls a fiberwise-polynomial Poisson element back to the
    /// exterior-algebra side after truncating its Taylor expansion in the
    /// fiber directions. The conjugate-arity components of the result are
    /// the higher bracket structure for the zero section.
    pub fn poisson_to_lambda(&self, pi: &MultiVector, k: u32) -> Result<MultiVector> {
        if pi.context() != &self.b_side {
            return Err(CoreError::ContextMismatch);
        }
        let deg = pi.mv_degree()?;
        if deg != 1 {
            return Err(CoreError::WrongDegree {
                expected: 1,
                got: deg,
            });
        }
        let truncated = pi.body().truncate_in_vars(&self.b_fiber_vars(), k);
        MultiVector::new(&self.a_side, self.inverse_poly(&truncated)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::sample::Sampler;

    fn dict() -> FourierDictionary {
        FourierDictionary::new(&["x1"], &["y1"]).unwrap()
    }

    fn amv(d: &FourierDictionary, s: &str) -> MultiVector {
        MultiVector::new(d.a_side(), parse_poly(d.a_side().full(), s).unwrap()).unwrap()
    }

    fn bmv(d: &FourierDictionary, s: &str) -> MultiVector {
        MultiVector::new(d.b_side(), parse_poly(d.b_side().full(), s).unwrap()).unwrap()
    }

    #[test]
    fn generators_map_as_stated() {
        let d = dict();
        assert_eq!(d.forward(&amv(&d, "th_y1")).unwrap(), bmv(&d, "-d_y1"));
        assert_eq!(d.forward(&amv(&d, "d_x1")).unwrap(), bmv(&d, "d_x1"));
        assert_eq!(d.forward(&amv(&d, "d_th_y1")).unwrap(), bmv(&d, "y1"));
        assert_eq!(
            d.forward(&amv(&d, "x1*th_y1*d_th_y1")).unwrap(),
            bmv(&d, "-x1*y1*d_y1")
        );
    }

    #[test]
    fn inverse_round_trip() {
        let d = FourierDictionary::new(&["x1", "x2"], &["y1", "y2"]).unwrap();
        let mut s = Sampler::new(7);
        for _ in 0..32 {
            let g = s.multivector(d.a_side(), 2, 3, 4);
            let back = d.inverse(&d.forward(&g).unwrap()).unwrap();
            assert_eq!(g, back);
        }
    }

    #[test]
    fn respects_the_bracket() {
        let d = FourierDictionary::new(&["x1"], &["y1", "y2"]).unwrap();
        let mut s = Sampler::new(11);
        for _ in 0..48 {
            let a = s.multivector(d.a_side(), 2, 2, 3);
            let b = s.multivector(d.a_side(), 2, 2, 3);
            let lhs = d.forward(&a.schouten(&b).unwrap()).unwrap();
            let rhs = d.forward(&a).unwrap().schouten(&d.forward(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn degree_preserving_multiplicative() {
        let d = dict();
        let mut s = Sampler::new(13);
        for _ in 0..24 {
            let a = s.multivector(d.a_side(), 2, 2, 3);
            let b = s.multivector(d.a_side(), 2, 2, 3);
            let lhs = d.forward(&a.mul(&b).unwrap()).unwrap();
            let rhs = d.forward(&a).unwrap().mul(&d.forward(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            if let Some(deg) = a.body().degree() {
                assert_eq!(d.forward(&a).unwrap().body().degree(), Some(deg));
            }
        }
    }

    #[test]
    fn poisson_pullback_of_the_linear_example() {
        // pi = x d_x d_y encodes {x, y} = x; its pullback is the single
        // bracket lambda_1 with lambda_1(x) = x th.
        let d = dict();
        let pi = bmv(&d, "x1*d_x1*d_y1");
        let lam = d.poisson_to_lambda(&pi, 3).unwrap();
        assert_eq!(lam, amv(&d, "x1*th_y1*d_x1"));
    }

    #[test]
    fn truncation_drops_high_fiber_orders() {
        let d = dict();
        let pi = bmv(&d, "y1*d_x1*d_y1");
        let lam = d.poisson_to_lambda(&pi, 0).unwrap();
        assert!(lam.is_zero());
        let pi2 = bmv(&d, "d_x1*d_y1");
        assert!(!d.poisson_to_lambda(&pi2, 0).unwrap().is_zero());
    }

    #[test]
    fn rejects_non_bivectors() {
        let d = dict();
        let v = bmv(&d, "d_x1");
        assert!(d.poisson_to_lambda(&v, 2).is_err());
    }
}
