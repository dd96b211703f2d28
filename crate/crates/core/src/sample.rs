//! Seeded random elements for the randomized identity suites.

use std::sync::Arc;

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::context::{DoubledContext, GradedContext, Var};
use crate::hochschild::{MultiDiffOp, SlotIndex};
use crate::monomial::{enumerate_monomials, Monomial};
use crate::multivector::MultiVector;
use crate::poly::{rat_int, GradedPoly};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn coeff(&mut self) -> BigRational {
        let n = self.rng.gen_range(-4i64..=4);
        let n = if n == 0 { 1 } else { n };
        rat_int(n)
    }

    pub fn monomial(&mut self, ctx: &Arc<GradedContext>, max_deg: u32) -> Monomial {
        let all = enumerate_monomials(ctx, max_deg);
        all[self.rng.gen_range(0..all.len())].clone()
    }

    pub fn poly(&mut self, ctx: &Arc<GradedContext>, max_deg: u32, n_terms: usize) -> GradedPoly {
        let mut p = GradedPoly::zero(ctx);
        for _ in 0..n_terms {
            let m = self.monomial(ctx, max_deg);
            p.add_term(m, self.coeff());
        }
        p
    }

    /// A random nonzero polynomial of definite parity.
    pub fn poly_of_parity(
        &mut self,
        ctx: &Arc<GradedContext>,
        parity: bool,
        max_deg: u32,
        n_terms: usize,
    ) -> GradedPoly {
        let all: Vec<Monomial> = enumerate_monomials(ctx, max_deg)
            .into_iter()
            .filter(|m| m.parity(ctx) == parity)
            .collect();
        let mut p = GradedPoly::zero(ctx);
        if all.is_empty() {
            return p;
        }
        for _ in 0..n_terms {
            let m = all[self.rng.gen_range(0..all.len())].clone();
            p.add_term(m, self.coeff());
        }
        p
    }

    pub fn op(
        &mut self,
        base: &Arc<GradedContext>,
        arity: usize,
        max_order: u32,
        max_coeff_deg: u32,
        n_terms: usize,
    ) -> MultiDiffOp {
        let indices = enumerate_monomials(base, max_order);
        let mut terms = Vec::new();
        for _ in 0..n_terms {
            let coeff = GradedPoly::from_term(
                base,
                self.monomial(base, max_coeff_deg),
                self.coeff(),
            );
            let slots: Vec<SlotIndex> = (0..arity)
                .map(|_| {
                    let m = &indices[self.rng.gen_range(0..indices.len())];
                    m.factors().collect()
                })
                .collect();
            terms.push((coeff, slots));
        }
        MultiDiffOp::from_terms(base, arity, terms).expect("sampled terms are valid")
    }

    pub fn multivector(
        &mut self,
        dctx: &Arc<DoubledContext>,
        max_base_deg: u32,
        max_conj: u32,
        n_terms: usize,
    ) -> MultiVector {
        let nb = dctx.n_base();
        let full = dctx.full();
        let base = dctx.base_context();
        let conj_ctx = GradedContext::new(
            dctx.conjugate_vars()
                .map(|v| (full.name(v).to_string(), full.degree(v)))
                .collect::<Vec<_>>(),
        )
        .expect("valid conjugate context");
        let conj_monos = enumerate_monomials(&conj_ctx, max_conj);
        let mut body = GradedPoly::zero(full);
        for _ in 0..n_terms {
            let cm = self.monomial(base, max_base_deg);
            let cj = &conj_monos[self.rng.gen_range(0..conj_monos.len())];
            let mut exps = vec![0u32; full.len()];
            exps[..nb].copy_from_slice(cm.exps());
            exps[nb..].copy_from_slice(cj.exps());
            body.add_term(Monomial::from_exps(exps), self.coeff());
        }
        MultiVector::new(dctx, body).expect("same context")
    }

    /// A multivector with a fixed number of conjugate factors per term.
    pub fn multivector_of_arity(
        &mut self,
        dctx: &Arc<DoubledContext>,
        max_base_deg: u32,
        conj: u32,
        n_terms: usize,
    ) -> MultiVector {
        let nb = dctx.n_base();
        let full = dctx.full();
        let base = dctx.base_context();
        let conj_ctx = GradedContext::new(
            dctx.conjugate_vars()
                .map(|v| (full.name(v).to_string(), full.degree(v)))
                .collect::<Vec<_>>(),
        )
        .expect("valid conjugate context");
        let conj_monos: Vec<Monomial> = enumerate_monomials(&conj_ctx, conj)
            .into_iter()
            .filter(|m| m.total_exponent() == conj)
            .collect();
        let mut body = GradedPoly::zero(full);
        if conj_monos.is_empty() {
            return MultiVector::new(dctx, body).expect("same context");
        }
        for _ in 0..n_terms {
            let cm = self.monomial(base, max_base_deg);
            let cj = &conj_monos[self.rng.gen_range(0..conj_monos.len())];
            let mut exps = vec![0u32; full.len()];
            exps[..nb].copy_from_slice(cm.exps());
            exps[nb..].copy_from_slice(cj.exps());
            body.add_term(Monomial::from_exps(exps), self.coeff());
        }
        MultiVector::new(dctx, body).expect("same context")
    }

    pub fn pick<T: Clone>(&mut self, items: &[T]) -> T {
        items[self.rng.gen_range(0..items.len())].clone()
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..hi)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }
}

impl Var {
    pub fn index(&self) -> usize {
        self.0
    }
}
