use std::cmp::Ordering;

use crate::context::{GradedContext, Var};

/// Exponent vector over a fixed context, kept in canonical (declaration)
/// order. Odd variables never carry an exponent above 1; the zero-square
/// rule is enforced by the polynomial layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one(ctx: &GradedContext) -> Self {
        Monomial {
            exps: vec![0; ctx.len()],
        }
    }

    pub fn var(ctx: &GradedContext, v: Var) -> Self {
        let mut m = Self::one(ctx);
        m.exps[v.0] = 1;
        m
    }

    pub fn from_exps(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn exp(&self, v: Var) -> u32 {
        self.exps[v.0]
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn set_exp(&mut self, v: Var, e: u32) {
        self.exps[v.0] = e;
    }

    pub fn n_vars(&self) -> usize {
        self.exps.len()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn total_exponent(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn degree(&self, ctx: &GradedContext) -> i64 {
        self.exps
            .iter()
            .enumerate()
            .map(|(i, &e)| e as i64 * ctx.degree(Var(i)))
            .sum()
    }

    /// Parity of the monomial (true for odd), from the degrees of its factors.
    pub fn parity(&self, ctx: &GradedContext) -> bool {
        self.exps
            .iter()
            .enumerate()
            .filter(|(i, _)| ctx.parity(Var(*i)))
            .map(|(_, &e)| e)
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn factors(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| (Var(i), e))
    }
}

/// All monomials of total exponent at most `max_total`, odd variables
/// capped at exponent 1, in canonical order.
pub fn enumerate_monomials(ctx: &GradedContext, max_total: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; ctx.len()];
    fn rec(
        ctx: &GradedContext,
        exps: &mut Vec<u32>,
        pos: usize,
        left: u32,
        out: &mut Vec<Monomial>,
    ) {
        if pos == exps.len() {
            out.push(Monomial::from_exps(exps.clone()));
            return;
        }
        let cap = if ctx.parity(Var(pos)) { left.min(1) } else { left };
        for e in 0..=cap {
            exps[pos] = e;
            rec(ctx, exps, pos + 1, left - e, out);
        }
        exps[pos] = 0;
    }
    rec(ctx, &mut exps, 0, max_total, &mut out);
    out.sort();
    out
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        // Graded-lexicographic on exponents; total exponent first keeps
        // printed sums ordered by size.
        self.total_exponent()
            .cmp(&other.total_exponent())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}
