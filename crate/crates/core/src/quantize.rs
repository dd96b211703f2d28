//! Star-product assembly to quadratic order in the deformation parameter,
//! associativity residuals, the arity-zero anomaly, and one gauge step.
//!
//! The deformed structure is mu = mu_A + sum_{k>=1} (eps^k / k!) U_k
//! applied to the bracket family of the submanifold; coefficients are
//! stored per epsilon order and arity as exact-plus-weighted operators.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, One, Zero};

use crate::context::DoubledContext;
use crate::derived::{PInfinityStructure, SubmanifoldSpec};
use crate::error::{CoreError, Result};
use crate::hochschild::MultiDiffOp;
use crate::kontsevich::weight::WeightEngine;
use crate::kontsevich::un::u_n_operator;
use crate::monomial::{enumerate_monomials, Monomial};
use crate::multivector::MultiVector;
use crate::poly::{rat_int, GradedPoly};
use crate::weighted::{UncertainPoly, WeightedOp};

#[derive(Debug, Clone)]
pub struct FormalSeries {
    dctx: Arc<DoubledContext>,
    order: usize,
    coeffs: Vec<BTreeMap<usize, WeightedOp>>,
}

impl FormalSeries {
    pub fn undeformed(dctx: &Arc<DoubledContext>, order: usize) -> Self {
        let mut coeffs: Vec<BTreeMap<usize, WeightedOp>> = vec![BTreeMap::new(); order + 1];
        coeffs[0].insert(
            2,
            WeightedOp::from_exact(MultiDiffOp::product(dctx.base_context(), 2)),
        );
        FormalSeries {
            dctx: dctx.clone(),
            order,
            coeffs,
        }
    }

    pub fn context(&self) -> &Arc<DoubledContext> {
        &self.dctx
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn op(&self, eps: usize, arity: usize) -> Option<&WeightedOp> {
        self.coeffs.get(eps).and_then(|m| m.get(&arity))
    }

    pub fn arities_at(&self, eps: usize) -> Vec<usize> {
        self.coeffs
            .get(eps)
            .map(|m| m.keys().copied().collect())
            .unwrap_or_default()
    }

    pub fn insert(&mut self, eps: usize, arity: usize, op: WeightedOp) -> Result<()> {
        let slot = self.coeffs[eps]
            .entry(arity)
            .or_insert_with(|| WeightedOp::zero(self.dctx.base_context(), arity));
        *slot = slot.add(&op)?;
        Ok(())
    }
}

/// mu = mu_A + sum_{k=1..K} (eps^k / k!) U_k(lambda, ..., lambda) with
/// lambda the exterior-side image of the truncated Poisson element.
pub fn star_assemble(
    engine: &WeightEngine,
    spec: &SubmanifoldSpec,
    pi: &MultiVector,
    order: usize,
) -> Result<FormalSeries> {
    if order > 2 {
        return Err(CoreError::UnsupportedOrder(order, 2));
    }
    if !pi.check_poisson()? {
        return Err(CoreError::NotPoisson);
    }
    let lam = spec
        .dictionary()
        .poisson_to_lambda(&spec.taylor_truncate(pi)?, spec.truncation_order())?;
    let comps = lam.arity_components();
    let dctx = spec.dictionary().a_side().clone();
    let mut series = FormalSeries::undeformed(&dctx, order);
    for k in 1..=order {
        let mut tuple_idx = vec![0usize; k];
        if comps.is_empty() {
            break;
        }
        loop {
            let gammas: Vec<MultiVector> =
                tuple_idx.iter().map(|&i| comps[i].1.clone()).collect();
            let p_sum: usize = tuple_idx.iter().map(|&i| comps[i].0 as usize).sum();
            if p_sum + 2 >= 2 * k {
                let m = p_sum + 2 - 2 * k;
                let mut fact = BigRational::one();
                for j in 1..=k as i64 {
                    fact = fact * rat_int(j);
                }
                let u = u_n_operator(engine, &gammas, m)?
                    .scale(&(BigRational::one() / fact));
                series.insert(k, m, u)?;
            }
            let mut j = 0;
            loop {
                if j == k {
                    break;
                }
                tuple_idx[j] += 1;
                if tuple_idx[j] < comps.len() {
                    break;
                }
                tuple_idx[j] = 0;
                j += 1;
            }
            if tuple_idx.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    Ok(series)
}

/// The associativity defect at each epsilon order, from the sign-laden
/// double sum. Arguments must be parity homogeneous.
pub fn a_infinity_residual(
    series: &FormalSeries,
    args: &[GradedPoly],
) -> Result<Vec<UncertainPoly>> {
    let n = args.len();
    let base = series.dctx.base_context().clone();
    let parities: Vec<i64> = args
        .iter()
        .map(|a| {
            a.parity()
                .map(|p| p as i64)
                .ok_or(CoreError::Inhomogeneous)
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for eps in 0..=series.order {
        let mut res = UncertainPoly::zero(&base);
        for q in 0..=n {
            for e1 in 0..=eps {
                let e2 = eps - e1;
                let Some(inner_op) = series.op(e1, q) else {
                    continue;
                };
                let Some(outer_op) = series.op(e2, n - q + 1) else {
                    continue;
                };
                for j in 0..=n - q {
                    let mut sign = (q * (n - q)) as i64;
                    sign += (q as i64 - 1) * j as i64;
                    sign += q as i64 * parities[..j].iter().sum::<i64>();
                    let inner = inner_op.apply(&args[j..j + q])?;
                    let val = outer_op.apply_with_inserted(
                        &args[..j],
                        &inner,
                        &args[j + q..],
                    )?;
                    let val = if sign.rem_euclid(2) == 1 { val.neg() } else { val };
                    res = res.add(&val)?;
                }
            }
        }
        out.push(res);
    }
    Ok(out)
}

/// The same defect from the bracket picture: per arity layer the
/// double-sum equals (-1)^{n(n-1)/2} times the quadratic part of the
/// twisted structure mu~_k = (-1)^{k(k-1)/2} mu_k.
pub fn a_infinity_residual_bracket(
    series: &FormalSeries,
    args: &[GradedPoly],
) -> Result<Vec<UncertainPoly>> {
    let n = args.len();
    let base = series.dctx.base_context().clone();
    let twist = |k: usize| (k * k.saturating_sub(1) / 2) % 2 == 1;
    let mut out = Vec::new();
    for eps in 0..=series.order {
        let mut res = UncertainPoly::zero(&base);
        for e1 in 0..=eps {
            let e2 = eps - e1;
            for q in series.arities_at(e1) {
                let o = n + 1 - q;
                if q > n {
                    continue;
                }
                let Some(inner) = series.op(e1, q) else { continue };
                let Some(outer) = series.op(e2, o) else { continue };
                let mut inner_t = inner.clone();
                if twist(q) {
                    inner_t = inner_t.neg();
                }
                let mut outer_t = outer.clone();
                if twist(o) {
                    outer_t = outer_t.neg();
                }
                let term = outer_t.product_g(&inner_t)?;
                res = res.add(&term.apply(args)?)?;
            }
        }
        if twist(n) {
            res = res.neg();
        }
        out.push(res);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct AnomalyReport {
    /// The linear-order arity-zero coefficient; exactly zero iff the
    /// truncated structure is flat to linear order.
    pub eps1: UncertainPoly,
    /// Quadratic-order arity-zero coefficient.
    pub f: UncertainPoly,
    /// Image of `f` under the unary bracket.
    pub df: UncertainPoly,
}

impl AnomalyReport {
    pub fn eps1_exactly_zero(&self) -> bool {
        self.eps1.is_exactly_zero()
    }
}

/// Extracts the arity-zero anomaly and its closedness data.
pub fn mu0_anomaly(series: &FormalSeries, pinf: &PInfinityStructure) -> Result<AnomalyReport> {
    if series.order < 2 {
        return Err(CoreError::UnsupportedOrder(series.order, 2));
    }
    let base = series.dctx.base_context().clone();
    let eval0 = |eps: usize| -> Result<UncertainPoly> {
        match series.op(eps, 0) {
            Some(op) => op.apply(&[]),
            None => Ok(UncertainPoly::zero(&base)),
        }
    };
    let eps1 = eval0(1)?;
    let f = eval0(2)?;
    // d f via the unary bracket, applied to the exact and weighted layers.
    let full = series.dctx.full().clone();
    let embed = |p: &GradedPoly| -> GradedPoly {
        let mut out = GradedPoly::zero(&full);
        for (m, c) in p.terms() {
            let mut exps = vec![0u32; full.len()];
            exps[..series.dctx.n_base()].copy_from_slice(m.exps());
            out.add_term(Monomial::from_exps(exps), c.clone());
        }
        out
    };
    let mut df = UncertainPoly::new(pinf.lambda(1, &[embed(&f.exact)])?);
    for (w, p) in &f.noisy {
        df.push(w.clone(), pinf.lambda(1, &[embed(p)])?);
    }
    Ok(AnomalyReport { eps1, f, df })
}

/// Gauge change by an odd degree-one series a = eps a_1 + eps^2 a_2 + ...:
/// every structure map absorbs insertions of the layers of `a`, with the
/// pattern sign counting argument-insertion crossings.
pub fn apply_gauge(series: &FormalSeries, a_layers: &[GradedPoly]) -> Result<FormalSeries> {
    let base = series.dctx.base_context().clone();
    for a in a_layers {
        if a.context() != &base {
            return Err(CoreError::ContextMismatch);
        }
        if !a.is_zero() && a.degree() != Some(1) {
            return Err(CoreError::WrongDegree {
                expected: 1,
                got: a.degree().unwrap_or(0),
            });
        }
    }
    let k_max = series.order;
    let mut out = FormalSeries {
        dctx: series.dctx.clone(),
        order: k_max,
        coeffs: vec![BTreeMap::new(); k_max + 1],
    };
    // Arities that can appear after insertions.
    let mut target_arities: Vec<usize> = Vec::new();
    for eps in 0..=k_max {
        for ar in series.arities_at(eps) {
            for k in 0..=ar {
                if !target_arities.contains(&(ar - k)) {
                    target_arities.push(ar - k);
                }
            }
        }
    }
    for eps_out in 0..=k_max {
        for &n in &target_arities {
            let mut acc = WeightedOp::zero(&base, n);
            let mut any = false;
            // k insertions, each with an epsilon order >= 1.
            for k in 0..=eps_out {
                for orders in compositions(eps_out, k) {
                    // Missing or zero layers of `a` kill the pattern.
                    if orders.iter().any(|&w| {
                        w > a_layers.len() || a_layers[w - 1].is_zero()
                    }) {
                        continue;
                    }
                    let eps_mu = eps_out - orders.iter().sum::<usize>();
                    let Some(mu) = series.op(eps_mu, n + k) else {
                        continue;
                    };
                    for positions in choose_positions(n + k, k) {
                        // Crossings of kept slots before inserted slots.
                        let mut inv = 0usize;
                        for (idx, &p) in positions.iter().enumerate() {
                            inv += p - idx;
                        }
                        let mut cur = mu.clone();
                        // Insert right-to-left so earlier indices stay valid.
                        for (idx, &p) in positions.iter().enumerate().rev() {
                            let a = &a_layers[orders[idx] - 1];
                            let a_op = MultiDiffOp::from_element(&base, a)?;
                            cur = cur.map_ops(|o| o.compose_into_slot(&a_op, p))?;
                        }
                        if inv % 2 == 1 {
                            cur = cur.neg();
                        }
                        acc = acc.add(&cur)?;
                        any = true;
                    }
                }
            }
            if any {
                out.insert(eps_out, n, acc)?;
            }
        }
    }
    Ok(out)
}

/// Orders >= 1 for k insertions summing to at most `total`.
fn compositions(total: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    fn rec(cur: &mut Vec<usize>, pos: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for w in 1..=left {
            cur[pos] = w;
            rec(cur, pos + 1, left - w, out);
        }
        cur[pos] = 0;
    }
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    rec(&mut cur, 0, total, &mut out);
    out.retain(|v| v.iter().sum::<usize>() <= total && v.iter().all(|&w| w >= 1));
    out
}

fn choose_positions(slots: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(from: usize, slots: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for p in from..slots {
            cur.push(p);
            rec(p + 1, slots, k, cur, out);
            cur.pop();
        }
    }
    rec(0, slots, k, &mut cur, &mut out);
    out
}

/// Solves d a_1 = -f for a degree-one element with coefficients up to the
/// given polynomial degree; exact arithmetic, None if no solution exists
/// in the truncated space.
pub fn solve_flatness_step(
    pinf: &PInfinityStructure,
    f: &GradedPoly,
    max_coeff_deg: u32,
) -> Result<Option<GradedPoly>> {
    let dctx = pinf.spec().dictionary().a_side().clone();
    let base = dctx.base_context().clone();
    if f.context() != &base {
        return Err(CoreError::ContextMismatch);
    }
    let full = dctx.full().clone();
    let embed = |p: &GradedPoly| -> GradedPoly {
        let mut outp = GradedPoly::zero(&full);
        for (m, c) in p.terms() {
            let mut exps = vec![0u32; full.len()];
            exps[..dctx.n_base()].copy_from_slice(m.exps());
            outp.add_term(Monomial::from_exps(exps), c.clone());
        }
        outp
    };
    let basis: Vec<Monomial> = enumerate_monomials(&base, max_coeff_deg + 1)
        .into_iter()
        .filter(|m| m.degree(&base) == 1)
        .collect();
    let mut row_index: BTreeMap<Monomial, usize> = BTreeMap::new();
    let mut cols: Vec<Vec<(usize, BigRational)>> = Vec::new();
    for b in &basis {
        let bp = GradedPoly::from_term(&base, b.clone(), BigRational::one());
        let image = pinf.lambda(1, &[embed(&bp)])?;
        let mut col = Vec::new();
        for (m, q) in image.terms() {
            let next = row_index.len();
            let idx = *row_index.entry(m.clone()).or_insert(next);
            col.push((idx, q.clone()));
        }
        cols.push(col);
    }
    let target = embed(f).neg();
    let mut rhs_entries = Vec::new();
    for (m, q) in target.terms() {
        let next = row_index.len();
        let idx = *row_index.entry(m.clone()).or_insert(next);
        rhs_entries.push((idx, q.clone()));
    }
    let rows = row_index.len();
    let mut a = vec![vec![BigRational::zero(); cols.len()]; rows];
    for (c, col) in cols.iter().enumerate() {
        for (r, q) in col {
            a[*r][c] = q.clone();
        }
    }
    let mut rhs = vec![BigRational::zero(); rows];
    for (r, q) in rhs_entries {
        rhs[r] = q;
    }
    let Some(x) = crate::linalg::solve(&a, &rhs) else {
        return Ok(None);
    };
    let mut a1 = GradedPoly::zero(&base);
    for (k, b) in basis.iter().enumerate() {
        if !x[k].is_zero() {
            a1.add_term(b.clone(), x[k].clone());
        }
    }
    Ok(Some(a1))
}
