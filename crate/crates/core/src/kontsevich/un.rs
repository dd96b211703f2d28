//! Assembly of the Taylor components: weighted sums of graph operators
//! over one representative per edge set, with the global sign
//! (-1)^{(sum|gamma_i| - 1) m} and the wedge-to-composition reordering
//! factor (-1)^{E(E-1)/2}. The one-vertex component reproduces the
//! alternating derivative operator exactly; the quadratic formality
//! residual is checked against the estimated weights' error bars.

use crate::error::{CoreError, Result};
use crate::hochschild::MultiDiffOp;
use crate::kontsevich::graph::canonical_graphs;
use crate::kontsevich::operator::graph_operator;
use crate::kontsevich::weight::WeightEngine;
use crate::multivector::MultiVector;
use crate::perm::Permutation;
use crate::poly::GradedPoly;
use crate::weighted::{UncertainPoly, WeightMethod, WeightedOp};

/// The arity-m component of U_n applied to the given multivectors, as an
/// operator on the base algebra.
pub fn u_n_operator(
    engine: &WeightEngine,
    gammas: &[MultiVector],
    m: usize,
) -> Result<WeightedOp> {
    let n = gammas.len();
    if n == 0 {
        return Err(CoreError::ArityMismatch {
            expected: 1,
            got: 0,
        });
    }
    let dctx = gammas[0].context().clone();
    let base = dctx.base_context().clone();
    let mut out = WeightedOp::zero(&base, m);
    // Mixed inputs expand multilinearly over pieces of uniform degree and
    // conjugate arity.
    if gammas
        .iter()
        .any(|g| !g.body().is_homogeneous() || g.conj_arity().is_none())
    {
        let comps: Vec<Vec<MultiVector>> = gammas
            .iter()
            .map(|g| {
                let mut pieces = Vec::new();
                for (_, part) in g.arity_components() {
                    for (_, p) in part.body().homogeneous_components() {
                        pieces.push(MultiVector::new(g.context(), p)?);
                    }
                }
                Ok(pieces)
            })
            .collect::<Result<_>>()?;
        let mut idx = vec![0usize; n];
        if comps.iter().any(|c| c.is_empty()) {
            return Ok(out);
        }
        loop {
            let tuple: Vec<MultiVector> = idx
                .iter()
                .enumerate()
                .map(|(j, &k)| comps[j][k].clone())
                .collect();
            out = out.add(&u_n_operator(engine, &tuple, m)?)?;
            let mut j = 0;
            loop {
                if j == n {
                    return Ok(out);
                }
                idx[j] += 1;
                if idx[j] < comps[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }
    let mut degrees = Vec::with_capacity(n);
    let mut p_sum = 0usize;
    for g in gammas {
        if g.is_zero() {
            return Ok(out);
        }
        degrees.push(g.body().degree().ok_or(CoreError::Inhomogeneous)?);
        p_sum += g.conj_arity().ok_or(CoreError::Inhomogeneous)? as usize;
    }
    if 2 * n + m < 2 || p_sum != 2 * n + m - 2 {
        return Ok(out);
    }
    let edges = p_sum;
    let mut sign = (degrees.iter().sum::<i64>() - 1) * m as i64;
    sign += (edges * (edges.saturating_sub(1)) / 2) as i64;
    let negate = sign.rem_euclid(2) == 1;

    let p_degs: Vec<usize> = gammas
        .iter()
        .map(|g| g.conj_arity().unwrap() as usize)
        .collect();
    for graph in canonical_graphs(n, m, &p_degs) {
        let mut op = graph_operator(&graph, gammas)?;
        if op.is_zero() {
            continue;
        }
        if negate {
            op = op.neg();
        }
        let w = engine.weight(&graph);
        match (&w.method, &w.exact) {
            (WeightMethod::Exact, Some(q)) => {
                out.exact = out.exact.add(&op.scale(q))?;
            }
            _ => out.numeric.push((w, op)),
        }
    }
    Ok(out)
}

/// U_n applied to multivectors and arguments.
pub fn u_n_apply(
    engine: &WeightEngine,
    gammas: &[MultiVector],
    args: &[GradedPoly],
) -> Result<UncertainPoly> {
    u_n_operator(engine, gammas, args.len())?.apply(args)
}

/// The degree-shift twist used when bracketing on the operator side:
/// scales each internally homogeneous layer phi by (-1)^{|phi| + arity}.
fn shifted_parity_twist(op: &WeightedOp) -> Result<WeightedOp> {
    op.map_ops(|o| {
        let arity = o.arity() as i64;
        let mut out = MultiDiffOp::zero(o.base(), o.arity());
        for (d, layer) in o.by_degree() {
            let piece = if (d + arity).rem_euclid(2) == 1 {
                layer.neg()
            } else {
                layer
            };
            out = out.add(&piece)?;
        }
        Ok(out)
    })
}

/// Quadratic coderivation component on the operator side.
fn q2_operators(a: &WeightedOp, b: &WeightedOp) -> Result<WeightedOp> {
    shifted_parity_twist(a)?.bracket(b)
}

/// Quadratic coderivation component on the multivector side:
/// (-1)^{|g1|} [g1, g2].
fn q2_multivectors(a: &MultiVector, b: &MultiVector) -> Result<MultiVector> {
    let mut out = MultiVector::zero(a.context());
    for (d, comp) in a.body().homogeneous_components() {
        let part = MultiVector::new(a.context(), comp)?.schouten(b)?;
        let part = if d.rem_euclid(2) == 1 { part.neg() } else { part };
        out = out.add(&part)?;
    }
    Ok(out)
}

/// Left side minus right side of the quadratic morphism identity for the
/// Taylor components, as an operator; zero within the accumulated weight
/// error is the pass condition. Supported for one or two multivectors.
pub fn formality_residual_operator(
    engine: &WeightEngine,
    gammas: &[MultiVector],
) -> Result<WeightedOp> {
    let n = gammas.len();
    if n == 0 || n > 2 {
        return Err(CoreError::UnsupportedOrder(n, 2));
    }
    let dctx = gammas[0].context().clone();
    let base = dctx.base_context().clone();
    let mut p_sum = 0usize;
    let mut parities = Vec::with_capacity(n);
    for g in gammas {
        p_sum += g.conj_arity().ok_or(CoreError::Inhomogeneous)? as usize;
        parities.push(g.body().degree().ok_or(CoreError::Inhomogeneous)?);
    }
    // Both sides live in this arity.
    let m_out = (p_sum + 3).checked_sub(2 * n).ok_or(CoreError::UnsupportedOrder(n, 2))?;
    let mu_a = WeightedOp::from_exact(MultiDiffOp::product(&base, 2));

    let u_of = |subset: &[usize], m: usize| -> Result<WeightedOp> {
        if subset.is_empty() {
            return Ok(mu_a.clone());
        }
        let gs: Vec<MultiVector> = subset.iter().map(|&i| gammas[i].clone()).collect();
        u_n_operator(engine, &gs, m)
    };

    let mut lhs = WeightedOp::zero(&base, m_out);
    for p in 0..=n {
        let q = n - p;
        for sh in Permutation::shuffles(p, q) {
            // The shuffle selects ascending subsets; sign counts crossed
            // odd pairs.
            let inv = sh.inverse();
            let s_block: Vec<usize> = (0..p).map(|t| inv.0[t]).collect();
            let t_block: Vec<usize> = (p..n).map(|t| inv.0[t]).collect();
            let mut sign = false;
            for &s in &s_block {
                for &t in &t_block {
                    if s > t
                        && parities[s].rem_euclid(2) == 1
                        && parities[t].rem_euclid(2) == 1
                    {
                        sign = !sign;
                    }
                }
            }
            let m_p = if s_block.is_empty() {
                2
            } else {
                let pp: usize = s_block.iter().map(|&i| gammas[i].conj_arity().unwrap() as usize).sum();
                match (pp + 2).checked_sub(2 * s_block.len()) {
                    Some(v) => v,
                    None => continue,
                }
            };
            let m_q = if t_block.is_empty() {
                2
            } else {
                let qq: usize = t_block.iter().map(|&i| gammas[i].conj_arity().unwrap() as usize).sum();
                match (qq + 2).checked_sub(2 * t_block.len()) {
                    Some(v) => v,
                    None => continue,
                }
            };
            if m_p + m_q != m_out + 1 {
                continue;
            }
            let a = u_of(&s_block, m_p)?;
            let b = u_of(&t_block, m_q)?;
            let mut term = q2_operators(&a, &b)?;
            if sign {
                term = term.neg();
            }
            lhs = lhs.add(&term)?;
        }
    }

    let mut rhs = WeightedOp::zero(&base, m_out);
    for i in 0..n {
        for j in i + 1..n {
            let mut eps = 0i64;
            for k in 0..i {
                eps += parities[i] * parities[k];
            }
            for k in 0..j {
                eps += parities[j] * parities[k];
            }
            eps -= parities[i] * parities[j];
            let br = q2_multivectors(&gammas[i], &gammas[j])?;
            if br.is_zero() {
                continue;
            }
            let mut rest = vec![br];
            for (k, g) in gammas.iter().enumerate() {
                if k != i && k != j {
                    rest.push(g.clone());
                }
            }
            let mut term = u_n_operator(engine, &rest, m_out)?;
            if eps.rem_euclid(2) == 1 {
                term = term.neg();
            }
            rhs = rhs.add(&term)?;
        }
    }

    lhs.add(&rhs.neg())
}

pub fn formality_residual(
    engine: &WeightEngine,
    gammas: &[MultiVector],
    args: &[GradedPoly],
) -> Result<UncertainPoly> {
    formality_residual_operator(engine, gammas)?.apply(args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::DoubledContext;
    use crate::hkr::hkr;
    use crate::parse::parse_poly;
    use crate::sample::Sampler;
    use std::sync::Arc;

    fn d2() -> Arc<DoubledContext> {
        DoubledContext::new(vec![("x1", 0), ("x2", 0)]).unwrap()
    }

    fn engine() -> WeightEngine {
        WeightEngine::new(100_000, 8, 7)
    }

    fn mv(d: &Arc<DoubledContext>, s: &str) -> MultiVector {
        MultiVector::new(d, parse_poly(d.full(), s).unwrap()).unwrap()
    }

    #[test]
    fn u1_equals_hkr_on_samples() {
        let d = d2();
        let e = engine();
        let mut smp = Sampler::new(3);
        for arity in 0..=4u32 {
            for _ in 0..4 {
                let g = smp.multivector_of_arity(&d, 2, arity, 3);
                if g.is_zero() {
                    continue;
                }
                // 2n + m - 2 = p with n = 1 forces m = p.
                let m_slots = arity as usize;
                let u1 = u_n_operator(&e, &[g.clone()], m_slots).unwrap();
                assert!(u1.is_exact());
                let want = hkr(&g).unwrap();
                assert_eq!(u1.exact, want, "arity {arity}");
            }
        }
    }

    #[test]
    fn u1_on_functions_is_the_function() {
        let d = d2();
        let e = engine();
        let f = mv(&d, "x1^2 + 3*x2");
        let u = u_n_operator(&e, &[f], 0).unwrap();
        let got = u.apply(&[]).unwrap();
        assert!(got.noisy.is_empty());
        assert_eq!(
            got.exact,
            parse_poly(d2().base_context(), "x1^2 + 3*x2").unwrap()
        );
    }

    #[test]
    fn degree_rule_kills_mismatched_slots() {
        let d = d2();
        let e = engine();
        let g = mv(&d, "d_x1*d_x2");
        for m in [0usize, 1, 3, 4] {
            let u = u_n_operator(&e, &[g.clone()], m).unwrap();
            assert!(u.exact.is_zero() && u.numeric.is_empty(), "m = {m}");
        }
    }

    #[test]
    fn formality_residual_vanishes_exactly_for_one_input() {
        let d = d2();
        let e = engine();
        let mut smp = Sampler::new(5);
        for arity in 1..=3u32 {
            for _ in 0..3 {
                let g = smp.multivector_of_arity(&d, 2, arity, 2);
                if g.is_zero() {
                    continue;
                }
                let r = formality_residual_operator(&e, &[g]).unwrap();
                assert!(r.is_exact());
                assert!(r.exact.is_zero(), "residual {}", r.exact);
            }
        }
    }
}
