//! The map from multivector fields to alternating multidifferential
//! operators, with the local sign convention
//! `gamma^{i_1..i_m} th_{i_1}..th_{i_m} -> (-1)^{sum (a-1) e_{i_a}}
//!  gamma^{i_1..i_m} mu o (d_{i_1} x .. x d_{i_m})`
//! normalized so an arity-p component carries 1/p! over the symmetric
//! group.

use num::{BigRational, One};

use crate::context::Var;
use crate::error::{CoreError, Result};
use crate::hochschild::MultiDiffOp;
use crate::monomial::enumerate_monomials;
use crate::multivector::MultiVector;
use crate::poly::{rat_int, GradedPoly};

/// Distinct permutations of a multiset given in sorted order.
fn multiset_permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut pool = items.to_vec();
    pool.sort_unstable();
    let mut current = Vec::with_capacity(items.len());
    fn rec(pool: &mut Vec<usize>, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pool.is_empty() {
            out.push(current.clone());
            return;
        }
        let mut last: Option<usize> = None;
        for i in 0..pool.len() {
            if last == Some(pool[i]) {
                continue;
            }
            last = Some(pool[i]);
            let v = pool.remove(i);
            current.push(v);
            rec(pool, current, out);
            current.pop();
            pool.insert(i, v);
        }
    }
    rec(&mut pool, &mut current, &mut out);
    out
}

/// HKR image of a multivector with a uniform number of conjugate factors.
pub fn hkr(gamma: &MultiVector) -> Result<MultiDiffOp> {
    let arity = gamma.conj_arity().ok_or(CoreError::Inhomogeneous)?;
    Ok(hkr_components(gamma)
        .into_iter()
        .find(|(a, _)| *a == arity)
        .map(|(_, op)| op)
        .unwrap_or_else(|| {
            MultiDiffOp::zero(gamma.context().base_context(), arity as usize)
        }))
}

/// HKR images of the conjugate-arity components, mapped independently.
pub fn hkr_components(gamma: &MultiVector) -> Vec<(u32, MultiDiffOp)> {
    let dctx = gamma.context();
    let base = dctx.base_context();
    let nb = dctx.n_base();
    let full = dctx.full();
    let mut out: Vec<(u32, MultiDiffOp)> = Vec::new();
    for (arity, comp) in gamma.arity_components() {
        let m = arity as usize;
        let mut terms: Vec<(GradedPoly, Vec<Vec<(Var, u32)>>)> = Vec::new();
        for (mono, q) in comp.body().terms() {
            // Base part is the coefficient, conjugate part the direction.
            let mut cexps = vec![0u32; nb];
            cexps[..nb].copy_from_slice(&mono.exps()[..nb]);
            let cmono = crate::monomial::Monomial::from_exps(cexps);
            let mut multiset: Vec<usize> = Vec::new();
            for i in 0..nb {
                for _ in 0..mono.exp(Var(nb + i)) {
                    multiset.push(i);
                }
            }
            let tuples = multiset_permutations(&multiset);
            let share = BigRational::one() / rat_int(tuples.len() as i64);
            for tuple in tuples {
                // Koszul sign of reordering the canonical conjugate block
                // into this tuple, computed by multiplying it out.
                let mut reordered = GradedPoly::one(full);
                for &i in &tuple {
                    reordered = reordered
                        .mul(&GradedPoly::var(full, Var(nb + i)))
                        .expect("same context");
                }
                let (tm, tq) = reordered
                    .terms()
                    .next()
                    .map(|(m, q)| (m.clone(), q.clone()))
                    .expect("tuple product is a single monomial");
                debug_assert_eq!(
                    tm.exps()[nb..],
                    mono.exps()[nb..],
                    "tuple must reproduce the conjugate block"
                );
                let mut sign_exp = 0i64;
                for (a, &i) in tuple.iter().enumerate() {
                    sign_exp += a as i64 * base.degree(Var(i));
                }
                let mut coeff = q * &share * tq;
                if sign_exp.rem_euclid(2) == 1 {
                    coeff = -coeff;
                }
                let coeff_poly = GradedPoly::from_term(base, cmono.clone(), coeff);
                let slots: Vec<Vec<(Var, u32)>> =
                    tuple.iter().map(|&i| vec![(Var(i), 1)]).collect();
                terms.push((coeff_poly, slots));
            }
        }
        let op = MultiDiffOp::from_terms(base, m, terms).expect("well-formed hkr terms");
        out.push((arity, op));
    }
    out
}

/// Checks the two defining conditions on a spanning set of monomials of
/// degree at most `max_deg` per slot: derivation in the last argument and
/// graded alternation. Sound but bounded by the spanning set.
pub fn is_hkr_cocycle(phi: &MultiDiffOp, max_deg: u32) -> Result<bool> {
    let m = phi.arity();
    if m == 0 {
        return Ok(true);
    }
    let base = phi.base().clone();
    let span: Vec<GradedPoly> = enumerate_monomials(&base, max_deg)
        .into_iter()
        .map(|mo| GradedPoly::from_term(&base, mo, BigRational::one()))
        .collect();

    for (deg, comp) in phi.by_degree() {
        // (ii) graded alternating under adjacent swaps.
        let mut tuple_idx = vec![0usize; m];
        loop {
            let args: Vec<GradedPoly> =
                tuple_idx.iter().map(|&k| span[k].clone()).collect();
            for i in 0..m.saturating_sub(1) {
                let mut swapped = args.clone();
                swapped.swap(i, i + 1);
                let pi = args[i].parity().unwrap_or(false);
                let pj = args[i + 1].parity().unwrap_or(false);
                let lhs = comp.apply(&args)?;
                let mut rhs = comp.apply(&swapped)?.neg();
                if pi && pj {
                    rhs = rhs.neg();
                }
                if lhs != rhs {
                    return Ok(false);
                }
            }
            if !advance(&mut tuple_idx, span.len()) {
                break;
            }
        }

        // (i) derivation in the last argument for fixed monomial prefixes.
        let mut prefix_idx = vec![0usize; m - 1];
        loop {
            let prefix: Vec<GradedPoly> =
                prefix_idx.iter().map(|&k| span[k].clone()).collect();
            let prefix_par: i64 = prefix
                .iter()
                .map(|a| a.parity().unwrap_or(false) as i64)
                .sum();
            let d_par = (deg + prefix_par).rem_euclid(2) == 1;
            for f in &span {
                for g in &span {
                    let fg = f.mul(g)?;
                    let mut args = prefix.clone();
                    args.push(fg);
                    let lhs = comp.apply(&args)?;
                    let mut a1 = prefix.clone();
                    a1.push(f.clone());
                    let t1 = comp.apply(&a1)?.mul(g)?;
                    let mut a2 = prefix.clone();
                    a2.push(g.clone());
                    let mut t2 = f.mul(&comp.apply(&a2)?)?;
                    if d_par && f.parity().unwrap_or(false) {
                        t2 = t2.neg();
                    }
                    if lhs != t1.add(&t2)? {
                        return Ok(false);
                    }
                }
            }
            if m == 1 || !advance(&mut prefix_idx, span.len()) {
                break;
            }
        }
    }
    Ok(true)
}

fn advance(idx: &mut [usize], bound: usize) -> bool {
    for k in idx.iter_mut() {
        *k += 1;
        if *k < bound {
            return true;
        }
        *k = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::DoubledContext;
    use crate::parse::parse_poly;
    use crate::poly::rat;
    use std::sync::Arc;

    fn d2() -> Arc<DoubledContext> {
        DoubledContext::new(vec![("x1", 0), ("x2", 0)]).unwrap()
    }

    fn mv(d: &Arc<DoubledContext>, s: &str) -> MultiVector {
        MultiVector::new(d, parse_poly(d.full(), s).unwrap()).unwrap()
    }

    #[test]
    fn single_derivation() {
        let d = d2();
        let op = hkr(&mv(&d, "d_x1")).unwrap();
        let b = d.base_context();
        let got = op.apply(&[parse_poly(b, "x1^2").unwrap()]).unwrap();
        assert_eq!(got, parse_poly(b, "2*x1").unwrap());
    }

    #[test]
    fn bivector_halves() {
        let d = d2();
        let op = hkr(&mv(&d, "d_x1*d_x2")).unwrap();
        let b = d.base_context();
        let got = op
            .apply(&[parse_poly(b, "x1").unwrap(), parse_poly(b, "x2").unwrap()])
            .unwrap();
        assert_eq!(got, GradedPoly::constant(b, rat(1, 2)));
    }

    #[test]
    fn function_becomes_zero_cochain() {
        let d = d2();
        let op = hkr(&mv(&d, "x1^2 + 3")).unwrap();
        assert_eq!(op.arity(), 0);
        let b = d.base_context();
        assert_eq!(op.apply(&[]).unwrap(), parse_poly(b, "x1^2 + 3").unwrap());
    }

    #[test]
    fn images_are_cocycles() {
        let d = d2();
        for s in ["d_x1*d_x2", "x1*d_x1*d_x2", "x2^2*d_x1", "x1*x2"] {
            let op = hkr(&mv(&d, s)).unwrap();
            assert!(op.hochschild_b().unwrap().is_zero(), "b(hkr({s})) != 0");
        }
    }

    #[test]
    fn image_is_alternating_cocycle() {
        let d = d2();
        let op = hkr(&mv(&d, "x1*d_x1*d_x2")).unwrap();
        assert!(is_hkr_cocycle(&op, 2).unwrap());
    }

    #[test]
    fn product_is_not_hkr() {
        let d = d2();
        let mu = MultiDiffOp::product(d.base_context(), 2);
        assert!(!is_hkr_cocycle(&mu, 2).unwrap());
    }

    #[test]
    fn second_order_slot_is_rejected() {
        let d = d2();
        let b = d.base_context();
        let op = MultiDiffOp::from_terms(
            b,
            2,
            vec![(
                GradedPoly::one(b),
                vec![vec![(Var(0), 2)], vec![(Var(1), 1)]],
            )],
        )
        .unwrap();
        assert!(!is_hkr_cocycle(&op, 2).unwrap());
    }

    #[test]
    fn arity_one_is_a_bracket_homomorphism() {
        let d = d2();
        let x = mv(&d, "x1^2*d_x2");
        let y = mv(&d, "x2*d_x1 + x1*d_x2");
        let lhs = hkr(&x.schouten(&y).unwrap()).unwrap();
        let rhs = hkr(&x)
            .unwrap()
            .gerstenhaber_bracket(&hkr(&y).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn odd_base_variables_pick_up_the_stated_sign() {
        // One even and one odd base generator; the psi-conjugate of the odd
        // generator is even, so repeated indices appear.
        let d = DoubledContext::new(vec![("x", 0), ("th", 1)]).unwrap();
        let b = d.base_context();
        let gamma = mv_local(&d, "d_x*d_th");
        let op = hkr(&gamma).unwrap();
        let f = parse_poly(b, "x*th").unwrap();
        let g = parse_poly(b, "th").unwrap();
        // Sanity: the image must be a cocycle and alternating.
        assert!(op.hochschild_b().unwrap().is_zero());
        assert!(is_hkr_cocycle(&op, 2).unwrap());
        let _ = op.apply(&[f, g]).unwrap();
    }

    fn mv_local(d: &Arc<DoubledContext>, s: &str) -> MultiVector {
        MultiVector::new(d, parse_poly(d.full(), s).unwrap()).unwrap()
    }
}
