//! The multidifferential operator attached to a graph: one contraction
//! endomorphism per edge applied to the tensor of multivector slots and
//! open argument slots, followed by multiplying everything out and
//! dropping leftover conjugate directions.
//!
//! The whole tensor lives in one graded context whose variables are a copy
//! of the doubled algebra per aerial slot followed by derivative symbols
//! for the ground slots, so every Koszul sign is polynomial arithmetic.

use std::sync::Arc;

use crate::context::{GradedContext, Var};
use crate::error::{CoreError, Result};
use crate::hochschild::{ext_context, MultiDiffOp};
use crate::kontsevich::graph::{KGraph, Target};
use crate::monomial::Monomial;
use crate::multivector::MultiVector;
use crate::poly::GradedPoly;

/// Applies the edge contractions of `graph` to the given multivectors and
/// returns the resulting operator on the base algebra, with one argument
/// slot per ground vertex.
pub fn graph_operator(graph: &KGraph, gammas: &[MultiVector]) -> Result<MultiDiffOp> {
    let n = graph.n_aerial();
    let m = graph.n_ground();
    if gammas.len() != n {
        return Err(CoreError::ArityMismatch {
            expected: n,
            got: gammas.len(),
        });
    }
    let dctx = gammas
        .first()
        .map(|g| g.context().clone())
        .ok_or(CoreError::ArityMismatch {
            expected: 1,
            got: 0,
        })?;
    for (i, g) in gammas.iter().enumerate() {
        if g.context() != &dctx {
            return Err(CoreError::ContextMismatch);
        }
        let arity = g.conj_arity().ok_or(CoreError::Inhomogeneous)?;
        if arity as usize != graph.out_degrees()[i] {
            return Err(CoreError::ArityMismatch {
                expected: graph.out_degrees()[i],
                got: arity as usize,
            });
        }
    }
    let base = dctx.base_context().clone();
    let nb = base.len();
    let full = dctx.full().clone();
    let nf = full.len();

    // Mega context: slot copies of the doubled algebra, then ground
    // derivative symbols.
    let mut vars: Vec<(String, i64)> = Vec::with_capacity(n * nf + m * nb);
    for s in 0..n {
        for v in full.vars() {
            vars.push((format!("S{s}_{}", full.name(v)), full.degree(v)));
        }
    }
    for j in 0..m {
        for v in base.vars() {
            vars.push((format!("D{}_{}", j + 1, base.name(v)), -base.degree(v)));
        }
    }
    let mega = GradedContext::new(vars)?;
    let slot_var = |s: usize, v: usize| Var(s * nf + v);
    let ground_var = |j: usize, v: usize| Var(n * nf + j * nb + v);

    // Initial state: the tensor of the multivector bodies.
    let mut state = GradedPoly::one(&mega);
    for (s, g) in gammas.iter().enumerate() {
        let mut embedded = GradedPoly::zero(&mega);
        for (mono, q) in g.body().terms() {
            let mut exps = vec![0u32; mega.len()];
            exps[s * nf..(s + 1) * nf].copy_from_slice(mono.exps());
            embedded.add_term(Monomial::from_exps(exps), q.clone());
        }
        state = state.mul(&embedded)?;
    }

    // Edges in composition order: the listed product acts with the last
    // edge first.
    for (src, tgt) in graph.edges().into_iter().rev() {
        let mut next = GradedPoly::zero(&mega);
        for alpha in 0..nb {
            // d/d(theta_alpha) on the source slot, d/d(x_alpha) on the
            // target, with the generator-degree sign.
            let inner = match tgt {
                Target::Aerial(j) => state.left_partial(slot_var(j, alpha))?,
                Target::Ground(j) => {
                    GradedPoly::var(&mega, ground_var(j, alpha)).mul(&state)?
                }
            };
            if inner.is_zero() {
                continue;
            }
            let piece = inner.left_partial(slot_var(src, nb + alpha))?;
            if piece.is_zero() {
                continue;
            }
            let signed = if base.degree(Var(alpha)).rem_euclid(2) == 1 {
                piece.neg()
            } else {
                piece
            };
            next = next.add(&signed)?;
        }
        state = next;
        if state.is_zero() {
            break;
        }
    }

    // Multiply the slots along the diagonal, kill leftover conjugates and
    // hand the ground symbols to the operator context.
    let target = ext_context(&base, m);
    let mut images: Vec<GradedPoly> = Vec::with_capacity(mega.len());
    for _s in 0..n {
        for v in 0..nf {
            if v < nb {
                images.push(GradedPoly::var(&target, Var(v)));
            } else {
                images.push(GradedPoly::zero(&target));
            }
        }
    }
    for j in 0..m {
        for v in 0..nb {
            images.push(GradedPoly::var(&target, Var(nb * (j + 1) + v)));
        }
    }
    let body = state.substitute(&target, &images)?;
    MultiDiffOp::from_body(&base, m, body)
}

/// Test oracle: the same contraction applied to concrete arguments with
/// hand-tracked tensor signs, bypassing the operator representation.
pub fn graph_apply(
    graph: &KGraph,
    gammas: &[MultiVector],
    args: &[GradedPoly],
) -> Result<GradedPoly> {
    if args.len() != graph.n_ground() {
        return Err(CoreError::ArityMismatch {
            expected: graph.n_ground(),
            got: args.len(),
        });
    }
    let op = graph_operator(graph, gammas)?;
    op.apply(args)
}

pub fn embed_into_doubled(
    dctx: &Arc<crate::context::DoubledContext>,
    p: &GradedPoly,
) -> GradedPoly {
    let nb = dctx.n_base();
    let mut out = GradedPoly::zero(dctx.full());
    for (m, c) in p.terms() {
        let mut exps = vec![0u32; dctx.full().len()];
        exps[..nb].copy_from_slice(m.exps());
        out.add_term(Monomial::from_exps(exps), c.clone());
    }
    out
}

/// Restriction of a conjugate-free doubled-context element to the base
/// context.
pub fn restrict_to_base(
    dctx: &Arc<crate::context::DoubledContext>,
    p: &GradedPoly,
) -> Result<GradedPoly> {
    let nb = dctx.n_base();
    let mut out = GradedPoly::zero(dctx.base_context());
    for (m, c) in p.terms() {
        if m.exps()[nb..].iter().any(|&e| e > 0) {
            return Err(CoreError::OutsideSubalgebra);
        }
        out.add_term(Monomial::from_exps(m.exps()[..nb].to_vec()), c.clone());
    }
    Ok(out)
}
