//! Higher derived brackets for a coordinate submanifold.
//!
//! The ambient Poisson structure lives on the fiberwise-polynomial side
//! k[x, y][d_x, d_y]; the abelian subalgebra is spanned by monomials in x
//! and d_y (vector fields tangent to the fibres, constant along them),
//! and the projection P kills everything containing y or d_x. Iterated
//! brackets with pi followed by P give graded symmetric maps; a position
//! twist turns them into the skew brackets of degree 2-n. Members of the
//! subalgebra are presented on the exterior side k[x, th], where the
//! brackets of every arity assemble into one multivector.

use num::{BigRational, One};

use crate::context::Var;
use crate::error::{CoreError, Result};
use crate::fourier::FourierDictionary;
use crate::monomial::{enumerate_monomials, Monomial};
use crate::multivector::MultiVector;
use crate::perm::Permutation;
use crate::poly::{rat_int, GradedPoly};

#[derive(Debug, Clone)]
pub struct SubmanifoldSpec {
    dict: FourierDictionary,
    trunc: u32,
}

impl SubmanifoldSpec {
    pub fn new(base_names: &[&str], transverse_names: &[&str], trunc: u32) -> Result<Self> {
        Ok(SubmanifoldSpec {
            dict: FourierDictionary::new(base_names, transverse_names)?,
            trunc,
        })
    }

    pub fn from_dictionary(dict: FourierDictionary, trunc: u32) -> Self {
        SubmanifoldSpec { dict, trunc }
    }

    pub fn dictionary(&self) -> &FourierDictionary {
        &self.dict
    }

    pub fn truncation_order(&self) -> u32 {
        self.trunc
    }

    /// Drops monomials of fiber order above the truncation.
    pub fn taylor_truncate(&self, pi: &MultiVector) -> Result<MultiVector> {
        if pi.context() != self.dict.b_side() {
            return Err(CoreError::ContextMismatch);
        }
        MultiVector::new(
            self.dict.b_side(),
            pi.body()
                .truncate_in_vars(&self.dict.b_fiber_vars(), self.trunc),
        )
    }

    /// Variables killed by the projection onto the subalgebra: the fiber
    /// coordinates and the base conjugates.
    fn killed_vars(&self) -> Vec<Var> {
        let n = self.dict.n_base();
        let r = self.dict.n_fiber();
        let g = n + r;
        let mut vars: Vec<Var> = (n..g).map(Var).collect(); // y's
        vars.extend((g..g + n).map(Var)); // d_x's
        vars
    }

    pub fn project(&self, p: &GradedPoly) -> Result<GradedPoly> {
        if p.context() != self.dict.b_side().full() {
            return Err(CoreError::ContextMismatch);
        }
        Ok(p.kill_vars(&self.killed_vars()))
    }

    /// True iff the element is a sum of monomials in x and th only.
    pub fn in_subalgebra(&self, a: &GradedPoly) -> bool {
        let a_side = self.dict.a_side();
        if a.context() != a_side.full() {
            return false;
        }
        let conj: Vec<Var> = a_side.conjugate_vars().collect();
        a.max_exponent_in(&conj) == 0
    }

    /// P[...[pi, a_1], ..., a_n] with arguments and value presented on the
    /// exterior side. Graded symmetric of degree 1 in the unshifted
    /// grading.
    pub fn derived_bracket(&self, pi: &MultiVector, args: &[GradedPoly]) -> Result<GradedPoly> {
        if pi.context() != self.dict.b_side() {
            return Err(CoreError::ContextMismatch);
        }
        let mut cur = pi.clone();
        for a in args {
            if !self.in_subalgebra(a) {
                return Err(CoreError::OutsideSubalgebra);
            }
            let a_b = MultiVector::new(
                self.dict.b_side(),
                self.dict.forward_poly(a)?,
            )?;
            cur = cur.schouten(&a_b)?;
        }
        let projected = self.project(cur.body())?;
        self.dict.inverse_poly(&projected)
    }

    /// The skew bracket of arity n: a position-dependent sign twist of the
    /// symmetric derived bracket, applied componentwise in the arguments.
    pub fn lambda_n(&self, pi: &MultiVector, args: &[GradedPoly]) -> Result<GradedPoly> {
        let a_full = self.dict.a_side().full();
        let mut out = GradedPoly::zero(a_full);
        let comps: Vec<Vec<(i64, GradedPoly)>> = args
            .iter()
            .map(|a| a.homogeneous_components())
            .collect();
        let mut idx = vec![0usize; args.len()];
        if comps.iter().any(|c| c.is_empty()) {
            return Ok(out);
        }
        loop {
            let tuple: Vec<GradedPoly> = idx
                .iter()
                .enumerate()
                .map(|(j, &k)| comps[j][k].1.clone())
                .collect();
            let mut twist = 0i64;
            for (j, &k) in idx.iter().enumerate() {
                // Multivector degree of the argument is its algebra degree
                // minus one.
                twist += j as i64 * (comps[j][k].0 - 1);
            }
            let mut val = self.derived_bracket(pi, &tuple)?;
            if twist.rem_euclid(2) == 1 {
                val = val.neg();
            }
            out = out.add(&val)?;
            let mut j = 0;
            loop {
                if j == idx.len() {
                    return Ok(out);
                }
                idx[j] += 1;
                if idx[j] < comps[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if args.is_empty() {
                return Ok(out);
            }
        }
    }

    /// Coisotropy of the zero section: the fully projected bivector block
    /// must vanish on the submanifold.
    pub fn is_coisotropic(&self, pi: &MultiVector) -> Result<bool> {
        let t = self.taylor_truncate(pi)?;
        Ok(self.project(t.body())?.is_zero())
    }

    /// Assembles the bracket family from the truncated Poisson element by
    /// pulling it back to the exterior side.
    pub fn pinfinity_from_poisson(&self, pi: &MultiVector) -> Result<PInfinityStructure> {
        let lam = self
            .dict
            .poisson_to_lambda(&self.taylor_truncate(pi)?, self.trunc)?;
        Ok(PInfinityStructure::from_multivector(self, &lam))
    }

    /// Reassembles the same structure from derived-bracket evaluations on
    /// generator tuples only, without using the pullback of pi itself.
    pub fn pinfinity_from_derived_brackets(
        &self,
        pi: &MultiVector,
        n_max: u32,
    ) -> Result<PInfinityStructure> {
        let t = self.taylor_truncate(pi)?;
        let a_side = self.dict.a_side();
        let full = a_side.full();
        let nb = a_side.n_base();
        let mut lambdas = Vec::new();
        for n in 0..=n_max {
            // Conjugate blocks with exactly n factors.
            let conj_ctx = crate::context::GradedContext::new(
                a_side
                    .conjugate_vars()
                    .map(|v| (full.name(v).to_string(), full.degree(v)))
                    .collect::<Vec<_>>(),
            )?;
            let blocks: Vec<Monomial> = enumerate_monomials(&conj_ctx, n)
                .into_iter()
                .filter(|m| m.total_exponent() == n)
                .collect();
            let mut avatar = GradedPoly::zero(full);
            for block in blocks {
                // Generator tuple matching the block, sorted.
                let mut tuple: Vec<GradedPoly> = Vec::new();
                for (v, e) in block.factors() {
                    for _ in 0..e {
                        tuple.push(GradedPoly::var(full, Var(v.0)));
                    }
                }
                // Scalar produced by contracting the bare block against
                // its own tuple on the exterior side.
                let mut bexps = vec![0u32; full.len()];
                bexps[nb..].copy_from_slice(block.exps());
                let bare = MultiVector::new(
                    a_side,
                    GradedPoly::from_term(full, Monomial::from_exps(bexps), BigRational::one()),
                )?;
                let alpha = eval_avatar(self, &bare, &tuple)?;
                let alpha = match alpha.terms().next() {
                    Some((m, q)) if m.is_one() => q.clone(),
                    _ => continue, // block annihilates its own tuple
                };
                let value = self.derived_bracket(&t, &tuple)?;
                if value.is_zero() {
                    continue;
                }
                let coeff = value.scale(&(BigRational::one() / alpha));
                let mut bexps = vec![0u32; full.len()];
                bexps[nb..].copy_from_slice(block.exps());
                let block_poly = GradedPoly::from_term(
                    full,
                    Monomial::from_exps(bexps),
                    BigRational::one(),
                );
                avatar = avatar.add(&coeff.mul(&block_poly)?)?;
            }
            lambdas.push(MultiVector::new(a_side, avatar)?);
        }
        Ok(PInfinityStructure {
            spec: self.clone(),
            lambdas,
        })
    }
}

/// Derived bracket on the exterior side: contract the avatar against
/// subalgebra elements and project away the conjugate variables.
fn eval_avatar(
    spec: &SubmanifoldSpec,
    avatar: &MultiVector,
    args: &[GradedPoly],
) -> Result<GradedPoly> {
    let a_side = spec.dictionary().a_side();
    let conj: Vec<Var> = a_side.conjugate_vars().collect();
    let mut cur = avatar.clone();
    for a in args {
        if !spec.in_subalgebra(a) {
            return Err(CoreError::OutsideSubalgebra);
        }
        let a_mv = MultiVector::new(a_side, a.clone())?;
        cur = cur.schouten(&a_mv)?;
    }
    Ok(cur.body().kill_vars(&conj))
}

/// The family of brackets, stored as exterior-side multivectors indexed by
/// arity. The arity-n component is a graded alternating multiderivation of
/// degree 2-n.
#[derive(Debug, Clone)]
pub struct PInfinityStructure {
    spec: SubmanifoldSpec,
    lambdas: Vec<MultiVector>,
}

impl PInfinityStructure {
    pub fn from_multivector(spec: &SubmanifoldSpec, lam: &MultiVector) -> Self {
        let comps = lam.arity_components();
        let n_max = comps.iter().map(|(a, _)| *a).max().unwrap_or(0);
        let mut lambdas = Vec::new();
        for n in 0..=n_max {
            let found = comps
                .iter()
                .find(|(a, _)| *a == n)
                .map(|(_, m)| m.clone())
                .unwrap_or_else(|| MultiVector::zero(spec.dictionary().a_side()));
            lambdas.push(found);
        }
        PInfinityStructure {
            spec: spec.clone(),
            lambdas,
        }
    }

    pub fn spec(&self) -> &SubmanifoldSpec {
        &self.spec
    }

    pub fn n_max(&self) -> u32 {
        (self.lambdas.len() as u32).saturating_sub(1)
    }

    pub fn avatar(&self, n: u32) -> Option<&MultiVector> {
        self.lambdas.get(n as usize)
    }

    /// The whole family as one inhomogeneous multivector.
    pub fn total(&self) -> Result<MultiVector> {
        let mut out = MultiVector::zero(self.spec.dictionary().a_side());
        for l in &self.lambdas {
            out = out.add(l)?;
        }
        Ok(out)
    }

    /// The symmetric derived bracket of arity n evaluated from the stored
    /// avatar.
    pub fn symmetric_bracket(&self, n: u32, args: &[GradedPoly]) -> Result<GradedPoly> {
        if args.len() != n as usize {
            return Err(CoreError::ArityMismatch {
                expected: n as usize,
                got: args.len(),
            });
        }
        match self.avatar(n) {
            Some(av) => eval_avatar(&self.spec, av, args),
            None => Ok(GradedPoly::zero(self.spec.dictionary().a_side().full())),
        }
    }

    /// The skew bracket of arity n with the position twist.
    pub fn lambda(&self, n: u32, args: &[GradedPoly]) -> Result<GradedPoly> {
        let full = self.spec.dictionary().a_side().full().clone();
        let mut out = GradedPoly::zero(&full);
        let comps: Vec<Vec<(i64, GradedPoly)>> = args
            .iter()
            .map(|a| a.homogeneous_components())
            .collect();
        if comps.iter().any(|c| c.is_empty()) {
            return Ok(out);
        }
        let mut idx = vec![0usize; args.len()];
        loop {
            let tuple: Vec<GradedPoly> = idx
                .iter()
                .enumerate()
                .map(|(j, &k)| comps[j][k].1.clone())
                .collect();
            let mut twist = 0i64;
            for (j, &k) in idx.iter().enumerate() {
                twist += j as i64 * (comps[j][k].0 - 1);
            }
            let mut val = self.symmetric_bracket(n, &tuple)?;
            if twist.rem_euclid(2) == 1 {
                val = val.neg();
            }
            out = out.add(&val)?;
            let mut j = 0;
            loop {
                if j == idx.len() {
                    return Ok(out);
                }
                idx[j] += 1;
                if idx[j] < comps[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if args.is_empty() {
                return Ok(out);
            }
        }
    }

    /// The arity-n homotopy Jacobi defect
    /// sum_q (-1)^{q(n-q)}/(q!(n-q)!) lambda_{n-q+1}(lambda_q(..), ..)
    /// precomposed with the graded alternation of the arguments. Zero is
    /// the pass condition.
    pub fn jacobi_residual(&self, args: &[GradedPoly]) -> Result<GradedPoly> {
        let n = args.len();
        let full = self.spec.dictionary().a_side().full().clone();
        for a in args {
            if !a.is_homogeneous() {
                return Err(CoreError::Inhomogeneous);
            }
        }
        let parities: Vec<i64> = args
            .iter()
            .map(|a| a.parity().map(|p| p as i64).unwrap_or(0))
            .collect();
        let mut residual = GradedPoly::zero(&full);
        let mut n_perms = 0i64;
        for sigma in Permutation::all(n) {
            let koszul = crate::perm::permutation_sign(&sigma, &parities)?;
            let sgn = sigma.sign() as i64 * koszul as i64;
            let permuted = sigma.apply_slice(args);
            n_perms += 1;
            for q in 0..=n {
                let inner = self.lambda(q as u32, &permuted[..q])?;
                let mut outer_args = vec![inner];
                outer_args.extend_from_slice(&permuted[q..]);
                let val = self.lambda((n - q + 1) as u32, &outer_args)?;
                let mut c = BigRational::one()
                    / (rat_int(factorial(q)) * rat_int(factorial(n - q)));
                if (q * (n - q)) % 2 == 1 {
                    c = -c;
                }
                c *= rat_int(sgn);
                residual = residual.add(&val.scale(&c))?;
            }
        }
        Ok(residual.scale(&(BigRational::one() / rat_int(n_perms.max(1)))))
    }
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product::<i64>().max(1)
}
