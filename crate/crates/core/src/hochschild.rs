//! Graded multidifferential operators, the Hochschild differential and the
//! Gerstenhaber bracket.
//!
//! An operator of arity m over an algebra k[v_1..v_d] is stored as a
//! graded polynomial in an extended context
//! `[ v_1..v_d | D1_v1..D1_vd | ... | Dm_v1..Dm_vd ]`
//! where the slot symbol `Dj_v` has degree -|v| and stands for a partial
//! derivative acting on the j-th argument. A monomial c * B_1 ... B_m is
//! read as the cochain L_c o mu o (D_{B_1} x ... x D_{B_m}) with the
//! Koszul rule for tensor products of maps. Because derivatives acting on
//! different slots graded-commute exactly like the symbols do, normal
//! forms, equality and all reordering signs come from plain polynomial
//! arithmetic; only composition needs an explicit Leibniz split.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{BigRational, One, Zero};

use crate::context::{GradedContext, Var};
use crate::error::{CoreError, Result};
use crate::monomial::Monomial;
use crate::poly::GradedPoly;

pub(crate) fn ext_context(base: &Arc<GradedContext>, arity: usize) -> Arc<GradedContext> {
    let mut vars: Vec<(String, i64)> = base
        .vars()
        .map(|v| (base.name(v).to_string(), base.degree(v)))
        .collect();
    for j in 1..=arity {
        for v in base.vars() {
            vars.push((format!("D{j}_{}", base.name(v)), -base.degree(v)));
        }
    }
    GradedContext::new(vars).expect("slot names are fresh")
}

/// One argument slot's derivative multi-index.
pub type SlotIndex = Vec<(Var, u32)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiDiffOp {
    base: Arc<GradedContext>,
    arity: usize,
    body: GradedPoly,
}

impl MultiDiffOp {
    pub fn zero(base: &Arc<GradedContext>, arity: usize) -> Self {
        let ext = ext_context(base, arity);
        MultiDiffOp {
            base: base.clone(),
            arity,
            body: GradedPoly::zero(&ext),
        }
    }

    /// The m-ary product map (a_1,...,a_m) -> a_1...a_m.
    pub fn product(base: &Arc<GradedContext>, arity: usize) -> Self {
        let mut op = Self::zero(base, arity);
        let ext = op.body.context().clone();
        op.body = GradedPoly::one(&ext);
        op
    }

    /// The derivation d/dv as an arity-1 operator.
    pub fn derivation(base: &Arc<GradedContext>, v: Var) -> Self {
        Self::from_terms(
            base,
            1,
            vec![(GradedPoly::one(base), vec![vec![(v, 1)]])],
        )
        .expect("well-formed term")
    }

    /// An arity-0 cochain is just an element of the algebra.
    pub fn from_element(base: &Arc<GradedContext>, c: &GradedPoly) -> Result<Self> {
        if c.context() != base {
            return Err(CoreError::ContextMismatch);
        }
        let mut op = Self::zero(base, 0);
        op.body = c.clone();
        Ok(op)
    }

    /// Builds sum of coeff * D[slot_1 | ... | slot_m] terms. Within a slot
    /// the listed variables compose left to right, outermost first.
    pub fn from_terms(
        base: &Arc<GradedContext>,
        arity: usize,
        terms: Vec<(GradedPoly, Vec<SlotIndex>)>,
    ) -> Result<Self> {
        let mut op = Self::zero(base, arity);
        let ext = op.body.context().clone();
        let nb = base.len();
        for (coeff, slots) in terms {
            if coeff.context() != base {
                return Err(CoreError::ContextMismatch);
            }
            if slots.len() != arity {
                return Err(CoreError::ArityMismatch {
                    expected: arity,
                    got: slots.len(),
                });
            }
            let mut term = embed_base(&coeff, &ext);
            for (j, slot) in slots.iter().enumerate() {
                for &(v, e) in slot {
                    if v.0 >= nb {
                        return Err(CoreError::UnknownVariable(format!("#{}", v.0)));
                    }
                    let sym = Var(nb * (j + 1) + v.0);
                    term = term.mul(&GradedPoly::var(&ext, sym).pow(e)?)?;
                }
            }
            op.body = op.body.add(&term)?;
        }
        Ok(op)
    }

    pub(crate) fn from_body(
        base: &Arc<GradedContext>,
        arity: usize,
        body: GradedPoly,
    ) -> Result<Self> {
        if body.context() != &ext_context(base, arity) {
            return Err(CoreError::ContextMismatch);
        }
        Ok(MultiDiffOp {
            base: base.clone(),
            arity,
            body,
        })
    }

    pub fn base(&self) -> &Arc<GradedContext> {
        &self.base
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn body(&self) -> &GradedPoly {
        &self.body
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero()
    }

    /// Internal degree of a homogeneous operator.
    pub fn degree(&self) -> Option<i64> {
        self.body.degree()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(MultiDiffOp {
            base: self.base.clone(),
            arity: self.arity,
            body: self.body.add(&other.body)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        MultiDiffOp {
            base: self.base.clone(),
            arity: self.arity,
            body: self.body.neg(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        MultiDiffOp {
            base: self.base.clone(),
            arity: self.arity,
            body: self.body.scale(c),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.base != other.base || self.arity != other.arity {
            return Err(CoreError::ContextMismatch);
        }
        Ok(())
    }

    /// Splits into internally homogeneous parts.
    pub fn by_degree(&self) -> Vec<(i64, MultiDiffOp)> {
        self.body
            .homogeneous_components()
            .into_iter()
            .map(|(d, body)| {
                (
                    d,
                    MultiDiffOp {
                        base: self.base.clone(),
                        arity: self.arity,
                        body,
                    },
                )
            })
            .collect()
    }

    fn split_monomial(&self, m: &Monomial) -> (Monomial, Vec<Vec<u32>>) {
        let nb = self.base.len();
        let exps = m.exps();
        let cmono = Monomial::from_exps(exps[..nb].to_vec());
        let slots = (0..self.arity)
            .map(|j| exps[nb * (j + 1)..nb * (j + 2)].to_vec())
            .collect();
        (cmono, slots)
    }

    pub fn terms_split(&self) -> Vec<(BigRational, Monomial, Vec<Vec<u32>>)> {
        self.body
            .terms()
            .map(|(m, q)| {
                let (c, s) = self.split_monomial(m);
                (q.clone(), c, s)
            })
            .collect()
    }

    /// Evaluates on arguments over the base context.
    pub fn apply(&self, args: &[GradedPoly]) -> Result<GradedPoly> {
        if args.len() != self.arity {
            return Err(CoreError::ArityMismatch {
                expected: self.arity,
                got: args.len(),
            });
        }
        for a in args {
            if a.context() != &self.base {
                return Err(CoreError::ContextMismatch);
            }
        }
        let mut out = GradedPoly::zero(&self.base);
        // Split each argument by parity so Koszul signs are definite.
        let mut parts: Vec<Vec<(bool, GradedPoly)>> = Vec::new();
        for a in args {
            let (even, odd) = a.parity_components();
            let mut v = Vec::new();
            if !even.is_zero() {
                v.push((false, even));
            }
            if !odd.is_zero() {
                v.push((true, odd));
            }
            if v.is_empty() {
                return Ok(out); // a zero argument kills everything
            }
            parts.push(v);
        }
        let mut combo = vec![0usize; self.arity];
        loop {
            let parities: Vec<bool> = combo
                .iter()
                .enumerate()
                .map(|(j, &k)| parts[j][k].0)
                .collect();
            for (m, q) in self.body.terms() {
                let (cmono, slots) = self.split_monomial(m);
                let mut sign = false;
                let mut prefix = false;
                for (j, slot) in slots.iter().enumerate() {
                    let dpar = slot
                        .iter()
                        .enumerate()
                        .map(|(i, &e)| e as i64 * self.base.degree(Var(i)))
                        .sum::<i64>()
                        .rem_euclid(2)
                        == 1;
                    if dpar && prefix {
                        sign = !sign;
                    }
                    if parities[j] {
                        prefix = !prefix;
                    }
                }
                let mut acc = GradedPoly::from_term(&self.base, cmono, q.clone());
                for (j, slot) in slots.iter().enumerate() {
                    if acc.is_zero() {
                        break;
                    }
                    let d = apply_multi_index(&parts[j][combo[j]].1, slot)?;
                    acc = acc.mul(&d)?;
                }
                if sign {
                    acc = acc.neg();
                }
                out = out.add(&acc)?;
            }
            // next combination
            let mut j = 0;
            loop {
                if j == self.arity {
                    return Ok(out);
                }
                combo[j] += 1;
                if combo[j] < parts[j].len() {
                    break;
                }
                combo[j] = 0;
                j += 1;
            }
            if self.arity == 0 {
                return Ok(out);
            }
        }
    }

    /// Hochschild differential, built from the three-block formula.
    pub fn hochschild_b(&self) -> Result<Self> {
        let m = self.arity;
        let nb = self.base.len();
        let out_ext = ext_context(&self.base, m + 1);
        let mut acc = GradedPoly::zero(&out_ext);

        // Block shifting the slots up by one (the a_1 * phi(...) block; the
        // Koszul prefactor is absorbed by the normal form).
        for (mono, q) in self.body.terms() {
            let exps = mono.exps();
            let mut nexps = vec![0u32; out_ext.len()];
            nexps[..nb].copy_from_slice(&exps[..nb]);
            nexps[2 * nb..(m + 2) * nb].copy_from_slice(&exps[nb..(m + 1) * nb]);
            acc.add_term(Monomial::from_exps(nexps), q.clone());
        }

        // Merge blocks: slot j takes the product of arguments j, j+1.
        for j in 1..=m {
            let mut images: Vec<GradedPoly> = Vec::with_capacity((m + 1) * nb);
            for v in 0..nb {
                images.push(GradedPoly::var(&out_ext, Var(v)));
            }
            for jj in 1..=m {
                for v in 0..nb {
                    let tgt = if jj < j {
                        GradedPoly::var(&out_ext, Var(jj * nb + v))
                    } else if jj == j {
                        GradedPoly::var(&out_ext, Var(jj * nb + v))
                            .add(&GradedPoly::var(&out_ext, Var((jj + 1) * nb + v)))
                            .expect("same context")
                    } else {
                        GradedPoly::var(&out_ext, Var((jj + 1) * nb + v))
                    };
                    images.push(tgt);
                }
            }
            let merged = self.body.substitute(&out_ext, &images)?;
            let merged = if j % 2 == 1 { merged.neg() } else { merged };
            acc = acc.add(&merged)?;
        }

        // Appended slot: phi(a_1,...,a_m) * a_{m+1}.
        for (mono, q) in self.body.terms() {
            let exps = mono.exps();
            let mut nexps = vec![0u32; out_ext.len()];
            nexps[..(m + 1) * nb].copy_from_slice(exps);
            let mut c = q.clone();
            if m % 2 == 0 {
                // (-1)^{m+1}
                c = -c;
            }
            acc.add_term(Monomial::from_exps(nexps), c);
        }

        Ok(MultiDiffOp {
            base: self.base.clone(),
            arity: m + 1,
            body: acc,
        })
    }

    /// phi o (1^l x psi x 1^{m1-1-l}) as a multidifferential operator.
    pub fn compose_into_slot(&self, psi: &Self, l: usize) -> Result<Self> {
        if self.base != psi.base {
            return Err(CoreError::ContextMismatch);
        }
        let m1 = self.arity;
        let m2 = psi.arity;
        if l >= m1 {
            return Err(CoreError::ArityMismatch {
                expected: m1,
                got: l,
            });
        }
        let n = m1 + m2 - 1;
        let nb = self.base.len();

        // Working context: base | slots 1..l | F0 | chi_e chi_o | slots l+1..n.
        let mut vars: Vec<(String, i64)> = self
            .base
            .vars()
            .map(|v| (self.base.name(v).to_string(), self.base.degree(v)))
            .collect();
        for j in 1..=l {
            for v in self.base.vars() {
                vars.push((format!("D{j}_{}", self.base.name(v)), -self.base.degree(v)));
            }
        }
        for v in self.base.vars() {
            vars.push((format!("F0_{}", self.base.name(v)), -self.base.degree(v)));
        }
        vars.push(("CHI_E".into(), 0));
        vars.push(("CHI_O".into(), 1));
        for j in l + 1..=n {
            for v in self.base.vars() {
                vars.push((format!("D{j}_{}", self.base.name(v)), -self.base.degree(v)));
            }
        }
        let big = GradedContext::new(vars).expect("fresh names");
        let f0_start = nb * (1 + l);
        let chi_e = f0_start + nb;
        let chi_o = chi_e + 1;
        let hi_slot = |j: usize, v: usize| -> usize {
            // composite slot j in 1..=n with j >= l+1
            chi_o + 1 + (j - l - 1) * nb + v
        };

        let out_ext = ext_context(&self.base, n);
        let mut out = GradedPoly::zero(&out_ext);

        let phi_terms = self.terms_split();
        let psi_terms = psi.terms_split();

        for (qphi, cmono, slots) in &phi_terms {
            // phi-tilde: head monomial, Leibniz split of slot l+1, tail.
            let mut head = vec![0u32; big.len()];
            head[..nb].copy_from_slice(cmono.exps());
            for (t, slot) in slots.iter().enumerate().take(l) {
                head[nb * (1 + t)..nb * (2 + t)].copy_from_slice(slot);
            }
            let head = GradedPoly::from_term(
                &big,
                Monomial::from_exps(head),
                BigRational::one(),
            );

            let mut split = GradedPoly::one(&big);
            for (v, &e) in slots[l].iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut sum = GradedPoly::var(&big, Var(f0_start + v));
                for j in 0..m2 {
                    sum = sum.add(&GradedPoly::var(&big, Var(hi_slot(l + 1 + j, v))))?;
                }
                split = split.mul(&sum.pow(e)?)?;
            }

            let mut tail = vec![0u32; big.len()];
            for (t, slot) in slots.iter().enumerate().skip(l + 1) {
                // phi slot t+1 (1-based) lands at composite slot t + m2.
                for (v, &e) in slot.iter().enumerate() {
                    tail[hi_slot(t + m2, v)] = e;
                }
            }
            let tail = GradedPoly::from_term(
                &big,
                Monomial::from_exps(tail),
                BigRational::one(),
            );

            let phi_tilde = head.mul(&split)?.mul(&tail)?;

            for (qpsi, cmono_p, slots_p) in &psi_terms {
                let mut psim = vec![0u32; big.len()];
                if cmono_p.parity(&self.base) {
                    psim[chi_o] = 1;
                } else {
                    psim[chi_e] = 1;
                }
                for (t, slot) in slots_p.iter().enumerate() {
                    for (v, &e) in slot.iter().enumerate() {
                        psim[hi_slot(l + 1 + t, v)] = e;
                    }
                }
                let psi_tilde = GradedPoly::from_term(
                    &big,
                    Monomial::from_exps(psim),
                    BigRational::one(),
                );

                let x = phi_tilde.mul(&psi_tilde)?;
                let cpoly = GradedPoly::from_term(
                    &self.base,
                    cmono_p.clone(),
                    BigRational::one(),
                );

                for (mx, qx) in x.terms() {
                    let exps = mx.exps();
                    // Resolve the F0 block on psi's coefficient.
                    let kappa0 = &exps[f0_start..f0_start + nb];
                    let cder = apply_multi_index_exps(&cpoly, kappa0)?;
                    if cder.is_zero() {
                        continue;
                    }
                    // Head: base part and slots 1..l.
                    let mut hexps = vec![0u32; out_ext.len()];
                    hexps[..nb].copy_from_slice(&exps[..nb]);
                    for t in 0..l {
                        hexps[nb * (1 + t)..nb * (2 + t)]
                            .copy_from_slice(&exps[nb * (1 + t)..nb * (2 + t)]);
                    }
                    // Tail: composite slots l+1..n.
                    let mut texps = vec![0u32; out_ext.len()];
                    for j in l + 1..=n {
                        for v in 0..nb {
                            texps[nb * j + v] = exps[hi_slot(j, v)];
                        }
                    }
                    let term = GradedPoly::from_term(
                        &out_ext,
                        Monomial::from_exps(hexps),
                        qphi * qpsi * qx,
                    )
                    .mul(&embed_base(&cder, &out_ext))?
                    .mul(&GradedPoly::from_term(
                        &out_ext,
                        Monomial::from_exps(texps),
                        BigRational::one(),
                    ))?;
                    out = out.add(&term)?;
                }
            }
        }

        Ok(MultiDiffOp {
            base: self.base.clone(),
            arity: n,
            body: out,
        })
    }

    /// Gerstenhaber product with the slotwise signs
    /// (-1)^{(|psi|+m2-1)(m1-1)} sum_l (-1)^{l(m2-1)} phi o (1^l x psi x 1).
    pub fn gerstenhaber_product(&self, psi: &Self) -> Result<Self> {
        if self.base != psi.base {
            return Err(CoreError::ContextMismatch);
        }
        let m1 = self.arity;
        let m2 = psi.arity;
        let mut out = Self::zero(&self.base, m1 + m2 - 1);
        if m1 == 0 {
            return Ok(out);
        }
        for (p2, psi_h) in psi.by_degree() {
            let pre = ((p2 + m2 as i64 - 1) * (m1 as i64 - 1)).rem_euclid(2) == 1;
            for l in 0..m1 {
                let slot_sign = (l * (m2 + 1)) % 2 == 1; // l(m2-1) mod 2
                let mut piece = self.compose_into_slot(&psi_h, l)?;
                if pre ^ slot_sign {
                    piece = piece.neg();
                }
                out = out.add(&piece)?;
            }
        }
        Ok(out)
    }

    /// [phi, psi]_G = phi.psi - (-1)^{(|phi|+m1-1)(|psi|+m2-1)} psi.phi.
    pub fn gerstenhaber_bracket(&self, psi: &Self) -> Result<Self> {
        if self.base != psi.base {
            return Err(CoreError::ContextMismatch);
        }
        let m1 = self.arity as i64;
        let m2 = psi.arity as i64;
        let mut out = Self::zero(&self.base, self.arity + psi.arity - 1);
        for (p1, phi_h) in self.by_degree() {
            for (p2, psi_h) in psi.by_degree() {
                let fwd = phi_h.gerstenhaber_product(&psi_h)?;
                let bwd = psi_h.gerstenhaber_product(&phi_h)?;
                let sign = ((p1 + m1 - 1) * (p2 + m2 - 1)).rem_euclid(2) == 1;
                let piece = if sign { fwd.add(&bwd)? } else { fwd.sub(&bwd)? };
                out = out.add(&piece)?;
            }
        }
        Ok(out)
    }

    /// Cup product mu o (phi x psi).
    pub fn cup(&self, psi: &Self) -> Result<Self> {
        if self.base != psi.base {
            return Err(CoreError::ContextMismatch);
        }
        let m1 = self.arity;
        let m2 = psi.arity;
        let n = m1 + m2;
        let nb = self.base.len();
        let out_ext = ext_context(&self.base, n);
        let mut out = GradedPoly::zero(&out_ext);
        for (q1, c1, s1) in self.terms_split() {
            let mut head = vec![0u32; out_ext.len()];
            head[..nb].copy_from_slice(c1.exps());
            for (t, slot) in s1.iter().enumerate() {
                head[nb * (1 + t)..nb * (2 + t)].copy_from_slice(slot);
            }
            let head = GradedPoly::from_term(&out_ext, Monomial::from_exps(head), q1);
            for (q2, c2, s2) in psi.terms_split() {
                let c2poly = embed_base(
                    &GradedPoly::from_term(&self.base, c2.clone(), q2),
                    &out_ext,
                );
                let mut texps = vec![0u32; out_ext.len()];
                for (t, slot) in s2.iter().enumerate() {
                    texps[nb * (1 + m1 + t)..nb * (2 + m1 + t)].copy_from_slice(slot);
                }
                let tail = GradedPoly::from_term(
                    &out_ext,
                    Monomial::from_exps(texps),
                    BigRational::one(),
                );
                out = out.add(&head.mul(&c2poly)?.mul(&tail)?)?;
            }
        }
        Ok(MultiDiffOp {
            base: self.base.clone(),
            arity: n,
            body: out,
        })
    }
}

/// Decomposes a truncated Hochschild cocycle as hkr(gamma) + b(eta) by a
/// dense rational solve over the finite-dimensional truncated term space.
/// Failure means the truncation was too small for eta, not that no
/// decomposition exists.
pub fn truncated_decompose(
    phi: &MultiDiffOp,
    max_poly_degree: u32,
) -> Result<(crate::multivector::MultiVector, MultiDiffOp)> {
    use crate::monomial::enumerate_monomials;
    use crate::multivector::MultiVector;

    let base = phi.base().clone();
    let m = phi.arity();
    let dctx = crate::context::DoubledContext::new(
        base.vars()
            .map(|v| (base.name(v).to_string(), base.degree(v)))
            .collect::<Vec<_>>(),
    )?;

    if !phi.hochschild_b()?.is_zero() {
        return Err(CoreError::NotCocycle);
    }
    if m == 0 {
        let gamma = MultiVector::new(&dctx, embed_base_doubled(phi.body(), &dctx))?;
        return Ok((gamma, MultiDiffOp::zero(&base, 0)));
    }

    let coeff_deg = max_poly_degree.max(
        phi.terms_split()
            .iter()
            .map(|(_, c, _)| c.total_exponent())
            .max()
            .unwrap_or(0),
    );
    // Merging slots concentrates derivatives, so eta may need the full
    // total order of phi in a single slot.
    let max_order = phi
        .terms_split()
        .iter()
        .map(|(_, _, slots)| slots.iter().flatten().sum::<u32>())
        .max()
        .unwrap_or(1)
        .max(1);

    let cmonos = enumerate_monomials(&base, coeff_deg);
    let slot_indices: Vec<Vec<u32>> = enumerate_monomials(&base, max_order)
        .into_iter()
        .map(|mo| mo.exps().to_vec())
        .collect();

    // gamma columns: coefficient monomial x conjugate block of size m.
    let full = dctx.full().clone();
    let nb = base.len();
    let conj_blocks: Vec<Vec<u32>> = {
        let conj_ctx = GradedContext::new(
            dctx.conjugate_vars()
                .map(|v| (full.name(v).to_string(), full.degree(v)))
                .collect::<Vec<_>>(),
        )?;
        enumerate_monomials(&conj_ctx, m as u32)
            .into_iter()
            .filter(|mo| mo.total_exponent() == m as u32)
            .map(|mo| mo.exps().to_vec())
            .collect()
    };
    let mut gamma_basis: Vec<GradedPoly> = Vec::new();
    for cm in &cmonos {
        for cb in &conj_blocks {
            let mut exps = vec![0u32; full.len()];
            exps[..nb].copy_from_slice(cm.exps());
            exps[nb..].copy_from_slice(cb);
            let mut p = GradedPoly::zero(&full);
            p.add_term(Monomial::from_exps(exps), BigRational::one());
            if !p.is_zero() {
                gamma_basis.push(p);
            }
        }
    }

    // eta columns: arity m-1 operator terms.
    let mut eta_basis: Vec<MultiDiffOp> = Vec::new();
    let mut slot_combo = vec![0usize; m - 1];
    loop {
        for cm in &cmonos {
            let slots: Vec<SlotIndex> = slot_combo
                .iter()
                .map(|&k| {
                    slot_indices[k]
                        .iter()
                        .enumerate()
                        .filter(|(_, &e)| e > 0)
                        .map(|(i, &e)| (Var(i), e))
                        .collect()
                })
                .collect();
            if let Ok(op) = MultiDiffOp::from_terms(
                &base,
                m - 1,
                vec![(
                    GradedPoly::from_term(&base, cm.clone(), BigRational::one()),
                    slots,
                )],
            ) {
                if !op.is_zero() {
                    eta_basis.push(op);
                }
            }
        }
        let mut j = 0;
        loop {
            if j == m - 1 {
                break;
            }
            slot_combo[j] += 1;
            if slot_combo[j] < slot_indices.len() {
                break;
            }
            slot_combo[j] = 0;
            j += 1;
        }
        if m == 1 || slot_combo.iter().all(|&k| k == 0) {
            break;
        }
    }

    // Assemble columns in the arity-m operator term space.
    let mut row_index: BTreeMap<Monomial, usize> = BTreeMap::new();
    let mut columns: Vec<Vec<(usize, BigRational)>> = Vec::new();
    let register = |op_body: &GradedPoly,
                        row_index: &mut BTreeMap<Monomial, usize>|
     -> Vec<(usize, BigRational)> {
        let mut col = Vec::new();
        for (mo, q) in op_body.terms() {
            let next = row_index.len();
            let idx = *row_index.entry(mo.clone()).or_insert(next);
            col.push((idx, q.clone()));
        }
        col
    };

    let mut gamma_ops: Vec<MultiDiffOp> = Vec::new();
    for g in &gamma_basis {
        let mvec = MultiVector::new(&dctx, g.clone())?;
        let op = crate::hkr::hkr(&mvec)?;
        gamma_ops.push(op);
    }
    for op in &gamma_ops {
        let col = register(op.body(), &mut row_index);
        columns.push(col);
    }
    let mut eta_ops: Vec<MultiDiffOp> = Vec::new();
    for e in &eta_basis {
        eta_ops.push(e.hochschild_b()?);
    }
    for op in &eta_ops {
        let col = register(op.body(), &mut row_index);
        columns.push(col);
    }
    let phi_col = register(phi.body(), &mut row_index);

    let rows = row_index.len();
    let cols = columns.len();
    let mut a = vec![vec![BigRational::zero(); cols]; rows];
    for (c, col) in columns.iter().enumerate() {
        for (r, q) in col {
            a[*r][c] = q.clone();
        }
    }
    let mut rhs = vec![BigRational::zero(); rows];
    for (r, q) in &phi_col {
        rhs[*r] = q.clone();
    }

    let x = crate::linalg::solve(&a, &rhs).ok_or(CoreError::TruncationTooSmall)?;

    let mut gamma = GradedPoly::zero(&full);
    for (k, g) in gamma_basis.iter().enumerate() {
        if !x[k].is_zero() {
            gamma = gamma.add(&g.scale(&x[k]))?;
        }
    }
    let mut eta = MultiDiffOp::zero(&base, m - 1);
    for (k, e) in eta_basis.iter().enumerate() {
        let c = &x[gamma_basis.len() + k];
        if !c.is_zero() {
            eta = eta.add(&e.scale(c))?;
        }
    }
    Ok((MultiVector::new(&dctx, gamma)?, eta))
}

fn embed_base_doubled(
    p: &GradedPoly,
    dctx: &Arc<crate::context::DoubledContext>,
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

/// Embeds a base-context polynomial into an extended context whose first
/// variables are the base variables.
fn embed_base(p: &GradedPoly, ext: &Arc<GradedContext>) -> GradedPoly {
    let nb = p.context().len();
    let mut out = GradedPoly::zero(ext);
    for (m, c) in p.terms() {
        let mut exps = vec![0u32; ext.len()];
        exps[..nb].copy_from_slice(m.exps());
        out.add_term(Monomial::from_exps(exps), c.clone());
    }
    out
}

/// Applies the composition of left partials encoded by a slot multi-index,
/// outermost variable first in declaration order.
fn apply_multi_index(p: &GradedPoly, exps: &[u32]) -> Result<GradedPoly> {
    let mut acc = p.clone();
    for i in (0..exps.len()).rev() {
        for _ in 0..exps[i] {
            if acc.is_zero() {
                return Ok(acc);
            }
            acc = acc.left_partial(Var(i))?;
        }
    }
    Ok(acc)
}

fn apply_multi_index_exps(p: &GradedPoly, exps: &[u32]) -> Result<GradedPoly> {
    apply_multi_index(p, exps)
}

impl fmt::Display for MultiDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // Group terms by derivative tuple.
        let mut groups: BTreeMap<Vec<Vec<u32>>, GradedPoly> = BTreeMap::new();
        for (q, c, slots) in self.terms_split() {
            groups
                .entry(slots)
                .or_insert_with(|| GradedPoly::zero(&self.base))
                .add_term(c, q);
        }
        let mut first = true;
        for (slots, coeff) in groups {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if coeff.n_terms() == 1 && !coeff.is_zero() {
                write!(f, "{coeff}")?;
            } else {
                write!(f, "({coeff})")?;
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
                        write!(f, "{}", self.base.name(Var(v)))?;
                        firstv = false;
                    }
                }
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}
