//! The matrix-coefficient Hopf `*`-algebra at finite truncation.
//!
//! An element is a finite sum `Σ_λ Σ_{jk} (A_λ)_{jk} a^{λ;q}_{f_j,f_k}` over
//! the orthonormal module bases, stored as one matrix per weight; evaluation
//! against `ω` is `Σ_λ Tr(A_λᵀ π_λ^q(ω))`. Products go through the q-CG
//! change of basis, adjoints through the contragredient intertwiner, and the
//! Haar state is the projection onto the trivial isotypic component — the
//! orthogonality relations are then a theorem that the tests verify.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::cartan::Weight;
use crate::linalg::{self, kron, max_abs, rc, CMat};
use crate::uqg::IrrepModule;
use crate::{Context, Error, Result};

/// Element of the coefficient algebra at one deformation parameter.
#[derive(Debug, Clone)]
pub struct CoeffElement {
    pub q: f64,
    pub lambda_max: u32,
    pub terms: BTreeMap<Weight, CMat>,
}

impl CoeffElement {
    pub fn zero(q: f64, lambda_max: u32) -> Self {
        CoeffElement {
            q,
            lambda_max,
            terms: BTreeMap::new(),
        }
    }

    /// The unit: the trivial-weight term with matrix `[1]`.
    pub fn unit(rank: usize, q: f64, lambda_max: u32) -> Self {
        let mut e = Self::zero(q, lambda_max);
        e.terms
            .insert(Weight::zero(rank), CMat::from_element(1, 1, rc(1.0)));
        e
    }

    /// Basis coefficient `a^{λ;q}_{f_j, f_k}`.
    pub fn basis(q: f64, lambda_max: u32, lambda: &Weight, j: usize, k: usize, dim: usize) -> Self {
        let mut m = CMat::zeros(dim, dim);
        m[(j, k)] = rc(1.0);
        let mut e = Self::zero(q, lambda_max);
        e.terms.insert(lambda.clone(), m);
        e
    }

    pub fn add_scaled(&mut self, other: &CoeffElement, c: Complex64) {
        for (lam, m) in &other.terms {
            let entry = self
                .terms
                .entry(lam.clone())
                .or_insert_with(|| CMat::zeros(m.nrows(), m.ncols()));
            *entry += m * c;
        }
    }

    /// Evaluate against `ω`, given its per-λ representation matrices.
    pub fn evaluate(&self, pi: &BTreeMap<Weight, CMat>) -> Complex64 {
        let mut acc = rc(0.0);
        for (lam, a) in &self.terms {
            if let Some(p) = pi.get(lam) {
                acc += (a.transpose() * p).trace();
            }
        }
        acc
    }

    pub fn max_entry(&self) -> f64 {
        self.terms.values().map(max_abs).fold(0.0, f64::max)
    }
}

/// Product `(ab)(ω) = (a ⊗ b)(Δ̂_q ω)`, realized per component by conjugating
/// `A_λ ⊗ B_ν` with the CG isometries. Components escaping the truncation
/// are an error unless `allow_truncation` is set (they are then dropped —
/// harmless for any quantity that only reads surviving terms).
pub fn coeff_product(
    a: &CoeffElement,
    b: &CoeffElement,
    ctx: &Context,
    allow_truncation: bool,
) -> Result<CoeffElement> {
    if a.q != b.q {
        return Err(Error::ModuleMismatch(
            "product of elements at different q".into(),
        ));
    }
    let lambda_max = a.lambda_max.min(b.lambda_max);
    let mut out = CoeffElement::zero(a.q, lambda_max);
    for (lam, am) in &a.terms {
        for (nu, bm) in &b.terms {
            let cg = ctx.cg(a.q, lam, nu)?;
            let big = kron(am, bm);
            for comp in &cg.components {
                if !ctx.cd.in_truncation(&comp.eta, lambda_max) {
                    if allow_truncation {
                        continue;
                    }
                    return Err(Error::TruncationOverflow(comp.eta.0.clone()));
                }
                let w = &comp.isometry;
                let contrib = w.transpose() * &big * w.map(|z| z.conj());
                let entry = out
                    .terms
                    .entry(comp.eta.clone())
                    .or_insert_with(|| CMat::zeros(w.ncols(), w.ncols()));
                *entry += contrib;
            }
        }
    }
    Ok(out)
}

/// Intertwiner `U` with `π_λ(Ŝ(X))ᵀ U = U π_{λ̄}(X)`, identifying the
/// contragredient of `V_λ` with the module of highest weight `λ̄ = −w₀λ`.
///
/// Any nonzero solution yields the same adjoint matrices (the construction
/// is scale and phase invariant); Schur's lemma makes the solution space
/// one-dimensional.
pub fn conjugation_intertwiner(ctx: &Context, q: f64, lambda: &Weight) -> Result<CMat> {
    let m = ctx.module(q, lambda)?;
    let lam_bar = ctx.cd.conjugate_weight(lambda);
    let mbar = ctx.module(q, &lam_bar)?;
    let d = m.dim;
    let rank = ctx.cd.rank;

    // antipode on generators: Ŝ(E) = −K⁻¹E, Ŝ(F) = −FK, Ŝ(K) = K⁻¹
    let mut gens: Vec<(CMat, CMat)> = Vec::new(); // (X^∨, π_λ̄(X))
    for i in 0..rank {
        let k_inv = invert_diag(&m.k_mat[i]);
        let s_e = -(&k_inv * &m.e_mat[i]);
        let s_f = -(&m.f_mat[i] * &m.k_mat[i]);
        gens.push((s_e.transpose(), mbar.e_mat[i].clone()));
        gens.push((s_f.transpose(), mbar.f_mat[i].clone()));
        gens.push((k_inv.transpose(), mbar.k_mat[i].clone()));
    }

    // stack (I ⊗ X^∨ − π_λ̄(X)ᵀ ⊗ I) vec(U) = 0, column-major vec
    let eye = linalg::identity(d);
    let stacked: Vec<CMat> = gens
        .iter()
        .map(|(xv, xb)| kron(&eye, xv) - kron(&xb.transpose(), &eye))
        .collect();
    let big = linalg::vstack(&stacked);
    let kernel = linalg::kernel_onb(&big, 1e-7);
    if kernel.len() != 1 {
        return Err(Error::MultiplicityDefect(lambda.0.clone()));
    }
    let mut u = CMat::zeros(d, d);
    for c in 0..d {
        for r in 0..d {
            u[(r, c)] = kernel[0][c * d + r];
        }
    }
    Ok(u)
}

fn invert_diag(k: &CMat) -> CMat {
    CMat::from_fn(k.nrows(), k.ncols(), |r, c| {
        if r == c {
            rc(1.0) / k[(r, c)]
        } else {
            rc(0.0)
        }
    })
}

/// Adjoint `a*(ω) = conj(a(Ŝ_q(ω)*))`, landing on conjugate weights.
pub fn coeff_adjoint(a: &CoeffElement, ctx: &Context) -> Result<CoeffElement> {
    let mut out = CoeffElement::zero(a.q, a.lambda_max);
    for (lam, am) in &a.terms {
        let lam_bar = ctx.cd.conjugate_weight(lam);
        if !ctx.cd.in_truncation(&lam_bar, a.lambda_max) {
            return Err(Error::TruncationOverflow(lam_bar.0.clone()));
        }
        let u = ctx.conjugation(a.q, lam)?;
        let u_inv = u
            .as_ref()
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::MultiplicityDefect(lam.0.clone()))?;
        let b = u.transpose() * am.map(|z| z.conj()) * u_inv.transpose();
        let entry = out
            .terms
            .entry(lam_bar)
            .or_insert_with(|| CMat::zeros(b.nrows(), b.ncols()));
        *entry += b;
    }
    Ok(out)
}

/// The Haar state: the scalar of the trivial-weight term.
pub fn haar_state(a: &CoeffElement, rank: usize) -> Complex64 {
    a.terms
        .get(&Weight::zero(rank))
        .map(|m| m[(0, 0)])
        .unwrap_or_else(|| rc(0.0))
}

/// GNS inner product `⟨a, b⟩ = h(b* a)`, computed through the adjoint and
/// the product. Components escaping the truncation cannot contribute to the
/// trivial term, so the result is exact.
pub fn gns_inner(a: &CoeffElement, b: &CoeffElement, ctx: &Context) -> Result<Complex64> {
    let b_star = coeff_adjoint(b, ctx)?;
    let prod = coeff_product(&b_star, a, ctx, true)?;
    Ok(haar_state(&prod, ctx.cd.rank))
}

/// Closed-form right side of the orthogonality relations for basis
/// coefficients: `⟨a_{jk}, a_{j'k'}⟩ = δ_{jj'} δ_{kk'} q^{(2ρ, wt_j)} / dim_q`.
pub fn orthogonality_rhs(
    ctx: &Context,
    m: &IrrepModule,
    (j, k): (usize, usize),
    (jp, kp): (usize, usize),
) -> Complex64 {
    if j != jp || k != kp {
        return rc(0.0);
    }
    let two_rho = Weight(vec![2; ctx.cd.rank]);
    let exp = ctx.cd.weight_form(&two_rho, &m.weights[j]).unwrap();
    let dim_q = ctx.cd.q_weyl_dim(m.qp, &m.highest_weight).unwrap();
    rc(m.qp.pow_rational(exp) / dim_q)
}

/// Per-λ Haar data: quantum dimension, the Woronowicz character block, and
/// the positive element `d` implementing the GNS normalization.
#[derive(Debug, Clone)]
pub struct HaarData {
    pub q: f64,
    pub entries: BTreeMap<Weight, HaarEntry>,
}

#[derive(Debug, Clone)]
pub struct HaarEntry {
    pub dim: usize,
    pub dim_q: f64,
    pub k_2rho: CMat,
    pub k_rho: CMat,
    /// `π_λ(d) = (dim/dim_q)^{1/2} π_λ(K_ρ)`, positive definite.
    pub d_mat: CMat,
}

impl HaarData {
    pub fn new(ctx: &Context, q: f64, lambdas: &[Weight]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let rho = ctx.cd.rho();
        let two_rho = Weight(vec![2; ctx.cd.rank]);
        for lam in lambdas {
            let m = ctx.module(q, lam)?;
            let k_2rho = m.k_power(&two_rho);
            let k_rho = m.k_power(&rho);
            let dim_q = k_2rho.trace().re;
            let d_mat = &k_rho * rc((m.dim as f64 / dim_q).sqrt());
            entries.insert(
                lam.clone(),
                HaarEntry {
                    dim: m.dim,
                    dim_q,
                    k_2rho,
                    k_rho,
                    d_mat,
                },
            );
        }
        Ok(HaarData { q, entries })
    }

    pub fn entry(&self, lam: &Weight) -> Result<&HaarEntry> {
        self.entries
            .get(lam)
            .ok_or_else(|| Error::MissingBlock(lam.0.clone(), vec![]))
    }
}

/// Verify `Ŝ²(X) = K_{−2ρ} X K_{2ρ}` on generators; returns the worst
/// residual. `Ŝ` follows the conventions ledger
/// (`Ŝ(E) = −K⁻¹E`, `Ŝ(F) = −FK`, `Ŝ(K) = K⁻¹`).
pub fn antipode_square_check(m: &IrrepModule) -> f64 {
    let two_rho = Weight(vec![2; m.cd.rank]);
    let k2 = m.k_power(&two_rho);
    let k2_inv = invert_diag(&k2);
    let mut worst = 0.0f64;
    for i in 0..m.cd.rank {
        let k_inv = invert_diag(&m.k_mat[i]);
        // Ŝ²(E) = Ŝ(−K⁻¹E) = K⁻¹EK, Ŝ²(F) = K⁻¹FK, Ŝ²(K) = K
        let s2_e = &k_inv * &m.e_mat[i] * &m.k_mat[i];
        let s2_f = &k_inv * &m.f_mat[i] * &m.k_mat[i];
        let s2_k = m.k_mat[i].clone();
        for (x, s2x) in [
            (&m.e_mat[i], s2_e),
            (&m.f_mat[i], s2_f),
            (&m.k_mat[i], s2_k),
        ] {
            let rhs = &k2_inv * x * &k2;
            let scale = f64::max(1.0, max_abs(&rhs));
            worst = worst.max(max_abs(&(s2x - rhs)) / scale);
        }
    }
    worst
}

/// The section `q ↦ a φ^q` of a classical coefficient with matrix `A` on
/// block λ: at parameter `q` the element has matrix `u_λ^{q,T} A conj(u_λ^q)`.
pub fn classical_section(
    fam: &crate::iso_family::IsomorphismFamily,
    qi: usize,
    lambda: &Weight,
    a_mat: &CMat,
    lambda_max: u32,
) -> Result<CoeffElement> {
    let u = fam.unitary(qi, lambda)?;
    let mut e = CoeffElement::zero(fam.q_grid[qi], lambda_max);
    e.terms
        .insert(lambda.clone(), u.transpose() * a_mat * u.map(|z| z.conj()));
    Ok(e)
}

/// Expansion coefficients of the adjoint section over the pushed classical
/// conjugate-representation basis: the matrix `f(q)` with
/// `(a φ^q)* = Σ_{jk} f(q)_{jk} (a^{λ̄}_{jk} φ^q)`.
pub fn adjoint_section_expansion(
    ctx: &Context,
    fam: &crate::iso_family::IsomorphismFamily,
    qi: usize,
    lambda: &Weight,
    a_mat: &CMat,
    lambda_max: u32,
) -> Result<CMat> {
    let section = classical_section(fam, qi, lambda, a_mat, lambda_max)?;
    let star = coeff_adjoint(&section, ctx)?;
    let lam_bar = ctx.cd.conjugate_weight(lambda);
    let b = star
        .terms
        .get(&lam_bar)
        .ok_or_else(|| Error::MissingBlock(lam_bar.0.clone(), vec![]))?;
    let u_bar = fam.unitary(qi, &lam_bar)?;
    Ok(u_bar.map(|z| z.conj()) * b * u_bar.transpose())
}
