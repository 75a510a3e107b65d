//! Truncated GNS spaces, regular representations, the comparison unitary
//! `W_q`, the classical and deformed Dirac operators, spectra, and the
//! commutator analysis.
//!
//! The GNS space is `⊕_{λ≤Λ} V̄_λ ⊗ V_λ` (optionally tensored by the spinor
//! space), with the coefficient `a^{λ;q}_{ξ,ζ}` embedded as
//! `dim_q^{-1/2} (K_ρ ξ)‾ ⊗ ζ`. Operators are stored blockwise; products by
//! coefficient elements record the interior set — the column blocks whose
//! products cannot leak past the truncation — and norms are only ever taken
//! over that set, so no spurious boundary contributions are manufactured.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;

use crate::cartan::Weight;
use crate::funalg::{self, CoeffElement, HaarData};
use crate::iso_family::IsomorphismFamily;
use crate::linalg::{self, dagger, kron, max_abs, rc, CMat, CVec};
use crate::spin::CliffordData;
use crate::twist::{self, TwistField};
use crate::uqg::IrrepModule;
use crate::{Context, Error, Result};

/// The space `⊕_{λ≤Λ} V̄_λ ⊗ V_λ (⊗ S)` with fixed block order.
#[derive(Debug, Clone)]
pub struct TruncatedGNS {
    pub q: f64,
    pub lambda_max: u32,
    pub blocks: Vec<Weight>,
    pub modules: Vec<Arc<IrrepModule>>,
    pub dim_q: Vec<f64>,
    pub with_spin: bool,
    pub dim_s: usize,
}

impl TruncatedGNS {
    pub fn new(ctx: &Context, q: f64, lambda_max: u32, spin: Option<&CliffordData>) -> Result<Self> {
        let blocks = ctx.cd.truncation_set(lambda_max);
        let mut modules = Vec::with_capacity(blocks.len());
        let mut dim_q = Vec::with_capacity(blocks.len());
        let two_rho = Weight(vec![2; ctx.cd.rank]);
        for lam in &blocks {
            let m = ctx.module(q, lam)?;
            dim_q.push(m.k_power(&two_rho).trace().re);
            modules.push(m);
        }
        Ok(TruncatedGNS {
            q,
            lambda_max,
            blocks,
            modules,
            dim_q,
            with_spin: spin.is_some(),
            dim_s: spin.map(|c| c.dim_s).unwrap_or(1),
        })
    }

    pub fn block_index(&self, lam: &Weight) -> Result<usize> {
        self.blocks
            .iter()
            .position(|b| b == lam)
            .ok_or_else(|| Error::MissingBlock(lam.0.clone(), vec![]))
    }

    pub fn block_dim(&self, bi: usize) -> usize {
        let d = self.modules[bi].dim;
        d * d * self.dim_s
    }

    pub fn total_dim(&self) -> usize {
        (0..self.blocks.len()).map(|bi| self.block_dim(bi)).sum()
    }

    /// GNS vector of a coefficient element (spinless spaces only): per block
    /// λ the matrix `A` contributes `Σ_{jk} A_{jk} dim_q^{-1/2} q^{(ρ, wt_j)}
    /// ē_j ⊗ e_k`.
    pub fn gns_vector(&self, ctx: &Context, elem: &CoeffElement) -> Result<BTreeMap<usize, CVec>> {
        assert!(!self.with_spin, "gns_vector lives on the spinless space");
        let rho = ctx.cd.rho();
        let mut out = BTreeMap::new();
        for (lam, a) in &elem.terms {
            let bi = self.block_index(lam)?;
            let m = &self.modules[bi];
            let d = m.dim;
            let mut v = CVec::zeros(d * d);
            let scale = self.dim_q[bi].powf(-0.5);
            for j in 0..d {
                let w = m.qp.pow_rational(ctx.cd.weight_form(&rho, &m.weights[j])?);
                for k in 0..d {
                    v[j * d + k] += a[(j, k)] * rc(scale * w);
                }
            }
            out.insert(bi, v);
        }
        Ok(out)
    }
}

/// Block matrix over GNS blocks; absent entries are zero. `interior` marks
/// the column blocks on which the operator is exact under the truncation.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub blocks: BTreeMap<(usize, usize), CMat>,
    pub interior: Option<BTreeSet<usize>>,
}

impl BlockOperator {
    pub fn zero() -> Self {
        BlockOperator {
            blocks: BTreeMap::new(),
            interior: None,
        }
    }

    pub fn identity(gns: &TruncatedGNS) -> Self {
        let mut blocks = BTreeMap::new();
        for bi in 0..gns.blocks.len() {
            blocks.insert((bi, bi), linalg::identity(gns.block_dim(bi)));
        }
        BlockOperator {
            blocks,
            interior: None,
        }
    }

    pub fn block_diagonal(mats: Vec<CMat>) -> Self {
        let mut blocks = BTreeMap::new();
        for (bi, m) in mats.into_iter().enumerate() {
            blocks.insert((bi, bi), m);
        }
        BlockOperator {
            blocks,
            interior: None,
        }
    }

    pub fn mul(&self, other: &BlockOperator) -> BlockOperator {
        let mut blocks: BTreeMap<(usize, usize), CMat> = BTreeMap::new();
        for (&(r, k1), a) in &self.blocks {
            for (&(k2, c), b) in &other.blocks {
                if k1 != k2 {
                    continue;
                }
                let prod = a * b;
                blocks
                    .entry((r, c))
                    .and_modify(|m| *m += &prod)
                    .or_insert(prod);
            }
        }
        BlockOperator {
            blocks,
            interior: other.interior.clone(),
        }
    }

    pub fn sub(&self, other: &BlockOperator) -> BlockOperator {
        let mut blocks = self.blocks.clone();
        for (&key, b) in &other.blocks {
            blocks
                .entry(key)
                .and_modify(|m| *m -= b)
                .or_insert_with(|| -b.clone());
        }
        let interior = match (&self.interior, &other.interior) {
            (Some(a), Some(b)) => Some(a.intersection(b).copied().collect()),
            (Some(a), None) => Some(a.clone()),
            (None, b) => b.clone(),
        };
        BlockOperator { blocks, interior }
    }

    pub fn adjoint(&self) -> BlockOperator {
        let mut blocks = BTreeMap::new();
        for (&(r, c), m) in &self.blocks {
            blocks.insert((c, r), dagger(m));
        }
        BlockOperator {
            blocks,
            interior: None,
        }
    }

    /// Tensor each block with the identity on the spinor space.
    pub fn tensor_spin(&self, dim_s: usize) -> BlockOperator {
        let eye = linalg::identity(dim_s);
        BlockOperator {
            blocks: self
                .blocks
                .iter()
                .map(|(&k, m)| (k, kron(m, &eye)))
                .collect(),
            interior: self.interior.clone(),
        }
    }

    pub fn is_block_diagonal(&self) -> bool {
        self.blocks.keys().all(|&(r, c)| r == c)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut seen = BTreeSet::new();
        for (&(r, c), m) in &self.blocks {
            if seen.contains(&(c, r)) {
                continue;
            }
            seen.insert((r, c));
            let other = self.blocks.get(&(c, r));
            let diff = match other {
                Some(o) => m - dagger(o),
                None => m.clone(),
            };
            worst = worst.max(max_abs(&diff));
        }
        worst
    }

    /// Dense matrix with columns restricted to `col_blocks` (all rows kept).
    pub fn to_dense_restricted(
        &self,
        gns: &TruncatedGNS,
        col_blocks: Option<&BTreeSet<usize>>,
    ) -> CMat {
        let nb = gns.blocks.len();
        let mut row_off = vec![0usize; nb + 1];
        for bi in 0..nb {
            row_off[bi + 1] = row_off[bi] + gns.block_dim(bi);
        }
        let cols: Vec<usize> = match col_blocks {
            Some(set) => set.iter().copied().collect(),
            None => (0..nb).collect(),
        };
        let mut col_off = BTreeMap::new();
        let mut total_cols = 0;
        for &c in &cols {
            col_off.insert(c, total_cols);
            total_cols += gns.block_dim(c);
        }
        let mut out = linalg::zeros(row_off[nb], total_cols);
        for (&(r, c), m) in &self.blocks {
            if let Some(&co) = col_off.get(&c) {
                out.view_mut((row_off[r], co), (m.nrows(), m.ncols()))
                    .copy_from(m);
            }
        }
        out
    }

    pub fn max_entry(&self) -> f64 {
        self.blocks.values().map(max_abs).fold(0.0, f64::max)
    }
}

/// `∂_q(ω)` for a blockwise element: the diagonal operator `1 ⊗ π_λ^q(ω_λ)`
/// (tensored with the spinor identity when present).
pub fn regular_right(gns: &TruncatedGNS, omega: &BTreeMap<Weight, CMat>) -> Result<BlockOperator> {
    let mut mats = Vec::with_capacity(gns.blocks.len());
    for (bi, lam) in gns.blocks.iter().enumerate() {
        let m = &gns.modules[bi];
        let block = omega
            .get(lam)
            .ok_or_else(|| Error::MissingBlock(lam.0.clone(), vec![]))?;
        let mut op = kron(&linalg::identity(m.dim), block);
        if gns.with_spin {
            op = kron(&op, &linalg::identity(gns.dim_s));
        }
        mats.push(op);
    }
    Ok(BlockOperator::block_diagonal(mats))
}

/// `π_{r,q}(a)`: left multiplication on the GNS space, computed through
/// coefficient products; the interior set records the column blocks where no
/// component escapes the truncation.
pub fn regular_left(gns: &TruncatedGNS, ctx: &Context, a: &CoeffElement) -> Result<BlockOperator> {
    assert!(!gns.with_spin, "build the regular representation spinless, then tensor_spin");
    for lam in a.terms.keys() {
        if !ctx.cd.in_truncation(lam, gns.lambda_max) {
            return Err(Error::TruncationOverflow(lam.0.clone()));
        }
    }
    let rho = ctx.cd.rho();
    let mut blocks: BTreeMap<(usize, usize), CMat> = BTreeMap::new();
    let mut interior = BTreeSet::new();
    for (ci, lam) in gns.blocks.iter().enumerate() {
        // interior: every product component of every σ ⊗ λ stays inside
        let mut inside = true;
        for sigma in a.terms.keys() {
            let cg = ctx.cg(gns.q, sigma, lam)?;
            if cg
                .components
                .iter()
                .any(|c| !ctx.cd.in_truncation(&c.eta, gns.lambda_max))
            {
                inside = false;
            }
        }
        if inside {
            interior.insert(ci);
        }
        let m = &gns.modules[ci];
        let d = m.dim;
        let scale = gns.dim_q[ci].sqrt();
        for j in 0..d {
            let wj = m.qp.pow_rational(ctx.cd.weight_form(&rho, &m.weights[j])?);
            for k in 0..d {
                // normalized basis coefficient whose GNS vector is ē_j ⊗ e_k
                let mut b = CoeffElement::basis(gns.q, gns.lambda_max, lam, j, k, d);
                let c = rc(scale / wj);
                for v in b.terms.values_mut() {
                    *v *= c;
                }
                let prod = funalg::coeff_product(a, &b, ctx, true)?;
                let vec = gns.gns_vector(ctx, &prod)?;
                for (ri, v) in vec {
                    let entry = blocks
                        .entry((ri, ci))
                        .or_insert_with(|| linalg::zeros(gns.block_dim(ri), gns.block_dim(ci)));
                    for r in 0..v.len() {
                        entry[(r, j * d + k)] = v[r];
                    }
                }
            }
        }
    }
    Ok(BlockOperator {
        blocks,
        interior: Some(interior),
    })
}

/// The block unitary `W_q = ⊕ ū_λ^q ⊗ u_λ^q : L²(G_q) → L²(G)`.
pub fn w_q_unitary(gns_q: &TruncatedGNS, fam: &IsomorphismFamily, qi: usize) -> Result<BlockOperator> {
    let mut mats = Vec::with_capacity(gns_q.blocks.len());
    for lam in &gns_q.blocks {
        let u = fam.unitary(qi, lam)?;
        mats.push(kron(&u.map(|z| z.conj()), u));
    }
    Ok(BlockOperator::block_diagonal(mats))
}

/// Residual of the defining formula
/// `W_q π_{r,q}(aφ^q) ξ_h^q = a_{(0)}(φ^q(d^q)) π_r(a_{(1)}) ξ_h`
/// over all coefficient basis vectors of the block λ.
pub fn w_q_defining_residual(
    ctx: &Context,
    fam: &IsomorphismFamily,
    haar: &HaarData,
    gns_q: &TruncatedGNS,
    gns_1: &TruncatedGNS,
    qi: usize,
    lam: &Weight,
) -> Result<f64> {
    let bi = gns_q.block_index(lam)?;
    let d = gns_q.modules[bi].dim;
    let u = fam.unitary(qi, lam)?;
    let w_block = kron(&u.map(|z| z.conj()), u);
    let d_push = u * &haar.entry(lam)?.d_mat * dagger(u);
    let mut worst = 0.0f64;
    for j in 0..d {
        for k in 0..d {
            let mut a_mat = linalg::zeros(d, d);
            a_mat[(j, k)] = rc(1.0);
            let section = funalg::classical_section(fam, qi, lam, &a_mat, gns_q.lambda_max)?;
            let lhs_map = gns_q.gns_vector(ctx, &section)?;
            let lhs = &w_block * &lhs_map[&bi];
            // rhs: Σ_m (u π^q(d) u†)_{jm} Ψ₁(a_{mk})
            let mut rhs = CVec::zeros(d * d);
            for m in 0..d {
                let coeff = d_push[(j, m)];
                if coeff.norm() == 0.0 {
                    continue;
                }
                let basis = CoeffElement::basis(1.0, gns_1.lambda_max, lam, m, k, d);
                let v1 = gns_1.gns_vector(ctx, &basis)?;
                rhs += &v1[&bi] * coeff;
            }
            let diff = (&lhs - &rhs).norm();
            worst = worst.max(diff);
        }
    }
    Ok(worst)
}

/// Residual of the intertwining `W_q ∂_q(ω) = ∂(φ^q(ω)) W_q` on generators.
pub fn w_q_intertwining_residual(
    ctx: &Context,
    fam: &IsomorphismFamily,
    gns_q: &TruncatedGNS,
    qi: usize,
) -> Result<f64> {
    let q = gns_q.q;
    let mut worst = 0.0f64;
    for kind in 0..3 {
        let mut blocks_q: BTreeMap<Weight, CMat> = BTreeMap::new();
        let mut blocks_push: BTreeMap<Weight, CMat> = BTreeMap::new();
        for lam in &gns_q.blocks {
            let m = ctx.module(q, lam)?;
            let u = fam.unitary(qi, lam)?;
            let x = match kind {
                0 => m.e_mat[0].clone(),
                1 => m.f_mat[0].clone(),
                _ => m.k_mat[0].clone(),
            };
            blocks_push.insert(lam.clone(), u * &x * dagger(u));
            blocks_q.insert(lam.clone(), x);
        }
        let w = w_q_unitary(gns_q, fam, qi)?;
        let dq = regular_right(gns_q, &blocks_q)?;
        let d1 = regular_right(gns_q, &blocks_push)?;
        let diff = w.mul(&dq).sub(&d1.mul(&w));
        let scale = f64::max(1.0, dq.max_entry());
        worst = worst.max(diff.max_entry() / scale);
    }
    Ok(worst)
}

/// The classical Dirac operator: block-diagonal, `1 ⊗ (π_λ ⊗ s)(𝒟)`.
pub fn dirac_classical(gns_1: &TruncatedGNS, cliff: &CliffordData) -> Result<BlockOperator> {
    assert!(gns_1.with_spin && gns_1.q == 1.0);
    let mut mats = Vec::with_capacity(gns_1.blocks.len());
    for m in &gns_1.modules {
        let d_block = cliff.dirac_block(m);
        mats.push(kron(&linalg::identity(m.dim), &d_block));
    }
    Ok(BlockOperator::block_diagonal(mats))
}

/// The deformed Dirac operator on the q-GNS space: per block λ,
/// `1 ⊗ (u_λ† ⊗ 1) G (π_λ ⊗ s)(𝒟) G† (u_λ ⊗ 1)` with
/// `G = (π_λ ⊗ s∘ãd)(F^q)`.
pub fn dirac_deformed(
    ctx: &Context,
    gns_q: &TruncatedGNS,
    tf: &TwistField,
    fam: &IsomorphismFamily,
    cliff: &CliffordData,
    qi: usize,
) -> Result<BlockOperator> {
    assert!(gns_q.with_spin);
    let mut mats = Vec::with_capacity(gns_q.blocks.len());
    for lam in &gns_q.blocks {
        let m1 = ctx.module(1.0, lam)?;
        let u = fam.unitary(qi, lam)?;
        let g = cliff.lift_second_leg(m1.dim, |mu| tf.block(qi, lam, mu).cloned())?;
        let d_block = cliff.dirac_block(&m1);
        let u_s = kron(u, &linalg::identity(cliff.dim_s));
        let deformed = dagger(&u_s) * &g * d_block * dagger(&g) * u_s;
        mats.push(kron(&linalg::identity(m1.dim), &deformed));
    }
    Ok(BlockOperator::block_diagonal(mats))
}

/// Per-block sorted spectrum of a Hermitian block-diagonal operator.
pub fn spectrum(op: &BlockOperator, gns: &TruncatedGNS) -> Result<Vec<(Weight, Vec<f64>)>> {
    if !op.is_block_diagonal() {
        return Err(Error::NonHermitian(f64::INFINITY));
    }
    let defect = op.hermiticity_defect();
    if defect > 1e-10 * f64::max(1.0, op.max_entry()) {
        return Err(Error::NonHermitian(defect));
    }
    let mut out = Vec::new();
    for (bi, lam) in gns.blocks.iter().enumerate() {
        let evs = match op.blocks.get(&(bi, bi)) {
            Some(m) => {
                let sym = (m + dagger(m)) * rc(0.5);
                linalg::hermitian_eigenvalues(&sym)
            }
            None => vec![0.0; gns.block_dim(bi)],
        };
        out.push((lam.clone(), evs));
    }
    Ok(out)
}

/// Merge a sorted eigenvalue list into (value, multiplicity) pairs.
pub fn merge_multiplicities(evs: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &e in evs {
        match out.last_mut() {
            Some((v, c)) if (e - *v).abs() <= tol => *c += 1,
            _ => out.push((e, 1)),
        }
    }
    out
}

/// Max deviation between two sorted spectra (as multisets).
pub fn spectral_deviation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Interior-restricted operator norm of `[D_q, π_{r,q}(a) ⊗ 1]`.
pub fn commutator_norm(
    gns_spin: &TruncatedGNS,
    dq: &BlockOperator,
    pia: &BlockOperator,
) -> Result<f64> {
    let interior = pia
        .interior
        .clone()
        .ok_or_else(|| Error::Config("regular representation carries no interior set".into()))?;
    if interior.is_empty() {
        return Err(Error::Config(
            "empty interior: the truncation is too small for this coefficient".into(),
        ));
    }
    let pia_s = pia.tensor_spin(gns_spin.dim_s);
    let comm = dq.mul(&pia_s).sub(&pia_s.mul(dq));
    let dense = comm.to_dense_restricted(gns_spin, Some(&interior));
    Ok(linalg::op_norm(&dense))
}

/// The uniform bound `6 ‖(π ⊗ γ)(t)‖` for the representation carrying the
/// coefficient.
pub fn commutator_bound(ctx: &Context, cliff: &CliffordData, sigma: &Weight) -> Result<f64> {
    let m = ctx.module(1.0, sigma)?;
    Ok(6.0 * linalg::op_norm(&cliff.gamma_t_block(&m)))
}

/// Both sides of the commutator identity
/// `[D_q, π_{r,q}(cφ^q)⊗1] = −(π_{r,q}(c_{(0)}φ^q)⊗1)(∂_q∘(φ^q)^{-1}⊗s)
/// (c_{(1)}⊗ι⊗ι)(U_q T_q U_q*)`, evaluated on a window of interior column
/// blocks; returns the max entry residual.
#[allow(clippy::too_many_arguments)]
pub fn commutator_identity_check(
    ctx: &Context,
    gns_spin: &TruncatedGNS,
    gns_flat: &TruncatedGNS,
    tf: &TwistField,
    fam: &IsomorphismFamily,
    cliff: &CliffordData,
    qi: usize,
    sigma: &Weight,
    c_mat: &CMat,
    window: &[Weight],
) -> Result<f64> {
    let q = fam.q_grid[qi];
    assert_eq!(gns_spin.q, q);
    let m_sigma = ctx.module(1.0, sigma)?;
    let d_sigma = m_sigma.dim;
    let dim_s = cliff.dim_s;

    // left side: [D_q, π(cφ^q) ⊗ 1]
    let dq = dirac_deformed(ctx, gns_spin, tf, fam, cliff, qi)?;
    let section = funalg::classical_section(fam, qi, sigma, c_mat, gns_flat.lambda_max)?;
    let pia = regular_left(gns_flat, ctx, &section)?;
    let pia_s = pia.tensor_spin(dim_s);
    let lhs = dq.mul(&pia_s).sub(&pia_s.mul(&dq));

    // regular representations of the sliced sections a_{jm}
    let mut pi_jm: BTreeMap<(usize, usize), BlockOperator> = BTreeMap::new();
    for j in 0..d_sigma {
        for m in 0..d_sigma {
            let mut e_mat = linalg::zeros(d_sigma, d_sigma);
            e_mat[(j, m)] = rc(1.0);
            let s = funalg::classical_section(fam, qi, sigma, &e_mat, gns_flat.lambda_max)?;
            pi_jm.insert((j, m), regular_left(gns_flat, ctx, &s)?.tensor_spin(dim_s));
        }
    }

    let interior = pia.interior.clone().unwrap_or_default();
    let mut worst = 0.0f64;
    for lam_p in window {
        let ci = gns_spin.block_index(lam_p)?;
        if !interior.contains(&ci) {
            return Err(Error::Config(format!(
                "window block {lam_p} is not interior at Λ = {}",
                gns_spin.lambda_max
            )));
        }
        let m_lp = ctx.module(1.0, lam_p)?;
        let d_lp = m_lp.dim;
        let u_lp = fam.unitary(qi, lam_p)?;

        // three-leg element U_q T_q U_q* on V_σ ⊗ V_{λ'} ⊗ S
        let total3 = d_sigma * d_lp * dim_s;
        let eye12 = linalg::identity(d_sigma * d_lp);
        // U_q = (ι⊗ι⊗ãd)((F^q ⊗ 1)(Δ̂⊗ι)(F^q))
        let f_sl = kron(tf.block(qi, sigma, lam_p)?, &linalg::identity(dim_s));
        let cg_sl = ctx.cg(1.0, sigma, lam_p)?;
        let mut cop = linalg::zeros(total3, total3);
        for comp in &cg_sl.components {
            let inner = cliff.lift_second_leg(comp.isometry.ncols(), |mu| {
                tf.block(qi, &comp.eta, mu).cloned()
            })?;
            let emb = kron(&comp.isometry, &linalg::identity(dim_s));
            cop += &emb * inner * dagger(&emb);
        }
        let u_q = &f_sl * cop;

        // T_q = γ(t_13) + γ(t_23) − ãd(Φ^q)* γ(t_23) ãd(Φ^q)
        let mut t13 = linalg::zeros(total3, total3);
        let mut t23 = linalg::zeros(total3, total3);
        for a in 0..cliff.n {
            let xs = cliff.realize_x(&m_sigma, a);
            let xl = cliff.realize_x(&m_lp, a);
            t13 -= kron(&xs, &kron(&linalg::identity(d_lp), &cliff.gamma[a]));
            t23 -= kron(&linalg::identity(d_sigma), &kron(&xl, &cliff.gamma[a]));
        }
        let mut ad_phi = linalg::zeros(total3, total3);
        for (mu, p) in &cliff.spin_components {
            let phi = twist::coboundary_associator(ctx, tf, qi, sigma, lam_p, mu)?;
            let emb = kron(&eye12, p);
            ad_phi += &emb * phi * dagger(&emb);
        }
        let t_q = &t13 + &t23 - dagger(&ad_phi) * &t23 * &ad_phi;
        let x3 = &u_q * t_q * dagger(&u_q);

        // slice the first leg, pull through (φ^q)^{-1}, and assemble the RHS
        let u_pull = kron(u_lp, &linalg::identity(dim_s));
        let mut rhs_cols: BTreeMap<usize, CMat> = BTreeMap::new();
        for j in 0..d_sigma {
            for k in 0..d_sigma {
                let cjk = c_mat[(j, k)];
                if cjk.norm() == 0.0 {
                    continue;
                }
                for m in 0..d_sigma {
                    // Y_{mk} block on V_{λ'} ⊗ S: partial matrix element over V_σ
                    let mut y = linalg::zeros(d_lp * dim_s, d_lp * dim_s);
                    for r in 0..d_lp * dim_s {
                        for c2 in 0..d_lp * dim_s {
                            y[(r, c2)] = x3[(m * d_lp * dim_s + r, k * d_lp * dim_s + c2)];
                        }
                    }
                    let pulled = dagger(&u_pull) * y * &u_pull;
                    let del = kron(&linalg::identity(d_lp), &pulled);
                    // −C_{jk} · π(a_{jm}φ^q)⊗1 · (1 ⊗ pulled) restricted to column block λ'
                    let pi_op = &pi_jm[&(j, m)];
                    for (&(r, c2), blk) in &pi_op.blocks {
                        if c2 != ci {
                            continue;
                        }
                        let term = blk * &del * (-cjk);
                        rhs_cols
                            .entry(r)
                            .and_modify(|mm| *mm += &term)
                            .or_insert(term);
                    }
                }
            }
        }

        // compare against the LHS column blocks
        let mut keys: BTreeSet<usize> = rhs_cols.keys().copied().collect();
        for (&(r, c2), _) in &lhs.blocks {
            if c2 == ci {
                keys.insert(r);
            }
        }
        for r in keys {
            let zero = linalg::zeros(gns_spin.block_dim(r), gns_spin.block_dim(ci));
            let l = lhs.blocks.get(&(r, ci)).unwrap_or(&zero);
            let rr = rhs_cols.get(&r).unwrap_or(&zero);
            let scale = f64::max(1.0, max_abs(l).max(max_abs(rr)));
            worst = worst.max(max_abs(&(l - rr)) / scale);
        }
    }
    Ok(worst)
}

/// Convenience: the Complex64 type re-exported for downstream callers.
pub type Scalar = Complex64;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{CartanData, LieType};
    use crate::iso_family::build_family;
    use crate::spin::build_clifford;
    use crate::twist::build_twist_field;

    fn w(coords: &[i64]) -> Weight {
        Weight(coords.to_vec())
    }

    struct Setup {
        ctx: Context,
        fam: IsomorphismFamily,
        cliff: CliffordData,
        tf: TwistField,
        grid: Vec<f64>,
    }

    fn setup(n_grid: usize, max_coord: i64) -> Setup {
        let ctx = Context::new(CartanData::new(LieType::A1));
        let grid = crate::config::make_grid(0.5, 2.0, n_grid).unwrap();
        let lambdas: Vec<Weight> = (0..=max_coord).map(|m| w(&[m])).collect();
        let closure = twist::closure_weights(&ctx, &lambdas).unwrap();
        let fam = build_family(&ctx, &grid, &closure).unwrap();
        let cliff = build_clifford(&ctx).unwrap();
        let tf = build_twist_field(&ctx, &fam, &lambdas).unwrap();
        Setup {
            ctx,
            fam,
            cliff,
            tf,
            grid,
        }
    }

    #[test]
    fn regular_right_is_a_homomorphism() {
        let ctx = Context::new(CartanData::new(LieType::A1));
        let gns = TruncatedGNS::new(&ctx, 1.4, 2, None).unwrap();
        let mut ea = BTreeMap::new();
        let mut fa = BTreeMap::new();
        for lam in &gns.blocks {
            let m = ctx.module(1.4, lam).unwrap();
            ea.insert(lam.clone(), m.e_mat[0].clone());
            fa.insert(lam.clone(), m.f_mat[0].clone());
        }
        let de = regular_right(&gns, &ea).unwrap();
        let df = regular_right(&gns, &fa).unwrap();
        let mut ef = BTreeMap::new();
        for lam in &gns.blocks {
            ef.insert(lam.clone(), &ea[lam] * &fa[lam]);
        }
        let def = regular_right(&gns, &ef).unwrap();
        let resid = de.mul(&df).sub(&def).max_entry();
        assert!(resid < 1e-12);
        // unit gives the identity
        let mut one = BTreeMap::new();
        for (bi, lam) in gns.blocks.iter().enumerate() {
            one.insert(lam.clone(), linalg::identity(gns.modules[bi].dim));
        }
        let d1 = regular_right(&gns, &one).unwrap();
        let diff = d1.sub(&BlockOperator::identity(&gns));
        assert_eq!(diff.max_entry(), 0.0);
    }

    #[test]
    fn regular_left_gns_consistency() {
        // ⟨π(a)ξ_h, π(b)ξ_h⟩ = gns_inner(a, b)
        let ctx = Context::new(CartanData::new(LieType::A1));
        let q = 1.5;
        let gns = TruncatedGNS::new(&ctx, q, 3, None).unwrap();
        let a = CoeffElement::basis(q, 3, &w(&[1]), 0, 1, 2);
        let b = CoeffElement::basis(q, 3, &w(&[2]), 2, 0, 3);
        for (x, y) in [(&a, &a), (&a, &b), (&b, &b)] {
            let vx = gns.gns_vector(&ctx, x).unwrap();
            let vy = gns.gns_vector(&ctx, y).unwrap();
            let mut ip = rc(0.0);
            for (bi, v) in &vx {
                if let Some(u) = vy.get(bi) {
                    ip += u.dotc(v);
                }
            }
            let expect = funalg::gns_inner(x, y, &ctx).unwrap();
            assert!((ip - expect).norm() < 1e-10);
        }
        // representation property on the interior
        let pa = regular_left(&gns, &ctx, &a).unwrap();
        let pb = regular_left(&gns, &ctx, &b).unwrap();
        let ab = funalg::coeff_product(&a, &b, &ctx, true).unwrap();
        let pab = regular_left(&gns, &ctx, &ab).unwrap();
        let prod = pa.mul(&pb);
        let diff = prod.sub(&pab);
        let interior = pb.interior.clone().unwrap();
        // compare on columns where b-multiplication then a-multiplication is exact
        for (&(_r, c), m) in &diff.blocks {
            if interior.contains(&c) && gns.blocks[c].0[0] + 3 <= 2 * gns.lambda_max as i64 {
                assert!(max_abs(m) < 1e-9, "block col {c}: {}", max_abs(m));
            }
        }
        // unit acts as the identity
        let one = CoeffElement::unit(1, q, 3);
        let p1 = regular_left(&gns, &ctx, &one).unwrap();
        assert!(p1.sub(&BlockOperator::identity(&gns)).max_entry() < 1e-12);
    }

    #[test]
    fn w_q_is_unitary_and_intertwines() {
        let s = setup(5, 6);
        for (qi, &q) in s.grid.iter().enumerate() {
            let gns_q = TruncatedGNS::new(&s.ctx, q, 3, None).unwrap();
            let wq = w_q_unitary(&gns_q, &s.fam, qi).unwrap();
            let defect = wq
                .adjoint()
                .mul(&wq)
                .sub(&BlockOperator::identity(&gns_q))
                .max_entry();
            assert!(defect < 1e-10, "q={q}: unitarity {defect}");
            let resid = w_q_intertwining_residual(&s.ctx, &s.fam, &gns_q, qi).unwrap();
            assert!(resid < 1e-10, "q={q}: intertwining {resid}");
        }
    }

    #[test]
    fn w_q_defining_formula() {
        let s = setup(5, 6);
        let gns_1 = TruncatedGNS::new(&s.ctx, 1.0, 3, None).unwrap();
        for (qi, &q) in s.grid.iter().enumerate() {
            let gns_q = TruncatedGNS::new(&s.ctx, q, 3, None).unwrap();
            let haar = HaarData::new(&s.ctx, q, &gns_q.blocks).unwrap();
            for lam in [w(&[1]), w(&[2])] {
                let resid = w_q_defining_residual(
                    &s.ctx, &s.fam, &haar, &gns_q, &gns_1, qi, &lam,
                )
                .unwrap();
                assert!(resid < 1e-10, "q={q} λ={lam}: {resid}");
            }
        }
    }

    #[test]
    fn classical_dirac_block_structure() {
        let s = setup(5, 4);
        let gns = TruncatedGNS::new(&s.ctx, 1.0, 2, Some(&s.cliff)).unwrap();
        let d = dirac_classical(&gns, &s.cliff).unwrap();
        assert!(d.hermiticity_defect() < 1e-12);
        // λ = 0 block acts by the cubic scalar alone
        let b0 = &d.blocks[&(0, 0)];
        let expect = &s.cliff.cubic;
        assert!(max_abs(&(b0 - expect)) < 1e-13);
    }

    #[test]
    fn deformed_dirac_is_hermitian_and_isospectral() {
        let s = setup(5, 6);
        let gns_1 = TruncatedGNS::new(&s.ctx, 1.0, 3, Some(&s.cliff)).unwrap();
        let d = dirac_classical(&gns_1, &s.cliff).unwrap();
        let spec_d = spectrum(&d, &gns_1).unwrap();
        for (qi, &q) in s.grid.iter().enumerate() {
            let gns_q = TruncatedGNS::new(&s.ctx, q, 3, Some(&s.cliff)).unwrap();
            let dq = dirac_deformed(&s.ctx, &gns_q, &s.tf, &s.fam, &s.cliff, qi).unwrap();
            assert!(
                dq.hermiticity_defect() < 1e-10,
                "q={q}: hermiticity {}",
                dq.hermiticity_defect()
            );
            let spec_dq = spectrum(&dq, &gns_q).unwrap();
            for ((lam, a), (_, b)) in spec_d.iter().zip(&spec_dq) {
                let dev = spectral_deviation(a, b);
                assert!(dev < 1e-9, "q={q} λ={lam}: deviation {dev}");
            }
            if q == 1.0 {
                let diff = d.sub(&dq).max_entry();
                assert!(diff < 1e-12, "q=1 must reproduce D exactly, got {diff}");
            }
        }
    }

    #[test]
    fn spectrum_merging_and_error_path() {
        let evs = vec![-1.0, -1.0 + 1e-12, 0.5, 0.5, 2.0];
        let merged = merge_multiplicities(&evs, 1e-9);
        assert_eq!(merged.len(), 3);
        assert_eq!(merged[0].1, 2);
        assert_eq!(merged[1].1, 2);

        let ctx = Context::new(CartanData::new(LieType::A1));
        let gns = TruncatedGNS::new(&ctx, 1.0, 1, None).unwrap();
        let mut op = BlockOperator::identity(&gns);
        // break hermiticity
        if let Some(m) = op.blocks.get_mut(&(1, 1)) {
            m[(0, 1)] = rc(1.0);
        }
        assert!(matches!(spectrum(&op, &gns), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn commutator_of_unit_vanishes() {
        let s = setup(3, 4);
        let qi = 1;
        let q = s.grid[qi];
        let gns_s = TruncatedGNS::new(&s.ctx, q, 2, Some(&s.cliff)).unwrap();
        let gns_f = TruncatedGNS::new(&s.ctx, q, 2, None).unwrap();
        let dq = dirac_deformed(&s.ctx, &gns_s, &s.tf, &s.fam, &s.cliff, qi).unwrap();
        let one = CoeffElement::unit(1, q, 2);
        let p1 = regular_left(&gns_f, &s.ctx, &one).unwrap();
        let norm = commutator_norm(&gns_s, &dq, &p1).unwrap();
        assert!(norm < 1e-11, "{norm}");
    }

    #[test]
    fn commutator_identity_at_q_one() {
        let s = setup(3, 6);
        let qi = s.grid.iter().position(|&q| q == 1.0).unwrap();
        let gns_s = TruncatedGNS::new(&s.ctx, 1.0, 3, Some(&s.cliff)).unwrap();
        let gns_f = TruncatedGNS::new(&s.ctx, 1.0, 3, None).unwrap();
        let mut c_mat = linalg::zeros(2, 2);
        c_mat[(0, 1)] = rc(1.0);
        let resid = commutator_identity_check(
            &s.ctx,
            &gns_s,
            &gns_f,
            &s.tf,
            &s.fam,
            &s.cliff,
            qi,
            &w(&[1]),
            &c_mat,
            &[w(&[1]), w(&[2])],
        )
        .unwrap();
        assert!(resid < 1e-10, "classical anchor residual {resid}");
    }
}
