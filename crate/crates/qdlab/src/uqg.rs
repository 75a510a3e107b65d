//! Finite-dimensional `*`-representations of the quantized enveloping algebra.
//!
//! Conventions (fixed once, self-tested mechanically):
//!
//! - `K_i E_j K_i⁻¹ = q_i^{a_ij} E_j` with `q_i = q^{d_i}`;
//! - `[E_i, F_j] = δ_ij (K_i − K_i⁻¹)/(q_i − q_i⁻¹)`;
//! - coproduct `Δ(E) = E⊗1 + K⊗E`, `Δ(F) = F⊗K⁻¹ + 1⊗F`, `Δ(K) = K⊗K`;
//! - `*`-structure `F_i† = K_i⁻¹ E_i`, `K_i† = K_i`.
//!
//! Modules are built from the highest weight vector by applying lowering
//! operators level by level; the scalar products of the produced vectors are
//! evaluated through the commutation rules (with `F† = K⁻¹E`), null vectors
//! are cut per weight space, and generator matrices are returned in the
//! resulting orthonormal basis, where `E = K F†` holds exactly.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_complex::Complex64;

use crate::cartan::{weight_order, CartanData, Weight};
use crate::linalg::{self, c64, dagger, flip, kron, max_abs, rc, CMat, CVec};
use crate::qscalars::QParam;
use crate::tol;
use crate::{Context, Error, Result};

/// An irreducible `*`-representation with highest weight `λ`.
#[derive(Debug, Clone)]
pub struct IrrepModule {
    pub cd: Arc<CartanData>,
    pub qp: QParam,
    pub highest_weight: Weight,
    pub dim: usize,
    /// Weight of each basis vector, in construction order.
    pub weights: Vec<Weight>,
    /// Basis indices grouped by lowering level (level 0 = highest weight).
    pub levels: Vec<Vec<usize>>,
    pub e_mat: Vec<CMat>,
    pub f_mat: Vec<CMat>,
    pub k_mat: Vec<CMat>,
    pub hw_index: usize,
}

impl IrrepModule {
    pub fn q(&self) -> f64 {
        self.qp.q()
    }

    /// Diagonal matrix of `h_i` (integer coroot pairings; q-independent).
    pub fn h_mat(&self, i: usize) -> CMat {
        CMat::from_fn(self.dim, self.dim, |r, c| {
            if r == c {
                rc(self.weights[r].coroot_pairing(i) as f64)
            } else {
                rc(0.0)
            }
        })
    }

    /// `K_β = q^{h_β}` for a weight `β`, acting by `q^{(β,μ)}` on weight `μ`.
    pub fn k_power(&self, beta: &Weight) -> CMat {
        CMat::from_fn(self.dim, self.dim, |r, c| {
            if r == c {
                let e = self.cd.weight_form(beta, &self.weights[r]).unwrap();
                rc(self.qp.pow_rational(e))
            } else {
                rc(0.0)
            }
        })
    }

    /// Safe matrix of `(K_i − K_i⁻¹)/(q_i − q_i⁻¹)`, regular at q = 1.
    pub fn qh_mat(&self, i: usize) -> CMat {
        let qi = self.qp.root_param(self.cd.symmetrizers[i]);
        CMat::from_fn(self.dim, self.dim, |r, c| {
            if r == c {
                rc(qi.q_integer(self.weights[r].coroot_pairing(i)))
            } else {
                rc(0.0)
            }
        })
    }

    /// Maximal defining-relation residual (relations, Serre, `*`-structure),
    /// normalized by operand scale.
    pub fn relations_residual(&self) -> f64 {
        let qh: Vec<CMat> = (0..self.cd.rank).map(|i| self.qh_mat(i)).collect();
        relations_residual_parts(&self.cd, self.qp, &self.e_mat, &self.f_mat, &self.k_mat, &qh)
    }
}

/// Relation residuals for any candidate system of generator matrices.
///
/// `qh[i]` must be a safe realization of `(K_i − K_i⁻¹)/(q_i − q_i⁻¹)`.
pub fn relations_residual_parts(
    cd: &CartanData,
    qp: QParam,
    e: &[CMat],
    f: &[CMat],
    k: &[CMat],
    qh: &[CMat],
) -> f64 {
    let mut worst = 0.0f64;
    let mut record = |lhs: &CMat, rhs: &CMat| {
        let scale = f64::max(1.0, f64::max(max_abs(lhs), max_abs(rhs)));
        let resid = max_abs(&(lhs - rhs)) / scale;
        if resid > worst {
            worst = resid;
        }
    };
    let r = cd.rank;
    for i in 0..r {
        let qi = qp.root_param(cd.symmetrizers[i]);
        for j in 0..r {
            let aij = cd.cartan_matrix[i][j];
            // K_i E_j = q_i^{a_ij} E_j K_i
            let lhs = &k[i] * &e[j];
            let rhs = &e[j] * &k[i] * rc(qi.q().powi(aij as i32));
            record(&lhs, &rhs);
            // K_i F_j = q_i^{−a_ij} F_j K_i
            let lhs = &k[i] * &f[j];
            let rhs = &f[j] * &k[i] * rc(qi.q().powi(-aij as i32));
            record(&lhs, &rhs);
            // [E_i, F_j] = δ_ij (K_i − K_i⁻¹)/(q_i − q_i⁻¹)
            let lhs = &e[i] * &f[j] - &f[j] * &e[i];
            let rhs = if i == j {
                qh[i].clone()
            } else {
                CMat::zeros(lhs.nrows(), lhs.ncols())
            };
            record(&lhs, &rhs);
        }
    }
    // quantum Serre relations
    for i in 0..r {
        let qi = qp.root_param(cd.symmetrizers[i]);
        for j in 0..r {
            if i == j {
                continue;
            }
            let n = (1 - cd.cartan_matrix[i][j]) as u64;
            let dim = e[i].nrows();
            let mut serre_e = CMat::zeros(dim, dim);
            let mut serre_f = CMat::zeros(dim, dim);
            for kk in 0..=n {
                let sign = if kk % 2 == 0 { 1.0 } else { -1.0 };
                let coeff = rc(sign * qi.q_binomial(n, kk));
                serre_e += pow_mat(&e[i], (n - kk) as usize) * &e[j] * pow_mat(&e[i], kk as usize) * coeff;
                serre_f += pow_mat(&f[i], (n - kk) as usize) * &f[j] * pow_mat(&f[i], kk as usize) * coeff;
            }
            let zero = CMat::zeros(dim, dim);
            record(&serre_e, &zero);
            record(&serre_f, &zero);
        }
    }
    // *-structure: E_i = K_i F_i†
    for i in 0..r {
        let lhs = &k[i] * dagger(&f[i]);
        record(&lhs, &e[i]);
    }
    worst
}

fn pow_mat(m: &CMat, n: usize) -> CMat {
    let mut out = CMat::identity(m.nrows(), m.ncols());
    for _ in 0..n {
        out = &out * m;
    }
    out
}

/// Build the irreducible module of highest weight `lambda` at parameter `qp`.
pub fn build_irrep(cd: &Arc<CartanData>, qp: QParam, lambda: &Weight) -> Result<IrrepModule> {
    if !lambda.is_dominant() {
        return Err(Error::NonDominantWeight(lambda.0.clone()));
    }
    let rank = cd.rank;
    let q = qp.q();
    let expected_dim = cd.weyl_dim(lambda)? as usize;

    let mut weights: Vec<Weight> = vec![lambda.clone()];
    let mut levels: Vec<Vec<usize>> = vec![vec![0]];
    // sparse F entries per generator: (row, col) -> value
    let mut f_entries: Vec<HashMap<(usize, usize), f64>> = vec![HashMap::new(); rank];

    // E[u, w] = q^{d_i · wt(u)_i} F_i[w, u]
    let e_entry = |f_entries: &Vec<HashMap<(usize, usize), f64>>,
                   weights: &Vec<Weight>,
                   i: usize,
                   u: usize,
                   w: usize| {
        f_entries[i]
            .get(&(w, u))
            .map(|&fv| q.powi((cd.symmetrizers[i] * weights[u].coroot_pairing(i)) as i32) * fv)
            .unwrap_or(0.0)
    };

    while weights.len() < expected_dim {
        let prev_level = levels.len() - 1;
        let current: Vec<usize> = levels[prev_level].clone();
        let below: Vec<usize> = if prev_level == 0 {
            Vec::new()
        } else {
            levels[prev_level - 1].clone()
        };
        // candidates F_i v, grouped by target weight
        let mut groups: BTreeMap<Weight, Vec<(usize, usize)>> = BTreeMap::new();
        for &v in &current {
            for i in 0..rank {
                let w = weights[v].sub(&cd.alpha(i));
                groups.entry(w).or_default().push((i, v));
            }
        }

        // Gram matrices for every weight group of this level; the null cut is
        // scaled by the largest diagonal across the whole level so that fully
        // null groups do not resurrect their own rounding noise.
        let mut grams: BTreeMap<&Weight, Vec<Vec<f64>>> = BTreeMap::new();
        let mut level_max_diag = 1.0f64;
        for (wt, cands) in &groups {
            let m = cands.len();
            let mut g = vec![vec![0.0f64; m]; m];
            for (a, &(ia, va)) in cands.iter().enumerate() {
                for (b, &(jb, wb)) in cands.iter().enumerate() {
                    let mut val = 0.0;
                    let pref = q.powi(-(cd.symmetrizers[ia] * weights[va].coroot_pairing(ia)) as i32);
                    for &u in &below {
                        let ev = e_entry(&f_entries, &weights, ia, u, wb);
                        if ev != 0.0 {
                            if let Some(&fv) = f_entries[jb].get(&(va, u)) {
                                val += pref * ev * fv;
                            }
                        }
                    }
                    if ia == jb && va == wb {
                        let qi = qp.root_param(cd.symmetrizers[ia]);
                        let mw = weights[wb].coroot_pairing(ia);
                        val += qi.q_integer(mw)
                            * q.powi(-(cd.symmetrizers[ia] * mw) as i32);
                    }
                    g[a][b] = val;
                }
            }
            for a in 0..m {
                for b in (a + 1)..m {
                    let s = 0.5 * (g[a][b] + g[b][a]);
                    g[a][b] = s;
                    g[b][a] = s;
                }
                level_max_diag = level_max_diag.max(g[a][a]);
            }
            grams.insert(wt, g);
        }
        let cut = tol::NULL_CUT * level_max_diag;

        let mut new_level: Vec<usize> = Vec::new();
        for (wt, cands) in &groups {
            let m = cands.len();
            let g = &grams[wt];

            // Gram-Schmidt in candidate order against the abstract Gram
            let mut retained: Vec<Vec<f64>> = Vec::new(); // coefficient rows over candidates
            let gram_ip = |x: &[f64], y: &[f64]| -> f64 {
                let mut s = 0.0;
                for a in 0..m {
                    if x[a] == 0.0 {
                        continue;
                    }
                    for b in 0..m {
                        s += x[a] * y[b] * g[a][b];
                    }
                }
                s
            };
            for a in 0..m {
                let mut x = vec![0.0; m];
                x[a] = 1.0;
                for _pass in 0..2 {
                    for rvec in &retained {
                        let c = gram_ip(rvec, &x);
                        for b in 0..m {
                            x[b] -= c * rvec[b];
                        }
                    }
                }
                let nn = gram_ip(&x, &x);
                if nn < -cut {
                    return Err(Error::GramNegative { value: nn });
                }
                if nn > cut {
                    let inv = 1.0 / nn.sqrt();
                    for b in 0..m {
                        x[b] *= inv;
                    }
                    retained.push(x);
                }
            }

            for z in &retained {
                let new_idx = weights.len();
                weights.push(wt.clone());
                new_level.push(new_idx);
                // F_j[new, w] = Σ_a z_a G[a, (j,w)]
                for (b, &(jb, wb)) in cands.iter().enumerate() {
                    let mut entry = 0.0;
                    for a in 0..m {
                        entry += z[a] * g[a][b];
                    }
                    if entry.abs() > 1e-300 {
                        f_entries[jb].insert((new_idx, wb), entry);
                    }
                }
            }
        }

        if new_level.is_empty() {
            break;
        }
        levels.push(new_level);
    }

    let dim = weights.len();
    if dim != expected_dim {
        return Err(Error::DimensionMismatch(format!(
            "module construction for {lambda} at q={q} produced dim {dim}, Weyl dimension is {expected_dim}"
        )));
    }

    let mut f_mat = Vec::with_capacity(rank);
    let mut k_mat = Vec::with_capacity(rank);
    for i in 0..rank {
        let mut fm = CMat::zeros(dim, dim);
        for (&(r0, c0), &v) in &f_entries[i] {
            fm[(r0, c0)] = rc(v);
        }
        f_mat.push(fm);
        let km = CMat::from_fn(dim, dim, |r0, c0| {
            if r0 == c0 {
                rc(q.powi((cd.symmetrizers[i] * weights[r0].coroot_pairing(i)) as i32))
            } else {
                rc(0.0)
            }
        });
        k_mat.push(km);
    }
    let e_mat: Vec<CMat> = (0..rank).map(|i| &k_mat[i] * dagger(&f_mat[i])).collect();

    Ok(IrrepModule {
        cd: cd.clone(),
        qp,
        highest_weight: lambda.clone(),
        dim,
        weights,
        levels,
        e_mat,
        f_mat,
        k_mat,
        hw_index: 0,
    })
}

/// Generator matrices of the deformed coproduct action on `V_a ⊗ V_b`.
#[derive(Debug, Clone)]
pub struct TensorRep {
    pub qp: QParam,
    pub e: Vec<CMat>,
    pub f: Vec<CMat>,
    pub k: Vec<CMat>,
    pub weights: Vec<Weight>,
    pub dims: (usize, usize),
}

impl TensorRep {
    pub fn qh_mat(&self, cd: &CartanData, i: usize) -> CMat {
        let qi = self.qp.root_param(cd.symmetrizers[i]);
        let n = self.weights.len();
        CMat::from_fn(n, n, |r, c| {
            if r == c {
                rc(qi.q_integer(self.weights[r].coroot_pairing(i)))
            } else {
                rc(0.0)
            }
        })
    }
}

/// Realize `Δ(E_i) = E_i⊗1 + K_i⊗E_i`, `Δ(F_i) = F_i⊗K_i⁻¹ + 1⊗F_i`,
/// `Δ(K_i) = K_i⊗K_i` on the product space.
pub fn tensor_action(a: &IrrepModule, b: &IrrepModule) -> Result<TensorRep> {
    if a.q() != b.q() {
        return Err(Error::ModuleMismatch(format!(
            "tensor factors at different q: {} vs {}",
            a.q(),
            b.q()
        )));
    }
    if a.cd.lie_type != b.cd.lie_type {
        return Err(Error::ModuleMismatch(
            "tensor factors over different Cartan data".into(),
        ));
    }
    let rank = a.cd.rank;
    let (da, db) = (a.dim, b.dim);
    let ia = linalg::identity(da);
    let ib = linalg::identity(db);
    let mut e = Vec::with_capacity(rank);
    let mut f = Vec::with_capacity(rank);
    let mut k = Vec::with_capacity(rank);
    for i in 0..rank {
        let k_inv = CMat::from_fn(db, db, |r, c| {
            if r == c {
                rc(1.0) / b.k_mat[i][(r, c)]
            } else {
                rc(0.0)
            }
        });
        e.push(kron(&a.e_mat[i], &ib) + kron(&a.k_mat[i], &b.e_mat[i]));
        f.push(kron(&a.f_mat[i], &k_inv) + kron(&ia, &b.f_mat[i]));
        k.push(kron(&a.k_mat[i], &b.k_mat[i]));
    }
    let mut weights = Vec::with_capacity(da * db);
    for p in 0..da {
        for s in 0..db {
            weights.push(a.weights[p].add(&b.weights[s]));
        }
    }
    Ok(TensorRep {
        qp: a.qp,
        e,
        f,
        k,
        weights,
        dims: (da, db),
    })
}

/// One isotypic copy inside a tensor product.
#[derive(Debug, Clone)]
pub struct CGComponent {
    pub eta: Weight,
    /// Isometry `V_η → V_λ ⊗ V_ν` in the orthonormal module bases.
    pub isometry: CMat,
}

/// Full decomposition of `V_λ ⊗ V_ν` into irreducibles.
#[derive(Debug, Clone)]
pub struct CGDecomposition {
    pub q: f64,
    pub source: (Weight, Weight),
    pub components: Vec<CGComponent>,
}

impl CGDecomposition {
    /// Projection onto the η-isotypic subspace (all multiplicity copies).
    pub fn isotypic_projection(&self, eta: &Weight) -> CMat {
        let d = self.components[0].isometry.nrows();
        let mut p = CMat::zeros(d, d);
        for comp in &self.components {
            if &comp.eta == eta {
                p += &comp.isometry * dagger(&comp.isometry);
            }
        }
        p
    }

    pub fn etas(&self) -> Vec<Weight> {
        let mut seen: Vec<Weight> = Vec::new();
        for c in &self.components {
            if !seen.contains(&c.eta) {
                seen.push(c.eta.clone());
            }
        }
        seen
    }
}

/// Decompose `V_a ⊗ V_b` by locating highest weight vectors (joint kernel of
/// the raised action per weight space) and extending each to an isometric
/// copy with the abstract module's normalization.
pub fn cg_decompose(a: &IrrepModule, b: &IrrepModule, ctx: &Context) -> Result<CGDecomposition> {
    let trep = tensor_action(a, b)?;
    let total = a.dim * b.dim;
    let rank = a.cd.rank;

    // product indices grouped by weight
    let mut groups: BTreeMap<Weight, Vec<usize>> = BTreeMap::new();
    for (idx, w) in trep.weights.iter().enumerate() {
        groups.entry(w.clone()).or_default().push(idx);
    }
    let mut dominant: Vec<Weight> = groups
        .keys()
        .filter(|w| w.is_dominant())
        .cloned()
        .collect();
    dominant.sort_by(weight_order);
    dominant.reverse(); // scan from the top

    let mut components: Vec<CGComponent> = Vec::new();
    for mu in &dominant {
        let cols = &groups[mu];
        // stacked raised action restricted to this weight space
        let mut stacked = CMat::zeros(rank * total, cols.len());
        for (cidx, &gcol) in cols.iter().enumerate() {
            for i in 0..rank {
                for r in 0..total {
                    stacked[(i * total + r, cidx)] = trep.e[i][(r, gcol)];
                }
            }
        }
        let kernel = linalg::kernel_onb(&stacked, 1e-7);
        if kernel.is_empty() {
            continue;
        }
        let module_eta = ctx.module(a.q(), mu)?;
        for hw_local in kernel {
            let mut hw = CVec::zeros(total);
            for (cidx, &gcol) in cols.iter().enumerate() {
                hw[gcol] = hw_local[cidx];
            }
            let isometry = extend_highest_weight(&trep.f, &hw, &module_eta)?;
            components.push(CGComponent {
                eta: mu.clone(),
                isometry,
            });
        }
    }

    components.sort_by(|x, y| weight_order(&x.eta, &y.eta));
    let found: usize = components.iter().map(|c| c.isometry.ncols()).sum();
    if found != total {
        return Err(Error::MultiplicityDefect(
            a.highest_weight.0.iter().chain(&b.highest_weight.0).copied().collect(),
        ));
    }

    // verify isometry and intertwining residuals
    for comp in &components {
        let p = &comp.isometry;
        let defect = linalg::frob(&(dagger(p) * p - linalg::identity(p.ncols())));
        if defect > tol::CG {
            return Err(Error::MultiplicityDefect(comp.eta.0.clone()));
        }
        let m_eta = ctx.module(a.q(), &comp.eta)?;
        for i in 0..rank {
            for (name, big, small) in [
                ("E", &trep.e[i], &m_eta.e_mat[i]),
                ("F", &trep.f[i], &m_eta.f_mat[i]),
                ("K", &trep.k[i], &m_eta.k_mat[i]),
            ] {
                let resid = max_abs(&(big * p - p * small));
                let scale = f64::max(1.0, max_abs(big));
                if resid / scale > tol::CG {
                    return Err(Error::IntertwinerResidual {
                        gen: format!("{name}_{i} on component {}", comp.eta),
                        residual: resid / scale,
                    });
                }
            }
        }
    }

    Ok(CGDecomposition {
        q: a.q(),
        source: (a.highest_weight.clone(), b.highest_weight.clone()),
        components,
    })
}

/// Extend a normalized highest weight vector to an isometric embedding of
/// `module` into the space the lowering operators `f_ops` act on, matching
/// the module's basis normalization level by level.
pub fn extend_highest_weight(
    f_ops: &[CMat],
    hw: &CVec,
    module: &IrrepModule,
) -> Result<CMat> {
    let n = hw.len();
    let rank = f_ops.len();
    let mut cols: Vec<CVec> = vec![CVec::zeros(n); module.dim];
    let norm = hw.norm();
    cols[module.hw_index] = hw / rc(norm);

    for lvl in 0..module.levels.len().saturating_sub(1) {
        let cur = &module.levels[lvl];
        let nxt = &module.levels[lvl + 1];
        // images F̂_i p_m  and module coefficients (F_i)_{m', m}
        let mut img = CMat::zeros(n, rank * cur.len());
        let mut coef = CMat::zeros(nxt.len(), rank * cur.len());
        for (ci, &m) in cur.iter().enumerate() {
            for i in 0..rank {
                let v = &f_ops[i] * &cols[m];
                let col = i * cur.len() + ci;
                img.column_mut(col).copy_from(&v);
                for (ri, &mp) in nxt.iter().enumerate() {
                    coef[(ri, col)] = module.f_mat[i][(mp, m)];
                }
            }
        }
        // X · coef = img  ⇒  X = img coef† (coef coef†)⁻¹
        let gram = &coef * dagger(&coef);
        let inv = gram.clone().try_inverse().ok_or_else(|| {
            Error::MultiplicityDefect(module.highest_weight.0.clone())
        })?;
        let x = &img * dagger(&coef) * inv;
        for (ri, &mp) in nxt.iter().enumerate() {
            cols[mp] = CVec::from(x.column(ri));
        }
    }

    let mut out = CMat::zeros(n, module.dim);
    for (j, c) in cols.iter().enumerate() {
        out.column_mut(j).copy_from(c);
    }
    Ok(out)
}

/// `(π_a ⊗ π_b)(ℛ_q)` for rank one, via the finite series
/// `ℛ = q^{t₀} Σ_n c_n Fⁿ ⊗ Eⁿ` with `c_n = q^{n(n−1)/2}(q−q⁻¹)ⁿ/[n]_q!`,
/// where `q^{t₀}` scales a `(μ, μ′)`-weight vector by `q^{(μ,μ′)}`.
///
/// The intertwining `R Δ(X) = Δ^op(X) R` is checked before returning; a
/// failure signals a convention mismatch and is reported as an error.
pub fn r_matrix_block(a: &IrrepModule, b: &IrrepModule) -> Result<CMat> {
    if a.cd.rank != 1 {
        return Err(Error::ModuleMismatch(
            "universal R-matrix blocks are only provided for rank one".into(),
        ));
    }
    if a.q() != b.q() {
        return Err(Error::ModuleMismatch("R-matrix factors at different q".into()));
    }
    let qp = a.qp;
    let q = qp.q();
    let (da, db) = (a.dim, b.dim);
    let total = da * db;

    let mut series = linalg::identity(total);
    let mut f_pow = linalg::identity(da);
    let mut e_pow = linalg::identity(db);
    let mut n = 0u64;
    loop {
        n += 1;
        f_pow = &f_pow * &a.f_mat[0];
        e_pow = &e_pow * &b.e_mat[0];
        if max_abs(&f_pow) < 1e-300 || max_abs(&e_pow) < 1e-300 {
            break;
        }
        let c_n = q.powf((n * (n - 1)) as f64 / 2.0) * (q - 1.0 / q).powi(n as i32)
            / qp.q_factorial(n);
        if c_n == 0.0 {
            continue; // q = 1 kills all higher terms
        }
        series += kron(&f_pow, &e_pow) * rc(c_n);
    }

    let mut r = CMat::zeros(total, total);
    for p in 0..da {
        for s in 0..db {
            let row = p * db + s;
            let exp = a.cd.weight_form(&a.weights[p], &b.weights[s]).unwrap();
            let scale = rc(qp.pow_rational(exp));
            for cidx in 0..total {
                r[(row, cidx)] = scale * series[(row, cidx)];
            }
        }
    }

    // intertwining self-test against the opposite coproduct
    let trep = tensor_action(a, b)?;
    let trep_op = tensor_action(b, a)?;
    let to_ba = flip(da, db);
    let to_ab = flip(db, da);
    for (name, x_ab, x_ba) in [
        ("E", &trep.e[0], &trep_op.e[0]),
        ("F", &trep.f[0], &trep_op.f[0]),
        ("K", &trep.k[0], &trep_op.k[0]),
    ] {
        let delta_op = &to_ab * x_ba * &to_ba;
        let lhs = &r * x_ab;
        let rhs = &delta_op * &r;
        let scale = f64::max(1.0, max_abs(&lhs).max(max_abs(&rhs)));
        let resid = max_abs(&(lhs - rhs)) / scale;
        if resid > tol::R_SELF_TEST {
            return Err(Error::ConventionSelfTest {
                gen: name.into(),
                residual: resid,
            });
        }
    }
    Ok(r)
}

/// `q^t` on the classical carrier `V_λ ⊗ V_ν`: the scalar
/// `q^{(c_η − c_λ − c_ν)/2}` on each isotypic component, `c_μ = (μ, μ+2ρ)`.
pub fn q_exp_t(cg_classical: &CGDecomposition, cd: &CartanData, qp: QParam) -> Result<CMat> {
    if cg_classical.q != 1.0 {
        return Err(Error::ModuleMismatch(
            "q_exp_t expects the classical (q=1) decomposition".into(),
        ));
    }
    let (lam, nu) = &cg_classical.source;
    let c_l = cd.casimir_scalar(lam)?;
    let c_n = cd.casimir_scalar(nu)?;
    let d = cg_classical.components[0].isometry.nrows();
    let mut out = CMat::zeros(d, d);
    for comp in &cg_classical.components {
        let c_e = cd.casimir_scalar(&comp.eta)?;
        let exp = (c_e - c_l - c_n) / num_rational::Rational64::from_integer(2);
        let s = rc(qp.pow_rational(exp));
        out += &comp.isometry * dagger(&comp.isometry) * s;
    }
    Ok(out)
}

/// Restriction of a module along the rank-one embedding attached to the
/// simple root `i`: the triple `(E_i, F_i, K_i)` viewed as a representation
/// of the rank-one algebra at parameter `q^{d_i}`.
#[derive(Debug, Clone)]
pub struct RankOneRep {
    pub qp: QParam,
    pub e: CMat,
    pub f: CMat,
    pub k: CMat,
    /// sl2-weights of the basis (coroot pairings with `α_i`).
    pub sl2_weights: Vec<i64>,
}

pub fn rank_one_restrict(cd: &CartanData, i: usize, m: &IrrepModule) -> Result<RankOneRep> {
    if i >= cd.rank {
        return Err(Error::DimensionMismatch(format!(
            "simple-root index {i} out of range for rank {}",
            cd.rank
        )));
    }
    Ok(RankOneRep {
        qp: m.qp.root_param(cd.symmetrizers[i]),
        e: m.e_mat[i].clone(),
        f: m.f_mat[i].clone(),
        k: m.k_mat[i].clone(),
        sl2_weights: m.weights.iter().map(|w| w.coroot_pairing(i)).collect(),
    })
}

impl RankOneRep {
    /// Rank-one defining-relation residual at the restricted parameter.
    pub fn relations_residual(&self) -> f64 {
        let cd = Arc::new(CartanData::new(crate::cartan::LieType::A1));
        let n = self.e.nrows();
        let qh = CMat::from_fn(n, n, |r, c| {
            if r == c {
                rc(self.qp.q_integer(self.sl2_weights[r]))
            } else {
                rc(0.0)
            }
        });
        relations_residual_parts(
            &cd,
            self.qp,
            &[self.e.clone()],
            &[self.f.clone()],
            &[self.k.clone()],
            &[qh],
        )
    }
}

/// Convenience: the matrix entry scale of a complex matrix list.
pub fn generator_scale(mats: &[CMat]) -> f64 {
    mats.iter().map(max_abs).fold(1.0, f64::max)
}

#[allow(unused)]
fn complex_zero() -> Complex64 {
    c64(0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::LieType;

    fn ctx(t: LieType) -> Context {
        Context::new(CartanData::new(t))
    }

    fn w(coords: &[i64]) -> Weight {
        Weight(coords.to_vec())
    }

    #[test]
    fn a1_classical_spin_one_ladder() {
        let c = ctx(LieType::A1);
        let m = c.module(1.0, &w(&[2])).unwrap();
        assert_eq!(m.dim, 3);
        let s = 2.0f64.sqrt();
        assert!((m.f_mat[0][(1, 0)].re - s).abs() < 1e-14);
        assert!((m.f_mat[0][(2, 1)].re - s).abs() < 1e-14);
        assert!(m.relations_residual() < 1e-13);
    }

    #[test]
    fn a1_spin_half_norm_before_normalization() {
        // ‖F ξ‖² = q⁻¹, so the normalized lowering entry is q^{-1/2}
        for &q in &[0.5, 1.0, 1.7, 2.0] {
            let c = ctx(LieType::A1);
            let m = c.module(q, &w(&[1])).unwrap();
            assert_eq!(m.dim, 2);
            assert!((m.f_mat[0][(1, 0)].re - q.powf(-0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn a2_fundamental_weights() {
        let c = ctx(LieType::A2);
        let m = c.module(1.0, &w(&[1, 0])).unwrap();
        assert_eq!(m.dim, 3);
        assert_eq!(m.weights[0], w(&[1, 0]));
        assert_eq!(m.weights[1], w(&[-1, 1]));
        assert_eq!(m.weights[2], w(&[0, -1]));
    }

    #[test]
    fn relations_hold_across_types_and_q() {
        for &q in &[0.5, 1.0, 2.0] {
            let c = ctx(LieType::A1);
            for mcoord in 1..=6 {
                let m = c.module(q, &w(&[mcoord])).unwrap();
                assert!(m.relations_residual() < 1e-12, "A1 m={mcoord} q={q}");
            }
        }
        let c = ctx(LieType::A2);
        for lam in [w(&[1, 0]), w(&[0, 1]), w(&[1, 1])] {
            let m = c.module(1.3, &lam).unwrap();
            assert!(m.relations_residual() < 1e-12, "A2 {lam}");
        }
        let c = ctx(LieType::B2);
        for lam in [w(&[1, 0]), w(&[0, 1])] {
            let m = c.module(0.8, &lam).unwrap();
            assert!(m.relations_residual() < 1e-12, "B2 {lam}");
        }
        let c = ctx(LieType::G2);
        let m = c.module(1.2, &w(&[0, 1])).unwrap();
        assert_eq!(m.dim, 7);
        assert!(m.relations_residual() < 1e-12, "G2 short fundamental");
    }

    #[test]
    fn dimension_is_q_independent() {
        let c = ctx(LieType::A2);
        for &q in &[0.5, 1.0, 2.0] {
            for lam in CartanData::new(LieType::A2).truncation_set(1) {
                let m = c.module(q, &lam).unwrap();
                assert_eq!(m.dim as u64, c.cd.weyl_dim(&lam).unwrap());
            }
        }
    }

    #[test]
    fn k_beta_acts_by_weight_pairing() {
        let c = ctx(LieType::A1);
        let m = c.module(1.5, &w(&[3])).unwrap();
        let rho = c.cd.rho();
        let k = m.k_power(&rho);
        for j in 0..m.dim {
            let expect = m
                .qp
                .pow_rational(c.cd.weight_form(&rho, &m.weights[j]).unwrap());
            assert!((k[(j, j)].re - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn tensor_action_properties() {
        let c = ctx(LieType::A1);
        let m = c.module(1.3, &w(&[1])).unwrap();
        let t = tensor_action(&m, &m).unwrap();
        // Δ(K) eigenvalue on ξ⊗ξ is q^{(α, λ+ν)}
        let expect = 1.3f64.powi(2);
        assert!((t.k[0][(0, 0)].re - expect).abs() < 1e-14);
        // relations on the product space
        let qh = vec![t.qh_mat(&c.cd, 0)];
        let resid = relations_residual_parts(&c.cd, t.qp, &t.e, &t.f, &t.k, &qh);
        assert!(resid < 1e-12, "residual {resid}");
        // classical coproduct is primitive at q = 1
        let m1 = c.module(1.0, &w(&[1])).unwrap();
        let t1 = tensor_action(&m1, &m1).unwrap();
        let prim = kron(&m1.e_mat[0], &linalg::identity(2))
            + kron(&linalg::identity(2), &m1.e_mat[0]);
        assert!(max_abs(&(&t1.e[0] - prim)) < 1e-14);
    }

    #[test]
    fn cg_spin_half_squared() {
        let c = ctx(LieType::A1);
        for &q in &[0.5, 1.0, 2.0] {
            let m = c.module(q, &w(&[1])).unwrap();
            let cg = cg_decompose(&m, &m, &c).unwrap();
            let etas: Vec<_> = cg.components.iter().map(|comp| comp.eta.clone()).collect();
            assert_eq!(etas, vec![w(&[0]), w(&[2])]);
            assert_eq!(cg.components[0].isometry.ncols(), 1);
            assert_eq!(cg.components[1].isometry.ncols(), 3);
        }
    }

    #[test]
    fn cg_component_multiset_is_q_independent() {
        let c = ctx(LieType::A2);
        let collect = |q: f64| -> Vec<Weight> {
            let a = c.module(q, &w(&[1, 0])).unwrap();
            let b = c.module(q, &w(&[0, 1])).unwrap();
            cg_decompose(&a, &b, &c)
                .unwrap()
                .components
                .iter()
                .map(|comp| comp.eta.clone())
                .collect()
        };
        let at_07 = collect(0.7);
        let at_1 = collect(1.0);
        assert_eq!(at_07, at_1);
        assert_eq!(at_07, vec![w(&[0, 0]), w(&[1, 1])]);
    }

    #[test]
    fn cg_quantum_dimension_multiplicativity() {
        let c = ctx(LieType::A1);
        let qp = QParam::new(2.0).unwrap();
        let a = c.module(2.0, &w(&[2])).unwrap();
        let b = c.module(2.0, &w(&[3])).unwrap();
        let cg = cg_decompose(&a, &b, &c).unwrap();
        let lhs: f64 = cg
            .components
            .iter()
            .map(|comp| c.cd.q_weyl_dim(qp, &comp.eta).unwrap())
            .sum();
        let rhs = c.cd.q_weyl_dim(qp, &w(&[2])).unwrap() * c.cd.q_weyl_dim(qp, &w(&[3])).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn r_matrix_identity_cases() {
        let c = ctx(LieType::A1);
        // q = 1: identity on any block
        let m = c.module(1.0, &w(&[2])).unwrap();
        let r = r_matrix_block(&m, &m).unwrap();
        assert!(max_abs(&(&r - linalg::identity(9))) < 1e-13);
        // trivial factor: identity
        let m2 = c.module(1.8, &w(&[2])).unwrap();
        let triv = c.module(1.8, &w(&[0])).unwrap();
        let r = r_matrix_block(&m2, &triv).unwrap();
        assert!(max_abs(&(&r - linalg::identity(3))) < 1e-13);
    }

    #[test]
    fn r_matrix_hecke_eigenvalues() {
        let q: f64 = 2.0;
        let c = ctx(LieType::A1);
        let m = c.module(q, &w(&[1])).unwrap();
        let r = r_matrix_block(&m, &m).unwrap();
        let rhat = flip(2, 2) * &r;
        let e1 = q.sqrt();
        let e2 = -q.powf(-1.5);
        let hecke = (&rhat - linalg::identity(4) * rc(e1)) * (&rhat - linalg::identity(4) * rc(e2));
        assert!(max_abs(&hecke) < 1e-12);
        let trace: Complex64 = (0..4).map(|i| rhat[(i, i)]).sum();
        assert!((trace.re - (3.0 * e1 + e2)).abs() < 1e-12);
    }

    #[test]
    fn r_matrix_higher_terms_intertwine() {
        // exercises the n = 2 series term (both factors of dimension ≥ 3);
        // the intertwining self-test inside r_matrix_block is the assertion
        let c = ctx(LieType::A1);
        let m = c.module(1.7, &w(&[2])).unwrap();
        r_matrix_block(&m, &m).unwrap();
        let m3 = c.module(0.6, &w(&[3])).unwrap();
        let m2 = c.module(0.6, &w(&[2])).unwrap();
        r_matrix_block(&m3, &m2).unwrap();
    }

    #[test]
    fn q_exp_t_scalars() {
        let c = ctx(LieType::A1);
        let m1 = c.module(1.0, &w(&[1])).unwrap();
        let cg = cg_decompose(&m1, &m1, &c).unwrap();
        let qp = QParam::new(2.0).unwrap();
        let qt = q_exp_t(&cg, &c.cd, qp).unwrap();
        // eigenvalues 2^{1/2} on η = 2ω (dim 3) and 2^{-3/2} on η = 0
        let vals = linalg::hermitian_eigenvalues(&qt);
        assert!((vals[0] - 2.0f64.powf(-1.5)).abs() < 1e-12);
        for v in &vals[1..] {
            assert!((v - 2.0f64.sqrt()).abs() < 1e-12);
        }
        // q = 1 and trivial factors give the identity
        let qt1 = q_exp_t(&cg, &c.cd, QParam::new(1.0).unwrap()).unwrap();
        assert!(max_abs(&(qt1 - linalg::identity(4))) < 1e-13);
        let triv = c.module(1.0, &w(&[0])).unwrap();
        let cg0 = cg_decompose(&m1, &triv, &c).unwrap();
        let qt0 = q_exp_t(&cg0, &c.cd, qp).unwrap();
        assert!(max_abs(&(qt0 - linalg::identity(2))) < 1e-13);
    }

    #[test]
    fn rank_one_restriction() {
        // A1: the embedding is the identity
        let c = ctx(LieType::A1);
        let m = c.module(1.4, &w(&[2])).unwrap();
        let r1 = rank_one_restrict(&c.cd, 0, &m).unwrap();
        assert!(max_abs(&(&r1.e - &m.e_mat[0])) == 0.0);
        assert!(r1.relations_residual() < 1e-13);

        // A2 fundamental restricted to the first root: spin ½ ⊕ spin 0
        let c2 = ctx(LieType::A2);
        let m = c2.module(1.0, &w(&[1, 0])).unwrap();
        let r1 = rank_one_restrict(&c2.cd, 0, &m).unwrap();
        let mut sl2: Vec<i64> = r1.sl2_weights.clone();
        sl2.sort();
        assert_eq!(sl2, vec![-1, 0, 1]);

        // B2 with d_i = 2: relations at the squared parameter
        let c3 = ctx(LieType::B2);
        let m = c3.module(1.25, &w(&[0, 1])).unwrap();
        let r1 = rank_one_restrict(&c3.cd, 0, &m).unwrap();
        assert!((r1.qp.q() - 1.25f64.powi(2)).abs() < 1e-15);
        assert!(r1.relations_residual() < 1e-12);
    }

    #[test]
    fn extend_highest_weight_gives_isometry() {
        let c = ctx(LieType::A2);
        let a = c.module(0.9, &w(&[1, 0])).unwrap();
        let b = c.module(0.9, &w(&[1, 0])).unwrap();
        let cg = cg_decompose(&a, &b, &c).unwrap();
        // V_{ω1}⊗V_{ω1} = V_{2ω1} ⊕ V_{ω2}
        let etas = cg.etas();
        assert_eq!(etas, vec![w(&[0, 1]), w(&[2, 0])]);
        for comp in &cg.components {
            let p = &comp.isometry;
            assert!(linalg::frob(&(dagger(p) * p - linalg::identity(p.ncols()))) < 1e-11);
        }
    }
}
