//! Clifford algebra of the compact form, the spin lift of the adjoint
//! action, chirality, and the Dirac element.
//!
//! The orthonormal basis `{x_a}` with `(x_a, x_b) = −δ_ab` is assembled from
//! formal bracket words in the Chevalley generators: root vectors are built
//! by iterated brackets, their adjoints come from the formal `*`-structure
//! (`E ↔ F`, brackets reversed with a sign), and Gram–Schmidt runs against
//! the invariant form evaluated in a faithful classical representation with
//! the normalization `(α_i, α_j) = d_i a_ij`. Keeping the words around lets
//! every basis element be realized in an arbitrary module later, which is
//! what the Dirac operator blocks need.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cartan::{weight_order, CartanData, Weight};
use crate::linalg::{self, c64, dagger, kron, max_abs, rc, CMat, CVec};
use crate::uqg::{self, IrrepModule};
use crate::{Context, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    E,
    F,
    H,
}

/// Formal elements of the complexified Lie algebra.
#[derive(Debug, Clone)]
pub enum LieExpr {
    Gen(GenKind, usize),
    Bracket(Box<LieExpr>, Box<LieExpr>),
}

impl LieExpr {
    /// Formal adjoint: `E ↔ F`, `H` fixed, `[a,b]† = −[a†, b†]`.
    fn adjoint(&self) -> (Complex64, LieExpr) {
        match self {
            LieExpr::Gen(GenKind::E, i) => (rc(1.0), LieExpr::Gen(GenKind::F, *i)),
            LieExpr::Gen(GenKind::F, i) => (rc(1.0), LieExpr::Gen(GenKind::E, *i)),
            LieExpr::Gen(GenKind::H, i) => (rc(1.0), LieExpr::Gen(GenKind::H, *i)),
            LieExpr::Bracket(a, b) => {
                let (ca, ad) = a.adjoint();
                let (cb, bd) = b.adjoint();
                (-ca * cb, LieExpr::Bracket(Box::new(ad), Box::new(bd)))
            }
        }
    }

    fn evaluate(&self, e: &[CMat], f: &[CMat], h: &[CMat]) -> CMat {
        match self {
            LieExpr::Gen(GenKind::E, i) => e[*i].clone(),
            LieExpr::Gen(GenKind::F, i) => f[*i].clone(),
            LieExpr::Gen(GenKind::H, i) => h[*i].clone(),
            LieExpr::Bracket(a, b) => {
                let ma = a.evaluate(e, f, h);
                let mb = b.evaluate(e, f, h);
                &ma * &mb - &mb * &ma
            }
        }
    }
}

/// Complex combination of bracket words.
pub type LieWord = Vec<(Complex64, LieExpr)>;

fn word_adjoint(w: &LieWord) -> LieWord {
    w.iter()
        .map(|(c, x)| {
            let (s, xd) = x.adjoint();
            (c.conj() * s, xd)
        })
        .collect()
}

fn word_scale(w: &LieWord, s: Complex64) -> LieWord {
    w.iter().map(|(c, x)| (*c * s, x.clone())).collect()
}

fn word_add(a: &LieWord, b: &LieWord) -> LieWord {
    let mut out = a.clone();
    out.extend(b.iter().cloned());
    out
}

/// Evaluate a word in a classical module.
pub fn evaluate_word(w: &LieWord, m: &IrrepModule) -> CMat {
    assert!(m.qp.is_classical(), "Lie words act on classical modules");
    let h: Vec<CMat> = (0..m.cd.rank).map(|i| m.h_mat(i)).collect();
    let mut out = CMat::zeros(m.dim, m.dim);
    for (c, x) in w {
        out += x.evaluate(&m.e_mat, &m.f_mat, &h) * *c;
    }
    out
}

/// Orthonormal compact basis as formal words plus structure constants.
#[derive(Debug, Clone)]
pub struct CompactBasis {
    pub words: Vec<LieWord>,
    /// Structure constants `[x_a, x_b] = Σ_c structure[a][b][c] x_c`.
    pub structure: Vec<Vec<Vec<f64>>>,
    /// Expansions of the Chevalley generators over the basis.
    pub e_coeffs: Vec<Vec<Complex64>>,
    pub f_coeffs: Vec<Vec<Complex64>>,
    pub h_coeffs: Vec<Vec<Complex64>>,
}

/// Clifford data: gamma matrices on the spinor space, the spin lift of the
/// adjoint action, chirality (even dimension only), and the cubic term of
/// the Dirac element.
#[derive(Debug, Clone)]
pub struct CliffordData {
    pub cd: Arc<CartanData>,
    pub n: usize,
    pub dim_s: usize,
    pub gamma: Vec<CMat>,
    pub ad_tilde: Vec<CMat>,
    pub chirality: Option<CMat>,
    /// `s(c)` with `c = ½ Σ_a γ(x_a) ãd(x_a)`.
    pub cubic: CMat,
    pub basis: CompactBasis,
    /// Spin-space generator matrices of `s∘ãd` (a classical representation).
    pub e_spin: Vec<CMat>,
    pub f_spin: Vec<CMat>,
    pub h_spin: Vec<CMat>,
    /// Isotypic decomposition of the spinor space under `s∘ãd`:
    /// isometries `V_μ → S` matched to the abstract module bases.
    pub spin_components: Vec<(Weight, CMat)>,
}

fn dynkin_components(cd: &CartanData) -> Vec<usize> {
    let r = cd.rank;
    let mut comp = vec![usize::MAX; r];
    let mut next = 0;
    for start in 0..r {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            if comp[i] != usize::MAX {
                continue;
            }
            comp[i] = next;
            for j in 0..r {
                if j != i && cd.cartan_matrix[i][j] != 0 {
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Ideal of a root given in simple-root coordinates.
fn root_ideal(root: &[i64], comp: &[usize]) -> usize {
    root.iter()
        .enumerate()
        .find(|(_, &c)| c != 0)
        .map(|(i, _)| comp[i])
        .unwrap()
}

/// Build the Clifford data for the compact form of `g`.
pub fn build_clifford(ctx: &Context) -> Result<CliffordData> {
    let cd = ctx.cd.clone();
    let rank = cd.rank;

    // faithful classical representation: direct sum of the fundamentals
    let fundamentals: Vec<Arc<IrrepModule>> = (0..rank)
        .map(|i| ctx.module(1.0, &Weight::fundamental(rank, i)))
        .collect::<Result<_>>()?;
    let total: usize = fundamentals.iter().map(|m| m.dim).sum();
    let block_diag = |pick: &dyn Fn(&IrrepModule) -> CMat| -> CMat {
        let mut out = CMat::zeros(total, total);
        let mut at = 0;
        for m in &fundamentals {
            out.view_mut((at, at), (m.dim, m.dim)).copy_from(&pick(m));
            at += m.dim;
        }
        out
    };
    let e_big: Vec<CMat> = (0..rank)
        .map(|i| block_diag(&|m: &IrrepModule| m.e_mat[i].clone()))
        .collect();
    let f_big: Vec<CMat> = (0..rank)
        .map(|i| block_diag(&|m: &IrrepModule| m.f_mat[i].clone()))
        .collect();
    let h_big: Vec<CMat> = (0..rank)
        .map(|i| block_diag(&|m: &IrrepModule| m.h_mat(i)))
        .collect();
    let eval_big = |w: &LieWord| -> CMat {
        let mut out = CMat::zeros(total, total);
        for (c, x) in w {
            out += x.evaluate(&e_big, &f_big, &h_big) * *c;
        }
        out
    };

    // normalized invariant form: per-ideal rescaled trace form
    let comp = dynkin_components(&cd);
    let n_comp = comp.iter().max().unwrap() + 1;
    let mut scale = vec![0.0f64; n_comp];
    for i in 0..rank {
        let k = comp[i];
        if scale[k] == 0.0 {
            let tr_h2 = (&h_big[i] * &h_big[i]).trace().re;
            scale[k] = 2.0 / (cd.symmetrizers[i] as f64 * tr_h2);
        }
    }
    let bform = |a: &CMat, ia: usize, b: &CMat, ib: usize| -> Complex64 {
        if ia != ib {
            rc(0.0)
        } else {
            (a * b).trace() * rc(scale[ia])
        }
    };

    // root vectors by iterated brackets, in height order
    let mut root_words: Vec<LieWord> = Vec::new();
    for (ri, root) in cd.positive_roots.iter().enumerate() {
        let height: i64 = root.iter().sum();
        if height == 1 {
            let i = root.iter().position(|&c| c == 1).unwrap();
            root_words.push(vec![(rc(1.0), LieExpr::Gen(GenKind::E, i))]);
        } else {
            // find i with root − α_i also a positive root
            let mut found = None;
            for i in 0..rank {
                if root[i] == 0 {
                    continue;
                }
                let mut lower = root.clone();
                lower[i] -= 1;
                if let Some(pos) = cd.positive_roots.iter().position(|r| *r == lower) {
                    found = Some((i, pos));
                    break;
                }
            }
            let (i, pos) =
                found.ok_or_else(|| Error::Config(format!("root chain broken at {root:?}")))?;
            assert!(pos < ri);
            let word: LieWord = root_words[pos]
                .iter()
                .map(|(c, x)| {
                    (
                        *c,
                        LieExpr::Bracket(
                            Box::new(LieExpr::Gen(GenKind::E, i)),
                            Box::new(x.clone()),
                        ),
                    )
                })
                .collect();
            root_words.push(word);
        }
    }

    // candidate compact elements: i·h_j, then (e_β − e_β†), i(e_β + e_β†)
    let mut candidates: Vec<(LieWord, usize)> = Vec::new();
    for j in 0..rank {
        candidates.push((vec![(c64(0.0, 1.0), LieExpr::Gen(GenKind::H, j))], comp[j]));
    }
    for (ri, root) in cd.positive_roots.iter().enumerate() {
        let eb = &root_words[ri];
        let ebd = word_adjoint(eb);
        let ideal = root_ideal(root, &comp);
        let y = word_add(eb, &word_scale(&ebd, rc(-1.0)));
        let z = word_scale(&word_add(eb, &ebd), c64(0.0, 1.0));
        candidates.push((y, ideal));
        candidates.push((z, ideal));
    }
    let n = candidates.len();
    debug_assert_eq!(n, rank + 2 * cd.positive_roots.len());

    // Gram–Schmidt on −B in candidate order
    let cand_mats: Vec<CMat> = candidates.iter().map(|(w, _)| eval_big(w)).collect();
    let mut words: Vec<LieWord> = Vec::new();
    let mut mats: Vec<CMat> = Vec::new();
    let mut ideals: Vec<usize> = Vec::new();
    for (idx, (w, ideal)) in candidates.iter().enumerate() {
        let mut word = w.clone();
        let mut mat = cand_mats[idx].clone();
        for _pass in 0..2 {
            for (bw, (bm, bi)) in words.iter().zip(mats.iter().zip(&ideals)) {
                // coefficient of the candidate along x_b under −B
                let c = -bform(&mat, *ideal, bm, *bi);
                if c.norm() > 0.0 {
                    word = word_add(&word, &word_scale(bw, -c));
                    mat -= bm * c;
                }
            }
        }
        let nn = -bform(&mat, *ideal, &mat, *ideal).re;
        if nn <= 1e-10 {
            return Err(Error::GramNegative { value: nn });
        }
        let inv = rc(1.0 / nn.sqrt());
        words.push(word_scale(&word, inv));
        mats.push(&mat * inv);
        ideals.push(*ideal);
    }
    assert_eq!(words.len(), n);

    // orthonormality check
    for a in 0..n {
        for b in 0..n {
            let v = -bform(&mats[a], ideals[a], &mats[b], ideals[b]);
            let target = if a == b { 1.0 } else { 0.0 };
            if (v.re - target).abs() > 1e-10 || v.im.abs() > 1e-10 {
                return Err(Error::ConventionSelfTest {
                    gen: format!("compact basis pairing ({a},{b})"),
                    residual: (v - rc(target)).norm(),
                });
            }
        }
    }

    // structure constants and closure check
    let mut structure = vec![vec![vec![0.0f64; n]; n]; n];
    for a in 0..n {
        for b in 0..n {
            let br = &mats[a] * &mats[b] - &mats[b] * &mats[a];
            let mut recon = CMat::zeros(total, total);
            for c in 0..n {
                let coeff = -bform(&br, ideals[a], &mats[c], ideals[c]);
                if coeff.im.abs() > 1e-10 {
                    return Err(Error::ConventionSelfTest {
                        gen: format!("structure constant ({a},{b},{c})"),
                        residual: coeff.im.abs(),
                    });
                }
                structure[a][b][c] = coeff.re;
                recon += &mats[c] * coeff;
            }
            if max_abs(&(&br - &recon)) > 1e-9 {
                return Err(Error::ConventionSelfTest {
                    gen: format!("bracket closure ({a},{b})"),
                    residual: max_abs(&(&br - &recon)),
                });
            }
        }
    }

    // generator expansions over the compact basis
    let expand = |mat: &CMat, ideal: usize| -> Vec<Complex64> {
        (0..n)
            .map(|a| {
                if ideals[a] == ideal {
                    -bform(mat, ideal, &mats[a], ideals[a])
                } else {
                    rc(0.0)
                }
            })
            .collect()
    };
    let mut e_coeffs = Vec::new();
    let mut f_coeffs = Vec::new();
    let mut h_coeffs = Vec::new();
    for i in 0..rank {
        e_coeffs.push(expand(&e_big[i], comp[i]));
        f_coeffs.push(expand(&f_big[i], comp[i]));
        h_coeffs.push(expand(&h_big[i], comp[i]));
    }

    // gamma matrices: Jordan-Wigner chains, γ(x_a) = i Σ_a with Σ_a² = 1
    let gamma = build_gammas(n);
    let dim_s = gamma[0].nrows();

    // spin lift ãd(x_a) = ¼ Σ_{i,c} structure[a][i][c] γ_i γ_c
    let mut ad_tilde = Vec::with_capacity(n);
    for a in 0..n {
        let mut m = CMat::zeros(dim_s, dim_s);
        for i in 0..n {
            for c in 0..n {
                let s = structure[a][i][c];
                if s != 0.0 {
                    m += &gamma[i] * &gamma[c] * rc(0.25 * s);
                }
            }
        }
        ad_tilde.push(m);
    }

    // chirality for even n
    let chirality = if n % 2 == 0 {
        let mut omega = linalg::identity(dim_s);
        for g in &gamma {
            omega = &omega * g;
        }
        let mut found = None;
        for cand in [rc(1.0), c64(0.0, 1.0)] {
            let chi = &omega * cand;
            let sq = &chi * &chi;
            if max_abs(&(&sq - linalg::identity(dim_s))) < 1e-10
                && linalg::hermiticity_defect(&chi) < 1e-10
            {
                found = Some(chi);
                break;
            }
        }
        Some(found.ok_or(Error::ConventionSelfTest {
            gen: "chirality".into(),
            residual: 1.0,
        })?)
    } else {
        None
    };

    // cubic term ½ Σ γ(x_a) ãd(x_a)
    let mut cubic = CMat::zeros(dim_s, dim_s);
    for a in 0..n {
        cubic += &gamma[a] * &ad_tilde[a] * rc(0.5);
    }

    // spin representation and its isotypic decomposition
    let lift = |coeffs: &[Complex64]| -> CMat {
        let mut m = CMat::zeros(dim_s, dim_s);
        for (a, c) in coeffs.iter().enumerate() {
            if c.norm() > 0.0 {
                m += &ad_tilde[a] * *c;
            }
        }
        m
    };
    let e_spin: Vec<CMat> = e_coeffs.iter().map(|c| lift(c)).collect();
    let f_spin: Vec<CMat> = f_coeffs.iter().map(|c| lift(c)).collect();
    let h_spin: Vec<CMat> = h_coeffs.iter().map(|c| lift(c)).collect();

    let basis = CompactBasis {
        words,
        structure,
        e_coeffs,
        f_coeffs,
        h_coeffs,
    };
    let mut cliff = CliffordData {
        cd,
        n,
        dim_s,
        gamma,
        ad_tilde,
        chirality,
        cubic,
        basis,
        e_spin,
        f_spin,
        h_spin,
        spin_components: Vec::new(),
    };
    cliff.spin_components = decompose_spin(ctx, &cliff)?;
    Ok(cliff)
}

fn build_gammas(n: usize) -> Vec<CMat> {
    let m = n / 2;
    let pauli_x = CMat::from_row_slice(2, 2, &[rc(0.0), rc(1.0), rc(1.0), rc(0.0)]);
    let pauli_y = CMat::from_row_slice(2, 2, &[rc(0.0), c64(0.0, -1.0), c64(0.0, 1.0), rc(0.0)]);
    let pauli_z = CMat::from_row_slice(2, 2, &[rc(1.0), rc(0.0), rc(0.0), rc(-1.0)]);
    let eye2 = CMat::identity(2, 2);
    let chain = |head: usize, op: &CMat| -> CMat {
        let mut out = CMat::from_element(1, 1, rc(1.0));
        for pos in 0..m.max(1) {
            let factor = if pos < head {
                &pauli_z
            } else if pos == head {
                op
            } else {
                &eye2
            };
            out = kron(&out, factor);
        }
        out
    };
    let mut sigmas = Vec::with_capacity(n);
    for a in 0..n {
        if a == n - 1 && n % 2 == 1 {
            sigmas.push(chain(m, &pauli_z)); // all-Z chain for odd n
        } else {
            let head = a / 2;
            let op = if a % 2 == 0 { &pauli_x } else { &pauli_y };
            sigmas.push(chain(head, op));
        }
    }
    sigmas.into_iter().map(|s| s * c64(0.0, 1.0)).collect()
}

/// Decompose the spinor space under `s∘ãd` into irreducible classical
/// modules, returning isometries matched to the abstract module bases.
fn decompose_spin(ctx: &Context, cliff: &CliffordData) -> Result<Vec<(Weight, CMat)>> {
    let rank = cliff.cd.rank;
    let dim_s = cliff.dim_s;
    let stacked = linalg::vstack(&cliff.e_spin);
    let kernel = linalg::kernel_onb(&stacked, 1e-7);
    if kernel.is_empty() {
        return Err(Error::UnsupportedSpinBlock(vec![]));
    }
    // split the joint kernel by h-weights
    let mut blocks: Vec<Vec<CVec>> = vec![kernel];
    for i in 0..rank {
        let mut refined = Vec::new();
        for block in &blocks {
            let k = block.len();
            let mut p = CMat::zeros(dim_s, k);
            for (j, v) in block.iter().enumerate() {
                p.column_mut(j).copy_from(v);
            }
            let small = dagger(&p) * &cliff.h_spin[i] * &p;
            let (vals, vecs) = linalg::hermitian_eigen(&small);
            let mut at = 0;
            while at < k {
                let mut end = at + 1;
                while end < k && (vals[end] - vals[at]).abs() < 1e-6 {
                    end += 1;
                }
                let cluster: Vec<CVec> = (at..end)
                    .map(|c| CVec::from(&p * vecs.column(c)))
                    .collect();
                refined.push(cluster);
                at = end;
            }
        }
        blocks = refined;
    }

    let mut components: Vec<(Weight, CMat)> = Vec::new();
    for block in &blocks {
        for v in block {
            let mut hw = v.clone();
            linalg::phase_normalize(&mut hw);
            let coords: Vec<i64> = (0..rank)
                .map(|i| {
                    let val = hw.dotc(&(&cliff.h_spin[i] * &hw)).re;
                    val.round() as i64
                })
                .collect();
            let mu = Weight(coords);
            if !mu.is_dominant() {
                return Err(Error::UnsupportedSpinBlock(mu.0.clone()));
            }
            let module = ctx.module(1.0, &mu)?;
            let iso = uqg::extend_highest_weight(&cliff.f_spin, &hw, &module)?;
            components.push((mu, iso));
        }
    }
    components.sort_by(|a, b| weight_order(&a.0, &b.0));
    let covered: usize = components.iter().map(|(_, p)| p.ncols()).sum();
    if covered != dim_s {
        return Err(Error::UnsupportedSpinBlock(vec![covered as i64]));
    }
    Ok(components)
}

impl CliffordData {
    /// Realize a compact basis element in a classical module.
    pub fn realize_x(&self, m: &IrrepModule, a: usize) -> CMat {
        evaluate_word(&self.basis.words[a], m)
    }

    /// `(π_λ ⊗ γ)(t) = −Σ_a π_λ(x_a) ⊗ γ(x_a)` (Hermitian).
    pub fn gamma_t_block(&self, m: &IrrepModule) -> CMat {
        let d = m.dim * self.dim_s;
        let mut out = CMat::zeros(d, d);
        for a in 0..self.n {
            out -= kron(&self.realize_x(m, a), &self.gamma[a]);
        }
        out
    }

    /// The Dirac element realized on `V_λ ⊗ S`:
    /// `(π_λ ⊗ s)(𝒟) = Σ_a π(x_a) ⊗ γ(x_a) + 1 ⊗ s(c)`.
    pub fn dirac_block(&self, m: &IrrepModule) -> CMat {
        let mut out = kron(&linalg::identity(m.dim), &self.cubic);
        for a in 0..self.n {
            out += kron(&self.realize_x(m, a), &self.gamma[a]);
        }
        out
    }

    /// Apply `ι ⊗ s∘ãd` to the second leg of a two-leg element given by
    /// blocks `(λ, ν) ↦ (π_λ ⊗ π_ν)(X)`: the ν-leg runs over the isotypic
    /// decomposition of the spinor space.
    pub fn lift_second_leg<G>(&self, dim_first: usize, mut block: G) -> Result<CMat>
    where
        G: FnMut(&Weight) -> Result<CMat>,
    {
        let d = dim_first * self.dim_s;
        let mut out = CMat::zeros(d, d);
        let eye = linalg::identity(dim_first);
        for (mu, p) in &self.spin_components {
            let b = block(mu)?;
            let emb = kron(&eye, p);
            out += &emb * &b * dagger(&emb);
        }
        Ok(out)
    }

    /// Blockwise extension of `s∘ãd` to an element `ω = (ω_λ)_λ`.
    pub fn ad_tilde_lift(&self, blocks: &BTreeMap<Weight, CMat>) -> Result<CMat> {
        let mut out = CMat::zeros(self.dim_s, self.dim_s);
        for (mu, p) in &self.spin_components {
            let b = blocks
                .get(mu)
                .ok_or_else(|| Error::UnsupportedSpinBlock(mu.0.clone()))?;
            out += p * b * dagger(p);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::LieType;

    fn cliff_for(t: LieType) -> (Context, CliffordData) {
        let ctx = Context::new(CartanData::new(t));
        let c = build_clifford(&ctx).unwrap();
        (ctx, c)
    }

    #[test]
    fn su2_clifford_relations() {
        let (_, c) = cliff_for(LieType::A1);
        assert_eq!(c.n, 3);
        assert_eq!(c.dim_s, 2);
        for i in 0..3 {
            let sq = &c.gamma[i] * &c.gamma[i];
            assert!(max_abs(&(&sq + linalg::identity(2))) < 1e-14);
            for j in (i + 1)..3 {
                let anti = &c.gamma[i] * &c.gamma[j] + &c.gamma[j] * &c.gamma[i];
                assert!(max_abs(&anti) < 1e-14);
            }
        }
        // recorded volume convention: γ(x_1)γ(x_2)γ(x_3) = +1
        let omega = &c.gamma[0] * &c.gamma[1] * &c.gamma[2];
        assert!(max_abs(&(&omega - linalg::identity(2))) < 1e-12);
    }

    #[test]
    fn su2_cubic_is_scalar() {
        let (_, c) = cliff_for(LieType::A1);
        let expect = 3.0 * 2.0f64.sqrt() / 4.0;
        let diff = &c.cubic - linalg::identity(2) * rc(expect);
        assert!(max_abs(&diff) < 1e-12, "cubic {:?}", c.cubic);
    }

    #[test]
    fn ad_tilde_is_a_homomorphism() {
        for t in [LieType::A1, LieType::A2] {
            let (_, c) = cliff_for(t);
            let mut worst = 0.0f64;
            for a in 0..c.n {
                for b in 0..c.n {
                    let lhs = &c.ad_tilde[a] * &c.ad_tilde[b] - &c.ad_tilde[b] * &c.ad_tilde[a];
                    let mut rhs = CMat::zeros(c.dim_s, c.dim_s);
                    for k in 0..c.n {
                        let sc = c.basis.structure[a][b][k];
                        if sc != 0.0 {
                            rhs += &c.ad_tilde[k] * rc(sc);
                        }
                    }
                    worst = worst.max(max_abs(&(lhs - rhs)));
                }
            }
            assert!(worst < 1e-10, "{t:?}: {worst}");
        }
    }

    #[test]
    fn su3_dimensions() {
        let (_, c) = cliff_for(LieType::A2);
        assert_eq!(c.n, 8);
        assert_eq!(c.dim_s, 16);
    }

    #[test]
    fn equivariance_of_gamma() {
        let (_, c) = cliff_for(LieType::A1);
        // γ([x,y]) = [ãd(x), γ(y)]
        let mut worst = 0.0f64;
        for a in 0..c.n {
            for b in 0..c.n {
                let mut lhs = CMat::zeros(c.dim_s, c.dim_s);
                for k in 0..c.n {
                    lhs += &c.gamma[k] * rc(c.basis.structure[a][b][k]);
                }
                let rhs = &c.ad_tilde[a] * &c.gamma[b] - &c.gamma[b] * &c.ad_tilde[a];
                worst = worst.max(max_abs(&(lhs - rhs)));
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn chirality_on_even_dimensional_compact_form() {
        let (_, c) = cliff_for(LieType::A1xA1);
        assert_eq!(c.n, 6);
        let chi = c.chirality.as_ref().unwrap();
        assert!(max_abs(&(chi * chi - linalg::identity(c.dim_s))) < 1e-12);
        assert!(linalg::hermiticity_defect(chi) < 1e-12);
        for g in &c.gamma {
            let anti = chi * g + g * chi;
            assert!(max_abs(&anti) < 1e-12);
        }
        assert!(cliff_for(LieType::A1).1.chirality.is_none());
    }

    #[test]
    fn spinor_space_decomposes_under_ad_tilde() {
        let (ctx, c) = cliff_for(LieType::A1);
        // su(2): the spinor space is the spin-½ module
        assert_eq!(c.spin_components.len(), 1);
        assert_eq!(c.spin_components[0].0, Weight(vec![1]));
        let p = &c.spin_components[0].1;
        assert!(linalg::unitarity_defect(p) < 1e-10);
        let m = ctx.module(1.0, &Weight(vec![1])).unwrap();
        for (big, small) in [(&c.e_spin[0], &m.e_mat[0]), (&c.f_spin[0], &m.f_mat[0])] {
            let resid = max_abs(&(big * p - p * small));
            assert!(resid < 1e-10);
        }
    }

    #[test]
    fn dirac_block_is_hermitian_and_invariant() {
        let (ctx, c) = cliff_for(LieType::A1);
        let m = ctx.module(1.0, &Weight(vec![1])).unwrap();
        let d = c.dirac_block(&m);
        assert!(linalg::hermiticity_defect(&d) < 1e-12);
        // invariance: [π(x)⊗1 + 1⊗ãd(x), D] = 0
        let mut worst = 0.0f64;
        for a in 0..c.n {
            let x_tot = kron(&c.realize_x(&m, a), &linalg::identity(c.dim_s))
                + kron(&linalg::identity(m.dim), &c.ad_tilde[a]);
            let comm = &x_tot * &d - &d * &x_tot;
            worst = worst.max(max_abs(&comm));
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn trivial_block_reduces_to_cubic() {
        let (ctx, c) = cliff_for(LieType::A1);
        let m0 = ctx.module(1.0, &Weight(vec![0])).unwrap();
        let d = c.dirac_block(&m0);
        assert!(max_abs(&(&d - &c.cubic)) < 1e-13);
    }

    #[test]
    fn compact_elements_are_antihermitian_in_any_module() {
        let (ctx, c) = cliff_for(LieType::A2);
        let m = ctx.module(1.0, &Weight(vec![1, 1])).unwrap();
        for a in 0..c.n {
            let x = c.realize_x(&m, a);
            assert!(max_abs(&(dagger(&x) + &x)) < 1e-10, "basis element {a}");
        }
    }
}
