//! Continuous families of `*`-isomorphisms onto the classical completion.
//!
//! For each highest weight the family is realized by unitaries
//! `u_λ^q : V_λ^q → V_λ`: a list of lowering monomials applied to the highest
//! weight vector is fixed once so that the resulting vectors form a basis at
//! q = 1, the same list is required to stay a basis over the whole grid,
//! Gram–Schmidt runs in the fixed order at every q, and `u_λ^q` maps the
//! q-orthonormal frame onto the q = 1 frame. The anchor `u_λ^1 = 1` holds
//! exactly, and conjugation carries weight spaces onto weight spaces, so the
//! `h`-generators are carried without any motion.

use std::collections::HashMap;

use crate::cartan::Weight;
use crate::linalg::{self, dagger, rc, CMat, CVec};
use crate::uqg::IrrepModule;
use crate::{Context, Error, Result};

/// Lowering monomial, applied right to left: `F_{i_1} … F_{i_k} ξ`.
pub type MultiIndex = Vec<usize>;

/// Per-(q, λ) unitaries realizing the family, anchored at the identity.
#[derive(Debug, Clone)]
pub struct IsomorphismFamily {
    pub q_grid: Vec<f64>,
    pub lambdas: Vec<Weight>,
    /// Retained monomial list per λ (the Gram–Schmidt gauge).
    pub monomials: HashMap<Weight, Vec<MultiIndex>>,
    /// `u_λ^q` keyed by (grid index, λ).
    pub unitaries: HashMap<(usize, Weight), CMat>,
}

/// Coordinates of `e_I = F_{i_1}…F_{i_k} ξ` in the module basis.
fn monomial_vector(m: &IrrepModule, index: &MultiIndex) -> CVec {
    let mut v = CVec::zeros(m.dim);
    v[m.hw_index] = rc(1.0);
    for &i in index.iter().rev() {
        v = &m.f_mat[i] * v;
    }
    v
}

/// Enumerate multi-indices in lexicographic order of (length, root indices)
/// and greedily keep those whose vectors extend a basis at q = 1.
fn select_monomials(m1: &IrrepModule) -> Vec<MultiIndex> {
    let rank = m1.cd.rank;
    let mut chosen: Vec<MultiIndex> = Vec::new();
    let mut chosen_vecs: Vec<CVec> = Vec::new();
    let mut frontier: Vec<MultiIndex> = vec![vec![]];
    while chosen.len() < m1.dim && !frontier.is_empty() {
        let mut next = Vec::new();
        for idx in &frontier {
            let v = monomial_vector(m1, idx);
            if v.norm() < 1e-12 {
                continue;
            }
            let mut resid = v.clone();
            for b in &chosen_vecs {
                let c = b.dotc(&resid);
                resid -= b * c;
            }
            if resid.norm() > 1e-8 * v.norm().max(1.0) {
                chosen.push(idx.clone());
                let n = resid.norm();
                chosen_vecs.push(resid / rc(n));
            }
            for i in 0..rank {
                let mut longer = vec![i];
                longer.extend_from_slice(idx);
                next.push(longer);
            }
        }
        frontier = next;
    }
    assert_eq!(chosen.len(), m1.dim, "monomial basis incomplete at q = 1");
    chosen
}

/// Build the family over `q_grid` for every weight in `lambda_set`.
///
/// The grid must contain 1. Fails with [`Error::BasisDegenerate`] if the
/// fixed monomial list stops being a basis at some grid point; the caller
/// must then refine the construction locally.
pub fn build_family(
    ctx: &Context,
    q_grid: &[f64],
    lambda_set: &[Weight],
) -> Result<IsomorphismFamily> {
    if !q_grid.contains(&1.0) {
        return Err(Error::Config("q grid must contain the anchor q = 1".into()));
    }
    let mut monomials = HashMap::new();
    let mut unitaries = HashMap::new();
    for lambda in lambda_set {
        let m1 = ctx.module(1.0, lambda)?;
        let list = select_monomials(&m1);
        for (qi, &q) in q_grid.iter().enumerate() {
            if q == 1.0 {
                unitaries.insert((qi, lambda.clone()), linalg::identity(m1.dim));
                continue;
            }
            let mq = ctx.module(q, lambda)?;
            let z1 = gs_frame(&m1, &list, q)?;
            let zq = gs_frame(&mq, &list, q)?;
            unitaries.insert((qi, lambda.clone()), &z1 * dagger(&zq));
        }
        monomials.insert(lambda.clone(), list);
    }
    Ok(IsomorphismFamily {
        q_grid: q_grid.to_vec(),
        lambdas: lambda_set.to_vec(),
        monomials,
        unitaries,
    })
}

/// Gram–Schmidt the monomial vectors in the fixed order; the columns form an
/// orthonormal frame. Degeneracy is judged on the normalized vectors (their
/// raw norms spread over many orders of magnitude in q without the basis
/// itself degenerating); the Gram determinant of the normalized family must
/// stay away from zero.
fn gs_frame(m: &IrrepModule, list: &[MultiIndex], q: f64) -> Result<CMat> {
    let mut vecs: Vec<CVec> = Vec::with_capacity(list.len());
    for idx in list {
        let v = monomial_vector(m, idx);
        let n = v.norm();
        if n < 1e-200 {
            return Err(Error::BasisDegenerate { q, det: 0.0 });
        }
        vecs.push(v / rc(n));
    }
    let gram = CMat::from_fn(list.len(), list.len(), |r, c| vecs[c].dotc(&vecs[r]));
    let vals = linalg::hermitian_eigenvalues(&gram);
    let det: f64 = vals.iter().product();
    let largest = vals.last().copied().unwrap_or(0.0);
    if vals.is_empty() || vals[0] <= 1e-10 * largest.max(1.0) {
        return Err(Error::BasisDegenerate { q, det });
    }
    let (basis, kept) = linalg::gram_schmidt(&vecs, 1e-10);
    if basis.len() != m.dim || kept.len() != list.len() {
        return Err(Error::BasisDegenerate { q, det });
    }
    let mut z = linalg::zeros(m.dim, m.dim);
    for (j, b) in basis.iter().enumerate() {
        z.column_mut(j).copy_from(b);
    }
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    E(usize),
    F(usize),
    H(usize),
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Generator::E(i) => write!(f, "E_{}", i + 1),
            Generator::F(i) => write!(f, "F_{}", i + 1),
            Generator::H(i) => write!(f, "h_{}", i + 1),
        }
    }
}

impl IsomorphismFamily {
    pub fn unitary(&self, qi: usize, lambda: &Weight) -> Result<&CMat> {
        self.unitaries
            .get(&(qi, lambda.clone()))
            .ok_or_else(|| Error::MissingBlock(lambda.0.clone(), vec![qi as i64]))
    }

    pub fn grid_index_of_one(&self) -> usize {
        self.q_grid.iter().position(|&q| q == 1.0).unwrap()
    }

    /// Conjugated generator `π_λ(φ^q(X))`.
    pub fn conjugated_generator(
        &self,
        ctx: &Context,
        qi: usize,
        lambda: &Weight,
        gen: Generator,
    ) -> Result<CMat> {
        let q = self.q_grid[qi];
        let m = ctx.module(q, lambda)?;
        let u = self.unitary(qi, lambda)?;
        let x = match gen {
            Generator::E(i) => m.e_mat[i].clone(),
            Generator::F(i) => m.f_mat[i].clone(),
            Generator::H(i) => m.h_mat(i),
        };
        Ok(u * x * dagger(u))
    }
}

/// Step moduli of the conjugated generators along the grid.
#[derive(Debug, Clone)]
pub struct ContinuityTable {
    pub lambda: Weight,
    pub rows: Vec<(Generator, Vec<f64>)>,
}

impl ContinuityTable {
    pub fn max_modulus(&self, gen: Generator) -> f64 {
        self.rows
            .iter()
            .find(|(g, _)| *g == gen)
            .map(|(_, steps)| steps.iter().copied().fold(0.0, f64::max))
            .unwrap_or(0.0)
    }

    pub fn overall_max(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|(_, s)| s.iter().copied())
            .fold(0.0, f64::max)
    }
}

/// Per-step operator-norm moduli `‖π(φ^{q_{k+1}}(X)) − π(φ^{q_k}(X))‖`
/// for every generator.
pub fn continuity_scan(
    ctx: &Context,
    fam: &IsomorphismFamily,
    lambda: &Weight,
) -> Result<ContinuityTable> {
    let rank = ctx.cd.rank;
    let mut gens = Vec::new();
    for i in 0..rank {
        gens.push(Generator::E(i));
        gens.push(Generator::F(i));
        gens.push(Generator::H(i));
    }
    let mut rows = Vec::new();
    for gen in gens {
        let mats: Vec<CMat> = (0..fam.q_grid.len())
            .map(|qi| fam.conjugated_generator(ctx, qi, lambda, gen))
            .collect::<Result<_>>()?;
        let steps: Vec<f64> = mats
            .windows(2)
            .map(|w| linalg::op_norm(&(&w[1] - &w[0])))
            .collect();
        rows.push((gen, steps));
    }
    Ok(ContinuityTable {
        lambda: lambda.clone(),
        rows,
    })
}

/// Compare two families on a common grid: returns the relating unitaries
/// `v_λ^q = u^{(2),q} u^{(1),q*}` with per-q global phase chosen to minimize
/// the distance to the previous grid point (anchored at q = 1), plus the
/// post-alignment step moduli.
pub fn compare_families(
    f1: &IsomorphismFamily,
    f2: &IsomorphismFamily,
    lambda: &Weight,
) -> Result<(Vec<CMat>, Vec<f64>)> {
    if f1.q_grid != f2.q_grid {
        return Err(Error::Config("families live on different grids".into()));
    }
    let n = f1.q_grid.len();
    let mut aligned: Vec<CMat> = Vec::with_capacity(n);
    for qi in 0..n {
        let u1 = f1.unitary(qi, lambda)?;
        let u2 = f2.unitary(qi, lambda)?;
        aligned.push(u2 * dagger(u1));
    }
    let anchor = f1.grid_index_of_one();
    let align_step = |aligned: &mut Vec<CMat>, target: usize, prev: usize| {
        let overlap: num_complex::Complex64 =
            (dagger(&aligned[target]) * &aligned[prev]).diagonal().iter().sum();
        if overlap.norm() > 1e-14 {
            let phase = overlap / rc(overlap.norm());
            aligned[target] = &aligned[target] * phase;
        }
    };
    for qi in (anchor + 1)..n {
        align_step(&mut aligned, qi, qi - 1);
    }
    for qi in (0..anchor).rev() {
        align_step(&mut aligned, qi, qi + 1);
    }
    let moduli: Vec<f64> = aligned
        .windows(2)
        .map(|w| linalg::op_norm(&(&w[1] - &w[0])))
        .collect();
    Ok((aligned, moduli))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{CartanData, LieType};
    use crate::uqg;
    use crate::QParam;

    fn w(coords: &[i64]) -> Weight {
        Weight(coords.to_vec())
    }

    fn grid(n: usize) -> Vec<f64> {
        crate::config::make_grid(0.5, 2.0, n).unwrap()
    }

    #[test]
    fn anchor_is_exact_identity() {
        let ctx = Context::new(CartanData::new(LieType::A1));
        let g = grid(5);
        let fam = build_family(&ctx, &g, &[w(&[1]), w(&[2])]).unwrap();
        let one = fam.grid_index_of_one();
        for lam in &fam.lambdas {
            let u = fam.unitary(one, lam).unwrap();
            assert_eq!(linalg::frob(&(u - linalg::identity(u.nrows()))), 0.0);
        }
    }

    #[test]
    fn unitarity_and_weight_preservation() {
        let ctx = Context::new(CartanData::new(LieType::A2));
        let g = grid(5);
        let lam = w(&[1, 1]);
        let fam = build_family(&ctx, &g, &[lam.clone()]).unwrap();
        for qi in 0..g.len() {
            let u = fam.unitary(qi, &lam).unwrap();
            assert!(linalg::unitarity_defect(u) < 1e-10);
            // u π^q(K_β) u* stays the same diagonal: weights are carried in order
            let mq = ctx.module(g[qi], &lam).unwrap();
            let k = mq.k_power(&ctx.cd.rho());
            let conj = u * &k * dagger(u);
            assert!(linalg::max_abs(&(&conj - &k)) < 1e-12);
        }
    }

    #[test]
    fn h_generator_is_carried_exactly() {
        let ctx = Context::new(CartanData::new(LieType::A1));
        let g = grid(5);
        let lam = w(&[1]);
        let fam = build_family(&ctx, &g, &[lam.clone()]).unwrap();
        let m1 = ctx.module(1.0, &lam).unwrap();
        for qi in 0..g.len() {
            let h = fam
                .conjugated_generator(&ctx, qi, &lam, Generator::H(0))
                .unwrap();
            assert!(linalg::max_abs(&(&h - &m1.h_mat(0))) < 1e-13);
        }
    }

    #[test]
    fn conjugated_generators_satisfy_q_relations() {
        let ctx = Context::new(CartanData::new(LieType::A1));
        let g = vec![0.5, 0.75, 1.0, 1.5];
        let lam = w(&[4]);
        let fam = build_family(&ctx, &g, &[lam.clone()]).unwrap();
        for (qi, &q) in g.iter().enumerate() {
            let u = fam.unitary(qi, &lam).unwrap();
            let mq = ctx.module(q, &lam).unwrap();
            let e = vec![u * &mq.e_mat[0] * dagger(u)];
            let f = vec![u * &mq.f_mat[0] * dagger(u)];
            let k = vec![u * &mq.k_mat[0] * dagger(u)];
            let qh = vec![u * mq.qh_mat(0) * dagger(u)];
            let resid =
                uqg::relations_residual_parts(&ctx.cd, QParam::new(q).unwrap(), &e, &f, &k, &qh);
            assert!(resid < 1e-10, "q={q} resid={resid}");
        }
    }

    #[test]
    fn trivial_block_has_zero_moduli() {
        let ctx = Context::new(CartanData::new(LieType::A1));
        let g = grid(5);
        let fam = build_family(&ctx, &g, &[w(&[0])]).unwrap();
        let table = continuity_scan(&ctx, &fam, &w(&[0])).unwrap();
        assert_eq!(table.overall_max(), 0.0);
    }

    #[test]
    fn refinement_shrinks_moduli() {
        let ctx = Context::new(CartanData::new(LieType::A1));
        let lam = w(&[2]);
        let coarse = build_family(&ctx, &grid(17), &[lam.clone()]).unwrap();
        let fine = build_family(&ctx, &grid(33), &[lam.clone()]).unwrap();
        let tc = continuity_scan(&ctx, &coarse, &lam).unwrap();
        let tf = continuity_scan(&ctx, &fine, &lam).unwrap();
        for gen in [Generator::E(0), Generator::F(0)] {
            let mc = tc.max_modulus(gen);
            let mf = tf.max_modulus(gen);
            assert!(mf <= mc / 1.8, "{gen}: coarse {mc} fine {mf}");
        }
        assert_eq!(tc.max_modulus(Generator::H(0)), 0.0);
    }

    #[test]
    fn comparing_a_family_with_itself() {
        let ctx = Context::new(CartanData::new(LieType::A1));
        let g = grid(5);
        let lam = w(&[1]);
        let fam = build_family(&ctx, &g, &[lam.clone()]).unwrap();
        let (vs, moduli) = compare_families(&fam, &fam, &lam).unwrap();
        for v in &vs {
            assert!(linalg::max_abs(&(v - linalg::identity(2))) < 1e-12);
        }
        for m in moduli {
            assert!(m < 1e-12);
        }
    }

    #[test]
    fn phase_tampering_is_aligned_away() {
        let ctx = Context::new(CartanData::new(LieType::A1));
        let g = grid(9);
        let lam = w(&[1]);
        let fam = build_family(&ctx, &g, &[lam.clone()]).unwrap();
        // multiply each non-anchor unitary by an arbitrary global phase
        let mut f2 = fam.clone();
        for (qi, &q) in g.iter().enumerate() {
            if q != 1.0 {
                let phase = linalg::c64(0.0, 0.9 * (qi as f64 + 1.0)).exp();
                let u = f2.unitaries.get_mut(&(qi, lam.clone())).unwrap();
                let scaled = &*u * phase;
                *u = scaled;
            }
        }
        let (_, aligned_moduli) = compare_families(&fam, &f2, &lam).unwrap();
        let max = aligned_moduli.iter().copied().fold(0.0, f64::max);
        assert!(max < 1e-12, "aligned moduli should vanish, got {max}");
    }
}
