//! Dense complex linear algebra helpers.
//!
//! Everything spectral goes through a cyclic Jacobi eigensolver with a fixed
//! sweep order, so repeated runs produce bit-identical output. nalgebra
//! supplies storage and arithmetic; decompositions that feed reported numbers
//! are implemented here.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::tol;

pub type CMat = DMatrix<Complex64>;
pub type CVec = nalgebra::DVector<Complex64>;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rc(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Frobenius norm.
pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// `‖u† u − 1‖` (Frobenius).
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.ncols();
    frob(&(dagger(u) * u - identity(n)))
}

/// `‖m − m†‖` (Frobenius).
pub fn hermiticity_defect(m: &CMat) -> f64 {
    frob(&(m - dagger(m)))
}

/// Kronecker product with row-major index pairing: `(i·db + k, j·dc + l)`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// The flip unitary `V_a ⊗ V_b → V_b ⊗ V_a`, mapping index `i·db + j` to `j·da + i`.
pub fn flip(da: usize, db: usize) -> CMat {
    let mut m = zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..db {
            m[(j * da + i, i * db + j)] = rc(1.0);
        }
    }
    m
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps run over pairs (p, q) with p < q in row order until the
/// off-diagonal Frobenius norm drops below `tol::JACOBI_OFFDIAG` relative to
/// the matrix scale. Returns eigenvalues ascending with matching eigenvector
/// columns.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    jacobi(a, true)
}

/// Eigenvalues only (same solver, no eigenvector accumulation).
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    jacobi(a, false).0
}

fn jacobi(a: &CMat, want_vectors: bool) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi: matrix must be square");
    let mut m = a.clone();
    let mut v = identity(n);
    let scale = frob(&m).max(1e-300);
    let target = tol::JACOBI_OFFDIAG * scale;

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[(i, j)].norm_sqr();
                }
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= target / (n as f64 * n as f64) {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let u = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = sgn / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns: col_p' = c col_p − s ū col_q ; col_q' = s u col_p + c col_q
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = rc(c) * mkp - rc(s) * u.conj() * mkq;
                    m[(k, q)] = rc(s) * u * mkp + rc(c) * mkq;
                }
                // rows: row_p' = c row_p − s u row_q ; row_q' = s ū row_p + c row_q
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = rc(c) * mpk - rc(s) * u * mqk;
                    m[(q, k)] = rc(s) * u.conj() * mpk + rc(c) * mqk;
                }
                m[(p, q)] = rc(0.0);
                m[(q, p)] = rc(0.0);
                m[(p, p)] = rc(m[(p, p)].re);
                m[(q, q)] = rc(m[(q, q)].re);
                if want_vectors {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = rc(c) * vkp - rc(s) * u.conj() * vkq;
                        v[(k, q)] = rc(s) * u * vkp + rc(c) * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .re
            .partial_cmp(&m[(j, j)].re)
            .unwrap()
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = if want_vectors {
        let mut w = zeros(n, n);
        for (newcol, &oldcol) in order.iter().enumerate() {
            for k in 0..n {
                w[(k, newcol)] = v[(k, oldcol)];
            }
        }
        w
    } else {
        zeros(0, 0)
    };
    (values, vectors)
}

/// Spectral (operator) norm. Jacobi on `m† m` for moderate sizes, power
/// iteration with a fixed start vector above that.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let g = dagger(m) * m;
    let n = g.nrows();
    if n <= 400 {
        let vals = hermitian_eigenvalues(&g);
        vals.last().unwrap().max(0.0).sqrt()
    } else {
        let mut v = CVec::from_fn(n, |i, _| rc((i as f64 * 0.7).cos() + 1.25));
        let nv = v.norm();
        v /= rc(nv);
        let mut lambda = 0.0f64;
        for _ in 0..20_000 {
            let w = &g * &v;
            let nw = w.norm();
            if nw == 0.0 {
                return 0.0;
            }
            let next = v.dotc(&w).re;
            v = w / rc(nw);
            if (next - lambda).abs() <= 1e-12 * next.abs() + 1e-300 {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda.max(0.0).sqrt()
    }
}

/// Gram-Schmidt over concrete vectors, dropping residuals below `drop_tol`
/// (absolute norm). Returns the retained orthonormal vectors together with
/// the indices of the inputs that produced them.
pub fn gram_schmidt(vecs: &[CVec], drop_tol: f64) -> (Vec<CVec>, Vec<usize>) {
    let mut basis: Vec<CVec> = Vec::new();
    let mut sources = Vec::new();
    for (idx, vin) in vecs.iter().enumerate() {
        let mut v = vin.clone();
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&v);
                v -= b * coeff;
            }
        }
        let n = v.norm();
        if n > drop_tol {
            basis.push(v / rc(n));
            sources.push(idx);
        }
    }
    (basis, sources)
}

/// Multiply by a unit phase so the first entry of magnitude above
/// `1e-8 * ‖v‖` becomes real positive. Canonicalizes gauge choices.
pub fn phase_normalize(v: &mut CVec) {
    let norm = v.norm();
    if norm == 0.0 {
        return;
    }
    for k in 0..v.len() {
        if v[k].norm() > 1e-8 * norm {
            let phase = v[k] / rc(v[k].norm());
            let corr = phase.conj();
            for j in 0..v.len() {
                v[j] *= corr;
            }
            return;
        }
    }
}

/// Orthonormal basis of the kernel of `m` (singular values below
/// `sv_rel_tol` times the largest are treated as zero).
///
/// The basis is canonical: it depends only on the kernel subspace, obtained
/// by projecting the standard basis onto it and orthonormalizing in index
/// order, then phase-normalizing.
pub fn kernel_onb(m: &CMat, sv_rel_tol: f64) -> Vec<CVec> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    let g = dagger(m) * m;
    let (vals, vecs) = hermitian_eigen(&g);
    let lam_max: f64 = vals.last().copied().unwrap_or(0.0).max(0.0);
    let cut = (sv_rel_tol * lam_max.sqrt()).powi(2);
    let kdim = vals.iter().filter(|&&l| l <= cut).count();
    if kdim == 0 {
        return Vec::new();
    }
    // projector onto the kernel
    let mut proj = zeros(n, n);
    for (i, &l) in vals.iter().enumerate() {
        if l <= cut {
            let col = vecs.column(i);
            for r in 0..n {
                for c in 0..n {
                    proj[(r, c)] += col[r] * col[c].conj();
                }
            }
        }
    }
    let cols: Vec<CVec> = (0..n).map(|j| CVec::from(proj.column(j))).collect();
    let (mut basis, _) = gram_schmidt(&cols, 1e-3);
    assert_eq!(basis.len(), kdim, "kernel basis extraction lost rank");
    for v in &mut basis {
        phase_normalize(v);
    }
    basis
}

/// Stack matrices vertically (all must share a column count).
pub fn vstack(mats: &[CMat]) -> CMat {
    assert!(!mats.is_empty());
    let cols = mats[0].ncols();
    let rows: usize = mats.iter().map(|m| m.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for m in mats {
        assert_eq!(m.ncols(), cols);
        out.view_mut((at, 0), (m.nrows(), cols)).copy_from(m);
        at += m.nrows();
    }
    out
}

/// Stack matrices horizontally (all must share a row count).
pub fn hstack(mats: &[CMat]) -> CMat {
    assert!(!mats.is_empty());
    let rows = mats[0].nrows();
    let cols: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut at = 0;
    for m in mats {
        assert_eq!(m.nrows(), rows);
        out.view_mut((0, at), (rows, m.ncols())).copy_from(m);
        at += m.ncols();
    }
    out
}

/// Unitary polar factor of a square matrix, via Jacobi on `m† m`.
///
/// For invertible `m` this is `m (m† m)^{-1/2}`, the closest unitary in
/// Frobenius distance.
pub fn polar_unitary(m: &CMat) -> CMat {
    let g = dagger(m) * m;
    let (vals, vecs) = hermitian_eigen(&g);
    let n = g.nrows();
    let mut inv_sqrt = zeros(n, n);
    for (i, &l) in vals.iter().enumerate() {
        let s = if l > 1e-28 { 1.0 / l.sqrt() } else { 0.0 };
        let col = vecs.column(i);
        for r in 0..n {
            for c in 0..n {
                inv_sqrt[(r, c)] += col[r] * col[c].conj() * rc(s);
            }
        }
    }
    m * inv_sqrt
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = CMat::from_fn(n, n, |_, _| {
            c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        (&raw + dagger(&raw)) * rc(0.5)
    }

    #[test]
    fn jacobi_diagonalizes() {
        for seed in 0..4 {
            let n = 7 + seed as usize;
            let a = random_hermitian(n, seed);
            let (vals, vecs) = hermitian_eigen(&a);
            assert!(unitarity_defect(&vecs) < 1e-12);
            let mut d = zeros(n, n);
            for i in 0..n {
                d[(i, i)] = rc(vals[i]);
            }
            let resid = frob(&(&a * &vecs - &vecs * &d));
            assert!(resid < 1e-11, "residual {resid}");
            for w in vals.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn jacobi_matches_nalgebra() {
        let a = random_hermitian(9, 42);
        let mine = hermitian_eigenvalues(&a);
        let mut theirs: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (m, t) in mine.iter().zip(&theirs) {
            assert!((m - t).abs() < 1e-10, "{m} vs {t}");
        }
    }

    #[test]
    fn op_norm_agrees_with_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = CMat::from_fn(6, 9, |_, _| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let mine = op_norm(&m);
        let sv = m.clone().singular_values();
        let top = sv.iter().cloned().fold(0.0f64, f64::max);
        assert!((mine - top).abs() < 1e-10);
    }

    #[test]
    fn kernel_extraction() {
        // rank-2 matrix on C^4: kernel dim 2
        let mut m = zeros(3, 4);
        m[(0, 0)] = rc(1.0);
        m[(1, 1)] = c64(0.0, 2.0);
        m[(2, 0)] = rc(0.5);
        let ker = kernel_onb(&m, 1e-9);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            assert!((&m * v).norm() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flip_is_involutive_permutation() {
        let f = flip(3, 5);
        let g = flip(5, 3);
        assert!(frob(&(&g * &f - identity(15))) < 1e-15);
        let a = random_hermitian(3, 1);
        let b = random_hermitian(5, 2);
        // flip conjugation swaps kron factors
        let lhs = &f * kron(&a, &b) * &g;
        let rhs = kron(&b, &a);
        assert!(frob(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn polar_of_unitary_times_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(5, 11);
        let (_, q) = hermitian_eigen(&h);
        let mut p = zeros(5, 5);
        for i in 0..5 {
            p[(i, i)] = rc(1.0 + rng.gen::<f64>());
        }
        let m = &q * &p;
        let u = polar_unitary(&m);
        assert!(frob(&(u - q)) < 1e-10);
    }
}
