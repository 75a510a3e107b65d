//! Numerical laboratory for q-deformed compact groups at finite truncation.
//!
//! The crate constructs, by explicit linear algebra, the objects attached to a
//! q-deformation `G_q` of a simply connected semisimple compact Lie group of
//! rank one or two:
//!
//! - finite-dimensional `*`-representations of the quantized enveloping
//!   algebra, their tensor products and Clebsch–Gordan data ([`uqg`]);
//! - a continuous-in-q family of isomorphisms onto the classical completion,
//!   realized by unitaries anchored at the identity for q = 1 ([`iso_family`]);
//! - the matrix-coefficient Hopf `*`-algebra, its Haar state and the deformed
//!   orthogonality relations ([`funalg`]);
//! - the Clifford algebra of the compact form, the spin lift of the adjoint
//!   action and the Dirac element ([`spin`]);
//! - unitary Drinfeld twist blocks relating the deformed and classical
//!   coproducts, with gauge alignment along a q-grid ([`twist`]);
//! - truncated GNS spaces carrying the classical and deformed Dirac operators,
//!   their spectra, and commutator bounds ([`dirac`]).
//!
//! Every identity the theory asserts is rechecked numerically; tolerances are
//! centralized in [`tol`].
//!
//! See the crate examples (`cargo run --example <name>`) for one runnable
//! walkthrough per capability, and the `qdlab` binary for the batch driver.

pub mod cartan;
pub mod config;
pub mod dirac;
pub mod funalg;
pub mod iso_family;
pub mod linalg;
pub mod qscalars;
pub mod report;
pub mod runner;
pub mod spin;
pub mod tol;
pub mod twist;
pub mod uqg;

use std::sync::{Arc, Mutex};

use std::collections::HashMap;

pub use cartan::{CartanData, LieType, Weight};
pub use qscalars::QParam;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("weight {0:?} is not dominant")]
    NonDominantWeight(Vec<i64>),
    #[error("Gram matrix has negative eigenvalue {value:.3e} (conventions bug)")]
    GramNegative { value: f64 },
    #[error("monomial basis degenerates at q={q}: Gram determinant {det:.3e} below threshold")]
    BasisDegenerate { q: f64, det: f64 },
    #[error("incompatible modules: {0}")]
    ModuleMismatch(String),
    #[error("convention self-test failed on {gen}: residual {residual:.3e}")]
    ConventionSelfTest { gen: String, residual: f64 },
    #[error("truncation overflow: component {0:?} escapes the cutoff")]
    TruncationOverflow(Vec<i64>),
    #[error("multiplicity-space Gram defect at weight {0:?}")]
    MultiplicityDefect(Vec<i64>),
    #[error("intertwining residual {residual:.3e} above tolerance (worst generator {gen})")]
    IntertwinerResidual { gen: String, residual: f64 },
    #[error("operator is not Hermitian: defect {0:.3e}")]
    NonHermitian(f64),
    #[error("missing twist block ({0:?}, {1:?})")]
    MissingBlock(Vec<i64>, Vec<i64>),
    #[error("block {0:?} outside the spin-space decomposition")]
    UnsupportedSpinBlock(Vec<i64>),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Shared build context: Cartan data plus memoized modules and
/// Clebsch-Gordan decompositions keyed by (q, weights).
///
/// Cheap to clone (everything behind `Arc`); safe to share across workers.
#[derive(Clone)]
pub struct Context {
    pub cd: Arc<CartanData>,
    modules: Arc<Mutex<HashMap<(u64, Weight), Arc<uqg::IrrepModule>>>>,
    cg: Arc<Mutex<HashMap<(u64, Weight, Weight), Arc<uqg::CGDecomposition>>>>,
    conj: Arc<Mutex<HashMap<(u64, Weight), Arc<linalg::CMat>>>>,
}

impl Context {
    pub fn new(cd: CartanData) -> Self {
        Context {
            cd: Arc::new(cd),
            modules: Arc::new(Mutex::new(HashMap::new())),
            cg: Arc::new(Mutex::new(HashMap::new())),
            conj: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    /// The irreducible module with highest weight `lambda` at parameter `q`.
    pub fn module(&self, q: f64, lambda: &Weight) -> Result<Arc<uqg::IrrepModule>> {
        let key = (q.to_bits(), lambda.clone());
        if let Some(m) = self.modules.lock().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(uqg::build_irrep(&self.cd, QParam::new(q)?, lambda)?);
        let mut guard = self.modules.lock().unwrap();
        let entry = guard.entry(key).or_insert(m);
        Ok(entry.clone())
    }

    /// Clebsch-Gordan decomposition of `V_lambda (x) V_nu` at parameter `q`.
    pub fn cg(&self, q: f64, lambda: &Weight, nu: &Weight) -> Result<Arc<uqg::CGDecomposition>> {
        let key = (q.to_bits(), lambda.clone(), nu.clone());
        if let Some(c) = self.cg.lock().unwrap().get(&key) {
            return Ok(c.clone());
        }
        let a = self.module(q, lambda)?;
        let b = self.module(q, nu)?;
        let c = Arc::new(uqg::cg_decompose(&a, &b, self)?);
        let mut guard = self.cg.lock().unwrap();
        let entry = guard.entry(key).or_insert(c);
        Ok(entry.clone())
    }

    /// Intertwiner identifying the contragredient of `V_lambda` with the
    /// module of highest weight `-w_0 lambda` (see [`funalg`]).
    pub fn conjugation(&self, q: f64, lambda: &Weight) -> Result<Arc<linalg::CMat>> {
        let key = (q.to_bits(), lambda.clone());
        if let Some(u) = self.conj.lock().unwrap().get(&key) {
            return Ok(u.clone());
        }
        let u = Arc::new(funalg::conjugation_intertwiner(self, q, lambda)?);
        let mut guard = self.conj.lock().unwrap();
        let entry = guard.entry(key).or_insert(u);
        Ok(entry.clone())
    }
}
