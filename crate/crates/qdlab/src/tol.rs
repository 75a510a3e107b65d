//! Central table of numerical tolerances.
//!
//! Every residual threshold used by the verification suites lives here, so a
//! run can be audited against one list and the CLI can override entries by
//! name (`--tol NAME=VALUE`).

/// Defining relations and `*`-structure of a built module (pure arithmetic).
pub const RELATIONS: f64 = 1e-12;
/// Unitarity defect of constructed unitaries (isomorphism family, W_q, twist).
pub const UNITARITY: f64 = 1e-10;
/// Clebsch-Gordan isometry and intertwining residuals.
pub const CG: f64 = 1e-10;
/// R-matrix intertwining self-test.
pub const R_SELF_TEST: f64 = 1e-10;
/// Orthogonality relations: state-product route against the closed form.
pub const ORTHOGONALITY: f64 = 1e-10;
/// Twist condition (i): coproduct intertwining per block.
pub const TWIST_I: f64 = 1e-8;
/// Twist condition (iii): R-matrix compatibility after gauge fixing.
pub const TWIST_III: f64 = 1e-6;
/// Associator invariance under the total classical action.
pub const ASSOCIATOR: f64 = 1e-7;
/// Per-block spectral multiset deviation between the deformed and classical
/// Dirac operators.
pub const ISOSPECTRAL: f64 = 1e-9;
/// Commutator identity check on the interior window.
pub const COMMUTATOR_IDENTITY: f64 = 1e-6;
/// GNS representation property on the interior set.
pub const REGULAR_REP: f64 = 1e-9;
/// Gram-matrix null-space cut, relative to the largest singular value.
pub const NULL_CUT: f64 = 1e-9;
/// Jacobi eigensolver convergence: off-diagonal Frobenius norm, relative.
pub const JACOBI_OFFDIAG: f64 = 1e-13;
/// Eigenvalue multiplicity merge tolerance in spectra.
pub const EIG_MERGE: f64 = 1e-9;

/// Look up a tolerance by the name used in reports and CLI overrides.
pub fn by_name(name: &str) -> Option<f64> {
    Some(match name {
        "relations" => RELATIONS,
        "unitarity" => UNITARITY,
        "cg" => CG,
        "r_self_test" => R_SELF_TEST,
        "orthogonality" => ORTHOGONALITY,
        "twist_i" => TWIST_I,
        "twist_iii" => TWIST_III,
        "associator" => ASSOCIATOR,
        "isospectral" => ISOSPECTRAL,
        "commutator_identity" => COMMUTATOR_IDENTITY,
        "regular_rep" => REGULAR_REP,
        _ => return None,
    })
}
