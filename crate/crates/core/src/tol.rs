//! Central numerical tolerances.
//!
//! Every threshold used by the library and asserted by the test suites is
//! defined here, with a note on where it comes from. Routines take these as
//! defaults; nothing else in the crate hard-codes a magic epsilon.

/// Pauli compose/decompose round trip. Pure arithmetic, a handful of
/// additions and halvings, so close to machine epsilon.
pub const PAULI_ROUND_TRIP: f64 = 1e-14;

/// Norm deviation allowed for a vector flagged as a normalized state.
pub const STATE_NORM: f64 = 1e-12;

/// Norm deviation allowed for a real 3-vector flagged as a unit vector.
pub const UNIT_VECTOR: f64 = 1e-12;

/// Unit-axis check on inputs to the su(2) exponential. Looser than
/// `UNIT_VECTOR` because callers often normalize with one extra sqrt.
pub const UNIT_AXIS: f64 = 1e-9;

/// Frobenius deviation of `M† M` from the identity for a matrix flagged
/// unitary (default cap on integrator unitarity drift).
pub const UNITARY: f64 = 1e-8;

/// Frobenius deviation of `M` from `M†` for a matrix flagged hermitian.
pub const HERMITIAN: f64 = 1e-12;

/// Closed-form su(2) exponentials are unitary up to a few roundings.
pub const SU2_UNITARITY: f64 = 1e-12;

/// Residual `‖H v − E v‖` for instantaneous eigenpairs.
pub const EIGEN_RESIDUAL: f64 = 1e-10;

/// Orthogonality `|⟨v₊|v₋⟩|` between the two branches of a spectral frame.
pub const ORTHOGONALITY: f64 = 1e-10;

/// Spectral gap floor: below this `|R(t)|` the instantaneous eigenbasis is
/// ill-conditioned and frame construction fails loudly instead of
/// regularizing.
pub const GAP_FLOOR: f64 = 1e-12;

/// Idempotency defect `‖P² − P‖` of rank-1 spectral projectors.
pub const PROJECTOR_IDEMPOTENCY: f64 = 1e-12;

/// Unitarity of the adiabatic-frame propagator samples. Built from
/// orthonormal frame vectors, so tighter than the integrator cap.
pub const AT_UNITARITY: f64 = 1e-10;

/// `|⟨ψ(0)| U U† |ψ(0)⟩|` deviates from one only through propagator drift.
pub const F1_EXACT: f64 = 1e-9;

/// Agreement between the closed-form survival probability and the one
/// computed from the integrated propagator; limited by grid discretization.
pub const Q_ANALYTIC_MATCH: f64 = 5e-4;

/// Gauge-invariance checks (coupling magnitude, overlap magnitude,
/// closed-loop geometric phase) under random per-sample re-phasing.
pub const GAUGE_INVARIANCE: f64 = 1e-6;

/// Conjugate symmetry of the inner product, `⟨a|b⟩ = conj(⟨b|a⟩)`.
pub const OVERLAP_CONJ_SYM: f64 = 1e-15;
