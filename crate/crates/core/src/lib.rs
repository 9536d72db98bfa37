//! Exact and adiabatic-frame propagation of driven two-level quantum
//! systems, with a suite of consistency diagnostics.
//!
//! The library propagates `i U̇ = H(t) U` for parametrized 2×2 Hamiltonians,
//! builds the instantaneous-eigenbasis (adiabatic-frame) propagator next to
//! the exact one, and computes the scalar diagnostics that reveal whether
//! the adiabatic prediction actually holds: the slowness ratio, the survival
//! probability `Q`, the eigenstate overlap `F₀`, the unitarity witness `F₁`,
//! and the fidelity against evolution generated by the spectral-projection
//! Hamiltonian `H + i[Ṗ, P]`.
//!
//! The model catalog includes a resonantly modulated rotating field with a
//! closed-form propagator for which the textbook slowness criterion is
//! satisfied while instantaneous-eigenstate tracking fails maximally half
//! way through the sweep — alongside control cases (plain rotating field,
//! Landau–Zener sweep) where tracking works.
//!
//! The `adia-check` binary drives scenarios from config files and emits
//! deterministic CSV; see the crate README for the file formats.

pub mod diagnostics;
pub mod error;
pub mod hamiltonians;
pub mod mat2;
pub mod propagation;
pub mod scenario;
pub mod tol;

pub use error::{AdiaError, Result};
pub use hamiltonians::{Branch, HamiltonianModel, SpectralFrame};
pub use mat2::{Complex, Mat2, RealVec3, Vec2};
pub use propagation::{IntegratorConfig, Method, TimeGrid, Trajectory};
