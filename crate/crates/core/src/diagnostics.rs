//! Scalar diagnostics of instantaneous-eigenstate tracking.
//!
//! All diagnostics compare the exact propagator against what the
//! adiabatic-frame prediction would assign:
//!
//! * `survival_q` — `Q = Tr(P_{U|+(0)⟩} P_{|+(t)⟩})`, one when the tracked
//!   eigenstate follows the frame, zero at maximal violation.
//! * `q_analytic` — the same quantity in closed form for models whose exact
//!   propagator has an `exp(−iθ n·σ)` parametrization; depends only on the
//!   propagator and the endpoint Hamiltonians, not on `Ḣ`.
//! * `overlap_f0` — `F₀ = |⟨E(t)|E(t₀)⟩|`, the eigenstate overlap whose
//!   smallness flags when naive frame reasoning becomes dangerous.
//! * `inconsistency_demo` — `F₁ = |⟨E(0)|U U†|E(0)⟩|` is exactly one, while
//!   chaining the frame approximation through `U†` assigns it `≈ F₀`: the
//!   two sides of the contradiction, made assertable.
//! * `avron_fidelity` — overlap between exact evolution and evolution under
//!   the spectral-projection generator `H + i[Ṗ, P]`.
//! * `adiabatic_prediction_check` — Frobenius distance
//!   `‖U P₊(0) U† − P₊(t)‖`, zero when the projected prediction holds, √2
//!   for orthogonal rank-1 projectors.
//! * ensemble variants — convex mixtures over fluctuating-Hamiltonian
//!   ensembles, one run per member.

use crate::error::{AdiaError, Result};
use crate::hamiltonians::{
    counterexample_axes, rotating_field_su2, Branch, HamiltonianModel, SpectralFrame,
};
use crate::mat2::{overlap, Mat2, Vec2};
use crate::propagation::{
    avron_trajectory, propagate, IntegratorConfig, TimeGrid, Trajectory,
};

/// Per-sample diagnostic values; fields not selected by a run stay `None`.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub adiabaticity_ratio: Option<f64>,
    pub q_numeric: Option<f64>,
    pub q_analytic: Option<f64>,
    pub f0: Option<f64>,
    pub f1_exact: Option<f64>,
    pub f1_naive: Option<f64>,
    pub fidelity_avron: Option<f64>,
    pub prediction_residual: Option<f64>,
    pub unitarity_error: f64,
}

/// Rank-1 projector onto one branch of a spectral frame.
pub fn instantaneous_projector(frame: &SpectralFrame, branch: Branch) -> Mat2 {
    let v = frame.eigenvector(branch);
    Mat2::outer(v, v)
}

/// Projector onto the ray of a (not necessarily normalized) state.
fn ray_projector(state: &Vec2) -> Result<Mat2> {
    let v = state.normalized()?;
    Ok(Mat2::outer(&v, &v))
}

fn trace_product(a: &Mat2, b: &Mat2) -> f64 {
    a.mul(b).trace().re
}

fn check_index(traj: &Trajectory, t_index: usize) -> Result<()> {
    if t_index >= traj.len() {
        return Err(AdiaError::invalid(format!(
            "t_index {t_index} out of range for trajectory of {} samples",
            traj.len()
        )));
    }
    Ok(())
}

/// Survival probability `Q = Tr(P_{U|b(0)⟩} P_{|b(t)⟩})` for the tracked
/// branch.
pub fn survival_q_branch(traj: &Trajectory, t_index: usize, branch: Branch) -> Result<f64> {
    check_index(traj, t_index)?;
    let frames = traj.frames()?;
    let psi0 = frames[0].eigenvector(branch);
    let evolved = traj.u(t_index).apply(psi0);
    let p_evolved = ray_projector(&evolved)?;
    let p_frame = instantaneous_projector(&frames[t_index], branch);
    Ok(trace_product(&p_evolved, &p_frame))
}

/// [`survival_q_branch`] on the `+` branch.
pub fn survival_q(traj: &Trajectory, t_index: usize) -> Result<f64> {
    survival_q_branch(traj, t_index, Branch::Plus)
}

/// Closed-form survival probability
/// `Q = ½ (1 + n(0)·[θ̇ n + cosθ sinθ ṅ − sin²θ n×ṅ] / |R|)`
/// for models whose exact propagator is `exp(−iθ(t) n(t)·σ)` with
/// `U(0) = 1`.
///
/// Supported for the counterexample (the parametrization is explicit) and
/// the rotating field (from its rotating-frame closed form, where the
/// removable `U = ±1` points fall back to the rotation-identity limit).
pub fn q_analytic(model: &HamiltonianModel, t: f64) -> Result<f64> {
    let (_, r) = model.field_vector(t);
    let norm_r = r.norm();
    let (_, r0) = model.field_vector(0.0);
    let n0 = r0.unit()?;
    match *model {
        HamiltonianModel::Counterexample { omega0, tau } => {
            let (theta, n, theta_dot, n_dot) = counterexample_axes(omega0, tau, t);
            let (s, c) = theta.sin_cos();
            let numerator = n
                .scale(theta_dot)
                .add(&n_dot.scale(c * s))
                .sub(&n.cross(&n_dot).scale(s * s));
            Ok(0.5 * (1.0 + n0.dot(&numerator) / norm_r))
        }
        HamiltonianModel::RotatingField { omega0, tau } => {
            // With U = s·1 − i v·σ (cosθ = s, sinθ·n = v) and the unit-norm
            // constraint v·v̇ = −s ṡ, the bracket reduces to
            // −ṡ v + s v̇ − v×v̇, finite even where U = ±1.
            let p = rotating_field_su2(omega0, tau, t);
            let numerator = p
                .v
                .scale(-p.s_dot)
                .add(&p.v_dot.scale(p.s))
                .sub(&p.v.cross(&p.v_dot));
            Ok(0.5 * (1.0 + n0.dot(&numerator) / norm_r))
        }
        _ => Err(AdiaError::UnsupportedModel {
            operation: "q_analytic",
            model: model.name(),
        }),
    }
}

/// Eigenstate overlap magnitude `F₀ = |⟨E_b(t)|E_b(t₀)⟩|` for the tracked
/// branch; gauge-invariant.
pub fn overlap_f0_branch(frames: &[SpectralFrame], t_index: usize, branch: Branch) -> Result<f64> {
    if t_index >= frames.len() {
        return Err(AdiaError::invalid(format!(
            "t_index {t_index} out of range for {} frames",
            frames.len()
        )));
    }
    Ok(overlap(frames[t_index].eigenvector(branch), frames[0].eigenvector(branch)).norm())
}

/// [`overlap_f0_branch`] on the `+` branch.
pub fn overlap_f0(frames: &[SpectralFrame], t_index: usize) -> Result<f64> {
    overlap_f0_branch(frames, t_index, Branch::Plus)
}

/// `F₁ = |⟨E_b(0)| U U† |E_b(0)⟩|` evaluated literally on the propagator
/// sample; equals one up to unitarity drift.
pub fn f1_exact_at(traj: &Trajectory, t_index: usize) -> Result<f64> {
    check_index(traj, t_index)?;
    let psi0 = traj.frames()?[0].v_plus;
    let uu_dag = traj.u(t_index).mul(&traj.u(t_index).adjoint());
    Ok(overlap(&psi0, &uu_dag.apply(&psi0)).norm())
}

/// `|⟨E_b(0)| U(t) |E_b(0)⟩|`: the value the chained frame approximation
/// assigns to `F₁` through `e^{iβ}⟨E(0)|E(t)⟩`.
pub fn f1_naive_at(traj: &Trajectory, t_index: usize) -> Result<f64> {
    check_index(traj, t_index)?;
    let psi0 = traj.frames()?[0].v_plus;
    Ok(overlap(&psi0, &traj.u(t_index).apply(&psi0)).norm())
}

/// The two sides of the consistency contradiction at the end of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct InconsistencyDemo {
    /// `|⟨E(0)|U U†|E(0)⟩|` — exactly one by unitarity.
    pub f1_exact: f64,
    /// `|⟨E(0)|U(t)|E(0)⟩|` — what the chained frame approximation assigns.
    pub f1_naive: f64,
    /// `|⟨E(t)|E(0)⟩|` — the eigenstate overlap the naive chain equates it to.
    pub f0: f64,
}

/// Propagate `model` over `grid` and evaluate the contradiction at the
/// final sample: `f1_exact` stays one, while wherever frame tracking holds
/// in the forward direction, `f1_naive ≈ f0`.
pub fn inconsistency_demo(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<InconsistencyDemo> {
    let traj = propagate(model, grid, cfg)?;
    let last = traj.len() - 1;
    Ok(InconsistencyDemo {
        f1_exact: f1_exact_at(&traj, last)?,
        f1_naive: f1_naive_at(&traj, last)?,
        f0: overlap_f0(traj.frames()?, last)?,
    })
}

/// Fidelity `|⟨U ψ₀, U_A ψ₀⟩|` between exact evolution and evolution under
/// the spectral-projection generator, from two already-propagated
/// trajectories on the same grid.
pub fn avron_fidelity_at(
    exact: &Trajectory,
    avron: &Trajectory,
    t_index: usize,
) -> Result<f64> {
    check_index(exact, t_index)?;
    check_index(avron, t_index)?;
    let psi0 = exact.frames()?[0].v_plus;
    let a = exact.u(t_index).apply(&psi0).normalized()?;
    let b = avron.u(t_index).apply(&psi0).normalized()?;
    Ok(overlap(&a, &b).norm())
}

/// Propagate both generators and evaluate [`avron_fidelity_at`] at one
/// sample. For whole curves propagate once and loop over indices instead.
pub fn avron_fidelity(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
    t_index: usize,
) -> Result<f64> {
    let exact = propagate(model, grid, cfg)?;
    let avron = avron_trajectory(model, grid, cfg)?;
    avron_fidelity_at(&exact, &avron, t_index)
}

/// Frobenius distance `‖U P₊(0) U† − P₊(t)‖` of the projected prediction;
/// ranges from 0 (prediction holds) to √2 (orthogonal projectors).
pub fn prediction_residual_at(traj: &Trajectory, t_index: usize) -> Result<f64> {
    check_index(traj, t_index)?;
    let frames = traj.frames()?;
    let p0 = instantaneous_projector(&frames[0], Branch::Plus);
    let u = traj.u(t_index);
    let transported = u.mul(&p0).mul(&u.adjoint());
    let p_t = instantaneous_projector(&frames[t_index], Branch::Plus);
    Ok(transported.sub(&p_t).frobenius_norm())
}

/// Propagate and evaluate [`prediction_residual_at`] at one sample.
pub fn adiabatic_prediction_check(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
    t_index: usize,
) -> Result<f64> {
    let traj = propagate(model, grid, cfg)?;
    prediction_residual_at(&traj, t_index)
}

/// One member of a fluctuating-parameter ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub weight: f64,
    pub model: HamiltonianModel,
}

/// A classical ensemble of Hamiltonians with normalized weights.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    members: Vec<EnsembleMember>,
}

impl EnsembleSpec {
    pub fn new(members: Vec<EnsembleMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(AdiaError::config("ensemble", "needs at least one member"));
        }
        let mut sum = 0.0;
        for (i, m) in members.iter().enumerate() {
            if !(m.weight.is_finite() && m.weight > 0.0 && m.weight <= 1.0) {
                return Err(AdiaError::config(
                    format!("ensemble.{i}.weight"),
                    "must be in (0, 1]",
                ));
            }
            sum += m.weight;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(AdiaError::config(
                "ensemble",
                format!("weights must sum to 1 (got {sum})"),
            ));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn member_err(index: usize, e: AdiaError) -> AdiaError {
    AdiaError::EnsembleMember {
        index,
        source: Box::new(e),
    }
}

/// Single-member overlap diagnostic in projector-trace form,
/// `Tr(P_{|E(t₀)⟩} P_{|E(t)⟩})`. This is the square of the pure-state
/// overlap magnitude `F₀`.
pub fn member_f0_trace(model: &HamiltonianModel, t0: f64, t: f64) -> Result<f64> {
    let frame0 = model.spectral_frame(t0, None)?;
    let frame_t = model.spectral_frame(t, None)?;
    let p0 = instantaneous_projector(&frame0, Branch::Plus);
    let p_t = instantaneous_projector(&frame_t, Branch::Plus);
    Ok(trace_product(&p0, &p_t))
}

/// Ensemble overlap diagnostic
/// `F₀ = Tr Σ_α p_α P_{|E_α(t₀)⟩} P_{|E_α(t)⟩}`, each member prepared in
/// its own initial eigenstate.
pub fn ensemble_f0(spec: &EnsembleSpec, t0: f64, t: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (i, m) in spec.members.iter().enumerate() {
        let v = member_f0_trace(&m.model, t0, t).map_err(|e| member_err(i, e))?;
        acc += m.weight * v;
    }
    Ok(acc)
}

/// Ensemble survival probability
/// `Q = Tr Σ_α p_α P_{U_α|E_α(t₀)⟩} P_{|E_α(t)⟩}` from one trajectory per
/// member (same grid).
pub fn ensemble_q(spec: &EnsembleSpec, trajectories: &[Trajectory], t_index: usize) -> Result<f64> {
    if trajectories.len() != spec.members.len() {
        return Err(AdiaError::invalid(format!(
            "ensemble_q needs one trajectory per member ({} members, {} trajectories)",
            spec.members.len(),
            trajectories.len()
        )));
    }
    let mut acc = 0.0;
    for (i, (m, traj)) in spec.members.iter().zip(trajectories).enumerate() {
        let q = survival_q(traj, t_index).map_err(|e| member_err(i, e))?;
        acc += m.weight * q;
    }
    Ok(acc)
}
