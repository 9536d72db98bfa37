//! Propagators: exact ODE integration of `i U̇ = H(t) U`, the
//! instantaneous-eigenbasis (adiabatic-frame) propagator, geometric phases,
//! the spectral-projection generator `H + i[Ṗ, P]`, and the reversed-frame
//! Hamiltonian `−U† H U`.
//!
//! The integrator never re-unitarizes: unitarity drift is measured at every
//! output sample and reported (or failed on), not hidden. Fixed-step RK4 is
//! the default — deterministic and bit-stable across reruns — with an
//! embedded Dormand–Prince 5(4) alternative for stiff sweeps.

use crate::error::{AdiaError, Result};
use crate::hamiltonians::{frame_from_field, Branch, HamiltonianModel, SpectralFrame};
use crate::mat2::{
    overlap, pauli_compose_unchecked, pauli_vector_re, unitarity_error, Complex, Mat2, IM,
};
use crate::tol;

/// Uniform output grid: `steps` intervals between `t0` and `t1`,
/// `steps + 1` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() {
            return Err(AdiaError::config("grid", "t0 and t1 must be finite"));
        }
        if t1 <= t0 {
            return Err(AdiaError::config("grid.t1", "must be greater than t0"));
        }
        if steps < 2 {
            return Err(AdiaError::config("grid.steps", "must be at least 2"));
        }
        Ok(Self { t0, t1, steps })
    }

    /// Sample count (`steps + 1`).
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Interval width.
    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    /// Time of sample `i`.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.t1
        } else {
            self.t0 + self.dt() * i as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    /// Index of the sample nearest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let x = (t - self.t0) / self.dt();
        (x.round().max(0.0) as usize).min(self.steps)
    }
}

/// Integration method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    Rk4Fixed,
    /// Embedded Dormand–Prince 5(4) with adaptive steps; output samples are
    /// filled in by dense (cubic Hermite) interpolation.
    Rk45Adaptive,
}

/// Integrator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Relative local-error tolerance (adaptive method).
    pub rel_tol: f64,
    /// Absolute local-error tolerance (adaptive method).
    pub abs_tol: f64,
    /// Hard cap on `‖U†U − 1‖_F` at any output sample.
    pub max_unitarity_drift: f64,
    /// Internal sub-steps per output interval (fixed-step method). Lets long
    /// sweeps meet the drift cap without storing millions of samples.
    pub substeps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4Fixed,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_unitarity_drift: tol::UNITARY,
            substeps: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(AdiaError::config("integrator.rel_tol", "must be > 0"));
        }
        if !(self.abs_tol.is_finite() && self.abs_tol > 0.0) {
            return Err(AdiaError::config("integrator.abs_tol", "must be > 0"));
        }
        if !(self.max_unitarity_drift.is_finite() && self.max_unitarity_drift > 0.0) {
            return Err(AdiaError::config(
                "integrator.max_unitarity_drift",
                "must be > 0",
            ));
        }
        if self.substeps == 0 {
            return Err(AdiaError::config("integrator.substeps", "must be >= 1"));
        }
        Ok(())
    }
}

/// Gauge-linked spectral data along a trajectory.
#[derive(Debug, Clone)]
struct SpectralData {
    frames: Vec<SpectralFrame>,
    beta_plus: Vec<f64>,
    beta_minus: Vec<f64>,
}

/// A propagated trajectory: per-sample exact propagators `U(tᵢ, t₀)`,
/// unitarity errors, and (when the spectrum stays gapped) gauge-linked
/// spectral frames with accumulated geometric phases.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: TimeGrid,
    u_samples: Vec<Mat2>,
    unitarity_errors: Vec<f64>,
    spectral: std::result::Result<SpectralData, String>,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.u_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.grid.time(i)
    }

    /// Propagator sample `U(tᵢ, t₀)`.
    pub fn u(&self, i: usize) -> &Mat2 {
        &self.u_samples[i]
    }

    pub fn u_samples(&self) -> &[Mat2] {
        &self.u_samples
    }

    /// `‖U†U − 1‖_F` at each sample.
    pub fn unitarity_errors(&self) -> &[f64] {
        &self.unitarity_errors
    }

    pub fn max_unitarity_error(&self) -> f64 {
        self.unitarity_errors.iter().cloned().fold(0.0, f64::max)
    }

    /// Gauge-linked spectral frames; fails if the spectrum was degenerate
    /// somewhere along the grid.
    pub fn frames(&self) -> Result<&[SpectralFrame]> {
        match &self.spectral {
            Ok(d) => Ok(&d.frames),
            Err(why) => Err(AdiaError::invalid(format!(
                "trajectory has no spectral frames: {why}"
            ))),
        }
    }

    /// Accumulated geometric phase of one branch, zero at `t₀`.
    pub fn beta(&self, branch: Branch) -> Result<&[f64]> {
        match &self.spectral {
            Ok(d) => Ok(match branch {
                Branch::Plus => &d.beta_plus,
                Branch::Minus => &d.beta_minus,
            }),
            Err(why) => Err(AdiaError::invalid(format!(
                "trajectory has no geometric phases: {why}"
            ))),
        }
    }
}

/// Right-hand side of `U̇ = −i H U`.
fn rhs(h: &Mat2, u: &Mat2) -> Mat2 {
    h.mul(u).scale(-IM)
}

fn check_hermitian(h: &Mat2, t: f64) -> Result<()> {
    if !h.is_finite() {
        return Err(AdiaError::invalid(format!(
            "hamiltonian is not finite at t = {t}"
        )));
    }
    let scale = 1.0 + h.frobenius_norm();
    if h.hermiticity_error() > tol::HERMITIAN * scale {
        return Err(AdiaError::invalid(format!(
            "hamiltonian is not hermitian at t = {t} (defect {:.3e})",
            h.hermiticity_error()
        )));
    }
    Ok(())
}

/// One classical RK4 step of width `dt` starting at `t`.
fn rk4_step<H>(h_of_t: &H, t: f64, dt: f64, u: &Mat2) -> Result<Mat2>
where
    H: Fn(f64) -> Result<Mat2>,
{
    let k1 = rhs(&h_of_t(t)?, u);
    let k2 = rhs(&h_of_t(t + 0.5 * dt)?, &u.add(&k1.scale(Complex::new(0.5 * dt, 0.0))));
    let k3 = rhs(&h_of_t(t + 0.5 * dt)?, &u.add(&k2.scale(Complex::new(0.5 * dt, 0.0))));
    let k4 = rhs(&h_of_t(t + dt)?, &u.add(&k3.scale(Complex::new(dt, 0.0))));
    let sum = k1
        .add(&k2.scale(Complex::new(2.0, 0.0)))
        .add(&k3.scale(Complex::new(2.0, 0.0)))
        .add(&k4);
    Ok(u.add(&sum.scale(Complex::new(dt / 6.0, 0.0))))
}

/// Solve `i U̇ = H(t) U`, `U(t₀) = 1`, sampling on the output grid.
///
/// The Hamiltonian closure is validated for hermiticity at every output
/// sample. No renormalization of `U` is performed; if the drift
/// `‖U†U − 1‖_F` exceeds `cfg.max_unitarity_drift` at a sample the
/// integration fails with the offending time attached.
pub fn integrate_schrodinger<H>(
    h_of_t: H,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<Trajectory>
where
    H: Fn(f64) -> Result<Mat2>,
{
    cfg.validate()?;
    let u_samples = match cfg.method {
        Method::Rk4Fixed => integrate_rk4(&h_of_t, grid, cfg)?,
        Method::Rk45Adaptive => integrate_dopri5(&h_of_t, grid, cfg)?,
    };

    let mut unitarity_errors = Vec::with_capacity(u_samples.len());
    for (i, u) in u_samples.iter().enumerate() {
        let drift = unitarity_error(u);
        if drift > cfg.max_unitarity_drift {
            return Err(AdiaError::IntegrationDiverged {
                t: grid.time(i),
                drift,
                limit: cfg.max_unitarity_drift,
            });
        }
        unitarity_errors.push(drift);
    }

    let spectral = build_spectral(&h_of_t, grid);
    Ok(Trajectory {
        grid: *grid,
        u_samples,
        unitarity_errors,
        spectral,
    })
}

fn integrate_rk4<H>(h_of_t: &H, grid: &TimeGrid, cfg: &IntegratorConfig) -> Result<Vec<Mat2>>
where
    H: Fn(f64) -> Result<Mat2>,
{
    let dt = grid.dt() / cfg.substeps as f64;
    let mut u = Mat2::identity();
    let mut samples = Vec::with_capacity(grid.len());
    check_hermitian(&h_of_t(grid.t0)?, grid.t0)?;
    samples.push(u);
    for i in 0..grid.steps {
        let t_left = grid.time(i);
        for k in 0..cfg.substeps {
            let t = t_left + dt * k as f64;
            u = rk4_step(h_of_t, t, dt, &u)?;
        }
        check_hermitian(&h_of_t(grid.time(i + 1))?, grid.time(i + 1))?;
        samples.push(u);
    }
    Ok(samples)
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn integrate_dopri5<H>(h_of_t: &H, grid: &TimeGrid, cfg: &IntegratorConfig) -> Result<Vec<Mat2>>
where
    H: Fn(f64) -> Result<Mat2>,
{
    let span = grid.t1 - grid.t0;
    let mut t = grid.t0;
    let mut y = Mat2::identity();
    let mut f = rhs(&h_of_t(t)?, &y);
    check_hermitian(&h_of_t(grid.t0)?, grid.t0)?;

    let mut samples = Vec::with_capacity(grid.len());
    samples.push(y);
    let mut next_out = 1usize;

    let mut h = (span / 1000.0).min(0.1 / (1.0 + f.frobenius_norm()));
    let h_min = span * 1e-14;

    while next_out <= grid.steps {
        if t + h > grid.t1 {
            h = grid.t1 - t;
        }
        // Stage evaluations.
        let mut k = [Mat2::zero(); 7];
        k[0] = f;
        for s in 1..7 {
            let mut acc = Mat2::zero();
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = DP_A[s - 1][j];
                if a != 0.0 {
                    acc = acc.add(&kj.scale(Complex::new(a, 0.0)));
                }
            }
            let ys = y.add(&acc.scale(Complex::new(h, 0.0)));
            k[s] = rhs(&h_of_t(t + DP_C[s] * h)?, &ys);
        }
        let mut y5 = y;
        let mut y4 = y;
        for (j, kj) in k.iter().enumerate() {
            if DP_B5[j] != 0.0 {
                y5 = y5.add(&kj.scale(Complex::new(h * DP_B5[j], 0.0)));
            }
            if DP_B4[j] != 0.0 {
                y4 = y4.add(&kj.scale(Complex::new(h * DP_B4[j], 0.0)));
            }
        }
        let err = y5.sub(&y4).frobenius_norm();
        let scale = cfg.abs_tol + cfg.rel_tol * y.frobenius_norm().max(y5.frobenius_norm());
        let ratio = err / scale;

        if ratio <= 1.0 {
            // Accept; fill output samples covered by this step with cubic
            // Hermite interpolation on (y, f) at both ends.
            let f_new = k[6]; // FSAL: last stage is f(t+h, y5).
            let t_new = t + h;
            while next_out <= grid.steps && grid.time(next_out) <= t_new + 1e-14 * span {
                let t_out = grid.time(next_out);
                let u_out = if (t_out - t_new).abs() <= 1e-14 * span {
                    y5
                } else {
                    hermite(t, h, &y, &f, &y5, &f_new, t_out)
                };
                samples.push(u_out);
                next_out += 1;
            }
            t = t_new;
            y = y5;
            f = f_new;
        }

        let grow = if ratio > 0.0 {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= grow;
        if h < h_min && next_out <= grid.steps {
            return Err(AdiaError::IntegrationDiverged {
                t,
                drift: f64::NAN,
                limit: cfg.max_unitarity_drift,
            });
        }
    }
    Ok(samples)
}

/// Cubic Hermite interpolant over one accepted step.
fn hermite(t0: f64, h: f64, y0: &Mat2, f0: &Mat2, y1: &Mat2, f1: &Mat2, t: f64) -> Mat2 {
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    y0.scale(Complex::new(h00, 0.0))
        .add(&f0.scale(Complex::new(h10 * h, 0.0)))
        .add(&y1.scale(Complex::new(h01, 0.0)))
        .add(&f1.scale(Complex::new(h11 * h, 0.0)))
}

/// Build gauge-linked frames by Pauli-decomposing the Hamiltonian at each
/// output sample. A degenerate sample leaves the trajectory without
/// spectral data (recorded with the reason) instead of failing propagation.
fn build_spectral<H>(h_of_t: &H, grid: &TimeGrid) -> std::result::Result<SpectralData, String>
where
    H: Fn(f64) -> Result<Mat2>,
{
    let mut frames: Vec<SpectralFrame> = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let t = grid.time(i);
        let h = h_of_t(t).map_err(|e| e.to_string())?;
        let (a0, r) = pauli_vector_re(&h);
        let frame = frame_from_field(t, a0, r, frames.last()).map_err(|e| e.to_string())?;
        frames.push(frame);
    }
    let beta_plus = frames.iter().map(|f| f.gauge_phase_plus).collect();
    let beta_minus = frames.iter().map(|f| f.gauge_phase_minus).collect();
    Ok(SpectralData {
        frames,
        beta_plus,
        beta_minus,
    })
}

/// Propagate a model's Hamiltonian over a grid.
pub fn propagate(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_schrodinger(|t| Ok(model.hamiltonian(t)), grid, cfg)
}

/// Propagate under the spectral-projection generator `H + i[Ṗ₊, P₊]`.
pub fn avron_trajectory(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_schrodinger(|t| avron_hamiltonian(model, t), grid, cfg)
}

/// The modified generator `H_A = H + i[Ṗ₊, P₊]` whose evolution transports
/// the spectral subspaces exactly. With `P₊ = (1 + R̂·σ)/2` the commutator
/// reduces to `½ (R̂ × R̂̇)·σ`.
pub fn avron_hamiltonian(model: &HamiltonianModel, t: f64) -> Result<Mat2> {
    let (a0, r) = model.field_vector(t);
    let norm_r = r.norm();
    if norm_r <= tol::GAP_FLOOR {
        return Err(AdiaError::DegenerateSpectrum {
            t,
            gap: norm_r,
            floor: tol::GAP_FLOOR,
        });
    }
    let r_hat = r.scale(1.0 / norm_r);
    let r_dot = model.field_derivative(t);
    let r_hat_dot = r_dot.sub(&r_hat.scale(r_hat.dot(&r_dot))).scale(1.0 / norm_r);
    let field = r.add(&r_hat.cross(&r_hat_dot).scale(0.5));
    Ok(pauli_compose_unchecked(a0, field))
}

/// Reversed-frame Hamiltonian `H̄(t) = −U†(t, t₀) H(t) U(t, t₀)`; its
/// spectrum is `{−E₊(t), −E₋(t)}`.
pub fn reversed_frame_hamiltonian(
    traj: &Trajectory,
    model: &HamiltonianModel,
    t_index: usize,
) -> Result<Mat2> {
    if t_index >= traj.len() {
        return Err(AdiaError::invalid(format!(
            "t_index {t_index} out of range for trajectory of {} samples",
            traj.len()
        )));
    }
    let u = traj.u(t_index);
    let h = model.hamiltonian(traj.time(t_index));
    Ok(u.adjoint().mul(&h).mul(u).scale(Complex::new(-1.0, 0.0)))
}

/// Dynamical phases `∫ E_n dt` accumulated by the trapezoid rule on the
/// trajectory grid, matching the O(h²) of the gauge-link accumulation.
pub fn dynamical_phases(frames: &[SpectralFrame], branch: Branch, dt: f64) -> Vec<f64> {
    let mut phases = Vec::with_capacity(frames.len());
    let mut acc = 0.0;
    phases.push(0.0);
    for pair in frames.windows(2) {
        acc += 0.5 * dt * (pair[0].eigenvalue(branch) + pair[1].eigenvalue(branch));
        phases.push(acc);
    }
    phases
}

/// Geometric phase of one branch along gauge-linked frames, reconstructed
/// from the parallel-transport gauge records. Starts at zero.
pub fn geometric_phase(frames: &[SpectralFrame], branch: Branch) -> Vec<f64> {
    frames.iter().map(|f| f.gauge_phase(branch)).collect()
}

/// Adiabatic-frame propagator samples
/// `U_AT(tᵢ) = Σ_n e^{−i∫Eₙ} e^{iβₙ} |Eₙ(tᵢ)⟩⟨Eₙ(t₀)|`.
///
/// The stored parallel-transported eigenvectors absorb the geometric phase,
/// so each sample is the sum of dynamical-phased outer products. Every
/// sample is unitary (orthonormal frames) and the first one is the identity.
pub fn adiabatic_propagator(traj: &Trajectory) -> Result<Vec<Mat2>> {
    let frames = traj.frames()?;
    let dt = traj.grid().dt();
    let phi_plus = dynamical_phases(frames, Branch::Plus, dt);
    let phi_minus = dynamical_phases(frames, Branch::Minus, dt);
    let first = &frames[0];
    let mut out = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        let plus = Mat2::outer(&frame.v_plus, &first.v_plus)
            .scale(Complex::from_polar(1.0, -phi_plus[i]));
        let minus = Mat2::outer(&frame.v_minus, &first.v_minus)
            .scale(Complex::from_polar(1.0, -phi_minus[i]));
        out.push(plus.add(&minus));
    }
    Ok(out)
}

/// Structural check of the adiabatic-frame generator.
///
/// Computes `−i U_AT† U̇_AT` by central differences and compares it against
/// the analytic form assembled from the frames: the static diagonal
/// `−Σ Eₙ(t) |Eₙ(t₀)⟩⟨Eₙ(t₀)|` plus phase-dressed off-diagonal couplings.
/// Returns the maximum Frobenius deviation over interior grid points;
/// scales as O(h²) with the grid step.
pub fn at_frame_hamiltonian_check(traj: &Trajectory) -> Result<f64> {
    let frames = traj.frames()?;
    let n = frames.len();
    if n < 3 {
        return Err(AdiaError::invalid(
            "at_frame_hamiltonian_check needs at least 3 samples",
        ));
    }
    let u_at = adiabatic_propagator(traj)?;
    let dt = traj.grid().dt();
    let phi_plus = dynamical_phases(frames, Branch::Plus, dt);
    let phi_minus = dynamical_phases(frames, Branch::Minus, dt);
    let first = &frames[0];
    let p_plus0 = Mat2::outer(&first.v_plus, &first.v_plus);
    let p_minus0 = Mat2::outer(&first.v_minus, &first.v_minus);
    let inv_2dt = Complex::new(0.5 / dt, 0.0);

    let mut max_resid: f64 = 0.0;
    for i in 1..n - 1 {
        let frame = &frames[i];
        // Left side: finite-difference generator of U_AT.
        let du = u_at[i + 1].sub(&u_at[i - 1]).scale(inv_2dt);
        let lhs = u_at[i].adjoint().mul(&du).scale(-IM);

        // Right side: diagonal part in the initial eigenbasis...
        let diag = p_plus0
            .scale(Complex::new(-frame.e_plus, 0.0))
            .add(&p_minus0.scale(Complex::new(-frame.e_minus, 0.0)));
        // ...plus off-diagonal couplings ⟨Eₙ|Ė_m⟩ from finite differences of
        // the transported eigenvectors.
        let w_plus_dot = frames[i + 1]
            .v_plus
            .sub(&frames[i - 1].v_plus)
            .scale(inv_2dt);
        let w_minus_dot = frames[i + 1]
            .v_minus
            .sub(&frames[i - 1].v_minus)
            .scale(inv_2dt);
        let c_pm = overlap(&frame.v_plus, &w_minus_dot);
        let c_mp = overlap(&frame.v_minus, &w_plus_dot);
        let phase_pm = Complex::from_polar(1.0, phi_plus[i] - phi_minus[i]);
        let off = Mat2::outer(&first.v_plus, &first.v_minus)
            .scale(phase_pm * c_pm)
            .add(&Mat2::outer(&first.v_minus, &first.v_plus).scale(phase_pm.conj() * c_mp))
            .scale(-IM);

        let resid = lhs.sub(&diag.add(&off)).frobenius_norm();
        max_resid = max_resid.max(resid);
    }
    Ok(max_resid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::RealVec3;
    use std::f64::consts::PI;

    const TAU_20PI: f64 = 20.0 * PI;

    fn counterexample() -> HamiltonianModel {
        HamiltonianModel::counterexample(1.0, TAU_20PI).unwrap()
    }

    fn rotating() -> HamiltonianModel {
        HamiltonianModel::rotating_field(1.0, TAU_20PI).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 2).is_ok());
        assert!(TimeGrid::new(1.0, 1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn constant_sigma_z_over_pi() {
        // U(π) = diag(e^{−iπ}, e^{iπ}) = −1.
        let model = HamiltonianModel::constant(RealVec3::new(0.0, 0.0, 1.0)).unwrap();
        let grid = TimeGrid::new(0.0, PI, 1000).unwrap();
        let traj = propagate(&model, &grid, &IntegratorConfig::default()).unwrap();
        let expect = Mat2::identity().scale(Complex::new(-1.0, 0.0));
        assert!(traj.u(traj.len() - 1).sub(&expect).frobenius_norm() < 1e-10);
        assert!(traj.u(0).sub(&Mat2::identity()).frobenius_norm() == 0.0);
    }

    #[test]
    fn zero_hamiltonian_stays_identity() {
        let grid = TimeGrid::new(0.0, 5.0, 50).unwrap();
        let traj = integrate_schrodinger(|_| Ok(Mat2::zero()), &grid, &IntegratorConfig::default())
            .unwrap();
        for u in traj.u_samples() {
            assert!(u.sub(&Mat2::identity()).frobenius_norm() == 0.0);
        }
        // Degenerate spectrum: frames must fail loudly, propagation must not.
        assert!(traj.frames().is_err());
        assert!(traj.beta(Branch::Plus).is_err());
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let bad = Mat2::new(
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
        );
        let err = integrate_schrodinger(|_| Ok(bad), &grid, &IntegratorConfig::default());
        assert!(matches!(err, Err(AdiaError::InvalidArgument(_))));
    }

    #[test]
    fn counterexample_matches_closed_form() {
        let model = counterexample();
        let grid = TimeGrid::new(0.0, TAU_20PI / 2.0, 2000).unwrap();
        let traj = propagate(&model, &grid, &IntegratorConfig::default()).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..traj.len() {
            let exact = model.closed_form_unitary(traj.time(i)).unwrap();
            worst = worst.max(traj.u(i).sub(&exact).frobenius_norm());
        }
        assert!(worst <= 1e-6, "worst Frobenius error {worst:.3e}");
    }

    #[test]
    fn rk45_matches_closed_form() {
        let model = counterexample();
        let grid = TimeGrid::new(0.0, TAU_20PI / 2.0, 500).unwrap();
        let cfg = IntegratorConfig {
            method: Method::Rk45Adaptive,
            rel_tol: 1e-11,
            abs_tol: 1e-13,
            ..Default::default()
        };
        let traj = propagate(&model, &grid, &cfg).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..traj.len() {
            let exact = model.closed_form_unitary(traj.time(i)).unwrap();
            worst = worst.max(traj.u(i).sub(&exact).frobenius_norm());
        }
        assert!(worst <= 1e-6, "worst Frobenius error {worst:.3e}");
    }

    #[test]
    fn drift_cap_triggers() {
        let model = HamiltonianModel::constant(RealVec3::new(0.0, 0.0, 5.0)).unwrap();
        let grid = TimeGrid::new(0.0, 50.0, 40).unwrap();
        let cfg = IntegratorConfig {
            max_unitarity_drift: 1e-14,
            ..Default::default()
        };
        let err = propagate(&model, &grid, &cfg);
        assert!(matches!(err, Err(AdiaError::IntegrationDiverged { .. })));
    }

    #[test]
    fn substeps_refine_without_changing_grid() {
        let model = counterexample();
        let grid = TimeGrid::new(0.0, TAU_20PI / 2.0, 100).unwrap();
        // Coarse run drifts past the default cap on purpose.
        let coarse_cfg = IntegratorConfig {
            max_unitarity_drift: 1e-1,
            ..Default::default()
        };
        let coarse = propagate(&model, &grid, &coarse_cfg).unwrap();
        let fine_cfg = IntegratorConfig {
            substeps: 20,
            ..Default::default()
        };
        let fine = propagate(&model, &grid, &fine_cfg).unwrap();
        assert_eq!(coarse.len(), fine.len());
        let t_end = grid.t1;
        let exact = model.closed_form_unitary(t_end).unwrap();
        let err_coarse = coarse.u(100).sub(&exact).frobenius_norm();
        let err_fine = fine.u(100).sub(&exact).frobenius_norm();
        assert!(err_fine < err_coarse / 100.0);
    }

    #[test]
    fn fourth_order_convergence() {
        let model = counterexample();
        let span = TAU_20PI / 2.0;
        let err_at = |steps: usize| {
            let grid = TimeGrid::new(0.0, span, steps).unwrap();
            // Coarse grids exceed the default drift cap by construction.
            let cfg = IntegratorConfig {
                max_unitarity_drift: 1e-3,
                ..Default::default()
            };
            let traj = propagate(&model, &grid, &cfg).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..traj.len() {
                let exact = model.closed_form_unitary(traj.time(i)).unwrap();
                worst = worst.max(traj.u(i).sub(&exact).frobenius_norm());
            }
            worst
        };
        let e1 = err_at(250);
        let e2 = err_at(500);
        assert!(
            e1 / e2 >= 8.0,
            "halving the step reduced error only {:.2}x (e1={e1:.3e}, e2={e2:.3e})",
            e1 / e2
        );
    }

    #[test]
    fn composition_over_subintervals() {
        let model = counterexample();
        let cfg = IntegratorConfig::default();
        let mid = 7.0;
        let end = 14.0;
        let a = propagate(&model, &TimeGrid::new(0.0, mid, 700).unwrap(), &cfg).unwrap();
        let b = propagate(&model, &TimeGrid::new(mid, end, 700).unwrap(), &cfg).unwrap();
        let full = propagate(&model, &TimeGrid::new(0.0, end, 1400).unwrap(), &cfg).unwrap();
        let composed = b.u(b.len() - 1).mul(a.u(a.len() - 1));
        let direct = full.u(full.len() - 1);
        assert!(composed.sub(direct).frobenius_norm() < 1e-9);
    }

    #[test]
    fn adiabatic_propagator_constant_field_is_exact() {
        let model = HamiltonianModel::constant(RealVec3::new(0.3, 0.4, 1.2)).unwrap();
        let grid = TimeGrid::new(0.0, 4.0, 400).unwrap();
        let traj = propagate(&model, &grid, &IntegratorConfig::default()).unwrap();
        let u_at = adiabatic_propagator(&traj).unwrap();
        assert!(u_at[0].sub(&Mat2::identity()).frobenius_norm() < 1e-14);
        for (i, u) in u_at.iter().enumerate() {
            assert!(unitarity_error(u) <= tol::AT_UNITARITY);
            assert!(
                u.sub(traj.u(i)).frobenius_norm() < 1e-7,
                "sample {i}: {:.3e}",
                u.sub(traj.u(i)).frobenius_norm()
            );
        }
    }

    #[test]
    fn adiabatic_propagator_tracks_rotating_field() {
        let model = rotating();
        let grid = TimeGrid::new(0.0, TAU_20PI / 2.0, 2000).unwrap();
        let traj = propagate(&model, &grid, &IntegratorConfig::default()).unwrap();
        let u_at = adiabatic_propagator(&traj).unwrap();
        let psi0 = traj.frames().unwrap()[0].v_plus;
        for (i, u_at_i) in u_at.iter().enumerate() {
            let exact = traj.u(i).apply(&psi0);
            let predicted = u_at_i.apply(&psi0);
            let fidelity = overlap(&exact, &predicted).norm();
            assert!(fidelity >= 0.99, "fidelity {fidelity} at sample {i}");
        }
    }

    #[test]
    fn adiabatic_propagator_fails_on_counterexample_half_period() {
        // At T = τ/2 the exact propagator is back to the identity while the
        // frame prediction has moved |+(0)⟩ to the antipodal eigenvector.
        let model = counterexample();
        let t_end = TAU_20PI / 2.0;
        let grid = TimeGrid::new(0.0, t_end, 4000).unwrap();
        let traj = propagate(&model, &grid, &IntegratorConfig::default()).unwrap();
        let u_at = adiabatic_propagator(&traj).unwrap();
        let frames = traj.frames().unwrap();
        let psi0 = frames[0].v_plus;
        let last = traj.len() - 1;

        let exact_final = traj.u(last).apply(&psi0);
        assert!(overlap(&exact_final, &psi0).norm() > 1.0 - 1e-6);

        let predicted = u_at[last].apply(&psi0);
        let minus0 = frames[0].v_minus;
        assert!(overlap(&predicted, &minus0).norm() > 1.0 - 1e-9);
        assert!(overlap(&predicted, &psi0).norm() < 1e-9);
    }

    #[test]
    fn geometric_phase_constant_field_is_zero() {
        let model = HamiltonianModel::constant(RealVec3::new(0.0, 1.0, 0.5)).unwrap();
        let grid = TimeGrid::new(0.0, 3.0, 300).unwrap();
        let traj = propagate(&model, &grid, &IntegratorConfig::default()).unwrap();
        for b in [Branch::Plus, Branch::Minus] {
            let beta = traj.beta(b).unwrap();
            assert_eq!(beta[0], 0.0);
            assert!(beta.iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn geometric_phase_rotating_loop_is_minus_pi() {
        // Equatorial loop: solid angle 2π, branch phase −π (mod 2π).
        let model = rotating();
        let grid = TimeGrid::new(0.0, TAU_20PI, 20000).unwrap();
        let traj = propagate(&model, &grid, &IntegratorConfig::default()).unwrap();
        let beta = traj.beta(Branch::Plus).unwrap();
        let closed = beta[beta.len() - 1];
        let wrapped = (closed + PI).rem_euclid(2.0 * PI) - PI;
        // −π wraps to ±π; compare distance to ±π.
        assert!(
            (wrapped.abs() - PI).abs() < 1e-6,
            "closed-loop phase {closed} (wrapped {wrapped})"
        );
    }

    #[test]
    fn avron_hamiltonian_constant_equals_h() {
        let model = HamiltonianModel::constant(RealVec3::new(0.2, -0.4, 0.9)).unwrap();
        let h_a = avron_hamiltonian(&model, 1.0).unwrap();
        assert!(h_a.sub(&model.hamiltonian(1.0)).frobenius_norm() == 0.0);
    }

    #[test]
    fn avron_correction_structure() {
        // The correction is traceless, hermitian, and orthogonal to R̂ in
        // Pauli space. For the plain rotating field its magnitude is
        // |ṅ|/2 = π/τ; the resonant modulation of the counterexample doubles
        // the transported rate where sin(ω₀t) = 0.
        let rot = rotating();
        let ce = counterexample();
        for t in [0.0, PI, 5.3] {
            for model in [&rot, &ce] {
                let h = model.hamiltonian(t);
                let diff = avron_hamiltonian(model, t).unwrap().sub(&h);
                assert!(diff.trace().norm() < 1e-14);
                assert!(diff.hermiticity_error() < 1e-14);
                let (_, c) = pauli_vector_re(&diff);
                let (_, r) = model.field_vector(t);
                assert!(c.dot(&r).abs() < 1e-12 * r.norm().max(1.0));
            }
        }
        let nu = 2.0 * PI / TAU_20PI;
        for t in [0.0, PI, 2.0 * PI] {
            let (_, c_rot) = pauli_vector_re(&avron_hamiltonian(&rot, t).unwrap().sub(&rot.hamiltonian(t)));
            assert!((c_rot.norm() - 0.5 * nu).abs() < 1e-12);
            let (_, c_ce) = pauli_vector_re(&avron_hamiltonian(&ce, t).unwrap().sub(&ce.hamiltonian(t)));
            assert!((c_ce.norm() - nu).abs() < 1e-12, "t={t}: {}", c_ce.norm());
        }
    }

    #[test]
    fn reversed_frame_hamiltonian_properties() {
        let model = counterexample();
        let grid = TimeGrid::new(0.0, TAU_20PI / 2.0, 2000).unwrap();
        let traj = propagate(&model, &grid, &IntegratorConfig::default()).unwrap();

        // At t₀, U = 1 so H̄ = −H(t₀).
        let h_bar0 = reversed_frame_hamiltonian(&traj, &model, 0).unwrap();
        assert!(h_bar0
            .add(&model.hamiltonian(0.0))
            .frobenius_norm()
            < 1e-14);

        // Spectrum is {−E₊, −E₋} everywhere.
        let frames = traj.frames().unwrap();
        for i in (0..traj.len()).step_by(97) {
            let h_bar = reversed_frame_hamiltonian(&traj, &model, i).unwrap();
            let (hi, lo) = h_bar.hermitian_eigenvalues();
            assert!((hi - (-frames[i].e_minus)).abs() < 1e-8);
            assert!((lo - (-frames[i].e_plus)).abs() < 1e-8);
        }

        // At T = τ/2 the exact propagator is the identity, so H̄ = −H(T).
        let last = traj.len() - 1;
        let h_bar = reversed_frame_hamiltonian(&traj, &model, last).unwrap();
        assert!(
            h_bar.add(&model.hamiltonian(grid.t1)).frobenius_norm() < 1e-6,
            "{:.3e}",
            h_bar.add(&model.hamiltonian(grid.t1)).frobenius_norm()
        );

        assert!(reversed_frame_hamiltonian(&traj, &model, traj.len()).is_err());
    }

    #[test]
    fn at_frame_check_constant_field() {
        let model = HamiltonianModel::constant(RealVec3::new(0.0, 0.0, 0.5)).unwrap();
        let grid = TimeGrid::new(0.0, PI, 20000).unwrap();
        let traj = propagate(&model, &grid, &IntegratorConfig::default()).unwrap();
        let resid = at_frame_hamiltonian_check(&traj).unwrap();
        assert!(resid <= 1e-8, "residual {resid:.3e}");
    }

    #[test]
    fn at_frame_check_counterexample() {
        let model = counterexample();
        let grid = TimeGrid::new(0.0, TAU_20PI / 2.0, 4000).unwrap();
        let traj = propagate(&model, &grid, &IntegratorConfig::default()).unwrap();
        let resid = at_frame_hamiltonian_check(&traj).unwrap();
        assert!(resid <= 1e-3, "residual {resid:.3e}");
    }
}
