//! Time-dependent two-level Hamiltonian models.
//!
//! Every model exposes its field vector `R(t)` with `H(t) = a₀(t)·1 + R(t)·σ`,
//! an analytic time derivative where one exists, instantaneous spectral frames
//! with a smooth (parallel-transport) gauge, and the slowness ratio
//! `|⟨E₊|Ė₋⟩| / |E₊ − E₋|`.
//!
//! Built-in models:
//!
//! * [`HamiltonianModel::Counterexample`] — a resonantly modulated rotating
//!   field whose exact propagator has the closed form
//!   `U(t) = cos(ω₀t)·1 − i n(t)·σ sin(ω₀t)` with `n(t)` sweeping the x–y
//!   plane once per period `τ`. The slowness criterion is satisfied for
//!   `ω₀τ ≫ 1`, yet the instantaneous-eigenstate prediction fails maximally
//!   at `t = τ/2`.
//! * [`HamiltonianModel::RotatingField`] — the plain spin-½ rotating-field
//!   Hamiltonian `R(t) = ω₀ n(t)`, the control case where instantaneous
//!   eigenstate tracking works.
//! * [`HamiltonianModel::LandauZener`] — linear avoided-crossing sweep
//!   `R(t) = Ω e_x − (Δ̇₀ t/2) e_z`.
//! * [`HamiltonianModel::Constant`] — fixed field.
//! * [`HamiltonianModel::Tabulated`] — samples from a file, cubic
//!   interpolation.

use std::f64::consts::PI;

use crate::error::{AdiaError, Result};
use crate::mat2::{overlap, pauli_compose_unchecked, Complex, Mat2, RealVec3, Vec2};
use crate::tol;

/// Eigenvalue branch selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The `+|R|` branch (highest eigenvalue).
    Plus,
    /// The `−|R|` branch.
    Minus,
}

/// A parametrized time-dependent two-level Hamiltonian.
#[derive(Debug, Clone)]
pub enum HamiltonianModel {
    /// Closed-form counterexample: `θ(t) = ω₀ t`,
    /// `n(t) = (cos 2πt/τ, sin 2πt/τ, 0)`.
    Counterexample { omega0: f64, tau: f64 },
    /// Spin-½ in a field of strength `ω₀` rotating in the x–y plane with
    /// period `τ`.
    RotatingField { omega0: f64, tau: f64 },
    /// Avoided-crossing sweep with Rabi coupling `rabi` and detuning slope
    /// `sweep_rate`, time origin at the crossing.
    LandauZener { rabi: f64, sweep_rate: f64 },
    /// Time-independent field.
    Constant { r: RealVec3 },
    /// Field sampled on a uniform time grid, cubic interpolation.
    Tabulated(TabulatedField),
}

impl HamiltonianModel {
    pub fn counterexample(omega0: f64, tau: f64) -> Result<Self> {
        validate_omega_tau("model", omega0, tau)?;
        Ok(Self::Counterexample { omega0, tau })
    }

    pub fn rotating_field(omega0: f64, tau: f64) -> Result<Self> {
        validate_omega_tau("model", omega0, tau)?;
        Ok(Self::RotatingField { omega0, tau })
    }

    pub fn landau_zener(rabi: f64, sweep_rate: f64) -> Result<Self> {
        if !rabi.is_finite() || rabi == 0.0 {
            return Err(AdiaError::config("model.rabi", "must be finite and nonzero"));
        }
        if !sweep_rate.is_finite() {
            return Err(AdiaError::config("model.sweep_rate", "must be finite"));
        }
        Ok(Self::LandauZener { rabi, sweep_rate })
    }

    pub fn constant(r: RealVec3) -> Result<Self> {
        if !r.is_finite() {
            return Err(AdiaError::config("model.r", "must be finite"));
        }
        Ok(Self::Constant { r })
    }

    /// Variant name for error messages and reports.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Counterexample { .. } => "counterexample",
            Self::RotatingField { .. } => "rotating_field",
            Self::LandauZener { .. } => "landau_zener",
            Self::Constant { .. } => "constant",
            Self::Tabulated(_) => "tabulated",
        }
    }

    /// Sweep period, for models that have one.
    pub fn tau(&self) -> Option<f64> {
        match self {
            Self::Counterexample { tau, .. } | Self::RotatingField { tau, .. } => Some(*tau),
            _ => None,
        }
    }

    /// True for the variant with a closed-form propagator.
    pub fn has_closed_form_unitary(&self) -> bool {
        matches!(self, Self::Counterexample { .. })
    }

    /// Field vector at time `t`: returns `(a₀, R)` with
    /// `H(t) = a₀·1 + R·σ`. All built-in models are traceless (`a₀ = 0`).
    pub fn field_vector(&self, t: f64) -> (f64, RealVec3) {
        debug_assert!(t.is_finite());
        match *self {
            Self::Counterexample { omega0, tau } => {
                let nu = 2.0 * PI / tau;
                let (s, c) = (omega0 * t).sin_cos();
                let (sp, cp) = (nu * t).sin_cos();
                // R = ω₀ n + (2π sinθ / τ)(−sinφ cosθ, cosφ cosθ, sinθ)
                let r = RealVec3::new(
                    omega0 * cp - nu * s * c * sp,
                    omega0 * sp + nu * s * c * cp,
                    nu * s * s,
                );
                (0.0, r)
            }
            Self::RotatingField { omega0, tau } => {
                let nu = 2.0 * PI / tau;
                let (sp, cp) = (nu * t).sin_cos();
                (0.0, RealVec3::new(omega0 * cp, omega0 * sp, 0.0))
            }
            Self::LandauZener { rabi, sweep_rate } => {
                (0.0, RealVec3::new(rabi, 0.0, -0.5 * sweep_rate * t))
            }
            Self::Constant { r } => (0.0, r),
            Self::Tabulated(ref table) => table.sample(t),
        }
    }

    /// Time derivative `Ṙ(t)`. Analytic for built-in models; central finite
    /// difference with step `1e-6·max(1, |t|)` for tabulated fields.
    pub fn field_derivative(&self, t: f64) -> RealVec3 {
        debug_assert!(t.is_finite());
        match *self {
            Self::Counterexample { omega0, tau } => {
                let nu = 2.0 * PI / tau;
                let (s, c) = (omega0 * t).sin_cos();
                let (sp, cp) = (nu * t).sin_cos();
                let sc_dot = omega0 * (c * c - s * s);
                RealVec3::new(
                    -omega0 * nu * sp - nu * (sc_dot * sp + s * c * nu * cp),
                    omega0 * nu * cp + nu * (sc_dot * cp - s * c * nu * sp),
                    2.0 * omega0 * nu * s * c,
                )
            }
            Self::RotatingField { omega0, tau } => {
                let nu = 2.0 * PI / tau;
                let (sp, cp) = (nu * t).sin_cos();
                RealVec3::new(-omega0 * nu * sp, omega0 * nu * cp, 0.0)
            }
            Self::LandauZener { sweep_rate, .. } => RealVec3::new(0.0, 0.0, -0.5 * sweep_rate),
            Self::Constant { .. } => RealVec3::zero(),
            Self::Tabulated(ref table) => {
                let h = 1e-6 * t.abs().max(1.0);
                let (_, fwd) = table.sample(t + h);
                let (_, bwd) = table.sample(t - h);
                fwd.sub(&bwd).scale(0.5 / h)
            }
        }
    }

    /// `H(t)` as a matrix.
    pub fn hamiltonian(&self, t: f64) -> Mat2 {
        let (a0, r) = self.field_vector(t);
        pauli_compose_unchecked(a0, r)
    }

    /// Closed-form propagator `cos(ω₀t)·1 − i n(t)·σ sin(ω₀t)`.
    /// Only the counterexample variant carries one.
    pub fn closed_form_unitary(&self, t: f64) -> Result<Mat2> {
        match *self {
            Self::Counterexample { omega0, tau } => {
                let nu = 2.0 * PI / tau;
                let (sp, cp) = (nu * t).sin_cos();
                let n = RealVec3::new(cp, sp, 0.0);
                crate::mat2::su2_exponential(omega0 * t, n)
            }
            _ => Err(AdiaError::UnsupportedModel {
                operation: "closed_form_unitary",
                model: self.name(),
            }),
        }
    }

    /// Instantaneous spectral frame at `t`; see [`frame_from_field`].
    pub fn spectral_frame(&self, t: f64, prev: Option<&SpectralFrame>) -> Result<SpectralFrame> {
        let (a0, r) = self.field_vector(t);
        frame_from_field(t, a0, r, prev)
    }

    /// Gauge-covariant off-diagonal coupling `⟨E₊|Ė₋⟩`, computed through the
    /// identity `⟨E₊|Ḣ|E₋⟩ / (E₋ − E₊)`. Its magnitude is gauge-invariant.
    pub fn coupling_element(&self, t: f64, frame: &SpectralFrame) -> Result<Complex> {
        let gap = frame.e_plus - frame.e_minus;
        if gap.abs() <= 2.0 * tol::GAP_FLOOR {
            return Err(AdiaError::DegenerateSpectrum {
                t,
                gap: 0.5 * gap.abs(),
                floor: tol::GAP_FLOOR,
            });
        }
        let h_dot = pauli_compose_unchecked(0.0, self.field_derivative(t));
        let num = overlap(&frame.v_plus, &h_dot.apply(&frame.v_minus));
        Ok(num / Complex::new(-gap, 0.0))
    }

    /// Slowness ratio `|⟨E₊|Ė₋⟩| / |E₊ − E₋|`. Small compared to one is the
    /// textbook criterion for adiabatic evolution.
    pub fn adiabaticity_ratio(&self, t: f64) -> Result<f64> {
        let frame = self.spectral_frame(t, None)?;
        let coupling = self.coupling_element(t, &frame)?;
        Ok(coupling.norm() / (frame.e_plus - frame.e_minus).abs())
    }
}

fn validate_omega_tau(prefix: &str, omega0: f64, tau: f64) -> Result<()> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(AdiaError::config(
            format!("{prefix}.omega0"),
            "must be finite and > 0",
        ));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(AdiaError::config(
            format!("{prefix}.tau"),
            "must be finite and > 0",
        ));
    }
    Ok(())
}

/// Instantaneous eigenvalues and gauge-smoothed eigenvectors at one time
/// sample.
///
/// `gauge_phase_*` records the accumulated phase adjustment applied to the
/// raw branch-formula eigenvector by parallel transport; along a gauge-linked
/// chain it reconstructs the geometric phase of each branch.
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    pub t: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub v_plus: Vec2,
    pub v_minus: Vec2,
    pub gauge_phase_plus: f64,
    pub gauge_phase_minus: f64,
}

impl SpectralFrame {
    pub fn eigenvalue(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.e_plus,
            Branch::Minus => self.e_minus,
        }
    }

    pub fn eigenvector(&self, branch: Branch) -> &Vec2 {
        match branch {
            Branch::Plus => &self.v_plus,
            Branch::Minus => &self.v_minus,
        }
    }

    pub fn gauge_phase(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Plus => self.gauge_phase_plus,
            Branch::Minus => self.gauge_phase_minus,
        }
    }
}

/// Raw branch-formula eigenvectors of `R·σ`, selected by the sign of `R_z`
/// to stay clear of the antipodal singularity of either formula.
fn raw_eigenvectors(r: &RealVec3, norm_r: f64) -> (Vec2, Vec2) {
    if r.z >= 0.0 {
        let plus = Vec2::new(
            Complex::new(norm_r + r.z, 0.0),
            Complex::new(r.x, r.y),
        );
        let minus = Vec2::new(
            Complex::new(-r.x, r.y),
            Complex::new(norm_r + r.z, 0.0),
        );
        (plus, minus)
    } else {
        let plus = Vec2::new(
            Complex::new(r.x, -r.y),
            Complex::new(norm_r - r.z, 0.0),
        );
        let minus = Vec2::new(
            Complex::new(norm_r - r.z, 0.0),
            Complex::new(-r.x, -r.y),
        );
        (plus, minus)
    }
}

/// Build a spectral frame from a field vector.
///
/// Eigenvalues are `a₀ ± |R|`. If `prev` is given, each eigenvector is
/// re-phased so its overlap with the previous sample is real and positive
/// (parallel transport), and the accumulated adjustment is carried in the
/// `gauge_phase` records. Fails when `|R|` is at or below the gap floor.
pub fn frame_from_field(
    t: f64,
    a0: f64,
    r: RealVec3,
    prev: Option<&SpectralFrame>,
) -> Result<SpectralFrame> {
    if !t.is_finite() || !a0.is_finite() || !r.is_finite() {
        return Err(AdiaError::invalid("spectral frame requires finite inputs"));
    }
    let norm_r = r.norm();
    if norm_r <= tol::GAP_FLOOR {
        return Err(AdiaError::DegenerateSpectrum {
            t,
            gap: norm_r,
            floor: tol::GAP_FLOOR,
        });
    }
    let (raw_plus, raw_minus) = raw_eigenvectors(&r, norm_r);
    let raw_plus = raw_plus.normalized()?;
    let raw_minus = raw_minus.normalized()?;

    let (v_plus, g_plus) = match prev {
        None => (raw_plus, 0.0),
        Some(p) => transport(&p.v_plus, p.gauge_phase_plus, &raw_plus, t)?,
    };
    let (v_minus, g_minus) = match prev {
        None => (raw_minus, 0.0),
        Some(p) => transport(&p.v_minus, p.gauge_phase_minus, &raw_minus, t)?,
    };

    Ok(SpectralFrame {
        t,
        e_plus: a0 + norm_r,
        e_minus: a0 - norm_r,
        v_plus,
        v_minus,
        gauge_phase_plus: g_plus,
        gauge_phase_minus: g_minus,
    })
}

/// Parallel-transport one eigenvector: continue the previous accumulated
/// gauge phase, then remove the residual so `⟨prev|new⟩` is real positive.
fn transport(prev_v: &Vec2, prev_gauge: f64, raw: &Vec2, t: f64) -> Result<(Vec2, f64)> {
    let candidate = raw.scale(Complex::from_polar(1.0, prev_gauge));
    let link = overlap(prev_v, &candidate);
    if link.norm() < 0.1 {
        // Successive samples nearly orthogonal: the grid is far too coarse
        // to define a transported gauge.
        return Err(AdiaError::invalid(format!(
            "gauge link lost at t = {t}: successive eigenvectors nearly orthogonal \
             (|overlap| = {:.3e}); refine the time grid",
            link.norm()
        )));
    }
    let gauge = prev_gauge - link.arg();
    Ok((raw.scale(Complex::from_polar(1.0, gauge)), gauge))
}

/// Counterexample propagator parametrization: `(θ, n, θ̇, ṅ)` at time `t`.
pub(crate) fn counterexample_axes(
    omega0: f64,
    tau: f64,
    t: f64,
) -> (f64, RealVec3, f64, RealVec3) {
    let nu = 2.0 * PI / tau;
    let (sp, cp) = (nu * t).sin_cos();
    let n = RealVec3::new(cp, sp, 0.0);
    let n_dot = RealVec3::new(-nu * sp, nu * cp, 0.0);
    (omega0 * t, n, omega0, n_dot)
}

/// Rotating-field exact propagator in su(2) components.
///
/// `U(t) = s·1 − i v·σ` with analytic `ṡ`, `v̇`, obtained from the
/// rotating-frame factorization
/// `U(t) = exp(−i(νt/2)σz) · exp(−it(ω₀σx − (ν/2)σz))`, `ν = 2π/τ`.
pub(crate) struct Su2Path {
    pub s: f64,
    pub v: RealVec3,
    pub s_dot: f64,
    pub v_dot: RealVec3,
}

pub(crate) fn rotating_field_su2(omega0: f64, tau: f64, t: f64) -> Su2Path {
    let nu = 2.0 * PI / tau;
    let w = (omega0 * omega0 + 0.25 * nu * nu).sqrt();
    let kappa = 0.5 * nu / w;
    let (sa, ca) = (0.5 * nu * t).sin_cos();
    let (sb, cb) = (w * t).sin_cos();
    let k = omega0 / w;

    let s = ca * cb + kappa * sa * sb;
    let v = RealVec3::new(
        k * ca * sb,
        k * sa * sb,
        sa * cb - kappa * ca * sb,
    );
    let s_dot = -(omega0 * omega0 / w) * ca * sb;
    let v_dot = RealVec3::new(
        k * (-0.5 * nu * sa * sb + w * ca * cb),
        k * (0.5 * nu * ca * sb + w * sa * cb),
        0.5 * nu * ca * cb - w * sa * sb - kappa * (-0.5 * nu * sa * sb + w * ca * cb),
    );
    Su2Path { s, v, s_dot, v_dot }
}

/// Matrix form of an su(2) path sample, `s·1 − i v·σ`.
#[cfg(test)]
pub(crate) fn su2_matrix(s: f64, v: &RealVec3) -> Mat2 {
    Mat2::identity().scale(Complex::new(s, 0.0))
        + pauli_compose_unchecked(0.0, *v).scale(-crate::mat2::IM)
}

/// Field samples on a uniform time grid with cubic interpolation.
///
/// File format: a `# adia-model v1` header line, then one sample per line,
/// whitespace-separated `t a0 Rx Ry Rz`. Comment lines start with `#`.
#[derive(Debug, Clone)]
pub struct TabulatedField {
    t0: f64,
    dt: f64,
    a0: Vec<f64>,
    r: Vec<RealVec3>,
}

pub const TABULATED_HEADER: &str = "# adia-model v1";

impl TabulatedField {
    /// Parse from text in the tabulated-model format.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((_, l)) => break l.trim(),
                None => {
                    return Err(AdiaError::config(origin, "empty model file"));
                }
            }
        };
        if header != TABULATED_HEADER {
            return Err(AdiaError::config(
                origin,
                format!("missing `{TABULATED_HEADER}` header (found `{header}`)"),
            ));
        }

        let mut ts = Vec::new();
        let mut a0 = Vec::new();
        let mut r = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|w| {
                    w.parse::<f64>().map_err(|_| {
                        AdiaError::config(
                            format!("{origin}:{}", idx + 1),
                            format!("not a number: `{w}`"),
                        )
                    })
                })
                .collect::<Result<_>>()?;
            if fields.len() != 5 {
                return Err(AdiaError::config(
                    format!("{origin}:{}", idx + 1),
                    format!("expected 5 fields `t a0 Rx Ry Rz`, got {}", fields.len()),
                ));
            }
            if fields.iter().any(|v| !v.is_finite()) {
                return Err(AdiaError::config(
                    format!("{origin}:{}", idx + 1),
                    "non-finite sample",
                ));
            }
            ts.push(fields[0]);
            a0.push(fields[1]);
            r.push(RealVec3::new(fields[2], fields[3], fields[4]));
        }
        if ts.len() < 4 {
            return Err(AdiaError::config(
                origin,
                format!("need at least 4 samples for cubic interpolation, got {}", ts.len()),
            ));
        }
        let dt = ts[1] - ts[0];
        if dt <= 0.0 {
            return Err(AdiaError::config(origin, "time samples must be increasing"));
        }
        for i in 1..ts.len() {
            let step = ts[i] - ts[i - 1];
            if (step - dt).abs() > 1e-9 * dt.abs().max(1.0) {
                return Err(AdiaError::config(
                    origin,
                    format!(
                        "non-uniform grid: step {} at sample {} differs from {}",
                        step, i, dt
                    ),
                ));
            }
        }
        Ok(Self {
            t0: ts[0],
            dt,
            a0,
            r,
        })
    }

    /// Load from a file.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AdiaError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.a0.len() - 1) as f64
    }

    /// Catmull-Rom interpolation at `t`; clamps slightly past the table ends
    /// (needed by finite-difference derivative probes at the boundary).
    fn sample(&self, t: f64) -> (f64, RealVec3) {
        let n = self.a0.len();
        let x = ((t - self.t0) / self.dt).clamp(0.0, (n - 1) as f64);
        let i1 = (x.floor() as usize).min(n - 2);
        let s = x - i1 as f64;
        let get = |i: isize| -> (f64, RealVec3) {
            // Ghost points by linear extrapolation preserve C¹ at the ends.
            if i < 0 {
                (
                    2.0 * self.a0[0] - self.a0[1],
                    self.r[0].scale(2.0).sub(&self.r[1]),
                )
            } else if i as usize >= n {
                (
                    2.0 * self.a0[n - 1] - self.a0[n - 2],
                    self.r[n - 1].scale(2.0).sub(&self.r[n - 2]),
                )
            } else {
                (self.a0[i as usize], self.r[i as usize])
            }
        };
        let i1 = i1 as isize;
        let (a_m1, r_m1) = get(i1 - 1);
        let (a_0, r_0) = get(i1);
        let (a_1, r_1) = get(i1 + 1);
        let (a_2, r_2) = get(i1 + 2);
        let w = catmull_rom_weights(s);
        let a0 = w[0] * a_m1 + w[1] * a_0 + w[2] * a_1 + w[3] * a_2;
        let r = r_m1
            .scale(w[0])
            .add(&r_0.scale(w[1]))
            .add(&r_1.scale(w[2]))
            .add(&r_2.scale(w[3]));
        (a0, r)
    }
}

fn catmull_rom_weights(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        0.5 * (-s3 + 2.0 * s2 - s),
        0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
        0.5 * (-3.0 * s3 + 4.0 * s2 + s),
        0.5 * (s3 - s2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2::{unitarity_error, IM};

    const TAU_20PI: f64 = 20.0 * PI;

    fn counterexample() -> HamiltonianModel {
        HamiltonianModel::counterexample(1.0, TAU_20PI).unwrap()
    }

    #[test]
    fn constructors_validate_parameters() {
        assert!(HamiltonianModel::counterexample(0.0, 1.0).is_err());
        assert!(HamiltonianModel::counterexample(1.0, -1.0).is_err());
        assert!(HamiltonianModel::rotating_field(f64::NAN, 1.0).is_err());
        assert!(HamiltonianModel::landau_zener(0.0, 1.0).is_err());
        assert!(HamiltonianModel::landau_zener(1.0, f64::INFINITY).is_err());
        assert!(HamiltonianModel::constant(RealVec3::new(f64::NAN, 0.0, 0.0)).is_err());
    }

    #[test]
    fn counterexample_field_at_zero() {
        let (a0, r) = counterexample().field_vector(0.0);
        assert_eq!(a0, 0.0);
        assert!((r.x - 1.0).abs() < 1e-15);
        assert!(r.y.abs() < 1e-15);
        assert!(r.z.abs() < 1e-15);
    }

    #[test]
    fn counterexample_field_at_five_pi() {
        // sin(5π) = 0 removes the modulation; n(5π) = (cos π/2, sin π/2, 0).
        let (_, r) = counterexample().field_vector(5.0 * PI);
        assert!(r.x.abs() < 1e-13);
        assert!((r.y - 1.0).abs() < 1e-13);
        assert!(r.z.abs() < 1e-13);
    }

    #[test]
    fn landau_zener_field() {
        let model = HamiltonianModel::landau_zener(1.0, 0.1).unwrap();
        let (_, r) = model.field_vector(20.0);
        assert!((r.x - 1.0).abs() < 1e-15);
        assert!(r.y.abs() < 1e-15);
        assert!((r.z + 1.0).abs() < 1e-15);
        let d = model.field_derivative(33.3);
        assert_eq!(d.z, -0.05);
    }

    #[test]
    fn field_is_traceless_hermitian() {
        for model in [
            counterexample(),
            HamiltonianModel::rotating_field(1.0, TAU_20PI).unwrap(),
            HamiltonianModel::landau_zener(1.0, 0.05).unwrap(),
            HamiltonianModel::constant(RealVec3::new(0.3, -0.2, 0.9)).unwrap(),
        ] {
            for i in 0..40 {
                let t = -10.0 + i as f64;
                let (a0, _) = model.field_vector(t);
                assert_eq!(a0, 0.0);
                let h = model.hamiltonian(t);
                assert!(h.hermiticity_error() == 0.0);
                assert!(h.trace().norm() < 1e-14);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let models = [
            counterexample(),
            HamiltonianModel::rotating_field(1.0, TAU_20PI).unwrap(),
            HamiltonianModel::landau_zener(1.0, 0.05).unwrap(),
        ];
        let h = 1e-6;
        for model in &models {
            for i in 0..60 {
                let t = 0.05 + 0.9 * i as f64;
                let (_, fwd) = model.field_vector(t + h);
                let (_, bwd) = model.field_vector(t - h);
                let fd = fwd.sub(&bwd).scale(0.5 / h);
                let an = model.field_derivative(t);
                let scale = an.norm().max(1.0);
                assert!(
                    fd.sub(&an).norm() <= 1e-6 * scale,
                    "{} at t={t}: fd={fd:?} analytic={an:?}",
                    model.name()
                );
            }
        }
    }

    #[test]
    fn spectral_frame_sigma_z() {
        let frame = frame_from_field(0.0, 0.0, RealVec3::new(0.0, 0.0, 1.0), None).unwrap();
        assert!((frame.e_plus - 1.0).abs() < 1e-15);
        assert!((frame.e_minus + 1.0).abs() < 1e-15);
        assert!((frame.v_plus.c0.norm() - 1.0).abs() < 1e-15);
        assert!(frame.v_plus.c1.norm() < 1e-15);
    }

    #[test]
    fn spectral_frame_sigma_x() {
        let frame = frame_from_field(0.0, 0.0, RealVec3::new(1.0, 0.0, 0.0), None).unwrap();
        // (1,1)/√2 up to gauge.
        assert!((frame.v_plus.c0.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((frame.v_plus.c1.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn spectral_frame_counterexample_energy() {
        // E₊ = √(ω₀² + sin²(ω₀t)·(2π/τ)²) at t = π/2.
        let frame = counterexample().spectral_frame(PI / 2.0, None).unwrap();
        assert!((frame.e_plus - 1.01_f64.sqrt()).abs() < 1e-12);
        assert!((frame.e_plus - 1.004_987_562_112_089).abs() < 1e-12);
    }

    #[test]
    fn spectral_frame_residuals_and_orthogonality() {
        let model = counterexample();
        let mut prev: Option<SpectralFrame> = None;
        for i in 0..=400 {
            let t = TAU_20PI * i as f64 / 400.0;
            let frame = model.spectral_frame(t, prev.as_ref()).unwrap();
            let h = model.hamiltonian(t);
            for (e, v) in [(frame.e_plus, &frame.v_plus), (frame.e_minus, &frame.v_minus)] {
                let resid = h.apply(v).sub(&v.scale(Complex::new(e, 0.0)));
                assert!(resid.norm() <= tol::EIGEN_RESIDUAL, "residual at t={t}");
            }
            assert!(overlap(&frame.v_plus, &frame.v_minus).norm() <= tol::ORTHOGONALITY);
            assert!(frame.e_plus >= frame.e_minus);
            prev = Some(frame);
        }
    }

    #[test]
    fn spectral_frame_rejects_zero_field() {
        let err = frame_from_field(0.0, 0.0, RealVec3::zero(), None);
        assert!(matches!(err, Err(AdiaError::DegenerateSpectrum { .. })));
    }

    #[test]
    fn gauge_link_is_smooth() {
        // With parallel transport, successive overlaps are real positive and
        // their imaginary part vanishes identically by construction; check
        // the raw branch gauge instead drifts while the transported one does
        // not.
        let model = HamiltonianModel::rotating_field(1.0, TAU_20PI).unwrap();
        let steps = 2000;
        let mut prev = model.spectral_frame(0.0, None).unwrap();
        for i in 1..=steps {
            let t = TAU_20PI * i as f64 / steps as f64;
            let frame = model.spectral_frame(t, Some(&prev)).unwrap();
            let link = overlap(&prev.v_plus, &frame.v_plus);
            assert!(link.im.abs() < 1e-12);
            assert!(link.re > 0.9);
            prev = frame;
        }
    }

    #[test]
    fn coupling_element_constant_model_is_zero() {
        let model = HamiltonianModel::constant(RealVec3::new(0.0, 0.0, 1.0)).unwrap();
        let frame = model.spectral_frame(0.0, None).unwrap();
        let c = model.coupling_element(0.0, &frame).unwrap();
        assert_eq!(c.norm(), 0.0);
        assert_eq!(model.adiabaticity_ratio(0.0).unwrap(), 0.0);
    }

    #[test]
    fn coupling_element_matches_finite_difference() {
        // |⟨E₊(t)|E₋(t+h)⟩| / h → |⟨E₊|Ė₋⟩| as h → 0.
        let model = counterexample();
        let h = 1e-6;
        for i in 0..50 {
            let t = 0.1 + 1.2 * i as f64;
            let frame = model.spectral_frame(t, None).unwrap();
            let next = model.spectral_frame(t + h, Some(&frame)).unwrap();
            let fd = overlap(&frame.v_plus, &next.v_minus).norm() / h;
            let coupling = model.coupling_element(t, &frame).unwrap().norm();
            assert!(
                (fd - coupling).abs() <= 1e-5 * coupling.max(1.0),
                "t={t}: fd={fd} analytic={coupling}"
            );
        }
    }

    #[test]
    fn coupling_magnitude_is_gauge_invariant() {
        let model = counterexample();
        let t = 3.7;
        let frame = model.spectral_frame(t, None).unwrap();
        let base = model.coupling_element(t, &frame).unwrap().norm();
        let mut rephased = frame.clone();
        rephased.v_plus = rephased.v_plus.scale(Complex::from_polar(1.0, 1.234));
        rephased.v_minus = rephased.v_minus.scale(Complex::from_polar(1.0, -2.345));
        let re = model.coupling_element(t, &rephased).unwrap().norm();
        assert!((base - re).abs() <= tol::GAUGE_INVARIANCE * base.max(1.0));
    }

    #[test]
    fn decompose_recovers_counterexample_field() {
        // Written out independently of field_vector: R = ω₀ n + cosθ sinθ ṅ
        // + sin²θ (n × ṅ) at t = π/2 with ω₀ = 1, τ = 20π.
        let t = PI / 2.0;
        let nu = 2.0 * PI / TAU_20PI;
        let (s, c) = (t).sin_cos();
        let (sp, cp) = (nu * t).sin_cos();
        let n = RealVec3::new(cp, sp, 0.0);
        let n_dot = RealVec3::new(-nu * sp, nu * cp, 0.0);
        let expected = n
            .scale(1.0)
            .add(&n_dot.scale(c * s))
            .add(&n.cross(&n_dot).scale(s * s));

        let h = counterexample().hamiltonian(t);
        let (a0, r) = crate::mat2::pauli_decompose(&h);
        assert!(a0.norm() < 1e-15);
        let r_re = RealVec3::new(r[0].re, r[1].re, r[2].re);
        assert!(r_re.sub(&expected).norm() <= 1e-12);
        assert!(r[0].im.abs().max(r[1].im.abs()).max(r[2].im.abs()) < 1e-15);
    }

    #[test]
    fn counterexample_coupling_at_modulation_nodes() {
        // Where sin(ω₀t) = 0 the field derivative picks up the modulation
        // term at full strength: |⟨E₊|Ė₋⟩| = 2π/τ there, twice the plain
        // rotating-field value. Verified against the finite-difference
        // overlap oracle.
        let model = counterexample();
        let h = 1e-6;
        for t in [0.0, PI, 2.0 * PI, 3.0 * PI] {
            let frame = model.spectral_frame(t, None).unwrap();
            let coupling = model.coupling_element(t, &frame).unwrap().norm();
            assert!(
                (coupling - 2.0 * PI / TAU_20PI).abs() < 1e-10,
                "t={t}: {coupling}"
            );
            let next = model.spectral_frame(t + h, Some(&frame)).unwrap();
            let fd = overlap(&frame.v_plus, &next.v_minus).norm() / h;
            assert!((fd - coupling).abs() <= 1e-5, "t={t}: fd={fd}");
        }
    }

    #[test]
    fn rotating_field_coupling_is_nu_over_two() {
        // For the plain rotating field the eigenvectors turn with n(t):
        // |⟨E₊|Ė₋⟩| = |ṅ|/2 = π/τ at all times.
        let model = HamiltonianModel::rotating_field(1.0, TAU_20PI).unwrap();
        let expected = PI / TAU_20PI;
        for i in 0..20 {
            let t = 3.0 * i as f64;
            let frame = model.spectral_frame(t, None).unwrap();
            let c = model.coupling_element(t, &frame).unwrap().norm();
            assert!((c - expected).abs() < 1e-12, "t={t}: {c} vs {expected}");
        }
    }

    #[test]
    fn adiabaticity_ratio_counterexample_is_small() {
        // Max over one period is ν/(2ω₀) = 0.05 for ω₀τ = 20π, attained
        // where sin(ω₀t) = 0.
        let model = counterexample();
        let mut max_ratio: f64 = 0.0;
        for i in 0..=2000 {
            let t = TAU_20PI * i as f64 / 2000.0;
            max_ratio = max_ratio.max(model.adiabaticity_ratio(t).unwrap());
        }
        assert!(max_ratio <= 0.05 + 1e-9, "max ratio {max_ratio}");
        assert!(max_ratio > 0.04, "max ratio unexpectedly small: {max_ratio}");
    }

    #[test]
    fn closed_form_unitary_identity_points() {
        let model = counterexample();
        let u0 = model.closed_form_unitary(0.0).unwrap();
        assert!(u0.sub(&Mat2::identity()).frobenius_norm() < 1e-15);
        let u = model.closed_form_unitary(10.0 * PI).unwrap();
        assert!(u.sub(&Mat2::identity()).frobenius_norm() < 1e-12);
        assert!(unitarity_error(&u) <= tol::SU2_UNITARITY);
    }

    #[test]
    fn closed_form_unitary_wrong_variant() {
        let model = HamiltonianModel::rotating_field(1.0, TAU_20PI).unwrap();
        assert!(matches!(
            model.closed_form_unitary(1.0),
            Err(AdiaError::UnsupportedModel { .. })
        ));
    }

    #[test]
    fn closed_form_reproduces_hamiltonian() {
        // H(t) = i U̇ U† recovered by finite differences.
        let model = counterexample();
        let h = 1e-6;
        for i in 0..30 {
            let t = 0.3 + 2.0 * i as f64;
            let fwd = model.closed_form_unitary(t + h).unwrap();
            let bwd = model.closed_form_unitary(t - h).unwrap();
            let du = fwd.sub(&bwd).scale(Complex::new(0.5 / h, 0.0));
            let u = model.closed_form_unitary(t).unwrap();
            let h_fd = du.mul(&u.adjoint()).scale(IM);
            let h_an = model.hamiltonian(t);
            assert!(
                h_fd.sub(&h_an).frobenius_norm() <= 1e-6,
                "t={t}: {:.3e}",
                h_fd.sub(&h_an).frobenius_norm()
            );
        }
    }

    #[test]
    fn rotating_field_su2_is_consistent() {
        // Unit norm and the closed form⁠'s own Schrödinger equation.
        let (omega0, tau) = (1.0, TAU_20PI);
        let model = HamiltonianModel::rotating_field(omega0, tau).unwrap();
        for i in 0..60 {
            let t = 0.37 * i as f64;
            let p = rotating_field_su2(omega0, tau, t);
            assert!((p.s * p.s + p.v.norm_sq() - 1.0).abs() < 1e-12);
            // ṡ, v̇ against finite differences.
            let h = 1e-6;
            let fwd = rotating_field_su2(omega0, tau, t + h);
            let bwd = rotating_field_su2(omega0, tau, t - h);
            assert!(((fwd.s - bwd.s) / (2.0 * h) - p.s_dot).abs() < 1e-6);
            let v_fd = fwd.v.sub(&bwd.v).scale(0.5 / h);
            assert!(v_fd.sub(&p.v_dot).norm() < 1e-6);
            // i U̇ U† = H.
            let u = su2_matrix(p.s, &p.v);
            assert!(unitarity_error(&u) < 1e-12);
            let u_fwd = su2_matrix(fwd.s, &fwd.v);
            let u_bwd = su2_matrix(bwd.s, &bwd.v);
            let du = u_fwd.sub(&u_bwd).scale(Complex::new(0.5 / h, 0.0));
            let h_fd = du.mul(&u.adjoint()).scale(IM);
            assert!(h_fd.sub(&model.hamiltonian(t)).frobenius_norm() < 1e-6);
        }
    }

    #[test]
    fn tabulated_round_trip_against_analytic() {
        let model = counterexample();
        let n = 4000;
        let t_end = TAU_20PI;
        let mut text = String::from("# adia-model v1\n");
        for i in 0..=n {
            let t = t_end * i as f64 / n as f64;
            let (a0, r) = model.field_vector(t);
            text.push_str(&format!("{t:.17e} {a0:.17e} {:.17e} {:.17e} {:.17e}\n", r.x, r.y, r.z));
        }
        let table = TabulatedField::parse(&text, "test").unwrap();
        let tab = HamiltonianModel::Tabulated(table);
        // Cubic interpolation on a 4000-sample table: measured field error
        // ~2.5e-8 (O(h³)), finite-difference derivative error ~1.7e-5
        // (O(h²)).
        for i in 0..200 {
            let t = 0.123 + (t_end - 0.3) * i as f64 / 200.0;
            let (_, exact) = model.field_vector(t);
            let (_, interp) = tab.field_vector(t);
            assert!(interp.sub(&exact).norm() < 1e-7, "t={t}");
            let d_exact = model.field_derivative(t);
            let d_interp = tab.field_derivative(t);
            assert!(d_interp.sub(&d_exact).norm() < 1e-4, "t={t}");
        }
    }

    #[test]
    fn tabulated_supports_identity_offset() {
        // a0 shifts both eigenvalues without touching the eigenvectors.
        let mut text = String::from("# adia-model v1\n");
        for i in 0..=50 {
            let t = 0.1 * i as f64;
            text.push_str(&format!("{t} 0.7 0 0 2\n"));
        }
        let tab = HamiltonianModel::Tabulated(TabulatedField::parse(&text, "test").unwrap());
        let frame = tab.spectral_frame(2.0, None).unwrap();
        assert!((frame.e_plus - 2.7).abs() < 1e-10);
        assert!((frame.e_minus + 1.3).abs() < 1e-10);
        assert!(frame.v_plus.c1.norm() < 1e-12);
    }

    #[test]
    fn tabulated_rejects_bad_input() {
        assert!(TabulatedField::parse("", "test").is_err());
        assert!(TabulatedField::parse("no header\n0 0 1 0 0\n", "test").is_err());
        assert!(TabulatedField::parse("# adia-model v1\n0 0 1 0 0\n", "test").is_err());
        let nonuniform = "# adia-model v1\n0 0 1 0 0\n1 0 1 0 0\n2.5 0 1 0 0\n3 0 1 0 0\n";
        assert!(TabulatedField::parse(nonuniform, "test").is_err());
        let nan = "# adia-model v1\n0 0 nan 0 0\n1 0 1 0 0\n2 0 1 0 0\n3 0 1 0 0\n";
        assert!(TabulatedField::parse(nan, "test").is_err());
    }
}
