//! Dense 2×2 complex linear algebra.
//!
//! Everything a two-level system needs and nothing more: Pauli
//! composition/decomposition, products, adjoints, the closed-form su(2)
//! exponential, inner products and unitarity/hermiticity error metrics.
//! There is deliberately no general matrix exponential and no eigensolver
//! dependency; general propagation is the ODE integrator's job, and the
//! closed forms here double as integrator-independent oracles.
//!
//! All error metrics are Frobenius norms: cheap, basis-independent, and only
//! relative magnitudes matter for the diagnostics built on top.

use crate::error::{AdiaError, Result};
use crate::tol;

pub use num_complex::Complex64 as Complex;

/// Shorthand for `i` as a `Complex`.
pub const IM: Complex = Complex::new(0.0, 1.0);

/// Real 3-vector. Carries field vectors (angular-frequency units) and unit
/// axes (dimensionless).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl RealVec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &RealVec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &RealVec3) -> RealVec3 {
        RealVec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn scale(&self, s: f64) -> RealVec3 {
        RealVec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn add(&self, other: &RealVec3) -> RealVec3 {
        RealVec3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn sub(&self, other: &RealVec3) -> RealVec3 {
        RealVec3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    /// Normalized copy. Fails on (near-)zero vectors.
    pub fn unit(&self) -> Result<RealVec3> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(AdiaError::invalid("cannot normalize a zero 3-vector"));
        }
        Ok(self.scale(1.0 / n))
    }

    /// True if the norm is 1 within `tolerance`.
    pub fn is_unit(&self, tolerance: f64) -> bool {
        (self.norm() - 1.0).abs() <= tolerance
    }
}

/// Complex 2-vector: state vectors and eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub c0: Complex,
    pub c1: Complex,
}

impl Vec2 {
    pub const fn new(c0: Complex, c1: Complex) -> Self {
        Self { c0, c1 }
    }

    pub fn from_re(c0: f64, c1: f64) -> Self {
        Self::new(Complex::new(c0, 0.0), Complex::new(c1, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.c0.re.is_finite()
            && self.c0.im.is_finite()
            && self.c1.re.is_finite()
            && self.c1.im.is_finite()
    }

    pub fn norm_sq(&self) -> f64 {
        self.c0.norm_sqr() + self.c1.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: Complex) -> Vec2 {
        Vec2::new(self.c0 * s, self.c1 * s)
    }

    pub fn add(&self, other: &Vec2) -> Vec2 {
        Vec2::new(self.c0 + other.c0, self.c1 + other.c1)
    }

    pub fn sub(&self, other: &Vec2) -> Vec2 {
        Vec2::new(self.c0 - other.c0, self.c1 - other.c1)
    }

    /// Normalized copy. Fails on (near-)zero vectors.
    pub fn normalized(&self) -> Result<Vec2> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(AdiaError::invalid("cannot normalize a zero state vector"));
        }
        Ok(self.scale(Complex::new(1.0 / n, 0.0)))
    }

    /// True if `|c0|² + |c1|²` is 1 within `tolerance`.
    pub fn is_normalized(&self, tolerance: f64) -> bool {
        (self.norm_sq() - 1.0).abs() <= tolerance
    }
}

/// Inner product `⟨a|b⟩`, conjugate-linear in the first slot.
pub fn overlap(a: &Vec2, b: &Vec2) -> Complex {
    a.c0.conj() * b.c0 + a.c1.conj() * b.c1
}

/// Dense 2×2 complex matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    /// Entries `[[m00, m01], [m10, m11]]`.
    pub m: [[Complex; 2]; 2],
}

impl Mat2 {
    pub const fn new(m00: Complex, m01: Complex, m10: Complex, m11: Complex) -> Self {
        Self {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub fn zero() -> Self {
        let z = Complex::new(0.0, 0.0);
        Self::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let one = Complex::new(1.0, 0.0);
        let z = Complex::new(0.0, 0.0);
        Self::new(one, z, z, one)
    }

    pub fn is_finite(&self) -> bool {
        self.m
            .iter()
            .flatten()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] = self.m[r][c] + other.m[r][c];
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] = self.m[r][c] - other.m[r][c];
            }
        }
        out
    }

    pub fn scale(&self, s: Complex) -> Mat2 {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] *= s;
            }
        }
        out
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let a = &self.m;
        let b = &other.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat2 {
        Mat2::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn trace(&self) -> Complex {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Apply to a column vector: `self |v⟩`.
    pub fn apply(&self, v: &Vec2) -> Vec2 {
        Vec2::new(
            self.m[0][0] * v.c0 + self.m[0][1] * v.c1,
            self.m[1][0] * v.c0 + self.m[1][1] * v.c1,
        )
    }

    /// Outer product `|ket⟩⟨bra|`.
    pub fn outer(ket: &Vec2, bra: &Vec2) -> Mat2 {
        Mat2::new(
            ket.c0 * bra.c0.conj(),
            ket.c0 * bra.c1.conj(),
            ket.c1 * bra.c0.conj(),
            ket.c1 * bra.c1.conj(),
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖M − M†‖_F`, zero for hermitian matrices.
    pub fn hermiticity_error(&self) -> f64 {
        self.sub(&self.adjoint()).frobenius_norm()
    }

    /// Eigenvalues of a hermitian matrix, ordered descending, via the Pauli
    /// decomposition `a₀ ± |r|`. The anti-hermitian part is ignored.
    pub fn hermitian_eigenvalues(&self) -> (f64, f64) {
        let (a0, r) = pauli_decompose(self);
        let rn = (r[0].re * r[0].re + r[1].re * r[1].re + r[2].re * r[2].re).sqrt();
        (a0.re + rn, a0.re - rn)
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::add(&self, &rhs)
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::sub(&self, &rhs)
    }
}

impl std::ops::Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::mul(&self, &rhs)
    }
}

impl std::ops::Mul<Complex> for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Complex) -> Mat2 {
        self.scale(rhs)
    }
}

impl std::ops::Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: f64) -> Mat2 {
        self.scale(Complex::new(rhs, 0.0))
    }
}

/// Build `a₀·1 + x·σx + y·σy + z·σz`. The result is hermitian by
/// construction.
pub fn pauli_compose(a0: f64, r: RealVec3) -> Result<Mat2> {
    if !a0.is_finite() || !r.is_finite() {
        return Err(AdiaError::invalid(
            "pauli_compose requires finite coefficients",
        ));
    }
    Ok(pauli_compose_unchecked(a0, r))
}

/// Same as [`pauli_compose`] without the finiteness check; for hot loops
/// over coefficients that are finite by construction.
pub(crate) fn pauli_compose_unchecked(a0: f64, r: RealVec3) -> Mat2 {
    Mat2::new(
        Complex::new(a0 + r.z, 0.0),
        Complex::new(r.x, -r.y),
        Complex::new(r.x, r.y),
        Complex::new(a0 - r.z, 0.0),
    )
}

/// Coefficients of a matrix in the basis `{1, σx, σy, σz}`. For hermitian
/// input the outputs are real; the round trip with [`pauli_compose`] is
/// exact up to rounding.
pub fn pauli_decompose(m: &Mat2) -> (Complex, [Complex; 3]) {
    let half = Complex::new(0.5, 0.0);
    let a0 = (m.m[0][0] + m.m[1][1]) * half;
    let rz = (m.m[0][0] - m.m[1][1]) * half;
    let rx = (m.m[0][1] + m.m[1][0]) * half;
    let ry = (m.m[0][1] - m.m[1][0]) * half * IM;
    (a0, [rx, ry, rz])
}

/// Real part of the Pauli vector of a (nearly) hermitian matrix.
pub(crate) fn pauli_vector_re(m: &Mat2) -> (f64, RealVec3) {
    let (a0, r) = pauli_decompose(m);
    (a0.re, RealVec3::new(r[0].re, r[1].re, r[2].re))
}

/// Closed-form su(2) exponential `exp(−iθ n·σ) = cosθ·1 − i sinθ n·σ`.
/// `axis` must be a unit vector; the result is unitary with determinant one.
pub fn su2_exponential(theta: f64, axis: RealVec3) -> Result<Mat2> {
    if !theta.is_finite() || !axis.is_finite() {
        return Err(AdiaError::invalid(
            "su2_exponential requires finite inputs",
        ));
    }
    if !axis.is_unit(tol::UNIT_AXIS) {
        return Err(AdiaError::invalid(format!(
            "su2_exponential axis must be a unit vector (norm = {})",
            axis.norm()
        )));
    }
    let c = theta.cos();
    let s = theta.sin();
    // cosθ·1 − i sinθ (n·σ)
    Ok(Mat2::new(
        Complex::new(c, -s * axis.z),
        Complex::new(-s * axis.y, -s * axis.x),
        Complex::new(s * axis.y, -s * axis.x),
        Complex::new(c, s * axis.z),
    ))
}

/// `‖M†M − 1‖_F`: zero for exact unitaries, the drift metric reported by
/// the propagator.
pub fn unitarity_error(m: &Mat2) -> f64 {
    m.adjoint().mul(m).sub(&Mat2::identity()).frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tolerance: f64) -> bool {
        (a - b).abs() <= tolerance
    }

    fn cclose(a: Complex, b: Complex, tolerance: f64) -> bool {
        (a - b).norm() <= tolerance
    }

    #[test]
    fn pauli_compose_sigma_z() {
        let m = pauli_compose(0.0, RealVec3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(cclose(m.m[0][0], Complex::new(1.0, 0.0), 0.0));
        assert!(cclose(m.m[1][1], Complex::new(-1.0, 0.0), 0.0));
        assert!(cclose(m.m[0][1], Complex::new(0.0, 0.0), 0.0));
        assert!(cclose(m.m[1][0], Complex::new(0.0, 0.0), 0.0));
    }

    #[test]
    fn pauli_compose_sigma_x() {
        let m = pauli_compose(0.0, RealVec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!(cclose(m.m[0][1], Complex::new(1.0, 0.0), 0.0));
        assert!(cclose(m.m[1][0], Complex::new(1.0, 0.0), 0.0));
        assert!(cclose(m.m[0][0], Complex::new(0.0, 0.0), 0.0));
        assert_eq!(m.hermiticity_error(), 0.0);
    }

    #[test]
    fn pauli_compose_rejects_non_finite() {
        assert!(pauli_compose(f64::NAN, RealVec3::zero()).is_err());
        assert!(pauli_compose(0.0, RealVec3::new(f64::INFINITY, 0.0, 0.0)).is_err());
    }

    #[test]
    fn pauli_decompose_identity() {
        let (a0, r) = pauli_decompose(&Mat2::identity());
        assert!(cclose(a0, Complex::new(1.0, 0.0), 0.0));
        for c in r {
            assert!(cclose(c, Complex::new(0.0, 0.0), 0.0));
        }
    }

    #[test]
    fn pauli_decompose_sigma_z() {
        let m = pauli_compose(0.0, RealVec3::new(0.0, 0.0, 1.0)).unwrap();
        let (a0, r) = pauli_decompose(&m);
        assert!(cclose(a0, Complex::new(0.0, 0.0), 0.0));
        assert!(cclose(r[2], Complex::new(1.0, 0.0), 0.0));
    }

    #[test]
    fn su2_exponential_zero_angle_is_identity() {
        let u = su2_exponential(0.0, RealVec3::new(0.0, 1.0, 0.0)).unwrap();
        assert!(u.sub(&Mat2::identity()).frobenius_norm() == 0.0);
    }

    #[test]
    fn su2_exponential_half_pi_x() {
        // θ=π/2 about x gives −i·σx.
        let u = su2_exponential(std::f64::consts::FRAC_PI_2, RealVec3::new(1.0, 0.0, 0.0))
            .unwrap();
        let expected = pauli_compose(0.0, RealVec3::new(1.0, 0.0, 0.0))
            .unwrap()
            .scale(-IM);
        assert!(u.sub(&expected).frobenius_norm() < 1e-15);
    }

    #[test]
    fn su2_exponential_full_turns() {
        // θ=10π: cos=1, sin=0 up to rounding.
        let u = su2_exponential(10.0 * std::f64::consts::PI, RealVec3::new(0.0, 0.0, 1.0))
            .unwrap();
        assert!(u.sub(&Mat2::identity()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn su2_exponential_is_unitary_det_one() {
        let n = RealVec3::new(0.6, 0.0, 0.8);
        let u = su2_exponential(1.234, n).unwrap();
        assert!(unitarity_error(&u) <= tol::SU2_UNITARITY);
        assert!(cclose(u.det(), Complex::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn su2_exponential_rejects_non_unit_axis() {
        let err = su2_exponential(1.0, RealVec3::new(1.0, 1.0, 0.0));
        assert!(matches!(err, Err(AdiaError::InvalidArgument(_))));
    }

    #[test]
    fn overlap_basis_states() {
        let e0 = Vec2::from_re(1.0, 0.0);
        let e1 = Vec2::from_re(0.0, 1.0);
        assert!(cclose(overlap(&e0, &e0), Complex::new(1.0, 0.0), 0.0));
        assert!(cclose(overlap(&e0, &e1), Complex::new(0.0, 0.0), 0.0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Vec2::from_re(s, s);
        assert!(cclose(overlap(&e0, &plus), Complex::new(s, 0.0), 1e-16));
    }

    #[test]
    fn unitarity_error_examples() {
        assert_eq!(unitarity_error(&Mat2::identity()), 0.0);
        // M = 2·1 → M†M − 1 = 3·1 → Frobenius 3√2.
        let m = Mat2::identity().scale(Complex::new(2.0, 0.0));
        assert!(close(unitarity_error(&m), 3.0 * 2.0_f64.sqrt(), 1e-14));
    }

    #[test]
    fn hermitian_eigenvalues_diag() {
        let m = pauli_compose(0.5, RealVec3::new(0.0, 0.0, 2.0)).unwrap();
        let (hi, lo) = m.hermitian_eigenvalues();
        assert!(close(hi, 2.5, 1e-15));
        assert!(close(lo, -1.5, 1e-15));
    }

    proptest! {
        #[test]
        fn pauli_round_trip_hermitian(
            a0 in -10.0..10.0f64,
            x in -10.0..10.0f64,
            y in -10.0..10.0f64,
            z in -10.0..10.0f64,
        ) {
            let m = pauli_compose(a0, RealVec3::new(x, y, z)).unwrap();
            let (b0, r) = pauli_decompose(&m);
            let back = pauli_compose(b0.re, RealVec3::new(r[0].re, r[1].re, r[2].re)).unwrap();
            prop_assert!(m.sub(&back).frobenius_norm() <= tol::PAULI_ROUND_TRIP);
            // Hermitian input decomposes to real coefficients.
            prop_assert!(b0.im.abs() <= tol::PAULI_ROUND_TRIP);
            for c in r {
                prop_assert!(c.im.abs() <= tol::PAULI_ROUND_TRIP);
            }
        }

        #[test]
        fn su2_same_axis_composition(
            theta in -6.0..6.0f64,
            phi in -6.0..6.0f64,
            ax in -1.0..1.0f64,
            ay in -1.0..1.0f64,
            az in -1.0..1.0f64,
        ) {
            let v = RealVec3::new(ax, ay, az);
            prop_assume!(v.norm() > 0.1);
            let n = v.unit().unwrap();
            let a = su2_exponential(theta, n).unwrap();
            let b = su2_exponential(phi, n).unwrap();
            let ab = a.mul(&b);
            let direct = su2_exponential(theta + phi, n).unwrap();
            prop_assert!(ab.sub(&direct).frobenius_norm() <= 1e-12);
        }

        #[test]
        fn overlap_conjugate_symmetry(
            a0 in -1.0..1.0f64, a1 in -1.0..1.0f64,
            a2 in -1.0..1.0f64, a3 in -1.0..1.0f64,
            b0 in -1.0..1.0f64, b1 in -1.0..1.0f64,
            b2 in -1.0..1.0f64, b3 in -1.0..1.0f64,
        ) {
            let a = Vec2::new(Complex::new(a0, a1), Complex::new(a2, a3));
            let b = Vec2::new(Complex::new(b0, b1), Complex::new(b2, b3));
            let fwd = overlap(&a, &b);
            let rev = overlap(&b, &a).conj();
            prop_assert!((fwd - rev).norm() <= tol::OVERLAP_CONJ_SYM * 10.0);
            // |⟨a|a⟩| = ‖a‖².
            prop_assert!((overlap(&a, &a).re - a.norm_sq()).abs() <= 1e-14);
        }

        #[test]
        fn su2_output_unitary(
            theta in -20.0..20.0f64,
            ax in -1.0..1.0f64,
            ay in -1.0..1.0f64,
            az in -1.0..1.0f64,
        ) {
            let v = RealVec3::new(ax, ay, az);
            prop_assume!(v.norm() > 0.1);
            let u = su2_exponential(theta, v.unit().unwrap()).unwrap();
            prop_assert!(unitarity_error(&u) <= tol::SU2_UNITARITY);
        }
    }
}
