//! Harmonic model of two intersecting standing waves.
//!
//! The two wave vectors enclose the angle π/2 − φ. Near a potential minimum
//! each standing wave contributes a spring constant κⱼ along its own wave
//! vector; because the wave vectors are not orthogonal the combined spring
//! tensor is not diagonal in either lattice direction, and its eigenmodes
//! rotate as κ₂/κ₁ is tuned through 1.
//!
//! Vectors are stored in the primed frame, which is the lab (x, z) frame
//! rotated about y by φ/2. In that frame
//!
//! ```text
//! k̂₁ = ( cos φ/2, sin φ/2 )
//! k̂₂ = ( sin φ/2, cos φ/2 )
//! ```
//!
//! and the spring tensor takes the symmetric form
//! `κ = ½(κ₁+κ₂)(𝟙 + sin φ σₓ) + ½(κ₁−κ₂) cos φ σ_z`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::LatticeError;

/// A vector in the (x′, z′) plane.
pub type Vec2 = [f64; 2];

/// Selects one of the two trap eigenmodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Larger spring constant κ₊.
    Plus,
    /// Smaller spring constant κ₋.
    Minus,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Plus, Mode::Minus];

    pub fn label(self) -> &'static str {
        match self {
            Mode::Plus => "plus",
            Mode::Minus => "minus",
        }
    }
}

/// Geometry and stiffness of the two-wave lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    /// Wave number of the first standing wave (rad/m).
    pub k1: f64,
    /// Wave number of the second standing wave (rad/m).
    pub k2: f64,
    /// Nonorthogonality angle (rad), 0 ≤ φ ≤ π/2.
    pub phi: f64,
    /// Spring constant of the first standing wave (N/m).
    pub kappa1: f64,
    /// Spring constant of the second standing wave (N/m).
    pub kappa2: f64,
    /// Atomic mass (kg).
    pub mass: f64,
}

impl LatticeConfig {
    pub fn new(
        k1: f64,
        k2: f64,
        phi: f64,
        kappa1: f64,
        kappa2: f64,
        mass: f64,
    ) -> Result<Self, LatticeError> {
        let cfg = Self {
            k1,
            k2,
            phi,
            kappa1,
            kappa2,
            mass,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds a configuration from the single-wave trap frequencies ω₁, ω₂.
    pub fn from_frequencies(
        k1: f64,
        k2: f64,
        phi: f64,
        omega1: f64,
        omega2: f64,
        mass: f64,
    ) -> Result<Self, LatticeError> {
        if !(omega1 >= 0.0 && omega2 >= 0.0) {
            return Err(LatticeError::InvalidConfig(format!(
                "trap frequencies must be non-negative, got ω₁ = {omega1}, ω₂ = {omega2}"
            )));
        }
        Self::new(k1, k2, phi, mass * omega1 * omega1, mass * omega2 * omega2, mass)
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        let finite = [self.k1, self.k2, self.phi, self.kappa1, self.kappa2, self.mass]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(LatticeError::InvalidConfig("non-finite field".into()));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(LatticeError::InvalidConfig(format!(
                "wave numbers must be positive, got k₁ = {}, k₂ = {}",
                self.k1, self.k2
            )));
        }
        if !(self.mass > 0.0) {
            return Err(LatticeError::InvalidConfig(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if self.kappa1 < 0.0 || self.kappa2 < 0.0 {
            return Err(LatticeError::InvalidConfig(format!(
                "spring constants must be non-negative, got κ₁ = {}, κ₂ = {}",
                self.kappa1, self.kappa2
            )));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.phi) {
            return Err(LatticeError::InvalidConfig(format!(
                "φ = {} rad outside [0, π/2]",
                self.phi
            )));
        }
        Ok(())
    }

    pub fn omega1(&self) -> f64 {
        trap_frequency(self.kappa1, self.mass)
    }

    pub fn omega2(&self) -> f64 {
        trap_frequency(self.kappa2, self.mass)
    }

    /// Copy with the second spring constant replaced.
    pub fn with_kappa2(&self, kappa2: f64) -> Self {
        Self { kappa2, ..*self }
    }

    pub fn spring_tensor(&self) -> SpringTensor {
        build_spring_tensor(self)
    }

    /// Full diagonalization: eigenvalues, frequencies, axes and projections.
    pub fn eigensystem(&self) -> Result<TrapEigensystem, LatticeError> {
        TrapEigensystem::from_config(self)
    }
}

/// Symmetric 2×2 spring tensor in the primed frame,
/// `[[xx, xz], [xz, zz]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringTensor {
    pub xx: f64,
    pub xz: f64,
    pub zz: f64,
}

impl SpringTensor {
    pub fn apply(&self, v: Vec2) -> Vec2 {
        [self.xx * v[0] + self.xz * v[1], self.xz * v[0] + self.zz * v[1]]
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.zz
    }

    pub fn determinant(&self) -> f64 {
        self.xx * self.zz - self.xz * self.xz
    }

    pub fn as_rows(&self) -> [[f64; 2]; 2] {
        [[self.xx, self.xz], [self.xz, self.zz]]
    }
}

/// Eigen-decomposition of the spring tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapEigensystem {
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// Rotation angle of the principal axes in the primed frame, 0 ≤ β ≤ π.
    pub beta: f64,
    pub e_plus: Vec2,
    pub e_minus: Vec2,
    /// (e₊·k₂/k₂)²
    pub proj_plus: f64,
    /// (e₋·k₂/k₂)²
    pub proj_minus: f64,
}

impl TrapEigensystem {
    pub fn from_config(cfg: &LatticeConfig) -> Result<Self, LatticeError> {
        cfg.validate()?;
        let (kappa_plus, kappa_minus) = eigenvalues_kappa_pm(cfg);
        let beta = principal_axis_angle(cfg)?;
        let (e_plus, e_minus) = axes_from_angle(beta);
        let (proj_plus, proj_minus) = projections_from_angle(cfg.phi, beta);
        Ok(Self {
            kappa_plus,
            kappa_minus,
            omega_plus: trap_frequency(kappa_plus, cfg.mass),
            omega_minus: trap_frequency(kappa_minus, cfg.mass),
            beta,
            e_plus,
            e_minus,
            proj_plus,
            proj_minus,
        })
    }

    pub fn omega(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Plus => self.omega_plus,
            Mode::Minus => self.omega_minus,
        }
    }

    pub fn kappa(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Plus => self.kappa_plus,
            Mode::Minus => self.kappa_minus,
        }
    }

    pub fn projection(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Plus => self.proj_plus,
            Mode::Minus => self.proj_minus,
        }
    }

    pub fn axis(&self, mode: Mode) -> Vec2 {
        match mode {
            Mode::Plus => self.e_plus,
            Mode::Minus => self.e_minus,
        }
    }

    /// ω₊ − ω₋
    pub fn splitting(&self) -> f64 {
        self.omega_plus - self.omega_minus
    }
}

/// κ = 2|V₀|k² for a standing wave of antinode depth `depth` (J).
pub fn spring_constant_from_depth(depth: f64, k: f64) -> f64 {
    2.0 * depth.abs() * k * k
}

pub fn build_spring_tensor(cfg: &LatticeConfig) -> SpringTensor {
    let mean = 0.5 * (cfg.kappa1 + cfg.kappa2);
    let half_diff = 0.5 * (cfg.kappa1 - cfg.kappa2);
    let (s, c) = cfg.phi.sin_cos();
    SpringTensor {
        xx: mean + half_diff * c,
        xz: mean * s,
        zz: mean - half_diff * c,
    }
}

/// Closed-form eigenvalues (κ₊, κ₋) with κ₊ ≥ κ₋.
///
/// The discriminant is evaluated as
/// `(κ₂ − κ₁ cos 2φ)² + (κ₁ sin 2φ)²`, which is non-negative term by term,
/// and κ₋ is recovered from det κ = κ₁κ₂cos²φ to keep full relative
/// precision when κ₋ ≪ κ₊.
pub fn eigenvalues_kappa_pm(cfg: &LatticeConfig) -> (f64, f64) {
    let (k1, k2) = (cfg.kappa1, cfg.kappa2);
    let (s2, c2) = (2.0 * cfg.phi).sin_cos();
    let disc = (k2 - k1 * c2).hypot(k1 * s2);
    let plus = 0.5 * (k1 + k2 + disc);
    let minus = if plus > 0.0 {
        let c = cfg.phi.cos();
        (k1 * k2 * c * c / plus).max(0.0)
    } else {
        0.0
    };
    (plus, minus)
}

/// ω = √(κ/m)
pub fn trap_frequency(kappa: f64, mass: f64) -> f64 {
    debug_assert!(kappa >= 0.0 && mass > 0.0);
    (kappa / mass).sqrt()
}

/// β = arg[(κ₁−κ₂) cos φ + i (κ₁+κ₂) sin φ] ∈ [0, π].
///
/// At φ = 0 with κ₁ = κ₂ the argument is taken of zero; β = π/2 is returned,
/// which is the limit of the expression for φ → 0⁺.
pub fn principal_axis_angle(cfg: &LatticeConfig) -> Result<f64, LatticeError> {
    let (k1, k2) = (cfg.kappa1, cfg.kappa2);
    if k1 == 0.0 && k2 == 0.0 {
        return Err(LatticeError::UndefinedAngle);
    }
    let (s, c) = cfg.phi.sin_cos();
    let re = (k1 - k2) * c;
    let im = (k1 + k2) * s;
    if re == 0.0 && im == 0.0 {
        return Ok(FRAC_PI_2);
    }
    // im ≥ 0, so atan2 already lands in [0, π]; the clamp only guards -0.0.
    Ok(im.atan2(re).clamp(0.0, PI))
}

/// Principal axes (e₊, e₋) in the primed frame.
pub fn principal_axes(cfg: &LatticeConfig) -> Result<(Vec2, Vec2), LatticeError> {
    Ok(axes_from_angle(principal_axis_angle(cfg)?))
}

fn axes_from_angle(beta: f64) -> (Vec2, Vec2) {
    let (s, c) = (0.5 * beta).sin_cos();
    ([c, s], [-s, c])
}

/// Squared projections (e±·k₂/k₂)² = (1 ∓ cos(φ+β))/2.
pub fn sideband_projection(cfg: &LatticeConfig) -> Result<(f64, f64), LatticeError> {
    let beta = principal_axis_angle(cfg)?;
    Ok(projections_from_angle(cfg.phi, beta))
}

fn projections_from_angle(phi: f64, beta: f64) -> (f64, f64) {
    let c = (phi + beta).cos();
    (0.5 * (1.0 - c), 0.5 * (1.0 + c))
}

/// Cavity-lattice frequency as a function of transmitted power,
/// ω₂ = ω₁ √(P_z/P₀), where P₀ is the power at the crossing.
pub fn omega2_from_power(p_z: f64, p0: f64, omega1: f64) -> Result<f64, LatticeError> {
    if !(p0 > 0.0) {
        return Err(LatticeError::Domain(format!(
            "crossing power P₀ must be positive, got {p0}"
        )));
    }
    if !(p_z >= 0.0) {
        return Err(LatticeError::Domain(format!(
            "power P_z must be non-negative, got {p_z}"
        )));
    }
    Ok(omega1 * (p_z / p0).sqrt())
}

/// Minimum ω₊ − ω₋ at the symmetric point κ₁ = κ₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimumSplitting {
    /// ω₁φ, valid for φ ≪ 1.
    pub small_angle: f64,
    /// ω₁(√(1+sin φ) − √(1−sin φ)).
    pub exact: f64,
}

pub fn minimum_splitting(omega1: f64, phi: f64) -> MinimumSplitting {
    let s = phi.sin();
    MinimumSplitting {
        small_angle: omega1 * phi,
        // (1+s) − (1−s) over the sum of roots avoids cancellation at small φ.
        exact: omega1 * 2.0 * s / ((1.0 + s).sqrt() + (1.0 - s).sqrt()),
    }
}

/// Confinement perpendicular to a focused standing wave, √2 ω₁/(k₁w₁).
pub fn transverse_frequency(omega1: f64, k1: f64, waist: f64) -> f64 {
    std::f64::consts::SQRT_2 * omega1 / (k1 * waist)
}

/// Lab-frame (x, z) vector → primed frame.
pub fn to_primed_frame(v: Vec2, phi: f64) -> Vec2 {
    let (s, c) = (0.5 * phi).sin_cos();
    [c * v[0] + s * v[1], -s * v[0] + c * v[1]]
}

/// Primed-frame vector → lab (x, z) frame.
pub fn to_lab_frame(v: Vec2, phi: f64) -> Vec2 {
    let (s, c) = (0.5 * phi).sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// Unit wave vectors (k̂₁, k̂₂) in the primed frame.
pub fn unit_wave_vectors(phi: f64) -> (Vec2, Vec2) {
    let (s, c) = (0.5 * phi).sin_cos();
    ([c, s], [s, c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{
        hz_to_angular, wave_number, LAMBDA_1064, LAMBDA_772, MASS_RB87, PLANCK,
    };

    fn cfg(kappa1: f64, kappa2: f64, phi: f64) -> LatticeConfig {
        LatticeConfig::new(
            wave_number(LAMBDA_1064),
            wave_number(LAMBDA_772),
            phi,
            kappa1,
            kappa2,
            MASS_RB87,
        )
        .unwrap()
    }

    #[test]
    fn zero_depth_gives_zero_spring_constant() {
        assert_eq!(spring_constant_from_depth(0.0, 1e7), 0.0);
    }

    #[test]
    fn deep_1064_lattice_gives_half_megahertz() {
        let depth = -PLANCK * 31e6;
        let k1 = wave_number(LAMBDA_1064);
        let kappa = spring_constant_from_depth(depth, k1);
        let f = trap_frequency(kappa, MASS_RB87) / std::f64::consts::TAU;
        assert!((f - 0.5e6).abs() < 0.01e6, "ω₁/2π = {f}");
    }

    #[test]
    fn orthogonal_lattice_is_diagonal() {
        let t = build_spring_tensor(&cfg(3.0, 2.0, 0.0));
        assert_eq!(t.as_rows(), [[3.0, 0.0], [0.0, 2.0]]);
    }

    #[test]
    fn parallel_wave_vectors() {
        let c = 1.5;
        let cf = cfg(c, c, FRAC_PI_2);
        let t = build_spring_tensor(&cf);
        assert!((t.xx - c).abs() < 1e-15 && (t.zz - c).abs() < 1e-15);
        assert!((t.xz - c).abs() < 1e-15);
        let (p, m) = eigenvalues_kappa_pm(&cf);
        assert!((p - 2.0 * c).abs() < 1e-14);
        assert!(m.abs() < 1e-14);
    }

    #[test]
    fn symmetric_point_eigenvalues() {
        let c = 2.0;
        let phi = 0.3;
        let (p, m) = eigenvalues_kappa_pm(&cfg(c, c, phi));
        assert!((p - c * (1.0 + phi.sin())).abs() < 1e-14);
        assert!((m - c * (1.0 - phi.sin())).abs() < 1e-14);
    }

    #[test]
    fn decoupled_axes() {
        let (p, m) = eigenvalues_kappa_pm(&cfg(1.0, 4.0, 0.0));
        assert_eq!((p, m), (4.0, 1.0));
        let (p, m) = eigenvalues_kappa_pm(&cfg(4.0, 1.0, 0.0));
        assert_eq!((p, m), (4.0, 1.0));
    }

    #[test]
    fn trap_frequency_square_root_law() {
        assert_eq!(trap_frequency(0.0, MASS_RB87), 0.0);
        let k = 1.3e-12;
        let r = trap_frequency(4.0 * k, MASS_RB87) / trap_frequency(k, MASS_RB87);
        assert!((r - 2.0).abs() < 1e-14);
    }

    #[test]
    fn beta_limits() {
        let phi = 0.016;
        assert_eq!(principal_axis_angle(&cfg(1.0, 0.0, phi)).unwrap(), phi);
        assert_eq!(principal_axis_angle(&cfg(1.0, 1.0, phi)).unwrap(), FRAC_PI_2);
        let b = principal_axis_angle(&cfg(1.0, 1e9, phi)).unwrap();
        assert!((b - (PI - phi)).abs() < 1e-6);
    }

    #[test]
    fn beta_degenerate_cases() {
        assert_eq!(
            principal_axis_angle(&cfg(0.0, 0.0, 0.1)),
            Err(LatticeError::UndefinedAngle)
        );
        assert_eq!(principal_axis_angle(&cfg(1.0, 1.0, 0.0)).unwrap(), FRAC_PI_2);
        assert_eq!(principal_axis_angle(&cfg(1.0, 2.0, 0.0)).unwrap(), PI);
        assert_eq!(principal_axis_angle(&cfg(2.0, 1.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn tan_beta_relation() {
        let (k1, k2, phi) = (1.0, 0.7, 0.2);
        let b = principal_axis_angle(&cfg(k1, k2, phi)).unwrap();
        let rhs = (k1 + k2) / (k1 - k2) * phi.tan();
        assert!((b.tan() - rhs).abs() < 1e-12 * rhs.abs());
    }

    #[test]
    fn symmetric_point_axes_bisect_wave_vectors() {
        let (ep, em) = principal_axes(&cfg(1.0, 1.0, 0.02)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((ep[0] - r).abs() < 1e-15 && (ep[1] - r).abs() < 1e-15);
        assert!((em[0] + r).abs() < 1e-15 && (em[1] - r).abs() < 1e-15);
    }

    #[test]
    fn decoupled_axis_along_x() {
        let (ep, _) = principal_axes(&cfg(2.0, 1.0, 0.0)).unwrap();
        assert_eq!(ep, [1.0, 0.0]);
    }

    #[test]
    fn projections_match_explicit_dot_products() {
        let phi = 0.016;
        let c = cfg(1.0, 0.1, phi);
        let (pp, pm) = sideband_projection(&c).unwrap();
        let (ep, em) = principal_axes(&c).unwrap();
        let k2hat = [(phi / 2.0).sin(), (phi / 2.0).cos()];
        let dot = |a: Vec2, b: Vec2| a[0] * b[0] + a[1] * b[1];
        assert!((pp - dot(ep, k2hat).powi(2)).abs() < 1e-15);
        assert!((pm - dot(em, k2hat).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_small_angle_projections_near_half() {
        let (pp, pm) = sideband_projection(&cfg(1.0, 1.0, 1e-3)).unwrap();
        assert!((pp - 0.5).abs() < 1e-3 && (pm - 0.5).abs() < 1e-3);
    }

    #[test]
    fn omega2_from_power_cases() {
        let w1 = hz_to_angular(528e3);
        assert_eq!(omega2_from_power(9.5e-6, 9.5e-6, w1).unwrap(), w1);
        assert!((omega2_from_power(4.0, 1.0, w1).unwrap() - 2.0 * w1).abs() < 1e-9);
        assert!(omega2_from_power(1.0, 0.0, w1).is_err());
        assert!(omega2_from_power(1.0, -1.0, w1).is_err());
    }

    #[test]
    fn minimum_splitting_values() {
        let w1 = hz_to_angular(528e3);
        let s = minimum_splitting(w1, 0.016);
        let khz = s.small_angle / std::f64::consts::TAU / 1e3;
        assert!((khz - 8.448).abs() < 1e-9);
        assert!((7e3..=11e3).contains(&(khz * 1e3)));
        assert_eq!(minimum_splitting(w1, 0.0).small_angle, 0.0);
        assert_eq!(minimum_splitting(w1, 0.0).exact, 0.0);
        let s = minimum_splitting(1.0, 0.1);
        assert!(((s.exact - s.small_angle) / s.exact).abs() < 2e-3);
    }

    #[test]
    fn transverse_confinement() {
        let w1 = hz_to_angular(0.5e6);
        let k1 = wave_number(LAMBDA_1064);
        let f = transverse_frequency(w1, k1, 16e-6) / std::f64::consts::TAU;
        assert!((f - 7.48e3).abs() < 20.0, "{f}");
        assert!((transverse_frequency(w1, k1, 32e-6) * 2.0 - transverse_frequency(w1, k1, 16e-6)).abs() < 1e-9);
        assert_eq!(transverse_frequency(w1, k1, f64::INFINITY), 0.0);
    }

    #[test]
    fn frame_round_trip_and_wave_vectors() {
        let phi: f64 = 0.3;
        let lab_k1 = [phi.cos(), phi.sin()];
        let (k1p, k2p) = unit_wave_vectors(phi);
        let got = to_primed_frame(lab_k1, phi);
        assert!((got[0] - k1p[0]).abs() < 1e-15 && (got[1] - k1p[1]).abs() < 1e-15);
        let got = to_primed_frame([0.0, 1.0], phi);
        assert!((got[0] - k2p[0]).abs() < 1e-15 && (got[1] - k2p[1]).abs() < 1e-15);
        let v = [0.3, -1.2];
        let back = to_lab_frame(to_primed_frame(v, phi), phi);
        assert!((back[0] - v[0]).abs() < 1e-15 && (back[1] - v[1]).abs() < 1e-15);
    }

    #[test]
    fn invalid_configs_rejected() {
        let k = wave_number(LAMBDA_772);
        assert!(LatticeConfig::new(k, k, -0.1, 1.0, 1.0, 1.0).is_err());
        assert!(LatticeConfig::new(k, k, 2.0, 1.0, 1.0, 1.0).is_err());
        assert!(LatticeConfig::new(k, k, 0.1, -1.0, 1.0, 1.0).is_err());
        assert!(LatticeConfig::new(k, k, 0.1, 1.0, 1.0, 0.0).is_err());
        assert!(LatticeConfig::new(0.0, k, 0.1, 1.0, 1.0, 1.0).is_err());
        assert!(LatticeConfig::new(k, k, f64::NAN, 1.0, 1.0, 1.0).is_err());
    }
}
