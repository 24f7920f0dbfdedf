//! Raman coupling of the trapped atom: Lamb–Dicke factors, matrix elements,
//! the two-level lineshape, pulse and sideband areas, and thermometry.
//!
//! All frequencies are angular (rad/s), areas are integrals of transfer
//! probability over angular detuning (rad/s).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{QuadratureError, RamanError};
use crate::lattice::{LatticeConfig, Mode};
use crate::quadrature;
use crate::specfun;
use crate::units::{recoil_angular_frequency, BOLTZMANN, HBAR};

/// Ground-state hyperfine splitting of ⁸⁷Rb (rad/s). Detunings are quoted
/// relative to it.
pub const OMEGA_HF: f64 = TAU * 6_834_682_610.904;

/// Thermal sums stop once pₙ drops below this.
pub const POPULATION_CUTOFF: f64 = 1e-15;

/// Gauss–Hermite node count for overlap integrals; doubled as a check.
pub const OVERLAP_NODES: usize = 200;

const OVERLAP_TOLERANCE: f64 = 1e-12;

/// Value of the trapping standing wave at the atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    /// Atom sits at a node: coupling ∝ sin(k₂z), odd Δn only.
    Node,
    /// Atom sits at an antinode: coupling ∝ cos(k₂z), even Δn only.
    Antinode,
}

impl Parity {
    /// Whether ⟨n′|·|n⟩ vanishes by symmetry.
    pub fn forbids(self, n: u32, n_prime: u32) -> bool {
        let even = (n + n_prime) % 2 == 0;
        match self {
            Parity::Node => even,
            Parity::Antinode => !even,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamanDrive {
    /// Free-space two-photon Rabi frequency ω₀.
    pub omega0: f64,
    /// Pulse duration (s).
    pub t_pulse: f64,
    /// Two-photon detuning relative to [`OMEGA_HF`].
    pub delta_omega: f64,
    pub geometry: Parity,
}

impl RamanDrive {
    pub fn new(omega0: f64, t_pulse: f64, delta_omega: f64, geometry: Parity) -> Result<Self, RamanError> {
        let drive = Self {
            omega0,
            t_pulse,
            delta_omega,
            geometry,
        };
        drive.validate()?;
        Ok(drive)
    }

    pub fn validate(&self) -> Result<(), RamanError> {
        if !(self.omega0 >= 0.0 && self.omega0.is_finite()) {
            return Err(RamanError::Domain(format!("ω₀ must be ≥ 0, got {}", self.omega0)));
        }
        if !(self.t_pulse > 0.0 && self.t_pulse.is_finite()) {
            return Err(RamanError::Domain(format!(
                "pulse duration must be positive, got {}",
                self.t_pulse
            )));
        }
        if !self.delta_omega.is_finite() {
            return Err(RamanError::Domain("detuning must be finite".into()));
        }
        Ok(())
    }
}

/// Thermal occupation of one oscillator mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    /// Boltzmann factor exp(−ħω/k_BT).
    pub q: f64,
    pub nbar: f64,
    /// Mode frequency (rad/s).
    pub omega: f64,
    /// Temperature (K).
    pub temperature: f64,
}

impl ThermalState {
    pub fn from_q(omega: f64, q: f64) -> Result<Self, RamanError> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(RamanError::Domain(format!("mode frequency must be positive, got {omega}")));
        }
        if !(0.0..1.0).contains(&q) {
            return Err(RamanError::Domain(format!("q must lie in [0, 1), got {q}")));
        }
        let temperature = if q == 0.0 {
            0.0
        } else {
            HBAR * omega / (BOLTZMANN * -q.ln())
        };
        Ok(Self {
            q,
            nbar: nbar_from_q(q),
            omega,
            temperature,
        })
    }

    pub fn from_temperature(omega: f64, temperature: f64) -> Result<Self, RamanError> {
        let q = thermal_q(omega, temperature)?;
        let mut state = Self::from_q(omega, q)?;
        state.temperature = temperature;
        Ok(state)
    }

    pub fn from_nbar(omega: f64, nbar: f64) -> Result<Self, RamanError> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(RamanError::Domain(format!("n̄ must be ≥ 0, got {nbar}")));
        }
        Self::from_q(omega, q_from_nbar(nbar))
    }

    pub fn ground(omega: f64) -> Result<Self, RamanError> {
        Self::from_q(omega, 0.0)
    }

    /// pₙ = (1 − q) qⁿ
    pub fn population(&self, n: u32) -> f64 {
        (1.0 - self.q) * self.q.powi(n as i32)
    }

    /// p₀, p₁, … up to the last term ≥ [`POPULATION_CUTOFF`].
    pub fn populations(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut p = 1.0 - self.q;
        while p >= POPULATION_CUTOFF {
            out.push(p);
            p *= self.q;
            if self.q == 0.0 {
                break;
            }
        }
        out
    }
}

pub fn nbar_from_q(q: f64) -> f64 {
    q / (1.0 - q)
}

pub fn q_from_nbar(nbar: f64) -> f64 {
    nbar / (1.0 + nbar)
}

/// η = √(projection²) √(ω_rec/ω) with ω_rec = ħk₂²/2m.
pub fn lamb_dicke(projection_sq: f64, omega_mode: f64, k2: f64, mass: f64) -> Result<f64, RamanError> {
    if !(omega_mode > 0.0) {
        return Err(RamanError::Domain(format!(
            "mode frequency must be positive, got {omega_mode}"
        )));
    }
    if !(0.0..=1.0 + 1e-12).contains(&projection_sq) {
        return Err(RamanError::Domain(format!(
            "squared projection must lie in [0, 1], got {projection_sq}"
        )));
    }
    let omega_rec = recoil_angular_frequency(k2, mass);
    Ok(projection_sq.min(1.0).sqrt() * (omega_rec / omega_mode).sqrt())
}

/// Lamb–Dicke parameter of one eigenmode with respect to the Raman wave vector k₂.
pub fn mode_lamb_dicke(cfg: &LatticeConfig, mode: Mode) -> Result<f64, RamanError> {
    let eig = cfg.eigensystem()?;
    lamb_dicke(eig.projection(mode), eig.omega(mode), cfg.k2, cfg.mass)
}

/// √(ħ/mω)
pub fn oscillator_length(omega: f64, mass: f64) -> f64 {
    (HBAR / (mass * omega)).sqrt()
}

/// First-order blue-sideband coupling ⟨n+1|k·x|n⟩ = η√(n+1).
pub fn ladder_matrix_element(n: u32, eta: f64) -> f64 {
    eta * (n as f64 + 1.0).sqrt()
}

/// Exact two-level transfer probability after a square pulse,
/// `ω²/(ω²+Δ²) · sin²(t√(ω²+Δ²)/2)`.
pub fn rabi_transfer_probability(omega_nn: f64, delta: f64, t: f64) -> f64 {
    let w2 = omega_nn * omega_nn;
    let g2 = w2 + delta * delta;
    if g2 == 0.0 {
        return 0.0;
    }
    let s = (0.5 * t * g2.sqrt()).sin();
    (w2 / g2 * s * s).clamp(0.0, 1.0)
}

/// Weak-pulse lineshape (ω²/Δ²) sin²(Δt/2), valid for ωt ≪ 1.
pub fn small_area_lineshape(omega_nn: f64, delta: f64, t: f64) -> f64 {
    if delta == 0.0 {
        let h = 0.5 * omega_nn * t;
        return h * h;
    }
    let s = (0.5 * delta * t).sin();
    omega_nn * omega_nn / (delta * delta) * s * s
}

/// Full width at half maximum of the weak-pulse lineshape, 2π·0.886/t.
pub fn lineshape_fwhm(t: f64) -> f64 {
    TAU * 0.886 / t
}

/// θ = √((ω₁/ω±)(P_z/P₁)(e±·k₂/k₂)²) for the first blue sideband of a mode
/// when the probe power is the lattice power P_z.
pub fn pulse_area_sideband(cfg: &LatticeConfig, p_z: f64, p1: f64, mode: Mode) -> Result<f64, RamanError> {
    if !(p1 > 0.0) {
        return Err(RamanError::Domain(format!("P₁ must be positive, got {p1}")));
    }
    if !(p_z >= 0.0) {
        return Err(RamanError::Domain(format!("P_z must be ≥ 0, got {p_z}")));
    }
    let eig = cfg.eigensystem()?;
    let omega = eig.omega(mode);
    if !(omega > 0.0) {
        return Err(RamanError::Domain(format!("{} mode has zero frequency", mode.label())));
    }
    Ok((cfg.omega1() / omega * p_z / p1 * eig.projection(mode)).sqrt())
}

/// θ = ω₀ t η
pub fn pulse_area_from_drive(omega0: f64, t: f64, eta: f64) -> f64 {
    omega0 * t * eta
}

/// ω₀ implied by P₁ = (ω₁/ω_rec) P_z / (ω₀ t)².
pub fn omega0_from_p1(omega1: f64, omega_rec: f64, p_z: f64, p1: f64, t: f64) -> Result<f64, RamanError> {
    if !(p1 > 0.0 && t > 0.0 && omega_rec > 0.0) {
        return Err(RamanError::Domain("P₁, t and ω_rec must be positive".into()));
    }
    Ok((omega1 * p_z / (omega_rec * p1)).sqrt() / t)
}

/// P₁ = (ω₁/ω_rec) P_z / (ω₀ t)²
pub fn p1_from_omega0(omega1: f64, omega_rec: f64, p_z: f64, omega0: f64, t: f64) -> Result<f64, RamanError> {
    if !(omega0 > 0.0 && t > 0.0 && omega_rec > 0.0) {
        return Err(RamanError::Domain("ω₀, t and ω_rec must be positive".into()));
    }
    let wt = omega0 * t;
    Ok(omega1 / omega_rec * p_z / (wt * wt))
}

/// Area under a sideband line, (π/2t) θ² χ(θ).
pub fn sideband_area(theta: f64, t: f64) -> f64 {
    PI / (2.0 * t) * theta * theta * specfun::chi(theta)
}

/// q = exp(−ħω/k_BT), with q = 0 at T = 0.
pub fn thermal_q(omega: f64, temperature: f64) -> Result<f64, RamanError> {
    if !(omega > 0.0) {
        return Err(RamanError::Domain(format!("mode frequency must be positive, got {omega}")));
    }
    if !(temperature >= 0.0) {
        return Err(RamanError::Domain(format!("temperature must be ≥ 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok((-HBAR * omega / (BOLTZMANN * temperature)).exp())
}

/// Thermally averaged first-order areas (A_blue, A_red) given the
/// ground-state blue area A₁₀ in the small-area regime.
pub fn thermal_sideband_areas(q: f64, a10: f64) -> Result<(f64, f64), RamanError> {
    if !(0.0..1.0).contains(&q) {
        return Err(RamanError::Domain(format!("q must lie in [0, 1), got {q}")));
    }
    let blue = a10 / (1.0 - q);
    Ok((blue, q * blue))
}

/// Result of inverting a red/blue area pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thermometry {
    pub q: f64,
    pub nbar: f64,
    /// Temperature (K).
    pub temperature: f64,
}

/// n̄ = (A_blue/A_red − 1)⁻¹ and T = ħω/(k_B ln(A_blue/A_red)).
pub fn thermometry_invert(a_red: f64, a_blue: f64, omega: f64) -> Result<Thermometry, RamanError> {
    if !(omega > 0.0) {
        return Err(RamanError::Domain(format!("mode frequency must be positive, got {omega}")));
    }
    if !(a_red >= 0.0) || !(a_red < a_blue) {
        if a_red == 0.0 && a_blue == 0.0 {
            return Err(RamanError::Domain("both sideband areas vanish".into()));
        }
        return Err(RamanError::Unphysical { a_red, a_blue });
    }
    if a_red == 0.0 {
        return Ok(Thermometry {
            q: 0.0,
            nbar: 0.0,
            temperature: 0.0,
        });
    }
    let ratio = a_blue / a_red;
    Ok(Thermometry {
        q: a_red / a_blue,
        nbar: 1.0 / (ratio - 1.0),
        temperature: HBAR * omega / (BOLTZMANN * ratio.ln()),
    })
}

/// ω₀ = (1/η) √(2(A_blue − A_red)/(πt))
pub fn extract_omega0(a_red: f64, a_blue: f64, eta: f64, t: f64) -> Result<f64, RamanError> {
    if !(eta > 0.0 && t > 0.0) {
        return Err(RamanError::Domain("η and t must be positive".into()));
    }
    let diff = a_blue - a_red;
    if !(diff >= 0.0 && a_red >= 0.0) {
        return Err(RamanError::Domain(format!(
            "need A_blue ≥ A_red ≥ 0, got A_red = {a_red}, A_blue = {a_blue}"
        )));
    }
    Ok((2.0 * diff / (PI * t)).sqrt() / eta)
}

/// Normalized Hermite functions without the Gaussian factor,
/// h̃ₙ(ξ) with ∫ h̃ₘ h̃ₙ e^{−ξ²} dξ = δₘₙ, for n = 0..=n_max.
pub fn hermite_functions(xi: f64, n_max: u32) -> Vec<f64> {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut h = Vec::with_capacity(n_max as usize + 1);
    h.push(PIM4);
    if n_max >= 1 {
        h.push(std::f64::consts::SQRT_2 * xi * PIM4);
    }
    for n in 1..n_max as usize {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * xi * h[n] - (nf / (nf + 1.0)).sqrt() * h[n - 1];
        h.push(next);
    }
    h
}

/// ⟨n′|sin(k₂z)|n⟩ (node) or ⟨n′|cos(k₂z)|n⟩ (antinode) by Gauss–Hermite
/// quadrature with the given node count, without any parity bookkeeping.
pub fn selection_rule_overlap_raw(
    n: u32,
    n_prime: u32,
    k2: f64,
    oscillator_length: f64,
    parity: Parity,
    nodes: usize,
) -> f64 {
    let rule = quadrature::cached_gauss_hermite(nodes);
    let ka = k2 * oscillator_length;
    let top = n.max(n_prime);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| {
            let h = hermite_functions(x, top);
            let field = match parity {
                Parity::Node => (ka * x).sin(),
                Parity::Antinode => (ka * x).cos(),
            };
            w * h[n as usize] * h[n_prime as usize] * field
        })
        .sum()
}

/// Motional overlap entering the Raman Rabi frequency. Symmetry-forbidden
/// elements are returned as exact zeros; others are checked against a rule
/// with twice the nodes.
pub fn selection_rule_overlap(
    n: u32,
    n_prime: u32,
    k2: f64,
    oscillator_length: f64,
    parity: Parity,
) -> Result<f64, RamanError> {
    if !(k2 > 0.0 && oscillator_length > 0.0) {
        return Err(RamanError::Domain("k₂ and the oscillator length must be positive".into()));
    }
    if parity.forbids(n, n_prime) {
        return Ok(0.0);
    }
    let coarse = selection_rule_overlap_raw(n, n_prime, k2, oscillator_length, parity, OVERLAP_NODES);
    let fine = selection_rule_overlap_raw(n, n_prime, k2, oscillator_length, parity, 2 * OVERLAP_NODES);
    let diff = (coarse - fine).abs();
    if diff > OVERLAP_TOLERANCE {
        return Err(QuadratureError::NotConverged {
            estimate: diff,
            tolerance: OVERLAP_TOLERANCE,
        }
        .into());
    }
    Ok(fine)
}
