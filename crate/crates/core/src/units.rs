//! Physical constants and unit conversions.
//!
//! Everything inside the library is SI (rad/s, J, kg, m, s, K). The
//! conventional laboratory units (kHz for ω/2π, µW, µK, mrad) only appear
//! at the I/O boundary through the helpers below.

use std::f64::consts::TAU;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Atomic mass unit (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Mass of a ⁸⁷Rb atom (kg).
pub const MASS_RB87: f64 = 86.909_180_527 * AMU;

/// Wavelength of the free-space lattice (m).
pub const LAMBDA_1064: f64 = 1064e-9;
/// Wavelength of the cavity lattice and the Raman light (m).
pub const LAMBDA_772: f64 = 772e-9;

/// Angular wave number 2π/λ.
pub fn wave_number(wavelength: f64) -> f64 {
    TAU / wavelength
}

/// Recoil angular frequency ħk²/2m.
pub fn recoil_angular_frequency(k: f64, mass: f64) -> f64 {
    HBAR * k * k / (2.0 * mass)
}

/// ω/2π in kHz → angular frequency in rad/s.
pub fn khz_to_angular(f_khz: f64) -> f64 {
    TAU * f_khz * 1e3
}

/// Angular frequency in rad/s → ω/2π in kHz.
pub fn angular_to_khz(omega: f64) -> f64 {
    omega / TAU * 1e-3
}

/// ω/2π in Hz → rad/s.
pub fn hz_to_angular(f_hz: f64) -> f64 {
    TAU * f_hz
}

/// rad/s → ω/2π in Hz.
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / TAU
}

pub fn uw_to_w(p_uw: f64) -> f64 {
    p_uw * 1e-6
}

pub fn w_to_uw(p_w: f64) -> f64 {
    p_w * 1e6
}

pub fn uk_to_k(t_uk: f64) -> f64 {
    t_uk * 1e-6
}

pub fn k_to_uk(t_k: f64) -> f64 {
    t_k * 1e6
}

pub fn mrad_to_rad(x: f64) -> f64 {
    x * 1e-3
}

pub fn rad_to_mrad(x: f64) -> f64 {
    x * 1e3
}

pub fn us_to_s(t_us: f64) -> f64 {
    t_us * 1e-6
}

pub fn s_to_us(t_s: f64) -> f64 {
    t_s * 1e6
}
