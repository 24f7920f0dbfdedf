//! Fit of the zero-temperature blue-sideband areas across the crossing.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::{best_of, Bound, FitOptions, FitResult, FitWarning, ParamSpec};
use crate::error::FitError;
use crate::lattice::{LatticeConfig, Mode};
use crate::raman;

/// Blue-sideband areas A₁₀±/2π (Hz) at one cavity power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaPoint {
    pub power: f64,
    pub area_plus: f64,
    pub area_minus: f64,
}

/// (A₊, A₋) in Hz. The areas depend on ω₁ only through ω₁/ω±, so a unit
/// ω₁ is used.
pub fn area_model(phi: f64, p0: f64, p1: f64, t: f64, power: f64) -> Result<(f64, f64), FitError> {
    let cfg = LatticeConfig {
        k1: 1.0,
        k2: 1.0,
        phi,
        kappa1: 1.0,
        kappa2: power / p0,
        mass: 1.0,
    };
    let area = |mode| -> Result<f64, FitError> {
        let theta = raman::pulse_area_sideband(&cfg, power, p1, mode)?;
        Ok(raman::sideband_area(theta, t) / TAU)
    };
    Ok((area(Mode::Plus)?, area(Mode::Minus)?))
}

fn seed_p0(points: &[AreaPoint]) -> f64 {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.power.total_cmp(&b.power));
    for w in sorted.windows(2) {
        let d0 = w[0].area_plus - w[0].area_minus;
        let d1 = w[1].area_plus - w[1].area_minus;
        if d0 <= 0.0 && d1 > 0.0 {
            return w[0].power + (w[1].power - w[0].power) * (-d0) / (d1 - d0);
        }
    }
    sorted
        .iter()
        .min_by(|a, b| (a.area_plus - a.area_minus).abs().total_cmp(&(b.area_plus - b.area_minus).abs()))
        .unwrap()
        .power
}

/// Simultaneous fit of both branches for (phi, p0, p1) with the pulse
/// duration `t` known.
pub fn fit_area_model(points: &[AreaPoint], t: f64) -> Result<FitResult, FitError> {
    if points.len() < 4 {
        return Err(FitError::TooFewData {
            data: 2 * points.len(),
            params: 3,
        });
    }
    if !(t > 0.0) {
        return Err(FitError::InvalidInput(format!("pulse duration must be positive, got {t}")));
    }
    if points.iter().any(|p| !(p.power > 0.0 && p.area_plus.is_finite() && p.area_minus.is_finite())) {
        return Err(FitError::InvalidInput("powers must be positive and areas finite".into()));
    }
    let p0 = seed_p0(points);
    let near = points
        .iter()
        .min_by(|a, b| (a.power - p0).abs().total_cmp(&(b.power - p0).abs()))
        .unwrap();
    // small-area limit at the crossing: A₊ + A₋ ≈ P₀/(4tP₁)
    let sum = (near.area_plus + near.area_minus).max(1e-300);
    let p1 = p0 / (4.0 * t * sum);
    let model = |p: &[f64]| -> Vec<f64> {
        let mut r = Vec::with_capacity(2 * points.len());
        for pt in points {
            match area_model(p[0], p[1], p[2], t, pt.power) {
                Ok((ap, am)) => {
                    r.push(ap - pt.area_plus);
                    r.push(am - pt.area_minus);
                }
                Err(_) => {
                    r.push(f64::NAN);
                    r.push(f64::NAN);
                }
            }
        }
        r
    };
    let starts: Vec<Vec<ParamSpec>> = [0.005, 0.01, 0.02, 0.04, 0.08]
        .iter()
        .map(|&phi| {
            vec![
                ParamSpec::new("phi", phi, Bound::Interval(0.0, FRAC_PI_2)),
                ParamSpec::new("p0", p0, Bound::Positive),
                ParamSpec::new("p1", p1, Bound::Positive),
            ]
        })
        .collect();
    let mut fit = best_of(&model, 2 * points.len(), &starts, &FitOptions::default())?;
    let p0 = fit.value("p0");
    if !(points.iter().any(|p| p.power < p0) && points.iter().any(|p| p.power > p0)) {
        fit.warnings.push(FitWarning::InsufficientSpan);
    }
    Ok(fit)
}
