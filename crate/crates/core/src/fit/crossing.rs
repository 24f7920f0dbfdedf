//! Avoided-crossing fit of both eigenfrequency branches against cavity power.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use super::{best_of, Bound, FitOptions, FitResult, FitWarning, ParamSpec};
use crate::error::FitError;
use crate::lattice::{eigenvalues_kappa_pm, LatticeConfig};

/// One scan point: cavity power and the two branch frequencies ω±/2π (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingPoint {
    pub power: f64,
    pub freq_plus: f64,
    pub freq_minus: f64,
}

/// Starting point for the crossing fit; `f1` in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingGuess {
    pub phi: f64,
    pub f1: f64,
    pub p0: f64,
}

/// Branch frequencies (Hz) at `power` for ω₂ = ω₁√(P/P₀).
pub fn crossing_model(phi: f64, f1: f64, p0: f64, power: f64) -> (f64, f64) {
    // κ in units of (2π Hz)² per unit mass; only the eigenvalues are needed
    let w1 = TAU * f1;
    let cfg = LatticeConfig {
        k1: 1.0,
        k2: 1.0,
        phi,
        kappa1: w1 * w1,
        kappa2: w1 * w1 * power / p0,
        mass: 1.0,
    };
    let (kp, km) = eigenvalues_kappa_pm(&cfg);
    (kp.max(0.0).sqrt() / TAU, km.max(0.0).sqrt() / TAU)
}

fn seed(points: &[CrossingPoint]) -> CrossingGuess {
    let best = points
        .iter()
        .min_by(|a, b| (a.freq_plus - a.freq_minus).total_cmp(&(b.freq_plus - b.freq_minus)))
        .unwrap();
    let f1 = 0.5 * (best.freq_plus + best.freq_minus);
    CrossingGuess {
        phi: ((best.freq_plus - best.freq_minus) / f1).clamp(1e-4, 1.0),
        f1,
        p0: best.power,
    }
}

/// Simultaneous least-squares fit of both branches for (phi, f1, p0).
pub fn fit_avoided_crossing(points: &[CrossingPoint], guess: Option<CrossingGuess>) -> Result<FitResult, FitError> {
    if points.len() < 4 {
        return Err(FitError::TooFewData {
            data: points.len(),
            params: 3,
        });
    }
    if points
        .iter()
        .any(|p| !(p.power > 0.0 && p.freq_plus.is_finite() && p.freq_minus.is_finite()))
    {
        return Err(FitError::InvalidInput("powers must be positive and frequencies finite".into()));
    }
    let g = guess.unwrap_or_else(|| seed(points));
    let model = |p: &[f64]| -> Vec<f64> {
        let mut r = Vec::with_capacity(2 * points.len());
        for pt in points {
            let (fp, fm) = crossing_model(p[0], p[1], p[2], pt.power);
            r.push(fp - pt.freq_plus);
            r.push(fm - pt.freq_minus);
        }
        r
    };
    let starts: Vec<Vec<ParamSpec>> = [1.0, 0.5, 2.0]
        .iter()
        .map(|s| {
            vec![
                ParamSpec::new("phi", (g.phi * s).min(FRAC_PI_2), Bound::Interval(0.0, FRAC_PI_2)),
                ParamSpec::new("f1", g.f1, Bound::Positive),
                ParamSpec::new("p0", g.p0, Bound::Positive),
            ]
        })
        .collect();
    let mut fit = best_of(&model, 2 * points.len(), &starts, &FitOptions::default())?;
    let phi = fit.value("phi");
    let sphi = fit.error_of("phi").unwrap();
    if phi < 1e-4 || !(phi > 2.0 * sphi) {
        fit.warnings.push(FitWarning::DegenerateCrossing);
    }
    let p0 = fit.value("p0");
    let below = points.iter().any(|p| p.power < p0);
    let above = points.iter().any(|p| p.power > p0);
    if !(below && above) {
        fit.warnings.push(FitWarning::InsufficientSpan);
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(phi: f64, f1: f64, p0: f64, powers: &[f64]) -> Vec<CrossingPoint> {
        powers
            .iter()
            .map(|&power| {
                let (freq_plus, freq_minus) = crossing_model(phi, f1, p0, power);
                CrossingPoint {
                    power,
                    freq_plus,
                    freq_minus,
                }
            })
            .collect()
    }

    fn powers() -> Vec<f64> {
        (0..25).map(|i| 6.0 + 0.3 * i as f64).collect()
    }

    #[test]
    fn model_minimum_splitting() {
        let (fp, fm) = crossing_model(0.016, 528e3, 9.5, 9.5);
        assert!(((fp - fm) - 528e3 * 0.016).abs() < 0.01 * 528e3 * 0.016);
    }

    #[test]
    fn noiseless_round_trip() {
        let data = scan(0.016, 528e3, 9.5, &powers());
        let fit = fit_avoided_crossing(&data, None).unwrap();
        assert!(fit.converged);
        assert!((fit.value("phi") / 0.016 - 1.0).abs() < 1e-6);
        assert!((fit.value("f1") / 528e3 - 1.0).abs() < 1e-6);
        assert!((fit.value("p0") / 9.5 - 1.0).abs() < 1e-6);
        assert!(fit.warnings.is_empty(), "{:?}", fit.warnings);
    }

    #[test]
    fn zero_angle_is_flagged() {
        let data = scan(0.0, 528e3, 9.5, &powers());
        let fit = fit_avoided_crossing(&data, None).unwrap();
        assert!(fit.has_warning(FitWarning::DegenerateCrossing), "{fit:?}");
    }

    #[test]
    fn one_sided_scan_is_flagged() {
        let p: Vec<f64> = (0..8).map(|i| 2.0 + 0.5 * i as f64).collect();
        let data = scan(0.016, 528e3, 9.5, &p);
        let fit = fit_avoided_crossing(&data, None).unwrap();
        assert!(fit.has_warning(FitWarning::InsufficientSpan));
    }

    #[test]
    fn too_few_points() {
        let data = scan(0.016, 528e3, 9.5, &[8.0, 9.0, 10.0]);
        assert!(matches!(fit_avoided_crossing(&data, None), Err(FitError::TooFewData { .. })));
    }
}
