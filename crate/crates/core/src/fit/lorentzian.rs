//! Lorentzian peak fits and direct area extraction on spectra.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{least_squares_fit, Bound, FitOptions, FitResult, FitWarning, ParamSpec};
use crate::error::FitError;
use crate::spectrum::Spectrum;

/// Area-normalized Lorentzian times `area`, evaluated at `x`.
pub fn lorentzian(x: f64, center: f64, fwhm: f64, area: f64) -> f64 {
    let hw = 0.5 * fwhm;
    area * hw / PI / ((x - center).powi(2) + hw * hw)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianPeak {
    /// Hz
    pub center: f64,
    /// Hz
    pub fwhm: f64,
    /// Hz × probability
    pub area: f64,
}

impl LorentzianPeak {
    pub fn height(&self) -> f64 {
        2.0 * self.area / (PI * self.fwhm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorentzianModel {
    pub peaks: Vec<LorentzianPeak>,
    pub offset: f64,
}

impl LorentzianModel {
    pub fn eval(&self, x: f64) -> f64 {
        self.offset + self.peaks.iter().map(|p| lorentzian(x, p.center, p.fwhm, p.area)).sum::<f64>()
    }

    /// Reads `center_i`, `fwhm_i`, `area_i` and `offset` from a fit.
    pub fn from_fit(fit: &FitResult) -> Self {
        let mut peaks = Vec::new();
        let mut i = 1;
        while let Some(center) = fit.get(&format!("center_{i}")) {
            peaks.push(LorentzianPeak {
                center,
                fwhm: fit.value(&format!("fwhm_{i}")),
                area: fit.value(&format!("area_{i}")),
            });
            i += 1;
        }
        Self {
            peaks,
            offset: fit.value("offset"),
        }
    }
}

/// Options for [`fit_lorentzian_doublet`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DoubletConstraints {
    /// Fix the offset instead of fitting it.
    pub offset: Option<f64>,
    /// Fix all widths (Hz).
    pub fwhm: Option<f64>,
    /// Restrict the fit to detunings in [lo, hi] (Hz).
    pub window: Option<(f64, f64)>,
    /// Initial centers (Hz); replaces peak picking.
    pub centers: Option<Vec<f64>>,
}

/// Mean transfer over the outermost 10% of points (5% at each end).
pub fn background_level(spectrum: &Spectrum) -> f64 {
    let n = spectrum.len();
    let k = (n / 20).max(1);
    let edge: Vec<f64> = spectrum.transfer[..k.min(n)]
        .iter()
        .chain(&spectrum.transfer[n.saturating_sub(k)..])
        .copied()
        .collect();
    edge.iter().sum::<f64>() / edge.len() as f64
}

/// Indices of local maxima of the 3-point moving average, tallest first.
pub fn find_peaks(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    if n < 3 {
        return (0..n).collect();
    }
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            values[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let mut peaks: Vec<usize> = (1..n - 1)
        .filter(|&i| smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1])
        .collect();
    peaks.sort_by(|&a, &b| smooth[b].total_cmp(&smooth[a]).then(a.cmp(&b)));
    peaks
}

/// Width of the peak at `idx` where it falls to half its height above `base`.
fn half_max_width(x: &[f64], y: &[f64], idx: usize, base: f64) -> f64 {
    let half = base + 0.5 * (y[idx] - base);
    let mut l = idx;
    while l > 0 && y[l] > half {
        l -= 1;
    }
    let mut r = idx;
    while r + 1 < y.len() && y[r] > half {
        r += 1;
    }
    (x[r] - x[l]).max(x.get(1).map_or(1.0, |x1| x1 - x[0]))
}

/// Fits `n_peaks` (1 or 2) Lorentzians plus an offset.
///
/// Parameters are named `center_i`, `fwhm_i`, `area_i` (i from 1, sorted
/// by center) and `offset`. Seeds come from the two largest local maxima
/// of the 3-point moving average, and the offset seed from the outermost
/// 10% of the points.
pub fn fit_lorentzian_doublet(
    spectrum: &Spectrum,
    n_peaks: usize,
    constraints: &DoubletConstraints,
) -> Result<FitResult, FitError> {
    if !(1..=2).contains(&n_peaks) {
        return Err(FitError::InvalidInput(format!("n_peaks must be 1 or 2, got {n_peaks}")));
    }
    spectrum
        .validate()
        .map_err(|e| FitError::InvalidInput(e.to_string()))?;
    let (x, y): (Vec<f64>, Vec<f64>) = match constraints.window {
        Some((lo, hi)) => {
            let (first, last) = (spectrum.detunings[0], *spectrum.detunings.last().unwrap());
            if lo < first || hi > last || lo >= hi {
                return Err(FitError::WindowOutOfRange {
                    lo,
                    hi,
                    span_lo: first,
                    span_hi: last,
                });
            }
            spectrum
                .detunings
                .iter()
                .zip(&spectrum.transfer)
                .filter(|(d, _)| (lo..=hi).contains(*d))
                .map(|(d, t)| (*d, *t))
                .unzip()
        }
        None => (spectrum.detunings.clone(), spectrum.transfer.clone()),
    };
    let sub = Spectrum::from_points(x.clone(), y.clone()).map_err(|e| FitError::InvalidInput(e.to_string()))?;
    let base = constraints.offset.unwrap_or_else(|| background_level(&sub));
    let step = (x[x.len() - 1] - x[0]) / (x.len() - 1).max(1) as f64;

    let picked = find_peaks(&y);
    let centers: Vec<f64> = match &constraints.centers {
        Some(c) if c.len() == n_peaks => c.clone(),
        Some(c) => {
            return Err(FitError::InvalidInput(format!(
                "{} initial centers given for {n_peaks} peaks",
                c.len()
            )))
        }
        None => {
            let mut c: Vec<f64> = picked.iter().take(n_peaks).map(|&i| x[i]).collect();
            if c.is_empty() {
                let imax = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap();
                c.push(x[imax]);
            }
            while c.len() < n_peaks {
                // one visible maximum: split it
                let c0 = c[0];
                c.push(c0 + 2.0 * step);
                c[0] = c0 - 2.0 * step;
            }
            c
        }
    };
    let nearest = |c: f64| {
        (0..x.len())
            .min_by(|&a, &b| (x[a] - c).abs().total_cmp(&(x[b] - c).abs()))
            .unwrap()
    };
    let mut seeds: Vec<(f64, f64, f64)> = centers
        .iter()
        .map(|&c| {
            let i = nearest(c);
            let w = constraints.fwhm.unwrap_or_else(|| half_max_width(&x, &y, i, base));
            let h = (y[i] - base).max(1e-6);
            (c, w, 0.5 * PI * h * w)
        })
        .collect();
    if n_peaks == 2 && constraints.fwhm.is_none() {
        let sep = (seeds[0].0 - seeds[1].0).abs();
        for s in &mut seeds {
            if s.1 > sep {
                s.2 *= sep / s.1;
                s.1 = sep.max(2.0 * step);
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut specs = Vec::new();
    for (i, (c, w, a)) in seeds.iter().enumerate() {
        let k = i + 1;
        specs.push(ParamSpec::new(&format!("center_{k}"), *c, Bound::Free));
        specs.push(match constraints.fwhm {
            Some(fw) => ParamSpec::fixed(&format!("fwhm_{k}"), fw),
            None => ParamSpec::new(&format!("fwhm_{k}"), *w, Bound::Positive),
        });
        specs.push(ParamSpec::new(&format!("area_{k}"), *a, Bound::Positive));
    }
    specs.push(match constraints.offset {
        Some(o) => ParamSpec::fixed("offset", o),
        None => ParamSpec::new("offset", base, Bound::Free),
    });

    let model = |p: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(&y)
            .map(|(&xi, &yi)| {
                let peaks: f64 = p[..3 * n_peaks].chunks(3).map(|c| lorentzian(xi, c[0], c[1], c[2])).sum();
                p[3 * n_peaks] + peaks - yi
            })
            .collect()
    };
    let mut fit = least_squares_fit(model, x.len(), &specs, &FitOptions::default())?;
    if n_peaks == 2 {
        let m = LorentzianModel::from_fit(&fit);
        let (a, b) = (m.peaks[0], m.peaks[1]);
        if (a.center - b.center).abs() < 0.5 * a.fwhm.max(b.fwhm) {
            fit.warnings.push(FitWarning::MergedPeaks);
        }
        if a.center > b.center {
            // keep peaks sorted by center
            let idx = |n: &str| fit.names.iter().position(|s| s == n).unwrap();
            for name in ["center", "fwhm", "area"] {
                let (i, j) = (idx(&format!("{name}_1")), idx(&format!("{name}_2")));
                fit.params.swap(i, j);
                fit.stderr.swap(i, j);
                fit.fixed.swap(i, j);
            }
        }
    }
    Ok(fit)
}

/// Trapezoid integral of (transfer − offset) over the points inside
/// `window` (Hz).
pub fn extract_area_raw(spectrum: &Spectrum, window: (f64, f64), offset: f64) -> Result<f64, FitError> {
    let (lo, hi) = window;
    let (first, last) = (spectrum.detunings[0], *spectrum.detunings.last().unwrap());
    if lo < first || hi > last || !(lo < hi) {
        return Err(FitError::WindowOutOfRange {
            lo,
            hi,
            span_lo: first,
            span_hi: last,
        });
    }
    Ok(spectrum.area_between(lo, hi, offset))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum_of(model: &LorentzianModel, lo: f64, hi: f64, step: f64) -> Spectrum {
        let n = ((hi - lo) / step).round() as usize + 1;
        let x: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
        let y = x.iter().map(|&v| model.eval(v)).collect();
        Spectrum::from_points(x, y).unwrap()
    }

    #[test]
    fn single_peak_area_closed_form() {
        let m = LorentzianModel {
            peaks: vec![LorentzianPeak {
                center: 430e3,
                fwhm: 3.7e3,
                area: 500.0,
            }],
            offset: 0.06,
        };
        let s = spectrum_of(&m, 400e3, 460e3, 100.0);
        let fit = fit_lorentzian_doublet(&s, 1, &DoubletConstraints::default()).unwrap();
        let got = LorentzianModel::from_fit(&fit).peaks[0];
        let height = got.height();
        assert!((got.area - PI * height * got.fwhm / 2.0).abs() < 1e-6 * got.area);
        assert!((got.area - 500.0).abs() < 1e-6 * 500.0);
        assert!((got.fwhm - 3.7e3).abs() < 1e-6 * 3.7e3);
    }

    #[test]
    fn noiseless_doublet_round_trip() {
        let m = LorentzianModel {
            peaks: vec![
                LorentzianPeak {
                    center: 430e3,
                    fwhm: 5.5e3,
                    area: 300.0,
                },
                LorentzianPeak {
                    center: 440e3,
                    fwhm: 5.5e3,
                    area: 250.0,
                },
            ],
            offset: 0.06,
        };
        let s = spectrum_of(&m, 400e3, 470e3, 200.0);
        let fit = fit_lorentzian_doublet(&s, 2, &DoubletConstraints::default()).unwrap();
        let got = LorentzianModel::from_fit(&fit);
        for (g, w) in got.peaks.iter().zip(&m.peaks) {
            assert!((g.center - w.center).abs() < 1e-6 * w.center);
            assert!((g.area - w.area).abs() < 1e-6 * w.area);
        }
        assert!(!fit.has_warning(FitWarning::MergedPeaks));
    }

    #[test]
    fn constrained_mode_keeps_offset_and_width() {
        let m = LorentzianModel {
            peaks: vec![
                LorentzianPeak {
                    center: -555e3,
                    fwhm: 5.5e3,
                    area: 30.0,
                },
                LorentzianPeak {
                    center: -535e3,
                    fwhm: 5.5e3,
                    area: 20.0,
                },
            ],
            offset: 0.06,
        };
        let s = spectrum_of(&m, -580e3, -510e3, 200.0);
        let c = DoubletConstraints {
            offset: Some(0.06),
            fwhm: Some(5.5e3),
            ..Default::default()
        };
        let fit = fit_lorentzian_doublet(&s, 2, &c).unwrap();
        assert_eq!(fit.value("offset"), 0.06);
        assert_eq!(fit.value("fwhm_1"), 5.5e3);
        let got = LorentzianModel::from_fit(&fit);
        assert!((got.peaks[0].area - 30.0).abs() < 1e-6 * 30.0);
        assert!((got.peaks[1].area - 20.0).abs() < 1e-6 * 20.0);
    }

    #[test]
    fn merged_peaks_flagged() {
        let m = LorentzianModel {
            peaks: vec![LorentzianPeak {
                center: 0.0,
                fwhm: 5e3,
                area: 100.0,
            }],
            offset: 0.0,
        };
        let s = spectrum_of(&m, -30e3, 30e3, 200.0);
        let fit = fit_lorentzian_doublet(&s, 2, &DoubletConstraints::default()).unwrap();
        assert!(fit.has_warning(FitWarning::MergedPeaks) || fit.has_warning(FitWarning::SingularJacobian));
    }

    #[test]
    fn raw_area() {
        let flat = Spectrum::from_points(vec![0.0, 1.0, 2.0, 3.0], vec![0.06; 4]).unwrap();
        assert_eq!(extract_area_raw(&flat, (0.0, 3.0), 0.06).unwrap(), 0.0);
        assert!(matches!(
            extract_area_raw(&flat, (-1.0, 2.0), 0.06),
            Err(FitError::WindowOutOfRange { .. })
        ));
        let m = LorentzianModel {
            peaks: vec![LorentzianPeak {
                center: 0.0,
                fwhm: 3e3,
                area: 100.0,
            }],
            offset: 0.06,
        };
        // window of ±150 FWHM holds all but 2/(π·300) of the area
        let s = spectrum_of(&m, -450e3, 450e3, 100.0);
        let half: f64 = 450e3;
        let truncated = 100.0 * 2.0 / PI * (half / 1.5e3).atan();
        let got = extract_area_raw(&s, (-half, half), 0.06).unwrap();
        assert!((got - truncated).abs() < 0.01 * truncated);
        assert!((got - 100.0).abs() < 0.01 * 100.0);
    }

    #[test]
    fn peak_picking_and_background() {
        let y = [0.0, 0.1, 0.5, 0.1, 0.0, 0.0, 0.2, 0.9, 0.2, 0.0];
        let p = find_peaks(&y);
        assert_eq!(p[0], 7);
        assert_eq!(p[1], 2);
        let s = Spectrum::from_points((0..40).map(|i| i as f64).collect(), (0..40).map(|i| if i < 2 || i > 37 { 0.1 } else { 0.5 }).collect()).unwrap();
        assert!((background_level(&s) - 0.1).abs() < 1e-12);
    }
}
