//! Subcommand parameter sets and handlers. Units at this boundary: kHz for
//! frequencies, detunings and sideband areas, µW for powers, µK for
//! temperatures, mrad for φ and µs for durations.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sideband_core::cooling::{simulate_cooling, CoolingProtocol, ModeSelection};
use sideband_core::fit::{
    extract_area_raw, fit_area_model, fit_avoided_crossing, fit_lorentzian_doublet, AreaPoint, CrossingGuess,
    CrossingPoint, DoubletConstraints, FitResult, LorentzianModel,
};
use sideband_core::lattice::{minimum_splitting, LatticeConfig, Mode};
use sideband_core::raman::{self, Parity, RamanDrive, ThermalState};
use sideband_core::specfun::{chi, chi_quadrature};
use sideband_core::spectrum::{
    add_frequency_noise, add_noise, crossing_scan, synthesize_spectrum, DetuningGrid, Spectrum, SpectrumOptions,
};
use sideband_core::units::*;

use crate::config::{params, Flag, List};
use crate::failure::Failure;
use crate::output::{num, read_columns, Output};

/// What a handler reports back for the terminal.
pub type Summary = Vec<(String, String)>;

fn line(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    OneD,
    TwoDHalfway,
}

impl Flag for Selection {
    type Arg = Selection;
}

pub fn lattice(phi_mrad: f64, f1_khz: f64, f2_khz: f64) -> Result<LatticeConfig, Failure> {
    Ok(LatticeConfig::from_frequencies(
        wave_number(LAMBDA_1064),
        wave_number(LAMBDA_772),
        mrad_to_rad(phi_mrad),
        khz_to_angular(f1_khz),
        khz_to_angular(f2_khz),
        MASS_RB87,
    )?)
}

fn input_path(input: &str) -> Result<&Path, Failure> {
    if input.is_empty() {
        return Err(Failure::config("an input CSV is required (--input)"));
    }
    Ok(Path::new(input))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Fit parameters in boundary units. `scale` maps a library parameter name
/// to its reported name and unit factor.
fn fit_json(fit: &FitResult, scale: impl Fn(&str) -> (String, f64)) -> Value {
    let params: Vec<Value> = fit
        .names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let (name, k) = scale(n);
            json!({
                "name": name,
                "value": fit.params[i] * k,
                "stderr": fit.stderr[i] * k,
                "fixed": fit.fixed[i],
            })
        })
        .collect();
    json!({
        "params": params,
        "residual_norm": fit.residual_norm,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "n_data": fit.n_data,
        "warnings": fit.warnings,
    })
}

fn fit_summary(fit: &FitResult, scale: impl Fn(&str) -> (String, f64)) -> Summary {
    let mut out: Summary = fit
        .names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let (name, k) = scale(n);
            line(&name, format!("{} ± {}", fit.params[i] * k, fit.stderr[i] * k))
        })
        .collect();
    out.push(line("converged", fit.converged));
    if !fit.warnings.is_empty() {
        out.push(line("warnings", format!("{:?}", fit.warnings)));
    }
    out
}

// ---------------------------------------------------------------- eigen

params! {
    EigenConfig / EigenArgs {
        /// Nonorthogonality angle (mrad)
        phi_mrad: f64 = 16.0,
        /// Trap frequency of the 1064-nm wave alone (kHz)
        f1_khz: f64 = 528.0,
        /// Trap frequency of the cavity wave alone (kHz)
        f2_khz: f64 = 528.0,
    }
}

pub fn eigen(cfg: &EigenConfig, out: &Output) -> Result<Summary, Failure> {
    let lat = lattice(cfg.phi_mrad, cfg.f1_khz, cfg.f2_khz)?;
    let eig = lat.eigensystem()?;
    let eta_p = raman::mode_lamb_dicke(&lat, Mode::Plus)?;
    let eta_m = raman::mode_lamb_dicke(&lat, Mode::Minus)?;
    let min = minimum_splitting(lat.omega1(), lat.phi);
    let header = [
        "f_plus_khz",
        "f_minus_khz",
        "splitting_khz",
        "beta_deg",
        "proj_plus",
        "proj_minus",
        "eta_plus",
        "eta_minus",
        "min_splitting_khz",
    ];
    let row = vec![
        angular_to_khz(eig.omega_plus),
        angular_to_khz(eig.omega_minus),
        angular_to_khz(eig.splitting()),
        eig.beta.to_degrees(),
        eig.proj_plus,
        eig.proj_minus,
        eta_p,
        eta_m,
        angular_to_khz(min.exact),
    ];
    out.write_csv(&header, &[row.iter().map(|&v| num(v)).collect()])?;
    let results: serde_json::Map<String, Value> = header.iter().zip(&row).map(|(k, v)| (k.to_string(), json!(v))).collect();
    out.write_sidecar("eigen", cfg, None, &header, Value::Object(results))?;
    Ok(header.iter().zip(&row).map(|(k, v)| line(k, v)).collect())
}

// -------------------------------------------------------- scan-crossing

params! {
    ScanConfig / ScanArgs {
        phi_mrad: f64 = 16.0,
        f1_khz: f64 = 528.0,
        /// Cavity power at which ω₂ = ω₁ (µW)
        p0_uw: f64 = 9.5,
        /// Power scale of the sideband pulse area (µW)
        p1_uw: f64 = 0.9,
        /// Probe pulse duration (µs)
        t_us: f64 = 300.0,
        p_min_uw: f64 = 2.0,
        p_max_uw: f64 = 20.0,
        n_points: usize = 37,
        /// Explicit power list (µW); overrides the range
        powers_uw: Option<List> = None,
        /// Gaussian noise on both frequency branches (kHz)
        noise_khz: f64 = 0.0,
        seed: u64 = 0,
    }
}

pub fn scan_crossing(cfg: &ScanConfig, out: &Output) -> Result<Summary, Failure> {
    let base = lattice(cfg.phi_mrad, cfg.f1_khz, cfg.f1_khz)?;
    let powers = match &cfg.powers_uw {
        Some(List(p)) => p.clone(),
        None => linspace(cfg.p_min_uw, cfg.p_max_uw, cfg.n_points),
    };
    if powers.is_empty() {
        return Err(Failure::config("no scan powers"));
    }
    let scan = crossing_scan(&base, &powers, cfg.p0_uw, cfg.p1_uw, us_to_s(cfg.t_us))?;
    let scan = add_frequency_noise(&scan, cfg.noise_khz * 1e3, cfg.seed)?;
    let header = [
        "p_z_uw",
        "f_plus_khz",
        "f_minus_khz",
        "area_plus_khz",
        "area_minus_khz",
        "theta_plus",
        "theta_minus",
    ];
    let rows: Vec<Vec<String>> = (0..powers.len())
        .map(|i| {
            [
                scan.powers[i],
                scan.frequencies_plus[i] * 1e-3,
                scan.frequencies_minus[i] * 1e-3,
                scan.areas_plus[i] * 1e-3,
                scan.areas_minus[i] * 1e-3,
                scan.theta_plus[i],
                scan.theta_minus[i],
            ]
            .map(num)
            .to_vec()
        })
        .collect();
    out.write_csv(&header, &rows)?;
    let min_split = scan
        .frequencies_plus
        .iter()
        .zip(&scan.frequencies_minus)
        .map(|(p, m)| p - m)
        .fold(f64::INFINITY, f64::min);
    out.write_sidecar(
        "scan-crossing",
        cfg,
        Some(cfg.seed),
        &header,
        json!({ "points": powers.len(), "min_splitting_khz": min_split * 1e-3 }),
    )?;
    Ok(vec![line("points", powers.len()), line("min_splitting_khz", min_split * 1e-3)])
}

// ------------------------------------------------------- synth-spectrum

params! {
    SynthConfig / SynthArgs {
        phi_mrad: f64 = 16.0,
        f1_khz: f64 = 528.0,
        f2_khz: f64 = 430.0,
        /// Two-photon Rabi frequency ω₀/2π (kHz)
        omega0_khz: f64 = 5.0,
        /// Probe pulse duration (µs)
        t_us: f64 = 300.0,
        nbar_plus: f64 = 3.3,
        nbar_minus: f64 = 3.3,
        /// Common temperature (µK); overrides both n̄
        temperature_uk: Option<f64> = None,
        background: f64 = sideband_core::spectrum::DEFAULT_BACKGROUND,
        line_shift_khz: f64 = 0.0,
        start_khz: f64 = -600.0,
        stop_khz: f64 = 600.0,
        step_khz: f64 = 1.0,
    }
}

fn write_spectrum(out: &Output, s: &Spectrum) -> Result<(), Failure> {
    let rows: Vec<Vec<String>> = s
        .detunings
        .iter()
        .zip(&s.transfer)
        .map(|(&d, &p)| vec![num(d * 1e-3), num(p)])
        .collect();
    out.write_csv(&["detuning_khz", "transfer"], &rows)?;
    Ok(())
}

fn read_spectrum(path: &Path) -> Result<Spectrum, Failure> {
    let cols = read_columns(path, &["detuning_khz", "transfer"])?;
    let det = cols[0].iter().map(|d| d * 1e3).collect();
    Ok(Spectrum::from_points(det, cols[1].clone())?)
}

pub fn synth_spectrum(cfg: &SynthConfig, out: &Output) -> Result<Summary, Failure> {
    let lat = lattice(cfg.phi_mrad, cfg.f1_khz, cfg.f2_khz)?;
    let eig = lat.eigensystem()?;
    let thermal = |omega: f64, nbar: f64| match cfg.temperature_uk {
        Some(t) => ThermalState::from_temperature(omega, uk_to_k(t)),
        None => ThermalState::from_nbar(omega, nbar),
    };
    let states = [thermal(eig.omega_plus, cfg.nbar_plus)?, thermal(eig.omega_minus, cfg.nbar_minus)?];
    let drive = RamanDrive::new(khz_to_angular(cfg.omega0_khz), us_to_s(cfg.t_us), 0.0, Parity::Node)?;
    let grid = DetuningGrid::new(cfg.start_khz * 1e3, cfg.stop_khz * 1e3, cfg.step_khz * 1e3)?;
    let options = SpectrumOptions {
        background: cfg.background,
        line_shift: khz_to_angular(cfg.line_shift_khz),
    };
    let s = synthesize_spectrum(&lat, &drive, states, &grid, &options)?;
    write_spectrum(out, &s)?;
    let meta = s.metadata.as_ref().expect("synthesized spectra carry metadata");
    let results = json!({
        "points": s.len(),
        "f_plus_khz": meta.freq_plus_hz * 1e-3,
        "f_minus_khz": meta.freq_minus_hz * 1e-3,
        "eta_plus": meta.eta_plus,
        "eta_minus": meta.eta_minus,
        "nbar_plus": raman::nbar_from_q(states[0].q),
        "nbar_minus": raman::nbar_from_q(states[1].q),
    });
    out.write_sidecar("synth-spectrum", cfg, None, &["detuning_khz", "transfer"], results)?;
    Ok(vec![
        line("points", s.len()),
        line("f_plus_khz", meta.freq_plus_hz * 1e-3),
        line("f_minus_khz", meta.freq_minus_hz * 1e-3),
    ])
}

// ------------------------------------------------------------ add-noise

params! {
    NoiseConfig / NoiseArgs {
        /// Spectrum CSV with detuning_khz, transfer
        input: String = String::new(),
        /// Standard deviation of the added noise (transfer probability)
        sigma: f64 = 0.01,
        seed: u64 = 0,
    }
}

pub fn add_noise_cmd(cfg: &NoiseConfig, out: &Output) -> Result<Summary, Failure> {
    let s = read_spectrum(input_path(&cfg.input)?)?;
    let noisy = add_noise(&s, cfg.sigma, cfg.seed)?;
    write_spectrum(out, &noisy)?;
    out.write_sidecar(
        "add-noise",
        cfg,
        Some(cfg.seed),
        &["detuning_khz", "transfer"],
        json!({ "points": noisy.len(), "clipped": noisy.clipped }),
    )?;
    Ok(vec![line("points", noisy.len()), line("clipped", noisy.clipped)])
}

// --------------------------------------------------------- fit-spectrum

params! {
    FitSpectrumConfig / FitSpectrumArgs {
        input: String = String::new(),
        /// Number of Lorentzians (1 or 2)
        n_peaks: usize = 2,
        window_lo_khz: Option<f64> = None,
        window_hi_khz: Option<f64> = None,
        /// Fixed offset instead of a fitted one
        offset: Option<f64> = None,
        /// Fixed common FWHM (kHz)
        fwhm_khz: Option<f64> = None,
        /// Initial centers (kHz); replaces peak picking
        centers_khz: Option<List> = None,
        /// Also integrate the raw data minus the offset over the fit window
        raw_area: bool = false,
    }
}

fn lorentz_units(n: &str) -> (String, f64) {
    if n == "offset" {
        (n.to_string(), 1.0)
    } else {
        (format!("{n}_khz"), 1e-3)
    }
}

pub fn fit_spectrum(cfg: &FitSpectrumConfig, out: &Output) -> Result<Summary, Failure> {
    let s = read_spectrum(input_path(&cfg.input)?)?;
    let window = match (cfg.window_lo_khz, cfg.window_hi_khz) {
        (Some(lo), Some(hi)) => Some((lo * 1e3, hi * 1e3)),
        (None, None) => None,
        _ => return Err(Failure::config("give both window_lo_khz and window_hi_khz or neither")),
    };
    let constraints = DoubletConstraints {
        offset: cfg.offset,
        fwhm: cfg.fwhm_khz.map(|w| w * 1e3),
        window,
        centers: cfg.centers_khz.as_ref().map(|c| c.0.iter().map(|x| x * 1e3).collect()),
    };
    let fit = fit_lorentzian_doublet(&s, cfg.n_peaks, &constraints)?;
    let model = LorentzianModel::from_fit(&fit);
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let rows: Vec<Vec<String>> = s
        .detunings
        .iter()
        .zip(&s.transfer)
        .filter(|(d, _)| (lo..=hi).contains(*d))
        .map(|(&d, &y)| {
            let m = model.eval(d);
            vec![num(d * 1e-3), num(y), num(m), num(y - m)]
        })
        .collect();
    let header = ["detuning_khz", "transfer", "model", "residual"];
    out.write_csv(&header, &rows)?;
    let mut results = fit_json(&fit, lorentz_units);
    let mut summary = fit_summary(&fit, lorentz_units);
    let total: f64 = model.peaks.iter().map(|p| p.area).sum();
    results["total_area_khz"] = json!(total * 1e-3);
    summary.push(line("total_area_khz", total * 1e-3));
    if cfg.raw_area {
        let win = window.unwrap_or((s.detunings[0], *s.detunings.last().unwrap()));
        let raw = extract_area_raw(&s, win, model.offset)?;
        results["raw_area_khz"] = json!(raw * 1e-3);
        summary.push(line("raw_area_khz", raw * 1e-3));
    }
    out.write_sidecar("fit-spectrum", cfg, None, &header, results)?;
    Ok(summary)
}

// --------------------------------------------------------- fit-crossing

params! {
    FitCrossingConfig / FitCrossingArgs {
        /// Scan CSV with p_z_uw, f_plus_khz, f_minus_khz
        input: String = String::new(),
        guess_phi_mrad: Option<f64> = None,
        guess_f1_khz: Option<f64> = None,
        guess_p0_uw: Option<f64> = None,
    }
}

fn crossing_units(n: &str) -> (String, f64) {
    match n {
        "phi" => ("phi_mrad".into(), 1e3),
        "f1" => ("f1_khz".into(), 1e-3),
        "p0" => ("p0_uw".into(), 1.0),
        other => (other.into(), 1.0),
    }
}

pub fn fit_crossing(cfg: &FitCrossingConfig, out: &Output) -> Result<Summary, Failure> {
    let cols = read_columns(input_path(&cfg.input)?, &["p_z_uw", "f_plus_khz", "f_minus_khz"])?;
    let points: Vec<CrossingPoint> = (0..cols[0].len())
        .map(|i| CrossingPoint {
            power: cols[0][i],
            freq_plus: cols[1][i] * 1e3,
            freq_minus: cols[2][i] * 1e3,
        })
        .collect();
    let guess = match (cfg.guess_phi_mrad, cfg.guess_f1_khz, cfg.guess_p0_uw) {
        (Some(phi), Some(f1), Some(p0)) => Some(CrossingGuess {
            phi: mrad_to_rad(phi),
            f1: f1 * 1e3,
            p0,
        }),
        (None, None, None) => None,
        _ => return Err(Failure::config("give all three guesses or none")),
    };
    let fit = fit_avoided_crossing(&points, guess)?;
    let (phi, f1, p0) = (fit.value("phi"), fit.value("f1"), fit.value("p0"));
    let header = ["p_z_uw", "f_plus_khz", "f_minus_khz", "model_plus_khz", "model_minus_khz"];
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            let (mp, mm) = sideband_core::fit::crossing_model(phi, f1, p0, p.power);
            [p.power, p.freq_plus * 1e-3, p.freq_minus * 1e-3, mp * 1e-3, mm * 1e-3]
                .map(num)
                .to_vec()
        })
        .collect();
    out.write_csv(&header, &rows)?;
    out.write_sidecar("fit-crossing", cfg, None, &header, fit_json(&fit, crossing_units))?;
    Ok(fit_summary(&fit, crossing_units))
}

// ------------------------------------------------------------ fit-areas

params! {
    FitAreasConfig / FitAreasArgs {
        /// Scan CSV with p_z_uw, area_plus_khz, area_minus_khz
        input: String = String::new(),
        /// Probe pulse duration (µs)
        t_us: f64 = 300.0,
    }
}

fn area_units(n: &str) -> (String, f64) {
    match n {
        "phi" => ("phi_mrad".into(), 1e3),
        "p0" => ("p0_uw".into(), 1.0),
        "p1" => ("p1_uw".into(), 1.0),
        other => (other.into(), 1.0),
    }
}

pub fn fit_areas(cfg: &FitAreasConfig, out: &Output) -> Result<Summary, Failure> {
    let cols = read_columns(input_path(&cfg.input)?, &["p_z_uw", "area_plus_khz", "area_minus_khz"])?;
    let points: Vec<AreaPoint> = (0..cols[0].len())
        .map(|i| AreaPoint {
            power: cols[0][i],
            area_plus: cols[1][i] * 1e3,
            area_minus: cols[2][i] * 1e3,
        })
        .collect();
    let t = us_to_s(cfg.t_us);
    let fit = fit_area_model(&points, t)?;
    let (phi, p0, p1) = (fit.value("phi"), fit.value("p0"), fit.value("p1"));
    let header = ["p_z_uw", "area_plus_khz", "area_minus_khz", "model_plus_khz", "model_minus_khz"];
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| -> Result<Vec<String>, Failure> {
            let (mp, mm) = sideband_core::fit::area_model(phi, p0, p1, t, p.power)?;
            Ok([p.power, p.area_plus * 1e-3, p.area_minus * 1e-3, mp * 1e-3, mm * 1e-3]
                .map(num)
                .to_vec())
        })
        .collect::<Result<_, _>>()?;
    out.write_csv(&header, &rows)?;
    out.write_sidecar("fit-areas", cfg, None, &header, fit_json(&fit, area_units))?;
    Ok(fit_summary(&fit, area_units))
}

// ----------------------------------------------------------- thermometry

params! {
    ThermometryConfig / ThermometryArgs {
        /// Red-sideband area (kHz)
        a_red_khz: Option<f64> = None,
        /// Blue-sideband area (kHz)
        a_blue_khz: Option<f64> = None,
        /// Forward mode: temperature for this mean excitation
        nbar: Option<f64> = None,
        /// Mode frequency (kHz)
        freq_khz: f64 = 430.0,
        /// Lamb-Dicke parameter, to also report ω₀ from the areas
        eta: Option<f64> = None,
        /// Probe pulse duration (µs), used with eta
        t_us: Option<f64> = None,
    }
}

pub fn thermometry(cfg: &ThermometryConfig, out: &Output) -> Result<Summary, Failure> {
    let omega = khz_to_angular(cfg.freq_khz);
    let (q, nbar, temperature) = match (cfg.nbar, cfg.a_red_khz, cfg.a_blue_khz) {
        (Some(n), None, None) => {
            let s = ThermalState::from_nbar(omega, n)?;
            (s.q, n, s.temperature)
        }
        (None, Some(red), Some(blue)) => {
            let th = raman::thermometry_invert(red, blue, omega)?;
            (th.q, th.nbar, th.temperature)
        }
        _ => return Err(Failure::config("give either nbar, or both a_red_khz and a_blue_khz")),
    };
    let mut header = vec!["q", "nbar", "temperature_uk"];
    let mut row = vec![q, nbar, k_to_uk(temperature)];
    if let (Some(eta), Some(t), Some(red), Some(blue)) = (cfg.eta, cfg.t_us, cfg.a_red_khz, cfg.a_blue_khz) {
        let w0 = raman::extract_omega0(khz_to_angular(red), khz_to_angular(blue), eta, us_to_s(t))?;
        header.push("omega0_khz");
        row.push(angular_to_khz(w0));
    }
    out.write_csv(&header, &[row.iter().map(|&v| num(v)).collect()])?;
    let results: serde_json::Map<String, Value> = header.iter().zip(&row).map(|(k, v)| (k.to_string(), json!(v))).collect();
    out.write_sidecar("thermometry", cfg, None, &header, Value::Object(results))?;
    Ok(header.iter().zip(&row).map(|(k, v)| line(k, v)).collect())
}

// ------------------------------------------------------------------ cool

params! {
    CoolConfig / CoolArgs {
        #[arg(value_enum)]
        mode: Selection = Selection::OneD,
        phi_mrad: f64 = 16.0,
        f1_khz: f64 = 528.0,
        f2_khz: f64 = 430.0,
        nbar_plus: f64 = 3.3,
        nbar_minus: f64 = 3.3,
        t_raman_us: f64 = 5.5,
        t_repump_us: f64 = 9.5,
        cycle_us: f64 = 15.0,
        cycles: u32 = 21,
        /// Two-photon Rabi frequency during cooling (kHz)
        omega0_khz: f64 = 300.0,
        /// Drive detuning (kHz) for one-d; defaults to the red sideband of
        /// the mode with the larger projection on the cavity axis
        detuning_khz: Option<f64> = None,
        /// Heating probability per mode and repump; defaults to 2η²
        heating: Option<f64> = None,
        ensemble: u32 = 10_000,
        seed: u64 = 0,
    }
}

pub fn cool(cfg: &CoolConfig, out: &Output) -> Result<Summary, Failure> {
    let lat = lattice(cfg.phi_mrad, cfg.f1_khz, cfg.f2_khz)?;
    let eig = lat.eigensystem()?;
    let protocol = CoolingProtocol {
        t_raman: us_to_s(cfg.t_raman_us),
        t_repump: us_to_s(cfg.t_repump_us),
        cycle_period: us_to_s(cfg.cycle_us),
        n_cycles: cfg.cycles,
        omega0: khz_to_angular(cfg.omega0_khz),
        delta_omega: cfg.detuning_khz.map(khz_to_angular),
        recoil_heating_prob: cfg.heating,
        ensemble_size: cfg.ensemble,
        seed: cfg.seed,
    };
    let selection = match cfg.mode {
        Selection::OneD => ModeSelection::OneD,
        Selection::TwoDHalfway => ModeSelection::TwoDHalfway,
    };
    let initial = [
        ThermalState::from_nbar(eig.omega_plus, cfg.nbar_plus)?,
        ThermalState::from_nbar(eig.omega_minus, cfg.nbar_minus)?,
    ];
    let traj = simulate_cooling(&protocol, &lat, initial, selection)?;
    let header = ["cycle", "nbar_plus", "nbar_minus", "ground_fraction"];
    let rows: Vec<Vec<String>> = (0..traj.nbar_plus.len())
        .map(|i| {
            vec![
                i.to_string(),
                num(traj.nbar_plus[i]),
                num(traj.nbar_minus[i]),
                num(traj.ground_fraction[i]),
            ]
        })
        .collect();
    out.write_csv(&header, &rows)?;
    let [np, nm] = traj.final_nbar();
    let ctx = &traj.context;
    let results = json!({
        "final_nbar_plus": np,
        "final_nbar_minus": nm,
        "final_ground_fraction": traj.ground_fraction.last(),
        "detuning_khz": angular_to_khz(ctx.delta_omega),
        "eta": ctx.eta,
        "heating_prob": ctx.heating_prob,
    });
    out.write_sidecar("cool", cfg, Some(cfg.seed), &header, results)?;
    Ok(vec![line("final_nbar_plus", np), line("final_nbar_minus", nm)])
}

// ------------------------------------------------------------- chi-table

params! {
    ChiConfig / ChiArgs {
        theta_min: f64 = 1e-3,
        theta_max: f64 = 30.0,
        n_points: usize = 200,
        /// Logarithmic spacing
        log: bool = true,
        /// Add a column from the quadrature evaluation
        quadrature: bool = false,
    }
}

pub fn chi_grid(cfg: &ChiConfig) -> Result<Vec<f64>, Failure> {
    if !(cfg.theta_min > 0.0 && cfg.theta_max > cfg.theta_min && cfg.n_points >= 2) {
        return Err(Failure::config("need 0 < theta_min < theta_max and n_points ≥ 2"));
    }
    Ok(if cfg.log {
        linspace(cfg.theta_min.ln(), cfg.theta_max.ln(), cfg.n_points)
            .into_iter()
            .map(f64::exp)
            .collect()
    } else {
        linspace(cfg.theta_min, cfg.theta_max, cfg.n_points)
    })
}

pub fn chi_table(cfg: &ChiConfig, out: &Output) -> Result<Summary, Failure> {
    let thetas = chi_grid(cfg)?;
    let values: Vec<f64> = thetas.iter().map(|&t| chi(t)).collect();
    let increasing = thetas.windows(2).all(|w| w[1] > w[0]);
    let first_rise = (1..values.len()).find(|&i| values[i] > values[i - 1]).map(|i| thetas[i - 1]);
    let mut header = vec!["theta", "chi"];
    let mut max_dev = None;
    let rows: Vec<Vec<String>> = if cfg.quadrature {
        header.push("chi_quadrature");
        let quad: Vec<f64> = thetas.iter().map(|&t| chi_quadrature(t)).collect::<Result<_, _>>()?;
        max_dev = Some(values.iter().zip(&quad).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        (0..thetas.len())
            .map(|i| vec![num(thetas[i]), num(values[i]), num(quad[i])])
            .collect()
    } else {
        (0..thetas.len()).map(|i| vec![num(thetas[i]), num(values[i])]).collect()
    };
    out.write_csv(&header, &rows)?;
    out.write_sidecar(
        "chi-table",
        cfg,
        None,
        &header,
        json!({
            "theta_increasing": increasing,
            "chi_monotone_decreasing": first_rise.is_none(),
            "chi_first_rise_theta": first_rise,
            "max_quadrature_deviation": max_dev,
        }),
    )?;
    let mut summary = vec![line("points", thetas.len()), line("theta_increasing", increasing)];
    if let Some(t) = first_rise {
        summary.push(line("chi_first_rise_theta", t));
    }
    if let Some(d) = max_dev {
        summary.push(line("max_quadrature_deviation", d));
    }
    Ok(summary)
}

/// Default output directory: `$SIDEBAND_OUT_DIR` or the working directory.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os("SIDEBAND_OUT_DIR").map_or_else(|| PathBuf::from("."), PathBuf::from)
}
