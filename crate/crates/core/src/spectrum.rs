//! Synthetic Raman spectra and crossing scans.
//!
//! A spectrum is the transfer probability after one Raman pulse as a
//! function of two-photon detuning. Only the first-order sidebands of the
//! two eigenmodes are synthesized (the carrier is forbidden at a node of the
//! trapping standing wave). Each sideband is a thermal average of the exact
//! two-level lineshape; distinct sidebands are combined as independent
//! channels, `1 − Π(1 − Pᵢ)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SpectrumError;
use crate::lattice::{omega2_from_power, LatticeConfig, Mode, TrapEigensystem};
use crate::raman::{self, Parity, RamanDrive, ThermalState};
use crate::units::{angular_to_hz, hz_to_angular};

pub const DEFAULT_BACKGROUND: f64 = 0.06;
pub const DEFAULT_SPAN_HZ: f64 = 600e3;
pub const DEFAULT_STEP_HZ: f64 = 1e3;
pub const INSET_STEP_HZ: f64 = 200.0;
/// Noisy transfer values are clipped to this range.
pub const NOISE_CLIP: (f64, f64) = (-0.05, 1.05);

/// Uniform grid of Δω/2π values (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetuningGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for DetuningGrid {
    fn default() -> Self {
        Self {
            start: -DEFAULT_SPAN_HZ,
            stop: DEFAULT_SPAN_HZ,
            step: DEFAULT_STEP_HZ,
        }
    }
}

impl DetuningGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self, SpectrumError> {
        let grid = Self { start, stop, step };
        grid.validate()?;
        Ok(grid)
    }

    /// Fine grid of half-width `half_width` around `center` (Hz).
    pub fn inset(center: f64, half_width: f64) -> Result<Self, SpectrumError> {
        Self::new(center - half_width, center + half_width, INSET_STEP_HZ)
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if ![self.start, self.stop, self.step].iter().all(|v| v.is_finite()) {
            return Err(SpectrumError::InvalidGrid("non-finite bound or step".into()));
        }
        if !(self.step > 0.0) {
            return Err(SpectrumError::InvalidGrid(format!("step must be positive, got {}", self.step)));
        }
        if self.stop < self.start {
            return Err(SpectrumError::InvalidGrid(format!(
                "stop {} below start {}",
                self.stop, self.start
            )));
        }
        if self.len() > 50_000_000 {
            return Err(SpectrumError::InvalidGrid("grid too large".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Spectrum-level knobs that are not part of the physics model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Constant offset added to the transfer probability.
    pub background: f64,
    /// Common shift of all lines (rad/s).
    pub line_shift: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            background: DEFAULT_BACKGROUND,
            line_shift: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidebandKind {
    /// Δn = +1
    Blue,
    /// Δn = −1
    Red,
}

/// One first-order sideband of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandChannel {
    pub mode: Mode,
    pub kind: SidebandKind,
    /// Line center (rad/s).
    pub center: f64,
    pub eta: f64,
}

impl SidebandChannel {
    /// Thermally averaged transfer probability at detuning `delta` (rad/s).
    pub fn probability(&self, drive: &RamanDrive, populations: &[f64], delta: f64) -> f64 {
        let detuning = delta - self.center;
        let coupling = drive.omega0 * self.eta;
        populations
            .iter()
            .enumerate()
            .map(|(n, p)| {
                let n = n as f64;
                let ladder = match self.kind {
                    SidebandKind::Blue => (n + 1.0).sqrt(),
                    SidebandKind::Red => n.sqrt(),
                };
                p * raman::rabi_transfer_probability(coupling * ladder, detuning, drive.t_pulse)
            })
            .sum()
    }
}

/// Snapshot of everything that produced a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMetadata {
    pub lattice: LatticeConfig,
    /// ω±/2π (Hz).
    pub freq_plus_hz: f64,
    pub freq_minus_hz: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub drive: RamanDrive,
    pub thermal_plus: ThermalState,
    pub thermal_minus: ThermalState,
    pub options: SpectrumOptions,
    pub noise_sigma: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Δω/2π (Hz), strictly increasing.
    pub detunings: Vec<f64>,
    pub transfer: Vec<f64>,
    pub metadata: Option<SpectrumMetadata>,
    /// Set when noise pushed any value outside [`NOISE_CLIP`].
    pub clipped: bool,
}

impl Spectrum {
    /// A bare spectrum, e.g. loaded from measured data.
    pub fn from_points(detunings: Vec<f64>, transfer: Vec<f64>) -> Result<Self, SpectrumError> {
        let s = Self {
            detunings,
            transfer,
            metadata: None,
            clipped: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if self.detunings.len() != self.transfer.len() {
            return Err(SpectrumError::InvalidSpectrum(format!(
                "{} detunings but {} transfer values",
                self.detunings.len(),
                self.transfer.len()
            )));
        }
        if self.detunings.is_empty() {
            return Err(SpectrumError::InvalidSpectrum("empty spectrum".into()));
        }
        if self.detunings.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SpectrumError::InvalidSpectrum("detunings must be strictly increasing".into()));
        }
        if self.transfer.iter().chain(&self.detunings).any(|v| !v.is_finite()) {
            return Err(SpectrumError::InvalidSpectrum("non-finite value".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    /// Trapezoid integral of `transfer − offset` over detunings in [lo, hi] (Hz).
    pub fn area_between(&self, lo: f64, hi: f64, offset: f64) -> f64 {
        self.detunings
            .windows(2)
            .zip(self.transfer.windows(2))
            .filter(|(d, _)| d[0] >= lo && d[1] <= hi)
            .map(|(d, p)| 0.5 * (p[0] + p[1] - 2.0 * offset) * (d[1] - d[0]))
            .sum()
    }
}

/// Line positions ω₊Δn₊ + ω₋Δn₋ (rad/s) for each order pair.
pub fn resonance_positions(eig: &TrapEigensystem, orders: &[(i32, i32)]) -> Vec<f64> {
    orders
        .iter()
        .map(|&(dp, dm)| eig.omega_plus * dp as f64 + eig.omega_minus * dm as f64)
        .collect()
}

/// The four first-order channels of a lattice, shifted by `line_shift`.
pub fn sideband_channels(cfg: &LatticeConfig, line_shift: f64) -> Result<Vec<SidebandChannel>, SpectrumError> {
    let eig = cfg.eigensystem()?;
    let mut out = Vec::with_capacity(4);
    for mode in Mode::BOTH {
        let omega = eig.omega(mode);
        let eta = if omega > 0.0 {
            raman::lamb_dicke(eig.projection(mode), omega, cfg.k2, cfg.mass)?
        } else {
            0.0
        };
        out.push(SidebandChannel {
            mode,
            kind: SidebandKind::Blue,
            center: omega + line_shift,
            eta,
        });
        out.push(SidebandChannel {
            mode,
            kind: SidebandKind::Red,
            center: -omega + line_shift,
            eta,
        });
    }
    Ok(out)
}

/// Transfer probability over `grid`. `thermal` holds the (+, −) mode states;
/// only their Boltzmann factors enter.
pub fn synthesize_spectrum(
    cfg: &LatticeConfig,
    drive: &RamanDrive,
    thermal: [ThermalState; 2],
    grid: &DetuningGrid,
    options: &SpectrumOptions,
) -> Result<Spectrum, SpectrumError> {
    cfg.validate()?;
    drive.validate()?;
    grid.validate()?;
    if drive.geometry != Parity::Node {
        return Err(SpectrumError::InvalidSpectrum(
            "first-order sidebands are forbidden at an antinode; only node geometry is synthesized".into(),
        ));
    }
    for (state, mode) in thermal.iter().zip(Mode::BOTH) {
        if !(0.0..1.0).contains(&state.q) {
            return Err(SpectrumError::InvalidThermal(format!(
                "{} mode: q = {} outside [0, 1)",
                mode.label(),
                state.q
            )));
        }
    }
    if !(options.background.is_finite() && options.line_shift.is_finite()) {
        return Err(SpectrumError::InvalidSpectrum("non-finite spectrum option".into()));
    }
    let eig = cfg.eigensystem()?;
    let channels = sideband_channels(cfg, options.line_shift)?;
    let pops = [thermal[0].populations(), thermal[1].populations()];
    let pops_for = |mode: Mode| match mode {
        Mode::Plus => &pops[0],
        Mode::Minus => &pops[1],
    };
    let detunings = grid.points();
    let transfer = detunings
        .par_iter()
        .map(|&f| {
            let delta = hz_to_angular(f);
            let miss: f64 = channels
                .iter()
                .map(|c| 1.0 - c.probability(drive, pops_for(c.mode), delta))
                .product();
            (1.0 - miss + options.background).clamp(0.0, 1.0)
        })
        .collect();
    let eta = |m: Mode| channels.iter().find(|c| c.mode == m).map_or(0.0, |c| c.eta);
    Ok(Spectrum {
        detunings,
        transfer,
        metadata: Some(SpectrumMetadata {
            lattice: *cfg,
            freq_plus_hz: angular_to_hz(eig.omega_plus),
            freq_minus_hz: angular_to_hz(eig.omega_minus),
            eta_plus: eta(Mode::Plus),
            eta_minus: eta(Mode::Minus),
            drive: *drive,
            thermal_plus: thermal[0],
            thermal_minus: thermal[1],
            options: *options,
            noise_sigma: None,
            seed: None,
        }),
        clipped: false,
    })
}

/// Adds i.i.d. Gaussian noise of standard deviation `sigma`, clipped to
/// [`NOISE_CLIP`]. Identical seeds give identical output.
pub fn add_noise(spectrum: &Spectrum, sigma: f64, seed: u64) -> Result<Spectrum, SpectrumError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(SpectrumError::InvalidSpectrum(format!("σ must be ≥ 0, got {sigma}")));
    }
    let mut out = spectrum.clone();
    if let Some(meta) = out.metadata.as_mut() {
        meta.noise_sigma = Some(sigma);
        meta.seed = Some(seed);
    }
    if sigma == 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| SpectrumError::InvalidSpectrum(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = NOISE_CLIP;
    for v in &mut out.transfer {
        let noisy = *v + normal.sample(&mut rng);
        if !(lo..=hi).contains(&noisy) {
            out.clipped = true;
        }
        *v = noisy.clamp(lo, hi);
    }
    Ok(out)
}

/// Eigenfrequencies and blue-sideband areas across a cavity-power scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingScan {
    /// Cavity powers P_z, in whatever unit P₀ and P₁ were given.
    pub powers: Vec<f64>,
    /// ω±/2π (Hz).
    pub frequencies_plus: Vec<f64>,
    pub frequencies_minus: Vec<f64>,
    /// Zero-temperature blue-sideband areas A₁₀±/2π (Hz).
    pub areas_plus: Vec<f64>,
    pub areas_minus: Vec<f64>,
    pub theta_plus: Vec<f64>,
    pub theta_minus: Vec<f64>,
}

/// Tunes κ₂ through ω₂ = ω₁√(P_z/P₀) and evaluates both branches at each power.
pub fn crossing_scan(
    base: &LatticeConfig,
    powers: &[f64],
    p0: f64,
    p1: f64,
    t: f64,
) -> Result<CrossingScan, SpectrumError> {
    base.validate()?;
    if !(t > 0.0) {
        return Err(SpectrumError::InvalidSpectrum(format!("pulse duration must be positive, got {t}")));
    }
    if let Some(bad) = powers.iter().find(|p| !(**p > 0.0)) {
        return Err(SpectrumError::InvalidSpectrum(format!("powers must be positive, got {bad}")));
    }
    let omega1 = base.omega1();
    let rows: Vec<[f64; 6]> = powers
        .par_iter()
        .map(|&p_z| -> Result<[f64; 6], SpectrumError> {
            let omega2 = omega2_from_power(p_z, p0, omega1)?;
            let cfg = base.with_kappa2(base.mass * omega2 * omega2);
            let eig = cfg.eigensystem()?;
            let th_p = raman::pulse_area_sideband(&cfg, p_z, p1, Mode::Plus)?;
            let th_m = raman::pulse_area_sideband(&cfg, p_z, p1, Mode::Minus)?;
            Ok([
                angular_to_hz(eig.omega_plus),
                angular_to_hz(eig.omega_minus),
                angular_to_hz(raman::sideband_area(th_p, t)),
                angular_to_hz(raman::sideband_area(th_m, t)),
                th_p,
                th_m,
            ])
        })
        .collect::<Result<_, _>>()?;
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    Ok(CrossingScan {
        powers: powers.to_vec(),
        frequencies_plus: col(0),
        frequencies_minus: col(1),
        areas_plus: col(2),
        areas_minus: col(3),
        theta_plus: col(4),
        theta_minus: col(5),
    })
}

/// Adds i.i.d. Gaussian noise of standard deviation `sigma_hz` to both
/// frequency branches of a scan. Areas are left untouched.
pub fn add_frequency_noise(scan: &CrossingScan, sigma_hz: f64, seed: u64) -> Result<CrossingScan, SpectrumError> {
    if !(sigma_hz >= 0.0 && sigma_hz.is_finite()) {
        return Err(SpectrumError::InvalidSpectrum(format!("σ must be ≥ 0, got {sigma_hz}")));
    }
    let mut out = scan.clone();
    if sigma_hz == 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, sigma_hz).map_err(|e| SpectrumError::InvalidSpectrum(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (p, m) in out.frequencies_plus.iter_mut().zip(out.frequencies_minus.iter_mut()) {
        *p += normal.sample(&mut rng);
        *m += normal.sample(&mut rng);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{khz_to_angular, wave_number, LAMBDA_1064, LAMBDA_772, MASS_RB87};
    use proptest::prelude::*;

    fn lattice(f1: f64, f2: f64, phi: f64) -> LatticeConfig {
        LatticeConfig::from_frequencies(
            wave_number(LAMBDA_1064),
            wave_number(LAMBDA_772),
            phi,
            khz_to_angular(f1),
            khz_to_angular(f2),
            MASS_RB87,
        )
        .unwrap()
    }

    fn drive(f0_khz: f64, t: f64) -> RamanDrive {
        RamanDrive::new(khz_to_angular(f0_khz), t, 0.0, Parity::Node).unwrap()
    }

    fn thermal_pair(cfg: &LatticeConfig, nbar: [f64; 2]) -> [ThermalState; 2] {
        let eig = cfg.eigensystem().unwrap();
        [
            ThermalState::from_nbar(eig.omega_plus, nbar[0]).unwrap(),
            ThermalState::from_nbar(eig.omega_minus, nbar[1]).unwrap(),
        ]
    }

    fn no_background() -> SpectrumOptions {
        SpectrumOptions {
            background: 0.0,
            line_shift: 0.0,
        }
    }

    #[test]
    fn grid_points() {
        let g = DetuningGrid::default();
        assert_eq!(g.len(), 1201);
        let p = g.points();
        assert_eq!(p[0], -600e3);
        assert!((p[1200] - 600e3).abs() < 1e-6);
        assert!(DetuningGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(DetuningGrid::new(1.0, 0.0, 0.1).is_err());
        assert_eq!(DetuningGrid::inset(0.0, 1e3).unwrap().len(), 11);
    }

    #[test]
    fn resonance_position_examples() {
        let eig = lattice(530.0, 430.0, 0.022).eigensystem().unwrap();
        let pos = resonance_positions(&eig, &[(0, 0), (0, 1), (0, -1)]);
        assert_eq!(pos[0], 0.0);
        assert!((angular_to_hz(pos[1]) * 1e-3 - 430.0).abs() < 1.0);
        assert!((angular_to_hz(pos[2]) * 1e-3 + 430.0).abs() < 1.0);

        let eig = lattice(435.0, 435.0, 0.022).eigensystem().unwrap();
        let pos = resonance_positions(&eig, &[(1, 0), (0, 1)]);
        let split = angular_to_hz(pos[0] - pos[1]) * 1e-3;
        assert!((split - 9.6).abs() < 0.5, "{split}");
        assert!(angular_to_hz(pos[0]) * 1e-3 > 435.0 && angular_to_hz(pos[1]) * 1e-3 < 435.0);
    }

    #[test]
    fn ground_state_has_no_red_sideband() {
        let cfg = lattice(530.0, 430.0, 0.0);
        let th = thermal_pair(&cfg, [0.0, 0.0]);
        let grid = DetuningGrid::new(-600e3, 600e3, 1e3).unwrap();
        let s = synthesize_spectrum(&cfg, &drive(5.0, 0.3e-3), th, &grid, &no_background()).unwrap();
        let red = s.area_between(-600e3, -10e3, 0.0);
        let blue = s.area_between(10e3, 600e3, 0.0);
        // only the far wing of the blue line reaches negative detunings
        assert!(blue > 0.0 && red < 1e-3 * blue, "{red} vs {blue}");
        let pops = th[1].populations();
        let red_channel = sideband_channels(&cfg, 0.0)
            .unwrap()
            .into_iter()
            .find(|c| c.mode == Mode::Minus && c.kind == SidebandKind::Red)
            .unwrap();
        assert_eq!(red_channel.probability(&drive(5.0, 0.3e-3), &pops, red_channel.center), 0.0);
    }

    #[test]
    fn single_channel_equals_rabi() {
        let cfg = lattice(530.0, 430.0, 0.0);
        let th = thermal_pair(&cfg, [0.0, 0.0]);
        let d = drive(5.0, 0.3e-3);
        let grid = DetuningGrid::inset(430e3, 20e3).unwrap();
        let s = synthesize_spectrum(&cfg, &d, th, &grid, &no_background()).unwrap();
        let eig = cfg.eigensystem().unwrap();
        let eta = raman::lamb_dicke(eig.proj_minus, eig.omega_minus, cfg.k2, cfg.mass).unwrap();
        for (f, p) in s.detunings.iter().zip(&s.transfer) {
            let want = raman::rabi_transfer_probability(
                d.omega0 * eta,
                hz_to_angular(*f) - eig.omega_minus,
                d.t_pulse,
            );
            // the + mode along x has no projection on k₂ at φ = 0
            assert!((p - want).abs() < 1e-12);
        }
    }

    #[test]
    fn background_added_and_clamped() {
        let cfg = lattice(530.0, 430.0, 0.0);
        let th = thermal_pair(&cfg, [0.0, 0.0]);
        let grid = DetuningGrid::new(-5e3, 5e3, 1e3).unwrap();
        let s = synthesize_spectrum(&cfg, &drive(5.0, 0.3e-3), th, &grid, &SpectrumOptions::default()).unwrap();
        assert!(s.transfer.iter().all(|&p| (p - DEFAULT_BACKGROUND).abs() < 1e-3));
        // a π pulse on resonance plus background saturates at 1
        let strong = RamanDrive::new(khz_to_angular(100.0), 0.1e-3, 0.0, Parity::Node).unwrap();
        let grid = DetuningGrid::inset(430e3, 30e3).unwrap();
        let s = synthesize_spectrum(&cfg, &strong, th, &grid, &SpectrumOptions::default()).unwrap();
        assert!(s.transfer.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn antinode_rejected() {
        let cfg = lattice(530.0, 430.0, 0.0);
        let th = thermal_pair(&cfg, [0.0, 0.0]);
        let d = RamanDrive::new(1.0, 1e-4, 0.0, Parity::Antinode).unwrap();
        assert!(synthesize_spectrum(&cfg, &d, th, &DetuningGrid::default(), &no_background()).is_err());
    }

    #[test]
    fn red_blue_detailed_balance() {
        let cfg = lattice(530.0, 430.0, 0.05);
        let th = thermal_pair(&cfg, [3.3, 1.2]);
        let d = drive(5.0, 0.3e-3);
        let channels = sideband_channels(&cfg, 0.0).unwrap();
        for mode in Mode::BOTH {
            let state = if mode == Mode::Plus { th[0] } else { th[1] };
            let pops = state.populations();
            let blue = channels.iter().find(|c| c.mode == mode && c.kind == SidebandKind::Blue).unwrap();
            let red = channels.iter().find(|c| c.mode == mode && c.kind == SidebandKind::Red).unwrap();
            for k in -20..=20 {
                let delta = blue.center + khz_to_angular(0.7 * k as f64);
                let b = blue.probability(&d, &pops, delta);
                let r = red.probability(&d, &pops, -delta);
                assert!((r - state.q * b).abs() < 1e-12, "{mode:?} {k}");
            }
        }
    }

    #[test]
    fn numeric_areas_match_thermal_prediction() {
        let cfg = lattice(530.0, 430.0, 0.0);
        let th = thermal_pair(&cfg, [0.0, 3.3]);
        // θ√(n+1) stays below ≈ 0.25 for all populated n
        let d = drive(0.3, 0.3e-3);
        let opts = SpectrumOptions::default();
        let grid = DetuningGrid::new(-500e3, 500e3, 50.0).unwrap();
        let s = synthesize_spectrum(&cfg, &d, th, &grid, &opts).unwrap();
        let eig = cfg.eigensystem().unwrap();
        let eta = raman::lamb_dicke(eig.proj_minus, eig.omega_minus, cfg.k2, cfg.mass).unwrap();
        let a10 = angular_to_hz(raman::sideband_area(d.omega0 * d.t_pulse * eta, d.t_pulse));
        let (want_b, want_r) = raman::thermal_sideband_areas(th[1].q, a10).unwrap();
        let f = angular_to_hz(eig.omega_minus);
        let blue = s.area_between(f - 100e3, f + 100e3, opts.background);
        let red = s.area_between(-f - 100e3, -f + 100e3, opts.background);
        assert!((blue / want_b - 1.0).abs() < 0.02, "{}", blue / want_b);
        assert!((red / want_r - 1.0).abs() < 0.02, "{}", red / want_r);
        let th_inv = raman::thermometry_invert(red, blue, eig.omega_minus).unwrap();
        assert!((th_inv.nbar - 3.3).abs() < 0.1, "{}", th_inv.nbar);
    }

    #[test]
    fn noise_is_seeded_and_sized() {
        let clean = Spectrum::from_points((0..500).map(|i| i as f64).collect(), vec![0.5; 500]).unwrap();
        assert_eq!(add_noise(&clean, 0.0, 1).unwrap().transfer, clean.transfer);
        let a = add_noise(&clean, 0.02, 7).unwrap();
        let b = add_noise(&clean, 0.02, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.transfer, add_noise(&clean, 0.02, 8).unwrap().transfer);
        let diffs: Vec<f64> = a.transfer.iter().map(|v| v - 0.5).collect();
        let mean = diffs.iter().sum::<f64>() / 500.0;
        let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 499.0).sqrt();
        assert!((0.017..=0.023).contains(&sd), "{sd}");
        assert!(!a.clipped);
        let edge = Spectrum::from_points(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let big = add_noise(&edge, 10.0, 3).unwrap();
        assert!(big.clipped);
        assert!(big.transfer.iter().all(|v| (-0.05..=1.05).contains(v)));
    }

    #[test]
    fn crossing_scan_examples() {
        let base = lattice(530.0, 530.0, 0.022);
        let scan = crossing_scan(&base, &[0.5, 9.4, 20.0], 9.4, 0.9, 0.3e-3).unwrap();
        let split = (scan.frequencies_plus[1] - scan.frequencies_minus[1]) * 1e-3;
        assert!((split - 530.0 * 0.022).abs() < 0.1, "{split}");
        // far below the crossing the ≈ω₁ branch is the + mode and goes dark
        assert!(scan.areas_plus[0] < 1e-3 * scan.areas_minus[0]);
        let (ap, am) = (scan.areas_plus[1], scan.areas_minus[1]);
        assert!(((ap - am) / am).abs() < 0.05);
        assert!(scan.frequencies_plus.iter().zip(&scan.frequencies_minus).all(|(p, m)| p >= m));
        assert!(crossing_scan(&base, &[0.0], 9.4, 0.9, 0.3e-3).is_err());
    }

    #[test]
    fn frequency_noise_is_seeded() {
        let base = lattice(528.0, 528.0, 0.016);
        let powers: Vec<f64> = (1..=20).map(f64::from).collect();
        let scan = crossing_scan(&base, &powers, 9.5, 0.9, 0.3e-3).unwrap();
        assert_eq!(add_frequency_noise(&scan, 0.0, 1).unwrap(), scan);
        let a = add_frequency_noise(&scan, 1e3, 5).unwrap();
        assert_eq!(a, add_frequency_noise(&scan, 1e3, 5).unwrap());
        assert_eq!(a.areas_plus, scan.areas_plus);
        let moved = a.frequencies_plus.iter().zip(&scan.frequencies_plus).map(|(x, y)| (x - y).abs());
        assert!(moved.clone().all(|d| d < 6e3));
        assert!(moved.sum::<f64>() > 0.0);
        assert!(add_frequency_noise(&scan, -1.0, 0).is_err());
    }

    #[test]
    fn crossing_scan_frequencies_match_independent_diagonalization() {
        let base = lattice(530.0, 530.0, 0.022);
        let powers: Vec<f64> = (1..40).map(|i| 0.5 * i as f64).collect();
        let scan = crossing_scan(&base, &powers, 9.4, 0.9, 0.3e-3).unwrap();
        let (s, c) = (0.011f64.sin(), 0.011f64.cos());
        let (k1, k2) = ([c, s], [s, c]);
        for (i, p) in powers.iter().enumerate() {
            let kap1 = base.kappa1;
            let kap2 = base.kappa1 * p / 9.4;
            let a = kap1 * k1[0] * k1[0] + kap2 * k2[0] * k2[0];
            let b = kap1 * k1[0] * k1[1] + kap2 * k2[0] * k2[1];
            let d = kap1 * k1[1] * k1[1] + kap2 * k2[1] * k2[1];
            let m = nalgebra::Matrix2::new(a, b, b, d).symmetric_eigenvalues();
            let (hi, lo) = (m.max(), m.min());
            let f = |k: f64| (k / base.mass).sqrt() / std::f64::consts::TAU;
            assert!((f(hi) - scan.frequencies_plus[i]).abs() < 1e-6);
            assert!((f(lo.max(0.0)) - scan.frequencies_minus[i]).abs() < 1e-6);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn transfer_stays_in_unit_interval(
            f0 in 0.5..200.0f64,
            nb in 0.0..5.0f64,
            bg in 0.0..0.2f64,
            phi in 0.0..0.1f64,
        ) {
            let cfg = lattice(530.0, 440.0, phi);
            let th = thermal_pair(&cfg, [nb, nb]);
            let grid = DetuningGrid::new(-600e3, 600e3, 5e3).unwrap();
            let opts = SpectrumOptions { background: bg, line_shift: 0.0 };
            let s = synthesize_spectrum(&cfg, &drive(f0, 0.3e-3), th, &grid, &opts).unwrap();
            prop_assert!(s.transfer.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }
}
