//! Monte Carlo model of pulsed Raman sideband cooling.
//!
//! Each cycle is a coherent red-sideband pulse followed by a repump. The
//! pulse transfers the atom with probability `1 − Π(1 − Pⱼ)`, where Pⱼ is
//! the two-level probability on mode j's red sideband; a transfer removes
//! one quantum from one mode, picked in proportion to Pⱼ. The repump that
//! follows a transfer may kick each mode by one quantum (up with weight
//! (n+1)/(2n+1), down otherwise). Atoms that were not transferred are dark
//! to the repump and keep their state.
//!
//! Trajectories run in parallel with one ChaCha stream per trajectory, and
//! ensemble sums are integers, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CoolingError;
use crate::lattice::{LatticeConfig, Mode};
use crate::raman::{self, ThermalState};
use crate::units::{khz_to_angular, us_to_s};

/// Vibrational quantum numbers (n₊, n₋).
pub type ModeState = [u32; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSelection {
    /// Drive one red sideband; detuning from the protocol, or the red
    /// sideband of the mode with the larger projection on k₂.
    OneD,
    /// Drive at −(ω₊ + ω₋)/2 so that one pulse reaches both red sidebands.
    TwoDHalfway,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingProtocol {
    /// Coherent pulse length (s).
    pub t_raman: f64,
    /// Repump length (s).
    pub t_repump: f64,
    /// Cycle repetition period (s).
    pub cycle_period: f64,
    pub n_cycles: u32,
    /// Two-photon Rabi frequency during cooling (rad/s).
    pub omega0: f64,
    /// Fixed drive detuning (rad/s) for [`ModeSelection::OneD`].
    pub delta_omega: Option<f64>,
    /// Heating probability per mode and repump. `None` uses 2η² for each
    /// mode (two scattered photons).
    pub recoil_heating_prob: Option<f64>,
    pub ensemble_size: u32,
    pub seed: u64,
}

impl Default for CoolingProtocol {
    fn default() -> Self {
        Self {
            t_raman: us_to_s(5.5),
            t_repump: us_to_s(9.5),
            cycle_period: us_to_s(15.0),
            n_cycles: 21,
            omega0: khz_to_angular(300.0),
            delta_omega: None,
            recoil_heating_prob: None,
            ensemble_size: 10_000,
            seed: 0,
        }
    }
}

impl CoolingProtocol {
    pub fn validate(&self) -> Result<(), CoolingError> {
        let bad = |msg: String| Err(CoolingError::InvalidProtocol(msg));
        if !(self.t_raman > 0.0 && self.t_repump >= 0.0 && self.cycle_period > 0.0) {
            return bad("durations must be positive".into());
        }
        if self.t_raman + self.t_repump > self.cycle_period * (1.0 + 1e-12) {
            return bad(format!(
                "pulse ({} s) plus repump ({} s) exceed the cycle period ({} s)",
                self.t_raman, self.t_repump, self.cycle_period
            ));
        }
        if !(self.omega0 >= 0.0 && self.omega0.is_finite()) {
            return bad(format!("ω₀ must be ≥ 0, got {}", self.omega0));
        }
        if let Some(d) = self.delta_omega {
            if !d.is_finite() {
                return bad("detuning must be finite".into());
            }
        }
        if let Some(p) = self.recoil_heating_prob {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("heating probability {p} outside [0, 1]"));
            }
        }
        if self.ensemble_size == 0 {
            return bad("ensemble size must be at least 1".into());
        }
        Ok(())
    }
}

/// Everything one cycle needs, resolved from protocol and lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingContext {
    /// Mode frequencies (ω₊, ω₋).
    pub omega: [f64; 2],
    pub eta: [f64; 2],
    /// Drive detuning Δω (rad/s).
    pub delta_omega: f64,
    pub heating_prob: [f64; 2],
    pub omega0: f64,
    pub t_raman: f64,
}

impl CoolingContext {
    pub fn new(
        protocol: &CoolingProtocol,
        cfg: &LatticeConfig,
        selection: ModeSelection,
    ) -> Result<Self, CoolingError> {
        protocol.validate()?;
        let eig = cfg.eigensystem()?;
        let mut eta = [0.0; 2];
        for (i, mode) in Mode::BOTH.into_iter().enumerate() {
            let w = eig.omega(mode);
            if w > 0.0 {
                eta[i] = raman::lamb_dicke(eig.projection(mode), w, cfg.k2, cfg.mass)?;
            }
        }
        let delta_omega = match selection {
            ModeSelection::TwoDHalfway => -0.5 * (eig.omega_plus + eig.omega_minus),
            ModeSelection::OneD => protocol.delta_omega.unwrap_or_else(|| {
                if eig.proj_plus >= eig.proj_minus {
                    -eig.omega_plus
                } else {
                    -eig.omega_minus
                }
            }),
        };
        let heating_prob = match protocol.recoil_heating_prob {
            Some(p) => [p, p],
            None => eta.map(|e| (2.0 * e * e).min(1.0)),
        };
        Ok(Self {
            omega: [eig.omega_plus, eig.omega_minus],
            eta,
            delta_omega,
            heating_prob,
            omega0: protocol.omega0,
            t_raman: protocol.t_raman,
        })
    }

    /// Red-sideband transfer probability of each mode in `state`.
    pub fn transfer_probabilities(&self, state: ModeState) -> [f64; 2] {
        let mut p = [0.0; 2];
        for j in 0..2 {
            if state[j] > 0 {
                let coupling = self.omega0 * self.eta[j] * (state[j] as f64).sqrt();
                p[j] = raman::rabi_transfer_probability(coupling, self.delta_omega + self.omega[j], self.t_raman);
            }
        }
        p
    }
}

/// One pulse plus repump. Returns the new state.
pub fn cooling_cycle_step<R: Rng + ?Sized>(state: ModeState, ctx: &CoolingContext, rng: &mut R) -> ModeState {
    let p = ctx.transfer_probabilities(state);
    let total = 1.0 - (1.0 - p[0]) * (1.0 - p[1]);
    if total <= 0.0 || rng.random::<f64>() >= total {
        return state;
    }
    let mut next = state;
    let pick = if rng.random::<f64>() * (p[0] + p[1]) < p[0] { 0 } else { 1 };
    next[pick] -= 1;
    for j in 0..2 {
        if ctx.heating_prob[j] > 0.0 && rng.random::<f64>() < ctx.heating_prob[j] {
            let n = next[j] as f64;
            let up = (n + 1.0) / (2.0 * n + 1.0);
            if rng.random::<f64>() < up {
                next[j] += 1;
            } else {
                next[j] -= 1;
            }
        }
    }
    next
}

/// Draws n from the geometric distribution pₙ = (1 − q)qⁿ.
pub fn sample_thermal<R: Rng + ?Sized>(q: f64, rng: &mut R) -> u32 {
    if q <= 0.0 {
        return 0;
    }
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    (u.ln() / q.ln()).floor().min(u32::MAX as f64) as u32
}

/// Ensemble statistics per cycle; index 0 is the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationTrajectory {
    pub nbar_plus: Vec<f64>,
    pub nbar_minus: Vec<f64>,
    /// Fraction of the ensemble with n₊ = n₋ = 0.
    pub ground_fraction: Vec<f64>,
    pub ensemble_size: u32,
    pub context: CoolingContext,
}

impl OccupationTrajectory {
    pub fn final_nbar(&self) -> [f64; 2] {
        [*self.nbar_plus.last().unwrap(), *self.nbar_minus.last().unwrap()]
    }
}

/// Independent RNG for trajectory `index`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn simulate_cooling(
    protocol: &CoolingProtocol,
    cfg: &LatticeConfig,
    initial: [ThermalState; 2],
    selection: ModeSelection,
) -> Result<OccupationTrajectory, CoolingError> {
    let ctx = CoolingContext::new(protocol, cfg, selection)?;
    for s in &initial {
        if !(0.0..1.0).contains(&s.q) {
            return Err(CoolingError::InvalidProtocol(format!("initial q = {} outside [0, 1)", s.q)));
        }
    }
    let cycles = protocol.n_cycles as usize;
    // per cycle: Σn₊, Σn₋, #ground
    let zero = || vec![[0u64; 3]; cycles + 1];
    let sums = (0..protocol.ensemble_size as u64)
        .into_par_iter()
        .fold(zero, |mut acc, i| {
            let mut rng = trajectory_rng(protocol.seed, i);
            let mut state = [sample_thermal(initial[0].q, &mut rng), sample_thermal(initial[1].q, &mut rng)];
            for slot in acc.iter_mut() {
                slot[0] += state[0] as u64;
                slot[1] += state[1] as u64;
                slot[2] += (state == [0, 0]) as u64;
                state = cooling_cycle_step(state, &ctx, &mut rng);
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                for k in 0..3 {
                    x[k] += y[k];
                }
            }
            a
        });
    let n = protocol.ensemble_size as f64;
    Ok(OccupationTrajectory {
        nbar_plus: sums.iter().map(|s| s[0] as f64 / n).collect(),
        nbar_minus: sums.iter().map(|s| s[1] as f64 / n).collect(),
        ground_fraction: sums.iter().map(|s| s[2] as f64 / n).collect(),
        ensemble_size: protocol.ensemble_size,
        context: ctx,
    })
}
