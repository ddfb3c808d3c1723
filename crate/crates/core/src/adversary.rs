//! Reactive jammer with an average power budget.
//!
//! The jammer senses every block, and whenever its classifier declares the
//! channel busy it transmits for the whole block, whether the signal was a
//! real packet, a decoy or nothing at all. The per-activation power is set so
//! the long-run average meets the budget.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::detection::RocPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JammerMode {
    /// Fixed power from the closed-form activation probability.
    #[default]
    Oracle,
    /// Power re-estimated from the running activation fraction.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JammerConfig {
    pub p_j_max: f64,
    pub mode: JammerMode,
}

impl JammerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_j_max >= 0.0 && self.p_j_max.is_finite()) {
            return Err(Error::invalid("power.p_j_max", format!("must be non-negative, got {}", self.p_j_max)));
        }
        Ok(())
    }
}

/// What is actually on the air during a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotTruth {
    Real,
    Decoy,
    Idle,
}

impl SlotTruth {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotTruth::Real => "real",
            SlotTruth::Decoy => "decoy",
            SlotTruth::Idle => "idle",
        }
    }
}

/// Per-activation jamming power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JamPower {
    Active(f64),
    /// The jammer never declares busy, so its power is irrelevant.
    Dormant,
}

impl JamPower {
    /// Power value, 0 when dormant.
    pub fn value(self) -> f64 {
        match self {
            JamPower::Active(p) => p,
            JamPower::Dormant => 0.0,
        }
    }

    pub fn is_dormant(self) -> bool {
        matches!(self, JamPower::Dormant)
    }
}

/// Power that spends the average budget exactly when the jammer fires with
/// probability `p_busy` per block.
pub fn jam_power(p_j_max: f64, p_busy: f64) -> Result<JamPower> {
    if !(p_j_max >= 0.0) {
        return Err(Error::domain(format!("p_j_max must be >= 0, got {p_j_max}")));
    }
    if !(0.0..=1.0).contains(&p_busy) {
        return Err(Error::domain(format!("p_busy must be in [0, 1], got {p_busy}")));
    }
    if p_busy == 0.0 {
        return Ok(JamPower::Dormant);
    }
    Ok(JamPower::Active(p_j_max / p_busy))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct JammerState {
    pub slots_observed: u64,
    pub activations: u64,
    /// Energy in power x slot units.
    pub energy_spent: f64,
    pub observed_time: f64,
    pub active_time: f64,
}

/// p_j * activations / slots_observed.
pub fn realized_average_power(state: &JammerState, p_j: f64) -> Result<f64> {
    if state.slots_observed == 0 {
        return Err(Error::domain("no slots observed yet"));
    }
    Ok(p_j * state.activations as f64 / state.slots_observed as f64)
}

#[derive(Debug, Clone)]
pub struct Jammer {
    config: JammerConfig,
    power: JamPower,
    state: JammerState,
}

impl Jammer {
    /// `p_busy` is the closed-form activation probability used by the oracle
    /// mode; the adaptive mode ignores it.
    pub fn new(config: JammerConfig, p_busy: f64) -> Result<Self> {
        config.validate()?;
        Ok(Jammer {
            power: jam_power(config.p_j_max, p_busy)?,
            config,
            state: JammerState::default(),
        })
    }

    pub fn state(&self) -> &JammerState {
        &self.state
    }

    pub fn oracle_power(&self) -> JamPower {
        self.power
    }

    /// Senses one unit-length slot. Returns whether the jammer transmitted.
    pub fn decide_and_spend<R: Rng + ?Sized>(&mut self, truth: SlotTruth, roc: &RocPair, rng: &mut R) -> bool {
        self.observe(truth, roc, 1.0, rng).is_some()
    }

    /// Senses a block of `duration` slots. Returns the power used if the
    /// jammer transmitted. Consumes exactly one uniform draw.
    pub fn observe<R: Rng + ?Sized>(
        &mut self,
        truth: SlotTruth,
        roc: &RocPair,
        duration: f64,
        rng: &mut R,
    ) -> Option<f64> {
        let u: f64 = rng.random();
        let p_declare = match truth {
            SlotTruth::Real => 1.0 - roc.p_m_t,
            SlotTruth::Decoy => 1.0 - roc.p_m_d,
            SlotTruth::Idle => roc.p_f(),
        };
        self.state.slots_observed += 1;
        self.state.observed_time += duration;
        if u >= p_declare {
            return None;
        }
        let power = match (self.config.mode, self.power) {
            (JammerMode::Oracle, JamPower::Dormant) => return None,
            (JammerMode::Oracle, JamPower::Active(p)) => p,
            (JammerMode::Adaptive, _) => {
                self.config.p_j_max * self.state.observed_time / (self.state.active_time + duration)
            }
        };
        self.state.activations += 1;
        self.state.active_time += duration;
        self.state.energy_spent += power * duration;
        Some(power)
    }

    /// Energy spent divided by time observed.
    pub fn average_power(&self) -> f64 {
        if self.state.observed_time > 0.0 {
            self.state.energy_spent / self.state.observed_time
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::{prob_jammer_declares_busy, IdlePrior};
    use crate::rng::{stream, StreamId};

    fn roc(p_m_t: f64, p_m_d: f64, p_f_t: f64) -> RocPair {
        RocPair::new(p_m_t, p_m_d, p_f_t, 0.0).unwrap()
    }

    #[test]
    fn jam_power_examples() {
        assert_eq!(jam_power(1.0, 1.0).unwrap(), JamPower::Active(1.0));
        let p = jam_power(1.0, 0.52).unwrap().value();
        assert!((p - 1.923_077).abs() < 1e-6);
        assert_eq!(jam_power(0.0, 0.3).unwrap().value(), 0.0);
        assert!(jam_power(1.0, 0.0).unwrap().is_dormant());
    }

    #[test]
    fn idle_without_false_alarms_never_jams() {
        let mut j = Jammer::new(JammerConfig { p_j_max: 1.0, mode: JammerMode::Oracle }, 0.5).unwrap();
        let mut rng = stream(1, StreamId::Detection);
        let r = roc(0.0, 0.0, 0.0);
        assert!((0..10_000).all(|_| !j.decide_and_spend(SlotTruth::Idle, &r, &mut rng)));
        assert_eq!(j.state().activations, 0);
        assert_eq!(realized_average_power(j.state(), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn perfectly_detected_decoys_always_draw_fire() {
        let mut j = Jammer::new(JammerConfig { p_j_max: 1.0, mode: JammerMode::Oracle }, 1.0).unwrap();
        let mut rng = stream(2, StreamId::Detection);
        let r = roc(0.5, 0.0, 0.0);
        assert!((0..10_000).all(|_| j.decide_and_spend(SlotTruth::Decoy, &r, &mut rng)));
        assert_eq!(j.state().activations, j.state().slots_observed);
        assert_eq!(realized_average_power(j.state(), 1.0).unwrap(), 1.0);
    }

    #[test]
    fn zero_slots_is_an_error() {
        assert!(realized_average_power(&JammerState::default(), 1.0).is_err());
    }

    fn run_truths(j: &mut Jammer, q_t: f64, q_d: f64, r: &RocPair, slots: usize, seed: u64) {
        let mut truth_rng = stream(seed, StreamId::Traffic);
        let mut det_rng = stream(seed, StreamId::Detection);
        for _ in 0..slots {
            let u: f64 = rand::Rng::random(&mut truth_rng);
            let truth = if u < q_t {
                SlotTruth::Real
            } else if u < q_t + q_d {
                SlotTruth::Decoy
            } else {
                SlotTruth::Idle
            };
            j.decide_and_spend(truth, r, &mut det_rng);
        }
    }

    #[test]
    fn activation_rate_and_budget_over_a_million_slots() {
        let n = 1_000_000;
        let r = roc(0.2, 0.5, 0.1);
        let p_busy = prob_jammer_declares_busy(0.6, 0.0, &r, IdlePrior::Exclusive).unwrap();
        let mut j = Jammer::new(JammerConfig { p_j_max: 1.0, mode: JammerMode::Oracle }, p_busy).unwrap();
        run_truths(&mut j, 0.6, 0.0, &r, n, 5);
        let rate = j.state().activations as f64 / n as f64;
        let se = (p_busy * (1.0 - p_busy) / n as f64).sqrt();
        assert!((rate - 0.52).abs() <= 3.0 * se, "{rate}");
        let avg = realized_average_power(j.state(), j.oracle_power().value()).unwrap();
        assert!((avg - 1.0).abs() <= 0.01);
        assert!((j.average_power() - avg).abs() < 1e-9);
    }

    #[test]
    fn adaptive_mode_converges_to_budget() {
        let r = roc(0.3, 0.1, 0.05);
        let mut j = Jammer::new(JammerConfig { p_j_max: 2.0, mode: JammerMode::Adaptive }, 0.0).unwrap();
        run_truths(&mut j, 0.4, 0.3, &r, 200_000, 8);
        assert!((j.average_power() - 2.0).abs() < 0.02, "{}", j.average_power());
    }

    #[test]
    fn one_uniform_per_block() {
        // Same detection stream, different truths: the draws must stay aligned.
        let r = roc(0.2, 0.1, 0.1);
        let cfg = JammerConfig { p_j_max: 1.0, mode: JammerMode::Oracle };
        let mut a = Jammer::new(cfg, 0.5).unwrap();
        let mut b = Jammer::new(cfg, 0.5).unwrap();
        let mut ra = stream(4, StreamId::Detection);
        let mut rb = stream(4, StreamId::Detection);
        for k in 0..1000 {
            a.decide_and_spend(if k % 2 == 0 { SlotTruth::Idle } else { SlotTruth::Real }, &r, &mut ra);
            b.decide_and_spend(if k % 2 == 0 { SlotTruth::Decoy } else { SlotTruth::Real }, &r, &mut rb);
        }
        assert_eq!(rand::Rng::random::<u64>(&mut ra), rand::Rng::random::<u64>(&mut rb));
    }
}
