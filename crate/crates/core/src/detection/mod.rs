//! The jammer's signal-presence classifier.
//!
//! The classifier is abstracted to its operating point: misdetection and
//! false-alarm probabilities for real and decoy traffic. Operating points can
//! be injected directly ([`RocPair`]), derived from an energy detector, or
//! interpolated from a table exported by an offline calibration tool.

mod energy;
mod table;

pub use energy::{energy_detector_roc, EnergyDetector, EnergyThreshold};
pub use table::{DetectorTable, TableDetector, TableMetadata};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Misdetection and false-alarm probabilities of the jammer's classifier,
/// separately for the transmitter's and the decoy's channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RocPair {
    pub p_m_t: f64,
    pub p_m_d: f64,
    pub p_f_t: f64,
    pub p_f_d: f64,
}

impl RocPair {
    pub fn new(p_m_t: f64, p_m_d: f64, p_f_t: f64, p_f_d: f64) -> Result<Self> {
        let roc = RocPair {
            p_m_t,
            p_m_d,
            p_f_t,
            p_f_d,
        };
        roc.validate()?;
        Ok(roc)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_m_t", self.p_m_t),
            ("p_m_d", self.p_m_d),
            ("p_f_t", self.p_f_t),
            ("p_f_d", self.p_f_d),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("roc.{name}"), format!("must be in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    /// False alarm on an idle slot: union of the false-alarm events with
    /// respect to the transmitter and the decoy.
    pub fn p_f(&self) -> f64 {
        self.p_f_t + self.p_f_d - self.p_f_t * self.p_f_d
    }

    /// True when a decoy is more likely to trigger the jammer than an idle
    /// channel is, i.e. when decoys actually drain the jammer's budget.
    pub fn decoy_effective(&self) -> bool {
        1.0 - self.p_m_d > self.p_f()
    }
}

/// Weight given to the idle hypothesis in the busy/idle decision probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdlePrior {
    /// Real and decoy transmissions are mutually exclusive: P[idle] = 1 - q_t - q_d.
    #[default]
    Exclusive,
    /// Real and decoy activity treated as independent: P[idle] = (1 - q_t)(1 - q_d).
    Product,
}

fn check_priors(q_t: f64, q_d: f64, prior: IdlePrior) -> Result<f64> {
    if !(0.0..=1.0).contains(&q_t) || !(0.0..=1.0).contains(&q_d) {
        return Err(Error::domain(format!("q_t and q_d must be in [0, 1], got q_t={q_t}, q_d={q_d}")));
    }
    match prior {
        IdlePrior::Exclusive => {
            let idle = 1.0 - q_t - q_d;
            if idle < -1e-12 {
                return Err(Error::domain(format!(
                    "q_t + q_d = {} exceeds 1 with exclusive activity",
                    q_t + q_d
                )));
            }
            Ok(idle.max(0.0))
        }
        IdlePrior::Product => Ok((1.0 - q_t) * (1.0 - q_d)),
    }
}

/// Probability that the jammer declares the channel busy in a slot.
pub fn prob_jammer_declares_busy(q_t: f64, q_d: f64, roc: &RocPair, prior: IdlePrior) -> Result<f64> {
    roc.validate()?;
    let idle = check_priors(q_t, q_d, prior)?;
    let busy = q_t * (1.0 - roc.p_m_t) + q_d * (1.0 - roc.p_m_d) + idle * roc.p_f();
    if busy > 1.0 + 1e-12 {
        return Err(Error::domain(format!(
            "busy probability {busy} exceeds 1 under the {prior:?} idle prior"
        )));
    }
    Ok(busy.min(1.0))
}

/// Complement of [`prob_jammer_declares_busy`] under the same prior.
pub fn prob_jammer_declares_idle(q_t: f64, q_d: f64, roc: &RocPair, prior: IdlePrior) -> Result<f64> {
    Ok(1.0 - prob_jammer_declares_busy(q_t, q_d, roc, prior)?)
}

/// Joint probability that a slot carries a real packet and the jammer fires on it.
pub fn jam_trigger_probability_real(q_t: f64, roc: &RocPair) -> Result<f64> {
    if !(0.0..=1.0).contains(&q_t) {
        return Err(Error::domain(format!("q_t must be in [0, 1], got {q_t}")));
    }
    roc.validate()?;
    Ok(q_t * (1.0 - roc.p_m_t))
}

/// A classifier characterized by its detection and false-alarm probabilities
/// as functions of the average SNR and the number of observed samples.
pub trait DetectorModel {
    fn p_detect(&self, snr: f64, n_samples: u32) -> Result<f64>;
    fn p_false_alarm(&self, n_samples: u32) -> Result<f64>;
}

/// Operating point for a given pair of average SNRs at the jammer.
///
/// The model has a single false-alarm probability per sensing decision, so it
/// is attributed entirely to `p_f_t` and the union `p_f()` equals it.
pub fn roc_from_model<M: DetectorModel + ?Sized>(
    model: &M,
    n_samples: u32,
    snr_real: f64,
    snr_decoy: f64,
) -> Result<RocPair> {
    let pd_t = model.p_detect(snr_real, n_samples)?;
    let pd_d = model.p_detect(snr_decoy, n_samples)?;
    let pf = model.p_false_alarm(n_samples)?;
    RocPair::new(1.0 - pd_t, 1.0 - pd_d, pf, 0.0)
}
