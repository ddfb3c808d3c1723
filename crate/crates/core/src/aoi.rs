//! Closed-form peak age of information.
//!
//! Two update models are covered: a FIFO queue with Poisson arrivals and
//! deterministic service (M/D/1), and just-in-time updates that are generated
//! at the moment of transmission. Packets are lost independently with
//! probability `p`; lost packets still occupy the server for one service time.

use serde::{Deserialize, Serialize};

use crate::adversary::jam_power;
use crate::channel::outage_probability;
use crate::detection::{jam_trigger_probability_real, prob_jammer_declares_busy, RocPair};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Utilization at or above this is treated as unstable.
const RHO_LIMIT: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateModel {
    /// Poisson arrivals into an unbounded FIFO buffer.
    #[default]
    M1,
    /// Just-in-time: generate-and-send in a slot with probability lambda * d.
    M2,
}

impl UpdateModel {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateModel::M1 => "m1",
            UpdateModel::M2 => "m2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrafficConfig {
    /// Update rate, packets per unit time.
    pub lambda: f64,
    /// Fraction of idle slots that carry a decoy.
    pub q: f64,
    /// Deterministic service time (one resource block).
    pub d: f64,
    pub model: UpdateModel,
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::invalid("traffic.d", format!("service time must be positive, got {}", self.d)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("traffic.lambda", format!("must be positive, got {}", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::invalid("traffic.q", format!("must be in [0, 1], got {}", self.q)));
        }
        if self.model == UpdateModel::M2 && self.lambda * self.d > 1.0 + 1e-12 {
            return Err(Error::invalid(
                "traffic.lambda",
                format!("JIT updates need lambda * d <= 1, got {}", self.lambda * self.d),
            ));
        }
        Ok(())
    }

    pub fn rho(&self) -> f64 {
        self.lambda * self.d
    }

    /// Fraction of blocks carrying a real packet: the utilization for M1,
    /// the per-slot generation probability for M2.
    pub fn q_t(&self) -> f64 {
        self.rho().min(1.0)
    }

    pub fn q_d(&self) -> f64 {
        (1.0 - self.q_t()) * self.q
    }
}

/// How the jammer's activity enters the outage probability of a real packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JamWeight {
    /// Probability the jammer fires given that a real packet is on the air,
    /// 1 - p_m_t. This is what a slot-level simulation measures per packet.
    #[default]
    Conditional,
    /// Joint probability q_t (1 - p_m_t) that a slot is real and jammed.
    Joint,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticResult {
    pub model: UpdateModel,
    pub q_t: f64,
    pub q_d: f64,
    pub roc: RocPair,
    pub p_busy: f64,
    pub p_j: f64,
    pub p_jam_real: f64,
    pub p_loss: f64,
    pub paoi: f64,
}

/// Mean sojourn time of an M/G/1 queue (Pollaczek-Khinchine).
pub fn mg1_sojourn(lambda: f64, es: f64, es2: f64) -> Result<f64> {
    if !(lambda >= 0.0 && es > 0.0 && es2 >= es * es * (1.0 - 1e-12)) {
        return Err(Error::domain(format!(
            "mg1_sojourn: lambda={lambda}, E[S]={es}, E[S^2]={es2}"
        )));
    }
    let rho = lambda * es;
    if rho >= RHO_LIMIT {
        return Err(Error::Unstable { rho });
    }
    Ok(es + lambda * es2 / (2.0 * (1.0 - rho)))
}

fn check_loss(p: f64) -> Result<()> {
    if p == 1.0 {
        return Err(Error::CertainLoss);
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain(format!("loss probability must be in [0, 1), got {p}")));
    }
    Ok(())
}

/// Average peak age for the queued (M/D/1) model.
pub fn paoi_md1(lambda: f64, d: f64, p: f64) -> Result<f64> {
    check_loss(p)?;
    if !(lambda > 0.0 && d > 0.0) {
        return Err(Error::domain(format!("paoi_md1: need lambda > 0 and d > 0 (lambda={lambda}, d={d})")));
    }
    let rho = lambda * d;
    if rho >= RHO_LIMIT {
        return Err(Error::Unstable { rho });
    }
    Ok(1.0 / (lambda * (1.0 - p)) + d + d * rho / (2.0 * (1.0 - rho)))
}

/// Average peak age for just-in-time updates.
pub fn paoi_jit(lambda: f64, d: f64, p: f64) -> Result<f64> {
    check_loss(p)?;
    if !(lambda > 0.0 && d > 0.0) {
        return Err(Error::domain(format!("paoi_jit: need lambda > 0 and d > 0 (lambda={lambda}, d={d})")));
    }
    if lambda * d > 1.0 + 1e-12 {
        return Err(Error::domain(format!("paoi_jit: lambda * d = {} exceeds 1", lambda * d)));
    }
    Ok(1.0 / (lambda * (1.0 - p)) + d)
}

/// d/dlambda of [`paoi_md1`].
pub fn paoi_md1_derivative(lambda: f64, d: f64, p: f64) -> Result<f64> {
    check_loss(p)?;
    let rho = lambda * d;
    if !(lambda > 0.0 && d > 0.0) || rho >= RHO_LIMIT {
        return Err(Error::domain(format!("paoi_md1_derivative: lambda={lambda}, d={d}")));
    }
    let num = 2.0 - 4.0 * d * lambda + lambda * lambda * d * d * (p + 1.0);
    let den = 2.0 * (p - 1.0) * lambda * lambda * (1.0 - rho) * (1.0 - rho);
    Ok(num / den)
}

/// Arrival rate minimizing [`paoi_md1`] for a fixed loss probability.
pub fn optimal_lambda_md1(d: f64, p: f64) -> Result<f64> {
    check_loss(p)?;
    if !(d > 0.0) {
        return Err(Error::domain(format!("service time must be positive, got {d}")));
    }
    Ok((2.0 - (2.0 * (1.0 - p)).sqrt()) / (d * (1.0 + p)))
}

/// Detection, budgeted jamming power, outage and peak age for a scenario.
pub fn closed_loop_paoi(scenario: &Scenario) -> Result<AnalyticResult> {
    let traffic = &scenario.traffic;
    let roc = scenario.roc()?;
    let q_t = traffic.q_t();
    let q_d = traffic.q_d();
    let p_busy = prob_jammer_declares_busy(q_t, q_d, &roc, scenario.conventions.idle_prior)?;
    let p_j = jam_power(scenario.jammer.p_j_max, p_busy)?;
    let p_jam_real = jam_trigger_probability_real(q_t, &roc)?;
    let jam_weight = if p_j.is_dormant() {
        0.0
    } else {
        match scenario.conventions.jam_weight {
            JamWeight::Conditional => 1.0 - roc.p_m_t,
            JamWeight::Joint => p_jam_real,
        }
    };
    let p_loss = outage_probability(&scenario.channel, &scenario.power, p_j.value(), jam_weight)?;
    let paoi = match traffic.model {
        UpdateModel::M1 => paoi_md1(traffic.lambda, traffic.d, p_loss)?,
        UpdateModel::M2 => paoi_jit(traffic.lambda, traffic.d, p_loss)?,
    };
    Ok(AnalyticResult {
        model: traffic.model,
        q_t,
        q_d,
        roc,
        p_busy,
        p_j: p_j.value(),
        p_jam_real,
        p_loss,
        paoi,
    })
}
