//! Rayleigh block-fading links and outage probabilities.
//!
//! Four links are modelled: transmitter to receiver (1), transmitter to
//! jammer (2), jammer to receiver (3) and decoy to jammer (4). Each link has
//! an average power gain and its own noise power. The instantaneous power
//! gain of a Rayleigh channel is exponential with that mean and stays fixed
//! for one packet.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};

/// Link index into [`ChannelConfig::noise`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    TxToRx = 0,
    TxToJammer = 1,
    JammerToRx = 2,
    DecoyToJammer = 3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelConfig {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h4: f64,
    /// Noise power per link, indexed by [`Link`].
    pub noise: [f64; 4],
    /// Ratio h2 / h1, in (0, 1].
    pub alpha: f64,
    /// Outage threshold on the receiver SNR/SINR (linear).
    pub gamma_min: f64,
}

impl ChannelConfig {
    /// Builds the configuration with h1 = h2 / alpha, so the receiver link is
    /// never weaker than the eavesdropping link.
    pub fn from_alpha(
        h2: f64,
        alpha: f64,
        h3: f64,
        h4: f64,
        noise: [f64; 4],
        gamma_min: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid("channel.alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        let cfg = ChannelConfig {
            h1: h2 / alpha,
            h2,
            h3,
            h4,
            noise,
            alpha,
            gamma_min,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("h1", self.h1), ("h2", self.h2), ("h3", self.h3), ("h4", self.h4)] {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::invalid(format!("channel.{name}"), format!("gain must be positive, got {g}")));
            }
        }
        for (i, n) in self.noise.iter().enumerate() {
            if !(*n > 0.0 && n.is_finite()) {
                return Err(Error::invalid(
                    format!("channel.noise[{i}]"),
                    format!("noise power must be positive, got {n}"),
                ));
            }
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid("channel.alpha", format!("must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.gamma_min > 0.0 && self.gamma_min.is_finite()) {
            return Err(Error::invalid(
                "channel.gamma_min",
                format!("must be positive, got {}", self.gamma_min),
            ));
        }
        Ok(())
    }

    pub fn noise(&self, link: Link) -> f64 {
        self.noise[link as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerConfig {
    pub p_t: f64,
    pub p_d: f64,
    /// Shared average budget of transmitter and decoy; `None` means unconstrained.
    pub p_t_max: Option<f64>,
    pub p_j_max: f64,
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_t", self.p_t), ("p_d", self.p_d), ("p_j_max", self.p_j_max)] {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::invalid(format!("power.{name}"), format!("must be non-negative, got {p}")));
            }
        }
        if self.p_t <= 0.0 {
            return Err(Error::invalid("power.p_t", "transmit power must be positive"));
        }
        if let Some(max) = self.p_t_max {
            if !(max >= 0.0) {
                return Err(Error::invalid("power.p_t_max", format!("must be non-negative, got {max}")));
            }
        }
        Ok(())
    }

    /// Checks q_t * p_t + q_d * p_d <= p_t_max.
    pub fn check_budget(&self, q_t: f64, q_d: f64) -> Result<()> {
        if let Some(max) = self.p_t_max {
            let avg = q_t * self.p_t + q_d * self.p_d;
            if avg > max * (1.0 + 1e-12) {
                return Err(Error::invalid(
                    "power.p_t_max",
                    format!("average transmit+decoy power {avg} exceeds the shared budget {max}"),
                ));
            }
        }
        Ok(())
    }
}

/// CDF of the SNR of an interference-free Rayleigh link.
pub fn snr_cdf(y: f64, avg_gain: f64, power: f64, noise: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain(format!("snr_cdf: y must be >= 0, got {y}")));
    }
    if !(avg_gain > 0.0 && power > 0.0 && noise > 0.0) {
        return Err(Error::domain(format!(
            "snr_cdf: gain, power and noise must be positive (gain={avg_gain}, power={power}, noise={noise})"
        )));
    }
    Ok(-(-noise * y / (avg_gain * power)).exp_m1())
}

/// CDF of the receiver SINR when the jammer transmits with power `p_j` over
/// an independent Rayleigh link of mean gain `h3`.
pub fn sinr_cdf(y: f64, p_t: f64, p_j: f64, h1: f64, h3: f64, noise: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain(format!("sinr_cdf: y must be >= 0, got {y}")));
    }
    if !(p_t > 0.0) {
        return Err(Error::domain(format!("sinr_cdf: p_t must be positive, got {p_t}")));
    }
    if !(p_j >= 0.0) {
        return Err(Error::domain(format!("sinr_cdf: p_j must be >= 0, got {p_j}")));
    }
    if !(h1 > 0.0 && h3 > 0.0 && noise > 0.0) {
        return Err(Error::domain("sinr_cdf: gains and noise must be positive"));
    }
    let signal = h1 * p_t;
    let survive = (-noise * y / signal).exp();
    if p_j == 0.0 {
        return Ok(-(-noise * y / signal).exp_m1());
    }
    Ok(1.0 - signal / (signal + y * h3 * p_j) * survive)
}

/// Outage probability of a real packet on the receiver link, conditioning on
/// whether the jammer is active during it.
pub fn outage_probability(cfg: &ChannelConfig, pw: &PowerConfig, p_j: f64, p_jam_active: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_jam_active) {
        return Err(Error::domain(format!(
            "outage_probability: p_jam_active must be in [0, 1], got {p_jam_active}"
        )));
    }
    let noise = cfg.noise(Link::TxToRx);
    let clear = snr_cdf(cfg.gamma_min, cfg.h1, pw.p_t, noise)?;
    let jammed = sinr_cdf(cfg.gamma_min, pw.p_t, p_j, cfg.h1, cfg.h3, noise)?;
    Ok((clear * (1.0 - p_jam_active) + jammed * p_jam_active).clamp(0.0, 1.0))
}

/// One block-fading power gain with mean `avg_gain`.
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R, avg_gain: f64) -> f64 {
    debug_assert!(avg_gain > 0.0);
    let e: f64 = Exp1.sample(rng);
    avg_gain * e
}
