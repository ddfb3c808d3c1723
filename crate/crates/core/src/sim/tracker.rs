//! Sawtooth age bookkeeping.

use crate::error::{Error, Result};

/// Age of information at the receiver as a function of time.
///
/// The age grows with slope one and drops to `t_now - t_gen` whenever an
/// informative update (one generated after the freshest update so far)
/// arrives. Each such drop records the age just before it as a peak.
/// Peaks and area before `burn_in` are not accumulated.
#[derive(Debug, Clone)]
pub struct AoiTracker {
    initial_age: f64,
    burn_in: f64,
    now: f64,
    age: f64,
    last_gen: Option<f64>,
    peaks: Vec<f64>,
    area: f64,
}

impl AoiTracker {
    pub fn new(burn_in: f64) -> Self {
        Self::with_initial_age(0.0, burn_in)
    }

    pub fn with_initial_age(initial_age: f64, burn_in: f64) -> Self {
        AoiTracker {
            initial_age,
            burn_in,
            now: 0.0,
            age: initial_age,
            last_gen: None,
            peaks: Vec::new(),
            area: 0.0,
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn age(&self) -> f64 {
        self.age
    }

    pub fn last_generation(&self) -> Option<f64> {
        self.last_gen
    }

    pub fn peaks(&self) -> &[f64] {
        &self.peaks
    }

    /// Lets time pass without a delivery.
    pub fn advance(&mut self, t: f64) -> Result<()> {
        if t < self.now {
            return Err(Error::domain(format!("time went backwards: {} -> {t}", self.now)));
        }
        let from = self.now.max(self.burn_in);
        if t > from {
            let start_age = self.age + (from - self.now);
            let w = t - from;
            self.area += w * start_age + 0.5 * w * w;
        }
        self.age += t - self.now;
        self.now = t;
        Ok(())
    }

    /// Registers a successful delivery at `t_now` of an update generated at
    /// `t_gen`. Returns whether it was informative.
    pub fn record_delivery(&mut self, t_gen: f64, t_now: f64) -> Result<bool> {
        if t_gen > t_now {
            return Err(Error::domain(format!("update generated at {t_gen} delivered earlier, at {t_now}")));
        }
        self.advance(t_now)?;
        if matches!(self.last_gen, Some(g) if t_gen <= g) {
            return Ok(false);
        }
        if t_now >= self.burn_in {
            self.peaks.push(self.age);
        }
        self.age = t_now - t_gen;
        self.last_gen = Some(t_gen);
        Ok(true)
    }

    pub fn mean_peak(&self) -> Option<f64> {
        if self.peaks.is_empty() {
            None
        } else {
            Some(self.peaks.iter().sum::<f64>() / self.peaks.len() as f64)
        }
    }

    /// Time-average age over the observed window after burn-in.
    pub fn time_average(&self) -> Option<f64> {
        let span = self.now - self.burn_in;
        (span > 0.0).then(|| self.area / span)
    }

    pub fn initial_age(&self) -> f64 {
        self.initial_age
    }
}
