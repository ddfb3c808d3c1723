//! Tabulated detector curves exported by the calibration tool.
//!
//! File layout (JSON):
//!
//! ```text
//! {
//!   "packet_sizes": [16, 32, ...],
//!   "snr_db": [-5.0, -4.0, ...],
//!   "p_detect": [[...], ...],        // one row per packet size
//!   "p_false_alarm": [[...], ...],   // same shape
//!   "metadata": { "source": "...", "training_seed": 7, "class_balance": 0.5, ... }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DetectorModel;
use crate::error::{Error, Result};
use crate::units::linear_to_db;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorTable {
    pub packet_sizes: Vec<u32>,
    pub snr_db: Vec<f64>,
    pub p_detect: Vec<Vec<f64>>,
    pub p_false_alarm: Vec<Vec<f64>>,
    #[serde(default)]
    pub metadata: TableMetadata,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_balance: Option<f64>,
    /// Anything else the producing tool records (epochs, smoothing, ...).
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl DetectorTable {
    pub fn from_json(text: &str) -> Result<Self> {
        let table: DetectorTable = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.packet_sizes.is_empty() {
            return Err(Error::invalid("packet_sizes", "at least one packet size is required"));
        }
        let mut sizes = self.packet_sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        if sizes.len() != self.packet_sizes.len() || sizes[0] == 0 {
            return Err(Error::invalid("packet_sizes", "sizes must be positive and distinct"));
        }
        if self.snr_db.len() < 2 {
            return Err(Error::invalid("snr_db", "at least 2 grid points are required"));
        }
        if !self.snr_db.iter().all(|v| v.is_finite()) || self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("snr_db", "grid must be finite and strictly increasing"));
        }
        for (name, rows) in [("p_detect", &self.p_detect), ("p_false_alarm", &self.p_false_alarm)] {
            if rows.len() != self.packet_sizes.len() {
                return Err(Error::invalid(
                    name,
                    format!("expected {} rows (one per packet size), got {}", self.packet_sizes.len(), rows.len()),
                ));
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != self.snr_db.len() {
                    return Err(Error::invalid(
                        format!("{name}[{i}]"),
                        format!("expected {} values (one per snr_db point), got {}", self.snr_db.len(), row.len()),
                    ));
                }
                if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::invalid(format!("{name}[{i}]"), format!("probability {v} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }

    fn row(&self, n_samples: u32) -> Result<usize> {
        self.packet_sizes
            .iter()
            .position(|&s| s == n_samples)
            .ok_or_else(|| Error::UnknownPacketSize {
                requested: n_samples,
                available: self.packet_sizes.clone(),
            })
    }

    /// Linear interpolation in dB, clamped to the edge values outside the grid.
    /// Returns `(p_detect, p_false_alarm)`.
    pub fn lookup(&self, snr_db: f64, n_samples: u32) -> Result<(f64, f64)> {
        let row = self.row(n_samples)?;
        let pd = interpolate(&self.snr_db, &self.p_detect[row], snr_db);
        let pf = interpolate(&self.snr_db, &self.p_false_alarm[row], snr_db);
        Ok((pd.clamp(0.0, 1.0), pf.clamp(0.0, 1.0)))
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let last = xs.len() - 1;
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[last] {
        return ys[last];
    }
    let hi = xs.partition_point(|&v| v <= x);
    let lo = hi - 1;
    let w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + w * (ys[hi] - ys[lo])
}

/// [`DetectorModel`] backed by a [`DetectorTable`].
#[derive(Debug, Clone)]
pub struct TableDetector<'a> {
    pub table: &'a DetectorTable,
}

impl DetectorModel for TableDetector<'_> {
    fn p_detect(&self, snr: f64, n_samples: u32) -> Result<f64> {
        let snr_db = if snr > 0.0 { linear_to_db(snr) } else { f64::NEG_INFINITY };
        self.table.lookup(snr_db, n_samples).map(|(pd, _)| pd)
    }

    /// Noise-only decisions carry no SNR; average the exported per-bin rates.
    fn p_false_alarm(&self, n_samples: u32) -> Result<f64> {
        let row = &self.table.p_false_alarm[self.table.row(n_samples)?];
        Ok(row.iter().sum::<f64>() / row.len() as f64)
    }
}
