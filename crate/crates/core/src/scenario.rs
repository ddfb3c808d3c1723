//! Experiment scenarios and their JSON representation.
//!
//! A scenario file is a JSON object whose sections may all be omitted; the
//! defaults are the baseline evaluation setting (unit noise, unit outage
//! threshold, unit jamming budget, unit service time, 0.6 transmit
//! probability, 0 dB transmitter SNR at the jammer, decoy 3 dB stronger).
//! Unknown fields are rejected.
//!
//! Powers are given in dB relative to the noise reference (or in dBm together
//! with an explicit noise floor); gains and thresholds are linear. The
//! jamming budget is linear so that 0 can be expressed.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adversary::{JammerConfig, JammerMode};
use crate::aoi::{JamWeight, TrafficConfig, UpdateModel};
use crate::channel::{ChannelConfig, Link, PowerConfig};
use crate::detection::{
    roc_from_model, DetectorTable, EnergyDetector, EnergyThreshold, IdlePrior, RocPair, TableDetector,
};
use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_relative_to_floor};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SLOTS: u64 = 1_000_000;

/// Placeholder operating point used when no detector is configured. Decoys
/// are easier to detect than real packets and both are easier to detect than
/// an idle channel is to mistake for busy.
pub const DEFAULT_ROC: RocPair = RocPair {
    p_m_t: 0.2,
    p_m_d: 0.08,
    p_f_t: 0.05,
    p_f_d: 0.05,
};

/// Modelling conventions where two readings of the model are possible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conventions {
    #[serde(default)]
    pub idle_prior: IdlePrior,
    #[serde(default)]
    pub jam_weight: JamWeight,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorSpec {
    Fixed(RocPair),
    Energy {
        detector: EnergyDetector,
        n_samples: u32,
    },
    Table {
        path: PathBuf,
        n_samples: u32,
        #[serde(skip)]
        table: Arc<DetectorTable>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub channel: ChannelConfig,
    pub power: PowerConfig,
    pub traffic: TrafficConfig,
    pub detector: DetectorSpec,
    pub jammer: JammerConfig,
    pub conventions: Conventions,
    pub seed: u64,
    pub n_slots: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        ScenarioFile::default()
            .resolve(None)
            .expect("built-in defaults are valid")
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.power.validate()?;
        self.traffic.validate()?;
        self.jammer.validate()?;
        if self.n_slots < 1 {
            return Err(Error::invalid("n_slots", "must be at least 1"));
        }
        if self.jammer.p_j_max != self.power.p_j_max {
            return Err(Error::invalid(
                "power.p_j_max",
                format!("jammer budget {} disagrees with power budget {}", self.jammer.p_j_max, self.power.p_j_max),
            ));
        }
        if let DetectorSpec::Fixed(roc) = &self.detector {
            roc.validate()?;
        }
        self.power.check_budget(self.traffic.q_t(), self.traffic.q_d())
    }

    /// Average SNR of the transmitter at the jammer.
    pub fn snr_at_jammer_real(&self) -> f64 {
        self.channel.h2 * self.power.p_t / self.channel.noise(Link::TxToJammer)
    }

    /// Average SNR of the decoy at the jammer.
    pub fn snr_at_jammer_decoy(&self) -> f64 {
        self.channel.h4 * self.power.p_d / self.channel.noise(Link::DecoyToJammer)
    }

    /// The jammer's operating point in this scenario.
    pub fn roc(&self) -> Result<RocPair> {
        let (snr_t, snr_d) = (self.snr_at_jammer_real(), self.snr_at_jammer_decoy());
        match &self.detector {
            DetectorSpec::Fixed(roc) => Ok(*roc),
            DetectorSpec::Energy { detector, n_samples } => roc_from_model(detector, *n_samples, snr_t, snr_d),
            DetectorSpec::Table { table, n_samples, .. } => {
                roc_from_model(&TableDetector { table }, *n_samples, snr_t, snr_d)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSpec {
    Shared(f64),
    PerLink([f64; 4]),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h4: Option<f64>,
    /// Decoy-to-jammer gain advantage over h2 when `h4` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoy_advantage_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_min: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_t_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_t_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_floor_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_d_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_t_max_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_j_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Alternative to `lambda`: fraction of blocks with a real packet, lambda * d.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<UpdateModel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Fixed,
    Energy,
    Table,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<DetectorKind>,
    // fixed
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_m_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_m_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_f_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_f_d: Option<f64>,
    // energy / table
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_false_alarm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JammerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<JammerMode>,
}

/// Scenario as written on disk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traffic: Option<TrafficSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jammer: Option<JammerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conventions: Option<Conventions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_slots: Option<u64>,
}

fn probability(field: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("probability must be in [0, 1], got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be finite, got {v}")))
    }
}

fn not_for_kind(kind: DetectorKind, field: &str, present: bool) -> Result<()> {
    if present {
        Err(Error::invalid(
            format!("detector.{field}"),
            format!("not applicable to the {kind:?} detector"),
        ))
    } else {
        Ok(())
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Ok(ScenarioFile::default());
        }
        Ok(serde_json::from_str(text)?)
    }

    /// Applies defaults and validates. Relative table paths are resolved
    /// against `base_dir`.
    pub fn resolve(&self, base_dir: Option<&Path>) -> Result<Scenario> {
        self.resolve_with_seed(base_dir, DEFAULT_SEED)
    }

    /// As [`resolve`](Self::resolve), with the seed used when the file has none.
    pub fn resolve_with_seed(&self, base_dir: Option<&Path>, default_seed: u64) -> Result<Scenario> {
        if let Some(v) = self.schema_version {
            if v != SCHEMA_VERSION {
                return Err(Error::invalid(
                    "schema_version",
                    format!("unsupported version {v} (expected {SCHEMA_VERSION})"),
                ));
            }
        }

        let ch = self.channel.clone().unwrap_or_default();
        let h2 = finite("channel.h2", ch.h2.unwrap_or(1.0))?;
        let alpha = ch.alpha.unwrap_or(1.0);
        let h3 = finite("channel.h3", ch.h3.unwrap_or(1.0))?;
        let h4 = match (ch.h4, ch.decoy_advantage_db) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid(
                    "channel.h4",
                    "give either h4 or decoy_advantage_db, not both",
                ))
            }
            (Some(h4), None) => h4,
            (None, adv) => h2 * db_to_linear(finite("channel.decoy_advantage_db", adv.unwrap_or(3.0))?),
        };
        let noise = match ch.noise.unwrap_or(NoiseSpec::Shared(1.0)) {
            NoiseSpec::Shared(n) => [n; 4],
            NoiseSpec::PerLink(n) => n,
        };
        let channel = ChannelConfig::from_alpha(h2, alpha, h3, h4, noise, ch.gamma_min.unwrap_or(1.0))?;

        let pw = self.power.clone().unwrap_or_default();
        let p_t_db = match (pw.p_t_db, pw.p_t_dbm, pw.noise_floor_dbm) {
            (Some(_), Some(_), _) => {
                return Err(Error::invalid("power.p_t_dbm", "give either p_t_db or p_t_dbm, not both"))
            }
            (_, Some(_), None) => {
                return Err(Error::invalid(
                    "power.noise_floor_dbm",
                    "required when the transmit power is given in dBm",
                ))
            }
            (_, Some(dbm), Some(floor)) => dbm_relative_to_floor(dbm, floor),
            (db, None, _) => db.unwrap_or(0.0),
        };
        let p_t_db = finite("power.p_t_db", p_t_db)?;
        let p_t = db_to_linear(p_t_db);
        let power = PowerConfig {
            p_t,
            p_d: pw.p_d_db.map(db_to_linear).unwrap_or(p_t),
            p_t_max: pw.p_t_max_db.map(db_to_linear),
            p_j_max: pw.p_j_max.unwrap_or(1.0),
        };
        power.validate()?;

        let tr = self.traffic.clone().unwrap_or_default();
        let d = tr.d.unwrap_or(1.0);
        let lambda = match (tr.lambda, tr.q_t) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid("traffic.q_t", "give either lambda or q_t, not both"))
            }
            (Some(l), None) => l,
            (None, q_t) => probability("traffic.q_t", q_t.unwrap_or(0.6))? / d,
        };
        let traffic = TrafficConfig {
            lambda,
            q: probability("traffic.q", tr.q.unwrap_or(0.0))?,
            d,
            model: tr.model.unwrap_or_default(),
        };

        let detector = self.resolve_detector(base_dir)?;
        let jammer = JammerConfig {
            p_j_max: power.p_j_max,
            mode: self.jammer.as_ref().and_then(|j| j.mode).unwrap_or_default(),
        };

        let scenario = Scenario {
            channel,
            power,
            traffic,
            detector,
            jammer,
            conventions: self.conventions.unwrap_or_default(),
            seed: self.seed.unwrap_or(default_seed),
            n_slots: self.n_slots.unwrap_or(DEFAULT_SLOTS),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn resolve_detector(&self, base_dir: Option<&Path>) -> Result<DetectorSpec> {
        let det = self.detector.clone().unwrap_or_default();
        let kind = det.kind.unwrap_or(DetectorKind::Fixed);
        match kind {
            DetectorKind::Fixed => {
                not_for_kind(kind, "n_samples", det.n_samples.is_some())?;
                not_for_kind(kind, "p_false_alarm", det.p_false_alarm.is_some())?;
                not_for_kind(kind, "threshold", det.threshold.is_some())?;
                not_for_kind(kind, "path", det.path.is_some())?;
                let roc = RocPair {
                    p_m_t: probability("detector.p_m_t", det.p_m_t.unwrap_or(DEFAULT_ROC.p_m_t))?,
                    p_m_d: probability("detector.p_m_d", det.p_m_d.unwrap_or(DEFAULT_ROC.p_m_d))?,
                    p_f_t: probability("detector.p_f_t", det.p_f_t.unwrap_or(DEFAULT_ROC.p_f_t))?,
                    p_f_d: probability("detector.p_f_d", det.p_f_d.unwrap_or(DEFAULT_ROC.p_f_d))?,
                };
                Ok(DetectorSpec::Fixed(roc))
            }
            DetectorKind::Energy | DetectorKind::Table => {
                for (name, present) in [
                    ("p_m_t", det.p_m_t.is_some()),
                    ("p_m_d", det.p_m_d.is_some()),
                    ("p_f_t", det.p_f_t.is_some()),
                    ("p_f_d", det.p_f_d.is_some()),
                ] {
                    not_for_kind(kind, name, present)?;
                }
                let n_samples = det.n_samples.unwrap_or(64);
                if n_samples == 0 {
                    return Err(Error::invalid("detector.n_samples", "must be at least 1"));
                }
                if kind == DetectorKind::Energy {
                    not_for_kind(kind, "path", det.path.is_some())?;
                    let threshold = match (det.p_false_alarm, det.threshold) {
                        (Some(_), Some(_)) => {
                            return Err(Error::invalid(
                                "detector.threshold",
                                "give either threshold or p_false_alarm, not both",
                            ))
                        }
                        (None, Some(t)) if t >= 0.0 => EnergyThreshold::Normalized(t),
                        (None, Some(t)) => {
                            return Err(Error::invalid("detector.threshold", format!("must be >= 0, got {t}")))
                        }
                        (p, None) => EnergyDetector::with_false_alarm(p.unwrap_or(0.1))?.threshold,
                    };
                    return Ok(DetectorSpec::Energy {
                        detector: EnergyDetector { threshold },
                        n_samples,
                    });
                }
                not_for_kind(kind, "p_false_alarm", det.p_false_alarm.is_some())?;
                not_for_kind(kind, "threshold", det.threshold.is_some())?;
                let rel = det
                    .path
                    .ok_or_else(|| Error::invalid("detector.path", "required for the table detector"))?;
                let path = match base_dir {
                    Some(dir) if rel.is_relative() => dir.join(&rel),
                    _ => rel,
                };
                let table = DetectorTable::load(&path)?;
                if !table.packet_sizes.contains(&n_samples) {
                    return Err(Error::UnknownPacketSize {
                        requested: n_samples,
                        available: table.packet_sizes.clone(),
                    });
                }
                Ok(DetectorSpec::Table {
                    path,
                    n_samples,
                    table: Arc::new(table),
                })
            }
        }
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    load_scenario_with_seed(path, DEFAULT_SEED)
}

/// As [`load_scenario`], with the seed used when the file has none.
pub fn load_scenario_with_seed(path: impl AsRef<Path>, default_seed: u64) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioFile::from_json(&text)?.resolve_with_seed(path.parent(), default_seed)
}
