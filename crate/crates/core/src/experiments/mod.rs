//! Parameter sweeps over the analytic and simulation engines.
//!
//! A sweep takes a base scenario, a dotted path into the scenario file
//! (`traffic.q`, `power.p_t_db`, ...), and a grid of values. Optional series
//! apply further overrides on top of each grid point, e.g. to run a no-decoy
//! control next to the decoy curve. Every series sees the same simulation
//! seeds at a given grid index, so series differ only in their settings.

mod output;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub use output::{format_sig, Metric, ResultRow, ResultTable};

use crate::aoi::closed_loop_paoi;
use crate::error::{Error, Result};
use crate::rng::mix_seed;
use crate::scenario::{Scenario, ScenarioFile, DEFAULT_SEED};
use crate::sim::{self, batch_means_half_width, AoiStats};

/// Names of the bundled figure recipes.
pub const RECIPES: &[&str] = &["fig4a", "fig4b", "fig5a", "fig5b", "fig6"];

/// The bundled sweep definition called `name`.
pub fn recipe(name: &str) -> Option<SweepSpec> {
    let text = match name {
        "fig4a" => include_str!("recipes/fig4a.json"),
        "fig4b" => include_str!("recipes/fig4b.json"),
        "fig5a" => include_str!("recipes/fig5a.json"),
        "fig5b" => include_str!("recipes/fig5b.json"),
        "fig6" => include_str!("recipes/fig6.json"),
        _ => return None,
    };
    Some(SweepSpec::from_json(text).expect("bundled recipes parse"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    Simulation,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Simulation => "simulation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engines {
    Analytic,
    Simulation,
    #[default]
    Both,
}

impl Engines {
    pub fn list(self) -> &'static [Engine] {
        match self {
            Engines::Analytic => &[Engine::Analytic],
            Engines::Simulation => &[Engine::Simulation],
            Engines::Both => &[Engine::Analytic, Engine::Simulation],
        }
    }
}

/// Evenly spaced grid including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>> {
        let Range { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step == 0.0 {
            return Err(Error::invalid("range", "start, stop and step must be finite with step != 0"));
        }
        let span = (stop - start) / step;
        if span < -1e-9 {
            return Err(Error::invalid("range", "step points away from stop"));
        }
        let n = (span + 1e-9).floor() as usize + 1;
        // round away binary noise such as 0.30000000000000004
        Ok((0..n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseScenario {
    Path(PathBuf),
    Inline(ScenarioFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub name: String,
    /// Dotted-path overrides applied after the swept value.
    #[serde(default)]
    pub set: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseScenario>,
    pub parameter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<Range>,
    #[serde(default)]
    pub engines: Engines,
    #[serde(default = "one")]
    pub replications: u32,
    /// Defaults to the base scenario's seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<Series>,
    /// Quantity drawn in SVG output.
    #[serde(default)]
    pub metric: Metric,
    /// Directory against which a relative base path is resolved.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn one() -> u32 {
    1
}

/// Path groups that describe the same quantity; setting one clears the others.
const ALIASES: &[&[&str]] = &[
    &["traffic.lambda", "traffic.q_t"],
    &["power.p_t_db", "power.p_t_dbm"],
    &["channel.h4", "channel.decoy_advantage_db"],
    &["detector.p_false_alarm", "detector.threshold"],
];

fn remove_path(doc: &mut Value, path: &str) {
    let mut parts: Vec<&str> = path.split('.').collect();
    let Some(leaf) = parts.pop() else { return };
    let mut node = doc;
    for p in parts {
        match node.get_mut(p) {
            Some(next) => node = next,
            None => return,
        }
    }
    if let Some(obj) = node.as_object_mut() {
        obj.remove(leaf);
    }
}

/// Sets a dotted path in a JSON document, creating intermediate objects.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(Error::invalid("parameter", format!("malformed path {path:?}")));
    }
    for group in ALIASES {
        if group.contains(&path) {
            for other in group.iter().filter(|p| **p != path) {
                remove_path(doc, other);
            }
        }
    }
    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::invalid("parameter", format!("{} is not an object", parts[..i].join(".")))
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("path has at least one segment")
}

/// Integral values are written as integers so that count fields accept them.
fn number(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        Value::from(v as i64)
    } else {
        Value::from(v)
    }
}

#[derive(Debug, Clone, Copy)]
struct Task<'a> {
    series: Option<&'a Series>,
    index: usize,
    value: f64,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = Self::from_json(&text)?;
        spec.base_dir = path.parent().map(Path::to_path_buf);
        Ok(spec)
    }

    /// The value grid; non-empty and strictly monotone.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let grid = match (&self.values, &self.range) {
            (Some(_), Some(_)) => return Err(Error::invalid("values", "give either values or range, not both")),
            (Some(v), None) => v.clone(),
            (None, Some(r)) => r.values()?,
            (None, None) => return Err(Error::invalid("values", "a value grid (values or range) is required")),
        };
        if grid.is_empty() {
            return Err(Error::invalid("values", "grid is empty"));
        }
        if grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "grid values must be finite"));
        }
        let increasing = grid.windows(2).all(|w| w[1] > w[0]);
        let decreasing = grid.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::invalid("values", "grid must be strictly monotone"));
        }
        Ok(grid)
    }

    fn base_document(&self) -> Result<(Value, Option<PathBuf>)> {
        match &self.base {
            None => Ok((Value::Object(Map::new()), self.base_dir.clone())),
            Some(BaseScenario::Inline(file)) => Ok((serde_json::to_value(file)?, self.base_dir.clone())),
            Some(BaseScenario::Path(rel)) => {
                let path = match &self.base_dir {
                    Some(dir) if rel.is_relative() => dir.join(rel),
                    _ => rel.clone(),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let file = ScenarioFile::from_json(&text)?;
                Ok((serde_json::to_value(&file)?, path.parent().map(Path::to_path_buf)))
            }
        }
    }

    /// Checks the grid, the replication count and that every path names a
    /// scenario field.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        let (base, _) = self.base_document()?;
        let mut doc = base;
        set_path(&mut doc, &self.parameter, number(grid[0]))?;
        for s in &self.series {
            for (path, value) in &s.set {
                set_path(&mut doc, path, value.clone())?;
            }
        }
        serde_json::from_value::<ScenarioFile>(doc).map_err(|e| {
            Error::invalid("parameter", format!("not a scenario field: {e}"))
        })?;
        Ok(())
    }

    fn scenario_at(&self, base: &Value, base_dir: Option<&Path>, task: &Task, default_seed: u64) -> Result<Scenario> {
        let mut doc = base.clone();
        set_path(&mut doc, &self.parameter, number(task.value))?;
        if let Some(series) = task.series {
            for (path, value) in &series.set {
                set_path(&mut doc, path, value.clone())?;
            }
        }
        let file: ScenarioFile = serde_json::from_value(doc)?;
        file.resolve_with_seed(base_dir, default_seed)
    }
}

struct Measures {
    p_busy: f64,
    p_j: f64,
    p_loss: f64,
    paoi: Option<f64>,
    paoi_ci: Option<f64>,
    jammer_avg_power: f64,
}

fn analytic_point(scenario: &Scenario) -> Result<Measures> {
    let r = closed_loop_paoi(scenario)?;
    Ok(Measures {
        p_busy: r.p_busy,
        p_j: r.p_j,
        p_loss: r.p_loss,
        paoi: Some(r.paoi),
        paoi_ci: None,
        jammer_avg_power: r.p_busy * r.p_j,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn simulation_point(scenario: &Scenario, index: usize, replications: u32, seed: u64) -> Result<Measures> {
    let runs: Vec<AoiStats> = (0..replications)
        .map(|r| {
            let mut s = scenario.clone();
            s.seed = mix_seed(mix_seed(seed, index as u64), r as u64);
            sim::run(&s)
        })
        .collect::<Result<_>>()?;
    let pick = |f: fn(&AoiStats) -> f64| mean(&runs.iter().map(f).collect::<Vec<_>>());
    let paoi_runs: Option<Vec<f64>> = runs.iter().map(|s| s.mean_paoi).collect();
    let (paoi, ci) = match (&paoi_runs, runs.len()) {
        (Some(p), 1) => (Some(p[0]), runs[0].paoi_ci),
        (Some(p), _) => (Some(mean(p)), batch_means_half_width(p, p.len())),
        (None, _) => (None, None),
    };
    Ok(Measures {
        p_busy: pick(|s| s.jammer_active_fraction),
        p_j: pick(|s| s.p_j),
        p_loss: pick(|s| s.loss_rate),
        paoi,
        paoi_ci: ci,
        jammer_avg_power: pick(|s| s.jammer_avg_power),
    })
}

/// Runs every (series, grid value, engine) combination. Rows are ordered by
/// series, then grid value, then engine.
pub fn run_sweep(spec: &SweepSpec) -> Result<ResultTable> {
    run_sweep_with_seed(spec, DEFAULT_SEED)
}

/// As [`run_sweep`], with the seed used when neither the spec nor the base
/// scenario sets one.
pub fn run_sweep_with_seed(spec: &SweepSpec, default_seed: u64) -> Result<ResultTable> {
    spec.validate()?;
    let grid = spec.grid()?;
    let (base, base_dir) = spec.base_document()?;
    let base_seed = match spec.seed {
        Some(s) => s,
        None => ScenarioFile::deserialize(&base)?.seed.unwrap_or(default_seed),
    };
    let series: Vec<Option<&Series>> = if spec.series.is_empty() {
        vec![None]
    } else {
        spec.series.iter().map(Some).collect()
    };
    let tasks: Vec<(Task, Engine)> = series
        .iter()
        .flat_map(|s| {
            grid.iter().enumerate().flat_map(move |(index, &value)| {
                spec.engines.list().iter().map(move |&e| (Task { series: *s, index, value }, e))
            })
        })
        .collect();

    let rows: Vec<Result<ResultRow>> = tasks
        .par_iter()
        .map(|(task, engine)| {
            let point = || -> Result<ResultRow> {
                let scenario = spec.scenario_at(&base, base_dir.as_deref(), task, base_seed)?;
                let m = match engine {
                    Engine::Analytic => analytic_point(&scenario)?,
                    Engine::Simulation => simulation_point(&scenario, task.index, spec.replications, base_seed)?,
                };
                Ok(ResultRow {
                    swept_value: task.value,
                    engine: *engine,
                    p_busy: m.p_busy,
                    p_j: m.p_j,
                    p_loss: m.p_loss,
                    paoi: m.paoi,
                    paoi_ci: m.paoi_ci,
                    jammer_avg_power: m.jammer_avg_power,
                    series: task.series.map(|s| s.name.clone()).unwrap_or_default(),
                })
            };
            point().map_err(|e| Error::SweepPoint {
                parameter: match task.series {
                    Some(s) => format!("{} (series {})", spec.parameter, s.name),
                    None => spec.parameter.clone(),
                },
                value: task.value,
                source: Box::new(e),
            })
        })
        .collect();

    Ok(ResultTable {
        parameter: spec.parameter.clone(),
        title: spec.title.clone(),
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}
