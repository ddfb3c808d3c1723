//! Monte Carlo simulation of the transmitter, decoy, jammer and receiver.
//!
//! Time is divided into blocks. A real packet occupies one block of length
//! `d`; the jammer senses each block once and, if it declares it busy,
//! transmits for the whole block.
//!
//! * Queued updates (M1) arrive as a Poisson process into a FIFO buffer. When
//!   the buffer is non-empty the head is served in the next block. When it is
//!   empty the channel stays idle until the next arrival or for one block,
//!   whichever is shorter, and the decoy fills that idle period with
//!   probability `q`. This is an exact M/D/1 queue.
//! * Just-in-time updates (M2) run on a slot grid of length `d`: each slot a
//!   fresh update is generated and sent with probability `lambda * d`,
//!   otherwise the slot is idle and the decoy fills it with probability `q`.
//!
//! Lost packets are dropped. Random draws come from one stream per source so
//! that runs that differ only in decoy or detector settings see the same
//! arrivals and fading (common random numbers).

mod stats;
mod tracker;

use std::collections::VecDeque;
use std::io::Write;

use log::warn;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

pub use stats::{batch_means_half_width, binomial_half_width, BATCHES, Z_99};
pub use tracker::AoiTracker;

use crate::adversary::{Jammer, JammerMode, SlotTruth};
use crate::aoi::{closed_loop_paoi, AnalyticResult, JamWeight, UpdateModel};
use crate::channel::{sample_fading, Link};
use crate::detection::{prob_jammer_declares_busy, RocPair};
use crate::error::{Error, Result};
use crate::rng::{stream, Stream, StreamId};
use crate::scenario::Scenario;

/// Fraction of the horizon discarded as warm-up.
pub const BURN_IN_FRACTION: f64 = 0.01;

/// Header of the block trace written by [`run_traced`].
pub const TRACE_HEADER: &str = "slot,truth,jam,outage,qlen,age";

/// One block of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRecord {
    pub slot: u64,
    pub start: f64,
    pub duration: f64,
    pub truth: SlotTruth,
    pub jammed: bool,
    /// Jamming power used in this block, 0 when silent.
    pub jam_power: f64,
    /// Fading gains (transmitter to receiver, jammer to receiver) of a real block.
    pub fading: Option<(f64, f64)>,
    /// Only set for real blocks.
    pub outage: Option<bool>,
    /// Updates waiting after the block.
    pub qlen: usize,
    /// Generation time of the packet sent in the block.
    pub generated: Option<f64>,
    /// Age at the receiver at the end of the block.
    pub age: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AoiStats {
    /// Mean of the peak-age samples after burn-in; absent without deliveries.
    pub mean_paoi: Option<f64>,
    pub paoi_ci: Option<f64>,
    pub time_avg_aoi: Option<f64>,
    /// Fraction of transmitted real packets lost to outage.
    pub loss_rate: f64,
    pub loss_ci: Option<f64>,
    pub delivered: u64,
    pub transmitted: u64,
    pub arrivals: u64,
    pub drops: u64,
    pub final_queue: u64,
    /// Real packets during which the jammer transmitted.
    pub jammed_real: u64,
    pub blocks: u64,
    pub simulated_time: f64,
    /// Jammer energy divided by simulated time.
    pub jammer_avg_power: f64,
    /// Fraction of time the jammer was transmitting.
    pub jammer_active_fraction: f64,
    /// Per-activation power of the oracle jammer (0 when dormant or adaptive).
    pub p_j: f64,
    pub peak_samples: u64,
}

struct Engine<'a, F> {
    scenario: &'a Scenario,
    roc: RocPair,
    jammer: Jammer,
    tracker: AoiTracker,
    detection: Stream,
    decoy: Stream,
    fading: Stream,
    observer: F,
    blocks: u64,
    transmitted: u64,
    delivered: u64,
    lost: u64,
    jammed_real: u64,
}

impl<F: FnMut(&SlotRecord) -> Result<()>> Engine<'_, F> {
    fn idle_truth(&mut self) -> SlotTruth {
        let u: f64 = self.decoy.random();
        if u < self.scenario.traffic.q {
            SlotTruth::Decoy
        } else {
            SlotTruth::Idle
        }
    }

    fn block(&mut self, start: f64, duration: f64, truth: SlotTruth, generated: Option<f64>, qlen: usize) -> Result<()> {
        let power = self.jammer.observe(truth, &self.roc, duration, &mut self.detection);
        let end = start + duration;
        let mut fading = None;
        let mut outage = None;
        if truth == SlotTruth::Real {
            let ch = &self.scenario.channel;
            // both gains are drawn every time to keep the fading stream aligned
            let g1 = sample_fading(&mut self.fading, ch.h1);
            let g3 = sample_fading(&mut self.fading, ch.h3);
            let interference = g3 * power.unwrap_or(0.0);
            let sinr = g1 * self.scenario.power.p_t / (ch.noise(Link::TxToRx) + interference);
            let lost = sinr < ch.gamma_min;
            self.transmitted += 1;
            if power.is_some() {
                self.jammed_real += 1;
            }
            if lost {
                self.lost += 1;
            } else {
                self.delivered += 1;
                let t_gen = generated.expect("real blocks carry a packet");
                let informative = self.tracker.record_delivery(t_gen, end)?;
                debug_assert!(informative, "FIFO delivery cannot be stale");
            }
            fading = Some((g1, g3));
            outage = Some(lost);
        }
        self.tracker.advance(end)?;
        let record = SlotRecord {
            slot: self.blocks,
            start,
            duration,
            truth,
            jammed: power.is_some(),
            jam_power: power.unwrap_or(0.0),
            fading,
            outage,
            qlen,
            generated,
            age: self.tracker.age(),
        };
        self.blocks += 1;
        (self.observer)(&record)
    }
}

/// Runs the scenario and returns summary statistics.
pub fn run(scenario: &Scenario) -> Result<AoiStats> {
    run_with(scenario, |_| Ok(()))
}

/// Runs the scenario and writes one CSV line per block to `out`, after a
/// [`TRACE_HEADER`] line.
pub fn run_traced<W: Write>(scenario: &Scenario, out: W) -> Result<AoiStats> {
    let mut out = std::io::BufWriter::new(out);
    let io_err = |e| Error::io("<trace>", e);
    writeln!(out, "{TRACE_HEADER}").map_err(io_err)?;
    let stats = run_with(scenario, |r| {
        let outage = match r.outage {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.slot,
            r.truth.as_str(),
            u8::from(r.jammed),
            outage,
            r.qlen,
            r.age
        )
        .map_err(io_err)
    })?;
    out.flush().map_err(io_err)?;
    Ok(stats)
}

/// Runs the scenario, handing every block to `observer`.
pub fn run_with<F>(scenario: &Scenario, observer: F) -> Result<AoiStats>
where
    F: FnMut(&SlotRecord) -> Result<()>,
{
    scenario.validate()?;
    let roc = scenario.roc()?;
    let traffic = &scenario.traffic;
    if traffic.model == UpdateModel::M1 && traffic.rho() >= 1.0 {
        warn!("lambda * d = {} >= 1: the update queue is unstable", traffic.rho());
    }
    let p_busy = prob_jammer_declares_busy(traffic.q_t(), traffic.q_d(), &roc, scenario.conventions.idle_prior)?;
    let jammer = Jammer::new(scenario.jammer, p_busy)?;
    let horizon = scenario.n_slots as f64 * traffic.d;
    let seed = scenario.seed;

    let mut engine = Engine {
        scenario,
        roc,
        jammer,
        tracker: AoiTracker::new(BURN_IN_FRACTION * horizon),
        detection: stream(seed, StreamId::Detection),
        decoy: stream(seed, StreamId::Decoy),
        fading: stream(seed, StreamId::Fading),
        observer,
        blocks: 0,
        transmitted: 0,
        delivered: 0,
        lost: 0,
        jammed_real: 0,
    };
    let mut arrivals_rng = stream(seed, StreamId::Traffic);
    let d = traffic.d;
    let mut arrivals = 0u64;
    let mut final_queue = 0u64;

    match traffic.model {
        UpdateModel::M1 => {
            let exp = Exp::new(traffic.lambda).map_err(|e| Error::domain(e.to_string()))?;
            let mut next = exp.sample(&mut arrivals_rng);
            let mut queue: VecDeque<f64> = VecDeque::new();
            let mut admit = |queue: &mut VecDeque<f64>, until: f64, next: &mut f64, arrivals: &mut u64| {
                while *next <= until && *next < horizon {
                    queue.push_back(*next);
                    *arrivals += 1;
                    *next += exp.sample(&mut arrivals_rng);
                }
            };
            let mut t = 0.0;
            admit(&mut queue, t, &mut next, &mut arrivals);
            while t < horizon {
                if let Some(gen) = queue.pop_front() {
                    admit(&mut queue, t + d, &mut next, &mut arrivals);
                    engine.block(t, d, SlotTruth::Real, Some(gen), queue.len())?;
                    t += d;
                } else {
                    let end = (t + d).min(next);
                    let truth = engine.idle_truth();
                    admit(&mut queue, end, &mut next, &mut arrivals);
                    engine.block(t, end - t, truth, None, queue.len())?;
                    t = end;
                }
            }
            admit(&mut queue, f64::INFINITY, &mut next, &mut arrivals);
            final_queue = queue.len() as u64;
        }
        UpdateModel::M2 => {
            let p_gen = traffic.rho();
            for k in 0..scenario.n_slots {
                let t = k as f64 * d;
                let u: f64 = arrivals_rng.random();
                if u < p_gen {
                    arrivals += 1;
                    engine.block(t, d, SlotTruth::Real, Some(t), 0)?;
                } else {
                    let truth = engine.idle_truth();
                    engine.block(t, d, truth, None, 0)?;
                }
            }
        }
    }

    let tracker = &engine.tracker;
    let transmitted = engine.transmitted;
    let loss_rate = if transmitted > 0 {
        engine.lost as f64 / transmitted as f64
    } else {
        0.0
    };
    let state = engine.jammer.state();
    let p_j = match scenario.jammer.mode {
        JammerMode::Oracle => engine.jammer.oracle_power().value(),
        JammerMode::Adaptive => 0.0,
    };
    Ok(AoiStats {
        mean_paoi: tracker.mean_peak(),
        paoi_ci: batch_means_half_width(tracker.peaks(), BATCHES),
        time_avg_aoi: tracker.time_average(),
        loss_rate,
        loss_ci: binomial_half_width(loss_rate, transmitted),
        delivered: engine.delivered,
        transmitted,
        arrivals,
        drops: engine.lost,
        final_queue,
        jammed_real: engine.jammed_real,
        blocks: engine.blocks,
        simulated_time: tracker.now(),
        jammer_avg_power: engine.jammer.average_power(),
        jammer_active_fraction: if state.observed_time > 0.0 {
            state.active_time / state.observed_time
        } else {
            0.0
        },
        p_j,
        peak_samples: tracker.peaks().len() as u64,
    })
}

/// Closed form and simulation of the same scenario side by side.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub simulated: AoiStats,
    /// Absent when the closed form does not model the scenario.
    pub analytic: Option<AnalyticResult>,
    pub not_applicable: Option<String>,
    /// |sim - analytic| / analytic for the mean peak age.
    pub relative_error: Option<f64>,
    /// Whether the analytic peak age lies in the simulation's 99% interval.
    pub within_ci: Option<bool>,
}

pub fn compare_with_analytic(scenario: &Scenario) -> Result<Comparison> {
    let reason = match (scenario.jammer.mode, scenario.conventions.jam_weight) {
        (JammerMode::Adaptive, _) => Some("analytic not applicable: adaptive jammer"),
        (_, JamWeight::Joint) => Some("analytic not applicable: joint jam weight does not describe per-packet loss"),
        _ => None,
    };
    let simulated = run(scenario)?;
    if let Some(reason) = reason {
        return Ok(Comparison {
            simulated,
            analytic: None,
            not_applicable: Some(reason.to_string()),
            relative_error: None,
            within_ci: None,
        });
    }
    let analytic = closed_loop_paoi(scenario)?;
    let (relative_error, within_ci) = match simulated.mean_paoi {
        Some(sim) => (
            Some((sim - analytic.paoi).abs() / analytic.paoi),
            simulated.paoi_ci.map(|ci| (sim - analytic.paoi).abs() <= ci),
        ),
        None => (None, None),
    };
    Ok(Comparison {
        simulated,
        analytic: Some(analytic),
        not_applicable: None,
        relative_error,
        within_ci,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aoi::{paoi_jit, paoi_md1};
    use crate::detection::RocPair;
    use crate::scenario::DetectorSpec;

    fn scenario(model: UpdateModel, lambda: f64, n_slots: u64) -> Scenario {
        let mut s = Scenario::default();
        s.traffic.model = model;
        s.traffic.lambda = lambda;
        s.n_slots = n_slots;
        s
    }

    /// Outage threshold that makes every packet fail with probability `p`
    /// when the jammer has no power.
    fn force_loss(s: &mut Scenario, p: f64) {
        s.jammer.p_j_max = 0.0;
        s.power.p_j_max = 0.0;
        s.channel.gamma_min = if p == 0.0 { f64::MIN_POSITIVE } else { -(-p).ln_1p() };
    }

    #[test]
    fn lossless_jit_at_full_rate_alternates_deterministically() {
        let mut s = scenario(UpdateModel::M2, 1.0, 10_000);
        force_loss(&mut s, 0.0);
        let st = run(&s).unwrap();
        assert_eq!(st.mean_paoi, Some(2.0));
        assert_eq!(st.paoi_ci, Some(0.0));
        assert_eq!(st.loss_rate, 0.0);
        assert_eq!(st.delivered, 10_000);
    }

    #[test]
    fn forced_loss_matches_md1() {
        let mut s = scenario(UpdateModel::M1, 0.6, 1_000_000);
        force_loss(&mut s, 0.5);
        let st = run(&s).unwrap();
        let expected = paoi_md1(0.6, 1.0, 0.5).unwrap();
        let m = st.mean_paoi.unwrap();
        assert!((m - expected).abs() / expected < 0.01, "{m} vs {expected}");
        assert!((st.loss_rate - 0.5).abs() <= st.loss_ci.unwrap());
    }

    #[test]
    fn forced_loss_matches_jit() {
        let mut s = scenario(UpdateModel::M2, 0.6, 1_000_000);
        force_loss(&mut s, 0.5);
        let st = run(&s).unwrap();
        let expected = paoi_jit(0.6, 1.0, 0.5).unwrap();
        let m = st.mean_paoi.unwrap();
        assert!((m - expected).abs() / expected < 0.01, "{m} vs {expected}");
    }

    #[test]
    fn repeated_runs_are_identical() {
        let mut s = scenario(UpdateModel::M1, 0.6, 50_000);
        s.traffic.q = 0.4;
        assert_eq!(run(&s).unwrap(), run(&s).unwrap());
    }

    #[test]
    fn queue_is_conserved() {
        for lambda in [0.3, 0.9, 1.2] {
            let s = scenario(UpdateModel::M1, lambda, 20_000);
            let st = run(&s).unwrap();
            assert_eq!(st.arrivals, st.delivered + st.drops + st.final_queue);
        }
        let st = run(&scenario(UpdateModel::M2, 0.4, 20_000)).unwrap();
        assert_eq!(st.arrivals, st.delivered + st.drops);
        assert_eq!(st.final_queue, 0);
    }

    #[test]
    fn decoys_leave_queue_and_age_alone() {
        let mut s = scenario(UpdateModel::M1, 0.6, 20_000);
        s.jammer.p_j_max = 0.0;
        s.power.p_j_max = 0.0;
        let without = run(&s).unwrap();
        s.traffic.q = 0.8;
        let with = run(&s).unwrap();
        assert_eq!(without.arrivals, with.arrivals);
        assert_eq!(without.delivered, with.delivered);
        assert_eq!(without.mean_paoi, with.mean_paoi);
        assert_eq!(without.time_avg_aoi, with.time_avg_aoi);
    }

    #[test]
    fn decoys_never_hurt_on_a_common_sample_path() {
        let mut s = scenario(UpdateModel::M1, 0.6, 100_000);
        s.detector = DetectorSpec::Fixed(RocPair::new(0.2, 0.1, 0.1, 0.0).unwrap());
        let without = run(&s).unwrap();
        s.traffic.q = 0.7;
        let with = run(&s).unwrap();
        assert!(with.drops <= without.drops);
        assert!(with.mean_paoi.unwrap() <= without.mean_paoi.unwrap());
    }

    #[test]
    fn trace_has_one_line_per_block() {
        let mut s = scenario(UpdateModel::M1, 0.5, 200);
        s.traffic.q = 0.5;
        let mut buf = Vec::new();
        let st = run_traced(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len() as u64, st.blocks);
        for row in rows {
            let cols: Vec<&str> = row.split(',').collect();
            assert_eq!(cols.len(), 6);
            assert_eq!(cols[3].is_empty(), cols[1] != "real");
        }
    }

    #[test]
    fn unstable_queue_still_runs() {
        let st = run(&scenario(UpdateModel::M1, 1.5, 10_000)).unwrap();
        assert!(st.final_queue > 0);
    }

    #[test]
    fn adaptive_jammer_is_not_compared() {
        let mut s = scenario(UpdateModel::M1, 0.6, 10_000);
        s.jammer.mode = JammerMode::Adaptive;
        let c = compare_with_analytic(&s).unwrap();
        assert!(c.analytic.is_none());
        assert!(c.not_applicable.unwrap().contains("not applicable"));
    }

    #[test]
    fn invalid_scenario_rejected_before_running() {
        let mut s = scenario(UpdateModel::M1, 0.6, 10);
        s.n_slots = 0;
        let mut called = false;
        assert!(run_with(&s, |_| {
            called = true;
            Ok(())
        })
        .is_err());
        assert!(!called);
    }
}
