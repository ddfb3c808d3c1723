//! Energy detector over a Rayleigh block-fading channel.
//!
//! The test statistic is the received energy sum |y_k|^2 over `n` complex
//! samples, normalized by the noise power. Under noise only it is Gamma(n, 1),
//! so the false-alarm probability is the regularized upper incomplete gamma
//! Q(n, t). With a BPSK signal of instantaneous SNR g the statistic is a
//! scaled noncentral chi-square with 2n degrees of freedom and noncentrality
//! 2ng, i.e. a Poisson(ng) mixture of Gamma(n + j, 1).

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use super::DetectorModel;
use crate::error::{Error, Result};

/// Absolute tolerance of the fading-average quadrature.
const QUAD_TOL: f64 = 1e-7;
const QUAD_MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyThreshold {
    /// Threshold on the energy sum divided by the noise power.
    Normalized(f64),
    /// Threshold chosen per packet size to hit this false-alarm probability.
    FalseAlarm(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyDetector {
    pub threshold: EnergyThreshold,
}

impl EnergyDetector {
    pub fn with_false_alarm(p_fa: f64) -> Result<Self> {
        if !(p_fa > 0.0 && p_fa < 1.0) {
            return Err(Error::invalid("detector.p_false_alarm", format!("must be in (0, 1), got {p_fa}")));
        }
        Ok(EnergyDetector {
            threshold: EnergyThreshold::FalseAlarm(p_fa),
        })
    }

    /// Normalized threshold for `n_samples`.
    pub fn normalized_threshold(&self, n_samples: u32) -> Result<f64> {
        match self.threshold {
            EnergyThreshold::Normalized(t) => {
                if t >= 0.0 {
                    Ok(t)
                } else {
                    Err(Error::domain(format!("energy threshold must be >= 0, got {t}")))
                }
            }
            EnergyThreshold::FalseAlarm(p) => threshold_for_false_alarm(n_samples, p),
        }
    }
}

impl DetectorModel for EnergyDetector {
    fn p_detect(&self, snr: f64, n_samples: u32) -> Result<f64> {
        let t = self.normalized_threshold(n_samples)?;
        energy_detector_roc(t, n_samples, 1.0, snr).map(|(_, pd)| pd)
    }

    fn p_false_alarm(&self, n_samples: u32) -> Result<f64> {
        let t = self.normalized_threshold(n_samples)?;
        energy_detector_roc(t, n_samples, 1.0, 0.0).map(|(pf, _)| pf)
    }
}

fn upper_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

/// Detection probability conditioned on the instantaneous SNR `snr`.
fn detect_given_snr(n: u32, t: f64, snr: f64) -> f64 {
    let n = n as f64;
    if t <= 0.0 {
        return 1.0;
    }
    let mu = n * snr;
    if mu <= 0.0 {
        return upper_gamma_q(n, t);
    }
    if !mu.is_finite() {
        return 1.0;
    }
    let spread = 12.0 * mu.sqrt() + 12.0;
    let lo = (mu - spread).max(0.0).floor();
    let hi = (mu + spread).ceil();
    let ln_mu = mu.ln();
    let ln_t = t.ln();

    // Q(a + 1, t) = Q(a, t) + t^a e^-t / Gamma(a + 1)
    let mut a = n + lo;
    let mut q = upper_gamma_q(a, t);
    let mut j = lo;
    let mut sum = 0.0;
    while j <= hi {
        let weight = (j * ln_mu - mu - ln_gamma(j + 1.0)).exp();
        sum += weight * q;
        q += (a * ln_t - t - ln_gamma(a + 1.0)).exp();
        q = q.min(1.0);
        a += 1.0;
        j += 1.0;
    }
    sum.clamp(0.0, 1.0)
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    // halving the tolerance per level would otherwise drop below rounding noise
    if delta.abs() <= 15.0 * tol.max(1e-15) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "fading-average quadrature did not converge on [{a}, {b}] (residual {delta:e})"
        )));
    }
    Ok(adaptive_simpson(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)?
        + adaptive_simpson(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)?)
}

/// False-alarm and fading-averaged detection probability of an energy
/// detector with an absolute `threshold` on the energy sum.
///
/// Returns `(p_false_alarm, p_detect)`.
pub fn energy_detector_roc(threshold: f64, n_samples: u32, noise: f64, avg_snr: f64) -> Result<(f64, f64)> {
    if n_samples == 0 {
        return Err(Error::domain("energy detector needs at least one sample"));
    }
    if !(threshold >= 0.0) || !(noise > 0.0) || !(avg_snr >= 0.0) {
        return Err(Error::domain(format!(
            "energy detector: threshold={threshold}, noise={noise}, avg_snr={avg_snr}"
        )));
    }
    let t = threshold / noise;
    let pf = upper_gamma_q(n_samples as f64, t);
    if t == 0.0 {
        return Ok((1.0, 1.0));
    }
    if avg_snr == 0.0 {
        return Ok((pf, pf));
    }
    // E[P_d(g)] over g ~ Exp(avg_snr), as an integral over the fading CDF level.
    let f = |x: f64| {
        if x >= 1.0 {
            1.0
        } else {
            detect_given_snr(n_samples, t, -avg_snr * (-x).ln_1p())
        }
    };
    let (fa, fb) = (f(0.0), f(1.0));
    let (m, fm, whole) = simpson(&f, 0.0, fa, 1.0, fb);
    let pd = adaptive_simpson(&f, 0.0, fa, 1.0, fb, m, fm, whole, QUAD_TOL, QUAD_MAX_DEPTH)?;
    Ok((pf, pd.clamp(pf, 1.0)))
}

/// Normalized threshold t with Q(n, t) = p_fa.
pub fn threshold_for_false_alarm(n_samples: u32, p_fa: f64) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::domain("energy detector needs at least one sample"));
    }
    if !(p_fa > 0.0 && p_fa < 1.0) {
        return Err(Error::domain(format!("target false-alarm probability must be in (0, 1), got {p_fa}")));
    }
    let n = n_samples as f64;
    let mut hi = n.max(1.0);
    while upper_gamma_q(n, hi) > p_fa {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if upper_gamma_q(n, mid) > p_fa {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_fading;
    use crate::rng::{stream, StreamId};
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn single_sample_false_alarm_is_exponential_tail() {
        let (pf, _) = energy_detector_roc(1.0, 1, 1.0, 1.0).unwrap();
        assert!((pf - (-1.0f64).exp()).abs() < 1e-12);
        let (pf, _) = energy_detector_roc(2.0, 1, 2.0, 0.0).unwrap();
        assert!((pf - 0.367_879_441).abs() < 1e-9);
    }

    #[test]
    fn single_sample_false_alarm_monte_carlo() {
        let mut rng = stream(31, StreamId::Detection);
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                // unit-power complex noise
                0.5 * (re * re + im * im) > 1.0
            })
            .count();
        let p = (-1.0f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() <= 3.0 * se);
    }

    #[test]
    fn zero_threshold_always_busy() {
        assert_eq!(energy_detector_roc(0.0, 16, 1.0, 3.0).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn zero_snr_detects_like_noise() {
        let (pf, pd) = energy_detector_roc(20.0, 16, 1.0, 0.0).unwrap();
        assert_eq!(pf, pd);
    }

    #[test]
    fn single_sample_detection_matches_closed_form() {
        // n = 1: y = h s + n is CN(0, 1 + snr) after fading, so P_d = exp(-t / (1 + snr)).
        for (t, snr) in [(1.0, 1.0), (3.0, 0.5), (2.3, 10.0)] {
            let (_, pd) = energy_detector_roc(t, 1, 1.0, snr).unwrap();
            let exact = (-t / (1.0 + snr)).exp();
            assert!((pd - exact).abs() < 1e-6, "t={t} snr={snr}: {pd} vs {exact}");
        }
    }

    #[test]
    fn multi_sample_detection_monte_carlo() {
        // BPSK symbols through one Rayleigh block per packet, unit-power noise.
        let n_samples = 8u32;
        let snr = 1.0;
        let t = threshold_for_false_alarm(n_samples, 0.1).unwrap();
        let (pf, pd) = energy_detector_roc(t, n_samples, 1.0, snr).unwrap();
        assert!((pf - 0.1).abs() < 1e-9);

        let mut rng = stream(32, StreamId::Detection);
        let trials = 200_000;
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let mut hits = 0;
        for _ in 0..trials {
            let gain = sample_fading(&mut rng, snr).sqrt();
            let phase = rng.random::<f64>() * std::f64::consts::TAU;
            let (hr, hi) = (gain * phase.cos(), gain * phase.sin());
            let mut energy = 0.0;
            for _ in 0..n_samples {
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let nr: f64 = StandardNormal.sample(&mut rng);
                let ni: f64 = StandardNormal.sample(&mut rng);
                let yr = hr * s + half * nr;
                let yi = hi * s + half * ni;
                energy += yr * yr + yi * yi;
            }
            if energy > t {
                hits += 1;
            }
        }
        let emp = hits as f64 / trials as f64;
        let se = (pd * (1.0 - pd) / trials as f64).sqrt();
        assert!((emp - pd).abs() <= 3.0 * se, "{emp} vs {pd}");
    }

    #[test]
    fn detection_exceeds_false_alarm() {
        for n in [16, 32, 64, 128] {
            let t = threshold_for_false_alarm(n, 0.05).unwrap();
            for snr_db in [-5.0, 0.0, 5.0, 10.0] {
                let snr = crate::units::db_to_linear(snr_db);
                let (pf, pd) = energy_detector_roc(t, n, 1.0, snr).unwrap();
                assert!(pd >= pf, "n={n} snr={snr_db}");
            }
        }
    }

    #[test]
    fn roc_monotone_in_threshold() {
        let mut prev = (1.0, 1.0);
        for k in 1..40 {
            let t = k as f64 * 2.0;
            let (pf, pd) = energy_detector_roc(t, 32, 1.0, 1.5).unwrap();
            assert!(pf <= prev.0 + 1e-12 && pd <= prev.1 + 1e-9, "t={t}");
            prev = (pf, pd);
        }
    }

    #[test]
    fn more_samples_detect_better_at_fixed_false_alarm() {
        let det = EnergyDetector::with_false_alarm(0.05).unwrap();
        for snr_db in [-5.0, 0.0, 5.0] {
            let snr = crate::units::db_to_linear(snr_db);
            let pds: Vec<f64> = [16, 32, 64, 128].iter().map(|&n| det.p_detect(snr, n).unwrap()).collect();
            assert!(pds.windows(2).all(|w| w[0] <= w[1] + 1e-9), "{pds:?}");
        }
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(energy_detector_roc(1.0, 0, 1.0, 1.0).is_err());
        assert!(energy_detector_roc(1.0, 4, 0.0, 1.0).is_err());
    }
}
