//! Confidence intervals for simulation output.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Number of batches used for the batch-means interval.
pub const BATCHES: usize = 32;

/// Half-width of the two-sided 99% interval for a binomial proportion.
pub fn binomial_half_width(p: f64, n: u64) -> Option<f64> {
    (n > 0).then(|| Z_99 * (p * (1.0 - p) / n as f64).sqrt())
}

/// Half-width of the two-sided 99% interval for the mean of a correlated
/// sequence, by non-overlapping batch means. The earliest samples that do not
/// fill a whole batch are dropped.
pub fn batch_means_half_width(samples: &[f64], batches: usize) -> Option<f64> {
    let n = samples.len();
    let k = batches.min(n);
    if k < 2 {
        return None;
    }
    let size = n / k;
    let means: Vec<f64> = samples[n - k * size..]
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let mean = means.iter().sum::<f64>() / k as f64;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (k - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (k - 1) as f64).ok()?.inverse_cdf(0.995);
    Some(t * (var / k as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_half_width(0.5, 0), None);
        let h = binomial_half_width(0.5, 10_000).unwrap();
        assert!((h - Z_99 * 0.005).abs() < 1e-15);
    }

    #[test]
    fn constant_sequence_has_zero_width() {
        assert_eq!(batch_means_half_width(&[2.0; 100], BATCHES), Some(0.0));
        assert_eq!(batch_means_half_width(&[2.0], BATCHES), None);
    }

    #[test]
    fn two_batches_use_student_t() {
        // batch means 1 and 3: sd = sqrt(2), t(0.995, 1) = 63.657
        let h = batch_means_half_width(&[1.0, 3.0], 2).unwrap();
        assert!((h - 63.656_741_162_871_6).abs() < 1e-6, "{h}");
    }

    #[test]
    fn iid_coverage_is_roughly_99_percent() {
        use rand::Rng;
        let mut rng = crate::rng::stream(9, crate::rng::StreamId::Traffic);
        let trials = 2000;
        let mut covered = 0;
        for _ in 0..trials {
            let xs: Vec<f64> = (0..320).map(|_| rng.random::<f64>()).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            if (mean - 0.5).abs() <= batch_means_half_width(&xs, BATCHES).unwrap() {
                covered += 1;
            }
        }
        let rate = covered as f64 / trials as f64;
        assert!((0.975..=1.0).contains(&rate), "{rate}");
    }
}
