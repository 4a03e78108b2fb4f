//! Order-stable reductions.

/// Pairwise (cascade) summation; the result depends only on the order of
/// the input, not on how the work was scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanError {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanError {
    /// Sample mean and standard error of the mean.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MeanError {
                mean: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mean = pairwise_sum(values) / n as f64;
        if n == 1 {
            return MeanError { mean, stderr: 0.0 };
        }
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        MeanError {
            mean,
            stderr: (var / n as f64).sqrt(),
        }
    }
}
