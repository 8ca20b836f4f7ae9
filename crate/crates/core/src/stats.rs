//! Summary statistics over per-commit timings.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

/// Quantile of sorted data by linear interpolation between closest ranks
/// (`h = (n - 1) p`).
pub fn quantile(sorted: &[u64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let (a, b) = (sorted[lo] as f64, sorted[hi] as f64);
    a + (h - lo as f64) * (b - a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct TimingStats {
    pub count: usize,
    pub min_ns: u64,
    pub q1_ns: f64,
    pub median_ns: f64,
    pub q3_ns: f64,
    pub max_ns: u64,
}

impl TimingStats {
    /// `None` for an empty sample.
    pub fn from_samples(samples: &[u64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_unstable();
        Some(Self {
            count: sorted.len(),
            min_ns: sorted[0],
            q1_ns: quantile(&sorted, 0.25),
            median_ns: quantile(&sorted, 0.5),
            q3_ns: quantile(&sorted, 0.75),
            max_ns: sorted[sorted.len() - 1],
        })
    }
}
