//! Summary statistics over replications: histograms and the one-sample
//! Kolmogorov–Smirnov distance to a normal law.

use crate::error::{invalid_param, Result};
use crate::numerics::{normal_cdf, Welford};
use serde::Serialize;

/// Bins used when the Freedman–Diaconis width is unusable.
pub const FALLBACK_BINS: usize = 50;
const MAX_BINS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `counts.len() + 1` ascending edges; the last bin is closed.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Freedman–Diaconis binning (`h = 2·IQR·n^{−1/3}`) with a fixed
    /// 50-bin fallback.
    pub fn freedman_diaconis(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self {
                edges: vec![0.0, 1.0],
                counts: vec![0],
            };
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let lo = sorted[0];
        let hi = sorted[sorted.len() - 1];
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
        let span = hi - lo;
        let bins = if width > 0.0 && width.is_finite() && span > 0.0 {
            let b = (span / width).ceil() as usize;
            if (1..=MAX_BINS).contains(&b) {
                b
            } else {
                FALLBACK_BINS
            }
        } else {
            FALLBACK_BINS
        };
        let (lo, hi) = if span > 0.0 { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self::with_bins(&sorted, lo, hi, bins)
    }

    fn with_bins(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let step = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + step * i as f64).collect();
        edges.push(hi);
        let mut counts = vec![0u64; bins];
        for &x in samples {
            let idx = (((x - lo) / step).floor().max(0.0) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Self { edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Linearly interpolated quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// One-sample KS statistic `sup |F_n − Φ_{mean,variance}|`.
pub fn ks_to_normal(samples: &[f64], mean: f64, variance: f64) -> Result<f64> {
    if samples.is_empty() {
        return invalid_param("KS distance needs at least one sample");
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return invalid_param(format!("variance must be positive, got {variance}"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let sd = variance.sqrt();
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x, mean, sd);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0_f64, f64::max);
    Ok(d.clamp(0.0, 1.0))
}

/// Asymptotic one-sample KS critical value at level 1%: `1.63 / √n`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Welford accumulation in fixed chunks merged left to right, so the result
/// depends only on the order of `samples`.
pub fn chunked_moments(samples: &[f64]) -> Welford {
    const CHUNK: usize = 1024;
    let mut total = Welford::new();
    for chunk in samples.chunks(CHUNK) {
        let part: Welford = chunk.iter().copied().collect();
        total.merge(&part);
    }
    total
}
