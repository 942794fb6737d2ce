//! Replication engine.
//!
//! Replication `r` draws from its own stream `rng::stream(base_seed, r)`;
//! records are collected in replication order and reduced sequentially, so
//! every output is bit-identical at any thread count.

pub mod report;
pub mod stats;

use crate::error::{Error, Result};
use crate::estimator::{self, bracket, estimation_error, expected_q_limit, full_bracket, lse};
use crate::model::synthesize;
use crate::numerics::Welford;
use crate::rng::{derive_seed, stream};
use crate::sampling::{self, tail_exact, SamplingScheme};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

pub use stats::{chunked_moments, ks_critical_1pct, ks_to_normal, Histogram};

/// Upper bound on `replications × (N_α + 1)` for one run.
pub const MAX_WORK: u128 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scheme: SamplingScheme,
    pub drift: f64,
    pub replications: usize,
    pub base_seed: u64,
    pub n_sweep: Option<Vec<usize>>,
    /// Drop replications whose last observation time exceeds 1.
    pub exclude_exceeded: bool,
    /// Worker threads; `None` uses the global rayon pool. Not serialized:
    /// outputs do not depend on it.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(scheme: SamplingScheme, replications: usize, base_seed: u64) -> Self {
        Self {
            scheme,
            drift: 0.0,
            replications,
            base_seed,
            n_sweep: None,
            exclude_exceeded: false,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if !self.drift.is_finite() {
            return Err(Error::Config("drift must be finite".into()));
        }
        if let Some(sweep) = &self.n_sweep {
            if sweep.is_empty() {
                return Err(Error::Config("n_sweep must not be empty".into()));
            }
            if !sweep.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Config("n_sweep must be strictly increasing".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        check_work(self.replications, self.scheme.n_alpha())
    }
}

fn check_work(reps: usize, points: usize) -> Result<()> {
    let work = reps as u128 * (points as u128 + 1);
    if work > MAX_WORK {
        return Err(Error::Config(format!(
            "replications x grid size = {work} exceeds the limit {MAX_WORK}"
        )));
    }
    Ok(())
}

/// Per-replication statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationRecord {
    pub rep: u64,
    pub n: usize,
    /// `N·A_N`
    pub na_n: f64,
    /// `N·(â_N − a)`
    pub n_ahat_err: f64,
    /// `Q_N` over the estimator's range; the conditional variance of `N·A_N`.
    pub q_n: f64,
    /// `N·A_N − N(0, 1/3)`
    pub eps: f64,
    pub exceeded: bool,
    /// `(N/N_α)^{3/2}·N·A_N`: the same statistic with the renewal clock run
    /// at rate `N_α` instead of `N`. Equals `na_n` for jittered grids.
    pub na_n_alpha: f64,
    /// `Σ τ_{j+1}²(τ_{j+1} − τ_j)` over every grid increment.
    pub q_full: f64,
}

/// One replication on an already-seeded stream.
pub fn replicate<R: rand::Rng + ?Sized>(
    scheme: &SamplingScheme,
    drift: f64,
    rep: u64,
    rng: &mut R,
) -> Result<ReplicationRecord> {
    let grid = sampling::generate(scheme, rng)?;
    let q_n = bracket(&grid).q_n;
    let q_full = full_bracket(&grid);
    let exceeded = grid.exceeded();
    let obs = synthesize(grid, drift, rng);
    let est = lse(&obs)?;
    let na_n = est.scaled_a_n();
    let eps = estimation_error(na_n, rng);
    let clock = scheme.n() as f64 / scheme.n_alpha() as f64;
    Ok(ReplicationRecord {
        rep,
        n: scheme.n(),
        na_n,
        n_ahat_err: est.scaled_error,
        q_n,
        eps,
        exceeded,
        na_n_alpha: clock.powf(1.5) * na_n,
        q_full,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Statistic {
    /// `N·A_N`
    ScaledAN,
    /// `N·(â_N − a)`
    ScaledEstimatorError,
    QN,
    EstimationError,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [
        Statistic::ScaledAN,
        Statistic::ScaledEstimatorError,
        Statistic::QN,
        Statistic::EstimationError,
    ];

    pub fn extract(self, r: &ReplicationRecord) -> f64 {
        match self {
            Statistic::ScaledAN => r.na_n,
            Statistic::ScaledEstimatorError => r.n_ahat_err,
            Statistic::QN => r.q_n,
            Statistic::EstimationError => r.eps,
        }
    }

    /// Variance of the limiting centred normal law, where there is one.
    pub fn limit_variance(self, scheme: &SamplingScheme) -> Option<f64> {
        let q = expected_q_limit(scheme);
        match self {
            Statistic::ScaledAN => Some(q),
            Statistic::ScaledEstimatorError => Some(estimator::expected_scaled_error_variance(scheme)),
            Statistic::QN => None,
            Statistic::EstimationError => Some(q + estimator::REFERENCE_VARIANCE),
        }
    }

    /// Column name in the replication CSV.
    pub fn key(self) -> &'static str {
        match self {
            Statistic::ScaledAN => "na_n",
            Statistic::ScaledEstimatorError => "n_ahat_err",
            Statistic::QN => "q_n",
            Statistic::EstimationError => "eps",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Statistic::ScaledAN => "N*A_N",
            Statistic::ScaledEstimatorError => "N*(a_hat-a)",
            Statistic::QN => "Q_N",
            Statistic::EstimationError => "eps",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub statistic: Statistic,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_error: f64,
    pub histogram: Histogram,
    /// KS distance to the limiting normal; `None` for `Q_N`.
    pub ks_distance: Option<f64>,
    pub limit_variance: Option<f64>,
    pub exceed_count: u64,
    pub replications_used: u64,
}

impl McSummary {
    fn build(statistic: Statistic, scheme: &SamplingScheme, samples: &[f64], exceed_count: u64) -> Result<Self> {
        let moments = chunked_moments(samples);
        let limit_variance = statistic.limit_variance(scheme);
        let ks_distance = match limit_variance {
            Some(v) if !samples.is_empty() => Some(ks_to_normal(samples, 0.0, v)?),
            _ => None,
        };
        Ok(Self {
            statistic,
            mean: moments.mean(),
            variance: moments.variance(),
            std_error: moments.std_error(),
            histogram: Histogram::freedman_diaconis(samples),
            ks_distance,
            limit_variance,
            exceed_count,
            replications_used: samples.len() as u64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub config: ExperimentConfig,
    pub summaries: Vec<McSummary>,
    /// Mean/variance of the `N_α`-clock statistic `na_n_alpha`.
    pub na_n_alpha: MomentRow,
    #[serde(skip)]
    pub records: Vec<ReplicationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

impl From<Welford> for MomentRow {
    fn from(w: Welford) -> Self {
        Self {
            mean: w.mean(),
            variance: w.variance(),
            std_error: w.std_error(),
        }
    }
}

impl McReport {
    pub fn summary(&self, statistic: Statistic) -> &McSummary {
        self.summaries
            .iter()
            .find(|s| s.statistic == statistic)
            .expect("every statistic is summarized")
    }

    /// Records that enter the summaries.
    pub fn used_records(&self) -> impl Iterator<Item = &ReplicationRecord> {
        let exclude = self.config.exclude_exceeded;
        self.records.iter().filter(move |r| !(exclude && r.exceeded))
    }
}

/// Runs `f` inside a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn collect_records(scheme: &SamplingScheme, drift: f64, reps: usize, base_seed: u64) -> Result<Vec<ReplicationRecord>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|r| replicate(scheme, drift, r, &mut stream(base_seed, r)))
        .collect()
}

/// Runs `config.replications` independent replications at `config.scheme`.
pub fn run_replications(config: &ExperimentConfig) -> Result<McReport> {
    config.validate()?;
    let records = with_threads(config.threads, || {
        collect_records(&config.scheme, config.drift, config.replications, config.base_seed)
    })??;
    summarize(config.clone(), records)
}

fn summarize(config: ExperimentConfig, records: Vec<ReplicationRecord>) -> Result<McReport> {
    let exceed_count = records.iter().filter(|r| r.exceeded).count() as u64;
    let used: Vec<&ReplicationRecord> = records
        .iter()
        .filter(|r| !(config.exclude_exceeded && r.exceeded))
        .collect();
    let summaries = Statistic::ALL
        .iter()
        .map(|&s| {
            let xs: Vec<f64> = used.iter().map(|r| s.extract(r)).collect();
            McSummary::build(s, &config.scheme, &xs, exceed_count)
        })
        .collect::<Result<Vec<_>>>()?;
    let alpha_clock: Vec<f64> = used.iter().map(|r| r.na_n_alpha).collect();
    let na_n_alpha = chunked_moments(&alpha_clock).into();
    Ok(McReport {
        config,
        summaries,
        na_n_alpha,
        records,
    })
}

/// Runs one experiment per entry of `config.n_sweep`; the `N`-th run uses
/// base seed `derive_seed(base_seed, N)`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<McReport>> {
    config.validate()?;
    let sweep = config
        .n_sweep
        .clone()
        .ok_or_else(|| Error::Config("n_sweep is not set".into()))?;
    sweep
        .iter()
        .map(|&n| {
            let mut c = config.clone();
            c.scheme = config.scheme.with_n(n).map_err(|e| Error::Config(e.to_string()))?;
            c.base_seed = derive_seed(config.base_seed, n as u64);
            c.n_sweep = None;
            run_replications(&c)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub mean_q: f64,
    pub std_error: f64,
    pub limit: f64,
    pub deviation: f64,
}

/// Mean of `Q_N` over `reps_per_n` grids for each `N` in `n_values`.
///
/// Grids for a given `N` come from `derive_seed(base_seed, N)`, so a row does
/// not depend on which other `N` values are requested.
pub fn qn_trace(
    template: &SamplingScheme,
    n_values: &[usize],
    reps_per_n: usize,
    base_seed: u64,
    threads: Option<usize>,
) -> Result<Vec<TraceRow>> {
    if n_values.is_empty() {
        return Err(Error::Config("n_values must not be empty".into()));
    }
    if reps_per_n == 0 {
        return Err(Error::Config("reps_per_n must be >= 1".into()));
    }
    let schemes = n_values
        .iter()
        .map(|&n| template.with_n(n))
        .collect::<Result<Vec<_>>>()?;
    for s in &schemes {
        check_work(reps_per_n, s.n_alpha())?;
    }
    with_threads(threads, || {
        schemes
            .iter()
            .map(|scheme| {
                let seed = derive_seed(base_seed, scheme.n() as u64);
                let qs = (0..reps_per_n as u64)
                    .into_par_iter()
                    .map(|r| sampling::generate(scheme, &mut stream(seed, r)).map(|g| bracket(&g).q_n))
                    .collect::<Result<Vec<f64>>>()?;
                let m = chunked_moments(&qs);
                let limit = expected_q_limit(scheme);
                Ok(TraceRow {
                    n: scheme.n(),
                    mean_q: m.mean(),
                    std_error: m.std_error(),
                    limit,
                    deviation: (m.mean() - limit).abs(),
                })
            })
            .collect()
    })?
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExceedanceCell {
    pub alpha: f64,
    pub n: usize,
    pub reps: usize,
    pub count: u64,
    pub probability: f64,
    pub expected: f64,
    /// Central 99% binomial band `[q_0.005, q_0.995]` for the count.
    pub band_low: u64,
    pub band_high: u64,
}

impl ExceedanceCell {
    pub fn within_band(&self) -> bool {
        (self.band_low..=self.band_high).contains(&self.count)
    }
}

/// Central `level` band of a `Binomial(reps, p)` count.
pub fn binomial_band(reps: usize, p: f64, level: f64) -> Result<(u64, u64)> {
    let tail = 0.5 * (1.0 - level);
    let b = Binomial::new(p.clamp(0.0, 1.0), reps as u64)
        .map_err(|e| Error::InvalidParameter(format!("binomial: {e}")))?;
    Ok((b.inverse_cdf(tail), b.inverse_cdf(1.0 - tail)))
}

/// Counts of `τ_{⌊αn⌋} > 1` over `reps` renewal grids for every `(α, n)`.
///
/// Row-major in `alphas`. Cell streams derive from `(base_seed, α, n)`.
pub fn exceedance_table(
    alphas: &[f64],
    ns: &[usize],
    reps: usize,
    base_seed: u64,
    threads: Option<usize>,
) -> Result<Vec<ExceedanceCell>> {
    if reps == 0 {
        return Err(Error::Config("reps must be >= 1".into()));
    }
    let mut cells = Vec::with_capacity(alphas.len() * ns.len());
    for &alpha in alphas {
        for &n in ns {
            let scheme = SamplingScheme::renewal(n, alpha)?;
            check_work(reps, scheme.n_alpha())?;
            let seed = derive_seed(derive_seed(base_seed, alpha.to_bits()), n as u64);
            let count = with_threads(threads, || {
                (0..reps as u64)
                    .into_par_iter()
                    .map(|r| sampling::last_renewal_time(n, alpha, &mut stream(seed, r)).map(|t| u64::from(t > 1.0)))
                    .sum::<Result<u64>>()
            })??;
            let probability = tail_exact(alpha, n)?;
            let (band_low, band_high) = binomial_band(reps, probability, 0.99)?;
            cells.push(ExceedanceCell {
                alpha,
                n,
                reps,
                count,
                probability,
                expected: reps as f64 * probability,
                band_low,
                band_high,
            });
        }
    }
    Ok(cells)
}
