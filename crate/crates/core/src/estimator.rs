//! Least-squares drift estimator and the bracket statistic.
//!
//! `â_N = Σ τ_{i+1} Y_{τ_{i+1}} / Σ τ_{i+1}²` and `â_N − a = A_N / D_N` with
//! `A_N = (1/N) Σ τ_{i+1} ΔW_{τ_{i+1}}`, `D_N = (1/N) Σ τ_{i+1}²`. Given the
//! grid, `N·A_N` is centred Gaussian with variance
//! `Q_N = Σ τ_{j+1}² (τ_{j+1} − τ_j)`.

use crate::error::{Error, Result};
use crate::model::ObservationSet;
use crate::numerics::KahanSum;
use crate::sampling::{SamplingScheme, TimeGrid};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Variance of the reference normal subtracted in the estimation error.
pub const REFERENCE_VARIANCE: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub a_hat: f64,
    /// `A_N` relative to the generating drift.
    pub a_n: f64,
    pub d_n: f64,
    pub n: usize,
    pub n_obs: usize,
    /// `N·(â_N − a)`.
    pub scaled_error: f64,
}

impl Estimate {
    /// `N·A_N`.
    pub fn scaled_a_n(&self) -> f64 {
        self.n as f64 * self.a_n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketStat {
    pub q_n: f64,
    pub n: usize,
    pub scheme: SamplingScheme,
}

fn check_nonempty(obs: &ObservationSet) -> Result<()> {
    if obs.n_obs() == 0 {
        return Err(Error::InvalidInput("empty observation set".into()));
    }
    Ok(())
}

pub fn lse(obs: &ObservationSet) -> Result<Estimate> {
    check_nonempty(obs)?;
    let times = obs.grid().observed_times();
    let mut cross = KahanSum::new();
    let mut squares = KahanSum::new();
    for (&t, &y) in times.iter().zip(obs.y()) {
        cross.add(t * y);
        squares.add(t * t);
    }
    let a_hat = cross.value() / squares.value();
    let (a_n, d_n) = decompose(obs, obs.drift())?;
    let n = obs.grid().n();
    Ok(Estimate {
        a_hat,
        a_n,
        d_n,
        n,
        n_obs: obs.n_obs(),
        scaled_error: n as f64 * (a_hat - obs.drift()),
    })
}

/// `(A_N, D_N)` against `true_drift`.
pub fn decompose(obs: &ObservationSet, true_drift: f64) -> Result<(f64, f64)> {
    check_nonempty(obs)?;
    let times = obs.grid().observed_times();
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for (&t, &y) in times.iter().zip(obs.y()) {
        num.add(t * (y - true_drift * t));
        den.add(t * t);
    }
    let n = obs.grid().n() as f64;
    Ok((num.value() / n, den.value() / n))
}

/// `Q_N` over the estimator's index range (`j ≤ n_obs − 1`).
pub fn bracket(grid: &TimeGrid) -> BracketStat {
    let q: KahanSum = grid
        .observed_times()
        .iter()
        .zip(grid.observed_gaps())
        .map(|(&t, gap)| t * t * gap)
        .collect();
    BracketStat {
        q_n: q.value(),
        n: grid.n(),
        scheme: *grid.scheme(),
    }
}

/// `Σ τ_{j+1}² (τ_{j+1} − τ_j)` over every increment of the grid.
///
/// Equal to [`bracket`] under renewal sampling; for jittered grids it also
/// includes the dropped last point `τ_N`.
pub fn full_bracket(grid: &TimeGrid) -> f64 {
    grid.times()
        .windows(2)
        .map(|w| w[1] * w[1] * (w[1] - w[0]))
        .collect::<KahanSum>()
        .value()
}

/// Running partial sums of [`bracket`].
pub fn bracket_prefix(grid: &TimeGrid) -> Vec<f64> {
    let mut acc = KahanSum::new();
    grid.observed_times()
        .iter()
        .zip(grid.observed_gaps())
        .map(|(&t, gap)| {
            acc.add(t * t * gap);
            acc.value()
        })
        .collect()
}

/// Limit of `Q_N`, `D_N` and `E[(N·A_N)²]`: `α³/3`.
pub fn expected_q_limit(scheme: &SamplingScheme) -> f64 {
    scheme.alpha().powi(3) / 3.0
}

/// Limit variance of `N·(â_N − a)`: `3/α³`.
pub fn expected_scaled_error_variance(scheme: &SamplingScheme) -> f64 {
    3.0 / scheme.alpha().powi(3)
}

/// `ε = N·A_N − Z/√3` with `Z` a fresh standard normal.
pub fn estimation_error<R: Rng + ?Sized>(scaled_a_n: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    estimation_error_with_draw(scaled_a_n, z)
}

/// [`estimation_error`] with the standard normal draw supplied.
pub fn estimation_error_with_draw(scaled_a_n: f64, z: f64) -> f64 {
    scaled_a_n - REFERENCE_VARIANCE.sqrt() * z
}
