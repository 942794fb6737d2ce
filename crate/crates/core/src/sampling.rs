//! Random observation-time grids on the unit horizon.
//!
//! Two schemes are supported. Jittered grids perturb the regular points `i/N`
//! by i.i.d. symmetric noise supported on `[−1/(2N), 1/(2N)]`; renewal grids
//! accumulate exponential gaps of rate `N` and keep the first `N_α = ⌊αN⌋`
//! points. The renewal time `τ_{N_α}` is `Gamma(N_α, N)` and may overshoot the
//! horizon; the grid records that instead of resampling.

use crate::error::{invalid_param, Error, Result};
use crate::numerics::KahanSum;
use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Symmetric noise law of a jittered grid, scaled to `[−1/(2N), 1/(2N)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JitterKind {
    Uniform,
    Triangular,
    RaisedCosine,
    /// Degenerate noise at 0.
    #[cfg(test)]
    Zero,
}

impl JitterKind {
    pub const ALL: [JitterKind; 3] = [
        JitterKind::Uniform,
        JitterKind::Triangular,
        JitterKind::RaisedCosine,
    ];

    /// `c₁` such that `E[ν²] = c₁ / N²`.
    ///
    /// With half-width `h = 1/(2N)`: uniform `h²/3`, triangular `h²/6`,
    /// raised cosine `h²(1/3 − 2/π²)`.
    pub fn second_moment_coefficient(self) -> f64 {
        match self {
            JitterKind::Uniform => 1.0 / 12.0,
            JitterKind::Triangular => 1.0 / 24.0,
            JitterKind::RaisedCosine => (1.0 / 3.0 - 2.0 / (PI * PI)) / 4.0,
            #[cfg(test)]
            JitterKind::Zero => 0.0,
        }
    }

    /// CDF of the standardized law on `[−1, 1]`.
    pub fn standard_cdf(self, y: f64) -> f64 {
        if y <= -1.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        match self {
            JitterKind::Uniform => 0.5 * (y + 1.0),
            JitterKind::Triangular => {
                if y <= 0.0 {
                    0.5 * (1.0 + y) * (1.0 + y)
                } else {
                    1.0 - 0.5 * (1.0 - y) * (1.0 - y)
                }
            }
            JitterKind::RaisedCosine => 0.5 + 0.5 * y + (PI * y).sin() / (2.0 * PI),
            #[cfg(test)]
            JitterKind::Zero => {
                if y < 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Density of the standardized law on `[−1, 1]`.
    pub fn standard_pdf(self, y: f64) -> f64 {
        if !(-1.0..=1.0).contains(&y) {
            return 0.0;
        }
        match self {
            JitterKind::Uniform => 0.5,
            JitterKind::Triangular => 1.0 - y.abs(),
            JitterKind::RaisedCosine => 0.5 * (1.0 + (PI * y).cos()),
            #[cfg(test)]
            JitterKind::Zero => 0.0,
        }
    }

    /// One draw of the standardized noise on `[−1, 1]` (inverse CDF).
    pub fn sample_standard<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            JitterKind::Uniform => {
                let u: f64 = rng.sample(Open01);
                2.0 * u - 1.0
            }
            JitterKind::Triangular => {
                let u: f64 = rng.sample(Open01);
                if u < 0.5 {
                    (2.0 * u).sqrt() - 1.0
                } else {
                    1.0 - (2.0 * (1.0 - u)).sqrt()
                }
            }
            JitterKind::RaisedCosine => {
                let u: f64 = rng.sample(Open01);
                invert_by_bisection(|y| JitterKind::RaisedCosine.standard_cdf(y), u)
            }
            #[cfg(test)]
            JitterKind::Zero => 0.0,
        }
    }
}

fn invert_by_bisection(cdf: impl Fn(f64) -> f64, u: f64) -> f64 {
    let (mut lo, mut hi) = (-1.0_f64, 1.0_f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type", content = "noise")]
pub enum SchemeKind {
    Jittered(JitterKind),
    Renewal,
}

/// Scheme, grid size `N` and observed fraction `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    kind: SchemeKind,
    n: usize,
    alpha: f64,
}

impl SamplingScheme {
    /// Jittered scheme; `α` is fixed to 1.
    pub fn jittered(n: usize, kind: JitterKind) -> Result<Self> {
        if n < 2 {
            return invalid_param(format!("jittered sampling needs n >= 2, got {n}"));
        }
        Ok(Self {
            kind: SchemeKind::Jittered(kind),
            n,
            alpha: 1.0,
        })
    }

    pub fn renewal(n: usize, alpha: f64) -> Result<Self> {
        if n < 2 {
            return invalid_param(format!("renewal sampling needs n >= 2, got {n}"));
        }
        check_alpha(alpha)?;
        if effective_count(alpha, n) == 0 {
            return invalid_param(format!("floor(alpha * n) = 0 for alpha={alpha}, n={n}"));
        }
        Ok(Self {
            kind: SchemeKind::Renewal,
            n,
            alpha,
        })
    }

    /// Same scheme at a different `N`.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        match self.kind {
            SchemeKind::Jittered(k) => Self::jittered(n, k),
            SchemeKind::Renewal => Self::renewal(n, self.alpha),
        }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_renewal(&self) -> bool {
        matches!(self.kind, SchemeKind::Renewal)
    }

    /// `N_α = ⌊αN⌋`, the index of the last grid point.
    pub fn n_alpha(&self) -> usize {
        effective_count(self.alpha, self.n)
    }

    /// Observations entering the estimator: `N − 1` when jittered (the point
    /// `τ_N` is dropped), `N_α` under renewal.
    pub fn n_obs(&self) -> usize {
        match self.kind {
            SchemeKind::Jittered(_) => self.n - 1,
            SchemeKind::Renewal => self.n_alpha(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SchemeKind::Jittered(_) => "jittered",
            SchemeKind::Renewal => "renewal",
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid_param(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    Ok(())
}

/// `⌊α·n⌋` with a small guard so that e.g. `0.98 × 100` gives 98.
pub fn effective_count(alpha: f64, n: usize) -> usize {
    (alpha * n as f64 + 1e-9).floor() as usize
}

/// Realized observation times `τ₀ = 0 < τ₁ < … < τ_{N_α}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    scheme: SamplingScheme,
    times: Vec<f64>,
    exceeded: bool,
}

impl TimeGrid {
    /// Validates and wraps an explicit sequence of times.
    pub fn from_times(scheme: SamplingScheme, times: Vec<f64>) -> Result<Self> {
        let expected_len = scheme.n_alpha() + 1;
        if times.len() != expected_len {
            return Err(Error::InvalidInput(format!(
                "grid for {} scheme with n={} needs {expected_len} times, got {}",
                scheme.name(),
                scheme.n,
                times.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidInput(format!("tau_0 must be 0, got {}", times[0])));
        }
        if let Some(i) = times.windows(2).position(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(Error::InvalidInput(format!(
                "times not strictly increasing at index {}: {} >= {}",
                i + 1,
                times[i],
                times[i + 1]
            )));
        }
        if let SchemeKind::Jittered(_) = scheme.kind {
            let n = scheme.n as f64;
            let half = 0.5 / n;
            for (i, &t) in times.iter().enumerate().skip(1) {
                let centre = i as f64 / n;
                let slack = 4.0 * f64::EPSILON * (centre + half);
                if (t - centre).abs() > half + slack {
                    return Err(Error::InvalidInput(format!(
                        "jittered time {i} = {t} outside [{}, {}]",
                        centre - half,
                        centre + half
                    )));
                }
            }
        }
        let exceeded = times[scheme.n_obs()] > 1.0;
        Ok(Self {
            scheme,
            times,
            exceeded,
        })
    }

    /// Noise-free jittered grid `τ_i = i/N`.
    pub fn regular(n: usize, kind: JitterKind) -> Result<Self> {
        let scheme = SamplingScheme::jittered(n, kind)?;
        let times = (0..=n).map(|i| i as f64 / n as f64).collect();
        Self::from_times(scheme, times)
    }

    pub fn scheme(&self) -> &SamplingScheme {
        &self.scheme
    }

    pub fn n(&self) -> usize {
        self.scheme.n
    }

    /// All grid points `τ₀ … τ_{N_α}`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Whether the last observation used by the estimator lies beyond 1.
    ///
    /// Under renewal sampling this is `τ_{N_α} > 1`. Jittered grids drop
    /// `τ_N`, and `τ_{N−1} ≤ 1 − 1/(2N)` always, so they never exceed.
    pub fn exceeded(&self) -> bool {
        self.exceeded
    }

    pub fn n_obs(&self) -> usize {
        self.scheme.n_obs()
    }

    /// Times `τ₁ … τ_{n_obs}` paired with the observations.
    pub fn observed_times(&self) -> &[f64] {
        &self.times[1..=self.n_obs()]
    }

    /// Gaps `τ_{i+1} − τ_i` for `i = 0 … n_obs − 1`.
    pub fn observed_gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.times[..=self.n_obs()].windows(2).map(|w| w[1] - w[0])
    }
}

/// Jittered grid `τ_i = i/N + ν_i`, `i = 1 … N`.
pub fn generate_jittered<R: Rng + ?Sized>(n: usize, kind: JitterKind, rng: &mut R) -> Result<TimeGrid> {
    let scheme = SamplingScheme::jittered(n, kind)?;
    let nf = n as f64;
    let half = 0.5 / nf;
    let mut times = Vec::with_capacity(n + 1);
    times.push(0.0);
    for i in 1..=n {
        times.push(i as f64 / nf + half * kind.sample_standard(rng));
    }
    TimeGrid::from_times(scheme, times)
}

/// Renewal grid with `Exp(N)` gaps, kept up to `τ_{⌊αN⌋}`.
pub fn generate_renewal<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<TimeGrid> {
    let scheme = SamplingScheme::renewal(n, alpha)?;
    let times = renewal_times(n as f64, scheme.n_alpha(), rng);
    TimeGrid::from_times(scheme, times)
}

/// Grid for any scheme.
pub fn generate<R: Rng + ?Sized>(scheme: &SamplingScheme, rng: &mut R) -> Result<TimeGrid> {
    match scheme.kind {
        SchemeKind::Jittered(kind) => generate_jittered(scheme.n, kind, rng),
        SchemeKind::Renewal => generate_renewal(scheme.n, scheme.alpha, rng),
    }
}

/// One `Exp(rate)` draw by inversion; `u` is drawn from the open interval.
#[inline]
pub fn sample_exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -u.ln() / rate
}

pub(crate) fn renewal_times<R: Rng + ?Sized>(rate: f64, count: usize, rng: &mut R) -> Vec<f64> {
    let mut times = Vec::with_capacity(count + 1);
    let mut t = 0.0;
    times.push(t);
    for _ in 0..count {
        t += sample_exponential(rate, rng);
        times.push(t);
    }
    times
}

/// `τ_{N_α}` alone, i.e. the running sum of `N_α` exponential gaps.
///
/// Consumes the stream exactly as [`generate_renewal`] does.
pub fn last_renewal_time<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<f64> {
    let scheme = SamplingScheme::renewal(n, alpha)?;
    let rate = n as f64;
    let mut t = 0.0;
    for _ in 0..scheme.n_alpha() {
        t += sample_exponential(rate, rng);
    }
    Ok(t)
}

/// Exact `P(τ_{⌊αn⌋} > 1)` where `τ_{⌊αn⌋} ~ Gamma(⌊αn⌋, rate n)`.
///
/// Uses the integer-shape identity `P(Gamma(k, n) > 1) = P(Poisson(n) ≤ k − 1)`.
/// Terms are accumulated in increasing order; above `n = 700` they are
/// handled in log space, since `e^{−n}` underflows.
pub fn tail_exact(alpha: f64, n: usize) -> Result<f64> {
    check_alpha(alpha)?;
    let k = effective_count(alpha, n);
    if n == 0 || k == 0 {
        return invalid_param(format!("floor(alpha * n) must be >= 1 (alpha={alpha}, n={n})"));
    }
    Ok(poisson_cdf(n as f64, k - 1))
}

/// `P(Poisson(mean) ≤ upto)`.
fn poisson_cdf(mean: f64, upto: usize) -> f64 {
    if mean <= 700.0 {
        let mut term = (-mean).exp();
        let mut sum = KahanSum::new();
        for i in 0..=upto {
            sum.add(term);
            term *= mean / (i + 1) as f64;
        }
        return sum.value().min(1.0);
    }
    let ln_mean = mean.ln();
    let mut log_terms = Vec::with_capacity(upto + 1);
    let mut log_term = -mean;
    for i in 0..=upto {
        log_terms.push(log_term);
        log_term += ln_mean - ((i + 1) as f64).ln();
    }
    let peak = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: KahanSum = log_terms.iter().map(|&l| (l - peak).exp()).collect();
    (peak.exp() * scaled.value()).min(1.0)
}

/// Leading-order large-deviation approximation of [`tail_exact`] for `α < 1`.
///
/// With `M = ⌊αn⌋` and `ᾱ = n/M > 1` the tail is the regularized upper
/// incomplete gamma `Q(M, ᾱM)`, and
/// `Q(M, ᾱM) ≈ ᾱ^M e^{−M(ᾱ−1)} · M / ((M(ᾱ−1) + 1) √(2πM))`
/// (Stirling for `Γ(M)` plus `Γ(a, x) ≈ x^a e^{−x} / (x − a + 1)`).
/// It decays geometrically in `n` and is accurate once `(ᾱ−1)√M ≫ 1`.
pub fn tail_asymptotic(alpha: f64, n: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha >= 1.0 {
        return invalid_param("the asymptotic tail needs alpha < 1");
    }
    let m = effective_count(alpha, n);
    if m == 0 || m >= n {
        return invalid_param(format!("need 1 <= floor(alpha * n) < n (alpha={alpha}, n={n})"));
    }
    let mf = m as f64;
    let ratio = n as f64 / mf;
    let excess = ratio - 1.0;
    let log_value = mf * ratio.ln() - mf * excess + mf.ln()
        - (mf * excess + 1.0).ln()
        - 0.5 * (2.0 * PI * mf).ln();
    Ok(log_value.exp())
}
