//! Exact finite-`N` moments of `N·A_N` and `Q_N`, and the renewal joint
//! densities they are built from.
//!
//! Polynomial sums are accumulated in `u128` and only divided by the power of
//! `N` at the end. Under renewal sampling all moments reduce to Beta/Dirichlet
//! moments of the normalized gaps given `τ_{k+1}`:
//!
//! * `E[τ_{j+1}² (τ_{j+1} − τ_j)] = (j+2)(j+3) / N³`
//! * `E[τ_{j+1}⁴ (τ_{j+1} − τ_j)²] = 2 (j+3)(j+4)(j+5)(j+6) / N⁶`
//! * `E[τ_{j+1}² Δ_j τ_{k+1}² Δ_k] = (j+2)(j+3)(k+5)(k+6) / N⁶` for `j < k`

use crate::error::{invalid_param, Error, Result};
use crate::sampling::effective_count;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentKind {
    /// `E[(N·A_N)²] = N²·E[A_N²]`
    SecondMomentNA,
    MeanQ,
    SecondMomentQ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "scheme")]
pub enum MomentScheme {
    Jittered { c1: f64 },
    Renewal { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentValue {
    pub value: f64,
    pub n: usize,
    pub scheme: MomentScheme,
    pub kind: MomentKind,
}

fn overflow() -> Error {
    Error::InvalidParameter("exact sum overflows 128-bit arithmetic; n too large".into())
}

/// `Σ_{i=1}^{m} i`
fn sum_linear(m: u128) -> u128 {
    m * (m + 1) / 2
}

/// `Σ_{i=1}^{m} i²`
fn sum_squares(m: u128) -> u128 {
    m * (m + 1) * (2 * m + 1) / 6
}

/// `Σ_{j=0}^{count−1} poly(j)` with overflow checks.
fn exact_sum(count: usize, poly: impl Fn(u128) -> Option<u128>) -> Result<u128> {
    (0..count as u128).try_fold(0u128, |acc, j| {
        poly(j).and_then(|v| acc.checked_add(v)).ok_or_else(overflow)
    })
}

fn checked_product(factors: &[u128]) -> Option<u128> {
    factors.iter().try_fold(1u128, |acc, &f| acc.checked_mul(f))
}

fn renewal_count(n: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid_param(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    let k = effective_count(alpha, n);
    if n == 0 || k == 0 {
        return invalid_param(format!("floor(alpha * n) must be >= 1 (alpha={alpha}, n={n})"));
    }
    Ok(k)
}

fn check_js(n: usize, c1: f64) -> Result<()> {
    if n < 2 {
        return invalid_param(format!("jittered moments need n >= 2, got {n}"));
    }
    if !(c1.is_finite() && c1 >= 0.0) {
        return invalid_param(format!("c1 must be finite and nonnegative, got {c1}"));
    }
    Ok(())
}

/// `N²·E[A_N²]` for jittered sampling over the estimator range `j ≤ N−2`:
/// `(1/N³)[Σ_{i=1}^{N−1} i² + 2c₁ Σ_{i=1}^{N−1} i + (N−1)c₁]`.
pub fn exact_second_moment_na_js(n: usize, c1: f64) -> Result<MomentValue> {
    check_js(n, c1)?;
    if c1 <= 0.0 {
        return invalid_param("c1 must be positive");
    }
    let m = (n - 1) as u128;
    let nf = n as f64;
    let value = (sum_squares(m) as f64 + 2.0 * c1 * sum_linear(m) as f64 + m as f64 * c1) / nf.powi(3);
    Ok(MomentValue {
        value,
        n,
        scheme: MomentScheme::Jittered { c1 },
        kind: MomentKind::SecondMomentNA,
    })
}

/// `E[Q_N]` for jittered sampling summed over all `j ≤ N−1`:
/// `(1/N³)[Σ_{i=1}^{N} i² + 2c₁ Σ_{i=1}^{N} i + N c₁]`.
pub fn exact_mean_q_js(n: usize, c1: f64) -> Result<MomentValue> {
    check_js(n, c1)?;
    let m = n as u128;
    let nf = n as f64;
    let value = (sum_squares(m) as f64 + 2.0 * c1 * sum_linear(m) as f64 + nf * c1) / nf.powi(3);
    Ok(MomentValue {
        value,
        n,
        scheme: MomentScheme::Jittered { c1 },
        kind: MomentKind::MeanQ,
    })
}

/// `(1/N³) Σ_{j=0}^{N_α−1} (j+2)(j+3)`
fn renewal_mean_q(n: usize, alpha: f64) -> Result<f64> {
    let k = renewal_count(n, alpha)?;
    let s = exact_sum(k, |j| checked_product(&[j + 2, j + 3]))?;
    Ok(s as f64 / (n as f64).powi(3))
}

/// `N²·E[A_N²]` for renewal sampling. Equal to `E[Q_N]`, since `Q_N` is the
/// conditional variance of `N·A_N`.
pub fn exact_second_moment_na_rs(n: usize, alpha: f64) -> Result<MomentValue> {
    Ok(MomentValue {
        value: renewal_mean_q(n, alpha)?,
        n,
        scheme: MomentScheme::Renewal { alpha },
        kind: MomentKind::SecondMomentNA,
    })
}

pub fn exact_mean_q_rs(n: usize, alpha: f64) -> Result<MomentValue> {
    Ok(MomentValue {
        value: renewal_mean_q(n, alpha)?,
        n,
        scheme: MomentScheme::Renewal { alpha },
        kind: MomentKind::MeanQ,
    })
}

/// Diagonal and cross parts of `E[Q_N²]` under renewal sampling:
///
/// * diagonal `(2/N⁶) Σ_{j<N_α} (j+3)(j+4)(j+5)(j+6)`
/// * cross `(2/N⁶) Σ_{k=1}^{N_α−1} (k+5)(k+6) Σ_{j<k} (j+2)(j+3)`
pub fn second_moment_q_rs_parts(n: usize, alpha: f64) -> Result<(f64, f64)> {
    let k = renewal_count(n, alpha)?;
    let diag = exact_sum(k, |j| checked_product(&[2, j + 3, j + 4, j + 5, j + 6]))?;
    let mut inner: u128 = 0;
    let mut cross: u128 = 0;
    for k in 1..k as u128 {
        let j = k - 1;
        inner = inner.checked_add((j + 2) * (j + 3)).ok_or_else(overflow)?;
        let term = checked_product(&[2, k + 5, k + 6, inner]).ok_or_else(overflow)?;
        cross = cross.checked_add(term).ok_or_else(overflow)?;
    }
    let scale = (n as f64).powi(6);
    Ok((diag as f64 / scale, cross as f64 / scale))
}

pub fn exact_second_moment_q_rs(n: usize, alpha: f64) -> Result<MomentValue> {
    let (diag, cross) = second_moment_q_rs_parts(n, alpha)?;
    Ok(MomentValue {
        value: diag + cross,
        n,
        scheme: MomentScheme::Renewal { alpha },
        kind: MomentKind::SecondMomentQ,
    })
}

/// `Var(Q_N)` under renewal sampling.
pub fn exact_variance_q_rs(n: usize, alpha: f64) -> Result<f64> {
    let m1 = renewal_mean_q(n, alpha)?;
    let m2 = exact_second_moment_q_rs(n, alpha)?.value;
    Ok(m2 - m1 * m1)
}

/// Joint densities of renewal times with `Exp(N)` gaps (`t_i = τ_i − τ_{i−1}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DensityFamily {
    /// `f_{τ_i, t_{i+1}}(a, b)`, indices `[i]`, `i ≥ 1`.
    TimeAndNextGap,
    /// `f_{τ_i, τ_{i+1}}(a, b)`, indices `[i]`, `i ≥ 1`.
    ConsecutiveTimes,
    /// `f_{τ_{i−1}, t_i, t_{i+1}}(a, b, c)`, indices `[i]`, `i ≥ 2`.
    TimeAndTwoGaps,
    /// `f_{τ_{i−1}, τ_i, τ_{i+1}}(a, b, c)`, indices `[i]`, `i ≥ 2`.
    ThreeConsecutiveTimes,
    /// `f_{τ_j, τ_{j+1}, τ_i, τ_{i+1}}(a, b, c, d)`, indices `[j, i]`, `1 ≤ j`, `j + 2 ≤ i`.
    TwoConsecutivePairs,
}

impl DensityFamily {
    pub const ALL: [DensityFamily; 5] = [
        DensityFamily::TimeAndNextGap,
        DensityFamily::ConsecutiveTimes,
        DensityFamily::TimeAndTwoGaps,
        DensityFamily::ThreeConsecutiveTimes,
        DensityFamily::TwoConsecutivePairs,
    ];

    pub fn dimension(self) -> usize {
        match self {
            DensityFamily::TimeAndNextGap | DensityFamily::ConsecutiveTimes => 2,
            DensityFamily::TimeAndTwoGaps | DensityFamily::ThreeConsecutiveTimes => 3,
            DensityFamily::TwoConsecutivePairs => 4,
        }
    }

    pub fn index_arity(self) -> usize {
        match self {
            DensityFamily::TwoConsecutivePairs => 2,
            _ => 1,
        }
    }
}

/// `k·ln x`, with `0·ln 0 = 0`.
fn xlogx(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * x.ln()
    }
}

/// Evaluates one of the renewal joint densities at `points`; 0 off support.
pub fn joint_density(family: DensityFamily, indices: &[usize], points: &[f64], n: f64) -> Result<f64> {
    if indices.len() != family.index_arity() {
        return invalid_param(format!(
            "{family:?} takes {} indices, got {}",
            family.index_arity(),
            indices.len()
        ));
    }
    if points.len() != family.dimension() {
        return invalid_param(format!(
            "{family:?} takes {} points, got {}",
            family.dimension(),
            points.len()
        ));
    }
    if !(n > 0.0 && n.is_finite()) {
        return invalid_param(format!("rate must be positive, got {n}"));
    }
    if points.iter().any(|p| p.is_nan() || *p < 0.0) {
        return Ok(0.0);
    }
    let ln_n = n.ln();
    let log_density = match family {
        DensityFamily::TimeAndNextGap | DensityFamily::ConsecutiveTimes => {
            let i = indices[0];
            if i < 1 {
                return invalid_param("index i must be >= 1");
            }
            let (a, b) = (points[0], points[1]);
            let exponent = match family {
                DensityFamily::TimeAndNextGap => a + b,
                _ => {
                    if a > b {
                        return Ok(0.0);
                    }
                    b
                }
            };
            let i = i as f64;
            (i + 1.0) * ln_n - ln_gamma(i) + xlogx(i - 1.0, a) - n * exponent
        }
        DensityFamily::TimeAndTwoGaps | DensityFamily::ThreeConsecutiveTimes => {
            let i = indices[0];
            if i < 2 {
                return invalid_param("index i must be >= 2");
            }
            let (a, b, c) = (points[0], points[1], points[2]);
            let exponent = match family {
                DensityFamily::TimeAndTwoGaps => a + b + c,
                _ => {
                    if a > b || b > c {
                        return Ok(0.0);
                    }
                    c
                }
            };
            let i = i as f64;
            (i + 1.0) * ln_n - ln_gamma(i - 1.0) + xlogx(i - 2.0, a) - n * exponent
        }
        DensityFamily::TwoConsecutivePairs => {
            let (j, i) = (indices[0], indices[1]);
            if j < 1 || i < j + 2 {
                return invalid_param(format!("need 1 <= j and j + 2 <= i, got j={j}, i={i}"));
            }
            let (a, b, c, d) = (points[0], points[1], points[2], points[3]);
            if a > b || b > c || c > d {
                return Ok(0.0);
            }
            let (j, i) = (j as f64, i as f64);
            (i + 1.0) * ln_n - ln_gamma(j) - ln_gamma(i - j - 1.0) + xlogx(j - 1.0, a)
                + xlogx(i - j - 2.0, c - b)
                - n * d
        }
    };
    Ok(log_density.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn js_second_moment_small_n() {
        // n = 2: E[τ₁³] with τ₁ = ½ + ν is 1/8 + 3c₁/8 = 5/32 at c₁ = 1/12.
        let v = exact_second_moment_na_js(2, 1.0 / 12.0).unwrap().value;
        assert!((v - 5.0 / 32.0).abs() < 1e-15);
        assert!(exact_second_moment_na_js(1, 1.0 / 12.0).is_err());
        assert!(exact_second_moment_na_js(5, 0.0).is_err());
    }

    #[test]
    fn js_limits() {
        let na = exact_second_moment_na_js(10_000, 1.0 / 12.0).unwrap().value;
        let q = exact_mean_q_js(10_000, 1.0 / 12.0).unwrap().value;
        assert!((na - 1.0 / 3.0).abs() < 1e-3);
        assert!((q - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn js_mean_q_deterministic_grid() {
        assert_eq!(exact_mean_q_js(2, 0.0).unwrap().value, 0.625);
    }

    #[test]
    fn rs_small_cases() {
        assert_eq!(exact_second_moment_na_rs(1, 1.0).unwrap().value, 6.0);
        assert_eq!(exact_mean_q_rs(1, 1.0).unwrap().value, 6.0);
        assert_eq!(exact_second_moment_na_rs(2, 1.0).unwrap().value, 2.25);
        // E[τ₁⁶] = Γ(7) at N = 1
        assert_eq!(exact_second_moment_q_rs(1, 1.0).unwrap().value, 720.0);
        assert!(exact_mean_q_rs(1, 0.5).is_err());
    }

    #[test]
    fn rs_limits() {
        let a = 0.98f64;
        let v = exact_second_moment_na_rs(5000, a).unwrap().value;
        assert!((v - a.powi(3) / 3.0).abs() < 1e-2);
        let v = exact_mean_q_rs(10_000, 1.0).unwrap().value;
        assert!((v - 1.0 / 3.0).abs() < 1e-3);
        let (_, cross) = second_moment_q_rs_parts(10_000, 1.0).unwrap();
        assert!((cross - 1.0 / 9.0).abs() < 1e-2);
        assert!(exact_variance_q_rs(10_000, 1.0).unwrap() < 1e-3);
    }

    #[test]
    fn rate_of_approach() {
        for n in [100usize, 1000, 10_000] {
            let rs = exact_mean_q_rs(n, 1.0).unwrap().value;
            let js = exact_second_moment_na_js(n, 1.0 / 12.0).unwrap().value;
            assert!((rs - 1.0 / 3.0).abs() <= 5.0 / n as f64);
            assert!((js - 1.0 / 3.0).abs() <= 5.0 / n as f64);
        }
    }

    #[test]
    fn huge_n_overflow_is_an_error() {
        assert!(second_moment_q_rs_parts(50_000_000, 1.0).is_err());
    }

    #[test]
    fn consecutive_density_point_value() {
        let f = joint_density(DensityFamily::ConsecutiveTimes, &[1], &[0.5, 1.0], 1.0).unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn density_support_and_arity() {
        for fam in DensityFamily::ALL {
            let idx: Vec<usize> = if fam.index_arity() == 2 { vec![1, 3] } else { vec![2] };
            let mut pts: Vec<f64> = (0..fam.dimension()).map(|i| 0.1 * (i + 1) as f64).collect();
            assert!(joint_density(fam, &idx, &pts, 3.0).unwrap() > 0.0);
            pts.reverse();
            let v = joint_density(fam, &idx, &pts, 3.0).unwrap();
            match fam {
                DensityFamily::TimeAndNextGap | DensityFamily::TimeAndTwoGaps => assert!(v > 0.0),
                _ => assert_eq!(v, 0.0),
            }
            pts[0] = -1.0;
            assert_eq!(joint_density(fam, &idx, &pts, 3.0).unwrap(), 0.0);
            assert!(joint_density(fam, &[1, 2, 3], &pts, 3.0).is_err());
        }
        assert!(joint_density(DensityFamily::TwoConsecutivePairs, &[2, 3], &[0.1, 0.2, 0.3, 0.4], 1.0).is_err());
        assert!(joint_density(DensityFamily::ThreeConsecutiveTimes, &[1], &[0.1, 0.2, 0.3], 1.0).is_err());
    }
}
