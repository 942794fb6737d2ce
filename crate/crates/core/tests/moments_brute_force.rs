//! Closed-form moments against brute-force polynomial expansion.
//!
//! `Q_N` is a cubic in the gaps (renewal) or in the jitters (jittered), so
//! its moments follow from expanding the polynomial and taking moments of
//! independent variables term by term.

mod common;

use common::{bracket_poly, exp_moment, renewal_time_polys, Poly};
use randtime_lse::oracle::{
    exact_mean_q_js, exact_mean_q_rs, exact_second_moment_na_js, exact_second_moment_na_rs,
    exact_second_moment_q_rs, exact_variance_q_rs,
};
use randtime_lse::sampling::{effective_count, JitterKind};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn renewal_mean_and_second_moment_of_q() {
    for (n, alpha) in [(1, 1.0), (2, 1.0), (3, 1.0), (5, 1.0), (6, 1.0), (6, 0.5), (7, 0.9)] {
        let m = effective_count(alpha, n);
        let q = bracket_poly(&renewal_time_polys(m));
        let rate = n as f64;
        let mean = q.expect(|_, p| exp_moment(rate, p));
        let second = q.mul(&q).expect(|_, p| exp_moment(rate, p));

        let oracle_mean = exact_mean_q_rs(n, alpha).unwrap().value;
        assert!(rel(oracle_mean, mean) < 1e-12, "E[Q] n={n} a={alpha}: {oracle_mean} vs {mean}");
        let oracle_na = exact_second_moment_na_rs(n, alpha).unwrap().value;
        assert!(rel(oracle_na, mean) < 1e-12);
        let oracle_second = exact_second_moment_q_rs(n, alpha).unwrap().value;
        assert!(rel(oracle_second, second) < 1e-12, "E[Q²] n={n} a={alpha}: {oracle_second} vs {second}");
        let var = exact_variance_q_rs(n, alpha).unwrap();
        assert!((var - (second - mean * mean)).abs() < 1e-10 * second);
    }
}

/// Jittered times `i/N + ν_i` with centred, symmetric `ν_i`.
fn jittered_time_polys(n: usize, count: usize) -> Vec<Poly> {
    (1..=count)
        .map(|i| Poly::constant(count, i as f64 / n as f64).add(&Poly::var(count, i - 1)))
        .collect()
}

fn jitter_moment(n: usize, c1: f64, p: u8) -> f64 {
    match p {
        0 => 1.0,
        1 | 3 => 0.0,
        2 => c1 / (n * n) as f64,
        _ => panic!("cubic bracket needs moments up to 3"),
    }
}

#[test]
fn jittered_mean_of_q() {
    for kind in JitterKind::ALL {
        let c1 = kind.second_moment_coefficient();
        for n in 2..=7 {
            let full = bracket_poly(&jittered_time_polys(n, n)).expect(|_, p| jitter_moment(n, c1, p));
            let oracle = exact_mean_q_js(n, c1).unwrap().value;
            assert!(rel(oracle, full) < 1e-12, "{kind:?} n={n}: {oracle} vs {full}");

            // The estimator drops τ_N, so N·A_N sees only j ≤ N−2.
            let trimmed = bracket_poly(&jittered_time_polys(n, n - 1)).expect(|_, p| jitter_moment(n, c1, p));
            let oracle = exact_second_moment_na_js(n, c1).unwrap().value;
            assert!(rel(oracle, trimmed) < 1e-12, "{kind:?} n={n}: {oracle} vs {trimmed}");
        }
    }
}

#[test]
fn jitter_free_grid_has_the_regular_sum() {
    let n = 2;
    let q = bracket_poly(&jittered_time_polys(n, n)).expect(|_, p| jitter_moment(n, 0.0, p));
    assert!((q - 0.625).abs() < 1e-15);
}
