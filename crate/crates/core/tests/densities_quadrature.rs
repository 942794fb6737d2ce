//! Joint densities, tail probabilities and jitter laws against quadrature.

mod common;

use common::{
    alternating_binomial_sum, beta_identity, bracket_poly, exp_moment, factorial, gamma_tail_by_quadrature,
    integrate, kronrod_panel, renewal_time_polys, Poly,
};
use proptest::prelude::*;
use randtime_lse::oracle::{joint_density, DensityFamily};
use randtime_lse::sampling::{tail_exact, JitterKind};

const RATE: f64 = 1.0;
const UPPER: f64 = 80.0;
const TOL: f64 = 1e-11;

fn density(family: DensityFamily, idx: &[usize], pts: &[f64]) -> f64 {
    joint_density(family, idx, pts, RATE).unwrap()
}

/// `∫ g·f` over the ordered region `0 < a < b < UPPER` for the
/// `ConsecutiveTimes` density at index `i`.
fn consecutive_times_moment(i: usize, rate: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    integrate(
        |b| {
            // Inner integrand is a polynomial in `a` times a constant.
            integrate(
                |a| g(a, b) * joint_density(DensityFamily::ConsecutiveTimes, &[i], &[a, b], rate).unwrap(),
                0.0,
                b,
                TOL * 1e-2,
            )
        },
        0.0,
        UPPER / rate,
        TOL,
    )
}

#[test]
fn two_dimensional_densities_integrate_to_one() {
    for i in 1..=5 {
        let times = consecutive_times_moment(i, RATE, |_, _| 1.0);
        assert!((times - 1.0).abs() < 1e-6, "ConsecutiveTimes i={i}: {times}");

        let gaps = integrate(
            |a| {
                integrate(
                    |b| density(DensityFamily::TimeAndNextGap, &[i], &[a, b]),
                    0.0,
                    UPPER,
                    TOL,
                )
            },
            0.0,
            UPPER,
            TOL,
        );
        assert!((gaps - 1.0).abs() < 1e-6, "TimeAndNextGap i={i}: {gaps}");
    }
}

#[test]
fn three_dimensional_densities_integrate_to_one() {
    for i in 2..=5 {
        let times = integrate(
            |c| {
                kronrod_panel(
                    |b| kronrod_panel(|a| density(DensityFamily::ThreeConsecutiveTimes, &[i], &[a, b, c]), 0.0, b),
                    0.0,
                    c,
                )
            },
            0.0,
            UPPER,
            TOL,
        );
        assert!((times - 1.0).abs() < 1e-6, "ThreeConsecutiveTimes i={i}: {times}");

        // Truncate the gap axes earlier: three nested adaptive rules.
        let cut = 45.0;
        let gaps = integrate(
            |a| {
                integrate(
                    |b| integrate(|c| density(DensityFamily::TimeAndTwoGaps, &[i], &[a, b, c]), 0.0, cut, 1e-10),
                    0.0,
                    cut,
                    1e-10,
                )
            },
            0.0,
            cut,
            1e-10,
        );
        assert!((gaps - 1.0).abs() < 1e-6, "TimeAndTwoGaps i={i}: {gaps}");
    }
}

/// `∫ g·f` over `0 < a < b < c < d` for the `TwoConsecutivePairs` density.
fn pairs_moment(j: usize, i: usize, rate: f64, g: impl Fn(f64, f64, f64, f64) -> f64) -> f64 {
    let f = |a, b, c, d| g(a, b, c, d) * joint_density(DensityFamily::TwoConsecutivePairs, &[j, i], &[a, b, c, d], rate).unwrap();
    integrate(
        |d| {
            kronrod_panel(
                |c| kronrod_panel(|b| kronrod_panel(|a| f(a, b, c, d), 0.0, b), 0.0, c),
                0.0,
                d,
            )
        },
        0.0,
        UPPER / rate,
        TOL,
    )
}

#[test]
fn four_dimensional_density_integrates_to_one() {
    for (j, i) in [(1, 3), (1, 4), (1, 5), (2, 4), (2, 5), (3, 5)] {
        let total = pairs_moment(j, i, RATE, |_, _, _, _| 1.0);
        assert!((total - 1.0).abs() < 1e-6, "TwoConsecutivePairs ({j},{i}): {total}");
    }
}

#[test]
fn cross_moment_of_next_time_squared_and_current_time() {
    // E[τ_{j+1}² τ_j] = (j+3)(j+2)j/N³
    let (j, n) = (3usize, 10.0);
    let got = consecutive_times_moment(j, n, |a, b| b * b * a);
    let want = ((j + 3) * (j + 2) * j) as f64 / n.powi(3);
    assert!((got - want).abs() < 1e-6, "{got} vs {want}");
}

#[test]
fn single_bracket_term_moments() {
    // E[X_j] and E[X_j²] for X_j = τ_{j+1}²(τ_{j+1} − τ_j).
    let n = 2.0;
    for j in 1..=4usize {
        let first = consecutive_times_moment(j, n, |a, b| b * b * (b - a));
        let want = ((j + 2) * (j + 3)) as f64 / n.powi(3);
        assert!((first - want).abs() < 1e-9 * want, "E[X_{j}] {first} vs {want}");

        let second = consecutive_times_moment(j, n, |a, b| (b * b * (b - a)).powi(2));
        let want = (2 * (j + 3) * (j + 4) * (j + 5) * (j + 6)) as f64 / n.powi(6);
        assert!((second - want).abs() < 1e-9 * want, "E[X_{j}²] {second} vs {want}");
    }
}

#[test]
fn separated_bracket_terms_match_gap_expansion() {
    let n = 3.0;
    for (j, i) in [(1usize, 3usize), (1, 4), (2, 4)] {
        let quad = pairs_moment(j, i, n, |a, b, c, d| b * b * (b - a) * d * d * (d - c));
        let times = renewal_time_polys(i + 1);
        let term = |k: usize| bracket_poly(&times[k - 1..=k]).sub(&bracket_poly(&times[k - 1..k]));
        let xj = term(j).sub(&Poly::constant(i + 1, 0.0));
        let prod = xj.mul(&term(i));
        let want = prod.expect(|_, p| exp_moment(n, p));
        assert!((quad - want).abs() < 1e-9 * want, "E[X_{j} X_{i}] {quad} vs {want}");
    }
}

#[test]
fn tail_matches_gamma_quadrature() {
    for (alpha, n) in [(0.95, 1000usize), (0.9, 100), (1.0, 50), (0.99, 500), (0.97, 10)] {
        let k = randtime_lse::sampling::effective_count(alpha, n) as u32;
        let quad = gamma_tail_by_quadrature(k, n as f64);
        let exact = tail_exact(alpha, n).unwrap();
        assert!((exact - quad).abs() < 1e-8 * quad, "({alpha},{n}): {exact} vs {quad}");
    }
}

#[test]
fn jitter_laws_by_quadrature() {
    for kind in JitterKind::ALL {
        let mass = integrate(|y| kind.standard_pdf(y), -1.0, 1.0, 1e-14);
        assert!((mass - 1.0).abs() < 1e-12, "{kind:?} mass {mass}");
        let mean = integrate(|y| y * kind.standard_pdf(y), -1.0, 1.0, 1e-14);
        assert!(mean.abs() < 1e-12);
        // ν = y/(2N), so N²·E[ν²] = E[y²]/4.
        let c1 = integrate(|y| y * y * kind.standard_pdf(y), -1.0, 1.0, 1e-14) / 4.0;
        assert!((c1 - kind.second_moment_coefficient()).abs() < 1e-12, "{kind:?} c1 {c1}");
        for y in [-0.9, -0.5, 0.0, 0.3, 0.77] {
            let cdf = integrate(|s| kind.standard_pdf(s), -1.0, y, 1e-14);
            assert!((cdf - kind.standard_cdf(y)).abs() < 1e-12, "{kind:?} cdf({y})");
        }
    }
}

#[test]
fn binomial_sum_identity_small_cases() {
    assert!((alternating_binomial_sum(0, 0) - 1.0).abs() < 1e-15);
    assert!((alternating_binomial_sum(1, 1) - 1.0 / 6.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn polynomial_beta_identity(a in 0u32..=6, c in 0u32..=6, b in 0.1f64..3.0) {
        let quad = kronrod_panel(|x| x.powi(a as i32) * (b - x).powi(c as i32), 0.0, b);
        let want = beta_identity(a, c, b);
        prop_assert!((quad - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn alternating_binomial_identity(a in 0u32..=6, m in 0u32..=6) {
        let want = factorial(a) * factorial(m) / factorial(a + m + 1);
        let got = alternating_binomial_sum(a, m);
        prop_assert!((got - want).abs() <= 1e-9 * want);
    }
}
