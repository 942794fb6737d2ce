//! Independent numerical oracles shared by the integration tests.
//!
//! Nothing here calls into the library's own closed forms; the quadrature is
//! a plain adaptive Gauss–Kronrod 7/15 rule.

#![allow(dead_code)]

use statrs::function::gamma::ln_gamma;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// `∫_a^b f` to absolute tolerance `tol`, bisecting the worst panel first.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    const MAX_PANELS: usize = 200;
    if a == b {
        return 0.0;
    }
    let (k, e) = gk15(&mut f, a, b);
    let mut panels = vec![(a, b, k, e)];
    loop {
        let total_err: f64 = panels.iter().map(|p| p.3).sum();
        let total: f64 = panels.iter().map(|p| p.2).sum();
        if total_err <= tol.max(1e-13 * total.abs()) || panels.len() >= MAX_PANELS {
            return total;
        }
        let worst = (0..panels.len())
            .max_by(|&i, &j| panels[i].3.total_cmp(&panels[j].3))
            .unwrap();
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (k1, e1) = gk15(&mut f, lo, mid);
        let (k2, e2) = gk15(&mut f, mid, hi);
        panels.push((lo, mid, k1, e1));
        panels.push((mid, hi, k2, e2));
    }
}

/// Single 15-point Kronrod panel; exact for polynomials up to degree 22.
pub fn kronrod_panel(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    gk15(&mut f, a, b).0
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `∫_0^b x^a (b − x)^c dx = a!·c!/(a+c+1)!·b^{a+c+1}`.
pub fn beta_identity(a: u32, c: u32, b: f64) -> f64 {
    factorial(a) * factorial(c) / factorial(a + c + 1) * b.powi((a + c + 1) as i32)
}

/// `Σ_{i=0}^{m} C(m, i)(−1)^i/(a+i+1) = a!·m!/(a+m+1)!`.
pub fn alternating_binomial_sum(a: u32, m: u32) -> f64 {
    let mut sum = 0.0;
    let mut binom = 1.0;
    for i in 0..=m {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom / f64::from(a + i + 1);
        binom = binom * f64::from(m - i) / f64::from(i + 1);
    }
    sum
}

/// Density of `Gamma(shape k, rate n)` at `x`.
pub fn gamma_pdf(k: u32, n: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = f64::from(k);
    (k * n.ln() + (k - 1.0) * x.ln() - n * x - ln_gamma(k)).exp()
}

/// `P(Gamma(k, n) > 1)` by quadrature of the density over `[1, ∞)`.
pub fn gamma_tail_by_quadrature(k: u32, n: f64) -> f64 {
    let kf = f64::from(k);
    let mode = ((kf - 1.0) / n).max(1.0);
    let upper = mode + 60.0 * kf.sqrt() / n + 60.0 / n;
    // Split at the mode so the adaptive rule sees the peak.
    integrate(|x| gamma_pdf(k, n, x), 1.0, mode, 1e-16) + integrate(|x| gamma_pdf(k, n, x), mode, upper, 1e-16)
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sparse multivariate polynomial keyed by exponent vectors.
#[derive(Debug, Clone, Default)]
pub struct Poly {
    terms: std::collections::HashMap<Vec<u8>, f64>,
    vars: usize,
}

impl Poly {
    pub fn constant(vars: usize, c: f64) -> Self {
        let mut terms = std::collections::HashMap::new();
        if c != 0.0 {
            terms.insert(vec![0; vars], c);
        }
        Poly { terms, vars }
    }

    pub fn var(vars: usize, k: usize) -> Self {
        let mut key = vec![0; vars];
        key[k] = 1;
        Poly {
            terms: [(key, 1.0)].into_iter().collect(),
            vars,
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            *out.terms.entry(k.clone()).or_insert(0.0) += c;
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect(),
            vars: self.vars,
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::constant(self.vars, 0.0);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key: Vec<u8> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                *out.terms.entry(key).or_insert(0.0) += ca * cb;
            }
        }
        out
    }

    /// Expectation when the variables are independent with `moment(var, power)`.
    pub fn expect(&self, moment: impl Fn(usize, u8) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(key, c)| c * key.iter().enumerate().map(|(v, &p)| moment(v, p)).product::<f64>())
            .sum()
    }
}

/// `Σ_{j=0}^{m−1} τ_{j+1}²(τ_{j+1} − τ_j)` with `τ_0 = 0` as a polynomial.
pub fn bracket_poly(times: &[Poly]) -> Poly {
    let vars = times[0].vars;
    let mut q = Poly::constant(vars, 0.0);
    let mut prev = Poly::constant(vars, 0.0);
    for t in times {
        q = q.add(&t.mul(t).mul(&t.sub(&prev)));
        prev = t.clone();
    }
    q
}

/// Renewal times `τ_1 … τ_m` as partial sums of gap variables.
pub fn renewal_time_polys(m: usize) -> Vec<Poly> {
    let mut acc = Poly::constant(m, 0.0);
    (0..m)
        .map(|k| {
            acc = acc.add(&Poly::var(m, k));
            acc.clone()
        })
        .collect()
}

/// `E[t^p]` for `t ~ Exp(rate)`.
pub fn exp_moment(rate: f64, p: u8) -> f64 {
    factorial(u32::from(p)) / rate.powi(i32::from(p))
}
