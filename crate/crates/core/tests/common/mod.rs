//! Quadrature oracles shared by the integration suites.
//!
//! Everything here integrates defining expectations numerically, sharing no
//! code with the closed forms under test. The option-payoff oracle splits the
//! integration domain at the payoff kink so each panel sees an analytic
//! integrand; Gauss rules applied across the kink would stall at ~1e-3
//! accuracy regardless of node count.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = legendre_p_dp(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_p_dp(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_p_dp(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// 32-node Gauss-Legendre integral of f over [a, b], in panels of width <= 2.
fn panel_gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = legendre_rule(32);
    let panels = ((b - a) / 2.0).ceil() as usize;
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// E (x e^{m + sigma xi} - K e^{-rT})^+ for standard normal xi, by
/// kink-split Gauss-Legendre quadrature of the defining integral.
pub fn h_oracle(x: f64, m: f64, sigma2: f64, strike: f64, rate: f64, maturity: f64) -> f64 {
    let disc_strike = strike * (-rate * maturity).exp();
    if sigma2 == 0.0 {
        return (x * m.exp() - disc_strike).max(0.0);
    }
    let sigma = sigma2.sqrt();
    // Payoff is positive exactly above the kink.
    let kink = ((disc_strike / x).ln() - m) / sigma;
    let lo = kink.max(-45.0);
    let hi = 45.0f64.max(kink + 40.0);
    let norm = 1.0 / (2.0 * PI).sqrt();
    let integrand = |xi: f64| {
        (x * (m + sigma * xi).exp() - disc_strike) * norm * (-0.5 * xi * xi).exp()
    };
    panel_gauss(&integrand, lo, hi)
}

/// Classical Black-Scholes call value as a quadrature of the lognormal
/// expectation (the same defining integral, reparametrized).
pub fn classical_bs_oracle(s: f64, strike: f64, rate: f64, sigma: f64, tau: f64) -> f64 {
    h_oracle(s, -0.5 * sigma * sigma * tau, sigma * sigma * tau, strike, rate, tau)
}

fn gauss_density(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * PI).sqrt()
}

fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// Adaptive-Simpson integral of f over [a, b] to absolute tolerance eps.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, eps, 48)
}

/// Standard normal cdf by adaptive quadrature of the density from 0.
pub fn phi_oracle(x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let (a, b) = if x > 0.0 { (0.0, x) } else { (x, 0.0) };
    let tail = adaptive_simpson(&gauss_density, a, b, 1e-14);
    if x > 0.0 {
        0.5 + tail
    } else {
        0.5 - tail
    }
}

/// Sample mean and standard error, for band checks on Monte Carlo output.
pub fn mean_stderr(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
