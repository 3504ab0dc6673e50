//! Shared helpers for the integration tests: an adaptive Simpson integrator
//! used as an independent oracle for the closed-form integrals, and small
//! statistics utilities for the Monte-Carlo checks.

#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = simpson(a, b, fa, fc, fb);
    adaptive(f, a, b, fa, fb, fc, whole, tol, 50)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive(f, a, m, fa, fm, flm, left, tol / 2.0, depth - 1)
            + adaptive(f, m, b, fm, fb, frm, right, tol / 2.0, depth - 1)
    }
}

/// Sample mean of a slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (denominator n-1).
pub fn sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Empirical histogram of counts, as frequencies out to `n_max` inclusive.
pub fn empirical_pmf(counts: &[u32], n_max: u32) -> Vec<f64> {
    let mut h = vec![0.0; n_max as usize + 1];
    for &c in counts {
        if c <= n_max {
            h[c as usize] += 1.0;
        }
    }
    for v in &mut h {
        *v /= counts.len() as f64;
    }
    h
}

/// Check an empirical pmf cell against its binomial sampling error: returns
/// the deviation in units of the binomial standard error.
pub fn binomial_z(p_hat: f64, p: f64, n: usize) -> f64 {
    let se = (p * (1.0 - p) / n as f64).sqrt();
    (p_hat - p).abs() / se
}

/// Kolmogorov distance between a sorted sample and a cdf.
pub fn kolmogorov_distance(sorted: &[f64], cdf: &dyn Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - f).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_polynomials_exactly() {
        let v = integrate(&|x| x * x * x + 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((v - (4.0 + 4.0)).abs() < 1e-10);
    }

    #[test]
    fn simpson_handles_exponential_tail() {
        let v = integrate(&|x| (-x).exp(), 0.0, 30.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-9);
    }
}
