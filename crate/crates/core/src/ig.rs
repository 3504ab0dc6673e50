//! Count distributions built on renewal processes with inverse-Gaussian
//! interarrival times (RP-IG and ERP-IG).
//!
//! The IG cdf is F(x; μ, λ) = Φ(z₁) + e^{2λ/μ} Φ(z₂), and the sum of n iid
//! IG(μ, λ) variables is IG(nμ, n²λ), so both families need only the normal
//! cdf. The ERP probabilities use Kₙ = ∫₀ᵗ F⁽ⁿ⁾(u) du, which integrates by
//! parts to
//!   Kₙ(t) = (t − nμ)Φ(z₁) + (t + nμ) e^{2nλ/μ} Φ(z₂),
//! with z₁, z₂ evaluated at the n-sum parameters (nμ, n²λ). The e^{2nλ/μ}Φ(z₂)
//! product is always formed in log space; the exponent grows linearly in n
//! and would overflow on its own.

use crate::error::{Error, Result};
use crate::gamma::{NEG_PROB_HARD_LIMIT, TAIL_EPS};
use crate::specfun::{ln_phi, phi};

/// Inverse-Gaussian interarrival parameters with observation window `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgRenewalParams {
    /// Interarrival mean μ (> 0, time units).
    pub mu: f64,
    /// IG shape λ (> 0, time units); interarrival variance is μ³/λ.
    pub lambda: f64,
    /// Exposure time t (> 0).
    pub t: f64,
}

impl IgRenewalParams {
    pub fn new(mu: f64, lambda: f64, t: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("lambda", lambda), ("t", t)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!(
                    "IgRenewalParams: {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { mu, lambda, t })
    }

    pub fn unit(mu: f64, lambda: f64) -> Result<Self> {
        Self::new(mu, lambda, 1.0)
    }

    /// Equilibrium count mean t/μ.
    pub fn erp_mean(&self) -> f64 {
        self.t / self.mu
    }
}

/// Inverse-Gaussian cdf F(x; μ, λ). Returns 0 at x = 0; negative x is a
/// domain error.
pub fn ig_cdf(x: f64, mu: f64, lambda: f64) -> Result<f64> {
    if !mu.is_finite() || mu <= 0.0 || !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::domain(format!(
            "ig_cdf: mu and lambda must be positive, got mu={mu}, lambda={lambda}"
        )));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("ig_cdf: x must be >= 0, got {x}")));
    }
    Ok(ig_cdf_unchecked(x, mu, lambda))
}

fn ig_cdf_unchecked(x: f64, mu: f64, lambda: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    let root = (lambda / x).sqrt();
    let z1 = root * (x / mu - 1.0);
    let z2 = -root * (x / mu + 1.0);
    let second = (2.0 * lambda / mu + ln_phi(z2)).exp();
    (phi(z1) + second).clamp(0.0, 1.0)
}

/// Cdf of the sum of n iid IG(μ, λ) variables: IG(nμ, n²λ) by additivity.
pub fn ig_sum_cdf(n: u32, x: f64, p: &IgRenewalParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("ig_sum_cdf: n must be >= 1"));
    }
    let nf = n as f64;
    ig_cdf(x, nf * p.mu, nf * nf * p.lambda)
}

/// Kₙ = ∫₀ᵗ F⁽ⁿ⁾(u) du in closed form; always in [0, t].
pub fn integral_k(n: u32, p: &IgRenewalParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("integral_k: n must be >= 1"));
    }
    let nf = n as f64;
    let (nmu, nlam) = (nf * p.mu, nf * nf * p.lambda);
    let root = (nlam / p.t).sqrt();
    let z1 = root * (p.t / nmu - 1.0);
    let z2 = -root * (p.t / nmu + 1.0);
    let head = (p.t - nmu) * phi(z1);
    let tail = (p.t + nmu) * (2.0 * nlam / nmu + ln_phi(z2)).exp();
    Ok((head + tail).clamp(0.0, p.t))
}

fn clamp_prob(q: f64, what: &str) -> Result<f64> {
    if q < NEG_PROB_HARD_LIMIT {
        return Err(Error::numerical(format!("{what} evaluated to {q}")));
    }
    Ok(q.clamp(0.0, 1.0))
}

/// Pmf of the ordinary RP-IG count: Pₙ = F⁽ⁿ⁾(t) − F⁽ⁿ⁺¹⁾(t).
pub fn rp_ig_pmf(n: u32, p: &IgRenewalParams) -> f64 {
    let nf = n as f64;
    let upper = ig_cdf_unchecked(p.t, (nf + 1.0) * p.mu, (nf + 1.0) * (nf + 1.0) * p.lambda);
    if n == 0 {
        (1.0 - upper).clamp(0.0, 1.0)
    } else {
        let lower = ig_cdf_unchecked(p.t, nf * p.mu, nf * nf * p.lambda);
        (lower - upper).clamp(0.0, 1.0)
    }
}

/// Survival Prob(N(t) >= n) of the RP-IG count, i.e. F⁽ⁿ⁾(t).
pub fn rp_ig_count_survival(n: u32, p: &IgRenewalParams) -> Result<f64> {
    ig_sum_cdf(n, p.t, p)
}

/// Pmf of the equilibrium ERP-IG count; same Q-from-integral template as the
/// gamma family with Kₙ in place of Iₙ.
pub fn erp_ig_pmf(n: u32, p: &IgRenewalParams) -> Result<f64> {
    let mu = p.mu;
    let q = match n {
        0 => 1.0 - p.t / mu + integral_k(1, p)? / mu,
        1 => p.t / mu + (integral_k(2, p)? - 2.0 * integral_k(1, p)?) / mu,
        _ => (integral_k(n - 1, p)? - 2.0 * integral_k(n, p)? + integral_k(n + 1, p)?) / mu,
    };
    clamp_prob(q, "erp_ig_pmf")
}

/// Count survival Gₙ of the ERP-IG count.
pub fn erp_ig_count_survival(n: u32, p: &IgRenewalParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("erp_ig_count_survival: n must be >= 1"));
    }
    let g = if n == 1 {
        (p.t - integral_k(1, p)?) / p.mu
    } else {
        (integral_k(n - 1, p)? - integral_k(n, p)?) / p.mu
    };
    clamp_prob(g, "erp_ig_count_survival")
}

/// Truncation point: smallest n with Gₙ < 1e-10, capped at max(200, 20·t/μ).
pub fn erp_ig_n_max(p: &IgRenewalParams) -> u32 {
    let cap = 200f64.max(20.0 * p.erp_mean()).ceil() as u32;
    for n in 1..=cap {
        match erp_ig_count_survival(n, p) {
            Ok(g) if g < TAIL_EPS => return n,
            _ => {}
        }
    }
    cap
}

/// ERP-IG pmf table for n = 0..=n_max, sharing Kₙ evaluations.
pub fn erp_ig_pmf_table(p: &IgRenewalParams, n_max: u32) -> Result<Vec<f64>> {
    let ints: Vec<f64> = (1..=n_max + 1)
        .map(|n| integral_k(n, p))
        .collect::<Result<_>>()?;
    let mu = p.mu;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(clamp_prob(1.0 - p.t / mu + ints[0] / mu, "erp_ig_pmf")?);
    if n_max >= 1 {
        out.push(clamp_prob(p.t / mu + (ints[1] - 2.0 * ints[0]) / mu, "erp_ig_pmf")?);
    }
    for n in 2..=n_max as usize {
        out.push(clamp_prob((ints[n - 2] - 2.0 * ints[n - 1] + ints[n]) / mu, "erp_ig_pmf")?);
    }
    Ok(out)
}
