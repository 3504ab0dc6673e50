//! Exact and asymptotic moments of the equilibrium renewal count families.
//!
//! The exact variance is var N(t) = (2/μ) Σ_{i>=1} Iᵢ(t) + (t/μ)(1 − t/μ)
//! (with Kᵢ in place of Iᵢ for IG interarrivals). The asymptotic forms come
//! from the renewal-function expansion M(u) = u/μ + (σ²−μ²)/(2μ²) + o(1),
//! whose integrated correction gives the constant m₂²/(2μ⁴) − m₃/(3μ³) in
//! terms of the interarrival raw moments:
//!   gamma: αt/β² + 1/6 − 1/(6β²)
//!   IG:    t/λ + 1/6 − (μ/λ)²/2
//! Both constants vanish at the Poisson slice and are good once t is many
//! interarrival means long.

use crate::error::{Error, Result};
use crate::gamma::{erp_gamma_n_max, integral_i, GammaRenewalParams};
use crate::ig::{erp_ig_n_max, integral_k, IgRenewalParams};

const SERIES_REL_EPS: f64 = 1e-12;

/// E N(t) = t/μ for the equilibrium gamma family.
pub fn erp_gamma_mean(p: &GammaRenewalParams) -> f64 {
    p.erp_mean()
}

/// E N(t) = t/μ for the equilibrium IG family.
pub fn erp_ig_mean(p: &IgRenewalParams) -> f64 {
    p.erp_mean()
}

fn variance_series(
    mu: f64,
    t: f64,
    n_max: u32,
    mut integral: impl FnMut(u32) -> Result<f64>,
) -> Result<f64> {
    let mut acc = 0.0;
    let mut converged = false;
    for i in 1..=n_max {
        let term = integral(i)?;
        acc += term;
        // The early terms are O(t); only judge convergence once decay starts.
        if i as f64 > t / mu && term < SERIES_REL_EPS * acc.max(1.0) {
            converged = true;
            break;
        }
    }
    let var = (2.0 / mu) * acc + (t / mu) * (1.0 - t / mu);
    if !converged {
        return Err(Error::NonConvergence(format!(
            "variance series not converged after {n_max} terms; partial value {var}"
        )));
    }
    Ok(var)
}

/// Exact ERP-γ variance by summing the Iᵢ series; errors if the series has
/// not converged within `n_max` terms.
pub fn erp_gamma_variance_exact(p: &GammaRenewalParams, n_max: u32) -> Result<f64> {
    variance_series(p.interarrival_mean(), p.t, n_max, |i| integral_i(i, p))
}

/// Exact ERP-γ variance with the default series cap (10 × truncation point).
pub fn erp_gamma_variance(p: &GammaRenewalParams) -> Result<f64> {
    erp_gamma_variance_exact(p, 10 * erp_gamma_n_max(p).max(20))
}

/// Exact ERP-IG variance by summing the Kᵢ series.
pub fn erp_ig_variance_exact(p: &IgRenewalParams, n_max: u32) -> Result<f64> {
    variance_series(p.mu, p.t, n_max, |i| integral_k(i, p))
}

/// Exact ERP-IG variance with the default series cap.
pub fn erp_ig_variance(p: &IgRenewalParams) -> Result<f64> {
    erp_ig_variance_exact(p, 10 * erp_ig_n_max(p).max(20))
}

/// Large-αt asymptotic ERP-γ variance: αt/β² + (β²−1)/(6β²). At β = 1 the
/// correction vanishes exactly and the value is αt.
pub fn erp_gamma_variance_asymptotic(p: &GammaRenewalParams) -> f64 {
    let b2 = p.beta * p.beta;
    p.alpha * p.t / b2 + (b2 - 1.0) / (6.0 * b2)
}

/// Large-t asymptotic ERP-IG variance.
pub fn erp_ig_variance_asymptotic(p: &IgRenewalParams) -> f64 {
    let r = p.mu / p.lambda;
    p.t / p.lambda + 1.0 / 6.0 - 0.5 * r * r
}
