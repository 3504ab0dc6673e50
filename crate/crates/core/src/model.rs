//! A single enum over every supported count family, so that likelihood code,
//! samplers, and the CLI can treat them uniformly through `pmf`, `survival`,
//! and `mean`.

use crate::error::{Error, Result};
use crate::gamma::{
    self, GammaMixtureSpec, GammaRenewalParams, HurdleSpec, TAIL_EPS,
};
use crate::ig::{self, IgRenewalParams};
use crate::specfun::{ln_gamma, lower_inc_gamma};

/// One fully-parameterized count distribution over an exposure window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountModel {
    /// Poisson with event rate `rate` over `[0, t]` (mean = rate·t).
    Poisson { rate: f64, t: f64 },
    /// Ordinary renewal process, gamma interarrivals.
    RpGamma(GammaRenewalParams),
    /// Equilibrium renewal process, gamma interarrivals.
    ErpGamma(GammaRenewalParams),
    /// RP-γ with the m-th interarrival shape shifted by δ.
    RpGammaHurdle(GammaRenewalParams, HurdleSpec),
    /// Two-component ERP-γ mixture.
    ErpGammaMixture(GammaMixtureSpec),
    /// Ordinary renewal process, inverse-Gaussian interarrivals.
    RpIg(IgRenewalParams),
    /// Equilibrium renewal process, inverse-Gaussian interarrivals.
    ErpIg(IgRenewalParams),
}

impl CountModel {
    pub fn poisson(rate: f64, t: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= 0.0 || !t.is_finite() || t <= 0.0 {
            return Err(Error::domain(format!(
                "Poisson: rate and t must be positive, got rate={rate}, t={t}"
            )));
        }
        Ok(CountModel::Poisson { rate, t })
    }

    /// Probability of exactly `n` events.
    pub fn pmf(&self, n: u32) -> Result<f64> {
        match self {
            CountModel::Poisson { rate, t } => Ok(poisson_pmf(n, rate * t)),
            CountModel::RpGamma(p) => Ok(gamma::rp_gamma_pmf(n, p)),
            CountModel::ErpGamma(p) => gamma::erp_gamma_pmf(n, p),
            CountModel::RpGammaHurdle(p, h) => gamma::rp_gamma_hurdle_pmf(n, p, h),
            CountModel::ErpGammaMixture(mix) => gamma::erp_gamma_mixture_pmf(n, mix),
            CountModel::RpIg(p) => Ok(ig::rp_ig_pmf(n, p)),
            CountModel::ErpIg(p) => ig::erp_ig_pmf(n, p),
        }
    }

    /// Count survival Prob(N(t) >= n); identically 1 at n = 0.
    pub fn survival(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        match self {
            CountModel::Poisson { rate, t } => Ok(lower_inc_gamma(n as f64, rate * t)),
            CountModel::RpGamma(p) => gamma::rp_gamma_count_survival(n, p),
            CountModel::ErpGamma(p) => gamma::erp_gamma_count_survival(n, p),
            CountModel::RpGammaHurdle(p, h) => gamma::rp_gamma_hurdle_survival(n, p, h),
            CountModel::ErpGammaMixture(mix) => gamma::erp_gamma_mixture_survival(n, mix),
            CountModel::RpIg(p) => ig::rp_ig_count_survival(n, p),
            CountModel::ErpIg(p) => ig::erp_ig_count_survival(n, p),
        }
    }

    /// Rough scale of E N(t), used to bound truncation loops.
    fn mean_hint(&self) -> f64 {
        match self {
            CountModel::Poisson { rate, t } => rate * t,
            CountModel::RpGamma(p) | CountModel::ErpGamma(p) => p.erp_mean(),
            CountModel::RpGammaHurdle(p, _) => p.erp_mean(),
            CountModel::ErpGammaMixture(mix) => mix.erp_mean(),
            CountModel::RpIg(p) | CountModel::ErpIg(p) => p.erp_mean(),
        }
    }

    /// Truncation point: smallest n with survival below 1e-10, capped at
    /// max(200, 20 × mean).
    pub fn n_max(&self) -> u32 {
        let cap = 200f64.max(20.0 * self.mean_hint()).ceil() as u32;
        for n in 1..=cap {
            match self.survival(n) {
                Ok(g) if g < TAIL_EPS => return n,
                _ => {}
            }
        }
        cap
    }

    /// E N(t). Closed form where the equilibrium identity applies, otherwise
    /// the tail sum E N = Σ_{n>=1} Prob(N >= n).
    pub fn mean(&self) -> Result<f64> {
        match self {
            CountModel::Poisson { rate, t } => Ok(rate * t),
            CountModel::ErpGamma(p) => Ok(p.erp_mean()),
            CountModel::ErpIg(p) => Ok(p.erp_mean()),
            CountModel::ErpGammaMixture(mix) => Ok(mix.erp_mean()),
            _ => {
                let n_max = self.n_max();
                let mut acc = 0.0;
                for n in 1..=n_max {
                    acc += self.survival(n)?;
                }
                Ok(acc)
            }
        }
    }

    /// Variance of N(t) by pmf summation out to the truncation point.
    pub fn variance(&self) -> Result<f64> {
        let pmf = self.pmf_table(self.n_max())?;
        let mean: f64 = pmf.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
        let m2: f64 = pmf
            .iter()
            .enumerate()
            .map(|(n, q)| (n as f64) * (n as f64) * q)
            .sum();
        Ok(m2 - mean * mean)
    }

    /// Pmf for n = 0..=n_max, using the integral-sharing tables where the
    /// family has one.
    pub fn pmf_table(&self, n_max: u32) -> Result<Vec<f64>> {
        match self {
            CountModel::ErpGamma(p) => gamma::erp_gamma_pmf_table(p, n_max),
            CountModel::ErpIg(p) => ig::erp_ig_pmf_table(p, n_max),
            CountModel::ErpGammaMixture(mix) => {
                let a = gamma::erp_gamma_pmf_table(&mix.component1, n_max)?;
                let b = gamma::erp_gamma_pmf_table(&mix.component2, n_max)?;
                Ok(a.iter()
                    .zip(&b)
                    .map(|(x, y)| mix.w * x + (1.0 - mix.w) * y)
                    .collect())
            }
            _ => (0..=n_max).map(|n| self.pmf(n)).collect(),
        }
    }

    /// Rescale the count mean by `factor > 0`, holding the dispersion shape
    /// fixed: gamma-family rates (and the Poisson rate) multiply by the
    /// factor, IG parameters divide by it so that φ = λ/μ is unchanged.
    pub fn scale_mean(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor <= 0.0 {
            return Err(Error::domain(format!(
                "scale_mean: factor must be positive, got {factor}"
            )));
        }
        let scale_gamma = |p: &GammaRenewalParams| {
            GammaRenewalParams::new(p.alpha * factor, p.beta, p.t)
        };
        let scale_ig =
            |p: &IgRenewalParams| IgRenewalParams::new(p.mu / factor, p.lambda / factor, p.t);
        Ok(match self {
            CountModel::Poisson { rate, t } => CountModel::Poisson {
                rate: rate * factor,
                t: *t,
            },
            CountModel::RpGamma(p) => CountModel::RpGamma(scale_gamma(p)?),
            CountModel::ErpGamma(p) => CountModel::ErpGamma(scale_gamma(p)?),
            CountModel::RpGammaHurdle(p, h) => CountModel::RpGammaHurdle(scale_gamma(p)?, *h),
            CountModel::ErpGammaMixture(mix) => CountModel::ErpGammaMixture(GammaMixtureSpec::new(
                scale_gamma(&mix.component1)?,
                scale_gamma(&mix.component2)?,
                mix.w,
            )?),
            CountModel::RpIg(p) => CountModel::RpIg(scale_ig(p)?),
            CountModel::ErpIg(p) => CountModel::ErpIg(scale_ig(p)?),
        })
    }

    /// Exposure time of the observation window.
    pub fn exposure(&self) -> f64 {
        match self {
            CountModel::Poisson { t, .. } => *t,
            CountModel::RpGamma(p) | CountModel::ErpGamma(p) | CountModel::RpGammaHurdle(p, _) => {
                p.t
            }
            CountModel::ErpGammaMixture(mix) => mix.component1.t,
            CountModel::RpIg(p) | CountModel::ErpIg(p) => p.t,
        }
    }
}

fn poisson_pmf(n: u32, lambda: f64) -> f64 {
    (n as f64 * lambda.ln() - lambda - ln_gamma(n as f64 + 1.0)).exp()
}
