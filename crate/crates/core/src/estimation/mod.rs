//! Maximum-likelihood fitting of every count family, with and without
//! covariates on the mean, plus covariance estimation and delta-method
//! marginal effects.
//!
//! All optimization happens on a transformed, unconstrained scale: log for
//! positive parameters, logit for the mixture weight, and δ = exp(s) − β for
//! the hurdle shift (which keeps β + δ > 0). The mean regression uses the
//! log link η = η₀ exp(𝛃ᵀx): for the gamma families the per-observation rate
//! is α_i = (β/t)·η₀·exp(𝛃ᵀx_i) with the shape β global; for the IG families
//! both μ and λ scale as exp(−𝛃ᵀx) so that φ = λ/μ stays fixed.

pub mod fit;
pub mod optim;

pub use fit::{fit, marginal_effects_at, FitOptions, FitResult, MarginalEffect, ParamEstimate};

use crate::error::{Error, Result};
use crate::gamma::{GammaMixtureSpec, GammaRenewalParams, HurdleSpec};
use crate::ig::IgRenewalParams;
use crate::model::CountModel;

/// Underflow floor for per-observation pmf values inside the likelihood.
pub const PMF_FLOOR: f64 = 1e-300;

// Transformed parameters are confined to [-50, 50]; beyond that the
// exponentials are degenerate and the point is rejected.
const THETA_BOUND: f64 = 50.0;

/// Model family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Poisson,
    RpGamma,
    ErpGamma,
    /// Two ERP-γ components sharing α, differing in β.
    ErpGammaBetaMixture,
    /// Two ERP-γ components sharing β, differing in α.
    ErpGammaAlphaMixture,
    /// RP-γ with the m-th interarrival shape shifted by δ.
    RpGammaHurdle { m: u32 },
    RpIg,
    ErpIg,
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::Poisson => "poisson".into(),
            Family::RpGamma => "rp-gamma".into(),
            Family::ErpGamma => "erp-gamma".into(),
            Family::ErpGammaBetaMixture => "erp-gamma-beta-mixture".into(),
            Family::ErpGammaAlphaMixture => "erp-gamma-alpha-mixture".into(),
            Family::RpGammaHurdle { m } => format!("rp-gamma-hurdle({m})"),
            Family::RpIg => "rp-ig".into(),
            Family::ErpIg => "erp-ig".into(),
        }
    }
}

/// What to fit: a family plus the exposure window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    pub t: f64,
}

impl ModelSpec {
    pub fn new(family: Family, t: f64) -> Result<Self> {
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::domain(format!("ModelSpec: t must be positive, got {t}")));
        }
        if let Family::RpGammaHurdle { m } = family {
            if m == 0 {
                return Err(Error::domain("ModelSpec: hurdle index m must be >= 1"));
            }
        }
        Ok(Self { family, t })
    }
}

/// Observed counts, covariates, and optional right-censoring thresholds.
/// A row with `censor_at = Some(M)` was recorded only as "count >= M".
#[derive(Debug, Clone)]
pub struct RegressionDesign {
    counts: Vec<u32>,
    covariates: Vec<Vec<f64>>,
    censor_at: Vec<Option<u32>>,
    k: usize,
}

impl RegressionDesign {
    pub fn new(
        counts: Vec<u32>,
        covariates: Vec<Vec<f64>>,
        censor_at: Vec<Option<u32>>,
    ) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::data("RegressionDesign: no observations"));
        }
        if covariates.len() != counts.len() || censor_at.len() != counts.len() {
            return Err(Error::data(format!(
                "RegressionDesign: row counts disagree ({} counts, {} covariate rows, {} censor rows)",
                counts.len(),
                covariates.len(),
                censor_at.len()
            )));
        }
        let k = covariates[0].len();
        for row in &covariates {
            if row.len() != k {
                return Err(Error::data("RegressionDesign: ragged covariate matrix"));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::data("RegressionDesign: non-finite covariate value"));
            }
        }
        if censor_at.iter().any(|c| matches!(c, Some(0))) {
            return Err(Error::data("RegressionDesign: censoring threshold must be >= 1"));
        }
        Ok(Self {
            counts,
            covariates,
            censor_at,
            k,
        })
    }

    /// Counts only, no covariates, no censoring.
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        let n = counts.len();
        Self::new(counts, vec![vec![]; n], vec![None; n])
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn n_covariates(&self) -> usize {
        self.k
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn covariate_row(&self, i: usize) -> &[f64] {
        &self.covariates[i]
    }

    pub fn censor(&self, i: usize) -> Option<u32> {
        self.censor_at[i]
    }

    /// Column means of the covariate matrix.
    pub fn covariate_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.k];
        for row in &self.covariates {
            for (j, v) in row.iter().enumerate() {
                m[j] += v;
            }
        }
        for v in &mut m {
            *v /= self.counts.len() as f64;
        }
        m
    }

    /// Sample mean and variance of the counts (censored rows enter at their
    /// threshold; good enough for start values).
    pub fn count_moments(&self) -> (f64, f64) {
        let vals: Vec<f64> = self
            .counts
            .iter()
            .zip(&self.censor_at)
            .map(|(&y, c)| c.map(|m| m as f64).unwrap_or(y as f64))
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        (mean, var)
    }
}

/// Log-link mean: η₀ exp(𝛃ᵀx).
pub fn mean_link(eta0: f64, coefs: &[f64], x: &[f64]) -> f64 {
    let bx: f64 = coefs.iter().zip(x).map(|(b, v)| b * v).sum();
    eta0 * bx.exp()
}

/// The transformed-parameter layout of one model spec, and the mapping down
/// to per-observation `CountModel`s.
#[derive(Debug, Clone)]
pub(crate) struct ParamLayout {
    pub spec: ModelSpec,
    pub k: usize,
}

impl ParamLayout {
    pub fn new(spec: ModelSpec, k: usize) -> Self {
        Self { spec, k }
    }

    pub fn base_dim(&self) -> usize {
        match self.spec.family {
            Family::Poisson => 1,
            Family::RpGamma | Family::ErpGamma | Family::RpIg | Family::ErpIg => 2,
            Family::RpGammaHurdle { .. } => 3,
            Family::ErpGammaBetaMixture | Family::ErpGammaAlphaMixture => 4,
        }
    }

    pub fn dim(&self) -> usize {
        self.base_dim() + self.k
    }

    /// Index of the first regression coefficient in the transformed vector.
    pub fn coef_offset(&self) -> usize {
        self.base_dim()
    }

    pub fn unpack(&self, theta: &[f64]) -> Result<Unpacked> {
        if theta.len() != self.dim() {
            return Err(Error::domain(format!(
                "parameter vector has length {}, expected {}",
                theta.len(),
                self.dim()
            )));
        }
        if theta.iter().any(|v| !v.is_finite() || v.abs() > THETA_BOUND) {
            return Err(Error::domain("transformed parameter out of bounds"));
        }
        let t = self.spec.t;
        let coefs = theta[self.base_dim()..].to_vec();
        let has_cov = self.k > 0;
        let e = |v: f64| v.exp();
        let base = match self.spec.family {
            Family::Poisson => {
                let rate = if has_cov { e(theta[0]) / t } else { e(theta[0]) };
                CountModel::poisson(rate, t)?
            }
            Family::RpGamma | Family::ErpGamma => {
                let (alpha, beta) = if has_cov {
                    let (eta0, beta) = (e(theta[0]), e(theta[1]));
                    (beta * eta0 / t, beta)
                } else {
                    (e(theta[0]), e(theta[1]))
                };
                let p = GammaRenewalParams::new(alpha, beta, t)?;
                if matches!(self.spec.family, Family::RpGamma) {
                    CountModel::RpGamma(p)
                } else {
                    CountModel::ErpGamma(p)
                }
            }
            Family::RpGammaHurdle { m } => {
                let (alpha, beta, s) = if has_cov {
                    let (eta0, beta) = (e(theta[0]), e(theta[1]));
                    (beta * eta0 / t, beta, theta[2])
                } else {
                    (e(theta[0]), e(theta[1]), theta[2])
                };
                let delta = s.exp() - beta;
                CountModel::RpGammaHurdle(
                    GammaRenewalParams::new(alpha, beta, t)?,
                    HurdleSpec::new(m, delta)?,
                )
            }
            Family::ErpGammaBetaMixture => {
                let (beta1, beta2) = (e(theta[1]), e(theta[2]));
                let w = logistic(theta[3]);
                let alpha = if has_cov {
                    let eta0 = e(theta[0]);
                    eta0 / (t * (w / beta1 + (1.0 - w) / beta2))
                } else {
                    e(theta[0])
                };
                CountModel::ErpGammaMixture(GammaMixtureSpec::new(
                    GammaRenewalParams::new(alpha, beta1, t)?,
                    GammaRenewalParams::new(alpha, beta2, t)?,
                    w,
                )?)
            }
            Family::ErpGammaAlphaMixture => {
                let (alpha1, alpha2, beta) = (e(theta[0]), e(theta[1]), e(theta[2]));
                let w = logistic(theta[3]);
                CountModel::ErpGammaMixture(GammaMixtureSpec::new(
                    GammaRenewalParams::new(alpha1, beta, t)?,
                    GammaRenewalParams::new(alpha2, beta, t)?,
                    w,
                )?)
            }
            Family::RpIg | Family::ErpIg => {
                let (mu, lambda) = if has_cov {
                    let (eta0, phi) = (e(theta[0]), e(theta[1]));
                    let mu = t / eta0;
                    (mu, phi * mu)
                } else {
                    (e(theta[0]), e(theta[1]))
                };
                let p = IgRenewalParams::new(mu, lambda, t)?;
                if matches!(self.spec.family, Family::RpIg) {
                    CountModel::RpIg(p)
                } else {
                    CountModel::ErpIg(p)
                }
            }
        };
        Ok(Unpacked { base, coefs })
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// A validated parameter point: the baseline model (at x = 0) plus the
/// regression coefficients.
#[derive(Debug, Clone)]
pub(crate) struct Unpacked {
    pub base: CountModel,
    pub coefs: Vec<f64>,
}

impl Unpacked {
    /// Per-observation model under the log link. The gamma-family rates (and
    /// the Poisson rate) scale by exp(𝛃ᵀx); the IG parameters scale by
    /// exp(−𝛃ᵀx), which is the same mean shift with φ = λ/μ held fixed.
    pub fn model_at(&self, x: &[f64]) -> Result<CountModel> {
        if self.coefs.is_empty() {
            return Ok(self.base);
        }
        let bx: f64 = self.coefs.iter().zip(x).map(|(b, v)| b * v).sum();
        if !(-THETA_BOUND..=THETA_BOUND).contains(&bx) {
            return Err(Error::domain("linear predictor out of bounds"));
        }
        self.base.scale_mean(bx.exp())
    }

    /// Fitted count mean at covariate row x.
    pub fn mean_at(&self, x: &[f64]) -> Result<f64> {
        self.model_at(x)?.mean()
    }
}

/// Per-observation model under the fitted link; the public face of the mean
/// link for callers outside the fitting loop.
pub fn observation_model(spec: &ModelSpec, theta: &[f64], k: usize, x: &[f64]) -> Result<CountModel> {
    ParamLayout::new(*spec, k).unpack(theta)?.model_at(x)
}

/// Σᵢ log pmf(yᵢ), with censored rows contributing log Prob(N >= Mᵢ).
/// Invalid parameter points map to −∞ so optimizers can reject them.
pub fn log_likelihood(spec: &ModelSpec, theta: &[f64], data: &RegressionDesign) -> f64 {
    log_likelihood_flagged(spec, theta, data).0
}

/// As `log_likelihood`, also reporting whether any pmf hit the underflow
/// floor.
pub fn log_likelihood_flagged(
    spec: &ModelSpec,
    theta: &[f64],
    data: &RegressionDesign,
) -> (f64, bool) {
    let layout = ParamLayout::new(*spec, data.n_covariates());
    let unpacked = match layout.unpack(theta) {
        Ok(u) => u,
        Err(_) => return (f64::NEG_INFINITY, false),
    };
    let mut ll = 0.0;
    let mut underflow = false;

    if data.n_covariates() == 0 {
        // All observations share one model: evaluate each distinct term once.
        use std::collections::BTreeMap;
        let mut groups: BTreeMap<(Option<u32>, u32), usize> = BTreeMap::new();
        for i in 0..data.len() {
            *groups.entry((data.censor(i), data.counts()[i])).or_insert(0) += 1;
        }
        for ((censor, y), mult) in groups {
            let p = match term_prob(&unpacked.base, y, censor) {
                Ok(p) => p,
                Err(_) => return (f64::NEG_INFINITY, underflow),
            };
            let lp = if p < PMF_FLOOR {
                underflow = true;
                PMF_FLOOR.ln()
            } else {
                p.ln()
            };
            ll += mult as f64 * lp;
        }
    } else {
        for i in 0..data.len() {
            let model = match unpacked.model_at(data.covariate_row(i)) {
                Ok(m) => m,
                Err(_) => return (f64::NEG_INFINITY, underflow),
            };
            let p = match term_prob(&model, data.counts()[i], data.censor(i)) {
                Ok(p) => p,
                Err(_) => return (f64::NEG_INFINITY, underflow),
            };
            if p < PMF_FLOOR {
                underflow = true;
                ll += PMF_FLOOR.ln();
            } else {
                ll += p.ln();
            }
        }
    }
    (ll, underflow)
}

fn term_prob(model: &CountModel, y: u32, censor: Option<u32>) -> Result<f64> {
    match censor {
        Some(m) => model.survival(m),
        None => model.pmf(y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn design_validation() {
        assert!(RegressionDesign::from_counts(vec![]).is_err());
        assert!(RegressionDesign::new(vec![1, 2], vec![vec![1.0], vec![]], vec![None, None]).is_err());
        assert!(RegressionDesign::new(
            vec![1],
            vec![vec![f64::NAN]],
            vec![None]
        )
        .is_err());
        assert!(RegressionDesign::new(vec![1], vec![vec![]], vec![Some(0)]).is_err());
    }

    #[test]
    fn single_zero_observation_gives_log_q0() {
        let spec = ModelSpec::new(Family::ErpGamma, 1.0).unwrap();
        let data = RegressionDesign::from_counts(vec![0]).unwrap();
        let theta = [2.0f64.ln(), 1.5f64.ln()];
        let p = crate::gamma::erp_gamma_pmf(0, &GammaRenewalParams::unit(2.0, 1.5).unwrap()).unwrap();
        assert_abs_diff_eq!(log_likelihood(&spec, &theta, &data), p.ln(), epsilon = 1e-12);
    }

    #[test]
    fn censored_row_contributes_log_survival() {
        let spec = ModelSpec::new(Family::ErpGamma, 1.0).unwrap();
        let data = RegressionDesign::new(vec![5], vec![vec![]], vec![Some(3)]).unwrap();
        let theta = [2.0f64.ln(), 1.5f64.ln()];
        let g = crate::gamma::erp_gamma_count_survival(3, &GammaRenewalParams::unit(2.0, 1.5).unwrap())
            .unwrap();
        assert_abs_diff_eq!(log_likelihood(&spec, &theta, &data), g.ln(), epsilon = 1e-12);
    }

    #[test]
    fn invalid_theta_maps_to_neg_infinity() {
        let spec = ModelSpec::new(Family::ErpGamma, 1.0).unwrap();
        let data = RegressionDesign::from_counts(vec![1, 2, 3]).unwrap();
        assert_eq!(
            log_likelihood(&spec, &[100.0, 0.0], &data),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn grouped_and_rowwise_paths_agree() {
        // Same data with and without a (constant-free) covariate column of
        // zeros: identical likelihood.
        let spec = ModelSpec::new(Family::ErpGamma, 1.0).unwrap();
        let counts = vec![0, 1, 1, 2, 3, 5, 2, 1, 0, 4];
        let plain = RegressionDesign::from_counts(counts.clone()).unwrap();
        let with_zero_cov = RegressionDesign::new(
            counts.clone(),
            counts.iter().map(|_| vec![0.0]).collect(),
            vec![None; counts.len()],
        )
        .unwrap();
        let theta2 = [2.0f64.ln(), 1.2f64.ln()];
        let theta3 = [2.0f64.ln(), 1.2f64.ln(), 0.4];
        // With a zero covariate the coefficient is inert, and η₀ = mean means
        // α = βη₀/t; pick η₀ so the two parameterizations match: η₀ = tα/β.
        let eta0 = (2.0f64 / 1.2).ln();
        let theta3 = [eta0, theta3[1], theta3[2]];
        assert_abs_diff_eq!(
            log_likelihood(&spec, &theta2, &plain),
            log_likelihood(&spec, &theta3, &with_zero_cov),
            epsilon = 1e-10
        );
    }

    #[test]
    fn mean_link_scales_linearly_in_eta0() {
        let x = [0.5, -1.0];
        let b = [0.3, 0.2];
        assert_abs_diff_eq!(
            mean_link(2.0, &b, &x),
            2.0 * mean_link(1.0, &b, &x),
            epsilon = 1e-14
        );
        // Zero coefficients: every observation shares the baseline mean.
        assert_abs_diff_eq!(mean_link(1.7, &[0.0, 0.0], &x), 1.7, epsilon = 1e-14);
    }

    #[test]
    fn observation_model_applies_the_link() {
        let spec = ModelSpec::new(Family::ErpGamma, 1.0).unwrap();
        // η₀ = 2, β = 1.5, one covariate with coefficient 0.4.
        let theta = [2.0f64.ln(), 1.5f64.ln(), 0.4];
        let m = observation_model(&spec, &theta, 1, &[1.0]).unwrap();
        match m {
            CountModel::ErpGamma(p) => {
                // mean = η₀ e^{0.4} and α = β·mean/t.
                assert_abs_diff_eq!(p.erp_mean(), 2.0 * 0.4f64.exp(), epsilon = 1e-12);
                assert_abs_diff_eq!(p.beta, 1.5, epsilon = 1e-12);
            }
            other => panic!("unexpected model {other:?}"),
        }
    }
}
