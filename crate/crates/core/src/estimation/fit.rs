//! Fitting driver: multi-start simplex + quasi-Newton maximization of the
//! log-likelihood on the transformed scale, finite-difference covariance,
//! natural-scale standard errors via the transformation Jacobian, and
//! delta-method marginal effects.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimation::optim::{bfgs_polish, fd_hessian, nelder_mead};
use crate::estimation::{
    log_likelihood, log_likelihood_flagged, Family, ModelSpec, ParamLayout, RegressionDesign,
};
use crate::model::CountModel;
use crate::sampling::RngStream;

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_simplex_iters: usize,
    pub max_polish_iters: usize,
    /// Seed for the perturbed extra starts of mixture fits.
    pub seed: u64,
    pub compute_covariance: bool,
    /// Covariate column names for reporting; defaults to x1, x2, ...
    pub covariate_names: Option<Vec<String>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_simplex_iters: 4000,
            max_polish_iters: 300,
            seed: 0,
            compute_covariance: true,
            covariate_names: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParamEstimate {
    pub name: String,
    pub value: f64,
    pub se: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct MarginalEffect {
    pub name: String,
    pub effect: f64,
    pub se: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub spec: ModelSpec,
    /// Optimum on the transformed (unconstrained) scale.
    pub theta: Vec<f64>,
    /// Natural-scale estimates with delta-method standard errors.
    pub params: Vec<ParamEstimate>,
    pub minus_loglik: f64,
    /// Covariance of the transformed parameters (inverse observed
    /// information), when available.
    pub covariance: Option<DMatrix<f64>>,
    /// Set when the information matrix was singular and a pseudo-inverse was
    /// used instead.
    pub cov_pseudo_inverse: bool,
    pub converged: bool,
    pub iterations: usize,
    pub n_obs: usize,
    /// Average fitted mean Ê(N) over the sample.
    pub mean_hat: f64,
    /// Effects of each covariate on the count mean, with delta-method SEs;
    /// present for covariate fits with an available covariance.
    pub marginal_effects: Option<Vec<MarginalEffect>>,
    /// Some pmf term hit the underflow floor at the optimum.
    pub underflow: bool,
    pub covariate_names: Vec<String>,
}

impl FitResult {
    /// Natural-scale estimate by name.
    pub fn param(&self, name: &str) -> Option<&ParamEstimate> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Maximum-likelihood fit of `spec` to `data`.
pub fn fit(spec: &ModelSpec, data: &RegressionDesign, opts: &FitOptions) -> Result<FitResult> {
    let layout = ParamLayout::new(*spec, data.n_covariates());
    let starts = start_values(&layout, data, opts.seed);

    let mut objective = |theta: &[f64]| -log_likelihood(spec, theta, data);

    let mut best: Option<crate::estimation::optim::OptimResult> = None;
    let mut iterations = 0;
    for start in &starts {
        if !objective(start).is_finite() {
            continue;
        }
        let nm = nelder_mead(&mut objective, start, 0.25, opts.max_simplex_iters);
        let polished = bfgs_polish(&mut objective, &nm.x, opts.max_polish_iters);
        iterations += nm.iterations + polished.iterations;
        let (cand, cand_conv) = if polished.f <= nm.f {
            (polished.clone(), polished.converged || nm.converged)
        } else {
            (nm.clone(), nm.converged)
        };
        let mut cand = cand;
        cand.converged = cand_conv;
        match &best {
            Some(b) if b.f <= cand.f => {}
            _ => best = Some(cand),
        }
    }
    let best = best.ok_or_else(|| {
        Error::NonConvergence("no start point had a finite likelihood".into())
    })?;
    if !best.f.is_finite() {
        return Err(Error::NonConvergence(format!(
            "optimizer ended at non-finite -loglik {}",
            best.f
        )));
    }

    let theta = best.x.clone();
    let (_, underflow) = log_likelihood_flagged(spec, &theta, data);

    // Covariance = inverse of the observed information (Hessian of -loglik).
    let mut cov = None;
    let mut cov_pseudo = false;
    if opts.compute_covariance {
        let h = fd_hessian(&mut objective, &theta, 1e-5);
        let dim = theta.len();
        let hm = DMatrix::from_fn(dim, dim, |i, j| h[i][j]);
        match invert_information(&hm) {
            Some((c, pseudo)) => {
                cov = Some(c);
                cov_pseudo = pseudo;
            }
            None => {
                cov = None;
            }
        }
    }

    let unpacked = layout.unpack(&theta)?;
    let mean_hat = average_mean(&unpacked, data)?;

    let cov_names = covariate_names(&layout, opts);
    let (names, natural_fn) = natural_param_map(&layout, data, &cov_names);
    let values = natural_fn(&theta)?;
    let ses = cov.as_ref().and_then(|c| {
        natural_ses(&natural_fn, &theta, c).ok()
    });
    let params: Vec<ParamEstimate> = names
        .iter()
        .enumerate()
        .map(|(i, name)| ParamEstimate {
            name: name.clone(),
            value: values[i],
            se: ses.as_ref().map(|s| s[i]),
        })
        .collect();

    let marginal_effects = if layout.k > 0 {
        Some(marginal_effects_internal(
            &layout, &theta, data, cov.as_ref(), &cov_names,
        )?)
    } else {
        None
    };

    Ok(FitResult {
        spec: *spec,
        theta,
        params,
        minus_loglik: best.f,
        covariance: cov,
        cov_pseudo_inverse: cov_pseudo,
        converged: best.converged,
        iterations,
        n_obs: data.len(),
        mean_hat,
        marginal_effects,
        underflow,
        covariate_names: cov_names,
    })
}

/// Delta-method marginal effects ∂E(N|x)/∂x_j = β_j·E(N|x) at a specific
/// covariate row.
pub fn marginal_effects_at(fit: &FitResult, data: &RegressionDesign, x: &[f64]) -> Result<Vec<MarginalEffect>> {
    let layout = ParamLayout::new(fit.spec, data.n_covariates());
    if layout.k == 0 {
        return Err(Error::domain("marginal effects require a covariate fit"));
    }
    if x.len() != layout.k {
        return Err(Error::domain("covariate row length mismatch"));
    }
    let offset = layout.coef_offset();
    let mut out = Vec::with_capacity(layout.k);
    for j in 0..layout.k {
        let mut h = |theta: &[f64]| -> Result<f64> {
            let u = layout.unpack(theta)?;
            Ok(u.coefs[j] * u.mean_at(x)?)
        };
        let effect = h(&fit.theta)?;
        let se = match &fit.covariance {
            Some(cov) => delta_se(&mut h, &fit.theta, cov).ok(),
            None => None,
        };
        let _ = offset;
        out.push(MarginalEffect {
            name: fit.covariate_names[j].clone(),
            effect,
            se,
        });
    }
    Ok(out)
}

// Effects at the sample-average fitted mean: β_j × Ê(N), the reporting
// convention used by the fit itself.
fn marginal_effects_internal(
    layout: &ParamLayout,
    theta: &[f64],
    data: &RegressionDesign,
    cov: Option<&DMatrix<f64>>,
    names: &[String],
) -> Result<Vec<MarginalEffect>> {
    let mut out = Vec::with_capacity(layout.k);
    for j in 0..layout.k {
        let mut h = |th: &[f64]| -> Result<f64> {
            let u = layout.unpack(th)?;
            Ok(u.coefs[j] * average_mean(&u, data)?)
        };
        let effect = h(theta)?;
        let se = match cov {
            Some(c) => delta_se(&mut h, theta, c).ok(),
            None => None,
        };
        out.push(MarginalEffect {
            name: names[j].clone(),
            effect,
            se,
        });
    }
    Ok(out)
}

fn average_mean(unpacked: &crate::estimation::Unpacked, data: &RegressionDesign) -> Result<f64> {
    if unpacked.coefs.is_empty() {
        return unpacked.base.mean();
    }
    let mut acc = 0.0;
    for i in 0..data.len() {
        acc += unpacked.mean_at(data.covariate_row(i))?;
    }
    Ok(acc / data.len() as f64)
}

fn covariate_names(layout: &ParamLayout, opts: &FitOptions) -> Vec<String> {
    match &opts.covariate_names {
        Some(names) if names.len() == layout.k => names.clone(),
        _ => (1..=layout.k).map(|j| format!("x{j}")).collect(),
    }
}

type NaturalFn<'a> = Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a>;

// Natural-scale parameter vector as a function of θ, for values and for the
// delta-method Jacobian. Mixture components are reported ordered by
// descending weight so output is deterministic under label switching.
fn natural_param_map<'a>(
    layout: &'a ParamLayout,
    data: &'a RegressionDesign,
    cov_names: &[String],
) -> (Vec<String>, NaturalFn<'a>) {
    let family = layout.spec.family;
    let k = layout.k;
    let t = layout.spec.t;

    let mut names: Vec<String> = match family {
        Family::Poisson => vec!["alpha".into()],
        Family::RpGamma | Family::ErpGamma => vec!["alpha".into(), "beta".into()],
        Family::RpGammaHurdle { .. } => vec!["alpha".into(), "beta".into(), "delta".into()],
        Family::ErpGammaBetaMixture => {
            vec!["alpha".into(), "beta".into(), "beta2".into(), "w".into()]
        }
        Family::ErpGammaAlphaMixture => {
            vec!["alpha".into(), "alpha2".into(), "beta".into(), "w".into()]
        }
        Family::RpIg | Family::ErpIg => vec!["mu".into(), "lambda".into()],
    };
    if k > 0 {
        names.push("eta0".into());
        names.extend(cov_names.iter().cloned());
    }

    let f: NaturalFn<'a> = Box::new(move |theta: &[f64]| -> Result<Vec<f64>> {
        let u = layout.unpack(theta)?;
        let mean_hat = average_mean(&u, data)?;
        let mut vals: Vec<f64> = match &u.base {
            CountModel::Poisson { rate, .. } => {
                if k > 0 {
                    // Report the implied Poisson rate at the average mean.
                    vec![mean_hat / t]
                } else {
                    vec![*rate]
                }
            }
            CountModel::RpGamma(p) | CountModel::ErpGamma(p) => {
                if k > 0 {
                    vec![p.beta * mean_hat / t, p.beta]
                } else {
                    vec![p.alpha, p.beta]
                }
            }
            CountModel::RpGammaHurdle(p, h) => {
                if k > 0 {
                    vec![p.beta * mean_hat / t, p.beta, h.delta]
                } else {
                    vec![p.alpha, p.beta, h.delta]
                }
            }
            CountModel::ErpGammaMixture(mix) => {
                let (c1, c2, w) = if mix.w >= 0.5 {
                    (mix.component1, mix.component2, mix.w)
                } else {
                    (mix.component2, mix.component1, 1.0 - mix.w)
                };
                match family {
                    Family::ErpGammaBetaMixture => vec![c1.alpha, c1.beta, c2.beta, w],
                    _ => vec![c1.alpha, c2.alpha, c1.beta, w],
                }
            }
            CountModel::RpIg(p) | CountModel::ErpIg(p) => {
                if k > 0 {
                    // Baseline at the average mean: μ = t/Ê, λ = φμ.
                    let mu = t / mean_hat;
                    vec![mu, (p.lambda / p.mu) * mu]
                } else {
                    vec![p.mu, p.lambda]
                }
            }
        };
        if k > 0 {
            // η₀: baseline mean of the link (first transformed coordinate is
            // ln η₀ for every covariate layout except the α-mixture, where the
            // mean shift has no separate intercept; report the implied one).
            let eta0 = match family {
                Family::ErpGammaAlphaMixture => u.base.mean()?,
                _ => theta[0].exp(),
            };
            vals.push(eta0);
            vals.extend(u.coefs.iter().copied());
        }
        Ok(vals)
    });
    (names, f)
}

fn natural_ses(
    natural_fn: &NaturalFn<'_>,
    theta: &[f64],
    cov: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    let base = natural_fn(theta)?;
    let dim = theta.len();
    let out_dim = base.len();
    // FD Jacobian of the natural map.
    let mut jac = DMatrix::zeros(out_dim, dim);
    let mut th = theta.to_vec();
    for j in 0..dim {
        let h = 1e-6 * theta[j].abs().max(1.0);
        th[j] = theta[j] + h;
        let up = natural_fn(&th)?;
        th[j] = theta[j] - h;
        let dn = natural_fn(&th)?;
        th[j] = theta[j];
        for i in 0..out_dim {
            jac[(i, j)] = (up[i] - dn[i]) / (2.0 * h);
        }
    }
    let nat_cov = &jac * cov * jac.transpose();
    Ok((0..out_dim)
        .map(|i| nat_cov[(i, i)].max(0.0).sqrt())
        .collect())
}

fn delta_se(
    h: &mut dyn FnMut(&[f64]) -> Result<f64>,
    theta: &[f64],
    cov: &DMatrix<f64>,
) -> Result<f64> {
    let mut th = theta.to_vec();
    let mut grad = vec![0.0; theta.len()];
    for j in 0..theta.len() {
        let step = 1e-6 * theta[j].abs().max(1.0);
        th[j] = theta[j] + step;
        let up = h(&th)?;
        th[j] = theta[j] - step;
        let dn = h(&th)?;
        th[j] = theta[j];
        grad[j] = (up - dn) / (2.0 * step);
    }
    let g = DMatrix::from_column_slice(theta.len(), 1, &grad);
    let v = (g.transpose() * cov * g)[(0, 0)];
    Ok(v.max(0.0).sqrt())
}

// Invert the observed information; falls back to an SVD pseudo-inverse when
// the matrix is numerically singular. Returns None when even the
// pseudo-inverse has non-positive diagonal entries.
fn invert_information(h: &DMatrix<f64>) -> Option<(DMatrix<f64>, bool)> {
    if h.iter().any(|v| !v.is_finite()) {
        return None;
    }
    if let Some(chol) = h.clone().cholesky() {
        let inv = chol.inverse();
        if inv.diagonal().iter().all(|&d| d > 0.0) {
            return Some((inv, false));
        }
    }
    let svd = h.clone().svd(true, true);
    let inv = svd.pseudo_inverse(1e-12).ok()?;
    if inv.diagonal().iter().all(|&d| d.is_finite() && d >= 0.0) {
        Some((inv, true))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Start values
// ---------------------------------------------------------------------------

fn start_values(layout: &ParamLayout, data: &RegressionDesign, seed: u64) -> Vec<Vec<f64>> {
    let (mean, var) = data.count_moments();
    let t = layout.spec.t;
    let mean = mean.max(0.05);
    let var = var.max(1e-3);
    // Dispersion-matched shape: asymptotically var ≈ mean/β.
    let beta0 = (mean / var).clamp(0.05, 20.0);
    let alpha0 = beta0 * mean / t;
    let k = layout.k;
    let with_coefs = |mut base: Vec<f64>| {
        base.extend(std::iter::repeat(0.0).take(k));
        base
    };

    let mut starts: Vec<Vec<f64>> = Vec::new();
    match layout.spec.family {
        Family::Poisson => {
            // With covariates the leading coordinate is ln η₀ = ln mean.
            let lead = if k > 0 { mean.ln() } else { (mean / t).ln() };
            starts.push(with_coefs(vec![lead]));
        }
        Family::RpGamma | Family::ErpGamma => {
            let lead = if k > 0 { mean.ln() } else { alpha0.ln() };
            starts.push(with_coefs(vec![lead, beta0.ln()]));
        }
        Family::RpGammaHurdle { .. } => {
            let lead = if k > 0 { mean.ln() } else { alpha0.ln() };
            // s = ln β makes δ = 0 at the start.
            starts.push(with_coefs(vec![lead, beta0.ln(), beta0.ln()]));
        }
        Family::ErpGammaBetaMixture => {
            let lead = |w: f64, b1: f64, b2: f64| {
                if k > 0 {
                    mean.ln()
                } else {
                    // α matching the sample mean: mean = tα(w/β1 + (1-w)/β2).
                    (mean / (t * (w / b1 + (1.0 - w) / b2))).ln()
                }
            };
            let (b1, b2, w) = ((2.0 * beta0).min(30.0), 0.5 * beta0, 0.7);
            starts.push(with_coefs(vec![lead(w, b1, b2), b1.ln(), b2.ln(), logit(w)]));
            let (b1, b2, w) = (1.3, 0.8, 0.5);
            starts.push(with_coefs(vec![lead(w, b1, b2), b1.ln(), b2.ln(), logit(w)]));
        }
        Family::ErpGammaAlphaMixture => {
            let scale = |a1: f64, a2: f64, w: f64| {
                // mean = t(wα1 + (1-w)α2)/β at zero coefficients.
                mean * beta0 / (t * (w * a1 + (1.0 - w) * a2))
            };
            let (a1, a2, w) = (1.5 * alpha0, 0.6 * alpha0, 0.6);
            let s = scale(a1, a2, w);
            starts.push(with_coefs(vec![(a1 * s).ln(), (a2 * s).ln(), beta0.ln(), logit(w)]));
            let (a1, a2, w) = (3.0 * alpha0, 0.8 * alpha0, 0.2);
            let s = scale(a1, a2, w);
            starts.push(with_coefs(vec![(a1 * s).ln(), (a2 * s).ln(), beta0.ln(), logit(w)]));
        }
        Family::RpIg | Family::ErpIg => {
            if k > 0 {
                // [ln η₀, ln φ]: φ = λ/μ; dispersion-matched φ ≈ mean·μ²-ish,
                // start from the var/mean ratio.
                let phi0 = (t / var).max(1e-3) / (t / mean).max(1e-3);
                starts.push(with_coefs(vec![mean.ln(), phi0.ln()]));
            } else {
                let mu0 = t / mean;
                let lam0 = (t / var).max(1e-3);
                starts.push(with_coefs(vec![mu0.ln(), lam0.ln()]));
            }
        }
    }

    // A perturbed extra start for the multi-modal mixture likelihoods.
    if matches!(
        layout.spec.family,
        Family::ErpGammaBetaMixture | Family::ErpGammaAlphaMixture
    ) {
        let mut rng = RngStream::new(seed);
        let base = starts[0].clone();
        let jitter: Vec<f64> = base
            .iter()
            .map(|v| v + 0.3 * rng.standard_normal())
            .collect();
        starts.push(jitter);
    }
    starts
}

fn logit(w: f64) -> f64 {
    (w / (1.0 - w)).ln()
}
