//! Count distributions built on a renewal process with gamma interarrival
//! times: the ordinary-start RP-γ family, the equilibrium-start ERP-γ family,
//! the hurdle RP-γ(m) extension, and two-component ERP-γ mixtures.
//!
//! Everything reduces to the regularized incomplete gamma function. The
//! ERP probabilities come from the integrals
//! Iₙ = ∫₀ᵗ F⁽ⁿ⁾(u) du, which have the closed form
//! Iₙ = (t − nβ/α)·P(nβ, αt) + α⁻¹(αt)^{nβ} e^{-αt} / Γ(nβ).

use crate::error::{Error, Result};
use crate::specfun::{ln_gamma, lower_inc_gamma};

/// Tail mass below which the count distribution is truncated.
pub const TAIL_EPS: f64 = 1e-10;

/// Negative pmf values above this magnitude indicate broken numerics rather
/// than benign cancellation.
pub const NEG_PROB_HARD_LIMIT: f64 = -1e-9;

/// Gamma interarrival parameters with an observation window `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRenewalParams {
    /// Interarrival rate α (> 0, per unit time).
    pub alpha: f64,
    /// Interarrival shape β (> 0, dimensionless). β = 1 gives a Poisson
    /// process; β > 1 underdispersed counts, β < 1 overdispersed.
    pub beta: f64,
    /// Exposure time t (> 0).
    pub t: f64,
}

impl GammaRenewalParams {
    pub fn new(alpha: f64, beta: f64, t: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("t", t)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!(
                    "GammaRenewalParams: {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self { alpha, beta, t })
    }

    /// Unit exposure window, t = 1.
    pub fn unit(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0)
    }

    /// Interarrival mean μ = β/α.
    pub fn interarrival_mean(&self) -> f64 {
        self.beta / self.alpha
    }

    /// Equilibrium count mean t/μ = tα/β.
    pub fn erp_mean(&self) -> f64 {
        self.t * self.alpha / self.beta
    }
}

/// Shape shift applied to the m-th interarrival time of an RP-γ process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurdleSpec {
    /// Index (1-based) of the modified interarrival.
    pub m: u32,
    /// Shape shift δ; the m-th interarrival has shape β + δ, so δ > -β.
    pub delta: f64,
}

impl HurdleSpec {
    pub fn new(m: u32, delta: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("HurdleSpec: m must be >= 1"));
        }
        if !delta.is_finite() {
            return Err(Error::domain("HurdleSpec: delta must be finite"));
        }
        Ok(Self { m, delta })
    }

    fn check_against(&self, p: &GammaRenewalParams) -> Result<()> {
        if self.delta <= -p.beta {
            return Err(Error::domain(format!(
                "HurdleSpec: delta {} must exceed -beta = {}",
                self.delta, -p.beta
            )));
        }
        Ok(())
    }
}

/// Two-component ERP-γ mixture; components share the exposure window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMixtureSpec {
    pub component1: GammaRenewalParams,
    pub component2: GammaRenewalParams,
    /// Weight on component 1, in (0, 1).
    pub w: f64,
}

impl GammaMixtureSpec {
    pub fn new(component1: GammaRenewalParams, component2: GammaRenewalParams, w: f64) -> Result<Self> {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::domain(format!(
                "GammaMixtureSpec: weight must lie in (0,1), got {w}"
            )));
        }
        if component1.t != component2.t {
            return Err(Error::domain(
                "GammaMixtureSpec: components must share the exposure time t",
            ));
        }
        Ok(Self {
            component1,
            component2,
            w,
        })
    }

    pub fn erp_mean(&self) -> f64 {
        self.w * self.component1.erp_mean() + (1.0 - self.w) * self.component2.erp_mean()
    }
}

/// Cdf F⁽ⁿ⁾(u) of the sum of n interarrival times, i.e. P(nβ, αu).
pub fn gamma_sum_cdf(n: u32, u: f64, p: &GammaRenewalParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("gamma_sum_cdf: n must be >= 1"));
    }
    if !u.is_finite() || u < 0.0 {
        return Err(Error::domain(format!("gamma_sum_cdf: u must be >= 0, got {u}")));
    }
    Ok(lower_inc_gamma(n as f64 * p.beta, p.alpha * u))
}

/// Iₙ = ∫₀ᵗ F⁽ⁿ⁾(u) du in closed form. The (αt)^{nβ} factor is evaluated in
/// log space since nβ can reach the hundreds.
pub fn integral_i(n: u32, p: &GammaRenewalParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("integral_i: n must be >= 1"));
    }
    Ok(integral_i_unchecked(n as f64 * p.beta, p))
}

// I for an arrival-sum with arbitrary shape a (also used by hurdle variants).
fn integral_i_unchecked(a: f64, p: &GammaRenewalParams) -> f64 {
    let at = p.alpha * p.t;
    let head = (p.t - a / p.alpha) * lower_inc_gamma(a, at);
    let tail = (a * at.ln() - at - ln_gamma(a) - p.alpha.ln()).exp();
    (head + tail).clamp(0.0, p.t)
}

fn clamp_prob(q: f64, what: &str) -> Result<f64> {
    if q < NEG_PROB_HARD_LIMIT {
        return Err(Error::numerical(format!("{what} evaluated to {q}")));
    }
    Ok(q.clamp(0.0, 1.0))
}

/// Pmf of the ordinary renewal process count:
/// P₀ = 1 − F⁽¹⁾(t), Pₙ = F⁽ⁿ⁾(t) − F⁽ⁿ⁺¹⁾(t).
pub fn rp_gamma_pmf(n: u32, p: &GammaRenewalParams) -> f64 {
    let at = p.alpha * p.t;
    let upper = lower_inc_gamma((n as f64 + 1.0) * p.beta, at);
    if n == 0 {
        (1.0 - upper).clamp(0.0, 1.0)
    } else {
        let lower = lower_inc_gamma(n as f64 * p.beta, at);
        (lower - upper).clamp(0.0, 1.0)
    }
}

/// Survival Prob(N(t) >= n) of the ordinary renewal count, i.e. F⁽ⁿ⁾(t).
pub fn rp_gamma_count_survival(n: u32, p: &GammaRenewalParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("rp_gamma_count_survival: n must be >= 1"));
    }
    Ok(lower_inc_gamma(n as f64 * p.beta, p.alpha * p.t))
}

/// Pmf of the equilibrium renewal process count:
/// Q₀ = 1 − t/μ + I₁/μ, Q₁ = t/μ + (I₂ − 2I₁)/μ,
/// Qₙ = (Iₙ₋₁ − 2Iₙ + Iₙ₊₁)/μ for n > 1.
pub fn erp_gamma_pmf(n: u32, p: &GammaRenewalParams) -> Result<f64> {
    let mu = p.interarrival_mean();
    let q = match n {
        0 => 1.0 - p.t / mu + integral_i(1, p)? / mu,
        1 => p.t / mu + (integral_i(2, p)? - 2.0 * integral_i(1, p)?) / mu,
        _ => {
            (integral_i(n - 1, p)? - 2.0 * integral_i(n, p)? + integral_i(n + 1, p)?) / mu
        }
    };
    clamp_prob(q, "erp_gamma_pmf")
}

/// Count survival Gₙ = Prob(N(t) >= n) of the equilibrium renewal count:
/// G₁ = t/μ − I₁/μ, Gₙ = (Iₙ₋₁ − Iₙ)/μ for n > 1. (G₀ ≡ 1 by convention.)
pub fn erp_gamma_count_survival(n: u32, p: &GammaRenewalParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("erp_gamma_count_survival: n must be >= 1"));
    }
    let mu = p.interarrival_mean();
    let g = if n == 1 {
        (p.t - integral_i(1, p)?) / mu
    } else {
        (integral_i(n - 1, p)? - integral_i(n, p)?) / mu
    };
    clamp_prob(g, "erp_gamma_count_survival")
}

// Shape of the n-th arrival sum under a hurdle at index m: nβ + θ(n−m)δ.
fn hurdle_shape(n: u32, p: &GammaRenewalParams, h: &HurdleSpec) -> f64 {
    let mut shape = n as f64 * p.beta;
    if n >= h.m {
        shape += h.delta;
    }
    shape
}

/// Survival Prob(N(t) >= n) of the hurdle RP-γ(m) count.
pub fn rp_gamma_hurdle_survival(n: u32, p: &GammaRenewalParams, h: &HurdleSpec) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("rp_gamma_hurdle_survival: n must be >= 1"));
    }
    h.check_against(p)?;
    let shape = hurdle_shape(n, p, h);
    if shape <= 0.0 {
        return Err(Error::domain(format!(
            "rp_gamma_hurdle_survival: shifted shape {shape} is not positive"
        )));
    }
    Ok(lower_inc_gamma(shape, p.alpha * p.t))
}

/// Pmf of the RP-γ(m) distribution, where the m-th interarrival time has
/// shape β + δ. With δ = 0 this is exactly `rp_gamma_pmf`.
pub fn rp_gamma_hurdle_pmf(n: u32, p: &GammaRenewalParams, h: &HurdleSpec) -> Result<f64> {
    let upper = rp_gamma_hurdle_survival(n + 1, p, h)?;
    let q = if n == 0 {
        1.0 - upper
    } else {
        rp_gamma_hurdle_survival(n, p, h)? - upper
    };
    clamp_prob(q, "rp_gamma_hurdle_pmf")
}

/// Pmf of a two-component ERP-γ mixture.
pub fn erp_gamma_mixture_pmf(n: u32, mix: &GammaMixtureSpec) -> Result<f64> {
    Ok(mix.w * erp_gamma_pmf(n, &mix.component1)?
        + (1.0 - mix.w) * erp_gamma_pmf(n, &mix.component2)?)
}

/// Count survival of a two-component ERP-γ mixture.
pub fn erp_gamma_mixture_survival(n: u32, mix: &GammaMixtureSpec) -> Result<f64> {
    Ok(mix.w * erp_gamma_count_survival(n, &mix.component1)?
        + (1.0 - mix.w) * erp_gamma_count_survival(n, &mix.component2)?)
}

/// Truncation point for tail sums: the smallest n with Gₙ < 1e-10, capped at
/// max(200, 20·t/μ).
pub fn erp_gamma_n_max(p: &GammaRenewalParams) -> u32 {
    let cap = 200f64.max(20.0 * p.erp_mean()).ceil() as u32;
    for n in 1..=cap {
        match erp_gamma_count_survival(n, p) {
            Ok(g) if g < TAIL_EPS => return n,
            _ => {}
        }
    }
    cap
}

/// ERP-γ pmf table for n = 0..=n_max, sharing the Iₙ evaluations across
/// entries (each Iₙ is computed once instead of three times).
pub fn erp_gamma_pmf_table(p: &GammaRenewalParams, n_max: u32) -> Result<Vec<f64>> {
    let mu = p.interarrival_mean();
    let ints: Vec<f64> = (1..=n_max + 1)
        .map(|n| integral_i(n, p))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(clamp_prob(1.0 - p.t / mu + ints[0] / mu, "erp_gamma_pmf")?);
    if n_max >= 1 {
        out.push(clamp_prob(
            p.t / mu + (ints[1] - 2.0 * ints[0]) / mu,
            "erp_gamma_pmf",
        )?);
    }
    for n in 2..=n_max as usize {
        let q = (ints[n - 2] - 2.0 * ints[n - 1] + ints[n]) / mu;
        out.push(clamp_prob(q, "erp_gamma_pmf")?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(alpha: f64, beta: f64) -> GammaRenewalParams {
        GammaRenewalParams::unit(alpha, beta).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(GammaRenewalParams::new(0.0, 1.0, 1.0).is_err());
        assert!(GammaRenewalParams::new(1.0, -1.0, 1.0).is_err());
        assert!(GammaRenewalParams::new(1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn sum_cdf_exponential_and_erlang() {
        let p = params(1.0, 1.0);
        assert_abs_diff_eq!(
            gamma_sum_cdf(1, 1.0, &p).unwrap(),
            1.0 - (-1.0f64).exp(),
            epsilon = 1e-12
        );
        // Erlang-2: 1 - e^{-1}(1 + 1).
        assert_abs_diff_eq!(
            gamma_sum_cdf(2, 1.0, &p).unwrap(),
            1.0 - 2.0 * (-1.0f64).exp(),
            epsilon = 1e-12
        );
        assert_eq!(gamma_sum_cdf(3, 0.0, &p).unwrap(), 0.0);
        assert!(gamma_sum_cdf(0, 1.0, &p).is_err());
    }

    #[test]
    fn integral_i_exponential_closed_form() {
        // α=β=1: I₁ = ∫₀¹ (1 - e^{-u}) du = e^{-1}.
        let p = params(1.0, 1.0);
        assert_abs_diff_eq!(integral_i(1, &p).unwrap(), (-1.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn integral_i_vanishes_deep_in_tail() {
        let p = params(1.0, 1.0);
        assert!(integral_i(200, &p).unwrap() < 1e-12);
    }

    #[test]
    fn rp_pmf_poisson_reduction() {
        // β = 1 gives Poisson(αt).
        let p = params(2.38, 1.0);
        assert_abs_diff_eq!(rp_gamma_pmf(0, &p), (-2.38f64).exp(), epsilon = 1e-12);
        let mut term = (-2.38f64).exp();
        for n in 1..=20 {
            term *= 2.38 / n as f64;
            assert_abs_diff_eq!(rp_gamma_pmf(n, &p), term, epsilon = 1e-12);
        }
    }

    #[test]
    fn rp_pmf_erlang_zero_prob() {
        let p = params(1.0, 2.0);
        // P₀ = 1 - γ(1; 2) = 2e^{-1}.
        assert_abs_diff_eq!(rp_gamma_pmf(0, &p), 2.0 * (-1.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn rp_pmf_sums_to_one() {
        let p = params(2.86, 1.16);
        let total: f64 = (0..200).map(|n| rp_gamma_pmf(n, &p)).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn erp_pmf_poisson_reduction() {
        let p = params(3.0, 1.0);
        assert_abs_diff_eq!(
            erp_gamma_pmf(0, &p).unwrap(),
            (-3.0f64).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn erp_mean_identity() {
        // Σ n Qₙ = tα/β (overdispersed parameterization with mean 8).
        let p = params(2.0, 0.25);
        let n_max = erp_gamma_n_max(&p);
        let pmf = erp_gamma_pmf_table(&p, n_max).unwrap();
        let mean: f64 = pmf.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
        assert_abs_diff_eq!(mean, 8.0, epsilon = 1e-6);
    }

    #[test]
    fn erp_survival_telescopes_to_pmf() {
        let p = params(2.74, 1.15);
        for n in 1..=30 {
            let g = erp_gamma_count_survival(n, &p).unwrap()
                - erp_gamma_count_survival(n + 1, &p).unwrap();
            let q = erp_gamma_pmf(n, &p).unwrap();
            assert!((g - q).abs() < 1e-11, "n={n}: {g} vs {q}");
        }
    }

    #[test]
    fn erp_survival_monotone() {
        let p = params(4.0, 0.5);
        let mut prev = 1.0;
        for n in 1..=100 {
            let g = erp_gamma_count_survival(n, &p).unwrap();
            assert!(g <= prev + 1e-12);
            prev = g;
        }
        assert!(prev < 1e-10);
    }

    #[test]
    fn hurdle_delta_zero_matches_plain_rp() {
        let p = params(2.38, 0.87);
        let h = HurdleSpec::new(3, 0.0).unwrap();
        for n in 0..40 {
            assert_abs_diff_eq!(
                rp_gamma_hurdle_pmf(n, &p, &h).unwrap(),
                rp_gamma_pmf(n, &p),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn hurdle_m1_zero_prob() {
        // m = 1 is the simple hurdle: P₀ = 1 - γ(αt; β+δ).
        let p = params(2.0, 1.0);
        let h = HurdleSpec::new(1, 0.5).unwrap();
        let expect = 1.0 - lower_inc_gamma(1.5, 2.0);
        assert_abs_diff_eq!(rp_gamma_hurdle_pmf(0, &p, &h).unwrap(), expect, epsilon = 1e-13);
    }

    #[test]
    fn hurdle_table1_row_normalizes() {
        let p = params(2.38, 0.87);
        let h = HurdleSpec::new(3, 0.66).unwrap();
        let total: f64 = (0..200)
            .map(|n| rp_gamma_hurdle_pmf(n, &p, &h).unwrap())
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn hurdle_rejects_invalid_delta() {
        let p = params(1.0, 0.5);
        let h = HurdleSpec::new(2, -0.5).unwrap();
        assert!(rp_gamma_hurdle_pmf(0, &p, &h).is_err());
    }

    #[test]
    fn mixture_degenerate_and_symmetric_cases() {
        let c1 = params(3.98, 1.95);
        let c2 = params(3.98, 0.93);
        // Equal components: pmf independent of w.
        let a = GammaMixtureSpec::new(c1, c1, 0.3).unwrap();
        let b = GammaMixtureSpec::new(c1, c1, 0.9).unwrap();
        for n in 0..20 {
            assert_abs_diff_eq!(
                erp_gamma_mixture_pmf(n, &a).unwrap(),
                erp_gamma_mixture_pmf(n, &b).unwrap(),
                epsilon = 1e-14
            );
            assert_abs_diff_eq!(
                erp_gamma_mixture_pmf(n, &a).unwrap(),
                erp_gamma_pmf(n, &c1).unwrap(),
                epsilon = 1e-14
            );
        }
        // Table-1 β-mixture row normalizes.
        let mix = GammaMixtureSpec::new(c1, c2, 0.85).unwrap();
        let total: f64 = (0..300).map(|n| erp_gamma_mixture_pmf(n, &mix).unwrap()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn mixture_rejects_bad_weight_or_exposure() {
        let c1 = params(1.0, 1.0);
        let c2 = GammaRenewalParams::new(1.0, 1.0, 2.0).unwrap();
        assert!(GammaMixtureSpec::new(c1, c1, 0.0).is_err());
        assert!(GammaMixtureSpec::new(c1, c1, 1.0).is_err());
        assert!(GammaMixtureSpec::new(c1, c2, 0.5).is_err());
    }

    #[test]
    fn pmf_table_matches_pointwise_eval() {
        let p = params(2.0, 0.25);
        let table = erp_gamma_pmf_table(&p, 60).unwrap();
        for (n, q) in table.iter().enumerate() {
            assert_abs_diff_eq!(*q, erp_gamma_pmf(n as u32, &p).unwrap(), epsilon = 1e-13);
        }
    }
}
