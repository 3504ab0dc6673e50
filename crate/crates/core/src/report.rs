//! Fit reports: one structured document per run, renderable as an aligned
//! plain-text table or as JSON. The two forms carry the same values.

use serde::Serialize;

use crate::error::Result;
use crate::estimation::{FitResult, MarginalEffect};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub name: String,
    pub value: f64,
    pub se: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EffectRow {
    pub name: String,
    pub effect: f64,
    pub se: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub family: String,
    pub t: f64,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
    pub minus_loglik: f64,
    pub mean_hat: f64,
    pub estimates: Vec<EstimateRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal_effects: Option<Vec<EffectRow>>,
    pub underflow: bool,
    pub covariance_pseudo_inverse: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
}

impl Report {
    pub fn from_fit(fit: &FitResult, seed: Option<u64>) -> Self {
        Report {
            family: fit.spec.family.label(),
            t: fit.spec.t,
            n_obs: fit.n_obs,
            converged: fit.converged,
            iterations: fit.iterations,
            minus_loglik: fit.minus_loglik,
            mean_hat: fit.mean_hat,
            estimates: fit
                .params
                .iter()
                .map(|p| EstimateRow {
                    name: p.name.clone(),
                    value: p.value,
                    se: p.se,
                })
                .collect(),
            marginal_effects: fit.marginal_effects.as_ref().map(|mes| {
                mes.iter().map(EffectRow::from).collect()
            }),
            underflow: fit.underflow,
            covariance_pseudo_inverse: fit.cov_pseudo_inverse,
            seed,
            version: VERSION.to_string(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).map_err(|e| {
            crate::error::Error::Numerical(format!("report serialization failed: {e}"))
        })?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        push(&mut out, format!("family         {}", self.family));
        push(&mut out, format!("observations   {}", self.n_obs));
        push(&mut out, format!("exposure t     {}", self.t));
        push(&mut out, format!("-loglik        {:.4}", self.minus_loglik));
        push(&mut out, format!("fitted mean    {:.6}", self.mean_hat));
        push(
            &mut out,
            format!("converged      {}", if self.converged { "yes" } else { "no" }),
        );
        if self.underflow {
            push(&mut out, "warning        pmf underflow at optimum".into());
        }
        if self.covariance_pseudo_inverse {
            push(
                &mut out,
                "warning        information matrix singular; SEs from pseudo-inverse".into(),
            );
        }
        push(&mut out, String::new());
        push(
            &mut out,
            format!("{:<14} {:>14} {:>14}", "parameter", "estimate", "std.err"),
        );
        for e in &self.estimates {
            push(
                &mut out,
                format!("{:<14} {:>14.6} {:>14}", e.name, e.value, fmt_se(e.se)),
            );
        }
        if let Some(effects) = &self.marginal_effects {
            push(&mut out, String::new());
            push(
                &mut out,
                format!("{:<14} {:>14} {:>14}", "mean effect", "estimate", "std.err"),
            );
            for e in effects {
                push(
                    &mut out,
                    format!("{:<14} {:>14.6} {:>14}", e.name, e.effect, fmt_se(e.se)),
                );
            }
        }
        if let Some(seed) = self.seed {
            push(&mut out, String::new());
            push(&mut out, format!("seed           {seed}"));
        }
        push(&mut out, format!("version        {}", self.version));
        out
    }
}

impl From<&MarginalEffect> for EffectRow {
    fn from(m: &MarginalEffect) -> Self {
        EffectRow {
            name: m.name.clone(),
            effect: m.effect,
            se: m.se,
        }
    }
}

fn fmt_se(se: Option<f64>) -> String {
    match se {
        Some(v) => format!("{v:.6}"),
        None => "-".into(),
    }
}

/// Tabulated pmf output for the `pmf` verb.
#[derive(Debug, Clone, Serialize)]
pub struct PmfTable {
    pub family: String,
    pub t: f64,
    pub rows: Vec<PmfRow>,
    /// Σ pmf over the emitted rows.
    pub total_probability: f64,
    /// Σ n·pmf over the emitted rows.
    pub mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PmfRow {
    pub n: u32,
    pub pmf: f64,
    /// Probability of at least n events.
    pub survival: f64,
}

impl PmfTable {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).map_err(|e| {
            crate::error::Error::Numerical(format!("report serialization failed: {e}"))
        })?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:>5} {:>16} {:>16}\n", "n", "pmf", "survival"));
        for r in &self.rows {
            out.push_str(&format!("{:>5} {:>16.10} {:>16.10}\n", r.n, r.pmf, r.survival));
        }
        out.push_str(&format!(
            "total probability {:.10}   mean {:.6}\n",
            self.total_probability, self.mean
        ));
        out
    }
}
