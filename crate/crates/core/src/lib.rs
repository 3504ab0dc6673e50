//! Discrete count distributions derived from ordinary and equilibrium
//! (stationary) renewal processes with gamma or inverse-Gaussian interarrival
//! times, plus maximum-likelihood count regression with delta-method marginal
//! effects.
//!
//! The equilibrium families have the property that E N(t) = t/μ, so a
//! log-link regression of the count mean on covariates is directly
//! interpretable and marginal effects are coefficient × fitted mean.
//!
//! Modules:
//! - [`specfun`]: log-gamma, regularized incomplete gamma, normal cdf.
//! - [`gamma`]: RP-γ / ERP-γ / hurdle / mixture pmfs and count survival.
//! - [`ig`]: RP-IG / ERP-IG pmfs via the inverse-Gaussian cdf.
//! - [`model`]: one enum over every family.
//! - [`moments`]: exact and asymptotic means and variances.
//! - [`sampling`]: seeded exact samplers (the Monte-Carlo oracle).
//! - [`estimation`]: maximum-likelihood fitting, covariance, marginal effects.
//! - [`dataset`]: delimited-text ingestion.
//! - [`report`]: fit reports in text and JSON form.

pub mod dataset;
pub mod error;
pub mod estimation;
pub mod gamma;
pub mod ig;
pub mod model;
pub mod moments;
pub mod report;
pub mod sampling;
pub mod specfun;

pub use error::{Error, Result};
pub use model::CountModel;
