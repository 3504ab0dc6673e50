//! Command-line front end: pmf tabulation, simulation, model fitting, and
//! moment summaries for the renewal count families.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use renewal_counts::dataset::{read_dataset, write_dataset, DatasetOptions};
use renewal_counts::estimation::{fit, Family, FitOptions, ModelSpec};
use renewal_counts::gamma::{GammaMixtureSpec, GammaRenewalParams, HurdleSpec};
use renewal_counts::ig::IgRenewalParams;
use renewal_counts::moments;
use renewal_counts::report::{PmfRow, PmfTable, Report};
use renewal_counts::sampling::{sample_count, RngStream};
use renewal_counts::{CountModel, Error};

#[derive(Parser)]
#[command(name = "renewal-counts", version, about = "Count distributions from gamma and inverse-Gaussian renewal processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate pmf and count survival for one parameterized family.
    #[command(allow_negative_numbers = true)]
    Pmf(PmfArgs),
    /// Draw seeded counts (optionally with covariates) to a dataset file.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Maximum-likelihood fit of a family to a dataset.
    #[command(allow_negative_numbers = true)]
    Fit(FitArgs),
    /// Mean, exact variance, asymptotic variance, and dispersion verdict.
    #[command(allow_negative_numbers = true)]
    Moments(MomentsArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Poisson,
    RpGamma,
    ErpGamma,
    RpGammaHurdle,
    ErpGammaBetaMixture,
    ErpGammaAlphaMixture,
    RpIg,
    ErpIg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Distribution parameters shared by pmf/simulate/moments.
#[derive(Args, Debug)]
struct ParamArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Gamma interarrival rate (or Poisson event rate).
    #[arg(long)]
    alpha: Option<f64>,
    /// Gamma interarrival shape.
    #[arg(long)]
    beta: Option<f64>,
    /// IG interarrival mean.
    #[arg(long)]
    mu: Option<f64>,
    /// IG shape.
    #[arg(long)]
    lambda: Option<f64>,
    /// Exposure window length.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Hurdle index m (rp-gamma-hurdle).
    #[arg(long)]
    hurdle_m: Option<u32>,
    /// Hurdle shape shift delta (rp-gamma-hurdle).
    #[arg(long)]
    delta: Option<f64>,
    /// Second-component rate (erp-gamma-alpha-mixture).
    #[arg(long)]
    alpha2: Option<f64>,
    /// Second-component shape (erp-gamma-beta-mixture).
    #[arg(long)]
    beta2: Option<f64>,
    /// Mixture weight of the first component.
    #[arg(long)]
    w: Option<f64>,
}

impl ParamArgs {
    fn build(&self) -> Result<CountModel, Error> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Domain(format!("--{name} is required for this family")))
        };
        let t = self.t;
        Ok(match self.family {
            FamilyArg::Poisson => CountModel::poisson(need(self.alpha, "alpha")?, t)?,
            FamilyArg::RpGamma => CountModel::RpGamma(GammaRenewalParams::new(
                need(self.alpha, "alpha")?,
                need(self.beta, "beta")?,
                t,
            )?),
            FamilyArg::ErpGamma => CountModel::ErpGamma(GammaRenewalParams::new(
                need(self.alpha, "alpha")?,
                need(self.beta, "beta")?,
                t,
            )?),
            FamilyArg::RpGammaHurdle => {
                let m = self
                    .hurdle_m
                    .ok_or_else(|| Error::Domain("--hurdle-m is required".into()))?;
                CountModel::RpGammaHurdle(
                    GammaRenewalParams::new(need(self.alpha, "alpha")?, need(self.beta, "beta")?, t)?,
                    HurdleSpec::new(m, need(self.delta, "delta")?)?,
                )
            }
            FamilyArg::ErpGammaBetaMixture => {
                let alpha = need(self.alpha, "alpha")?;
                CountModel::ErpGammaMixture(GammaMixtureSpec::new(
                    GammaRenewalParams::new(alpha, need(self.beta, "beta")?, t)?,
                    GammaRenewalParams::new(alpha, need(self.beta2, "beta2")?, t)?,
                    need(self.w, "w")?,
                )?)
            }
            FamilyArg::ErpGammaAlphaMixture => {
                let beta = need(self.beta, "beta")?;
                CountModel::ErpGammaMixture(GammaMixtureSpec::new(
                    GammaRenewalParams::new(need(self.alpha, "alpha")?, beta, t)?,
                    GammaRenewalParams::new(need(self.alpha2, "alpha2")?, beta, t)?,
                    need(self.w, "w")?,
                )?)
            }
            FamilyArg::RpIg => CountModel::RpIg(IgRenewalParams::new(
                need(self.mu, "mu")?,
                need(self.lambda, "lambda")?,
                t,
            )?),
            FamilyArg::ErpIg => CountModel::ErpIg(IgRenewalParams::new(
                need(self.mu, "mu")?,
                need(self.lambda, "lambda")?,
                t,
            )?),
        })
    }

    fn label(&self) -> String {
        match self.family {
            FamilyArg::Poisson => "poisson".into(),
            FamilyArg::RpGamma => "rp-gamma".into(),
            FamilyArg::ErpGamma => "erp-gamma".into(),
            FamilyArg::RpGammaHurdle => {
                format!("rp-gamma-hurdle({})", self.hurdle_m.unwrap_or(0))
            }
            FamilyArg::ErpGammaBetaMixture => "erp-gamma-beta-mixture".into(),
            FamilyArg::ErpGammaAlphaMixture => "erp-gamma-alpha-mixture".into(),
            FamilyArg::RpIg => "rp-ig".into(),
            FamilyArg::ErpIg => "erp-ig".into(),
        }
    }
}

#[derive(Args)]
struct PmfArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Largest count to tabulate; defaults to the support truncation point.
    #[arg(long)]
    n_max: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Number of observations to draw.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Comma-separated regression coefficients; when given, each row gets
    /// standard-normal covariates and its mean is scaled by exp(b'x).
    #[arg(long, value_delimiter = ',')]
    coefs: Vec<f64>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Dataset file (delimited text with a header row).
    #[arg(long)]
    data: std::path::PathBuf,
    /// Response column name.
    #[arg(long, default_value = "count")]
    response: String,
    /// Comma-separated covariate column names.
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    /// Hurdle index m (rp-gamma-hurdle).
    #[arg(long)]
    hurdle_m: Option<u32>,
    /// 0/1 column flagging right-censored rows.
    #[arg(long)]
    censor_column: Option<String>,
    /// Threshold M for censored rows (count known only as >= M).
    #[arg(long)]
    censor_at: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn main() -> ExitCode {
    // Usage errors exit 1 (clap's default of 2 is reserved for
    // non-convergence here); help and version exit 0.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Pmf(args) => cmd_pmf(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Fit(args) => cmd_fit(&args),
        Command::Moments(args) => cmd_moments(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonConvergence(_) => ExitCode::from(2),
                Error::Numerical(_) => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn cmd_pmf(args: &PmfArgs) -> Result<ExitCode, Error> {
    let model = args.params.build()?;
    let n_max = args.n_max.unwrap_or_else(|| model.n_max());
    let pmf = model.pmf_table(n_max)?;
    let mut rows = Vec::with_capacity(pmf.len());
    for (n, &p) in pmf.iter().enumerate() {
        rows.push(PmfRow {
            n: n as u32,
            pmf: p,
            survival: model.survival(n as u32)?,
        });
    }
    let table = PmfTable {
        family: args.params.label(),
        t: args.params.t,
        total_probability: pmf.iter().sum(),
        mean: pmf.iter().enumerate().map(|(n, p)| n as f64 * p).sum(),
        rows,
    };
    match args.format {
        Format::Text => print!("{}", table.to_text()),
        Format::Json => println!("{}", table.to_json()?),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode, Error> {
    if args.n == 0 {
        return Err(Error::Domain("--n must be >= 1".into()));
    }
    let base = args.params.build()?;
    let mut rng = RngStream::new(args.seed);
    let k = args.coefs.len();
    let mut counts = Vec::with_capacity(args.n);
    let mut covariates = Vec::with_capacity(args.n);
    for _ in 0..args.n {
        let model = if k > 0 {
            let x: Vec<f64> = (0..k).map(|_| rng.standard_normal()).collect();
            let bx: f64 = args.coefs.iter().zip(&x).map(|(b, v)| b * v).sum();
            let m = base.scale_mean(bx.exp())?;
            covariates.push(x);
            m
        } else {
            base
        };
        counts.push(sample_count(&model, &mut rng));
    }
    let names: Vec<String> = (1..=k).map(|j| format!("x{j}")).collect();
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            write_dataset(file, &counts, &covariates, &names)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_dataset(stdout.lock(), &counts, &covariates, &names)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit(args: &FitArgs) -> Result<ExitCode, Error> {
    let family = match args.family {
        FamilyArg::Poisson => Family::Poisson,
        FamilyArg::RpGamma => Family::RpGamma,
        FamilyArg::ErpGamma => Family::ErpGamma,
        FamilyArg::RpGammaHurdle => Family::RpGammaHurdle {
            m: args
                .hurdle_m
                .ok_or_else(|| Error::Domain("--hurdle-m is required".into()))?,
        },
        FamilyArg::ErpGammaBetaMixture => Family::ErpGammaBetaMixture,
        FamilyArg::ErpGammaAlphaMixture => Family::ErpGammaAlphaMixture,
        FamilyArg::RpIg => Family::RpIg,
        FamilyArg::ErpIg => Family::ErpIg,
    };
    let spec = ModelSpec::new(family, args.t)?;

    let mut opts = DatasetOptions::new(args.response.clone())
        .with_covariates(args.covariates.clone());
    match (&args.censor_column, args.censor_at) {
        (Some(col), Some(m)) => opts = opts.with_censoring(col.clone(), m),
        (None, None) => {}
        _ => {
            return Err(Error::Data(
                "--censor-column and --censor-at must be given together".into(),
            ))
        }
    }
    let data = read_dataset(&args.data, &opts)?;

    let fit_opts = FitOptions {
        seed: args.seed,
        covariate_names: if args.covariates.is_empty() {
            None
        } else {
            Some(args.covariates.clone())
        },
        ..FitOptions::default()
    };
    let result = fit(&spec, &data, &fit_opts)?;
    let report = Report::from_fit(&result, Some(args.seed));
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()?),
    }
    if result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

#[derive(serde::Serialize)]
struct MomentsDoc {
    family: String,
    t: f64,
    mean: f64,
    variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    asymptotic_variance: Option<f64>,
    dispersion: String,
}

fn cmd_moments(args: &MomentsArgs) -> Result<ExitCode, Error> {
    let model = args.params.build()?;
    let mean = model.mean()?;
    // The equilibrium families have a convergent series form and a large-t
    // approximation; the rest get the pmf-summation variance only.
    let (variance, asymptotic) = match &model {
        CountModel::ErpGamma(p) => (
            moments::erp_gamma_variance(p)?,
            Some(moments::erp_gamma_variance_asymptotic(p)),
        ),
        CountModel::ErpIg(p) => (
            moments::erp_ig_variance(p)?,
            Some(moments::erp_ig_variance_asymptotic(p)),
        ),
        m => (m.variance()?, None),
    };
    let dispersion = if (variance - mean).abs() < 1e-9 {
        "equidispersed"
    } else if variance > mean {
        "overdispersed"
    } else {
        "underdispersed"
    };
    let doc = MomentsDoc {
        family: args.params.label(),
        t: args.params.t,
        mean,
        variance,
        asymptotic_variance: asymptotic,
        dispersion: dispersion.into(),
    };
    match args.format {
        Format::Text => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "family               {}", doc.family)?;
            writeln!(out, "mean                 {:.6}", doc.mean)?;
            writeln!(out, "variance             {:.6}", doc.variance)?;
            if let Some(a) = doc.asymptotic_variance {
                writeln!(out, "asymptotic variance  {a:.6}")?;
            }
            writeln!(out, "dispersion           {}", doc.dispersion)?;
        }
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?
        ),
    }
    Ok(ExitCode::SUCCESS)
}
