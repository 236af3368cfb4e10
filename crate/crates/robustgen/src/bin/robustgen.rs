//! Command-line harness: sweeps, Monte Carlo verification, bound tables,
//! occupancy-decay checks, certificates, and data generation.
//!
//! Every command accepts `--config <json>` supplying any subset of its
//! flags; explicit flags win. The seed falls back to `ROBUSTGEN_SEED` when
//! the `--seed` flag is absent. Exit code is 0 iff all requested checks
//! pass; failures print a machine-readable JSON summary on stderr.

use clap::{Args, Parser, Subcommand};
use robustgen::cli::{
    self, load_config, BoundEvalSpec, CertLearner, CertSpec, CmdOutcome, CommonOpts, DatagenSpec,
    Learner, McVerifySpec, OutputFormat, Prop3Spec, ProbShape, SweepSpec, SEED_ENV_VAR,
};
use robustgen::datagen::Family;
use robustgen::error::{Error, Result};
use robustgen::partition::Scheme;
use robustgen::simulate::Statistic;
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "robustgen",
    about = "Data-dependent generalization bounds: sweeps, Monte Carlo verification, and bound tables",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// K versus |T_S| sweep over input dimensions (CSV + SVG).
    CoverSweep(CoverSweepArgs),
    /// Monte Carlo coverage verification of one concentration inequality.
    McVerify(McVerifyArgs),
    /// Evaluate every applicable generalization bound on one fitted instance.
    BoundEval(BoundEvalArgs),
    /// Occupancy-decay bound: formula value and optional simulation check.
    Prop3(Prop3Args),
    /// Robustness certificate for a Lipschitz, lasso, or PCA learner.
    RobustnessCert(CertArgs),
    /// Generate a synthetic sample CSV.
    Datagen(DatagenArgs),
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default)]
struct CommonArgs {
    /// RNG seed (falls back to ROBUSTGEN_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default "out").
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Suppress progress messages.
    #[arg(long)]
    quiet: bool,
    /// JSON file supplying any subset of this command's flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn merge(self, file: CommonArgs) -> CommonArgs {
        CommonArgs {
            seed: self.seed.or(file.seed),
            out_dir: self.out_dir.or(file.out_dir),
            format: self.format.or(file.format),
            quiet: self.quiet || file.quiet,
            config: None,
        }
    }

    fn resolve(self) -> Result<CommonOpts> {
        let env_seed = std::env::var(SEED_ENV_VAR)
            .ok()
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|_| Error::Usage(format!("{SEED_ENV_VAR} = '{s}' is not a u64")))
            })
            .transpose()?;
        Ok(CommonOpts {
            seed: self.seed.or(env_seed).unwrap_or(0),
            out_dir: self.out_dir.unwrap_or_else(|| PathBuf::from("out")),
            format: match self.format.as_deref() {
                Some(f) => OutputFormat::parse(f)?,
                None => OutputFormat::Csv,
            },
            quiet: self.quiet,
        })
    }
}

fn resolve_family(
    name: Option<&str>,
    alpha: Option<f64>,
    beta: Option<f64>,
    sigma: Option<f64>,
) -> Result<Family> {
    Ok(match name.unwrap_or("uniform") {
        "uniform" => Family::Uniform,
        "beta" => Family::Beta { alpha: alpha.unwrap_or(0.1), beta: beta.unwrap_or(0.1) },
        "gauss_mix" => Family::GaussMix { sigma: sigma.unwrap_or(0.01) },
        "beta_mix" => Family::BetaMix {
            alpha: alpha.unwrap_or(0.1),
            beta: beta.unwrap_or(0.1),
            sigma: sigma.unwrap_or(0.1),
        },
        "beta_gauss" => Family::BetaGauss {
            alpha: alpha.unwrap_or(0.1),
            beta: beta.unwrap_or(0.1),
            sigma: sigma.unwrap_or(0.1),
        },
        other => return Err(Error::Usage(format!("unknown family '{other}'"))),
    })
}

fn parse_dims(spec: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: usize = lo.parse().map_err(|_| Error::Usage(format!("bad dim '{part}'")))?;
            let hi: usize = hi.parse().map_err(|_| Error::Usage(format!("bad dim '{part}'")))?;
            if lo == 0 || hi < lo {
                return Err(Error::Usage(format!("bad dim range '{part}'")));
            }
            out.extend(lo..=hi);
        } else {
            let d: usize = part.parse().map_err(|_| Error::Usage(format!("bad dim '{part}'")))?;
            out.push(d);
        }
    }
    if out.is_empty() {
        return Err(Error::Usage("no dimensions given".into()));
    }
    Ok(out)
}

macro_rules! merge_opt {
    ($cli:expr, $file:expr, $($field:ident),+ $(,)?) => {
        $( $cli.$field = $cli.$field.take().or($file.$field); )+
    };
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default)]
struct CoverSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    /// Generator family: uniform, beta, gauss_mix, beta_mix, beta_gauss.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Samples per trial (default 1000).
    #[arg(long)]
    n: Option<usize>,
    /// Partition: epsilon_cover or random_projection.
    #[arg(long)]
    scheme: Option<String>,
    /// Grid width (default 0.1).
    #[arg(long)]
    width: Option<f64>,
    /// Projection dimension (default 3).
    #[arg(long)]
    proj_dim: Option<usize>,
    /// Dimensions, e.g. "1..10" or "2,4,8".
    #[arg(long)]
    dims: Option<String>,
    /// Trials per dimension (default 10).
    #[arg(long)]
    trials: Option<u64>,
}

fn run_cover_sweep(mut args: CoverSweepArgs) -> Result<CmdOutcome> {
    if let Some(path) = args.common.config.take() {
        let file: CoverSweepArgs = load_config(&path)?;
        merge_opt!(args, file, family, alpha, beta, sigma, n, scheme, width, proj_dim, dims, trials);
        args.common = args.common.merge(file.common);
    }
    let common = args.common.resolve()?;
    let scheme = match args.scheme.as_deref().unwrap_or("epsilon_cover") {
        "epsilon_cover" | "cover" => Scheme::EpsilonCover,
        "random_projection" | "projection" => Scheme::RandomProjection,
        other => return Err(Error::Usage(format!("unknown scheme '{other}'"))),
    };
    let spec = SweepSpec {
        family: resolve_family(args.family.as_deref(), args.alpha, args.beta, args.sigma)?,
        n: args.n.unwrap_or(1000),
        scheme,
        width: args.width.unwrap_or(0.1),
        proj_dim: args.proj_dim.unwrap_or(3),
        d_values: parse_dims(args.dims.as_deref().unwrap_or("1..10"))?,
        trials: args.trials.unwrap_or(10),
    };
    cli::run_cover_sweep(&spec, &common)
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default)]
struct McVerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    /// Statistic: bhc, lemma5, lemma6, multinomial_new, theorem4, lemma8,
    /// lemma3_tail, lemma4_tail.
    #[arg(long)]
    stat: Option<String>,
    /// Category count K.
    #[arg(long)]
    k: Option<usize>,
    /// Sample size per trial.
    #[arg(long)]
    n: Option<u64>,
    /// Confidence level.
    #[arg(long)]
    delta: Option<f64>,
    /// Deviation threshold for the tail statistics (replaces delta).
    #[arg(long)]
    threshold: Option<f64>,
    /// Monte Carlo trials (default 100000).
    #[arg(long)]
    trials: Option<u64>,
    /// Distribution shape: uniform, geometric, spike.
    #[arg(long)]
    p_shape: Option<String>,
}

fn run_mc_verify(mut args: McVerifyArgs) -> Result<CmdOutcome> {
    if let Some(path) = args.common.config.take() {
        let file: McVerifyArgs = load_config(&path)?;
        merge_opt!(args, file, stat, k, n, delta, threshold, trials, p_shape);
        args.common = args.common.merge(file.common);
    }
    let common = args.common.resolve()?;
    let statistic = Statistic::parse(args.stat.as_deref().unwrap_or("bhc"))?;
    let delta_or_m = match (args.threshold, args.delta) {
        (Some(m), _) => m,
        (None, Some(d)) => d,
        (None, None) => 0.05,
    };
    let spec = McVerifySpec {
        statistic,
        k: args.k.unwrap_or(10),
        n: args.n.unwrap_or(1000),
        delta_or_m,
        trials: args.trials.unwrap_or(100_000),
        p_shape: ProbShape::parse(args.p_shape.as_deref().unwrap_or("uniform"))?,
    };
    cli::run_mc_verify(&spec, &common)
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default)]
struct BoundEvalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    /// Learner: lasso or rls.
    #[arg(long)]
    learner: Option<String>,
    /// CSV data file (features + final response column); synthetic if absent.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Input dimension for synthetic data (default 30).
    #[arg(long)]
    d: Option<usize>,
    /// Sample count (default 1000).
    #[arg(long)]
    n: Option<usize>,
    /// Active response coordinates of the synthetic task (default 2).
    #[arg(long)]
    active_dims: Option<usize>,
    /// Lasso penalty (default 0.05).
    #[arg(long)]
    reg_c: Option<f64>,
    /// Cover granularity nu (default 0.1).
    #[arg(long)]
    nu: Option<f64>,
    /// Ridge weight; required for rls, enables the stability row for lasso.
    #[arg(long)]
    lambda: Option<f64>,
    /// Noise deviation of the rls task (default 0.05).
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Conditional-loss source for the per-cell bounds (only "zeta").
    #[arg(long)]
    alpha_source: Option<String>,
}

fn run_bound_eval(mut args: BoundEvalArgs) -> Result<CmdOutcome> {
    if let Some(path) = args.common.config.take() {
        let file: BoundEvalArgs = load_config(&path)?;
        merge_opt!(
            args, file, learner, data, family, alpha, beta, sigma, d, n, active_dims, reg_c, nu,
            lambda, noise_sigma, delta, alpha_source
        );
        args.common = args.common.merge(file.common);
    }
    let common = args.common.resolve()?;
    let spec = BoundEvalSpec {
        learner: Learner::parse(args.learner.as_deref().unwrap_or("lasso"))?,
        data: args.data,
        family: resolve_family(args.family.as_deref(), args.alpha, args.beta, args.sigma)?,
        d: args.d.unwrap_or(30),
        n: args.n.unwrap_or(1000),
        active_dims: args.active_dims.unwrap_or(2),
        reg_c: args.reg_c.unwrap_or(0.05),
        nu: args.nu.unwrap_or(0.1),
        lambda: args.lambda,
        sigma: args.noise_sigma.unwrap_or(0.05),
        delta: args.delta.unwrap_or(0.05),
        alpha_source: args.alpha_source.unwrap_or_else(|| "zeta".to_string()),
    };
    cli::run_bound_eval(&spec, &common)
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default)]
struct Prop3Args {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    /// Decay exponent.
    #[arg(long)]
    alpha: Option<f64>,
    /// Decay scale.
    #[arg(long)]
    beta: Option<f64>,
    /// Decay constant.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Also simulate occupancy and compare the empirical quantile.
    #[arg(long)]
    simulate: bool,
    #[arg(long)]
    trials: Option<u64>,
    /// Truncation point of the simulated decay distribution.
    #[arg(long)]
    k_max: Option<usize>,
}

fn run_prop3(mut args: Prop3Args) -> Result<CmdOutcome> {
    if let Some(path) = args.common.config.take() {
        let file: Prop3Args = load_config(&path)?;
        merge_opt!(args, file, alpha, beta, c, n, delta, trials, k_max);
        args.simulate = args.simulate || file.simulate;
        args.common = args.common.merge(file.common);
    }
    let common = args.common.resolve()?;
    let spec = Prop3Spec {
        alpha: args.alpha.unwrap_or(2.0),
        beta: args.beta.unwrap_or(3.0),
        c: args.c.unwrap_or(1.0),
        n: args.n.unwrap_or(10_000),
        delta: args.delta.unwrap_or(0.05),
        simulate: args.simulate,
        trials: args.trials.unwrap_or(1000),
        k_max: args.k_max.unwrap_or(2000),
    };
    cli::run_prop3(&spec, &common)
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default)]
struct CertArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    /// Learner: lipschitz, lasso, pca.
    #[arg(long)]
    learner: Option<String>,
    /// CSV data file; synthetic data if absent (lasso expects a final
    /// response column).
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Input dimension for synthetic data (default 10).
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Lipschitz constant of the loss (lipschitz learner).
    #[arg(long)]
    lipschitz_c: Option<f64>,
    /// Cover granularity (gamma for lipschitz/pca, nu for lasso).
    #[arg(long)]
    gamma: Option<f64>,
    /// Lasso penalty.
    #[arg(long)]
    reg_c: Option<f64>,
    /// PCA component count.
    #[arg(long)]
    components: Option<usize>,
    #[arg(long)]
    active_dims: Option<usize>,
}

fn run_robustness_cert(mut args: CertArgs) -> Result<CmdOutcome> {
    if let Some(path) = args.common.config.take() {
        let file: CertArgs = load_config(&path)?;
        merge_opt!(
            args, file, learner, data, family, alpha, beta, sigma, dim, n, lipschitz_c, gamma,
            reg_c, components, active_dims
        );
        args.common = args.common.merge(file.common);
    }
    let common = args.common.resolve()?;
    let spec = CertSpec {
        learner: CertLearner::parse(args.learner.as_deref().unwrap_or("lipschitz"))?,
        data: args.data,
        family: resolve_family(args.family.as_deref(), args.alpha, args.beta, args.sigma)?,
        dim: args.dim.unwrap_or(10),
        n: args.n.unwrap_or(500),
        lipschitz_c: args.lipschitz_c.unwrap_or(1.0),
        gamma: args.gamma.unwrap_or(0.1),
        reg_c: args.reg_c.unwrap_or(0.05),
        components: args.components.unwrap_or(2),
        active_dims: args.active_dims.unwrap_or(2),
    };
    cli::run_robustness_cert(&spec, &common)
}

#[derive(Args, Deserialize, Default, Clone)]
#[serde(default)]
struct DatagenArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CommonArgs,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Output file name inside --out-dir (default samples.csv).
    #[arg(long)]
    out_name: Option<String>,
}

fn run_datagen(mut args: DatagenArgs) -> Result<CmdOutcome> {
    if let Some(path) = args.common.config.take() {
        let file: DatagenArgs = load_config(&path)?;
        merge_opt!(args, file, family, alpha, beta, sigma, dim, n, out_name);
        args.common = args.common.merge(file.common);
    }
    let common = args.common.resolve()?;
    let spec = DatagenSpec {
        family: resolve_family(args.family.as_deref(), args.alpha, args.beta, args.sigma)?,
        dim: args.dim.unwrap_or(5),
        n: args.n.unwrap_or(1000),
        out_name: args.out_name.unwrap_or_else(|| "samples.csv".to_string()),
    };
    cli::run_datagen(&spec, &common)
}

fn dispatch(cli: Cli) -> Result<CmdOutcome> {
    match cli.command {
        Command::CoverSweep(args) => run_cover_sweep(args),
        Command::McVerify(args) => run_mc_verify(args),
        Command::BoundEval(args) => run_bound_eval(args),
        Command::Prop3(args) => run_prop3(args),
        Command::RobustnessCert(args) => run_robustness_cert(args),
        Command::Datagen(args) => run_datagen(args),
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(outcome) if outcome.pass => {}
        Ok(outcome) => {
            eprintln!(
                "{}",
                serde_json::json!({ "status": "fail", "failures": outcome.failures })
            );
            std::process::exit(1);
        }
        Err(err) => {
            eprintln!(
                "{}",
                serde_json::json!({ "status": "error", "message": err.to_string() })
            );
            std::process::exit(2);
        }
    }
}
