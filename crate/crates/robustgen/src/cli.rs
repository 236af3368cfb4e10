//! Experiment harness behind the `robustgen` binary.
//!
//! Each command is an ordinary library function taking a parameter struct,
//! so the runnable examples and the test suite drive the same code paths as
//! the CLI. Commands write CSV (or JSON) tables plus SVG plots rendered
//! from the tabulated data alone, and return a [`CmdOutcome`] whose `pass`
//! flag drives the process exit code.
//!
//! Determinism: everything is keyed on a single `--seed`; sub-seeds for
//! (dimension, trial) pairs derive via splitmix64, and all Monte Carlo
//! loops run on independent per-trial streams, so reruns produce
//! byte-identical files for any thread count.

use crate::bounds::{
    proposition1_bound, proposition3_ts_bound, theorem1_bound, theorem2_bound, theorem5_bound,
    theorem6_bound, uniform_stability_bound, BoundReport, DecaySpec, LossProfile,
};
use crate::concentration::MultinomialSpec;
use crate::datagen::{generate, load_csv, save_csv, Family, GeneratorConfig};
use crate::error::{domain, precondition, Error, Result};
use crate::partition::{ln_cardinality, occupancy, OccupancyProfile, Partition, PartitionConfig, Scheme};
use crate::plot::{LinePlot, Series};
use crate::robustness::{
    fit_lasso, fit_pca, lasso_certificate, lipschitz_certificate, ln_cover_l2_box,
    ln_cover_linf_box, pca_certificate, sup_abs_linear_loss, LinearModel, RobustnessCertificate,
};
use crate::simulate::{
    empirical_quantile, run_coverage, seeded_uniform_weights, simulate_occupancy_decay,
    trial_rng, CoverageResult, Statistic, TrialPlan,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

/// Environment variable consulted for the seed when no flag is given.
pub const SEED_ENV_VAR: &str = "ROBUSTGEN_SEED";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Pure sub-seed derivation for nested experiment loops.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(base ^ splitmix64(a)) ^ b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Usage(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

/// Options shared by every command.
#[derive(Debug, Clone)]
pub struct CommonOpts {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub quiet: bool,
}

impl Default for CommonOpts {
    fn default() -> Self {
        Self { seed: 0, out_dir: PathBuf::from("out"), format: OutputFormat::Csv, quiet: false }
    }
}

/// What a command produced and whether its checks passed.
#[derive(Debug, Clone, Serialize)]
pub struct CmdOutcome {
    pub pass: bool,
    pub failures: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl CmdOutcome {
    fn ok(files: Vec<PathBuf>) -> Self {
        Self { pass: true, failures: Vec::new(), files }
    }
}

fn write_output(common: &CommonOpts, name: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(&common.out_dir)?;
    let path = common.out_dir.join(name);
    fs::write(&path, content)?;
    if !common.quiet {
        eprintln!("wrote {}", path.display());
    }
    Ok(path)
}

// ---------------------------------------------------------------------------
// cover-sweep
// ---------------------------------------------------------------------------

/// Sweep configuration: which generator, which partition scheme, which
/// dimensions, how many seeded trials per dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: Family,
    pub n: usize,
    pub scheme: Scheme,
    pub width: f64,
    pub proj_dim: usize,
    pub d_values: Vec<usize>,
    pub trials: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d_values.is_empty() {
            return Err(Error::Usage("d_values must be nonempty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Usage("trials must be >= 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Usage("n must be >= 1".into()));
        }
        if self.scheme == Scheme::Clustering {
            return Err(Error::Usage("cover-sweep supports epsilon_cover and random_projection".into()));
        }
        Ok(())
    }
}

/// One sweep result row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub ln_k: f64,
    pub mean_t_size: f64,
    pub std_t_size: f64,
}

pub const SWEEP_CSV_HEADER: &str = "d,ln_K,mean_t_size,std_t_size";

/// Runs the sweep: for each dimension, `trials` fresh data sets (and, for
/// the projection scheme, fresh projection matrices) are drawn and the
/// occupied-cell count recorded.
pub fn cover_sweep(spec: &SweepSpec, base_seed: u64) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.d_values.len());
    for &d in &spec.d_values {
        let config = match spec.scheme {
            Scheme::EpsilonCover => PartitionConfig::epsilon_cover(d, spec.width),
            Scheme::RandomProjection => {
                PartitionConfig::random_projection(d, spec.proj_dim, spec.width, 0)
            }
            Scheme::Clustering => unreachable!("rejected in validate"),
        };
        let ln_k = ln_cardinality(&config)?;
        let mut t_sizes = Vec::with_capacity(spec.trials as usize);
        for trial in 0..spec.trials {
            let data_seed = derive_seed(base_seed, d as u64, trial);
            let gen = GeneratorConfig { family: spec.family.clone(), dim: d, n: spec.n, seed: data_seed };
            let data = generate(&gen)?;
            let partition = match spec.scheme {
                Scheme::EpsilonCover => Partition::new(PartitionConfig::epsilon_cover(d, spec.width))?,
                Scheme::RandomProjection => Partition::new(PartitionConfig::random_projection(
                    d,
                    spec.proj_dim,
                    spec.width,
                    derive_seed(base_seed, d as u64 | (1 << 63), trial),
                ))?,
                Scheme::Clustering => unreachable!(),
            };
            t_sizes.push(occupancy(&data, &partition)?.t_size());
        }
        let mean = t_sizes.iter().sum::<u64>() as f64 / spec.trials as f64;
        let std = if spec.trials > 1 {
            let var = t_sizes.iter().map(|&t| (t as f64 - mean).powi(2)).sum::<f64>()
                / (spec.trials - 1) as f64;
            var.sqrt()
        } else {
            0.0
        };
        rows.push(SweepRow { d, ln_k, mean_t_size: mean, std_t_size: std });
    }
    Ok(rows)
}

pub fn sweep_rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.d, r.ln_k, r.mean_t_size, r.std_t_size));
    }
    out
}

/// Renders the K-versus-`|T_S|` figure from the sweep rows alone, on a
/// log10 axis so astronomically large `K` plots next to the occupied count.
pub fn sweep_rows_to_svg(rows: &[SweepRow], title: &str) -> String {
    let ln10 = std::f64::consts::LN_10;
    let k_series: Vec<(f64, f64)> = rows.iter().map(|r| (r.d as f64, r.ln_k / ln10)).collect();
    let t_series: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.d as f64, r.mean_t_size.max(1.0).log10()))
        .collect();
    LinePlot {
        title: title.to_string(),
        x_label: "input dimension d".to_string(),
        y_label: "log10(count)".to_string(),
        log_y: false,
        series: vec![
            Series { label: "K (cells)".to_string(), points: k_series },
            Series { label: "mean |T_S| (occupied)".to_string(), points: t_series },
        ],
    }
    .to_svg()
}

fn family_slug(family: &Family) -> String {
    family
        .label()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

pub fn run_cover_sweep(spec: &SweepSpec, common: &CommonOpts) -> Result<CmdOutcome> {
    let rows = cover_sweep(spec, common.seed)?;
    let slug = family_slug(&spec.family);
    let scheme = match spec.scheme {
        Scheme::EpsilonCover => "cover",
        Scheme::RandomProjection => "proj",
        Scheme::Clustering => "cluster",
    };
    let mut files = Vec::new();
    match common.format {
        OutputFormat::Csv => {
            files.push(write_output(common, &format!("cover_sweep_{scheme}_{slug}.csv"), &sweep_rows_to_csv(&rows))?);
        }
        OutputFormat::Json => {
            files.push(write_output(
                common,
                &format!("cover_sweep_{scheme}_{slug}.json"),
                &serde_json::to_string_pretty(&rows)?,
            )?);
        }
    }
    let title = format!("{} / {}", spec.family.label(), scheme);
    files.push(write_output(
        common,
        &format!("cover_sweep_{scheme}_{slug}.svg"),
        &sweep_rows_to_svg(&rows, &title),
    )?);
    Ok(CmdOutcome::ok(files))
}

// ---------------------------------------------------------------------------
// mc-verify
// ---------------------------------------------------------------------------

/// Shape of the category distribution used in a coverage run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbShape {
    Uniform,
    /// `p_k ∝ 0.5^k`.
    Geometric,
    /// 0.9 on the first category, the rest uniform.
    SingleSpike,
}

impl ProbShape {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(ProbShape::Uniform),
            "geometric" => Ok(ProbShape::Geometric),
            "spike" | "single_spike" => Ok(ProbShape::SingleSpike),
            other => Err(Error::Usage(format!("unknown p shape '{other}'"))),
        }
    }

    pub fn probabilities(&self, k: usize) -> Vec<f64> {
        assert!(k >= 1);
        match self {
            ProbShape::Uniform => vec![1.0 / k as f64; k],
            ProbShape::Geometric => {
                let raw: Vec<f64> = (1..=k).map(|i| 0.5f64.powi(i as i32)).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / s).collect()
            }
            ProbShape::SingleSpike => {
                if k == 1 {
                    vec![1.0]
                } else {
                    let mut p = vec![0.1 / (k - 1) as f64; k];
                    p[0] = 0.9;
                    p
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McVerifySpec {
    pub statistic: Statistic,
    pub k: usize,
    pub n: u64,
    /// Confidence `δ`, or threshold `M` for the tail statistics.
    pub delta_or_m: f64,
    pub trials: u64,
    pub p_shape: ProbShape,
}

/// Builds the trial plan for a verification run. Weight vectors for the
/// weighted statistics are seeded uniform `[0,1)` draws — constant weights
/// would make `Σ aᵢ(pᵢ − Xᵢ/n)` identically zero.
pub fn mc_verify_plan(spec: &McVerifySpec, seed: u64) -> Result<TrialPlan> {
    if spec.trials == 0 {
        return Err(Error::Usage("trials must be >= 1".into()));
    }
    if spec.k == 0 {
        return Err(Error::Usage("K must be >= 1".into()));
    }
    let p = spec.p_shape.probabilities(spec.k);
    let plan = TrialPlan {
        trials: spec.trials,
        base_seed: seed,
        spec: MultinomialSpec::new(spec.n, p)?,
        weights: seeded_uniform_weights(spec.k, derive_seed(seed, 0x57, 0)),
        statistic: spec.statistic,
        delta_or_m: spec.delta_or_m,
    };
    plan.validate()?;
    Ok(plan)
}

pub fn run_mc_verify(spec: &McVerifySpec, common: &CommonOpts) -> Result<CmdOutcome> {
    let plan = mc_verify_plan(spec, common.seed)?;
    let result = run_coverage(&plan)?;
    let mut files = Vec::new();
    match common.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            CoverageResult::write_csv_table(std::slice::from_ref(&result), &mut buf)?;
            files.push(write_output(common, "mc_verify.csv", &String::from_utf8_lossy(&buf))?);
        }
        OutputFormat::Json => {
            files.push(write_output(common, "mc_verify.json", &serde_json::to_string_pretty(&result)?)?);
        }
    }
    let mut outcome = CmdOutcome::ok(files);
    if !result.pass {
        outcome.pass = false;
        outcome.failures.push(format!(
            "{}: violation rate {} exceeds budget {}",
            result.statistic, result.empirical_rate, result.bound_delta
        ));
    }
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// bound-eval and the synthetic supervised tasks behind it
// ---------------------------------------------------------------------------

/// A fitted lasso instance on the joint space `[0,1]^{d+1}` with everything
/// the bound evaluators need.
#[derive(Debug, Clone)]
pub struct LassoInstance {
    pub model: LinearModel,
    pub losses: Vec<f64>,
    pub zeta: f64,
    pub b: f64,
    pub certificate: RobustnessCertificate,
    pub occupancy: OccupancyProfile,
    pub n: u64,
}

/// Builds a supervised sparse-regression instance: inputs from `family` in
/// `[0,1]^d`, response the average of the first `active_dims` coordinates
/// (so `‖w*‖₁ = 1` and `y ∈ [0,1]`), lasso fit with penalty `reg_c`, and the
/// width-`nu` grid on the joint `(d+1)`-dimensional box as the certified
/// partition.
pub fn build_lasso_instance(
    family: &Family,
    d: usize,
    n: usize,
    active_dims: usize,
    reg_c: f64,
    nu: f64,
    seed: u64,
) -> Result<LassoInstance> {
    if active_dims == 0 || active_dims > d {
        return Err(Error::Usage(format!("active_dims = {active_dims} must lie in 1..=d = {d}")));
    }
    let gen = GeneratorConfig { family: family.clone(), dim: d, n, seed };
    let x = generate(&gen)?;
    let y: Vec<f64> =
        x.iter().map(|row| row[..active_dims].iter().sum::<f64>() / active_dims as f64).collect();
    lasso_instance_from_data(x, y, reg_c, nu)
}

/// Same construction on externally supplied `(x, y)` data (all in `[0,1]`).
pub fn lasso_instance_from_data(
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    reg_c: f64,
    nu: f64,
) -> Result<LassoInstance> {
    let d = x.first().map_or(0, Vec::len);
    let n = x.len();
    let model = fit_lasso(&x, &y, reg_c)?;
    let losses: Vec<f64> =
        x.iter().zip(&y).map(|(row, &yi)| (yi - model.predict(row)).abs()).collect();
    let zeta = sup_abs_linear_loss(&model);
    // Objective at w = 0 bounds the l1 norm of any minimizer, hence the loss
    // over the reachable hypothesis set.
    let r = y.iter().map(|v| v * v).sum::<f64>() / n as f64 / reg_c;
    let b = 1.0 + r;
    let ln_cover = ln_cover_linf_box(d + 1, nu)?;
    let certificate = lasso_certificate(&y, reg_c, nu, ln_cover)?;
    // Occupancy over the joint (x, y) points with the width-nu grid.
    let joint: Vec<Vec<f64>> = x
        .iter()
        .zip(&y)
        .map(|(row, &yi)| {
            let mut z = row.clone();
            z.push(yi);
            z
        })
        .collect();
    let partition = Partition::new(PartitionConfig::epsilon_cover(d + 1, nu))?;
    let occ = occupancy(&joint, &partition)?;
    Ok(LassoInstance { model, losses, zeta, b, certificate, occupancy: occ, n: n as u64 })
}

/// A 1-d regularized-least-squares instance with analytic risk.
///
/// Data model: `x ~ U[0,1)`, sign noise `s = ±1` fair, response
/// `y = (x + σ + σs)/(1 + 2σ) ∈ [0,1]`. The ridge solution
/// `w = Σxy / (Σx² + λn)` has closed form, the loss `(wx − y)²` has an
/// exact supremum over the unit box, and the expected loss is a polynomial
/// in `w`, so certificate and risk are both exact.
#[derive(Debug, Clone)]
pub struct RlsInstance {
    pub w: f64,
    pub losses: Vec<f64>,
    pub mean_loss: f64,
    pub zeta: f64,
    pub eps_s: f64,
    pub occupancy: OccupancyProfile,
    pub ln_k: f64,
    pub true_risk: f64,
    pub n: u64,
}

pub fn build_rls_instance(n: usize, lambda: f64, sigma: f64, nu: f64, seed: u64) -> Result<RlsInstance> {
    if n == 0 {
        return Err(Error::Usage("n must be >= 1".into()));
    }
    if lambda <= 0.0 || sigma <= 0.0 || !lambda.is_finite() || !sigma.is_finite() {
        return Err(Error::Usage("lambda and sigma must be positive".into()));
    }
    let mut rng = trial_rng(seed, 0);
    let scale = 1.0 / (1.0 + 2.0 * sigma);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.random();
        let s: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
        xs.push(x);
        ys.push((x + sigma + sigma * s) * scale);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
    let sxx: f64 = xs.iter().map(|a| a * a).sum();
    let w = sxy / (sxx + lambda * n as f64);
    let losses: Vec<f64> = xs.iter().zip(&ys).map(|(&x, &y)| (w * x - y) * (w * x - y)).collect();
    let mean_loss = losses.iter().sum::<f64>() / n as f64;
    // sup over the corners of [0,1]^2 of (wx - y)^2.
    let m_r = 1.0f64.max(w.abs()).max((1.0 - w).abs());
    let zeta = m_r * m_r;
    // (wx - y)^2 is 2 m_r (|w| + 1)-Lipschitz in the sup norm on the box.
    let eps_s = 2.0 * m_r * (w.abs() + 1.0) * nu;
    let joint: Vec<Vec<f64>> = xs.iter().zip(&ys).map(|(&x, &y)| vec![x, y]).collect();
    let partition = Partition::new(PartitionConfig::epsilon_cover(2, nu))?;
    let occ = occupancy(&joint, &partition)?;
    let ln_k = partition.ln_cardinality();
    // E[(wx - y)^2] with y = a x + g + e, a = scale, g = sigma*scale,
    // E[e] = 0, E[e^2] = (sigma*scale)^2, x ~ U[0,1].
    let a = scale;
    let g = sigma * scale;
    let diff = w - a;
    let true_risk = diff * diff / 3.0 - diff * g + g * g + (sigma * a) * (sigma * a);
    Ok(RlsInstance {
        w,
        losses,
        mean_loss,
        zeta,
        eps_s,
        occupancy: occ,
        ln_k,
        true_risk,
        n: n as u64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    Lasso,
    Rls,
}

impl Learner {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lasso" => Ok(Learner::Lasso),
            "rls" => Ok(Learner::Rls),
            other => Err(Error::Usage(format!("unknown learner '{other}' (expected lasso or rls)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundEvalSpec {
    pub learner: Learner,
    /// CSV with features and a final response column; synthetic when absent.
    pub data: Option<PathBuf>,
    pub family: Family,
    pub d: usize,
    pub n: usize,
    pub active_dims: usize,
    pub reg_c: f64,
    pub nu: f64,
    /// Ridge weight; also enables the uniform-stability row for the lasso
    /// learner.
    pub lambda: Option<f64>,
    /// Noise deviation of the synthetic regression task.
    pub sigma: f64,
    pub delta: f64,
    /// Conditional-loss source for the per-cell bounds; only the always-valid
    /// `zeta` plug-in is available from the command line.
    pub alpha_source: String,
}

/// Evaluates every applicable bound on one fitted instance; one report per
/// bound, all on identical data.
pub fn bound_eval(spec: &BoundEvalSpec, seed: u64) -> Result<Vec<BoundReport>> {
    if spec.alpha_source != "zeta" {
        return Err(Error::Usage(format!(
            "alpha source '{}' is not available; the data-only evaluator supports 'zeta'",
            spec.alpha_source
        )));
    }
    match spec.learner {
        Learner::Lasso => {
            let inst = match &spec.data {
                Some(path) => {
                    let (x, y) = load_csv(path, None, true)?;
                    let y = y.ok_or_else(|| precondition("data file needs a response column"))?;
                    if y.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                        return Err(domain("responses must lie in [0,1] for the certified loss"));
                    }
                    lasso_instance_from_data(x, y, spec.reg_c, spec.nu)?
                }
                None => build_lasso_instance(
                    &spec.family,
                    spec.d,
                    spec.n,
                    spec.active_dims,
                    spec.reg_c,
                    spec.nu,
                    seed,
                )?,
            };
            let n = inst.n;
            let eps = inst.certificate.eps_s;
            let ln_k = inst.certificate.ln_k;
            let loss = LossProfile::new(inst.losses.clone(), inst.zeta)?.with_b(inst.b)?;
            let t = inst.occupancy.t_size() as usize;
            let loss_a = loss.clone().with_alphas(vec![inst.zeta; t], inst.zeta)?;
            let mut reports = vec![
                proposition1_bound(&loss, eps, ln_k, spec.delta, n)?,
                theorem1_bound(&loss, eps, &inst.occupancy, ln_k, spec.delta, n)?,
                theorem2_bound(&loss_a, eps, &inst.occupancy, ln_k, spec.delta, n)?,
                theorem5_bound(&loss, eps, n, inst.zeta, &inst.occupancy, ln_k, spec.delta, n)?,
                theorem6_bound(&loss_a, eps, n, inst.zeta, &inst.occupancy, ln_k, spec.delta, n)?,
            ];
            if let Some(lambda) = spec.lambda {
                reports.push(uniform_stability_bound(loss.mean_loss(), 1.0, lambda, spec.delta, n)?);
            }
            Ok(reports)
        }
        Learner::Rls => {
            let lambda = spec.lambda.ok_or_else(|| Error::Usage("rls requires --lambda".into()))?;
            let inst = build_rls_instance(spec.n, lambda, spec.sigma, spec.nu, seed)?;
            let n = inst.n;
            // Hypothesis-space loss bound for the prior bound: the classical
            // sqrt(B/lambda) envelope with B = 1 (responses live in [0,1]).
            let b_loss = inst.zeta.max((1.0 / lambda).sqrt());
            let loss = LossProfile::new(inst.losses.clone(), inst.zeta)?.with_b(b_loss)?;
            let t = inst.occupancy.t_size() as usize;
            let loss_a = loss.clone().with_alphas(vec![inst.zeta; t], inst.zeta)?;
            Ok(vec![
                proposition1_bound(&loss, inst.eps_s, inst.ln_k, spec.delta, n)?,
                theorem1_bound(&loss, inst.eps_s, &inst.occupancy, inst.ln_k, spec.delta, n)?,
                theorem2_bound(&loss_a, inst.eps_s, &inst.occupancy, inst.ln_k, spec.delta, n)?,
                theorem5_bound(&loss, inst.eps_s, n, inst.zeta, &inst.occupancy, inst.ln_k, spec.delta, n)?,
                theorem6_bound(&loss_a, inst.eps_s, n, inst.zeta, &inst.occupancy, inst.ln_k, spec.delta, n)?,
                uniform_stability_bound(inst.mean_loss, 1.0, lambda, spec.delta, n)?,
            ])
        }
    }
}

pub fn run_bound_eval(spec: &BoundEvalSpec, common: &CommonOpts) -> Result<CmdOutcome> {
    let reports = bound_eval(spec, common.seed)?;
    let mut files = Vec::new();
    match common.format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            BoundReport::write_csv_table(&reports, &mut buf)?;
            files.push(write_output(common, "bound_eval.csv", &String::from_utf8_lossy(&buf))?);
        }
        OutputFormat::Json => {
            files.push(write_output(common, "bound_eval.json", &serde_json::to_string_pretty(&reports)?)?);
        }
    }
    Ok(CmdOutcome::ok(files))
}

// ---------------------------------------------------------------------------
// prop3
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prop3Spec {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub n: u64,
    pub delta: f64,
    pub simulate: bool,
    pub trials: u64,
    pub k_max: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop3Report {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub n: u64,
    pub delta: f64,
    pub bound: f64,
    pub hypothesis_met: bool,
    pub empirical_quantile: Option<u64>,
    pub max_t_size: Option<u64>,
    pub pass: bool,
}

pub const PROP3_CSV_HEADER: &str =
    "alpha,beta,C,n,delta,bound,hypothesis_met,empirical_quantile,max_t_size,pass";

pub fn prop3_report(spec: &Prop3Spec, seed: u64) -> Result<Prop3Report> {
    let decay = DecaySpec::new(spec.alpha, spec.beta, spec.c)?;
    let bound = proposition3_ts_bound(&decay, spec.n, spec.delta)?;
    let (mut quantile, mut max_t) = (None, None);
    let mut pass = true;
    if spec.simulate {
        if spec.trials == 0 {
            return Err(Error::Usage("trials must be >= 1".into()));
        }
        let t_sizes = simulate_occupancy_decay(&decay, spec.k_max, spec.n, spec.trials, seed)?;
        let q = empirical_quantile(&t_sizes, 1.0 - spec.delta);
        quantile = Some(q);
        max_t = t_sizes.iter().max().copied();
        pass = (q as f64) <= bound.value;
    }
    Ok(Prop3Report {
        alpha: spec.alpha,
        beta: spec.beta,
        c: spec.c,
        n: spec.n,
        delta: spec.delta,
        bound: bound.value,
        hypothesis_met: bound.hypothesis_met,
        empirical_quantile: quantile,
        max_t_size: max_t,
        pass,
    })
}

fn opt_u64(v: Option<u64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn run_prop3(spec: &Prop3Spec, common: &CommonOpts) -> Result<CmdOutcome> {
    let report = prop3_report(spec, common.seed)?;
    if !report.hypothesis_met && !common.quiet {
        eprintln!(
            "warning: ln n = {:.4} is below max(1, 2/alpha) = {:.4}; the bound statement's hypothesis fails",
            (spec.n as f64).ln(),
            1.0f64.max(2.0 / spec.alpha)
        );
    }
    let mut files = Vec::new();
    match common.format {
        OutputFormat::Csv => {
            let row = format!(
                "{}\n{},{},{},{},{},{},{},{},{},{}\n",
                PROP3_CSV_HEADER,
                report.alpha,
                report.beta,
                report.c,
                report.n,
                report.delta,
                report.bound,
                report.hypothesis_met,
                opt_u64(report.empirical_quantile),
                opt_u64(report.max_t_size),
                report.pass
            );
            files.push(write_output(common, "prop3.csv", &row)?);
        }
        OutputFormat::Json => {
            files.push(write_output(common, "prop3.json", &serde_json::to_string_pretty(&report)?)?);
        }
    }
    let mut outcome = CmdOutcome::ok(files);
    if !report.pass {
        outcome.pass = false;
        outcome.failures.push(format!(
            "empirical (1-delta)-quantile {} exceeds the bound {}",
            report.empirical_quantile.unwrap_or(0),
            report.bound
        ));
    }
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// robustness-cert
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertLearner {
    Lipschitz,
    Lasso,
    Pca,
}

impl CertLearner {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lipschitz" => Ok(CertLearner::Lipschitz),
            "lasso" => Ok(CertLearner::Lasso),
            "pca" => Ok(CertLearner::Pca),
            other => Err(Error::Usage(format!("unknown certificate learner '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertSpec {
    pub learner: CertLearner,
    pub data: Option<PathBuf>,
    pub family: Family,
    pub dim: usize,
    pub n: usize,
    /// Lipschitz constant for the lipschitz learner.
    pub lipschitz_c: f64,
    /// Cover granularity: `γ` for lipschitz/pca, `ν` for lasso.
    pub gamma: f64,
    pub reg_c: f64,
    /// Component count for PCA.
    pub components: usize,
    pub active_dims: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertOutput {
    pub certificate: RobustnessCertificate,
    pub model: Option<LinearModel>,
    pub pca_components: Option<Vec<Vec<f64>>>,
}

pub fn robustness_cert(spec: &CertSpec, seed: u64) -> Result<CertOutput> {
    match spec.learner {
        CertLearner::Lipschitz => {
            let ln_cover = ln_cover_linf_box(spec.dim, spec.gamma)?;
            Ok(CertOutput {
                certificate: lipschitz_certificate(spec.lipschitz_c, spec.gamma, ln_cover)?,
                model: None,
                pca_components: None,
            })
        }
        CertLearner::Lasso => {
            let inst = match &spec.data {
                Some(path) => {
                    let (x, y) = load_csv(path, None, true)?;
                    let y = y.ok_or_else(|| precondition("data file needs a response column"))?;
                    lasso_instance_from_data(x, y, spec.reg_c, spec.gamma)?
                }
                None => build_lasso_instance(
                    &spec.family,
                    spec.dim,
                    spec.n,
                    spec.active_dims,
                    spec.reg_c,
                    spec.gamma,
                    seed,
                )?,
            };
            Ok(CertOutput {
                certificate: inst.certificate,
                model: Some(inst.model),
                pca_components: None,
            })
        }
        CertLearner::Pca => {
            let data = match &spec.data {
                Some(path) => load_csv(path, None, false)?.0,
                None => {
                    let gen = GeneratorConfig {
                        family: spec.family.clone(),
                        dim: spec.dim,
                        n: spec.n,
                        seed,
                    };
                    generate(&gen)?
                }
            };
            let m = data.first().map_or(0, Vec::len);
            let basis = fit_pca(&data, spec.components)?;
            // Data lives in the unit box, so the l2 radius is sqrt(m).
            let b_norm = (m as f64).sqrt();
            let ln_cover = ln_cover_l2_box(m, spec.gamma)?;
            let cert = pca_certificate(spec.components, spec.gamma, b_norm, ln_cover)?;
            Ok(CertOutput { certificate: cert, model: None, pca_components: Some(basis.components) })
        }
    }
}

pub fn run_robustness_cert(spec: &CertSpec, common: &CommonOpts) -> Result<CmdOutcome> {
    let output = robustness_cert(spec, common.seed)?;
    let mut files = Vec::new();
    match common.format {
        OutputFormat::Csv => {
            let cert = &output.certificate;
            let text = format!(
                "ln_K,eps_S,n_hat,scheme_note\n{},{},{},{}\n",
                cert.ln_k,
                cert.eps_s,
                cert.n_hat.map_or_else(String::new, |v| v.to_string()),
                cert.scheme_note.replace(',', ";")
            );
            files.push(write_output(common, "certificate.csv", &text)?);
        }
        OutputFormat::Json => {
            files.push(write_output(common, "certificate.json", &serde_json::to_string_pretty(&output)?)?);
        }
    }
    if let Some(model) = &output.model {
        files.push(write_output(common, "model.json", &model.to_json()?)?);
    }
    Ok(CmdOutcome::ok(files))
}

// ---------------------------------------------------------------------------
// datagen
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatagenSpec {
    pub family: Family,
    pub dim: usize,
    pub n: usize,
    pub out_name: String,
}

pub fn run_datagen(spec: &DatagenSpec, common: &CommonOpts) -> Result<CmdOutcome> {
    let gen = GeneratorConfig {
        family: spec.family.clone(),
        dim: spec.dim,
        n: spec.n,
        seed: common.seed,
    };
    let data = generate(&gen)?;
    let mut buf = Vec::new();
    save_csv(&mut buf, &data)?;
    let path = write_output(common, &spec.out_name, &String::from_utf8_lossy(&buf))?;
    Ok(CmdOutcome::ok(vec![path]))
}

// ---------------------------------------------------------------------------
// shared helpers for the binary
// ---------------------------------------------------------------------------

/// Loads a JSON config file into a command spec; explicit flags override
/// the file at the binary level.
pub fn load_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
