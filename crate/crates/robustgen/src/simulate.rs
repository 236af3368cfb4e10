//! Seeded Monte Carlo engine: multinomial sampling, coverage testing of the
//! concentration bounds, and occupancy simulation under power-law cell decay.
//!
//! Reproducibility contract: every trial draws from its own ChaCha stream
//! keyed by `(base_seed, trial_index)` — a splittable counter-based scheme —
//! so serial and parallel executions produce bitwise-identical results for
//! any thread count. Trials merge by commutative addition of violation
//! counts.
//!
//! A *coverage test* checks a `1−δ` confidence bound by sampling: the bound
//! is sound when the empirical violation frequency stays at or below `δ`.
//! Violations are counted under strict inequality (`statistic > bound`),
//! matching the `≤` form of the bounds. Pass/fail uses the Wilson score
//! interval, which stays valid at very small violation counts: the test
//! passes when the Wilson 97.5% *lower* limit does not exceed `δ`.

use crate::bounds::DecaySpec;
use crate::concentration::{
    bhc_rhs, lemma3_tail_bound, lemma4_tail_bound, lemma5_lower_envelope, lemma6_upper_envelope,
    lemma8_rhs, lemma_multinomial_new_rhs, theorem4_rhs, MultinomialSpec,
};
use crate::error::{domain, precondition, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// z-score of the 97.5% normal quantile, fixing the Wilson interval level.
pub const WILSON_Z: f64 = 1.959963984540054;

/// RNG for one trial: stream `trial` of the ChaCha cipher keyed by
/// `base_seed`. Streams are independent and order-free.
pub fn trial_rng(base_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(trial);
    rng
}

/// Uniform `[0,1)` weights from a dedicated seed, for coverage tests that
/// need a fixed nonconstant weight vector.
pub fn seeded_uniform_weights(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = trial_rng(seed, u64::MAX); // reserved stream, never a trial
    (0..k).map(|_| rng.random::<f64>()).collect()
}

/// Draws a multinomial count vector by sequential conditional binomials:
/// `K` binomial draws instead of `n` categorical draws, which matters when
/// `n ≫ K`.
pub fn sample_multinomial_with<R: Rng>(spec: &MultinomialSpec, rng: &mut R) -> Result<Vec<u64>> {
    let p = spec.probabilities()?;
    let mut counts = vec![0u64; p.len()];
    let mut remaining = spec.n;
    let mut remaining_mass = 1.0f64;
    for (k, &pk) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == p.len() {
            counts[k] = remaining;
            break;
        }
        let q = if remaining_mass > 0.0 { (pk / remaining_mass).clamp(0.0, 1.0) } else { 1.0 };
        let draw = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("q validated in [0,1]").sample(rng)
        };
        counts[k] = draw;
        remaining -= draw;
        remaining_mass -= pk;
    }
    Ok(counts)
}

/// Seeded one-shot multinomial draw (stream 0 of `seed`).
pub fn sample_multinomial(spec: &MultinomialSpec, seed: u64) -> Result<Vec<u64>> {
    sample_multinomial_with(spec, &mut trial_rng(seed, 0))
}

/// Which inequality a coverage run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Classical ℓ₁ bound at confidence `δ`.
    Bhc,
    /// Simultaneous per-category lower envelopes at confidence `δ`.
    Lemma5Envelope,
    /// Simultaneous per-category upper deviations at confidence `δ`.
    Lemma6Envelope,
    /// Distribution-weighted deviation bound at confidence `δ`.
    MultinomialNew,
    /// Occupancy-weighted deviation bound at confidence `δ`.
    Theorem4,
    /// Count-weighted refinement at confidence `δ`.
    Lemma8,
    /// Fixed-weight lower-tail bound at threshold `M`.
    Lemma3Tail,
    /// Fixed-weight upper-tail bound at threshold `M`.
    Lemma4Tail,
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Bhc => "bhc",
            Statistic::Lemma5Envelope => "lemma5",
            Statistic::Lemma6Envelope => "lemma6",
            Statistic::MultinomialNew => "multinomial_new",
            Statistic::Theorem4 => "theorem4",
            Statistic::Lemma8 => "lemma8",
            Statistic::Lemma3Tail => "lemma3_tail",
            Statistic::Lemma4Tail => "lemma4_tail",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "bhc" => Statistic::Bhc,
            "lemma5" => Statistic::Lemma5Envelope,
            "lemma6" => Statistic::Lemma6Envelope,
            "multinomial_new" | "mnew" => Statistic::MultinomialNew,
            "theorem4" | "thm4" => Statistic::Theorem4,
            "lemma8" => Statistic::Lemma8,
            "lemma3_tail" => Statistic::Lemma3Tail,
            "lemma4_tail" => Statistic::Lemma4Tail,
            other => return Err(domain(format!("unknown statistic '{other}'"))),
        })
    }

    fn is_tail(&self) -> bool {
        matches!(self, Statistic::Lemma3Tail | Statistic::Lemma4Tail)
    }
}

/// A complete coverage experiment: the distribution under test, the weight
/// vector, the statistic, and the confidence level `δ` (or threshold `M`
/// for the tail statistics) in `delta_or_m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialPlan {
    pub trials: u64,
    pub base_seed: u64,
    pub spec: MultinomialSpec,
    pub weights: Vec<f64>,
    pub statistic: Statistic,
    pub delta_or_m: f64,
}

impl TrialPlan {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(domain("trials must be >= 1"));
        }
        let p = self.spec.probabilities()?;
        if self.weights.len() != p.len() {
            return Err(precondition(format!(
                "weights ({}) and probabilities ({}) lengths differ",
                self.weights.len(),
                p.len()
            )));
        }
        if self.statistic.is_tail() {
            if self.delta_or_m <= 0.0 || !self.delta_or_m.is_finite() {
                return Err(domain(format!("threshold M = {} must be positive", self.delta_or_m)));
            }
        } else if self.delta_or_m <= 0.0 || self.delta_or_m >= 1.0 || self.delta_or_m.is_nan() {
            return Err(domain(format!("delta = {} must lie in (0,1)", self.delta_or_m)));
        }
        Ok(())
    }
}

/// Outcome of a coverage run.
///
/// `bound_delta` is the probability budget the empirical rate is compared
/// against: `δ` for confidence statistics, the closed-form tail probability
/// for threshold statistics. `pass` is true when the Wilson 97.5% lower
/// limit of the violation rate is ≤ `bound_delta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageResult {
    pub statistic: String,
    pub k_count: u64,
    pub n: u64,
    pub violations: u64,
    pub trials: u64,
    pub empirical_rate: f64,
    pub wilson_upper: f64,
    pub bound_delta: f64,
    pub pass: bool,
}

impl CoverageResult {
    pub const CSV_HEADER: &'static str =
        "statistic,K,n,delta,trials,violations,rate,wilson_upper,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.statistic,
            self.k_count,
            self.n,
            self.bound_delta,
            self.trials,
            self.violations,
            self.empirical_rate,
            self.wilson_upper,
            self.pass
        )
    }

    pub fn write_csv_table<W: Write>(results: &[CoverageResult], mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in results {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    }
}

/// Wilson score interval for a binomial proportion at z-score `z`.
/// Returns `(lower, upper)`, both clamped to `[0,1]`.
pub fn wilson_bounds(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = phat + z2 / (2.0 * n);
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    (((center - half) / denom).clamp(0.0, 1.0), ((center + half) / denom).clamp(0.0, 1.0))
}

struct TrialContext<'a> {
    plan: &'a TrialPlan,
    p: &'a [f64],
    k_count: u64,
    /// Bound precomputed for statistics that do not depend on the draw.
    fixed_bound: Option<f64>,
}

fn trial_violates(ctx: &TrialContext<'_>, trial: u64) -> bool {
    let plan = ctx.plan;
    let mut rng = trial_rng(plan.base_seed, trial);
    let x = sample_multinomial_with(&plan.spec, &mut rng).expect("plan validated");
    let n = plan.spec.n;
    let nf = n as f64;
    let p = ctx.p;
    let a = &plan.weights;
    match plan.statistic {
        Statistic::Bhc => {
            let stat: f64 = p.iter().zip(&x).map(|(&pi, &xi)| (pi - xi as f64 / nf).abs()).sum();
            stat > ctx.fixed_bound.expect("precomputed")
        }
        Statistic::Lemma5Envelope => p.iter().zip(&x).any(|(&pi, &xi)| {
            let envelope = lemma5_lower_envelope(pi, xi, n, ctx.k_count, plan.delta_or_m)
                .expect("plan validated");
            pi < envelope
        }),
        Statistic::Lemma6Envelope => p.iter().zip(&x).any(|(&pi, &xi)| {
            let dev = lemma6_upper_envelope(pi, n, ctx.k_count, plan.delta_or_m)
                .expect("plan validated");
            pi - xi as f64 / nf > dev
        }),
        Statistic::MultinomialNew => {
            let stat: f64 =
                a.iter().zip(p).zip(&x).map(|((&ai, &pi), &xi)| ai * (pi - xi as f64 / nf)).sum();
            stat > ctx.fixed_bound.expect("precomputed")
        }
        Statistic::Theorem4 => {
            let stat: f64 =
                a.iter().zip(p).zip(&x).map(|((&ai, &pi), &xi)| ai * (pi - xi as f64 / nf)).sum();
            let mut a_t = 0.0f64;
            let mut a_tc = 0.0f64;
            let mut t_size = 0u64;
            for (&ai, &xi) in a.iter().zip(&x) {
                if xi >= 1 {
                    a_t = a_t.max(ai);
                    t_size += 1;
                } else {
                    a_tc = a_tc.max(ai);
                }
            }
            let bound = theorem4_rhs(a_t, a_tc, t_size, plan.spec.ln_k, plan.delta_or_m, n)
                .expect("plan validated");
            stat > bound
        }
        Statistic::Lemma8 => {
            let stat: f64 =
                a.iter().zip(p).zip(&x).map(|((&ai, &pi), &xi)| ai * (pi - xi as f64 / nf)).sum();
            let mut occupied_a = Vec::new();
            let mut counts = Vec::new();
            let mut a_tc = 0.0f64;
            for (&ai, &xi) in a.iter().zip(&x) {
                if xi >= 1 {
                    occupied_a.push(ai);
                    counts.push(xi);
                } else {
                    a_tc = a_tc.max(ai);
                }
            }
            let bound = lemma8_rhs(&occupied_a, a_tc, &counts, plan.spec.ln_k, plan.delta_or_m, n)
                .expect("plan validated");
            stat > bound
        }
        Statistic::Lemma3Tail => {
            let stat: f64 =
                a.iter().zip(p).zip(&x).map(|((&ai, &pi), &xi)| ai * (xi as f64 / nf - pi)).sum();
            stat > plan.delta_or_m
        }
        Statistic::Lemma4Tail => {
            let stat: f64 =
                a.iter().zip(p).zip(&x).map(|((&ai, &pi), &xi)| ai * (pi - xi as f64 / nf)).sum();
            stat > plan.delta_or_m
        }
    }
}

/// Runs the coverage experiment described by `plan`. Deterministic for a
/// fixed `base_seed` under any parallelism degree.
pub fn run_coverage(plan: &TrialPlan) -> Result<CoverageResult> {
    plan.validate()?;
    let p = plan.spec.probabilities()?;
    let k_count = p.len() as u64;
    let fixed_bound = match plan.statistic {
        Statistic::Bhc => Some(bhc_rhs(plan.spec.ln_k, plan.delta_or_m, plan.spec.n)?),
        Statistic::MultinomialNew => Some(lemma_multinomial_new_rhs(
            &plan.weights,
            p,
            k_count,
            plan.delta_or_m,
            plan.spec.n,
        )?),
        _ => None,
    };
    // The probability budget the empirical rate must respect.
    let bound_delta = match plan.statistic {
        Statistic::Lemma3Tail => {
            lemma3_tail_bound(&plan.weights, p, plan.spec.n, plan.delta_or_m)?
        }
        Statistic::Lemma4Tail => {
            lemma4_tail_bound(&plan.weights, p, plan.spec.n, plan.delta_or_m)?
        }
        _ => plan.delta_or_m,
    };
    let ctx = TrialContext { plan, p, k_count, fixed_bound };
    let violations: u64 = (0..plan.trials)
        .into_par_iter()
        .map(|trial| u64::from(trial_violates(&ctx, trial)))
        .sum();
    let empirical_rate = violations as f64 / plan.trials as f64;
    let (wilson_lower, wilson_upper) = wilson_bounds(violations, plan.trials, WILSON_Z);
    Ok(CoverageResult {
        statistic: plan.statistic.name().to_string(),
        k_count,
        n: plan.spec.n,
        violations,
        trials: plan.trials,
        empirical_rate,
        wilson_upper,
        bound_delta,
        pass: wilson_lower <= bound_delta,
    })
}

/// Truncated power-law cell distribution `p_k ∝ exp(−(k/β)^α)`, `k = 1..=k_max`.
///
/// Errors when the truncated tail mass (estimated by direct summation past
/// `k_max`) exceeds `1e-9` of the total.
pub fn decay_probabilities(spec: &DecaySpec, k_max: usize) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(domain("K_max must be >= 1"));
    }
    let weight = |k: f64| (-(k / spec.beta).powf(spec.alpha)).exp();
    let mut w: Vec<f64> = (1..=k_max).map(|k| weight(k as f64)).collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(domain("decay weights vanish; beta too small for this K_max"));
    }
    // Tail check by summation beyond the truncation point.
    let mut tail = 0.0;
    let mut k = k_max + 1;
    loop {
        let t = weight(k as f64);
        tail += t;
        if t < total * 1e-18 || k > k_max + 1_000_000 {
            break;
        }
        k += 1;
    }
    if tail > 1e-9 * total {
        return Err(precondition(format!(
            "truncated tail mass {tail:.3e} exceeds 1e-9 of the total; increase K_max"
        )));
    }
    for v in &mut w {
        *v /= total;
    }
    Ok(w)
}

/// The normalization constant implied by [`decay_probabilities`]: the
/// simulated masses are `p_k = e^{−(k/β)^α} / Z`, so the decay hypothesis
/// `p_k ≤ C·e^{−(k/β)^α}` holds exactly when `C ≥ 1/Z`.
pub fn decay_normalizer(spec: &DecaySpec, k_max: usize) -> Result<f64> {
    if k_max == 0 {
        return Err(domain("K_max must be >= 1"));
    }
    let z: f64 = (1..=k_max).map(|k| (-(k as f64 / spec.beta).powf(spec.alpha)).exp()).sum();
    if z <= 0.0 {
        return Err(domain("decay weights vanish; beta too small for this K_max"));
    }
    Ok(z)
}

/// Samples `trials` occupancy draws of `n` points from the truncated decay
/// distribution and records the occupied-cell count per trial.
pub fn simulate_occupancy_decay(
    spec: &DecaySpec,
    k_max: usize,
    n: u64,
    trials: u64,
    base_seed: u64,
) -> Result<Vec<u64>> {
    if trials == 0 {
        return Err(domain("trials must be >= 1"));
    }
    if n == 0 {
        return Err(domain("n must be >= 1"));
    }
    let p = decay_probabilities(spec, k_max)?;
    let mspec = MultinomialSpec::new(n, p)?;
    let t_sizes: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(base_seed, trial);
            let x = sample_multinomial_with(&mspec, &mut rng).expect("validated");
            x.iter().filter(|&&c| c >= 1).count() as u64
        })
        .collect();
    Ok(t_sizes)
}

/// Order-statistic upper empirical `q`-quantile: the `ceil(q·len)`-th
/// smallest value (1-based).
pub fn empirical_quantile(values: &[u64], q: f64) -> u64 {
    assert!(!values.is_empty() && (0.0..=1.0).contains(&q));
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Pearson chi-square statistic for observed counts against expected counts.
pub fn chi_square_statistic(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let diff = o as f64 - e;
            diff * diff / e
        })
        .sum()
}
