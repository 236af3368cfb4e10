//! Generalization-bound evaluators.
//!
//! Every evaluator returns a [`BoundReport`] decomposing its bound into
//! empirical loss, robustness term, a `√`-rate concentration term, a linear
//! (`1/n`) concentration term, and named extra terms; the total is the exact
//! sum of the parts. Two families are implemented:
//!
//! - the prior covering-number bound, paying `B·√(2K ln2 + 2 ln(1/δ))/√n`
//!   (and honestly reporting `+∞` when `K` itself overflows `f64`), and
//! - the occupancy bounds, paying
//!   `ζ·((√2+1)√(|T_S| ln(2K/δ)/n) + 2|T_S| ln(2K/δ)/n)` or the per-cell
//!   `Q₁/Q₂` refinement, plus their pseudo-robust variants and the
//!   uniform-stability baseline used for comparisons.
//!
//! All logarithms are natural throughout, including the `log(1/δ)` term of
//! the occupancy-decay bound, whose derivation is natural-exponential.

use crate::concentration::{bhc_rhs, check_delta, ln_2k_over_delta};
use crate::error::{domain, precondition, Result};
use crate::partition::OccupancyProfile;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use std::io::Write;

/// Term-by-term decomposition of a generalization bound.
///
/// `total` always equals the sum of the parts (including every extra term);
/// `overflowed` marks reports whose concentration term is `+∞` because the
/// bound needs a materialized `K` that does not fit in `f64`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub empirical_loss: f64,
    pub robustness_term: f64,
    pub concentration_sqrt_term: f64,
    pub concentration_linear_term: f64,
    pub extra_terms: Vec<(String, f64)>,
    pub total: f64,
    pub overflowed: bool,
}

impl BoundReport {
    fn assemble(
        bound_name: &str,
        empirical_loss: f64,
        robustness_term: f64,
        sqrt_term: f64,
        linear_term: f64,
        extra_terms: Vec<(String, f64)>,
    ) -> Self {
        let extra_sum: f64 = extra_terms.iter().map(|(_, v)| v).sum();
        let total = empirical_loss + robustness_term + sqrt_term + linear_term + extra_sum;
        Self {
            bound_name: bound_name.to_string(),
            empirical_loss,
            robustness_term,
            concentration_sqrt_term: sqrt_term,
            concentration_linear_term: linear_term,
            extra_terms,
            total,
            overflowed: !total.is_finite(),
        }
    }

    /// Sum of the named extra terms.
    pub fn extra_sum(&self) -> f64 {
        // + 0.0 normalizes the -0.0 an empty float sum yields.
        self.extra_terms.iter().map(|(_, v)| v).sum::<f64>() + 0.0
    }

    /// Fixed-column CSV row: bound_name, empirical_loss, robustness_term,
    /// sqrt_term, linear_term, extra, total.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.bound_name,
            self.empirical_loss,
            self.robustness_term,
            self.concentration_sqrt_term,
            self.concentration_linear_term,
            self.extra_sum(),
            self.total
        )
    }

    pub const CSV_HEADER: &'static str =
        "bound_name,empirical_loss,robustness_term,sqrt_term,linear_term,extra,total";

    pub fn write_csv_table<W: Write>(reports: &[BoundReport], mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in reports {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Loss data of the hypothesis under evaluation.
///
/// `zeta` is the supremum of the loss over the whole sample space (an
/// analytic quantity supplied by the certifier — a sample maximum would
/// underestimate it and void the bound). `b`, when present, bounds the loss
/// over the entire hypothesis space. `alpha_occupied` holds per-occupied-cell
/// conditional expected losses in the occupancy profile's sorted cell order,
/// and `alpha_unoccupied_max` bounds the conditional loss over unoccupied
/// cells; plugging `zeta` for the latter is always valid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossProfile {
    pub per_sample_losses: Vec<f64>,
    pub zeta: f64,
    pub b: Option<f64>,
    pub alpha_occupied: Option<Vec<f64>>,
    pub alpha_unoccupied_max: Option<f64>,
}

impl LossProfile {
    /// Profile with only losses and the loss supremum.
    pub fn new(per_sample_losses: Vec<f64>, zeta: f64) -> Result<Self> {
        let p = Self {
            per_sample_losses,
            zeta,
            b: None,
            alpha_occupied: None,
            alpha_unoccupied_max: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_b(mut self, b: f64) -> Result<Self> {
        self.b = Some(b);
        self.validate()?;
        Ok(self)
    }

    pub fn with_alphas(mut self, alpha_occupied: Vec<f64>, alpha_unoccupied_max: f64) -> Result<Self> {
        self.alpha_occupied = Some(alpha_occupied);
        self.alpha_unoccupied_max = Some(alpha_unoccupied_max);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        // Relative slack covers round-off between the analytic sup and the
        // floating-point loss evaluations it dominates.
        let tol = 1e-9 * (1.0 + self.zeta.abs());
        for (i, &l) in self.per_sample_losses.iter().enumerate() {
            if !l.is_finite() || l < 0.0 {
                return Err(domain(format!("loss[{i}] = {l} must be finite and >= 0")));
            }
            if l > self.zeta + tol {
                return Err(domain(format!("loss[{i}] = {l} exceeds zeta = {}", self.zeta)));
            }
        }
        if let Some(b) = self.b {
            if b + tol < self.zeta {
                return Err(domain(format!("B = {b} must be >= zeta = {}", self.zeta)));
            }
        }
        if let Some(alphas) = &self.alpha_occupied {
            for (i, &a) in alphas.iter().enumerate() {
                if !a.is_finite() || a < 0.0 || a > self.zeta + tol {
                    return Err(domain(format!(
                        "alpha[{i}] = {a} must lie in [0, zeta = {}]",
                        self.zeta
                    )));
                }
            }
        }
        if let Some(a) = self.alpha_unoccupied_max {
            if !a.is_finite() || a < 0.0 || a > self.zeta + tol {
                return Err(domain(format!(
                    "alpha_unoccupied_max = {a} must lie in [0, zeta = {}]",
                    self.zeta
                )));
            }
        }
        Ok(())
    }

    pub fn mean_loss(&self) -> f64 {
        if self.per_sample_losses.is_empty() {
            0.0
        } else {
            self.per_sample_losses.iter().sum::<f64>() / self.per_sample_losses.len() as f64
        }
    }
}

/// Power-law decay profile for sorted cell masses: `p_k ≤ C·exp(−(k/β)^α)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecaySpec {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
}

impl DecaySpec {
    pub fn new(alpha: f64, beta: f64, c: f64) -> Result<Self> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(domain(format!("alpha = {alpha} must be positive")));
        }
        if beta <= 0.0 || !beta.is_finite() {
            return Err(domain(format!("beta = {beta} must be positive")));
        }
        // c = 0 is admitted for formula evaluation (it simply removes the
        // correction term); sampling contexts require c >= 1/Z anyway.
        if c < 0.0 || !c.is_finite() {
            return Err(domain(format!("c = {c} must be >= 0")));
        }
        Ok(Self { alpha, beta, c })
    }
}

fn check_instance(loss: &LossProfile, eps_s: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(precondition("n must be >= 1"));
    }
    loss.validate()?;
    if loss.per_sample_losses.len() as u64 != n {
        return Err(precondition(format!(
            "n = {n} but {} per-sample losses were supplied",
            loss.per_sample_losses.len()
        )));
    }
    if !eps_s.is_finite() || eps_s < 0.0 {
        return Err(domain(format!("eps_S = {eps_s} must be finite and >= 0")));
    }
    Ok(loss.mean_loss())
}

/// Prior covering-number bound:
/// `E[ℓ] ≤ mean + ε(S) + B·√((2K ln2 + 2 ln(1/δ))/n)`.
///
/// Requires the hypothesis-space-wide bound `B` and a materializable `K`;
/// when `exp(ln_k)` overflows, the report carries an infinite total and the
/// `overflowed` flag instead of erroring — that overflow is the headline
/// comparison against the occupancy bounds.
pub fn proposition1_bound(
    loss: &LossProfile,
    eps_s: f64,
    ln_k: f64,
    delta: f64,
    n: u64,
) -> Result<BoundReport> {
    let mean = check_instance(loss, eps_s, n)?;
    let b = loss
        .b
        .ok_or_else(|| precondition("proposition1_bound requires the hypothesis-space bound B"))?;
    let rhs = bhc_rhs(ln_k, delta, n)?;
    // 0 * inf would poison the zero-loss case.
    let sqrt_term = if b == 0.0 { 0.0 } else { b * rhs };
    Ok(BoundReport::assemble("prop1", mean, eps_s, sqrt_term, 0.0, vec![]))
}

fn occupancy_consistency(loss: &LossProfile, occupancy: &OccupancyProfile, n: u64) -> Result<()> {
    if occupancy.n != n {
        return Err(precondition(format!(
            "occupancy profile has n = {}, bound evaluation has n = {n}",
            occupancy.n
        )));
    }
    if loss.per_sample_losses.len() as u64 != n {
        return Err(precondition(format!(
            "n = {n} but {} per-sample losses were supplied",
            loss.per_sample_losses.len()
        )));
    }
    Ok(())
}

/// Occupancy bound:
/// `E[ℓ] ≤ mean + ε(S) + ζ·((√2+1)·√(|T_S|·ln(2K/δ)/n) + 2|T_S|·ln(2K/δ)/n)`.
///
/// `ln(2K/δ)` is computed in log space, so covering numbers far beyond
/// `f64` range are fine.
pub fn theorem1_bound(
    loss: &LossProfile,
    eps_s: f64,
    occupancy: &OccupancyProfile,
    ln_k: f64,
    delta: f64,
    n: u64,
) -> Result<BoundReport> {
    let mean = check_instance(loss, eps_s, n)?;
    occupancy_consistency(loss, occupancy, n)?;
    check_delta(delta)?;
    let l = ln_2k_over_delta(ln_k, delta);
    let t = occupancy.t_size() as f64;
    let nf = n as f64;
    let sqrt_term = loss.zeta * (SQRT_2 + 1.0) * (t * l / nf).sqrt();
    let linear_term = loss.zeta * 2.0 * t * l / nf;
    Ok(BoundReport::assemble("thm1", mean, eps_s, sqrt_term, linear_term, vec![]))
}

fn q1_q2(
    alphas: &[f64],
    alpha_tc: f64,
    counts: &[u64],
    n: u64,
) -> (f64, f64) {
    let nf = n as f64;
    let q1: f64 = alphas
        .iter()
        .zip(counts)
        .map(|(&ak, &ck)| (alpha_tc + SQRT_2 * ak) * (ck as f64 / nf).sqrt())
        .sum();
    let q2 = alpha_tc * counts.len() as f64 + alphas.iter().sum::<f64>();
    (q1, q2)
}

/// Per-cell refinement of [`theorem1_bound`]:
/// `E[ℓ] ≤ mean + ε(S) + Q₁·√(ln(2K/δ)/n) + 2·Q₂·ln(2K/δ)/n` with
/// `Q₁ = Σ_{k∈T}(α_Tc + √2·α_k)·√(|I_k|/n)` and `Q₂ = α_Tc·|T| + Σ_{k∈T} α_k`.
///
/// Requires one conditional-loss entry per occupied cell (in the occupancy
/// profile's sorted order) and a bound on the unoccupied conditional losses;
/// the `ζ` plug-in for the latter is always valid since every `α_k ≤ ζ`.
pub fn theorem2_bound(
    loss: &LossProfile,
    eps_s: f64,
    occupancy: &OccupancyProfile,
    ln_k: f64,
    delta: f64,
    n: u64,
) -> Result<BoundReport> {
    let mean = check_instance(loss, eps_s, n)?;
    occupancy_consistency(loss, occupancy, n)?;
    check_delta(delta)?;
    let alphas = loss
        .alpha_occupied
        .as_deref()
        .ok_or_else(|| precondition("theorem2_bound requires alpha_occupied"))?;
    let alpha_tc = loss
        .alpha_unoccupied_max
        .ok_or_else(|| precondition("theorem2_bound requires alpha_unoccupied_max"))?;
    if alphas.len() as u64 != occupancy.t_size() {
        return Err(precondition(format!(
            "alpha_occupied has {} entries for {} occupied cells",
            alphas.len(),
            occupancy.t_size()
        )));
    }
    let counts = occupancy.counts_vec();
    let (q1, q2) = q1_q2(alphas, alpha_tc, &counts, n);
    let l = ln_2k_over_delta(ln_k, delta);
    let nf = n as f64;
    let sqrt_term = q1 * (l / nf).sqrt();
    let linear_term = 2.0 * q2 * l / nf;
    Ok(BoundReport::assemble("thm2", mean, eps_s, sqrt_term, linear_term, vec![]))
}

/// Value of the occupancy-decay bound together with whether the statement's
/// hypothesis `ln n ≥ max{1, 2/α}` held for the supplied `n`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayBound {
    pub value: f64,
    pub hypothesis_met: bool,
}

/// High-probability bound on the occupied-cell count when sorted cell
/// masses decay as `p_k ≤ C·exp(−(k/β)^α)`:
///
/// ```text
/// |T_S| ≤ β(ln n)^{1/α} + C(e−1)β/α + ln(1/δ)          if α ≥ 1
/// |T_S| ≤ (1 + 2C(e−1))β(ln n)^{1/α} + ln(1/δ)         if α < 1
/// ```
///
/// When `ln n < max{1, 2/α}` the formula value is still returned, flagged
/// as outside the statement's hypothesis.
pub fn proposition3_ts_bound(spec: &DecaySpec, n: u64, delta: f64) -> Result<DecayBound> {
    check_delta(delta)?;
    if n == 0 {
        return Err(domain("n must be >= 1"));
    }
    let ln_n = (n as f64).ln();
    let hypothesis_met = ln_n >= 1.0f64.max(2.0 / spec.alpha);
    let e_minus_1 = std::f64::consts::E - 1.0;
    let ln_inv_delta = (1.0 / delta).ln();
    let value = if spec.alpha >= 1.0 {
        spec.beta * ln_n.powf(1.0 / spec.alpha) + spec.c * e_minus_1 * spec.beta / spec.alpha
            + ln_inv_delta
    } else {
        (1.0 + 2.0 * spec.c * e_minus_1) * spec.beta * ln_n.powf(1.0 / spec.alpha) + ln_inv_delta
    };
    Ok(DecayBound { value, hypothesis_met })
}

fn check_pseudo(n_hat: u64, n: u64, zeta_hat: f64) -> Result<()> {
    if n_hat == 0 || n_hat > n {
        return Err(precondition(format!("n_hat = {n_hat} must satisfy 1 <= n_hat <= n = {n}")));
    }
    if !zeta_hat.is_finite() || zeta_hat < 0.0 {
        return Err(domain(format!("zeta_hat = {zeta_hat} must be finite and >= 0")));
    }
    Ok(())
}

/// Pseudo-robust variant of [`theorem1_bound`]: only `n̂(S)` of the training
/// points need the within-cell closeness, at the price of the residual
/// `(n−n̂)/n · ζ̂` where `ζ̂ = max_{k,i} |α_k − ℓ(z_i)|`. Here `loss.zeta`
/// plays the conditional-max role `max_k E[ℓ | z ∈ C_k]`. Reduces exactly to
/// the fully robust bound at `n̂ = n`.
#[allow(clippy::too_many_arguments)]
pub fn theorem5_bound(
    loss: &LossProfile,
    eps_s: f64,
    n_hat: u64,
    zeta_hat: f64,
    occupancy: &OccupancyProfile,
    ln_k: f64,
    delta: f64,
    n: u64,
) -> Result<BoundReport> {
    let mean = check_instance(loss, eps_s, n)?;
    occupancy_consistency(loss, occupancy, n)?;
    check_pseudo(n_hat, n, zeta_hat)?;
    check_delta(delta)?;
    let nf = n as f64;
    let robustness = n_hat as f64 / nf * eps_s;
    let residual = (n - n_hat) as f64 / nf * zeta_hat;
    let l = ln_2k_over_delta(ln_k, delta);
    let t = occupancy.t_size() as f64;
    let sqrt_term = loss.zeta * (SQRT_2 + 1.0) * (t * l / nf).sqrt();
    let linear_term = loss.zeta * 2.0 * t * l / nf;
    Ok(BoundReport::assemble(
        "thm5",
        mean,
        robustness,
        sqrt_term,
        linear_term,
        vec![("pseudo_residual".to_string(), residual)],
    ))
}

/// Pseudo-robust variant of [`theorem2_bound`]: the `Q₁/Q₂` concentration
/// terms with the `(n̂/n)·ε(S) + (n−n̂)/n·ζ̂` robustness split.
#[allow(clippy::too_many_arguments)]
pub fn theorem6_bound(
    loss: &LossProfile,
    eps_s: f64,
    n_hat: u64,
    zeta_hat: f64,
    occupancy: &OccupancyProfile,
    ln_k: f64,
    delta: f64,
    n: u64,
) -> Result<BoundReport> {
    check_pseudo(n_hat, n, zeta_hat)?;
    let base = theorem2_bound(loss, eps_s, occupancy, ln_k, delta, n)?;
    let nf = n as f64;
    let robustness = n_hat as f64 / nf * eps_s;
    let residual = (n - n_hat) as f64 / nf * zeta_hat;
    Ok(BoundReport::assemble(
        "thm6",
        base.empirical_loss,
        robustness,
        base.concentration_sqrt_term,
        base.concentration_linear_term,
        vec![("pseudo_residual".to_string(), residual)],
    ))
}

/// Uniform-stability baseline for `λ`-regularized ERM with loss range `B`:
/// `E[ℓ] ≤ mean + 2β + (4nβ + √(B/λ))·√(ln(1/δ)/(2n))` with
/// `β = 2B²/(λn)`. The `2β` stability offset is reported as an extra term.
pub fn uniform_stability_bound(
    mean_loss: f64,
    b: f64,
    lambda: f64,
    delta: f64,
    n: u64,
) -> Result<BoundReport> {
    if b <= 0.0 || !b.is_finite() {
        return Err(domain(format!("B = {b} must be positive")));
    }
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(domain(format!("lambda = {lambda} must be positive")));
    }
    check_delta(delta)?;
    if n == 0 {
        return Err(domain("n must be >= 1"));
    }
    if !mean_loss.is_finite() || mean_loss < 0.0 {
        return Err(domain(format!("mean_loss = {mean_loss} must be finite and >= 0")));
    }
    let nf = n as f64;
    let beta = 2.0 * b * b / (lambda * nf);
    let sqrt_term = (4.0 * nf * beta + (b / lambda).sqrt()) * ((1.0 / delta).ln() / (2.0 * nf)).sqrt();
    Ok(BoundReport::assemble(
        "stability",
        mean_loss,
        0.0,
        sqrt_term,
        0.0,
        vec![("stability_offset".to_string(), 2.0 * beta)],
    ))
}
