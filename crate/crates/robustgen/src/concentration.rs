//! Closed-form multinomial concentration inequalities.
//!
//! Let `X = (X_1, …, X_K)` be multinomial with `n` trials and category
//! probabilities `p = (p_1, …, p_K)`. The bounds in this module control
//! weighted deviations `Σ aᵢ (pᵢ − Xᵢ/n)` for nonnegative weights `aᵢ`,
//! either uniformly over all `p` (the classical route, paying `√K`) or
//! through the set of *occupied* categories `T = {i : Xᵢ ≥ 1}` (the
//! data-dependent route, paying `√(|T| ln K)`).
//!
//! All `K`-dependent quantities are computed from `ln K` in log space:
//! `ln(2K/δ) = ln 2 + ln K − ln δ`. `K` itself is never materialized, so
//! covering numbers like `10^784` are valid inputs everywhere except the
//! classical bound, which genuinely needs `K` and returns `+∞` when
//! `exp(ln K)` overflows.
//!
//! Every function here is pure; concurrent use needs no synchronization.

use crate::error::{domain, precondition, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, SQRT_2};

/// Tolerance on `Σ pᵢ = 1` when a probability vector is materialized.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Parameters of a multinomial distribution.
///
/// `p` may be absent for bounds that need only `ln K`; when it is present
/// its length must equal `round(exp(ln_k))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultinomialSpec {
    /// Trial count `n ≥ 1`.
    pub n: u64,
    /// Category probabilities, if materialized.
    pub p: Option<Vec<f64>>,
    /// Natural log of the category count `K`.
    pub ln_k: f64,
}

impl MultinomialSpec {
    /// Spec with materialized probabilities; `ln_k` is derived from the length.
    pub fn new(n: u64, p: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(domain("trial count n must be >= 1"));
        }
        validate_probabilities(&p)?;
        let ln_k = (p.len() as f64).ln();
        Ok(Self { n, p: Some(p), ln_k })
    }

    /// Spec carrying only `ln K` (for bounds that never enumerate categories).
    pub fn from_ln_k(n: u64, ln_k: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("trial count n must be >= 1"));
        }
        if !ln_k.is_finite() || ln_k < 0.0 {
            return Err(domain(format!("ln_k must be finite and >= 0, got {ln_k}")));
        }
        Ok(Self { n, p: None, ln_k })
    }

    /// Materialized probabilities, or a precondition error.
    pub fn probabilities(&self) -> Result<&[f64]> {
        self.p
            .as_deref()
            .ok_or_else(|| precondition("this operation requires materialized p"))
    }
}

/// Checks `pᵢ ∈ [0,1]` and `Σ pᵢ = 1` within [`PROB_SUM_TOL`].
pub fn validate_probabilities(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(domain("probability vector must be nonempty"));
    }
    for (i, &pi) in p.iter().enumerate() {
        if !(0.0..=1.0).contains(&pi) {
            return Err(domain(format!("p[{i}] = {pi} is outside [0,1]")));
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(domain(format!("probabilities sum to {sum}, expected 1 within {PROB_SUM_TOL}")));
    }
    Ok(())
}

/// Nonnegative weights `aᵢ` together with their maxima over the occupied
/// index set and its complement.
///
/// `a_occupied_max` is `max_{i∈T} aᵢ` and `a_unoccupied_max` is
/// `max_{i∉T} aᵢ`; an empty set contributes 0 (the corresponding terms of
/// the bounds vanish in that case).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightProfile {
    pub a: Vec<f64>,
    pub a_occupied_max: f64,
    pub a_unoccupied_max: f64,
}

impl WeightProfile {
    /// Builds the profile from weights and the occupied index set
    /// (`occupied[i]` true when category `i` holds at least one sample).
    pub fn from_occupancy(a: Vec<f64>, occupied: &[bool]) -> Result<Self> {
        if a.len() != occupied.len() {
            return Err(precondition(format!(
                "weights ({}) and occupancy mask ({}) lengths differ",
                a.len(),
                occupied.len()
            )));
        }
        validate_weights(&a)?;
        let mut a_t = 0.0f64;
        let mut a_tc = 0.0f64;
        for (&ai, &occ) in a.iter().zip(occupied) {
            if occ {
                a_t = a_t.max(ai);
            } else {
                a_tc = a_tc.max(ai);
            }
        }
        Ok(Self { a, a_occupied_max: a_t, a_unoccupied_max: a_tc })
    }
}

fn validate_weights(a: &[f64]) -> Result<()> {
    for (i, &ai) in a.iter().enumerate() {
        if !ai.is_finite() || ai < 0.0 {
            return Err(domain(format!("weight a[{i}] = {ai} must be finite and >= 0")));
        }
    }
    Ok(())
}

/// Either a confidence level `δ` or a deviation threshold `M`, exactly one.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailCriterion {
    /// Confidence level `δ ∈ (0,1)`: the inequality holds with prob `≥ 1−δ`.
    Confidence(f64),
    /// Deviation threshold `M > 0`: the inequality bounds `P(stat > M)`.
    Threshold(f64),
}

/// A fully specified multinomial tail event: distribution, weights, and the
/// confidence level or threshold under test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailQuery {
    pub spec: MultinomialSpec,
    pub weights: WeightProfile,
    pub criterion: TailCriterion,
}

impl TailQuery {
    pub fn validate(&self) -> Result<()> {
        match self.criterion {
            TailCriterion::Confidence(delta) => check_delta(delta),
            TailCriterion::Threshold(m) => {
                if m > 0.0 && m.is_finite() {
                    Ok(())
                } else {
                    Err(domain(format!("threshold M must be positive and finite, got {m}")))
                }
            }
        }
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("delta must lie in (0,1), got {delta}")))
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(domain("sample size n must be >= 1"));
    }
    Ok(())
}

fn check_ln_k(ln_k: f64) -> Result<()> {
    if !ln_k.is_finite() || ln_k < 0.0 {
        return Err(domain(format!("ln_k must be finite and >= 0, got {ln_k}")));
    }
    Ok(())
}

/// `ln(2K/δ)` computed as `ln 2 + ln K − ln δ`, never materializing `K`.
pub fn ln_2k_over_delta(ln_k: f64, delta: f64) -> f64 {
    LN_2 + ln_k - delta.ln()
}

/// `ln(K/δ)` for a small materialized category count.
fn ln_k_over_delta(k_count: u64, delta: f64) -> f64 {
    (k_count as f64).ln() - delta.ln()
}

/// Classical multinomial ℓ₁ deviation bound.
///
/// With probability at least `1−δ`,
/// `Σ_k |p_k − X_k/n| ≤ √((2K ln 2 + 2 ln(1/δ)) / n)`.
///
/// `K` is recovered as `exp(ln_k)`; if that overflows the result is `+∞`,
/// which is the honest value of this bound for astronomically large covers.
pub fn bhc_rhs(ln_k: f64, delta: f64, n: u64) -> Result<f64> {
    check_ln_k(ln_k)?;
    check_delta(delta)?;
    check_n(n)?;
    let k = ln_k.exp();
    if !k.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(((2.0 * k * LN_2 + 2.0 * (1.0 / delta).ln()) / n as f64).sqrt())
}

/// Shared validation for the fixed-weight tail bounds.
fn tail_inputs(weights: &[f64], p: &[f64], n: u64, m: f64) -> Result<(f64, f64)> {
    check_n(n)?;
    validate_weights(weights)?;
    validate_probabilities(p)?;
    if weights.len() != p.len() {
        return Err(precondition(format!(
            "weights ({}) and probabilities ({}) lengths differ",
            weights.len(),
            p.len()
        )));
    }
    if m <= 0.0 || !m.is_finite() {
        return Err(domain(format!("threshold M must be positive and finite, got {m}")));
    }
    let dot: f64 = weights.iter().zip(p).map(|(a, q)| a * q).sum();
    if dot == 0.0 {
        return Err(domain("sum of a_i * p_i must be nonzero"));
    }
    let a_max = weights.iter().cloned().fold(0.0f64, f64::max);
    let beta: f64 = 2.0 * weights.iter().zip(p).map(|(a, q)| a * a * q).sum::<f64>();
    Ok((a_max, beta))
}

/// Lower-tail bound for a fixed-weight multinomial sum.
///
/// For fixed `ā_i ≥ 0` with `Σ ā_i p_i ≠ 0` and any `M > 0`,
/// `P(Σ ā_i (p_i − X_i/n) < −M) ≤ exp(−(nM / 2ā) · min{1, āM/β})`
/// with `ā = max_i ā_i` and `β = 2 Σ ā_i² p_i`.
pub fn lemma3_tail_bound(weights: &[f64], p: &[f64], n: u64, m: f64) -> Result<f64> {
    let (a_max, beta) = tail_inputs(weights, p, n, m)?;
    let exponent = -(n as f64 * m / (2.0 * a_max)) * 1.0f64.min(a_max * m / beta);
    Ok(exponent.exp())
}

/// Upper-tail bound for a fixed-weight multinomial sum.
///
/// Under the hypotheses of [`lemma3_tail_bound`],
/// `P(Σ ā_i (p_i − X_i/n) > M) ≤ exp(−nM²/β)`.
pub fn lemma4_tail_bound(weights: &[f64], p: &[f64], n: u64, m: f64) -> Result<f64> {
    let (_, beta) = tail_inputs(weights, p, n, m)?;
    Ok((-(n as f64) * m * m / beta).exp())
}

/// Per-category lower confidence envelope on `p_i`.
///
/// With probability at least `1−δ`, simultaneously for all `i ∈ [K]`:
///
/// ```text
/// p_i ≥ X_i/n − 2√(p_i ln(K/δ)/n)   if p_i > ln(K/δ)/n
/// p_i ≥ X_i/n − 2 ln(K/δ)/n         otherwise
/// ```
///
/// The constants are the Chernoff-exact ones: the one-sided bound
/// `P(X_i/n − p_i > M) ≤ exp(−nM²/(4p_i))` (valid for `M ≤ 2p_i`) equals
/// `δ/K` at `M = 2√(p_i ln(K/δ)/n)`, and the linear branch
/// `P(X_i/n − p_i > M) ≤ exp(−nM/2)` (valid for `M ≥ 2p_i`) equals `δ/K`
/// at `M = 2 ln(K/δ)/n`; the two branches meet at `p_i = ln(K/δ)/n`.
/// A frequently quoted form drops the factor 2 on the square-root branch
/// (with case threshold `ln(K/δ)/(4n)`); that version fails Monte Carlo
/// coverage — the per-category failure probability is `(δ/K)^{1/4}`, not
/// `δ/K` — so the exact constants are used here.
///
/// The case split needs the true `p_i`, so this envelope is a simulation /
/// validation tool, not a data-only bound. Simultaneous validity is a
/// statistical property checked by the coverage suite.
pub fn lemma5_lower_envelope(p_i: f64, x_i: u64, n: u64, k_count: u64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_n(n)?;
    if k_count == 0 {
        return Err(domain("category count K must be >= 1"));
    }
    if !(0.0..=1.0).contains(&p_i) {
        return Err(domain(format!("p_i = {p_i} is outside [0,1]")));
    }
    let l = ln_k_over_delta(k_count, delta);
    let nf = n as f64;
    let freq = x_i as f64 / nf;
    if p_i > l / nf {
        Ok(freq - 2.0 * (p_i * l / nf).sqrt())
    } else {
        Ok(freq - 2.0 * l / nf)
    }
}

/// Per-category upper deviation envelope: with probability at least `1−δ`,
/// for all `i`, `p_i − X_i/n ≤ √(2 p_i ln(K/δ)/n)`. Returns the right-hand
/// side; `p_i = 0` gives 0.
pub fn lemma6_upper_envelope(p_i: f64, n: u64, k_count: u64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_n(n)?;
    if k_count == 0 {
        return Err(domain("category count K must be >= 1"));
    }
    if !(0.0..=1.0).contains(&p_i) {
        return Err(domain(format!("p_i = {p_i} is outside [0,1]")));
    }
    Ok((2.0 * p_i * ln_k_over_delta(k_count, delta) / n as f64).sqrt())
}

/// Distribution-weighted multinomial deviation bound: with probability at
/// least `1−δ`,
/// `Σ a_i (p_i − X_i/n) ≤ (Σ a_i √p_i) · √(2 ln(K/δ)/n)`.
///
/// When `p` is uniform this recovers a `√K`-type rate; when the mass
/// concentrates on few categories, `Σ √p_i ≈ 1` and the `√K` factor is gone.
pub fn lemma_multinomial_new_rhs(
    weights: &[f64],
    p: &[f64],
    k_count: u64,
    delta: f64,
    n: u64,
) -> Result<f64> {
    check_delta(delta)?;
    check_n(n)?;
    validate_weights(weights)?;
    validate_probabilities(p)?;
    if weights.len() != p.len() {
        return Err(precondition(format!(
            "weights ({}) and probabilities ({}) lengths differ",
            weights.len(),
            p.len()
        )));
    }
    if k_count == 0 {
        return Err(domain("category count K must be >= 1"));
    }
    let coeff: f64 = weights.iter().zip(p).map(|(a, q)| a * q.sqrt()).sum();
    Ok(coeff * (2.0 * ln_k_over_delta(k_count, delta) / n as f64).sqrt())
}

/// Occupancy-weighted deviation bound: with probability at least `1−δ`,
///
/// `Σ a_i(X) (p_i − X_i/n) ≤ (√2·a_T + a_Tc) √(|T| ln(2K/δ)/n)
///                          + a_Tc · 2|T| ln(2K/δ)/n`,
///
/// where `a_T` / `a_Tc` are the weight maxima over occupied / unoccupied
/// categories and `|T| = t_size`. Evaluated entirely in log space;
/// `t_size = 0` returns 0 (empty sample is degenerate but well defined).
pub fn theorem4_rhs(
    a_t: f64,
    a_tc: f64,
    t_size: u64,
    ln_k: f64,
    delta: f64,
    n: u64,
) -> Result<f64> {
    check_ln_k(ln_k)?;
    check_delta(delta)?;
    check_n(n)?;
    for (name, v) in [("a_T", a_t), ("a_Tc", a_tc)] {
        if !v.is_finite() || v < 0.0 {
            return Err(domain(format!("{name} = {v} must be finite and >= 0")));
        }
    }
    if t_size == 0 {
        return Ok(0.0);
    }
    let l = ln_2k_over_delta(ln_k, delta);
    let t = t_size as f64;
    let nf = n as f64;
    Ok((SQRT_2 * a_t + a_tc) * (t * l / nf).sqrt() + a_tc * 2.0 * t * l / nf)
}

/// Count-weighted refinement of [`theorem4_rhs`]: with probability at least
/// `1−δ`,
///
/// `Σ a_i(X) (p_i − X_i/n)
///    ≤ √(ln(2K/δ)/n) · Σ_{i∈T} (a_Tc + √2·a_i) √(X_i/n)
///    + (2 ln(2K/δ)/n) · (a_Tc·|T| + Σ_{i∈T} a_i)`.
///
/// `a` and `counts` range over the occupied categories only, in matching
/// order; counts must all be ≥ 1 and sum to at most `n`.
pub fn lemma8_rhs(
    a: &[f64],
    a_tc: f64,
    counts: &[u64],
    ln_k: f64,
    delta: f64,
    n: u64,
) -> Result<f64> {
    check_ln_k(ln_k)?;
    check_delta(delta)?;
    check_n(n)?;
    validate_weights(a)?;
    if !a_tc.is_finite() || a_tc < 0.0 {
        return Err(domain(format!("a_Tc = {a_tc} must be finite and >= 0")));
    }
    if a.len() != counts.len() {
        return Err(precondition(format!(
            "weights ({}) and counts ({}) lengths differ",
            a.len(),
            counts.len()
        )));
    }
    if counts.contains(&0) {
        return Err(precondition("occupied-cell counts must all be >= 1"));
    }
    let total: u64 = counts.iter().sum();
    if total > n {
        return Err(precondition(format!("counts sum to {total} > n = {n}")));
    }
    let l = ln_2k_over_delta(ln_k, delta);
    let nf = n as f64;
    let t = counts.len() as f64;
    let sqrt_part: f64 = a
        .iter()
        .zip(counts)
        .map(|(&ai, &xi)| (a_tc + SQRT_2 * ai) * (xi as f64 / nf).sqrt())
        .sum();
    let sum_a: f64 = a.iter().sum();
    Ok((l / nf).sqrt() * sqrt_part + (2.0 * l / nf) * (a_tc * t + sum_a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {b}, got {a} (tol {tol})");
    }

    // --- bhc_rhs ---

    #[test]
    fn bhc_direct_evaluation() {
        // K=2, delta=0.05, n=1000, frozen from an arbitrary-precision run.
        let v = bhc_rhs(2f64.ln(), 0.05, 1000).unwrap();
        close(v, 0.09361652241643973, 1e-15);
    }

    #[test]
    fn bhc_vanishing_deviation_limit() {
        // K=1, delta near 1: monotone to zero as n grows.
        let mut prev = f64::INFINITY;
        for n in [10u64, 1_000, 100_000, 10_000_000] {
            let v = bhc_rhs(0.0, 1.0 - 1e-12, n).unwrap();
            assert!(v >= 0.0 && v < prev);
            prev = v;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn bhc_overflow_sentinel() {
        let v = bhc_rhs(784.0 * 10f64.ln(), 0.05, 60_000).unwrap();
        assert!(v.is_infinite());
    }

    #[test]
    fn bhc_rejects_bad_inputs() {
        assert!(bhc_rhs(1.0, 0.0, 10).is_err());
        assert!(bhc_rhs(1.0, 1.0, 10).is_err());
        assert!(bhc_rhs(1.0, 0.5, 0).is_err());
        assert!(bhc_rhs(-1.0, 0.5, 10).is_err());
    }

    // --- lemma 3 / lemma 4 tails ---

    #[test]
    fn lemma3_hand_substitution() {
        // abar=(1,0), p=(1/2,1/2), n=100, M=0.1: beta = 2*(1*0.5) = 1,
        // exponent = -(100*0.1/2) * min(1, 0.1) = -0.5.
        let v = lemma3_tail_bound(&[1.0, 0.0], &[0.5, 0.5], 100, 0.1).unwrap();
        close(v, 0.6065306597126334, 1e-15);
    }

    #[test]
    fn lemma3_small_threshold_limit() {
        let v = lemma3_tail_bound(&[1.0], &[1.0], 100, 1e-12).unwrap();
        assert!(v > 1.0 - 1e-9 && v <= 1.0);
    }

    #[test]
    fn lemma3_monotone_in_m() {
        let mut prev = 1.0;
        for m in [0.01, 0.05, 0.1, 0.5, 1.0, 2.0] {
            let v = lemma3_tail_bound(&[1.0, 2.0], &[0.3, 0.7], 50, m).unwrap();
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn lemma4_hand_substitution() {
        // abar=(1), p=(1), n=10, M=1: beta = 2, exponent = -10/2.
        let v = lemma4_tail_bound(&[1.0], &[1.0], 10, 1.0).unwrap();
        close(v, 0.006737946999085467, 1e-16);
    }

    #[test]
    fn lemma4_small_threshold_limit() {
        let v = lemma4_tail_bound(&[2.0, 1.0], &[0.3, 0.7], 200, 1e-12).unwrap();
        assert!(v > 1.0 - 1e-9 && v <= 1.0);
    }

    #[test]
    fn tails_reject_zero_dot_product() {
        // a puts weight only where p is zero: hypothesis violated.
        let r = lemma3_tail_bound(&[0.0, 1.0], &[1.0, 0.0], 10, 0.1);
        assert!(r.is_err());
        assert!(lemma4_tail_bound(&[0.0, 1.0], &[1.0, 0.0], 10, 0.1).is_err());
    }

    // --- lemma 5 / lemma 6 envelopes ---

    #[test]
    fn lemma5_first_case() {
        // p=0.5, X=50, n=100, K=2, delta=0.1: square-root branch,
        // 0.5 - 2 sqrt(0.5 ln20 / 100).
        let v = lemma5_lower_envelope(0.5, 50, 100, 2, 0.1).unwrap();
        close(v, 0.25522531693191834, 1e-15);
    }

    #[test]
    fn lemma5_branches_meet_at_threshold() {
        // At p = ln(K/delta)/n both branches give 2 ln(K/delta)/n.
        let (n, k, delta) = (100u64, 4u64, 0.05);
        let l = (k as f64 / delta).ln();
        let p = l / n as f64;
        let at = lemma5_lower_envelope(p, 10, n, k, delta).unwrap();
        let sqrt_branch = 10.0 / n as f64 - 2.0 * (p * l / n as f64).sqrt();
        close(at, sqrt_branch, 1e-15);
        close(at, 10.0 / n as f64 - 2.0 * l / n as f64, 1e-15);
    }

    #[test]
    fn lemma5_zero_mass_is_vacuous() {
        // p_i = 0 selects the second case; the bound is <= 0 = p_i.
        let l = (2.0f64 / 0.1).ln();
        for n in [1u64, 10, 1000] {
            let v = lemma5_lower_envelope(0.0, 0, n, 2, 0.1).unwrap();
            close(v, -2.0 * l / n as f64, 1e-15);
            assert!(v <= 0.0);
        }
    }

    #[test]
    fn lemma6_hand_substitution() {
        let v = lemma6_upper_envelope(0.25, 400, 4, 0.05).unwrap();
        close(v, 0.07401035936503992, 1e-15);
    }

    #[test]
    fn lemma6_zero_mass() {
        assert_eq!(lemma6_upper_envelope(0.0, 100, 5, 0.05).unwrap(), 0.0);
    }

    // --- weighted bound (section 3.2 form) ---

    #[test]
    fn multinomial_new_uniform_case() {
        // a = 1-vector, p uniform over K=4, delta=0.05, n=100:
        // (4 * 1/2) * sqrt(2 ln 80 / 100).
        let v =
            lemma_multinomial_new_rhs(&[1.0; 4], &[0.25; 4], 4, 0.05, 100).unwrap();
        close(v, 0.5920828749203194, 1e-15);
    }

    #[test]
    fn multinomial_new_degenerate_distribution() {
        // p = (1,0,0,0): sum of sqrt(p) collapses to 1.
        let p = [1.0, 0.0, 0.0, 0.0];
        let v = lemma_multinomial_new_rhs(&[1.0; 4], &p, 4, 0.05, 100).unwrap();
        let expected = (2.0 * (4.0f64 / 0.05).ln() / 100.0).sqrt();
        close(v, expected, 1e-15);
    }

    // --- theorem 4 / lemma 8 ---

    #[test]
    fn theorem4_empty_occupancy() {
        assert_eq!(theorem4_rhs(1.0, 1.0, 0, 5.0, 0.05, 100).unwrap(), 0.0);
    }

    #[test]
    fn theorem4_log_space_mnist_scale() {
        // K = 10^784 overflows any direct computation; the log-space value
        // is frozen from an arbitrary-precision run.
        let v = theorem4_rhs(1.0, 1.0, 5, 784.0 * 10f64.ln(), 0.05, 60_000).unwrap();
        close(v, 1.2388195930767691, 1e-12);
    }

    #[test]
    fn theorem4_zero_unoccupied_weight() {
        // a_Tc = 0 kills the linear term.
        let t = 7u64;
        let (ln_k, delta, n) = (30.0, 0.05, 5_000u64);
        let v = theorem4_rhs(1.0, 0.0, t, ln_k, delta, n).unwrap();
        let l = ln_2k_over_delta(ln_k, delta);
        close(v, SQRT_2 * (t as f64 * l / n as f64).sqrt(), 1e-15);
    }

    #[test]
    fn theorem4_finite_at_extreme_ln_k() {
        let v = theorem4_rhs(1.0, 1.0, 10, 1e6, 0.05, 1000).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn lemma8_single_occupied_cell() {
        // One cell holding all n samples, a=(1), a_Tc=1:
        // sqrt(L/n)*(1+sqrt2) + (2L/n)*2.
        let (ln_k, delta, n) = (3.0, 0.05, 100u64);
        let l = ln_2k_over_delta(ln_k, delta);
        let v = lemma8_rhs(&[1.0], 1.0, &[100], ln_k, delta, n).unwrap();
        close(v, (l / 100.0).sqrt() * (1.0 + SQRT_2) + (2.0 * l / 100.0) * 2.0, 1e-15);
    }

    #[test]
    fn lemma8_finite_at_extreme_ln_k() {
        let v = lemma8_rhs(&[1.0, 0.5], 1.0, &[3, 7], 1e6, 0.05, 100).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn lemma8_rejects_zero_counts_and_oversized_sums() {
        assert!(lemma8_rhs(&[1.0], 1.0, &[0], 3.0, 0.05, 10).is_err());
        assert!(lemma8_rhs(&[1.0, 1.0], 1.0, &[8, 8], 3.0, 0.05, 10).is_err());
    }

    // With equal weights and equal counts the Cauchy-Schwarz step in the
    // sqrt term is tight: the sqrt terms of the two bounds coincide and the
    // refined bound exceeds the basic one by exactly (2L/n) * sum(a_i).
    #[test]
    fn lemma8_equal_counts_sqrt_term_tightness() {
        let (ln_k, delta, n) = (10.0, 0.05, 1_000u64);
        let l = ln_2k_over_delta(ln_k, delta);
        let a = [0.6; 5];
        let counts = [200u64; 5];
        let v8 = lemma8_rhs(&a, 0.6, &counts, ln_k, delta, n).unwrap();
        let v4 = theorem4_rhs(0.6, 0.6, 5, ln_k, delta, n).unwrap();
        let sum_a: f64 = a.iter().sum();
        close(v8, v4 + 2.0 * l / n as f64 * sum_a, 1e-12);
    }

    #[test]
    fn weight_profile_maxima() {
        let w = WeightProfile::from_occupancy(vec![0.2, 0.9, 0.4, 0.7], &[true, false, true, false])
            .unwrap();
        assert_eq!(w.a_occupied_max, 0.4);
        assert_eq!(w.a_unoccupied_max, 0.9);
        // Fully occupied: complement max defaults to 0.
        let w = WeightProfile::from_occupancy(vec![0.2, 0.9], &[true, true]).unwrap();
        assert_eq!(w.a_unoccupied_max, 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(MultinomialSpec::new(10, vec![0.5, 0.5]).is_ok());
        assert!(MultinomialSpec::new(0, vec![0.5, 0.5]).is_err());
        assert!(MultinomialSpec::new(10, vec![0.5, 0.6]).is_err());
        assert!(MultinomialSpec::new(10, vec![-0.1, 1.1]).is_err());
        let s = MultinomialSpec::from_ln_k(10, 1805.0).unwrap();
        assert!(s.probabilities().is_err());
    }

    #[test]
    fn tail_query_criterion_validation() {
        let spec = MultinomialSpec::new(10, vec![0.5, 0.5]).unwrap();
        let weights =
            WeightProfile::from_occupancy(vec![1.0, 1.0], &[true, false]).unwrap();
        let q = TailQuery {
            spec: spec.clone(),
            weights: weights.clone(),
            criterion: TailCriterion::Confidence(0.05),
        };
        assert!(q.validate().is_ok());
        let q = TailQuery { spec, weights, criterion: TailCriterion::Threshold(-1.0) };
        assert!(q.validate().is_err());
    }
}
