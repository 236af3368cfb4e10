//! Cross-module invariants: monotonicity of the closed-form bounds,
//! partition totality and determinism, tail-bound dominance over empirical
//! frequencies, and certificate validity on instances with exact
//! conditional means.

use proptest::prelude::*;
use robustgen::bounds::{theorem1_bound, LossProfile};
use robustgen::concentration::{
    bhc_rhs, lemma3_tail_bound, lemma4_tail_bound, lemma6_upper_envelope, lemma8_rhs,
    lemma_multinomial_new_rhs, theorem4_rhs, MultinomialSpec,
};
use robustgen::partition::{
    assign_epsilon_cover, occupancy, CellId, Partition, PartitionConfig,
};
use robustgen::robustness::{
    empirical_robustness_gap, fit_lasso, lasso_certificate, lipschitz_certificate,
    ln_cover_linf_box,
};
use robustgen::simulate::{
    run_coverage, sample_multinomial_with, seeded_uniform_weights, trial_rng, Statistic,
    TrialPlan,
};
use std::collections::BTreeMap;

// --- concentration: monotone in n, ln_K, and 1/delta -----------------------

#[test]
fn bounds_monotone_on_parameter_grids() {
    let ns = [50u64, 200, 1_000, 20_000, 500_000];
    let ln_ks = [0.0, 1.0, 10.0, 1_000.0, 1e6];
    let deltas = [0.3, 0.1, 0.05, 0.01, 0.001];

    // Nonincreasing in n.
    for &ln_k in &ln_ks {
        for &delta in &deltas {
            let mut prev = f64::INFINITY;
            for &n in &ns {
                let v = theorem4_rhs(1.0, 0.7, 12, ln_k, delta, n).unwrap();
                assert!(v <= prev + 1e-12);
                prev = v;
            }
            let mut prev = f64::INFINITY;
            for &n in &ns {
                let v = bhc_rhs(3.0, delta, n).unwrap();
                assert!(v <= prev + 1e-12);
                prev = v;
            }
        }
    }
    // Nondecreasing in ln_K and in 1/delta.
    for &n in &ns {
        for &delta in &deltas {
            let mut prev = 0.0;
            for &ln_k in &ln_ks {
                let v = theorem4_rhs(1.0, 0.7, 12, ln_k, delta, n).unwrap();
                assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
        let mut prev = 0.0;
        for &delta in &deltas {
            // deltas shrink along the grid, so 1/delta grows.
            let v = lemma6_upper_envelope(0.3, n, 10, delta).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        let mut prev = 0.0;
        for &delta in &deltas {
            let v = lemma_multinomial_new_rhs(&[1.0, 0.5], &[0.8, 0.2], 2, delta, n).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        let mut prev = 0.0;
        for &delta in &deltas {
            let v = lemma8_rhs(&[1.0, 0.5], 0.8, &[7, 3], 20.0, delta, n.max(10)).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Every valid point maps to exactly one in-range grid cell.
    #[test]
    fn grid_assignment_total_and_in_range(
        coords in prop::collection::vec(0.0f64..=1.0, 1..6),
        bins in 1u32..20,
    ) {
        let width = 1.0 / bins as f64;
        let cell = assign_epsilon_cover(&coords, width).unwrap();
        match cell {
            CellId::Grid(idx) => {
                prop_assert_eq!(idx.len(), coords.len());
                prop_assert!(idx.iter().all(|&b| b >= 1 && b as u32 <= bins));
            }
            other => prop_assert!(false, "unexpected cell {:?}", other),
        }
    }

    // Report totals always equal the sum of their parts.
    #[test]
    fn theorem1_report_total_is_exact_sum(
        losses in prop::collection::vec(0.0f64..0.9, 1..40),
        eps in 0.0f64..0.5,
        ln_k in 0.0f64..2000.0,
        delta in 1e-4f64..0.5,
    ) {
        let n = losses.len() as u64;
        let loss = LossProfile::new(losses, 1.0).unwrap();
        let part = Partition::new(PartitionConfig::epsilon_cover(1, 0.1)).unwrap();
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 + 0.5) / (n as f64 + 1.0)]).collect();
        let occ = occupancy(&pts, &part).unwrap();
        let r = theorem1_bound(&loss, eps, &occ, ln_k, delta, n).unwrap();
        let sum = r.empirical_loss + r.robustness_term + r.concentration_sqrt_term
            + r.concentration_linear_term + r.extra_sum();
        prop_assert!((r.total - sum).abs() <= 1e-12);
    }

    // The weighted deviation statistic never exceeds its own sampled bound
    // more often than the union-bound budget over a small replication -- a
    // quick smoke version of the coverage suite.
    #[test]
    fn lemma6_envelope_holds_per_coordinate_mostly(seed in 0u64..500) {
        let spec = MultinomialSpec::new(400, vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let x = sample_multinomial_with(&spec, &mut trial_rng(seed, 0)).unwrap();
        // delta = 0.5 gives a generous envelope; a single draw violating all
        // four coordinates simultaneously would indicate a formula error.
        let all_violated = spec.probabilities().unwrap().iter().zip(&x).all(|(&pi, &xi)| {
            let dev = lemma6_upper_envelope(pi, 400, 4, 0.5).unwrap();
            pi - xi as f64 / 400.0 > dev
        });
        prop_assert!(!all_violated);
    }
}

// Exact-oracle check of the envelope constants: each coordinate of the
// multinomial is Binomial(n, p_i), so the per-coordinate failure
// probability of either envelope can be computed exactly from the binomial
// CDF and must stay within the union-bound budget delta/K.
#[test]
fn envelope_constants_meet_budget_under_exact_binomial_tails() {
    use robustgen::concentration::lemma5_lower_envelope;
    use statrs::distribution::{Binomial, DiscreteCDF};
    let grid_p = [1e-4, 1e-3, 0.01, 0.05, 0.1, 0.3, 0.5, 0.9];
    let grid_n = [50u64, 500, 5_000, 50_000];
    let grid_kd = [(2u64, 0.05f64), (10, 0.05), (100, 0.01), (1000, 0.01)];
    for &p in &grid_p {
        for &n in &grid_n {
            for &(k, delta) in &grid_kd {
                let budget = delta / k as f64;
                let dist = Binomial::new(p, n).unwrap();
                // Lower envelope: violated when X/n - p exceeds the
                // deviation, i.e. X > n (p + dev). dev is recovered by
                // evaluating the envelope at X = 0.
                let dev = -lemma5_lower_envelope(p, 0, n, k, delta).unwrap();
                let cutoff = (n as f64 * (p + dev)).floor() as u64;
                let upper_fail = 1.0 - dist.cdf(cutoff.min(n));
                assert!(
                    upper_fail <= budget + 1e-12,
                    "lower envelope: p={p} n={n} K={k} delta={delta}: {upper_fail} > {budget}"
                );
                // Upper deviation: violated when p - X/n exceeds it,
                // i.e. X < n (p - dev).
                let dev = lemma6_upper_envelope(p, n, k, delta).unwrap();
                let threshold = n as f64 * (p - dev);
                let lower_fail = if threshold <= 0.0 {
                    0.0
                } else {
                    let below = threshold.ceil() as u64 - 1;
                    dist.cdf(below)
                };
                assert!(
                    lower_fail <= budget + 1e-12,
                    "upper deviation: p={p} n={n} K={k} delta={delta}: {lower_fail} > {budget}"
                );
            }
        }
    }
}

// --- partition determinism under different thread pools --------------------

#[test]
fn occupancy_identical_across_thread_counts() {
    let config = PartitionConfig::random_projection(15, 3, 0.1, 99);
    let part = Partition::new(config).unwrap();
    let mut rng = trial_rng(5, 0);
    use rand::Rng;
    let points: Vec<Vec<f64>> =
        (0..5000).map(|_| (0..15).map(|_| rng.random::<f64>()).collect()).collect();

    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let quad = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let occ1 = single.install(|| occupancy(&points, &part)).unwrap();
    let occ4 = quad.install(|| occupancy(&points, &part)).unwrap();
    assert_eq!(occ1, occ4);
}

#[test]
fn coverage_identical_across_thread_counts() {
    let plan = TrialPlan {
        trials: 20_000,
        base_seed: 31,
        spec: MultinomialSpec::new(200, vec![0.5, 0.3, 0.2]).unwrap(),
        weights: seeded_uniform_weights(3, 8),
        statistic: Statistic::Lemma8,
        delta_or_m: 0.05,
    };
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let quad = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let r1 = single.install(|| run_coverage(&plan)).unwrap();
    let r4 = quad.install(|| run_coverage(&plan)).unwrap();
    assert_eq!(r1.violations, r4.violations);
}

// The occupancy bounds quantify over weight *functions* of the draw, not
// just fixed vectors. Adversarial weights that maximize the unoccupied
// contribution (a_i = 1 exactly on the empty categories) must still be
// covered at level delta.
#[test]
fn occupancy_bounds_cover_data_dependent_weights() {
    use robustgen::concentration::{lemma8_rhs as l8, theorem4_rhs as t4};
    let k = 20usize;
    let raw: Vec<f64> = (1..=k).map(|i| 0.7f64.powi(i as i32)).collect();
    let z: f64 = raw.iter().sum();
    let p: Vec<f64> = raw.into_iter().map(|v| v / z).collect();
    let n = 500u64;
    let spec = MultinomialSpec::new(n, p.clone()).unwrap();
    let delta = 0.05;
    let trials = 100_000u64;
    let (mut viol4, mut viol8) = (0u64, 0u64);
    for trial in 0..trials {
        let x = sample_multinomial_with(&spec, &mut trial_rng(404, trial)).unwrap();
        let a: Vec<f64> = x.iter().map(|&xi| if xi == 0 { 1.0 } else { 0.5 }).collect();
        let stat: f64 = a
            .iter()
            .zip(&p)
            .zip(&x)
            .map(|((&ai, &pi), &xi)| ai * (pi - xi as f64 / n as f64))
            .sum();
        let mut occupied_a = Vec::new();
        let mut counts = Vec::new();
        let (mut a_t, mut a_tc) = (0.0f64, 0.0f64);
        for (&ai, &xi) in a.iter().zip(&x) {
            if xi >= 1 {
                a_t = a_t.max(ai);
                occupied_a.push(ai);
                counts.push(xi);
            } else {
                a_tc = a_tc.max(ai);
            }
        }
        let t = counts.len() as u64;
        if stat > t4(a_t, a_tc, t, spec.ln_k, delta, n).unwrap() {
            viol4 += 1;
        }
        if stat > l8(&occupied_a, a_tc, &counts, spec.ln_k, delta, n).unwrap() {
            viol8 += 1;
        }
    }
    use robustgen::simulate::{wilson_bounds, WILSON_Z};
    for (name, v) in [("theorem4", viol4), ("lemma8", viol8)] {
        let (lower, _) = wilson_bounds(v, trials, WILSON_Z);
        assert!(lower <= delta, "{name}: {v}/{trials} violations, Wilson lower {lower}");
    }
}

// --- tail bounds dominate empirical tail frequencies -----------------------

#[test]
fn tail_bounds_dominate_empirical_frequencies() {
    let configs = [
        (vec![1.0, 1.0], vec![0.5, 0.5], 50u64, 0.2f64),
        (vec![2.0, 1.0], vec![0.3, 0.7], 200, 0.1),
        (vec![1.0, 0.5, 0.25], vec![0.6, 0.3, 0.1], 100, 0.15),
    ];
    for (weights, p, n, m) in configs {
        for stat in [Statistic::Lemma3Tail, Statistic::Lemma4Tail] {
            let plan = TrialPlan {
                trials: 100_000,
                base_seed: 77,
                spec: MultinomialSpec::new(n, p.clone()).unwrap(),
                weights: weights.clone(),
                statistic: stat,
                delta_or_m: m,
            };
            let r = run_coverage(&plan).unwrap();
            let closed_form = match stat {
                Statistic::Lemma3Tail => lemma3_tail_bound(&weights, &p, n, m).unwrap(),
                _ => lemma4_tail_bound(&weights, &p, n, m).unwrap(),
            };
            assert!(
                r.empirical_rate <= closed_form,
                "{}: empirical {} > bound {}",
                r.statistic,
                r.empirical_rate,
                closed_form
            );
        }
    }
}

// --- certificate validity with exact conditional means ---------------------

// A 1-d c_S-Lipschitz loss on the width-0.1 grid: the conditional means are
// analytic, and the robustness-gap statistic must stay below eps(S) = c_S * g
// on every seeded trial.
#[test]
fn lipschitz_gap_within_certificate_all_trials() {
    use rand::Rng;
    let c_s = 2.0;
    let gamma = 0.1;
    let cert =
        lipschitz_certificate(c_s, gamma, ln_cover_linf_box(1, gamma).unwrap()).unwrap();
    for trial in 0..100u64 {
        let mut rng = trial_rng(123, trial);
        let zs: Vec<f64> = (0..400).map(|_| rng.random::<f64>()).collect();
        let mut losses_by_cell: BTreeMap<CellId, Vec<f64>> = BTreeMap::new();
        for &z in &zs {
            let cell = assign_epsilon_cover(&[z], gamma).unwrap();
            losses_by_cell.entry(cell).or_default().push(c_s * z);
        }
        // Exact conditional mean of c_S * z on cell k under U[0,1]:
        // c_S * (0.1 k - 0.05).
        let alpha_by_cell: BTreeMap<CellId, f64> = losses_by_cell
            .keys()
            .map(|cell| {
                let k = match cell {
                    CellId::Grid(idx) => idx[0] as f64,
                    _ => unreachable!(),
                };
                (cell.clone(), c_s * (gamma * k - gamma / 2.0))
            })
            .collect();
        let gap = empirical_robustness_gap(&losses_by_cell, &alpha_by_cell).unwrap();
        assert!(gap <= cert.eps_s, "trial {trial}: gap {gap} > eps {}", cert.eps_s);
    }
}

// Lasso on a finite-support distribution: conditional means computed by
// exhaustive enumeration of the support; the gap must stay below the
// certificate on every trial.
#[test]
fn lasso_gap_within_certificate_all_trials() {
    use rand::Rng;
    let nu = 0.25; // grid width on the joint 3-d space [0,1]^2 x [0,1]
    let c = 0.05;
    // Finite support: 8 joint points (x1, x2, y), uniform mass.
    let support: Vec<(Vec<f64>, f64)> = vec![
        (vec![0.1, 0.1], 0.1),
        (vec![0.1, 0.6], 0.3),
        (vec![0.35, 0.2], 0.25),
        (vec![0.6, 0.6], 0.6),
        (vec![0.6, 0.9], 0.7),
        (vec![0.9, 0.35], 0.65),
        (vec![0.9, 0.9], 0.9),
        (vec![0.35, 0.85], 0.55),
    ];
    for trial in 0..50u64 {
        let mut rng = trial_rng(321, trial);
        let sample: Vec<usize> = (0..300).map(|_| rng.random_range(0..support.len())).collect();
        let x: Vec<Vec<f64>> = sample.iter().map(|&i| support[i].0.clone()).collect();
        let y: Vec<f64> = sample.iter().map(|&i| support[i].1).collect();
        let model = fit_lasso(&x, &y, c).unwrap();
        let cert =
            lasso_certificate(&y, c, nu, ln_cover_linf_box(3, nu).unwrap()).unwrap();

        let joint_cell = |xs: &[f64], yv: f64| {
            let mut z = xs.to_vec();
            z.push(yv);
            assign_epsilon_cover(&z, nu).unwrap()
        };
        let mut losses_by_cell: BTreeMap<CellId, Vec<f64>> = BTreeMap::new();
        for (xi, &yi) in x.iter().zip(&y) {
            losses_by_cell
                .entry(joint_cell(xi, yi))
                .or_default()
                .push((yi - model.predict(xi)).abs());
        }
        // Exact conditional means over the finite support.
        let mut alpha_by_cell: BTreeMap<CellId, (f64, f64)> = BTreeMap::new();
        for (xs, yv) in &support {
            let cell = joint_cell(xs, *yv);
            let loss = (yv - model.predict(xs)).abs();
            let e = alpha_by_cell.entry(cell).or_insert((0.0, 0.0));
            e.0 += loss; // uniform mass: plain average
            e.1 += 1.0;
        }
        let alpha_by_cell: BTreeMap<CellId, f64> = alpha_by_cell
            .into_iter()
            .map(|(cell, (sum, count))| (cell, sum / count))
            .collect();
        // Keep only cells that actually received samples.
        let alpha_by_cell: BTreeMap<CellId, f64> = losses_by_cell
            .keys()
            .map(|cell| (cell.clone(), alpha_by_cell[cell]))
            .collect();
        let gap = empirical_robustness_gap(&losses_by_cell, &alpha_by_cell).unwrap();
        assert!(gap <= cert.eps_s, "trial {trial}: gap {gap} > eps {}", cert.eps_s);
    }
}
