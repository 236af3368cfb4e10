//! Robustness certificates for the three example learners, plus the
//! robustness-gap check that validates a certificate empirically.
//!
//! Run with: `cargo run --example certificates`

use robustgen::datagen::{generate, Family, GeneratorConfig};
use robustgen::partition::{assign_epsilon_cover, CellId};
use robustgen::robustness::{
    empirical_robustness_gap, fit_lasso, fit_pca, lasso_certificate, lipschitz_certificate,
    ln_cover_l2_box, ln_cover_linf_box, pca_certificate, sup_abs_linear_loss,
};
use robustgen::simulate::trial_rng;
use std::collections::BTreeMap;

fn main() -> robustgen::Result<()> {
    // Lipschitz loss over [0,1]^4.
    let gamma = 0.1;
    let lip = lipschitz_certificate(2.0, gamma, ln_cover_linf_box(4, gamma)?)?;
    println!("lipschitz: ln K = {:.2}, eps(S) = {:.3}  [{}]", lip.ln_k, lip.eps_s, lip.scheme_note);

    // Lasso on synthetic data; the certificate needs only y, c, nu.
    let gen = GeneratorConfig { family: Family::Beta { alpha: 2.0, beta: 2.0 }, dim: 8, n: 300, seed: 5 };
    let x = generate(&gen)?;
    let y: Vec<f64> = x.iter().map(|r| (r[0] + r[1]) / 2.0).collect();
    let c = 0.05;
    let model = fit_lasso(&x, &y, c)?;
    let cert = lasso_certificate(&y, c, 0.1, ln_cover_linf_box(9, 0.1)?)?;
    println!(
        "lasso:     ln K = {:.2}, eps(S) = {:.3}, fitted ||w||_1 = {:.3}, zeta = {:.3}",
        cert.ln_k,
        cert.eps_s,
        model.weights.iter().map(|w| w.abs()).sum::<f64>(),
        sup_abs_linear_loss(&model)
    );

    // PCA on the same inputs (l2 cover of the unit box).
    let basis = fit_pca(&x, 2)?;
    let pca = pca_certificate(2, 0.2, (8f64).sqrt(), ln_cover_l2_box(8, 0.2)?)?;
    println!(
        "pca:       ln K = {:.2}, eps(S) = {:.3}, captured energy = {:.2}",
        pca.ln_k,
        pca.eps_s,
        basis.captured_energy(&x)
    );

    // Robustness-gap check for a 1-d Lipschitz instance with analytic
    // conditional means: the gap never exceeds eps(S).
    use rand::Rng;
    let c_s = 2.0;
    let mut worst: f64 = 0.0;
    for trial in 0..20u64 {
        let mut rng = trial_rng(11, trial);
        let mut losses_by_cell: BTreeMap<CellId, Vec<f64>> = BTreeMap::new();
        for _ in 0..500 {
            let z: f64 = rng.random();
            losses_by_cell
                .entry(assign_epsilon_cover(&[z], gamma)?)
                .or_default()
                .push(c_s * z);
        }
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
        worst = worst.max(empirical_robustness_gap(&losses_by_cell, &alpha_by_cell)?);
    }
    let eps = c_s * gamma;
    println!("\nrobustness gap over 20 trials: worst = {worst:.4} <= eps(S) = {eps:.4}");
    Ok(())
}
