//! Tour of the closed-form multinomial concentration bounds, including the
//! log-space evaluation that keeps `K = 10^784` finite.
//!
//! Run with: `cargo run --example concentration_bounds`

use robustgen::concentration::{
    bhc_rhs, lemma3_tail_bound, lemma4_tail_bound, lemma5_lower_envelope, lemma6_upper_envelope,
    lemma8_rhs, lemma_multinomial_new_rhs, theorem4_rhs,
};

fn main() -> robustgen::Result<()> {
    let (n, delta) = (10_000u64, 0.05);

    println!("classical l1 bound, K small enough to materialize:");
    for k in [2u64, 10, 100, 1000] {
        let v = bhc_rhs((k as f64).ln(), delta, n)?;
        println!("  K = {k:>5}: sum_k |p_k - X_k/n| <= {v:.5}");
    }

    println!("\nthe same bound at covering-number scale (K = 10^784):");
    let ln_k = 784.0 * 10f64.ln();
    println!("  classical: {}", bhc_rhs(ln_k, delta, n)?);
    let occupied = 40u64;
    let v = theorem4_rhs(1.0, 1.0, occupied, ln_k, delta, n)?;
    println!("  occupancy-weighted with |T_S| = {occupied}: {v:.5}  (finite via log space)");

    println!("\ncount-weighted refinement on a lopsided occupancy profile:");
    let a = vec![1.0; 8];
    let counts = vec![6000, 2000, 1000, 500, 300, 150, 40, 10];
    let v8 = lemma8_rhs(&a, 1.0, &counts, ln_k, delta, n)?;
    let v4 = theorem4_rhs(1.0, 1.0, 8, ln_k, delta, n)?;
    println!("  basic:   {v4:.5}");
    println!("  refined: {v8:.5}");

    println!("\nper-category envelopes (K = 10, uniform p, n = {n}):");
    let p_i = 0.1;
    let x_i = 1042u64;
    let lower = lemma5_lower_envelope(p_i, x_i, n, 10, delta)?;
    let dev = lemma6_upper_envelope(p_i, n, 10, delta)?;
    println!("  observed X_i/n = {}, true p_i = {p_i}", x_i as f64 / n as f64);
    println!("  lower confidence bound on p_i: {lower:.5}");
    println!("  upper deviation p_i - X_i/n <= {dev:.5}");

    println!("\ndistribution-weighted bound interpolates with the mass profile:");
    for (label, p) in [
        ("uniform K=4", vec![0.25; 4]),
        ("spiked      ", vec![0.97, 0.01, 0.01, 0.01]),
    ] {
        let v = lemma_multinomial_new_rhs(&[1.0; 4], &p, 4, delta, n)?;
        println!("  {label}: sum a_i (p_i - X_i/n) <= {v:.5}");
    }

    println!("\nfixed-weight tail probabilities at threshold M = 0.02:");
    let weights = [1.0, 0.5, 0.25, 0.125];
    let p = [0.4, 0.3, 0.2, 0.1];
    println!("  lower tail: {:.3e}", lemma3_tail_bound(&weights, &p, n, 0.02)?);
    println!("  upper tail: {:.3e}", lemma4_tail_bound(&weights, &p, n, 0.02)?);
    Ok(())
}
