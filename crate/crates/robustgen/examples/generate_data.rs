//! Synthetic generator families and CSV round-tripping.
//!
//! Run with: `cargo run --example generate_data`

use robustgen::datagen::{generate, load_csv, save_csv, Family, GeneratorConfig};
use robustgen::partition::{occupancy, Partition, PartitionConfig};
use std::fs;

fn main() -> robustgen::Result<()> {
    fs::create_dir_all("out")?;
    let families = [
        Family::Uniform,
        Family::Beta { alpha: 0.1, beta: 0.1 },
        Family::Beta { alpha: 0.1, beta: 10.0 },
        Family::GaussMix { sigma: 0.01 },
        Family::BetaMix { alpha: 0.1, beta: 0.1, sigma: 0.1 },
        Family::BetaGauss { alpha: 0.1, beta: 10.0, sigma: 0.1 },
    ];
    let part = Partition::new(PartitionConfig::epsilon_cover(5, 0.1))?;
    println!("{:<28} {:>8} {:>8} {:>10}", "family", "min", "max", "|T_S| (d=5)");
    for family in families {
        let cfg = GeneratorConfig { family: family.clone(), dim: 5, n: 1000, seed: 13 };
        let data = generate(&cfg)?;
        let lo = data.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
        let hi = data.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        let occ = occupancy(&data, &part)?;
        println!("{:<28} {lo:>8.4} {hi:>8.4} {:>10}", family.label(), occ.t_size());
    }

    // Write one sample set out and read it back through the normalizing loader.
    let cfg = GeneratorConfig { family: Family::GaussMix { sigma: 0.1 }, dim: 3, n: 200, seed: 21 };
    let data = generate(&cfg)?;
    let mut buf = Vec::new();
    save_csv(&mut buf, &data)?;
    fs::write("out/gauss_mix_samples.csv", &buf)?;
    let (reloaded, _) = load_csv("out/gauss_mix_samples.csv", Some(3), false)?;
    println!("\nwrote and reloaded out/gauss_mix_samples.csv ({} rows)", reloaded.len());
    Ok(())
}
