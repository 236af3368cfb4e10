//! The K-versus-|T_S| experiment: cell count grows exponentially with the
//! dimension while the occupied-cell count stays bounded by the sample
//! size. Writes the sweep table and its SVG rendering for both the plain
//! grid and the random-projection pre-image.
//!
//! Run with: `cargo run --example cover_sweep`

use robustgen::cli::{cover_sweep, sweep_rows_to_csv, sweep_rows_to_svg, SweepSpec};
use robustgen::datagen::Family;
use robustgen::partition::Scheme;
use std::fs;

fn main() -> robustgen::Result<()> {
    fs::create_dir_all("out")?;
    for (scheme, tag) in [(Scheme::EpsilonCover, "grid"), (Scheme::RandomProjection, "projection")]
    {
        println!("== {tag} partition ==");
        for family in [
            Family::Beta { alpha: 0.1, beta: 0.1 },
            Family::GaussMix { sigma: 0.01 },
        ] {
            let spec = SweepSpec {
                family: family.clone(),
                n: 1000,
                scheme,
                width: 0.1,
                proj_dim: 3,
                d_values: (1..=10).collect(),
                trials: 10,
            };
            let rows = cover_sweep(&spec, 7)?;
            println!("{}:", family.label());
            for row in &rows {
                println!(
                    "  d = {:>2}: ln K = {:>8.3}  mean |T_S| = {:>7.1} (sd {:.1})",
                    row.d, row.ln_k, row.mean_t_size, row.std_t_size
                );
            }
            let slug = family.label().replace(['(', ')', ',', '.'], "_");
            fs::write(format!("out/sweep_{tag}_{slug}.csv"), sweep_rows_to_csv(&rows))?;
            fs::write(
                format!("out/sweep_{tag}_{slug}.svg"),
                sweep_rows_to_svg(&rows, &format!("{} / {tag}", family.label())),
            )?;
        }
    }
    println!("tables and figures written to out/");
    Ok(())
}
