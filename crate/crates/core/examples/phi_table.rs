//! Tabulates `Φ_{s,t}(ξ)` for a Brownian path on dyadic intervals and prints
//! the largest value per frequency shell.

use irrlab::simulate::{simulate_gaussian, GaussianModel};
use irrlab::spectral::{phi, phi_table, FrequencySet, IntervalFamily};
use irrlab::Seed;

fn main() -> irrlab::Result<()> {
    let path = simulate_gaussian(&GaussianModel::brownian(1), 1 << 12, 1.0, Seed::new(2))?;
    let freqs = FrequencySet::default_for(1)?;
    let table = phi_table(&path, &freqs, IntervalFamily::new(6))?;

    let mut shell_max = vec![0.0f64; freqs.magnitudes.len()];
    table.for_each_entry(|_, _, mag, _, _, v| shell_max[mag] = shell_max[mag].max(v.norm()));
    for (q, m) in freqs.magnitudes.iter().zip(&shell_max) {
        println!("|ξ| = {q:>8.0}  max |Φ| = {m:.3e}");
    }

    let direct = phi(&path, 0, path.n(), &[64.0])?;
    println!("Φ_0,1(64) = {:.6e} ± {:.1e}", direct.value, direct.error_estimate);
    Ok(())
}
