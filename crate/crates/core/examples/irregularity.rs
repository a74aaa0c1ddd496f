//! Estimates the irregularity exponent `ρ` of fBm paths from shell envelopes.

use irrlab::irregularity::{default_gamma_grid, irregularity_report};
use irrlab::simulate::{simulate_gaussian, GaussianModel};
use irrlab::spectral::{phi_table, FrequencySet, IntervalFamily};
use irrlab::Seed;

fn main() -> irrlab::Result<()> {
    for h in [0.5, 0.75] {
        let path = simulate_gaussian(&GaussianModel::fbm(1, h), 1 << 15, 1.0, Seed::new(4))?;
        let table = phi_table(&path, &FrequencySet::default_for(1)?, IntervalFamily::new(8))?;
        let report = irregularity_report(&table, &default_gamma_grid(), (8.0, 512.0))?;
        let best = report.best_fit();
        println!(
            "H = {h}: best γ = {:.2}, ρ̂ = {:.3} (R² {:.3}); (2H)^-1 = {:.3}",
            best.envelope.gamma,
            best.fit.rho,
            best.fit.r2,
            1.0 / (2.0 * h)
        );
        for g in &report.fits {
            println!("  γ = {:.2}  ρ̂ = {:.3}", g.envelope.gamma, g.fit.rho);
        }
    }
    Ok(())
}
