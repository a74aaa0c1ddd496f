//! Deposits the occupation measure of a planar Brownian path and checks its
//! Fourier transform against `Φ`.

use irrlab::simulate::{simulate_gaussian, GaussianModel};
use irrlab::spectral::{occupation_density, phi};
use irrlab::Seed;

fn main() -> irrlab::Result<()> {
    let n = 1 << 12;
    let path = simulate_gaussian(&GaussianModel::brownian(2), n, 1.0, Seed::new(3))?;
    let dens = occupation_density(&path, 0, n, 64)?;
    println!("grid {}², h = {:.4}, mass = {:.15}", dens.m, dens.h, dens.mass());

    let peak = dens.values.iter().copied().fold(0.0, f64::max);
    println!("peak density {peak:.3}");

    for k in [1.0, 2.0, 4.0] {
        let xi = [k, -0.5 * k];
        let corrected = dens.dft_at(&xi) / dens.cic_transfer(&xi);
        let exact = phi(&path, 0, n, &xi)?.value.conj();
        println!("ξ = {xi:?}: density DFT {corrected:.5}  conj Φ {exact:.5}");
    }
    Ok(())
}
