//! Averages a band-limited drift along a Brownian path, once spectrally and
//! once by convolving with the gridded occupation density.

use irrlab::averaging::{average_grid, average_spectral, grid_inputs, grid_tolerance};
use irrlab::simulate::{simulate_gaussian, GaussianModel};
use irrlab::spectral::{SpectralField, SpectralTerm};
use irrlab::Seed;
use num_complex::Complex64;

fn main() -> irrlab::Result<()> {
    let n = 1 << 12;
    let path = simulate_gaussian(&GaussianModel::brownian(1), n, 1.0, Seed::new(5))?;
    // b(x) = cos 4x + 0.4 sin 9x
    let b = SpectralField::real_from_half(
        1,
        vec![
            SpectralTerm { xi: vec![4.0], c: Complex64::new(0.5, 0.0) },
            SpectralTerm { xi: vec![9.0], c: Complex64::new(0.0, -0.2) },
        ],
    )?;

    let exact = average_spectral(&path, None, &b, 0, n)?;
    let exact = exact.spectral().expect("spectral route");
    let (dens, field) = grid_inputs(&path, 0, n, &b, 129)?;
    let gridded = average_grid(&dens, &field)?;

    let mut worst = 0.0f64;
    for i in 0..gridded.values.len() {
        let x = gridded.point(i);
        worst = worst.max((exact.eval_real(&x) - gridded.values[i]).abs());
    }
    println!("T^w b at x = 0: {:.6}", exact.eval_real(&[0.0]));
    println!("grid vs spectral max error {worst:.2e}, tolerance {:.2e}", grid_tolerance(&b, dens.h, 1.0));
    Ok(())
}
