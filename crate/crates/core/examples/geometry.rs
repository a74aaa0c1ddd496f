//! Geometric diagnostics of a planar Brownian path: Fourier, energy and box
//! dimensions, p-variation and Hölder-point density.

use irrlab::geometry::{box_dimension, energy_dimension, fourier_dimension, holder_density, p_variation};
use irrlab::simulate::{simulate_gaussian, GaussianModel};
use irrlab::spectral::FrequencySet;
use irrlab::Seed;

fn main() -> irrlab::Result<()> {
    let n = 1 << 14;
    let path = simulate_gaussian(&GaussianModel::brownian(2), n, 1.0, Seed::new(9))?;

    let fourier = fourier_dimension(&path, 0, n, &FrequencySet::default_for(2)?, (8.0, 512.0), None)?;
    let energy = energy_dimension(&path, 0, n, 65)?;
    let boxes = box_dimension(&path, 0, n, 8)?;
    println!("Fourier {:.3}  energy {:.3}  box {:.3}", fourier.estimate, energy.estimate, boxes.estimate);

    for p in [1.5, 2.0, 3.0] {
        println!("p = {p}: p-variation {:.3}", p_variation(&path, p, 2048)?.value);
    }

    let eps: Vec<f64> = (5..=9).map(|k| 0.5f64.powi(k)).collect();
    let density = holder_density(&path, n / 2, 0.75, 1.0, &eps)?;
    for (e, f) in &density.points {
        println!("ε = {e:.5}: fraction of 0.75-Hölder points {f:.3}");
    }
    Ok(())
}
