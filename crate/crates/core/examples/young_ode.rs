//! Young integration against fBm and the flow of `dx = b(x) dt + dw` with a
//! rough drift, with and without noise.

use irrlab::simulate::{simulate_gaussian, GaussianModel};
use irrlab::spectral::SpectralField;
use irrlab::young::{flow_diagnostic, young_integral, OdeProblem};
use irrlab::{SampledPath, Seed};

fn main() -> irrlab::Result<()> {
    let n = 1 << 12;
    let a = SampledPath::from_scalar_fn(1.0, n, |t| (3.0 * t).sin())?;
    let w = simulate_gaussian(&GaussianModel::fbm(1, 0.7), n, 1.0, Seed::new(6))?;
    let integral = young_integral(&a, &w)?;
    println!("∫ sin(3t) dw_t = {:.6}; refinement order {:?}", integral.path.node(n)[0], integral.refinement.order);

    let b = SpectralField::power_law_modes(1, 12, -0.5, Seed::new(7))?;
    let x0 = repelling_zero(&b);
    println!("start at the repelling zero x0 = {x0:.4} of b");
    for (label, path) in [
        ("fBm H=0.3", simulate_gaussian(&GaussianModel::fbm(1, 0.3), n, 1.0, Seed::new(8))?),
        ("no noise ", SampledPath::constant(&[0.0], 1.0, n)?),
    ] {
        let problem = OdeProblem { drift: vec![b.clone()], path, x0: vec![x0], level: 12 };
        let report = flow_diagnostic(&problem, &[1e-6, 1e-8])?;
        let ratios: Vec<String> = report.runs.iter().map(|r| format!("{:.3e}", r.sup_ratio)).collect();
        println!("{label}: sup ratios {ratios:?}, spread {:.2}", report.spread);
    }
    Ok(())
}

/// A zero of `b` where it crosses from negative to positive.
fn repelling_zero(b: &SpectralField) -> f64 {
    let f = |x: f64| b.eval_real(&[x]);
    let h = std::f64::consts::TAU / 4096.0;
    let k = (0..4096).find(|k| f(*k as f64 * h) < 0.0 && f((*k + 1) as f64 * h) >= 0.0).unwrap_or(0);
    let (mut lo, mut hi) = (k as f64 * h, (k + 1) as f64 * h);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
