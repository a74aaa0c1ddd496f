//! Second moment of `Φ` for a 1.5-stable Lévy process and Brownian motion.

use irrlab::irregularity::{moment_decay, MomentConfig};
use irrlab::simulate::{GaussianModel, ProcessModel, StableModel};
use irrlab::spectral::FrequencySet;
use irrlab::Seed;

fn main() -> irrlab::Result<()> {
    let models = [
        ("1.5-stable", ProcessModel::Stable(StableModel::axes(vec![1.5]))),
        ("Brownian  ", ProcessModel::Gaussian(GaussianModel::brownian(1))),
    ];
    for (label, model) in models {
        let cfg = MomentConfig {
            samples: 200,
            order: 1,
            n: 1 << 13,
            horizon: 1.0,
            s: 0.0,
            t: 1.0,
            freqs: FrequencySet::default_for(1)?.restricted(8.0, 256.0),
            seed: Seed::new(10),
        };
        let d = moment_decay(&model, &cfg)?;
        println!("{label}: slope {:.3}, target {:?}", d.slope, d.target_slope);
        for c in &d.char_checks {
            println!("    E e^(iξX) at ξ = {:?}: z = {:+.2}", c.xi, c.z);
        }
    }
    Ok(())
}
