//! Draws fBm paths at several Hurst indices and compares their empirical
//! Hölder exponent with `H`.

use irrlab::simulate::{GaussianModel, GaussianSampler};
use irrlab::Seed;

fn main() -> irrlab::Result<()> {
    let n = 1 << 14;
    for h in [0.25, 0.5, 0.75] {
        let sampler = GaussianSampler::new(&GaussianModel::fbm(1, h), n, 1.0)?;
        let path = sampler.sample(Seed::new(1))?;
        let holder = path.holder_seminorm(h - 0.05, 0.1)?;
        println!(
            "H = {h:.2}  w_1 = {:+.4}  Hölder estimate {:.3}  [w]_(H-0.05) = {:.3}",
            path.node(n)[0],
            path.holder_exponent_estimate(),
            holder.seminorm
        );
    }
    Ok(())
}
