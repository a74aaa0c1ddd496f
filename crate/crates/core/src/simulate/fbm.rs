use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which the Cholesky factor is built.
const CHOLESKY_MAX_N: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FbmMethod {
    #[default]
    CirculantEmbedding,
    Cholesky,
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

pub(crate) enum FgnGenerator {
    Circulant { n: usize, sqrt_eig: Vec<f64>, fft: Arc<dyn Fft<f64>> },
    Cholesky { n: usize, factor: DMatrix<f64> },
}

impl FgnGenerator {
    pub(crate) fn new(hurst: f64, n: usize, method: FbmMethod, warnings: &mut Vec<String>) -> Result<Self> {
        if method == FbmMethod::Cholesky {
            return Self::cholesky(hurst, n);
        }
        let m = 2 * n;
        let mut row: Vec<Complex64> = (0..m)
            .map(|j| {
                let lag = if j <= n { j } else { m - j };
                Complex64::new(fgn_autocovariance(hurst, lag), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let max = row.iter().map(|c| c.re).fold(0.0, f64::max);
        let min = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
        if min < -1e-10 * max {
            warnings
                .push(format!("circulant embedding for H = {hurst}, n = {n} has eigenvalue {min:.3e}; using Cholesky"));
            return Self::cholesky(hurst, n);
        }
        let sqrt_eig = row.iter().map(|c| (c.re.max(0.0) / m as f64).sqrt()).collect();
        Ok(FgnGenerator::Circulant { n, sqrt_eig, fft })
    }

    fn cholesky(hurst: f64, n: usize) -> Result<Self> {
        if n > CHOLESKY_MAX_N {
            return Err(Error::Resource(format!("Cholesky fGn limited to n ≤ {CHOLESKY_MAX_N}, got {n}")));
        }
        let acov: Vec<f64> = (0..n).map(|k| fgn_autocovariance(hurst, k)).collect();
        let cov = DMatrix::from_fn(n, n, |i, j| acov[i.abs_diff(j)]);
        let factor =
            cov.cholesky().ok_or_else(|| Error::Resource("fGn covariance is not positive definite".into()))?.unpack();
        Ok(FgnGenerator::Cholesky { n, factor })
    }

    /// `n` increments of fGn multiplied by `scale`.
    pub(crate) fn sample<R: Rng>(&self, rng: &mut R, scale: f64) -> Vec<f64> {
        match self {
            FgnGenerator::Circulant { n, sqrt_eig, fft } => {
                let mut buf: Vec<Complex64> = sqrt_eig
                    .iter()
                    .map(|s| {
                        let re: f64 = StandardNormal.sample(rng);
                        let im: f64 = StandardNormal.sample(rng);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                buf[..*n].iter().map(|c| scale * c.re).collect()
            }
            FgnGenerator::Cholesky { n, factor } => {
                let z: Vec<f64> = (0..*n).map(|_| StandardNormal.sample(rng)).collect();
                (0..*n).map(|i| scale * (0..=i).map(|j| factor[(i, j)] * z[j]).sum::<f64>()).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;

    #[test]
    fn autocovariance_values() {
        assert_eq!(fgn_autocovariance(0.5, 0), 1.0);
        assert!(fgn_autocovariance(0.5, 3).abs() < 1e-15);
        assert!(fgn_autocovariance(0.7, 1) > 0.0);
        assert!(fgn_autocovariance(0.3, 1) < 0.0);
    }

    #[test]
    fn circulant_eigenvalues_nonnegative() {
        for &h in &[0.05, 0.3, 0.5, 0.7, 0.95] {
            let mut w = Vec::new();
            let g = FgnGenerator::new(h, 1000, FbmMethod::CirculantEmbedding, &mut w).unwrap();
            assert!(w.is_empty());
            assert!(matches!(g, FgnGenerator::Circulant { .. }));
        }
    }

    #[test]
    fn cholesky_limit() {
        assert!(FgnGenerator::new(0.3, 4096, FbmMethod::Cholesky, &mut Vec::new()).is_err());
    }

    #[test]
    fn sample_lag_covariance() {
        let h = 0.3;
        let mut w = Vec::new();
        let g = FgnGenerator::new(h, 16, FbmMethod::CirculantEmbedding, &mut w).unwrap();
        let m = 20000;
        let mut c0 = 0.0;
        let mut c1 = 0.0;
        for i in 0..m {
            let mut rng = Seed::new(3).with_path(i).stream(&[0]);
            let x = g.sample(&mut rng, 1.0);
            c0 += x[5] * x[5];
            c1 += x[5] * x[6];
        }
        c0 /= m as f64;
        c1 /= m as f64;
        assert!((c0 - 1.0).abs() < 0.04);
        assert!((c1 - fgn_autocovariance(h, 1)).abs() < 0.04);
    }
}
