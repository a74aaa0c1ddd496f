use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{input, Result};
use crate::rng::Seed;
use crate::simulate::{ProcessModel, StableModel};
use crate::spectral::{dot, norm, prefix_at, FrequencySet};
use crate::stats::{linear_fit, mean, std_error};

const BATCHES: usize = 8;
const CHAR_TARGETS: [f64; 6] = [0.1, 0.25, 0.5, 1.0, 1.5, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    pub samples: usize,
    /// `n_m`; the statistic is `|Φ|^{2 n_m}`.
    pub order: u32,
    pub n: usize,
    pub horizon: f64,
    pub s: f64,
    pub t: f64,
    pub freqs: FrequencySet,
    pub seed: Seed,
}

/// `⫴ξ⫴_α = (Σ_i |ξ_i|^{α_i})^{1/2}`.
pub fn anisotropic_norm(xi: &[f64], alphas: &[f64]) -> f64 {
    xi.iter().zip(alphas).map(|(x, a)| x.abs().powf(*a)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentShell {
    pub q: f64,
    /// Monte-Carlo mean over samples of the direction-averaged statistic.
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub xi: Vec<f64>,
    pub norm: f64,
    /// Set for stable models.
    pub anisotropic_norm: Option<f64>,
    pub mean: f64,
    pub stderr: f64,
}

/// `E e^{i⟨ξ, X_t - X_s⟩}` against `e^{-(t-s)ψ(ξ)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharFunctionCheck {
    pub xi: Vec<f64>,
    pub empirical: f64,
    pub theory: f64,
    pub stderr: f64,
    /// `|empirical - theory| / stderr`.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentDiagnostic {
    /// `2 n_m`.
    pub moment_order: u32,
    pub samples: usize,
    pub shells: Vec<MomentShell>,
    pub rows: Vec<MomentRow>,
    /// Slope of `log mean` against `log q`.
    pub slope: f64,
    /// `-n_m / β` for Gaussian models with an SLND exponent, `-n_m min α` for
    /// stable models.
    pub target_slope: Option<f64>,
    /// One slope per batch of consecutive samples.
    pub batch_slopes: Vec<f64>,
    /// 95% Student interval from the batch slopes.
    pub slope_ci: (f64, f64),
    /// Interval wider than 0.5.
    pub inconclusive: bool,
    /// Slope of `log mean` against `log ⫴ξ⫴_α` over all rows, for stable models.
    pub anisotropic_slope: Option<f64>,
    pub char_checks: Vec<CharFunctionCheck>,
    /// `φ(t - s) = √(x |log x|)`.
    pub modulus_normalizer: f64,
}

fn to_node(time: f64, n: usize, horizon: f64) -> Result<usize> {
    let k = (time / horizon * n as f64).round();
    if !(k >= 0.0 && k <= n as f64) || (k * horizon / n as f64 - time).abs() > 1e-9 * horizon {
        return input(format!("time {time} is not a grid node"));
    }
    Ok(k as usize)
}

fn char_probes(model: &StableModel, dir: &[f64], dt: f64) -> Vec<Vec<f64>> {
    CHAR_TARGETS
        .iter()
        .map(|&target| {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let at = |r: f64| dt * model.char_exponent(&dir.iter().map(|x| r * x).collect::<Vec<_>>());
            while at(hi) < target && hi < 1e12 {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if at(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            dir.iter().map(|x| 0.5 * (lo + hi) * x).collect()
        })
        .collect()
}

/// Monte-Carlo moments `E|Φ_{s,t}(ξ)|^{2 n_m}` per frequency with a log-log
/// slope fit, batch-split confidence interval and, for stable models, a
/// characteristic-function check at six probes along the first direction.
pub fn moment_decay(model: &ProcessModel, cfg: &MomentConfig) -> Result<MomentDiagnostic> {
    if cfg.samples < 200 {
        return input(format!("need at least 200 samples, got {}", cfg.samples));
    }
    if cfg.order == 0 {
        return input("moment order must be positive");
    }
    if cfg.freqs.dim() != model.dim() || cfg.freqs.magnitudes.len() < 2 {
        return input("need at least two frequency magnitudes of the model dimension");
    }
    let s = to_node(cfg.s, cfg.n, cfg.horizon)?;
    let t = to_node(cfg.t, cfg.n, cfg.horizon)?;
    if s >= t {
        return input("need s < t");
    }
    let sampler = model.sampler(cfg.n, cfg.horizon)?;
    let n_dirs = cfg.freqs.directions.len();
    let n_freq = cfg.freqs.len();
    let vectors: Vec<Vec<f64>> = (0..n_freq).map(|f| cfg.freqs.vector(f / n_dirs, f % n_dirs)).collect();
    let stable = match model {
        ProcessModel::Stable(m) => Some(m),
        ProcessModel::Gaussian(_) => None,
    };
    let probes = stable.map_or(Vec::new(), |m| char_probes(m, &cfg.freqs.directions[0], cfg.t - cfg.s));
    let power = 2 * cfg.order as i32;

    let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let path = sampler.sample(cfg.seed.with_path(i as u64))?;
            let stats = vectors
                .iter()
                .map(|xi| {
                    let p = prefix_at(&path, xi, &[s, t]);
                    (p[1] - p[0]).norm().powi(power)
                })
                .collect();
            let inc = path.increment(s, t);
            let cos = probes.iter().map(|xi| dot(xi, &inc).cos()).collect();
            Ok((stats, cos))
        })
        .collect::<Result<_>>()?;

    let rows: Vec<MomentRow> = vectors
        .iter()
        .enumerate()
        .map(|(f, xi)| {
            let v: Vec<f64> = draws.iter().map(|d| d.0[f]).collect();
            MomentRow {
                xi: xi.clone(),
                norm: norm(xi),
                anisotropic_norm: stable.map(|m| anisotropic_norm(xi, &m.alphas())),
                mean: mean(&v),
                stderr: std_error(&v),
            }
        })
        .collect();
    let per_shell = |range: std::ops::Range<usize>, mag: usize| -> Vec<f64> {
        draws[range].iter().map(|d| d.0[mag * n_dirs..(mag + 1) * n_dirs].iter().sum::<f64>() / n_dirs as f64).collect()
    };
    let shells: Vec<MomentShell> = cfg
        .freqs
        .magnitudes
        .iter()
        .enumerate()
        .map(|(j, &q)| {
            let v = per_shell(0..cfg.samples, j);
            MomentShell { q, mean: mean(&v), stderr: std_error(&v) }
        })
        .collect();
    let lq: Vec<f64> = shells.iter().map(|s| s.q.ln()).collect();
    let slope = linear_fit(&lq, &shells.iter().map(|s| s.mean.ln()).collect::<Vec<_>>()).slope;
    let batch_slopes: Vec<f64> = (0..BATCHES)
        .map(|b| {
            let range = b * cfg.samples / BATCHES..(b + 1) * cfg.samples / BATCHES;
            let ys: Vec<f64> = (0..shells.len()).map(|j| mean(&per_shell(range.clone(), j)).ln()).collect();
            linear_fit(&lq, &ys).slope
        })
        .collect();
    let quantile = StudentsT::new(0.0, 1.0, (BATCHES - 1) as f64).map(|d| d.inverse_cdf(0.975)).unwrap_or(2.3646);
    let half = quantile * std_error(&batch_slopes);
    let center = mean(&batch_slopes);
    let slope_ci = (center - half, center + half);

    let target_slope = match model {
        ProcessModel::Gaussian(g) => g.slnd_exponent().map(|b| -(cfg.order as f64) / b),
        ProcessModel::Stable(m) => m.alphas().into_iter().reduce(f64::min).map(|a| -(cfg.order as f64) * a),
    };
    let anisotropic_slope = stable.map(|_| {
        let xs: Vec<f64> = rows.iter().map(|r| r.anisotropic_norm.unwrap_or(f64::NAN).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.mean.ln()).collect();
        linear_fit(&xs, &ys).slope
    });
    let char_checks = match stable {
        Some(m) => probes
            .iter()
            .enumerate()
            .map(|(k, xi)| {
                let v: Vec<f64> = draws.iter().map(|d| d.1[k]).collect();
                let empirical = mean(&v);
                let theory = (-(cfg.t - cfg.s) * m.char_exponent(xi)).exp();
                let stderr = std_error(&v);
                CharFunctionCheck { xi: xi.clone(), empirical, theory, stderr, z: (empirical - theory).abs() / stderr }
            })
            .collect(),
        None => Vec::new(),
    };
    let x = cfg.t - cfg.s;
    Ok(MomentDiagnostic {
        moment_order: 2 * cfg.order,
        samples: cfg.samples,
        shells,
        rows,
        slope,
        target_slope,
        batch_slopes,
        slope_ci,
        inconclusive: slope_ci.1 - slope_ci.0 > 0.5,
        anisotropic_slope,
        char_checks,
        modulus_normalizer: (x * x.ln().abs()).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::GaussianModel;

    #[test]
    fn anisotropic_norm_reduces_to_euclidean() {
        let xi = [3.0, -4.0];
        assert!((anisotropic_norm(&xi, &[2.0, 2.0]) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_small_samples() {
        let cfg = MomentConfig {
            samples: 10,
            order: 1,
            n: 64,
            horizon: 1.0,
            s: 0.0,
            t: 1.0,
            freqs: FrequencySet::new(1, 8.0, 4).unwrap(),
            seed: Seed::new(1),
        };
        assert!(moment_decay(&ProcessModel::Gaussian(GaussianModel::brownian(1)), &cfg).is_err());
    }

    #[test]
    fn brownian_second_moment_closed_form() {
        // E|Φ_{0,1}(ξ)|² = 2 (q²/2 - 1 + e^{-q²/2}) / (q²/2)² for Brownian motion.
        let cfg = MomentConfig {
            samples: 400,
            order: 1,
            n: 1024,
            horizon: 1.0,
            s: 0.0,
            t: 1.0,
            freqs: FrequencySet::with_magnitudes(1, vec![2.0, 4.0, 8.0]).unwrap(),
            seed: Seed::new(3),
        };
        let d = moment_decay(&ProcessModel::Gaussian(GaussianModel::brownian(1)), &cfg).unwrap();
        for sh in &d.shells {
            let l = sh.q * sh.q / 2.0;
            let exact = 2.0 * (l - 1.0 + (-l).exp()) / (l * l);
            assert!((sh.mean - exact).abs() < 4.0 * sh.stderr, "{} {} {}", sh.q, sh.mean, exact);
        }
    }
}
