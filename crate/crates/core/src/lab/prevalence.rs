//! Finite-sample proxy for the irregularity of `φ + W` with a fixed shift `φ`.

use std::f64::consts::PI;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::irregularity::{irregularity_report, BEST_MIN_R2};
use crate::path::SampledPath;
use crate::rng::Seed;
use crate::simulate::{GaussianModel, GaussianSampler};
use crate::spectral::{phi_table, FrequencySet, IntervalFamily};

/// Deterministic shifts `φ`; every coordinate gets the same profile up to a
/// phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShiftSpec {
    Zero,
    /// `Σ_k coefs[k] t^k`.
    Polynomial {
        coefs: Vec<f64>,
    },
    /// `amplitude sin(2π frequency t + i)` in coordinate `i`.
    Trigonometric {
        amplitude: f64,
        frequency: f64,
    },
    /// `Σ_{k < modes} base^{-k exponent} cos(2π base^k t + i)`.
    Weierstrass {
        modes: usize,
        exponent: f64,
        base: f64,
    },
    /// A stored path on the noise grid.
    File {
        path: PathBuf,
    },
}

impl ShiftSpec {
    /// Zero, a cubic and a 12-mode Weierstrass sum of exponent 1/2.
    pub fn library() -> Vec<ShiftSpec> {
        vec![
            ShiftSpec::Zero,
            ShiftSpec::Polynomial { coefs: vec![0.0, 1.0, -2.0, 1.5] },
            ShiftSpec::Weierstrass { modes: 12, exponent: 0.5, base: 2.0 },
        ]
    }

    pub fn label(&self) -> String {
        match self {
            ShiftSpec::Zero => "zero".into(),
            ShiftSpec::Polynomial { coefs } => format!("polynomial_deg{}", coefs.len().saturating_sub(1)),
            ShiftSpec::Trigonometric { frequency, .. } => format!("trigonometric_f{frequency}"),
            ShiftSpec::Weierstrass { modes, exponent, .. } => format!("weierstrass_{modes}x{exponent}"),
            ShiftSpec::File { path } => {
                format!("file_{}", path.file_stem().map_or("path".into(), |s| s.to_string_lossy().into_owned()))
            }
        }
    }

    /// `φ` on the grid `k T / n`.
    pub fn path(&self, dim: usize, horizon: f64, n: usize) -> Result<SampledPath> {
        let profile = |f: &dyn Fn(f64, usize) -> f64| {
            SampledPath::from_fn(dim, horizon, n, |t| (0..dim).map(|i| f(t, i)).collect())
        };
        match self {
            ShiftSpec::Zero => SampledPath::constant(&vec![0.0; dim], horizon, n),
            ShiftSpec::Polynomial { coefs } => profile(&|t, _| coefs.iter().rev().fold(0.0, |acc, c| acc * t + c)),
            ShiftSpec::Trigonometric { amplitude, frequency } => {
                profile(&|t, i| amplitude * (2.0 * PI * frequency * t + i as f64).sin())
            }
            ShiftSpec::Weierstrass { modes, exponent, base } => {
                if !(*base > 1.0) || !(*exponent > 0.0) {
                    return input("Weierstrass sum needs base > 1 and exponent > 0");
                }
                profile(&|t, i| {
                    (0..*modes)
                        .map(|k| {
                            base.powf(-(k as f64) * exponent) * (2.0 * PI * base.powi(k as i32) * t + i as f64).cos()
                        })
                        .sum()
                })
            }
            ShiftSpec::File { path } => {
                let p = super::read_path(path)?;
                if p.dim() != dim || p.n() != n || (p.horizon() - horizon).abs() > 1e-12 * horizon {
                    return input(format!("{} is not on the noise grid", path.display()));
                }
                Ok(p)
            }
        }
    }
}

/// Table and fit parameters of the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceEstimator {
    pub freqs: FrequencySet,
    pub levels: usize,
    pub gammas: Vec<f64>,
    pub q_range: (f64, f64),
    /// Slack below `(2H)^{-1}`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceSample {
    pub index: usize,
    pub rho_hat: f64,
    pub gamma: f64,
    pub r2: f64,
    pub passed: bool,
    /// No `γ > 1/2` fit reached [`BEST_MIN_R2`].
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrevalenceReport {
    pub shift: String,
    pub hurst: f64,
    /// `(2H)^{-1}`.
    pub target: f64,
    /// `target - margin`.
    pub threshold: f64,
    pub samples: Vec<PrevalenceSample>,
    pub passes: usize,
    pub inconclusive: usize,
    /// Passes over conclusive samples; `None` without any.
    pub pass_rate: Option<f64>,
}

/// For `M` independent noise draws `W^{(i)}`, fits `ρ̂(φ + W^{(i)})` and counts
/// how often it exceeds `(2H)^{-1} - margin`.
pub fn prevalence_harness(
    shift: &ShiftSpec,
    base: &SampledPath,
    noise: &GaussianModel,
    samples: usize,
    est: &PrevalenceEstimator,
    seed: Seed,
) -> Result<PrevalenceReport> {
    let hurst = noise
        .slnd_exponent()
        .ok_or_else(|| crate::Error::Unsupported("noise model without a power-law SLND exponent".into()))?;
    if base.dim() != noise.dim {
        return input("shift and noise dimensions differ");
    }
    if !(est.margin >= 0.0) {
        return input("margin must be non-negative");
    }
    let target = 1.0 / (2.0 * hurst);
    let threshold = target - est.margin;
    let sampler = if samples > 0 { Some(GaussianSampler::new(noise, base.n(), base.horizon())?) } else { None };
    let rows: Vec<PrevalenceSample> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let w = sampler.as_ref().expect("sampler exists when samples > 0").sample(seed.with_path(i as u64))?;
            let path = base.add(&w)?;
            let table = phi_table(&path, &est.freqs, IntervalFamily::new(est.levels))?;
            let report = irregularity_report(&table, &est.gammas, est.q_range)?;
            let best = report.best_fit();
            let inconclusive = !(best.envelope.gamma > 0.5 && best.fit.r2 >= BEST_MIN_R2);
            Ok(PrevalenceSample {
                index: i,
                rho_hat: best.fit.rho,
                gamma: best.envelope.gamma,
                r2: best.fit.r2,
                passed: !inconclusive && best.fit.rho > threshold,
                inconclusive,
            })
        })
        .collect::<Result<_>>()?;
    let passes = rows.iter().filter(|r| r.passed).count();
    let inconclusive = rows.iter().filter(|r| r.inconclusive).count();
    let conclusive = rows.len() - inconclusive;
    Ok(PrevalenceReport {
        shift: shift.label(),
        hurst,
        target,
        threshold,
        samples: rows,
        passes,
        inconclusive,
        pass_rate: (conclusive > 0).then(|| passes as f64 / conclusive as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irregularity::default_gamma_grid;

    fn estimator() -> PrevalenceEstimator {
        PrevalenceEstimator {
            freqs: FrequencySet::default_for(1).unwrap(),
            levels: 6,
            gammas: default_gamma_grid(),
            q_range: (8.0, 512.0),
            margin: 0.25,
        }
    }

    #[test]
    fn no_samples_is_an_empty_report() {
        let base = ShiftSpec::Zero.path(1, 1.0, 1024).unwrap();
        let r = prevalence_harness(&ShiftSpec::Zero, &base, &GaussianModel::brownian(1), 0, &estimator(), Seed::new(1))
            .unwrap();
        assert!(r.samples.is_empty());
        assert_eq!(r.pass_rate, None);
        assert_eq!(r.target, 1.0);
    }

    #[test]
    fn shift_profiles() {
        let p = ShiftSpec::Polynomial { coefs: vec![1.0, 0.0, 2.0] }.path(2, 2.0, 4).unwrap();
        assert_eq!(p.node(4), &[9.0, 9.0]);
        let w = ShiftSpec::Weierstrass { modes: 3, exponent: 0.5, base: 2.0 }.path(1, 1.0, 8).unwrap();
        assert!((w.node(0)[0] - (1.0 + 0.5f64.sqrt() + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn samples_are_seeded_by_index() {
        let base = ShiftSpec::Zero.path(1, 1.0, 1024).unwrap();
        let noise = GaussianModel::brownian(1);
        let a = prevalence_harness(&ShiftSpec::Zero, &base, &noise, 3, &estimator(), Seed::new(9)).unwrap();
        let b = prevalence_harness(&ShiftSpec::Zero, &base, &noise, 2, &estimator(), Seed::new(9)).unwrap();
        assert_eq!(a.samples[..2], b.samples[..]);
    }
}
