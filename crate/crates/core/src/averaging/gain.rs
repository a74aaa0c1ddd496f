use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::rng::{purpose, Seed};
use crate::spectral::{
    fl_norm_coefficients, norm, FourierLebesgue, FrequencySet, PhiTable, SpectralField, SpectralTerm,
};
use crate::stats::median;

/// Extra coefficient decay `|c_j| = ⟨ξ_j⟩^{-α-κ}` of the probe drifts.
pub const KAPPA: f64 = 0.51;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainConfig {
    /// Regularity `α` of the probe drifts.
    pub alpha: f64,
    pub p: f64,
    /// Number of random drifts.
    pub drifts: usize,
    pub gamma: f64,
    /// Claimed gain `ρ'`; the output norm is taken in `FL^{α+ρ', p}`.
    pub rho_gain: f64,
    pub seed: Seed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainEstimate {
    pub config: GainConfig,
    /// Per drift: max over dyadic intervals of
    /// `‖T_{s,t} b‖_{FL^{α+ρ',p}} / (|t - s|^γ ‖b‖_{FL^{α,p}})`.
    pub ratios: Vec<f64>,
    /// Lower estimate of the operator-norm constant.
    pub max: f64,
    pub median: f64,
}

/// `(mag, dir)` of `±ξ` in the frequency set.
fn locate(freqs: &FrequencySet, xi: &[f64]) -> Option<(usize, usize)> {
    let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
    for mag in 0..freqs.magnitudes.len() {
        for dir in 0..freqs.directions.len() {
            let v = freqs.vector(mag, dir);
            if v == xi || v == neg {
                return Some((mag, dir));
            }
        }
    }
    None
}

/// Random real drift on the table lattice: each `(ξ, -ξ)` pair is kept with
/// probability 1/2, with `|c| = ⟨ξ⟩^{-α-κ}` and a uniform phase.
pub fn random_drift(freqs: &FrequencySet, alpha: f64, seed: Seed) -> Result<SpectralField> {
    let mut rng = seed.stream(&[purpose::DRIFT]);
    let n_dirs = freqs.directions.len();
    let mut half: Vec<SpectralTerm> = Vec::new();
    for f in 0..freqs.len() {
        let xi = freqs.vector(f / n_dirs, f % n_dirs);
        let keep = rng.random::<bool>();
        let phase = 2.0 * PI * rng.random::<f64>();
        let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
        if !keep || half.iter().any(|t| t.xi == neg) {
            continue;
        }
        let r = norm(&xi);
        half.push(SpectralTerm { xi, c: Complex64::from_polar((1.0 + r * r).powf(-(alpha + KAPPA) / 2.0), phase) });
    }
    if half.is_empty() {
        let xi = freqs.vector(0, 0);
        let r = norm(&xi);
        half.push(SpectralTerm { xi, c: Complex64::new((1.0 + r * r).powf(-(alpha + KAPPA) / 2.0), 0.0) });
    }
    SpectralField::real_from_half(freqs.dim(), half)
}

/// Max over the table's intervals of the gain ratio for one drift whose
/// frequencies (up to sign) all lie in the table.
pub fn gain_ratio(table: &PhiTable, b: &SpectralField, gamma: f64, alpha: f64, rho_gain: f64, p: f64) -> Result<f64> {
    let located: Vec<(usize, usize)> = b
        .terms
        .iter()
        .map(|t| {
            locate(table.freqs(), &t.xi).ok_or_else(|| crate::Error::Input(format!("ξ = {:?} not in the table", t.xi)))
        })
        .collect::<Result<_>>()?;
    let denom = b.fl_norm(alpha, p)?;
    if !(denom > 0.0) {
        return input("drift has zero norm");
    }
    let radii: Vec<f64> = b.terms.iter().map(|t| norm(&t.xi)).collect();
    let mut best = 0.0f64;
    for level in 0..=table.levels() {
        let len = table.interval_length(level);
        for k in 0..(1usize << level) {
            let items = b
                .terms
                .iter()
                .zip(&located)
                .zip(&radii)
                .map(|((t, &(mag, dir)), &r)| (r, t.c.norm() * table.entry(level, k, mag, dir).norm(), 1.0));
            let num = fl_norm_coefficients(items, alpha + rho_gain, p)?;
            best = best.max(num / (len.powf(gamma) * denom));
        }
    }
    Ok(best)
}

/// Probes `‖T^w_{s,t} b‖_{FL^{α+ρ',p}} ≲ |t - s|^γ ‖b‖_{FL^{α,p}}` with random
/// drifts on the table lattice.
pub fn regularity_gain(table: &PhiTable, cfg: &GainConfig) -> Result<GainEstimate> {
    if cfg.drifts == 0 {
        return input("need at least one drift");
    }
    let ratios: Vec<f64> = (0..cfg.drifts)
        .into_par_iter()
        .map(|i| {
            let b = random_drift(table.freqs(), cfg.alpha, cfg.seed.with_path(i as u64))?;
            gain_ratio(table, &b, cfg.gamma, cfg.alpha, cfg.rho_gain, cfg.p)
        })
        .collect::<Result<_>>()?;
    Ok(GainEstimate { config: *cfg, max: ratios.iter().cloned().fold(0.0, f64::max), median: median(&ratios), ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irregularity::envelope;
    use crate::path::SampledPath;
    use crate::spectral::{phi_table, IntervalFamily};

    #[test]
    fn zero_path_has_no_gain() {
        let p = SampledPath::constant(&[0.0], 1.0, 256).unwrap();
        let table = phi_table(&p, &FrequencySet::default_for(1).unwrap(), IntervalFamily::new(4)).unwrap();
        let b = random_drift(table.freqs(), 0.5, Seed::new(4)).unwrap();
        let r = gain_ratio(&table, &b, 0.5, 0.5, 0.0, 2.0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(gain_ratio(&table, &b, 0.5, 0.5, 1.0, 2.0).unwrap() > 10.0);
    }

    #[test]
    fn single_mode_bounded_by_envelope() {
        let p = SampledPath::from_scalar_fn(1.0, 512, |t| 2.0 * t + (30.0 * t).sin()).unwrap();
        let table = phi_table(&p, &FrequencySet::default_for(1).unwrap(), IntervalFamily::new(5)).unwrap();
        let env = envelope(&table, 0.6);
        for (j, q) in env.q.iter().enumerate() {
            let b = SpectralField::mode(vec![*q], Complex64::new(0.7, 0.0));
            let r = gain_ratio(&table, &b, 0.6, 0.0, 0.8, 2.0).unwrap();
            let bracket = (1.0 + q * q).sqrt();
            assert!(r <= env.values[j] * bracket.powf(0.8) * (1.0 + 1e-12));
            assert!(r >= env.values[j] * bracket.powf(0.8) * (1.0 - 1e-12));
        }
    }
}
