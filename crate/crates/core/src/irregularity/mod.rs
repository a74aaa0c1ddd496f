//! Estimators for `(γ, ρ)`-irregularity.
//!
//! The basic statistic is the per-shell envelope
//! `E_γ(q) = max |Φ_{s,t}(ξ)| |t - s|^{-γ}` over the dyadic intervals and
//! directions of a [`PhiTable`] at `|ξ| = q`; decay exponents come from
//! least-squares fits of `log E` against `log q` (power) or `q` (exponential).

mod moments;
mod strong;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::spectral::PhiTable;
use crate::stats::{linear_fit, median, LineFit};

pub use moments::{
    anisotropic_norm, moment_decay, CharFunctionCheck, MomentConfig, MomentDiagnostic, MomentRow, MomentShell,
};
pub use strong::{eta_lattice, strong_envelope, StrongEntry, StrongEnvelope};

/// Default fitting range `[8, 512]`.
pub const DEFAULT_Q_RANGE: (f64, f64) = (8.0, 512.0);

/// Smallest number of shells a fit accepts.
pub const MIN_SHELLS: usize = 6;

/// `{0.5, 0.55, ..., 0.95}`.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..10).map(|k| 0.5 + 0.05 * k as f64).collect()
}

/// Per-shell envelope at one `γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub gamma: f64,
    pub q: Vec<f64>,
    pub values: Vec<f64>,
}

/// `E_γ(q_j)` for every magnitude of the table.
pub fn envelope(table: &PhiTable, gamma: f64) -> Envelope {
    let q = table.freqs().magnitudes.clone();
    let mut values = vec![0.0f64; q.len()];
    table.for_each_entry(|_, _, mag, _, len, v| {
        let r = v.norm() * len.powf(-gamma);
        if r > values[mag] {
            values[mag] = r;
        }
    });
    Envelope { gamma, q, values }
}

/// Shell-wise median of several envelopes on the same shells.
pub fn median_envelope(envelopes: &[Envelope]) -> Result<Envelope> {
    let first = match envelopes.first() {
        Some(e) => e,
        None => return input("no envelopes to summarize"),
    };
    if envelopes.iter().any(|e| e.q != first.q) {
        return input("envelopes are on different shells");
    }
    let values =
        (0..first.q.len()).map(|j| median(&envelopes.iter().map(|e| e.values[j]).collect::<Vec<_>>())).collect();
    Ok(Envelope { gamma: first.gamma, q: first.q.clone(), values })
}

fn shells_in(env: &Envelope, q_range: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let tol = 1e-9 * q_range.1.abs();
    let (q, e): (Vec<f64>, Vec<f64>) =
        env.q.iter().zip(&env.values).filter(|(q, _)| **q >= q_range.0 - tol && **q <= q_range.1 + tol).unzip();
    if q.len() < MIN_SHELLS {
        return input(format!("{} shells in [{}, {}], need at least {MIN_SHELLS}", q.len(), q_range.0, q_range.1));
    }
    if e.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return input("envelope has non-positive entries in the fitting range");
    }
    Ok((q, e))
}

/// Power-law fit `E ≈ Ĉ q^{-ρ̂}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoFit {
    pub rho: f64,
    pub c: f64,
    pub r2: f64,
    pub rss: f64,
    pub q_range: (f64, f64),
    pub shells: usize,
}

pub fn fit_rho(env: &Envelope, q_range: (f64, f64)) -> Result<RhoFit> {
    let (q, e) = shells_in(env, q_range)?;
    let lq: Vec<f64> = q.iter().map(|x| x.ln()).collect();
    let le: Vec<f64> = e.iter().map(|x| x.ln()).collect();
    let LineFit { slope, intercept, r2, rss } = linear_fit(&lq, &le);
    Ok(RhoFit { rho: -slope, c: intercept.exp(), r2, rss, q_range, shells: q.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DecayModel {
    /// `Ĉ q^{-ρ̂}`.
    Power { rho: f64, c: f64 },
    /// `c₁ e^{-c₂ q}`.
    Exponential { c1: f64, c2: f64 },
}

/// Both decay fits on the same shells, and the selected one.
///
/// The two fits explain the same responses `log E` with two parameters each,
/// so the selection compares residual sums of squares directly; the
/// exponential model wins only on a strictly smaller residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub selected: DecayModel,
    pub exponential_selected: bool,
    pub power: DecayModel,
    pub power_r2: f64,
    pub exponential: DecayModel,
    pub exponential_r2: f64,
    pub q_range: (f64, f64),
}

impl DecayFit {
    /// `R²` of the selected model.
    pub fn r2(&self) -> f64 {
        if self.exponential_selected {
            self.exponential_r2
        } else {
            self.power_r2
        }
    }
}

pub fn fit_exponential(env: &Envelope, q_range: (f64, f64)) -> Result<DecayFit> {
    let (q, e) = shells_in(env, q_range)?;
    let le: Vec<f64> = e.iter().map(|x| x.ln()).collect();
    let lq: Vec<f64> = q.iter().map(|x| x.ln()).collect();
    let pow = linear_fit(&lq, &le);
    let exp = linear_fit(&q, &le);
    let scale: f64 = le.iter().map(|y| y * y).sum::<f64>().max(1.0);
    let exponential_selected = exp.rss < pow.rss - 1e-12 * scale;
    let power = DecayModel::Power { rho: -pow.slope, c: pow.intercept.exp() };
    let exponential = DecayModel::Exponential { c1: exp.intercept.exp(), c2: -exp.slope };
    Ok(DecayFit {
        selected: if exponential_selected { exponential } else { power },
        exponential_selected,
        power,
        power_r2: pow.r2,
        exponential,
        exponential_r2: exp.r2,
        q_range,
    })
}

/// Discrete `‖Φ‖_{W^{γ,ρ}} = max |Φ_{s,t}(ξ)| |ξ|^ρ |t - s|^{-γ}` over the table.
pub fn sup_norm(table: &PhiTable, gamma: f64, rho: f64) -> f64 {
    let weights: Vec<f64> = table.freqs().magnitudes.iter().map(|q| q.powf(rho)).collect();
    let mut out = 0.0f64;
    table.for_each_entry(|_, _, mag, _, len, v| {
        out = out.max(v.norm() * weights[mag] * len.powf(-gamma));
    });
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaFit {
    pub envelope: Envelope,
    pub fit: RhoFit,
    /// [`sup_norm`] at `(γ, ρ̂)`.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrregularityReport {
    pub fits: Vec<GammaFit>,
    /// Index into `fits` chosen by [`BEST_MIN_R2`]: largest `ρ̂` among `γ > 1/2`
    /// with a fit at least that good, otherwise the largest `R²`.
    pub best: usize,
    /// `min (1 - γ) / ρ̂(γ)` over the fits with `ρ̂ > 0`.
    pub delta_star: Option<f64>,
    pub q_range: (f64, f64),
}

impl IrregularityReport {
    pub fn best_fit(&self) -> &GammaFit {
        &self.fits[self.best]
    }

    /// `gamma,q,envelope` rows.
    pub fn shell_rows(&self) -> Vec<(f64, f64, f64)> {
        self.fits
            .iter()
            .flat_map(|g| g.envelope.q.iter().zip(&g.envelope.values).map(move |(q, e)| (g.envelope.gamma, *q, *e)))
            .collect()
    }
}

/// Fit quality a `γ > 1/2` entry needs to be eligible as the best fit.
pub const BEST_MIN_R2: f64 = 0.9;

fn select_best(fits: &[GammaFit]) -> usize {
    let eligible = fits
        .iter()
        .enumerate()
        .filter(|(_, g)| g.envelope.gamma > 0.5 && g.fit.r2 >= BEST_MIN_R2)
        .max_by(|a, b| a.1.fit.rho.total_cmp(&b.1.fit.rho).then(b.0.cmp(&a.0)));
    match eligible {
        Some((i, _)) => i,
        None => fits
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.fit.r2.total_cmp(&b.1.fit.r2).then(b.0.cmp(&a.0)))
            .map_or(0, |(i, _)| i),
    }
}

/// Envelopes, fits and the critical parameter over a `γ` grid.
pub fn irregularity_report(table: &PhiTable, gammas: &[f64], q_range: (f64, f64)) -> Result<IrregularityReport> {
    if gammas.is_empty() || gammas.iter().any(|g| !(*g >= 0.0 && *g <= 1.0)) {
        return input("γ grid must be non-empty and inside [0, 1]");
    }
    if table.levels() < 4 {
        return input("the Φ table needs at least 4 interval levels");
    }
    let fits = gammas
        .iter()
        .map(|&gamma| {
            let envelope = envelope(table, gamma);
            let fit = fit_rho(&envelope, q_range)?;
            let norm = sup_norm(table, gamma, fit.rho);
            Ok(GammaFit { envelope, fit, norm })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = select_best(&fits);
    let delta_star =
        fits.iter().filter(|g| g.fit.rho > 0.0).map(|g| (1.0 - g.envelope.gamma) / g.fit.rho).reduce(f64::min);
    Ok(IrregularityReport { fits, best, delta_star, q_range })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCheck {
    pub theta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub norm: f64,
    pub gamma_theta: f64,
    pub rho_theta: f64,
    pub norm_theta: f64,
    /// `N^θ (1 + 1e-9)`.
    pub bound: f64,
    pub holds: bool,
}

/// Recomputes the sup-norm at `(1 - θ + θγ, θρ)` and compares it with `N^θ`.
pub fn interpolation_check(table: &PhiTable, gamma: f64, rho: f64, theta: f64) -> Result<InterpolationCheck> {
    if !(theta > 0.0 && theta <= 1.0) {
        return input(format!("θ = {theta} outside (0, 1]"));
    }
    let norm = sup_norm(table, gamma, rho);
    let gamma_theta = 1.0 - theta + theta * gamma;
    let rho_theta = theta * rho;
    let norm_theta = sup_norm(table, gamma_theta, rho_theta);
    let bound = norm.powf(theta) * (1.0 + 1e-9);
    Ok(InterpolationCheck {
        theta,
        gamma,
        rho,
        norm,
        gamma_theta,
        rho_theta,
        norm_theta,
        bound,
        holds: norm_theta <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::SampledPath;
    use crate::spectral::{phi, phi_table, FrequencySet, IntervalFamily};

    fn table(path: &SampledPath) -> PhiTable {
        phi_table(path, &FrequencySet::default_for(path.dim()).unwrap(), IntervalFamily::new(6)).unwrap()
    }

    #[test]
    fn zero_path_envelope_is_flat() {
        let p = SampledPath::constant(&[0.0], 1.0, 256).unwrap();
        let env = envelope(&table(&p), 0.5);
        for v in &env.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let fit = fit_rho(&env, DEFAULT_Q_RANGE).unwrap();
        assert!(fit.rho.abs() < 1e-9);
        assert!(!fit_exponential(&env, DEFAULT_Q_RANGE).unwrap().exponential_selected);
    }

    #[test]
    fn envelope_matches_brute_force() {
        let p = SampledPath::from_scalar_fn(1.0, 512, |t| (9.0 * t).sin() + t * t).unwrap();
        let t = table(&p);
        let env = envelope(&t, 0.7);
        for (j, q) in env.q.iter().enumerate() {
            let mut brute = 0.0f64;
            for (s, e) in IntervalFamily::new(6).intervals(512) {
                let v = phi(&p, s, e, &[*q]).unwrap().value.norm();
                brute = brute.max(v / ((e - s) as f64 / 512.0).powf(0.7));
            }
            assert!((env.values[j] - brute).abs() <= 1e-12 * brute);
        }
    }

    #[test]
    fn too_few_shells() {
        let p = SampledPath::constant(&[0.0], 1.0, 256).unwrap();
        let env = envelope(&table(&p), 0.5);
        assert!(fit_rho(&env, (8.0, 32.0)).is_err());
    }

    #[test]
    fn interpolation_theta_one_is_equality() {
        let p = SampledPath::from_scalar_fn(1.0, 256, |t| 3.0 * t + (20.0 * t).cos()).unwrap();
        let c = interpolation_check(&table(&p), 0.6, 0.8, 1.0).unwrap();
        assert!(c.holds);
        assert!((c.norm_theta - c.norm).abs() <= 1e-15 * c.norm);
    }
}
