use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::path::{SampledPath, MAX_DIM};
use crate::rng::{purpose, Seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "spectral", rename_all = "snake_case", deny_unknown_fields)]
pub enum StableSpectral {
    /// Rotation-invariant: `E e^{i⟨ξ, X_t⟩} = e^{-t|ξ|^α}`.
    Isotropic { dim: usize, alpha: f64 },
    /// Independent coordinates, `E e^{iξ_i X^i_t} = e^{-t|ξ_i|^{α_i}}`.
    Axes { alphas: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableModel {
    pub spectral: StableSpectral,
}

impl StableModel {
    pub fn isotropic(dim: usize, alpha: f64) -> Self {
        StableModel { spectral: StableSpectral::Isotropic { dim, alpha } }
    }

    pub fn axes(alphas: Vec<f64>) -> Self {
        StableModel { spectral: StableSpectral::Axes { alphas } }
    }

    pub fn dim(&self) -> usize {
        match &self.spectral {
            StableSpectral::Isotropic { dim, .. } => *dim,
            StableSpectral::Axes { alphas } => alphas.len(),
        }
    }

    /// Per-coordinate stability indices.
    pub fn alphas(&self) -> Vec<f64> {
        match &self.spectral {
            StableSpectral::Isotropic { dim, alpha } => vec![*alpha; *dim],
            StableSpectral::Axes { alphas } => alphas.clone(),
        }
    }

    /// Characteristic exponent `ψ(ξ)` with `E e^{i⟨ξ, X_t⟩} = e^{-tψ(ξ)}`.
    pub fn char_exponent(&self, xi: &[f64]) -> f64 {
        match &self.spectral {
            StableSpectral::Isotropic { alpha, .. } => xi.iter().map(|x| x * x).sum::<f64>().powf(alpha / 2.0),
            StableSpectral::Axes { alphas } => xi.iter().zip(alphas).map(|(x, a)| x.abs().powf(*a)).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > MAX_DIM {
            return input(format!("dimension {d} outside 1..={MAX_DIM}"));
        }
        match &self.spectral {
            StableSpectral::Isotropic { alpha, .. } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return input(format!("stability index {alpha} outside (0, 2)"));
                }
            }
            StableSpectral::Axes { alphas } => {
                if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 2.0)) {
                    return input(format!("stability index {a} outside (0, 2]"));
                }
            }
        }
        Ok(())
    }
}

/// Symmetric stable variable with `E e^{iξX} = e^{-|ξ|^α}`, `α ∈ (0, 2]`.
pub fn sample_symmetric_stable<R: Rng>(rng: &mut R, alpha: f64) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Positive stable variable with `E e^{-uS} = e^{-u^a}`, `a ∈ (0, 1]`.
pub fn sample_positive_stable<R: Rng>(rng: &mut R, a: f64) -> f64 {
    if a >= 1.0 {
        return 1.0;
    }
    let u = PI * rng.random::<f64>();
    let e: f64 = Exp1.sample(rng);
    let head = (a * u).sin() / u.sin().powf(1.0 / a);
    head * (((1.0 - a) * u).sin() / e).powf((1.0 - a) / a)
}

pub struct StableSampler {
    model: StableModel,
    n: usize,
    horizon: f64,
}

impl StableSampler {
    pub(crate) fn new(model: &StableModel, n: usize, horizon: f64) -> Result<Self> {
        model.validate()?;
        if n < 2 {
            return input("need at least two steps");
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return input("horizon must be positive");
        }
        Ok(StableSampler { model: model.clone(), n, horizon })
    }

    pub fn sample(&self, seed: Seed) -> Result<SampledPath> {
        let (n, d) = (self.n, self.model.dim());
        let dt = self.horizon / n as f64;
        let mut values = vec![0.0; (n + 1) * d];
        match &self.model.spectral {
            StableSpectral::Axes { alphas } => {
                for (i, &alpha) in alphas.iter().enumerate() {
                    let mut rng = seed.stream(&[purpose::STABLE, i as u64]);
                    let scale = dt.powf(1.0 / alpha);
                    let mut acc = 0.0;
                    for k in 1..=n {
                        acc += scale * sample_symmetric_stable(&mut rng, alpha);
                        values[k * d + i] = acc;
                    }
                }
            }
            StableSpectral::Isotropic { alpha, .. } => {
                let a = alpha / 2.0;
                // A = 2 Δ^{1/a} S gives E e^{-A|ξ|²/2} = e^{-Δ|ξ|^α}
                let scale = 2.0 * dt.powf(1.0 / a);
                let mut sub = seed.stream(&[purpose::SUBORDINATOR]);
                let mut gauss: Vec<_> = (0..d).map(|i| seed.stream(&[purpose::GAUSSIAN, i as u64])).collect();
                let mut acc = vec![0.0; d];
                for k in 1..=n {
                    let sd = (scale * sample_positive_stable(&mut sub, a)).sqrt();
                    for (i, rng) in gauss.iter_mut().enumerate() {
                        let z: f64 = StandardNormal.sample(rng);
                        acc[i] += sd * z;
                        values[k * d + i] = acc[i];
                    }
                }
            }
        }
        SampledPath::new(d, self.horizon, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ecf(xs: &[f64], xi: f64) -> f64 {
        xs.iter().map(|x| (xi * x).cos()).sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn symmetric_stable_char_function() {
        let mut rng = Seed::new(4).stream(&[1]);
        for &alpha in &[0.7, 1.0, 1.5, 2.0] {
            let xs: Vec<f64> = (0..40000).map(|_| sample_symmetric_stable(&mut rng, alpha)).collect();
            for &xi in &[0.5, 1.0, 2.0] {
                let expect = (-f64::powf(xi, alpha)).exp();
                assert!((ecf(&xs, xi) - expect).abs() < 0.015, "α={alpha} ξ={xi}");
            }
        }
    }

    #[test]
    fn positive_stable_laplace() {
        let mut rng = Seed::new(5).stream(&[1]);
        let a = 0.75;
        let xs: Vec<f64> = (0..40000).map(|_| sample_positive_stable(&mut rng, a)).collect();
        assert!(xs.iter().all(|x| *x > 0.0));
        for &u in &[0.5, 1.0, 3.0] {
            let lap = xs.iter().map(|x| (-u * x).exp()).sum::<f64>() / xs.len() as f64;
            assert!((lap - (-f64::powf(u, a)).exp()).abs() < 0.01);
        }
    }

    #[test]
    fn validation() {
        assert!(StableModel::isotropic(2, 2.0).validate().is_err());
        assert!(StableModel::axes(vec![2.0, 1.0]).validate().is_ok());
        assert!(StableModel::axes(vec![0.0]).validate().is_err());
        assert!(StableModel::axes(vec![]).validate().is_err());
    }
}
