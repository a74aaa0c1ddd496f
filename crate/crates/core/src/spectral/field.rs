use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::occupation::OccupationDensity;
use super::{dot, norm};
use crate::error::{input, Result};
use crate::rng::{purpose, Seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTerm {
    pub xi: Vec<f64>,
    pub c: Complex64,
}

/// Finite Fourier sum `b(x) = Σ_j c_j e^{iξ_j·x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub dim: usize,
    pub terms: Vec<SpectralTerm>,
    /// Every `(ξ, c)` is paired with `(-ξ, conj c)`, so `b` is real-valued.
    pub hermitian: bool,
}

impl SpectralField {
    pub fn new(dim: usize, terms: Vec<SpectralTerm>, hermitian: bool) -> Result<Self> {
        if terms.iter().any(|t| t.xi.len() != dim || t.xi.iter().any(|x| !x.is_finite())) {
            return input("term frequencies must be finite vectors of the field dimension");
        }
        if terms.iter().any(|t| !t.c.re.is_finite() || !t.c.im.is_finite()) {
            return input("coefficients must be finite");
        }
        let field = SpectralField { dim, terms, hermitian };
        if hermitian && !field.is_hermitian(1e-12) {
            return input("Hermitian flag set but a conjugate pair is missing");
        }
        Ok(field)
    }

    /// Constant field `b ≡ c`.
    pub fn constant(dim: usize, c: f64) -> Self {
        SpectralField {
            dim,
            terms: vec![SpectralTerm { xi: vec![0.0; dim], c: Complex64::new(c, 0.0) }],
            hermitian: true,
        }
    }

    /// Single complex mode `c e^{iξ·x}`.
    pub fn mode(xi: Vec<f64>, c: Complex64) -> Self {
        SpectralField { dim: xi.len(), terms: vec![SpectralTerm { xi, c }], hermitian: false }
    }

    /// Real field from half of its spectrum: each `(ξ, c)` with `ξ ≠ 0` also
    /// contributes `(-ξ, conj c)`; zero-frequency terms keep only `Re c`.
    pub fn real_from_half(dim: usize, half: Vec<SpectralTerm>) -> Result<Self> {
        let mut terms = Vec::with_capacity(2 * half.len());
        for t in half {
            if t.xi.iter().all(|x| *x == 0.0) {
                terms.push(SpectralTerm { xi: t.xi, c: Complex64::new(t.c.re, 0.0) });
            } else {
                let neg = t.xi.iter().map(|x| -x).collect();
                terms.push(SpectralTerm { xi: neg, c: t.c.conj() });
                terms.push(t);
            }
        }
        SpectralField::new(dim, terms, true)
    }

    /// Real field with `half` modes `ξ_k = k u_k`, `k = 1..=half`, `u_k` a
    /// random unit vector (`+1` in one dimension), and coefficients
    /// `⟨ξ_k⟩^{-α} e^{iθ_k}` with uniform phases, so `b ∈ FL^{α,∞}` with norm 1.
    pub fn power_law_modes(dim: usize, half: usize, alpha: f64, seed: Seed) -> Result<Self> {
        if dim == 0 || half == 0 || !alpha.is_finite() {
            return input("need a positive dimension, at least one mode and finite α");
        }
        let mut rng = seed.stream(&[purpose::DRIFT, 1]);
        let terms = (1..=half)
            .map(|k| {
                let dir: Vec<f64> = if dim == 1 {
                    vec![1.0]
                } else {
                    loop {
                        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                        let r = norm(&v);
                        if r > 1e-8 {
                            break v.iter().map(|x| x / r).collect();
                        }
                    }
                };
                let q = k as f64;
                let phase = 2.0 * PI * rng.random::<f64>();
                SpectralTerm {
                    xi: dir.iter().map(|u| q * u).collect(),
                    c: Complex64::from_polar((1.0 + q * q).powf(-alpha / 2.0), phase),
                }
            })
            .collect();
        SpectralField::real_from_half(dim, terms)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| {
            self.terms.iter().any(|u| {
                t.xi.iter().zip(&u.xi).all(|(a, b)| (a + b).abs() <= tol * (1.0 + a.abs()))
                    && (t.c.conj() - u.c).norm() <= tol * (1.0 + t.c.norm())
            })
        })
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms.iter().map(|t| t.c * Complex64::from_polar(1.0, dot(&t.xi, x))).sum()
    }

    /// `Re b(x)`; exact for Hermitian fields up to rounding.
    pub fn eval_real(&self, x: &[f64]) -> f64 {
        self.eval(x).re
    }

    /// Largest `|ξ_j|`.
    pub fn band(&self) -> f64 {
        self.terms.iter().map(|t| norm(&t.xi)).fold(0.0, f64::max)
    }

    /// Convolution of two finite Fourier sums on a common lattice:
    /// coefficients multiply at equal frequencies.
    pub fn convolve(&self, other: &SpectralField) -> Result<SpectralField> {
        if self.dim != other.dim {
            return input("dimension mismatch");
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            for u in &other.terms {
                if t.xi == u.xi {
                    terms.push(SpectralTerm { xi: t.xi.clone(), c: t.c * u.c });
                }
            }
        }
        let hermitian = self.hermitian && other.hermitian;
        Ok(SpectralField { dim: self.dim, terms, hermitian })
    }

    pub fn scale(&self, factor: Complex64) -> SpectralField {
        let terms = self.terms.iter().map(|t| SpectralTerm { xi: t.xi.clone(), c: t.c * factor }).collect();
        SpectralField { dim: self.dim, terms, hermitian: self.hermitian && factor.im == 0.0 }
    }
}

/// `(Σ (⟨ξ⟩^α |c|)^p w)^{1/p}` over `(ξ, |c|, w)` triples; `p = ∞` gives the max.
pub fn fl_norm_coefficients<I>(items: I, alpha: f64, p: f64) -> Result<f64>
where
    I: IntoIterator<Item = (f64, f64, f64)>,
{
    if !(p >= 1.0) {
        return input(format!("Fourier–Lebesgue exponent p = {p} must be ≥ 1"));
    }
    let bracket = |r: f64| (1.0 + r * r).sqrt();
    if p.is_infinite() {
        return Ok(items.into_iter().map(|(r, c, _)| bracket(r).powf(alpha) * c).fold(0.0, f64::max));
    }
    let sum: f64 = items.into_iter().map(|(r, c, w)| (bracket(r).powf(alpha) * c).powf(p) * w).sum();
    Ok(sum.powf(1.0 / p))
}

/// Discrete `FL^{α,p}` norms, `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
pub trait FourierLebesgue {
    fn fl_norm(&self, alpha: f64, p: f64) -> Result<f64>;
}

impl FourierLebesgue for SpectralField {
    /// Exact finite sum over the terms.
    fn fl_norm(&self, alpha: f64, p: f64) -> Result<f64> {
        fl_norm_coefficients(self.terms.iter().map(|t| (norm(&t.xi), t.c.norm(), 1.0)), alpha, p)
    }
}

impl FourierLebesgue for OccupationDensity {
    /// Riemann sum of the continuum norm over the DFT lattice of the
    /// twice-padded grid; frequencies above the grid Nyquist are aliased.
    fn fl_norm(&self, alpha: f64, p: f64) -> Result<f64> {
        let spec = self.spectrum(2)?;
        let cell = spec.dxi.powi(self.dim as i32);
        fl_norm_coefficients(spec.values.iter().enumerate().map(|(i, c)| (norm(&spec.xi(i)), c.norm(), cell)), alpha, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_modes_have_unit_weighted_size() {
        let b = SpectralField::power_law_modes(2, 12, -0.5, Seed::new(3)).unwrap();
        assert_eq!(b.terms.len(), 24);
        assert!(b.is_hermitian(1e-15));
        for t in &b.terms {
            let q = norm(&t.xi);
            assert!((t.c.norm() * (1.0 + q * q).powf(-0.25) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dc_field_norm_is_one() {
        let f = SpectralField::constant(2, 1.0);
        for &a in &[-1.0, 0.0, 2.5] {
            for &p in &[1.0, 2.0, f64::INFINITY] {
                assert!((f.fl_norm(a, p).unwrap() - 1.0).abs() < 1e-15);
            }
        }
        assert!(f.fl_norm(0.0, 0.5).is_err());
    }

    #[test]
    fn hermitian_fields_are_real() {
        let half = vec![
            SpectralTerm { xi: vec![1.0], c: Complex64::new(0.3, -0.7) },
            SpectralTerm { xi: vec![2.5], c: Complex64::new(-1.0, 0.2) },
            SpectralTerm { xi: vec![0.0], c: Complex64::new(0.5, 9.0) },
        ];
        let f = SpectralField::real_from_half(1, half).unwrap();
        assert!(f.hermitian);
        for x in [-1.0, 0.3, 4.0] {
            assert!(f.eval(&[x]).im.abs() < 1e-14);
        }
        let bad = vec![SpectralTerm { xi: vec![1.0], c: Complex64::new(1.0, 0.0) }];
        assert!(SpectralField::new(1, bad, true).is_err());
    }
}
