//! The averaging operator `T^w_{s,t} b = ∫_s^t b(· + w_r) dr`.
//!
//! For a finite Fourier sum `b = Σ c_j e^{iξ_j·x}` the operator acts
//! diagonally, `T^w_{s,t} b = Σ c_j Φ^w_{s,t}(ξ_j) e^{iξ_j·x}`, so the
//! spectral route is exact given `Φ`. The grid route correlates a sampled
//! field with the occupation density.

mod gain;
mod grid;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::path::SampledPath;
use crate::spectral::{phi, prefix_at, PhiTable, SpectralField, SpectralTerm};
use crate::young::{sew, Germ, Refinement};

pub use gain::{gain_ratio, random_drift, regularity_gain, GainConfig, GainEstimate, KAPPA};
pub use grid::{average_grid, grid_inputs, grid_tolerance, GriddedField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representation {
    Spectral(SpectralField),
    Grid(GriddedField),
}

/// `T^w_{s,t} b` on one interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedField {
    pub s: f64,
    pub t: f64,
    pub field: Representation,
    /// What produced the field: `"phi"`, `"table"`, `"density"` or `"sewing"`.
    pub source: String,
}

impl AveragedField {
    pub fn spectral(&self) -> Option<&SpectralField> {
        match &self.field {
            Representation::Spectral(f) => Some(f),
            Representation::Grid(_) => None,
        }
    }

    pub fn grid(&self) -> Option<&GriddedField> {
        match &self.field {
            Representation::Grid(g) => Some(g),
            Representation::Spectral(_) => None,
        }
    }
}

/// Exact spectral averaging between grid nodes `s < t`.
///
/// Frequencies found in `table` (at interval endpoints it covers) are read
/// from it; the rest are computed with [`phi`]. Both give identical values.
pub fn average_spectral(
    path: &SampledPath,
    table: Option<&PhiTable>,
    b: &SpectralField,
    s: usize,
    t: usize,
) -> Result<AveragedField> {
    if b.dim != path.dim() {
        return input("drift dimension differs from the path dimension");
    }
    if !(s < t && t <= path.n()) {
        return input(format!("need nodes s < t ≤ n, got s = {s}, t = {t}"));
    }
    let table = table.filter(|tb| tb.n() == path.n() && tb.horizon() == path.horizon());
    let mut from_table = true;
    let coefs: Vec<(Complex64, bool)> = b
        .terms
        .par_iter()
        .map(|term| match table.and_then(|tb| tb.lookup(s, t, &term.xi)) {
            Some(v) => Ok((term.c * v, true)),
            None => Ok((term.c * phi(path, s, t, &term.xi)?.value, false)),
        })
        .collect::<Result<_>>()?;
    let terms = b
        .terms
        .iter()
        .zip(&coefs)
        .map(|(term, (c, hit))| {
            from_table &= *hit;
            SpectralTerm { xi: term.xi.clone(), c: *c }
        })
        .collect();
    let source = if from_table && table.is_some() { "table" } else { "phi" };
    Ok(AveragedField {
        s: path.time(s),
        t: path.time(t),
        field: Representation::Spectral(SpectralField { dim: b.dim, terms, hermitian: b.hermitian }),
        source: source.into(),
    })
}

/// `b(t, x) = Σ_j c_j(t) e^{iξ_j·x}` with coefficient paths sampled on a
/// uniform time grid and a declared Hölder-in-time exponent `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeDependentDrift {
    pub dim: usize,
    pub xi: Vec<Vec<f64>>,
    /// `coef[j][k] = c_j(t_k)`.
    pub coef: Vec<Vec<Complex64>>,
    pub beta: f64,
}

impl TimeDependentDrift {
    pub fn new(dim: usize, xi: Vec<Vec<f64>>, coef: Vec<Vec<Complex64>>, beta: f64) -> Result<Self> {
        if xi.len() != coef.len() || xi.iter().any(|x| x.len() != dim || x.iter().any(|v| !v.is_finite())) {
            return input("one finite frequency of the drift dimension per coefficient path");
        }
        let len = coef.first().map_or(0, |c| c.len());
        if coef.iter().any(|c| c.len() != len || c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
            return input("coefficient paths must be finite and of equal length");
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return input(format!("time exponent β = {beta} outside (0, 1]"));
        }
        Ok(TimeDependentDrift { dim, xi, coef, beta })
    }

    /// Samples `c_j(t)` at the nodes of `path`'s grid.
    pub fn from_fns<F>(path: &SampledPath, xi: Vec<Vec<f64>>, beta: f64, f: F) -> Result<Self>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        let coef = (0..xi.len()).map(|j| (0..=path.n()).map(|k| f(j, path.time(k))).collect()).collect();
        TimeDependentDrift::new(path.dim(), xi, coef, beta)
    }

    /// Frozen drift `b(t_k, ·)`.
    pub fn at(&self, k: usize) -> SpectralField {
        let terms = self.xi.iter().zip(&self.coef).map(|(x, c)| SpectralTerm { xi: x.clone(), c: c[k] }).collect();
        SpectralField { dim: self.dim, terms, hermitian: false }
    }
}

#[derive(Debug, Clone)]
pub struct TimeAveraged {
    pub field: AveragedField,
    /// One refinement record per term.
    pub refinements: Vec<Refinement>,
    pub warnings: Vec<String>,
}

/// `T^w_{s,t} b = Σ_j (∫_s^t c_j(r) dΦ_{s,r}(ξ_j)) e^{iξ_j·x}`, each Young
/// integral sewn from the germ `c_j(u) Φ_{u,v}(ξ_j)` on the full dyadic
/// resolution of `[s, t]`.
pub fn average_time_dependent(
    path: &SampledPath,
    b: &TimeDependentDrift,
    gamma: f64,
    s: usize,
    t: usize,
) -> Result<TimeAveraged> {
    if b.dim != path.dim() {
        return input("drift dimension differs from the path dimension");
    }
    if b.coef.first().is_some_and(|c| c.len() != path.n() + 1) {
        return input("coefficient paths are not sampled on the path grid");
    }
    if !(s < t && t <= path.n()) {
        return input(format!("need nodes s < t ≤ n, got s = {s}, t = {t}"));
    }
    let len = t - s;
    let level = len.trailing_zeros() as usize;
    if level == 0 {
        return input("t - s must be even for a dyadic partition");
    }
    let mut warnings = Vec::new();
    if b.beta + gamma <= 1.0 {
        warnings.push(format!("β + γ = {} ≤ 1: Young sums may not converge", b.beta + gamma));
    }
    let marks: Vec<usize> = (s..=t).collect();
    let results: Vec<(Complex64, Refinement)> =
        b.xi.par_iter()
            .zip(&b.coef)
            .map(|(xi, c)| {
                let prefix = prefix_at(path, xi, &marks);
                let germ = Germ::new(2, len, gamma, (b.beta + gamma).max(1.0 + 1e-9), |u, v, out: &mut [f64]| {
                    let z = c[s + u] * (prefix[v] - prefix[u]);
                    out[0] = z.re;
                    out[1] = z.im;
                });
                let sewn = sew(&germ, level)?;
                let last = sewn.values.len() - 2;
                Ok((Complex64::new(sewn.values[last], sewn.values[last + 1]), sewn.refinement))
            })
            .collect::<Result<_>>()?;
    let mut refinements = Vec::with_capacity(results.len());
    let mut terms = Vec::with_capacity(results.len());
    for (xi, (c, r)) in b.xi.iter().zip(results) {
        if r.diverged {
            warnings.push(format!("sewing diverges at ξ = {xi:?}"));
        }
        terms.push(SpectralTerm { xi: xi.clone(), c });
        refinements.push(r);
    }
    Ok(TimeAveraged {
        field: AveragedField {
            s: path.time(s),
            t: path.time(t),
            field: Representation::Spectral(SpectralField { dim: b.dim, terms, hermitian: false }),
            source: "sewing".into(),
        },
        refinements,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{phi_table, FrequencySet, IntervalFamily};

    fn wiggle(n: usize) -> SampledPath {
        SampledPath::from_scalar_fn(1.0, n, |t| (11.0 * t).sin() + 0.3 * (37.0 * t).cos()).unwrap()
    }

    #[test]
    fn zero_path_scales_by_length() {
        let p = SampledPath::constant(&[0.0], 1.0, 64).unwrap();
        let b = SpectralField::real_from_half(1, vec![SpectralTerm { xi: vec![3.0], c: Complex64::new(0.5, 0.2) }])
            .unwrap();
        let out = average_spectral(&p, None, &b, 16, 48).unwrap();
        for (u, v) in out.spectral().unwrap().terms.iter().zip(&b.terms) {
            assert_eq!(u.c, v.c * 0.5);
        }
    }

    #[test]
    fn table_and_phi_agree_bitwise() {
        let p = wiggle(256);
        let freqs = FrequencySet::default_for(1).unwrap();
        let table = phi_table(&p, &freqs, IntervalFamily::new(4)).unwrap();
        let b = SpectralField::mode(vec![freqs.magnitudes[7]], Complex64::new(1.0, 0.0));
        let a = average_spectral(&p, Some(&table), &b, 32, 64).unwrap();
        let c = average_spectral(&p, None, &b, 32, 64).unwrap();
        assert_eq!(a.source, "table");
        assert_eq!(c.source, "phi");
        assert_eq!(a.field, c.field);
    }

    #[test]
    fn linear_coefficient_on_zero_path() {
        let p = SampledPath::constant(&[0.0], 1.0, 256).unwrap();
        let b = TimeDependentDrift::from_fns(&p, vec![vec![2.0]], 1.0, |_, t| Complex64::new(t, 0.0)).unwrap();
        let out = average_time_dependent(&p, &b, 1.0, 64, 192).unwrap();
        let c = out.field.spectral().unwrap().terms[0].c;
        let exact = (0.75f64.powi(2) - 0.25f64.powi(2)) / 2.0;
        // left-point sums: error (t - s) Δ / 2
        assert!((c.re - exact).abs() <= 0.5 * 0.5 / 256.0 + 1e-12);
        assert_eq!(c.im, 0.0);
    }

    #[test]
    fn constant_coefficients_reduce_to_spectral() {
        let p = wiggle(128);
        let c0 = Complex64::new(0.4, -1.1);
        let b = TimeDependentDrift::from_fns(&p, vec![vec![5.0]], 1.0, |_, _| c0).unwrap();
        let out = average_time_dependent(&p, &b, 0.5, 0, 128).unwrap();
        let direct = average_spectral(&p, None, &b.at(0), 0, 128).unwrap();
        let (u, v) = (out.field.spectral().unwrap().terms[0].c, direct.spectral().unwrap().terms[0].c);
        assert!((u - v).norm() < 1e-14);
    }
}
