//! The oscillatory integral `Φ^w_{s,t}(ξ) = ∫_s^t e^{iξ·w_r} dr`, occupation
//! densities, and discrete Fourier–Lebesgue norms.
//!
//! `Φ` is evaluated exactly on the piecewise-linear interpolant of the path:
//! on a segment of length `Δ` whose phase runs linearly from `a` to `b`,
//! `∫ e^{i phase} = Δ e^{i(a+b)/2} sinc((b-a)/2)`.

mod field;
mod ndfft;

pub(crate) use ndfft::fft_nd;
mod occupation;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::path::SampledPath;
use crate::rng::{purpose, Seed};

pub use field::{fl_norm_coefficients, FourierLebesgue, SpectralField, SpectralTerm};
pub use occupation::{
    energy_integral, occupation_density, occupation_density_in, DensitySpectrum, OccupationBox, OccupationDensity,
};

/// Default memory cap for a [`PhiTable`], in bytes.
pub const DEFAULT_TABLE_CAP: usize = 1 << 31;

/// `sin(x) / x`.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Exact integral of `e^{i phase}` over a segment of length `dt` on which the
/// phase moves linearly from `a` to `b`.
#[inline]
pub(crate) fn segment_integral(dt: f64, a: f64, b: f64) -> Complex64 {
    let (s, c) = (0.5 * (a + b)).sin_cos();
    let w = dt * sinc(0.5 * (b - a));
    Complex64::new(w * c, w * s)
}

/// Running sums `Φ^w_{0,t_k}(ξ)` recorded at the (sorted) `marks`.
pub(crate) fn prefix_at(path: &SampledPath, xi: &[f64], marks: &[usize]) -> Vec<Complex64> {
    let dt = path.dt();
    let mut out = Vec::with_capacity(marks.len());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prev = dot(xi, path.node(0));
    let mut next_mark = 0;
    for k in 0..=path.n() {
        if k > 0 {
            let phase = dot(xi, path.node(k));
            acc += segment_integral(dt, prev, phase);
            prev = phase;
        }
        while next_mark < marks.len() && marks[next_mark] == k {
            out.push(acc);
            next_mark += 1;
        }
        if next_mark == marks.len() {
            break;
        }
    }
    out
}

/// Value of `Φ^w_{s,t}(ξ)` with an estimate of the interpolation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub value: Complex64,
    /// `|ξ| Δt Σ |w_{t_{k+1}} - w_{t_k}|` over the segments in `[s, t]`.
    pub error_estimate: f64,
}

/// `Φ^w_{s,t}(ξ)` between grid nodes `s < t`.
///
/// Computed as a difference of running sums from node 0, so values agree
/// bit-for-bit with the entries of a [`PhiTable`] at the same frequency.
pub fn phi(path: &SampledPath, s: usize, t: usize, xi: &[f64]) -> Result<PhiValue> {
    if !(s < t && t <= path.n()) {
        return input(format!("need nodes s < t ≤ n, got s = {s}, t = {t}"));
    }
    if xi.len() != path.dim() || xi.iter().any(|x| !x.is_finite()) {
        return input("frequency must be a finite vector of the path dimension");
    }
    let p = prefix_at(path, xi, &[s, t]);
    let osc: f64 = (s..t).map(|k| norm(&path.increment(k, k + 1))).sum();
    Ok(PhiValue { value: p[1] - p[0], error_estimate: norm(xi) * path.dt() * osc })
}

/// Half-octave frequency magnitudes times a fixed set of unit directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    pub magnitudes: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl FrequencySet {
    /// `q_j = q_min 2^{j/2}`, `j = 0..=j_max`, with the standard direction set.
    pub fn new(dim: usize, q_min: f64, j_max: usize) -> Result<Self> {
        if !(q_min > 0.0) {
            return input("q_min must be positive");
        }
        let magnitudes = (0..=j_max).map(|j| q_min * 2f64.powf(j as f64 / 2.0)).collect();
        Ok(FrequencySet { magnitudes, directions: standard_directions(dim)? })
    }

    /// `q_min = 1`, `J = 18`.
    pub fn default_for(dim: usize) -> Result<Self> {
        FrequencySet::new(dim, 1.0, 18)
    }

    pub fn with_magnitudes(dim: usize, magnitudes: Vec<f64>) -> Result<Self> {
        if magnitudes.windows(2).any(|w| w[1] <= w[0]) || magnitudes.iter().any(|q| !(*q > 0.0)) {
            return input("magnitudes must be positive and strictly increasing");
        }
        Ok(FrequencySet { magnitudes, directions: standard_directions(dim)? })
    }

    /// Appends `count` uniformly random unit directions.
    pub fn with_random_directions(mut self, count: usize, seed: Seed) -> Self {
        let d = self.dim();
        let mut rng = seed.stream(&[purpose::DIRECTIONS]);
        for _ in 0..count {
            loop {
                let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                let r = norm(&v);
                if r > 1e-8 {
                    self.directions.push(v.iter().map(|x| x / r).collect());
                    break;
                }
            }
        }
        self
    }

    /// Magnitudes inside `[lo, hi]`.
    pub fn restricted(&self, lo: f64, hi: f64) -> FrequencySet {
        FrequencySet {
            magnitudes: self.magnitudes.iter().cloned().filter(|q| *q >= lo && *q <= hi).collect(),
            directions: self.directions.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.directions.first().map_or(1, |d| d.len())
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len() * self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The frequency vector `q_j v_i`.
    pub fn vector(&self, mag: usize, dir: usize) -> Vec<f64> {
        let q = self.magnitudes[mag];
        self.directions[dir].iter().map(|v| q * v).collect()
    }
}

/// `{+1}` in one dimension, 16 equi-angular directions in two, 32
/// Fibonacci-lattice points in three.
pub fn standard_directions(dim: usize) -> Result<Vec<Vec<f64>>> {
    match dim {
        1 => Ok(vec![vec![1.0]]),
        2 => Ok((0..16)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 16.0;
                vec![a.cos(), a.sin()]
            })
            .collect()),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            Ok((0..32)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / 32.0;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect())
        }
        _ => input(format!("dimension {dim} outside 1..=3")),
    }
}

/// Dyadic intervals `[k 2^{-l} T, (k+1) 2^{-l} T]`, `l = 0..=levels`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalFamily {
    pub levels: usize,
}

impl Default for IntervalFamily {
    fn default() -> Self {
        IntervalFamily { levels: 8 }
    }
}

impl IntervalFamily {
    pub fn new(levels: usize) -> Self {
        IntervalFamily { levels }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.levels > 30 || !n.is_multiple_of(1usize << self.levels) {
            return input(format!("n = {n} is not divisible by 2^{}", self.levels));
        }
        Ok(())
    }

    /// Node pairs of all intervals, coarsest level first.
    pub fn intervals(&self, n: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for l in 0..=self.levels {
            let step = n >> l;
            for k in 0..(1usize << l) {
                out.push((k * step, (k + 1) * step));
            }
        }
        out
    }
}

/// `Φ^w_{0,t}(ξ)` at every level-`L` endpoint for every frequency of a
/// [`FrequencySet`]; interval values are differences of base values.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTable {
    freqs: FrequencySet,
    intervals: IntervalFamily,
    n: usize,
    horizon: f64,
    /// `freq_index * (2^L + 1) + endpoint`, `freq_index = mag * n_dirs + dir`.
    base: Vec<Complex64>,
}

/// Builds a [`PhiTable`] under the default memory cap.
pub fn phi_table(path: &SampledPath, freqs: &FrequencySet, intervals: IntervalFamily) -> Result<PhiTable> {
    phi_table_capped(path, freqs, intervals, DEFAULT_TABLE_CAP)
}

pub fn phi_table_capped(
    path: &SampledPath,
    freqs: &FrequencySet,
    intervals: IntervalFamily,
    max_bytes: usize,
) -> Result<PhiTable> {
    intervals.check(path.n())?;
    if freqs.dim() != path.dim() {
        return input("frequency set dimension differs from the path dimension");
    }
    let endpoints = (1usize << intervals.levels) + 1;
    let bytes = freqs.len().saturating_mul(endpoints).saturating_mul(std::mem::size_of::<Complex64>());
    if bytes > max_bytes {
        return Err(Error::Resource(format!("Φ table needs {bytes} bytes, cap is {max_bytes}")));
    }
    let step = path.n() >> intervals.levels;
    let marks: Vec<usize> = (0..endpoints).map(|e| e * step).collect();
    let n_dirs = freqs.directions.len();
    let base: Vec<Complex64> = (0..freqs.len())
        .into_par_iter()
        .flat_map_iter(|f| prefix_at(path, &freqs.vector(f / n_dirs, f % n_dirs), &marks))
        .collect();
    Ok(PhiTable { freqs: freqs.clone(), intervals, n: path.n(), horizon: path.horizon(), base })
}

impl PhiTable {
    pub fn freqs(&self) -> &FrequencySet {
        &self.freqs
    }

    pub fn levels(&self) -> usize {
        self.intervals.levels
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn endpoints(&self) -> usize {
        (1usize << self.intervals.levels) + 1
    }

    /// Base value `Φ_{0, e T / 2^L}` at endpoint `e`.
    pub fn base(&self, mag: usize, dir: usize, endpoint: usize) -> Complex64 {
        let f = mag * self.freqs.directions.len() + dir;
        self.base[f * self.endpoints() + endpoint]
    }

    /// `Φ_{s,t}` on the `k`-th interval of `level`.
    pub fn entry(&self, level: usize, k: usize, mag: usize, dir: usize) -> Complex64 {
        let stride = 1usize << (self.intervals.levels - level);
        self.base(mag, dir, (k + 1) * stride) - self.base(mag, dir, k * stride)
    }

    /// Length of an interval at `level`.
    pub fn interval_length(&self, level: usize) -> f64 {
        self.horizon / (1usize << level) as f64
    }

    /// Grid nodes `(s, t)` of the `k`-th interval of `level`.
    pub fn interval_nodes(&self, level: usize, k: usize) -> (usize, usize) {
        let step = self.n >> level;
        (k * step, (k + 1) * step)
    }

    /// Table value for nodes `(s, t)` at frequency `xi`, if both are in the table.
    pub fn lookup(&self, s: usize, t: usize, xi: &[f64]) -> Option<Complex64> {
        let step = self.n >> self.intervals.levels;
        if !s.is_multiple_of(step) || !t.is_multiple_of(step) || s >= t || t > self.n {
            return None;
        }
        for mag in 0..self.freqs.magnitudes.len() {
            for dir in 0..self.freqs.directions.len() {
                if self.freqs.vector(mag, dir) == xi {
                    return Some(self.base(mag, dir, t / step) - self.base(mag, dir, s / step));
                }
            }
        }
        None
    }

    /// Visits every `(level, k, mag, dir, |t - s|, Φ)` entry.
    pub fn for_each_entry(&self, mut f: impl FnMut(usize, usize, usize, usize, f64, Complex64)) {
        for level in 0..=self.intervals.levels {
            let len = self.interval_length(level);
            for k in 0..(1usize << level) {
                for mag in 0..self.freqs.magnitudes.len() {
                    for dir in 0..self.freqs.directions.len() {
                        f(level, k, mag, dir, len, self.entry(level, k, mag, dir));
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(n: usize) -> SampledPath {
        SampledPath::from_scalar_fn(1.0, n, |t| t).unwrap()
    }

    #[test]
    fn zero_path_phi_is_length() {
        let p = SampledPath::constant(&[0.0], 1.0, 16).unwrap();
        let v = phi(&p, 0, 16, &[7.0]).unwrap();
        assert_eq!(v.value, Complex64::new(1.0, 0.0));
        assert_eq!(v.error_estimate, 0.0);
    }

    #[test]
    fn linear_path_closed_form() {
        let p = linear(64);
        let v = phi(&p, 0, 64, &[2.0 * PI]).unwrap().value;
        assert!(v.norm() < 1e-14);
        for &xi in &[1.0, 3.0, 10.0] {
            let v = phi(&p, 16, 48, &[xi]).unwrap().value;
            assert!((v.norm() - (2.0 * (xi * 0.25).sin() / xi).abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn directions_are_unit() {
        for d in 1..=3 {
            for v in standard_directions(d).unwrap() {
                assert!((norm(&v) - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(standard_directions(2).unwrap().len(), 16);
        assert_eq!(standard_directions(3).unwrap().len(), 32);
        let f = FrequencySet::default_for(2).unwrap();
        assert_eq!(f.magnitudes.len(), 19);
        assert!(f.magnitudes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn table_telescopes_and_matches_phi() {
        let p = SampledPath::from_scalar_fn(1.0, 256, |t| (5.0 * t).sin() + t * t).unwrap();
        let freqs = FrequencySet::new(1, 1.0, 10).unwrap();
        let table = phi_table(&p, &freqs, IntervalFamily::new(4)).unwrap();
        for mag in 0..freqs.magnitudes.len() {
            let total: Complex64 = (0..16).map(|k| table.entry(4, k, mag, 0)).sum();
            assert!((total - table.entry(0, 0, mag, 0)).norm() < 1e-13);
            let (s, t) = table.interval_nodes(3, 5);
            let direct = phi(&p, s, t, &freqs.vector(mag, 0)).unwrap().value;
            assert_eq!(direct, table.entry(3, 5, mag, 0));
            assert_eq!(table.lookup(s, t, &freqs.vector(mag, 0)), Some(direct));
        }
    }

    #[test]
    fn table_checks() {
        let p = linear(100);
        let freqs = FrequencySet::new(1, 1.0, 4).unwrap();
        assert!(phi_table(&p, &freqs, IntervalFamily::new(3)).is_err());
        let p = linear(128);
        assert!(matches!(phi_table_capped(&p, &freqs, IntervalFamily::new(3), 64), Err(Error::Resource(_))));
    }
}
