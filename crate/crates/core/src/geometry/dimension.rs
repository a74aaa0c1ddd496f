use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::path::SampledPath;
use crate::spectral::{
    energy_integral, occupation_density, occupation_density_in, prefix_at, FrequencySet, OccupationBox, PhiTable,
};
use crate::stats::linear_fit;

/// Fourier-decay dimension estimate `min(d, 2ê)` of the image of `[s, t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierDimension {
    pub q: Vec<f64>,
    /// Per shell, max over directions of `|Φ_{s,t}(ξ)|`.
    pub sup_values: Vec<f64>,
    /// Decay exponent `ê` of the shell sups.
    pub exponent: f64,
    pub r2: f64,
    pub estimate: f64,
    /// `R² < 0.7`.
    pub inconclusive: bool,
    pub energy: Option<EnergyDimension>,
    /// Energy and Fourier estimates differ by more than 0.5.
    pub disagreement: bool,
}

/// Largest `α` on a grid whose discrete energy is stable under halving `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyDimension {
    pub alphas: Vec<f64>,
    /// `I^α(h/2) / I^α(h)`.
    pub ratios: Vec<f64>,
    pub estimate: f64,
}

/// Energy ratio counted as stable.
pub const ENERGY_STABLE_RATIO: f64 = 1.05;

fn finish(
    dim: usize,
    q: Vec<f64>,
    sup_values: Vec<f64>,
    q_range: (f64, f64),
    energy: Option<EnergyDimension>,
) -> Result<FourierDimension> {
    let (lq, le): (Vec<f64>, Vec<f64>) = q
        .iter()
        .zip(&sup_values)
        .filter(|(q, _)| **q >= q_range.0 * (1.0 - 1e-9) && **q <= q_range.1 * (1.0 + 1e-9))
        .map(|(q, v)| (q.ln(), v.max(f64::MIN_POSITIVE).ln()))
        .unzip();
    if lq.len() < 3 {
        return input("need at least three shells in the fitting range");
    }
    let fit = linear_fit(&lq, &le);
    let exponent = -fit.slope;
    let estimate = (2.0 * exponent).clamp(0.0, dim as f64);
    let disagreement = energy.as_ref().is_some_and(|e| (e.estimate - estimate).abs() > 0.5);
    Ok(FourierDimension {
        q,
        sup_values,
        exponent,
        r2: fit.r2,
        estimate,
        inconclusive: fit.r2 < 0.7,
        energy,
        disagreement,
    })
}

/// Shell sups of `|Φ_{s,t}|` fitted over `q_range`; with `energy_bins`, also
/// runs [`energy_dimension`] at that resolution.
pub fn fourier_dimension(
    path: &SampledPath,
    s: usize,
    t: usize,
    freqs: &FrequencySet,
    q_range: (f64, f64),
    energy_bins: Option<usize>,
) -> Result<FourierDimension> {
    if !(s < t && t <= path.n()) {
        return input(format!("need nodes s < t ≤ n, got s = {s}, t = {t}"));
    }
    if freqs.dim() != path.dim() {
        return input("frequency set dimension differs from the path dimension");
    }
    let n_dirs = freqs.directions.len();
    let mags: Vec<f64> = (0..freqs.len())
        .into_par_iter()
        .map(|f| {
            let p = prefix_at(path, &freqs.vector(f / n_dirs, f % n_dirs), &[s, t]);
            (p[1] - p[0]).norm()
        })
        .collect();
    let sup_values = mags.chunks(n_dirs).map(|c| c.iter().cloned().fold(0.0, f64::max)).collect();
    let energy = energy_bins.map(|m| energy_dimension(path, s, t, m)).transpose()?;
    finish(path.dim(), freqs.magnitudes.clone(), sup_values, q_range, energy)
}

/// [`fourier_dimension`] on the `k`-th interval of `level` of a table.
pub fn fourier_dimension_from_table(
    table: &PhiTable,
    dim: usize,
    level: usize,
    k: usize,
    q_range: (f64, f64),
) -> Result<FourierDimension> {
    if level > table.levels() || k >= (1usize << level) {
        return input("interval not in the table");
    }
    let n_dirs = table.freqs().directions.len();
    let sup_values = (0..table.freqs().magnitudes.len())
        .map(|mag| (0..n_dirs).map(|dir| table.entry(level, k, mag, dir).norm()).fold(0.0, f64::max))
        .collect();
    finish(dim, table.freqs().magnitudes.clone(), sup_values, q_range, None)
}

/// Scans `α = 0.1, 0.2, ..` below `d` and reports the largest `α` before the
/// first whose energy grows by more than [`ENERGY_STABLE_RATIO`] when the
/// grid spacing is halved.
pub fn energy_dimension(path: &SampledPath, s: usize, t: usize, m: usize) -> Result<EnergyDimension> {
    let coarse = occupation_density(path, s, t, m)?;
    let fine = occupation_density_in(path, s, t, OccupationBox { lo: coarse.lo, hi: coarse.hi() }, 2 * m - 1)?;
    let d = path.dim();
    let alphas: Vec<f64> = (1..10 * d).map(|k| k as f64 / 10.0).collect();
    let ratios = alphas
        .iter()
        .map(|&a| Ok(energy_integral(&fine, a)? / energy_integral(&coarse, a)?))
        .collect::<Result<Vec<f64>>>()?;
    let stable = ratios.iter().take_while(|r| **r <= ENERGY_STABLE_RATIO).count();
    let estimate = if stable == 0 { 0.0 } else { alphas[stable - 1] };
    Ok(EnergyDimension { alphas, ratios, estimate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDimension {
    pub sizes: Vec<f64>,
    pub counts: Vec<usize>,
    pub estimate: f64,
    pub r2: f64,
    /// Every scale sees a single box.
    pub inconclusive: bool,
}

/// Box counts of the image of `[s, t]` at mesh sizes `L 2^{-k}`,
/// `k = 2..levels + 1`, with `L` the largest side of the bounding box; the
/// path is followed linearly between nodes.
pub fn box_dimension(path: &SampledPath, s: usize, t: usize, levels: usize) -> Result<BoxDimension> {
    if levels < 4 {
        return input("need at least 4 scale levels");
    }
    if !(s < t && t <= path.n()) {
        return input(format!("need nodes s < t ≤ n, got s = {s}, t = {t}"));
    }
    let d = path.dim();
    let ranges: Vec<(f64, f64)> = (0..d).map(|i| path.range(i, s, t)).collect();
    let side = ranges.iter().map(|(a, b)| b - a).fold(0.0, f64::max);
    let side = if side > 0.0 { side } else { 1.0 };
    let sizes: Vec<f64> = (2..levels + 2).map(|k| side * 0.5f64.powi(k as i32)).collect();
    let counts: Vec<usize> = sizes
        .par_iter()
        .map(|&eps| {
            let mut boxes: HashSet<[i64; 3]> = HashSet::new();
            let key = |x: &[f64]| {
                let mut k = [0i64; 3];
                for i in 0..d {
                    k[i] = ((x[i] - ranges[i].0) / eps).floor() as i64;
                }
                k
            };
            boxes.insert(key(path.node(s)));
            let mut x = vec![0.0; d];
            for j in s..t {
                let (a, b) = (path.node(j), path.node(j + 1));
                let len: f64 = a.iter().zip(b).map(|(p, q)| (q - p).powi(2)).sum::<f64>().sqrt();
                let subs = ((4.0 * len / eps).ceil() as usize).max(1);
                for k in 1..=subs {
                    let u = k as f64 / subs as f64;
                    for i in 0..d {
                        x[i] = a[i] + u * (b[i] - a[i]);
                    }
                    boxes.insert(key(&x));
                }
            }
            boxes.len()
        })
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (*c as f64).ln()).collect();
    let fit = linear_fit(&xs, &ys);
    let inconclusive = counts.iter().all(|c| *c == 1);
    Ok(BoxDimension { sizes, counts, estimate: if inconclusive { 0.0 } else { fit.slope }, r2: fit.r2, inconclusive })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_path_has_dimension_zero() {
        let p = SampledPath::constant(&[0.2, 0.3], 1.0, 256).unwrap();
        let f = fourier_dimension(&p, 0, 256, &FrequencySet::default_for(2).unwrap(), (8.0, 512.0), None).unwrap();
        assert!(f.estimate.abs() < 1e-12);
        let b = box_dimension(&p, 0, 256, 5).unwrap();
        assert!(b.inconclusive);
        assert_eq!(b.estimate, 0.0);
    }

    #[test]
    fn segment_has_box_dimension_one() {
        let p = SampledPath::from_fn(2, 1.0, 1024, |t| vec![t, 0.5 * t]).unwrap();
        let b = box_dimension(&p, 0, 1024, 6).unwrap();
        assert!((b.estimate - 1.0).abs() < 0.1, "{}", b.estimate);
    }

    #[test]
    fn linear_path_fourier_dimension_one() {
        let p = SampledPath::from_scalar_fn(1.0, 4096, |t| t).unwrap();
        let f = fourier_dimension(&p, 0, 4096, &FrequencySet::default_for(1).unwrap(), (8.0, 512.0), None).unwrap();
        assert!((f.estimate - 1.0).abs() < 1e-12);
    }
}
