//! Roughness and dimension measurements on sampled paths.

mod dimension;
mod window;

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::path::SampledPath;
use crate::spectral::{dot, norm};

pub use dimension::{
    box_dimension, energy_dimension, fourier_dimension, fourier_dimension_from_table, BoxDimension, EnergyDimension,
    FourierDimension,
};
pub use window::{occupation_window, WindowCurve};

/// Fractions of nodes near a center where the path stays `δ`-Hölder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub center: f64,
    pub delta: f64,
    pub m: f64,
    /// `(ε, fraction)`, `ε` strictly decreasing.
    pub points: Vec<(f64, f64)>,
}

fn sorted_scales(eps: &[f64], floor: f64) -> Result<Vec<f64>> {
    let mut e = eps.to_vec();
    e.sort_by(|a, b| b.total_cmp(a));
    if e.is_empty() || e.windows(2).any(|w| w[0] == w[1]) {
        return input("need distinct scales");
    }
    if let Some(bad) = e.iter().find(|x| !(**x >= floor) || !x.is_finite()) {
        return input(format!("scale {bad} below {floor}"));
    }
    Ok(e)
}

/// For each `ε`, the fraction of grid nodes `t` with `|t - s| ≤ ε` and
/// `|w_t - w_s| ≤ M |t - s|^δ`. The center node counts.
pub fn holder_density(path: &SampledPath, s: usize, delta: f64, m: f64, eps: &[f64]) -> Result<DensityCurve> {
    if s > path.n() {
        return input("center outside the grid");
    }
    if !(delta > 0.0) || !(m >= 0.0) {
        return input("need δ > 0 and M ≥ 0");
    }
    let dt = path.dt();
    let scales = sorted_scales(eps, 4.0 * dt * (1.0 - 1e-12))?;
    let ws = path.node(s);
    let points = scales
        .iter()
        .map(|&e| {
            let reach = (e / dt * (1.0 + 1e-12)).floor() as usize;
            let lo = s.saturating_sub(reach);
            let hi = (s + reach).min(path.n());
            let good = (lo..=hi)
                .filter(|&k| {
                    let gap = (k as f64 - s as f64).abs() * dt;
                    let inc: f64 = path.node(k).iter().zip(ws).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    inc <= m * gap.powf(delta)
                })
                .count();
            (e, good as f64 / (hi - lo + 1) as f64)
        })
        .collect();
    Ok(DensityCurve { center: path.time(s), delta, m, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoughnessModulus {
    pub theta: f64,
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    /// `(s, v)` attaining each minimum.
    pub witnesses: Vec<(f64, Vec<f64>)>,
}

/// Sliding max and min over the windows `[k - r, k + r] ∩ [0, n]`.
fn window_extrema(x: &[f64], r: usize) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let (mut hi, mut lo) = (vec![0.0; n], vec![0.0; n]);
    let mut next = 0;
    for k in 0..n {
        let right = (k + r).min(n - 1);
        while next <= right {
            while maxq.back().is_some_and(|&j| x[j] <= x[next]) {
                maxq.pop_back();
            }
            maxq.push_back(next);
            while minq.back().is_some_and(|&j| x[j] >= x[next]) {
                minq.pop_back();
            }
            minq.push_back(next);
            next += 1;
        }
        let left = k.saturating_sub(r);
        while maxq.front().is_some_and(|&j| j < left) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&j| j < left) {
            minq.pop_front();
        }
        hi[k] = x[maxq[0]];
        lo[k] = x[minq[0]];
    }
    (hi, lo)
}

/// `L̂_θ(ε) = min_{s, v} max_{|t - s| < ε} |v·w_{s,t}| / ε^θ` over grid nodes
/// and the given unit directions.
pub fn roughness_modulus(
    path: &SampledPath,
    theta: f64,
    eps: &[f64],
    directions: &[Vec<f64>],
) -> Result<RoughnessModulus> {
    if directions.is_empty() || directions.iter().any(|v| v.len() != path.dim()) {
        return input("directions must be vectors of the path dimension");
    }
    let dt = path.dt();
    let scales = sorted_scales(eps, dt * (1.0 + 1e-12))?;
    let projected: Vec<Vec<f64>> =
        directions.iter().map(|v| (0..=path.n()).map(|k| dot(v, path.node(k))).collect()).collect();
    let per_scale: Vec<(f64, (f64, Vec<f64>))> = scales
        .par_iter()
        .map(|&e| {
            let r = ((e / dt).ceil() as usize).saturating_sub(1);
            let mut best = (f64::INFINITY, 0usize, 0usize);
            for (vi, x) in projected.iter().enumerate() {
                let (hi, lo) = window_extrema(x, r);
                for k in 0..x.len() {
                    let reach = (hi[k] - x[k]).max(x[k] - lo[k]);
                    if reach < best.0 {
                        best = (reach, k, vi);
                    }
                }
            }
            (best.0 / e.powf(theta), (path.time(best.1), directions[best.2].clone()))
        })
        .collect();
    let (values, witnesses) = per_scale.into_iter().unzip();
    Ok(RoughnessModulus { theta, eps: scales, values, witnesses })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PVariation {
    pub p: f64,
    pub value: f64,
    /// Subsampling stride on the original grid.
    pub stride: usize,
    /// Segments in the subsampled grid.
    pub segments: usize,
}

/// Default segment cap for [`p_variation`].
pub const DEFAULT_MAX_NODES: usize = 4096;

/// Exact `sup Σ |w_{t_{i+1}} - w_{t_i}|^p` over partitions of the grid
/// subsampled with the smallest stride leaving at most `max_nodes` segments,
/// by dynamic programming over the nodes.
pub fn p_variation(path: &SampledPath, p: f64, max_nodes: usize) -> Result<PVariation> {
    if !(p >= 1.0) || !p.is_finite() {
        return input(format!("p = {p} must be finite and ≥ 1"));
    }
    if max_nodes == 0 {
        return input("max_nodes must be positive");
    }
    let n = path.n();
    let stride = (1..=n).find(|s| n.is_multiple_of(*s) && n / s <= max_nodes).unwrap_or(n);
    let sub = path.subsample(stride)?;
    let k = sub.n();
    let mut best = vec![0.0f64; k + 1];
    for j in 1..=k {
        let wj = sub.node(j);
        let mut v = 0.0f64;
        for (i, prev) in best[..j].iter().enumerate() {
            let inc: f64 = wj.iter().zip(sub.node(i)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            v = v.max(prev + inc.powf(0.5 * p));
        }
        best[j] = v;
    }
    Ok(PVariation { p, value: best[k], stride, segments: k })
}

/// Unit directions used for roughness: the frequency-set directions.
pub fn default_directions(dim: usize) -> Result<Vec<Vec<f64>>> {
    let dirs = crate::spectral::standard_directions(dim)?;
    Ok(dirs
        .into_iter()
        .map(|v| {
            let r = norm(&v);
            v.into_iter().map(|x| x / r).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_path_is_holder_everywhere() {
        let p = SampledPath::constant(&[1.0], 1.0, 1024).unwrap();
        let c = holder_density(&p, 512, 0.5, 1.0, &[0.1, 0.01]).unwrap();
        assert!(c.points.iter().all(|(_, f)| *f == 1.0));
        let r = roughness_modulus(&p, 0.5, &[0.1, 0.01], &[vec![1.0]]).unwrap();
        assert!(r.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_path_fraction_is_center_only() {
        let p = SampledPath::from_scalar_fn(1.0, 1024, |t| t).unwrap();
        let c = holder_density(&p, 512, 2.0, 1.0, &[0.25, 0.0625]).unwrap();
        for (e, f) in c.points {
            let nodes = 2.0 * (e * 1024.0).floor() + 1.0;
            assert!((f - 1.0 / nodes).abs() < 1e-12);
        }
        assert!(holder_density(&p, 512, 2.0, 1.0, &[1e-3]).is_err());
    }

    #[test]
    fn linear_path_modulus() {
        let p = SampledPath::from_scalar_fn(1.0, 1024, |t| t).unwrap();
        let r = roughness_modulus(&p, 1.0, &[0.125], &[vec![1.0]]).unwrap();
        assert!((r.values[0] - (0.125 - 1.0 / 1024.0) / 0.125).abs() < 1e-12);
    }

    #[test]
    fn window_extrema_match_brute_force() {
        let x: Vec<f64> = (0..50).map(|k| ((k * 37 % 11) as f64).sin()).collect();
        let (hi, lo) = window_extrema(&x, 3);
        for k in 0..50usize {
            let w = &x[k.saturating_sub(3)..=(k + 3).min(49)];
            assert_eq!(hi[k], w.iter().cloned().fold(f64::MIN, f64::max));
            assert_eq!(lo[k], w.iter().cloned().fold(f64::MAX, f64::min));
        }
    }

    #[test]
    fn p_variation_of_a_line() {
        let p = SampledPath::from_scalar_fn(2.0, 512, |t| t).unwrap();
        assert!((p_variation(&p, 1.0, 4096).unwrap().value - 2.0).abs() < 1e-12);
        assert!((p_variation(&p, 2.0, 4096).unwrap().value - 4.0).abs() < 1e-12);
        let sub = p_variation(&p, 1.0, 100).unwrap();
        assert_eq!((sub.stride, sub.segments), (8, 64));
    }
}
