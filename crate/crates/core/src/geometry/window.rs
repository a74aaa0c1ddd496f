use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::path::SampledPath;
use crate::stats::linear_fit;

/// `W(r, T) = max_t Σ_s Δt 1{|w_t - w_s| < r}` over a list of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowCurve {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    /// `W(r, T) / 2r`.
    pub ratio: Vec<f64>,
    /// Slope of `log W` against `log r`; 1 under a linear-in-`r` bound.
    pub slope: f64,
    /// Largest over smallest ratio.
    pub spread: f64,
}

/// Occupation window over the whole horizon; the sum runs over the left
/// endpoints `s = 0..n-1`, so `W → T` as `r → ∞`.
pub fn occupation_window(path: &SampledPath, radii: &[f64]) -> Result<WindowCurve> {
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return input("need at least two positive radii");
    }
    let n = path.n();
    let dt = path.dt();
    let w: Vec<f64> = if path.dim() == 1 {
        let x: Vec<f64> = path.values()[..n].to_vec();
        let mut sorted = x.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        radii
            .par_iter()
            .map(|&r| {
                let best = path
                    .values()
                    .iter()
                    .map(|&c| {
                        let lo = sorted.partition_point(|v| *v <= c - r);
                        let hi = sorted.partition_point(|v| *v < c + r);
                        hi - lo
                    })
                    .max()
                    .unwrap_or(0);
                best as f64 * dt
            })
            .collect()
    } else {
        radii
            .iter()
            .map(|&r| {
                let best = (0..=n)
                    .into_par_iter()
                    .map(|t| {
                        let wt = path.node(t);
                        (0..n)
                            .filter(|&s| {
                                path.node(s).iter().zip(wt).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < r * r
                            })
                            .count()
                    })
                    .max()
                    .unwrap_or(0);
                best as f64 * dt
            })
            .collect()
    };
    let ratio: Vec<f64> = w.iter().zip(radii).map(|(w, r)| w / (2.0 * r)).collect();
    let slope = linear_fit(
        &radii.iter().map(|r| r.ln()).collect::<Vec<_>>(),
        &w.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect::<Vec<_>>(),
    )
    .slope;
    let max = ratio.iter().cloned().fold(0.0, f64::max);
    let min = ratio.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(WindowCurve { r: radii.to_vec(), w, ratio, slope, spread: max / min })
}
