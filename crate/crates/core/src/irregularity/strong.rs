use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::path::SampledPath;
use crate::spectral::{dot, segment_integral, FrequencySet, IntervalFamily};
use crate::stats::linear_fit;

/// Phase-curvature tolerance `|g''| Δ²` per quadrature piece.
const CURVATURE_TOL: f64 = 1e-3;

/// `{0, ±2^k : k = 0..=k_max}^{n_p}`, zero vector first.
pub fn eta_lattice(degree: usize, k_max: u32) -> Vec<Vec<f64>> {
    let mut axis = vec![0.0];
    for k in 0..=k_max {
        let v = 2f64.powi(k as i32);
        axis.push(v);
        axis.push(-v);
    }
    let mut out = vec![vec![]];
    for _ in 0..degree {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                axis.iter().map(move |a| {
                    let mut p = prefix.clone();
                    p.push(*a);
                    p
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongEntry {
    pub eta: Vec<f64>,
    pub eta_norm: f64,
    /// Normalized sup over intervals and frequencies.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongEnvelope {
    pub rho: f64,
    pub entries: Vec<StrongEntry>,
    /// `(R, max value over |η| ≤ R)` at each distinct `|η| ≥ 1`.
    pub growth: Vec<(f64, f64)>,
    /// Slope of `log` growth against `log log(1 + R)`; needs three radii.
    pub growth_slope: Option<f64>,
}

fn poly(eta: &[f64], r: f64) -> f64 {
    eta.iter().rev().fold(0.0, |acc, c| (acc + c) * r)
}

fn curvature_bound(eta: &[f64], r: f64) -> f64 {
    eta.iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| {
            let k = (j + 1) as f64;
            k * (k - 1.0) * c.abs() * r.powi(j as i32 - 1)
        })
        .sum()
}

/// Running `∫_0^{t} e^{iξ·w_r + i g^η_r} dr` at the marks.
fn prefix_with_poly(path: &SampledPath, xi: &[f64], eta: &[f64], marks: &[usize]) -> Vec<Complex64> {
    let dt = path.dt();
    let d = path.dim();
    let mut out = Vec::with_capacity(marks.len());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut next = 0;
    while next < marks.len() && marks[next] == 0 {
        out.push(acc);
        next += 1;
    }
    let mut w = vec![0.0; d];
    for k in 0..path.n() {
        if next == marks.len() {
            break;
        }
        let (a, b) = (path.node(k), path.node(k + 1));
        let (r0, r1) = (path.time(k), path.time(k + 1));
        let pieces = (dt * (curvature_bound(eta, r1.abs().max(r0.abs())) / CURVATURE_TOL).sqrt()).floor() as usize + 1;
        let h = dt / pieces as f64;
        let mut prev = dot(xi, a) + poly(eta, r0);
        for p in 1..=pieces {
            let u = p as f64 / pieces as f64;
            if p == pieces {
                w.copy_from_slice(b);
            } else {
                for i in 0..d {
                    w[i] = a[i] + u * (b[i] - a[i]);
                }
            }
            let r = if p == pieces { r1 } else { r0 + u * dt };
            let phase = dot(xi, &w) + poly(eta, r);
            acc += segment_integral(h, prev, phase);
            prev = phase;
        }
        while next < marks.len() && marks[next] == k + 1 {
            out.push(acc);
            next += 1;
        }
    }
    out
}

/// Sup over dyadic intervals of length `≤ 1/2` and frequencies with `|ξ| > 1`
/// of `|∫_s^t e^{iξ·w_r + i g^η_r} dr| F(ξ) / (N(η) φ(|t - s|))`, with
/// `g^η_r = Σ_k η_k r^k`, `F(ξ) = |ξ|^ρ / √log|ξ|`, `φ(x) = √(x |log x|)`,
/// `N(η) = √log(1 + |η|)` and `N(0) = 1`.
///
/// Each path segment is split until the polynomial phase curvature times the
/// squared piece length is below `1e-3`; on each piece the phase is replaced
/// by its chord.
pub fn strong_envelope(
    path: &SampledPath,
    etas: &[Vec<f64>],
    freqs: &FrequencySet,
    intervals: IntervalFamily,
    rho: f64,
) -> Result<StrongEnvelope> {
    intervals.check(path.n())?;
    if freqs.dim() != path.dim() {
        return input("frequency set dimension differs from the path dimension");
    }
    let degree = etas.first().map_or(0, |e| e.len());
    if degree == 0 || degree > 3 || etas.iter().any(|e| e.len() != degree || e.iter().any(|x| !x.is_finite())) {
        return input("η vectors must share a degree in 1..=3");
    }
    let mags: Vec<usize> = (0..freqs.magnitudes.len()).filter(|&j| freqs.magnitudes[j] > 1.0).collect();
    if mags.is_empty() {
        return input("no frequency magnitudes above 1");
    }
    let n_dirs = freqs.directions.len();
    let step = path.n() >> intervals.levels;
    let marks: Vec<usize> = (0..=(1usize << intervals.levels)).map(|e| e * step).collect();
    let ivals: Vec<(usize, usize, f64)> = (0..=intervals.levels)
        .flat_map(|l| {
            let stride = 1usize << (intervals.levels - l);
            let len = path.horizon() / (1usize << l) as f64;
            (0..(1usize << l)).map(move |k| (k * stride, (k + 1) * stride, len))
        })
        .filter(|iv| iv.2 <= 0.5)
        .collect();
    if ivals.is_empty() {
        return input("no dyadic interval of length at most 1/2");
    }
    let jobs: Vec<(usize, usize, usize)> =
        (0..etas.len()).flat_map(|e| mags.iter().flat_map(move |&m| (0..n_dirs).map(move |d| (e, m, d)))).collect();
    let sups: Vec<f64> = jobs
        .par_iter()
        .map(|&(e, m, d)| {
            let q = freqs.magnitudes[m];
            let f = q.powf(rho) / q.ln().sqrt();
            let base = prefix_with_poly(path, &freqs.vector(m, d), &etas[e], &marks);
            ivals
                .iter()
                .map(|&(a, b, len)| (base[b] - base[a]).norm() * f / (len * len.ln().abs()).sqrt())
                .fold(0.0, f64::max)
        })
        .collect();
    let per_eta = mags.len() * n_dirs;
    let entries: Vec<StrongEntry> = etas
        .iter()
        .enumerate()
        .map(|(e, eta)| {
            let eta_norm = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
            let normalizer = if eta_norm == 0.0 { 1.0 } else { (1.0 + eta_norm).ln().sqrt() };
            let sup = sups[e * per_eta..(e + 1) * per_eta].iter().cloned().fold(0.0, f64::max);
            StrongEntry { eta: eta.clone(), eta_norm, value: sup / normalizer }
        })
        .collect();
    let mut order: Vec<&StrongEntry> = entries.iter().collect();
    order.sort_by(|a, b| a.eta_norm.total_cmp(&b.eta_norm));
    let mut growth: Vec<(f64, f64)> = Vec::new();
    let mut running = 0.0f64;
    for e in order {
        running = running.max(e.value);
        if e.eta_norm < 1.0 {
            continue;
        }
        match growth.last_mut() {
            Some(last) if (last.0 - e.eta_norm).abs() <= 1e-12 * e.eta_norm => last.1 = running,
            _ => growth.push((e.eta_norm, running)),
        }
    }
    let growth_slope = (growth.len() >= 3 && growth.iter().all(|g| g.1 > 0.0)).then(|| {
        let xs: Vec<f64> = growth.iter().map(|g| (1.0 + g.0).ln().ln()).collect();
        let ys: Vec<f64> = growth.iter().map(|g| g.1.ln()).collect();
        linear_fit(&xs, &ys).slope
    });
    Ok(StrongEnvelope { rho, entries, growth, growth_slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::prefix_at;

    #[test]
    fn lattice_size() {
        let l = eta_lattice(2, 3);
        assert_eq!(l.len(), 81);
        assert_eq!(l[0], vec![0.0, 0.0]);
    }

    #[test]
    fn zero_eta_matches_plain_quadrature() {
        let p = SampledPath::from_scalar_fn(1.0, 256, |t| (5.0 * t).sin()).unwrap();
        let marks = [0, 64, 128, 256];
        let a = prefix_with_poly(&p, &[13.0], &[0.0, 0.0], &marks);
        let b = prefix_at(&p, &[13.0], &marks);
        assert_eq!(a, b);
    }

    #[test]
    fn linear_phase_closed_form() {
        let p = SampledPath::constant(&[0.0], 1.0, 128).unwrap();
        let q = 37.0;
        let v = prefix_with_poly(&p, &[5.0], &[q, 0.0, 0.0], &[0, 128]);
        let exact = Complex64::new(q.sin(), 1.0 - q.cos()) / q;
        assert!((v[1] - v[0] - exact).norm() < 1e-13);
    }

    #[test]
    fn quadratic_phase_is_resolved() {
        let p = SampledPath::constant(&[0.0], 1.0, 16).unwrap();
        let v = prefix_with_poly(&p, &[1.0], &[0.0, 200.0], &[0, 16]);
        let m = 400_000;
        let oracle: Complex64 = (0..m)
            .map(|k| {
                let r = (k as f64 + 0.5) / m as f64;
                Complex64::from_polar(1.0 / m as f64, 200.0 * r * r)
            })
            .sum();
        assert!((v[1] - v[0] - oracle).norm() < 2e-3 * oracle.norm().max(0.05));
    }
}
