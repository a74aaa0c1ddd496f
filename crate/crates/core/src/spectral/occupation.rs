use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::ndfft::{fft_nd, signed_index};
use super::{dot, norm, sinc};
use crate::error::{input, Error, Result};
use crate::path::SampledPath;

/// Largest number of grid points in a density or its padded spectrum.
const MAX_CELLS: usize = 1 << 26;

/// Cube `[lo, hi]^d` carrying the density grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupationBox {
    pub lo: f64,
    pub hi: f64,
}

impl OccupationBox {
    /// `[-half, half]`; with odd `m` the origin is a grid vertex.
    pub fn symmetric(half: f64) -> Self {
        OccupationBox { lo: -half, hi: half }
    }
}

/// Gridded occupation density `ℓ^w_{s,t}` on the vertices `lo + j h`,
/// `j = 0..m`, of a cube (row-major, axis 0 slowest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationDensity {
    pub dim: usize,
    pub lo: f64,
    pub h: f64,
    pub m: usize,
    /// Interval `[s, t]` in time units.
    pub s: f64,
    pub t: f64,
    pub values: Vec<f64>,
}

/// Density on a box fitted to the path range on `[s, t]` with a `2h` margin.
pub fn occupation_density(path: &SampledPath, s: usize, t: usize, m: usize) -> Result<OccupationDensity> {
    check_args(path, s, t, m)?;
    let (rmin, rmax) = joint_range(path, s, t);
    let width = rmax - rmin;
    let bx = if width > 0.0 {
        let h = width / (m - 5) as f64;
        OccupationBox { lo: rmin - 2.0 * h, hi: rmax + 2.0 * h }
    } else {
        OccupationBox { lo: rmin - 0.5, hi: rmin + 0.5 }
    };
    occupation_density_in(path, s, t, bx, m)
}

/// Cloud-in-cell deposit of the occupation measure on the nodes of `bx`
/// (expanded by a `2h` margin if the path leaves it).
///
/// Each segment is split into sub-steps moving at most `h / 8`; every sub-step
/// deposits its time weight at its midpoint, shared multilinearly between the
/// `2^d` surrounding vertices.
pub fn occupation_density_in(
    path: &SampledPath,
    s: usize,
    t: usize,
    bx: OccupationBox,
    m: usize,
) -> Result<OccupationDensity> {
    check_args(path, s, t, m)?;
    if !(bx.lo < bx.hi) || !bx.lo.is_finite() || !bx.hi.is_finite() {
        return input("box needs lo < hi");
    }
    let d = path.dim();
    let cells = m.checked_pow(d as u32).filter(|c| *c <= MAX_CELLS);
    let cells = cells.ok_or_else(|| Error::Resource(format!("{m}^{d} grid exceeds the cell cap")))?;
    let (rmin, rmax) = joint_range(path, s, t);
    let mut lo = bx.lo;
    let mut hi = bx.hi;
    let h0 = (hi - lo) / (m - 1) as f64;
    if rmin < lo || rmax > hi {
        lo = lo.min(rmin - 2.0 * h0);
        hi = hi.max(rmax + 2.0 * h0);
    }
    let h = (hi - lo) / (m - 1) as f64;
    let mut mass = vec![0.0; cells];
    let dt = path.dt();
    let mut x = vec![0.0; d];
    for k in s..t {
        let a = path.node(k);
        let b = path.node(k + 1);
        let step: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
        let subs = ((8.0 * norm(&step) / h).ceil() as usize).max(1);
        let w = dt / subs as f64;
        for j in 0..subs {
            let frac = (j as f64 + 0.5) / subs as f64;
            for i in 0..d {
                x[i] = a[i] + frac * step[i];
            }
            deposit(&mut mass, &x, lo, h, m, w);
        }
    }
    let vol = h.powi(d as i32);
    let values = mass.into_iter().map(|v| v / vol).collect();
    Ok(OccupationDensity { dim: d, lo, h, m, s: path.time(s), t: path.time(t), values })
}

fn check_args(path: &SampledPath, s: usize, t: usize, m: usize) -> Result<()> {
    if !(8..=4096).contains(&m) {
        return input(format!("bins per axis {m} outside [8, 4096]"));
    }
    if !(s < t && t <= path.n()) {
        return input(format!("need nodes s < t ≤ n, got s = {s}, t = {t}"));
    }
    Ok(())
}

fn joint_range(path: &SampledPath, s: usize, t: usize) -> (f64, f64) {
    (0..path.dim()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        let (a, b) = path.range(i, s, t);
        (lo.min(a), hi.max(b))
    })
}

fn deposit(mass: &mut [f64], x: &[f64], lo: f64, h: f64, m: usize, w: f64) {
    let d = x.len();
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for i in 0..d {
        let u = ((x[i] - lo) / h).clamp(0.0, (m - 1) as f64);
        let j = (u.floor() as usize).min(m - 2);
        base[i] = j;
        frac[i] = u - j as f64;
    }
    for corner in 0..(1usize << d) {
        let mut idx = 0;
        let mut weight = w;
        for i in 0..d {
            let up = (corner >> i) & 1;
            idx = idx * m + base[i] + up;
            weight *= if up == 1 { frac[i] } else { 1.0 - frac[i] };
        }
        mass[idx] += weight;
    }
}

impl OccupationDensity {
    pub fn hi(&self) -> f64 {
        self.lo + (self.m - 1) as f64 * self.h
    }

    /// `Σ ℓ h^d`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.h.powi(self.dim as i32)
    }

    /// Coordinates of flat grid index `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut r = idx;
        for i in (0..self.dim).rev() {
            out[i] = self.lo + (r % self.m) as f64 * self.h;
            r /= self.m;
        }
        out
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Direct sum `Σ ℓ_j h^d e^{-iξ·x_j}`.
    pub fn dft_at(&self, xi: &[f64]) -> Complex64 {
        let vol = self.h.powi(self.dim as i32);
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, v) in self.values.iter().enumerate() {
            if *v != 0.0 {
                acc += Complex64::from_polar(v * vol, -dot(xi, &self.point(idx)));
            }
        }
        acc
    }

    /// Fourier transform of the multilinear deposit kernel, `Π sinc²(ξ_i h / 2)`.
    pub fn cic_transfer(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|x| sinc(0.5 * x * self.h).powi(2)).product()
    }

    /// DFT on the lattice `2πk / (pad m h)` of the zero-padded grid.
    pub fn spectrum(&self, pad: usize) -> Result<DensitySpectrum> {
        let d = self.dim;
        let len = self.m * pad.max(1);
        let cells = len.checked_pow(d as u32).filter(|c| *c <= MAX_CELLS);
        let cells = cells.ok_or_else(|| Error::Resource("padded spectrum exceeds the cell cap".into()))?;
        let mut buf = vec![Complex64::new(0.0, 0.0); cells];
        let vol = self.h.powi(d as i32);
        for (idx, v) in self.values.iter().enumerate() {
            let mut r = idx;
            let mut digits = [0usize; 3];
            for i in (0..d).rev() {
                digits[i] = r % self.m;
                r /= self.m;
            }
            let target = digits.iter().take(d).fold(0, |acc, digit| acc * len + digit);
            buf[target] = Complex64::new(v * vol, 0.0);
        }
        let dims = vec![len; d];
        fft_nd(&mut buf, &dims, false);
        let dxi = 2.0 * PI / (len as f64 * self.h);
        // the grid starts at lo, not 0
        for (idx, c) in buf.iter_mut().enumerate() {
            let mut r = idx;
            let mut phase = 0.0;
            for _ in 0..d {
                phase -= signed_index(r % len, len) as f64 * dxi * self.lo;
                r /= len;
            }
            *c *= Complex64::from_polar(1.0, phase);
        }
        Ok(DensitySpectrum { dim: d, len, dxi, values: buf })
    }
}

/// `μ̂(ξ_k)` on the lattice `ξ_k = k dxi`, `k` in DFT order per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpectrum {
    pub dim: usize,
    pub len: usize,
    pub dxi: f64,
    pub values: Vec<Complex64>,
}

impl DensitySpectrum {
    pub fn xi(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut r = idx;
        for i in (0..self.dim).rev() {
            out[i] = signed_index(r % self.len, self.len) as f64 * self.dxi;
            r /= self.len;
        }
        out
    }
}

/// `c_{α,d} = Γ((d-α)/2) / (2^α π^{d/2} Γ(α/2))`, so that
/// `∫∫ |x-y|^{-α} dμ dμ = c_{α,d} ∫ |ξ|^{α-d} |μ̂(ξ)|² dξ` for `0 < α < d`.
pub fn riesz_constant(alpha: f64, d: usize) -> f64 {
    let d = d as f64;
    gamma((d - alpha) / 2.0) / (2f64.powf(alpha) * PI.powf(d / 2.0) * gamma(alpha / 2.0))
}

/// `∫_{[-1,1]^d} |u|^{α-d} du` (finite for `α > 0`).
fn unit_cube_kernel_mass(alpha: f64, d: usize) -> f64 {
    // radial integration towards each of the 2d faces: 2d/α ∫_{[-1,1]^{d-1}} (1+|y|²)^{(α-d)/2} dy
    let e = (alpha - d as f64) / 2.0;
    let face = match d {
        1 => 1.0,
        2 => simpson(|y| (1.0 + y * y).powf(e), -1.0, 1.0, 2000),
        _ => simpson(|y| simpson(|z| (1.0 + y * y + z * z).powf(e), -1.0, 1.0, 400), -1.0, 1.0, 400),
    };
    2.0 * d as f64 * face / alpha
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Riesz energy `I^α(μ)` from the density spectrum,
/// `c_{α,d} Σ_k w_k |μ̂(ξ_k)|²` with `w_k = ∫_{cell k} |ξ|^{α-d} dξ`.
///
/// The zero-frequency cell is integrated analytically, which recovers
/// `I^α → (t - s)²` as `α → 0`. For `α ≥ d` the constant `c_{α,d}` is not
/// defined and the unnormalized spectral sum is returned.
pub fn energy_integral(density: &OccupationDensity, alpha: f64) -> Result<f64> {
    let d = density.dim;
    if !(alpha > 0.0 && alpha < d as f64 + 2.0) {
        return input(format!("energy exponent {alpha} outside (0, d + 2)"));
    }
    let pad = if d == 1 { 4 } else { 2 };
    let spec = density.spectrum(pad)?;
    let dxi = spec.dxi;
    let e = alpha - d as f64;
    let dc_weight = (0.5 * dxi).powf(alpha) * unit_cube_kernel_mass(alpha, d);
    let mut total = 0.0;
    for (idx, c) in spec.values.iter().enumerate() {
        let w = if idx == 0 {
            dc_weight
        } else if d == 1 {
            let k = signed_index(idx, spec.len).unsigned_abs() as f64;
            dxi.powf(alpha) * ((k + 0.5).powf(alpha) - (k - 0.5).powf(alpha)) / alpha
        } else {
            norm(&spec.xi(idx)).powf(e) * dxi.powi(d as i32)
        };
        total += w * c.norm_sqr();
    }
    let c = if alpha < d as f64 { riesz_constant(alpha, d) } else { 1.0 };
    Ok(c * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::phi;

    #[test]
    fn linear_path_uniform_density() {
        let p = SampledPath::from_scalar_fn(1.0, 1000, |t| t).unwrap();
        let dens = occupation_density_in(&p, 0, 1000, OccupationBox { lo: 0.0, hi: 1.0 }, 65).unwrap();
        assert!((dens.mass() - 1.0).abs() < 1e-12);
        for v in &dens.values[2..63] {
            assert!((v - 1.0).abs() < 1e-3, "{v}");
        }
        assert!((dens.values[0] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn constant_path_two_bins() {
        let p = SampledPath::constant(&[0.3], 1.0, 64).unwrap();
        let dens = occupation_density_in(&p, 0, 64, OccupationBox { lo: 0.0, hi: 1.0 }, 64).unwrap();
        let nonzero = dens.values.iter().filter(|v| **v > 0.0).count();
        assert!(nonzero <= 2);
        assert!((dens.mass() - 1.0).abs() < 1e-12);
        assert!(occupation_density(&p, 0, 64, 7).is_err());
    }

    #[test]
    fn box_expands_to_cover_path() {
        let p = SampledPath::from_scalar_fn(1.0, 64, |t| 3.0 * t - 1.0).unwrap();
        let dens = occupation_density_in(&p, 0, 64, OccupationBox { lo: 0.0, hi: 1.0 }, 64).unwrap();
        assert!(dens.lo < -1.0 && dens.hi() > 2.0);
        assert!((dens.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_matches_direct_sum_and_phi() {
        let p = SampledPath::from_fn(2, 1.0, 512, |t| vec![(3.0 * t).sin(), t * t - 0.5 * t]).unwrap();
        let dens = occupation_density(&p, 0, 512, 64).unwrap();
        let spec = dens.spectrum(2).unwrap();
        for idx in [1usize, 5, 130, 128 * 3 + 7] {
            let xi = spec.xi(idx);
            assert!((spec.values[idx] - dens.dft_at(&xi)).norm() < 1e-12);
        }
        let xi = [0.5 * PI / (4.0 * dens.h), -0.3 * PI / (4.0 * dens.h)];
        let corrected = dens.dft_at(&xi) / dens.cic_transfer(&xi);
        let phi = phi(&p, 0, 512, &xi).unwrap().value;
        assert!((corrected - phi.conj()).norm() < 1e-3);
    }

    #[test]
    fn riesz_constant_one_dim_half() {
        // Fourier transform of |x|^{-1/2} in 1-d is sqrt(2π)|ξ|^{-1/2}
        let c = riesz_constant(0.5, 1);
        assert!((c - (2.0 * PI).sqrt() / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn cube_kernel_mass_closed_forms() {
        // d = 1: ∫_{-1}^{1} |u|^{α-1} = 2/α
        assert!((unit_cube_kernel_mass(0.7, 1) - 2.0 / 0.7).abs() < 1e-12);
        // α = d: volume 2^d
        assert!((unit_cube_kernel_mass(2.0, 2) - 4.0).abs() < 1e-9);
        assert!((unit_cube_kernel_mass(3.0, 3) - 8.0).abs() < 1e-6);
    }
}
