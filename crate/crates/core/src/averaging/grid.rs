use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::path::SampledPath;
use crate::spectral::{fft_nd, norm, occupation_density_in, OccupationBox, OccupationDensity, SpectralField};

/// Real field on the vertices `lo + j h`, `j = 0..m`, of a cube (row-major,
/// axis 0 slowest); zero outside the cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GriddedField {
    pub dim: usize,
    pub lo: f64,
    pub h: f64,
    pub m: usize,
    pub values: Vec<f64>,
}

impl GriddedField {
    pub fn new(dim: usize, lo: f64, h: f64, m: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) || m < 2 || !(h > 0.0) || !lo.is_finite() {
            return input("grid needs dimension 1..=3, m ≥ 2, h > 0");
        }
        if m.checked_pow(dim as u32) != Some(values.len()) {
            return input(format!("expected {m}^{dim} values, got {}", values.len()));
        }
        Ok(GriddedField { dim, lo, h, m, values })
    }

    /// `Re b` at the grid vertices.
    pub fn sample(b: &SpectralField, lo: f64, h: f64, m: usize) -> Result<Self> {
        let d = b.dim;
        let count = m.checked_pow(d as u32).ok_or_else(|| crate::Error::Resource("grid too large".into()))?;
        let mut g = GriddedField::new(d, lo, h, m, vec![0.0; count])?;
        for idx in 0..count {
            g.values[idx] = b.eval_real(&g.point(idx));
        }
        Ok(g)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut r = idx;
        for i in (0..self.dim).rev() {
            out[i] = self.lo + (r % self.m) as f64 * self.h;
            r /= self.m;
        }
        out
    }

    pub fn hi(&self) -> f64 {
        self.lo + (self.m - 1) as f64 * self.h
    }
}

/// Pointwise bound for the grid route on a band-limited drift:
/// `(t - s) Σ_j |c_j| |ξ_j|² h² / 4`, twice the linear-interpolation error of
/// each mode.
pub fn grid_tolerance(b: &SpectralField, h: f64, duration: f64) -> f64 {
    duration * b.terms.iter().map(|t| t.c.norm() * norm(&t.xi).powi(2)).sum::<f64>() * h * h / 4.0
}

/// `(T^w_{s,t} b)(x) = Σ_y ℓ(y) h^d b(x + y)`: correlation of `b` with the
/// density, i.e. convolution with the reflected occupation measure, by DFT on
/// `b`'s grid.
///
/// Needs equal spacing, `density.lo / h` an integer and `b.m > density.m`.
/// The output lives on the `b.m - density.m + 1` vertices `x` for which every
/// `x + y` stays on `b`'s grid, starting at `b.lo - density.lo`.
pub fn average_grid(density: &OccupationDensity, b: &GriddedField) -> Result<GriddedField> {
    let d = density.dim;
    if b.dim != d {
        return input("density and field dimensions differ");
    }
    if (b.h - density.h).abs() > 1e-12 * b.h {
        return input(format!("grid spacings differ: {} vs {}", b.h, density.h));
    }
    let h = b.h;
    let offset = density.lo / h;
    if (offset - offset.round()).abs() > 1e-9 * offset.abs().max(1.0) {
        return input("density origin is not on the field lattice");
    }
    if b.m <= density.m {
        return input("field grid must be larger than the density grid");
    }
    let len = b.m;
    let total = len.pow(d as u32);
    let mut fb: Vec<Complex64> = b.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let mut fl = vec![Complex64::new(0.0, 0.0); total];
    let vol = h.powi(d as i32);
    for (idx, v) in density.values.iter().enumerate() {
        let mut r = idx;
        let mut target = 0;
        let mut place = 1;
        for _ in 0..d {
            target += (r % density.m) * place;
            place *= len;
            r /= density.m;
        }
        fl[target] = Complex64::new(v * vol, 0.0);
    }
    let dims = vec![len; d];
    fft_nd(&mut fb, &dims, false);
    fft_nd(&mut fl, &dims, false);
    for (x, y) in fb.iter_mut().zip(&fl) {
        *x *= y.conj();
    }
    fft_nd(&mut fb, &dims, true);
    let m_out = b.m - density.m + 1;
    let mut values = vec![0.0; m_out.pow(d as u32)];
    for (idx, v) in values.iter_mut().enumerate() {
        let mut r = idx;
        let mut src = 0;
        let mut place = 1;
        for _ in 0..d {
            src += (r % m_out) * place;
            place *= len;
            r /= m_out;
        }
        *v = fb[src].re / total as f64;
    }
    GriddedField::new(d, b.lo - density.lo, h, m_out, values)
}

/// Both inputs of the grid route for a band-limited drift: the density of
/// `[s, t]` on `m` (odd) vertices of `[-R, R]^d`, `R` just covering the path,
/// and `Re b` sampled on `2m - 1` vertices of `[-2R, 2R]^d`. The averaged
/// field then lives on the density's own vertices.
pub fn grid_inputs(
    path: &SampledPath,
    s: usize,
    t: usize,
    b: &SpectralField,
    m: usize,
) -> Result<(OccupationDensity, GriddedField)> {
    if m.is_multiple_of(2) {
        return input("grid route needs an odd vertex count");
    }
    if !(s < t && t <= path.n()) {
        return input(format!("need nodes s < t ≤ n, got s = {s}, t = {t}"));
    }
    let reach = (0..path.dim())
        .map(|i| {
            let (lo, hi) = path.range(i, s, t);
            lo.abs().max(hi.abs())
        })
        .fold(0.0, f64::max);
    let r = if reach > 0.0 { 1.05 * reach } else { 1.0 };
    let density = occupation_density_in(path, s, t, OccupationBox::symmetric(r), m)?;
    let field = GriddedField::sample(b, -2.0 * r, density.h, 2 * m - 1)?;
    Ok((density, field))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::SampledPath;
    use crate::spectral::{occupation_density_in, OccupationBox};

    #[test]
    fn point_mass_reproduces_field() {
        let p = SampledPath::constant(&[0.0], 1.0, 32).unwrap();
        let dens = occupation_density_in(&p, 0, 32, OccupationBox::symmetric(1.0), 9).unwrap();
        let h = dens.h;
        let vals: Vec<f64> = (0..40).map(|k| ((k as f64) * 0.37).sin()).collect();
        let b = GriddedField::new(1, -3.0, h, 40, vals.clone()).unwrap();
        let out = average_grid(&dens, &b).unwrap();
        assert!((out.lo - (-2.0)).abs() < 1e-12);
        for (i, v) in out.values.iter().enumerate() {
            assert!((v - vals[i + 4]).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn rejects_misaligned_density() {
        let p = SampledPath::constant(&[0.0], 1.0, 32).unwrap();
        let dens = occupation_density_in(&p, 0, 32, OccupationBox { lo: -0.95, hi: 1.05 }, 9).unwrap();
        let b = GriddedField::new(1, -3.0, dens.h, 40, vec![0.0; 40]).unwrap();
        assert!(average_grid(&dens, &b).is_err());
    }
}
