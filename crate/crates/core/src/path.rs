//! Paths sampled on uniform time grids.
//!
//! A [`SampledPath`] stores the values of `w : [0, T] -> R^d` at the nodes
//! `t_k = k T / n`, `k = 0..=n`. Time stamps are implied by the grid and are
//! never stored. Between nodes the path is read as its piecewise-linear
//! interpolant.

use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::stats::linear_fit;

/// Magic prefix of the binary path format.
pub const PATH_MAGIC: &[u8; 16] = b"IRRLABPATHv1\0\0\0\0";

/// Largest supported state dimension.
pub const MAX_DIM: usize = 3;

/// Largest stored dimension; matrix-valued integrands are flattened into
/// paths of up to `MAX_DIM²` coordinates.
pub const MAX_FLAT_DIM: usize = MAX_DIM * MAX_DIM;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    dim: usize,
    horizon: f64,
    /// `(n + 1) * dim` values, row-major by node.
    values: Vec<f64>,
}

/// Result of a Hölder seminorm scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub exponent: f64,
    pub seminorm: f64,
    pub max_lag: f64,
    /// Grid pair `(s, t)` attaining the supremum; `(0, 0)` when the seminorm is zero.
    pub attained_at: (usize, usize),
}

impl SampledPath {
    pub fn new(dim: usize, horizon: f64, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_FLAT_DIM {
            return input(format!("dimension {dim} outside 1..={MAX_FLAT_DIM}"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return input(format!("horizon must be positive and finite, got {horizon}"));
        }
        if !values.len().is_multiple_of(dim) {
            return input("value count is not a multiple of the dimension");
        }
        let nodes = values.len() / dim;
        if nodes < 3 {
            return input(format!("need at least 2 steps, got {}", nodes.saturating_sub(1)));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return input(format!("non-finite value at node {}", k / dim));
        }
        Ok(SampledPath { dim, horizon, values })
    }

    /// Samples `f` at the `n + 1` grid nodes.
    pub fn from_fn<F>(dim: usize, horizon: f64, n: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let dt = horizon / n as f64;
        let mut values = Vec::with_capacity((n + 1) * dim);
        for k in 0..=n {
            let v = f(k as f64 * dt);
            if v.len() != dim {
                return input("closure returned a vector of the wrong dimension");
            }
            values.extend_from_slice(&v);
        }
        SampledPath::new(dim, horizon, values)
    }

    /// Scalar path from a closure.
    pub fn from_scalar_fn<F: Fn(f64) -> f64>(horizon: f64, n: usize, f: F) -> Result<Self> {
        SampledPath::from_fn(1, horizon, n, |t| vec![f(t)])
    }

    pub fn constant(value: &[f64], horizon: f64, n: usize) -> Result<Self> {
        SampledPath::from_fn(value.len(), horizon, n, |_| value.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of steps.
    pub fn n(&self) -> usize {
        self.values.len() / self.dim - 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n() as f64
    }

    /// `k T / n`, exact at both endpoints.
    pub fn time(&self, k: usize) -> f64 {
        self.horizon * k as f64 / self.n() as f64
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values of coordinate `i` at every node.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.values.iter().skip(i).step_by(self.dim).copied().collect()
    }

    /// `w_t - w_s` for nodes `s`, `t`.
    pub fn increment(&self, s: usize, t: usize) -> Vec<f64> {
        self.node(t).iter().zip(self.node(s)).map(|(a, b)| a - b).collect()
    }

    fn increment_norm(&self, s: usize, t: usize) -> f64 {
        let (a, b) = (self.node(s), self.node(t));
        a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum::<f64>().sqrt()
    }

    /// Piecewise-linear interpolant at time `u` (clamped to `[0, T]`).
    pub fn interpolate(&self, u: f64) -> Vec<f64> {
        let n = self.n();
        let x = (u / self.dt()).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let frac = x - k as f64;
        let (a, b) = (self.node(k), self.node(k + 1));
        a.iter().zip(b).map(|(p, q)| p + frac * (q - p)).collect()
    }

    /// Range `(min, max)` of coordinate `i` over nodes `s..=t`.
    pub fn range(&self, i: usize, s: usize, t: usize) -> (f64, f64) {
        (s..=t).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| {
            let v = self.values[k * self.dim + i];
            (lo.min(v), hi.max(v))
        })
    }

    /// `sup |w_t - w_s| / (t - s)^delta` over grid pairs with `0 < t - s <= max_lag`.
    pub fn holder_seminorm(&self, delta: f64, max_lag: f64) -> Result<HolderEstimate> {
        if !(delta > 0.0) {
            return input("Hölder exponent must be positive");
        }
        if !(max_lag > 0.0 && max_lag <= self.horizon * (1.0 + 1e-12)) {
            return input("max_lag must lie in (0, T]");
        }
        let n = self.n();
        let dt = self.dt();
        let max_k = ((max_lag / dt) * (1.0 + 1e-12)).floor().min(n as f64) as usize;
        // lag-major scan; every lag is an independent task
        let best = (1..=max_k)
            .into_par_iter()
            .map(|k| {
                let scale = (k as f64 * dt).powf(-delta);
                let mut top = (0.0_f64, 0usize);
                for s in 0..=(n - k) {
                    let v = self.increment_norm(s, s + k);
                    if v > top.0 {
                        top = (v, s);
                    }
                }
                (top.0 * scale, top.1, k)
            })
            .reduce(
                || (0.0, 0, 0),
                |a, b| {
                    if b.0 > a.0 || (b.0 == a.0 && (b.2, b.1) < (a.2, a.1) && b.0 > 0.0) {
                        b
                    } else {
                        a
                    }
                },
            );
        let attained_at = if best.0 > 0.0 { (best.1, best.1 + best.2) } else { (0, 0) };
        Ok(HolderEstimate { exponent: delta, seminorm: best.0, max_lag, attained_at })
    }

    /// Crude Hölder exponent: slope of `log max_s |w_{s,s+k}|` against `log k`
    /// over dyadic lags `k = 1, 2, 4, ...` up to `n / 8`.
    pub fn holder_exponent_estimate(&self) -> f64 {
        let n = self.n();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut k = 1;
        while k <= (n / 8).max(1) {
            let m = (0..=(n - k)).map(|s| self.increment_norm(s, s + k)).fold(0.0, f64::max);
            if m > 0.0 {
                xs.push((k as f64 * self.dt()).ln());
                ys.push(m.ln());
            }
            k *= 2;
        }
        if xs.len() < 2 {
            // constant paths are smooth
            return 1.0;
        }
        linear_fit(&xs, &ys).slope
    }

    /// `w^λ(t) = λ^{-(1-γ)/ρ} w(λ t)` on horizon `T`, using the first `λ n`
    /// steps of the input as the new grid. Requires `λ n` to be an integer.
    pub fn rescale(&self, lambda: f64, gamma: f64, rho: f64) -> Result<SampledPath> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return input("λ must lie in (0, 1]");
        }
        if !(rho > 0.0) {
            return input("ρ must be positive");
        }
        let n = self.n();
        let steps = lambda * n as f64;
        let m = steps.round();
        if (steps - m).abs() > 1e-9 * n as f64 || m < 2.0 {
            return input(format!("λ n = {steps} is not an integer ≥ 2"));
        }
        let m = m as usize;
        let factor = lambda.powf(-(1.0 - gamma) / rho);
        let values = self.values[..(m + 1) * self.dim].iter().map(|v| factor * v).collect();
        SampledPath::new(self.dim, self.horizon, values)
    }

    /// Node-wise `A w_t + shift` with `A` a row-major `d x d` matrix.
    pub fn transform(&self, a: &[f64], shift: &[f64]) -> Result<SampledPath> {
        let d = self.dim;
        if a.len() != d * d || shift.len() != d {
            return input(format!("expected a {d}x{d} matrix and a {d}-vector"));
        }
        if a.iter().chain(shift).any(|v| !v.is_finite()) {
            return input("transform coefficients must be finite");
        }
        let mut values = Vec::with_capacity(self.values.len());
        for k in 0..=self.n() {
            let x = self.node(k);
            for i in 0..d {
                let row = &a[i * d..(i + 1) * d];
                values.push(row.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() + shift[i]);
            }
        }
        SampledPath::new(d, self.horizon, values)
    }

    /// Sub-path on nodes `j0..=j1`, re-indexed from time zero.
    pub fn restrict(&self, j0: usize, j1: usize) -> Result<SampledPath> {
        if j0 >= j1 || j1 > self.n() {
            return input(format!("empty or out-of-range node range [{j0}, {j1}]"));
        }
        let horizon = (j1 - j0) as f64 * self.dt();
        SampledPath::new(self.dim, horizon, self.values[j0 * self.dim..(j1 + 1) * self.dim].to_vec())
    }

    /// Node-wise sum with another path on the same grid.
    pub fn add(&self, other: &SampledPath) -> Result<SampledPath> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        SampledPath::new(self.dim, self.horizon, values)
    }

    pub fn scale(&self, c: f64) -> Result<SampledPath> {
        SampledPath::new(self.dim, self.horizon, self.values.iter().map(|v| c * v).collect())
    }

    pub(crate) fn check_same_grid(&self, other: &SampledPath) -> Result<()> {
        if self.dim != other.dim {
            return input("paths have different dimensions");
        }
        self.check_same_grid_len(other)
    }

    /// Same time grid, any dimension.
    pub(crate) fn check_same_grid_len(&self, other: &SampledPath) -> Result<()> {
        if self.n() != other.n() || (self.horizon - other.horizon).abs() > 1e-12 * self.horizon {
            return input("paths live on different grids");
        }
        Ok(())
    }

    /// Keep every `stride`-th node (the last node is kept when `stride` divides `n`).
    pub fn subsample(&self, stride: usize) -> Result<SampledPath> {
        if stride == 0 || !self.n().is_multiple_of(stride) {
            return input("stride must divide the step count");
        }
        let mut values = Vec::with_capacity((self.n() / stride + 1) * self.dim);
        for k in (0..=self.n()).step_by(stride) {
            values.extend_from_slice(self.node(k));
        }
        SampledPath::new(self.dim, self.horizon, values)
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(PATH_MAGIC)?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        out.write_all(&(self.n() as u64).to_le_bytes())?;
        out.write_all(&self.horizon.to_le_bytes())?;
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut src: R) -> Result<SampledPath> {
        let mut magic = [0u8; 16];
        src.read_exact(&mut magic)?;
        if &magic != PATH_MAGIC {
            return Err(Error::Format("bad path file magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        src.read_exact(&mut b4)?;
        let dim = u32::from_le_bytes(b4) as usize;
        src.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        src.read_exact(&mut b8)?;
        let horizon = f64::from_le_bytes(b8);
        if dim == 0 || dim > MAX_FLAT_DIM {
            return Err(Error::Format(format!("bad dimension {dim}")));
        }
        let count = (n + 1).checked_mul(dim).ok_or_else(|| Error::Format("node count overflow".into()))?;
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            src.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        let mut rest = Vec::new();
        src.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::Format("trailing bytes after path values".into()));
        }
        SampledPath::new(dim, horizon, values)
    }

    /// CSV with header `t,x1[,x2[,x3]]` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        writeln!(out, "t,{}", header.join(","))?;
        for k in 0..=self.n() {
            let mut line = crate::lab::emit::fmt_f64(self.time(k));
            for v in self.node(k) {
                line.push(',');
                line.push_str(&crate::lab::emit::fmt_f64(*v));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads the CSV layout written by [`SampledPath::write_csv`]. Rejects
    /// non-uniform time columns.
    pub fn read_csv<R: Read>(src: R) -> Result<SampledPath> {
        let mut lines = BufReader::new(src).lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        let dim = cols.len().saturating_sub(1);
        if cols.first() != Some(&"t") || dim == 0 || dim > MAX_FLAT_DIM {
            return Err(Error::Format(format!("bad CSV header {header:?}")));
        }
        for (i, c) in cols[1..].iter().enumerate() {
            if *c != format!("x{}", i + 1) {
                return Err(Error::Format(format!("bad CSV column {c:?}")));
            }
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("bad number in {line:?}: {e}")))?;
            if fields.len() != dim + 1 {
                return Err(Error::Format(format!("wrong field count in {line:?}")));
            }
            times.push(fields[0]);
            values.extend_from_slice(&fields[1..]);
        }
        if times.len() < 3 {
            return Err(Error::Format("need at least 3 rows".into()));
        }
        let n = times.len() - 1;
        let horizon = times[n];
        let dt = horizon / n as f64;
        for (k, t) in times.iter().enumerate() {
            if (t - k as f64 * dt).abs() > 1e-9 * horizon.max(1.0) {
                return input(format!("non-uniform time stamp at row {k}"));
            }
        }
        SampledPath::new(dim, horizon, values)
    }
}
