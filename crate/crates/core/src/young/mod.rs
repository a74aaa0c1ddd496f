//! Sewing lemma, Young integrals, the averaged-field ODE scheme and
//! reparametrization of paths.

mod ode;

use crate::error::{input, Result};
use crate::path::SampledPath;
use crate::stats::linear_fit;

pub use ode::{flow_diagnostic, solve_ode, FlowReport, FlowRun, OdeProblem, OdeSolution};

type GermFn<'a> = dyn Fn(usize, usize, &mut [f64]) + Sync + 'a;

/// Two-parameter germ `Γ_{s,t}` on the nodes `0..=n` of a uniform grid,
/// with declared Hölder exponent `α` and defect exponent `β`.
pub struct Germ<'a> {
    pub dim: usize,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    eval: Box<GermFn<'a>>,
}

impl<'a> Germ<'a> {
    /// `f(s, t, out)` writes `Γ_{s,t}` into `out` (length `dim`).
    pub fn new<F>(dim: usize, n: usize, alpha: f64, beta: f64, f: F) -> Self
    where
        F: Fn(usize, usize, &mut [f64]) + Sync + 'a,
    {
        Germ { dim, n, alpha, beta, eval: Box::new(f) }
    }

    pub fn eval(&self, s: usize, t: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        if s != t {
            (self.eval)(s, t, &mut out);
        }
        out
    }

    /// Riemann sums `Σ Γ_{t_k, t_{k+1}}` at every node of the level-`l` partition.
    fn riemann(&self, level: usize) -> Vec<f64> {
        let step = self.n >> level;
        let parts = 1usize << level;
        let mut out = vec![0.0; (parts + 1) * self.dim];
        let mut buf = vec![0.0; self.dim];
        for k in 0..parts {
            (self.eval)(k * step, (k + 1) * step, &mut buf);
            for i in 0..self.dim {
                out[(k + 1) * self.dim + i] = out[k * self.dim + i] + buf[i];
            }
        }
        out
    }
}

/// Convergence record of dyadic Riemann sums of a germ.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    /// Levels `l` for which the entries below compare level `l` with `l - 1`.
    pub levels: Vec<usize>,
    /// `sup_k |I^{(l)}_{t_k} - I^{(l-1)}_{t_k}|` over the coarse nodes.
    pub sup_diff: Vec<f64>,
    /// `Σ |δΓ_{s,u,t}|` over the level-`(l-1)` intervals split at midpoints.
    pub defect_mass: Vec<f64>,
    /// `-log2` slope of `sup_diff` against `l`.
    pub order: Option<f64>,
    /// `-log2` slope of `defect_mass` against `l`.
    pub defect_order: Option<f64>,
    /// Differences do not shrink under refinement.
    pub diverged: bool,
}

fn refinement(germ: &Germ, top: usize, depth: usize) -> Refinement {
    let first = top.saturating_sub(depth - 1).max(1);
    let d = germ.dim;
    let mut levels = Vec::new();
    let mut sup_diff = Vec::new();
    let mut defect_mass = Vec::new();
    let mut coarse = germ.riemann(first - 1);
    for l in first..=top {
        let fine = germ.riemann(l);
        let mut sup: f64 = 0.0;
        let mut mass = 0.0;
        for k in 0..(1usize << (l - 1)) {
            let mut norm_sq = 0.0;
            let mut defect_sq = 0.0;
            for i in 0..d {
                let diff = fine[2 * (k + 1) * d + i] - coarse[(k + 1) * d + i];
                norm_sq += diff * diff;
                let coarse_inc = coarse[(k + 1) * d + i] - coarse[k * d + i];
                let fine_inc = fine[(2 * k + 2) * d + i] - fine[2 * k * d + i];
                defect_sq += (coarse_inc - fine_inc).powi(2);
            }
            sup = sup.max(norm_sq.sqrt());
            mass += defect_sq.sqrt();
        }
        levels.push(l);
        sup_diff.push(sup);
        defect_mass.push(mass);
        coarse = fine;
    }
    let order = log2_order(&levels, &sup_diff);
    let defect_order = log2_order(&levels, &defect_mass);
    let exact = sup_diff.iter().all(|v| *v <= 1e-14);
    let diverged = !exact && order.is_none_or(|o| o <= 0.0);
    Refinement { levels, sup_diff, defect_mass, order, defect_order, diverged }
}

fn log2_order(levels: &[usize], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        levels.iter().zip(values).filter(|(_, v)| **v > 0.0).map(|(l, v)| (*l as f64, v.log2())).collect();
    if pts.len() < 2 {
        return None;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Some(-linear_fit(&xs, &ys).slope)
}

/// `(IΓ)_t` at the level-`L` nodes with the refinement diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Sewing {
    pub level: usize,
    /// Grid nodes of the level-`L` partition.
    pub nodes: Vec<usize>,
    /// `(2^L + 1) × dim` values, row-major.
    pub values: Vec<f64>,
    pub refinement: Refinement,
}

/// Number of refinement levels compared by [`sew`].
pub const REFINEMENT_DEPTH: usize = 4;

/// Riemann-germ sums over the level-`level` dyadic partition.
pub fn sew(germ: &Germ, level: usize) -> Result<Sewing> {
    if !(germ.beta > 1.0) {
        return input(format!("sewing needs β > 1, got {}", germ.beta));
    }
    if level == 0 || level > 30 || !germ.n.is_multiple_of(1usize << level) {
        return input(format!("n = {} is not divisible by 2^{level}", germ.n));
    }
    let values = germ.riemann(level);
    let step = germ.n >> level;
    let nodes = (0..=(1usize << level)).map(|k| k * step).collect();
    Ok(Sewing { level, nodes, values, refinement: refinement(germ, level, REFINEMENT_DEPTH) })
}

/// Result of [`young_integral`].
#[derive(Debug, Clone)]
pub struct YoungIntegral {
    pub path: SampledPath,
    pub refinement: Refinement,
    /// Hölder exponent estimates of the integrand and integrator.
    pub exponents: (f64, f64),
    pub warnings: Vec<String>,
}

/// `∫_0^· A_s dφ_s` as left-point sums on the full grid.
///
/// `A` has dimension `m·d` (an `m × d` matrix per node, row-major) where `d`
/// is the dimension of `φ`; the result has dimension `m`.
pub fn young_integral(a: &SampledPath, phi: &SampledPath) -> Result<YoungIntegral> {
    a.check_same_grid_len(phi)?;
    let d = phi.dim();
    if !a.dim().is_multiple_of(d) {
        return input("integrand dimension must be a multiple of the integrator dimension");
    }
    let m = a.dim() / d;
    let ea = a.holder_exponent_estimate().min(1.0);
    let ep = phi.holder_exponent_estimate().min(1.0);
    let mut warnings = Vec::new();
    if ea + ep <= 1.0 {
        warnings.push(format!("Hölder exponents {ea:.3} + {ep:.3} ≤ 1: Young sums may not converge"));
    }
    let germ = Germ::new(m, phi.n(), ea, (ea + ep).max(1.0 + 1e-9), |s, t, out: &mut [f64]| {
        let (ps, pt) = (phi.node(s), phi.node(t));
        let av = a.node(s);
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..d).map(|c| av[r * d + c] * (pt[c] - ps[c])).sum();
        }
    });
    let n = phi.n();
    let mut values = vec![0.0; (n + 1) * m];
    let mut buf = vec![0.0; m];
    for k in 0..n {
        (germ.eval)(k, k + 1, &mut buf);
        for r in 0..m {
            values[(k + 1) * m + r] = values[k * m + r] + buf[r];
        }
    }
    let top = n.trailing_zeros() as usize;
    let refinement = if top >= 1 {
        refinement(&germ, top, REFINEMENT_DEPTH)
    } else {
        Refinement {
            levels: vec![],
            sup_diff: vec![],
            defect_mass: vec![],
            order: None,
            defect_order: None,
            diverged: false,
        }
    };
    if refinement.diverged {
        warnings.push("Young sums do not contract under refinement".into());
    }
    Ok(YoungIntegral { path: SampledPath::new(m, phi.horizon(), values)?, refinement, exponents: (ea, ep), warnings })
}

/// `w̃_r = w(τ^{-1}(r))` on the uniform grid of `[0, τ(T)]` with the same `n`.
pub fn reparametrize<F: Fn(f64) -> f64>(path: &SampledPath, tau: F) -> Result<SampledPath> {
    let n = path.n();
    let horizon = path.horizon();
    if tau(0.0).abs() > 1e-12 {
        return input("τ(0) must be 0");
    }
    let probes = 4 * n;
    let mut prev = tau(0.0);
    for k in 1..=probes {
        let v = tau(horizon * k as f64 / probes as f64);
        if !(v > prev) || !v.is_finite() {
            return input(format!("τ is not strictly increasing near t = {}", horizon * k as f64 / probes as f64));
        }
        prev = v;
    }
    let end = tau(horizon);
    let mut values = Vec::with_capacity((n + 1) * path.dim());
    for k in 0..=n {
        let r = end * k as f64 / n as f64;
        let t = if k == 0 {
            0.0
        } else if k == n {
            horizon
        } else {
            invert(&tau, r, horizon)
        };
        values.extend(path.interpolate(t));
    }
    SampledPath::new(path.dim(), end, values)
}

/// Bisection for `τ(t) = r` on `[0, T]`.
fn invert<F: Fn(f64) -> f64>(tau: &F, r: f64, horizon: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, horizon);
    while hi - lo > 1e-13 * horizon.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if tau(mid) < r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn additive_germ_is_exact() {
        let g = |t: usize| (t as f64 * 0.01).sin();
        let germ = Germ::new(1, 64, 1.0, 2.0, |s, t, out: &mut [f64]| out[0] = g(t) - g(s));
        for level in 1..=6 {
            let sw = sew(&germ, level).unwrap();
            for (k, node) in sw.nodes.iter().enumerate() {
                assert!((sw.values[k] - (g(*node) - g(0))).abs() < 1e-14);
            }
            assert!(!sw.refinement.diverged);
        }
    }

    #[test]
    fn quadratic_germ_vanishes_at_order_one() {
        let germ = Germ::new(1, 1024, 2.0, 2.0, |s, t, out: &mut [f64]| {
            let h = (t - s) as f64 / 1024.0;
            out[0] = h * h;
        });
        let sw = sew(&germ, 8).unwrap();
        assert!((sw.values[256] - 1.0 / 256.0).abs() < 1e-15);
        assert!((sw.refinement.order.unwrap() - 1.0).abs() < 1e-9);
        assert!(sew(&germ, 11).is_err());
        let bad = Germ::new(1, 8, 0.5, 1.0, |_, _, _: &mut [f64]| {});
        assert!(sew(&bad, 1).is_err());
    }

    #[test]
    fn young_closed_form() {
        let x = SampledPath::from_scalar_fn(1.0, 1024, |t| t).unwrap();
        let y = young_integral(&x, &x).unwrap();
        let end = y.path.node(1024)[0];
        assert!((end - 0.5).abs() <= 1.0 / 1024.0);
        assert!(y.warnings.is_empty());
    }

    #[test]
    fn matrix_integrand() {
        // A = [[1, 0], [2, 1]] constant, φ = (t, t²)
        let a = SampledPath::constant(&[1.0, 0.0, 2.0, 1.0], 1.0, 32).unwrap();
        let phi = SampledPath::from_fn(2, 1.0, 32, |t| vec![t, t * t]).unwrap();
        let y = young_integral(&a, &phi).unwrap().path;
        assert_eq!(y.dim(), 2);
        assert!((y.node(32)[0] - 1.0).abs() < 1e-14);
        assert!((y.node(32)[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn reparametrize_affine() {
        let w = SampledPath::from_scalar_fn(1.0, 64, |t| t).unwrap();
        let r = reparametrize(&w, |t| 2.0 * t).unwrap();
        assert_eq!(r.horizon(), 2.0);
        for k in 0..=64 {
            assert!((r.node(k)[0] - r.time(k) / 2.0).abs() < 1e-12);
        }
        let same = reparametrize(&w, |t| t).unwrap();
        for k in 0..=64 {
            assert!((same.node(k)[0] - w.node(k)[0]).abs() < 1e-12);
        }
        assert!(reparametrize(&w, |t| t - t * t).is_err());
    }
}
