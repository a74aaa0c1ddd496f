//! Seed-deterministic generators for the process classes studied in the lab,
//! plus analytic and empirical conditional variances.

mod compose;
mod conditional;
mod fbm;
mod stable;

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::path::{SampledPath, MAX_DIM};
use crate::rng::{purpose, Seed};

pub use compose::{controlled_compose, Compose, ComposeOutput};
pub use conditional::{conditional_variance, empirical_conditional_variance, fbm_variance_factor, ConditionalVariance};
pub use fbm::{fgn_autocovariance, FbmMethod};
pub use stable::{sample_positive_stable, sample_symmetric_stable, StableModel, StableSpectral};

/// How a fractional Brownian motion is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FbmNormalization {
    /// `E[W_t W_s] = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2`.
    #[default]
    Unit,
    /// Moving-average representation with constant `c_H = Γ(H + 1/2)^{-1}`;
    /// variance `|t|^{2H} / (Γ(2H+1) sin(πH))`.
    MandelbrotVanNess,
}

/// Scalar kernel `K` of a moving average `X_t = ∫_0^t K(t - r) dB_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Kernel {
    /// `K(t) = t^{β - 1/2}`.
    Power { beta: f64 },
    /// Values `K((m + 1/2) Δt)` for `m = 0, 1, ...`; must cover `n` entries.
    Tabulated { values: Vec<f64> },
}

/// Weighted fractional Brownian motion inside an [`GaussianKind::FbmSum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbmTerm {
    pub hurst: f64,
    /// Defaults to `(k + 1)^{-2}` for the `k`-th term.
    #[serde(default)]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaussianKind {
    Brownian,
    Fbm {
        hurst: f64,
        #[serde(default)]
        normalization: FbmNormalization,
    },
    /// `order`-fold time integral of an fBm.
    IntegratedFbm {
        hurst: f64,
        order: usize,
        #[serde(default)]
        normalization: FbmNormalization,
    },
    /// `dX = (-A X + f(t)) dt + σ dB`, `f_i(t) = Σ_k drift[i][k] t^k`.
    OrnsteinUhlenbeck {
        a: Vec<f64>,
        #[serde(default)]
        drift: Vec<Vec<f64>>,
        sigma: f64,
        #[serde(default)]
        x0: Vec<f64>,
    },
    MovingAverage {
        kernel: Kernel,
    },
    /// Moving average with kernel `r^{-1/2} |log r|^{-β/2 - 1/2}`.
    LogBm {
        beta: f64,
    },
    FbmSum {
        terms: Vec<FbmTerm>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub dim: usize,
    pub kind: GaussianKind,
}

impl GaussianModel {
    pub fn new(dim: usize, kind: GaussianKind) -> Self {
        GaussianModel { dim, kind }
    }

    pub fn brownian(dim: usize) -> Self {
        GaussianModel::new(dim, GaussianKind::Brownian)
    }

    pub fn fbm(dim: usize, hurst: f64) -> Self {
        GaussianModel::new(dim, GaussianKind::Fbm { hurst, normalization: FbmNormalization::Unit })
    }

    pub fn log_bm(dim: usize, beta: f64) -> Self {
        GaussianModel::new(dim, GaussianKind::LogBm { beta })
    }

    /// Exponent `β` of the power-law local nondeterminism bound
    /// `Var(X_t | F_s) ≳ |t - s|^{2β}`, where one exists.
    pub fn slnd_exponent(&self) -> Option<f64> {
        match &self.kind {
            GaussianKind::Brownian | GaussianKind::OrnsteinUhlenbeck { .. } => Some(0.5),
            GaussianKind::Fbm { hurst, .. } => Some(*hurst),
            GaussianKind::IntegratedFbm { hurst, order, .. } => Some(hurst + *order as f64),
            GaussianKind::MovingAverage { kernel: Kernel::Power { beta } } => Some(*beta),
            GaussianKind::FbmSum { terms } => terms.iter().map(|t| t.hurst).reduce(f64::min),
            _ => None,
        }
    }

    pub fn validate(&self, horizon: f64) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return input(format!("dimension {} outside 1..={MAX_DIM}", self.dim));
        }
        let hurst_ok = |h: f64| h > 0.0 && h < 1.0;
        match &self.kind {
            GaussianKind::Brownian => Ok(()),
            GaussianKind::Fbm { hurst, .. } | GaussianKind::IntegratedFbm { hurst, .. } => {
                if hurst_ok(*hurst) {
                    Ok(())
                } else {
                    input(format!("Hurst parameter {hurst} outside (0, 1)"))
                }
            }
            GaussianKind::OrnsteinUhlenbeck { a, drift, sigma, x0 } => {
                let d = self.dim;
                if a.len() != d * d {
                    return input("OU matrix must be d x d");
                }
                if !(drift.is_empty() || drift.len() == d) {
                    return input("OU drift needs one polynomial per coordinate");
                }
                if !(x0.is_empty() || x0.len() == d) {
                    return input("OU initial value has the wrong dimension");
                }
                if !(*sigma > 0.0) {
                    return input("OU σ must be positive");
                }
                Ok(())
            }
            GaussianKind::MovingAverage { kernel } => match kernel {
                Kernel::Power { beta } if *beta > 0.0 => Ok(()),
                Kernel::Power { .. } => input("power kernel exponent must be positive"),
                Kernel::Tabulated { values } if values.iter().all(|v| v.is_finite()) => Ok(()),
                Kernel::Tabulated { .. } => input("tabulated kernel has non-finite entries"),
            },
            GaussianKind::LogBm { beta } => {
                if !(*beta > 0.0) {
                    return input("log-Brownian β must be positive");
                }
                if horizon > 0.45 {
                    return input("log-Brownian motion requires T ≤ 0.45");
                }
                Ok(())
            }
            GaussianKind::FbmSum { terms } => {
                if terms.is_empty() {
                    return input("fBm sum needs at least one term");
                }
                for (k, t) in terms.iter().enumerate() {
                    if !hurst_ok(t.hurst) {
                        return input(format!("term {k}: Hurst parameter outside (0, 1)"));
                    }
                    if let Some(w) = t.weight {
                        if !(w > 0.0) {
                            return input(format!("term {k}: weight must be positive"));
                        }
                    }
                }
                if terms.windows(2).any(|w| w[1].hurst >= w[0].hurst) {
                    return input("fBm sum Hurst parameters must be strictly decreasing");
                }
                Ok(())
            }
        }
    }
}

/// Either family of processes, for experiment configs and moment diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProcessModel {
    Gaussian(GaussianModel),
    Stable(StableModel),
}

impl ProcessModel {
    pub fn dim(&self) -> usize {
        match self {
            ProcessModel::Gaussian(m) => m.dim,
            ProcessModel::Stable(m) => m.dim(),
        }
    }

    pub fn sampler(&self, n: usize, horizon: f64) -> Result<Sampler> {
        Ok(match self {
            ProcessModel::Gaussian(m) => Sampler::Gaussian(GaussianSampler::new(m, n, horizon)?),
            ProcessModel::Stable(m) => Sampler::Stable(stable::StableSampler::new(m, n, horizon)?),
        })
    }
}

/// Precomputed generator for repeated draws of one model on one grid.
pub enum Sampler {
    Gaussian(GaussianSampler),
    Stable(stable::StableSampler),
}

impl Sampler {
    pub fn sample(&self, seed: Seed) -> Result<SampledPath> {
        match self {
            Sampler::Gaussian(g) => g.sample(seed),
            Sampler::Stable(s) => s.sample(seed),
        }
    }
}

/// One draw of a Gaussian model.
pub fn simulate_gaussian(model: &GaussianModel, n: usize, horizon: f64, seed: Seed) -> Result<SampledPath> {
    GaussianSampler::new(model, n, horizon)?.sample(seed)
}

/// One draw of a symmetric stable model.
pub fn simulate_stable(model: &StableModel, n: usize, horizon: f64, seed: Seed) -> Result<SampledPath> {
    stable::StableSampler::new(model, n, horizon)?.sample(seed)
}

/// Convolution `X_k = Σ_{j<k} κ_{k-1-j} ξ_j` evaluated with FFTs.
struct MovingAverageEngine {
    len: usize,
    kernel_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl MovingAverageEngine {
    fn new(kernel: &[f64]) -> Self {
        let n = kernel.len();
        let len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut kernel_hat: Vec<Complex64> =
            (0..len).map(|i| Complex64::new(if i < n { kernel[i] } else { 0.0 }, 0.0)).collect();
        forward.process(&mut kernel_hat);
        MovingAverageEngine { len, kernel_hat, forward, inverse }
    }

    /// Values at nodes `0..=n` for increments `noise` (length `n`).
    fn apply(&self, noise: &[f64]) -> Vec<f64> {
        let n = noise.len();
        let mut buf: Vec<Complex64> =
            (0..self.len).map(|i| Complex64::new(if i < n { noise[i] } else { 0.0 }, 0.0)).collect();
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        let mut out = Vec::with_capacity(n + 1);
        out.push(0.0);
        // (κ * ξ)_{k-1} = Σ_{j ≤ k-1} κ_{k-1-j} ξ_j
        out.extend(buf[..n].iter().map(|c| c.re * scale));
        out
    }
}

enum Engine {
    Brownian,
    Fbm { gen: fbm::FgnGenerator, scale: f64 },
    Integrated { gen: fbm::FgnGenerator, scale: f64, order: usize },
    Ou(OuEngine),
    MovingAverage(MovingAverageEngine),
    Sum(Vec<(f64, fbm::FgnGenerator)>),
}

/// Reusable generator for a [`GaussianModel`] on a fixed grid.
pub struct GaussianSampler {
    dim: usize,
    n: usize,
    horizon: f64,
    engine: Engine,
    warnings: Vec<String>,
}

impl GaussianSampler {
    pub fn new(model: &GaussianModel, n: usize, horizon: f64) -> Result<Self> {
        Self::with_method(model, n, horizon, FbmMethod::CirculantEmbedding)
    }

    /// As [`GaussianSampler::new`], forcing the fractional Gaussian noise method.
    pub fn with_method(model: &GaussianModel, n: usize, horizon: f64, method: FbmMethod) -> Result<Self> {
        if n < 8 {
            return input(format!("need n ≥ 8 steps, got {n}"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return input("horizon must be positive");
        }
        model.validate(horizon)?;
        let mut warnings = Vec::new();
        let dt = horizon / n as f64;
        let norm_scale =
            |hurst: f64, norm: FbmNormalization| -> f64 { dt.powf(hurst) * fbm_variance_factor(hurst, norm).sqrt() };
        let engine = match &model.kind {
            GaussianKind::Brownian => Engine::Brownian,
            GaussianKind::Fbm { hurst, normalization } => Engine::Fbm {
                gen: fbm::FgnGenerator::new(*hurst, n, method, &mut warnings)?,
                scale: norm_scale(*hurst, *normalization),
            },
            GaussianKind::IntegratedFbm { hurst, order, normalization } => Engine::Integrated {
                gen: fbm::FgnGenerator::new(*hurst, n, method, &mut warnings)?,
                scale: norm_scale(*hurst, *normalization),
                order: *order,
            },
            GaussianKind::OrnsteinUhlenbeck { a, drift, sigma, x0 } => {
                Engine::Ou(OuEngine::new(model.dim, a, drift, *sigma, x0, dt)?)
            }
            GaussianKind::MovingAverage { kernel } => {
                let values: Vec<f64> = match kernel {
                    Kernel::Power { beta } => (0..n).map(|m| ((m as f64 + 0.5) * dt).powf(beta - 0.5)).collect(),
                    Kernel::Tabulated { values } => {
                        if values.len() < n {
                            return input(format!("tabulated kernel has {} < n = {n} entries", values.len()));
                        }
                        values[..n].to_vec()
                    }
                };
                Engine::MovingAverage(MovingAverageEngine::new(&values))
            }
            GaussianKind::LogBm { beta } => {
                let values: Vec<f64> = (0..n)
                    .map(|m| {
                        let r = (m as f64 + 0.5) * dt;
                        r.powf(-0.5) * r.ln().abs().powf(-beta / 2.0 - 0.5)
                    })
                    .collect();
                Engine::MovingAverage(MovingAverageEngine::new(&values))
            }
            GaussianKind::FbmSum { terms } => {
                let mut gens = Vec::with_capacity(terms.len());
                for (k, term) in terms.iter().enumerate() {
                    let weight = term.weight.unwrap_or(1.0 / ((k + 1) * (k + 1)) as f64);
                    let gen = fbm::FgnGenerator::new(term.hurst, n, method, &mut warnings)?;
                    gens.push((weight * norm_scale(term.hurst, FbmNormalization::Unit), gen));
                }
                Engine::Sum(gens)
            }
        };
        Ok(GaussianSampler { dim: model.dim, n, horizon, engine, warnings })
    }

    /// Notes recorded while setting up the generator (e.g. a Cholesky fallback).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn sample(&self, seed: Seed) -> Result<SampledPath> {
        let (n, d) = (self.n, self.dim);
        let dt = self.horizon / n as f64;
        let mut coords: Vec<Vec<f64>> = Vec::with_capacity(d);
        match &self.engine {
            Engine::Ou(ou) => return ou.sample(n, self.horizon, seed),
            _ => {
                for i in 0..d {
                    coords.push(self.coordinate(i as u64, seed, dt));
                }
            }
        }
        let mut values = vec![0.0; (n + 1) * d];
        for (i, c) in coords.iter().enumerate() {
            for (k, v) in c.iter().enumerate() {
                values[k * d + i] = *v;
            }
        }
        SampledPath::new(d, self.horizon, values)
    }

    fn coordinate(&self, coord: u64, seed: Seed, dt: f64) -> Vec<f64> {
        let n = self.n;
        match &self.engine {
            Engine::Brownian => {
                let mut rng = seed.stream(&[purpose::GAUSSIAN, coord]);
                let sd = dt.sqrt();
                cumulative(
                    &(0..n).map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect::<Vec<f64>>(),
                )
            }
            Engine::Fbm { gen, scale } => {
                let mut rng = seed.stream(&[purpose::GAUSSIAN, coord]);
                cumulative(&gen.sample(&mut rng, *scale))
            }
            Engine::Integrated { gen, scale, order } => {
                let mut rng = seed.stream(&[purpose::GAUSSIAN, coord]);
                let mut path = cumulative(&gen.sample(&mut rng, *scale));
                for _ in 0..*order {
                    path = cumulative_trapezoid(&path, dt);
                }
                path
            }
            Engine::MovingAverage(engine) => {
                let mut rng = seed.stream(&[purpose::GAUSSIAN, coord]);
                let sd = dt.sqrt();
                let noise: Vec<f64> =
                    (0..n).map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
                engine.apply(&noise)
            }
            Engine::Sum(gens) => {
                let mut total = vec![0.0; n + 1];
                for (k, (scale, gen)) in gens.iter().enumerate() {
                    let mut rng = seed.stream(&[purpose::SUM_TERM, k as u64, coord]);
                    let path = cumulative(&gen.sample(&mut rng, *scale));
                    for (t, p) in total.iter_mut().zip(path) {
                        *t += p;
                    }
                }
                total
            }
            Engine::Ou(_) => unreachable!("OU paths are sampled jointly"),
        }
    }
}

fn cumulative(increments: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for x in increments {
        acc += x;
        out.push(acc);
    }
    out
}

fn cumulative_trapezoid(path: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(path.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in path.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * dt;
        out.push(acc);
    }
    out
}

/// Exact one-step transition of the generalized Ornstein–Uhlenbeck process.
struct OuEngine {
    dim: usize,
    degree: usize,
    /// `exp(Δ M)` for the augmented system `(x, f, f', ..., f^{(p)})`.
    transition: DMatrix<f64>,
    noise_chol: DMatrix<f64>,
    drift_derivs: Vec<f64>,
    x0: Vec<f64>,
}

impl OuEngine {
    fn new(d: usize, a: &[f64], drift: &[Vec<f64>], sigma: f64, x0: &[f64], dt: f64) -> Result<Self> {
        let a = DMatrix::from_row_slice(d, d, a);
        let degree = drift.iter().map(|p| p.len().saturating_sub(1)).max().unwrap_or(0);
        let size = d + d * (degree + 1);
        let mut m = DMatrix::<f64>::zeros(size, size);
        m.view_mut((0, 0), (d, d)).copy_from(&(-&a));
        for i in 0..d {
            m[(i, d + i)] = 1.0;
        }
        for k in 0..degree {
            for i in 0..d {
                m[(d + k * d + i, d + (k + 1) * d + i)] = 1.0;
            }
        }
        let transition = (m * dt).exp();

        // Van Loan: exp([[A, σ²I], [0, -Aᵀ]] Δ) = [[·, B12], [0, B22]], Q = B22ᵀ B12
        let mut vl = DMatrix::<f64>::zeros(2 * d, 2 * d);
        vl.view_mut((0, 0), (d, d)).copy_from(&a);
        vl.view_mut((0, d), (d, d)).copy_from(&(DMatrix::identity(d, d) * (sigma * sigma)));
        vl.view_mut((d, d), (d, d)).copy_from(&(-a.transpose()));
        let e = (vl * dt).exp();
        let b12 = e.view((0, d), (d, d)).into_owned();
        let b22 = e.view((d, d), (d, d)).into_owned();
        let q = b22.transpose() * b12;
        let q = (&q + q.transpose()) * 0.5;
        let noise_chol = match q.clone().cholesky() {
            Some(c) => c.l(),
            None => return input("OU transition covariance is not positive definite"),
        };

        // derivatives of the drift polynomials at t = 0: f^{(k)}(0) = k! c_k
        let mut drift_derivs = vec![0.0; d * (degree + 1)];
        for (i, poly) in drift.iter().enumerate() {
            let mut fact = 1.0;
            for (k, c) in poly.iter().enumerate() {
                if k > 0 {
                    fact *= k as f64;
                }
                drift_derivs[k * d + i] = fact * c;
            }
        }
        let x0 = if x0.is_empty() { vec![0.0; d] } else { x0.to_vec() };
        Ok(OuEngine { dim: d, degree, transition, noise_chol, drift_derivs, x0 })
    }

    fn sample(&self, n: usize, horizon: f64, seed: Seed) -> Result<SampledPath> {
        let d = self.dim;
        let size = d + d * (self.degree + 1);
        let mut state = nalgebra::DVector::<f64>::zeros(size);
        for i in 0..d {
            state[i] = self.x0[i];
        }
        for (k, v) in self.drift_derivs.iter().enumerate() {
            state[d + k] = *v;
        }
        let mut rngs: Vec<_> = (0..d).map(|i| seed.stream(&[purpose::GAUSSIAN, i as u64])).collect();
        let mut values = Vec::with_capacity((n + 1) * d);
        values.extend_from_slice(&self.x0);
        let mut z = nalgebra::DVector::<f64>::zeros(d);
        for _ in 0..n {
            state = &self.transition * &state;
            for (i, rng) in rngs.iter_mut().enumerate() {
                z[i] = StandardNormal.sample(rng);
            }
            let noise = &self.noise_chol * &z;
            for i in 0..d {
                state[i] += noise[i];
                values.push(state[i]);
            }
        }
        SampledPath::new(d, horizon, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, variance};

    #[test]
    fn model_validation() {
        assert!(GaussianModel::fbm(1, 1.2).validate(1.0).is_err());
        assert!(GaussianModel::log_bm(1, 1.0).validate(1.0).is_err());
        assert!(GaussianModel::log_bm(1, 1.0).validate(0.45).is_ok());
        let bad_sum = GaussianModel::new(
            1,
            GaussianKind::FbmSum {
                terms: vec![FbmTerm { hurst: 0.3, weight: None }, FbmTerm { hurst: 0.4, weight: None }],
            },
        );
        assert!(bad_sum.validate(1.0).is_err());
        assert!(simulate_gaussian(&GaussianModel::brownian(1), 4, 1.0, Seed::new(1)).is_err());
    }

    #[test]
    fn determinism() {
        let m = GaussianModel::fbm(2, 0.3);
        let a = simulate_gaussian(&m, 256, 1.0, Seed::new(9).with_path(3)).unwrap();
        let b = simulate_gaussian(&m, 256, 1.0, Seed::new(9).with_path(3)).unwrap();
        let c = simulate_gaussian(&m, 256, 1.0, Seed::new(9).with_path(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn integrated_fbm_is_trapezoid_of_fbm() {
        let seed = Seed::new(5);
        let w = simulate_gaussian(&GaussianModel::fbm(1, 0.6), 64, 1.0, seed).unwrap();
        let y = simulate_gaussian(
            &GaussianModel::new(
                1,
                GaussianKind::IntegratedFbm { hurst: 0.6, order: 1, normalization: FbmNormalization::Unit },
            ),
            64,
            1.0,
            seed,
        )
        .unwrap();
        let expect = cumulative_trapezoid(&w.coordinate(0), 1.0 / 64.0);
        for (a, b) in y.coordinate(0).iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn moving_average_matches_direct_sum() {
        let m = GaussianModel::new(1, GaussianKind::MovingAverage { kernel: Kernel::Power { beta: 0.8 } });
        let n = 64;
        let dt = 1.0 / n as f64;
        let seed = Seed::new(11);
        let path = simulate_gaussian(&m, n, 1.0, seed).unwrap();
        let mut rng = seed.stream(&[purpose::GAUSSIAN, 0]);
        let noise: Vec<f64> =
            (0..n).map(|_| dt.sqrt() * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect::<Vec<f64>>();
        for k in 0..=n {
            let direct: f64 = (0..k).map(|j| ((k - j) as f64 - 0.5).mul_add(dt, 0.0).powf(0.3) * noise[j]).sum();
            assert!((path.node(k)[0] - direct).abs() < 1e-12, "node {k}");
        }
    }

    #[test]
    fn ou_stationary_variance() {
        // dX = -X dt + dB from the stationary variance 1/2: Var stays 1/2
        let m = GaussianModel::new(
            1,
            GaussianKind::OrnsteinUhlenbeck { a: vec![1.0], drift: vec![], sigma: 1.0, x0: vec![0.0] },
        );
        let sampler = GaussianSampler::new(&m, 16, 4.0).unwrap();
        let ends: Vec<f64> =
            (0..4000).map(|i| sampler.sample(Seed::new(2).with_path(i)).unwrap().node(16)[0]).collect();
        let target = 0.5 * (1.0 - (-8.0_f64).exp());
        assert!(mean(&ends).abs() < 4.0 * (target / 4000.0).sqrt());
        assert!((variance(&ends) - target).abs() < 0.05);
    }

    #[test]
    fn ou_polynomial_drift_mean() {
        // A = 0: mean is x0 + ∫_0^t f = x0 + t + t²
        let m = GaussianModel::new(
            1,
            GaussianKind::OrnsteinUhlenbeck { a: vec![0.0], drift: vec![vec![1.0, 2.0]], sigma: 1e-6, x0: vec![0.5] },
        );
        let p = simulate_gaussian(&m, 16, 1.0, Seed::new(0)).unwrap();
        for k in 0..=16 {
            let t = p.time(k);
            assert!((p.node(k)[0] - (0.5 + t + t * t)).abs() < 1e-4);
        }
    }
}
