use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Result};
use crate::path::SampledPath;
use crate::spectral::{dot, prefix_at, SpectralField};

/// `x_t = x_0 + ∫_0^t b(x_s) ds + w_t` with `b_i` a finite Fourier sum per component.
#[derive(Debug, Clone)]
pub struct OdeProblem {
    pub drift: Vec<SpectralField>,
    pub path: SampledPath,
    pub x0: Vec<f64>,
    /// The scheme takes `2^level` steps.
    pub level: usize,
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    /// `x` at the scheme nodes.
    pub x: SampledPath,
    /// `θ = x - (w - w_0)` at the scheme nodes.
    pub theta: SampledPath,
    /// `|θ_{k+1} - θ_k|` per step.
    pub step_increments: Vec<f64>,
    /// Step at which `θ` left the a-priori bound or became non-finite.
    pub blowup: Option<usize>,
    /// `max_k Σ_j |c_j Φ_{t_k,t_{k+1}}(ξ_j)| |ξ_j| / Δ`: Lipschitz rate of the
    /// averaged field per unit time.
    pub lipschitz_rate: f64,
}

/// Averaged coefficients `c_j Φ_{t_k, t_{k+1}}(ξ_j)` per component, term and step.
struct AveragedSteps {
    xi: Vec<Vec<Vec<f64>>>,
    coef: Vec<Vec<Vec<Complex64>>>,
}

fn averaged_steps(problem: &OdeProblem, nodes: &[usize]) -> AveragedSteps {
    let mut xi = Vec::new();
    let mut coef = Vec::new();
    for field in &problem.drift {
        let per_term: Vec<Vec<Complex64>> = field
            .terms
            .par_iter()
            .map(|term| {
                let p = prefix_at(&problem.path, &term.xi, nodes);
                p.windows(2).map(|w| term.c * (w[1] - w[0])).collect()
            })
            .collect();
        xi.push(field.terms.iter().map(|t| t.xi.clone()).collect());
        coef.push(per_term);
    }
    AveragedSteps { xi, coef }
}

fn validate(problem: &OdeProblem) -> Result<()> {
    let d = problem.path.dim();
    if problem.drift.len() != d || problem.drift.iter().any(|f| f.dim != d) {
        return input("drift needs one field of the path dimension per component");
    }
    if problem.x0.len() != d {
        return input("initial value has the wrong dimension");
    }
    if problem.level > 30 || !problem.path.n().is_multiple_of(1usize << problem.level) {
        return input(format!("path steps not divisible by 2^{}", problem.level));
    }
    Ok(())
}

fn run(problem: &OdeProblem, steps: &AveragedSteps, x0: &[f64]) -> Result<OdeSolution> {
    let d = problem.path.dim();
    let parts = 1usize << problem.level;
    let stride = problem.path.n() >> problem.level;
    let dt = problem.path.horizon() / parts as f64;
    let total_coef: f64 = problem.drift.iter().flat_map(|f| f.terms.iter().map(|t| t.c.norm())).sum();
    let bound = 10.0 * (total_coef * problem.path.horizon() + 1.0);
    let mut theta = x0.to_vec();
    let mut theta_values = Vec::with_capacity((parts + 1) * d);
    theta_values.extend_from_slice(&theta);
    let mut increments = Vec::with_capacity(parts);
    let mut blowup = None;
    let mut lipschitz_rate: f64 = 0.0;
    let mut next = vec![0.0; d];
    for k in 0..parts {
        let mut rate = 0.0;
        for i in 0..d {
            let mut acc = 0.0;
            for (xi, c) in steps.xi[i].iter().zip(&steps.coef[i]) {
                let a = c[k];
                acc += (a * Complex64::from_polar(1.0, dot(xi, &theta))).re;
                rate += a.norm() * dot(xi, xi).sqrt();
            }
            next[i] = theta[i] + acc;
        }
        lipschitz_rate = lipschitz_rate.max(rate / dt);
        let inc = next.iter().zip(&theta).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let far = next.iter().zip(x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if blowup.is_none() && (!inc.is_finite() || far > bound) {
            blowup = Some(k);
        }
        if blowup.is_none() {
            theta.copy_from_slice(&next);
        }
        increments.push(if blowup.is_none() { inc } else { 0.0 });
        theta_values.extend_from_slice(&theta);
    }
    let w0 = problem.path.node(0);
    let mut x_values = theta_values.clone();
    for k in 0..=parts {
        let w = problem.path.node(k * stride);
        for i in 0..d {
            x_values[k * d + i] += w[i] - w0[i];
        }
    }
    let horizon = problem.path.horizon();
    Ok(OdeSolution {
        x: SampledPath::new(d, horizon, x_values)?,
        theta: SampledPath::new(d, horizon, theta_values)?,
        step_increments: increments,
        blowup,
        lipschitz_rate,
    })
}

fn scheme_nodes(problem: &OdeProblem) -> Vec<usize> {
    let stride = problem.path.n() >> problem.level;
    (0..=(1usize << problem.level)).map(|k| k * stride).collect()
}

/// Phase-shifted Euler scheme `θ_{k+1} = θ_k + (T^w_{t_k,t_{k+1}} b)(θ_k)`,
/// `x_{t_k} = θ_k + w_{t_k} - w_0`, with the averaged fields evaluated exactly
/// from `Φ`.
pub fn solve_ode(problem: &OdeProblem) -> Result<OdeSolution> {
    validate(problem)?;
    let steps = averaged_steps(problem, &scheme_nodes(problem));
    run(problem, &steps, &problem.x0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowRun {
    pub epsilon: f64,
    pub sup_ratio: f64,
    pub blowup: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowReport {
    pub runs: Vec<FlowRun>,
    /// Largest over smallest `sup_ratio` across the perturbation sizes.
    pub spread: f64,
    /// Grönwall bound `exp(L T)` from the measured Lipschitz rate.
    pub gronwall_bound: f64,
    pub base_blowup: Option<usize>,
}

/// Solves from `x_0` and from `x_0 + ε e_1` for each `ε` and reports
/// `sup_t |x^ε_t - x_t| / ε`.
pub fn flow_diagnostic(problem: &OdeProblem, epsilons: &[f64]) -> Result<FlowReport> {
    if epsilons.len() < 2 || epsilons.iter().any(|e| !(*e > 0.0)) {
        return input("need at least two positive perturbation sizes");
    }
    validate(problem)?;
    let steps = averaged_steps(problem, &scheme_nodes(problem));
    let base = run(problem, &steps, &problem.x0)?;
    let runs: Vec<FlowRun> = epsilons
        .par_iter()
        .map(|&eps| {
            let mut x0 = problem.x0.clone();
            x0[0] += eps;
            let sol = run(problem, &steps, &x0)?;
            let d = problem.x0.len();
            let sup = sol
                .x
                .values()
                .chunks(d)
                .zip(base.x.values().chunks(d))
                .map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            Ok(FlowRun { epsilon: eps, sup_ratio: sup / eps, blowup: sol.blowup })
        })
        .collect::<Result<_>>()?;
    let max = runs.iter().map(|r| r.sup_ratio).fold(0.0, f64::max);
    let min = runs.iter().map(|r| r.sup_ratio).fold(f64::INFINITY, f64::min);
    Ok(FlowReport {
        runs,
        spread: if min > 0.0 { max / min } else { f64::INFINITY },
        gronwall_bound: (base.lipschitz_rate * problem.path.horizon()).exp(),
        base_blowup: base.blowup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralTerm;

    fn zero_path() -> SampledPath {
        SampledPath::constant(&[0.0], 1.0, 256).unwrap()
    }

    #[test]
    fn zero_drift_follows_path() {
        let w = SampledPath::from_scalar_fn(1.0, 256, |t| (7.0 * t).sin()).unwrap();
        let p = OdeProblem { drift: vec![SpectralField::constant(1, 0.0)], path: w.clone(), x0: vec![0.4], level: 8 };
        let sol = solve_ode(&p).unwrap();
        for k in 0..=256 {
            assert!((sol.x.node(k)[0] - (0.4 + w.node(k)[0])).abs() < 1e-15);
        }
        let flow = flow_diagnostic(&p, &[1e-3, 1e-6]).unwrap();
        for r in flow.runs {
            assert!((r.sup_ratio - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_drift_is_exact() {
        let w = SampledPath::from_scalar_fn(1.0, 256, |t| t * t).unwrap();
        let p = OdeProblem { drift: vec![SpectralField::constant(1, 1.5)], path: w.clone(), x0: vec![0.0], level: 6 };
        let sol = solve_ode(&p).unwrap();
        for k in 0..=64 {
            let t = k as f64 / 64.0;
            assert!((sol.x.node(k)[0] - (1.5 * t + t * t)).abs() < 1e-13);
        }
    }

    #[test]
    fn euler_step_definition_without_noise() {
        let half = vec![SpectralTerm { xi: vec![3.0], c: Complex64::new(0.2, 0.1) }];
        let b = SpectralField::real_from_half(1, half).unwrap();
        let p = OdeProblem { drift: vec![b.clone()], path: zero_path(), x0: vec![0.1], level: 8 };
        let sol = solve_ode(&p).unwrap();
        let dt = 1.0 / 256.0;
        for k in 0..256 {
            let x = sol.x.node(k)[0];
            assert!((sol.x.node(k + 1)[0] - x - dt * b.eval_real(&[x])).abs() < 1e-15);
        }
    }
}
