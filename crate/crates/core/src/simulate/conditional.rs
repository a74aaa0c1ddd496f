use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::gamma;

use super::{FbmNormalization, GaussianKind, GaussianModel, Kernel};
use crate::error::{input, Error, Result};
use crate::path::SampledPath;

/// `Var(W_1)` of an fBm in the given normalization.
pub fn fbm_variance_factor(hurst: f64, normalization: FbmNormalization) -> f64 {
    match normalization {
        FbmNormalization::Unit => 1.0,
        FbmNormalization::MandelbrotVanNess => 1.0 / (gamma(2.0 * hurst + 1.0) * (PI * hurst).sin()),
    }
}

/// Innovation variance of an `m`-fold integrated fBm given the full past of its
/// driving noise, in Mandelbrot–Van Ness units: `|Δ|^{2(H+m)} / (2(H+m) Γ(H+m+1/2)²)`.
/// For `m = 0` this is `c̃_H |Δ|^{2H}`, `c̃_H = c_H² / (2H)`.
fn fbm_innovation(hurst: f64, order: usize, lag: f64) -> f64 {
    let e = hurst + order as f64;
    lag.powf(2.0 * e) / (2.0 * e * gamma(e + 0.5).powi(2))
}

/// Analytic `Var(X_t | F_s)` as a `d × d` matrix.
///
/// fBm, integrated fBm and fBm sums use the full-past innovation variance, a
/// lower bound for processes started at 0; with [`FbmNormalization::Unit`] the
/// value is divided by [`fbm_variance_factor`] of the other normalization.
pub fn conditional_variance(model: &GaussianModel, s: f64, t: f64) -> Result<DMatrix<f64>> {
    if !(0.0 <= s && s < t) {
        return input(format!("need 0 ≤ s < t, got s = {s}, t = {t}"));
    }
    model.validate(t.max(f64::MIN_POSITIVE))?;
    let d = model.dim;
    let lag = t - s;
    let unit = |h: f64| fbm_variance_factor(h, FbmNormalization::MandelbrotVanNess);
    let scalar = match &model.kind {
        GaussianKind::Brownian => lag,
        GaussianKind::Fbm { hurst, normalization } => {
            let v = fbm_innovation(*hurst, 0, lag);
            match normalization {
                FbmNormalization::Unit => v / unit(*hurst),
                FbmNormalization::MandelbrotVanNess => v,
            }
        }
        GaussianKind::IntegratedFbm { hurst, order, normalization } => {
            let v = fbm_innovation(*hurst, *order, lag);
            match normalization {
                FbmNormalization::Unit => v / unit(*hurst),
                FbmNormalization::MandelbrotVanNess => v,
            }
        }
        GaussianKind::MovingAverage { kernel: Kernel::Power { beta } } => lag.powf(2.0 * beta) / (2.0 * beta),
        GaussianKind::MovingAverage { kernel: Kernel::Tabulated { .. } } => {
            return Err(Error::Unsupported("no closed form for a tabulated kernel".into()))
        }
        GaussianKind::LogBm { beta } => {
            if lag >= 1.0 {
                return input("log-Brownian conditional variance needs t - s < 1");
            }
            lag.ln().abs().powf(-beta) / beta
        }
        GaussianKind::FbmSum { terms } => terms
            .iter()
            .enumerate()
            .map(|(k, term)| {
                let w = term.weight.unwrap_or(1.0 / ((k + 1) * (k + 1)) as f64);
                w * w * fbm_innovation(term.hurst, 0, lag) / unit(term.hurst)
            })
            .sum(),
        GaussianKind::OrnsteinUhlenbeck { a, sigma, .. } => {
            let a = DMatrix::from_row_slice(d, d, a);
            let mut vl = DMatrix::<f64>::zeros(2 * d, 2 * d);
            vl.view_mut((0, 0), (d, d)).copy_from(&a);
            vl.view_mut((0, d), (d, d)).copy_from(&(DMatrix::identity(d, d) * (sigma * sigma)));
            vl.view_mut((d, d), (d, d)).copy_from(&(-a.transpose()));
            let e = (vl * lag).exp();
            let q = e.view((d, d), (d, d)).transpose() * e.view((0, d), (d, d));
            return Ok((&q + q.transpose()) * 0.5);
        }
    };
    Ok(DMatrix::identity(d, d) * scalar)
}

/// Monte-Carlo estimate of `Var(X_t | X_{h}, h ∈ history)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalVariance {
    pub matrix: DMatrix<f64>,
    pub samples: usize,
    pub warnings: Vec<String>,
}

/// Residual covariance of `X_{t}` after least-squares regression (with
/// intercept) on the values at the `history` nodes; all nodes are grid indices.
pub fn empirical_conditional_variance(
    samples: &[SampledPath],
    s: usize,
    t: usize,
    history: &[usize],
) -> Result<ConditionalVariance> {
    let m = samples.len();
    if m < 200 {
        return input(format!("need at least 200 samples, got {m}"));
    }
    let first = &samples[0];
    for p in samples {
        first.check_same_grid(p)?;
    }
    if !(s < t && t <= first.n()) {
        return input(format!("need s < t ≤ n, got s = {s}, t = {t}"));
    }
    if history.iter().any(|&h| h > s) {
        return input("history nodes must not exceed s");
    }
    let d = first.dim();
    let p = 1 + d * history.len();
    if m <= p {
        return input("more regressors than samples");
    }
    // centred columns absorb the intercept and keep the normal equations well conditioned
    let q = p - 1;
    let value = |r: usize, c: usize| samples[r].node(history[c / d])[c % d];
    let col_means: Vec<f64> = (0..q).map(|c| (0..m).map(|r| value(r, c)).sum::<f64>() / m as f64).collect();
    let centred = DMatrix::from_fn(m, q, |r, c| value(r, c) - col_means[c]);
    let mut warnings = Vec::new();
    let mut residuals = DMatrix::<f64>::zeros(m, d);
    for i in 0..d {
        let y_mean = samples.iter().map(|s| s.node(t)[i]).sum::<f64>() / m as f64;
        for r in 0..m {
            residuals[(r, i)] = samples[r].node(t)[i] - y_mean;
        }
    }
    if q == 0 {
        let matrix = residuals.transpose() * &residuals / (m - p) as f64;
        return Ok(ConditionalVariance { matrix, samples: m, warnings });
    }
    let mut gram = centred.transpose() * &centred;
    let trace = gram.trace() / q as f64;
    let chol = match gram.clone().cholesky() {
        Some(c) if min_diag_ratio(&c.l()) > 1e-7 => c,
        _ => {
            warnings.push("singular history design; using ridge-regularized solve".into());
            for i in 0..q {
                gram[(i, i)] += 1e-8 * trace.max(f64::MIN_POSITIVE);
            }
            gram.cholesky().ok_or_else(|| Error::Resource("regularized design still singular".into()))?
        }
    };
    for i in 0..d {
        let y = DVector::from_fn(m, |r, _| residuals[(r, i)]);
        let fitted = &centred * chol.solve(&(centred.transpose() * &y));
        for r in 0..m {
            residuals[(r, i)] -= fitted[r];
        }
    }
    let matrix = residuals.transpose() * &residuals / (m - p) as f64;
    Ok(ConditionalVariance { matrix, samples: m, warnings })
}

fn min_diag_ratio(l: &DMatrix<f64>) -> f64 {
    let diag: Vec<f64> = (0..l.nrows()).map(|i| l[(i, i)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::FbmTerm;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn offset_target_leaves_residual_variance_unchanged() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let paths: Vec<SampledPath> = (0..4000)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                let e: f64 = StandardNormal.sample(&mut rng);
                SampledPath::new(1, 1.0, vec![0.0, x, 50.0 + 2.0 * x + 0.5 * e]).unwrap()
            })
            .collect();
        let v = empirical_conditional_variance(&paths, 1, 2, &[1]).unwrap().matrix[(0, 0)];
        assert!((v - 0.25).abs() < 0.02, "{v}");
        let raw = empirical_conditional_variance(&paths, 1, 2, &[]).unwrap().matrix[(0, 0)];
        assert!((raw - 4.25).abs() < 0.3, "{raw}");
    }

    #[test]
    fn mvn_variance_factor_by_quadrature() {
        // c_H² (1/(2H) + ∫_0^∞ ((1+u)^{H-1/2} - u^{H-1/2})² du)
        for &h in &[0.3, 0.5, 0.7] {
            let ch = 1.0 / gamma(h + 0.5);
            let g = |u: f64| ((1.0 + u).powf(h - 0.5) - u.powf(h - 0.5)).powi(2);
            // u = v^4 on [0, 1], u = y^{-4} on the tail
            let head = simpson(|v: f64| if v == 0.0 { 0.0 } else { g(v.powi(4)) * 4.0 * v.powi(3) }, 0.0, 1.0, 20000);
            let tail = simpson(|y: f64| if y == 0.0 { 0.0 } else { g(y.powi(-4)) * 4.0 * y.powi(-5) }, 0.0, 1.0, 20000);
            let v = ch * ch * (1.0 / (2.0 * h) + head + tail);
            let rel = (v - fbm_variance_factor(h, FbmNormalization::MandelbrotVanNess)).abs() / v;
            assert!(rel < 1e-4, "H={h}: {v}");
        }
        assert_eq!(fbm_variance_factor(0.3, FbmNormalization::Unit), 1.0);
    }

    #[test]
    fn log_bm_closed_form_matches_quadrature() {
        for &(beta, lag) in &[(0.5, 0.01), (1.0, 0.1), (2.0, 0.3)] {
            let l = f64::ln(1.0 / lag);
            // r^{-1}|log r|^{-β-1} dr with r = e^{-y}, y = l e^u
            let q = simpson(
                |u: f64| {
                    let y = l * u.exp();
                    y.powf(-beta - 1.0) * y
                },
                0.0,
                60.0 / beta,
                200000,
            );
            let m = GaussianModel::log_bm(1, beta);
            let v = conditional_variance(&m, 0.1, 0.1 + lag).unwrap()[(0, 0)];
            assert!((v - q).abs() < 1e-10 * v.max(1.0), "β={beta}: {v} vs {q}");
        }
    }

    #[test]
    fn analytic_cases() {
        let b = conditional_variance(&GaussianModel::brownian(2), 0.2, 0.5).unwrap();
        assert!((b - DMatrix::identity(2, 2) * 0.3).norm() < 1e-15);
        let h = 0.7;
        let m =
            GaussianModel::new(1, GaussianKind::Fbm { hurst: h, normalization: FbmNormalization::MandelbrotVanNess });
        let ch = 1.0 / gamma(h + 0.5);
        let v = conditional_variance(&m, 0.0, 0.25).unwrap()[(0, 0)];
        assert!((v - ch * ch / (2.0 * h) * 0.25f64.powf(2.0 * h)).abs() < 1e-14);
        assert!(conditional_variance(&m, 0.3, 0.3).is_err());
        let tab =
            GaussianModel::new(1, GaussianKind::MovingAverage { kernel: Kernel::Tabulated { values: vec![1.0] } });
        assert!(matches!(conditional_variance(&tab, 0.0, 0.1), Err(Error::Unsupported(_))));
        let sum = GaussianModel::new(
            1,
            GaussianKind::FbmSum {
                terms: vec![FbmTerm { hurst: 0.6, weight: Some(1.0) }, FbmTerm { hurst: 0.4, weight: Some(0.5) }],
            },
        );
        let single = |h: f64| conditional_variance(&GaussianModel::fbm(1, h), 0.0, 0.1).unwrap()[(0, 0)];
        let s = conditional_variance(&sum, 0.0, 0.1).unwrap()[(0, 0)];
        assert!((s - (single(0.6) + 0.25 * single(0.4))).abs() < 1e-15);
    }

    #[test]
    fn ou_scalar_closed_form() {
        let m = GaussianModel::new(
            1,
            GaussianKind::OrnsteinUhlenbeck { a: vec![2.0], drift: vec![], sigma: 1.5, x0: vec![] },
        );
        let v = conditional_variance(&m, 0.1, 0.4).unwrap()[(0, 0)];
        let expect = 1.5f64.powi(2) * (1.0 - (-2.0 * 2.0 * 0.3f64).exp()) / (2.0 * 2.0);
        assert!((v - expect).abs() < 1e-12);
    }
}
