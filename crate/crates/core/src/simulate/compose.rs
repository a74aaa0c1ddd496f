use crate::error::{input, Result};
use crate::path::SampledPath;
use crate::young::young_integral;

/// Deterministic composition applied to a path; the operand lives on the same grid.
#[derive(Debug, Clone)]
pub enum Compose {
    /// `f + w`.
    Add(SampledPath),
    /// `f · w` for scalar paths with `inf |f| > 0`.
    Multiply(SampledPath),
    /// `∫_0^· A_s dw_s`; `A` is matrix-valued, flattened row-major with `d` columns.
    YoungIntegral(SampledPath),
}

#[derive(Debug, Clone)]
pub struct ComposeOutput {
    pub path: SampledPath,
    pub warnings: Vec<String>,
}

pub fn controlled_compose(w: &SampledPath, spec: &Compose) -> Result<ComposeOutput> {
    match spec {
        Compose::Add(f) => Ok(ComposeOutput { path: w.add(f)?, warnings: Vec::new() }),
        Compose::Multiply(f) => {
            if w.dim() != 1 || f.dim() != 1 {
                return input("multiplication is defined for scalar paths only");
            }
            w.check_same_grid(f)?;
            let inf = f.values().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            if !(inf > 0.0) {
                return input("multiplier must be bounded away from zero");
            }
            let values = w.values().iter().zip(f.values()).map(|(a, b)| a * b).collect();
            Ok(ComposeOutput { path: SampledPath::new(1, w.horizon(), values)?, warnings: Vec::new() })
        }
        Compose::YoungIntegral(a) => {
            let out = young_integral(a, w)?;
            Ok(ComposeOutput { path: out.path, warnings: out.warnings })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> SampledPath {
        SampledPath::from_scalar_fn(1.0, 64, |t| t * t - 0.3).unwrap()
    }

    #[test]
    fn identities() {
        let w = ramp();
        let zero = SampledPath::constant(&[0.0], 1.0, 64).unwrap();
        let one = SampledPath::constant(&[1.0], 1.0, 64).unwrap();
        assert_eq!(controlled_compose(&w, &Compose::Add(zero)).unwrap().path, w);
        assert_eq!(controlled_compose(&w, &Compose::Multiply(one)).unwrap().path, w);
    }

    #[test]
    fn multiply_rejects_zero() {
        let w = ramp();
        let f = SampledPath::from_scalar_fn(1.0, 64, |t| t - 0.5).unwrap();
        assert!(controlled_compose(&w, &Compose::Multiply(f)).is_err());
    }

    #[test]
    fn young_with_constant_integrand() {
        let w = ramp();
        let a = SampledPath::constant(&[2.5], 1.0, 64).unwrap();
        let z = controlled_compose(&w, &Compose::YoungIntegral(a)).unwrap().path;
        for k in 0..=64 {
            assert!((z.node(k)[0] - 2.5 * (w.node(k)[0] - w.node(0)[0])).abs() < 1e-14);
        }
    }
}
