use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place unnormalized DFT of a row-major array (axis 0 slowest).
pub(crate) fn fft_nd(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    let total: usize = dims.iter().product();
    debug_assert_eq!(total, data.len());
    let mut stride = total;
    for &len in dims {
        stride /= len;
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        if stride == 1 {
            fft.process(data);
            continue;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let block = len * stride;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[outer + inner + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[outer + inner + j * stride] = *v;
                }
            }
        }
    }
}

/// Signed frequency index of DFT bin `k` of length `m`.
pub(crate) fn signed_index(k: usize, m: usize) -> i64 {
    if k < m.div_ceil(2) {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_2d_dft() {
        let dims = [3, 4];
        let data: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let mut fast = data.clone();
        fft_nd(&mut fast, &dims, false);
        for k0 in 0..3 {
            for k1 in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for j0 in 0..3 {
                    for j1 in 0..4 {
                        let a = -2.0 * std::f64::consts::PI * ((k0 * j0) as f64 / 3.0 + (k1 * j1) as f64 / 4.0);
                        acc += data[j0 * 4 + j1] * Complex64::from_polar(1.0, a);
                    }
                }
                assert!((acc - fast[k0 * 4 + k1]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn signed_indices() {
        assert_eq!(signed_index(0, 8), 0);
        assert_eq!(signed_index(3, 8), 3);
        assert_eq!(signed_index(4, 8), -4);
        assert_eq!(signed_index(7, 8), -1);
        assert_eq!(signed_index(2, 5), 2);
        assert_eq!(signed_index(3, 5), -2);
    }
}
