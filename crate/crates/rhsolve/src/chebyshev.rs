//! Chebyshev points of the second kind and the transforms between nodal values
//! and Chebyshev coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, RhError};

/// Chebyshev points of the second kind on [-1, 1], ascending, endpoints exact.
pub fn chebyshev_points(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(RhError::InvalidOrder(n));
    }
    let m = (n - 1) as f64;
    // sin form keeps the grid exactly antisymmetric with exact 0 and +-1
    Ok((0..n)
        .map(|j| (PI * (2.0 * j as f64 - m) / (2.0 * m)).sin())
        .collect())
}

/// cos(pi * p / m) with the argument reduced first.
fn cos_ratio(p: usize, m: usize) -> f64 {
    let r = p % (2 * m);
    (PI * r as f64 / m as f64).cos()
}

/// Row-major `n x n` matrix taking nodal values (ascending grid) to Chebyshev
/// coefficients of the interpolant.
pub fn coefficient_matrix(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let m = n - 1;
    let mut v = vec![0.0; n * n];
    for k in 0..n {
        let hk = if k == 0 || k == m { 0.5 } else { 1.0 };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..n {
            let wj = if j == 0 || j == m { 0.5 } else { 1.0 };
            v[k * n + j] = 2.0 / m as f64 * wj * hk * sign * cos_ratio(k * j, m);
        }
    }
    v
}

/// Chebyshev coefficients of the interpolant through `values` on the ascending grid.
pub fn values_to_coeffs(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    if n == 1 {
        return values.to_vec();
    }
    let m = n - 1;
    // one cosine table of length 2m serves all (k, j) pairs
    let table: Vec<f64> = (0..2 * m).map(|p| cos_ratio(p, m)).collect();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, f) in values.iter().enumerate() {
            let wj = if j == 0 || j == m { 0.5 } else { 1.0 };
            acc += f * (wj * table[(k * j) % (2 * m)]);
        }
        let hk = if k == 0 || k == m { 0.5 } else { 1.0 };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *ck = acc * (2.0 / m as f64 * hk * sign);
    }
    c
}

/// FFT version of [`values_to_coeffs`] for long grids.
pub fn values_to_coeffs_fft(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    if n < 3 {
        return values_to_coeffs(values);
    }
    let m = n - 1;
    // descending grid cos(pi j / m), evenly extended to length 2m
    let mut buf: Vec<Complex64> = Vec::with_capacity(2 * m);
    buf.extend(values.iter().rev());
    buf.extend(values[1..m].iter());
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_forward(2 * m).process(&mut buf);
    let mut c: Vec<Complex64> = buf[..n].iter().map(|v| v / m as f64).collect();
    c[0] *= 0.5;
    c[m] *= 0.5;
    c
}

/// Integral over [-1, 1] of the interpolant through `values` (FFT transform).
pub fn integrate_values(values: &[Complex64]) -> Complex64 {
    values_to_coeffs_fft(values)
        .iter()
        .enumerate()
        .map(|(k, c)| c * moment(k))
        .sum()
}

/// Evaluate sum c_k T_k(x) by Clenshaw's recurrence.
pub fn clenshaw(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    match coeffs.first() {
        Some(&c0) => c0 + x * b1 - b2,
        None => Complex64::new(0.0, 0.0),
    }
}

/// Coefficients of the derivative of sum c_k T_k.
pub fn derivative_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * coeffs[k];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// Integral of T_k over [-1, 1].
pub fn moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        2.0 / (1.0 - (k * k) as f64)
    }
}

/// Weights w_j with sum w_j f_j equal to the integral of the interpolant over [-1, 1].
pub fn integration_weights(n: usize) -> Vec<f64> {
    let v = coefficient_matrix(n);
    (0..n)
        .map(|j| (0..n).map(|k| moment(k) * v[k * n + j]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn small_grids() {
        assert_eq!(chebyshev_points(2).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(chebyshev_points(3).unwrap(), vec![-1.0, 0.0, 1.0]);
        let p = chebyshev_points(5).unwrap();
        let h = 0.5f64.sqrt();
        let want = [-1.0, -h, 0.0, h, 1.0];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(p[0], -1.0);
        assert_eq!(p[4], 1.0);
    }

    #[test]
    fn order_below_two_is_rejected() {
        assert_eq!(chebyshev_points(1), Err(RhError::InvalidOrder(1)));
        assert_eq!(chebyshev_points(0), Err(RhError::InvalidOrder(0)));
    }

    #[test]
    fn grid_matches_cosine_formula() {
        for n in [2, 7, 16, 33] {
            let p = chebyshev_points(n).unwrap();
            for (j, x) in p.iter().enumerate() {
                let want = -(PI * j as f64 / (n - 1) as f64).cos();
                assert!((x - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn coefficients_recover_polynomial() {
        // 3 T_0 - 2 T_3 + 0.5 T_6
        let n = 9;
        let x = chebyshev_points(n).unwrap();
        let vals: Vec<Complex64> = x
            .iter()
            .map(|&t| {
                let th = t.acos();
                c(3.0 - 2.0 * (3.0 * th).cos() + 0.5 * (6.0 * th).cos())
            })
            .collect();
        let co = values_to_coeffs(&vals);
        let mut want = vec![c(0.0); n];
        want[0] = c(3.0);
        want[3] = c(-2.0);
        want[6] = c(0.5);
        for (a, b) in co.iter().zip(&want) {
            assert!((a - b).norm() < 1e-14);
        }
        let v = coefficient_matrix(n);
        for k in 0..n {
            let ck: Complex64 = (0..n).map(|j| vals[j] * v[k * n + j]).sum();
            assert!((ck - co[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn fft_transform_matches_direct() {
        for n in [3, 4, 17, 64] {
            let x = chebyshev_points(n).unwrap();
            let vals: Vec<Complex64> = x.iter().map(|&t| Complex64::new((3.0 * t).sin(), t.exp())).collect();
            let a = values_to_coeffs(&vals);
            let b = values_to_coeffs_fft(&vals);
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn clenshaw_interpolates_nodes() {
        let n = 12;
        let x = chebyshev_points(n).unwrap();
        let vals: Vec<Complex64> = x.iter().map(|&t| Complex64::new(t.exp(), t * t)).collect();
        let co = values_to_coeffs(&vals);
        for (t, f) in x.iter().zip(&vals) {
            assert!((clenshaw(&co, c(*t)) - f).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_t3() {
        // T_3' = 3 T_0 + 6 T_2
        let co = vec![c(0.0), c(0.0), c(0.0), c(1.0)];
        let d = derivative_coeffs(&co);
        assert_eq!(d.len(), 3);
        assert!((d[0] - c(3.0)).norm() < 1e-15);
        assert!(d[1].norm() < 1e-15);
        assert!((d[2] - c(6.0)).norm() < 1e-15);
    }

    #[test]
    fn integrate_values_matches_weights() {
        let n = 33;
        let x = chebyshev_points(n).unwrap();
        let vals: Vec<Complex64> = x.iter().map(|&t| Complex64::new(t.cos(), (2.0 * t).exp())).collect();
        let w = integration_weights(n);
        let a: Complex64 = vals.iter().zip(&w).map(|(v, w)| v * w).sum();
        assert!((a - integrate_values(&vals)).norm() < 1e-14);
    }

    #[test]
    fn weights_integrate_exponential() {
        let n = 20;
        let w = integration_weights(n);
        let x = chebyshev_points(n).unwrap();
        let s: f64 = w.iter().zip(&x).map(|(w, x)| w * x.exp()).sum();
        assert!((s - (1f64.exp() - (-1f64).exp())).abs() < 1e-14);
    }
}
