//! Small 2x2 matrix algebra and the dense direct solver used for collocation systems.

use std::ops::{Add, Mul, Neg, Sub};

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Result, RhError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    /// Unit lower-triangular [[1, 0], [l, 1]].
    pub fn lower(l: Complex64) -> Self {
        Mat2([[ONE, ZERO], [l, ONE]])
    }

    /// Unit upper-triangular [[1, u], [0, 1]].
    pub fn upper(u: Complex64) -> Self {
        Mat2([[ONE, u], [ZERO, ONE]])
    }

    pub fn scalar(a: Complex64) -> Self {
        Mat2::diag(a, a)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inv(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let [[a, b], [c, e]] = self.0;
        Some(Mat2([[e / d, -b / d], [-c / d, a / d]]))
    }

    /// Inverse of a unit-determinant matrix without dividing.
    pub fn inv_unimodular(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2([[d, -b], [-c, a]])
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] -= o.0[i][j];
            }
        }
        r
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::ZERO - self
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Mul<Complex64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: Complex64) -> Mat2 {
        let mut r = self;
        r.0.iter_mut().flatten().for_each(|z| *z *= s);
        r
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self * Complex64::new(s, 0.0)
    }
}

/// LU factorization of a dense square complex matrix with partial pivoting.
pub struct DenseLu {
    n: usize,
    lu: PartialPivLu<Complex64>,
    norm1: f64,
}

impl DenseLu {
    /// Factor the row-major `n x n` matrix `a`.
    pub fn factor(a: &[Complex64], n: usize) -> Self {
        assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
        let m = Mat::from_fn(n, n, |i, j| a[i * n + j]);
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        DenseLu {
            n,
            lu: m.partial_piv_lu(),
            norm1,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve for several right-hand sides given as separate columns.
    pub fn solve_columns(&self, rhs: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let b = Mat::from_fn(self.n, rhs.len(), |i, j| rhs[j][i]);
        let x = self.lu.solve(&b);
        (0..rhs.len())
            .map(|j| (0..self.n).map(|i| x[(i, j)]).collect())
            .collect()
    }

    fn solve_one(&self, b: &[Complex64], adjoint: bool) -> Vec<Complex64> {
        let bm = Mat::from_fn(self.n, 1, |i, _| b[i]);
        let x = if adjoint {
            self.lu.solve_adjoint(&bm)
        } else {
            self.lu.solve(&bm)
        };
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Estimate of the 1-norm condition number, ||A||_1 * est(||A^{-1}||_1).
    ///
    /// Hager's power iteration on the dual norm, safeguarded with Higham's
    /// alternating-sign test vector.
    pub fn cond_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let norm1 = |v: &[Complex64]| v.iter().map(|z| z.norm()).sum::<f64>();
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0_f64;
        let mut last_j = usize::MAX;
        for iter in 0..5 {
            let y = self.solve_one(&x, false);
            let e = norm1(&y);
            if !e.is_finite() {
                return f64::INFINITY;
            }
            if iter > 0 && e <= est {
                break;
            }
            est = e;
            let sgn: Vec<Complex64> = y
                .iter()
                .map(|z| {
                    let a = z.norm();
                    if a == 0.0 {
                        ONE
                    } else {
                        z / a
                    }
                })
                .collect();
            let z = self.solve_one(&sgn, true);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let ztx: f64 = z
                .iter()
                .zip(&x)
                .map(|(a, b)| (a.conj() * b).re)
                .sum();
            if iter > 0 && (zmax <= ztx || j == last_j) {
                break;
            }
            last_j = j;
            x = vec![ZERO; n];
            x[j] = ONE;
        }
        let b: Vec<Complex64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
                Complex64::new(s * (1.0 + t), 0.0)
            })
            .collect();
        let alt = 2.0 * norm1(&self.solve_one(&b, false)) / (3.0 * n as f64);
        self.norm1 * est.max(alt)
    }
}

/// Factor, check conditioning against `max_cond`, and solve.
pub fn solve_dense(
    a: &[Complex64],
    n: usize,
    rhs: &[Vec<Complex64>],
    max_cond: f64,
) -> Result<(Vec<Vec<Complex64>>, f64)> {
    let lu = DenseLu::factor(a, n);
    let cond = lu.cond_estimate();
    if !(cond <= max_cond) {
        return Err(RhError::SingularSystem { cond });
    }
    Ok((lu.solve_columns(rhs), cond))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mat2_inverse_roundtrip() {
        let m = Mat2::new(c(1.0, 2.0), c(0.5, -1.0), c(3.0, 0.0), c(-1.0, 1.0));
        let p = m * m.inv().unwrap();
        assert!((p - Mat2::IDENTITY).max_abs() < 1e-14);
    }

    #[test]
    fn unimodular_inverse_matches() {
        let m = Mat2::lower(c(0.3, 1.0)) * Mat2::upper(c(-2.0, 0.5));
        assert!((m.det() - ONE).norm() < 1e-14);
        assert!((m.inv_unimodular() - m.inv().unwrap()).max_abs() < 1e-14);
    }

    #[test]
    fn dense_solve_small() {
        let a = vec![c(4.0, 0.0), c(1.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)];
        let b = vec![vec![c(1.0, 0.0), c(2.0, 0.0)]];
        let (x, cond) = solve_dense(&a, 2, &b, 1e14).unwrap();
        let r0 = a[0] * x[0][0] + a[1] * x[0][1] - b[0][0];
        let r1 = a[2] * x[0][0] + a[3] * x[0][1] - b[0][1];
        assert!(r0.norm() < 1e-14 && r1.norm() < 1e-14);
        assert!(cond > 1.0 && cond < 10.0);
    }

    #[test]
    fn condition_estimate_tracks_exact_value_for_diagonal() {
        let n = 6;
        let mut a = vec![ZERO; n * n];
        for i in 0..n {
            a[i * n + i] = c(10f64.powi(i as i32), 0.0);
        }
        let lu = DenseLu::factor(&a, n);
        let est = lu.cond_estimate();
        assert!((est / 1e5 - 1.0).abs() < 1e-12, "{est}");
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        let b = vec![vec![ONE, ONE]];
        assert!(matches!(
            solve_dense(&a, 2, &b, 1e14),
            Err(RhError::SingularSystem { .. })
        ));
    }
}
