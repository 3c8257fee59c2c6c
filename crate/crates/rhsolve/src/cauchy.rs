//! Cauchy transforms of Chebyshev interpolants on Moebius-mapped segments.
//!
//! Everything is computed in the preimage variable. With F_k(tau) the integral
//! of T_k(s)/(s - tau) over [-1, 1], the transform of a segment density whose
//! pullback has Chebyshev coefficients c_k is
//! sum_k c_k (F_k(tau) - F_k(s_inf)) / (2 pi i), tau = M^{-1}(z),
//! where s_inf = M^{-1}(infinity) (the correction vanishes for straight segments).

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::chebyshev::{coefficient_matrix, moment, values_to_coeffs};
use crate::contour::{ContourSegment, End};
use crate::error::{Result, RhError};
use crate::linalg::Mat2;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// Boundary side relative to the segment orientation: plus is the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

/// How an endpoint target is approached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Approach {
    /// Along the source segment itself, on the given side.
    Along(Side),
    /// Along the ray endpoint + r * direction, r -> 0+ (direction need not be unit).
    Direction(Complex64),
}

/// Where a transform is evaluated, relative to one source segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Off(Complex64),
    /// Interior point with preimage parameter t in (-1, 1).
    Interior { t: f64, side: Side },
    /// Finite part at an endpoint; the log |z - endpoint| term is dropped because
    /// it cancels across a junction bundle that satisfies the zero-sum condition.
    Endpoint { end: End, approach: Approach },
}

/// Minimum distance from the segment below which off-contour evaluation is refused.
pub const NEAR_SINGULAR: f64 = 1e-14;

fn recurrence_forcing(k: usize) -> f64 {
    2.0 * moment(k)
}

/// log((tau - 1)/(tau + 1)), principal branch, accurate for large |tau|.
fn log_ratio(tau: Complex64) -> Complex64 {
    if tau.norm() > 2.0 {
        // -2 sum tau^{-(2m+1)} / (2m+1)
        let w = 1.0 / tau;
        let w2 = w * w;
        let mut term = w;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut m = 0;
        loop {
            let add = term / (2 * m + 1) as f64;
            acc += add;
            if add.norm() <= 1e-17 * acc.norm() || m > 200 {
                break;
            }
            term *= w2;
            m += 1;
        }
        -2.0 * acc
    } else {
        ((tau - 1.0) / (tau + 1.0)).ln()
    }
}

/// F_k(tau) for k < n, tau off [-1, 1].
pub fn basis_off(tau: Complex64, n: usize) -> Vec<Complex64> {
    let mut f = Vec::with_capacity(n);
    if n == 0 {
        return f;
    }
    let f0 = log_ratio(tau);
    f.push(f0);
    if n == 1 {
        return f;
    }
    let root = (tau - 1.0).sqrt() * (tau + 1.0).sqrt();
    let y = 1.0 / (tau + root);
    let ay = y.norm();
    let forward = !(ay < 1.0) || (n as f64) * (1.0 / ay).ln() <= 1e3f64.ln();
    if forward {
        f.push(2.0 + tau * f0);
        for k in 1..n - 1 {
            let next = 2.0 * tau * f[k] - f[k - 1] + recurrence_forcing(k);
            f.push(next);
        }
    } else {
        // G_k = F_k - y F_{k-1} is the bounded solution of G_k = y (G_{k+1} - r_k)
        let extra = (1e-18f64.ln() / ay.ln()).ceil() as usize;
        let top = n + extra;
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        let mut w = Complex64::new(0.0, 0.0);
        for k in (1..=top).rev() {
            w = y * (w - recurrence_forcing(k));
            if k - 1 < n {
                g[k - 1] = w;
            }
        }
        for k in 1..n {
            let next = y * f[k - 1] + g[k - 1];
            f.push(next);
        }
    }
    f
}

/// Boundary values F_k^{+-}(s) at an interior point s of (-1, 1).
pub fn basis_interior(s: f64, side: Side, n: usize) -> Vec<Complex64> {
    let mut f = Vec::with_capacity(n);
    if n == 0 {
        return f;
    }
    let im = match side {
        Side::Plus => PI,
        Side::Minus => -PI,
    };
    let f0 = Complex64::new((-s).ln_1p() - s.ln_1p(), im);
    f.push(f0);
    if n == 1 {
        return f;
    }
    f.push(2.0 + s * f0);
    for k in 1..n - 1 {
        let next = 2.0 * s * f[k] - f[k - 1] + recurrence_forcing(k);
        f.push(next);
    }
    f
}

/// Finite parts of F_k at t = +1 (`End::End`) or t = -1 (`End::Start`).
///
/// Near t = 1, F_k = log(tau - 1) + Fp_k with the principal log. Near t = -1,
/// F_k = -(-1)^k L(tau + 1) + Fq_k with L the log whose argument lies in [0, 2 pi).
/// The returned constants exclude the log terms.
pub fn endpoint_constants(end: End, n: usize) -> Vec<Complex64> {
    let mut f = Vec::with_capacity(n);
    if n == 0 {
        return f;
    }
    let (f0, f1, two_tau) = match end {
        End::End => (
            Complex64::new(-LN_2, 0.0),
            Complex64::new(2.0 - LN_2, 0.0),
            2.0,
        ),
        End::Start => (
            Complex64::new(LN_2, PI),
            Complex64::new(2.0 - LN_2, -PI),
            -2.0,
        ),
    };
    f.push(f0);
    if n > 1 {
        f.push(f1);
    }
    for k in 1..n.saturating_sub(1) {
        let next = two_tau * f[k] - f[k - 1] + recurrence_forcing(k);
        f.push(next);
    }
    f
}

fn wrap_to(angle: f64, lo: f64) -> f64 {
    // wrap into (lo, lo + 2 pi]
    let mut a = angle;
    while a <= lo {
        a += 2.0 * PI;
    }
    while a > lo + 2.0 * PI {
        a -= 2.0 * PI;
    }
    a
}

/// Finite part of F_k at an endpoint of `seg` approached as described.
fn basis_endpoint(seg: &ContourSegment, end: End, approach: Approach, n: usize) -> Vec<Complex64> {
    let tparam = Complex64::new(end.param(), 0.0);
    let dm = seg.map.deriv(tparam);
    let ln_dm = dm.norm().ln();
    let mut f = endpoint_constants(end, n);
    match end {
        End::End => {
            let arg = match approach {
                Approach::Along(Side::Plus) => PI,
                Approach::Along(Side::Minus) => -PI,
                Approach::Direction(d) => wrap_to(d.arg() - dm.arg(), -PI),
            };
            let log_part = Complex64::new(-ln_dm, arg);
            f.iter_mut().for_each(|v| *v += log_part);
        }
        End::Start => {
            let psi = match approach {
                Approach::Along(Side::Plus) => 0.0,
                Approach::Along(Side::Minus) => 2.0 * PI,
                Approach::Direction(d) => {
                    let a = wrap_to(d.arg() - dm.arg(), -PI);
                    if a < 0.0 {
                        a + 2.0 * PI
                    } else {
                        a
                    }
                }
            };
            let log_part = Complex64::new(-ln_dm, psi);
            for (k, v) in f.iter_mut().enumerate() {
                let sgn = if k % 2 == 0 { -1.0 } else { 1.0 };
                *v += sgn * log_part;
            }
        }
    }
    f
}

/// Transform weights g_k with C[v](target) = sum_k c_k g_k for the segment's pullback coefficients.
pub fn segment_basis(seg: &ContourSegment, target: &Target) -> Result<Vec<Complex64>> {
    segment_basis_n(seg, target, seg.n)
}

/// As [`segment_basis`] with an explicit number of coefficients.
pub fn segment_basis_n(seg: &ContourSegment, target: &Target, n: usize) -> Result<Vec<Complex64>> {
    let mut f = match *target {
        Target::Off(z) => {
            let dist = seg.distance(z);
            if dist < NEAR_SINGULAR {
                return Err(RhError::NearSingularTarget {
                    segment: 0,
                    z,
                    distance: dist,
                });
            }
            let tau = seg.map.inverse(z);
            if tau.is_finite() && tau.norm() < 1e150 {
                basis_off(tau, n)
            } else {
                // z is the image of t = infinity, where every F_k vanishes
                vec![Complex64::new(0.0, 0.0); n]
            }
        }
        Target::Interior { t, side } => {
            if !(t > -1.0 && t < 1.0) {
                return Err(RhError::Invalid(format!(
                    "interior parameter {t} outside (-1, 1)"
                )));
            }
            basis_interior(t, side, n)
        }
        Target::Endpoint { end, approach } => basis_endpoint(seg, end, approach, n),
    };
    if let Some(p) = seg.map.pole_preimage() {
        let corr = basis_off(p, n);
        f.iter_mut().zip(corr).for_each(|(a, b)| *a -= b);
    }
    f.iter_mut().for_each(|v| *v /= TWO_PI_I);
    Ok(f)
}

/// Row of the map from nodal values to the transform value at `target`.
pub fn cauchy_row(seg: &ContourSegment, vmat: &[f64], target: &Target) -> Result<Vec<Complex64>> {
    let n = seg.n;
    let g = segment_basis(seg, target)?;
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for (k, gk) in g.iter().enumerate() {
        let vk = &vmat[k * n..(k + 1) * n];
        for (r, &v) in row.iter_mut().zip(vk) {
            *r += gk * v;
        }
    }
    Ok(row)
}

/// Which boundary value a matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixSide {
    Off,
    Plus,
    Minus,
}

/// Dense map from source nodal values to transform values at target points.
#[derive(Debug, Clone)]
pub struct CauchyMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex64>,
    pub side: MatrixSide,
    pub segment: usize,
    pub targets: Vec<Complex64>,
}

impl CauchyMatrix {
    pub fn apply(&self, values: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| {
                self.entries[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(values)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }
}

/// Preimage parameter of `z` if it lies on the open segment (within a relative tolerance).
pub fn on_segment_param(seg: &ContourSegment, z: Complex64) -> Option<f64> {
    let tau = seg.map.inverse(z);
    if tau.is_finite() && tau.im.abs() <= 1e-12 && tau.re.abs() < 1.0 {
        let t = tau.re;
        if (seg.map.eval_real(t) - z).norm() <= 1e-12 * (1.0 + z.norm()) {
            return Some(t);
        }
    }
    None
}

fn classify(seg: &ContourSegment, id: usize, z: Complex64, side: MatrixSide) -> Result<Target> {
    let at_end = [End::Start, End::End]
        .into_iter()
        .find(|&e| (seg.endpoint(e) - z).norm() <= 1e-14 * (1.0 + z.norm()));
    if let Some(e) = at_end {
        return Err(RhError::Invalid(format!(
            "target {z} is an endpoint ({e:?}) of segment {id}; use a junction bundle"
        )));
    }
    match (side, on_segment_param(seg, z)) {
        (MatrixSide::Off, Some(_)) => Err(RhError::NearSingularTarget {
            segment: id,
            z,
            distance: 0.0,
        }),
        (MatrixSide::Plus, Some(t)) => Ok(Target::Interior {
            t,
            side: Side::Plus,
        }),
        (MatrixSide::Minus, Some(t)) => Ok(Target::Interior {
            t,
            side: Side::Minus,
        }),
        (_, None) => Ok(Target::Off(z)),
    }
}

fn tag_segment(e: RhError, id: usize) -> RhError {
    match e {
        RhError::NearSingularTarget { z, distance, .. } => RhError::NearSingularTarget {
            segment: id,
            z,
            distance,
        },
        other => other,
    }
}

/// Dense Cauchy matrix for segment `id` at the given points.
///
/// For `Plus`/`Minus`, points on the segment interior get the corresponding
/// boundary value; points elsewhere get the ordinary off-contour value.
pub fn cauchy_matrix(
    seg: &ContourSegment,
    id: usize,
    targets: &[Complex64],
    side: MatrixSide,
) -> Result<CauchyMatrix> {
    let vmat = coefficient_matrix(seg.n);
    let mut entries = Vec::with_capacity(targets.len() * seg.n);
    for &z in targets {
        let target = classify(seg, id, z, side)?;
        entries.extend(cauchy_row(seg, &vmat, &target).map_err(|e| tag_segment(e, id))?);
    }
    Ok(CauchyMatrix {
        rows: targets.len(),
        cols: seg.n,
        entries,
        side,
        segment: id,
        targets: targets.to_vec(),
    })
}

/// Transform of the interpolant of `values` at an off-contour point.
pub fn cauchy_off(seg: &ContourSegment, values: &[Complex64], z: Complex64) -> Result<Complex64> {
    let c = values_to_coeffs(values);
    let g = segment_basis(seg, &Target::Off(z))?;
    Ok(c.iter().zip(&g).map(|(a, b)| a * b).sum())
}

/// Boundary values of the transform of the interpolant of `values` from the given side.
pub fn cauchy_boundary(
    seg: &ContourSegment,
    values: &[Complex64],
    side: Side,
    targets: &[Complex64],
) -> Result<Vec<Complex64>> {
    let ms = match side {
        Side::Plus => MatrixSide::Plus,
        Side::Minus => MatrixSide::Minus,
    };
    let c = values_to_coeffs(values);
    targets
        .iter()
        .map(|&z| {
            let t = classify(seg, 0, z, ms)?;
            let g = segment_basis(seg, &t)?;
            Ok(c.iter().zip(&g).map(|(a, b)| a * b).sum())
        })
        .collect()
}

/// Transform of a density at a parameter-space target, from precomputed coefficients.
pub fn apply_coeffs(seg: &ContourSegment, coeffs: &[Complex64], target: &Target) -> Result<Complex64> {
    let g = segment_basis_n(seg, target, coeffs.len())?;
    Ok(coeffs.iter().zip(&g).map(|(a, b)| a * b).sum())
}

/// Matrix-valued version of [`apply_coeffs`].
pub fn apply_coeffs_mat(seg: &ContourSegment, coeffs: &[Mat2], target: &Target) -> Result<Mat2> {
    let g = segment_basis_n(seg, target, coeffs.len())?;
    Ok(coeffs
        .iter()
        .zip(&g)
        .fold(Mat2::ZERO, |acc, (c, gk)| acc + *c * *gk))
}

/// One member of a junction bundle: a segment, which of its ends sits at the
/// junction, and its nodal density.
pub struct BundleMember<'a> {
    pub segment: &'a ContourSegment,
    pub end: End,
    pub values: &'a [Complex64],
}

/// Signed zeroth-order zero-sum of a bundle: sum of inward end values minus outward ones.
pub fn zero_sum_defect(bundle: &[BundleMember]) -> Complex64 {
    bundle
        .iter()
        .map(|m| {
            let idx = m.segment.node_index(m.end);
            m.values[idx] * m.end.sign()
        })
        .sum()
}

/// Summed boundary value at a junction, approached along member `along` from `side`.
///
/// The logarithmic terms cancel only when the bundle satisfies the zero-sum
/// condition; a violation is logged and the finite part is returned regardless.
pub fn cauchy_bundle(bundle: &[BundleMember], along: usize, side: Side) -> Result<Complex64> {
    let defect = zero_sum_defect(bundle);
    let scale: f64 = bundle
        .iter()
        .map(|m| m.values[m.segment.node_index(m.end)].norm())
        .sum::<f64>()
        .max(1.0);
    if defect.norm() > 1e-8 * scale {
        log::warn!(
            "junction bundle violates the zero-sum condition (defect {:e}); boundary value diverges",
            defect.norm()
        );
    }
    let target_seg = bundle[along].segment;
    let dir = target_seg.inward_direction(bundle[along].end);
    let mut total = Complex64::new(0.0, 0.0);
    for (i, m) in bundle.iter().enumerate() {
        let approach = if i == along {
            Approach::Along(side)
        } else {
            // off-segment sources see the approach direction rotated toward the side
            Approach::Direction(dir)
        };
        let coeffs = values_to_coeffs(m.values);
        total += apply_coeffs(
            m.segment,
            &coeffs,
            &Target::Endpoint {
                end: m.end,
                approach,
            },
        )?;
    }
    Ok(total)
}
