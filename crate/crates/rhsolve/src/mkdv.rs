//! Modified KdV, u_t - 6u^2 u_x + u_xxx = 0, in the region x = -12 c^2 t^{1/3}.
//!
//! In k = z t^{1/3} / c the phase is 8ic^3(k^3 - 3k) with stationary points +-1.
//! The real-line jump G = U L is kept on [-1, 1] and lensed off the line for
//! |k| > 1, with L on the rays above and U on the rays below. The contour in k
//! does not depend on (x, t, c); only the jump samples do.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::contour::{ContourSegment, ContourSet};
use crate::error::{Result, RhError};
use crate::linalg::Mat2;
use crate::scaled::{solve_iterative, truncate, Group, Ray, ScaledProblem, ScaledSolution, DEFAULT_EPS};
use crate::sie::{product_defects, JumpFunction};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

type RhoEval = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// Reflection coefficient rho, analytic in |Im z| < strip.
#[derive(Clone)]
pub struct ReflectionCoefficient {
    eval: Arc<RhoEval>,
    pub strip: f64,
    pub label: String,
}

impl std::fmt::Debug for ReflectionCoefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReflectionCoefficient")
            .field("strip", &self.strip)
            .field("label", &self.label)
            .finish()
    }
}

impl ReflectionCoefficient {
    pub fn new<F>(f: F, strip: f64, label: impl Into<String>) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        ReflectionCoefficient {
            eval: Arc::new(f),
            strip,
            label: label.into(),
        }
    }

    /// (i/4) e^{-z^2}: entire and rapidly decaying on the real line.
    pub fn builtin() -> Self {
        ReflectionCoefficient::new(|z| c(0.0, 0.25) * (-z * z).exp(), f64::INFINITY, "builtin")
    }

    pub fn zero() -> Self {
        ReflectionCoefficient::new(|_| c(0.0, 0.0), f64::INFINITY, "zero")
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }
}

/// theta(z) = 2izx + 8iz^3 t.
pub fn mkdv_theta(z: Complex64, x: f64, t: f64) -> Complex64 {
    c(0.0, 2.0 * x) * z + c(0.0, 8.0 * t) * z * z * z
}

/// theta(k c t^{-1/3}) on the ray x = -12 c^2 t^{1/3}: 8ic^3(k^3 - 3k).
pub fn scaled_theta(k: Complex64, cc: f64) -> Complex64 {
    c(0.0, 8.0 * cc.powi(3)) * (k * k * k - 3.0 * k)
}

/// Default length of the lens rays in k.
pub const RAY_LENGTH: f64 = 2.0;

/// ||G - I|| at a ray end above which assembly warns. At c = 3/2 the ends sit near
/// e^{-477}; for c below about 0.6 a length of 2 no longer reaches the identity.
pub const RAY_END_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MKdVProblem {
    pub t: f64,
    pub c: f64,
    /// -12 c^2 t^{1/3}.
    pub x: f64,
    /// c t^{-1/3}.
    pub z0: f64,
    /// Points per segment.
    pub n: usize,
    pub ray_length: f64,
    /// Shorten the rays where the jump is within eps of I. Off by default so the
    /// contour stays the same for every (t, c).
    pub truncate: bool,
}

impl MKdVProblem {
    pub fn new(t: f64, cc: f64, n: usize) -> Result<Self> {
        if !(t > 0.0) || !(cc > 0.0) || !t.is_finite() || !cc.is_finite() {
            return Err(RhError::Invalid(format!("mKdV needs t > 0 and c > 0, got t = {t}, c = {cc}")));
        }
        if n < 2 {
            return Err(RhError::InvalidOrder(n));
        }
        let t3 = t.cbrt();
        Ok(MKdVProblem {
            t,
            c: cc,
            x: -12.0 * cc * cc * t3,
            z0: cc / t3,
            n,
            ray_length: RAY_LENGTH,
            truncate: false,
        })
    }

    /// The problem through (x, t), x < 0, with c = (-x / (12 t^{1/3}))^{1/2}.
    pub fn from_xt(x: f64, t: f64, n: usize) -> Result<Self> {
        if !(x < 0.0) || !(t > 0.0) {
            return Err(RhError::Invalid(format!("need x < 0 and t > 0, got x = {x}, t = {t}")));
        }
        let mut p = MKdVProblem::new(t, (-x / (12.0 * t.cbrt())).sqrt(), n)?;
        p.x = x;
        Ok(p)
    }

    /// theta(k z0) with the problem's own x and t.
    pub fn theta_k(&self, k: Complex64) -> Complex64 {
        mkdv_theta(k * self.z0, self.x, self.t)
    }
}

/// Which factor of G = U L a segment carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Interval,
    Lower,
    Upper,
}

/// Direction at k0 = +-1 along which e^{s theta} decays fastest, pointing away from [-1, 1].
fn descent_direction(k0: f64, s: f64, cc: f64) -> Complex64 {
    // theta'' = 48 i c^3 k; s theta'' w^2 real negative
    let h = c(0.0, 48.0 * cc.powi(3) * k0) * s;
    let phi = (PI - h.arg()) / 2.0;
    let d = Complex64::from_polar(1.0, phi);
    if d.re * k0 < 0.0 {
        -d
    } else {
        d
    }
}

struct Jumps {
    problem: MKdVProblem,
    rho: ReflectionCoefficient,
}

impl Jumps {
    fn rho(&self, k: Complex64) -> Complex64 {
        self.rho.eval(k * self.problem.z0)
    }

    fn eval(&self, piece: Piece, k: Complex64) -> Mat2 {
        let th = self.problem.theta_k(k);
        match piece {
            Piece::Interval => {
                let (r, rm) = (self.rho(k), self.rho(-k));
                Mat2::new(1.0 - r * rm, -rm * (-th).exp(), r * th.exp(), c(1.0, 0.0))
            }
            Piece::Lower => Mat2::lower(self.rho(k) * th.exp()),
            Piece::Upper => Mat2::upper(-self.rho(-k) * (-th).exp()),
        }
    }
}

/// Single group in k: [-1, 1] plus four rays, oriented left to right.
pub fn build_mkdv_rhp(problem: &MKdVProblem, rho: &ReflectionCoefficient) -> Result<ScaledProblem> {
    let p = *problem;
    let jumps = Arc::new(Jumps {
        problem: p,
        rho: rho.clone(),
    });
    let n = p.n;
    let mut segs = vec![ContourSegment::line(c(-1.0, 0.0), c(1.0, 0.0), n)?];
    let mut pieces = vec![Piece::Interval];
    // directions use the ray's own c = 1 geometry so the contour never moves
    for k0 in [-1.0, 1.0] {
        for (piece, s) in [(Piece::Lower, 1.0), (Piece::Upper, -1.0)] {
            let d = descent_direction(k0, s, 1.0);
            let origin = c(k0, 0.0);
            let seg = if p.truncate {
                let jj = jumps.clone();
                let ray = Ray {
                    origin,
                    direction: d,
                    max_length: p.ray_length,
                };
                match truncate(&ray, |k| jj.eval(piece, k), DEFAULT_EPS, n) {
                    Ok(s) => s,
                    Err(RhError::TruncationFailure { .. }) => Some(ContourSegment::line(origin, origin + d * p.ray_length, n)?),
                    Err(e) => return Err(e),
                }
            } else {
                Some(ContourSegment::line(origin, origin + d * p.ray_length, n)?)
            };
            let Some(seg) = seg else { continue };
            let far = if seg.start() == origin { seg.end() } else { seg.start() };
            let tail = (jumps.eval(piece, far) - Mat2::IDENTITY).max_abs();
            if tail > RAY_END_TOLERANCE {
                log::warn!("mKdV ray from {k0} ends with ||G - I|| = {tail:.1e}; lengthen the rays");
            }
            let max_im = seg.start().im.abs().max(seg.end().im.abs()) * p.z0;
            if !(max_im < rho.strip) {
                return Err(RhError::Analyticity { width: rho.strip });
            }
            // rays at -1 arrive, so the lensed jump keeps the factor's sign
            segs.push(if k0 < 0.0 { seg.reversed() } else { seg });
            pieces.push(piece);
        }
    }
    let omega = ContourSet::new(segs)?;
    let jj = jumps.clone();
    let jump = JumpFunction::new(move |s, k| jj.eval(pieces[s], k)).with_tag("mkdv");
    for (j, d) in omega.junctions.iter().zip(product_defects(&omega, &jump)) {
        if j.incident.len() > 1 && !(d <= 1e-8) {
            return Err(RhError::ProductDefect {
                junction: j.point,
                defect: d,
            });
        }
    }
    ScaledProblem::new(vec![Group::new(omega, c(1.0, 0.0), c(0.0, 0.0), jump).with_label("k")])
}

/// u(x, t) = 2i z0 lim k Phi_12(k).
pub fn mkdv_reconstruct(solution: &ScaledSolution, problem: &MKdVProblem) -> Complex64 {
    c(0.0, 2.0 * problem.z0) * solution.residue_at_infinity().get(0, 1)
}

#[derive(Debug, Clone)]
pub struct MKdVSolution {
    pub problem: MKdVProblem,
    pub solution: ScaledSolution,
    pub u: Complex64,
}

pub fn solve_mkdv(problem: &MKdVProblem, rho: &ReflectionCoefficient) -> Result<MKdVSolution> {
    let sp = build_mkdv_rhp(problem, rho)?;
    let solution = solve_iterative(&sp)?;
    let u = mkdv_reconstruct(&solution, problem);
    Ok(MKdVSolution {
        problem: *problem,
        solution,
        u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_at_stationary_point() {
        let (t, cc) = (10.0f64, 1.5);
        let p = MKdVProblem::new(t, cc, 8).unwrap();
        let th = mkdv_theta(c(p.z0, 0.0), p.x, t);
        assert!((th - c(0.0, -16.0 * cc.powi(3))).norm() < 1e-12);
        assert_eq!(mkdv_theta(c(0.0, 0.0), p.x, t), c(0.0, 0.0));
        let h = 1e-6;
        for z0 in [p.z0, -p.z0] {
            let d = (mkdv_theta(c(z0 + h, 0.0), p.x, t) - mkdv_theta(c(z0 - h, 0.0), p.x, t)) / (2.0 * h);
            assert!(d.norm() < 1e-6, "{d}");
        }
    }

    #[test]
    fn scaled_theta_consistent() {
        let (t, cc) = (37.0f64, 0.8);
        let p = MKdVProblem::new(t, cc, 8).unwrap();
        for k in [c(0.3, 0.2), c(-1.4, 0.7), c(1.0, 0.0)] {
            let a = scaled_theta(k, cc);
            let b = mkdv_theta(k * p.z0, p.x, t);
            assert!((a - b).norm() < 1e-13 * (1.0 + a.norm()), "{a} {b}");
        }
        assert!((scaled_theta(c(1.0, 0.0), cc) - c(0.0, -16.0 * cc.powi(3))).norm() < 1e-14);
    }

    #[test]
    fn descent_directions_are_diagonal() {
        let q = PI / 4.0;
        let want = [
            (1.0, 1.0, q),
            (1.0, -1.0, -q),
            (-1.0, 1.0, 3.0 * q),
            (-1.0, -1.0, -3.0 * q),
        ];
        for (k0, s, ang) in want {
            let d = descent_direction(k0, s, 1.5);
            assert!((d - Complex64::from_polar(1.0, ang)).norm() < 1e-14, "{k0} {s} {d}");
        }
    }

    #[test]
    fn jumps_unimodular_and_consistent() {
        let p = MKdVProblem::new(10.0, 1.5, 10).unwrap();
        let sp = build_mkdv_rhp(&p, &ReflectionCoefficient::builtin()).unwrap();
        let g = &sp.groups[0];
        assert_eq!(g.omega.len(), 5);
        for (s, seg) in g.omega.segments.iter().enumerate() {
            for &k in &seg.nodes {
                assert!((g.jump.eval(s, k).det() - 1.0).norm() < 1e-14);
            }
        }
        for (j, d) in g.omega.junctions.iter().zip(product_defects(&g.omega, &g.jump)) {
            if j.incident.len() == 3 {
                assert!(d < 1e-12, "{d}");
            }
        }
    }

    #[test]
    fn contour_is_fixed() {
        let rho = ReflectionCoefficient::builtin();
        let a = build_mkdv_rhp(&MKdVProblem::new(10.0, 1.5, 10).unwrap(), &rho).unwrap();
        let b = build_mkdv_rhp(&MKdVProblem::new(1000.0, 0.3, 10).unwrap(), &rho).unwrap();
        for (x, y) in a.groups[0].omega.segments.iter().zip(&b.groups[0].omega.segments) {
            assert_eq!(x.nodes, y.nodes);
        }
    }

    #[test]
    fn zero_rho_gives_zero() {
        let p = MKdVProblem::new(10.0, 1.5, 8).unwrap();
        assert_eq!(solve_mkdv(&p, &ReflectionCoefficient::zero()).unwrap().u, c(0.0, 0.0));
    }

    #[test]
    fn narrow_strip_rejected() {
        let p = MKdVProblem::new(1.0, 1.5, 8).unwrap();
        let rho = ReflectionCoefficient::new(|_| c(0.1, 0.0), 0.5, "narrow");
        assert!(matches!(build_mkdv_rhp(&p, &rho), Err(RhError::Analyticity { .. })));
    }

    #[test]
    fn fixture_resolved() {
        // the [-1, 1] phase spans 16c^3 = 54 at c = 3/2, so n = 5 or 10 cannot resolve it
        let rho = ReflectionCoefficient::builtin();
        let a = solve_mkdv(&MKdVProblem::new(10.0, 1.5, 140).unwrap(), &rho).unwrap();
        let b = solve_mkdv(&MKdVProblem::new(10.0, 1.5, 160).unwrap(), &rho).unwrap();
        assert!((a.u - b.u).norm() < 1e-12, "{} {}", a.u, b.u);
        assert!(b.solution.jump_residual(0).unwrap() < 1e-6);
    }
}
