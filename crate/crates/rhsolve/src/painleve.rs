//! Painleve II for x < 0 from Stokes data.
//!
//! The six-ray problem is deformed through the stationary points +-1/2 of
//! theta(z) = (8i/3) z^3 - 2iz with phase xi = |x|^{3/2}. The merged jump on
//! [-1/2, 1/2] is lensed into L D U, and D is removed by the diagonal
//! parametrix P. For xi > 16 the remaining jumps live on two copies of a
//! circle with four stubs, scaled by xi^{-1/2} around each stationary point.
//! Smaller xi use one global contour with the lenses closed off at +-i/2.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::Side;
use crate::contour::{ContourSegment, ContourSet};
use crate::error::{Result, RhError};
use crate::linalg::Mat2;
use crate::scaled::{solve_global, solve_iterative, truncation_length, Group, Ray, ScaledProblem, ScaledSolution, DEFAULT_EPS};
use crate::sie::{product_defects, JumpFunction};

/// Above this xi the problem is split into two scaled groups.
pub const SCALED_THRESHOLD: f64 = 16.0;

/// Largest junction product defect accepted when assembling a geometry.
pub const MAX_PRODUCT_DEFECT: f64 = 1e-8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Stokes multipliers s1, s2, s3; s_{k+3} = -s_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesData {
    pub s1: Complex64,
    pub s2: Complex64,
    pub s3: Complex64,
}

/// Regime flags reported alongside a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegimeFlags {
    /// s1 s3 real and > 1; the deformation is built for this case.
    pub s1s3_above_one: bool,
    /// s1 s2 real and > 1.
    pub s1s2_above_one: bool,
}

fn real_above_one(z: Complex64) -> bool {
    z.im.abs() <= 1e-14 * z.norm().max(1.0) && z.re > 1.0
}

impl StokesData {
    /// Checks s1 - s2 + s3 + s1 s2 s3 = 0 to 1e-12 relative.
    pub fn new(s1: Complex64, s2: Complex64, s3: Complex64) -> Result<Self> {
        let s = StokesData { s1, s2, s3 };
        let scale = 1.0 + s1.norm() + s2.norm() + s3.norm() + (s1 * s2 * s3).norm();
        if !(s.constraint_defect() <= 1e-12 * scale) {
            return Err(RhError::Invalid(format!(
                "Stokes data violate s1 - s2 + s3 + s1 s2 s3 = 0 (defect {:e})",
                s.constraint_defect()
            )));
        }
        Ok(s)
    }

    pub fn real(s1: f64, s2: f64, s3: f64) -> Result<Self> {
        StokesData::new(c(s1, 0.0), c(s2, 0.0), c(s3, 0.0))
    }

    pub fn constraint_defect(&self) -> f64 {
        (self.s1 - self.s2 + self.s3 + self.s1 * self.s2 * self.s3).norm()
    }

    /// s_k for k = 1..6.
    pub fn s(&self, k: usize) -> Complex64 {
        match k {
            1 => self.s1,
            2 => self.s2,
            3 => self.s3,
            4..=6 => -self.s(k - 3),
            _ => panic!("Stokes index {k} out of range 1..=6"),
        }
    }

    /// 1 - s1 s3, the (1,1) entry of D.
    pub fn d1(&self) -> Complex64 {
        1.0 - self.s1 * self.s3
    }

    pub fn regime_flags(&self) -> RegimeFlags {
        RegimeFlags {
            s1s3_above_one: real_above_one(self.s1 * self.s3),
            s1s2_above_one: real_above_one(self.s1 * self.s2),
        }
    }

    fn checked_d1(&self) -> Result<Complex64> {
        let d1 = self.d1();
        if d1.norm() < 1e-14 {
            return Err(RhError::FactorizationSingular);
        }
        Ok(d1)
    }
}

/// theta(z) = (8i/3) z^3 - 2iz.
pub fn pii_theta(z: Complex64) -> Complex64 {
    c(0.0, 8.0 / 3.0) * z * z * z - c(0.0, 2.0) * z
}

/// The merged jump on [-1/2, 1/2]: [[1 - s1 s3, s1 e^{-xi theta}], [s1 e^{xi theta}, 1 + s1 s2]].
pub fn merged_jump(stokes: &StokesData, xi: f64, z: Complex64) -> Mat2 {
    let e = (xi * pii_theta(z)).exp();
    Mat2::new(stokes.d1(), stokes.s1 / e, stokes.s1 * e, 1.0 + stokes.s1 * stokes.s2)
}

/// L, D, U with L D U equal to [`merged_jump`].
pub fn ldu_factor(stokes: &StokesData, xi: f64, z: Complex64) -> Result<(Mat2, Mat2, Mat2)> {
    let d1 = stokes.checked_d1()?;
    let e = (xi * pii_theta(z)).exp();
    Ok((
        Mat2::lower(stokes.s1 * e / d1),
        Mat2::diag(d1, 1.0 / d1),
        Mat2::upper(stokes.s1 / (e * d1)),
    ))
}

fn on_cut(z: Complex64) -> bool {
    z.im == 0.0 && z.re.abs() <= 0.5
}

/// log((2z + 1) / (2z - 1)): principal off the cut, boundary value on it.
fn cut_log(z: Complex64, side: Option<Side>) -> Result<Complex64> {
    if on_cut(z) {
        if z.re.abs() == 0.5 {
            return Err(RhError::BranchCut(z));
        }
        let r = ((2.0 * z.re + 1.0) / (2.0 * z.re - 1.0)).abs().ln();
        return match side {
            // from above, 2z - 1 has argument just below pi
            Some(Side::Plus) => Ok(c(r, -PI)),
            Some(Side::Minus) => Ok(c(r, PI)),
            None => Err(RhError::BranchCut(z)),
        };
    }
    Ok(((2.0 * z + 1.0) / (2.0 * z - 1.0)).ln())
}

fn p_exponents(d1: Complex64, d2: Complex64) -> (Complex64, Complex64) {
    let k = c(0.0, 1.0 / (2.0 * PI));
    (k * d1.ln(), k * d2.ln())
}

fn parametrix_with(z: Complex64, d1: Complex64, d2: Complex64, side: Option<Side>) -> Result<Mat2> {
    parametrix_exp(z, p_exponents(d1, d2), side)
}

fn parametrix_exp(z: Complex64, (n1, n2): (Complex64, Complex64), side: Option<Side>) -> Result<Mat2> {
    let l = cut_log(z, side)?;
    Ok(Mat2::diag((n1 * l).exp(), (n2 * l).exp()))
}

/// Exponents for D = diag(d1, 1/d1) with log d2 = -log d1, so det P = 1.
///
/// Principal logs of both entries differ from this when d1 < 0; then det P is
/// (2z - 1)/(2z + 1), which winds once around each circle and leaves every
/// single-group stage without a solution.
fn unimodular_exponents(d1: Complex64) -> (Complex64, Complex64) {
    let n = c(0.0, 1.0 / (2.0 * PI)) * d1.ln();
    (n, -n)
}

/// P for D = diag(d1, 1/d1) with unit determinant.
pub fn parametrix_unimodular(z: Complex64, d1: Complex64) -> Result<Mat2> {
    parametrix_exp(z, unimodular_exponents(d1), None)
}

/// diag(((2z+1)/(2z-1))^{i log d_k / (2 pi)}), principal branches; P+ = P- diag(d1, d2) on [-1/2, 1/2].
pub fn parametrix_p(z: Complex64, d1: Complex64, d2: Complex64) -> Result<Mat2> {
    parametrix_with(z, d1, d2, None)
}

/// Boundary value of [`parametrix_p`] at x in (-1/2, 1/2).
pub fn parametrix_boundary(x: f64, d1: Complex64, d2: Complex64, side: Side) -> Result<Mat2> {
    parametrix_with(c(x, 0.0), d1, d2, Some(side))
}

/// Geometry knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PIIGeometry {
    /// Outer radius of the circle stubs, in units of xi^{-1/2}.
    pub stub_radius: f64,
    /// Height of the lens apexes +-i h in the global geometry.
    pub apex: f64,
    /// Fixed length for the global geometry's rays; truncated per x when unset.
    pub ray_length: Option<f64>,
    /// Search radius for ray truncation.
    pub max_ray: f64,
    pub eps: f64,
}

impl Default for PIIGeometry {
    fn default() -> Self {
        PIIGeometry {
            stub_radius: 2.0,
            apex: 0.5,
            ray_length: None,
            max_ray: 12.0,
            eps: DEFAULT_EPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PIIProblem {
    pub x: f64,
    pub xi: f64,
    pub stokes: StokesData,
    /// Points per segment.
    pub n: usize,
    pub geometry: PIIGeometry,
}

impl PIIProblem {
    pub fn new(x: f64, stokes: StokesData, n: usize) -> Result<Self> {
        if !(x < 0.0) || !x.is_finite() {
            return Err(RhError::Invalid(format!("Painleve II solver needs x < 0, got {x}")));
        }
        if n < 2 {
            return Err(RhError::InvalidOrder(n));
        }
        Ok(PIIProblem {
            x,
            xi: (-x).powf(1.5),
            stokes,
            n,
            geometry: PIIGeometry::default(),
        })
    }

    pub fn with_geometry(mut self, geometry: PIIGeometry) -> Self {
        self.geometry = geometry;
        self
    }

    /// True when the problem is split into two scaled groups.
    pub fn is_scaled(&self) -> bool {
        self.xi > SCALED_THRESHOLD
    }

    pub fn alpha(&self) -> f64 {
        self.xi.powf(-0.5)
    }
}

/// A ray factor: L(a e^{xi theta}) or U(a e^{-xi theta}).
#[derive(Debug, Clone, Copy)]
enum Factor {
    Lower(Complex64),
    Upper(Complex64),
}

impl Factor {
    /// The matrix given e = e^{xi theta}.
    fn at(self, e: Complex64) -> Mat2 {
        match self {
            Factor::Lower(a) => Mat2::lower(a * e),
            Factor::Upper(a) => Mat2::upper(a / e),
        }
    }
}

/// Outward rays at a stationary point, at angles pi/4, 3pi/4, 5pi/4, -pi/4.
fn ray_factors(stokes: &StokesData, center: f64) -> Result<[Factor; 4]> {
    let d1 = stokes.checked_d1()?;
    let (s1, s3) = (stokes.s1, stokes.s3);
    Ok(if center > 0.0 {
        [
            Factor::Lower(s1),
            Factor::Upper(s3 / d1),
            Factor::Lower(-s1 / d1),
            Factor::Upper(-s3),
        ]
    } else {
        [
            Factor::Upper(s1 / d1),
            Factor::Lower(s3),
            Factor::Upper(-s1),
            Factor::Lower(-s3 / d1),
        ]
    })
}

const RAY_ANGLES: [f64; 4] = [PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, -PI / 4.0];

/// xi theta(center + xi^{-1/2} k) from the local expansion.
fn local_phase(center: f64, xi: f64, k: Complex64) -> Complex64 {
    let sign = if center > 0.0 { 1.0 } else { -1.0 };
    let base = c(0.0, -sign * 2.0 / 3.0 * xi);
    base + c(0.0, 4.0 * sign) * k * k + c(0.0, 8.0 / 3.0) * xi.powf(-0.5) * k * k * k
}

/// Everything needed to evaluate the jumps of one scaled group.
struct LocalData {
    center: f64,
    xi: f64,
    alpha: f64,
    factors: [Factor; 4],
    d1: Complex64,
    exponents: (Complex64, Complex64),
}

/// Pieces of a scaled group, in the local variable.
#[derive(Debug, Clone, Copy)]
enum LocalPiece {
    /// Circle arc, with the side of the cut it approaches (if it touches it).
    Arc(Option<Side>),
    /// The part of [-1/2, 1/2] inside the circle.
    Diagonal,
    /// Lens ray from the center to the circle.
    Inner(usize),
    /// The same ray outside the circle, conjugated by P.
    Stub(usize),
}

impl LocalData {
    fn e(&self, k: Complex64) -> Complex64 {
        local_phase(self.center, self.xi, k).exp()
    }

    fn z(&self, k: Complex64) -> Complex64 {
        self.center + self.alpha * k
    }

    /// P at z = center + alpha k; points within rounding of the cut take `side`.
    fn p(&self, k: Complex64, side: Option<Side>) -> Result<Mat2> {
        let mut z = self.z(k);
        if side.is_some() && z.im.abs() < 1e-13 && z.re.abs() < 0.5 {
            z.im = 0.0;
        }
        parametrix_exp(z, self.exponents, side)
    }

    fn jump(&self, piece: LocalPiece, k: Complex64) -> Mat2 {
        let r = match piece {
            // Psi = Phi inside, Phi P^{-1} outside; + side is the inside
            LocalPiece::Arc(side) => self.p(k, side),
            LocalPiece::Diagonal => Ok(Mat2::diag(self.d1, 1.0 / self.d1)),
            LocalPiece::Inner(i) => Ok(self.factors[i].at(self.e(k))),
            LocalPiece::Stub(i) => self.p(k, None).map(|p| {
                p * self.factors[i].at(self.e(k)) * Mat2::diag(1.0 / p.get(0, 0), 1.0 / p.get(1, 1))
            }),
        };
        r.unwrap_or(Mat2::ZERO)
    }
}

/// Junction product defects of a group in its local variable, skipping free ends.
fn check_products(omega: &ContourSet, jump: &JumpFunction) -> Result<f64> {
    let defects = product_defects(omega, jump);
    let mut worst: f64 = 0.0;
    for (j, d) in omega.junctions.iter().zip(defects) {
        if j.incident.len() < 2 {
            continue;
        }
        if !(d <= MAX_PRODUCT_DEFECT) {
            return Err(RhError::ProductDefect {
                junction: j.point,
                defect: d,
            });
        }
        worst = worst.max(d);
    }
    Ok(worst)
}

fn scaled_group(problem: &PIIProblem, center: f64) -> Result<Group> {
    let st = &problem.stokes;
    let d1 = st.checked_d1()?;
    let local = Arc::new(LocalData {
        center,
        xi: problem.xi,
        alpha: problem.alpha(),
        factors: ray_factors(st, center)?,
        d1,
        exponents: unimodular_exponents(d1),
    });
    let n = problem.n;
    let q = PI / 4.0;
    let zero = c(0.0, 0.0);
    let mut segs = Vec::new();
    let mut pieces = Vec::new();
    // arcs split at the ray angles and where the cut leaves the circle
    let arcs: [(f64, f64, Option<Side>); 5] = if center > 0.0 {
        [
            (-q, q, None),
            (q, 3.0 * q, None),
            (3.0 * q, PI, Some(Side::Plus)),
            (PI, 5.0 * q, Some(Side::Minus)),
            (5.0 * q, 7.0 * q, None),
        ]
    } else {
        [
            (-q, 0.0, Some(Side::Minus)),
            (0.0, q, Some(Side::Plus)),
            (q, 3.0 * q, None),
            (3.0 * q, 5.0 * q, None),
            (5.0 * q, 7.0 * q, None),
        ]
    };
    for (a, b, side) in arcs {
        segs.push(ContourSegment::arc(zero, 1.0, a, b, n)?);
        pieces.push(LocalPiece::Arc(side));
    }
    // the cut runs left to right through the center
    let one = c(1.0, 0.0);
    segs.push(if center > 0.0 {
        ContourSegment::line(-one, zero, n)?
    } else {
        ContourSegment::line(zero, one, n)?
    });
    pieces.push(LocalPiece::Diagonal);
    for (i, &ang) in RAY_ANGLES.iter().enumerate() {
        segs.push(ContourSegment::line(zero, Complex64::from_polar(1.0, ang), n)?);
        pieces.push(LocalPiece::Inner(i));
    }
    for (i, &ang) in RAY_ANGLES.iter().enumerate() {
        let u = Complex64::from_polar(1.0, ang);
        let ray = Ray {
            origin: u,
            direction: u,
            max_length: problem.geometry.stub_radius - 1.0,
        };
        let lc = local.clone();
        let len = match truncation_length(&ray, |k| lc.jump(LocalPiece::Stub(i), k), problem.geometry.eps) {
            Ok(l) => l,
            // the stub ends where the Omega definition puts it
            Err(RhError::TruncationFailure { .. }) => Some(ray.max_length),
            Err(e) => return Err(e),
        };
        if let Some(l) = len {
            segs.push(ContourSegment::line(u, u * (1.0 + l), n)?);
            pieces.push(LocalPiece::Stub(i));
        }
    }
    let omega = ContourSet::new(segs)?;
    let lc = local.clone();
    let jump = JumpFunction::new(move |s, k| lc.jump(pieces[s], k)).with_tag("pii:scaled");
    check_products(&omega, &jump)?;
    let label = if center > 0.0 { "+1/2" } else { "-1/2" };
    Ok(Group::new(omega, c(problem.alpha(), 0.0), c(center, 0.0), jump).with_label(label))
}

/// Segment kinds of the global geometry.
#[derive(Debug, Clone, Copy)]
enum GlobalPiece {
    Diagonal,
    Ray(Factor),
}

fn global_group(problem: &PIIProblem) -> Result<Group> {
    let st = problem.stokes;
    let d1 = st.checked_d1()?;
    let xi = problem.xi;
    let geo = problem.geometry;
    let n = problem.n;
    let half = c(0.5, 0.0);
    let top = c(0.0, geo.apex);
    let bottom = c(0.0, -geo.apex);
    let jump_of = move |piece: GlobalPiece, z: Complex64| match piece {
        GlobalPiece::Diagonal => Mat2::diag(d1, 1.0 / d1),
        GlobalPiece::Ray(f) => f.at((xi * pii_theta(z)).exp()),
    };

    let mut segs = vec![ContourSegment::line(-half, half, n)?];
    let mut pieces = vec![GlobalPiece::Diagonal];
    // lens edges, all oriented away from the stationary points
    let roofs = [
        (-half, top, Factor::Upper(st.s1 / d1)),
        (half, top, Factor::Upper(st.s3 / d1)),
        (-half, bottom, Factor::Lower(-st.s3 / d1)),
        (half, bottom, Factor::Lower(-st.s1 / d1)),
    ];
    for (a, b, f) in roofs {
        segs.push(ContourSegment::line(a, b, n)?);
        pieces.push(GlobalPiece::Ray(f));
    }
    let mut rays = Vec::new();
    for center in [0.5, -0.5] {
        let fs = ray_factors(&st, center)?;
        for (i, &ang) in RAY_ANGLES.iter().enumerate() {
            // the 3pi/4 ray at +1/2 and the pi/4 ray at -1/2 are the roofs
            let outer = if center > 0.0 { i == 0 || i == 3 } else { i == 1 || i == 2 };
            if outer {
                rays.push((c(center, 0.0), Complex64::from_polar(1.0, ang), fs[i]));
            }
        }
    }
    rays.push((top, c(0.0, 1.0), Factor::Upper(st.s2)));
    rays.push((bottom, c(0.0, -1.0), Factor::Lower(-st.s2)));
    for (origin, dir, f) in rays {
        let len = match geo.ray_length {
            Some(l) => Some(l),
            None => {
                let ray = Ray {
                    origin,
                    direction: dir,
                    max_length: geo.max_ray,
                };
                truncation_length(&ray, |z| jump_of(GlobalPiece::Ray(f), z), geo.eps)?
            }
        };
        if let Some(l) = len {
            segs.push(ContourSegment::line(origin, origin + dir * l, n)?);
            pieces.push(GlobalPiece::Ray(f));
        }
    }
    let omega = ContourSet::new(segs)?;
    let jump = JumpFunction::new(move |s, z| jump_of(pieces[s], z)).with_tag("pii:global");
    check_products(&omega, &jump)?;
    Ok(Group::new(omega, c(1.0, 0.0), c(0.0, 0.0), jump).with_label("global"))
}

/// The deformed problem: two scaled groups (-1/2 first) for xi > 16, one global group otherwise.
pub fn build_pii_rhp(problem: &PIIProblem) -> Result<ScaledProblem> {
    if problem.is_scaled() {
        ScaledProblem::new(vec![scaled_group(problem, -0.5)?, scaled_group(problem, 0.5)?])
    } else {
        ScaledProblem::new(vec![global_group(problem)?])
    }
}

/// The global lensed geometry at any xi, as a single group.
pub fn build_pii_global(problem: &PIIProblem) -> Result<ScaledProblem> {
    ScaledProblem::new(vec![global_group(problem)?])
}

/// Factor taking lim z Psi_12 to u(x).
///
/// With this phase normalization the solution of u'' = xu + 2u^3 is
/// 2|x|^{1/2} lim z Psi_12; without the 2 the ODE picks up a factor 4 on the
/// cubic term.
pub fn pii_scale(x: f64) -> f64 {
    2.0 * (-x).sqrt()
}

/// u(x) = 2|x|^{1/2} lim z Psi_12(z).
pub fn pii_reconstruct(solution: &ScaledSolution, problem: &PIIProblem) -> Complex64 {
    pii_scale(problem.x) * solution.residue_at_infinity().get(0, 1)
}

#[derive(Debug, Clone)]
pub struct PIISolution {
    pub problem: PIIProblem,
    pub solution: ScaledSolution,
    pub u: Complex64,
}

impl PIISolution {
    /// Phi of the deformed problem at z off every contour.
    pub fn phi(&self, z: Complex64) -> Result<Mat2> {
        let psi = self.solution.phi(z)?;
        let r = self.problem.alpha();
        if !self.problem.is_scaled() || (z - 0.5).norm() < r || (z + 0.5).norm() < r {
            return Ok(psi);
        }
        let d1 = self.problem.stokes.checked_d1()?;
        Ok(psi * parametrix_unimodular(z, d1)?)
    }
}

/// Solve the deformed problem stage by stage and reconstruct u(x).
pub fn solve_pii(problem: &PIIProblem) -> Result<PIISolution> {
    let sp = build_pii_rhp(problem)?;
    let solution = solve_iterative(&sp)?;
    let u = pii_reconstruct(&solution, problem);
    Ok(PIISolution {
        problem: *problem,
        solution,
        u,
    })
}

/// u(x) from one dense solve on the union of all groups.
pub fn solve_pii_global(problem: &PIIProblem) -> Result<Complex64> {
    let sp = build_pii_rhp(problem)?;
    let sol = solve_global(&sp)?;
    Ok(pii_scale(problem.x) * sol.residue_at_infinity().get(0, 1))
}
