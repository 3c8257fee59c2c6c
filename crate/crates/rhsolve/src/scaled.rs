//! Stage-wise solution of problems posed on disjoint scaled and shifted contours.
//!
//! Group i lives on alpha_i * Omega_i + beta_i with jump H_i given in the local
//! variable k. Stage j solves on Omega_j with H_j conjugated by the solutions of
//! the earlier stages, and the full solution is the product Phi_l ... Phi_1.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::cauchy::Side;
use crate::contour::{gauss_legendre_16, scale_shift, ContourSegment, ContourSet};
use crate::error::{Result, RhError};
use crate::linalg::Mat2;
use crate::sie::{solve_rhp, JumpFunction, RHSolution, SolveInfo};

/// One group: contour and jump in the local variable plus its placement.
#[derive(Debug, Clone)]
pub struct Group {
    pub omega: ContourSet,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub jump: JumpFunction,
    pub label: String,
}

impl Group {
    pub fn new(omega: ContourSet, alpha: Complex64, beta: Complex64, jump: JumpFunction) -> Self {
        Group {
            omega,
            alpha,
            beta,
            jump,
            label: String::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// alpha * Omega + beta.
    pub fn placed(&self) -> Result<ContourSet> {
        scale_shift(&self.omega, self.alpha, self.beta)
    }

    pub fn local(&self, z: Complex64) -> Complex64 {
        (z - self.beta) / self.alpha
    }
}

#[derive(Debug, Clone)]
pub struct ScaledProblem {
    pub groups: Vec<Group>,
    /// Smallest distance between two placed groups.
    pub min_separation: f64,
}

impl ScaledProblem {
    /// Checks that the placed groups are pairwise disjoint.
    pub fn new(groups: Vec<Group>) -> Result<Self> {
        let mut min_separation = f64::INFINITY;
        let placed = groups.iter().map(|g| g.placed()).collect::<Result<Vec<_>>>()?;
        for a in 0..placed.len() {
            for b in a + 1..placed.len() {
                let d = set_distance(&placed[a], &placed[b]);
                if !(d > 0.0) {
                    return Err(RhError::OverlappingGroups { distance: d });
                }
                min_separation = min_separation.min(d);
            }
        }
        Ok(ScaledProblem {
            groups,
            min_separation,
        })
    }

    /// Same placement with each group's segments at the given order.
    pub fn with_orders(&self, orders: &[usize]) -> Result<Self> {
        let groups = self
            .groups
            .iter()
            .zip(orders)
            .map(|(g, &n)| {
                Ok(Group {
                    omega: g.omega.with_order(n)?,
                    ..g.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScaledProblem {
            groups,
            min_separation: self.min_separation,
        })
    }

    /// The union of the placed groups with the jump G(z) = H_i((z - beta_i) / alpha_i).
    pub fn global(&self) -> Result<(ContourSet, JumpFunction)> {
        let placed = self.groups.iter().map(|g| g.placed()).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&ContourSet> = placed.iter().collect();
        let union = ContourSet::union(&refs)?;
        let mut owner = Vec::new();
        for (i, g) in self.groups.iter().enumerate() {
            for s in 0..g.omega.len() {
                owner.push((i, s));
            }
        }
        let groups: Arc<Vec<Group>> = Arc::new(self.groups.clone());
        let dim = self.groups.iter().map(|g| g.jump.dim).max().unwrap_or(2);
        let mut jump = JumpFunction::new(move |seg, z| {
            let (i, s) = owner[seg];
            let g = &groups[i];
            g.jump.eval(s, g.local(z))
        });
        jump.dim = dim;
        Ok((union, jump))
    }
}

/// Chords per segment used to certify disjointness.
const CHORDS: usize = 256;

/// Distance between two sets, or 0 when their polyline approximations cross.
fn set_distance(a: &ContourSet, b: &ContourSet) -> f64 {
    let pa = polylines(a);
    let pb = polylines(b);
    let mut d = f64::INFINITY;
    for la in &pa {
        for lb in &pb {
            for wa in la.windows(2) {
                for wb in lb.windows(2) {
                    if chords_cross(wa[0], wa[1], wb[0], wb[1]) {
                        return 0.0;
                    }
                }
            }
            for x in la {
                for y in lb {
                    d = d.min((x - y).norm());
                }
            }
        }
    }
    d
}

fn polylines(set: &ContourSet) -> Vec<Vec<Complex64>> {
    set.segments
        .iter()
        .map(|s| {
            (0..=CHORDS)
                .map(|k| s.map.eval_real(-1.0 + 2.0 * k as f64 / CHORDS as f64))
                .collect()
        })
        .collect()
}

fn chords_cross(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let cross = |a: Complex64, b: Complex64| a.re * b.im - a.im * b.re;
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0 && (d1 != 0.0 || d2 != 0.0 || d3 != 0.0 || d4 != 0.0)
}

/// Stage solutions of a scaled problem.
#[derive(Debug, Clone)]
pub struct ScaledSolution {
    pub problem: ScaledProblem,
    /// Solutions in the local variables, one per group, in stage order.
    pub stages: Vec<Arc<RHSolution>>,
}

fn stage_error(stage: usize, e: RhError) -> RhError {
    RhError::Stage {
        stage,
        source: Box::new(e),
    }
}

/// Phi_{i}(z) for a finished stage.
fn stage_phi(stage: &RHSolution, group: &Group, z: Complex64) -> Result<Mat2> {
    stage.phi(group.local(z))
}

/// Phi_{j-1}(z) ... Phi_1(z).
fn conjugator(stages: &[Arc<RHSolution>], groups: &[Group], z: Complex64) -> Result<Mat2> {
    let mut acc = Mat2::IDENTITY;
    for (s, g) in stages.iter().zip(groups) {
        acc = stage_phi(s, g, z)? * acc;
    }
    Ok(acc)
}

/// Smallest |det| accepted for a conjugating factor.
const MIN_CONJUGATOR_DET: f64 = 1e-12;

/// Iterative solve: stage j uses H_j conjugated by Phi_{j-1} ... Phi_1 at alpha_j k + beta_j.
pub fn solve_iterative(problem: &ScaledProblem) -> Result<ScaledSolution> {
    let mut stages: Vec<Arc<RHSolution>> = Vec::new();
    for (j, g) in problem.groups.iter().enumerate() {
        let jump = if j == 0 || g.jump.dim == 1 {
            // scalar factors commute, so conjugation is trivial
            g.jump.clone()
        } else {
            for (p, seg) in g.omega.segments.iter().enumerate() {
                for (node, &k) in seg.nodes.iter().enumerate() {
                    let a = conjugator(&stages, &problem.groups, g.alpha * k + g.beta)
                        .map_err(|e| stage_error(j, e))?;
                    if !(a.det().norm() > MIN_CONJUGATOR_DET) || !a.is_finite() {
                        return Err(RhError::SingularConjugator {
                            stage: j,
                            segment: p,
                            node,
                        });
                    }
                }
            }
            let earlier = stages.clone();
            let groups: Vec<Group> = problem.groups[..j].to_vec();
            let h = g.jump.clone();
            let (alpha, beta) = (g.alpha, g.beta);
            let mut jj = JumpFunction::new(move |s, k| {
                let h = h.eval(s, k);
                match conjugator(&earlier, &groups, alpha * k + beta) {
                    Ok(a) => a * h * a.inv().unwrap_or(Mat2::ZERO),
                    Err(_) => Mat2::ZERO,
                }
            });
            jj.smoothness = g.jump.smoothness;
            jj.tags = g.jump.tags.clone();
            jj
        };
        let sol = solve_rhp(&g.omega, &jump).map_err(|e| stage_error(j, e))?;
        stages.push(Arc::new(sol));
    }
    Ok(ScaledSolution {
        problem: problem.clone(),
        stages,
    })
}

/// One-shot dense solve on the union of the placed groups.
pub fn solve_global(problem: &ScaledProblem) -> Result<RHSolution> {
    let (cs, jump) = problem.global()?;
    solve_rhp(&cs, &jump)
}

impl ScaledSolution {
    /// Phi(z) = Phi_l(z) ... Phi_1(z) off all placed contours.
    pub fn phi(&self, z: Complex64) -> Result<Mat2> {
        let mut acc = Mat2::IDENTITY;
        for (s, g) in self.stages.iter().zip(&self.problem.groups) {
            acc = stage_phi(s, g, z)? * acc;
        }
        Ok(acc)
    }

    /// lim z (Phi(z) - I) = sum_i alpha_i lim k (Phi~_i(k) - I).
    pub fn residue_at_infinity(&self) -> Mat2 {
        self.stages
            .iter()
            .zip(&self.problem.groups)
            .fold(Mat2::ZERO, |acc, (s, g)| acc + s.residue_at_infinity() * g.alpha)
    }

    /// Boundary value of Phi on group j, segment p, parameter t.
    pub fn phi_boundary(&self, j: usize, p: usize, t: f64, side: Side) -> Result<Mat2> {
        let g = &self.problem.groups[j];
        let z = g.alpha * g.omega.segments[p].map.eval_real(t) + g.beta;
        let local = self.stages[j].phi_boundary(p, t, side)?;
        let before = conjugator(&self.stages[..j], &self.problem.groups[..j], z)?;
        let mut after = Mat2::IDENTITY;
        for (s, gg) in self.stages[j + 1..].iter().zip(&self.problem.groups[j + 1..]) {
            after = stage_phi(s, gg, z)? * after;
        }
        Ok(after * local * before)
    }

    /// Max of ||Phi+ - Phi- G|| for the original problem, over first-kind points
    /// (n - 1 per segment when `samples` is 0).
    pub fn jump_residual(&self, samples: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (j, g) in self.problem.groups.iter().enumerate() {
            for (p, seg) in g.omega.segments.iter().enumerate() {
                let m = if samples == 0 { seg.n - 1 } else { samples };
                for k in 0..m {
                    let t = -(std::f64::consts::PI * (2 * k + 1) as f64 / (2 * m) as f64).cos();
                    let plus = self.phi_boundary(j, p, t, Side::Plus)?;
                    let minus = self.phi_boundary(j, p, t, Side::Minus)?;
                    let h = g.jump.eval(p, seg.map.eval_real(t));
                    let r = if g.jump.dim == 1 {
                        (plus.get(0, 0) - minus.get(0, 0) * h.get(0, 0)).norm()
                    } else {
                        (plus - minus * h).max_abs()
                    };
                    worst = worst.max(r);
                }
            }
        }
        Ok(worst)
    }

    /// ||H~_j - H_j|| at the nodes of group j.
    pub fn conjugation_shift(&self, j: usize) -> Result<f64> {
        let g = &self.problem.groups[j];
        let mut worst: f64 = 0.0;
        for (p, seg) in g.omega.segments.iter().enumerate() {
            for &k in &seg.nodes {
                let h = g.jump.eval(p, k);
                let ht = self.stages[j].jump.eval(p, k);
                worst = worst.max((ht - h).max_abs());
            }
        }
        Ok(worst)
    }

    /// Largest ||A|| ||A^{-1}|| over the nodes of group j for its conjugator A.
    pub fn conjugator_condition(&self, j: usize) -> Result<f64> {
        let g = &self.problem.groups[j];
        let mut worst: f64 = 1.0;
        for seg in &g.omega.segments {
            for &k in &seg.nodes {
                let a = conjugator(&self.stages[..j], &self.problem.groups[..j], g.alpha * k + g.beta)?;
                let c = match a.inv() {
                    Some(ai) => a.max_abs() * ai.max_abs(),
                    None => f64::INFINITY,
                };
                worst = worst.max(c);
            }
        }
        Ok(worst)
    }
}

/// A ray z = origin + s * direction, s >= 0, searched out to `max_length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Complex64,
    pub direction: Complex64,
    pub max_length: f64,
}

/// Default truncation threshold: machine epsilon.
pub const DEFAULT_EPS: f64 = f64::EPSILON;

/// Probes per unit factor e along the ray; consecutive probes differ by about 3%.
const PROBES_PER_E: f64 = 32.0;

/// Shortest sub-segment [origin, origin + L d] outside of which ||G - I|| < eps at
/// geometrically spaced probes. `None` when the jump is already below eps everywhere.
pub fn truncation_length<F: Fn(Complex64) -> Mat2>(ray: &Ray, jump: F, eps: f64) -> Result<Option<f64>> {
    let d = ray.direction / ray.direction.norm();
    let defect = |s: f64| (jump(ray.origin + d * s) - Mat2::IDENTITY).max_abs();
    if !(defect(ray.max_length) < eps) {
        return Err(RhError::TruncationFailure {
            eps,
            radius: ray.max_length,
        });
    }
    let s_min = ray.max_length * 1e-6;
    let count = (PROBES_PER_E * (ray.max_length / s_min).ln()).ceil() as usize;
    let ratio = (ray.max_length / s_min).powf(1.0 / count as f64);
    let mut outer = ray.max_length;
    let mut s = ray.max_length;
    let mut hit = None;
    for _ in 0..count {
        s /= ratio;
        if defect(s) >= eps {
            hit = Some(s);
            break;
        }
        outer = s;
    }
    let (mut lo, mut hi) = match hit {
        Some(s) => (s, outer),
        None if defect(0.0) >= eps => (0.0, outer),
        None => return Ok(None),
    };
    // refine the crossing, assuming monotone decay between the two probes
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if defect(mid) >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}

/// Truncated ray as a segment of order n, or `None` when fully truncated.
pub fn truncate<F: Fn(Complex64) -> Mat2>(ray: &Ray, jump: F, eps: f64, n: usize) -> Result<Option<ContourSegment>> {
    let d = ray.direction / ray.direction.norm();
    match truncation_length(ray, jump, eps)? {
        None => Ok(None),
        Some(l) => Ok(Some(ContourSegment::line(ray.origin, ray.origin + d * l, n)?)),
    }
}

/// Panels per segment in [`coupling_bound`].
const COUPLING_PANELS: usize = 8;

/// (int int |dx| |dk| / |x - k|^2)^{1/2} over g1 x g2, a Hilbert-Schmidt bound on
/// the operator coupling the two groups.
pub fn coupling_bound(g1: &ContourSet, g2: &ContourSet) -> Result<f64> {
    let qa = arclength_rule(g1);
    let qb = arclength_rule(g2);
    let mut acc = 0.0;
    let mut dmin = f64::INFINITY;
    for (x, wx) in &qa {
        for (k, wk) in &qb {
            let d = (x - k).norm();
            dmin = dmin.min(d);
            acc += wx * wk / (d * d);
        }
    }
    let sep = set_distance(g1, g2);
    if !(sep > 0.0) || !(dmin > 0.0) {
        return Err(RhError::OverlappingGroups {
            distance: sep.min(dmin),
        });
    }
    Ok(acc.sqrt())
}

/// Composite Gauss-Legendre points with |dz| weights.
fn arclength_rule(set: &ContourSet) -> Vec<(Complex64, f64)> {
    let (x, w) = gauss_legendre_16();
    let mut out = Vec::new();
    let h = 1.0 / COUPLING_PANELS as f64;
    for s in &set.segments {
        for p in 0..COUPLING_PANELS {
            let lo = -1.0 + 2.0 * p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                let t = lo + h * (xi + 1.0);
                let tc = Complex64::new(t, 0.0);
                out.push((s.map.eval(tc), wi * h * s.map.deriv(tc).norm()));
            }
        }
    }
    out
}

/// Diagnostics for one stage.
#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    pub label: String,
    pub solve: SolveInfo,
    /// Jump residual of the conjugated local problem.
    pub local_residual: f64,
    pub conjugator_condition: f64,
    pub conjugation_shift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingRecord {
    pub first: usize,
    pub second: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stages: Vec<StageRecord>,
    pub couplings: Vec<CouplingRecord>,
    pub min_separation: f64,
    /// Residual of the assembled product on the original contours.
    pub global_residual: f64,
}

pub fn stage_report(solution: &ScaledSolution) -> Result<StageReport> {
    let problem = &solution.problem;
    let mut stages = Vec::new();
    for (j, (s, g)) in solution.stages.iter().zip(&problem.groups).enumerate() {
        stages.push(StageRecord {
            stage: j,
            label: g.label.clone(),
            solve: s.info,
            local_residual: s.jump_residual(0)?,
            conjugator_condition: solution.conjugator_condition(j)?,
            conjugation_shift: solution.conjugation_shift(j)?,
        });
    }
    let placed = problem.groups.iter().map(|g| g.placed()).collect::<Result<Vec<_>>>()?;
    let mut couplings = Vec::new();
    for a in 0..placed.len() {
        for b in a + 1..placed.len() {
            couplings.push(CouplingRecord {
                first: a,
                second: b,
                bound: coupling_bound(&placed[a], &placed[b])?,
            });
        }
    }
    Ok(StageReport {
        stages,
        couplings,
        min_separation: problem.min_separation,
        global_residual: solution.jump_residual(0)?,
    })
}
