//! Collocation of u - C^-[u](G - I) = G - I and evaluation of Phi = I + C u.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cauchy::{apply_coeffs_mat, cauchy_row, Approach, Side, Target};
use crate::chebyshev::{clenshaw, coefficient_matrix, integration_weights, values_to_coeffs};
use crate::contour::{ContourSegment, ContourSet, End};
use crate::error::{Result, RhError};
use crate::linalg::{DenseLu, Mat2};

/// Condition estimates above this are treated as numerically singular.
pub const MAX_CONDITION: f64 = 1e14;

type JumpEval = dyn Fn(usize, Complex64) -> Mat2 + Send + Sync;

/// Matrix-valued jump sampled by segment id and point.
#[derive(Clone)]
pub struct JumpFunction {
    evaluator: Arc<JumpEval>,
    /// 1 for scalar problems (only the (0,0) entry is used), otherwise 2.
    pub dim: usize,
    /// Declared smoothness order.
    pub smoothness: u32,
    /// Free-form tags describing analytic factorizations (e.g. "lens:L").
    pub tags: Vec<String>,
}

impl std::fmt::Debug for JumpFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JumpFunction")
            .field("dim", &self.dim)
            .field("smoothness", &self.smoothness)
            .field("tags", &self.tags)
            .finish()
    }
}

impl JumpFunction {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(usize, Complex64) -> Mat2 + Send + Sync + 'static,
    {
        JumpFunction {
            evaluator: Arc::new(f),
            dim: 2,
            smoothness: u32::MAX,
            tags: Vec::new(),
        }
    }

    /// Scalar jump g, embedded as diag(g, 1).
    pub fn scalar<F>(g: F) -> Self
    where
        F: Fn(usize, Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let mut j = JumpFunction::new(move |s, z| Mat2::diag(g(s, z), Complex64::new(1.0, 0.0)));
        j.dim = 1;
        j
    }

    pub fn identity() -> Self {
        JumpFunction::new(|_, _| Mat2::IDENTITY)
    }

    pub fn with_smoothness(mut self, k: u32) -> Self {
        self.smoothness = k;
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tags.push(tag.into());
        self
    }

    #[inline]
    pub fn eval(&self, segment: usize, z: Complex64) -> Mat2 {
        (self.evaluator)(segment, z)
    }
}

/// Nodal values of the SIE unknown, per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub values: Vec<Vec<Mat2>>,
}

impl Density {
    pub fn zeros(contours: &ContourSet) -> Self {
        Density {
            values: contours
                .segments
                .iter()
                .map(|s| vec![Mat2::ZERO; s.n])
                .collect(),
        }
    }

    /// Chebyshev coefficients (matrix-valued) of each segment's pullback.
    pub fn coefficients(&self) -> Vec<Vec<Mat2>> {
        self.values.iter().map(|v| mat_coeffs(v)).collect()
    }

    /// Entry (r, c) of the density on segment `s`.
    pub fn entry(&self, s: usize, r: usize, c: usize) -> Vec<Complex64> {
        self.values[s].iter().map(|m| m.get(r, c)).collect()
    }

    /// Zeroth-order zero-sum defect at every junction.
    pub fn zero_sum_defects(&self, contours: &ContourSet) -> Vec<f64> {
        contours
            .junctions
            .iter()
            .map(|j| {
                j.incident
                    .iter()
                    .fold(Mat2::ZERO, |acc, inc| {
                        let seg = &contours.segments[inc.segment];
                        acc + self.values[inc.segment][seg.node_index(inc.end)] * inc.end.sign()
                    })
                    .max_abs()
            })
            .collect()
    }
}

fn mat_coeffs(v: &[Mat2]) -> Vec<Mat2> {
    let n = v.len();
    let mut out = vec![Mat2::ZERO; n];
    for r in 0..2 {
        for c in 0..2 {
            let col: Vec<Complex64> = v.iter().map(|m| m.get(r, c)).collect();
            if col.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
                continue;
            }
            for (k, ck) in values_to_coeffs(&col).into_iter().enumerate() {
                out[k].0[r][c] = ck;
            }
        }
    }
    out
}

/// Dense collocation system. Unknowns are ordered segment-major, node-minor,
/// then by column index of the matrix density; right-hand side column r holds
/// the equations for row r of the density.
#[derive(Debug, Clone)]
pub struct SIESystem {
    pub size: usize,
    pub matrix: Vec<Complex64>,
    pub rhs: Vec<Vec<Complex64>>,
    pub dim: usize,
    /// First node index of each segment.
    pub offsets: Vec<usize>,
    /// Rows replaced by zero-sum constraints, as (segment, node).
    pub constraint_nodes: Vec<(usize, usize)>,
}

impl SIESystem {
    #[inline]
    pub fn index(&self, segment: usize, node: usize, col: usize) -> usize {
        (self.offsets[segment] + node) * self.dim + col
    }
}

/// How the collocation row at a node is formed.
#[derive(Debug, Clone)]
enum RowKind {
    Interior,
    ZeroSum(Vec<(usize, End)>),
    Bundle { end: End, members: Vec<(usize, End)> },
}

fn row_kinds(contours: &ContourSet) -> Vec<Vec<RowKind>> {
    let mut kinds: Vec<Vec<RowKind>> = contours
        .segments
        .iter()
        .map(|s| vec![RowKind::Interior; s.n])
        .collect();
    for j in &contours.junctions {
        let members: Vec<(usize, End)> = j.incident.iter().map(|i| (i.segment, i.end)).collect();
        for (k, inc) in j.incident.iter().enumerate() {
            let seg = &contours.segments[inc.segment];
            let node = seg.node_index(inc.end);
            kinds[inc.segment][node] = if k == 0 {
                RowKind::ZeroSum(members.clone())
            } else {
                RowKind::Bundle {
                    end: inc.end,
                    members: members.clone(),
                }
            };
        }
    }
    kinds
}

/// Source-segment target for a collocation node.
fn source_target(
    contours: &ContourSet,
    p: usize,
    j: usize,
    kind: &RowKind,
    q: usize,
) -> Option<Target> {
    let seg_p = &contours.segments[p];
    match kind {
        RowKind::Interior => Some(if q == p {
            Target::Interior {
                t: seg_p.params[j],
                side: Side::Minus,
            }
        } else {
            Target::Off(seg_p.nodes[j])
        }),
        RowKind::Bundle { end, members } => {
            let ends: Vec<End> = members
                .iter()
                .filter(|(s, _)| *s == q)
                .map(|(_, e)| *e)
                .collect();
            match ends.first() {
                None => Some(Target::Off(seg_p.nodes[j])),
                Some(&e) => {
                    let approach = if q == p {
                        Approach::Along(Side::Minus)
                    } else {
                        Approach::Direction(seg_p.inward_direction(*end))
                    };
                    Some(Target::Endpoint { end: e, approach })
                }
            }
        }
        RowKind::ZeroSum(_) => None,
    }
}

fn segment_tag(e: RhError, q: usize) -> RhError {
    match e {
        RhError::NearSingularTarget { z, distance, .. } => RhError::NearSingularTarget {
            segment: q,
            z,
            distance,
        },
        other => other,
    }
}

/// Assemble the collocation system for [G; contours].
pub fn assemble(contours: &ContourSet, jump: &JumpFunction) -> Result<SIESystem> {
    let dim = jump.dim;
    let mut offsets = Vec::with_capacity(contours.len());
    let mut total = 0;
    for s in &contours.segments {
        offsets.push(total);
        total += s.n;
    }
    let size = total * dim;
    let mut vmats: HashMap<usize, Vec<f64>> = HashMap::new();
    for s in &contours.segments {
        vmats.entry(s.n).or_insert_with(|| coefficient_matrix(s.n));
    }

    // jump minus identity at every node
    let mut gm = Vec::with_capacity(contours.len());
    for (p, s) in contours.segments.iter().enumerate() {
        let mut v = Vec::with_capacity(s.n);
        for (j, &z) in s.nodes.iter().enumerate() {
            let g = jump.eval(p, z);
            let det = if dim == 1 { g.get(0, 0) } else { g.det() };
            if !(det.norm() > 1e-10) || !g.is_finite() {
                return Err(RhError::SingularJump {
                    segment: p,
                    node: j,
                    det: det.norm(),
                });
            }
            v.push(g - Mat2::IDENTITY);
        }
        gm.push(v);
    }

    let kinds = row_kinds(contours);
    let mut matrix = vec![Complex64::new(0.0, 0.0); size * size];
    let mut rhs = vec![vec![Complex64::new(0.0, 0.0); size]; dim];
    let mut constraint_nodes = Vec::new();
    let idx = |s: usize, node: usize, col: usize| (offsets[s] + node) * dim + col;

    for (p, seg_p) in contours.segments.iter().enumerate() {
        for j in 0..seg_p.n {
            let kind = &kinds[p][j];
            if let RowKind::ZeroSum(members) = kind {
                constraint_nodes.push((p, j));
                for c in 0..dim {
                    let row = idx(p, j, c);
                    for &(q, e) in members {
                        let node = contours.segments[q].node_index(e);
                        matrix[row * size + idx(q, node, c)] += Complex64::new(e.sign(), 0.0);
                    }
                }
                continue;
            }
            let g = gm[p][j];
            for c in 0..dim {
                let row = idx(p, j, c);
                matrix[row * size + row] += 1.0;
                for r in 0..dim {
                    rhs[r][row] = g.get(r, c);
                }
            }
            for (q, seg_q) in contours.segments.iter().enumerate() {
                let target = match source_target(contours, p, j, kind, q) {
                    Some(t) => t,
                    None => continue,
                };
                let crow = cauchy_row(seg_q, &vmats[&seg_q.n], &target)
                    .map_err(|e| segment_tag(e, q))?;
                for (i, cv) in crow.iter().enumerate() {
                    for c in 0..dim {
                        let row = idx(p, j, c);
                        for d in 0..dim {
                            matrix[row * size + idx(q, i, d)] -= cv * g.get(d, c);
                        }
                    }
                }
            }
        }
    }
    Ok(SIESystem {
        size,
        matrix,
        rhs,
        dim,
        offsets,
        constraint_nodes,
    })
}

/// Diagnostics from a dense solve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolveInfo {
    /// ||A u - b|| / ||b|| (absolute when b = 0).
    pub residual: f64,
    pub cond_estimate: f64,
    pub size: usize,
}

/// Solve the collocation system by dense LU.
pub fn solve(system: &SIESystem, contours: &ContourSet) -> Result<(Density, SolveInfo)> {
    let n = system.size;
    let lu = DenseLu::factor(&system.matrix, n);
    let cond = lu.cond_estimate();
    if !(cond <= MAX_CONDITION) {
        return Err(RhError::SingularSystem { cond });
    }
    let x = lu.solve_columns(&system.rhs);
    let mut worst: f64 = 0.0;
    for (xr, br) in x.iter().zip(&system.rhs) {
        let bn = br.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let mut rn = 0.0;
        for i in 0..n {
            let row = &system.matrix[i * n..(i + 1) * n];
            let ax: Complex64 = row.iter().zip(xr).map(|(a, b)| a * b).sum();
            rn += (ax - br[i]).norm_sqr();
        }
        let rn = rn.sqrt();
        worst = worst.max(if bn > 0.0 { rn / bn } else { rn });
    }
    let mut density = Density::zeros(contours);
    for (p, seg) in contours.segments.iter().enumerate() {
        for j in 0..seg.n {
            let mut m = Mat2::ZERO;
            for (r, xr) in x.iter().enumerate() {
                for c in 0..system.dim {
                    m.0[r][c] = xr[system.index(p, j, c)];
                }
            }
            density.values[p][j] = m;
        }
    }
    Ok((
        density,
        SolveInfo {
            residual: worst,
            cond_estimate: cond,
            size: n,
        },
    ))
}

/// A solved problem: contours, jump, density and its Cauchy representation.
#[derive(Debug, Clone)]
pub struct RHSolution {
    pub contours: ContourSet,
    pub jump: JumpFunction,
    pub density: Density,
    pub coeffs: Vec<Vec<Mat2>>,
    pub info: SolveInfo,
}

/// Assemble and solve [G; contours].
pub fn solve_rhp(contours: &ContourSet, jump: &JumpFunction) -> Result<RHSolution> {
    let system = assemble(contours, jump)?;
    let (density, info) = solve(&system, contours)?;
    Ok(RHSolution::new(contours.clone(), jump.clone(), density, info))
}

/// Integral of a nodal density over the segment, sum_j w_j u_j with exact line
/// weights and oversampled Clenshaw-Curtis for curved segments.
pub fn segment_integral(seg: &ContourSegment, coeffs: &[Mat2], values: &[Mat2]) -> Mat2 {
    if seg.map.is_affine() {
        let w = integration_weights(seg.n);
        let scale = seg.map.a;
        return values
            .iter()
            .zip(&w)
            .fold(Mat2::ZERO, |acc, (v, w)| acc + *v * (*w * scale));
    }
    let m = 2 * seg.n + 48;
    let w = integration_weights(m);
    let pts = crate::chebyshev::chebyshev_points(m).expect("m >= 2");
    let mut acc = Mat2::ZERO;
    for (t, wt) in pts.iter().zip(&w) {
        let tc = Complex64::new(*t, 0.0);
        let dz = seg.map.deriv(tc);
        let mut v = Mat2::ZERO;
        for r in 0..2 {
            for c in 0..2 {
                let col: Vec<Complex64> = coeffs.iter().map(|m| m.get(r, c)).collect();
                v.0[r][c] = clenshaw(&col, tc);
            }
        }
        acc = acc + v * (dz * *wt);
    }
    acc
}

impl RHSolution {
    pub fn new(contours: ContourSet, jump: JumpFunction, density: Density, info: SolveInfo) -> Self {
        let coeffs = density.coefficients();
        RHSolution {
            contours,
            jump,
            density,
            coeffs,
            info,
        }
    }

    /// C u at an off-contour point (without the identity).
    pub fn cauchy(&self, z: Complex64) -> Result<Mat2> {
        let mut acc = Mat2::ZERO;
        for (q, seg) in self.contours.segments.iter().enumerate() {
            acc = acc
                + apply_coeffs_mat(seg, &self.coeffs[q], &Target::Off(z))
                    .map_err(|e| segment_tag(e, q))?;
        }
        Ok(acc)
    }

    /// Phi(z) = I + C u(z) off the contour.
    pub fn phi(&self, z: Complex64) -> Result<Mat2> {
        Ok(Mat2::IDENTITY + self.cauchy(z)?)
    }

    /// Boundary value of Phi at parameter t in (-1, 1) of segment `p`.
    pub fn phi_boundary(&self, p: usize, t: f64, side: Side) -> Result<Mat2> {
        let seg_p = &self.contours.segments[p];
        let z = seg_p.map.eval_real(t);
        let mut acc = Mat2::IDENTITY;
        for (q, seg) in self.contours.segments.iter().enumerate() {
            let target = if q == p {
                Target::Interior { t, side }
            } else {
                Target::Off(z)
            };
            acc = acc + apply_coeffs_mat(seg, &self.coeffs[q], &target).map_err(|e| segment_tag(e, q))?;
        }
        Ok(acc)
    }

    /// Max over off-node sample points of ||Phi+ - Phi- G||.
    pub fn jump_residual(&self, samples: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (p, seg) in self.contours.segments.iter().enumerate() {
            let m = if samples == 0 { seg.n - 1 } else { samples };
            for k in 0..m {
                // first-kind points interlace the second-kind grid when m = n - 1
                let t = -(PI * (2 * k + 1) as f64 / (2 * m) as f64).cos();
                let plus = self.phi_boundary(p, t, Side::Plus)?;
                let minus = self.phi_boundary(p, t, Side::Minus)?;
                let g = self.jump.eval(p, seg.map.eval_real(t));
                let r = if self.jump.dim == 1 {
                    (plus.get(0, 0) - minus.get(0, 0) * g.get(0, 0)).norm()
                } else {
                    (plus - minus * g).max_abs()
                };
                worst = worst.max(r);
            }
        }
        Ok(worst)
    }

    /// Sum over segments of the integral of u; lim z (Phi - I) = -moment / (2 pi i).
    pub fn moment(&self) -> Mat2 {
        self.contours
            .segments
            .iter()
            .enumerate()
            .fold(Mat2::ZERO, |acc, (q, seg)| {
                acc + segment_integral(seg, &self.coeffs[q], &self.density.values[q])
            })
    }

    /// lim_{z -> infinity} z (Phi(z) - I).
    pub fn residue_at_infinity(&self) -> Mat2 {
        self.moment() * (-1.0 / Complex64::new(0.0, 2.0 * PI))
    }

    pub fn zero_sum_defects(&self) -> Vec<f64> {
        self.density.zero_sum_defects(&self.contours)
    }
}

/// Sum over segments of C[f] at node `j` of segment `p`, approached from `side`.
///
/// At junction nodes the incident segments are evaluated as a bundle (finite
/// parts), which is the boundary value when f satisfies the zero-sum condition.
fn node_boundary_sum(
    contours: &ContourSet,
    coeffs: &[Vec<Mat2>],
    p: usize,
    j: usize,
    side: Side,
) -> Result<Mat2> {
    let seg_p = &contours.segments[p];
    let end = if j == 0 {
        Some(End::Start)
    } else if j + 1 == seg_p.n {
        Some(End::End)
    } else {
        None
    };
    let members: Vec<(usize, End)> = end
        .and_then(|e| {
            contours
                .junctions
                .iter()
                .find(|jn| jn.incident.iter().any(|i| i.segment == p && i.end == e))
        })
        .map(|jn| jn.incident.iter().map(|i| (i.segment, i.end)).collect())
        .unwrap_or_default();
    let mut acc = Mat2::ZERO;
    for (q, seg_q) in contours.segments.iter().enumerate() {
        let target = match end {
            None if q == p => Target::Interior {
                t: seg_p.params[j],
                side,
            },
            None => Target::Off(seg_p.nodes[j]),
            Some(e) => match members.iter().find(|(s, _)| *s == q) {
                None => Target::Off(seg_p.nodes[j]),
                Some(_) if q == p => Target::Endpoint {
                    end: e,
                    approach: Approach::Along(side),
                },
                Some(&(_, eq)) => {
                    // tilt the inward direction of p towards its `side` face
                    let left = if e == End::End { -1.0 } else { 1.0 };
                    let tilt = if side == Side::Plus { left } else { -left };
                    let dir = seg_p.inward_direction(e) * Complex64::from_polar(1.0, 1e-6 * tilt);
                    Target::Endpoint {
                        end: eq,
                        approach: Approach::Direction(dir),
                    }
                }
            },
        };
        acc = acc + apply_coeffs_mat(seg_q, &coeffs[q], &target).map_err(|e| segment_tag(e, q))?;
    }
    Ok(acc)
}

/// Boundary values of C[f] at every node from `side`, for f with the given nodal values.
pub fn boundary_values(contours: &ContourSet, f: &Density, side: Side) -> Result<Vec<Vec<Mat2>>> {
    let coeffs = f.coefficients();
    contours
        .segments
        .iter()
        .enumerate()
        .map(|(p, s)| {
            (0..s.n)
                .map(|j| node_boundary_sum(contours, &coeffs, p, j, side))
                .collect()
        })
        .collect()
}

/// The singular integral operator u -> u - C^-[u](G - I) sampled at the nodes.
pub fn apply_operator(contours: &ContourSet, jump: &JumpFunction, u: &Density) -> Result<Density> {
    let cm = boundary_values(contours, u, Side::Minus)?;
    let values = contours
        .segments
        .iter()
        .enumerate()
        .map(|(p, s)| {
            (0..s.n)
                .map(|j| {
                    let g = jump.eval(p, s.nodes[j]) - Mat2::IDENTITY;
                    u.values[p][j] - cm[p][j] * g
                })
                .collect()
        })
        .collect();
    Ok(Density { values })
}

impl RHSolution {
    /// Boundary values of Phi at every node from `side`.
    pub fn phi_nodes(&self, side: Side) -> Result<Vec<Vec<Mat2>>> {
        let c = boundary_values(&self.contours, &self.density, side)?;
        Ok(c.into_iter()
            .map(|row| row.into_iter().map(|m| m + Mat2::IDENTITY).collect())
            .collect())
    }

    /// Explicit inverse of the singular integral operator built from this solution:
    /// v -> C^+[v (Phi^+)^{-1}] Phi^+ - C^-[v (Phi^+)^{-1}] Phi^-.
    pub fn inverse_apply(&self, v: &Density) -> Result<Density> {
        let plus = self.phi_nodes(Side::Plus)?;
        let minus = self.phi_nodes(Side::Minus)?;
        let scalar = self.jump.dim == 1;
        let mut f = Density::zeros(&self.contours);
        for (p, row) in plus.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                let inv = if scalar {
                    let a = m.get(0, 0);
                    (a.norm() > 0.0).then(|| Mat2::diag(1.0 / a, Complex64::new(1.0, 0.0)))
                } else {
                    m.inv()
                };
                let inv = inv.ok_or(RhError::SingularJump {
                    segment: p,
                    node: j,
                    det: m.det().norm(),
                })?;
                f.values[p][j] = v.values[p][j] * inv;
            }
        }
        let cp = boundary_values(&self.contours, &f, Side::Plus)?;
        let cm = boundary_values(&self.contours, &f, Side::Minus)?;
        let mut out = Density::zeros(&self.contours);
        for (p, s) in self.contours.segments.iter().enumerate() {
            for j in 0..s.n {
                let w = cp[p][j] * plus[p][j] - cm[p][j] * minus[p][j];
                out.values[p][j] = if scalar {
                    let z = Complex64::new(0.0, 0.0);
                    Mat2::new(w.get(0, 0), z, z, z)
                } else {
                    w
                };
            }
        }
        Ok(out)
    }
}

/// Largest ||inverse_apply(v)|| / ||v|| over the supplied probes (max-norm over nodes).
pub fn inverse_norm_estimate(sol: &RHSolution, probes: &[Density]) -> Result<f64> {
    let norm = |d: &Density| d.values.iter().flatten().map(|m| m.max_abs()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for v in probes {
        let nv = norm(v);
        if nv > 0.0 {
            worst = worst.max(norm(&sol.inverse_apply(v)?) / nv);
        }
    }
    Ok(worst)
}

/// Per-junction product and zero-sum defects.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct JunctionReport {
    pub point: (f64, f64),
    pub multiplicity: usize,
    pub product_defect: f64,
    pub zero_sum_defect: Option<f64>,
}

/// Counterclockwise product of jumps (inverted for arriving segments) at each junction.
pub fn product_defects(contours: &ContourSet, jump: &JumpFunction) -> Vec<f64> {
    contours
        .junctions
        .iter()
        .map(|j| {
            let mut inc: Vec<(f64, Mat2)> = j
                .incident
                .iter()
                .map(|i| {
                    let seg = &contours.segments[i.segment];
                    let g = jump.eval(i.segment, seg.endpoint(i.end));
                    let ang = seg.inward_direction(i.end).arg();
                    let gh = if i.inward() {
                        g.inv().unwrap_or(Mat2::ZERO)
                    } else {
                        g
                    };
                    (ang, gh)
                })
                .collect();
            inc.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            let prod = inc.iter().fold(Mat2::IDENTITY, |acc, (_, g)| acc * *g);
            if jump.dim == 1 {
                (prod.get(0, 0) - 1.0).norm()
            } else {
                (prod - Mat2::IDENTITY).max_abs()
            }
        })
        .collect()
}

/// Product defects for the jump and, when a density is supplied, zero-sum defects.
pub fn condition_checks(
    jump: &JumpFunction,
    contours: &ContourSet,
    density: Option<&Density>,
) -> Vec<JunctionReport> {
    let prods = product_defects(contours, jump);
    let sums = density.map(|d| d.zero_sum_defects(contours));
    contours
        .junctions
        .iter()
        .enumerate()
        .map(|(k, j)| JunctionReport {
            point: (j.point.re, j.point.im),
            multiplicity: j.incident.len(),
            product_defect: prods[k],
            zero_sum_defect: sums.as_ref().map(|s| s[k]),
        })
        .collect()
}
