//! Derived checks over a finished run.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhsolve::cauchy::{cauchy_boundary, cauchy_off, Side};
use rhsolve::chebyshev::{clenshaw, values_to_coeffs};
use rhsolve::contour::{scale_shift, ContourSegment, ContourSet};
use rhsolve::error::RhError;
use rhsolve::mkdv::{build_mkdv_rhp, MKdVProblem, ReflectionCoefficient};
use rhsolve::painleve::{build_pii_rhp, solve_pii, PIIProblem, StokesData};
use rhsolve::scaled::{coupling_bound, solve_iterative, ScaledProblem};
use rhsolve::sie::product_defects;
use rhsolve::toy::{fitted_slope, growth_study, l2_norm, ToyProblem};
use serde::Serialize;

use crate::config::{Check, ExperimentConfig, Method, ProblemKind};
use crate::run::{mkdv_problem, pii_problem, rho_of, solve_point, Point, Row};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub kind: String,
    /// The measured quantity the limit applies to.
    pub value: f64,
    pub limit: String,
    pub pass: bool,
    pub detail: String,
}

fn outcome(kind: &str, value: f64, limit: String, pass: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        kind: kind.to_string(),
        value,
        limit,
        pass,
        detail,
    }
}

fn failed(kind: &str, e: impl std::fmt::Display) -> CheckOutcome {
    outcome(kind, f64::NAN, String::new(), false, format!("error: {e}"))
}

fn key(p: Point) -> (u64, u64) {
    (p.x.unwrap_or(f64::NAN).to_bits(), p.t.unwrap_or(f64::NAN).to_bits())
}

/// u by point (in first-seen order) and order.
fn table(rows: &[Row]) -> Vec<(Point, BTreeMap<usize, Complex64>)> {
    let mut out: Vec<(Point, BTreeMap<usize, Complex64>)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(p, _)| key(*p) == key(r.point)) {
            Some((_, m)) => {
                m.insert(r.n, r.u);
            }
            None => out.push((r.point, BTreeMap::from([(r.n, r.u)]))),
        }
    }
    out
}

fn at(m: &BTreeMap<usize, Complex64>, n: usize) -> Complex64 {
    m.get(&n).copied().unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// NaN-propagating max.
fn worst(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

pub fn evaluate(cfg: &ExperimentConfig, rows: &[Row]) -> Vec<CheckOutcome> {
    cfg.checks.iter().map(|c| evaluate_one(cfg, rows, c)).collect()
}

fn evaluate_one(cfg: &ExperimentConfig, rows: &[Row], check: &Check) -> CheckOutcome {
    match check {
        Check::JumpResidual { max } => {
            let v = worst(rows.iter().map(|r| r.jump_residual));
            outcome("jump_residual", v, format!("< {max:e}"), v < *max, format!("{} rows", rows.len()))
        }
        Check::SelfConvergence { orders: [a, b], max } => {
            let v = worst(table(rows).iter().map(|(_, m)| (at(m, *a) - at(m, *b)).norm()));
            outcome("self_convergence", v, format!("< {max:e}"), v < *max, format!("n = {a} vs {b}"))
        }
        Check::OdeResidual { order, max } => ode_residual(rows, *order, *max),
        Check::UniformError { order, reference, ratio } => {
            let mut e: Vec<(f64, f64)> = table(rows)
                .iter()
                .filter_map(|(p, m)| p.x.map(|x| (x, (at(m, *order) - at(m, *reference)).norm() / x.abs().sqrt())))
                .collect();
            e.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
            if e.is_empty() {
                return failed("uniform_error", "no points");
            }
            let first = e[0].1;
            let sup = worst(e.iter().map(|v| v.1));
            let r = sup / first;
            outcome(
                "uniform_error",
                r,
                format!("<= {ratio}"),
                r <= *ratio,
                format!("sup {sup:.3e}, at x = {} {first:.3e}", e[0].0),
            )
        }
        Check::SpectralOrdering { orders, reference } => {
            let mut bad = 0usize;
            let mut total = 0usize;
            for (p, m) in table(rows) {
                let s = p.x.map_or(1.0, |x| x.abs().sqrt());
                let e: Vec<f64> = orders.iter().map(|&n| (at(&m, n) - at(&m, *reference)).norm() / s).collect();
                total += 1;
                if !e.windows(2).all(|w| w[0] > w[1]) {
                    bad += 1;
                }
            }
            outcome(
                "spectral_ordering",
                bad as f64,
                "= 0 violations".into(),
                bad == 0 && total > 0,
                format!("{total} points, orders {orders:?} against {reference}"),
            )
        }
        Check::MethodAgreement { max } => {
            let other = match cfg.method {
                Method::Iterative => Method::Global,
                Method::Global => Method::Iterative,
            };
            let rho = rho_of(cfg.rho);
            let mut v: f64 = 0.0;
            for r in rows {
                match solve_point(cfg, &rho, r.point, r.n, other) {
                    Ok(s) => v = worst([v, (s.u - r.u).norm()]),
                    Err(e) => return failed("method_agreement", e),
                }
            }
            outcome("method_agreement", v, format!("< {max:e}"), v < *max, format!("{} rows", rows.len()))
        }
        Check::Det { max, samples } => match det_deviation(cfg, rows, *samples) {
            Ok(v) => outcome("det", v, format!("< {max:e}"), v < *max, format!("{samples} points")),
            Err(e) => failed("det", e),
        },
        Check::RelativeErrorTrend { orders: [a, b] } => relative_trend(rows, *a, *b),
        Check::PdeResidual { order, max, h } => match pde_residual(cfg, rows, *order, *h) {
            Ok(v) => outcome("pde_residual", v, format!("< {max:e}"), v < *max, format!("h = {h}")),
            Err(e) => failed("pde_residual", e),
        },
        Check::ClosedForm { max } => match closed_form(cfg, rows) {
            Ok(v) => outcome("closed_form", v, format!("< {max:e}"), v < *max, "L2 on [-1, 1]".into()),
            Err(e) => failed("closed_form", e),
        },
        Check::GrowthSlope { xi, target, tol } => match growth_study(cfg.bump, xi) {
            Ok(g) => {
                let s = fitted_slope(&g);
                let d: Vec<String> = g.iter().map(|r| format!("{:e}:{:.6e}", r.xi, r.distance)).collect();
                outcome("growth_slope", s, format!("{target} +- {tol}"), (s - target).abs() <= *tol, d.join(" "))
            }
            Err(e) => failed("growth_slope", e),
        },
        Check::Plemelj { orders, max, samples } => match plemelj(orders, *samples) {
            Ok(v) => outcome("plemelj", v, format!("< {max:e}"), v < *max, format!("orders {orders:?}")),
            Err(e) => failed("plemelj", e),
        },
        Check::Product { max } => match product() {
            Ok((v, d)) => outcome("product", v, format!("< {max:e}"), v < *max, d),
            Err(e) => failed("product", e),
        },
        Check::CouplingSlope { eps, target, tol } => match coupling_slope(eps) {
            Ok((s, d)) => outcome("coupling_slope", s, format!("{target} +- {tol}"), (s - target).abs() <= *tol, d),
            Err(e) => failed("coupling_slope", e),
        },
        Check::Cauchy { max, samples } => match cauchy_vs_quadrature(*samples) {
            Ok(v) => outcome("cauchy", v, format!("< {max:e}"), v < *max, format!("{samples} interpolants")),
            Err(e) => failed("cauchy", e),
        },
    }
}

fn ode_residual(rows: &[Row], order: usize, max: f64) -> CheckOutcome {
    let mut pts: Vec<(f64, Complex64)> = rows
        .iter()
        .filter(|r| r.n == order)
        .filter_map(|r| r.point.x.map(|x| (x, r.u)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < 5 {
        return failed("ode_residual", "needs at least 5 x values");
    }
    let h = pts[1].0 - pts[0].0;
    if pts.windows(2).any(|w| ((w[1].0 - w[0].0) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return failed("ode_residual", "x grid is not uniform");
    }
    let mut v: f64 = 0.0;
    let mut at_x = f64::NAN;
    for i in 2..pts.len() - 2 {
        let u = |k: usize| pts[k].1;
        let upp = (-u(i - 2) + 16.0 * u(i - 1) - 30.0 * u(i) + 16.0 * u(i + 1) - u(i + 2)) / (12.0 * h * h);
        let x = pts[i].0;
        let r = (upp - x * u(i) - 2.0 * u(i) * u(i) * u(i)).norm();
        if r.is_nan() || r > v {
            v = r;
            at_x = x;
        }
    }
    outcome(
        "ode_residual",
        v,
        format!("< {max:e}"),
        v < max,
        format!("h = {h}, worst at x = {at_x}, {} points", pts.len() - 4),
    )
}

fn relative_trend(rows: &[Row], a: usize, b: usize) -> CheckOutcome {
    let mut e: Vec<(f64, f64, f64)> = table(rows)
        .iter()
        .filter_map(|(p, m)| {
            p.t.map(|t| {
                let d = (at(m, a) - at(m, b)).norm();
                (t, d, d / at(m, b).norm())
            })
        })
        .collect();
    e.sort_by(|x, y| x.0.total_cmp(&y.0));
    if e.len() < 2 {
        return failed("relative_error_trend", "needs at least 2 t values");
    }
    let abs_ok = e.windows(2).all(|w| w[1].1 <= w[0].1);
    let growth = e.windows(2).map(|w| w[1].2 - w[0].2).fold(f64::NEG_INFINITY, f64::max);
    let rel_ok = growth <= 0.0;
    let d: Vec<String> = e.iter().map(|(t, d, r)| format!("t={t:.4e}:abs={d:.3e},rel={r:.4e}")).collect();
    outcome(
        "relative_error_trend",
        growth,
        "abs decreasing, rel step <= 0".into(),
        abs_ok && rel_ok,
        format!("abs decreasing: {abs_ok}; {}", d.join(" ")),
    )
}

/// Low-discrepancy points in [0, 1)^2 (the R2 sequence).
fn r2(i: usize) -> (f64, f64) {
    let g = 1.324_717_957_244_746f64;
    let (a1, a2) = (1.0 / g, 1.0 / (g * g));
    ((0.5 + a1 * i as f64).fract(), (0.5 + a2 * i as f64).fract())
}

fn far_from(omega: &ContourSet, z: Complex64, d: f64) -> bool {
    omega.segments.iter().all(|s| s.distance(z) > d)
}

fn det_deviation(cfg: &ExperimentConfig, rows: &[Row], samples: usize) -> Result<f64, RhError> {
    let first = rows.first().ok_or_else(|| RhError::Invalid("no rows".into()))?;
    let n = *cfg.orders.iter().max().unwrap_or(&first.n);
    let p = first.point;
    let (phi, placed): (Box<dyn Fn(Complex64) -> Result<rhsolve::linalg::Mat2, RhError>>, Vec<ContourSet>) =
        match cfg.problem {
            ProblemKind::Pii => {
                let prob = pii_problem(cfg, p.x.unwrap_or(-1.0), n)?;
                let sol = solve_pii(&prob)?;
                let placed = placed_sets(&sol.solution.problem)?;
                (Box::new(move |z| sol.phi(z)), placed)
            }
            ProblemKind::Mkdv => {
                let prob = mkdv_problem(cfg, p, n)?;
                let sp = build_mkdv_rhp(&prob, &rho_of(cfg.rho))?;
                let placed = placed_sets(&sp)?;
                let sol = solve_iterative(&sp)?;
                (Box::new(move |z| sol.phi(z)), placed)
            }
            _ => return Err(RhError::Invalid("det check applies to pii and mkdv".into())),
        };
    let mut v: f64 = 0.0;
    let mut used = 0;
    let mut i = 0;
    while used < samples {
        let (a, b) = r2(i);
        i += 1;
        let z = Complex64::new(6.0 * a - 3.0, 4.0 * b - 2.0);
        // the real axis holds the parametrix cut
        if z.im.abs() < 1e-2 || !placed.iter().all(|o| far_from(o, z, 1e-2)) {
            continue;
        }
        used += 1;
        v = worst([v, (phi(z)?.det() - 1.0).norm()]);
    }
    Ok(v)
}

fn placed_sets(sp: &ScaledProblem) -> Result<Vec<ContourSet>, RhError> {
    sp.groups.iter().map(|g| g.placed()).collect()
}

fn pde_residual(cfg: &ExperimentConfig, rows: &[Row], order: usize, h: f64) -> Result<f64, RhError> {
    if cfg.problem != ProblemKind::Mkdv {
        return Err(RhError::Invalid("pde residual applies to mkdv".into()));
    }
    let rho = rho_of(cfg.rho);
    let pts: Vec<Point> = table(rows).into_iter().map(|(p, _)| p).collect();
    let mut v: f64 = 0.0;
    for p in pts {
        let (x, t) = (p.x.unwrap_or(f64::NAN), p.t.unwrap_or(f64::NAN));
        let u = |x: f64, t: f64| -> Result<Complex64, RhError> {
            let prob = MKdVProblem::from_xt(x, t, order)?;
            let sp = build_mkdv_rhp(&prob, &rho)?;
            Ok(rhsolve::mkdv::mkdv_reconstruct(&solve_iterative(&sp)?, &prob))
        };
        let u0 = u(x, t)?;
        let (a1, b1, a2, b2) = (u(x + h, t)?, u(x - h, t)?, u(x + 2.0 * h, t)?, u(x - 2.0 * h, t)?);
        let ux = (a1 - b1) / (2.0 * h);
        let uxxx = (a2 - 2.0 * a1 + 2.0 * b1 - b2) / (2.0 * h * h * h);
        let ut = (u(x, t + h)? - u(x, t - h)?) / (2.0 * h);
        v = worst([v, (ut - 6.0 * u0 * u0 * ux + uxxx).norm()]);
    }
    Ok(v)
}

fn closed_form(cfg: &ExperimentConfig, rows: &[Row]) -> Result<f64, RhError> {
    if cfg.problem != ProblemKind::Toy {
        return Err(RhError::Invalid("closed form applies to toy".into()));
    }
    let mut v: f64 = 0.0;
    for r in rows {
        let prob = match r.point.x {
            Some(xi) => ToyProblem::oscillatory(cfg.bump, xi),
            None => ToyProblem::limit(cfg.bump),
        };
        let sol = prob.solve(r.n)?;
        let cf = prob.closed_form(1e-15)?;
        let d = l2_norm(
            |x| {
                if x.abs() >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                match sol.phi_boundary(0, x, Side::Plus) {
                    Ok(m) => m.get(0, 0) - cf.boundary(x, Side::Plus),
                    Err(_) => Complex64::new(f64::NAN, 0.0),
                }
            },
            1025,
        )?;
        v = worst([v, d]);
    }
    Ok(v)
}

/// A random line or arc.
fn random_segment(rng: &mut ChaCha8Rng, n: usize, arc: bool) -> Result<ContourSegment, RhError> {
    if arc {
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let r = rng.random_range(0.5..2.0);
        let a = rng.random_range(-PI..PI);
        ContourSegment::arc(c, r, a, a + rng.random_range(0.3..3.0), n)
    } else {
        let a = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let d = Complex64::from_polar(rng.random_range(0.5..3.0), rng.random_range(-PI..PI));
        ContourSegment::line(a, a + d, n)
    }
}

/// Nodal values of a random polynomial of degree < min(n, 8).
fn random_density(rng: &mut ChaCha8Rng, seg: &ContourSegment) -> Vec<Complex64> {
    let n = seg.nodes.len();
    let deg = n.min(8);
    let coeffs: Vec<Complex64> = (0..deg)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    (0..n)
        .map(|j| {
            let t = -(PI * j as f64 / (n - 1) as f64).cos();
            clenshaw(&coeffs, Complex64::new(t, 0.0))
        })
        .collect()
}

fn plemelj(orders: &[usize], samples: usize) -> Result<f64, RhError> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut v: f64 = 0.0;
    for &n in orders {
        for arc in [false, true] {
            for _ in 0..samples {
                let seg = random_segment(&mut rng, n, arc)?;
                let vals = random_density(&mut rng, &seg);
                let inner = &seg.nodes[1..n - 1];
                let p = cauchy_boundary(&seg, &vals, Side::Plus, inner)?;
                let m = cauchy_boundary(&seg, &vals, Side::Minus, inner)?;
                for ((a, b), u) in p.iter().zip(&m).zip(&vals[1..n - 1]) {
                    v = worst([v, (a - b - u).norm()]);
                }
            }
        }
    }
    Ok(v)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let dp = {
                    let (mut q0, mut q1) = (1.0, z);
                    for k in 2..=m {
                        let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                        q0 = q1;
                        q1 = q2;
                    }
                    m as f64 * (z * q1 - q0) / (z * z - 1.0)
                };
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

/// Interpolants against composite Gauss-Legendre quadrature of the parametrized integral,
/// at targets 0.1 to 2 away from the segment.
fn cauchy_vs_quadrature(samples: usize) -> Result<f64, RhError> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (gx, gw) = gauss_legendre(20);
    let panels = 64;
    let mut v: f64 = 0.0;
    for s in 0..samples {
        let n = 4 + s % 28;
        let seg = random_segment(&mut rng, n, s % 2 == 1)?;
        let vals = random_density(&mut rng, &seg);
        let coeffs = values_to_coeffs(&vals);
        let mut targets = 0;
        while targets < 20 {
            let t0 = rng.random_range(-1.0..1.0);
            let z = seg.map.eval_real(t0)
                + Complex64::from_polar(rng.random_range(0.1..2.0), rng.random_range(-PI..PI));
            if seg.distance(z) < 0.1 {
                continue;
            }
            targets += 1;
            let mut q = Complex64::new(0.0, 0.0);
            for p in 0..panels {
                let (lo, hi) = (-1.0 + 2.0 * p as f64 / panels as f64, -1.0 + 2.0 * (p + 1) as f64 / panels as f64);
                for (x, w) in gx.iter().zip(&gw) {
                    let t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
                    let tc = Complex64::new(t, 0.0);
                    let f = clenshaw(&coeffs, tc);
                    q += f * seg.map.deriv(tc) / (seg.map.eval(tc) - z) * (0.5 * (hi - lo) * w);
                }
            }
            q /= Complex64::new(0.0, 2.0 * PI);
            let c = cauchy_off(&seg, &vals, z)?;
            v = worst([v, (c - q).norm()]);
        }
    }
    Ok(v)
}

fn product() -> Result<(f64, String), RhError> {
    let stokes = StokesData::real(1.0, -2.0, 3.0)?;
    let mut problems: Vec<(String, ScaledProblem)> = Vec::new();
    for x in [-2.0, -10.0] {
        problems.push((format!("pii x={x}"), build_pii_rhp(&PIIProblem::new(x, stokes, 8)?)?));
    }
    let rho = ReflectionCoefficient::builtin();
    problems.push(("mkdv t=10".into(), build_mkdv_rhp(&MKdVProblem::new(10.0, 1.5, 8)?, &rho)?));
    let mut v: f64 = 0.0;
    let mut d = Vec::new();
    for (name, sp) in &problems {
        let mut w: f64 = 0.0;
        for g in &sp.groups {
            for (j, def) in g.omega.junctions.iter().zip(product_defects(&g.omega, &g.jump)) {
                if j.incident.len() > 1 {
                    w = worst([w, def]);
                }
            }
        }
        d.push(format!("{name}: {w:.2e}"));
        v = worst([v, w]);
    }
    Ok((v, d.join(", ")))
}

/// Two unit circles scaled by eps about -1/2 and 1/2.
pub fn coupling_slope(eps: &[f64]) -> Result<(f64, String), RhError> {
    let circle = ContourSet::new(vec![
        ContourSegment::arc(Complex64::new(0.0, 0.0), 1.0, -PI, 0.0, 8)?,
        ContourSegment::arc(Complex64::new(0.0, 0.0), 1.0, 0.0, PI, 8)?,
    ])?;
    let mut pts = Vec::new();
    for &e in eps {
        let a = scale_shift(&circle, Complex64::new(e, 0.0), Complex64::new(-0.5, 0.0))?;
        let b = scale_shift(&circle, Complex64::new(e, 0.0), Complex64::new(0.5, 0.0))?;
        pts.push((e, coupling_bound(&a, &b)?));
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let d: Vec<String> = pts.iter().map(|(e, b)| format!("{e:e}:{b:.6e}")).collect();
    Ok((sxy / sxx, d.join(" ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn coupling_slope_is_one() {
        let (s, _) = coupling_slope(&[1e-1, 1e-2, 1e-3]).unwrap();
        assert!((s - 1.0).abs() < 0.05, "{s}");
    }

    #[test]
    fn plemelj_small() {
        assert!(plemelj(&[8, 16], 5).unwrap() < 1e-10);
    }

    #[test]
    fn cauchy_small() {
        assert!(cauchy_vs_quadrature(4).unwrap() < 1e-9);
    }
}
