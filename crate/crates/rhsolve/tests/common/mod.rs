//! Independent oracles shared by the integration tests: adaptive Gauss-Kronrod
//! quadrature, barycentric Chebyshev interpolation, and random fixtures.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhsolve::contour::ContourSegment;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let fc = f(m);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(m - x) + f(m + x);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Globally adaptive G7-K15 integral of a complex function over [a, b].
///
/// Repeatedly bisects the interval with the largest error estimate until the
/// summed estimate drops below `tol` (or a roundoff floor / interval cap is hit).
pub fn integrate<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    let mut parts = vec![(a, b, gk15(f, a, b))];
    loop {
        let total: Complex64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        let floor = 1e-15 * parts.iter().map(|p| p.2 .0.norm()).sum::<f64>();
        if err <= tol.max(floor) || parts.len() > 20_000 {
            return total;
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.2 .1 > acc.1 { (i, p.2 .1) } else { acc });
        let (lo, hi, _) = parts.swap_remove(i);
        let m = 0.5 * (lo + hi);
        parts.push((lo, m, gk15(f, lo, m)));
        parts.push((m, hi, gk15(f, m, hi)));
    }
}

/// Barycentric interpolation on the ascending Chebyshev grid of the given length.
pub fn barycentric(values: &[Complex64], t: f64) -> Complex64 {
    let n = values.len();
    let m = (n - 1) as f64;
    let mut num = c(0.0, 0.0);
    let mut den = 0.0;
    for (j, v) in values.iter().enumerate() {
        let xj = -(PI * j as f64 / m).cos();
        let dx = t - xj;
        if dx == 0.0 {
            return *v;
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n - 1 {
            w *= 0.5;
        }
        num += v * (w / dx);
        den += w / dx;
    }
    num / den
}

/// Geometry used by the quadrature oracle, parametrized independently of the
/// Moebius representation.
#[derive(Debug, Clone, Copy)]
pub enum Shape {
    Line { p: Complex64, q: Complex64 },
    Arc { center: Complex64, radius: f64, th1: f64, th2: f64 },
}

impl Shape {
    pub fn segment(&self, n: usize) -> ContourSegment {
        match *self {
            Shape::Line { p, q } => ContourSegment::line(p, q, n).unwrap(),
            Shape::Arc { center, radius, th1, th2 } => {
                ContourSegment::arc(center, radius, th1, th2, n).unwrap()
            }
        }
    }

    /// Point and derivative at parameter u in [0, 1].
    pub fn point(&self, u: f64) -> (Complex64, Complex64) {
        match *self {
            Shape::Line { p, q } => (p + (q - p) * u, q - p),
            Shape::Arc { center, radius, th1, th2 } => {
                let th = th1 + (th2 - th1) * u;
                let e = Complex64::from_polar(radius, th);
                (center + e, c(0.0, 1.0) * e * (th2 - th1))
            }
        }
    }
}

/// Cauchy integral of the interpolant of `values` on `seg` (geometry `shape`) by quadrature.
pub fn oracle_cauchy(shape: &Shape, seg: &ContourSegment, values: &[Complex64], z: Complex64, tol: f64) -> Complex64 {
    let f = |u: f64| {
        let (s, ds) = shape.point(u);
        let t = seg.map.inverse(s).re.clamp(-1.0, 1.0);
        barycentric(values, t) * ds / (s - z)
    };
    integrate(&f, 0.0, 1.0, tol) / c(0.0, 2.0 * PI)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_values<R: Rng>(r: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
        .collect()
}

pub fn random_shape<R: Rng>(r: &mut R) -> Shape {
    if r.random_bool(0.5) {
        Shape::Line {
            p: c(r.random_range(-2.0..0.0), r.random_range(-1.0..1.0)),
            q: c(r.random_range(0.5..2.0), r.random_range(-1.0..1.0)),
        }
    } else {
        let th1 = r.random_range(-PI..PI);
        Shape::Arc {
            center: c(r.random_range(-0.5..0.5), r.random_range(-0.5..0.5)),
            radius: r.random_range(0.5..2.0),
            th1,
            th2: th1 + r.random_range(0.3..2.5),
        }
    }
}

/// Random target at distance in [0.05, 3] from the segment nodes.
pub fn random_target<R: Rng>(r: &mut R, seg: &ContourSegment) -> Complex64 {
    loop {
        let z = c(r.random_range(-4.0..4.0), r.random_range(-4.0..4.0));
        let fine = seg.with_order(200).unwrap();
        let d = fine.nodes.iter().map(|s| (s - z).norm()).fold(f64::MAX, f64::min);
        if d > 0.05 {
            return z;
        }
    }
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fixed composite G7-K15 rule with `panels` equal panels (no adaptivity).
pub fn composite<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, panels: usize) -> Complex64 {
    let w = (b - a) / panels as f64;
    (0..panels).map(|k| gk15(f, a + k as f64 * w, a + (k + 1) as f64 * w).0).sum()
}

/// Plus boundary value at x in (-1, 1) of exp(C g), where g is supported on [-1, 1]:
/// g(x)/2 plus the principal value, computed by singularity subtraction.
pub fn exp_cauchy_plus<G: Fn(f64) -> Complex64>(g: &G, x: f64, tol: f64) -> Complex64 {
    let gx = g(x);
    let f = |s: f64| if s == x { c(0.0, 0.0) } else { (g(s) - gx) / (s - x) };
    let pv = integrate(&f, -1.0, x, tol) + integrate(&f, x, 1.0, tol) + gx * ((1.0 - x) / (1.0 + x)).ln();
    (0.5 * gx + pv / c(0.0, 2.0 * PI)).exp()
}
