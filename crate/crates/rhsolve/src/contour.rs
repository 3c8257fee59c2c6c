//! Oriented contours built from Moebius images of [-1, 1].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::chebyshev::chebyshev_points;
use crate::error::{Result, RhError};

/// z = (a t + b) / (c t + d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MoebiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = (a * d).norm() + (b * c).norm();
        if det.norm() <= 1e-14 * scale || det.norm() == 0.0 || !det.is_finite() {
            return Err(RhError::DegenerateMap);
        }
        let m = MoebiusMap { a, b, c, d };
        // the image of [-1, 1] must stay bounded
        if let Some(p) = m.pole_preimage() {
            if p.im.abs() <= 1e-14 && p.re.abs() <= 1.0 {
                return Err(RhError::DegenerateMap);
            }
        }
        Ok(m)
    }

    /// Straight segment from `p` to `q`.
    pub fn line(p: Complex64, q: Complex64) -> Result<Self> {
        Self::new(
            (q - p) * 0.5,
            (p + q) * 0.5,
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    /// Circular arc around `center` from angle `theta1` to `theta2`, |theta2 - theta1| < 2 pi.
    pub fn arc(center: Complex64, radius: f64, theta1: f64, theta2: f64) -> Result<Self> {
        let half = 0.5 * (theta2 - theta1);
        if radius <= 0.0 || half.abs() >= PI || half == 0.0 {
            return Err(RhError::DegenerateMap);
        }
        let s = (0.5 * half).tan();
        let mid = Complex64::from_polar(radius, 0.5 * (theta1 + theta2));
        let i = Complex64::i();
        Self::new(i * s * (mid - center), mid + center, -i * s, Complex64::new(1.0, 0.0))
    }

    pub fn is_affine(&self) -> bool {
        self.c == Complex64::new(0.0, 0.0)
    }

    #[inline]
    pub fn eval(&self, t: Complex64) -> Complex64 {
        (self.a * t + self.b) / (self.c * t + self.d)
    }

    #[inline]
    pub fn eval_real(&self, t: f64) -> Complex64 {
        self.eval(Complex64::new(t, 0.0))
    }

    pub fn inverse(&self, z: Complex64) -> Complex64 {
        (self.d * z - self.b) / (self.a - self.c * z)
    }

    /// dz/dt.
    pub fn deriv(&self, t: Complex64) -> Complex64 {
        let q = self.c * t + self.d;
        (self.a * self.d - self.b * self.c) / (q * q)
    }

    /// Preimage of infinity, if finite.
    pub fn pole_preimage(&self) -> Option<Complex64> {
        if self.is_affine() {
            None
        } else {
            Some(-self.d / self.c)
        }
    }

    /// The map followed by z -> alpha z + beta.
    pub fn then_affine(&self, alpha: Complex64, beta: Complex64) -> MoebiusMap {
        MoebiusMap {
            a: alpha * self.a + beta * self.c,
            b: alpha * self.b + beta * self.d,
            c: self.c,
            d: self.d,
        }
    }

    /// The map precomposed with t -> -t.
    pub fn reversed(&self) -> MoebiusMap {
        MoebiusMap {
            a: -self.a,
            b: self.b,
            c: -self.c,
            d: self.d,
        }
    }
}

/// Which end of [-1, 1] an endpoint comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum End {
    /// t = -1; the segment leaves the point (outward).
    Start,
    /// t = +1; the segment arrives at the point (inward).
    End,
}

impl End {
    pub fn param(self) -> f64 {
        match self {
            End::Start => -1.0,
            End::End => 1.0,
        }
    }

    /// +1 for an inward (arriving) end, -1 for an outward one.
    pub fn sign(self) -> f64 {
        match self {
            End::Start => -1.0,
            End::End => 1.0,
        }
    }
}

/// A Moebius image of [-1, 1] with its mapped Chebyshev grid, oriented by increasing t.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSegment {
    pub map: MoebiusMap,
    pub n: usize,
    pub params: Vec<f64>,
    pub nodes: Vec<Complex64>,
}

impl ContourSegment {
    pub fn new(map: MoebiusMap, n: usize) -> Result<Self> {
        let params = chebyshev_points(n)?;
        let nodes = params.iter().map(|&t| map.eval_real(t)).collect();
        Ok(ContourSegment {
            map,
            n,
            params,
            nodes,
        })
    }

    pub fn line(p: Complex64, q: Complex64, n: usize) -> Result<Self> {
        Self::new(MoebiusMap::line(p, q)?, n)
    }

    pub fn arc(center: Complex64, radius: f64, theta1: f64, theta2: f64, n: usize) -> Result<Self> {
        Self::new(MoebiusMap::arc(center, radius, theta1, theta2)?, n)
    }

    pub fn start(&self) -> Complex64 {
        self.nodes[0]
    }

    pub fn end(&self) -> Complex64 {
        self.nodes[self.n - 1]
    }

    pub fn endpoint(&self, e: End) -> Complex64 {
        match e {
            End::Start => self.start(),
            End::End => self.end(),
        }
    }

    pub fn node_index(&self, e: End) -> usize {
        match e {
            End::Start => 0,
            End::End => self.n - 1,
        }
    }

    /// Unit vector pointing from the endpoint into the segment.
    pub fn inward_direction(&self, e: End) -> Complex64 {
        let d = self.map.deriv(Complex64::new(e.param(), 0.0));
        let u = d / d.norm();
        match e {
            End::Start => u,
            End::End => -u,
        }
    }

    /// Same geometry traversed the other way.
    pub fn reversed(&self) -> ContourSegment {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        // keep the endpoints bit-identical after reversal
        let mut s = ContourSegment::new(self.map.reversed(), self.n).expect("valid map");
        s.nodes[0] = nodes[0];
        s.nodes[self.n - 1] = nodes[self.n - 1];
        s
    }

    pub fn with_order(&self, n: usize) -> Result<ContourSegment> {
        ContourSegment::new(self.map, n)
    }

    /// Arclength by Gauss-Legendre on the parameter interval (exact enough for diagnostics).
    pub fn length(&self) -> f64 {
        let (x, w) = gauss_legendre_16();
        x.iter()
            .zip(w.iter())
            .map(|(&t, &w)| w * self.map.deriv(Complex64::new(t, 0.0)).norm())
            .sum()
    }

    /// Approximate distance from `z` to the segment, sampled densely.
    pub fn distance(&self, z: Complex64) -> f64 {
        let tau = self.map.inverse(z);
        let mut best = (z - self.start()).norm().min((z - self.end()).norm());
        if tau.is_finite() && tau.re.abs() < 1.0 {
            best = best.min((self.map.eval_real(tau.re) - z).norm());
        }
        best
    }
}

/// A segment endpoint attached to a junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub segment: usize,
    pub end: End,
}

impl Incidence {
    pub fn inward(&self) -> bool {
        self.end == End::End
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub point: Complex64,
    pub incident: Vec<Incidence>,
}

/// Affine scaling data z = alpha k + beta for a group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub alpha: Complex64,
    pub beta: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourSet {
    pub segments: Vec<ContourSegment>,
    pub junctions: Vec<Junction>,
    pub scaling: Option<Scaling>,
}

/// Default junction tolerance: 1e-12 times the largest node modulus.
pub fn default_tolerance(segments: &[ContourSegment]) -> f64 {
    let m = segments
        .iter()
        .flat_map(|s| s.nodes.iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if m > 0.0 {
        1e-12 * m
    } else {
        1e-12
    }
}

/// Group segment endpoints that coincide within `tol`.
pub fn detect_junctions(segments: &[ContourSegment], tol: f64) -> Result<Vec<Junction>> {
    let mut junctions: Vec<Junction> = Vec::new();
    for (i, s) in segments.iter().enumerate() {
        for e in [End::Start, End::End] {
            let p = s.endpoint(e);
            let inc = Incidence { segment: i, end: e };
            match junctions.iter_mut().find(|j| (j.point - p).norm() <= tol) {
                Some(j) => j.incident.push(inc),
                None => junctions.push(Junction {
                    point: p,
                    incident: vec![inc],
                }),
            }
        }
    }
    for a in 0..junctions.len() {
        for b in a + 1..junctions.len() {
            if (junctions[a].point - junctions[b].point).norm() < 10.0 * tol {
                return Err(RhError::AmbiguousGeometry {
                    a: junctions[a].point,
                    b: junctions[b].point,
                });
            }
        }
    }
    Ok(junctions)
}

impl ContourSet {
    pub fn new(segments: Vec<ContourSegment>) -> Result<Self> {
        let tol = default_tolerance(&segments);
        Self::with_tolerance(segments, tol)
    }

    pub fn with_tolerance(segments: Vec<ContourSegment>, tol: f64) -> Result<Self> {
        let junctions = detect_junctions(&segments, tol)?;
        Ok(ContourSet {
            segments,
            junctions,
            scaling: None,
        })
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_nodes(&self) -> usize {
        self.segments.iter().map(|s| s.n).sum()
    }

    /// Same geometry with every segment at order `n`.
    pub fn with_order(&self, n: usize) -> Result<ContourSet> {
        let segments = self
            .segments
            .iter()
            .map(|s| s.with_order(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(ContourSet {
            segments,
            junctions: self.junctions.clone(),
            scaling: self.scaling,
        })
    }

    /// Junctions where two or more segments meet.
    pub fn shared_junctions(&self) -> impl Iterator<Item = &Junction> {
        self.junctions.iter().filter(|j| j.incident.len() > 1)
    }

    /// Append another set's segments (junctions recomputed on the union).
    pub fn union(sets: &[&ContourSet]) -> Result<ContourSet> {
        let segments: Vec<ContourSegment> = sets
            .iter()
            .flat_map(|s| s.segments.iter().cloned())
            .collect();
        ContourSet::new(segments)
    }
}

/// Compose every segment with z -> alpha z + beta.
pub fn scale_shift(omega: &ContourSet, alpha: Complex64, beta: Complex64) -> Result<ContourSet> {
    if alpha.norm() == 0.0 {
        return Err(RhError::DegenerateScaling);
    }
    let segments = omega
        .segments
        .iter()
        .map(|s| ContourSegment::new(s.map.then_affine(alpha, beta), s.n))
        .collect::<Result<Vec<_>>>()?;
    let junctions = omega
        .junctions
        .iter()
        .map(|j| Junction {
            point: alpha * j.point + beta,
            incident: j.incident.clone(),
        })
        .collect();
    let scaling = match omega.scaling {
        Some(s) => Scaling {
            alpha: alpha * s.alpha,
            beta: alpha * s.beta + beta,
        },
        None => Scaling { alpha, beta },
    };
    Ok(ContourSet {
        segments,
        junctions,
        scaling: Some(scaling),
    })
}

pub(crate) fn gauss_legendre_16() -> ([f64; 16], [f64; 16]) {
    const X: [f64; 8] = [
        0.0950125098376374,
        0.2816035507792589,
        0.4580167776572274,
        0.6178762444026438,
        0.7554044083550030,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    const W: [f64; 8] = [
        0.1894506104550685,
        0.1826034150449236,
        0.1691565193950025,
        0.1495959888165767,
        0.1246289712555339,
        0.0951585116824928,
        0.0622535239386479,
        0.0271524594117541,
    ];
    let mut x = [0.0; 16];
    let mut w = [0.0; 16];
    for i in 0..8 {
        x[i] = -X[7 - i];
        w[i] = W[7 - i];
        x[8 + i] = X[i];
        w[8 + i] = W[i];
    }
    (x, w)
}
