//! Reflection coefficient from decaying initial data.
//!
//! Integrates psi_x = (-iz sigma3 + [[0, u0], [u0, 0]]) psi across [-L, L] in the
//! interaction picture w = e^{izx sigma3} psi, so w' = [[0, u0 e^{2izx}], [u0 e^{-2izx}, 0]] w
//! with w(-L) = e1. Then w(L) = (a, b) and rho = b / a.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Result, RhError};
use crate::mkdv::ReflectionCoefficient;

type Profile = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterOptions {
    /// Local error tolerance per step (mixed absolute/relative).
    pub tol: f64,
    /// |u0| below this at +-L.
    pub edge: f64,
    /// Give up looking for L beyond this.
    pub max_half_width: f64,
    /// Declared half-width of the strip the returned rho is trusted on.
    pub strip: f64,
}

impl Default for ScatterOptions {
    fn default() -> Self {
        ScatterOptions {
            tol: 1e-13,
            edge: 1e-14,
            max_half_width: 200.0,
            strip: 2.0,
        }
    }
}

/// Smallest L on a 1/64 grid with |u0(x)| < edge for L <= |x| <= max_half_width.
pub fn domain_half_width<F: Fn(f64) -> f64>(u0: F, edge: f64, max_half_width: f64) -> Result<f64> {
    let h = 1.0 / 64.0;
    let m = (max_half_width / h).ceil() as usize;
    let tail = u0(max_half_width).abs().max(u0(-max_half_width).abs());
    if !(tail < edge) {
        return Err(RhError::DomainTruncation { value: tail });
    }
    let mut last = 0;
    for i in 0..=m {
        let x = i as f64 * h;
        let v = u0(x).abs().max(u0(-x).abs());
        if !v.is_finite() {
            return Err(RhError::DomainTruncation { value: v });
        }
        if v >= edge {
            last = i;
        }
    }
    Ok(((last + 1) as f64 * h).min(max_half_width))
}

// Dormand-Prince 5(4)
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type V2 = [Complex64; 2];

fn rhs(u0: &dyn Fn(f64) -> f64, z: Complex64, x: f64, w: V2) -> V2 {
    let e = (Complex64::new(0.0, 2.0 * x) * z).exp();
    let u = u0(x);
    [w[1] * u * e, w[0] * u / e]
}

const MAX_STEPS: usize = 1_000_000;

/// (a, b) = w(L) for one z.
pub fn scattering_column(u0: &dyn Fn(f64) -> f64, l: f64, z: Complex64, tol: f64) -> Result<(Complex64, Complex64)> {
    let zero = Complex64::new(0.0, 0.0);
    let mut w: V2 = [Complex64::new(1.0, 0.0), zero];
    let mut x = -l;
    let mut h = 0.01f64.min(2.0 * l);
    let mut steps = 0;
    while x < l {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(RhError::Invalid(format!("scattering integrator stalled at x = {x}, z = {z}")));
        }
        h = h.min(l - x);
        let mut k = [[zero; 2]; 7];
        for s in 0..7 {
            let mut y = w;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    y[0] += kj[0] * (a * h);
                    y[1] += kj[1] * (a * h);
                }
            }
            k[s] = rhs(u0, z, x + C[s] * h, y);
        }
        let mut y5 = w;
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let mut d = zero;
            for s in 0..7 {
                y5[i] += k[s][i] * (B5[s] * h);
                d += k[s][i] * ((B5[s] - B4[s]) * h);
            }
            err = err.max(d.norm() / (1.0 + w[i].norm()));
        }
        if !err.is_finite() {
            return Err(RhError::Invalid(format!("scattering integrator overflow at z = {z}")));
        }
        if err <= tol {
            x += h;
            w = y5;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    Ok((w[0], w[1]))
}

/// Initial data with its truncated domain.
#[derive(Clone)]
pub struct InitialData {
    u0: Arc<Profile>,
    pub half_width: f64,
    pub options: ScatterOptions,
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialData")
            .field("half_width", &self.half_width)
            .field("options", &self.options)
            .finish()
    }
}

impl InitialData {
    /// Picks L from `options.edge`; errors when u0 does not decay inside `max_half_width`.
    pub fn new<F>(u0: F, options: ScatterOptions) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let half_width = domain_half_width(&u0, options.edge, options.max_half_width)?;
        Ok(InitialData {
            u0: Arc::new(u0),
            half_width,
            options,
        })
    }

    /// Same data on a fixed domain [-l, l].
    pub fn with_half_width(mut self, l: f64) -> Self {
        self.half_width = l;
        self
    }

    /// u0(x) = -2 e^{-x^2}.
    pub fn gaussian() -> Self {
        InitialData::new(|x| -2.0 * (-x * x).exp(), ScatterOptions::default()).expect("gaussian decays")
    }

    pub fn u0(&self, x: f64) -> f64 {
        (self.u0)(x)
    }

    pub fn rho(&self, z: Complex64) -> Result<Complex64> {
        let (a, b) = scattering_column(&*self.u0, self.half_width, z, self.options.tol)?;
        Ok(b / a)
    }

    /// rho and a(z); |a| bounded away from 0 is what makes rho analytic there.
    pub fn scattering(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        scattering_column(&*self.u0, self.half_width, z, self.options.tol)
    }
}

/// Samples of rho on a real grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSamples {
    pub z: Vec<f64>,
    pub rho: Vec<Complex64>,
    /// max |rho(tol) - rho(tol / 100)| over the grid.
    pub error_estimate: f64,
}

pub fn scatter_rho(data: &InitialData, grid: &[f64]) -> Result<ScatterSamples> {
    let tight = data.options.tol / 100.0;
    let mut rho = Vec::with_capacity(grid.len());
    let mut err: f64 = 0.0;
    for &z in grid {
        let zc = Complex64::new(z, 0.0);
        let r = data.rho(zc)?;
        let (a, b) = scattering_column(&*data.u0, data.half_width, zc, tight)?;
        err = err.max((r - b / a).norm());
        rho.push(r);
    }
    Ok(ScatterSamples {
        z: grid.to_vec(),
        rho,
        error_estimate: err,
    })
}

impl ReflectionCoefficient {
    /// rho evaluated by integration at every call. Failed evaluations give NaN,
    /// which the solver reports as a non-finite jump.
    pub fn from_initial_data(data: InitialData) -> Self {
        let strip = data.options.strip;
        ReflectionCoefficient::new(
            move |z| data.rho(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
            strip,
            "scattering",
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_zero_rho() {
        let d = InitialData::new(|_| 0.0, ScatterOptions::default()).unwrap();
        let s = scatter_rho(&d, &[-1.0, 0.0, 2.5]).unwrap();
        assert!(s.rho.iter().all(|r| r.norm() == 0.0));
    }

    #[test]
    fn non_decaying_data_rejected() {
        let r = InitialData::new(|x: f64| 1.0 / (1.0 + x.abs()), ScatterOptions::default());
        assert!(matches!(r, Err(RhError::DomainTruncation { .. })));
    }

    #[test]
    fn gaussian_domain_edge() {
        let d = InitialData::gaussian();
        assert!(2.0 * (-d.half_width * d.half_width).exp() < 1e-14);
        assert!(d.half_width < 6.0, "{}", d.half_width);
    }

    #[test]
    fn rho_at_zero_independent_of_domain() {
        let d = InitialData::gaussian();
        let r8 = d.clone().with_half_width(8.0).rho(Complex64::new(0.0, 0.0)).unwrap();
        let r16 = d.with_half_width(16.0).rho(Complex64::new(0.0, 0.0)).unwrap();
        assert!((r8 - r16).norm() < 1e-8, "{r8} {r16}");
        // z = 0: the system commutes with itself, w(L) = (cosh m, sinh m) with m = int u0
        let m = -2.0 * std::f64::consts::PI.sqrt();
        assert!((r8 - Complex64::new(m.tanh(), 0.0)).norm() < 1e-10, "{r8}");
    }

    #[test]
    fn rho_decays() {
        let d = InitialData::gaussian();
        let s = scatter_rho(&d, &[0.0, 2.0, 4.0, 6.0]).unwrap();
        assert!(s.error_estimate < 1e-8, "{}", s.error_estimate);
        // exponential, not Gaussian: the potential is far from the Born regime
        assert!(s.rho[3].norm() < 1e-4, "{}", s.rho[3]);
        assert!(s.rho[0].norm() > s.rho[1].norm() && s.rho[1].norm() > s.rho[2].norm());
        // defocusing: |rho| < 1 on the line, rho(-z) = conj rho(z)
        for &z in &[0.3, 1.7] {
            let a = d.rho(Complex64::new(z, 0.0)).unwrap();
            let b = d.rho(Complex64::new(-z, 0.0)).unwrap();
            assert!(a.norm() < 1.0);
            assert!((a - b.conj()).norm() < 1e-11);
        }
    }

    #[test]
    fn real_line_problem_recovers_initial_data() {
        use crate::contour::{ContourSegment, ContourSet};
        use crate::linalg::Mat2;
        use crate::sie::{solve_rhp, JumpFunction};
        let d = Arc::new(InitialData::gaussian());
        let x = -1.0;
        let seg = ContourSegment::line(Complex64::new(-7.0, 0.0), Complex64::new(7.0, 0.0), 100).unwrap();
        let omega = ContourSet::new(vec![seg]).unwrap();
        let jump = JumpFunction::new(move |_, z: Complex64| {
            let (r, rm) = (d.rho(z).unwrap(), d.rho(-z).unwrap());
            let th = Complex64::new(0.0, 2.0 * x) * z;
            Mat2::new(1.0 - r * rm, -rm * (-th).exp(), r * th.exp(), Complex64::new(1.0, 0.0))
        });
        let sol = solve_rhp(&omega, &jump).unwrap();
        let u = Complex64::new(0.0, 2.0) * sol.residue_at_infinity().get(0, 1);
        assert!((u - Complex64::new(-2.0 * (-x * x).exp(), 0.0)).norm() < 1e-6, "{u}");
    }
}
