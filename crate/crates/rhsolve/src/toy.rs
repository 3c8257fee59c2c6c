//! Scalar problem on [-1, 1] with jump 1 + phi(x) (1 + xi^{-1/2} e^{i xi x}).
//!
//! Without the oscillatory term the solution is nu = exp(C log(1 + phi)).
//! As xi grows the oscillatory solution mu approaches nu in L2 at rate xi^{-1/2}.
//! Both closed forms are evaluated from a resolved Chebyshev expansion of the
//! log of the jump, which stays cheap for xi far beyond the reach of a dense
//! collocation solve.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::{basis_interior, basis_off, Side};
use crate::chebyshev::{chebyshev_points, clenshaw, integrate_values, values_to_coeffs_fft};
use crate::contour::{ContourSegment, ContourSet};
use crate::error::{Result, RhError};
use crate::sie::{solve_rhp, JumpFunction, RHSolution};

/// Bump phi with max 1/2, supported in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToyBump {
    /// 1/2 (1 - x^2)^p
    Poly(u32),
    /// 1/2 exp(1 - 1/(1 - x^2)); smooth but not analytic, so expansions converge slowly.
    Exp,
}

impl Default for ToyBump {
    fn default() -> Self {
        ToyBump::Poly(3)
    }
}

impl ToyBump {
    pub fn phi(&self, x: f64) -> f64 {
        if x.abs() >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - x * x;
        match *self {
            ToyBump::Poly(p) => 0.5 * q.powi(p as i32),
            ToyBump::Exp => 0.5 * (1.0 - 1.0 / q).exp(),
        }
    }
}

/// The toy problem; `xi = None` is the limiting (non-oscillatory) problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyProblem {
    pub bump: ToyBump,
    pub xi: Option<f64>,
}

impl ToyProblem {
    pub fn limit(bump: ToyBump) -> Self {
        ToyProblem { bump, xi: None }
    }

    pub fn oscillatory(bump: ToyBump, xi: f64) -> Self {
        ToyProblem { bump, xi: Some(xi) }
    }

    pub fn jump_value(&self, x: f64) -> Complex64 {
        let phi = self.bump.phi(x);
        let osc = match self.xi {
            Some(xi) => Complex64::from_polar(xi.powf(-0.5), xi * x),
            None => Complex64::new(0.0, 0.0),
        };
        1.0 + phi * (1.0 + osc)
    }

    pub fn jump(&self) -> JumpFunction {
        let me = *self;
        JumpFunction::scalar(move |_, z| me.jump_value(z.re)).with_tag("toy")
    }

    /// Suggested collocation order: enough nodes per oscillation plus a floor.
    pub fn suggested_order(&self) -> usize {
        match self.xi {
            Some(xi) => 32.max((3.0 * xi) as usize + 32),
            None => 32,
        }
    }

    pub fn solve(&self, n: usize) -> Result<RHSolution> {
        solve_rhp(&interval(n)?, &self.jump())
    }

    /// Closed form exp(C log J), resolved to relative coefficient tolerance `tol`.
    /// Needs Re J > 0, which holds for xi >= 4; smaller xi are sampled and checked.
    pub fn closed_form(&self, tol: f64) -> Result<ScalarClosedForm> {
        let me = *self;
        if self.xi.is_some_and(|xi| xi < 4.0) {
            for k in 0..=4000 {
                let x = -1.0 + k as f64 / 2000.0;
                let j = me.jump_value(x);
                if j.re <= 0.0 {
                    return Err(RhError::BranchCut(j));
                }
            }
        }
        ScalarClosedForm::resolve(move |x| me.jump_value(x).ln(), tol)
    }
}

/// The interval [-1, 1] as a single segment of order n.
pub fn interval(n: usize) -> Result<ContourSet> {
    ContourSet::new(vec![ContourSegment::line(
        Complex64::new(-1.0, 0.0),
        Complex64::new(1.0, 0.0),
        n,
    )?])
}

/// exp(C f) for f on [-1, 1], with f given by Chebyshev coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarClosedForm {
    pub coeffs: Vec<Complex64>,
}

/// Largest grid tried by [`ScalarClosedForm::resolve`].
pub const MAX_RESOLVE: usize = (1 << 18) + 1;

impl ScalarClosedForm {
    /// Double the grid until the last eighth of the coefficients falls below
    /// `tol` times the largest one.
    pub fn resolve<F: Fn(f64) -> Complex64>(f: F, tol: f64) -> Result<Self> {
        let mut m = 65;
        loop {
            let x = chebyshev_points(m)?;
            let vals: Vec<Complex64> = x.iter().map(|&t| f(t)).collect();
            let c = values_to_coeffs_fft(&vals);
            let big = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let tail = c[m - m / 8..].iter().map(|v| v.norm()).fold(0.0, f64::max);
            if tail <= tol * big.max(f64::MIN_POSITIVE) {
                let keep = c.iter().rposition(|v| v.norm() > tol * big * 1e-2).map_or(1, |k| k + 1);
                let mut coeffs = c;
                coeffs.truncate(keep);
                return Ok(ScalarClosedForm { coeffs });
            }
            if m >= MAX_RESOLVE {
                return Err(RhError::Invalid(format!(
                    "log jump not resolved with {m} points (tail {tail:.2e})"
                )));
            }
            m = 2 * m - 1;
        }
    }

    fn exponent_boundary(&self, x: f64, side: Side) -> Complex64 {
        let f = basis_interior(x, side, self.coeffs.len());
        let s: Complex64 = self.coeffs.iter().zip(&f).map(|(c, f)| c * f).sum();
        s / Complex64::new(0.0, 2.0 * PI)
    }

    /// Boundary value at x in (-1, 1).
    pub fn boundary(&self, x: f64, side: Side) -> Complex64 {
        self.exponent_boundary(x, side).exp()
    }

    /// Value off [-1, 1].
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let f = basis_off(z, self.coeffs.len());
        let s: Complex64 = self.coeffs.iter().zip(&f).map(|(c, f)| c * f).sum();
        (s / Complex64::new(0.0, 2.0 * PI)).exp()
    }

    /// The exponent function itself at x.
    pub fn log_jump(&self, x: f64) -> Complex64 {
        clenshaw(&self.coeffs, Complex64::new(x, 0.0))
    }
}

/// L2 norm on [-1, 1] of f sampled on an m-point Chebyshev grid (m odd, >= 3).
///
/// Endpoints are evaluated as given; callers whose functions have one-sided
/// values there should return the limit.
pub fn l2_norm<F: Fn(f64) -> Complex64>(f: F, m: usize) -> Result<f64> {
    let x = chebyshev_points(m)?;
    let sq: Vec<Complex64> = x.iter().map(|&t| Complex64::new(f(t).norm_sqr(), 0.0)).collect();
    Ok(integrate_values(&sq).re.max(0.0).sqrt())
}

/// One row of the growth study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub xi: f64,
    /// ||mu+ - nu+|| in L2(-1, 1).
    pub distance: f64,
    /// Coefficients used for the log of the oscillatory jump.
    pub resolution: usize,
}

/// Quadrature grid used by [`growth_study`].
pub const GROWTH_GRID: usize = 4097;

/// ||mu+ - nu+||_{L2(-1,1)} for each xi, with both solutions in closed form.
pub fn growth_study(bump: ToyBump, xis: &[f64]) -> Result<Vec<GrowthRow>> {
    let nu = ToyProblem::limit(bump).closed_form(1e-15)?;
    xis.iter()
        .map(|&xi| {
            let mu = ToyProblem::oscillatory(bump, xi).closed_form(1e-14)?;
            let d = l2_norm(
                |x| {
                    if x.abs() >= 1.0 {
                        // both are 1 where the jump is trivial
                        Complex64::new(0.0, 0.0)
                    } else {
                        mu.boundary(x, Side::Plus) - nu.boundary(x, Side::Plus)
                    }
                },
                GROWTH_GRID,
            )?;
            Ok(GrowthRow {
                xi,
                distance: d,
                resolution: mu.coeffs.len(),
            })
        })
        .collect()
}

/// Least-squares slope of log distance against log xi.
pub fn fitted_slope(rows: &[GrowthRow]) -> f64 {
    let lx: Vec<f64> = rows.iter().map(|r| r.xi.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.distance.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
