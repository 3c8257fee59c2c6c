use std::path::{Path, PathBuf};

use rhsolve::painleve::PIIGeometry;
use rhsolve::toy::ToyBump;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Pii,
    Mkdv,
    Toy,
    Custom,
    /// No solves; only the checks run.
    Diag,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Pii => "pii",
            ProblemKind::Mkdv => "mkdv",
            ProblemKind::Toy => "toy",
            ProblemKind::Custom => "custom",
            ProblemKind::Diag => "diag",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Iterative,
    Global,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoKind {
    #[default]
    Builtin,
    /// Scattering data of u0 = -2 e^{-x^2}.
    FromInitialData,
}

/// `count` points from `start` to `stop` inclusive, geometric when `log` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let m = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let s = i as f64 / m;
                if self.log {
                    (self.start.ln() + s * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + s * (self.stop - self.start)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stokes {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

const IDENTITY: [[f64; 2]; 4] = [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]];

fn identity_jump() -> [[f64; 2]; 4] {
    IDENTITY
}

/// A straight segment with a constant jump, entries row-major as (re, im).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSegment {
    pub from: [f64; 2],
    pub to: [f64; 2],
    #[serde(default = "identity_jump")]
    pub jump: [[f64; 2]; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub segments: Vec<CustomSegment>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

fn default_samples() -> usize {
    100
}

fn default_h() -> f64 {
    1e-2
}

/// Derived checks evaluated after the rows are in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// Max jump residual over all rows.
    JumpResidual { max: f64 },
    /// |u(a) - u(b)| at every point.
    SelfConvergence { orders: [usize; 2], max: f64 },
    /// |u'' - x u - 2u^3| by 5-point differences on a uniform x grid, at `order`.
    OdeResidual { order: usize, max: f64 },
    /// sup_x |x|^{-1/2}|u(order) - u(reference)| <= ratio * its value at the first x.
    UniformError { order: usize, reference: usize, ratio: f64 },
    /// |x|^{-1/2}|u(orders[i]) - u(reference)| decreasing in i at every x.
    SpectralOrdering { orders: Vec<usize>, reference: usize },
    /// Iterative and global solves agree at every point and order.
    MethodAgreement { max: f64 },
    /// |det Phi - 1| at seeded random points, first point, largest order.
    Det {
        max: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// |u(a) - u(b)| decreasing along t and |u(a) - u(b)| / |u(b)| non-increasing.
    RelativeErrorTrend { orders: [usize; 2] },
    /// mKdV residual u_t - 6u^2 u_x + u_xxx at every point, by central differences.
    PdeResidual {
        order: usize,
        max: f64,
        #[serde(default = "default_h")]
        h: f64,
    },
    /// Toy closed-form comparison in L2 at every order.
    ClosedForm { max: f64 },
    /// Toy growth-study slope over `xi`.
    GrowthSlope { xi: Vec<f64>, target: f64, tol: f64 },
    /// max |(C+ - C-)u - u| for random densities on lines and arcs.
    Plemelj {
        orders: Vec<usize>,
        max: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// Junction product defects of the shipped geometries.
    Product { max: f64 },
    /// Fitted slope of the coupling bound against epsilon.
    CouplingSlope { eps: Vec<f64>, target: f64, tol: f64 },
    /// Off-contour transforms against composite Gauss-Legendre quadrature.
    Cauchy {
        max: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub problem: ProblemKind,
    #[serde(default)]
    pub x: Vec<f64>,
    #[serde(default)]
    pub x_range: Option<Range>,
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default)]
    pub t_range: Option<Range>,
    /// mKdV: solve along x = -12 c^2 t^{1/3} at each t (x lists are then ignored).
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub stokes: Option<Stokes>,
    #[serde(default)]
    pub orders: Vec<usize>,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub rho: RhoKind,
    /// Toy: oscillation parameters; empty means the limiting problem.
    #[serde(default)]
    pub xi: Vec<f64>,
    #[serde(default)]
    pub bump: ToyBump,
    #[serde(default)]
    pub geometry: Option<PIIGeometry>,
    #[serde(default)]
    pub custom: Option<CustomProblem>,
    #[serde(default)]
    pub output: OutputPaths,
    /// Off-node samples per segment for the jump residual; 0 uses n - 1.
    #[serde(default)]
    pub residual_samples: usize,
    #[serde(default)]
    pub checks: Vec<Check>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn xs(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        if let Some(r) = self.x_range {
            v.extend(r.points());
        }
        v
    }

    pub fn ts(&self) -> Vec<f64> {
        let mut v = self.t.clone();
        if let Some(r) = self.t_range {
            v.extend(r.points());
        }
        v
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if let Some(r) = self.x_range.iter().chain(self.t_range.iter()).find(|r| r.count == 0) {
            return Err(CliError::Config(format!("empty range {r:?}")));
        }
        if self.problem == ProblemKind::Diag {
            if self.checks.is_empty() {
                return bad("diag config needs at least one check");
            }
            return Ok(());
        }
        if self.orders.is_empty() {
            return bad("orders must be non-empty");
        }
        if let Some(&n) = self.orders.iter().find(|&&n| n < 4) {
            return Err(CliError::Config(format!("order {n} is below 4")));
        }
        match self.problem {
            ProblemKind::Pii => {
                if self.xs().is_empty() {
                    return bad("pii needs x values");
                }
                if self.stokes.is_none() {
                    return bad("pii needs stokes");
                }
            }
            ProblemKind::Mkdv => {
                if self.ts().is_empty() {
                    return bad("mkdv needs t values");
                }
                if self.c.is_none() && self.xs().is_empty() {
                    return bad("mkdv needs c or x values");
                }
            }
            ProblemKind::Custom => match &self.custom {
                Some(c) if !c.segments.is_empty() => {}
                _ => return bad("custom needs at least one segment"),
            },
            ProblemKind::Toy | ProblemKind::Diag => {}
        }
        Ok(())
    }
}
