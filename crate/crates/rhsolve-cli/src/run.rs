use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use rhsolve::contour::{ContourSegment, ContourSet};
use rhsolve::error::RhError;
use rhsolve::linalg::Mat2;
use rhsolve::mkdv::{build_mkdv_rhp, mkdv_reconstruct, MKdVProblem, ReflectionCoefficient};
use rhsolve::painleve::{build_pii_rhp, pii_reconstruct, pii_scale, PIIProblem, StokesData};
use rhsolve::scaled::{solve_global, solve_iterative, ScaledSolution};
use rhsolve::scatter::InitialData;
use rhsolve::sie::{solve_rhp, JumpFunction, RHSolution};
use rhsolve::toy::ToyProblem;
use serde::Serialize;

use crate::config::{CustomProblem, ExperimentConfig, Method, ProblemKind, RhoKind};
use crate::error::CliResult;

/// A parameter point; unused coordinates are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: Option<f64>,
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub problem: ProblemKind,
    pub point: Point,
    pub n: usize,
    pub u: Complex64,
    pub jump_residual: f64,
    pub cond_estimate: f64,
    pub runtime_ms: f64,
    pub error: Option<RowError>,
}

/// What a single solve reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solved {
    pub u: Complex64,
    pub jump_residual: f64,
    pub cond_estimate: f64,
}

/// Thread count from RH_THREADS, else the machine's parallelism.
pub fn thread_count() -> usize {
    std::env::var("RH_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn points(cfg: &ExperimentConfig) -> Vec<Point> {
    match cfg.problem {
        ProblemKind::Pii => cfg.xs().into_iter().map(|x| Point { x: Some(x), t: None }).collect(),
        ProblemKind::Mkdv => match cfg.c {
            Some(c) => cfg
                .ts()
                .into_iter()
                .map(|t| Point {
                    x: Some(-12.0 * c * c * t.cbrt()),
                    t: Some(t),
                })
                .collect(),
            None => {
                let xs = cfg.xs();
                cfg.ts()
                    .into_iter()
                    .flat_map(|t| xs.iter().map(move |&x| Point { x: Some(x), t: Some(t) }))
                    .collect()
            }
        },
        ProblemKind::Toy if !cfg.xi.is_empty() => cfg.xi.iter().map(|&xi| Point { x: Some(xi), t: None }).collect(),
        ProblemKind::Toy | ProblemKind::Custom => vec![Point { x: None, t: None }],
        ProblemKind::Diag => Vec::new(),
    }
}

pub fn rho_of(kind: RhoKind) -> ReflectionCoefficient {
    match kind {
        RhoKind::Builtin => ReflectionCoefficient::builtin(),
        RhoKind::FromInitialData => ReflectionCoefficient::from_initial_data(InitialData::gaussian()),
    }
}

pub fn stokes_of(cfg: &ExperimentConfig) -> Result<StokesData, RhError> {
    let s = cfg
        .stokes
        .ok_or_else(|| RhError::Invalid("missing stokes".into()))?;
    StokesData::real(s.s1, s.s2, s.s3)
}

pub fn pii_problem(cfg: &ExperimentConfig, x: f64, n: usize) -> Result<PIIProblem, RhError> {
    let p = PIIProblem::new(x, stokes_of(cfg)?, n)?;
    Ok(match cfg.geometry {
        Some(g) => p.with_geometry(g),
        None => p,
    })
}

/// mKdV problem at a point: on the ray when `c` is set, else through (x, t).
pub fn mkdv_problem(cfg: &ExperimentConfig, p: Point, n: usize) -> Result<MKdVProblem, RhError> {
    let t = p.t.ok_or_else(|| RhError::Invalid("mkdv point without t".into()))?;
    match (cfg.c, p.x) {
        (Some(c), _) => MKdVProblem::new(t, c, n),
        (None, Some(x)) => MKdVProblem::from_xt(x, t, n),
        (None, None) => Err(RhError::Invalid("mkdv point without x".into())),
    }
}

fn max_cond(s: &ScaledSolution) -> f64 {
    s.stages.iter().map(|st| st.info.cond_estimate).fold(0.0, f64::max)
}

pub fn custom_rhp(custom: &CustomProblem, n: usize) -> Result<(ContourSet, JumpFunction), RhError> {
    let z = |p: [f64; 2]| Complex64::new(p[0], p[1]);
    let segs = custom
        .segments
        .iter()
        .map(|s| ContourSegment::line(z(s.from), z(s.to), n))
        .collect::<Result<Vec<_>, _>>()?;
    let mats: Vec<Mat2> = custom
        .segments
        .iter()
        .map(|s| Mat2::new(z(s.jump[0]), z(s.jump[1]), z(s.jump[2]), z(s.jump[3])))
        .collect();
    Ok((ContourSet::new(segs)?, JumpFunction::new(move |k, _| mats[k]).with_tag("custom")))
}

/// One solve. `samples` is the off-node sample count for the jump residual.
pub fn solve_point(
    cfg: &ExperimentConfig,
    rho: &ReflectionCoefficient,
    p: Point,
    n: usize,
    method: Method,
) -> Result<Solved, RhError> {
    let samples = cfg.residual_samples;
    let from_global = |sol: RHSolution, scale: Complex64| -> Result<Solved, RhError> {
        Ok(Solved {
            u: scale * sol.residue_at_infinity().get(0, 1),
            jump_residual: sol.jump_residual(samples)?,
            cond_estimate: sol.info.cond_estimate,
        })
    };
    match cfg.problem {
        ProblemKind::Pii => {
            let x = p.x.ok_or_else(|| RhError::Invalid("pii point without x".into()))?;
            let prob = pii_problem(cfg, x, n)?;
            let sp = build_pii_rhp(&prob)?;
            match method {
                Method::Iterative => {
                    let s = solve_iterative(&sp)?;
                    Ok(Solved {
                        u: pii_reconstruct(&s, &prob),
                        jump_residual: s.jump_residual(samples)?,
                        cond_estimate: max_cond(&s),
                    })
                }
                Method::Global => from_global(solve_global(&sp)?, Complex64::new(pii_scale(x), 0.0)),
            }
        }
        ProblemKind::Mkdv => {
            let prob = mkdv_problem(cfg, p, n)?;
            let sp = build_mkdv_rhp(&prob, rho)?;
            match method {
                Method::Iterative => {
                    let s = solve_iterative(&sp)?;
                    Ok(Solved {
                        u: mkdv_reconstruct(&s, &prob),
                        jump_residual: s.jump_residual(samples)?,
                        cond_estimate: max_cond(&s),
                    })
                }
                Method::Global => from_global(solve_global(&sp)?, Complex64::new(0.0, 2.0 * prob.z0)),
            }
        }
        ProblemKind::Toy => {
            let prob = match p.x {
                Some(xi) => ToyProblem::oscillatory(cfg.bump, xi),
                None => ToyProblem::limit(cfg.bump),
            };
            let sol = prob.solve(n)?;
            Ok(Solved {
                u: sol.residue_at_infinity().get(0, 0),
                jump_residual: sol.jump_residual(samples)?,
                cond_estimate: sol.info.cond_estimate,
            })
        }
        ProblemKind::Custom => {
            let custom = cfg
                .custom
                .as_ref()
                .ok_or_else(|| RhError::Invalid("custom problem missing".into()))?;
            let (cs, jump) = custom_rhp(custom, n)?;
            from_global(solve_rhp(&cs, &jump)?, Complex64::new(1.0, 0.0))
        }
        ProblemKind::Diag => Err(RhError::Invalid("diag configs have no rows".into())),
    }
}

fn row_for(cfg: &ExperimentConfig, rho: &ReflectionCoefficient, p: Point, n: usize) -> Row {
    let start = Instant::now();
    let res = solve_point(cfg, rho, p, n, cfg.method);
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    match res {
        Ok(s) => Row {
            problem: cfg.problem,
            point: p,
            n,
            u: s.u,
            jump_residual: s.jump_residual,
            cond_estimate: s.cond_estimate,
            runtime_ms,
            error: None,
        },
        Err(e) => {
            log::warn!("{} at {:?}, n = {n}: {e}", cfg.problem.name(), p);
            Row {
                problem: cfg.problem,
                point: p,
                n,
                u: Complex64::new(f64::NAN, f64::NAN),
                jump_residual: f64::NAN,
                cond_estimate: f64::NAN,
                runtime_ms,
                error: Some(RowError {
                    code: e.code().to_string(),
                    message: e.to_string(),
                }),
            }
        }
    }
}

/// Run every (point, order) pair; rows come back in config order.
pub fn run_rows(cfg: &ExperimentConfig, threads: usize) -> CliResult<Vec<Row>> {
    let rho = rho_of(cfg.rho);
    let tasks: Vec<(usize, Point, usize)> = points(cfg)
        .into_iter()
        .flat_map(|p| cfg.orders.iter().map(move |&n| (p, n)))
        .enumerate()
        .map(|(i, (p, n))| (i, p, n))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| crate::error::CliError::Config(format!("thread pool: {e}")))?;
    let mut rows: Vec<(usize, Row)> =
        pool.install(|| tasks.par_iter().map(|&(i, p, n)| (i, row_for(cfg, &rho, p, n))).collect());
    rows.sort_by_key(|(i, _)| *i);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}
