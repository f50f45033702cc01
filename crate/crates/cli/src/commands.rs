use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use dgtime::basis::local_matrices_l;
use dgtime::dg1::{assemble_dg1_schur, Dg1Solver};
use dgtime::dg2::{assemble_dg2_matrix, Dg2Solver};
use dgtime::metrics::{
    fit_slope, l2_final_error, seminorm_a, seminorm_b, ErrorField, SlopeFit, Weight,
};
use dgtime::model::{TimeMesh, Trajectory};
use dgtime::{condition_number, Error, Norm, SlabBasis};

use crate::config::{Exact, Method, Problem, RunConfig, Weighting};
use crate::report::{fmt_f64, log10_or_nan, write_csv};
use crate::CliError;

pub enum Solution {
    Dg1 { u: Trajectory, v: Trajectory },
    Dg2 { u: Trajectory },
}

impl Solution {
    pub fn u(&self) -> &Trajectory {
        match self {
            Solution::Dg1 { u, .. } | Solution::Dg2 { u } => u,
        }
    }
}

fn numerical(e: Error) -> CliError {
    CliError::Numerical(e.to_string())
}

fn mesh(cfg: &RunConfig, dt: f64, degree: usize) -> Result<TimeMesh, CliError> {
    TimeMesh::with_step(cfg.final_time, dt, degree).map_err(|e| CliError::Config(e.to_string()))
}

pub fn solve(problem: &Problem, cfg: &RunConfig, method: Method, dt: f64, degree: usize) -> Result<Solution, CliError> {
    let mesh = mesh(cfg, dt, degree)?;
    match method {
        Method::Dg1 => {
            let solver = Dg1Solver {
                rhs_quadrature: cfg.quadrature_rhs,
                ..Dg1Solver::default()
            };
            let (u, v) = solver.march(&problem.system, &mesh).map_err(numerical)?;
            Ok(Solution::Dg1 { u, v })
        }
        Method::Dg2 => {
            let solver = Dg2Solver {
                rhs_quadrature: cfg.quadrature_rhs,
                ..Dg2Solver::default()
            };
            let u = solver.march(&problem.system, &mesh).map_err(numerical)?;
            Ok(Solution::Dg2 { u })
        }
    }
}

pub struct Errors {
    pub seminorm: f64,
    pub l2_final: f64,
}

fn exact_of(problem: &Problem) -> Result<&Exact, CliError> {
    problem.exact.as_ref().ok_or_else(|| {
        CliError::Config("this command needs a problem with a known exact solution".into())
    })
}

pub fn errors(problem: &Problem, cfg: &RunConfig, sol: &Solution) -> Result<Errors, CliError> {
    let exact = exact_of(problem)?;
    let sys = &problem.system;
    let seminorm = match sol {
        Solution::Dg1 { u, v } => {
            let eu = ErrorField::new(u, exact.u.clone(), exact.v.clone());
            let ev = ErrorField::new(v, exact.v.clone(), exact.a.clone());
            seminorm_b(&eu, &ev, sys)
        }
        Solution::Dg2 { u } => seminorm_a(&ErrorField::new(u, exact.u.clone(), exact.v.clone()), sys),
    }
    .map_err(numerical)?;
    let weight = match cfg.weighting {
        Weighting::Euclidean => Weight::Euclidean,
        Weighting::Mass => Weight::Mass(sys.m.clone()),
    };
    let l2_final = l2_final_error(sol.u(), &exact.u, cfg.final_time, &weight).map_err(numerical)?;
    Ok(Errors { seminorm, l2_final })
}

/// `(κ_1, κ_∞)` of the slab matrix; a singular matrix gives infinity.
pub fn slab_condition(problem: &Problem, method: Method, dt: f64, degree: usize) -> Result<(f64, f64), CliError> {
    let basis = SlabBasis::with_step(degree, 0.0, dt).map_err(numerical)?;
    let matrix = match method {
        Method::Dg2 => assemble_dg2_matrix(&problem.system, &basis),
        Method::Dg1 => local_matrices_l(&basis).and_then(|l| assemble_dg1_schur(&problem.system, &l)),
    }
    .map_err(numerical)?;
    let kappa = |norm| match condition_number(&matrix, norm) {
        Ok(k) => Ok(k),
        Err(Error::SingularMatrix { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(numerical(e)),
    };
    Ok((kappa(Norm::One)?, kappa(Norm::Infinity)?))
}

fn sweep_points(cfg: &RunConfig) -> Vec<(Method, usize, f64)> {
    let mut pts = Vec::new();
    for &m in &cfg.methods {
        for &r in &cfg.degrees {
            for &dt in &cfg.time_steps {
                pts.push((m, r, dt));
            }
        }
    }
    pts
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

pub fn cmd_solve(problem: &Problem, cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let (dt, degree) = (cfg.time_steps[0], cfg.degrees[0]);
    let dim = problem.system.dim();
    let results: Vec<_> = cfg
        .methods
        .par_iter()
        .map(|&m| solve(problem, cfg, m, dt, degree).map(|s| (m, s)))
        .collect();
    for res in results {
        let (method, sol) = res?;
        let mut header = strings(&["t", "side"]);
        header.extend((1..=dim).map(|i| format!("u_{i}")));
        if let Solution::Dg1 { .. } = sol {
            header.extend((1..=dim).map(|i| format!("v_{i}")));
        }
        let mut rows = Vec::new();
        let u = sol.u();
        let bps = u.mesh().breakpoints().to_vec();
        for n in 0..bps.len() - 1 {
            let (a, b) = (bps[n], bps[n + 1]);
            let k = cfg.samples_per_slab;
            let mut samples = vec![(a, "right")];
            samples.extend((1..=k).map(|j| (a + (b - a) * j as f64 / (k + 1) as f64, "interior")));
            samples.push((b, "left"));
            for (t, side) in samples {
                let mut row = vec![fmt_f64(t), side.to_string()];
                row.extend(u.slab_value(n, t).into_iter().map(fmt_f64));
                if let Solution::Dg1 { v, .. } = &sol {
                    row.extend(v.slab_value(n, t).into_iter().map(fmt_f64));
                }
                rows.push(row);
            }
        }
        write_csv(&out.join(format!("solve_{}.csv", method.name())), &cfg.hash(), &header, &rows)?;
    }
    Ok(())
}

fn fit_json(fit: Result<SlopeFit, Error>) -> serde_json::Value {
    match fit {
        Ok(f) => json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "residual": f.residual,
            "samples": f.samples,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn cmd_convergence(problem: &Problem, cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    exact_of(problem)?;
    if cfg.time_steps.len() < 3 {
        return Err(CliError::Config("convergence needs at least 3 time steps".into()));
    }
    let pts = sweep_points(cfg);
    let results: Vec<Result<(Errors, f64, f64), CliError>> = pts
        .par_iter()
        .map(|&(m, r, dt)| {
            let start = Instant::now();
            let sol = solve(problem, cfg, m, dt, r)?;
            let errs = errors(problem, cfg, &sol)?;
            let elapsed = start.elapsed().as_secs_f64();
            let (k1, _) = slab_condition(problem, m, dt, r)?;
            Ok((errs, k1, elapsed))
        })
        .collect();
    let header = strings(&[
        "method",
        "degree",
        "dt",
        "log10_dt",
        "seminorm_error",
        "log10_seminorm_error",
        "l2_final_error",
        "log10_l2_final_error",
        "condition_one",
    ]);
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (&(m, r, dt), res) in pts.iter().zip(results) {
        let (e, k1, wall) = res?;
        rows.push(vec![
            m.name().to_string(),
            r.to_string(),
            fmt_f64(dt),
            fmt_f64(dt.log10()),
            fmt_f64(e.seminorm),
            fmt_f64(log10_or_nan(e.seminorm)),
            fmt_f64(e.l2_final),
            fmt_f64(log10_or_nan(e.l2_final)),
            fmt_f64(k1),
        ]);
        records.push((m, r, dt, e, wall));
    }
    let hash = cfg.hash();
    write_csv(&out.join("convergence.csv"), &hash, &header, &rows)?;

    let mut fits = Vec::new();
    for &m in &cfg.methods {
        for &r in &cfg.degrees {
            let sel: Vec<_> = records.iter().filter(|x| x.0 == m && x.1 == r).collect();
            let semi: Vec<_> = sel.iter().map(|x| (x.2, x.3.seminorm)).collect();
            let l2: Vec<_> = sel.iter().map(|x| (x.2, x.3.l2_final)).collect();
            let wall: f64 = sel.iter().map(|x| x.4).sum();
            fits.push(json!({
                "method": m.name(),
                "degree": r,
                "seminorm": fit_json(fit_slope(&semi)),
                "l2_final": fit_json(fit_slope(&l2)),
                "wall_time_seconds": wall,
            }));
        }
    }
    let summary = json!({
        "tool": "dgtime",
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": hash,
        "fits": fits,
    });
    let text = serde_json::to_string_pretty(&summary).expect("json serializes");
    let path = out.join("convergence_summary.json");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn cmd_conditioning(problem: &Problem, cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let pts = sweep_points(cfg);
    let results: Vec<_> = pts
        .par_iter()
        .map(|&(m, r, dt)| slab_condition(problem, m, dt, r))
        .collect();
    let header = strings(&["method", "degree", "dt", "log10_dt", "kappa_one", "kappa_inf", "log10_kappa_one"]);
    let mut rows = Vec::new();
    for (&(m, r, dt), res) in pts.iter().zip(results) {
        let (k1, ki) = res?;
        rows.push(vec![
            m.name().to_string(),
            r.to_string(),
            fmt_f64(dt),
            fmt_f64(dt.log10()),
            fmt_f64(k1),
            fmt_f64(ki),
            fmt_f64(log10_or_nan(k1)),
        ]);
    }
    write_csv(&out.join("conditioning.csv"), &cfg.hash(), &header, &rows)
}

pub fn cmd_compare(problem: &Problem, cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    exact_of(problem)?;
    let dt = cfg.time_steps[0];
    let pts: Vec<(usize, Method)> = cfg
        .degrees
        .iter()
        .flat_map(|&r| cfg.methods.iter().map(move |&m| (r, m)))
        .collect();
    let results: Vec<_> = pts
        .par_iter()
        .map(|&(r, m)| solve(problem, cfg, m, dt, r).and_then(|s| errors(problem, cfg, &s)))
        .collect();
    let mut header = strings(&["degree", "dt"]);
    for m in &cfg.methods {
        header.push(format!("{}_seminorm_error", m.name()));
        header.push(format!("{}_l2_final_error", m.name()));
    }
    let mut rows = Vec::new();
    let mut it = results.into_iter();
    for &r in &cfg.degrees {
        let mut row = vec![r.to_string(), fmt_f64(dt)];
        for _ in &cfg.methods {
            let e = it.next().expect("one result per point")?;
            row.push(fmt_f64(e.seminorm));
            row.push(fmt_f64(e.l2_final));
        }
        rows.push(row);
    }
    write_csv(&out.join("compare.csv"), &cfg.hash(), &header, &rows)
}
