//! Executes configured runs and writes their artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lpdg_core::verify::cases::CaseSetup;
use lpdg_core::verify::norms::{error_norms, Component, ErrorReport};
use lpdg_core::{advance, Basis, Boundary, SolutionField, StepReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BoundaryChoice, RunConfig};

pub struct RunOutcome {
    pub field: SolutionField,
    pub steps: Vec<StepReport>,
    pub errors: Option<ErrorReport>,
}

fn with_boundary(field: &mut SolutionField, choice: Option<BoundaryChoice>) {
    match choice {
        None => {}
        Some(BoundaryChoice::Periodic) => field.boundary = Boundary::Periodic,
        Some(BoundaryChoice::FarField) => {
            let n = field.n_elem();
            field.boundary = Boundary::FarField { left: field.state(0, 0), right: field.state(n - 1, field.degree) };
        }
    }
}

pub fn solve(cfg: &RunConfig, n_elem: usize) -> Result<RunOutcome> {
    let setup = CaseSetup::new(cfg.case);
    let basis = Basis::shared(cfg.p)?;
    let mut field = setup.initial_field(&basis, n_elem)?;
    with_boundary(&mut field, cfg.boundary);
    let source = setup.source.clone();
    let (field, steps) = advance(
        &setup.model,
        &basis,
        &field,
        cfg.rk,
        cfg.t_end,
        &cfg.solver,
        source.as_deref().map(|s| s as _),
    )
    .with_context(|| format!("{} with p = {}, {} elements", cfg.case.name(), cfg.p, n_elem))?;
    let errors = match &setup.exact {
        Some(ex) => Some(error_norms(&basis, &field, Component::Density, |x| ex(x, field.time).rho)?),
        None => None,
    };
    Ok(RunOutcome { field, steps, errors })
}

pub fn solution_csv(basis: &Basis, field: &SolutionField) -> String {
    let mut s = String::from("x,rho,u\n");
    for j in 0..field.n_elem() {
        for k in 0..basis.len() {
            let u = field.state(j, k);
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", field.node_position(basis, j, k), u.rho, u.velocity());
        }
    }
    s
}

pub fn monitor_csv(steps: &[StepReport], h: f64, monitors: bool) -> String {
    let mut s = String::from("step,time,dt,a,cfl,cfl_post,a_retries,dt_halvings,min_density,theta_pos,theta_energy");
    if monitors {
        s.push_str(
            ",violations,min_mean_density,min_convex_coeff,convex_sum_error,convex_residual,\
             nodal_entropy_slack,nodal_energy_slack,cell_entropy_slack,cell_energy_slack,j_exact,j_drift,mass_change,momentum_change",
        );
    }
    s.push('\n');
    for (i, r) in steps.iter().enumerate() {
        let _ = write!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e}",
            i + 1,
            r.time,
            r.dt_used,
            r.a_used,
            r.cfl_number(h),
            r.cfl_post,
            r.retries,
            r.dt_halvings,
            r.min_density,
            r.min_positivity_theta,
            r.min_entropy_theta
        );
        if monitors {
            match &r.monitor {
                Some(m) => {
                    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
                    let _ = write!(
                        s,
                        ",{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{},{}",
                        m.violations(),
                        m.min_mean_density,
                        m.min_convex_coeff,
                        m.max_convex_sum_error,
                        m.max_convex_residual,
                        m.min_nodal_entropy_slack,
                        m.min_nodal_energy_slack,
                        m.min_cell_entropy_slack,
                        m.min_cell_energy_slack,
                        m.j_exact,
                        m.max_j_drift,
                        opt(m.mass_change),
                        opt(m.momentum_change)
                    );
                }
                None => s.push_str(",,,,,,,,,,,,"),
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct Norms {
    l1: f64,
    l2: f64,
    linf: f64,
}

#[derive(Serialize)]
struct Metadata<'a> {
    case: &'a str,
    kappa: f64,
    gamma: f64,
    x_left: f64,
    x_right: f64,
    boundary: String,
    p: usize,
    n_elem: usize,
    h: f64,
    rk: &'a str,
    t_end: f64,
    cfl_safety: f64,
    a_safety: f64,
    dt_max: Option<f64>,
    max_a_retries: usize,
    subchar_samples: usize,
    strict_cfl: bool,
    eps_pos: f64,
    energy_limiter: bool,
    limiter_root_tol: f64,
    mean_reference: String,
    update: &'static str,
    monitors: bool,
    source: bool,
    steps: usize,
    monitor_violations: Option<usize>,
    density_error: Option<Norms>,
    a_history: Vec<f64>,
    dt_history: Vec<f64>,
}

pub fn metadata_json(cfg: &RunConfig, out: &RunOutcome) -> Result<String> {
    let setup = CaseSetup::new(cfg.case);
    let f = &out.field;
    let boundary = match f.boundary {
        Boundary::Periodic => "periodic".to_string(),
        Boundary::FarField { left, right } => format!(
            "far-field (left rho={:.16e} u={:.16e}; right rho={:.16e} u={:.16e})",
            left.rho,
            left.velocity(),
            right.rho,
            right.velocity()
        ),
    };
    let monitor_violations = cfg
        .solver
        .monitors
        .then(|| out.steps.iter().filter_map(|r| r.monitor.as_ref()).map(|m| m.violations()).sum());
    let meta = Metadata {
        case: cfg.case.name(),
        kappa: setup.model.kappa(),
        gamma: setup.model.gamma(),
        x_left: f.mesh.x_left,
        x_right: f.mesh.x_right(),
        boundary,
        p: cfg.p,
        n_elem: f.n_elem(),
        h: f.mesh.h,
        rk: cfg.rk.name(),
        t_end: cfg.t_end,
        cfl_safety: cfg.solver.cfl_safety,
        a_safety: cfg.solver.a_safety,
        dt_max: cfg.solver.dt_max,
        max_a_retries: cfg.solver.max_a_retries,
        subchar_samples: cfg.solver.subchar_samples,
        strict_cfl: cfg.solver.strict_cfl,
        eps_pos: cfg.solver.limiter.eps_pos,
        energy_limiter: cfg.solver.limiter.entropy_enabled,
        limiter_root_tol: cfg.solver.limiter.root_tol,
        mean_reference: format!("{:?}", cfg.solver.limiter.mean_reference).to_lowercase(),
        update: cfg.solver.update.name(),
        monitors: cfg.solver.monitors,
        source: setup.source.is_some(),
        steps: out.steps.len(),
        monitor_violations,
        density_error: out.errors.map(|e| Norms { l1: e.l1, l2: e.l2, linf: e.linf }),
        a_history: out.steps.iter().map(|r| r.a_used).collect(),
        dt_history: out.steps.iter().map(|r| r.dt_used).collect(),
    };
    Ok(serde_json::to_string_pretty(&meta)? + "\n")
}

fn write(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    let basis = Basis::shared(cfg.p)?;
    for &n in &cfg.n_elem {
        let dir = if cfg.n_elem.len() > 1 { cfg.out_dir.join(format!("n{n}")) } else { cfg.out_dir.clone() };
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let out = solve(cfg, n)?;
        write(&dir.join("solution.csv"), &solution_csv(&basis, &out.field))?;
        write(&dir.join("monitor.csv"), &monitor_csv(&out.steps, out.field.mesh.h, cfg.solver.monitors))?;
        write(&dir.join("metadata.json"), &metadata_json(cfg, &out)?)?;
        let mut line = format!("{} p={} n_elem={} steps={}", cfg.case.name(), cfg.p, n, out.steps.len());
        if let Some(e) = out.errors {
            let _ = write!(line, " L1={:.5e} L2={:.5e} Linf={:.5e}", e.l1, e.l2, e.linf);
        }
        if cfg.solver.monitors {
            let v: usize = out.steps.iter().filter_map(|r| r.monitor.as_ref()).map(|m| m.violations()).sum();
            let _ = write!(line, " monitor_violations={v}");
        }
        println!("{line}");
    }
    Ok(())
}

pub struct ConvergenceRow {
    pub n_elem: usize,
    pub h: f64,
    pub err: ErrorReport,
    pub orders: Option<[f64; 3]>,
}

pub fn convergence_rows(cfg: &RunConfig) -> Result<Vec<ConvergenceRow>> {
    if cfg.n_elem.len() < 2 {
        bail!("a convergence study needs at least two meshes, got {:?}", cfg.n_elem);
    }
    if CaseSetup::new(cfg.case).exact.is_none() {
        bail!("case '{}' has no exact solution", cfg.case.name());
    }
    let results: Vec<Result<(usize, f64, ErrorReport)>> = cfg
        .n_elem
        .par_iter()
        .map(|&n| {
            let out = solve(cfg, n)?;
            Ok((n, out.field.mesh.h, out.errors.expect("exact solution present")))
        })
        .collect();
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for r in results {
        let (n_elem, h, err) = r?;
        let orders = rows.last().map(|prev: &ConvergenceRow| {
            let ratio = (prev.h / h).log2();
            let o = ErrorReport::orders(&prev.err, &err);
            [o[0] / ratio, o[1] / ratio, o[2] / ratio]
        });
        rows.push(ConvergenceRow { n_elem, h, err, orders });
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("n_elem,h,l1,order_l1,l2,order_l2,linf,order_linf\n");
    for r in rows {
        let o = |i: usize| r.orders.map(|o| format!("{:.16e}", o[i])).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{},{:.16e},{},{:.16e},{}",
            r.n_elem,
            r.h,
            r.err.l1,
            o(0),
            r.err.l2,
            o(1),
            r.err.linf,
            o(2)
        );
    }
    s
}

pub fn convergence_table(cfg: &RunConfig, rows: &[ConvergenceRow]) -> String {
    let mut s = format!("{} p={} rk={} t={}\n", cfg.case.name(), cfg.p, cfg.rk.name(), cfg.t_end);
    let _ = writeln!(s, "{:>8} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}", "h", "L1", "O1", "L2", "O2", "Linf", "Oinf");
    for r in rows {
        let o = |i: usize| r.orders.map(|o| format!("{:.2}", o[i])).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:>8} {:>12.5e} {:>6} {:>12.5e} {:>6} {:>12.5e} {:>6}",
            format!("1/{}", (1.0 / r.h).round()),
            r.err.l1,
            o(0),
            r.err.l2,
            o(1),
            r.err.linf,
            o(2)
        );
    }
    s
}

pub fn convergence(cfg: &RunConfig) -> Result<()> {
    let rows = convergence_rows(cfg)?;
    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let table = convergence_table(cfg, &rows);
    write(&cfg.out_dir.join("convergence.csv"), &convergence_csv(&rows))?;
    write(&cfg.out_dir.join("convergence.txt"), &table)?;
    print!("{table}");
    Ok(())
}
