//! Run configuration: a flat TOML file merged with command-line flags (flags win).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use lpdg_core::verify::cases::{CaseKind, CaseSetup};
use lpdg_core::{MeanReference, RkScheme, SolverConfig, UpdateForm};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Case id: manufactured, advection, uniform, RP1..RP4
    #[arg(long)]
    pub case: Option<String>,
    /// Polynomial degree
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of elements; comma-separated list for sweeps
    #[arg(long, value_delimiter = ',')]
    pub n_elem: Option<Vec<usize>>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// CFL safety factor in (0, 1)
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Safety factor on the relaxation parameter
    #[arg(long)]
    pub a_safety: Option<f64>,
    /// Density floor of the positivity limiter
    #[arg(long)]
    pub eps_pos: Option<f64>,
    /// periodic or far-field
    #[arg(long)]
    pub boundary: Option<String>,
    /// euler1, heun2, shu-osher3, ssprk54 (default: order p+1)
    #[arg(long)]
    pub rk: Option<String>,
    /// Record stability monitors every stage
    #[arg(long)]
    pub monitors: bool,
    /// Enable or disable the nodal energy limiter (default depends on the case)
    #[arg(long)]
    pub energy_limiter: Option<bool>,
    /// Halve dt when the a-posteriori CFL value is violated
    #[arg(long)]
    pub strict_cfl: bool,
    /// Stage update: conservative (default) or split
    #[arg(long)]
    pub update: Option<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Flat TOML file with the same keys as the long flags (underscores)
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    case: Option<String>,
    p: Option<usize>,
    n_elem: Option<NElem>,
    t_end: Option<f64>,
    cfl: Option<f64>,
    a_safety: Option<f64>,
    eps_pos: Option<f64>,
    boundary: Option<String>,
    rk: Option<String>,
    monitors: Option<bool>,
    energy_limiter: Option<bool>,
    strict_cfl: Option<bool>,
    mean_reference: Option<String>,
    update: Option<String>,
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NElem {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryChoice {
    Periodic,
    FarField,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: CaseKind,
    pub p: usize,
    pub n_elem: Vec<usize>,
    pub t_end: f64,
    pub rk: RkScheme,
    pub boundary: Option<BoundaryChoice>,
    pub solver: SolverConfig,
    pub out_dir: PathBuf,
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let case_name = args.case.clone().or(file.case).context("no case given (--case)")?;
        let case = CaseKind::parse(&case_name).with_context(|| format!("unknown case '{case_name}'"))?;
        let setup = CaseSetup::new(case);
        let p = args.p.or(file.p).unwrap_or(1);
        if !(1..=3).contains(&p) {
            bail!("p must be 1, 2 or 3 for registered cases, got {p}");
        }
        let n_elem = match (&args.n_elem, file.n_elem) {
            (Some(v), _) => v.clone(),
            (None, Some(NElem::One(n))) => vec![n],
            (None, Some(NElem::Many(v))) => v,
            (None, None) => vec![if matches!(case, CaseKind::Riemann(_)) { 200 } else { 16 }],
        };
        if n_elem.is_empty() || n_elem.iter().any(|&n| n < 2) {
            bail!("every mesh needs at least 2 elements, got {n_elem:?}");
        }
        let t_end = args.t_end.or(file.t_end).unwrap_or(setup.t_end);
        if !(t_end > 0.0) {
            bail!("t_end must be positive, got {t_end}");
        }
        let rk = match args.rk.clone().or(file.rk) {
            Some(s) => RkScheme::parse(&s).with_context(|| format!("unknown rk scheme '{s}'"))?,
            None => RkScheme::for_degree(p),
        };
        let boundary = match args.boundary.clone().or(file.boundary) {
            None => None,
            Some(s) => Some(match s.to_ascii_lowercase().as_str() {
                "periodic" => BoundaryChoice::Periodic,
                "far-field" | "farfield" | "far_field" => BoundaryChoice::FarField,
                _ => bail!("unknown boundary '{s}' (periodic, far-field)"),
            }),
        };

        let mut solver = setup.solver_config();
        if let Some(c) = args.cfl.or(file.cfl) {
            solver.cfl_safety = c;
        }
        if let Some(a) = args.a_safety.or(file.a_safety) {
            solver.a_safety = a;
        }
        if let Some(e) = args.eps_pos.or(file.eps_pos) {
            solver.limiter.eps_pos = e;
        }
        if let Some(e) = args.energy_limiter.or(file.energy_limiter) {
            solver.limiter.entropy_enabled = e;
        }
        if let Some(m) = file.mean_reference {
            solver.limiter.mean_reference = match m.as_str() {
                "current" => MeanReference::Current,
                "previous" => MeanReference::Previous,
                _ => bail!("unknown mean_reference '{m}' (current, previous)"),
            };
        }
        if let Some(u) = args.update.clone().or(file.update) {
            solver.update = UpdateForm::parse(&u).map_err(|e| anyhow::anyhow!("{e}"))?;
        }
        solver.monitors = args.monitors || file.monitors.unwrap_or(false);
        solver.strict_cfl = args.strict_cfl || file.strict_cfl.unwrap_or(false);
        solver.validate().map_err(|e| anyhow::anyhow!("{e}"))?;

        let out_dir = args.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from("out"));
        Ok(Self { case, p, n_elem, t_end, rk, boundary, solver, out_dir })
    }
}
