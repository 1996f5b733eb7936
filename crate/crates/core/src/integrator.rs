//! Time stepping: the CFL step size, one Lagrange-projection stage
//! (acoustic solve, reconstruction, transport, limiters) and SSP Runge-Kutta
//! drivers built as convex combinations of such stages.

use std::collections::HashMap;

use crate::acoustic::{riemann_star, select_a, solve_acoustic_step, subcharacteristic_bound, AcousticResult};
use crate::basis::Basis;
use crate::error::{LpdgError, Result};
use crate::field::{to_lagrange_unchecked, ConservedState, SolutionField};
use crate::limiter::{entropy_limit, positivity_limit, EntropyOutcome, LimiterConfig, MeanReference};
use crate::thermo::GasModel;
use crate::transport::{add_source, conservative_update, transport_step, ConservativeInput, TransportInput};
use crate::verify::monitor::{monitor_step, MonitorRecord};

/// Source term `s(x, t)`, applied explicitly at the start of each stage.
pub type Source<'a> = &'a (dyn Fn(f64, f64) -> ConservedState + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RkScheme {
    Euler1,
    Heun2,
    ShuOsher3,
    SpiteriRuuth54,
}

impl RkScheme {
    pub const ALL: [RkScheme; 4] = [Self::Euler1, Self::Heun2, Self::ShuOsher3, Self::SpiteriRuuth54];

    /// Scheme of order `p + 1`, capped at four.
    pub fn for_degree(p: usize) -> Self {
        match p {
            0 => Self::Euler1,
            1 => Self::Heun2,
            2 => Self::ShuOsher3,
            _ => Self::SpiteriRuuth54,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Self::Euler1 => 1,
            Self::Heun2 => 2,
            Self::ShuOsher3 => 3,
            Self::SpiteriRuuth54 => 4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Euler1 => "euler1",
            Self::Heun2 => "heun2",
            Self::ShuOsher3 => "shu-osher3",
            Self::SpiteriRuuth54 => "ssprk54",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler1" | "euler" => Some(Self::Euler1),
            "heun2" | "heun" => Some(Self::Heun2),
            "shu-osher3" | "shuosher3" | "ssprk3" => Some(Self::ShuOsher3),
            "ssprk54" | "spiteri-ruuth54" => Some(Self::SpiteriRuuth54),
            _ => None,
        }
    }

    /// Shu-Osher form: row `i` builds stage `i + 1` as
    /// `sum_m alpha_im u_m + beta_im dt F(u_m)`, listed as `(alpha, beta)` for `m = 0..=i`.
    pub fn tableau(&self) -> RkTableau {
        let rows = match self {
            Self::Euler1 => vec![vec![(1.0, 1.0)]],
            Self::Heun2 => vec![vec![(1.0, 1.0)], vec![(0.5, 0.0), (0.5, 0.5)]],
            Self::ShuOsher3 => vec![
                vec![(1.0, 1.0)],
                vec![(0.75, 0.0), (0.25, 0.25)],
                vec![(1.0 / 3.0, 0.0), (0.0, 0.0), (2.0 / 3.0, 2.0 / 3.0)],
            ],
            Self::SpiteriRuuth54 => vec![
                vec![(1.0, 0.391752226571890)],
                vec![(0.444370493651235, 0.0), (0.555629506348765, 0.368410593050371)],
                vec![(0.620101851488403, 0.0), (0.0, 0.0), (0.379898148511597, 0.251891774271694)],
                vec![(0.178079954393132, 0.0), (0.0, 0.0), (0.0, 0.0), (0.821920045606868, 0.544974750228521)],
                vec![
                    (0.0, 0.0),
                    (0.0, 0.0),
                    (0.517231671970585, 0.0),
                    (0.096059710526147, 0.063692468666290),
                    (0.386708617503269, 0.226007483236906),
                ],
            ],
        };
        RkTableau { rows }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RkTableau {
    pub rows: Vec<Vec<(f64, f64)>>,
}

impl RkTableau {
    /// Nonnegative entries, `beta > 0` only where `alpha > 0`, rows of `alpha` summing to one.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(LpdgError::Config(format!("row {i} has {} entries", row.len())));
            }
            let mut sum = 0.0;
            for &(alpha, beta) in row {
                if alpha < 0.0 || beta < 0.0 || (beta > 0.0 && alpha == 0.0) {
                    return Err(LpdgError::Config(format!("row {i} is not a convex combination of Euler steps")));
                }
                sum += alpha;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(LpdgError::Config(format!("row {i} sums to {sum}")));
            }
        }
        Ok(())
    }

    /// Time offset of every stage as a fraction of `dt`, starting with `0` for the input.
    pub fn stage_times(&self) -> Vec<f64> {
        let mut c = vec![0.0];
        for row in &self.rows {
            let ci = row.iter().enumerate().map(|(m, &(alpha, beta))| alpha * c[m] + beta).sum();
            c.push(ci);
        }
        c
    }

    /// Coefficients of the stability polynomial `R(z)` for `y' = lambda y`, `z = lambda dt`.
    pub fn stability_polynomial(&self) -> Vec<f64> {
        let mut stages: Vec<Vec<f64>> = vec![vec![1.0]];
        for row in &self.rows {
            let deg = stages.len();
            let mut next = vec![0.0; deg + 1];
            for (m, &(alpha, beta)) in row.iter().enumerate() {
                for (d, &coef) in stages[m].iter().enumerate() {
                    next[d] += alpha * coef;
                    next[d + 1] += beta * coef;
                }
            }
            stages.push(next);
        }
        stages.pop().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub cfl_safety: f64,
    pub a_safety: f64,
    /// Step used when the CFL quantity vanishes; defaults to `h / (10 a)`.
    pub dt_max: Option<f64>,
    pub max_a_retries: usize,
    /// Points sampled on each segment `[tau^n, tau^{n+1-}]` for the subcharacteristic check.
    pub subchar_samples: usize,
    /// Halve `dt` when the a-posteriori CFL value is violated or the acoustic step loses admissibility.
    pub strict_cfl: bool,
    pub max_dt_halvings: usize,
    pub limiter: LimiterConfig,
    pub monitors: bool,
    pub update: UpdateForm,
}

/// How the stage turns the intermediate state into the new DOFs. Both forms
/// give the same cell means; they differ node by node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateForm {
    /// One weak-form residual of the Euler fluxes evaluated at the intermediate state.
    #[default]
    Conservative,
    /// Explicit transport applied to the intermediate DOFs (collocated `u d_x U` volume term).
    Split,
}

impl UpdateForm {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conservative" => Ok(Self::Conservative),
            "split" => Ok(Self::Split),
            _ => Err(LpdgError::Config(format!("unknown update form '{s}' (conservative | split)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Conservative => "conservative",
            Self::Split => "split",
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl_safety: 0.9,
            a_safety: 1.05,
            dt_max: None,
            max_a_retries: 5,
            subchar_samples: 9,
            strict_cfl: false,
            max_dt_halvings: 10,
            limiter: LimiterConfig::default(),
            monitors: false,
            update: UpdateForm::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(LpdgError::Config(format!("cfl safety must lie in (0, 1), got {}", self.cfl_safety)));
        }
        if !(self.a_safety >= 1.0) {
            return Err(LpdgError::Config(format!("a safety must be >= 1, got {}", self.a_safety)));
        }
        if let Some(d) = self.dt_max {
            if !(d > 0.0) {
                return Err(LpdgError::Config(format!("dt_max must be positive, got {d}")));
            }
        }
        self.limiter.validate()
    }
}

/// `max_{j,k} (1/w_k)(<u, d_x phi_k> - delta_kp min(u*_{j+1/2}, 0) + delta_k0 max(u*_{j-1/2}, 0))`
/// in reference-element scaling; the CFL condition reads `(dt / h) * value < 1/2`.
pub fn cfl_quantity(basis: &Basis, vel: &[f64], star_u: &[f64]) -> f64 {
    let m = basis.len();
    let p = basis.degree();
    let w = basis.weights();
    let n = vel.len() / m;
    let mut max = f64::NEG_INFINITY;
    for j in 0..n {
        let u = &vel[j * m..(j + 1) * m];
        for k in 0..m {
            let mut q: f64 = (0..m).map(|l| w[l] * u[l] * basis.d(l, k)).sum();
            if k == p {
                q -= star_u[j + 1].min(0.0);
            }
            if k == 0 {
                q += star_u[j].max(0.0);
            }
            max = max.max(q / w[k]);
        }
    }
    max
}

/// Star velocities from the traces of `field` itself (no implicit solve).
fn explicit_star_velocities(model: &GasModel, field: &SolutionField, a: f64) -> Vec<f64> {
    let n = field.n_elem();
    let p = field.degree;
    let lag = |u: ConservedState| to_lagrange_unchecked(model, u);
    (0..=n)
        .map(|i| {
            let left = if i > 0 { field.state(i - 1, p) } else { field.neighbor_dofs(0).0 };
            let right = if i < n { field.state(i, 0) } else { field.neighbor_dofs(n - 1).1 };
            riemann_star(lag(left), lag(right), a).u_star
        })
        .collect()
}

fn nodal_velocities(field: &SolutionField) -> Vec<f64> {
    field.rho.iter().zip(&field.mom).map(|(r, q)| q / r).collect()
}

/// Time step from the CFL condition evaluated on time-`n` data. Returns
/// `(dt, cfl_quantity)`; falls back to `dt_max` when the quantity is not positive.
pub fn compute_dt(basis: &Basis, field: &SolutionField, model: &GasModel, a: f64, cfl_safety: f64, dt_max: f64) -> (f64, f64) {
    let star = explicit_star_velocities(model, field, a);
    let q = cfl_quantity(basis, &nodal_velocities(field), &star);
    if q > 0.0 {
        (cfl_safety * 0.5 * field.mesh.h / q, q)
    } else {
        (dt_max, q)
    }
}

/// Diagnostics of one first-order stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub dt: f64,
    pub a_used: f64,
    pub retries: usize,
    /// CFL quantity at the intermediate level, times `dt / h`.
    pub cfl_post: f64,
    pub solver_residual: f64,
    pub min_positivity_theta: f64,
    pub min_entropy_theta: f64,
    /// Elements whose mean already exceeded the energy bound.
    pub entropy_skipped: usize,
    /// Smallest nodal density of the stage output.
    pub min_density: f64,
    pub monitor: Option<MonitorRecord>,
}

/// One first-order Lagrange-projection stage of length `dt`: explicit
/// source, implicit acoustic step (doubling `a` until the subcharacteristic
/// condition holds on the computed volumes), transport, then the positivity
/// and energy limiters.
pub fn lpdg_stage(
    model: &GasModel,
    basis: &Basis,
    field: &SolutionField,
    dt: f64,
    config: &SolverConfig,
    source: Option<Source<'_>>,
) -> Result<(SolutionField, StageReport)> {
    // the forcing enters before the acoustic solve so that the implicit step
    // sees the balanced momentum; added after it, the stage is first order in time
    let forced;
    let field = match source {
        Some(s) => {
            let mut f = field.clone();
            add_source(&mut f, basis, s, field.time, dt);
            forced = f;
            &forced
        }
        None => field,
    };
    let mut a = select_a(model, field, config.a_safety)?;
    let mut retries = 0;
    let acoustic: AcousticResult = loop {
        let r = solve_acoustic_step(model, basis, field, a, dt)?;
        let tau_old: Vec<f64> = r.lagrange_prev.iter().map(|w| w.tau).collect();
        let tau_new: Vec<f64> = r.lagrange.iter().map(|w| w.tau).collect();
        let required = subcharacteristic_bound(model, &tau_old, &tau_new, config.subchar_samples);
        if a >= required {
            break r;
        }
        if retries == config.max_a_retries {
            return Err(LpdgError::RetriesExhausted { retries });
        }
        a *= 2.0;
        retries += 1;
    };

    let mid = &acoustic.conserved;
    let n = field.n_elem();
    let m = basis.len();
    let lam = dt / field.mesh.h;

    // energy bounds from the intermediate stencil, fixed before transport
    let bounds: Vec<f64> = if config.limiter.entropy_enabled {
        (0..n)
            .map(|j| {
                let (l, r) = mid.neighbor_dofs(j);
                let mut b = model.total_energy_unchecked(l).max(model.total_energy_unchecked(r));
                for k in 0..m {
                    b = b.max(model.total_energy_unchecked(mid.state(j, k)));
                }
                b
            })
            .collect()
    } else {
        Vec::new()
    };

    let mid_vel: Vec<f64> = acoustic.lagrange.iter().map(|w| w.vel).collect();
    let cfl_post = lam * cfl_quantity(basis, &mid_vel, &acoustic.star_u);

    let mut out = match config.update {
        UpdateForm::Conservative => {
            let mid_pi: Vec<f64> = acoustic.lagrange.iter().map(|w| w.pi).collect();
            conservative_update(ConservativeInput {
                start: field,
                mid,
                mid_pi: &mid_pi,
                star_u: &acoustic.star_u,
                star_pi: &acoustic.star_pi,
                basis,
                dt,
            })
        }
        UpdateForm::Split => transport_step(TransportInput { field: mid, star_u: &acoustic.star_u, basis, dt }),
    };
    let monitor = config.monitors.then(|| monitor_step(model, basis, field, &acoustic, &out));

    let mut min_pos = 1.0f64;
    let mut min_ent = 1.0f64;
    let mut skipped = 0;
    let mut dofs = vec![ConservedState::new(0.0, 0.0); m];
    for j in 0..n {
        let mean = out.cell_mean(basis, j);
        let scale = match config.limiter.mean_reference {
            MeanReference::Current => mean.rho,
            MeanReference::Previous => field.cell_mean(basis, j).rho,
        };
        for (k, d) in dofs.iter_mut().enumerate() {
            *d = out.state(j, k);
        }
        min_pos = min_pos.min(positivity_limit(&mut dofs, mean, scale, config.limiter.eps_pos, j)?);
        if config.limiter.entropy_enabled {
            match entropy_limit(model, &mut dofs, mean, bounds[j], config.limiter.root_tol, j)? {
                EntropyOutcome::Limited(t) => min_ent = min_ent.min(t),
                EntropyOutcome::MeanAboveBound => skipped += 1,
            }
        }
        for (k, d) in dofs.iter().enumerate() {
            out.set_state(j, k, *d);
        }
    }

    out.time = field.time + dt;
    out.check_admissible()?;

    let report = StageReport {
        dt,
        a_used: a,
        retries,
        cfl_post,
        solver_residual: acoustic.residuals.0.max(acoustic.residuals.1),
        min_positivity_theta: min_pos,
        min_entropy_theta: min_ent,
        entropy_skipped: skipped,
        min_density: out.min_density(),
        monitor,
    };
    Ok((out, report))
}

/// Diagnostics of one accepted time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// Time at the end of the step.
    pub time: f64,
    pub dt_used: f64,
    /// Largest relaxation parameter used by any stage.
    pub a_used: f64,
    /// CFL quantity on time-`n` data; `cfl_lhs * dt / h < 1/2` on acceptance.
    pub cfl_lhs: f64,
    /// Largest a-posteriori CFL value over the stages.
    pub cfl_post: f64,
    pub retries: usize,
    pub dt_halvings: usize,
    /// Smallest nodal density over stage outputs and stage combinations.
    pub min_density: f64,
    pub min_positivity_theta: f64,
    pub min_entropy_theta: f64,
    pub stages: Vec<StageReport>,
    pub monitor: Option<MonitorRecord>,
}

impl StepReport {
    /// `cfl_lhs * dt / h`.
    pub fn cfl_number(&self, h: f64) -> f64 {
        self.cfl_lhs * self.dt_used / h
    }
}

/// One step of `scheme` of length `dt`; forward-Euler evaluations that
/// share input state and step length are computed once.
pub fn rk_step(
    model: &GasModel,
    basis: &Basis,
    field: &SolutionField,
    scheme: RkScheme,
    dt: f64,
    config: &SolverConfig,
    source: Option<Source<'_>>,
) -> Result<(SolutionField, Vec<StageReport>, f64)> {
    let tab = scheme.tableau();
    let c = tab.stage_times();
    let mut states: Vec<SolutionField> = vec![field.clone()];
    let mut cache: HashMap<(usize, u64), SolutionField> = HashMap::new();
    let mut reports = Vec::new();
    let mut min_density = field.min_density();
    for (i, row) in tab.rows.iter().enumerate() {
        for (mi, &(alpha, beta)) in row.iter().enumerate() {
            if beta > 0.0 {
                let key = (mi, (beta / alpha).to_bits());
                if let std::collections::hash_map::Entry::Vacant(slot) = cache.entry(key) {
                    let (f, r) = lpdg_stage(model, basis, &states[mi], beta / alpha * dt, config, source)?;
                    min_density = min_density.min(r.min_density);
                    reports.push(r);
                    slot.insert(f);
                }
            }
        }
        let terms: Vec<(f64, &SolutionField)> = row
            .iter()
            .enumerate()
            .filter(|(_, &(alpha, _))| alpha > 0.0)
            .map(|(mi, &(alpha, beta))| {
                let f = if beta > 0.0 { &cache[&(mi, (beta / alpha).to_bits())] } else { &states[mi] };
                (alpha, f)
            })
            .collect();
        let mut next = if terms.len() == 1 && terms[0].0 == 1.0 {
            terms[0].1.clone()
        } else {
            SolutionField::linear_combination(&terms)
        };
        next.time = field.time + c[i + 1] * dt;
        next.check_admissible()?;
        min_density = min_density.min(next.min_density());
        states.push(next);
    }
    Ok((states.pop().unwrap(), reports, min_density))
}

/// Integrates from `field.time` to `t_end`, landing exactly on `t_end`.
pub fn advance(
    model: &GasModel,
    basis: &Basis,
    field: &SolutionField,
    scheme: RkScheme,
    t_end: f64,
    config: &SolverConfig,
    source: Option<Source<'_>>,
) -> Result<(SolutionField, Vec<StepReport>)> {
    advance_with(model, basis, field, scheme, t_end, config, source, |_, _| {})
}

/// As [`advance`], calling `observer` after every accepted step.
#[allow(clippy::too_many_arguments)]
pub fn advance_with<O>(
    model: &GasModel,
    basis: &Basis,
    field: &SolutionField,
    scheme: RkScheme,
    t_end: f64,
    config: &SolverConfig,
    source: Option<Source<'_>>,
    mut observer: O,
) -> Result<(SolutionField, Vec<StepReport>)>
where
    O: FnMut(&SolutionField, &StepReport),
{
    config.validate()?;
    if !(t_end > field.time) {
        return Err(LpdgError::Config(format!("t_end = {t_end} must exceed the current time {}", field.time)));
    }
    let mut cur = field.clone();
    let mut reports = Vec::new();
    // relative slack for the last step
    let close = 1e-12 * t_end.abs().max(1.0);
    while t_end - cur.time > close {
        let (step, rep) = take_step(model, basis, &cur, scheme, t_end, config, source)?;
        cur = step;
        observer(&cur, &rep);
        reports.push(rep);
    }
    cur.time = t_end;
    Ok((cur, reports))
}

/// One accepted step from `field`, not beyond `t_end`.
pub fn take_step(
    model: &GasModel,
    basis: &Basis,
    field: &SolutionField,
    scheme: RkScheme,
    t_end: f64,
    config: &SolverConfig,
    source: Option<Source<'_>>,
) -> Result<(SolutionField, StepReport)> {
    let h = field.mesh.h;
    let a0 = select_a(model, field, config.a_safety)?;
    let dt_max = config.dt_max.unwrap_or(h / (10.0 * a0));
    let (dt_cfl, cfl_lhs) = compute_dt(basis, field, model, a0, config.cfl_safety, dt_max);
    let remaining = t_end - field.time;
    let close = 1e-12 * t_end.abs().max(1.0);
    let mut dt = dt_cfl;
    let mut lands = false;
    if dt >= remaining - close {
        dt = remaining;
        lands = true;
    }
    let mut halvings = 0;
    loop {
        let attempt = rk_step(model, basis, field, scheme, dt, config, source);
        let retry = match &attempt {
            Ok((_, stages, _)) => config.strict_cfl && stages.iter().any(|s| s.cfl_post >= 0.5),
            Err(LpdgError::Inadmissible { .. }) | Err(LpdgError::RetriesExhausted { .. }) => config.strict_cfl,
            Err(_) => false,
        };
        if retry && halvings < config.max_dt_halvings {
            dt *= 0.5;
            lands = false;
            halvings += 1;
            continue;
        }
        let (mut next, stages, min_density) = attempt?;
        if lands {
            next.time = t_end;
        }
        let mut monitor: Option<MonitorRecord> = None;
        for s in &stages {
            if let Some(r) = &s.monitor {
                monitor.get_or_insert_with(|| MonitorRecord { stages: 0, ..Default::default() }).merge(r);
            }
        }
        let report = StepReport {
            time: next.time,
            dt_used: dt,
            a_used: stages.iter().map(|s| s.a_used).fold(0.0, f64::max),
            cfl_lhs,
            cfl_post: stages.iter().map(|s| s.cfl_post).fold(f64::NEG_INFINITY, f64::max),
            retries: stages.iter().map(|s| s.retries).sum(),
            dt_halvings: halvings,
            min_density,
            min_positivity_theta: stages.iter().map(|s| s.min_positivity_theta).fold(1.0, f64::min),
            min_entropy_theta: stages.iter().map(|s| s.min_entropy_theta).fold(1.0, f64::min),
            stages,
            monitor,
        };
        return Ok((next, report));
    }
}
