//! Registered problem setups shared by the CLI, tests and benchmarks.

use std::sync::Arc;

use super::manufactured::Manufactured;
use super::riemann::{ExactRiemann, RiemannCase, RiemannLabel};
use crate::basis::Basis;
use crate::error::{LpdgError, Result};
use crate::field::{project_initial, Boundary, ConservedState, Mesh, RiemannData, SolutionField};
use crate::integrator::SolverConfig;
use crate::thermo::GasModel;

/// Ratio of specific heats used by the smooth test problems.
pub const SMOOTH_GAMMA: f64 = 1.4;
/// Reference Mach number of the smooth test problems.
pub const SMOOTH_MACH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    /// Travelling density wave with a momentum source, periodic on `[0, 1]`.
    Manufactured,
    /// Same wave without the source; mass and momentum are conserved.
    Advection,
    /// Uniform state, periodic.
    Uniform,
    Riemann(RiemannLabel),
}

impl CaseKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "manufactured" => Some(Self::Manufactured),
            "advection" => Some(Self::Advection),
            "uniform" => Some(Self::Uniform),
            other => RiemannLabel::parse(other).map(Self::Riemann),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Manufactured => "manufactured",
            Self::Advection => "advection",
            Self::Uniform => "uniform",
            Self::Riemann(l) => l.name(),
        }
    }
}

pub type SourceFn = Arc<dyn Fn(f64, f64) -> ConservedState + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(f64, f64) -> ConservedState + Send + Sync>;

/// Everything needed to run and score one problem.
#[derive(Clone)]
pub struct CaseSetup {
    pub kind: CaseKind,
    pub model: GasModel,
    pub x_left: f64,
    pub x_right: f64,
    pub boundary: Boundary,
    pub t_end: f64,
    /// Source term `s(x, t)`.
    pub source: Option<SourceFn>,
    /// Exact solution `(x, t)`.
    pub exact: Option<ExactFn>,
    /// Whether the nodal energy limiter is on by default. Its stencil bound
    /// clips smooth extrema, so the smooth problems run without it.
    pub energy_limiter: bool,
    initial: InitialFn,
}

type InitialFn = Arc<dyn Fn(&Basis, Mesh, Boundary) -> Result<SolutionField> + Send + Sync>;

impl std::fmt::Debug for CaseSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CaseSetup")
            .field("kind", &self.kind)
            .field("model", &self.model)
            .field("window", &(self.x_left, self.x_right))
            .field("boundary", &self.boundary)
            .field("t_end", &self.t_end)
            .finish()
    }
}

impl CaseSetup {
    pub fn new(kind: CaseKind) -> Self {
        match kind {
            CaseKind::Manufactured | CaseKind::Advection => {
                let model = GasModel::from_mach(SMOOTH_MACH, SMOOTH_GAMMA).expect("valid");
                let mf = Manufactured::new(model);
                let with_source = kind == CaseKind::Manufactured;
                // without forcing the wave is not an exact solution
                let exact: Option<ExactFn> = with_source.then(|| Arc::new(move |x, t| mf.exact(t, x)) as ExactFn);
                Self {
                    kind,
                    model,
                    x_left: 0.0,
                    x_right: 1.0,
                    boundary: Boundary::Periodic,
                    t_end: 5.0,
                    source: with_source.then(|| Arc::new(move |x, t| mf.source(t, x)) as SourceFn),
                    exact,
                    energy_limiter: false,
                    initial: Arc::new(move |basis, mesh, bc| project_initial(basis, mesh, bc, &|x: f64| mf.exact(0.0, x))),
                }
            }
            CaseKind::Uniform => {
                let model = GasModel::from_mach(SMOOTH_MACH, SMOOTH_GAMMA).expect("valid");
                let state = ConservedState::from_velocity(1.0, 0.7);
                Self {
                    kind,
                    model,
                    x_left: 0.0,
                    x_right: 1.0,
                    boundary: Boundary::Periodic,
                    t_end: 1.0,
                    source: None,
                    exact: Some(Arc::new(move |_, _| state)),
                    energy_limiter: true,
                    initial: Arc::new(move |basis, mesh, bc| Ok(SolutionField::uniform(mesh, basis.degree(), bc, state))),
                }
            }
            CaseKind::Riemann(label) => {
                let case = RiemannCase::registered(label);
                let data = RiemannData { left: case.left, right: case.right, x0: 0.0 };
                let exact = ExactRiemann::solve(case.model, case.left, case.right).expect("registered cases have no vacuum");
                Self {
                    kind,
                    model: case.model,
                    x_left: -0.5,
                    x_right: 0.5,
                    boundary: Boundary::FarField { left: case.left, right: case.right },
                    t_end: case.t_eval,
                    source: None,
                    exact: Some(Arc::new(move |x, t| {
                        if t > 0.0 {
                            exact.sample(x / t)
                        } else if x < 0.0 {
                            case.left
                        } else {
                            case.right
                        }
                    })),
                    energy_limiter: true,
                    initial: Arc::new(move |basis, mesh, bc| project_initial(basis, mesh, bc, &data)),
                }
            }
        }
    }

    /// Default solver settings for this case.
    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        cfg.limiter.entropy_enabled = self.energy_limiter;
        cfg
    }

    pub fn mesh(&self, n_elem: usize) -> Result<Mesh> {
        Mesh::new(self.x_left, self.x_right, n_elem)
    }

    pub fn initial_field(&self, basis: &Basis, n_elem: usize) -> Result<SolutionField> {
        if n_elem == 0 {
            return Err(LpdgError::InvalidMesh("need at least one element".into()));
        }
        (self.initial)(basis, self.mesh(n_elem)?, self.boundary)
    }
}
