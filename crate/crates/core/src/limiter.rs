//! Mean-preserving nodal limiters: a linear positivity limiter on density
//! followed by a maximum-principle limiter on total energy.

use crate::error::{LpdgError, Result};
use crate::field::ConservedState;
use crate::thermo::GasModel;

/// Which cell mean enters the positivity scaling factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanReference {
    /// Mean of the field being limited (the mean the limiter preserves).
    Current,
    /// Mean at the start of the stage.
    Previous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterConfig {
    pub eps_pos: f64,
    pub entropy_enabled: bool,
    pub root_tol: f64,
    pub mean_reference: MeanReference,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        Self {
            eps_pos: 1e-12,
            entropy_enabled: true,
            root_tol: 1e-12,
            mean_reference: MeanReference::Current,
        }
    }
}

impl LimiterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_pos > 0.0 && self.eps_pos <= 1e-6) {
            return Err(LpdgError::Config(format!("eps_pos must lie in (0, 1e-6], got {}", self.eps_pos)));
        }
        if !(self.root_tol > 0.0) {
            return Err(LpdgError::Config(format!("root_tol must be positive, got {}", self.root_tol)));
        }
        Ok(())
    }
}

fn blend(theta: f64, u: ConservedState, mean: ConservedState) -> ConservedState {
    ConservedState::new(
        theta * (u.rho - mean.rho) + mean.rho,
        theta * (u.mom - mean.mom) + mean.mom,
    )
}

/// Scales nodal deviations from the mean so that every nodal density is at
/// least `eps_pos`. `scale_mean_rho` is the mean density used in the scaling
/// factor; the blend is always about `mean`. Returns the factor applied.
pub fn positivity_limit(
    dofs: &mut [ConservedState],
    mean: ConservedState,
    scale_mean_rho: f64,
    eps_pos: f64,
    element: usize,
) -> Result<f64> {
    if !(scale_mean_rho > eps_pos) || !(mean.rho > eps_pos) {
        return Err(LpdgError::MeanInadmissible {
            element,
            mean: mean.rho.min(scale_mean_rho),
            eps: eps_pos,
        });
    }
    let rho_min = dofs.iter().map(|u| u.rho).fold(f64::INFINITY, f64::min);
    if rho_min >= eps_pos {
        return Ok(1.0);
    }
    let theta = ((scale_mean_rho - eps_pos) / (scale_mean_rho - rho_min)).min(1.0);
    for u in dofs.iter_mut() {
        *u = blend(theta, *u, mean);
    }
    Ok(theta)
}

/// Largest `theta` in `[0, 1]` with `U(blend(theta)) <= bound`, by bisection.
fn entropy_theta(model: &GasModel, u: ConservedState, mean: ConservedState, bound: f64, tol: f64) -> Option<f64> {
    let g = |theta: f64| {
        let b = blend(theta, u, mean);
        if b.rho > 0.0 {
            model.total_energy_unchecked(b) - bound
        } else {
            f64::INFINITY
        }
    };
    if g(1.0) <= 0.0 {
        return Some(1.0);
    }
    if g(0.0) > 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Relative gap below which a mean above the energy bound counts as roundoff.
pub const ROUNDOFF_SLACK: f64 = 1e-12;

/// Result of the entropy limiter on one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyOutcome {
    /// Factor applied to nodal deviations.
    Limited(f64),
    /// The cell mean itself exceeds the bound; nodes are left unchanged.
    MeanAboveBound,
}

/// Enforces `rhoE(U_k) <= bound` at every node by blending toward the mean.
pub fn entropy_limit(
    model: &GasModel,
    dofs: &mut [ConservedState],
    mean: ConservedState,
    bound: f64,
    root_tol: f64,
    element: usize,
) -> Result<EntropyOutcome> {
    if !(mean.rho > 0.0) {
        return Err(LpdgError::MeanInadmissible { element, mean: mean.rho, eps: 0.0 });
    }
    let mean_energy = model.total_energy_unchecked(mean);
    let bound = if mean_energy > bound {
        // roundoff in flat regions puts the mean a few ulps above the stencil max
        if mean_energy - bound > ROUNDOFF_SLACK * bound.abs().max(f64::MIN_POSITIVE) {
            return Ok(EntropyOutcome::MeanAboveBound);
        }
        mean_energy
    } else {
        bound
    };
    let mut theta = 1.0f64;
    for u in dofs.iter() {
        let admissible = u.rho > 0.0 && model.total_energy_unchecked(*u) <= bound;
        if !admissible {
            let t = entropy_theta(model, *u, mean, bound, root_tol).ok_or(LpdgError::RootSolve { element })?;
            theta = theta.min(t);
        }
    }
    if theta < 1.0 {
        for u in dofs.iter_mut() {
            *u = blend(theta, *u, mean);
        }
    }
    Ok(EntropyOutcome::Limited(theta))
}
