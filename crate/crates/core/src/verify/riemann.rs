//! Exact self-similar solution of the Riemann problem for the isentropic
//! Euler equations with `p = kappa rho^gamma`.
//!
//! The star density solves `f_L(rho) + f_R(rho) + u_R - u_L = 0`, where each
//! `f_K` is the shock (Hugoniot) branch for `rho > rho_K` and the
//! rarefaction (Riemann invariant) branch otherwise. `f` is increasing, so a
//! bracketed Newton iteration converges from any start.

use crate::error::{LpdgError, Result};
use crate::field::ConservedState;
use crate::thermo::GasModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RiemannLabel {
    Rp1,
    Rp2,
    Rp3,
    Rp4,
}

impl RiemannLabel {
    pub const ALL: [RiemannLabel; 4] = [Self::Rp1, Self::Rp2, Self::Rp3, Self::Rp4];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Rp1 => "RP1",
            Self::Rp2 => "RP2",
            Self::Rp3 => "RP3",
            Self::Rp4 => "RP4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RP1" => Some(Self::Rp1),
            "RP2" => Some(Self::Rp2),
            "RP3" => Some(Self::Rp3),
            "RP4" => Some(Self::Rp4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannCase {
    pub left: ConservedState,
    pub right: ConservedState,
    pub model: GasModel,
    pub t_eval: f64,
    pub label: Option<RiemannLabel>,
}

impl RiemannCase {
    /// Registered test cases, tabulated as `(rho, u)` pairs.
    pub fn registered(label: RiemannLabel) -> Self {
        let g16 = 1.6;
        let k16 = (g16 - 1.0) * (g16 - 1.0) / (4.0 * g16);
        let m16 = GasModel::new(k16, g16).expect("valid");
        let (left, right, model, t_eval) = match label {
            RiemannLabel::Rp1 => (ConservedState::from_velocity(1.0, 1.0), ConservedState::from_velocity(2.0, 0.5), m16, 0.3),
            RiemannLabel::Rp2 => (ConservedState::from_velocity(1.0, 2.0), ConservedState::from_velocity(2.0, 1.0), m16, 0.3),
            RiemannLabel::Rp3 => (ConservedState::from_velocity(1.0, -0.5), ConservedState::from_velocity(0.5, -0.5), m16, 0.4),
            RiemannLabel::Rp4 => (
                ConservedState::from_velocity(1.0, -5.0),
                ConservedState::from_velocity(1.0, 5.0),
                GasModel::new(1.0, 1.4).expect("valid"),
                0.07,
            ),
        };
        Self {
            left,
            right,
            model,
            t_eval,
            label: Some(label),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wave {
    Shock,
    Rarefaction,
}

/// Solved Riemann problem, sampled with [`ExactRiemann::sample`].
#[derive(Debug, Clone, Copy)]
pub struct ExactRiemann {
    model: GasModel,
    rho_l: f64,
    u_l: f64,
    rho_r: f64,
    u_r: f64,
    pub rho_star: f64,
    pub u_star: f64,
    pub left_wave: Wave,
    pub right_wave: Wave,
}

const NEWTON_TOL: f64 = 1e-13;

impl ExactRiemann {
    pub fn solve(model: GasModel, left: ConservedState, right: ConservedState) -> Result<Self> {
        for s in [left, right] {
            if !(s.rho > 0.0) {
                return Err(LpdgError::NonPositiveDensity(s.rho));
            }
        }
        let (rho_l, u_l) = (left.rho, left.velocity());
        let (rho_r, u_r) = (right.rho, right.velocity());
        let gm1 = model.gamma() - 1.0;
        let (c_l, c_r) = (sound(&model, rho_l), sound(&model, rho_r));
        if u_r - u_l >= 2.0 * (c_l + c_r) / gm1 {
            return Err(LpdgError::Vacuum);
        }

        let f = |rho: f64| {
            let (fl, dl) = wave_function(&model, rho, rho_l);
            let (fr, dr) = wave_function(&model, rho, rho_r);
            (fl + fr + u_r - u_l, dl + dr)
        };

        // bracket [lo, hi] with f(lo) < 0 < f(hi)
        let mut lo = 0.0;
        let mut hi = rho_l.max(rho_r);
        while f(hi).0 < 0.0 {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(LpdgError::NonConvergence("cannot bracket star density".into()));
            }
        }
        // two-rarefaction estimate as the starting point
        let z = gm1 / 2.0;
        let pv = (c_l + c_r - z * (u_r - u_l)) / (c_l * rho_l.powf(-z) + c_r * rho_r.powf(-z));
        let mut rho = pv.powf(1.0 / z);
        if !(rho > lo && rho < hi) {
            rho = 0.5 * (lo + hi);
        }
        let mut converged = false;
        for _ in 0..200 {
            let (val, der) = f(rho);
            if val == 0.0 {
                converged = true;
                break;
            }
            if val < 0.0 {
                lo = rho;
            } else {
                hi = rho;
            }
            let mut next = rho - val / der;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - rho).abs();
            rho = next;
            if step <= NEWTON_TOL * rho || hi - lo <= NEWTON_TOL * rho {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(LpdgError::NonConvergence("star density Newton iteration".into()));
        }
        let u_star = u_l - wave_function(&model, rho, rho_l).0;
        Ok(Self {
            model,
            rho_l,
            u_l,
            rho_r,
            u_r,
            rho_star: rho,
            u_star,
            left_wave: if rho > rho_l { Wave::Shock } else { Wave::Rarefaction },
            right_wave: if rho > rho_r { Wave::Shock } else { Wave::Rarefaction },
        })
    }

    /// Left-shock speed, when the left wave is a shock.
    pub fn left_shock_speed(&self) -> Option<f64> {
        (self.left_wave == Wave::Shock)
            .then(|| (self.rho_star * self.u_star - self.rho_l * self.u_l) / (self.rho_star - self.rho_l))
    }

    pub fn right_shock_speed(&self) -> Option<f64> {
        (self.right_wave == Wave::Shock)
            .then(|| (self.rho_star * self.u_star - self.rho_r * self.u_r) / (self.rho_star - self.rho_r))
    }

    /// State at `xi = x / t`.
    pub fn sample(&self, xi: f64) -> ConservedState {
        let m = &self.model;
        let g = m.gamma();
        let star = ConservedState::from_velocity(self.rho_star, self.u_star);
        if xi <= self.u_star {
            match self.left_wave {
                Wave::Shock => {
                    if xi < self.left_shock_speed().unwrap() {
                        ConservedState::from_velocity(self.rho_l, self.u_l)
                    } else {
                        star
                    }
                }
                Wave::Rarefaction => {
                    let c_l = sound(m, self.rho_l);
                    let head = self.u_l - c_l;
                    let tail = self.u_star - sound(m, self.rho_star);
                    if xi < head {
                        ConservedState::from_velocity(self.rho_l, self.u_l)
                    } else if xi > tail {
                        star
                    } else {
                        let inv = self.u_l + 2.0 * c_l / (g - 1.0);
                        let c = (g - 1.0) / (g + 1.0) * (inv - xi);
                        ConservedState::from_velocity(density_from_sound(m, c), xi + c)
                    }
                }
            }
        } else {
            match self.right_wave {
                Wave::Shock => {
                    if xi > self.right_shock_speed().unwrap() {
                        ConservedState::from_velocity(self.rho_r, self.u_r)
                    } else {
                        star
                    }
                }
                Wave::Rarefaction => {
                    let c_r = sound(m, self.rho_r);
                    let head = self.u_r + c_r;
                    let tail = self.u_star + sound(m, self.rho_star);
                    if xi > head {
                        ConservedState::from_velocity(self.rho_r, self.u_r)
                    } else if xi < tail {
                        star
                    } else {
                        let inv = self.u_r - 2.0 * c_r / (g - 1.0);
                        let c = (g - 1.0) / (g + 1.0) * (xi - inv);
                        ConservedState::from_velocity(density_from_sound(m, c), xi - c)
                    }
                }
            }
        }
    }
}

/// Exact solution of `case` at similarity coordinate `xi = x / t`.
pub fn exact_riemann(case: &RiemannCase, xi: f64) -> Result<ConservedState> {
    Ok(ExactRiemann::solve(case.model, case.left, case.right)?.sample(xi))
}

fn pressure(m: &GasModel, rho: f64) -> f64 {
    m.kappa() * rho.powf(m.gamma())
}

fn sound(m: &GasModel, rho: f64) -> f64 {
    (m.kappa() * m.gamma() * rho.powf(m.gamma() - 1.0)).sqrt()
}

fn density_from_sound(m: &GasModel, c: f64) -> f64 {
    (c.max(0.0).powi(2) / (m.kappa() * m.gamma())).powf(1.0 / (m.gamma() - 1.0))
}

/// Velocity jump across the wave connecting `rho_k` to `rho`, and its derivative.
fn wave_function(m: &GasModel, rho: f64, rho_k: f64) -> (f64, f64) {
    let g = m.gamma();
    if rho <= rho_k {
        let c = sound(m, rho);
        (2.0 / (g - 1.0) * (c - sound(m, rho_k)), if rho > 0.0 { c / rho } else { f64::INFINITY })
    } else {
        let dp = pressure(m, rho) - pressure(m, rho_k);
        let dr = rho - rho_k;
        let big_f = dp * dr / (rho * rho_k);
        let f = big_f.sqrt();
        let dpdr = m.kappa() * g * rho.powf(g - 1.0);
        let d_big_f = (dpdr * dr + dp) / (rho * rho_k) - dp * dr / (rho * rho * rho_k);
        let der = if f > 1e-150 { d_big_f / (2.0 * f) } else { sound(m, rho_k) / rho_k };
        (f, der)
    }
}
