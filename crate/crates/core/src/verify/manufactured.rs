//! Smooth travelling density wave driven by a momentum source.
//!
//! `rho = 1 + eps sin(2 pi (x - t))`, `u = 1` solves the forced system when
//! the momentum equation carries `s = d_x p(rho)`.

use std::f64::consts::PI;

use crate::field::ConservedState;
use crate::thermo::GasModel;

pub const DEFAULT_AMPLITUDE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub model: GasModel,
    pub eps: f64,
}

impl Manufactured {
    pub fn new(model: GasModel) -> Self {
        Self { model, eps: DEFAULT_AMPLITUDE }
    }

    pub fn exact(&self, t: f64, x: f64) -> ConservedState {
        let rho = 1.0 + self.eps * (2.0 * PI * (x - t)).sin();
        ConservedState::from_velocity(rho, 1.0)
    }

    pub fn source(&self, t: f64, x: f64) -> ConservedState {
        let arg = 2.0 * PI * (x - t);
        let rho = 1.0 + self.eps * arg.sin();
        let k = self.model.kappa();
        let g = self.model.gamma();
        ConservedState::new(0.0, k * g * rho.powf(g - 1.0) * 2.0 * PI * self.eps * arg.cos())
    }
}

pub fn manufactured_exact(t: f64, x: f64) -> ConservedState {
    let rho = 1.0 + DEFAULT_AMPLITUDE * (2.0 * PI * (x - t)).sin();
    ConservedState::from_velocity(rho, 1.0)
}

pub fn manufactured_source(t: f64, x: f64, model: &GasModel) -> ConservedState {
    Manufactured::new(*model).source(t, x)
}
