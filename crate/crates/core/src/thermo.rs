//! Polytropic equation of state `p(tau) = kappa * tau^(-gamma)` and derived
//! quantities for the isentropic gas.

use crate::error::{LpdgError, Result};
use crate::field::ConservedState;

/// Isentropic polytropic gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    kappa: f64,
    gamma: f64,
}

impl GasModel {
    pub fn new(kappa: f64, gamma: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite() && gamma > 1.0 && gamma.is_finite()) {
            return Err(LpdgError::InvalidGasModel { kappa, gamma });
        }
        Ok(Self { kappa, gamma })
    }

    /// Builds the model from a reference Mach number, with `kappa = 1 / (gamma M^2)`
    /// so that the sound speed at unit density is `1 / M`.
    pub fn from_mach(mach: f64, gamma: f64) -> Result<Self> {
        if !(mach > 0.0 && mach.is_finite()) {
            return Err(LpdgError::Config(format!("reference Mach number must be positive, got {mach}")));
        }
        Self::new(1.0 / (gamma * mach * mach), gamma)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn check(tau: f64) -> Result<()> {
        if tau > 0.0 {
            Ok(())
        } else {
            Err(LpdgError::NonPositiveVolume(tau))
        }
    }

    pub fn pressure(&self, tau: f64) -> Result<f64> {
        Self::check(tau)?;
        Ok(self.pressure_unchecked(tau))
    }

    pub fn pressure_derivative(&self, tau: f64) -> Result<f64> {
        Self::check(tau)?;
        Ok(self.pressure_derivative_unchecked(tau))
    }

    /// Specific internal energy, the antiderivative of `-p` vanishing at infinity.
    pub fn internal_energy(&self, tau: f64) -> Result<f64> {
        Self::check(tau)?;
        Ok(self.internal_energy_unchecked(tau))
    }

    pub fn sound_speed(&self, tau: f64) -> Result<f64> {
        Self::check(tau)?;
        Ok(tau * self.lagrangian_sound_speed_unchecked(tau))
    }

    /// `rho c = sqrt(-p'(tau))`, the quantity bounded by the relaxation parameter.
    pub fn lagrangian_sound_speed(&self, tau: f64) -> Result<f64> {
        Self::check(tau)?;
        Ok(self.lagrangian_sound_speed_unchecked(tau))
    }

    /// Total energy per unit volume `rho (e(1/rho) + u^2/2)`.
    pub fn total_energy(&self, state: ConservedState) -> Result<f64> {
        if !(state.rho > 0.0) {
            return Err(LpdgError::NonPositiveDensity(state.rho));
        }
        Ok(self.total_energy_unchecked(state))
    }

    // Unchecked variants for hot loops where admissibility is already established.

    #[inline]
    pub(crate) fn pressure_unchecked(&self, tau: f64) -> f64 {
        self.kappa * tau.powf(-self.gamma)
    }

    #[inline]
    pub(crate) fn pressure_derivative_unchecked(&self, tau: f64) -> f64 {
        -self.kappa * self.gamma * tau.powf(-self.gamma - 1.0)
    }

    #[inline]
    pub(crate) fn internal_energy_unchecked(&self, tau: f64) -> f64 {
        self.kappa * tau.powf(1.0 - self.gamma) / (self.gamma - 1.0)
    }

    #[inline]
    pub(crate) fn lagrangian_sound_speed_unchecked(&self, tau: f64) -> f64 {
        (-self.pressure_derivative_unchecked(tau)).sqrt()
    }

    #[inline]
    pub(crate) fn total_energy_unchecked(&self, state: ConservedState) -> f64 {
        let u = state.mom / state.rho;
        state.rho * (self.internal_energy_unchecked(1.0 / state.rho) + 0.5 * u * u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> GasModel {
        GasModel::new(1.0, 1.4).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GasModel::new(0.0, 1.4).is_err());
        assert!(GasModel::new(1.0, 1.0).is_err());
        assert!(GasModel::new(-1.0, 2.0).is_err());
        assert!(GasModel::from_mach(0.0, 1.4).is_err());
    }

    #[test]
    fn pressure_values() {
        assert_eq!(unit().pressure(1.0).unwrap(), 1.0);
        let low_mach = GasModel::from_mach(0.1, 1.4).unwrap();
        assert!(rel(low_mach.pressure(1.0).unwrap(), 71.428_571_428_571_43) < 1e-14);
        assert!(rel(unit().pressure(2.0).unwrap(), 0.378_929_141_627_599_6) < 1e-14);
        assert!(unit().pressure(0.0).is_err());
        assert!(unit().pressure(-1.0).is_err());
    }

    #[test]
    fn pressure_derivative_values() {
        let m = unit();
        assert!(rel(m.pressure_derivative(1.0).unwrap(), -1.4) < 1e-15);
        let fd = |tau: f64| {
            let h = 1e-6 * tau;
            (m.pressure(tau + h).unwrap() - m.pressure(tau - h).unwrap()) / (2.0 * h)
        };
        let d = m.pressure_derivative(0.5).unwrap();
        assert!(rel(d, -1.4 * 0.5f64.powf(-2.4)) < 1e-14);
        assert!(rel(d, fd(0.5)) < 1e-6);
        assert!((d - (-7.389)).abs() < 1e-3);
    }

    #[test]
    fn internal_energy_values() {
        let m = unit();
        assert!(rel(m.internal_energy(1.0).unwrap(), 2.5) < 1e-15);
        let m2 = GasModel::new(2.0, 2.0).unwrap();
        assert!(rel(m2.internal_energy(4.0).unwrap(), 0.5) < 1e-15);
        // e(1) = integral of p from 1 to infinity; composite Simpson in y = ln(tau),
        // truncated where the integrand is below 1e-17.
        let n = 20_000;
        let y_max = 100.0;
        let f = |y: f64| m.pressure(y.exp()).unwrap() * y.exp();
        let hs = y_max / n as f64;
        let mut acc = f(0.0) + f(y_max);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * hs);
        }
        assert!(rel(acc * hs / 3.0, 2.5) < 1e-8);
        for tau in [0.5, 1.0, 2.0] {
            let h = 1e-6 * tau;
            let de = (m.internal_energy(tau + h).unwrap() - m.internal_energy(tau - h).unwrap()) / (2.0 * h);
            assert!(rel(de, -m.pressure(tau).unwrap()) < 1e-6);
        }
    }

    #[test]
    fn sound_speed_values() {
        assert!(rel(unit().sound_speed(1.0).unwrap(), 1.4f64.sqrt()) < 1e-15);
        let low_mach = GasModel::from_mach(0.1, 1.4).unwrap();
        assert!(rel(low_mach.sound_speed(1.0).unwrap(), 10.0) < 1e-14);
        let m = unit();
        for tau in [0.3, 1.0, 2.5] {
            // c^2 = tau^2 e''(tau), e'' by differences of e' = -p
            let h = 1e-5 * tau;
            let e2 = -(m.pressure(tau + h).unwrap() - m.pressure(tau - h).unwrap()) / (2.0 * h);
            assert!(rel(m.sound_speed(tau).unwrap().powi(2), tau * tau * e2) < 1e-8);
            assert!(
                rel(m.sound_speed(tau).unwrap() / tau, (-m.pressure_derivative(tau).unwrap()).sqrt()) < 1e-14
            );
        }
    }

    #[test]
    fn total_energy_values() {
        let m = unit();
        assert!(rel(m.total_energy(ConservedState::new(1.0, 0.0)).unwrap(), 2.5) < 1e-15);
        assert!(rel(m.total_energy(ConservedState::new(1.0, 2.0)).unwrap(), 4.5) < 1e-15);
        assert!(m.total_energy(ConservedState::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn total_energy_is_convex() {
        let m = GasModel::new(0.7, 1.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let a = ConservedState::new(rng.gen_range(0.05..5.0), rng.gen_range(-5.0..5.0));
            let b = ConservedState::new(rng.gen_range(0.05..5.0), rng.gen_range(-5.0..5.0));
            let mid = ConservedState::new(0.5 * (a.rho + b.rho), 0.5 * (a.mom + b.mom));
            let lhs = m.total_energy(mid).unwrap();
            let rhs = 0.5 * (m.total_energy(a).unwrap() + m.total_energy(b).unwrap());
            assert!(lhs <= rhs + 1e-12 * rhs.abs(), "{lhs} > {rhs}");
        }
    }

    #[test]
    fn derivative_properties_hold_over_range() {
        let m = GasModel::new(0.3, 1.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let tau: f64 = rng.gen_range(0.05..20.0);
            let d = m.pressure_derivative(tau).unwrap();
            assert!(d < 0.0);
            let h = 1e-6 * tau;
            let fd = (m.pressure(tau + h).unwrap() - m.pressure(tau - h).unwrap()) / (2.0 * h);
            assert!(rel(d, fd) < 1e-6);
            let de = (m.internal_energy(tau + h).unwrap() - m.internal_energy(tau - h).unwrap()) / (2.0 * h);
            assert!(rel(de, -m.pressure(tau).unwrap()) < 1e-6);
        }
    }
}
