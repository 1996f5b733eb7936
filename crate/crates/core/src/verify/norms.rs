//! Discrete error norms against an exact solution, and observed orders.

use crate::basis::{gauss_lobatto, Basis, MAX_DEGREE};
use crate::error::Result;
use crate::field::{ConservedState, SolutionField};

/// Scalar extracted from a conserved state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Density,
    Momentum,
    Velocity,
}

impl Component {
    pub fn of(&self, u: ConservedState) -> f64 {
        match self {
            Self::Density => u.rho,
            Self::Momentum => u.mom,
            Self::Velocity => u.velocity(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl ErrorReport {
    /// `log2(coarse / fine)` per norm, for a mesh refined by a factor two.
    pub fn orders(coarse: &ErrorReport, fine: &ErrorReport) -> [f64; 3] {
        [
            (coarse.l1 / fine.l1).log2(),
            (coarse.l2 / fine.l2).log2(),
            (coarse.linf / fine.linf).log2(),
        ]
    }
}

/// L1 and L2 norms use a Gauss-Lobatto rule with `2(p+1)` points per
/// element; the max norm samples `10(p+1)` equispaced points per element.
pub fn error_norms<E>(basis: &Basis, field: &SolutionField, component: Component, exact: E) -> Result<ErrorReport>
where
    E: Fn(f64) -> f64,
{
    let p = basis.degree();
    let quad = gauss_lobatto((2 * p + 1).min(MAX_DEGREE))?;
    let m = basis.len();
    let h = field.mesh.h;
    let n_lin = 10 * (p + 1);
    let mut vals = vec![0.0; m];
    let (mut l1, mut l2, mut linf) = (0.0f64, 0.0f64, 0.0f64);
    for j in 0..field.n_elem() {
        for (k, v) in vals.iter_mut().enumerate() {
            *v = component.of(field.state(j, k));
        }
        for (s, w) in quad.nodes().iter().zip(quad.weights()) {
            let e = (basis.interpolate(&vals, *s) - exact(field.mesh.position(j, *s))).abs();
            l1 += 0.5 * h * w * e;
            l2 += 0.5 * h * w * e * e;
        }
        for i in 0..n_lin {
            let s = -1.0 + 2.0 * i as f64 / (n_lin - 1) as f64;
            let e = (basis.interpolate(&vals, s) - exact(field.mesh.position(j, s))).abs();
            linf = linf.max(e);
        }
    }
    Ok(ErrorReport { l1, l2: l2.sqrt(), linf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{project_initial, Boundary, Mesh};

    fn field_of(p: usize, n: usize, f: impl Fn(f64) -> f64) -> (std::sync::Arc<Basis>, SolutionField) {
        let basis = Basis::shared(p).unwrap();
        let mesh = Mesh::new(0.0, 1.0, n).unwrap();
        let field = project_initial(&basis, mesh, Boundary::Periodic, &|x: f64| ConservedState::new(f(x), 0.0)).unwrap();
        (basis, field)
    }

    #[test]
    fn exact_polynomials_have_zero_error() {
        let (basis, field) = field_of(3, 5, |x| 1.0 + x * x * x);
        let r = error_norms(&basis, &field, Component::Density, |x| 1.0 + x * x * x).unwrap();
        assert!(r.l1 < 1e-14 && r.l2 < 1e-14 && r.linf < 1e-14);
    }

    #[test]
    fn constant_offset() {
        let (basis, field) = field_of(2, 7, |x| x.sin() + 2.0);
        let r = error_norms(&basis, &field, Component::Density, |x| x.sin() + 1.75).unwrap();
        // interpolation error is tiny compared with the offset
        assert!((r.l1 - 0.25).abs() < 1e-4);
        assert!((r.l2 - 0.25).abs() < 1e-4);
        assert!((r.linf - 0.25).abs() < 1e-4);
    }

    #[test]
    fn norm_ordering_and_homogeneity() {
        // on a unit domain: l1 <= l2 <= linf
        let (basis, field) = field_of(2, 6, |x| 1.5 + (6.0 * x).sin());
        let exact = |x: f64| 1.5 + (6.0 * x).sin() + 0.1 * (3.0 * x).cos();
        let r = error_norms(&basis, &field, Component::Density, exact).unwrap();
        assert!(r.l1 <= r.l2 * (1.0 + 1e-12) && r.l2 <= r.linf * (1.0 + 1e-12));
        let mut scaled = field.clone();
        scaled.rho.iter_mut().for_each(|v| *v *= 3.0);
        let r3 = error_norms(&basis, &scaled, Component::Density, |x| 3.0 * exact(x)).unwrap();
        assert!((r3.l1 - 3.0 * r.l1).abs() < 1e-12);
        assert!((r3.l2 - 3.0 * r.l2).abs() < 1e-12);
    }

    #[test]
    fn orders_of_halving() {
        let c = ErrorReport { l1: 1.0, l2: 2.0, linf: 4.0 };
        let f = ErrorReport { l1: 0.25, l2: 0.25, linf: 2.0 };
        assert_eq!(ErrorReport::orders(&c, &f), [2.0, 3.0, 1.0]);
    }
}
