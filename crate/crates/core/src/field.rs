//! Mesh, nodal degrees of freedom and the conservative / Lagrange /
//! characteristic variable transforms.

use crate::basis::Basis;
use crate::error::{LpdgError, Result};
use crate::thermo::GasModel;

/// Density and momentum at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedState {
    pub rho: f64,
    pub mom: f64,
}

impl ConservedState {
    pub const fn new(rho: f64, mom: f64) -> Self {
        Self { rho, mom }
    }

    pub fn from_velocity(rho: f64, vel: f64) -> Self {
        Self { rho, mom: rho * vel }
    }

    pub fn velocity(&self) -> f64 {
        self.mom / self.rho
    }
}

/// Specific volume, velocity and relaxation pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeState {
    pub tau: f64,
    pub vel: f64,
    pub pi: f64,
}

/// Invariants of the acoustic relaxation system for a parameter `a`:
/// `W> = Pi + a u`, `J = Pi + a^2 tau`, `W< = Pi - a u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicTriple {
    pub w_plus: f64,
    pub j_inv: f64,
    pub w_minus: f64,
}

/// Equilibrium Lagrange state `(1/rho, rho u / rho, p(1/rho))`.
pub fn to_lagrange(model: &GasModel, u: ConservedState) -> Result<LagrangeState> {
    if !(u.rho > 0.0) {
        return Err(LpdgError::NonPositiveDensity(u.rho));
    }
    Ok(to_lagrange_unchecked(model, u))
}

#[inline]
pub(crate) fn to_lagrange_unchecked(model: &GasModel, u: ConservedState) -> LagrangeState {
    let tau = 1.0 / u.rho;
    LagrangeState {
        tau,
        vel: u.mom / u.rho,
        pi: model.pressure_unchecked(tau),
    }
}

/// Drops the relaxation pressure and returns `(1/tau, u/tau)`.
pub fn to_conservative(w: LagrangeState) -> Result<ConservedState> {
    if !(w.tau > 0.0) {
        return Err(LpdgError::NonPositiveVolume(w.tau));
    }
    Ok(ConservedState::new(1.0 / w.tau, w.vel / w.tau))
}

pub fn to_characteristic(w: LagrangeState, a: f64) -> CharacteristicTriple {
    CharacteristicTriple {
        w_plus: w.pi + a * w.vel,
        j_inv: w.pi + a * a * w.tau,
        w_minus: w.pi - a * w.vel,
    }
}

/// Inverse of [`to_characteristic`]; fails when the reconstructed specific
/// volume is not positive.
pub fn from_characteristic(c: CharacteristicTriple, a: f64) -> Result<LagrangeState> {
    let pi = 0.5 * (c.w_plus + c.w_minus);
    let w = LagrangeState {
        tau: (c.j_inv - pi) / (a * a),
        vel: (c.w_plus - c.w_minus) / (2.0 * a),
        pi,
    };
    if w.tau > 0.0 {
        Ok(w)
    } else {
        Err(LpdgError::NonPositiveVolume(w.tau))
    }
}

/// Uniform 1D mesh of `n_elem` elements starting at `x_left`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub n_elem: usize,
    pub h: f64,
    pub x_left: f64,
}

impl Mesh {
    pub fn new(x_left: f64, x_right: f64, n_elem: usize) -> Result<Self> {
        if n_elem == 0 || !(x_right > x_left) {
            return Err(LpdgError::InvalidMesh(format!(
                "need n_elem >= 1 and x_right > x_left (got {n_elem}, [{x_left}, {x_right}])"
            )));
        }
        Ok(Self {
            n_elem,
            h: (x_right - x_left) / n_elem as f64,
            x_left,
        })
    }

    pub fn x_right(&self) -> f64 {
        self.x_left + self.n_elem as f64 * self.h
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x_left + (j as f64 + 0.5) * self.h
    }

    /// Physical position of reference coordinate `s` in element `j`.
    pub fn position(&self, j: usize, s: f64) -> f64 {
        self.center(j) + 0.5 * s * self.h
    }

    pub fn length(&self) -> f64 {
        self.n_elem as f64 * self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Periodic,
    /// Constant ghost states outside the window.
    FarField {
        left: ConservedState,
        right: ConservedState,
    },
}

/// Nodal DOFs of the discontinuous polynomial solution, stored element-major
/// and node-minor with one array per conserved component.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub mesh: Mesh,
    pub degree: usize,
    pub boundary: Boundary,
    pub time: f64,
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
}

impl SolutionField {
    /// Field filled with a constant state.
    pub fn uniform(mesh: Mesh, degree: usize, boundary: Boundary, state: ConservedState) -> Self {
        let n = mesh.n_elem * (degree + 1);
        Self {
            mesh,
            degree,
            boundary,
            time: 0.0,
            rho: vec![state.rho; n],
            mom: vec![state.mom; n],
        }
    }

    #[inline]
    pub fn nodes_per_elem(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn n_elem(&self) -> usize {
        self.mesh.n_elem
    }

    pub fn n_dofs(&self) -> usize {
        self.rho.len()
    }

    #[inline]
    pub fn idx(&self, j: usize, k: usize) -> usize {
        j * (self.degree + 1) + k
    }

    #[inline]
    pub fn state(&self, j: usize, k: usize) -> ConservedState {
        let i = self.idx(j, k);
        ConservedState::new(self.rho[i], self.mom[i])
    }

    #[inline]
    pub fn set_state(&mut self, j: usize, k: usize, s: ConservedState) {
        let i = self.idx(j, k);
        self.rho[i] = s.rho;
        self.mom[i] = s.mom;
    }

    pub fn node_position(&self, basis: &Basis, j: usize, k: usize) -> f64 {
        self.mesh.position(j, basis.nodes()[k])
    }

    /// Quadrature-weighted cell mean `sum_k (w_k / 2) U_j^k`.
    pub fn cell_mean(&self, basis: &Basis, j: usize) -> ConservedState {
        let base = self.idx(j, 0);
        let mut m = ConservedState::new(0.0, 0.0);
        for (k, w) in basis.weights().iter().enumerate() {
            m.rho += 0.5 * w * self.rho[base + k];
            m.mom += 0.5 * w * self.mom[base + k];
        }
        m
    }

    /// `(right trace of element j-1, left trace of element j+1)`, with
    /// periodic wrap-around or far-field ghost states at the ends.
    pub fn neighbor_dofs(&self, j: usize) -> (ConservedState, ConservedState) {
        let n = self.n_elem();
        let p = self.degree;
        let left = if j > 0 {
            self.state(j - 1, p)
        } else {
            match self.boundary {
                Boundary::Periodic => self.state(n - 1, p),
                Boundary::FarField { left, .. } => left,
            }
        };
        let right = if j + 1 < n {
            self.state(j + 1, 0)
        } else {
            match self.boundary {
                Boundary::Periodic => self.state(0, 0),
                Boundary::FarField { right, .. } => right,
            }
        };
        (left, right)
    }

    /// Sum of `h * mean` over all elements, per component.
    pub fn total(&self, basis: &Basis) -> ConservedState {
        let mut t = ConservedState::new(0.0, 0.0);
        for j in 0..self.n_elem() {
            let m = self.cell_mean(basis, j);
            t.rho += self.mesh.h * m.rho;
            t.mom += self.mesh.h * m.mom;
        }
        t
    }

    pub fn min_density(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// First node with non-positive (or NaN) density.
    pub fn check_admissible(&self) -> Result<()> {
        for (i, &r) in self.rho.iter().enumerate() {
            if !(r > 0.0) || !self.mom[i].is_finite() {
                return Err(LpdgError::Inadmissible {
                    element: i / self.nodes_per_elem(),
                    node: i % self.nodes_per_elem(),
                    what: "density",
                    value: r,
                });
            }
        }
        Ok(())
    }

    /// DOF-wise linear combination `sum_i c_i f_i` of fields on the same mesh.
    pub fn linear_combination(terms: &[(f64, &SolutionField)]) -> SolutionField {
        let mut out = terms[0].1.clone();
        out.rho.iter_mut().for_each(|v| *v = 0.0);
        out.mom.iter_mut().for_each(|v| *v = 0.0);
        for (c, f) in terms {
            for (o, v) in out.rho.iter_mut().zip(&f.rho) {
                *o += c * v;
            }
            for (o, v) in out.mom.iter_mut().zip(&f.mom) {
                *o += c * v;
            }
        }
        out
    }
}

/// Initial data sampled at the solution nodes.
pub trait InitialCondition {
    fn state(&self, x: f64) -> ConservedState;

    /// Value at `x` seen from inside the element `[x_lo, x_hi]`. Data that
    /// jump exactly at an element interface override this to pick the
    /// one-sided limit.
    fn state_in_cell(&self, x: f64, _x_lo: f64, _x_hi: f64) -> ConservedState {
        self.state(x)
    }
}

impl<F: Fn(f64) -> ConservedState> InitialCondition for F {
    fn state(&self, x: f64) -> ConservedState {
        self(x)
    }
}

/// Piecewise-constant data with a single jump at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannData {
    pub left: ConservedState,
    pub right: ConservedState,
    pub x0: f64,
}

impl InitialCondition for RiemannData {
    fn state(&self, x: f64) -> ConservedState {
        if x < self.x0 {
            self.left
        } else {
            self.right
        }
    }

    // a jump on (or within rounding of) a cell edge leaves the cell one-sided
    fn state_in_cell(&self, x: f64, x_lo: f64, x_hi: f64) -> ConservedState {
        let tol = 1e-10 * (x_hi - x_lo);
        if self.x0 >= x_hi - tol {
            self.left
        } else if self.x0 <= x_lo + tol {
            self.right
        } else {
            self.state(x)
        }
    }
}

/// Nodal collocation of the initial data at the Gauss-Lobatto points.
pub fn project_initial<I: InitialCondition + ?Sized>(
    basis: &Basis,
    mesh: Mesh,
    boundary: Boundary,
    u0: &I,
) -> Result<SolutionField> {
    let p = basis.degree();
    let mut field = SolutionField::uniform(mesh, p, boundary, ConservedState::new(1.0, 0.0));
    for j in 0..mesh.n_elem {
        let (lo, hi) = (mesh.x_left + j as f64 * mesh.h, mesh.x_left + (j + 1) as f64 * mesh.h);
        for k in 0..=p {
            let x = mesh.position(j, basis.nodes()[k]);
            let s = u0.state_in_cell(x, lo, hi);
            if !(s.rho > 0.0) || !s.mom.is_finite() {
                return Err(LpdgError::Inadmissible {
                    element: j,
                    node: k,
                    what: "initial density",
                    value: s.rho,
                });
            }
            field.set_state(j, k, s);
        }
    }
    Ok(field)
}
