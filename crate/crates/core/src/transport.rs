//! Explicit upwind transport step driven by the acoustic star velocities.

use crate::basis::Basis;
use crate::field::{ConservedState, SolutionField};

/// Upwind trace at an interface: the left trace when `u* > 0`, the right
/// trace otherwise (ties go right).
#[inline]
pub fn upwind_state(left: ConservedState, right: ConservedState, u_star: f64) -> ConservedState {
    if u_star > 0.0 {
        left
    } else {
        right
    }
}

/// Inputs of the transport step, all at the intermediate time level.
#[derive(Debug, Clone, Copy)]
pub struct TransportInput<'a> {
    pub field: &'a SolutionField,
    /// Per-interface star velocities, `n_elem + 1` entries.
    pub star_u: &'a [f64],
    pub basis: &'a Basis,
    pub dt: f64,
}

/// Forward-Euler transport update of every node.
pub fn transport_step(input: TransportInput<'_>) -> SolutionField {
    let TransportInput { field, star_u, basis, dt } = input;
    let n = field.n_elem();
    let m = basis.len();
    let p = basis.degree();
    let h = field.mesh.h;
    let w = basis.weights();
    debug_assert_eq!(star_u.len(), n + 1);

    let mut out = field.clone();
    let mut vel = vec![0.0; m];
    for j in 0..n {
        let base = j * m;
        let rho = &field.rho[base..base + m];
        let mom = &field.mom[base..base + m];
        for k in 0..m {
            vel[k] = mom[k] / rho[k];
        }
        let (left_nb, right_nb) = field.neighbor_dofs(j);
        let (us_l, us_r) = (star_u[j], star_u[j + 1]);
        let hat_r = upwind_state(field.state(j, p), right_nb, us_r);
        let hat_l = upwind_state(left_nb, field.state(j, 0), us_l);
        for k in 0..m {
            // <u d_x U, phi_k> = w_k u_k sum_l D_kl U_l
            let (mut dr, mut dm) = (0.0, 0.0);
            for l in 0..m {
                let d = basis.d(k, l);
                dr += d * rho[l];
                dm += d * mom[l];
            }
            let mut res_r = w[k] * vel[k] * dr;
            let mut res_m = w[k] * vel[k] * dm;
            if k == p {
                res_r += us_r * (hat_r.rho - rho[p]);
                res_m += us_r * (hat_r.mom - mom[p]);
            }
            if k == 0 {
                res_r -= us_l * (hat_l.rho - rho[0]);
                res_m -= us_l * (hat_l.mom - mom[0]);
            }
            let lam_k = 2.0 * dt / (h * w[k]);
            out.rho[base + k] = rho[k] - lam_k * res_r;
            out.mom[base + k] = mom[k] - lam_k * res_m;
        }
    }
    out
}

/// Inputs of the assembled conservative update.
#[derive(Debug, Clone, Copy)]
pub struct ConservativeInput<'a> {
    /// Conserved DOFs at the start of the step.
    pub start: &'a SolutionField,
    /// Conserved DOFs after the acoustic step.
    pub mid: &'a SolutionField,
    /// Relaxed pressure after the acoustic step, one per node.
    pub mid_pi: &'a [f64],
    pub star_u: &'a [f64],
    pub star_pi: &'a [f64],
    pub basis: &'a Basis,
    pub dt: f64,
}

/// Single-residual form of the full step:
/// `U^{n+1}_k = U^n_k - (2 dt / (h w_k)) [-sum_l w_l f_l D_lk + delta_kp h_{j+1/2} - delta_k0 h_{j-1/2}]`
/// with `f = (rho u, rho u^2 + Pi)` and `h = (u* rho_hat, u* (rho u)_hat + Pi*)`, all at the
/// intermediate level. Within a full stage its cell means coincide with the split form.
pub fn conservative_update(input: ConservativeInput<'_>) -> SolutionField {
    let ConservativeInput { start, mid, mid_pi, star_u, star_pi, basis, dt } = input;
    let n = mid.n_elem();
    let m = basis.len();
    let p = basis.degree();
    let h = mid.mesh.h;
    let w = basis.weights();
    debug_assert_eq!(star_u.len(), n + 1);

    let flux = |j: usize| -> ConservedState {
        let (left, right) = if j == 0 {
            (mid.neighbor_dofs(0).0, mid.state(0, 0))
        } else if j == n {
            (mid.state(n - 1, p), mid.neighbor_dofs(n - 1).1)
        } else {
            (mid.state(j - 1, p), mid.state(j, 0))
        };
        let hat = upwind_state(left, right, star_u[j]);
        ConservedState::new(star_u[j] * hat.rho, star_u[j] * hat.mom + star_pi[j])
    };

    let mut out = start.clone();
    let mut fr = vec![0.0; m];
    let mut fm = vec![0.0; m];
    let mut h_left = flux(0);
    for j in 0..n {
        let h_right = flux(j + 1);
        let base = j * m;
        for l in 0..m {
            let (r, q) = (mid.rho[base + l], mid.mom[base + l]);
            fr[l] = q;
            fm[l] = q * q / r + mid_pi[base + l];
        }
        for k in 0..m {
            let (mut res_r, mut res_m) = (0.0, 0.0);
            for l in 0..m {
                let c = w[l] * basis.d(l, k);
                res_r -= c * fr[l];
                res_m -= c * fm[l];
            }
            if k == p {
                res_r += h_right.rho;
                res_m += h_right.mom;
            }
            if k == 0 {
                res_r -= h_left.rho;
                res_m -= h_left.mom;
            }
            let lam_k = 2.0 * dt / (h * w[k]);
            out.rho[base + k] -= lam_k * res_r;
            out.mom[base + k] -= lam_k * res_m;
        }
        h_left = h_right;
    }
    out
}

/// Adds `dt * s(x, t)` at every node.
pub fn add_source<S>(field: &mut SolutionField, basis: &Basis, source: &S, t: f64, dt: f64)
where
    S: Fn(f64, f64) -> ConservedState + ?Sized,
{
    for j in 0..field.n_elem() {
        for k in 0..basis.len() {
            let x = field.node_position(basis, j, k);
            let s = source(x, t);
            let i = field.idx(j, k);
            field.rho[i] += dt * s.rho;
            field.mom[i] += dt * s.mom;
        }
    }
}
