//! Implicit acoustic step: Suliciu relaxation Riemann solver and the
//! backward-Euler update written in characteristic variables.
//!
//! With `c_k = 2 a dt tau_k^n / h` and `b_k = c_k / w_k`, the right-going
//! invariant satisfies, for each element `j` and node `k`,
//!
//! ```text
//! W>_k + c_k sum_l D_kl W>_l + delta_k0 b_0 (W>_{j,0} - W>_{j-1,p}) = W>_k^n
//! ```
//!
//! and the left-going invariant the mirror image coupled to `W<_{j+1,0}`.
//! `J = Pi + a^2 tau` is unchanged by the step.

use nalgebra::DMatrix;

use crate::basis::Basis;
use crate::error::{LpdgError, Result};
use crate::field::{to_lagrange_unchecked, Boundary, ConservedState, LagrangeState, SolutionField};
use crate::linsolve::{BlockBidiagonal, Sweep};
use crate::thermo::GasModel;

/// Intermediate states of the relaxation Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarState {
    pub u_star: f64,
    pub pi_star: f64,
    pub tau_l_star: f64,
    pub tau_r_star: f64,
}

pub fn riemann_star(wl: LagrangeState, wr: LagrangeState, a: f64) -> StarState {
    let u_star = 0.5 * (wl.vel + wr.vel) + (wl.pi - wr.pi) / (2.0 * a);
    let pi_star = 0.5 * (wl.pi + wr.pi) + 0.5 * a * (wl.vel - wr.vel);
    StarState {
        u_star,
        pi_star,
        tau_l_star: wl.tau + (u_star - wl.vel) / a,
        tau_r_star: wr.tau + (wr.vel - u_star) / a,
    }
}

/// Interface flux `(-u*, Pi*, a^2 u*)`.
pub fn acoustic_flux(wl: LagrangeState, wr: LagrangeState, a: f64) -> [f64; 3] {
    let s = riemann_star(wl, wr, a);
    [-s.u_star, s.pi_star, a * a * s.u_star]
}

/// Relaxation parameter `safety * max_nodes sqrt(-p'(tau))` for the field.
pub fn select_a(model: &GasModel, field: &SolutionField, safety: f64) -> Result<f64> {
    if !(safety >= 1.0) {
        return Err(LpdgError::Config(format!("a safety factor must be >= 1, got {safety}")));
    }
    field.check_admissible()?;
    let max = field
        .rho
        .iter()
        .map(|&r| model.lagrangian_sound_speed_unchecked(1.0 / r))
        .fold(0.0f64, f64::max);
    Ok(safety * max)
}

/// Largest `sqrt(-p'(tau))` along the segment between the two volumes,
/// sampled at `samples` equispaced points including both ends.
pub fn subcharacteristic_bound(model: &GasModel, tau_old: &[f64], tau_new: &[f64], samples: usize) -> f64 {
    let samples = samples.max(2);
    let mut max = 0.0f64;
    for (&t0, &t1) in tau_old.iter().zip(tau_new) {
        for i in 0..samples {
            let theta = i as f64 / (samples - 1) as f64;
            let tau = theta * t0 + (1.0 - theta) * t1;
            max = max.max(model.lagrangian_sound_speed_unchecked(tau));
        }
    }
    max
}

/// Outcome of one implicit acoustic step.
#[derive(Debug, Clone)]
pub struct AcousticResult {
    pub a_used: f64,
    pub dt: f64,
    /// Equilibrium Lagrange states at the start of the step.
    pub lagrange_prev: Vec<LagrangeState>,
    /// Lagrange states after the step.
    pub lagrange: Vec<LagrangeState>,
    /// Conserved DOFs after the step.
    pub conserved: SolutionField,
    /// Star velocity per interface; interface `i` is the left edge of element `i`,
    /// `n_elem + 1` entries.
    pub star_u: Vec<f64>,
    pub star_pi: Vec<f64>,
    /// `L = tau^{n+1-} / tau^n` per node.
    pub l_factor: Vec<f64>,
    pub j_before: Vec<f64>,
    pub j_after: Vec<f64>,
    pub w_plus: Vec<f64>,
    pub w_minus: Vec<f64>,
    /// Relative residuals of the right- and left-going solves.
    pub residuals: (f64, f64),
}

/// Ghost Lagrange states at equilibrium, when the boundary is far-field.
fn ghosts(model: &GasModel, boundary: &Boundary) -> Option<(LagrangeState, LagrangeState)> {
    match boundary {
        Boundary::Periodic => None,
        Boundary::FarField { left, right } => {
            Some((to_lagrange_unchecked(model, *left), to_lagrange_unchecked(model, *right)))
        }
    }
}

/// Assembles the right-going (forward sweep) or left-going (backward sweep) system.
pub(crate) fn assemble(
    basis: &Basis,
    tau: &[f64],
    n_elem: usize,
    h: f64,
    a: f64,
    dt: f64,
    sweep: Sweep,
    cyclic: bool,
) -> BlockBidiagonal {
    let m = basis.len();
    let p = basis.degree();
    let w = basis.weights();
    let sign = match sweep {
        Sweep::Forward => 1.0,
        Sweep::Backward => -1.0,
    };
    let (edge, far) = match sweep {
        Sweep::Forward => (0, p),
        Sweep::Backward => (p, 0),
    };
    let mut diag = Vec::with_capacity(n_elem);
    let mut coupling = Vec::with_capacity(n_elem);
    for j in 0..n_elem {
        let mut blk = DMatrix::<f64>::identity(m, m);
        for k in 0..m {
            let c = 2.0 * a * dt * tau[j * m + k] / h;
            for l in 0..m {
                blk[(k, l)] += sign * c * basis.d(k, l);
            }
        }
        let b = 2.0 * a * dt * tau[j * m + edge] / (h * w[edge]);
        blk[(edge, edge)] += b;
        diag.push(blk);
        coupling.push(-b);
    }
    BlockBidiagonal {
        block: m,
        sweep,
        cyclic,
        diag,
        coupling,
        row: edge,
        col: far,
    }
}

/// One backward-Euler acoustic step of length `dt` from equilibrium data.
pub fn solve_acoustic_step(
    model: &GasModel,
    basis: &Basis,
    field: &SolutionField,
    a: f64,
    dt: f64,
) -> Result<AcousticResult> {
    if !(a > 0.0 && dt > 0.0) {
        return Err(LpdgError::Config(format!("need a > 0 and dt > 0 (a = {a}, dt = {dt})")));
    }
    field.check_admissible()?;
    let n = field.n_elem();
    let m = basis.len();
    let p = basis.degree();
    let h = field.mesh.h;
    let periodic = matches!(field.boundary, Boundary::Periodic);

    let lagrange_prev: Vec<LagrangeState> = field
        .rho
        .iter()
        .zip(&field.mom)
        .map(|(&r, &q)| to_lagrange_unchecked(model, ConservedState::new(r, q)))
        .collect();
    let tau_prev: Vec<f64> = lagrange_prev.iter().map(|w| w.tau).collect();
    let mut rhs_plus: Vec<f64> = lagrange_prev.iter().map(|w| w.pi + a * w.vel).collect();
    let mut rhs_minus: Vec<f64> = lagrange_prev.iter().map(|w| w.pi - a * w.vel).collect();
    let j_before: Vec<f64> = lagrange_prev.iter().map(|w| w.pi + a * a * w.tau).collect();

    let ghost = ghosts(model, &field.boundary);
    let ghost_w = ghost.map(|(gl, gr)| (gl.pi + a * gl.vel, gr.pi - a * gr.vel));
    if let Some((wl, wr)) = ghost_w {
        // known ghost traces move to the right-hand side
        let w = basis.weights();
        rhs_plus[0] += 2.0 * a * dt * tau_prev[0] / (h * w[0]) * wl;
        let last = (n - 1) * m + p;
        rhs_minus[last] += 2.0 * a * dt * tau_prev[last] / (h * w[p]) * wr;
    }

    let sys_plus = assemble(basis, &tau_prev, n, h, a, dt, Sweep::Forward, periodic);
    let sys_minus = assemble(basis, &tau_prev, n, h, a, dt, Sweep::Backward, periodic);
    let (w_plus, res_plus) = sys_plus.solve(&rhs_plus)?;
    let (w_minus, res_minus) = sys_minus.solve(&rhs_minus)?;

    let j_after = j_before.clone();
    let mut lagrange = Vec::with_capacity(n * m);
    for i in 0..n * m {
        let pi = 0.5 * (w_plus[i] + w_minus[i]);
        let w = LagrangeState {
            tau: (j_after[i] - pi) / (a * a),
            vel: (w_plus[i] - w_minus[i]) / (2.0 * a),
            pi,
        };
        if !(w.tau > 0.0) {
            return Err(LpdgError::Inadmissible {
                element: i / m,
                node: i % m,
                what: "specific volume after acoustic step",
                value: w.tau,
            });
        }
        lagrange.push(w);
    }

    // star values from implicit traces: u* = (W>_L - W<_R) / 2a, Pi* = (W>_L + W<_R) / 2
    let mut star_u = Vec::with_capacity(n + 1);
    let mut star_pi = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let wl = if i > 0 {
            w_plus[(i - 1) * m + p]
        } else {
            match ghost_w {
                Some((g, _)) => g,
                None => w_plus[(n - 1) * m + p],
            }
        };
        let wr = if i < n {
            w_minus[i * m]
        } else {
            match ghost_w {
                Some((_, g)) => g,
                None => w_minus[0],
            }
        };
        star_u.push((wl - wr) / (2.0 * a));
        star_pi.push(0.5 * (wl + wr));
    }

    let vel: Vec<f64> = lagrange.iter().map(|w| w.vel).collect();
    let l_factor = l_factors(basis, &vel, &star_u, n, h, dt);

    let mut conserved = field.clone();
    for (i, w) in lagrange.iter().enumerate() {
        conserved.rho[i] = 1.0 / w.tau;
        conserved.mom[i] = w.vel / w.tau;
    }

    Ok(AcousticResult {
        a_used: a,
        dt,
        lagrange_prev,
        lagrange,
        conserved,
        star_u,
        star_pi,
        l_factor,
        j_before,
        j_after,
        w_plus,
        w_minus,
        residuals: (res_plus, res_minus),
    })
}

/// `L_j^k = 1 + (2 dt / (h w_k)) (-<u, d_x phi_k> + delta_kp u*_{j+1/2} - delta_k0 u*_{j-1/2})`.
pub fn l_factors(basis: &Basis, vel: &[f64], star_u: &[f64], n_elem: usize, h: f64, dt: f64) -> Vec<f64> {
    let m = basis.len();
    let p = basis.degree();
    let w = basis.weights();
    let mut out = Vec::with_capacity(n_elem * m);
    for j in 0..n_elem {
        let u = &vel[j * m..(j + 1) * m];
        for k in 0..m {
            let mut q = -(0..m).map(|l| w[l] * u[l] * basis.d(l, k)).sum::<f64>();
            if k == p {
                q += star_u[j + 1];
            }
            if k == 0 {
                q -= star_u[j];
            }
            out.push(1.0 + 2.0 * dt / (h * w[k]) * q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{project_initial, to_characteristic, Mesh};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ls(tau: f64, vel: f64, pi: f64) -> LagrangeState {
        LagrangeState { tau, vel, pi }
    }

    fn random_field(rng: &mut ChaCha8Rng, p: usize, n: usize, periodic: bool) -> SolutionField {
        let mesh = Mesh::new(0.0, 1.0, n).unwrap();
        let boundary = if periodic {
            Boundary::Periodic
        } else {
            Boundary::FarField {
                left: ConservedState::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)),
                right: ConservedState::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)),
            }
        };
        let mut f = SolutionField::uniform(mesh, p, boundary, ConservedState::new(1.0, 0.0));
        for i in 0..f.n_dofs() {
            f.rho[i] = rng.gen_range(0.5..2.0);
            f.mom[i] = f.rho[i] * rng.gen_range(-1.0..1.0);
        }
        f
    }

    #[test]
    fn star_state_cases() {
        let s = riemann_star(ls(1.0, 0.0, 1.0), ls(1.0, 0.0, 1.0), 3.7);
        assert_eq!(s, StarState { u_star: 0.0, pi_star: 1.0, tau_l_star: 1.0, tau_r_star: 1.0 });

        let s = riemann_star(ls(1.0, 1.0, 1.0), ls(2.0, 0.0, 2.0), 2.0);
        assert!((s.u_star - 0.25).abs() < 1e-15);
        assert!((s.pi_star - 2.5).abs() < 1e-15);
        assert!((s.tau_l_star - 0.625).abs() < 1e-15);
        assert!((s.tau_r_star - 1.875).abs() < 1e-15);

        let f = acoustic_flux(ls(1.0, 1.0, 1.0), ls(2.0, 0.0, 2.0), 2.0);
        assert!((f[0] + 0.25).abs() < 1e-15 && (f[1] - 2.5).abs() < 1e-15 && (f[2] - 1.0).abs() < 1e-15);
        assert_eq!(acoustic_flux(ls(1.0, 0.0, 1.0), ls(1.0, 0.0, 1.0), 2.0), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn star_state_mirror_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let wl = ls(rng.gen_range(0.1..3.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..3.0));
            let wr = ls(rng.gen_range(0.1..3.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..3.0));
            let a = rng.gen_range(0.5..5.0);
            let s = riemann_star(wl, wr, a);
            let m = riemann_star(ls(wr.tau, -wr.vel, wr.pi), ls(wl.tau, -wl.vel, wl.pi), a);
            assert!((s.u_star + m.u_star).abs() < 1e-14);
            assert!((s.pi_star - m.pi_star).abs() < 1e-14);
        }
    }

    #[test]
    fn select_a_values() {
        let model = GasModel::new(1.0, 1.4).unwrap();
        let mesh = Mesh::new(0.0, 1.0, 3).unwrap();
        let f = SolutionField::uniform(mesh, 2, Boundary::Periodic, ConservedState::new(1.0, 0.3));
        assert!((select_a(&model, &f, 1.01).unwrap() - 1.01 * 1.4f64.sqrt()).abs() < 1e-15);
        assert_eq!(select_a(&model, &f, 1.0).unwrap(), 1.4f64.sqrt());
        assert!(select_a(&model, &f, 0.9).is_err());
        let mut g = f.clone();
        g.rho[4] = 2.0; // tau_min decreases
        assert!(select_a(&model, &g, 1.0).unwrap() > select_a(&model, &f, 1.0).unwrap());
        g.rho[1] = -1.0;
        assert!(select_a(&model, &g, 1.0).is_err());
    }

    #[test]
    fn uniform_state_is_fixed() {
        let model = GasModel::new(1.0, 1.4).unwrap();
        for p in 1..=3 {
            let basis = Basis::shared(p).unwrap();
            let mesh = Mesh::new(0.0, 1.0, 5).unwrap();
            let c = ConservedState::new(1.3, 1.3 * 0.7);
            for bc in [Boundary::Periodic, Boundary::FarField { left: c, right: c }] {
                let f = SolutionField::uniform(mesh, p, bc, c);
                let r = solve_acoustic_step(&model, &basis, &f, 2.0, 0.05).unwrap();
                for i in 0..f.n_dofs() {
                    assert!((r.conserved.rho[i] - c.rho).abs() < 1e-13);
                    assert!((r.conserved.mom[i] - c.mom).abs() < 1e-13);
                    assert!((r.l_factor[i] - 1.0).abs() < 1e-13);
                }
                assert!(r.star_u.iter().all(|u| (u - 0.7).abs() < 1e-13));
                assert_eq!(r.j_before, r.j_after);
            }
        }
    }

    /// Brute-force dense assembly of both characteristic systems, row by row
    /// from the nodal equations, solved by a dense LU.
    fn dense_oracle(model: &GasModel, basis: &Basis, f: &SolutionField, a: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
        let n = f.n_elem();
        let m = basis.len();
        let p = basis.degree();
        let h = f.mesh.h;
        let size = n * m;
        let mut ap = DMatrix::<f64>::zeros(size, size);
        let mut am = DMatrix::<f64>::zeros(size, size);
        let mut rp = DVector::<f64>::zeros(size);
        let mut rm = DVector::<f64>::zeros(size);
        let ghost = ghosts(model, &f.boundary);
        for j in 0..n {
            for k in 0..m {
                let row = j * m + k;
                let w = to_lagrange_unchecked(model, f.state(j, k));
                let lam_k = 2.0 * dt / (h * basis.weights()[k]);
                let coef = a * lam_k * w.tau;
                // <d_x w, phi_k> = (h/2) w_k (2/h) sum_l D_kl W_l
                ap[(row, row)] += 1.0;
                am[(row, row)] += 1.0;
                for l in 0..m {
                    ap[(row, j * m + l)] += coef * basis.weights()[k] * basis.d(k, l);
                    am[(row, j * m + l)] -= coef * basis.weights()[k] * basis.d(k, l);
                }
                rp[row] = w.pi + a * w.vel;
                rm[row] = w.pi - a * w.vel;
                if k == 0 {
                    ap[(row, row)] += coef;
                    if j > 0 {
                        ap[(row, (j - 1) * m + p)] -= coef;
                    } else if let Some((gl, _)) = ghost {
                        rp[row] += coef * (gl.pi + a * gl.vel);
                    } else {
                        ap[(row, (n - 1) * m + p)] -= coef;
                    }
                }
                if k == p {
                    am[(row, row)] += coef;
                    if j + 1 < n {
                        am[(row, (j + 1) * m)] -= coef;
                    } else if let Some((_, gr)) = ghost {
                        rm[row] += coef * (gr.pi - a * gr.vel);
                    } else {
                        am[(row, 0)] -= coef;
                    }
                }
            }
        }
        let xp = ap.lu().solve(&rp).unwrap();
        let xm = am.lu().solve(&rm).unwrap();
        (xp.as_slice().to_vec(), xm.as_slice().to_vec())
    }

    #[test]
    fn matches_dense_oracle() {
        let model = GasModel::new(1.0, 1.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for p in 1..=3 {
            let basis = Basis::shared(p).unwrap();
            for n in 1..=8 {
                for periodic in [true, false] {
                    let f = random_field(&mut rng, p, n, periodic);
                    let a = select_a(&model, &f, 1.1).unwrap();
                    let dt = rng.gen_range(0.01..0.2) / n as f64;
                    let r = solve_acoustic_step(&model, &basis, &f, a, dt).unwrap();
                    let (xp, xm) = dense_oracle(&model, &basis, &f, a, dt);
                    let scale = xp.iter().chain(&xm).fold(1.0f64, |s, v| s.max(v.abs()));
                    for i in 0..xp.len() {
                        assert!((r.w_plus[i] - xp[i]).abs() <= 1e-12 * scale);
                        assert!((r.w_minus[i] - xm[i]).abs() <= 1e-12 * scale);
                    }
                    assert!(r.residuals.0 <= 1e-12 && r.residuals.1 <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn primitive_update_and_l_factor_identities() {
        let model = GasModel::new(0.05625, 1.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for p in 1..=3 {
            let basis = Basis::shared(p).unwrap();
            let m = p + 1;
            let w = basis.weights();
            for periodic in [true, false] {
                let f = random_field(&mut rng, p, 6, periodic);
                let a = select_a(&model, &f, 1.05).unwrap();
                let h = f.mesh.h;
                let dt = 0.1 * h;
                let r = solve_acoustic_step(&model, &basis, &f, a, dt).unwrap();
                for j in 0..6 {
                    let new = &r.lagrange[j * m..(j + 1) * m];
                    let old = &r.lagrange_prev[j * m..(j + 1) * m];
                    for k in 0..m {
                        let lam_k = 2.0 * dt / (h * w[k]);
                        let deriv = |g: &dyn Fn(&LagrangeState) -> f64| -> f64 {
                            w[k] * (0..m).map(|l| basis.d(k, l) * g(&new[l])).sum::<f64>()
                        };
                        let (us_r, us_l) = (r.star_u[j + 1], r.star_u[j]);
                        let (ps_r, ps_l) = (r.star_pi[j + 1], r.star_pi[j]);
                        let dk = |kk: usize| if k == kk { 1.0 } else { 0.0 };
                        let t = old[k].tau;
                        // tau
                        let bt = -deriv(&|s| s.vel) + dk(p) * (-us_r + new[p].vel) - dk(0) * (-us_l + new[0].vel);
                        let tau_expect = old[k].tau - lam_k * t * bt;
                        assert!((new[k].tau - tau_expect).abs() <= 1e-10 * tau_expect.abs());
                        // u
                        let bu = deriv(&|s| s.pi) + dk(p) * (ps_r - new[p].pi) - dk(0) * (ps_l - new[0].pi);
                        let u_expect = old[k].vel - lam_k * t * bu;
                        assert!((new[k].vel - u_expect).abs() <= 1e-10 * (1.0 + u_expect.abs() + a * t));
                        // Pi
                        let bp = a * a * (deriv(&|s| s.vel) + dk(p) * (us_r - new[p].vel) - dk(0) * (us_l - new[0].vel));
                        let pi_expect = old[k].pi - lam_k * t * bp;
                        assert!((new[k].pi - pi_expect).abs() <= 1e-10 * (pi_expect.abs() + a * a * t));

                        // L from the derivative form
                        let la = 1.0
                            + lam_k
                                * (deriv(&|s| s.vel) + dk(p) * (us_r - new[p].vel) - dk(0) * (us_l - new[0].vel));
                        assert!((la - r.l_factor[j * m + k]).abs() <= 1e-12 * la.abs().max(1.0));
                        assert!((r.l_factor[j * m + k] * r.conserved.rho[j * m + k] - f.rho[j * m + k]).abs()
                            <= 1e-11 * f.rho[j * m + k]);
                    }
                }
                // star values agree with the two-state solver on the implicit traces
                for i in 1..6 {
                    let s = riemann_star(r.lagrange[(i - 1) * m + p], r.lagrange[i * m], a);
                    assert!((s.u_star - r.star_u[i]).abs() < 1e-11 * (1.0 + s.u_star.abs()));
                    assert!((s.pi_star - r.star_pi[i]).abs() < 1e-11 * (1.0 + s.pi_star.abs()));
                }
            }
        }
    }

    #[test]
    fn j_is_copied() {
        let model = GasModel::new(1.0, 1.4).unwrap();
        let basis = Basis::shared(2).unwrap();
        let mesh = Mesh::new(0.0, 1.0, 6).unwrap();
        let wave = |x: f64| ConservedState::from_velocity(1.0 + 0.3 * (6.0 * x).sin(), 0.5 * x);
        let f = project_initial(&basis, mesh, Boundary::Periodic, &wave).unwrap();
        let a = select_a(&model, &f, 1.05).unwrap();
        let r = solve_acoustic_step(&model, &basis, &f, a, 0.01).unwrap();
        let drift = r
            .j_before
            .iter()
            .zip(&r.j_after)
            .map(|(b, c)| (b - c).abs())
            .fold(0.0, f64::max);
        assert_eq!(drift, 0.0);
        for (w, j) in r.lagrange.iter().zip(&r.j_after) {
            assert!((to_characteristic(*w, a).j_inv - j).abs() <= 1e-13 * j.abs());
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let model = GasModel::new(1.0, 1.4).unwrap();
        let basis = Basis::shared(1).unwrap();
        let mesh = Mesh::new(0.0, 1.0, 2).unwrap();
        let f = SolutionField::uniform(mesh, 1, Boundary::Periodic, ConservedState::new(1.0, 0.0));
        assert!(solve_acoustic_step(&model, &basis, &f, 0.0, 0.1).is_err());
        assert!(solve_acoustic_step(&model, &basis, &f, 1.0, 0.0).is_err());
    }
}
