//! Per-stage diagnostics of the discrete stability properties: positivity of
//! cell means, the convex-combination form of the updated means, nodal
//! entropy/energy inequalities of the acoustic step, the cell energy
//! inequality of the full step, invariance of `J`, and conservation.

use crate::acoustic::AcousticResult;
use crate::basis::Basis;
use crate::field::{Boundary, ConservedState, SolutionField};
use crate::thermo::GasModel;
use crate::transport::upwind_state;

/// Relative slack below which an inequality counts as violated.
pub const MONITOR_TOL: f64 = 1e-9;
/// Tolerance on the convex coefficients (sign and unit sum).
pub const CONVEX_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorRecord {
    pub min_mean_density: f64,
    pub mean_positivity_violations: usize,
    pub min_convex_coeff: f64,
    pub max_convex_sum_error: f64,
    pub convex_violations: usize,
    /// Largest relative mismatch between the transported mean and the convex combination.
    pub max_convex_residual: f64,
    /// Smallest relative slack of the nodal entropy inequality (negative means violated).
    pub min_nodal_entropy_slack: f64,
    pub nodal_entropy_violations: usize,
    pub min_nodal_energy_slack: f64,
    pub nodal_energy_violations: usize,
    /// Mass-weighted element sum of the nodal entropy inequalities, where the
    /// volume terms telescope by summation by parts.
    pub min_cell_entropy_slack: f64,
    pub cell_entropy_violations: usize,
    pub min_cell_energy_slack: f64,
    pub cell_energy_violations: usize,
    pub j_exact: bool,
    pub max_j_drift: f64,
    /// Relative change in total mass and momentum; periodic meshes only.
    pub mass_change: Option<f64>,
    pub momentum_change: Option<f64>,
    pub stages: usize,
}

impl Default for MonitorRecord {
    fn default() -> Self {
        Self {
            min_mean_density: f64::INFINITY,
            mean_positivity_violations: 0,
            min_convex_coeff: f64::INFINITY,
            max_convex_sum_error: 0.0,
            convex_violations: 0,
            max_convex_residual: 0.0,
            min_nodal_entropy_slack: f64::INFINITY,
            nodal_entropy_violations: 0,
            min_nodal_energy_slack: f64::INFINITY,
            nodal_energy_violations: 0,
            min_cell_entropy_slack: f64::INFINITY,
            cell_entropy_violations: 0,
            min_cell_energy_slack: f64::INFINITY,
            cell_energy_violations: 0,
            j_exact: true,
            max_j_drift: 0.0,
            mass_change: None,
            momentum_change: None,
            stages: 0,
        }
    }
}

fn merge_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl MonitorRecord {
    pub fn violations(&self) -> usize {
        self.mean_positivity_violations
            + self.convex_violations
            + self.nodal_entropy_violations
            + self.nodal_energy_violations
            + self.cell_entropy_violations
            + self.cell_energy_violations
            + usize::from(!self.j_exact)
    }

    pub fn merge(&mut self, o: &MonitorRecord) {
        self.min_mean_density = self.min_mean_density.min(o.min_mean_density);
        self.mean_positivity_violations += o.mean_positivity_violations;
        self.min_convex_coeff = self.min_convex_coeff.min(o.min_convex_coeff);
        self.max_convex_sum_error = self.max_convex_sum_error.max(o.max_convex_sum_error);
        self.convex_violations += o.convex_violations;
        self.max_convex_residual = self.max_convex_residual.max(o.max_convex_residual);
        self.min_nodal_entropy_slack = self.min_nodal_entropy_slack.min(o.min_nodal_entropy_slack);
        self.nodal_entropy_violations += o.nodal_entropy_violations;
        self.min_nodal_energy_slack = self.min_nodal_energy_slack.min(o.min_nodal_energy_slack);
        self.nodal_energy_violations += o.nodal_energy_violations;
        self.min_cell_entropy_slack = self.min_cell_entropy_slack.min(o.min_cell_entropy_slack);
        self.cell_entropy_violations += o.cell_entropy_violations;
        self.min_cell_energy_slack = self.min_cell_energy_slack.min(o.min_cell_energy_slack);
        self.cell_energy_violations += o.cell_energy_violations;
        self.j_exact &= o.j_exact;
        self.max_j_drift = self.max_j_drift.max(o.max_j_drift);
        self.mass_change = merge_opt(self.mass_change, o.mass_change);
        self.momentum_change = merge_opt(self.momentum_change, o.momentum_change);
        self.stages += o.stages;
    }
}

/// Relative slack of `lhs <= 0`; `scale` is the sum of magnitudes of the terms.
fn slack(lhs: f64, scale: f64) -> f64 {
    -lhs / scale.max(f64::MIN_POSITIVE)
}

/// Diagnostics of one first-order stage `pre -> acoustic -> post`, where
/// `post` is the transport output before limiting and source terms.
pub fn monitor_step(
    model: &GasModel,
    basis: &Basis,
    pre: &SolutionField,
    acoustic: &AcousticResult,
    post: &SolutionField,
) -> MonitorRecord {
    let n = pre.n_elem();
    let m = basis.len();
    let p = basis.degree();
    let w = basis.weights();
    let h = pre.mesh.h;
    let dt = acoustic.dt;
    let a = acoustic.a_used;
    let lam = dt / h;
    let mid = &acoustic.conserved;
    let (us, ps) = (&acoustic.star_u, &acoustic.star_pi);
    let mut rec = MonitorRecord { stages: 1, ..Default::default() };

    for j in 0..n {
        let base = j * m;
        let prev = &acoustic.lagrange_prev[base..base + m];
        let cur = &acoustic.lagrange[base..base + m];

        // nodal entropy and energy inequalities of the acoustic step
        let (h_l, h_r) = (us[j] * ps[j], us[j + 1] * ps[j + 1]);
        // sum_k (w_k / 2) rho_k^n (eta_new - eta_old) + 2 a^2 lam (H_r - H_l) <= 0
        let (mut cell, mut cell_mag) = (2.0 * a * a * lam * (h_r - h_l), 2.0 * a * a * lam * (h_r.abs() + h_l.abs()));
        for k in 0..m {
            let mut g = 0.0;
            for l in 0..m {
                g += w[l] * cur[l].pi * cur[l].vel * basis.d(l, k);
            }
            let mut flux = g;
            let mut flux_mag = g.abs();
            if k == p {
                flux -= h_r;
                flux_mag += h_r.abs();
            }
            if k == 0 {
                flux += h_l;
                flux_mag += h_l.abs();
            }
            let lam_k = 2.0 * dt / (h * w[k]);
            let eta_new = cur[k].pi * cur[k].pi + a * a * cur[k].vel * cur[k].vel;
            let eta_old = prev[k].pi * prev[k].pi + a * a * prev[k].vel * prev[k].vel;
            let c = 2.0 * a * a * lam_k * prev[k].tau;
            let s = slack(eta_new - eta_old - c * flux, eta_new.abs() + eta_old.abs() + c * flux_mag);
            cell += 0.5 * w[k] * (eta_new - eta_old) / prev[k].tau;
            cell_mag += 0.5 * w[k] * (eta_new.abs() + eta_old.abs()) / prev[k].tau;
            rec.min_nodal_entropy_slack = rec.min_nodal_entropy_slack.min(s);
            if s < -MONITOR_TOL {
                rec.nodal_entropy_violations += 1;
            }
            let e_new = model.internal_energy_unchecked(cur[k].tau) + 0.5 * cur[k].vel * cur[k].vel;
            let e_old = model.internal_energy_unchecked(prev[k].tau) + 0.5 * prev[k].vel * prev[k].vel;
            let c = lam_k * prev[k].tau;
            let s = slack(e_new - e_old - c * flux, e_new.abs() + e_old.abs() + c * flux_mag);
            rec.min_nodal_energy_slack = rec.min_nodal_energy_slack.min(s);
            if s < -MONITOR_TOL {
                rec.nodal_energy_violations += 1;
            }
        }

        let s = slack(cell, cell_mag);
        rec.min_cell_entropy_slack = rec.min_cell_entropy_slack.min(s);
        if s < -MONITOR_TOL {
            rec.cell_entropy_violations += 1;
        }

        // convex combination of intermediate DOFs
        let (nb_l, nb_r) = mid.neighbor_dofs(j);
        let coef_l = lam * us[j].max(0.0);
        let coef_r = -lam * us[j + 1].min(0.0);
        let mut comb = ConservedState::new(coef_l * nb_l.rho + coef_r * nb_r.rho, coef_l * nb_l.mom + coef_r * nb_r.mom);
        let mut sum = coef_l + coef_r;
        let mut min_c = coef_l.min(coef_r);
        for k in 0..m {
            let mut q = 0.0;
            for l in 0..m {
                q += w[l] * cur[l].vel * basis.d(l, k);
            }
            let mut ck = 0.5 * w[k] - lam * q;
            if k == p {
                ck += lam * us[j + 1].min(0.0);
            }
            if k == 0 {
                ck -= lam * us[j].max(0.0);
            }
            let u = mid.state(j, k);
            comb.rho += ck * u.rho;
            comb.mom += ck * u.mom;
            sum += ck;
            min_c = min_c.min(ck);
        }
        rec.min_convex_coeff = rec.min_convex_coeff.min(min_c);
        rec.max_convex_sum_error = rec.max_convex_sum_error.max((sum - 1.0).abs());
        if min_c < -CONVEX_TOL || (sum - 1.0).abs() > CONVEX_TOL {
            rec.convex_violations += 1;
        }
        let mean_post = post.cell_mean(basis, j);
        let res = ((mean_post.rho - comb.rho).abs() / mean_post.rho.abs().max(1.0))
            .max((mean_post.mom - comb.mom).abs() / mean_post.mom.abs().max(1.0));
        rec.max_convex_residual = rec.max_convex_residual.max(res);

        rec.min_mean_density = rec.min_mean_density.min(mean_post.rho);
        if !(mean_post.rho > 0.0) {
            rec.mean_positivity_violations += 1;
        }

        // cell energy inequality of the full step
        let energy = |u: ConservedState| model.total_energy_unchecked(u);
        let mut mean_e_old = 0.0;
        for k in 0..m {
            mean_e_old += 0.5 * w[k] * energy(pre.state(j, k));
        }
        let e_new = if mean_post.rho > 0.0 { energy(mean_post) } else { f64::INFINITY };
        let hat_r = energy(upwind_state(mid.state(j, p), nb_r, us[j + 1]));
        let hat_l = energy(upwind_state(nb_l, mid.state(j, 0), us[j]));
        let f_r = us[j + 1] * (hat_r + ps[j + 1]);
        let f_l = us[j] * (hat_l + ps[j]);
        let lhs = e_new - mean_e_old + lam * (f_r - f_l);
        let s = slack(lhs, e_new.abs() + mean_e_old.abs() + lam * (f_r.abs() + f_l.abs()));
        rec.min_cell_energy_slack = rec.min_cell_energy_slack.min(s);
        if s < -MONITOR_TOL {
            rec.cell_energy_violations += 1;
        }

        for k in 0..m {
            let i = base + k;
            if acoustic.j_after[i].to_bits() != acoustic.j_before[i].to_bits() {
                rec.j_exact = false;
            }
            let recomputed = cur[k].pi + a * a * cur[k].tau;
            let drift = (recomputed - acoustic.j_before[i]).abs() / acoustic.j_before[i].abs().max(1.0);
            rec.max_j_drift = rec.max_j_drift.max(drift);
        }
    }

    if matches!(pre.boundary, Boundary::Periodic) {
        let (t0, t1) = (pre.total(basis), post.total(basis));
        rec.mass_change = Some((t1.rho - t0.rho).abs() / t0.rho.abs().max(f64::MIN_POSITIVE));
        rec.momentum_change = Some((t1.mom - t0.mom).abs() / t0.mom.abs().max(1.0));
    }
    rec
}
