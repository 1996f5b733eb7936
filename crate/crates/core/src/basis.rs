//! Gauss-Lobatto collocation basis on the reference segment `[-1, 1]`.
//!
//! Solution nodes and quadrature nodes coincide, which gives the
//! summation-by-parts identity
//! `<f, D v> + <D f, v> = f_p v_p - f_0 v_0`
//! for the discrete inner product `<f, g> = sum_l w_l f_l g_l`.

use std::sync::{Arc, OnceLock};

use crate::error::{LpdgError, Result};

pub const MAX_DEGREE: usize = 8;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    /// Row-major, `diff[k * (p + 1) + l] = l_l'(s_k)`.
    diff: Vec<f64>,
}

/// Legendre polynomial and its first derivative at `s`.
fn legendre(p: usize, s: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, s);
    if p == 0 {
        return (1.0, 0.0);
    }
    for n in 1..p {
        let nf = n as f64;
        let p2 = ((2.0 * nf + 1.0) * s * p1 - nf * p0) / (nf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    // P_p' from P_p and P_{p-1}; only used away from s = +-1.
    let dp = p as f64 * (s * p1 - p0) / (s * s - 1.0);
    (p1, dp)
}

/// Builds the degree-`p` Gauss-Lobatto basis.
pub fn gauss_lobatto(p: usize) -> Result<Basis> {
    if !(1..=MAX_DEGREE).contains(&p) {
        return Err(LpdgError::UnsupportedDegree(p));
    }
    let n = p + 1;
    let pf = p as f64;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[p] = 1.0;
    for (k, node) in nodes.iter_mut().enumerate().take(p).skip(1) {
        // Chebyshev-Gauss-Lobatto initial guess, Newton on P_p'.
        let mut s = -(std::f64::consts::PI * k as f64 / pf).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (pp, dp) = legendre(p, s);
            // Legendre ODE gives P_p'' in the interior.
            let d2p = (2.0 * s * dp - pf * (pf + 1.0) * pp) / (1.0 - s * s);
            let step = dp / d2p;
            s -= step;
            if step.abs() <= NEWTON_TOL {
                break;
            }
        }
        *node = s;
    }
    // Exact symmetry.
    for k in 0..n / 2 {
        let m = 0.5 * (nodes[p - k] - nodes[k]);
        nodes[k] = -m;
        nodes[p - k] = m;
    }
    if n % 2 == 1 {
        nodes[p / 2] = 0.0;
    }

    let weights: Vec<f64> = nodes
        .iter()
        .map(|&s| {
            let pp = if s.abs() == 1.0 { 1.0 } else { legendre(p, s).0 };
            2.0 / (pf * (pf + 1.0) * pp * pp)
        })
        .collect();

    let bary: Vec<f64> = (0..n)
        .map(|k| {
            let prod: f64 = (0..n).filter(|&l| l != k).map(|l| nodes[k] - nodes[l]).product();
            1.0 / prod
        })
        .collect();

    let mut diff = vec![0.0; n * n];
    for k in 0..n {
        let mut diag = 0.0;
        for l in 0..n {
            if l != k {
                let d = (bary[l] / bary[k]) / (nodes[k] - nodes[l]);
                diff[k * n + l] = d;
                diag -= d;
            }
        }
        diff[k * n + k] = diag;
    }

    Ok(Basis {
        degree: p,
        nodes,
        weights,
        bary,
        diff,
    })
}

impl Basis {
    /// Process-wide cached basis for degree `p`.
    pub fn shared(p: usize) -> Result<Arc<Basis>> {
        static CACHE: [OnceLock<Arc<Basis>>; MAX_DEGREE] = [const { OnceLock::new() }; MAX_DEGREE];
        if !(1..=MAX_DEGREE).contains(&p) {
            return Err(LpdgError::UnsupportedDegree(p));
        }
        Ok(CACHE[p - 1]
            .get_or_init(|| Arc::new(gauss_lobatto(p).expect("degree checked")))
            .clone())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of nodes, `p + 1`.
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Entry `D[k][l] = l_l'(s_k)` of the reference differentiation matrix.
    #[inline]
    pub fn d(&self, k: usize, l: usize) -> f64 {
        self.diff[k * (self.degree + 1) + l]
    }

    /// Row-major reference differentiation matrix.
    pub fn diff_matrix(&self) -> &[f64] {
        &self.diff
    }

    /// Value of the `k`-th Lagrange polynomial at `s` (barycentric form).
    pub fn lagrange_eval(&self, k: usize, s: f64) -> Result<f64> {
        if k > self.degree {
            return Err(LpdgError::NodeIndex {
                index: k,
                degree: self.degree,
            });
        }
        if let Some(l) = self.nodes.iter().position(|&x| x == s) {
            return Ok(if l == k { 1.0 } else { 0.0 });
        }
        let denom: f64 = self
            .nodes
            .iter()
            .zip(&self.bary)
            .map(|(&x, &w)| w / (s - x))
            .sum();
        Ok(self.bary[k] / (s - self.nodes[k]) / denom)
    }

    /// Evaluates the interpolant of `values` at `s`.
    pub fn interpolate(&self, values: &[f64], s: f64) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        if let Some(l) = self.nodes.iter().position(|&x| x == s) {
            return values[l];
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&x, &w), &v) in self.nodes.iter().zip(&self.bary).zip(values) {
            let t = w / (s - x);
            num += t * v;
            den += t;
        }
        num / den
    }

    /// Applies the reference differentiation matrix to node values.
    pub fn differentiate(&self, values: &[f64], out: &mut [f64]) {
        let n = self.len();
        for (k, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|l| self.d(k, l) * values[l]).sum();
        }
    }

    /// Discrete inner product `(h/2) sum_l w_l f_l g_l` on an element of width `h`.
    pub fn inner_product(&self, h: f64, f: &[f64], g: &[f64]) -> Result<f64> {
        for len in [f.len(), g.len()] {
            if len != self.len() {
                return Err(LpdgError::LengthMismatch {
                    expected: self.len(),
                    got: len,
                });
            }
        }
        Ok(0.5 * h * self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum::<f64>())
    }
}
