//! Direct solver for block-bidiagonal systems whose off-diagonal blocks hold
//! a single nonzero entry, with an optional cyclic wrap handled by a
//! Sherman-Morrison correction.
//!
//! Block row `j` reads `A_j x_j + g_j e_r x_{j-1}[c] = r_j` for
//! [`Sweep::Forward`] (coupling to the previous block) and
//! `A_j x_j + g_j e_r x_{j+1}[c] = r_j` for [`Sweep::Backward`].

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{LpdgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Forward,
    Backward,
}

#[derive(Debug, Clone)]
pub struct BlockBidiagonal {
    pub block: usize,
    pub sweep: Sweep,
    pub cyclic: bool,
    /// Diagonal blocks, one per element.
    pub diag: Vec<DMatrix<f64>>,
    /// Coupling coefficient of each block row (`g_j`).
    pub coupling: Vec<f64>,
    /// Row within the block that carries the coupling.
    pub row: usize,
    /// Column within the neighbouring block that is coupled.
    pub col: usize,
}

impl BlockBidiagonal {
    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    fn neighbor(&self, j: usize) -> Option<usize> {
        let n = self.n_blocks();
        match self.sweep {
            Sweep::Forward if j > 0 => Some(j - 1),
            Sweep::Backward if j + 1 < n => Some(j + 1),
            _ if self.cyclic => Some(match self.sweep {
                Sweep::Forward => n - 1,
                Sweep::Backward => 0,
            }),
            _ => None,
        }
    }

    fn order(&self) -> Vec<usize> {
        let n = self.n_blocks();
        match self.sweep {
            Sweep::Forward => (0..n).collect(),
            Sweep::Backward => (0..n).rev().collect(),
        }
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.block;
        let mut y = vec![0.0; x.len()];
        for j in 0..self.n_blocks() {
            let xj = DVector::from_column_slice(&x[j * m..(j + 1) * m]);
            let yj = &self.diag[j] * xj;
            y[j * m..(j + 1) * m].copy_from_slice(yj.as_slice());
            if let Some(nb) = self.neighbor(j) {
                y[j * m + self.row] += self.coupling[j] * x[nb * m + self.col];
            }
        }
        y
    }

    /// Solves `A x = r` and returns `x` with the relative residual
    /// `|A x - r|_inf / |r|_inf`.
    pub fn solve(&self, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
        let m = self.block;
        let n = self.n_blocks();
        if rhs.len() != n * m {
            return Err(LpdgError::LengthMismatch {
                expected: n * m,
                got: rhs.len(),
            });
        }
        let lus: Vec<LU<f64, nalgebra::Dyn, nalgebra::Dyn>> =
            self.diag.iter().map(|b| b.clone().lu()).collect();

        let x = if self.cyclic {
            // A = A0 + g_first e_(first,row) e_(last,col)^T
            let first = self.order()[0];
            let last = *self.order().last().unwrap();
            let y = self.sweep_solve(&lus, rhs)?;
            let mut u = vec![0.0; n * m];
            u[first * m + self.row] = self.coupling[first];
            let z = self.sweep_solve(&lus, &u)?;
            let denom = 1.0 + z[last * m + self.col];
            if denom.abs() < 1e-300 || !denom.is_finite() {
                return Err(LpdgError::LinearSolve("singular cyclic correction".into()));
            }
            let factor = y[last * m + self.col] / denom;
            y.iter().zip(&z).map(|(yi, zi)| yi - factor * zi).collect()
        } else {
            self.sweep_solve(&lus, rhs)?
        };

        let ax = self.apply(&x);
        let rnorm = rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let res = ax.iter().zip(rhs).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
        let rel = if rnorm > 0.0 { res / rnorm } else { res };
        if !rel.is_finite() {
            return Err(LpdgError::LinearSolve("non-finite solution".into()));
        }
        Ok((x, rel))
    }

    /// Block substitution ignoring the cyclic wrap.
    fn sweep_solve(&self, lus: &[LU<f64, nalgebra::Dyn, nalgebra::Dyn>], rhs: &[f64]) -> Result<Vec<f64>> {
        let m = self.block;
        let mut x = vec![0.0; rhs.len()];
        let order = self.order();
        for (pos, &j) in order.iter().enumerate() {
            let mut r = DVector::from_column_slice(&rhs[j * m..(j + 1) * m]);
            if pos > 0 {
                let nb = order[pos - 1];
                r[self.row] -= self.coupling[j] * x[nb * m + self.col];
            }
            let xj = lus[j]
                .solve(&r)
                .ok_or_else(|| LpdgError::LinearSolve(format!("singular diagonal block {j}")))?;
            x[j * m..(j + 1) * m].copy_from_slice(xj.as_slice());
        }
        Ok(x)
    }

    /// Dense assembly, for testing and diagnostics.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.block;
        let n = self.n_blocks();
        let mut a = DMatrix::zeros(n * m, n * m);
        for j in 0..n {
            a.view_mut((j * m, j * m), (m, m)).copy_from(&self.diag[j]);
            if let Some(nb) = self.neighbor(j) {
                a[(j * m + self.row, nb * m + self.col)] += self.coupling[j];
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize, sweep: Sweep, cyclic: bool) -> BlockBidiagonal {
        let diag = (0..n)
            .map(|_| {
                let mut b = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-0.5..0.5));
                for i in 0..m {
                    b[(i, i)] += 3.0;
                }
                b
            })
            .collect();
        BlockBidiagonal {
            block: m,
            sweep,
            cyclic,
            diag,
            coupling: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            row: rng.gen_range(0..m),
            col: rng.gen_range(0..m),
        }
    }

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &sweep in &[Sweep::Forward, Sweep::Backward] {
            for cyclic in [false, true] {
                for n in 1..=6 {
                    for m in 1..=4 {
                        let sys = random_system(&mut rng, n, m, sweep, cyclic);
                        let rhs: Vec<f64> = (0..n * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let (x, res) = sys.solve(&rhs).unwrap();
                        assert!(res < 1e-13);
                        let dense = sys.to_dense().lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
                        for (a, b) in x.iter().zip(dense.iter()) {
                            assert!((a - b).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = random_system(&mut rng, 3, 2, Sweep::Forward, false);
        assert!(sys.solve(&[1.0; 5]).is_err());
    }
}
