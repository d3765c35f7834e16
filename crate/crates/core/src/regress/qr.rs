// Upper-triangular factor of the augmented matrix [X | y], updated one row at
// a time with Givens rotations. Merging two factors stacks their rows, so
// per-day factors combine exactly into the factor of any union of days.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Largest augmented width: seven features plus the response.
pub(crate) const MAX_WIDTH: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Triangular {
    m: usize,
    r: Vec<f64>,
}

impl Triangular {
    pub fn new(m: usize) -> Self {
        debug_assert!((2..=MAX_WIDTH).contains(&m));
        Self {
            m,
            r: vec![0.0; m * m],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.m + j]
    }

    /// Rotates `row` (length `m`) into the factor. `row` is clobbered.
    #[inline]
    pub fn add_row(&mut self, row: &mut [f64]) {
        let m = self.m;
        for j in 0..m {
            let x = row[j];
            if x == 0.0 {
                continue;
            }
            let rjj = self.r[j * m + j];
            let h = math::sqrt(rjj * rjj + x * x);
            let (c, s) = (rjj / h, x / h);
            self.r[j * m + j] = h;
            for k in j + 1..m {
                let a = self.r[j * m + k];
                let b = row[k];
                self.r[j * m + k] = c * a + s * b;
                row[k] = c * b - s * a;
            }
        }
    }

    pub fn merge(&mut self, other: &Triangular) {
        debug_assert_eq!(self.m, other.m);
        let m = self.m;
        let mut buf = [0.0; MAX_WIDTH];
        for i in 0..m {
            buf[..m].copy_from_slice(&other.r[i * m..(i + 1) * m]);
            self.add_row(&mut buf[..m]);
        }
    }

    /// `R^T R`, the augmented Gram matrix, row-major `m x m`.
    pub fn gram(&self) -> Vec<f64> {
        let m = self.m;
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let s: f64 = (0..=i).map(|k| self.at(k, i) * self.at(k, j)).sum();
                g[i * m + j] = s;
                g[j * m + i] = s;
            }
        }
        g
    }

    /// Least-squares coefficients. `Err(j)` names the first column whose
    /// diagonal is negligible against its norm.
    pub fn solve(&self) -> Result<Vec<f64>, usize> {
        let p = self.m - 1;
        for j in 0..p {
            let norm = math::sqrt((0..=j).map(|i| self.at(i, j) * self.at(i, j)).sum::<f64>());
            if !(self.at(j, j).abs() > 1e-10 * norm) {
                return Err(j);
            }
        }
        let mut beta = vec![0.0; p];
        for i in (0..p).rev() {
            let s: f64 = (i + 1..p).map(|k| self.at(i, k) * beta[k]).sum();
            beta[i] = (self.at(i, p) - s) / self.at(i, i);
        }
        Ok(beta)
    }

    /// Weighted residual sum of squares `|X beta - y|^2`.
    pub fn residual_ss(&self, beta: &[f64]) -> f64 {
        let p = self.m - 1;
        let mut ss = self.at(p, p) * self.at(p, p);
        for i in 0..p {
            let fitted: f64 = (i..p).map(|k| self.at(i, k) * beta[k]).sum();
            let d = fitted - self.at(i, p);
            ss += d * d;
        }
        ss
    }

    /// `sum w` and `sum w y`, assuming column 0 is the constant.
    pub fn weight_and_response_sum(&self) -> (f64, f64) {
        let r00 = self.at(0, 0);
        (r00 * r00, r00 * self.at(0, self.m - 1))
    }
}

/// Solves the normal equations from an augmented Gram matrix by Cholesky on
/// the diagonally equilibrated system. `None` if not positive definite.
pub(crate) fn solve_gram(g: &[f64], m: usize) -> Option<Vec<f64>> {
    let p = m - 1;
    let mut d = [0.0; MAX_WIDTH];
    for j in 0..p {
        let gjj = g[j * m + j];
        if !(gjj > 0.0) {
            return None;
        }
        d[j] = 1.0 / math::sqrt(gjj);
    }
    let mut l = [[0.0; MAX_WIDTH]; MAX_WIDTH];
    for i in 0..p {
        for j in 0..=i {
            let mut s = d[i] * g[i * m + j] * d[j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 1e-12) {
                    return None;
                }
                l[i][i] = math::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut z = [0.0; MAX_WIDTH];
    for i in 0..p {
        let mut s = d[i] * g[i * m + p];
        for k in 0..i {
            s -= l[i][k] * z[k];
        }
        z[i] = s / l[i][i];
    }
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in i + 1..p {
            s -= l[k][i] * z[k];
        }
        z[i] = s / l[i][i];
    }
    Some((0..p).map(|j| d[j] * z[j]).collect())
}
