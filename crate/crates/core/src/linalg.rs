//! Dense LU factorization with partial pivoting, plus the small matrix
//! helpers the solvers need. Everything here targets desk-scale systems
//! (a few thousand unknowns), where a straightforward dense solve is both
//! exact enough and fast enough.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Condition-number threshold above which solves are refused instead of
/// silently returning inaccurate results.
pub const COND_LIMIT: f64 = 1e12;

/// LU factorization (PA = LU) of a square matrix.
pub struct LuFactor {
    lu: Array2<f64>,
    perm: Vec<usize>,
    norm_a: f64,
}

impl LuFactor {
    pub fn new(a: &Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!(
                "LU requires a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let norm_a = inf_norm_mat(a);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // Partial pivot: largest magnitude in column k at or below the diagonal.
            let mut p = k;
            let mut best = lu[[k, k]].abs();
            for i in (k + 1)..n {
                let v = lu[[i, k]].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular);
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[[k, j]];
                    lu[[k, j]] = lu[[p, j]];
                    lu[[p, j]] = tmp;
                }
            }
            let pivot = lu[[k, k]];
            for i in (k + 1)..n {
                let m = lu[[i, k]] / pivot;
                lu[[i, k]] = m;
                if m != 0.0 {
                    for j in (k + 1)..n {
                        lu[[i, j]] -= m * lu[[k, j]];
                    }
                }
            }
        }
        Ok(Self { lu, perm, norm_a })
    }

    /// Solve Ax = b for a single right-hand side.
    pub fn solve(&self, b: &Array1<f64>) -> Result<Array1<f64>> {
        let n = self.lu.nrows();
        if b.len() != n {
            return Err(Error::Dimension(format!(
                "rhs length {} does not match system size {}",
                b.len(),
                n
            )));
        }
        let mut x = Array1::zeros(n);
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        // Forward substitution (L has implicit unit diagonal).
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s;
        }
        // Back substitution.
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s / self.lu[[i, i]];
        }
        Ok(x)
    }

    /// Solve AX = B column by column.
    pub fn solve_mat(&self, b: &Array2<f64>) -> Result<Array2<f64>> {
        let n = self.lu.nrows();
        if b.nrows() != n {
            return Err(Error::Dimension(format!(
                "rhs has {} rows, system size is {}",
                b.nrows(),
                n
            )));
        }
        let mut x = Array2::zeros((n, b.ncols()));
        for j in 0..b.ncols() {
            let col = self.solve(&b.column(j).to_owned())?;
            x.column_mut(j).assign(&col);
        }
        Ok(x)
    }

    /// A⁻¹ via n unit-vector solves.
    pub fn inverse(&self) -> Result<Array2<f64>> {
        let n = self.lu.nrows();
        self.solve_mat(&Array2::eye(n))
    }

    /// ∞-norm condition estimate ‖A‖·‖A⁻¹‖. Costs n solves.
    pub fn cond_estimate(&self) -> Result<f64> {
        let inv = self.inverse()?;
        Ok(self.norm_a * inf_norm_mat(&inv))
    }
}

/// Solve Ax = b, refusing systems whose estimated condition exceeds [`COND_LIMIT`].
pub fn solve_checked(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let lu = LuFactor::new(a)?;
    let cond = lu.cond_estimate()?;
    if cond > COND_LIMIT {
        return Err(Error::IllConditioned { cond });
    }
    lu.solve(b)
}

/// Invert A, refusing ill-conditioned inputs.
pub fn inverse_checked(a: &Array2<f64>) -> Result<Array2<f64>> {
    let lu = LuFactor::new(a)?;
    let cond = lu.cond_estimate()?;
    if cond > COND_LIMIT {
        return Err(Error::IllConditioned { cond });
    }
    lu.inverse()
}

pub fn inf_norm_mat(a: &Array2<f64>) -> f64 {
    let mut best = 0.0f64;
    for row in a.rows() {
        let s: f64 = row.iter().map(|v| v.abs()).sum();
        best = best.max(s);
    }
    best
}

pub fn inf_norm_vec(v: &Array1<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// max(v) - min(v); the seminorm used by relative value iteration.
pub fn span(v: &Array1<f64>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    hi - lo
}
