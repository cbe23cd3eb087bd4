//! Cyclic tridiagonal solves with constant bands.
//!
//! The periodic finite-difference operators `(I - D₂)` and `(2I - D₁)` are
//! circulant tridiagonal matrices. They are solved by Thomas elimination on
//! the tridiagonal part plus a Sherman–Morrison correction for the two corner
//! entries.

use crate::error::{invalid, Result};

/// Circulant tridiagonal matrix with rows `sub·x_{i-1} + diag·x_i + sup·x_{i+1}`,
/// indices taken modulo `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclicTridiagonal {
    pub sub: f64,
    pub diag: f64,
    pub sup: f64,
}

impl CyclicTridiagonal {
    pub fn new(sub: f64, diag: f64, sup: f64) -> Self {
        Self { sub, diag, sup }
    }

    /// `A x` for the circulant matrix.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| self.sub * x[(i + n - 1) % n] + self.diag * x[i] + self.sup * x[(i + 1) % n])
            .collect()
    }

    /// Solves `A x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        if n < 3 {
            return Err(invalid(
                "rhs",
                format!("cyclic solve needs n >= 3, got {n}"),
            ));
        }
        // Corner entries: A[0][n-1] = sub, A[n-1][0] = sup.
        let top_right = self.sub;
        let bottom_left = self.sup;
        let gamma = -self.diag;
        if gamma == 0.0 {
            return Err(invalid("diag", "zero diagonal"));
        }

        let mut diag = vec![self.diag; n];
        diag[0] = self.diag - gamma;
        diag[n - 1] = self.diag - bottom_left * top_right / gamma;

        let x = thomas(self.sub, &diag, self.sup, rhs)?;

        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = bottom_left;
        let z = thomas(self.sub, &diag, self.sup, &u)?;

        let denom = 1.0 + z[0] + top_right * z[n - 1] / gamma;
        if denom == 0.0 || !denom.is_finite() {
            return Err(invalid("matrix", "singular cyclic system"));
        }
        let fact = (x[0] + top_right * x[n - 1] / gamma) / denom;
        Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
    }
}

/// Thomas elimination for a tridiagonal system with constant off-diagonals.
fn thomas(sub: f64, diag: &[f64], sup: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c_prime = vec![0.0; n];
    let mut x = vec![0.0; n];

    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(invalid("matrix", "zero pivot in tridiagonal elimination"));
    }
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        c_prime[i] = sup / pivot;
        pivot = diag[i] - sub * c_prime[i];
        if pivot == 0.0 {
            return Err(invalid("matrix", "zero pivot in tridiagonal elimination"));
        }
        x[i] = (rhs[i] - sub * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i + 1] * x[i + 1];
    }
    Ok(x)
}
