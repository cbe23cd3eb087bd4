//! Discrete differential and nonlocal operators, and discrete norms.
//!
//! Every operator exists in two flavours selected by [`BackendKind`]:
//!
//! * `Spectral` multiplies Fourier coefficients by the exact symbol. Odd
//!   symbols (`ik`) vanish on the unpaired Nyquist mode so real data stay real;
//!   even symbols (`-k²`, `1/(1+k²)`) keep it.
//! * `Fd2` uses the central first difference `D₁`, the `(1, -2, 1)/h²`
//!   second difference `D₂`, and cyclic tridiagonal solves for inverses.
//!
//! Within a backend the operators are mutually consistent:
//! `helmholtz_inverse` inverts `f - second_derivative(f)` exactly and
//! `invert_shifted_derivative` inverts `2f - derivative(f)` exactly.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cyclic::CyclicTridiagonal;
use crate::error::Result;
use crate::grid::{BackendKind, Field, Grid};

fn spectral_apply(f: &Field, symbol: impl Fn(&Grid, usize) -> Complex<f64>) -> Field {
    let grid = f.grid();
    let mut spectrum = grid.forward(f.values());
    for (j, c) in spectrum.iter_mut().enumerate() {
        *c *= symbol(grid, j);
    }
    Field::from_trusted(grid.clone(), grid.inverse(spectrum))
}

fn odd_wavenumber(grid: &Grid, j: usize) -> f64 {
    if grid.is_nyquist(j) {
        0.0
    } else {
        grid.wavenumber(j)
    }
}

/// First derivative `∂x f`.
pub fn derivative(f: &Field, backend: BackendKind) -> Result<Field> {
    f.check_finite("derivative input")?;
    Ok(match backend {
        BackendKind::Spectral => spectral_apply(f, |g, j| Complex::new(0.0, odd_wavenumber(g, j))),
        BackendKind::Fd2 => {
            let v = f.values();
            let n = v.len();
            let inv_2h = 0.5 / f.grid().spacing();
            let out = (0..n)
                .map(|i| (v[(i + 1) % n] - v[(i + n - 1) % n]) * inv_2h)
                .collect();
            Field::from_trusted(f.grid().clone(), out)
        }
    })
}

/// Second derivative `∂x² f`.
pub fn second_derivative(f: &Field, backend: BackendKind) -> Result<Field> {
    f.check_finite("second derivative input")?;
    Ok(match backend {
        BackendKind::Spectral => spectral_apply(f, |g, j| {
            let k = g.wavenumber(j);
            Complex::new(-k * k, 0.0)
        }),
        BackendKind::Fd2 => {
            let v = f.values();
            let n = v.len();
            let inv_h2 = 1.0 / (f.grid().spacing() * f.grid().spacing());
            let out = (0..n)
                .map(|i| (v[(i + 1) % n] - 2.0 * v[i] + v[(i + n - 1) % n]) * inv_h2)
                .collect();
            Field::from_trusted(f.grid().clone(), out)
        }
    })
}

/// `G ∗ f = (1 - ∂x²)⁻¹ f` with `G(x) = ½ e^{-|x|}`.
pub fn helmholtz_inverse(f: &Field, backend: BackendKind) -> Result<Field> {
    f.check_finite("helmholtz_inverse input")?;
    Ok(match backend {
        BackendKind::Spectral => spectral_apply(f, |g, j| {
            let k = g.wavenumber(j);
            Complex::new(1.0 / (1.0 + k * k), 0.0)
        }),
        BackendKind::Fd2 => {
            let h = f.grid().spacing();
            let off = -1.0 / (h * h);
            let band = CyclicTridiagonal::new(off, 1.0 - 2.0 * off, off);
            Field::from_trusted(f.grid().clone(), band.solve(f.values())?)
        }
    })
}

/// `G_x ∗ f`, evaluated as `∂x (G ∗ f)`.
pub fn green_derivative_convolve(f: &Field, backend: BackendKind) -> Result<Field> {
    derivative(&helmholtz_inverse(f, backend)?, backend)
}

/// Solves `(2 - ∂x) g = f` for `g`.
pub fn invert_shifted_derivative(f: &Field, backend: BackendKind) -> Result<Field> {
    f.check_finite("invert_shifted_derivative input")?;
    Ok(match backend {
        BackendKind::Spectral => spectral_apply(f, |g, j| {
            Complex::new(1.0, 0.0) / Complex::new(2.0, -odd_wavenumber(g, j))
        }),
        BackendKind::Fd2 => {
            let inv_2h = 0.5 / f.grid().spacing();
            let band = CyclicTridiagonal::new(inv_2h, 2.0, -inv_2h);
            Field::from_trusted(f.grid().clone(), band.solve(f.values())?)
        }
    })
}

/// `(2 - ∂x) f`.
pub fn shifted_derivative(f: &Field, backend: BackendKind) -> Result<Field> {
    let fx = derivative(f, backend)?;
    Ok(f.zip_with(&fx, |a, b| 2.0 * a - b))
}

/// 2/3-rule de-aliasing: zeroes every Fourier mode with `|m| > N/3`.
/// Identity for `Fd2`.
pub fn dealias(f: &Field, backend: BackendKind) -> Field {
    match backend {
        BackendKind::Spectral => {
            let cutoff = (f.len() / 3) as i64;
            spectral_apply(f, |g, j| {
                if g.mode(j).abs() > cutoff {
                    Complex::new(0.0, 0.0)
                } else {
                    Complex::new(1.0, 0.0)
                }
            })
        }
        BackendKind::Fd2 => f.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    L1,
    L2,
    Linf,
    H1,
    H2,
}

/// Discrete norms; the Sobolev norms take derivatives with `backend`.
pub fn norm(f: &Field, kind: NormKind, backend: BackendKind) -> Result<f64> {
    f.check_finite("norm input")?;
    let h = f.grid().spacing();
    let l2_sq = |g: &Field| h * g.values().iter().map(|v| v * v).sum::<f64>();
    Ok(match kind {
        NormKind::L1 => h * f.values().iter().map(|v| v.abs()).sum::<f64>(),
        NormKind::L2 => l2_sq(f).sqrt(),
        NormKind::Linf => f.max_abs(),
        NormKind::H1 => (l2_sq(f) + l2_sq(&derivative(f, backend)?)).sqrt(),
        NormKind::H2 => {
            (l2_sq(f) + l2_sq(&derivative(f, backend)?) + l2_sq(&second_derivative(f, backend)?))
                .sqrt()
        }
    })
}

/// Total-variation norm of the measure with density `f`.
///
/// Only meaningful for absolutely continuous measures: singular data must be
/// mollified first, after which the norm is the discrete L¹ norm.
pub fn measure_norm(f: &Field) -> Result<f64> {
    norm(f, NormKind::L1, BackendKind::Fd2)
}
