//! Uniform periodic grids and the grid functions that live on them.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{GchError, Result};

/// Spatial discretization used by every operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    /// Fourier pseudospectral collocation.
    Spectral,
    /// Second-order central differences with cyclic banded solves.
    Fd2,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Spectral => f.write_str("spectral"),
            BackendKind::Fd2 => f.write_str("fd2"),
        }
    }
}

struct FftPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic mesh on `[-L, L)` with `N` nodes `x_i = -L + i h`.
///
/// Cloning is cheap: the FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    half_width: f64,
    n: usize,
    h: f64,
    plans: Arc<FftPlans>,
}

impl Grid {
    /// Builds a grid with `n` points on `[-half_width, half_width)`.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(GchError::InvalidGrid(format!(
                "L must be positive and finite, got {half_width}"
            )));
        }
        if n % 2 != 0 {
            return Err(GchError::InvalidGrid(format!("N must be even, got {n}")));
        }
        if n < 8 {
            return Err(GchError::InvalidGrid(format!(
                "N must be at least 8, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = FftPlans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            half_width,
            n,
            h: 2.0 * half_width / n as f64,
            plans: Arc::new(plans),
        })
    }

    /// Half-width `L` of the domain.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Spacing `h = 2L / N`.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the node closest to `x`, with periodic wraparound.
    pub fn nearest_index(&self, x: f64) -> usize {
        let period = 2.0 * self.half_width;
        let shifted = (x + self.half_width).rem_euclid(period);
        ((shifted / self.h).round() as usize) % self.n
    }

    /// Signed integer mode number of FFT slot `j`.
    pub(crate) fn mode(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Angular wavenumber `π m / L` of FFT slot `j`.
    pub(crate) fn wavenumber(&self, j: usize) -> f64 {
        std::f64::consts::PI * self.mode(j) as f64 / self.half_width
    }

    pub(crate) fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    pub(crate) fn forward(&self, values: &[f64]) -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.plans.forward.process(&mut buf);
        buf
    }

    pub(crate) fn inverse(&self, mut spectrum: Vec<Complex<f64>>) -> Vec<f64> {
        self.plans.inverse.process(&mut spectrum);
        let scale = 1.0 / self.n as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(self.clone(), (0..self.n).map(|i| f(self.node(i))).collect())
    }

    pub fn zeros(&self) -> Field {
        Field {
            grid: self.clone(),
            values: vec![0.0; self.n],
        }
    }

    pub fn constant(&self, c: f64) -> Result<Field> {
        Field::new(self.clone(), vec![c; self.n])
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_width.to_bits() == other.half_width.to_bits()
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("L", &self.half_width)
            .field("N", &self.n)
            .field("h", &self.h)
            .finish()
    }
}

/// A real grid function. Every entry is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GchError::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(GchError::NonFinite {
                what: "field",
                index,
            });
        }
        Ok(Self { grid, values })
    }

    /// Builds a field from values already known to be finite and of the right length.
    pub(crate) fn from_trusted(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete integral `h Σ f_i`.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    /// Fails with [`GchError::NonFinite`] if an entry overflowed.
    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(GchError::NonFinite { what, index }),
            None => Ok(()),
        }
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(GchError::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_trusted(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Pointwise combination of two fields on the same grid.
    ///
    /// Panics if the grids differ in size.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.len(), other.len(), "fields live on different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field::from_trusted(self.grid.clone(), values)
    }

    pub fn scale(&self, alpha: f64) -> Field {
        self.map(|v| alpha * v)
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &Field) -> Field {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Field {
        self.zip_with(other, |a, b| a * b)
    }

    /// Mirror image `f(-x)`; exact on the grid since `-x_i = x_{N-i}` modulo the period.
    pub fn reflect(&self) -> Field {
        let n = self.len();
        let values = (0..n).map(|i| self.values[(n - i) % n]).collect();
        Field::from_trusted(self.grid.clone(), values)
    }
}
