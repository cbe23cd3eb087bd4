//! Time integration of the gCH equation in its nonlocal form
//!
//! ```text
//! u_t = 4 u u_x - u_x² + G_x ∗ (2 u_x² + 6 u²) + G ∗ (u_x²)
//! ```
//!
//! with classical RK4 and a step recomputed from a CFL bound before every
//! step. The integrator is generic over a [`Flow`], so the Degasperis–Procesi
//! solver in [`crate::dp_bridge`] shares it.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, GchError, Result};
use crate::grid::{BackendKind, Field};
use crate::ops::{
    dealias, derivative, green_derivative_convolve, helmholtz_inverse, norm, second_derivative,
    NormKind,
};

/// Absolute slope floor of the wave-breaking trigger.
pub const BLOW_UP_FLOOR: f64 = 10.0;

/// Discretization, step policy and stopping rules of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub backend: BackendKind,
    /// Courant number in `(0, 1]`.
    pub cfl: f64,
    pub t_end: f64,
    /// A CFL step below this ends the run with [`RunStatus::StepFloorReached`].
    pub dt_min: f64,
    /// Relative growth of the breaking slope that counts as wave breaking.
    pub blow_factor: f64,
    /// 2/3-rule de-aliasing of quadratic products (spectral only).
    pub dealias: bool,
    /// Keep every `snapshot_stride`-th accepted state.
    pub snapshot_stride: usize,
}

impl SolverConfig {
    pub fn new(backend: BackendKind, t_end: f64) -> Self {
        Self {
            backend,
            cfl: 0.3,
            t_end,
            dt_min: 1e-10,
            blow_factor: 50.0,
            dealias: true,
            snapshot_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(invalid(
                "cfl",
                format!("must lie in (0, 1], got {}", self.cfl),
            ));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid(
                "t_end",
                format!("must be positive, got {}", self.t_end),
            ));
        }
        if self.dt_min.is_nan() || self.dt_min <= 0.0 {
            return Err(invalid(
                "dt_min",
                format!("must be positive, got {}", self.dt_min),
            ));
        }
        if self.blow_factor.is_nan() || self.blow_factor <= 1.0 {
            return Err(invalid(
                "blow_factor",
                format!("must exceed 1, got {}", self.blow_factor),
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(invalid("snapshot_stride", "must be at least 1"));
        }
        Ok(())
    }
}

/// Monitored quantities of one time sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub dt: f64,
    /// `E(u) = ∫ u² + u_x²`.
    pub energy: f64,
    /// `∫ u`.
    pub mass: f64,
    /// `‖u - u_xx‖_{L¹}`.
    pub m_l1: f64,
    pub ux_inf: f64,
    /// Minimum of the twisted momentum `2(2 - ∂x)m`.
    pub twisted_min: f64,
    /// Extremes of `∂x ũ` with `ũ = 2(2 - ∂x)u`, the slope that steepens when
    /// the wave breaks.
    pub breaking_slope_min: f64,
    pub breaking_slope_max: f64,
}

impl DiagnosticsRow {
    pub fn breaking_slope(&self) -> f64 {
        self.breaking_slope_min
            .abs()
            .max(self.breaking_slope_max.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    BlowUpDetected,
    StepFloorReached,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: Field,
    pub status: RunStatus,
    pub t_final: f64,
    pub steps: usize,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub snapshots: Vec<(f64, Field)>,
    /// States at the requested sample times that were reached, in order.
    pub samples: Vec<(f64, Field)>,
}

/// An autonomous evolution `state_t = rhs(state)` the integrator can advance.
pub trait Flow: Sync {
    fn backend(&self) -> BackendKind;

    fn rhs(&self, state: &Field) -> Result<Field>;

    /// Transport speed used in the CFL bound (floored at 1 by the integrator).
    fn velocity_scale(&self, state: &Field) -> Result<f64>;

    fn diagnostics(&self, state: &Field, t: f64, dt: f64) -> Result<DiagnosticsRow>;
}

/// The gCH flow on `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GchFlow {
    pub backend: BackendKind,
    pub dealias: bool,
}

impl GchFlow {
    pub fn from_config(cfg: &SolverConfig) -> Self {
        Self {
            backend: cfg.backend,
            dealias: cfg.dealias,
        }
    }
}

impl Flow for GchFlow {
    fn backend(&self) -> BackendKind {
        self.backend
    }

    fn rhs(&self, state: &Field) -> Result<Field> {
        gch_rhs(state, self.backend, self.dealias)
    }

    fn velocity_scale(&self, state: &Field) -> Result<f64> {
        let ux = derivative(state, self.backend)?;
        Ok(4.0 * state.max_abs() + 2.0 * ux.max_abs())
    }

    fn diagnostics(&self, state: &Field, t: f64, dt: f64) -> Result<DiagnosticsRow> {
        diagnostics(state, t, dt, self.backend)
    }
}

/// Momentum density `m = u - u_xx`.
pub fn momentum(u: &Field, backend: BackendKind) -> Result<Field> {
    Ok(u.sub(&second_derivative(u, backend)?))
}

/// Twisted momentum `m̃ = 2(2 - ∂x)(u - u_xx)`.
pub fn twisted_momentum(u: &Field, backend: BackendKind) -> Result<Field> {
    let m = momentum(u, backend)?;
    let mx = derivative(&m, backend)?;
    Ok(m.zip_with(&mx, |a, b| 2.0 * (2.0 * a - b)))
}

fn product(a: &Field, b: &Field, backend: BackendKind, dealiased: bool) -> Field {
    let p = a.mul(b);
    if dealiased {
        dealias(&p, backend)
    } else {
        p
    }
}

/// Right-hand side `4uu_x - u_x² + G_x∗(2u_x² + 6u²) + G∗(u_x²)`.
pub fn gch_rhs(u: &Field, backend: BackendKind, dealiased: bool) -> Result<Field> {
    let ux = derivative(u, backend)?;
    let u_ux = product(u, &ux, backend, dealiased);
    let ux_sq = product(&ux, &ux, backend, dealiased);
    let u_sq = product(u, u, backend, dealiased);

    let flux = ux_sq.zip_with(&u_sq, |a, b| 2.0 * a + 6.0 * b);
    let nonlocal_x = green_derivative_convolve(&flux, backend)?;
    let nonlocal = helmholtz_inverse(&ux_sq, backend)?;

    let values: Vec<f64> = (0..u.len())
        .map(|i| {
            4.0 * u_ux.values()[i] - ux_sq.values()[i]
                + nonlocal_x.values()[i]
                + nonlocal.values()[i]
        })
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(GchError::NumericalFailure {
            t: f64::NAN,
            reason: "non-finite gCH right-hand side".into(),
        });
    }
    Ok(Field::from_trusted(u.grid().clone(), values))
}

/// One classical fourth-order Runge–Kutta step.
pub fn step_rk4<F>(state: &Field, dt: f64, rhs: F) -> Result<Field>
where
    F: Fn(&Field) -> Result<Field>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    let stage = |f: Result<Field>, name: &str| -> Result<Field> {
        let f = f?;
        if f.values().iter().any(|v| !v.is_finite()) {
            return Err(GchError::NumericalFailure {
                t: f64::NAN,
                reason: format!("non-finite RK4 stage {name}"),
            });
        }
        Ok(f)
    };
    let k1 = stage(rhs(state), "k1")?;
    let k2 = stage(rhs(&state.add_scaled(0.5 * dt, &k1)), "k2")?;
    let k3 = stage(rhs(&state.add_scaled(0.5 * dt, &k2)), "k3")?;
    let k4 = stage(rhs(&state.add_scaled(dt, &k3)), "k4")?;

    let sixth = dt / 6.0;
    let values: Vec<f64> = (0..state.len())
        .map(|i| {
            state.values()[i]
                + sixth
                    * (k1.values()[i]
                        + 2.0 * k2.values()[i]
                        + 2.0 * k3.values()[i]
                        + k4.values()[i])
        })
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(GchError::NumericalFailure {
            t: f64::NAN,
            reason: "non-finite RK4 update".into(),
        });
    }
    Ok(Field::from_trusted(state.grid().clone(), values))
}

/// Conserved and monitored quantities of `u`.
pub fn diagnostics(u: &Field, t: f64, dt: f64, backend: BackendKind) -> Result<DiagnosticsRow> {
    let ux = derivative(u, backend)?;
    let h = u.grid().spacing();
    let sq = |f: &Field| h * f.values().iter().map(|v| v * v).sum::<f64>();

    let m = momentum(u, backend)?;
    let twisted = twisted_momentum(u, backend)?;
    // ∂x ũ with ũ = 4u - 2u_x.
    let dp_state = u.zip_with(&ux, |a, b| 4.0 * a - 2.0 * b);
    let slope = derivative(&dp_state, backend)?;

    Ok(DiagnosticsRow {
        t,
        dt,
        energy: sq(u) + sq(&ux),
        mass: u.integral(),
        m_l1: norm(&m, NormKind::L1, backend)?,
        ux_inf: ux.max_abs(),
        twisted_min: twisted.min(),
        breaking_slope_min: slope.min(),
        breaking_slope_max: slope.max(),
    })
}

/// Advances the gCH equation from `u0` to `cfg.t_end`.
pub fn run(u0: &Field, cfg: &SolverConfig) -> Result<RunResult> {
    integrate(u0, cfg, &GchFlow::from_config(cfg), &[])
}

/// Advances `flow` from `initial`, landing exactly on each time in `sample_times`
/// that lies in `[0, t_end]`.
///
/// The step is `cfl·h / max(1, velocity_scale)`, clipped to the next landing
/// time. The run stops early when the breaking slope exceeds both
/// `blow_factor` times its initial value and [`BLOW_UP_FLOOR`], or when the
/// CFL step drops below `dt_min`.
pub fn integrate<F: Flow + ?Sized>(
    initial: &Field,
    cfg: &SolverConfig,
    flow: &F,
    sample_times: &[f64],
) -> Result<RunResult> {
    cfg.validate()?;
    initial.check_finite("initial state")?;
    let mut stops: Vec<f64> = sample_times
        .iter()
        .copied()
        .filter(|&s| (0.0..=cfg.t_end).contains(&s))
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut stops = stops.into_iter().peekable();

    let h = initial.grid().spacing();
    let mut state = initial.clone();
    let mut t = 0.0;
    let mut steps = 0usize;

    let first = flow.diagnostics(&state, t, 0.0)?;
    let slope0 = first.breaking_slope();
    let mut diagnostics = vec![first];
    let mut snapshots = vec![(0.0, state.clone())];
    let mut samples = Vec::new();
    if stops.peek() == Some(&0.0) {
        samples.push((0.0, state.clone()));
        stops.next();
    }

    let status = loop {
        if t >= cfg.t_end {
            break RunStatus::Completed;
        }
        let speed = flow.velocity_scale(&state)?.max(1.0);
        let dt_cfl = cfg.cfl * h / speed;
        if dt_cfl.is_nan() || dt_cfl < cfg.dt_min {
            break RunStatus::StepFloorReached;
        }
        let target = stops.peek().copied().unwrap_or(cfg.t_end).min(cfg.t_end);
        let (dt, landing) = if t + dt_cfl >= target {
            (target - t, true)
        } else {
            (dt_cfl, false)
        };

        state = step_rk4(&state, dt, |s| flow.rhs(s)).map_err(|e| match e {
            GchError::NumericalFailure { reason, .. } => GchError::NumericalFailure { t, reason },
            other => other,
        })?;
        t = if landing { target } else { t + dt };
        steps += 1;

        let row = flow.diagnostics(&state, t, dt)?;
        diagnostics.push(row);
        if landing && stops.peek() == Some(&target) {
            samples.push((t, state.clone()));
            stops.next();
        }
        if steps % cfg.snapshot_stride == 0 {
            snapshots.push((t, state.clone()));
        }

        let slope = row.breaking_slope();
        if slope > cfg.blow_factor * slope0 && slope > BLOW_UP_FLOOR {
            break RunStatus::BlowUpDetected;
        }
    };

    Ok(RunResult {
        final_state: state,
        status,
        t_final: t,
        steps,
        diagnostics,
        snapshots,
        samples,
    })
}
