//! Numerical laboratory for the generalized Camassa–Holm (gCH) equation
//!
//! ```text
//! u_t - u_txx = ∂x (2 + ∂x) [(2 - ∂x) u]^2
//! ```
//!
//! solved in its nonlocal form on a periodic box `[-L, L)` that stands in for
//! the real line. The crate is organised bottom-up:
//!
//! * [`grid`] and [`ops`]: uniform periodic grids, grid functions and the
//!   discrete operators (∂x, ∂x², `G∗`, `G_x∗`, `(2-∂x)⁻¹`) plus norms, for a
//!   Fourier pseudospectral backend and a second-order finite-difference one.
//! * [`dynamics`]: the gCH right-hand side, classical RK4 with a CFL step,
//!   wave-breaking detection and per-step diagnostics.
//! * [`dp_bridge`]: the map `ũ = 2(2-∂x)u` onto a Degasperis–Procesi flow, an
//!   independent DP solver and cross-validation.
//! * [`criteria`]: sign-pattern classification of initial data and the
//!   explicit breaking threshold / existence-time bound.
//! * [`mollify`]: Friedrichs mollifiers, mollified-data studies and the
//!   Gronwall continuous-dependence check.

pub mod criteria;
pub mod cyclic;
pub mod dp_bridge;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod mollify;
pub mod ops;

pub use criteria::{
    blowup_time_bound, breaking_threshold, classify_initial, sign_pattern, threshold_from_norms,
    time_bound_from_norms, verdict_for, ClassificationReport, SignKind, SignPattern,
    ThresholdRecord, Verdict, DEFAULT_ZERO_TOL,
};
pub use dp_bridge::{
    bridge_compare, bridge_runs, dp_peakon, dp_rhs, from_dp, to_dp, BridgeReport, DpFlow,
};
pub use dynamics::{
    diagnostics, gch_rhs, integrate, momentum, run, step_rk4, twisted_momentum, DiagnosticsRow,
    Flow, GchFlow, RunResult, RunStatus, SolverConfig, BLOW_UP_FLOOR,
};
pub use error::{GchError, Result};
pub use grid::{BackendKind, Field, Grid};
pub use mollify::{
    gronwall_check, mollifier_kernel, mollify, weak_convergence_study, GronwallReport,
    GronwallSample, StudyEntry, StudyReport,
};
pub use ops::{
    derivative, green_derivative_convolve, helmholtz_inverse, invert_shifted_derivative,
    measure_norm, norm, second_derivative, shifted_derivative, NormKind,
};
