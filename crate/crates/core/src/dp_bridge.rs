//! Correspondence between gCH and the Degasperis–Procesi (DP) equation.
//!
//! If `u` solves gCH then `ũ = 2(2 - ∂x)u` solves
//!
//! ```text
//! (1 - ∂x²)(ũ_t / 2) = ∂x (4 - ∂x²)(ũ / 2)²,   i.e.   ũ_t = ũ ũ_x + (3/2) G_x ∗ ũ².
//! ```
//!
//! This is the standard DP equation after the reflection `x → -x`, so its
//! peakons `c e^{-|x - x0|}` travel to the left with speed `c`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    diagnostics, integrate, DiagnosticsRow, Flow, GchFlow, RunResult, RunStatus, SolverConfig,
};
use crate::error::{invalid, GchError, Result};
use crate::grid::{BackendKind, Field, Grid};
use crate::ops::{
    dealias, derivative, green_derivative_convolve, invert_shifted_derivative, norm, NormKind,
};

/// The DP flow on `ũ`. Diagnostics are reported for the pulled-back `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpFlow {
    pub backend: BackendKind,
    pub dealias: bool,
}

impl DpFlow {
    pub fn from_config(cfg: &SolverConfig) -> Self {
        Self {
            backend: cfg.backend,
            dealias: cfg.dealias,
        }
    }
}

impl Flow for DpFlow {
    fn backend(&self) -> BackendKind {
        self.backend
    }

    fn rhs(&self, state: &Field) -> Result<Field> {
        dp_rhs(state, self.backend, self.dealias)
    }

    fn velocity_scale(&self, state: &Field) -> Result<f64> {
        Ok(state.max_abs())
    }

    fn diagnostics(&self, state: &Field, t: f64, dt: f64) -> Result<DiagnosticsRow> {
        diagnostics(&from_dp(state, self.backend)?, t, dt, self.backend)
    }
}

/// `ũ ũ_x + (3/2) G_x ∗ ũ²`.
pub fn dp_rhs(v: &Field, backend: BackendKind, dealiased: bool) -> Result<Field> {
    let vx = derivative(v, backend)?;
    let mut transport = v.mul(&vx);
    let mut square = v.mul(v);
    if dealiased {
        transport = dealias(&transport, backend);
        square = dealias(&square, backend);
    }
    let nonlocal = green_derivative_convolve(&square, backend)?;
    let out = transport.add_scaled(1.5, &nonlocal);
    out.check_finite("DP right-hand side")
        .map_err(|_| GchError::NumericalFailure {
            t: f64::NAN,
            reason: "non-finite DP right-hand side".into(),
        })?;
    Ok(out)
}

/// `ũ = 2(2 - ∂x)u = 4u - 2u_x`.
pub fn to_dp(u: &Field, backend: BackendKind) -> Result<Field> {
    let ux = derivative(u, backend)?;
    Ok(u.zip_with(&ux, |a, b| 4.0 * a - 2.0 * b))
}

/// Inverse of [`to_dp`]: solves `(2 - ∂x)u = ũ/2`.
pub fn from_dp(v: &Field, backend: BackendKind) -> Result<Field> {
    invert_shifted_derivative(&v.scale(0.5), backend)
}

/// Samples the DP peakon profile `c e^{-|x - x0|}`.
pub fn dp_peakon(c: f64, x0: f64, grid: &Grid) -> Result<Field> {
    if x0.is_nan() || x0.abs() >= grid.half_width() {
        return Err(invalid(
            "x0",
            format!("|x0| must be below L = {}", grid.half_width()),
        ));
    }
    grid.sample(|x| c * (-(x - x0).abs()).exp())
}

/// Per-sample discrepancy between the transformed gCH run and the DP run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub sample_times: Vec<f64>,
    /// `‖to_dp(u_gch) - ũ_dp‖_{L²} / max(‖ũ_dp‖_{L²}, 1e-14)` per sample.
    pub rel_l2_error: Vec<f64>,
    pub gch_fingerprint: String,
    pub dp_fingerprint: String,
    pub gch_status: RunStatus,
    pub dp_status: RunStatus,
    pub gch_t_final: f64,
    pub dp_t_final: f64,
}

fn fingerprint(flow: &str, grid: &Grid, cfg: &SolverConfig) -> String {
    format!(
        "{flow}:backend={}:L={}:N={}:cfl={}:t_end={}:dt_min={}:blow_factor={}:dealias={}",
        cfg.backend,
        grid.half_width(),
        grid.len(),
        cfg.cfl,
        cfg.t_end,
        cfg.dt_min,
        cfg.blow_factor,
        cfg.dealias
    )
}

/// Runs gCH from `u0` and DP from `to_dp(u0)` side by side and compares them
/// at every sample time both runs reached.
pub fn bridge_compare(
    u0: &Field,
    cfg: &SolverConfig,
    sample_times: &[f64],
) -> Result<BridgeReport> {
    let (gch, dp) = bridge_runs(u0, cfg, sample_times)?;
    let backend = cfg.backend;
    let mut times = Vec::new();
    let mut errors = Vec::new();
    for ((tg, ug), (td, vd)) in gch.samples.iter().zip(&dp.samples) {
        debug_assert_eq!(tg, td);
        let mapped = to_dp(ug, backend)?;
        let diff = norm(&mapped.sub(vd), NormKind::L2, backend)?;
        let scale = norm(vd, NormKind::L2, backend)?.max(1e-14);
        times.push(*tg);
        errors.push(diff / scale);
    }
    Ok(BridgeReport {
        sample_times: times,
        rel_l2_error: errors,
        gch_fingerprint: fingerprint("gch", u0.grid(), cfg),
        dp_fingerprint: fingerprint("dp", u0.grid(), cfg),
        gch_status: gch.status,
        dp_status: dp.status,
        gch_t_final: gch.t_final,
        dp_t_final: dp.t_final,
    })
}

/// The two underlying runs of [`bridge_compare`], executed concurrently.
pub fn bridge_runs(
    u0: &Field,
    cfg: &SolverConfig,
    sample_times: &[f64],
) -> Result<(RunResult, RunResult)> {
    let v0 = to_dp(u0, cfg.backend)?;
    let (gch, dp) = rayon::join(
        || integrate(u0, cfg, &GchFlow::from_config(cfg), sample_times),
        || integrate(&v0, cfg, &DpFlow::from_config(cfg), sample_times),
    );
    let gch = gch.map_err(|e| GchError::RunFailed {
        side: "gch",
        source: Box::new(e),
    })?;
    let dp = dp.map_err(|e| GchError::RunFailed {
        side: "dp",
        source: Box::new(e),
    })?;
    Ok((gch, dp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::helmholtz_inverse;
    use std::f64::consts::PI;

    const BOTH: [BackendKind; 2] = [BackendKind::Spectral, BackendKind::Fd2];

    fn max_err(f: &Field, exact: impl Fn(f64) -> f64) -> f64 {
        f.values()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - exact(f.grid().node(i))).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn dp_rhs_cosine_oracle() {
        // vv_x = -sin2x / 2, (3/2) G_x∗((1 + cos2x)/2) = -(3/10) sin2x.
        let g = Grid::new(PI, 64).unwrap();
        let v = g.sample(f64::cos).unwrap();
        let r = dp_rhs(&v, BackendKind::Spectral, true).unwrap();
        assert!(max_err(&r, |x| -0.8 * (2.0 * x).sin()) <= 1e-10);
        assert!((r.values()[g.nearest_index(PI / 4.0)] + 0.8).abs() <= 1e-10);
    }

    #[test]
    fn dp_rhs_constants() {
        let g = Grid::new(PI, 32).unwrap();
        for b in BOTH {
            assert_eq!(dp_rhs(&g.zeros(), b, true).unwrap().max_abs(), 0.0);
            assert!(
                dp_rhs(&g.constant(2.0).unwrap(), b, true)
                    .unwrap()
                    .max_abs()
                    <= 1e-12
            );
        }
    }

    #[test]
    fn to_dp_examples() {
        let g = Grid::new(PI, 64).unwrap();
        let b = BackendKind::Spectral;
        assert_eq!(to_dp(&g.zeros(), b).unwrap().max_abs(), 0.0);
        assert!(max_err(&to_dp(&g.constant(1.0).unwrap(), b).unwrap(), |_| 4.0) < 1e-13);
        let v = to_dp(&g.sample(f64::sin).unwrap(), b).unwrap();
        assert!(max_err(&v, |x| 4.0 * x.sin() - 2.0 * x.cos()) <= 1e-12);
    }

    #[test]
    fn from_dp_examples() {
        let g = Grid::new(30.0, 512).unwrap();
        let u = g
            .sample(|x| (-(x - 0.5).powi(2)).exp() * (1.0 + 0.3 * x.sin()))
            .unwrap();
        for b in BOTH {
            let back = from_dp(&to_dp(&u, b).unwrap(), b).unwrap();
            assert!(back.sub(&u).max_abs() / u.max_abs() <= 1e-10);
            let there = to_dp(&from_dp(&u, b).unwrap(), b).unwrap();
            assert!(there.sub(&u).max_abs() / u.max_abs() <= 1e-10);
            assert!(max_err(&from_dp(&g.constant(4.0).unwrap(), b).unwrap(), |_| 1.0) < 1e-12);
        }
    }

    #[test]
    fn peakon_pullback_closed_form() {
        // u(x) = ½∫_x^∞ e^{2(x-y)} c e^{-|y|} dy.
        let c = 3.0;
        let g = Grid::new(30.0, 32768).unwrap();
        let u = from_dp(&dp_peakon(c, 0.0, &g).unwrap(), BackendKind::Spectral).unwrap();
        let exact = |x: f64| {
            if x >= 0.0 {
                c / 6.0 * (-x).exp()
            } else {
                c / 2.0 * x.exp() - c / 3.0 * (2.0 * x).exp()
            }
        };
        let err = u
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| g.node(*i).abs() < 20.0)
            .map(|(i, v)| (v - exact(g.node(i))).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-6, "{err}");
        assert!((u.values()[g.nearest_index(0.0)] - c / 6.0).abs() <= 1e-6);
    }

    #[test]
    fn dp_peakon_examples() {
        let g = Grid::new(30.0, 600).unwrap();
        assert_eq!(dp_peakon(0.0, 0.0, &g).unwrap().max_abs(), 0.0);
        let p = dp_peakon(1.0, 0.0, &g).unwrap();
        assert_eq!(p.values()[g.nearest_index(0.0)], 1.0);
        assert!((p.values()[g.nearest_index(1.0)] - (-1.0f64).exp()).abs() < 1e-12);
        assert!(dp_peakon(1.0, 30.0, &g).is_err());
    }

    #[test]
    fn transform_is_linear() {
        let g = Grid::new(10.0, 128).unwrap();
        let u = g.sample(|x| (-x * x).exp()).unwrap();
        let w = g
            .sample(|x| (0.5 * x).sin() * (-0.1 * x * x).exp())
            .unwrap();
        for b in BOTH {
            let lhs = to_dp(&u.scale(2.0).add_scaled(-3.0, &w), b).unwrap();
            let rhs = to_dp(&u, b)
                .unwrap()
                .scale(2.0)
                .add_scaled(-3.0, &to_dp(&w, b).unwrap());
            assert!(lhs.sub(&rhs).max_abs() < 1e-12);
        }
    }

    #[test]
    fn dp_run_conserves_mean() {
        let g = Grid::new(30.0, 256).unwrap();
        let v0 = g.sample(|x| 0.8 * (-(x * x) / 2.0).exp()).unwrap();
        for b in BOTH {
            let cfg = SolverConfig::new(b, 1.0);
            let res = integrate(&v0, &cfg, &DpFlow::from_config(&cfg), &[]).unwrap();
            let m0 = v0.integral();
            let m1 = res.final_state.integral();
            assert!((m1 - m0).abs() <= 1e-8 * m0.abs(), "{b}: {m0} -> {m1}");
        }
    }

    #[test]
    fn bridge_starts_at_zero() {
        let g = Grid::new(30.0, 256).unwrap();
        let u0 = helmholtz_inverse(
            &g.sample(|x| 0.2 / x.cosh()).unwrap(),
            BackendKind::Spectral,
        )
        .unwrap();
        let report = bridge_compare(
            &u0,
            &SolverConfig::new(BackendKind::Spectral, 0.5),
            &[0.0, 0.5],
        )
        .unwrap();
        assert_eq!(report.sample_times, vec![0.0, 0.5]);
        assert_eq!(report.rel_l2_error[0], 0.0);
        assert!(report.rel_l2_error[1] < 1e-10);
        assert_eq!(report.gch_status, RunStatus::Completed);
    }

    #[test]
    fn fd2_bridge_converges_at_second_order() {
        let errors: Vec<f64> = [256usize, 512, 1024]
            .iter()
            .map(|&n| {
                let g = Grid::new(30.0, n).unwrap();
                let m = g.sample(|x| 0.2 / x.cosh()).unwrap();
                let u0 = helmholtz_inverse(&m, BackendKind::Fd2).unwrap();
                let cfg = SolverConfig::new(BackendKind::Fd2, 1.0);
                bridge_compare(&u0, &cfg, &[1.0]).unwrap().rel_l2_error[0]
            })
            .collect();
        for w in errors.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9, "{errors:?}");
        }
    }
}
