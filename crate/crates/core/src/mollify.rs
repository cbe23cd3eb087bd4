//! Friedrichs mollification and the numerical side of the weak-solution
//! construction: mollified initial-data ladders, the uniform H² bound, energy
//! conservation, and the Gronwall continuous-dependence estimate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, momentum, GchFlow, RunResult, RunStatus, SolverConfig};
use crate::error::{invalid, GchError, Result};
use crate::grid::{Field, Grid};
use crate::ops::{derivative, measure_norm, norm, NormKind};

/// Unnormalized bump `e^{1/(x²-1)}` on `|x| < 1`.
fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (1.0 / (x * x - 1.0)).exp()
    } else {
        0.0
    }
}

/// Discrete mollifier `ρ_n` centred at `x = 0`, with unit discrete mass
/// `h Σ ρ_n = 1` and support in `[-1/n, 1/n]`.
pub fn mollifier_kernel(n: u32, grid: &Grid) -> Result<Field> {
    if n == 0 {
        return Err(invalid("n", "mollification level must be at least 1"));
    }
    let max_h = 0.25 / n as f64;
    if grid.spacing() > max_h {
        return Err(GchError::Unresolved {
            n,
            h: grid.spacing(),
            max_h,
        });
    }
    let scale = n as f64;
    let raw = grid.sample(|x| scale * bump(scale * x))?;
    let mass = raw.integral();
    Ok(raw.scale(1.0 / mass))
}

/// `ρ_n ∗ f` as a cyclic convolution, summed directly over the kernel support.
pub fn mollify(f: &Field, n: u32) -> Result<Field> {
    f.check_finite("mollify input")?;
    let grid = f.grid();
    let kernel = mollifier_kernel(n, grid)?;
    let len = grid.len();
    let centre = len / 2;
    let h = grid.spacing();
    let taps: Vec<(usize, f64)> = kernel
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(j, &w)| ((j + len - centre) % len, h * w))
        .collect();

    let v = f.values();
    let out = (0..len)
        .map(|i| {
            taps.iter()
                .map(|&(offset, w)| w * v[(i + len - offset) % len])
                .sum()
        })
        .collect();
    Field::new(grid.clone(), out)
}

/// Outcome of one rung of the mollification ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyEntry {
    pub n: u32,
    /// `‖ρ_n ∗ u0 - u0‖_{H¹}`.
    pub h1_error: f64,
    /// Largest `‖uⁿ(t)‖_{H²}` over the sampled states.
    pub h2_sup: f64,
    /// Largest `|E(t) - E(0)| / E(0)`.
    pub energy_drift: f64,
    /// `3‖u0‖_{H¹} + 2‖2m0 - m0'‖_M`.
    pub bound_constant: f64,
    pub status: Option<RunStatus>,
    pub t_final: f64,
    /// Solver error, if the run failed.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub n_values: Vec<u32>,
    pub entries: Vec<StudyEntry>,
    pub bound_constant: f64,
    /// `‖uⁿ(t_end) - uᵐ(t_end)‖_{L²}`, keyed like `n_values`; `None` where a run failed.
    pub pairwise_l2: Vec<Vec<Option<f64>>>,
}

/// Runs the solver from `ρ_n ∗ u0` for every `n` and collects the quantities
/// controlling the weak-solution limit.
pub fn weak_convergence_study(
    u0: &Field,
    n_values: &[u32],
    cfg: &SolverConfig,
) -> Result<StudyReport> {
    cfg.validate()?;
    let backend = cfg.backend;
    let m0 = momentum(u0, backend)?;
    let m0x = derivative(&m0, backend)?;
    let twisted_density = m0.zip_with(&m0x, |a, b| 2.0 * a - b);
    let bound_constant =
        3.0 * norm(u0, NormKind::H1, backend)? + 2.0 * measure_norm(&twisted_density)?;

    // Fail fast on unresolvable levels before spending solver time.
    let data: Vec<Field> = n_values
        .iter()
        .map(|&n| mollify(u0, n))
        .collect::<Result<_>>()?;

    let runs: Vec<(StudyEntry, Option<Field>)> = n_values
        .par_iter()
        .zip(data.par_iter())
        .map(|(&n, un0)| study_rung(u0, un0, n, cfg, bound_constant))
        .collect::<Result<_>>()?;

    let pairwise_l2 = runs
        .iter()
        .map(|(_, a)| {
            runs.iter()
                .map(|(_, b)| match (a, b) {
                    (Some(a), Some(b)) => norm(&a.sub(b), NormKind::L2, backend).ok(),
                    _ => None,
                })
                .collect()
        })
        .collect();

    Ok(StudyReport {
        n_values: n_values.to_vec(),
        entries: runs.into_iter().map(|(e, _)| e).collect(),
        bound_constant,
        pairwise_l2,
    })
}

fn study_rung(
    u0: &Field,
    un0: &Field,
    n: u32,
    cfg: &SolverConfig,
    bound_constant: f64,
) -> Result<(StudyEntry, Option<Field>)> {
    let backend = cfg.backend;
    let h1_error = norm(&un0.sub(u0), NormKind::H1, backend)?;
    let mut entry = StudyEntry {
        n,
        h1_error,
        h2_sup: norm(un0, NormKind::H2, backend)?,
        energy_drift: 0.0,
        bound_constant,
        status: None,
        t_final: 0.0,
        failure: None,
    };
    match integrate(un0, cfg, &GchFlow::from_config(cfg), &[]) {
        Ok(res) => {
            entry.h2_sup = h2_sup(&res, backend)?;
            entry.energy_drift = energy_drift(&res);
            entry.status = Some(res.status);
            entry.t_final = res.t_final;
            Ok((entry, Some(res.final_state)))
        }
        Err(e) => {
            entry.failure = Some(e.to_string());
            Ok((entry, None))
        }
    }
}

fn h2_sup(res: &RunResult, backend: crate::grid::BackendKind) -> Result<f64> {
    res.snapshots
        .iter()
        .map(|(_, s)| s)
        .chain(std::iter::once(&res.final_state))
        .try_fold(0.0f64, |m, s| Ok(m.max(norm(s, NormKind::H2, backend)?)))
}

fn energy_drift(res: &RunResult) -> f64 {
    let e0 = res.diagnostics[0].energy;
    res.diagnostics
        .iter()
        .map(|r| ((r.energy - e0) / e0).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallSample {
    pub t: f64,
    /// `‖w‖_{L¹} + ‖w_x‖_{L¹}` with `w = u - v`.
    pub d: f64,
    /// `d(0) e^{36 M t}`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    /// Largest `‖u - u_xx‖_M + ‖v - v_xx‖_M` over the sampled states.
    pub m_sup: f64,
    pub d0: f64,
    pub series: Vec<GronwallSample>,
    pub satisfied: bool,
    /// Largest `d / bound` over samples after `t = 0`, where the two coincide.
    pub max_ratio: f64,
}

/// Runs `u0` and `v0` side by side and checks `d(t) <= d(0) e^{36 M t}` at
/// every sample time. `M` is taken over the sampled states only.
pub fn gronwall_check(
    u0: &Field,
    v0: &Field,
    cfg: &SolverConfig,
    sample_times: &[f64],
) -> Result<GronwallReport> {
    u0.ensure_same_grid(v0)?;
    let backend = cfg.backend;
    let mut stops = vec![0.0];
    stops.extend_from_slice(sample_times);

    let flow = GchFlow::from_config(cfg);
    let (ru, rv) = rayon::join(
        || integrate(u0, cfg, &flow, &stops),
        || integrate(v0, cfg, &flow, &stops),
    );
    let ru = ru.map_err(|e| GchError::RunFailed {
        side: "u",
        source: Box::new(e),
    })?;
    let rv = rv.map_err(|e| GchError::RunFailed {
        side: "v",
        source: Box::new(e),
    })?;

    let mut m_sup = 0.0f64;
    let mut distances = Vec::new();
    for ((t, u), (_, v)) in ru.samples.iter().zip(&rv.samples) {
        let mu = measure_norm(&momentum(u, backend)?)?;
        let mv = measure_norm(&momentum(v, backend)?)?;
        m_sup = m_sup.max(mu + mv);
        let w = u.sub(v);
        let d = norm(&w, NormKind::L1, backend)?
            + norm(&derivative(&w, backend)?, NormKind::L1, backend)?;
        distances.push((*t, d));
    }
    let d0 = distances.first().map_or(0.0, |&(_, d)| d);

    let series: Vec<GronwallSample> = distances
        .into_iter()
        .map(|(t, d)| GronwallSample {
            t,
            d,
            bound: d0 * (36.0 * m_sup * t).exp(),
        })
        .collect();
    let satisfied = series.iter().all(|s| s.d <= s.bound);
    let max_ratio = series
        .iter()
        .filter(|s| s.t > 0.0 && s.bound > 0.0)
        .map(|s| s.d / s.bound)
        .fold(0.0, f64::max);
    Ok(GronwallReport {
        m_sup,
        d0,
        series,
        satisfied,
        max_ratio,
    })
}
