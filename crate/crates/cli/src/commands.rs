//! Subcommand pipelines. Each writes `meta.json` plus its own artifacts into
//! the output directory and returns the process exit code.

use std::path::{Path, PathBuf};

use gchlab_core::{
    blowup_time_bound, breaking_threshold, bridge_compare, classify_initial, gronwall_check, run,
    to_dp, weak_convergence_study, Field, GchError, GronwallReport, RunStatus, ThresholdRecord,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_config, RunConfigFile};
use crate::error::{CliError, CliResult};
use crate::initial::make_initial;
use crate::output::{write_diagnostics, write_json, write_snapshots, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Classify,
    Bridge,
    MollifyStudy,
    Perturb,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_BLOW_UP: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

pub fn status_exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::Completed => EXIT_OK,
        RunStatus::BlowUpDetected => EXIT_BLOW_UP,
        RunStatus::StepFloorReached => EXIT_FAILURE,
    }
}

#[derive(Serialize)]
struct Meta<'a> {
    schema_version: u32,
    command: Command,
    config: &'a RunConfigFile,
    exit_code: i32,
    #[serde(flatten)]
    result: Value,
}

struct Outcome {
    exit_code: i32,
    meta: Value,
}

/// Loads the config, runs `command` and writes its artifacts. Failures after
/// the output directory exists are still recorded in `meta.json`.
pub fn execute(command: Command, config_path: &Path, out: Option<&Path>) -> CliResult<i32> {
    let config = parse_config(config_path)?;
    let dir: PathBuf = out.map_or_else(|| config.output.dir.clone(), Path::to_path_buf);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io("cannot create", &dir, e))?;

    let outcome = match command {
        Command::Solve => solve(&config, &dir),
        Command::Classify => classify(&config, &dir),
        Command::Bridge => bridge(&config, &dir),
        Command::MollifyStudy => mollify_study(&config, &dir),
        Command::Perturb => perturb(&config, &dir),
    };
    let (exit_code, result, err) = match outcome {
        Ok(o) => (o.exit_code, o.meta, None),
        Err(e) => (e.exit_code(), json!({ "error": e.to_string() }), Some(e)),
    };
    write_json(
        &dir.join("meta.json"),
        &Meta {
            schema_version: SCHEMA_VERSION,
            command,
            config: &config,
            exit_code,
            result,
        },
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(exit_code),
    }
}

fn initial(config: &RunConfigFile) -> CliResult<Field> {
    make_initial(&config.initial, &config.grid()?, config.backend)
}

/// Breaking-threshold record for `u0` with `T*` filled in when it applies.
fn threshold_record(config: &RunConfigFile, u0: &Field) -> CliResult<Option<ThresholdRecord>> {
    let backend = config.backend;
    let eps = config.classify.epsilon;
    let v0 = to_dp(u0, backend)?;
    let mut record = match breaking_threshold(&v0, eps, backend) {
        Ok(r) => r,
        Err(GchError::Degenerate(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    if record.satisfied {
        record.t_star = Some(blowup_time_bound(&v0, eps, backend)?);
    }
    Ok(Some(record))
}

fn solve(config: &RunConfigFile, dir: &Path) -> CliResult<Outcome> {
    let u0 = initial(config)?;
    let threshold = threshold_record(config, &u0)?;
    let res = run(&u0, &config.solver_config())?;
    write_diagnostics(&dir.join("diagnostics.csv"), &res.diagnostics)?;
    if config.output.write_snapshots {
        write_snapshots(dir, &res.snapshots)?;
    }
    Ok(Outcome {
        exit_code: status_exit_code(res.status),
        meta: json!({
            "status": res.status,
            "t_final": res.t_final,
            "steps": res.steps,
            "t_star": threshold.and_then(|r| r.t_star),
            "threshold": threshold,
        }),
    })
}

fn classify(config: &RunConfigFile, dir: &Path) -> CliResult<Outcome> {
    let u0 = initial(config)?;
    let report = classify_initial(&u0, config.backend, Some(config.classify.epsilon))?;
    write_json(&dir.join("report.json"), &report)?;
    Ok(Outcome {
        exit_code: EXIT_OK,
        meta: json!({ "verdict": report.verdict }),
    })
}

fn bridge(config: &RunConfigFile, dir: &Path) -> CliResult<Outcome> {
    let u0 = initial(config)?;
    let times = config
        .bridge
        .as_ref()
        .map_or_else(|| vec![config.time.t_end], |b| b.sample_times.clone());
    let report = bridge_compare(&u0, &config.solver_config(), &times)?;
    write_json(&dir.join("report.json"), &report)?;
    let statuses = [report.gch_status, report.dp_status];
    let exit_code = if statuses.contains(&RunStatus::BlowUpDetected) {
        EXIT_BLOW_UP
    } else if statuses.contains(&RunStatus::StepFloorReached) {
        EXIT_FAILURE
    } else {
        EXIT_OK
    };
    Ok(Outcome {
        exit_code,
        meta: json!({
            "gch_status": report.gch_status,
            "dp_status": report.dp_status,
            "max_rel_l2_error": report.rel_l2_error.iter().copied().fold(0.0, f64::max),
        }),
    })
}

/// The ladder mollifies the raw data itself, so `initial.mollify_n` is not applied.
fn mollify_study(config: &RunConfigFile, dir: &Path) -> CliResult<Outcome> {
    let study = config
        .study
        .as_ref()
        .ok_or_else(|| CliError::config("study", "mollify-study needs a `study` section"))?;
    let mut section = config.initial.clone();
    section.mollify_n = None;
    let u0 = make_initial(&section, &config.grid()?, config.backend)?;
    let report = weak_convergence_study(&u0, &study.n_values, &config.solver_config())?;
    write_json(&dir.join("report.json"), &report)?;
    let all_completed = report
        .entries
        .iter()
        .all(|e| e.status == Some(RunStatus::Completed));
    Ok(Outcome {
        exit_code: if all_completed { EXIT_OK } else { EXIT_FAILURE },
        meta: json!({ "all_completed": all_completed }),
    })
}

#[derive(Serialize)]
struct PerturbReport<'a> {
    amplitude: f64,
    x0: f64,
    sigma: f64,
    #[serde(flatten)]
    gronwall: &'a GronwallReport,
}

fn perturb(config: &RunConfigFile, dir: &Path) -> CliResult<Outcome> {
    let p = config
        .perturb
        .as_ref()
        .ok_or_else(|| CliError::config("perturb", "perturb needs a `perturb` section"))?;
    let u0 = initial(config)?;
    let bump = u0
        .grid()
        .sample(|x| (-((x - p.x0) / p.sigma).powi(2)).exp())?;
    let v0 = u0.add_scaled(p.amplitude, &bump);
    let report = gronwall_check(&u0, &v0, &config.solver_config(), &p.sample_times)?;
    write_json(
        &dir.join("report.json"),
        &PerturbReport {
            amplitude: p.amplitude,
            x0: p.x0,
            sigma: p.sigma,
            gronwall: &report,
        },
    )?;
    Ok(Outcome {
        exit_code: EXIT_OK,
        meta: json!({ "satisfied": report.satisfied, "max_ratio": report.max_ratio }),
    })
}
