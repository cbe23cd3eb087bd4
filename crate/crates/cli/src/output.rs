//! Artifact writers. Floats are printed with 17 significant digits so that
//! identical runs produce byte-identical files.

use std::path::Path;

use gchlab_core::{DiagnosticsRow, Field};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub const DIAGNOSTICS_HEADER: [&str; 7] =
    ["t", "dt", "energy", "mass", "m_l1", "ux_inf", "twisted_min"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io("cannot write", path, io),
        other => CliError::io(
            "cannot write",
            path,
            std::io::Error::other(format!("{other:?}")),
        ),
    }
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io("cannot write", path, e))
}

pub fn write_diagnostics(path: &Path, rows: &[DiagnosticsRow]) -> CliResult<()> {
    write_rows(
        path,
        &DIAGNOSTICS_HEADER,
        rows.iter()
            .map(|r| vec![r.t, r.dt, r.energy, r.mass, r.m_l1, r.ux_inf, r.twisted_min]),
    )
}

/// Writes `f` as an `x,u` table.
pub fn write_field(path: &Path, f: &Field) -> CliResult<()> {
    let grid = f.grid();
    write_rows(
        path,
        &["x", "u"],
        f.values()
            .iter()
            .enumerate()
            .map(|(i, &u)| vec![grid.node(i), u]),
    )
}

/// Writes `snapshots/t_<index>.csv` under `dir`.
pub fn write_snapshots(dir: &Path, snapshots: &[(f64, Field)]) -> CliResult<()> {
    let sub = dir.join("snapshots");
    std::fs::create_dir_all(&sub).map_err(|e| CliError::io("cannot create", &sub, e))?;
    for (index, (_, f)) in snapshots.iter().enumerate() {
        write_field(&sub.join(format!("t_{index}.csv")), f)?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io("cannot write", path, e))
}
