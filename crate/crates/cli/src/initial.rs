//! Sampling of configured initial data.

use std::path::Path;

use gchlab_core::{dp_peakon, from_dp, helmholtz_inverse, mollify, BackendKind, Field, Grid};

use crate::config::{InitialSection, InitialSpec};
use crate::error::{CliError, CliResult};

/// Node tolerance for data read from disk.
const NODE_TOL: f64 = 1e-12;

/// Samples `section` on `grid`, then mollifies with `ρ_n` if `mollify_n` is set.
pub fn make_initial(
    section: &InitialSection,
    grid: &Grid,
    backend: BackendKind,
) -> CliResult<Field> {
    let raw = match section.spec()? {
        InitialSpec::Gaussian { a, x0, sigma } => {
            grid.sample(|x| a * (-((x - x0) / sigma).powi(2)).exp())?
        }
        InitialSpec::SechMomentum { a, x0 } => {
            let m = grid.sample(|x| a / (x - x0).cosh())?;
            helmholtz_inverse(&m, backend)?
        }
        InitialSpec::DpPeakonPullback { c, x0 } => from_dp(&dp_peakon(c, x0, grid)?, backend)?,
        InitialSpec::FromFile { path } => read_field(&path, grid)?,
    };
    match section.mollify_n {
        Some(n) => Ok(mollify(&raw, n)?),
        None => Ok(raw),
    }
}

/// Reads an `x,u` CSV whose `x` column must reproduce the grid nodes.
pub fn read_field(path: &Path, grid: &Grid) -> CliResult<Field> {
    const KEY: &str = "initial.params.path";
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::config(KEY, format!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::config(KEY, e.to_string()))?
        .clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "u" {
        return Err(CliError::config(KEY, "expected the header `x,u`"));
    }

    let mut values = Vec::with_capacity(grid.len());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::config(KEY, e.to_string()))?;
        let parse = |j: usize| -> CliResult<f64> {
            record[j]
                .trim()
                .parse::<f64>()
                .map_err(|e| CliError::config(KEY, format!("row {}: {e}", i + 1)))
        };
        let (x, u) = (parse(0)?, parse(1)?);
        if i >= grid.len() {
            return Err(CliError::config(
                KEY,
                format!("more than N = {} rows", grid.len()),
            ));
        }
        let node = grid.node(i);
        if (x - node).abs() > NODE_TOL {
            return Err(CliError::config(
                KEY,
                format!("row {}: x = {x} does not match grid node {node}", i + 1),
            ));
        }
        values.push(u);
    }
    if values.len() != grid.len() {
        return Err(CliError::config(
            KEY,
            format!("{} rows for a grid of N = {}", values.len(), grid.len()),
        ));
    }
    Ok(Field::new(grid.clone(), values)?)
}
