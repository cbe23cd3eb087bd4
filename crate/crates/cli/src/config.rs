//! JSON run configuration: schema, defaults and validation.

use std::path::{Path, PathBuf};

use gchlab_core::{BackendKind, Grid, SolverConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub grid: GridSection,
    pub backend: BackendKind,
    pub time: TimeSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub classify: ClassifySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bridge: Option<BridgeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb: Option<PerturbSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    #[serde(default = "defaults::cfl")]
    pub cfl: f64,
    #[serde(default = "defaults::dt_min")]
    pub dt_min: f64,
    #[serde(default = "defaults::blow_factor")]
    pub blow_factor: f64,
    #[serde(default = "defaults::snapshot_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "defaults::dealias")]
    pub dealias: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Gaussian,
    SechMomentum,
    DpPeakonPullback,
    FromFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: InitialKind,
    /// Kind-specific parameters; see [`InitialSpec`].
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mollify_n: Option<u32>,
}

/// Typed view of `initial.params`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// `a e^{-(x-x0)²/σ²}`.
    Gaussian { a: f64, x0: f64, sigma: f64 },
    /// `G∗(a sech(x - x0))`.
    SechMomentum { a: f64, x0: f64 },
    /// `from_dp(c e^{-|x-x0|})`.
    DpPeakonPullback { c: f64, x0: f64 },
    /// Two-column `x,u` CSV sampled on the run grid.
    FromFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "defaults::out_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub write_snapshots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: defaults::out_dir(),
            write_snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
}

impl Default for ClassifySection {
    fn default() -> Self {
        Self {
            epsilon: defaults::epsilon(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeSection {
    pub sample_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub n_values: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbSection {
    /// Height of the Gaussian bump added to `u0` to form `v0`.
    pub amplitude: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "defaults::one")]
    pub sigma: f64,
    pub sample_times: Vec<f64>,
}

mod defaults {
    use std::path::PathBuf;

    pub fn cfl() -> f64 {
        0.3
    }
    pub fn dt_min() -> f64 {
        1e-10
    }
    pub fn blow_factor() -> f64 {
        50.0
    }
    pub fn snapshot_stride() -> usize {
        1
    }
    pub fn dealias() -> bool {
        true
    }
    pub fn out_dir() -> PathBuf {
        PathBuf::from("gchlab-out")
    }
    pub fn epsilon() -> f64 {
        1.0
    }
    pub fn one() -> f64 {
        1.0
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianParams {
    #[serde(default = "defaults::one")]
    a: f64,
    #[serde(default)]
    x0: f64,
    #[serde(default = "defaults::one")]
    sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SechParams {
    #[serde(default = "defaults::one")]
    a: f64,
    #[serde(default)]
    x0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PeakonParams {
    #[serde(default = "defaults::one")]
    c: f64,
    #[serde(default)]
    x0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileParams {
    path: PathBuf,
}

/// Deserializes `text`, reporting the dotted key path of the first violation.
fn from_json<T: DeserializeOwned>(text: &str, prefix: &str) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let key = match (prefix.is_empty(), path.as_str()) {
            (true, ".") => "<root>".to_string(),
            (true, _) => path,
            (false, ".") => prefix.to_string(),
            (false, _) => format!("{prefix}.{path}"),
        };
        CliError::config(key, e.into_inner().to_string())
    })
}

fn params_as<T: DeserializeOwned>(params: &Map<String, Value>) -> CliResult<T> {
    let text = serde_json::to_string(params).expect("JSON map serializes");
    from_json(&text, "initial.params")
}

fn require(ok: bool, key: &str, message: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(key, message()))
    }
}

fn check_times(times: &[f64], t_end: f64, key: &str) -> CliResult<()> {
    for (i, &t) in times.iter().enumerate() {
        require(
            t.is_finite() && t >= 0.0 && t <= t_end,
            &format!("{key}[{i}]"),
            || format!("sample time {t} outside [0, t_end = {t_end}]"),
        )?;
    }
    require(times.windows(2).all(|w| w[0] < w[1]), key, || {
        "sample times must be strictly increasing".into()
    })
}

fn check_resolvable(n: u32, h: f64, key: &str) -> CliResult<()> {
    require(n >= 1, key, || {
        "mollification level must be at least 1".into()
    })?;
    require(h <= 0.25 / n as f64, key, || {
        format!(
            "grid spacing {h} cannot resolve the n = {n} mollifier (needs h <= {})",
            0.25 / n as f64
        )
    })
}

/// Parses and validates configuration text. Relative `from_file` paths are
/// left as written.
pub fn parse_config_str(text: &str) -> CliResult<RunConfigFile> {
    let cfg: RunConfigFile = from_json(text, "")?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads `path`, validates it and resolves a relative `from_file` path
/// against the directory holding the config.
pub fn parse_config(path: &Path) -> CliResult<RunConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::config("--config", format!("cannot read {}: {e}", path.display()))
    })?;
    let mut cfg = parse_config_str(&text)?;
    if cfg.initial.kind == InitialKind::FromFile {
        if let InitialSpec::FromFile { path: data } = cfg.initial.spec()? {
            if data.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                let resolved = base.join(data);
                cfg.initial.params.insert(
                    "path".into(),
                    Value::String(resolved.to_string_lossy().into_owned()),
                );
            }
        }
    }
    Ok(cfg)
}

impl RunConfigFile {
    pub fn validate(&self) -> CliResult<()> {
        let GridSection { half_width, n } = self.grid;
        require(half_width.is_finite() && half_width > 0.0, "grid.L", || {
            format!("must be positive, got {half_width}")
        })?;
        require(n % 2 == 0, "grid.N", || format!("must be even, got {n}"))?;
        require(n >= 8, "grid.N", || format!("must be at least 8, got {n}"))?;
        let h = 2.0 * half_width / n as f64;

        let t = &self.time;
        require(t.t_end.is_finite() && t.t_end > 0.0, "time.t_end", || {
            format!("must be positive, got {}", t.t_end)
        })?;
        require(t.cfl > 0.0 && t.cfl <= 1.0, "time.cfl", || {
            format!("must lie in (0, 1], got {}", t.cfl)
        })?;
        require(
            t.dt_min.is_finite() && t.dt_min > 0.0,
            "time.dt_min",
            || format!("must be positive, got {}", t.dt_min),
        )?;
        require(
            t.blow_factor.is_finite() && t.blow_factor > 1.0,
            "time.blow_factor",
            || format!("must exceed 1, got {}", t.blow_factor),
        )?;
        require(t.snapshot_stride >= 1, "time.snapshot_stride", || {
            "must be at least 1".into()
        })?;

        match self.initial.spec()? {
            InitialSpec::Gaussian { a, x0, sigma } => {
                require(a.is_finite(), "initial.params.a", || {
                    "must be finite".into()
                })?;
                require(
                    sigma.is_finite() && sigma > 0.0,
                    "initial.params.sigma",
                    || format!("must be positive, got {sigma}"),
                )?;
                check_center(x0, half_width)?;
            }
            InitialSpec::SechMomentum { a, x0 } => {
                require(a.is_finite(), "initial.params.a", || {
                    "must be finite".into()
                })?;
                check_center(x0, half_width)?;
            }
            InitialSpec::DpPeakonPullback { c, x0 } => {
                require(c.is_finite(), "initial.params.c", || {
                    "must be finite".into()
                })?;
                check_center(x0, half_width)?;
            }
            InitialSpec::FromFile { .. } => {}
        }
        if let Some(m) = self.initial.mollify_n {
            check_resolvable(m, h, "initial.mollify_n")?;
        }

        let eps = self.classify.epsilon;
        require(eps.is_finite() && eps > 0.0, "classify.epsilon", || {
            format!("must be positive, got {eps}")
        })?;
        if let Some(b) = &self.bridge {
            check_times(&b.sample_times, t.t_end, "bridge.sample_times")?;
        }
        if let Some(s) = &self.study {
            require(!s.n_values.is_empty(), "study.n_values", || {
                "must not be empty".into()
            })?;
            for (i, &m) in s.n_values.iter().enumerate() {
                check_resolvable(m, h, &format!("study.n_values[{i}]"))?;
            }
        }
        if let Some(p) = &self.perturb {
            require(p.amplitude.is_finite(), "perturb.amplitude", || {
                "must be finite".into()
            })?;
            require(
                p.sigma.is_finite() && p.sigma > 0.0,
                "perturb.sigma",
                || format!("must be positive, got {}", p.sigma),
            )?;
            require(p.x0.abs() < half_width, "perturb.x0", || {
                format!("must lie inside (-L, L), got {}", p.x0)
            })?;
            check_times(&p.sample_times, t.t_end, "perturb.sample_times")?;
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<Grid> {
        Ok(Grid::new(self.grid.half_width, self.grid.n)?)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            backend: self.backend,
            cfl: self.time.cfl,
            t_end: self.time.t_end,
            dt_min: self.time.dt_min,
            blow_factor: self.time.blow_factor,
            dealias: self.time.dealias,
            snapshot_stride: self.time.snapshot_stride,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn check_center(x0: f64, half_width: f64) -> CliResult<()> {
    require(
        x0.is_finite() && x0.abs() < half_width,
        "initial.params.x0",
        || format!("must lie inside (-L, L), got {x0}"),
    )
}

impl InitialSection {
    pub fn spec(&self) -> CliResult<InitialSpec> {
        Ok(match self.kind {
            InitialKind::Gaussian => {
                let p: GaussianParams = params_as(&self.params)?;
                InitialSpec::Gaussian {
                    a: p.a,
                    x0: p.x0,
                    sigma: p.sigma,
                }
            }
            InitialKind::SechMomentum => {
                let p: SechParams = params_as(&self.params)?;
                InitialSpec::SechMomentum { a: p.a, x0: p.x0 }
            }
            InitialKind::DpPeakonPullback => {
                let p: PeakonParams = params_as(&self.params)?;
                InitialSpec::DpPeakonPullback { c: p.c, x0: p.x0 }
            }
            InitialKind::FromFile => {
                let p: FileParams = params_as(&self.params)?;
                InitialSpec::FromFile { path: p.path }
            }
        })
    }
}
