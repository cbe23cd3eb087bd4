use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gchlab_cli::output::write_field;
use gchlab_core::{from_dp, BackendKind, Grid};
use serde_json::Value;
use tempfile::TempDir;

fn gchlab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gchlab"));
    cmd.args(args).env_remove("GCHLAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    /// Runs `sub` on `config` writing into `<tmp>/<out>`.
    fn run(&self, sub: &str, config: &Path, out: &str) -> (Output, PathBuf) {
        let out_dir = self.path(out);
        let o = gchlab(
            &[
                sub,
                "--config",
                config.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
            ],
            &[],
        );
        (o, out_dir)
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SECH: &str = r#"{
  "grid": {"L": 15, "N": 1024},
  "backend": "spectral",
  "time": {"t_end": 0.5},
  "initial": {"kind": "sech_momentum", "params": {"a": 0.2}},
  "bridge": {"sample_times": [0.25, 0.5]},
  "study": {"n_values": [2, 4]},
  "perturb": {"amplitude": 1e-3, "x0": 1.0, "sigma": 1.0, "sample_times": [0.25, 0.5]}
}"#;

#[test]
fn solve_constant_data_has_flat_energy() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "c.json",
        r#"{"grid": {"L": 10, "N": 64}, "backend": "fd2", "time": {"t_end": 1.0},
            "initial": {"kind": "gaussian", "params": {"a": 0.0}},
            "output": {"dir": "unused", "write_snapshots": true}}"#,
    );
    let (o, out) = ws.run("solve", &cfg, "out");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("t,dt,energy,mass,m_l1,ux_inf,twisted_min")
    );
    let energies: Vec<&str> = lines.map(|l| l.split(',').nth(2).unwrap()).collect();
    assert!(energies.len() > 2);
    assert!(energies.iter().all(|e| *e == energies[0]));

    let meta = json(&out.join("meta.json"));
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["command"], "solve");
    assert_eq!(meta["status"], "Completed");
    assert_eq!(meta["config"]["time"]["cfl"], 0.3);
    assert_eq!(meta["config"]["grid"]["N"], 64);
    assert!(out.join("snapshots/t_0.csv").exists());
}

#[test]
fn classify_sech_momentum_is_global() {
    let ws = Workspace::new();
    let cfg = ws.config("s.json", SECH);
    let (o, out) = ws.run("classify", &cfg, "out");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = json(&out.join("report.json"));
    assert_eq!(report["verdict"], "GlobalThm31");
    assert_eq!(report["pattern_m_twisted"]["kind"], "NonNegative");
    assert_eq!(report["threshold34"]["epsilon"], 1.0);
    assert!(out.join("meta.json").exists());
}

#[test]
fn bridge_study_and_perturb_produce_reports() {
    let ws = Workspace::new();
    let cfg = ws.config("s.json", SECH);

    let (o, out) = ws.run("bridge", &cfg, "bridge");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("report.json"));
    assert_eq!(r["rel_l2_error"].as_array().unwrap().len(), 2);
    assert!(r["rel_l2_error"][1].as_f64().unwrap() <= 1e-8);

    let (o, out) = ws.run("mollify-study", &cfg, "study");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("report.json"));
    assert_eq!(r["entries"].as_array().unwrap().len(), 2);
    assert_eq!(r["pairwise_l2"][0][0], 0.0);

    let (o, out) = ws.run("perturb", &cfg, "perturb");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.join("report.json"));
    assert_eq!(r["satisfied"], true);
    assert_eq!(r["amplitude"], 1e-3);
    assert_eq!(r["series"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_sections_are_config_errors() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "m.json",
        r#"{"grid": {"L": 30, "N": 512}, "backend": "spectral", "time": {"t_end": 0.5},
            "initial": {"kind": "gaussian"}}"#,
    );
    let (o, out) = ws.run("mollify-study", &cfg, "out");
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("study"));
    assert!(json(&out.join("meta.json"))["error"].is_string());
    let (o, _) = ws.run("perturb", &cfg, "out2");
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn odd_grid_is_rejected_with_key() {
    let ws = Workspace::new();
    let cfg = ws.config("odd.json", &SECH.replace("1024", "1023"));
    let (o, _) = ws.run("solve", &cfg, "out");
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("grid.N"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_four() {
    let o = gchlab(&["evolve", "--config", "x.json"], &[]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).to_lowercase().contains("usage"));
    assert_eq!(gchlab(&["solve"], &[]).status.code(), Some(4));
    assert_eq!(
        gchlab(&["solve", "--config", "/nonexistent/cfg.json"], &[])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(gchlab(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn thread_variable_is_validated() {
    let ws = Workspace::new();
    let cfg = ws.config("s.json", SECH);
    let args = |out: &str| {
        vec![
            "classify".to_string(),
            "--config".into(),
            cfg.to_str().unwrap().into(),
            "--out".into(),
            ws.path(out).to_str().unwrap().into(),
        ]
    };
    let a = args("a");
    let a: Vec<&str> = a.iter().map(String::as_str).collect();
    assert_eq!(
        gchlab(&a, &[("GCHLAB_THREADS", "2")]).status.code(),
        Some(0)
    );
    assert_eq!(
        gchlab(&a, &[("GCHLAB_THREADS", "zero")]).status.code(),
        Some(4)
    );
}

#[test]
fn step_floor_exits_three() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "f.json",
        &SECH.replace(r#""t_end": 0.5"#, r#""t_end": 0.5, "dt_min": 1.0"#),
    );
    let (o, out) = ws.run("solve", &cfg, "out");
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&out.join("meta.json"))["status"], "StepFloorReached");
}

#[test]
fn file_data_round_trips_through_solve() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "a.json",
        r#"{"grid": {"L": 20, "N": 256}, "backend": "spectral", "time": {"t_end": 0.2},
            "initial": {"kind": "gaussian", "params": {"a": 0.3, "sigma": 2.0}},
            "output": {"write_snapshots": true}}"#,
    );
    let (o, out) = ws.run("solve", &cfg, "first");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let snapshots = std::fs::read_dir(out.join("snapshots")).unwrap().count();
    let last = out.join(format!("snapshots/t_{}.csv", snapshots - 1));
    std::fs::copy(&last, ws.path("state.csv")).unwrap();

    // Relative paths resolve against the config's directory.
    let cfg = ws.config(
        "b.json",
        r#"{"grid": {"L": 20, "N": 256}, "backend": "spectral", "time": {"t_end": 0.2},
            "initial": {"kind": "from_file", "params": {"path": "state.csv"}}}"#,
    );
    let (o, _) = ws.run("solve", &cfg, "second");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let wrong = ws.config(
        "c.json",
        &std::fs::read_to_string(&cfg).unwrap().replace("256", "128"),
    );
    let (o, _) = ws.run("solve", &wrong, "third");
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn breaking_data_exits_two_and_records_bound() {
    let ws = Workspace::new();
    let g = Grid::new(10.0, 2048).unwrap();
    let delta = 0.1;
    // Rising flank: under this sign convention positive slopes steepen.
    let v0 = g
        .sample(|x| (x / delta) * (-(x * x) / (delta * delta)).exp())
        .unwrap();
    write_field(
        &ws.path("steep.csv"),
        &from_dp(&v0, BackendKind::Spectral).unwrap(),
    )
    .unwrap();
    let cfg = ws.config(
        "b.json",
        r#"{"grid": {"L": 10, "N": 2048}, "backend": "spectral",
            "time": {"t_end": 1.0, "blow_factor": 2},
            "initial": {"kind": "from_file", "params": {"path": "steep.csv"}}}"#,
    );
    let (o, out) = ws.run("solve", &cfg, "out");
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let meta = json(&out.join("meta.json"));
    assert_eq!(meta["status"], "BlowUpDetected");
    let t_final = meta["t_final"].as_f64().unwrap();
    let t_star = meta["t_star"].as_f64().unwrap();
    assert!(t_final > 0.0 && t_final < 1.0);
    assert!((t_star - 0.8773).abs() < 0.01, "{t_star}");
}

#[test]
fn identical_runs_are_byte_identical() {
    let ws = Workspace::new();
    let cfg = ws.config("s.json", SECH);
    let (_, a) = ws.run("solve", &cfg, "a");
    let (_, b) = ws.run("solve", &cfg, "b");
    for file in ["diagnostics.csv", "meta.json"] {
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap()
        );
    }
}
