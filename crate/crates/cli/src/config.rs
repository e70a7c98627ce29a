//! Run configuration: command-line flags layered over an optional TOML file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use homoclinic::{Builtin, SolverConfig64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Audit,
    Solve,
    Sweep,
    Figures,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemSource {
    Builtin(Builtin),
    File(PathBuf),
}

impl FromStr for ProblemSource {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if let Ok(b) = s.parse::<Builtin>() {
            return Ok(Self::Builtin(b));
        }
        let path = PathBuf::from(s);
        if path.is_file() {
            Ok(Self::File(path))
        } else {
            let known: Vec<&str> = Builtin::ALL.iter().map(|b| b.as_str()).collect();
            Err(CliError::Usage(format!(
                "--problem: '{s}' is neither a built-in ({}) nor a readable file",
                known.join(", ")
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub mode: Mode,
    /// Half-period for `solve`.
    pub k: Option<f64>,
    /// Ladder for `sweep` and `figures`.
    pub ladder: Vec<f64>,
    pub nodes_per_unit: usize,
    pub solver: SolverConfig64,
    pub window: f64,
    pub margin: f64,
    pub warm_start: bool,
    #[serde(skip)]
    pub out: PathBuf,
    pub emit_svg: bool,
}

#[derive(Debug, Parser)]
#[command(name = "homoclinic", version, about = "Audit, solve and continue forced second-order systems")]
struct Flags {
    /// Built-in problem id or a problem definition file.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Half-period for --mode solve.
    #[arg(long)]
    k: Option<f64>,
    /// Comma-separated half-periods for --mode sweep / figures.
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<f64>>,
    #[arg(long)]
    nodes_per_unit: Option<usize>,
    #[arg(long)]
    mp_tol: Option<f64>,
    #[arg(long)]
    newton_tol: Option<f64>,
    /// Half-width of the comparison window.
    #[arg(long)]
    window: Option<f64>,
    /// Fraction of the domain treated as tail.
    #[arg(long)]
    margin: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    emit_svg: bool,
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Keys accepted in a configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    problem: Option<String>,
    mode: Option<Mode>,
    k: Option<f64>,
    ladder: Option<Vec<f64>>,
    nodes_per_unit: Option<usize>,
    mp_tol: Option<f64>,
    newton_tol: Option<f64>,
    max_iters: Option<usize>,
    newton_max_iters: Option<usize>,
    path_points: Option<usize>,
    zeta_cap: Option<f64>,
    precondition: Option<Switch>,
    window: Option<f64>,
    margin: Option<f64>,
    warm_start: Option<bool>,
    out: Option<PathBuf>,
    emit_svg: Option<bool>,
}

const FIGURES_EXAMPLE1: [f64; 5] = [10.0, 16.0, 90.0, 140.0, 200.0];
const FIGURES_EXAMPLE2: [f64; 4] = [10.0, 16.0, 90.0, 140.0];

/// Ladder used by `--mode figures` when none is given.
pub fn figures_ladder(problem: &ProblemSource) -> Vec<f64> {
    match problem {
        ProblemSource::Builtin(Builtin::Example2) => FIGURES_EXAMPLE2.to_vec(),
        _ => FIGURES_EXAMPLE1.to_vec(),
    }
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Parses flags (including the program name) and the optional file.
pub fn parse_config<I, S>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let flags = Flags::try_parse_from(args).map_err(CliError::Clap)?;
    let file = match &flags.config {
        Some(path) => read_file(path)?,
        None => FileConfig::default(),
    };

    let problem = flags
        .problem
        .or(file.problem)
        .ok_or_else(|| CliError::Usage("--problem is required".into()))?
        .parse::<ProblemSource>()?;
    let mode = flags
        .mode
        .or(file.mode)
        .ok_or_else(|| CliError::Usage("--mode is required (audit, solve, sweep or figures)".into()))?;

    let mut solver = SolverConfig64::default();
    if let Some(v) = flags.mp_tol.or(file.mp_tol) {
        solver.mp_tol = v;
    }
    if let Some(v) = flags.newton_tol.or(file.newton_tol) {
        solver.newton_tol = v;
    }
    if let Some(v) = file.max_iters {
        solver.max_iters = v;
    }
    if let Some(v) = file.newton_max_iters {
        solver.newton_max_iters = v;
    }
    if let Some(v) = file.path_points {
        solver.path_points = v;
    }
    if let Some(v) = file.zeta_cap {
        solver.zeta_cap = v;
    }
    if let Some(v) = file.precondition {
        solver.precondition = v == Switch::On;
    }
    solver.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let k = flags.k.or(file.k);
    let mut ladder = flags.ladder.or(file.ladder).unwrap_or_default();
    match mode {
        Mode::Solve => {
            let k = k.ok_or_else(|| CliError::Usage("--mode solve requires --k".into()))?;
            if !(k >= 1.0 && k.is_finite()) {
                return Err(CliError::Usage(format!("--k must be at least 1, got {k}")));
            }
        }
        Mode::Sweep if ladder.is_empty() => {
            return Err(CliError::Usage("--mode sweep requires --ladder".into()));
        }
        Mode::Figures if ladder.is_empty() => ladder = figures_ladder(&problem),
        _ => {}
    }

    let cfg = RunConfig {
        problem,
        mode,
        k,
        ladder,
        nodes_per_unit: flags.nodes_per_unit.or(file.nodes_per_unit).unwrap_or(64),
        solver,
        window: flags.window.or(file.window).unwrap_or(3.0),
        margin: flags.margin.or(file.margin).unwrap_or(0.2),
        warm_start: file.warm_start.unwrap_or(true),
        out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
        emit_svg: flags.emit_svg || file.emit_svg.unwrap_or(false) || mode == Mode::Figures,
    };
    if matches!(cfg.mode, Mode::Sweep | Mode::Figures) {
        cfg.sweep_config().validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if cfg.nodes_per_unit == 0 {
        return Err(CliError::Usage("--nodes-per-unit must be positive".into()));
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn sweep_config(&self) -> homoclinic::SweepConfig64 {
        homoclinic::SweepConfig64 {
            k_ladder: self.ladder.clone(),
            nodes_per_unit: self.nodes_per_unit,
            window: self.window,
            decay_margin: self.margin,
            warm_start: self.warm_start,
            solver: self.solver.clone(),
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig, CliError> {
        parse_config(std::iter::once("homoclinic").chain(args.iter().copied()))
    }

    #[test]
    fn audit_config() {
        let c = parse(&["--problem", "example1", "--mode", "audit"]).unwrap();
        assert_eq!(c.problem, ProblemSource::Builtin(Builtin::Example1));
        assert_eq!(c.mode, Mode::Audit);
        assert!(!c.emit_svg);
    }

    #[test]
    fn figures_preset() {
        let c = parse(&["--mode", "figures", "--problem", "example1"]).unwrap();
        assert_eq!(c.ladder, vec![10.0, 16.0, 90.0, 140.0, 200.0]);
        assert!(c.emit_svg);
        let c = parse(&["--mode", "figures", "--problem", "example2"]).unwrap();
        assert_eq!(c.ladder, vec![10.0, 16.0, 90.0, 140.0]);
    }

    #[test]
    fn sweep_needs_a_ladder() {
        let e = parse(&["--problem", "example1", "--mode", "sweep"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let c = parse(&["--problem", "example1", "--mode", "sweep", "--ladder", "5,10"]).unwrap();
        assert_eq!(c.ladder, vec![5.0, 10.0]);
    }

    #[test]
    fn solve_needs_k() {
        assert!(parse(&["--problem", "example1", "--mode", "solve"]).is_err());
        assert!(parse(&["--problem", "example1", "--mode", "solve", "--k", "0.5"]).is_err());
        assert_eq!(parse(&["--problem", "example1", "--mode", "solve", "--k", "5"]).unwrap().k, Some(5.0));
    }

    #[test]
    fn malformed_values_are_usage_errors() {
        let e = parse(&["--problem", "example1", "--mode", "solve", "--k", "five"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("--k"), "{e}");
        assert_eq!(parse(&["--problem", "nonsense", "--mode", "audit"]).unwrap_err().exit_code(), 2);
        assert_eq!(parse(&["--problem", "example1", "--mode", "fly"]).unwrap_err().exit_code(), 2);
        let e = parse(&["--problem", "example1", "--mode", "sweep", "--ladder", "10,5"]).unwrap_err();
        assert!(e.to_string().contains("increasing"), "{e}");
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "problem = \"example1_compliant\"\nmode = \"sweep\"\nladder = [5.0, 10.0]\nmp_tol = 1e-5\nprecondition = \"off\"\nwindow = 2.0\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["--config", p]).unwrap();
        assert_eq!(c.ladder, vec![5.0, 10.0]);
        assert_eq!(c.solver.mp_tol, 1e-5);
        assert!(!c.solver.precondition);
        let c = parse(&["--config", p, "--ladder", "6,12", "--window", "2.5", "--mode", "figures"]).unwrap();
        assert_eq!(c.ladder, vec![6.0, 12.0]);
        assert_eq!(c.window, 2.5);
        assert_eq!(c.mode, Mode::Figures);
    }

    #[test]
    fn unknown_file_keys_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "problem = \"example1\"\nmode = \"audit\"\nwindw = 3.0\n").unwrap();
        let e = parse(&["--config", path.to_str().unwrap()]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let msg = e.to_string();
        assert!(msg.contains("windw") && msg.contains("line 3"), "{msg}");
    }
}
