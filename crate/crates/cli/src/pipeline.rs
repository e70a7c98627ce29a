//! Runs one configured job and writes its artifacts.

use std::path::{Path, PathBuf};

use homoclinic::continuation::{k_sweep, SweepReport};
use homoclinic::mountain_pass::{solve, PathState};
use homoclinic::problem::check_conditions;
use homoclinic::{CriticalPoint64, DerivedConstants64, PeriodicGrid64, Problem64, SamplingConfig64, Trajectory64};
use serde::Serialize;

use crate::config::{Mode, ProblemSource, RunConfig};
use crate::error::CliError;
use crate::output::write_json;
use crate::svg::{line_plot, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 3;
pub const EXIT_UNCONVERGED: i32 = 4;

#[derive(Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
    pub summary: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    problem: &'a str,
    config: &'a RunConfig,
    sampling: &'a SamplingConfig64,
    constants: Option<&'a DerivedConstants64>,
    constants_error: Option<String>,
}

#[derive(Serialize)]
struct Bracket {
    alpha: f64,
    m0: f64,
    level: f64,
    within: bool,
    /// Whether alpha is a proven lower bound, i.e. the geometry is certified.
    guaranteed: bool,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    problem: &'a str,
    within_hypotheses: bool,
    k: f64,
    nodes: usize,
    h: f64,
    bump: Option<homoclinic::BumpDatum64>,
    path: Option<PathState<f64>>,
    critical: Option<CriticalPoint64>,
    bracket: Option<Bracket>,
    error: Option<String>,
}

#[derive(Serialize)]
struct Failure {
    k: f64,
    reason: String,
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    #[serde(flatten)]
    report: &'a SweepReport<f64>,
    failure: Option<Failure>,
}

pub fn load_problem(source: &ProblemSource) -> Result<Problem64, CliError> {
    match source {
        ProblemSource::Builtin(b) => Ok(Problem64::builtin(*b)),
        ProblemSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            Problem64::from_definition_str(&text).map_err(|e| match e {
                homoclinic::Error::Config(m) => CliError::Usage(format!("{}: {m}", path.display())),
                other => CliError::Core(other),
            })
        }
    }
}

/// File-name friendly version of a problem label.
pub fn file_label(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "problem".into()
    } else {
        s
    }
}

pub fn level_stem(label: &str, k: f64) -> String {
    format!("{}_k{}", file_label(label), k)
}

fn write_level(out: &Path, label: &str, q: &Trajectory64, svg: bool, artifacts: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let k = q.grid().k();
    let stem = level_stem(label, k);
    let csv = out.join(format!("{stem}.csv"));
    let mut buf = Vec::new();
    q.write_csv(&mut buf).map_err(CliError::io(&csv))?;
    std::fs::write(&csv, buf).map_err(CliError::io(&csv))?;
    artifacts.push(csv);
    if svg {
        let t: Vec<f64> = q.grid().times().collect();
        let comps: Vec<Vec<f64>> = (0..q.dim()).map(|c| q.values().iter().skip(c).step_by(q.dim()).copied().collect()).collect();
        let names: Vec<String> = (1..=q.dim()).map(|c| if q.dim() == 1 { "q".into() } else { format!("q_{c}") }).collect();
        const COLOURS: [&str; 4] = ["#1f4e9c", "#b8401f", "#2a8a3a", "#7a3a9a"];
        let series: Vec<Series<'_>> = comps
            .iter()
            .zip(&names)
            .enumerate()
            .map(|(c, (v, n))| Series { label: n, colour: COLOURS[c % COLOURS.len()], dashed: c >= COLOURS.len(), values: v })
            .collect();
        let path = out.join(format!("{stem}.svg"));
        std::fs::write(&path, line_plot(&format!("{label}, k = {k}"), &t, &series)).map_err(CliError::io(&path))?;
        artifacts.push(path);
    }
    Ok(())
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = load_problem(&cfg.problem)?;
    let label = p.label().to_string();
    std::fs::create_dir_all(&cfg.out).map_err(CliError::io(&cfg.out))?;
    let sampling = SamplingConfig64::default();
    let constants = p.derived_constants(&sampling);
    let manifest = cfg.out.join("manifest.json");
    write_json(
        &manifest,
        &Manifest {
            tool: "homoclinic",
            version: env!("CARGO_PKG_VERSION"),
            problem: &label,
            config: cfg,
            sampling: &sampling,
            constants: constants.as_ref().ok(),
            constants_error: constants.as_ref().err().map(|e| e.to_string()),
        },
    )?;
    let mut outcome = Outcome { exit_code: EXIT_OK, artifacts: vec![manifest], summary: Vec::new() };
    let constants = constants?;

    match cfg.mode {
        Mode::Audit => {
            let report = check_conditions(&p, &sampling)?;
            let path = cfg.out.join(format!("{}_audit.json", file_label(&label)));
            write_json(&path, &report)?;
            outcome.artifacts.push(path);
            for c in &report.conditions {
                outcome.summary.push(format!("{}: {:?}", c.condition, c.status).to_lowercase());
            }
            if report.any_fail() {
                outcome.exit_code = EXIT_VIOLATIONS;
            }
        }
        Mode::Solve => {
            let k = cfg.k.ok_or_else(|| CliError::Usage("--mode solve requires --k".into()))?;
            let grid = PeriodicGrid64::with_density(k, cfg.nodes_per_unit)?;
            let mut report = SolveReport {
                problem: &label,
                within_hypotheses: !p.is_unforced(),
                k,
                nodes: grid.nodes(),
                h: grid.h(),
                bump: None,
                path: None,
                critical: None,
                bracket: None,
                error: None,
            };
            match solve(&p, grid, &cfg.solver) {
                Ok(sol) => {
                    let level = sol.critical.level;
                    report.bracket = Some(Bracket {
                        alpha: constants.alpha,
                        m0: sol.bump.m0,
                        level,
                        within: level >= constants.alpha - 1e-6 && level <= sol.bump.m0 + 1e-6,
                        guaranteed: constants.geometry_certified(),
                    });
                    outcome.summary.push(format!(
                        "k = {k}: level {level:.10}, residual {:.3e}, converged {}",
                        sol.critical.residual_sup, sol.critical.converged
                    ));
                    if !sol.critical.converged {
                        outcome.exit_code = EXIT_UNCONVERGED;
                    }
                    write_level(&cfg.out, &label, &sol.critical.q, cfg.emit_svg, &mut outcome.artifacts)?;
                    report.bump = Some(sol.bump);
                    report.path = Some(sol.path);
                    report.critical = Some(sol.critical);
                }
                Err(e) => {
                    outcome.summary.push(format!("k = {k}: {e}"));
                    report.error = Some(e.to_string());
                    outcome.exit_code = EXIT_UNCONVERGED;
                }
            }
            let path = cfg.out.join(format!("{}.json", level_stem(&label, k)));
            write_json(&path, &report)?;
            outcome.artifacts.push(path);
        }
        Mode::Sweep | Mode::Figures => {
            let mut sweep_cfg = cfg.sweep_config();
            sweep_cfg.sampling = sampling;
            let (report, failure) = match k_sweep(&p, &sweep_cfg) {
                Ok(r) => (r, None),
                Err(f) => (*f.partial, Some(Failure { k: f.k, reason: f.reason })),
            };
            for l in &report.levels {
                write_level(&cfg.out, &label, &l.q, cfg.emit_svg, &mut outcome.artifacts)?;
                outcome.summary.push(format!(
                    "k = {}: c_k {:.10}, residual {:.3e}, tail {:.3e}, {:?}",
                    l.k, l.c_k, l.residual_sup, l.tail_max, l.start
                ).to_lowercase());
            }
            if let Some(f) = &failure {
                outcome.summary.push(format!("failed at k = {}: {}", f.k, f.reason));
            }
            if failure.is_some() || !report.converged {
                outcome.exit_code = EXIT_UNCONVERGED;
            }
            let name = if cfg.mode == Mode::Figures { "figures" } else { "sweep" };
            let path = cfg.out.join(format!("{}_{name}.json", file_label(&label)));
            write_json(&path, &SweepDocument { report: &report, failure })?;
            outcome.artifacts.push(path);
        }
    }
    Ok(outcome)
}
