//! Continuation in the half-period `k`.
//!
//! Each level of the ladder is solved on `[-k, k]` at a fixed node density.
//! With warm starts the previous solution, zero-extended onto the larger
//! grid, seeds Newton directly; a fresh mountain-pass run is the fallback.
//! The report carries the quantities that make the limit `k -> inf`
//! observable: window distances between consecutive levels, tail sizes and
//! the a priori bound on `||q_k||`.

use serde::{Deserialize, Serialize};

use crate::action::action_value;
use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, Trajectory};
use crate::mountain_pass::{find_zeta, newton_polish, solve_with_bump, BumpDatum, CriticalPoint, SolverConfig};
use crate::problem::{DerivedConstants, Problem, SamplingConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct SweepConfig<T> {
    pub k_ladder: Vec<T>,
    pub nodes_per_unit: usize,
    /// Half-width of the window `[-w, w]` the levels are compared on.
    pub window: T,
    pub window_samples: usize,
    /// Fraction of `[-k, k]` at either end treated as the tail.
    pub decay_margin: T,
    pub q_gap_tol: T,
    pub ddq_gap_tol: T,
    pub tail_tol: T,
    /// Seed each level from the previous one. Without it the levels are
    /// independent and run concurrently.
    pub warm_start: bool,
    pub solver: SolverConfig<T>,
    #[serde(skip)]
    pub sampling: SamplingConfig<T>,
}

impl<T: Scalar> Default for SweepConfig<T> {
    fn default() -> Self {
        Self {
            k_ladder: [5.0, 10.0, 20.0, 40.0].iter().map(|&k| T::lit(k)).collect(),
            nodes_per_unit: 64,
            window: T::lit(3.0),
            window_samples: 601,
            decay_margin: T::lit(0.2),
            q_gap_tol: T::lit(1e-4),
            ddq_gap_tol: T::lit(1e-3),
            tail_tol: T::lit(1e-3),
            warm_start: true,
            solver: SolverConfig::default(),
            sampling: SamplingConfig::default(),
        }
    }
}

impl<T: Scalar> SweepConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        let Some(&first) = self.k_ladder.first() else {
            return Err(Error::Config("k_ladder is empty".into()));
        };
        if self.k_ladder.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("k_ladder must be strictly increasing".into()));
        }
        if !(first >= T::one()) {
            return Err(Error::Config(format!("smallest k must be at least 1, got {first}")));
        }
        if !(self.window > T::zero()) || self.window > first {
            return Err(Error::Config(format!(
                "window {} must be positive and at most the smallest k {first}",
                self.window
            )));
        }
        if !(self.decay_margin > T::zero() && self.decay_margin < T::lit(0.5)) {
            return Err(Error::Config("decay_margin must lie in (0, 1/2)".into()));
        }
        if self.window_samples < 2 {
            return Err(Error::Config("window_samples must be at least 2".into()));
        }
        for &k in &self.k_ladder {
            PeriodicGrid::with_density(k, self.nodes_per_unit)?;
        }
        Ok(())
    }

    pub fn grid(&self, k: T) -> Result<PeriodicGrid<T>> {
        PeriodicGrid::with_density(k, self.nodes_per_unit)
    }
}

/// How a level's solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// Mountain-pass search plus Newton.
    Cold,
    /// Newton from the previous level.
    Warm,
    /// Warm start failed; mountain-pass search plus Newton.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRecord<T> {
    pub k: T,
    pub nodes: usize,
    pub c_k: T,
    pub ek_norm: T,
    /// The norm the discrete action is built from; used by the bound check.
    pub energy_norm: T,
    pub residual_sup: T,
    pub grad_norm: T,
    pub newton_iterations: usize,
    pub mp_iterations: Option<usize>,
    pub start: Start,
    pub converged: bool,
    pub tail_max: T,
    #[serde(skip)]
    pub q: Trajectory<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowGap<T> {
    pub k_from: T,
    pub k_to: T,
    pub q: T,
    pub dq: T,
    pub ddq: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics<T> {
    pub window: T,
    pub samples: usize,
    pub gaps: Vec<WindowGap<T>>,
    /// Last gap within the `q` and `q''` tolerances; vacuously true with a
    /// single level.
    pub final_q_ok: bool,
    pub final_ddq_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry<T> {
    pub k: T,
    pub norm: T,
    /// `r^2 - b r - c` at `r = norm`.
    pub value: T,
    pub status: BoundStatus,
}

/// `r^2 - b r - c <= 0` with `b = (mu - 1)(1 - 2M) / (sqrt 2 (mu - 2))` and
/// `c = 2 mu M0 / (mu - 2)`; `root` is its positive root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck<T> {
    pub applicable: bool,
    pub b: T,
    pub c: T,
    pub root: T,
    pub entries: Vec<BoundEntry<T>>,
}

impl<T: Scalar> BoundCheck<T> {
    /// No entry failed (not-applicable entries count as passing).
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != BoundStatus::Fail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport<T> {
    pub problem: String,
    /// `false` for an unforced problem: the existence result assumes a
    /// non-trivial forcing, so such runs are outside its hypotheses.
    pub within_hypotheses: bool,
    pub config: SweepConfig<T>,
    /// Absent only when the sweep failed before the first level.
    pub bump: Option<BumpDatum<T>>,
    pub constants: Option<DerivedConstants<T>>,
    pub levels: Vec<LevelRecord<T>>,
    pub diagnostics: Diagnostics<T>,
    pub tail_ok: bool,
    pub bound_check: Option<BoundCheck<T>>,
    /// Every level converged.
    pub converged: bool,
}

impl<T: Scalar> SweepReport<T> {
    pub fn level(&self, k: T) -> Option<&LevelRecord<T>> {
        self.levels.iter().find(|l| l.k == k)
    }
}

/// A level failed both the warm start and a fresh search.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure<T> {
    pub k: T,
    pub reason: String,
    /// Levels solved so far, diagnostics over them.
    pub partial: Box<SweepReport<T>>,
}

impl<T: Scalar> std::fmt::Display for SweepFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "sweep failed at k = {}: {}", self.k, self.reason)
    }
}

impl<T: Scalar> std::error::Error for SweepFailure<T> {}

fn record<T: Scalar>(
    k: T,
    cp: CriticalPoint<T>,
    mp_iterations: Option<usize>,
    start: Start,
    margin: T,
) -> Result<LevelRecord<T>> {
    Ok(LevelRecord {
        k,
        nodes: cp.q.grid().nodes(),
        c_k: cp.level,
        ek_norm: cp.q.ek_norm(),
        energy_norm: cp.q.energy_norm(),
        residual_sup: cp.residual_sup,
        grad_norm: cp.grad_norm,
        newton_iterations: cp.iterations,
        mp_iterations,
        start,
        converged: cp.converged,
        tail_max: tail_check(&cp.q, margin)?,
        q: cp.q,
    })
}

fn cold_level<T: Scalar>(p: &Problem<T>, cfg: &SweepConfig<T>, bump: &BumpDatum<T>, k: T, start: Start) -> Result<LevelRecord<T>> {
    let grid = cfg.grid(k)?;
    let sol = solve_with_bump(p, grid, bump.clone(), &cfg.solver)?;
    record(k, sol.critical, Some(sol.path.iterations), start, cfg.decay_margin)
}

fn warm_level<T: Scalar>(p: &Problem<T>, cfg: &SweepConfig<T>, prev: &Trajectory<T>, k: T) -> Result<LevelRecord<T>> {
    let grid = cfg.grid(k)?;
    let q0 = prev.resample(&grid)?;
    let cp = newton_polish(p, grid, &q0, &cfg.solver)?;
    record(k, cp, None, Start::Warm, cfg.decay_margin)
}

/// Solves every level of the ladder and assembles the report.
pub fn k_sweep<T: Scalar>(p: &Problem<T>, cfg: &SweepConfig<T>) -> std::result::Result<SweepReport<T>, SweepFailure<T>> {
    let first = cfg.k_ladder.first().copied().unwrap_or_else(T::one);
    let fail_early = |k: T, e: Error| SweepFailure {
        k,
        reason: e.to_string(),
        partial: Box::new(assemble(p, cfg, None, None, Vec::new())),
    };
    cfg.validate().map_err(|e| fail_early(first, e))?;
    let constants = p.derived_constants(&cfg.sampling).map_err(|e| fail_early(first, e))?;
    let bump = cfg
        .grid(T::one())
        .and_then(|base| find_zeta(p, base, &cfg.solver))
        .map_err(|e| fail_early(first, e))?;

    let mut levels: Vec<LevelRecord<T>> = Vec::with_capacity(cfg.k_ladder.len());
    let mut failure: Option<(T, String)> = None;
    if cfg.warm_start {
        for &k in &cfg.k_ladder {
            let outcome = match levels.last() {
                None => cold_level(p, cfg, &bump, k, Start::Cold),
                Some(prev) => match warm_level(p, cfg, &prev.q, k) {
                    Ok(rec) if rec.converged => Ok(rec),
                    _ => cold_level(p, cfg, &bump, k, Start::Fallback),
                },
            };
            match outcome {
                Ok(rec) => {
                    let ok = rec.converged;
                    levels.push(rec);
                    if !ok {
                        failure = Some((k, "Newton did not converge".into()));
                        break;
                    }
                }
                Err(e) => {
                    failure = Some((k, e.to_string()));
                    break;
                }
            }
        }
    } else {
        let outcomes: Vec<Result<LevelRecord<T>>> = std::thread::scope(|s| {
            let handles: Vec<_> = cfg
                .k_ladder
                .iter()
                .map(|&k| {
                    let bump = &bump;
                    s.spawn(move || cold_level(p, cfg, bump, k, Start::Cold))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("level worker panicked"))
                .collect()
        });
        for (&k, outcome) in cfg.k_ladder.iter().zip(outcomes) {
            match outcome {
                Ok(rec) => {
                    if !rec.converged && failure.is_none() {
                        failure = Some((k, "Newton did not converge".into()));
                    }
                    levels.push(rec);
                }
                Err(e) => {
                    if failure.is_none() {
                        failure = Some((k, e.to_string()));
                    }
                }
            }
        }
    }

    let report = assemble(p, cfg, Some(bump), Some(constants), levels);
    match failure {
        None => Ok(report),
        Some((k, reason)) => Err(SweepFailure {
            k,
            reason,
            partial: Box::new(report),
        }),
    }
}

fn assemble<T: Scalar>(
    p: &Problem<T>,
    cfg: &SweepConfig<T>,
    bump: Option<BumpDatum<T>>,
    constants: Option<DerivedConstants<T>>,
    levels: Vec<LevelRecord<T>>,
) -> SweepReport<T> {
    let trajectories: Vec<&Trajectory<T>> = levels.iter().map(|l| &l.q).collect();
    let diagnostics = convergence_diagnostics(&trajectories, cfg.window, cfg.window_samples, cfg.q_gap_tol, cfg.ddq_gap_tol)
        .unwrap_or_else(|_| Diagnostics {
            window: cfg.window,
            samples: cfg.window_samples,
            gaps: Vec::new(),
            final_q_ok: false,
            final_ddq_ok: false,
        });
    let tail_ok = levels.last().is_some_and(|l| l.tail_max <= cfg.tail_tol);
    let norms: Vec<(T, T)> = levels.iter().map(|l| (l.k, l.energy_norm)).collect();
    let bound_check = match (&constants, &bump) {
        (Some(c), Some(b)) => Some(uniform_bound_check(&norms, c, b, p.mu())),
        _ => None,
    };
    let converged = !levels.is_empty() && levels.len() == cfg.k_ladder.len() && levels.iter().all(|l| l.converged);
    SweepReport {
        problem: p.label().to_string(),
        within_hypotheses: !p.is_unforced(),
        config: cfg.clone(),
        bump,
        constants,
        levels,
        diagnostics,
        tail_ok,
        bound_check,
        converged,
    }
}

/// Evaluates the a priori bound on `||q_k||` for every `(k, norm)` pair.
/// The bound is only meaningful when the geometry is certified (`alpha > 0`,
/// `m > 0`) and `mu > 2`; otherwise entries are marked not applicable.
pub fn uniform_bound_check<T: Scalar>(
    norms: &[(T, T)],
    consts: &DerivedConstants<T>,
    bump: &BumpDatum<T>,
    mu: T,
) -> BoundCheck<T> {
    let two = T::lit(2.0);
    let applicable = consts.geometry_certified() && mu > two && bump.m0 >= T::zero();
    let b = T::FRAC_1_SQRT_2() * (mu - T::one()) / (mu - two) * (T::one() - two * consts.big_m);
    let c = two * mu * bump.m0 / (mu - two);
    let root = (b + (b * b + T::lit(4.0) * c).sqrt()) / two;
    let entries = norms
        .iter()
        .map(|&(k, norm)| {
            let value = norm * norm - b * norm - c;
            let status = if !applicable {
                BoundStatus::NotApplicable
            } else if norm <= root + T::lit(1e-6) {
                BoundStatus::Pass
            } else {
                BoundStatus::Fail
            };
            BoundEntry { k, norm, value, status }
        })
        .collect();
    BoundCheck { applicable, b, c, root, entries }
}

/// Sup-distances of `q`, `q'` and `q''` on `[-w, w]` between consecutive
/// trajectories, sampled at `samples` common points.
pub fn convergence_diagnostics<T: Scalar>(
    trajectories: &[&Trajectory<T>],
    w: T,
    samples: usize,
    q_tol: T,
    ddq_tol: T,
) -> Result<Diagnostics<T>> {
    if let Some(first) = trajectories.first() {
        if let Some(other) = trajectories.iter().find(|q| q.dim() != first.dim()) {
            return Err(Error::Usage(format!(
                "trajectories of dimension {} and {} cannot be compared",
                first.dim(),
                other.dim()
            )));
        }
    }
    let windows = trajectories
        .iter()
        .map(|q| q.restrict_to_window(w, samples))
        .collect::<Result<Vec<_>>>()?;
    let sup = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()));
    let gaps: Vec<WindowGap<T>> = windows
        .windows(2)
        .zip(trajectories.windows(2))
        .map(|(pair, qs)| {
            let mut gap = WindowGap {
                k_from: qs[0].grid().k(),
                k_to: qs[1].grid().k(),
                q: T::zero(),
                dq: T::zero(),
                ddq: T::zero(),
            };
            for (x, y) in pair[0].iter().zip(&pair[1]) {
                gap.q = gap.q.max(sup(&x.q, &y.q));
                gap.dq = gap.dq.max(sup(&x.dq, &y.dq));
                gap.ddq = gap.ddq.max(sup(&x.ddq, &y.ddq));
            }
            gap
        })
        .collect();
    let (final_q_ok, final_ddq_ok) = match gaps.last() {
        Some(g) => (g.q <= q_tol, g.ddq <= ddq_tol),
        None => (true, true),
    };
    Ok(Diagnostics {
        window: w,
        samples,
        gaps,
        final_q_ok,
        final_ddq_ok,
    })
}

/// Max of `|q|` and `|q'|` over `|t| >= (1 - margin) k`.
pub fn tail_check<T: Scalar>(q: &Trajectory<T>, margin: T) -> Result<T> {
    q.tail_max(margin)
}

/// `|c_k - I_k(q_k)|` for a recorded level.
pub fn level_consistency<T: Scalar>(p: &Problem<T>, level: &LevelRecord<T>) -> Result<T> {
    Ok((level.c_k - action_value(p, &level.q)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mountain_pass::build_bump;
    use crate::problem::Builtin;
    use approx::assert_abs_diff_eq;

    fn small() -> SweepConfig<f64> {
        SweepConfig {
            k_ladder: vec![3.0, 6.0],
            nodes_per_unit: 32,
            window: 2.0,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::<f64>::default().validate().is_ok());
        let bad = |f: fn(&mut SweepConfig<f64>)| {
            let mut c = SweepConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.k_ladder.clear()));
        assert!(bad(|c| c.k_ladder = vec![5.0, 5.0]));
        assert!(bad(|c| c.k_ladder = vec![10.0, 5.0]));
        assert!(bad(|c| c.k_ladder = vec![2.0, 5.0]));
        assert!(bad(|c| c.k_ladder = vec![0.5]));
        assert!(bad(|c| c.decay_margin = 0.5));
        assert!(bad(|c| c.window_samples = 1));
    }

    #[test]
    fn config_from_toml_rejects_unknown_keys() {
        let c: SweepConfig<f64> = toml::from_str("k_ladder = [5.0, 8.0]\nwindow = 2.5\n[solver]\nmp_tol = 1e-5\n").unwrap();
        assert_eq!(c.k_ladder, vec![5.0, 8.0]);
        assert_eq!(c.solver.mp_tol, 1e-5);
        assert_eq!(c.nodes_per_unit, 64);
        let err = toml::from_str::<SweepConfig<f64>>("ladder = [5.0]\n").unwrap_err();
        assert!(err.to_string().contains("ladder"));
    }

    #[test]
    fn single_level_is_a_plain_solve() {
        let p = Problem::builtin(Builtin::Example1Compliant);
        let cfg = SweepConfig { k_ladder: vec![3.0], ..small() };
        let rep = k_sweep(&p, &cfg).unwrap();
        assert_eq!(rep.levels.len(), 1);
        assert_eq!(rep.levels[0].start, Start::Cold);
        assert!(rep.diagnostics.gaps.is_empty());
        let sol = crate::mountain_pass::solve(&p, cfg.grid(3.0).unwrap(), &cfg.solver).unwrap();
        assert_eq!(rep.levels[0].c_k, sol.critical.level);
    }

    #[test]
    fn warm_sweep_on_small_ladder() {
        let p = Problem::builtin(Builtin::Example1Compliant);
        let rep = k_sweep(&p, &small()).unwrap();
        assert!(rep.converged && rep.within_hypotheses);
        assert_eq!(rep.levels[1].start, Start::Warm);
        for l in &rep.levels {
            assert!(l.residual_sup <= 1e-8);
            assert!(level_consistency(&p, l).unwrap() <= 1e-10);
            assert!(l.c_k <= rep.bump.as_ref().unwrap().m0 + 1e-6);
        }
        assert!(rep.bound_check.as_ref().is_some_and(|b| b.applicable && b.passed()));
        assert_eq!(rep.diagnostics.gaps.len(), 1);
    }

    #[test]
    fn cold_mode_matches_warm_mode() {
        let p = Problem::builtin(Builtin::Example1Compliant);
        let warm = k_sweep(&p, &small()).unwrap();
        let cold = k_sweep(&p, &SweepConfig { warm_start: false, ..small() }).unwrap();
        assert!(cold.levels.iter().all(|l| l.start == Start::Cold));
        for (a, b) in warm.levels.iter().zip(&cold.levels) {
            assert_abs_diff_eq!(a.c_k, b.c_k, epsilon = 1e-9);
        }
    }

    #[test]
    fn unforced_runs_are_flagged() {
        let p = Problem::builtin(Builtin::Example1Compliant).unforced();
        let rep = k_sweep(&p, &SweepConfig { k_ladder: vec![3.0], ..small() }).unwrap();
        assert!(!rep.within_hypotheses);
    }

    #[test]
    fn invalid_config_fails_with_empty_partial() {
        let p = Problem::builtin(Builtin::Example1Compliant);
        let err = k_sweep(&p, &SweepConfig { k_ladder: vec![], ..small() }).unwrap_err();
        assert!(err.partial.levels.is_empty() && !err.partial.converged);
    }

    #[test]
    fn bound_check_cases() {
        let p = Problem::builtin(Builtin::Example1Compliant);
        let consts = p.derived_constants(&SamplingConfig::default()).unwrap();
        let bump = find_zeta(&p, PeriodicGrid::with_density(1.0, 64).unwrap(), &SolverConfig::default()).unwrap();
        let probe = uniform_bound_check(&[(5.0, 0.0)], &consts, &bump, 4.0);
        assert!(probe.applicable);
        assert_abs_diff_eq!(probe.entries[0].value, -2.0 * 4.0 * bump.m0 / 2.0, epsilon = 1e-12);
        assert_eq!(probe.entries[0].status, BoundStatus::Pass);
        // the root solves the quadratic
        let r = probe.root;
        assert_abs_diff_eq!(r * r - probe.b * r - probe.c, 0.0, epsilon = 1e-10);
        let bad = uniform_bound_check(&[(5.0, 10.0 * r)], &consts, &bump, 4.0);
        assert_eq!(bad.entries[0].status, BoundStatus::Fail);
        assert!(!bad.passed());

        let lit = Problem::builtin(Builtin::Example1);
        let consts = lit.derived_constants(&SamplingConfig::default()).unwrap();
        let na = uniform_bound_check(&[(5.0, 10.0 * r)], &consts, &bump, 4.0);
        assert!(!na.applicable && na.passed());
        assert_eq!(na.entries[0].status, BoundStatus::NotApplicable);
    }

    #[test]
    fn diagnostics_of_identical_and_shifted_trajectories() {
        let g = PeriodicGrid::with_density(4.0, 64).unwrap();
        let q = Trajectory::from_scalar_fn(g, |t: f64| (-t * t).exp()).unwrap();
        let d = convergence_diagnostics(&[&q, &q], 3.0, 301, 1e-4, 1e-3).unwrap();
        assert_eq!((d.gaps[0].q, d.gaps[0].dq, d.gaps[0].ddq), (0.0, 0.0, 0.0));
        assert!(d.final_q_ok && d.final_ddq_ok);

        let h = g.h();
        let shifted = Trajectory::from_scalar_fn(g, |t: f64| (-(t - h) * (t - h)).exp()).unwrap();
        let d = convergence_diagnostics(&[&q, &shifted], 3.0, 1201, 1e-4, 1e-3).unwrap();
        let max_dq = (2.0f64).sqrt() * (-0.5f64).exp();
        assert!((d.gaps[0].q - h * max_dq).abs() <= 0.05 * h * max_dq, "{}", d.gaps[0].q);

        let two = Trajectory::zeros(g, 2);
        assert!(matches!(
            convergence_diagnostics(&[&q, &two], 3.0, 11, 1e-4, 1e-3),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn tails() {
        let g = PeriodicGrid::with_density(10.0, 64).unwrap();
        assert_eq!(tail_check(&Trajectory::zeros(g, 1), 0.2).unwrap(), 0.0);
        assert_eq!(tail_check(&build_bump(g, 1, 2.0).unwrap(), 0.2).unwrap(), 0.0);
        assert!(tail_check(&Trajectory::zeros(g, 1), 0.5).is_err());
    }

    #[test]
    fn failure_keeps_partial_levels() {
        let p = Problem::builtin(Builtin::Example1Compliant);
        let cfg = SweepConfig {
            solver: SolverConfig { newton_max_iters: 1, newton_tol: 1e-15, ..SolverConfig::default() },
            ..small()
        };
        let err = k_sweep(&p, &cfg).unwrap_err();
        assert_eq!(err.k, 3.0);
        assert_eq!(err.partial.levels.len(), 1);
        assert!(!err.partial.levels[0].converged);
    }
}
