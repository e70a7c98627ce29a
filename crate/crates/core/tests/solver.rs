use homoclinic::action::{action_value, el_residual};
use homoclinic::continuation::{k_sweep, level_consistency, tail_check, SweepConfig};
use homoclinic::mountain_pass::{build_bump, find_zeta, mp_search, newton_polish, solve};
use homoclinic::{Builtin, PeriodicGrid, Problem, SamplingConfig, SolverConfig, Trajectory};
use proptest::prelude::*;

fn compliant() -> Problem<f64> {
    Problem::builtin(Builtin::Example1Compliant)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bump_norm_and_action_do_not_depend_on_k(zeta in 0.1f64..8.0, k in 1usize..60) {
        let p = compliant();
        let e1 = build_bump(PeriodicGrid::with_density(1.0, 64).unwrap(), 1, zeta).unwrap();
        let ek = build_bump(PeriodicGrid::with_density(k as f64, 64).unwrap(), 1, zeta).unwrap();
        prop_assert!((ek.energy_norm() - e1.energy_norm()).abs() <= 1e-10 * e1.energy_norm());
        let (a1, ak) = (action_value(&p, &e1).unwrap(), action_value(&p, &ek).unwrap());
        prop_assert!((a1 - ak).abs() <= 1e-10 * (1.0 + a1.abs()));
    }
}

#[test]
fn path_search_respects_the_level_bracket() {
    let p = compliant();
    let g = PeriodicGrid::with_density(5.0, 64).unwrap();
    let sol = solve(&p, g, &SolverConfig::default()).unwrap();
    let path = &sol.path;
    assert!(path.converged());
    assert!(path.peak_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    let top = path.peak_level();
    assert!(path.levels.iter().enumerate().all(|(j, &l)| j == path.peak_index || l < top));
    assert_eq!(path.points.first().unwrap().sup_abs(), 0.0);
    let e = sol.bump.endpoint(g).unwrap();
    assert_eq!(path.points.last().unwrap(), &e);
    let alpha = p.derived_constants(&SamplingConfig::default()).unwrap().alpha;
    assert!(sol.critical.level >= alpha - 1e-6 && sol.critical.level <= sol.bump.m0 + 1e-6);
}

#[test]
fn path_search_from_a_wrong_grid_is_rejected() {
    let p = compliant();
    let g = PeriodicGrid::with_density(5.0, 64).unwrap();
    let other = build_bump(PeriodicGrid::with_density(4.0, 64).unwrap(), 1, 2.0).unwrap();
    assert!(mp_search(&p, g, &other, &SolverConfig::default()).is_err());
}

#[test]
fn newton_recovers_a_manufactured_solution() {
    let g = PeriodicGrid::new(5.0, 640).unwrap();
    let exact = Trajectory::from_scalar_fn(g, |t: f64| (-t * t).exp() * 0.8).unwrap();
    let base = compliant();
    // forcing that makes `exact` a discrete critical point
    let shift = el_residual(&base.unforced(), &exact).unwrap();
    let table: Vec<f64> = shift.values().to_vec();
    let h = g.h();
    let p = base.with_forcing("manufactured", move |t, out| {
        let i = (((t + 5.0) / h).round() as usize).min(table.len() - 1);
        out[0] = table[i];
    });
    let noisy = Trajectory::from_scalar_fn(g, |t: f64| (-t * t).exp() * 0.8 + 1e-2 * (7.0 * t).sin()).unwrap();
    let cp = newton_polish(&p, g, &noisy, &SolverConfig::default()).unwrap();
    assert!(cp.converged);
    let err = cp.q.values().iter().zip(exact.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err <= 1e-9, "{err}");
}

#[test]
fn zeta_search_reports_the_first_admissible_power_of_two() {
    let p = compliant();
    let b = find_zeta(&p, PeriodicGrid::with_density(1.0, 64).unwrap(), &SolverConfig::default()).unwrap();
    assert!(b.zeta.log2().fract() == 0.0);
    assert!(b.m0 >= 0.0 && b.m0_at > 0.0 && b.m0_at < 1.0);
}

#[test]
fn sweep_invariants_on_the_compliant_problem() {
    let p = compliant();
    let rep = k_sweep(&p, &SweepConfig::default()).unwrap();
    assert!(rep.converged);
    let m0 = rep.bump.as_ref().unwrap().m0;
    for l in &rep.levels {
        assert!(level_consistency(&p, l).unwrap() <= 1e-10);
        assert!(l.c_k <= m0 + 1e-6);
        assert!(l.residual_sup <= 1e-8);
    }
    let bound = rep.bound_check.as_ref().unwrap();
    assert!(bound.applicable && bound.passed());
    let last = rep.levels.last().unwrap();
    let mut prev = f64::INFINITY;
    for margin in [0.4, 0.3, 0.2, 0.1, 0.05, 0.01] {
        let t = tail_check(&last.q, margin).unwrap();
        assert!(t <= prev, "{margin}: {t} > {prev}");
        prev = t;
    }
}
