//! Numerical audit of the five existence hypotheses.
//!
//! Hypotheses quantified over all of `R` cannot be established by sampling.
//! A `pass` therefore means "no violation among the samples"; a `fail`
//! always carries the sample or computed scalar that violates the stated
//! inequality.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{derived_constants, DerivedConstants, Problem, SamplingConfig};
use crate::error::Result;
use crate::scalar::{dot, sq_norm, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry<T> {
    pub condition: &'static str,
    pub status: Status,
    pub witness_t: Option<T>,
    pub witness_x: Option<Vec<T>>,
    pub value: Option<T>,
    pub bound: Option<T>,
    pub note: String,
}

impl<T> ConditionEntry<T> {
    fn new(condition: &'static str, status: Status) -> Self {
        Self {
            condition,
            status,
            witness_t: None,
            witness_x: None,
            value: None,
            bound: None,
            note: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport<T> {
    pub problem: String,
    pub sampling: SamplingConfig<T>,
    pub constants: DerivedConstants<T>,
    /// `(r, max_{|x| = r} |grad G(x)| / r)` along the radius schedule.
    pub c1_slopes: Vec<(T, T)>,
    pub conditions: Vec<ConditionEntry<T>>,
}

impl<T: Scalar> ConditionReport<T> {
    pub fn get(&self, condition: &str) -> Option<&ConditionEntry<T>> {
        self.conditions.iter().find(|c| c.condition == condition)
    }

    pub fn any_fail(&self) -> bool {
        self.conditions.iter().any(|c| c.status == Status::Fail)
    }

    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.status == Status::Pass)
    }
}

pub fn check_conditions<T: Scalar>(p: &Problem<T>, cfg: &SamplingConfig<T>) -> Result<ConditionReport<T>> {
    let constants = derived_constants(p, cfg)?;
    let sphere = cfg.sphere_points(p.dim());
    let (c1, c1_slopes) = check_c1(p, cfg, &sphere);
    let c2 = check_c2(p, cfg);
    let c3 = check_c3(p, cfg);
    let c4 = check_c4(p, cfg, &constants, &sphere);
    let c5 = check_c5(&constants);
    Ok(ConditionReport {
        problem: p.label().to_string(),
        sampling: cfg.clone(),
        constants,
        c1_slopes,
        conditions: vec![c1, c2, c3, c4, c5],
    })
}

fn check_c1<T: Scalar>(p: &Problem<T>, cfg: &SamplingConfig<T>, sphere: &[Vec<T>]) -> (ConditionEntry<T>, Vec<(T, T)>) {
    let mut slopes = Vec::with_capacity(cfg.c1_radii.len());
    let mut last_argmax = Vec::new();
    let mut grad = vec![T::zero(); p.dim()];
    for &r in &cfg.c1_radii {
        let mut best = (T::zero(), 0usize);
        for (j, dir) in sphere.iter().enumerate() {
            let x: Vec<T> = dir.iter().map(|&v| v * r).collect();
            p.grad_g_into(&x, &mut grad);
            let ratio = sq_norm(&grad).sqrt() / r;
            if ratio > best.0 || !ratio.is_finite() {
                best = (ratio, j);
            }
        }
        last_argmax = sphere[best.1].iter().map(|&v| v * r).collect();
        slopes.push((r, best.0));
    }
    let mut entry = ConditionEntry::new("C1", Status::Inconclusive);
    entry.bound = Some(cfg.c1_threshold);
    let Some(&(r_last, last)) = slopes.last() else {
        entry.note = "empty radius schedule".into();
        return (entry, slopes);
    };
    let first = slopes[0].1;
    let monotone = slopes.windows(2).all(|w| w[1].1 <= w[0].1);
    entry.value = Some(last);
    entry.witness_x = Some(last_argmax);
    if !last.is_finite() {
        entry.status = Status::Fail;
        entry.note = format!("non-finite slope at radius {r_last}");
    } else if monotone && last < cfg.c1_threshold {
        entry.status = Status::Pass;
        entry.note = "slope |grad G|/r decreases along the radius schedule".into();
    } else if slopes.len() > 1 && last >= first && last >= cfg.c1_threshold {
        entry.status = Status::Fail;
        entry.note = format!("slope does not decay: {first} at r = {} vs {last} at r = {r_last}", slopes[0].0);
    } else {
        entry.note = "slope not monotone or above threshold at the smallest radius".into();
    }
    (entry, slopes)
}

fn check_c2<T: Scalar>(p: &Problem<T>, cfg: &SamplingConfig<T>) -> ConditionEntry<T> {
    let n = p.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.c2_seed);
    let (r_lo, r_hi) = (cfg.c2_annulus.0.as_f64(), cfg.c2_annulus.1.as_f64());
    let (ln_lo, ln_hi) = (r_lo.ln(), r_hi.ln());
    let mu = p.mu();
    let tol = T::lit(1e-12);
    let mut grad = vec![T::zero(); n];
    let mut worst: Option<(T, Vec<T>)> = None;
    let mut nonpositive: Option<Vec<T>> = None;
    for _ in 0..cfg.c2_samples {
        let mut dir: Vec<f64>;
        loop {
            dir = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.1 && norm <= 1.0 {
                dir.iter_mut().for_each(|v| *v /= norm);
                break;
            }
        }
        let radius = rng.gen_range(ln_lo..=ln_hi).exp();
        let x: Vec<T> = dir.iter().map(|v| T::lit(v * radius)).collect();
        let g = p.g(&x);
        p.grad_g_into(&x, &mut grad);
        let lhs = mu * g;
        let slack = (lhs - dot(&grad, &x)) / T::one().max(lhs.abs());
        if !(g > T::zero()) && nonpositive.is_none() {
            nonpositive = Some(x.clone());
        }
        if worst.as_ref().is_none_or(|(w, _)| slack > *w || !slack.is_finite()) {
            worst = Some((slack, x));
        }
    }
    let mut entry = ConditionEntry::new("C2", Status::Pass);
    entry.bound = Some(tol);
    if let Some(x) = nonpositive {
        entry.status = Status::Fail;
        entry.witness_x = Some(x);
        entry.note = "G(x) <= 0 at a nonzero sample".into();
        return entry;
    }
    if let Some((slack, x)) = worst {
        entry.value = Some(slack);
        if !(slack <= tol) {
            entry.status = Status::Fail;
            entry.witness_x = Some(x);
            entry.note = "mu G(x) exceeds (grad G(x), x); value is the relative excess".into();
        } else {
            entry.note = format!("{} samples, largest relative excess of mu G over (grad G, x)", cfg.c2_samples);
        }
    }
    entry
}

fn check_c3<T: Scalar>(p: &Problem<T>, cfg: &SamplingConfig<T>) -> ConditionEntry<T> {
    let (inf, t_inf) = cfg
        .sample_times()
        .into_iter()
        .map(|t| (p.a(t), t))
        .fold((T::infinity(), T::zero()), |best, cur| if cur.0 < best.0 { cur } else { best });
    let mut entry = ConditionEntry::new("C3", Status::Pass);
    entry.witness_t = Some(t_inf);
    entry.value = Some(inf);
    entry.bound = Some(cfg.c3_floor);
    if !(inf > T::zero()) {
        entry.status = Status::Fail;
        entry.note = "a(t) <= 0 at a sample".into();
    } else if inf <= cfg.c3_floor {
        entry.status = Status::Fail;
        entry.note = "infimum of a(t) degenerates toward 0 (limit at the far probe)".into();
    } else {
        entry.note = "no violation on the sampled window and probes".into();
    }
    entry
}

fn check_c4<T: Scalar>(
    p: &Problem<T>,
    cfg: &SamplingConfig<T>,
    constants: &DerivedConstants<T>,
    sphere: &[Vec<T>],
) -> ConditionEntry<T> {
    let half = T::lit(0.5);
    let probe_sup = cfg
        .probes
        .iter()
        .flat_map(|&t| sphere.iter().map(move |x| (t, x)))
        .map(|(t, x)| p.a(t) * p.g(x))
        .fold(T::neg_infinity(), T::max);
    let w = &constants.big_m_witness;
    let mut entry = ConditionEntry::new("C4", Status::Pass);
    entry.value = Some(constants.big_m);
    entry.bound = Some(half);
    entry.witness_t = Some(w.t);
    entry.witness_x = Some(w.x.clone());
    if constants.big_m >= half {
        entry.status = Status::Fail;
        entry.note = format!("sampled sup of a(t)G(x) on |x| = 1 reaches 1/2; far-probe value {probe_sup}");
    } else {
        entry.note = format!("sampled sup below 1/2; far-probe value {probe_sup}");
    }
    entry
}

fn check_c5<T: Scalar>(constants: &DerivedConstants<T>) -> ConditionEntry<T> {
    let mut entry = ConditionEntry::new("C5", Status::Pass);
    entry.value = Some(constants.f_l2);
    entry.bound = Some(constants.budget);
    if constants.budget <= T::zero() || constants.f_l2 >= constants.budget {
        entry.status = Status::Fail;
        entry.note = "forcing norm on the support window already exceeds the budget (1 - 2M)/(2 sqrt 2)".into();
    } else {
        entry.note = format!(
            "forcing norm below budget; |f|^2 mass beyond the support window estimated at {}",
            constants.f_tail
        );
    }
    entry
}
