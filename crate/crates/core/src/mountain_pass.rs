//! Mountain-pass geometry and the saddle search.
//!
//! The bump `Q(t) = cos(pi t / 2)` on `[-1, 1]`, scaled by `zeta` and
//! extended by zero, is the far endpoint `e_k` of every path. The search
//! deforms the straight path `s -> s e_k` by preconditioned descent at its
//! highest point; the resulting peak is then polished by Newton's method on
//! the discrete Euler-Lagrange system.
//!
//! Norms of trajectories here are the forward-difference energy norm, i.e.
//! the norm the discrete action is built from. On a zero-extended bump it is
//! exactly independent of `k`.

use serde::{Deserialize, Serialize};

use crate::action::DiscreteAction;
use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, Trajectory};
use crate::problem::Problem;
use crate::scalar::{dot, max_abs, sq_norm, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig<T> {
    /// Stop the path search once the dual norm of the derivative at the
    /// peak drops below this.
    pub mp_tol: T,
    /// Newton stops once the sup-norm of the residual drops below this.
    pub newton_tol: T,
    pub max_iters: usize,
    pub newton_max_iters: usize,
    /// Number of path segments; the path holds `path_points + 1` points.
    pub path_points: usize,
    pub zeta_cap: T,
    /// Precondition the descent step with `(-D2 + 1)^{-1}`.
    pub precondition: bool,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            mp_tol: T::lit(1e-4),
            newton_tol: T::lit(1e-8),
            max_iters: 2000,
            newton_max_iters: 50,
            path_points: 40,
            zeta_cap: T::lit(1_048_576.0),
            precondition: true,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !positive(self.mp_tol) || !positive(self.newton_tol) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        if self.path_points < 4 {
            return Err(Error::Config("path_points must be at least 4".into()));
        }
        if !(self.zeta_cap >= T::one()) {
            return Err(Error::Config("zeta_cap must be at least 1".into()));
        }
        if self.max_iters == 0 || self.newton_max_iters == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpDatum<T> {
    /// `Q` on the `k = 1` grid, unscaled.
    #[serde(skip)]
    pub q: Trajectory<T>,
    pub zeta: T,
    pub e1_norm: T,
    pub e1_action: T,
    #[serde(rename = "M0")]
    pub m0: T,
    /// The `s` at which `I_1(s e_1)` peaks.
    pub m0_at: T,
}

impl<T: Scalar> BumpDatum<T> {
    /// `e_k` on `grid`.
    pub fn endpoint(&self, grid: PeriodicGrid<T>) -> Result<Trajectory<T>> {
        build_bump(grid, self.q.dim(), self.zeta)
    }
}

fn bump_profile<T: Scalar>(t: T) -> T {
    if t.abs() <= T::one() {
        (T::FRAC_PI_2() * t).cos()
    } else {
        T::zero()
    }
}

/// `zeta Q` zero-extended to `target`, pointing along the first axis when
/// `dim > 1`.
pub fn build_bump<T: Scalar>(target: PeriodicGrid<T>, dim: usize, zeta: T) -> Result<Trajectory<T>> {
    if target.k() < T::one() {
        return Err(Error::Domain(format!("bump needs k >= 1, got {}", target.k())));
    }
    if dim == 0 {
        return Err(Error::Dimension { expected: 1, got: 0 });
    }
    Trajectory::from_fn(target, dim, |t, out| {
        out.iter_mut().for_each(|v| *v = T::zero());
        out[0] = zeta * bump_profile(t);
    })
}

/// Doubles `zeta` from 1 until `||zeta Q|| > 1/sqrt 2` and `I_1(zeta Q) < 0`.
pub fn find_zeta<T: Scalar>(p: &Problem<T>, base: PeriodicGrid<T>, cfg: &SolverConfig<T>) -> Result<BumpDatum<T>> {
    if (base.k() - T::one()).abs() > T::epsilon() * T::lit(4.0) {
        return Err(Error::Domain(format!("bump search runs on k = 1, got {}", base.k())));
    }
    let act = DiscreteAction::new(p, base)?;
    let q = build_bump(base, p.dim(), T::one())?;
    let rho = T::FRAC_1_SQRT_2();
    let mut zeta = T::one();
    while zeta <= cfg.zeta_cap {
        let e1 = build_bump(base, p.dim(), zeta)?;
        let norm = e1.energy_norm();
        let action = act.value(&e1)?;
        if norm > rho && action < T::zero() {
            let (mut m0, mut m0_at) = (T::zero(), T::zero());
            for i in 0..=1000usize {
                let s = T::from_count(i) / T::lit(1000.0);
                let scaled: Vec<T> = e1.values().iter().map(|&v| s * v).collect();
                let level = act.value_raw(&scaled)?;
                if level > m0 {
                    m0 = level;
                    m0_at = s;
                }
            }
            return Ok(BumpDatum { q, zeta, e1_norm: norm, e1_action: action, m0, m0_at });
        }
        zeta = zeta + zeta;
    }
    Err(Error::GeometryFailure { cap: cfg.zeta_cap.as_f64() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Converged,
    MaxIters,
    /// The highest point sits at an endpoint: no mountain-pass geometry.
    Degenerate,
    /// The descent step at the peak could not decrease the action.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathState<T> {
    #[serde(skip)]
    pub points: Vec<Trajectory<T>>,
    pub levels: Vec<T>,
    pub peak_index: usize,
    pub peak_grad_norm: T,
    pub iterations: usize,
    pub status: PathStatus,
    /// Peak level after every iteration, starting with the initial path.
    pub peak_history: Vec<T>,
}

impl<T: Scalar> PathState<T> {
    pub fn peak(&self) -> &Trajectory<T> {
        &self.points[self.peak_index]
    }

    pub fn peak_level(&self) -> T {
        self.levels[self.peak_index]
    }

    pub fn converged(&self) -> bool {
        self.status == PathStatus::Converged
    }
}

fn argmax<T: Scalar>(levels: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in levels.iter().enumerate() {
        if v > levels[best] {
            best = i;
        }
    }
    best
}

fn energy_norm_raw<T: Scalar>(grid: &PeriodicGrid<T>, dim: usize, a: &[T]) -> T {
    let nodes = grid.nodes();
    let inv_h = T::one() / grid.h();
    let mut acc = T::zero();
    for i in 0..nodes {
        let j = (i + 1) % nodes;
        for c in 0..dim {
            let slope = (a[j * dim + c] - a[i * dim + c]) * inv_h;
            acc += a[i * dim + c] * a[i * dim + c] + slope * slope;
        }
    }
    (grid.h() * acc).sqrt()
}

/// Descent direction (the Riesz representative of the derivative) and the
/// dual norm of the derivative at `q`.
fn descent<T: Scalar>(act: &DiscreteAction<'_, T>, q: &[T], precondition: bool) -> Result<(Vec<T>, T)> {
    let grad = act.gradient_raw(q)?;
    let h = act.grid().h();
    let scaled: Vec<T> = grad.iter().map(|&g| g / h).collect();
    let dir = if precondition { act.gram().solve(&scaled)? } else { scaled };
    let norm = dot(&grad, &dir).max(T::zero()).sqrt();
    Ok((dir, norm))
}

fn scale<T: Scalar>(s: T, v: &[T]) -> Vec<T> {
    v.iter().map(|&x| s * x).collect()
}

/// Maximum of `phi` on `[lo, hi]` by Brent's method (golden section with
/// parabolic steps); returns `(t, phi(t))`.
fn brent_max<T: Scalar>(mut phi: impl FnMut(T) -> Result<T>, mut lo: T, mut hi: T) -> Result<(T, T)> {
    let half = T::lit(0.5);
    let gold = (T::lit(3.0) - T::lit(5.0).sqrt()) * half;
    let tol_rel = T::epsilon().sqrt();
    let mut x = lo + gold * (hi - lo);
    let (mut w, mut v) = (x, x);
    let mut fx = -phi(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (T::zero(), T::zero());
    for _ in 0..100 {
        let mid = half * (lo + hi);
        let tol1 = tol_rel * x.abs() + T::lit(1e-300).max(T::min_positive_value());
        let tol2 = tol1 + tol1;
        if (x - mid).abs() <= tol2 - half * (hi - lo) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = (q - r) * T::lit(2.0);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (half * q * e).abs() && p > q * (lo - x) && p < q * (hi - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < mid { hi - x } else { lo - x };
            d = gold * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d > T::zero() { x + tol1 } else { x - tol1 };
        let fu = -phi(u)?;
        if fu <= fx {
            if u < x {
                hi = x;
            } else {
                lo = x;
            }
            (v, fv, w, fw, x, fx) = (w, fw, x, fx, u, fu);
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                (v, fv, w, fw) = (w, fw, u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Ok((x, -fx))
}

/// Maximum of `t -> I(t w)` over `t >= 0`: a scan on `[0, t_hi]`, doubling
/// `t_hi` until the best sample is interior and `I(t_hi w) < 0`, then Brent
/// around the best sample. `None` when the maximum is at `t = 0` or no such
/// `t_hi` exists.
fn ray_max<T: Scalar>(act: &DiscreteAction<'_, T>, w: &[T], t_guess: T) -> Result<Option<(T, T)>> {
    const SCAN: usize = 16;
    let phi = |t: T| act.value_raw(&scale(t, w));
    let mut t_hi = (t_guess + t_guess).max(T::lit(1e-3));
    for _ in 0..64 {
        let samples = (0..=SCAN)
            .map(|i| phi(t_hi * T::from_count(i) / T::from_count(SCAN)))
            .collect::<Result<Vec<T>>>()?;
        let best = argmax(&samples);
        if best == SCAN || !(samples[SCAN] < T::zero()) {
            t_hi = t_hi + t_hi;
            continue;
        }
        if best == 0 {
            return Ok(None);
        }
        let dt = t_hi / T::from_count(SCAN);
        let top = brent_max(phi, dt * T::from_count(best - 1), dt * T::from_count(best + 1))?;
        let sampled = (dt * T::from_count(best), samples[best]);
        return Ok(Some(if sampled.1 > top.1 { sampled } else { top }));
    }
    Ok(None)
}

/// Samples the path `0 -> peak -> R peak -> R e_k -> e_k` (straight pieces)
/// with `segs` segments, the peak being a vertex. `R` doubles until every
/// other vertex lies strictly below the peak.
fn sample_path<T: Scalar>(
    act: &DiscreteAction<'_, T>,
    peak: &[T],
    level: T,
    e_k: &[T],
    segs: usize,
) -> Result<(Vec<Vec<T>>, Vec<T>, usize)> {
    let up = segs / 2;
    let out = (segs / 8).max(1);
    let back = (segs / 8).max(1);
    let across = segs - up - out - back;
    let lerp = |a: &[T], b: &[T], w: T| -> Vec<T> { a.iter().zip(b).map(|(&x, &y)| x + w * (y - x)).collect() };
    let zero = vec![T::zero(); peak.len()];
    let mut radius = T::lit(2.0);
    loop {
        let far_peak = scale(radius, peak);
        let far_end = scale(radius, e_k);
        let mut points = Vec::with_capacity(segs + 1);
        for j in 0..up {
            points.push(lerp(&zero, peak, T::from_count(j) / T::from_count(up)));
        }
        for j in 0..out {
            points.push(lerp(peak, &far_peak, T::from_count(j) / T::from_count(out)));
        }
        for j in 0..across {
            points.push(lerp(&far_peak, &far_end, T::from_count(j) / T::from_count(across)));
        }
        for j in 0..=back {
            points.push(lerp(&far_end, e_k, T::from_count(j) / T::from_count(back)));
        }
        let mut levels = points.iter().map(|q| act.value_raw(q)).collect::<Result<Vec<T>>>()?;
        levels[up] = level;
        let clear = levels.iter().enumerate().all(|(j, &v)| j == up || v < level);
        if clear || radius > T::lit(1_048_576.0) {
            return Ok((points, levels, up));
        }
        radius = radius + radius;
    }
}

/// Deforms the path `s -> s e_k` until the derivative at its highest point
/// is below `cfg.mp_tol`.
///
/// The path always runs out from the origin along a ray up to the maximum
/// of the action on that ray, and on to `e_k` through a region where the
/// action is lower. One iteration moves the peak `q` to `q - lambda d`, with
/// `d` the preconditioned descent direction, and re-aims the ray through the
/// moved point. `lambda` is chosen by backtracking so that the new peak level
/// drops by at least `1e-4 lambda |I'(q)|^2`, hence the recorded peak levels
/// are strictly decreasing.
pub fn mp_search<T: Scalar>(
    p: &Problem<T>,
    grid: PeriodicGrid<T>,
    e_k: &Trajectory<T>,
    cfg: &SolverConfig<T>,
) -> Result<PathState<T>> {
    cfg.validate()?;
    let act = DiscreteAction::new(p, grid)?;
    if e_k.grid() != &grid || e_k.dim() != p.dim() {
        return Err(Error::Grid("endpoint lives on a different grid".into()));
    }
    let dim = p.dim();
    let segs = cfg.path_points;
    let end = e_k.values();

    let Some((t0, level0)) = ray_max(&act, end, T::one())? else {
        let points: Vec<Vec<T>> = (0..=segs).map(|j| scale(T::from_count(j) / T::from_count(segs), end)).collect();
        let levels = points.iter().map(|q| act.value_raw(q)).collect::<Result<Vec<T>>>()?;
        let peak = argmax(&levels);
        let peak_grad_norm = descent(&act, &points[peak], cfg.precondition)?.1;
        return Ok(PathState {
            points: points.into_iter().map(|v| Trajectory::from_raw(grid, dim, v)).collect(),
            peak_history: vec![levels[peak]],
            levels,
            peak_index: peak,
            peak_grad_norm,
            iterations: 0,
            status: PathStatus::Degenerate,
        });
    };
    let mut peak = scale(t0, end);
    let mut level = level0;
    let mut history = vec![level];
    let mut status = PathStatus::MaxIters;
    let mut iterations = 0;
    let mut lambda = T::one();
    let c1 = T::lit(1e-4);
    let min_step = T::lit(1e-14);
    let (mut dir, mut gnorm) = descent(&act, &peak, cfg.precondition)?;
    loop {
        if gnorm <= cfg.mp_tol {
            status = PathStatus::Converged;
            break;
        }
        if iterations >= cfg.max_iters {
            break;
        }
        iterations += 1;
        // never move by more than half the distance to the origin
        let dir_norm = if cfg.precondition { energy_norm_raw(&grid, dim, &dir) } else { grid.h().sqrt() * sq_norm(&dir).sqrt() };
        let cap = T::lit(0.5) * energy_norm_raw(&grid, dim, &peak) / dir_norm.max(T::min_positive_value());
        let mut step = (lambda + lambda).min(cap);
        let accepted = loop {
            let moved: Vec<T> = peak.iter().zip(&dir).map(|(&q, &d)| q - step * d).collect();
            if let Some((t, value)) = ray_max(&act, &moved, T::one())? {
                if value <= level - c1 * step * gnorm * gnorm {
                    break Some((scale(t, &moved), value));
                }
            }
            step = step * T::lit(0.5);
            if step < min_step {
                break None;
            }
        };
        let Some((next, value)) = accepted else {
            status = PathStatus::Stalled;
            break;
        };
        lambda = step;
        peak = next;
        level = value;
        history.push(level);
        (dir, gnorm) = descent(&act, &peak, cfg.precondition)?;
    }
    let (points, levels, peak_index) = sample_path(&act, &peak, level, end, segs)?;
    Ok(PathState {
        points: points.into_iter().map(|v| Trajectory::from_raw(grid, dim, v)).collect(),
        levels,
        peak_index,
        peak_grad_norm: gnorm,
        iterations,
        status,
        peak_history: history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MpOnly,
    MpPlusNewton,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint<T> {
    #[serde(skip)]
    pub q: Trajectory<T>,
    pub level: T,
    pub grad_norm: T,
    pub residual_sup: T,
    pub iterations: usize,
    pub method: Method,
    pub converged: bool,
}

/// Damped Newton on `D2 q - q + a grad G(q) - f = 0` from `q0`.
///
/// The step is halved until the Euclidean residual norm decreases
/// sufficiently; if that fails the best iterate is returned unconverged.
pub fn newton_polish<T: Scalar>(
    p: &Problem<T>,
    grid: PeriodicGrid<T>,
    q0: &Trajectory<T>,
    cfg: &SolverConfig<T>,
) -> Result<CriticalPoint<T>> {
    cfg.validate()?;
    if q0.grid() != &grid || q0.dim() != p.dim() {
        return Err(Error::Grid("initial guess lives on a different grid".into()));
    }
    let act = DiscreteAction::new(p, grid)?;
    let diverged = T::lit(1e6);
    let mut q = q0.values().to_vec();
    let mut res = act.residual_raw(&q)?;
    let mut norm = sq_norm(&res).sqrt();
    let mut iterations = 0;
    let mut converged = max_abs(&res) <= cfg.newton_tol;
    while !converged && iterations < cfg.newton_max_iters {
        if max_abs(&res) > diverged {
            return Err(Error::Divergence { residual: max_abs(&res).as_f64() });
        }
        let rhs: Vec<T> = res.iter().map(|&r| -r).collect();
        let Ok(delta) = act.residual_jacobian(&q).solve(&rhs) else {
            break;
        };
        iterations += 1;
        let mut step = T::one();
        let accepted = loop {
            let trial: Vec<T> = q.iter().zip(&delta).map(|(&a, &d)| a + step * d).collect();
            if let Ok(r) = act.residual_raw(&trial) {
                let n = sq_norm(&r).sqrt();
                if n <= (T::one() - T::lit(1e-4) * step) * norm {
                    break Some((trial, r, n));
                }
            }
            step = step * T::lit(0.5);
            if step < T::lit(1.0 / 1_048_576.0) {
                break None;
            }
        };
        let Some((trial, r, n)) = accepted else {
            break;
        };
        q = trial;
        res = r;
        norm = n;
        converged = max_abs(&res) <= cfg.newton_tol;
    }
    let q = Trajectory::new(grid, p.dim(), q)?;
    let eval = act.evaluate(&q)?;
    Ok(CriticalPoint {
        level: eval.value,
        grad_norm: eval.grad_norm,
        residual_sup: eval.residual_sup,
        iterations,
        method: Method::MpPlusNewton,
        converged,
        q,
    })
}

/// Everything one mountain-pass solve at a fixed `k` produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution<T> {
    pub bump: BumpDatum<T>,
    pub path: PathState<T>,
    pub critical: CriticalPoint<T>,
}

/// Bump search on `k = 1` at the same spacing as `grid`, path search, then
/// Newton from the peak.
pub fn solve<T: Scalar>(p: &Problem<T>, grid: PeriodicGrid<T>, cfg: &SolverConfig<T>) -> Result<Solution<T>> {
    let base_nodes = ((T::lit(2.0) / grid.h()).round().to_usize().unwrap_or(0) + 1) & !1;
    let base = PeriodicGrid::new(T::one(), base_nodes.max(crate::grid::MIN_NODES))?;
    let bump = find_zeta(p, base, cfg)?;
    solve_with_bump(p, grid, bump, cfg)
}

pub fn solve_with_bump<T: Scalar>(
    p: &Problem<T>,
    grid: PeriodicGrid<T>,
    bump: BumpDatum<T>,
    cfg: &SolverConfig<T>,
) -> Result<Solution<T>> {
    let e_k = bump.endpoint(grid)?;
    let path = mp_search(p, grid, &e_k, cfg)?;
    let act = DiscreteAction::new(p, grid)?;
    let peak = path.peak().clone();
    let eval = act.evaluate(&peak)?;
    let critical = if eval.residual_sup <= cfg.newton_tol {
        CriticalPoint {
            level: eval.value,
            grad_norm: eval.grad_norm,
            residual_sup: eval.residual_sup,
            iterations: 0,
            method: Method::MpOnly,
            converged: true,
            q: peak,
        }
    } else {
        newton_polish(p, grid, &peak, cfg)?
    };
    Ok(Solution { bump, path, critical })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{action_value, pairing_identity_check};
    use crate::problem::{Builtin, SamplingConfig};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn base() -> PeriodicGrid<f64> {
        PeriodicGrid::with_density(1.0, 64).unwrap()
    }

    #[test]
    fn bump_basics() {
        let g = base();
        assert_eq!(build_bump(g, 1, 0.0).unwrap().sup_abs(), 0.0);
        let e1 = build_bump(g, 1, 1.0).unwrap();
        assert_abs_diff_eq!(e1.energy_norm(), (1.0 + PI * PI / 4.0).sqrt(), epsilon = 1e-2);
        // central differences see the seam kink of the k = 1 grid; O(h) defect
        let fine = build_bump(PeriodicGrid::new(1.0, 512).unwrap(), 1, 1.0).unwrap();
        assert_abs_diff_eq!(fine.ek_norm(), (1.0 + PI * PI / 4.0).sqrt(), epsilon = 1e-2);
        assert!(matches!(
            build_bump(PeriodicGrid::new(0.5, 64).unwrap(), 1, 1.0),
            Err(Error::Domain(_))
        ));
        let two = build_bump(g, 2, 3.0).unwrap();
        assert!(two.values().chunks(2).all(|x| x[1] == 0.0));
    }

    #[test]
    fn bump_is_k_invariant() {
        let p = Problem::builtin(Builtin::Example1Compliant);
        let e1 = build_bump(base(), 1, 2.0).unwrap();
        let i1 = action_value(&p, &e1).unwrap();
        for k in [5.0, 10.0, 40.0] {
            let ek = build_bump(PeriodicGrid::with_density(k, 64).unwrap(), 1, 2.0).unwrap();
            assert_abs_diff_eq!(ek.energy_norm(), e1.energy_norm(), epsilon = 1e-12);
            assert_abs_diff_eq!(action_value(&p, &ek).unwrap(), i1, epsilon = 1e-12);
        }
    }

    #[test]
    fn zeta_for_the_compliant_example() {
        let p = Problem::builtin(Builtin::Example1Compliant);
        let b = find_zeta(&p, base(), &SolverConfig::default()).unwrap();
        assert!(b.zeta <= 4.0);
        assert!(b.e1_norm > std::f64::consts::FRAC_1_SQRT_2 && b.e1_action < 0.0);
        // every smaller power of two fails one of the two conditions
        let mut z = 1.0;
        while z < b.zeta {
            let e = build_bump(base(), 1, z).unwrap();
            assert!(action_value(&p, &e).unwrap() >= 0.0 || e.energy_norm() <= std::f64::consts::FRAC_1_SQRT_2);
            z *= 2.0;
        }
        let consts = p.derived_constants(&SamplingConfig::default()).unwrap();
        assert!(b.m0 >= consts.alpha);
    }

    #[test]
    fn tiny_coefficient_needs_larger_zeta() {
        let p = Problem::builtin(Builtin::Example1Compliant).with_coefficient("tiny", |_| 1e-6);
        let b = find_zeta(&p, base(), &SolverConfig::default()).unwrap();
        assert!(b.zeta >= 256.0);
        assert!(b.e1_action < 0.0);
    }

    #[test]
    fn zeta_cap_is_a_geometry_failure() {
        let p = Problem::builtin(Builtin::Example1Compliant).with_coefficient("flat", |_| 0.0);
        let cfg = SolverConfig { zeta_cap: 64.0, ..SolverConfig::default() };
        assert!(matches!(find_zeta(&p, base(), &cfg), Err(Error::GeometryFailure { .. })));
    }

    #[test]
    fn zero_coefficient_path_is_degenerate() {
        let p = Problem::builtin(Builtin::Example1).with_coefficient("flat", |_| 0.0).unforced();
        let g = PeriodicGrid::with_density(2.0, 32).unwrap();
        let e = build_bump(g, 1, 4.0).unwrap();
        let path = mp_search(&p, g, &e, &SolverConfig::default()).unwrap();
        assert_eq!(path.status, PathStatus::Degenerate);
    }

    #[test]
    fn compliant_saddle_on_a_small_domain() {
        let p = Problem::builtin(Builtin::Example1Compliant);
        let g = PeriodicGrid::with_density(3.0, 32).unwrap();
        let sol = solve(&p, g, &SolverConfig::default()).unwrap();
        assert!(sol.path.converged(), "{:?}", sol.path.status);
        assert!(sol.path.peak_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let cp = &sol.critical;
        assert!(cp.converged && cp.residual_sup <= 1e-8);
        let consts = p.derived_constants(&SamplingConfig::default()).unwrap();
        assert!(cp.level >= consts.alpha - 1e-6 && cp.level <= sol.bump.m0 + 1e-6, "{}", cp.level);
        assert!(pairing_identity_check(&p, &cp.q).unwrap() <= 1e-10);
        let h = g.h();
        assert!(cp.grad_norm <= h * (g.nodes() as f64).sqrt() * cp.residual_sup * (1.0 + 1e-12));
    }

    #[test]
    fn iterates_stay_reflection_symmetric() {
        let p = Problem::builtin(Builtin::Example1Compliant);
        let g = PeriodicGrid::with_density(3.0, 32).unwrap();
        let cfg = SolverConfig { max_iters: 25, ..SolverConfig::default() };
        let bump = find_zeta(&p, PeriodicGrid::with_density(1.0, 32).unwrap(), &cfg).unwrap();
        let path = mp_search(&p, g, &bump.endpoint(g).unwrap(), &cfg).unwrap();
        for q in &path.points {
            let r = q.reflect();
            assert!(q.values().iter().zip(r.values()).all(|(a, b): (&f64, &f64)| (a - b).abs() <= 1e-10));
        }
        let cfg = SolverConfig { newton_max_iters: 2, ..cfg };
        let cp = newton_polish(&p, g, path.peak(), &cfg).unwrap();
        let r = cp.q.reflect();
        assert!(cp.q.values().iter().zip(r.values()).all(|(a, b): (&f64, &f64)| (a - b).abs() <= 1e-10));
    }

    #[test]
    fn newton_from_origin_on_unforced_problem() {
        let p = Problem::builtin(Builtin::Example1).unforced();
        let g = PeriodicGrid::with_density(2.0, 32).unwrap();
        let cp = newton_polish(&p, g, &Trajectory::zeros(g, 1), &SolverConfig::default()).unwrap();
        assert!(cp.converged && cp.iterations == 0);
        assert_eq!(cp.level, 0.0);
    }

    #[test]
    fn newton_divergence_is_reported() {
        let p = Problem::builtin(Builtin::Example1);
        let g = PeriodicGrid::with_density(2.0, 32).unwrap();
        let wild = Trajectory::from_scalar_fn(g, |t: f64| 1e3 * (t * 40.0).sin()).unwrap();
        assert!(matches!(
            newton_polish(&p, g, &wild, &SolverConfig::default()),
            Err(Error::Divergence { .. })
        ));
    }
}
