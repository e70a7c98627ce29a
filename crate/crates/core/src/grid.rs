//! Uniform periodic grids on `[-k, k)` and grid-sampled trajectories.
//!
//! A [`Trajectory`] is the discrete stand-in for an element of the space of
//! `2k`-periodic `W^{1,2}` curves: one point of `R^n` per node, with the node
//! at `+k` identified with the node at `-k`. Integrals use the periodic
//! trapezoid rule, which weights every node by `h`.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::scalar::{max_abs, sq_norm, Scalar};

pub const MIN_NODES: usize = 16;
pub const MAX_NODES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid<T> {
    k: T,
    nodes: usize,
    h: T,
}

impl<T: Scalar> PeriodicGrid<T> {
    /// Grid with `nodes` points on `[-k, k)`. `nodes` must be even and at
    /// least [`MIN_NODES`].
    pub fn new(k: T, nodes: usize) -> Result<Self> {
        if !(k.is_finite() && k > T::zero()) {
            return Err(Error::Grid(format!("half-period must be positive, got {k}")));
        }
        if nodes < MIN_NODES || nodes % 2 != 0 {
            return Err(Error::Grid(format!(
                "node count must be even and >= {MIN_NODES}, got {nodes}"
            )));
        }
        let h = (k + k) / T::from_count(nodes);
        Ok(Self { k, nodes, h })
    }

    /// Grid with `nodes_per_unit * k` nodes (rounded up to even, clamped to
    /// `[MIN_NODES, MAX_NODES]`), so the spacing `2 / nodes_per_unit` is the
    /// same for every `k` below the cap.
    pub fn with_density(k: T, nodes_per_unit: usize) -> Result<Self> {
        if nodes_per_unit == 0 {
            return Err(Error::Grid("nodes_per_unit must be positive".into()));
        }
        let raw = (k * T::from_count(nodes_per_unit)).round();
        let mut nodes = raw.to_usize().unwrap_or(MAX_NODES);
        if nodes % 2 == 1 {
            nodes += 1;
        }
        Self::new(k, nodes.clamp(MIN_NODES, MAX_NODES))
    }

    #[inline]
    pub fn k(&self) -> T {
        self.k
    }

    #[inline]
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    #[inline]
    pub fn h(&self) -> T {
        self.h
    }

    #[inline]
    pub fn t(&self, i: usize) -> T {
        -self.k + T::from_count(i) * self.h
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.nodes).map(move |i| self.t(i))
    }

    /// Node index of `-t_i` under the periodic identification.
    #[inline]
    pub fn reflect_index(&self, i: usize) -> usize {
        (self.nodes - i) % self.nodes
    }

    /// Periodic trapezoid rule `h * sum(samples)`.
    ///
    /// # Panics
    /// If `samples.len()` differs from the node count.
    pub fn quadrature(&self, samples: &[T]) -> T {
        assert_eq!(samples.len(), self.nodes, "quadrature sample count");
        self.h * samples.iter().copied().sum::<T>()
    }
}

/// Uniform samples of a trajectory and its first two differences at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample<T> {
    pub t: T,
    pub q: Vec<T>,
    pub dq: Vec<T>,
    pub ddq: Vec<T>,
}

/// Grid-sampled curve `q: nodes -> R^n`, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    grid: PeriodicGrid<T>,
    dim: usize,
    values: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(grid: PeriodicGrid<T>, dim: usize, values: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension { expected: 1, got: 0 });
        }
        if values.len() != grid.nodes() * dim {
            return Err(Error::Dimension {
                expected: grid.nodes() * dim,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NodeEvaluation {
                what: "trajectory value",
                index: pos / dim,
            });
        }
        Ok(Self { grid, dim, values })
    }

    /// Wraps values produced by solver arithmetic that already keeps them finite.
    pub(crate) fn from_raw(grid: PeriodicGrid<T>, dim: usize, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.nodes() * dim);
        Self { grid, dim, values }
    }

    pub fn zeros(grid: PeriodicGrid<T>, dim: usize) -> Self {
        Self::from_raw(grid, dim, vec![T::zero(); grid.nodes() * dim])
    }

    /// Samples `fill(t_i, out_i)` at every node.
    pub fn from_fn(grid: PeriodicGrid<T>, dim: usize, mut fill: impl FnMut(T, &mut [T])) -> Result<Self> {
        let mut values = vec![T::zero(); grid.nodes() * dim];
        for (i, chunk) in values.chunks_exact_mut(dim).enumerate() {
            fill(grid.t(i), chunk);
        }
        Self::new(grid, dim, values)
    }

    pub fn from_scalar_fn(grid: PeriodicGrid<T>, mut value: impl FnMut(T) -> T) -> Result<Self> {
        Self::from_fn(grid, 1, |t, out| out[0] = value(t))
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn node(&self, i: usize) -> &[T] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Central periodic difference `(q_{i+1} - q_{i-1}) / 2h`.
    pub fn diff1(&self) -> Self {
        let n = self.grid.nodes();
        let d = self.dim;
        let scale = T::one() / (self.grid.h() + self.grid.h());
        let mut out = vec![T::zero(); self.values.len()];
        for i in 0..n {
            let next = (i + 1) % n;
            let prev = (i + n - 1) % n;
            for c in 0..d {
                out[i * d + c] = (self.values[next * d + c] - self.values[prev * d + c]) * scale;
            }
        }
        Self::from_raw(self.grid, d, out)
    }

    /// Second difference `(q_{i+1} - 2 q_i + q_{i-1}) / h^2`, periodic.
    pub fn diff2(&self) -> Self {
        Self::from_raw(self.grid, self.dim, second_difference(&self.values, self.dim, self.grid.h()))
    }

    /// Forward difference `(q_{i+1} - q_i) / h`, periodic. Its squared
    /// `L^2` norm is the kinetic part of the discrete action.
    pub fn forward_diff(&self) -> Self {
        let n = self.grid.nodes();
        let d = self.dim;
        let inv_h = T::one() / self.grid.h();
        let mut out = vec![T::zero(); self.values.len()];
        for i in 0..n {
            let next = (i + 1) % n;
            for c in 0..d {
                out[i * d + c] = (self.values[next * d + c] - self.values[i * d + c]) * inv_h;
            }
        }
        Self::from_raw(self.grid, d, out)
    }

    pub fn l2_norm(&self) -> T {
        (self.grid.h() * sq_norm(&self.values)).sqrt()
    }

    /// Max over nodes of the Euclidean norm `|q_i|`.
    pub fn linf_norm(&self) -> T {
        self.values
            .chunks_exact(self.dim)
            .map(|x| sq_norm(x).sqrt())
            .fold(T::zero(), T::max)
    }

    /// `E_k` norm with the central first difference standing in for `q'`.
    pub fn ek_norm(&self) -> T {
        let d1 = self.diff1();
        (self.grid.h() * (sq_norm(&self.values) + sq_norm(&d1.values))).sqrt()
    }

    /// `E_k` norm with forward differences; this is the norm whose square
    /// appears in the discrete action, and it dominates [`Self::ek_norm`].
    pub fn energy_norm(&self) -> T {
        let fd = self.forward_diff();
        (self.grid.h() * (sq_norm(&self.values) + sq_norm(&fd.values))).sqrt()
    }

    /// Time reversal `q_i -> q_{N-i mod N}`, i.e. `q(t) -> q(-t)`.
    pub fn reflect(&self) -> Self {
        let n = self.grid.nodes();
        let d = self.dim;
        let mut out = vec![T::zero(); self.values.len()];
        for i in 0..n {
            let j = self.grid.reflect_index(i);
            out[i * d..(i + 1) * d].copy_from_slice(&self.values[j * d..(j + 1) * d]);
        }
        Self::from_raw(self.grid, d, out)
    }

    /// Linear interpolation at `t in [-k, k]`; `t = k` reads the node at `-k`.
    fn interpolate_into(&self, t: T, out: &mut [T]) {
        interpolate(&self.values, self.dim, &self.grid, t, out);
    }

    /// Transfers the trajectory onto a grid with a larger (or equal) half
    /// period: linear interpolation on `[-k_src, k_src]`, zero outside.
    pub fn resample(&self, target: &PeriodicGrid<T>) -> Result<Self> {
        let k_src = self.grid.k();
        if target.k() < k_src {
            return Err(Error::UnsupportedRestriction {
                source_k: k_src.as_f64(),
                target_k: target.k().as_f64(),
            });
        }
        let slack = self.grid.h() * T::lit(1e-9);
        let d = self.dim;
        let mut values = vec![T::zero(); target.nodes() * d];
        for (i, chunk) in values.chunks_exact_mut(d).enumerate() {
            let t = target.t(i);
            if t >= -k_src - slack && t <= k_src + slack {
                self.interpolate_into(t.max(-k_src).min(k_src), chunk);
            }
        }
        Ok(Self::from_raw(*target, d, values))
    }

    /// `samples` uniform points on `[-w, w]` with interpolated values and
    /// first/second differences, for `C^2` comparisons on a fixed window.
    pub fn restrict_to_window(&self, w: T, samples: usize) -> Result<Vec<WindowSample<T>>> {
        let k = self.grid.k();
        if !(w > T::zero()) || w > k {
            return Err(Error::Window { w: w.as_f64(), k: k.as_f64() });
        }
        if samples < 2 {
            return Err(Error::Domain(format!("window needs at least 2 samples, got {samples}")));
        }
        let d1 = self.diff1();
        let d2 = self.diff2();
        let step = (w + w) / T::from_count(samples - 1);
        Ok((0..samples)
            .map(|j| {
                let t = if j == samples - 1 { w } else { -w + T::from_count(j) * step };
                let mut s = WindowSample {
                    t,
                    q: vec![T::zero(); self.dim],
                    dq: vec![T::zero(); self.dim],
                    ddq: vec![T::zero(); self.dim],
                };
                self.interpolate_into(t, &mut s.q);
                d1.interpolate_into(t, &mut s.dq);
                d2.interpolate_into(t, &mut s.ddq);
                s
            })
            .collect())
    }

    /// Max of `|q_i|` and `|dq_i|` over nodes with `|t_i| >= (1 - margin) k`.
    pub fn tail_max(&self, margin: T) -> Result<T> {
        if !(margin > T::zero() && margin < T::lit(0.5)) {
            return Err(Error::Domain(format!("tail margin must lie in (0, 1/2), got {margin}")));
        }
        let cut = (T::one() - margin) * self.grid.k();
        let d1 = self.diff1();
        let mut worst = T::zero();
        for i in 0..self.grid.nodes() {
            if self.grid.t(i).abs() >= cut {
                worst = worst
                    .max(sq_norm(self.node(i)).sqrt())
                    .max(sq_norm(d1.node(i)).sqrt());
            }
        }
        Ok(worst)
    }

    pub fn sup_abs(&self) -> T {
        max_abs(&self.values)
    }

    /// CSV with header `t,q_1..q_n,dq_1..dq_n,ddq_1..ddq_n`, preceded by a
    /// `#` comment carrying the grid metadata. Numbers use 17 significant
    /// digits so output is reproducible byte for byte.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.dim;
        writeln!(
            w,
            "# k={:.16e}, N={}, h={:.16e}",
            self.grid.k().as_f64(),
            self.grid.nodes(),
            self.grid.h().as_f64()
        )?;
        let mut header = vec!["t".to_string()];
        for prefix in ["q", "dq", "ddq"] {
            header.extend((1..=d).map(|c| format!("{prefix}_{c}")));
        }
        writeln!(w, "{}", header.join(","))?;
        let d1 = self.diff1();
        let d2 = self.diff2();
        for i in 0..self.grid.nodes() {
            write!(w, "{:.16e}", self.grid.t(i).as_f64())?;
            for src in [self, &d1, &d2] {
                for &v in src.node(i) {
                    write!(w, ",{:.16e}", v.as_f64())?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub(crate) fn second_difference<T: Scalar>(values: &[T], dim: usize, h: T) -> Vec<T> {
    let n = values.len() / dim;
    let inv_h2 = T::one() / (h * h);
    let two = T::lit(2.0);
    let mut out = vec![T::zero(); values.len()];
    for i in 0..n {
        let next = (i + 1) % n;
        let prev = (i + n - 1) % n;
        for c in 0..dim {
            out[i * dim + c] =
                (values[next * dim + c] - two * values[i * dim + c] + values[prev * dim + c]) * inv_h2;
        }
    }
    out
}

fn interpolate<T: Scalar>(values: &[T], dim: usize, grid: &PeriodicGrid<T>, t: T, out: &mut [T]) {
    let n = grid.nodes();
    let pos = (t + grid.k()) / grid.h();
    let base = pos.floor().max(T::zero()).min(T::from_count(n - 1));
    let i = base.to_usize().unwrap_or(0);
    let frac = (pos - base).max(T::zero()).min(T::one());
    let j = (i + 1) % n;
    for c in 0..dim {
        out[c] = (T::one() - frac) * values[i * dim + c] + frac * values[j * dim + c];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid(k: f64, n: usize) -> PeriodicGrid<f64> {
        PeriodicGrid::new(k, n).unwrap()
    }

    fn sin_pi(g: PeriodicGrid<f64>) -> Trajectory<f64> {
        Trajectory::from_scalar_fn(g, |t| (PI * t).sin()).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(PeriodicGrid::new(1.0, 15).is_err());
        assert!(PeriodicGrid::new(1.0, 18).is_ok());
        assert!(PeriodicGrid::new(1.0, 17).is_err());
        assert!(PeriodicGrid::new(0.0, 64).is_err());
        assert!(PeriodicGrid::new(-1.0, 64).is_err());
    }

    #[test]
    fn density_keeps_spacing_constant() {
        for k in [1.0, 5.0, 10.0, 40.0] {
            let g = PeriodicGrid::with_density(k, 64).unwrap();
            assert_eq!(g.nodes(), (64.0 * k) as usize);
            assert_abs_diff_eq!(g.h(), 1.0 / 32.0, epsilon = 1e-15);
            // h * N = 2k to the last place
            assert!((g.h() * g.nodes() as f64 - 2.0 * k).abs() <= f64::EPSILON * 2.0 * k);
        }
        assert_eq!(PeriodicGrid::with_density(4000.0, 64).unwrap().nodes(), MAX_NODES);
        assert_eq!(PeriodicGrid::<f64>::with_density(0.1, 64).unwrap().nodes(), MIN_NODES);
    }

    #[test]
    fn diff1_of_constant_and_sine() {
        let g = grid(1.0, 256);
        let c = Trajectory::from_scalar_fn(g, |_| 3.5).unwrap();
        assert!(c.diff1().sup_abs() == 0.0);
        let d = sin_pi(g).diff1();
        let h = g.h();
        let truncation = PI * (1.0 - (PI * h).sin() / (PI * h));
        for i in 0..g.nodes() {
            let t = g.t(i);
            // exact symbol of the central difference on sin
            assert_abs_diff_eq!(d.node(i)[0], (PI * h).sin() / h * (PI * t).cos(), epsilon = 1e-12);
            assert!((d.node(i)[0] - PI * (PI * t).cos()).abs() <= truncation + 1e-12);
        }
        // 2e-4 against the analytic derivative needs a finer grid than 256
        let fine = grid(1.0, 512);
        let d = sin_pi(fine).diff1();
        for i in 0..fine.nodes() {
            assert_abs_diff_eq!(d.node(i)[0], PI * (PI * fine.t(i)).cos(), epsilon = 2e-4);
        }
    }

    #[test]
    fn diff1_of_nonperiodic_data_jumps_at_seam() {
        let g = grid(1.0, 64);
        let d = Trajectory::from_scalar_fn(g, |t| t).unwrap().diff1();
        assert_abs_diff_eq!(d.node(10)[0], 1.0, epsilon = 1e-12);
        // q_{N-1} - q_1 spans almost the whole period across the seam
        assert!(d.node(0)[0] < -10.0);
    }

    #[test]
    fn diff2_of_trig() {
        let g = grid(1.0, 256);
        assert!(Trajectory::from_scalar_fn(g, |_| -2.0).unwrap().diff2().sup_abs() == 0.0);
        let s = sin_pi(g).diff2();
        let c = Trajectory::from_scalar_fn(g, |t| (PI * t).cos()).unwrap().diff2();
        for i in 0..g.nodes() {
            let t = g.t(i);
            assert_abs_diff_eq!(s.node(i)[0], -PI * PI * (PI * t).sin(), epsilon = 1e-3);
            assert_abs_diff_eq!(c.node(i)[0], -PI * PI * (PI * t).cos(), epsilon = 1e-3);
        }
    }

    #[test]
    fn quadrature_values() {
        let g = grid(1.0, 256);
        assert_abs_diff_eq!(g.quadrature(&vec![1.0; 256]), 2.0, epsilon = 1e-14);
        let s2: Vec<f64> = g.times().map(|t| (PI * t).sin().powi(2)).collect();
        assert_abs_diff_eq!(g.quadrature(&s2), 1.0, epsilon = 1e-10);
        let g = grid(10.0, 2048);
        let gauss: Vec<f64> = g.times().map(|t| (-t * t).exp()).collect();
        assert_abs_diff_eq!(g.quadrature(&gauss), PI.sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn quadrature_exact_on_trig_polynomials() {
        let g = grid(2.5, 64);
        let w = PI / 2.5;
        for m in 1..32usize {
            let samples: Vec<f64> = g.times().map(|t| (m as f64 * w * t).cos() + 0.5).collect();
            assert_abs_diff_eq!(g.quadrature(&samples), 2.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn norms_of_sine() {
        let q = sin_pi(grid(1.0, 256));
        assert_abs_diff_eq!(q.ek_norm(), (1.0 + PI * PI).sqrt(), epsilon = 1e-3);
        assert_abs_diff_eq!(q.l2_norm(), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(q.linf_norm(), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn norms_of_zero_and_constants() {
        let g = grid(3.0, 96);
        let z = Trajectory::zeros(g, 2);
        assert_eq!((z.ek_norm(), z.l2_norm(), z.linf_norm()), (0.0, 0.0, 0.0));
        let c = Trajectory::from_scalar_fn(g, |_| -0.75).unwrap();
        assert_abs_diff_eq!(c.l2_norm(), 0.75 * 6f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(c.linf_norm(), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn compact_bump_norm() {
        let exact = (1.0 + PI * PI / 4.0).sqrt();
        let bump = |t: f64| if t.abs() <= 1.0 { (PI * t / 2.0).cos() } else { 0.0 };
        // central differences halve the slope at the two kinks, an O(h) defect
        let g = PeriodicGrid::new(4.0, 512).unwrap();
        assert_abs_diff_eq!(Trajectory::from_scalar_fn(g, bump).unwrap().ek_norm(), exact, epsilon = 1e-2);
        let g = PeriodicGrid::with_density(4.0, 64).unwrap();
        assert_abs_diff_eq!(Trajectory::from_scalar_fn(g, bump).unwrap().energy_norm(), exact, epsilon = 1e-3);
    }

    #[test]
    fn ek_norm_splits_into_l2_parts() {
        let q = Trajectory::from_scalar_fn(grid(2.0, 64), |t| (t * 1.3).sin() + 0.2 * (3.0 * t).cos()).unwrap();
        let lhs = q.ek_norm().powi(2);
        let rhs = q.l2_norm().powi(2) + q.diff1().l2_norm().powi(2);
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-13 * lhs);
    }

    #[test]
    fn resample_zero_and_bump() {
        let small = PeriodicGrid::with_density(1.0, 64).unwrap();
        let big = PeriodicGrid::with_density(10.0, 64).unwrap();
        assert!(Trajectory::zeros(small, 1).resample(&big).unwrap().sup_abs() == 0.0);
        let e1 = Trajectory::from_scalar_fn(small, |t| 2.0 * (PI * t / 2.0).cos()).unwrap();
        let e10 = e1.resample(&big).unwrap();
        assert!(big.times().zip(e10.values()).all(|(t, &v)| t.abs() <= 1.0 || v == 0.0));
        // forward differences see the seam of the small grid exactly as the
        // two edges of the support on the large one
        assert_abs_diff_eq!(e10.energy_norm(), e1.energy_norm(), epsilon = 1e-12);
        // central differences do not; their O(h) defect needs a denser grid
        let small = PeriodicGrid::with_density(1.0, 1024).unwrap();
        let big = PeriodicGrid::with_density(10.0, 1024).unwrap();
        let e1 = Trajectory::from_scalar_fn(small, |t| (PI * t / 2.0).cos()).unwrap();
        assert_abs_diff_eq!(e1.resample(&big).unwrap().ek_norm(), e1.ek_norm(), epsilon = 1e-3);
    }

    #[test]
    fn resample_refines_within_h2() {
        let coarse = sin_pi(grid(1.0, 128));
        let fine_grid = grid(1.0, 256);
        let fine = coarse.resample(&fine_grid).unwrap();
        for i in 0..fine_grid.nodes() {
            assert!((fine.node(i)[0] - (PI * fine_grid.t(i)).sin()).abs() <= 1e-3);
        }
        // the even nodes coincide with coarse nodes
        for i in (0..fine_grid.nodes()).step_by(2) {
            assert_abs_diff_eq!(fine.node(i)[0], coarse.node(i / 2)[0], epsilon = 1e-15);
        }
    }

    #[test]
    fn resample_onto_smaller_grid_is_rejected() {
        let q = Trajectory::zeros(grid(5.0, 64), 1);
        assert!(matches!(q.resample(&grid(2.0, 64)), Err(Error::UnsupportedRestriction { .. })));
    }

    #[test]
    fn full_window_round_trips_nodes() {
        let g = grid(2.0, 64);
        let q = Trajectory::from_scalar_fn(g, |t| (PI * t / 2.0).sin() + 0.1).unwrap();
        let win = q.restrict_to_window(2.0, 65).unwrap();
        for (i, s) in win.iter().take(64).enumerate() {
            assert_abs_diff_eq!(s.t, g.t(i), epsilon = 1e-14);
            assert_abs_diff_eq!(s.q[0], q.node(i)[0], epsilon = 1e-12);
        }
        assert_abs_diff_eq!(win[64].q[0], q.node(0)[0], epsilon = 1e-12);
        assert!(Trajectory::zeros(g, 1)
            .restrict_to_window(1.5, 11)
            .unwrap()
            .iter()
            .all(|s| s.q[0] == 0.0 && s.dq[0] == 0.0 && s.ddq[0] == 0.0));
        assert!(matches!(q.restrict_to_window(2.5, 10), Err(Error::Window { .. })));
    }

    #[test]
    fn tail_of_compact_bump_vanishes() {
        let g = PeriodicGrid::with_density(10.0, 64).unwrap();
        let q = Trajectory::from_scalar_fn(g, |t: f64| if t.abs() <= 1.0 { (PI * t / 2.0).cos() } else { 0.0 }).unwrap();
        assert_eq!(q.tail_max(0.2).unwrap(), 0.0);
        assert_eq!(Trajectory::zeros(g, 1).tail_max(0.2).unwrap(), 0.0);
        assert!(q.tail_max(0.5).is_err());
    }

    #[test]
    fn csv_layout() {
        let q = Trajectory::from_fn(grid(1.0, 16), 2, |t, out| {
            out[0] = t;
            out[1] = -t;
        })
        .unwrap();
        let mut buf = Vec::new();
        q.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# k=1.0000000000000000e0, N=16, h="));
        assert_eq!(lines.next().unwrap(), "t,q_1,q_2,dq_1,dq_2,ddq_1,ddq_2");
        assert_eq!(lines.count(), 16);
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = grid(1.0, 16);
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(matches!(Trajectory::new(g, 1, v), Err(Error::NodeEvaluation { index: 3, .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let g = PeriodicGrid::<f32>::new(1.0, 256).unwrap();
        let q = Trajectory::from_scalar_fn(g, |t| (std::f32::consts::PI * t).sin()).unwrap();
        assert!((q.l2_norm() - 1.0).abs() < 1e-5);
    }
}
