//! The discrete action on a periodic grid and its derivatives.
//!
//! On a grid with spacing `h` the action is
//!
//! ```text
//! I(q) = h * sum_i [ |q_i|^2 / 2 + |(q_{i+1} - q_i) / h|^2 / 2 - a(t_i) G(q_i) + (f(t_i), q_i) ]
//! ```
//!
//! The kinetic term uses forward differences, so summation by parts gives
//! the compact gradient `h * (-D2 q + q - a grad G(q) + f)` with `D2` the
//! periodic second difference. Zeros of that gradient are exactly the
//! solutions of the discrete periodic boundary value problem
//! `D2 q - q + a grad G(q) = f`.
//!
//! The periodic extensions of `a` and `f` are never evaluated outside
//! `[-k, k)` since every node lies in that interval.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{second_difference, PeriodicGrid, Trajectory};
use crate::linalg::CyclicBlockTridiagonal;
use crate::problem::Problem;
use crate::scalar::{dot, max_abs, sq_norm, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionEval<T> {
    pub value: T,
    #[serde(skip)]
    pub grad: Vec<T>,
    pub grad_norm: T,
    pub residual_sup: T,
}

/// A problem bound to one grid, with `a` and `f` cached at the nodes.
#[derive(Debug, Clone)]
pub struct DiscreteAction<'p, T> {
    problem: &'p Problem<T>,
    grid: PeriodicGrid<T>,
    a: Vec<T>,
    f: Vec<T>,
}

impl<'p, T: Scalar> DiscreteAction<'p, T> {
    pub fn new(problem: &'p Problem<T>, grid: PeriodicGrid<T>) -> Result<Self> {
        let n = problem.dim();
        let mut a = Vec::with_capacity(grid.nodes());
        let mut f = vec![T::zero(); grid.nodes() * n];
        for i in 0..grid.nodes() {
            let t = grid.t(i);
            let at = problem.a(t);
            if !at.is_finite() {
                return Err(Error::NodeEvaluation { what: "a(t)", index: i });
            }
            a.push(at);
            let slot = &mut f[i * n..(i + 1) * n];
            problem.forcing_into(t, slot);
            if slot.iter().any(|v| !v.is_finite()) {
                return Err(Error::NodeEvaluation { what: "f(t)", index: i });
            }
        }
        Ok(Self { problem, grid, a, f })
    }

    pub fn problem(&self) -> &'p Problem<T> {
        self.problem
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }

    pub fn coefficient(&self) -> &[T] {
        &self.a
    }

    pub fn forcing(&self) -> &[T] {
        &self.f
    }

    fn check(&self, q: &Trajectory<T>) -> Result<()> {
        if q.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: q.dim() });
        }
        if q.grid() != &self.grid {
            return Err(Error::Grid("trajectory lives on a different grid".into()));
        }
        Ok(())
    }

    /// `I(q)` for raw node-major values.
    pub(crate) fn value_raw(&self, q: &[T]) -> Result<T> {
        let n = self.dim();
        let nodes = self.grid.nodes();
        let h = self.grid.h();
        let inv_h = T::one() / h;
        let half = T::lit(0.5);
        let mut kinetic = T::zero();
        let mut potential = T::zero();
        let mut work = T::zero();
        for i in 0..nodes {
            let x = &q[i * n..(i + 1) * n];
            let next = &q[((i + 1) % nodes) * n..((i + 1) % nodes + 1) * n];
            for c in 0..n {
                let d = (next[c] - x[c]) * inv_h;
                kinetic += x[c] * x[c] + d * d;
            }
            let g = self.problem.g(x);
            if !g.is_finite() {
                return Err(Error::NodeEvaluation { what: "G(q)", index: i });
            }
            potential += self.a[i] * g;
            work += dot(&self.f[i * n..(i + 1) * n], x);
        }
        Ok(h * (half * kinetic - potential + work))
    }

    /// Euclidean gradient `h (-D2 q + q - a grad G(q) + f)` of [`Self::value_raw`].
    pub(crate) fn gradient_raw(&self, q: &[T]) -> Result<Vec<T>> {
        let mut r = self.residual_raw(q)?;
        let h = self.grid.h();
        r.iter_mut().for_each(|v| *v = -h * *v);
        Ok(r)
    }

    /// `D2 q - q + a grad G(q) - f` at every node.
    pub(crate) fn residual_raw(&self, q: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        let mut out = second_difference(q, n, self.grid.h());
        let mut grad = vec![T::zero(); n];
        for i in 0..self.grid.nodes() {
            let x = &q[i * n..(i + 1) * n];
            self.problem.grad_g_into(x, &mut grad);
            if grad.iter().any(|v| !v.is_finite()) {
                return Err(Error::NodeEvaluation { what: "grad G(q)", index: i });
            }
            for c in 0..n {
                out[i * n + c] += self.a[i] * grad[c] - x[c] - self.f[i * n + c];
            }
        }
        Ok(out)
    }

    /// Row-major Hessian blocks of `a_i G` at every node; `None` when `G`
    /// has no closed-form Hessian.
    fn potential_hessians(&self, q: &[T]) -> Option<Vec<T>> {
        let n = self.dim();
        let nn = n * n;
        let mut out = vec![T::zero(); self.grid.nodes() * nn];
        for i in 0..self.grid.nodes() {
            let block = &mut out[i * nn..(i + 1) * nn];
            if !self.problem.hess_g_into(&q[i * n..(i + 1) * n], block) {
                return None;
            }
            block.iter_mut().for_each(|v| *v *= self.a[i]);
        }
        Some(out)
    }

    /// Hessian blocks by central differences of `grad G`, for problems
    /// without a closed-form Hessian.
    fn potential_hessians_fd(&self, q: &[T]) -> Vec<T> {
        let n = self.dim();
        let nn = n * n;
        let mut out = vec![T::zero(); self.grid.nodes() * nn];
        let mut x = vec![T::zero(); n];
        let mut gp = vec![T::zero(); n];
        let mut gm = vec![T::zero(); n];
        for i in 0..self.grid.nodes() {
            x.copy_from_slice(&q[i * n..(i + 1) * n]);
            for c in 0..n {
                let eps = T::lit(1e-6) * (T::one() + x[c].abs());
                let orig = x[c];
                x[c] = orig + eps;
                self.problem.grad_g_into(&x, &mut gp);
                x[c] = orig - eps;
                self.problem.grad_g_into(&x, &mut gm);
                x[c] = orig;
                for r in 0..n {
                    out[i * nn + r * n + c] = self.a[i] * (gp[r] - gm[r]) / (eps + eps);
                }
            }
        }
        out
    }

    /// Jacobian of the residual map: `D2 - I + diag(a Hess G(q))`.
    pub(crate) fn residual_jacobian(&self, q: &[T]) -> CyclicBlockTridiagonal<T> {
        let n = self.dim();
        let nn = n * n;
        let nodes = self.grid.nodes();
        let h = self.grid.h();
        let inv_h2 = T::one() / (h * h);
        let mut diag = self
            .potential_hessians(q)
            .unwrap_or_else(|| self.potential_hessians_fd(q));
        let mut off = vec![T::zero(); nodes * nn];
        let centre = -(inv_h2 + inv_h2) - T::one();
        for i in 0..nodes {
            for c in 0..n {
                diag[i * nn + c * n + c] += centre;
                off[i * nn + c * n + c] = inv_h2;
            }
        }
        CyclicBlockTridiagonal::new(n, off.clone(), diag, off)
    }

    /// The Gram operator `-D2 + I` of the discrete `E_k` inner product
    /// (up to the factor `h`).
    pub(crate) fn gram(&self) -> CyclicBlockTridiagonal<T> {
        let n = self.dim();
        let nn = n * n;
        let nodes = self.grid.nodes();
        let h = self.grid.h();
        let inv_h2 = T::one() / (h * h);
        let mut diag = vec![T::zero(); nodes * nn];
        let mut off = vec![T::zero(); nodes * nn];
        for i in 0..nodes {
            for c in 0..n {
                diag[i * nn + c * n + c] = inv_h2 + inv_h2 + T::one();
                off[i * nn + c * n + c] = -inv_h2;
            }
        }
        CyclicBlockTridiagonal::new(n, off.clone(), diag, off)
    }

    pub fn value(&self, q: &Trajectory<T>) -> Result<T> {
        self.check(q)?;
        self.value_raw(q.values())
    }

    pub fn gradient(&self, q: &Trajectory<T>) -> Result<Vec<T>> {
        self.check(q)?;
        self.gradient_raw(q.values())
    }

    pub fn residual(&self, q: &Trajectory<T>) -> Result<Trajectory<T>> {
        self.check(q)?;
        Ok(Trajectory::from_raw(self.grid, self.dim(), self.residual_raw(q.values())?))
    }

    pub fn evaluate(&self, q: &Trajectory<T>) -> Result<ActionEval<T>> {
        self.check(q)?;
        let value = self.value_raw(q.values())?;
        let residual = self.residual_raw(q.values())?;
        let h = self.grid.h();
        let grad: Vec<T> = residual.iter().map(|&r| -h * r).collect();
        Ok(ActionEval {
            value,
            grad_norm: sq_norm(&grad).sqrt(),
            residual_sup: max_abs(&residual),
            grad,
        })
    }

    /// `|<grad, q> - (||q||^2 - int (a grad G(q), q) + int (f, q))|` with the
    /// forward-difference energy norm, the norm of the discrete action.
    pub fn pairing_discrepancy(&self, q: &Trajectory<T>) -> Result<T> {
        self.check(q)?;
        let n = self.dim();
        let h = self.grid.h();
        let grad = self.gradient_raw(q.values())?;
        let lhs = dot(&grad, q.values());
        let mut nonlinear = T::zero();
        let mut work = T::zero();
        let mut g = vec![T::zero(); n];
        for i in 0..self.grid.nodes() {
            let x = q.node(i);
            self.problem.grad_g_into(x, &mut g);
            nonlinear += self.a[i] * dot(&g, x);
            work += dot(&self.f[i * n..(i + 1) * n], x);
        }
        let rhs = q.energy_norm().powi(2) - h * nonlinear + h * work;
        Ok((lhs - rhs).abs())
    }

    /// Second derivative of the action applied to `v`.
    pub fn hess_vec(&self, q: &Trajectory<T>, v: &Trajectory<T>) -> Result<Vec<T>> {
        self.check(q)?;
        self.check(v)?;
        let n = self.dim();
        let nn = n * n;
        let h = self.grid.h();
        match self.potential_hessians(q.values()) {
            Some(blocks) => {
                let d2v = second_difference(v.values(), n, h);
                let mut out = vec![T::zero(); v.values().len()];
                for i in 0..self.grid.nodes() {
                    for r in 0..n {
                        let mut curv = T::zero();
                        for c in 0..n {
                            curv += blocks[i * nn + r * n + c] * v.values()[i * n + c];
                        }
                        out[i * n + r] = h * (-d2v[i * n + r] + v.values()[i * n + r] - curv);
                    }
                }
                Ok(out)
            }
            None => {
                let qn = sq_norm(q.values()).sqrt();
                let vn = sq_norm(v.values()).sqrt();
                let eps = T::lit(1e-6) * (T::one() + qn) / (T::one() + vn);
                let shifted = |s: T| -> Vec<T> {
                    q.values().iter().zip(v.values()).map(|(&a, &b)| a + s * b).collect()
                };
                let gp = self.gradient_raw(&shifted(eps))?;
                let gm = self.gradient_raw(&shifted(-eps))?;
                Ok(gp.iter().zip(&gm).map(|(&a, &b)| (a - b) / (eps + eps)).collect())
            }
        }
    }
}

pub fn action_value<T: Scalar>(p: &Problem<T>, q: &Trajectory<T>) -> Result<T> {
    DiscreteAction::new(p, *q.grid())?.value(q)
}

pub fn action_gradient<T: Scalar>(p: &Problem<T>, q: &Trajectory<T>) -> Result<Vec<T>> {
    DiscreteAction::new(p, *q.grid())?.gradient(q)
}

pub fn evaluate<T: Scalar>(p: &Problem<T>, q: &Trajectory<T>) -> Result<ActionEval<T>> {
    DiscreteAction::new(p, *q.grid())?.evaluate(q)
}

pub fn pairing_identity_check<T: Scalar>(p: &Problem<T>, q: &Trajectory<T>) -> Result<T> {
    DiscreteAction::new(p, *q.grid())?.pairing_discrepancy(q)
}

pub fn el_residual<T: Scalar>(p: &Problem<T>, q: &Trajectory<T>) -> Result<Trajectory<T>> {
    DiscreteAction::new(p, *q.grid())?.residual(q)
}

pub fn hess_vec<T: Scalar>(p: &Problem<T>, q: &Trajectory<T>, v: &Trajectory<T>) -> Result<Vec<T>> {
    DiscreteAction::new(p, *q.grid())?.hess_vec(q, v)
}
