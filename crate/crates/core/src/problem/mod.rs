//! Problem instances `q'' - q + a(t) grad G(q) = f(t)` and the constants the
//! existence argument is built from.

mod audit;
pub mod expr;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate;
use crate::scalar::{sq_norm, Scalar};
use expr::{Expr, Var};

pub use audit::{check_conditions, ConditionEntry, ConditionReport, Status};

pub type TimeFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
pub type ForcingFn<T> = Arc<dyn Fn(T, &mut [T]) + Send + Sync>;
pub type PotentialFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
/// Writes `grad G(x)` (length `n`) or `Hess G(x)` (row-major `n x n`).
pub type PotentialDerivFn<T> = Arc<dyn Fn(&[T], &mut [T]) + Send + Sync>;

/// A forced Lagrangian system with potential `a(t) G(q)` and forcing `f(t)`.
///
/// Immutable after construction and cheap to clone (the functions are
/// reference counted), so it can be shared freely across threads.
#[derive(Clone)]
pub struct Problem<T> {
    label: String,
    dim: usize,
    mu: T,
    t_support: T,
    a: TimeFn<T>,
    f: ForcingFn<T>,
    g: PotentialFn<T>,
    grad_g: PotentialDerivFn<T>,
    hess_g: Option<PotentialDerivFn<T>>,
    unforced: bool,
}

impl<T> fmt::Debug for Problem<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("mu", &self.mu)
            .field("t_support", &self.t_support)
            .field("has_hessian", &self.hess_g.is_some())
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> Problem<T> {
    pub fn builder(label: impl Into<String>, dim: usize) -> ProblemBuilder<T> {
        ProblemBuilder {
            label: label.into(),
            dim,
            mu: None,
            t_support: T::lit(12.0),
            a: None,
            f: None,
            g: None,
            grad_g: None,
            hess_g: None,
        }
    }

    pub fn builtin(id: Builtin) -> Self {
        let a_gauss: TimeFn<T> = Arc::new(|t: T| T::lit(0.2) * (-t * t).exp() + T::lit(0.1));
        let (label, a, amplitude): (&str, TimeFn<T>, f64) = match id {
            Builtin::Example1 => ("example1", a_gauss, 0.4),
            Builtin::Example1Compliant => ("example1_compliant", a_gauss, 0.05),
            Builtin::Example2 => (
                "example2",
                Arc::new(|t: T| t.atan() / T::PI() + T::lit(0.5)),
                0.5,
            ),
        };
        let amp = T::lit(amplitude);
        Self::builder(label, 1)
            .mu(T::lit(4.0))
            .coefficient_arc(a)
            .forcing(move |t: T, out: &mut [T]| out[0] = amp * (-t * t * T::lit(0.5)).exp())
            .potential(|x: &[T]| x[0].powi(4), |x: &[T], out: &mut [T]| out[0] = T::lit(4.0) * x[0].powi(3))
            .hessian(|x: &[T], out: &mut [T]| out[0] = T::lit(12.0) * x[0] * x[0])
            .support(T::lit(12.0))
            .build()
            .expect("built-in problems are well formed")
    }

    /// Parses a problem definition written as `key = value` text:
    ///
    /// ```toml
    /// label = "quartic"
    /// dim = 1
    /// mu = 4
    /// a = "0.2*exp(-t^2) + 0.1"
    /// f = "0.05*exp(-t^2/2)"      # or a list, one entry per component
    /// G = "q^4"
    /// t_support = 12
    /// ```
    ///
    /// The gradient and Hessian of `G` are derived symbolically.
    pub fn from_definition_str(src: &str) -> Result<Self> {
        let def: ProblemDefinition =
            toml::from_str(src).map_err(|e| Error::Config(format!("problem definition: {e}")))?;
        def.into_problem()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn t_support(&self) -> T {
        self.t_support
    }

    /// True when the forcing was declared identically zero.
    pub fn is_unforced(&self) -> bool {
        self.unforced
    }

    #[inline]
    pub fn a(&self, t: T) -> T {
        (self.a)(t)
    }

    #[inline]
    pub fn forcing_into(&self, t: T, out: &mut [T]) {
        (self.f)(t, out)
    }

    pub fn forcing(&self, t: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        self.forcing_into(t, &mut out);
        out
    }

    #[inline]
    pub fn g(&self, x: &[T]) -> T {
        (self.g)(x)
    }

    #[inline]
    pub fn grad_g_into(&self, x: &[T], out: &mut [T]) {
        (self.grad_g)(x, out)
    }

    pub fn grad_g(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        self.grad_g_into(x, &mut out);
        out
    }

    /// Writes the row-major Hessian of `G` and returns `true` when a closed
    /// form is available.
    pub fn hess_g_into(&self, x: &[T], out: &mut [T]) -> bool {
        match &self.hess_g {
            Some(h) => {
                h(x, out);
                true
            }
            None => false,
        }
    }

    pub fn has_hessian(&self) -> bool {
        self.hess_g.is_some()
    }

    /// Same problem with a different forcing term.
    pub fn with_forcing(&self, label: impl Into<String>, f: impl Fn(T, &mut [T]) + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
            unforced: false,
            ..self.clone()
        }
    }

    /// Same problem with the forcing removed.
    pub fn unforced(&self) -> Self {
        Self {
            label: format!("{}_unforced", self.label),
            f: Arc::new(|_, out: &mut [T]| out.iter_mut().for_each(|v| *v = T::zero())),
            unforced: true,
            ..self.clone()
        }
    }

    /// Same problem with the coefficient `a` replaced.
    pub fn with_coefficient(&self, label: impl Into<String>, a: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            a: Arc::new(a),
            ..self.clone()
        }
    }

    pub fn derived_constants(&self, cfg: &SamplingConfig<T>) -> Result<DerivedConstants<T>> {
        derived_constants(self, cfg)
    }
}

pub struct ProblemBuilder<T> {
    label: String,
    dim: usize,
    mu: Option<T>,
    t_support: T,
    a: Option<TimeFn<T>>,
    f: Option<ForcingFn<T>>,
    g: Option<PotentialFn<T>>,
    grad_g: Option<PotentialDerivFn<T>>,
    hess_g: Option<PotentialDerivFn<T>>,
}

impl<T: Scalar> ProblemBuilder<T> {
    pub fn mu(mut self, mu: T) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn coefficient(self, a: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.coefficient_arc(Arc::new(a))
    }

    fn coefficient_arc(mut self, a: TimeFn<T>) -> Self {
        self.a = Some(a);
        self
    }

    pub fn forcing(mut self, f: impl Fn(T, &mut [T]) + Send + Sync + 'static) -> Self {
        self.f = Some(Arc::new(f));
        self
    }

    pub fn potential(
        mut self,
        g: impl Fn(&[T]) -> T + Send + Sync + 'static,
        grad_g: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
    ) -> Self {
        self.g = Some(Arc::new(g));
        self.grad_g = Some(Arc::new(grad_g));
        self
    }

    pub fn hessian(mut self, hess_g: impl Fn(&[T], &mut [T]) + Send + Sync + 'static) -> Self {
        self.hess_g = Some(Arc::new(hess_g));
        self
    }

    /// Half-width beyond which the forcing is numerically negligible.
    pub fn support(mut self, t_support: T) -> Self {
        self.t_support = t_support;
        self
    }

    pub fn build(self) -> Result<Problem<T>> {
        if self.dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        let mu = self.mu.ok_or_else(|| Error::Config("growth exponent mu is required".into()))?;
        if !(mu > T::lit(2.0)) {
            return Err(Error::Config(format!("growth exponent mu must exceed 2, got {mu}")));
        }
        if !(self.t_support > T::zero()) {
            return Err(Error::Config("t_support must be positive".into()));
        }
        let a = self.a.ok_or_else(|| Error::Config("coefficient a(t) is required".into()))?;
        let g = self.g.ok_or_else(|| Error::Config("potential G is required".into()))?;
        let grad_g = self.grad_g.ok_or_else(|| Error::Config("gradient of G is required".into()))?;
        let unforced = self.f.is_none();
        let f = self
            .f
            .unwrap_or_else(|| Arc::new(|_, out: &mut [T]| out.iter_mut().for_each(|v| *v = T::zero())));

        let zero = vec![T::zero(); self.dim];
        let mut g0 = vec![T::zero(); self.dim];
        grad_g(&zero, &mut g0);
        if sq_norm(&g0) != T::zero() {
            return Err(Error::Config(format!(
                "grad G(0) must vanish, got norm {}",
                sq_norm(&g0).sqrt()
            )));
        }
        Ok(Problem {
            label: self.label,
            dim: self.dim,
            mu,
            t_support: self.t_support,
            a,
            f,
            g,
            grad_g,
            hess_g: self.hess_g,
            unforced,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Example1,
    Example2,
    Example1Compliant,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Example1, Builtin::Example2, Builtin::Example1Compliant];

    pub fn as_str(self) -> &'static str {
        match self {
            Builtin::Example1 => "example1",
            Builtin::Example2 => "example2",
            Builtin::Example1Compliant => "example1_compliant",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown built-in problem '{s}'")))
    }
}

pub fn make_builtin_problem<T: Scalar>(id: Builtin) -> Problem<T> {
    Problem::builtin(id)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ForcingDef {
    Single(String),
    Components(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDefinition {
    label: String,
    #[serde(default = "one")]
    dim: usize,
    mu: f64,
    a: String,
    #[serde(default)]
    f: Option<ForcingDef>,
    #[serde(rename = "G")]
    g: String,
    #[serde(default = "default_support")]
    t_support: f64,
}

fn one() -> usize {
    1
}

fn default_support() -> f64 {
    12.0
}

impl ProblemDefinition {
    fn into_problem<T: Scalar>(self) -> Result<Problem<T>> {
        let dim = self.dim;
        let a = Expr::parse(&self.a)?;
        if a.max_component().is_some() {
            return Err(Error::Config("a(t) may depend on t only".into()));
        }
        let g = Expr::parse(&self.g)?;
        if g.uses_time() {
            return Err(Error::Config("G may depend on q only".into()));
        }
        if let Some(c) = g.max_component() {
            if c >= dim {
                return Err(Error::Config(format!("G references q{} but dim = {dim}", c + 1)));
            }
        }
        let forcing: Option<Vec<Expr>> = match self.f {
            None => None,
            Some(ForcingDef::Single(s)) => Some(vec![Expr::parse(&s)?]),
            Some(ForcingDef::Components(list)) => Some(list.iter().map(|s| Expr::parse(s)).collect::<Result<_>>()?),
        };
        if let Some(f) = &forcing {
            if f.len() != dim {
                return Err(Error::Config(format!("f has {} components, dim = {dim}", f.len())));
            }
            if f.iter().any(|e| e.max_component().is_some()) {
                return Err(Error::Config("f(t) may depend on t only".into()));
            }
        }

        let grad: Vec<Expr> = (0..dim).map(|i| g.derivative(Var::Q(i))).collect();
        let hess: Vec<Expr> = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| grad[i].derivative(Var::Q(j)))
            .collect();

        let mut b = Problem::builder(self.label, dim)
            .mu(T::lit(self.mu))
            .support(T::lit(self.t_support))
            .coefficient(move |t: T| a.eval(t, &[]));
        if let Some(f) = forcing {
            b = b.forcing(move |t: T, out: &mut [T]| {
                for (o, e) in out.iter_mut().zip(&f) {
                    *o = e.eval(t, &[]);
                }
            });
        }
        b.potential(
            move |x: &[T]| g.eval(T::zero(), x),
            move |x: &[T], out: &mut [T]| {
                for (o, e) in out.iter_mut().zip(&grad) {
                    *o = e.eval(T::zero(), x);
                }
            },
        )
        .hessian(move |x: &[T], out: &mut [T]| {
            for (o, e) in out.iter_mut().zip(&hess) {
                *o = e.eval(T::zero(), x);
            }
        })
        .build()
    }
}

/// Where and how densely the hypotheses are sampled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingConfig<T> {
    /// Time samples cover `[-window, window]` uniformly (odd count, so `t = 0`
    /// is included) plus the explicit `probes`.
    pub window: T,
    pub time_samples: usize,
    pub probes: Vec<T>,
    /// Points on the unit sphere for `n >= 2`; `n = 1` always uses `{-1, +1}`.
    pub sphere_samples: usize,
    /// Start offset into the Halton sequence used for sphere points.
    pub sphere_seed: u64,
    /// Radii for the small-|q| slope test on `grad G`.
    pub c1_radii: Vec<T>,
    pub c1_threshold: T,
    pub c2_samples: usize,
    pub c2_annulus: (T, T),
    pub c2_seed: u64,
    /// Sampled infima of `a` at or below this value count as degenerate.
    pub c3_floor: T,
    /// Absolute tolerance of the adaptive quadrature for `||f||_{L^2}`.
    pub quad_tol: T,
}

impl<T: Scalar> Default for SamplingConfig<T> {
    fn default() -> Self {
        Self {
            window: T::lit(1e3),
            time_samples: 200_001,
            probes: vec![T::lit(-1e6), T::lit(1e6)],
            sphere_samples: 256,
            sphere_seed: 17,
            c1_radii: (1..=6).map(|e| T::lit(10f64.powi(-e))).collect(),
            c1_threshold: T::lit(1e-3),
            c2_samples: 4000,
            c2_annulus: (T::lit(1e-3), T::lit(1e2)),
            c2_seed: 0x5eed,
            c3_floor: T::lit(1e-6),
            quad_tol: T::lit(1e-13),
        }
    }
}

impl<T: Scalar> SamplingConfig<T> {
    /// Time points: the uniform window grid followed by the probes.
    pub fn sample_times(&self) -> Vec<T> {
        let n = self.time_samples.max(3) | 1;
        let step = (self.window + self.window) / T::from_count(n - 1);
        let mid = n / 2;
        let mut times: Vec<T> = (0..n)
            .map(|i| {
                if i < mid {
                    -T::from_count(mid - i) * step
                } else {
                    T::from_count(i - mid) * step
                }
            })
            .collect();
        times.extend(self.probes.iter().copied());
        times
    }

    /// Deterministic points on the unit sphere of `R^n`.
    pub fn sphere_points(&self, dim: usize) -> Vec<Vec<T>> {
        sphere_points(dim, self.sphere_samples, self.sphere_seed)
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Coordinate axes (both signs) followed by Halton points of the cube
/// `[-1, 1]^n` that fall in the shell `0.1 < |x| <= 1`, normalized. The
/// seed picks a random shift of the Halton sequence modulo 1.
pub fn sphere_points<T: Scalar>(dim: usize, count: usize, seed: u64) -> Vec<Vec<T>> {
    if dim == 1 {
        return vec![vec![-T::one()], vec![T::one()]];
    }
    let mut pts = Vec::with_capacity(2 * dim + count);
    for i in 0..dim {
        for s in [-1.0, 1.0] {
            let mut x = vec![T::zero(); dim];
            x[i] = T::lit(s);
            pts.push(x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let mut index = 0u64;
    let mut accepted = 0;
    while accepted < count {
        index += 1;
        let raw: Vec<f64> = (0..dim)
            .map(|c| 2.0 * (radical_inverse(index, PRIMES[c % PRIMES.len()]) + shift[c]).fract() - 1.0)
            .collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            pts.push(raw.iter().map(|v| T::lit(v / norm)).collect());
            accepted += 1;
        }
    }
    pts
}

/// Where an extremum of `a(t) G(x)` was observed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness<T> {
    pub t: T,
    pub x: Vec<T>,
    pub value: T,
}

/// Every checkable number of the existence argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedConstants<T> {
    /// Sampled `sup { a(t) G(x) : |x| = 1 }`.
    #[serde(rename = "M")]
    pub big_m: T,
    #[serde(rename = "M_witness")]
    pub big_m_witness: Witness<T>,
    /// Sampled `inf { a(t) G(x) : |x| = 1 }`.
    #[serde(rename = "m")]
    pub small_m: T,
    #[serde(rename = "m_witness")]
    pub small_m_witness: Witness<T>,
    /// `||f||_{L^2}` on `[-t_support, t_support]`.
    pub f_l2: T,
    /// Integral of `|f|^2` over `t_support <= |t| <= 4 t_support`.
    pub f_tail: T,
    pub f_quadrature_error: T,
    /// `(1 - 2M) / (2 sqrt 2)`, the largest admissible forcing norm.
    pub budget: T,
    pub rho: T,
    /// `(budget - f_l2) / sqrt 2`; the geometry is certified only when positive.
    pub alpha: T,
}

impl<T: Scalar> DerivedConstants<T> {
    pub fn geometry_certified(&self) -> bool {
        self.alpha > T::zero() && self.small_m > T::zero()
    }
}

pub fn derived_constants<T: Scalar>(p: &Problem<T>, cfg: &SamplingConfig<T>) -> Result<DerivedConstants<T>> {
    let sphere = cfg.sphere_points(p.dim());
    let g_sphere: Vec<T> = sphere.iter().map(|x| p.g(x)).collect();
    if let Some(i) = g_sphere.iter().position(|v| !v.is_finite()) {
        return Err(Error::Evaluation {
            what: "G",
            t: f64::NAN,
            x: sphere[i].iter().map(|v| v.as_f64()).collect(),
        });
    }

    let mut sup: Option<(T, T, usize)> = None;
    let mut inf: Option<(T, T, usize)> = None;
    for t in cfg.sample_times() {
        let at = p.a(t);
        if !at.is_finite() {
            return Err(Error::Evaluation { what: "a", t: t.as_f64(), x: vec![] });
        }
        for (j, &gx) in g_sphere.iter().enumerate() {
            let v = at * gx;
            if !v.is_finite() {
                return Err(Error::Evaluation {
                    what: "a(t) G(x)",
                    t: t.as_f64(),
                    x: sphere[j].iter().map(|v| v.as_f64()).collect(),
                });
            }
            if sup.is_none_or(|(s, _, _)| v > s) {
                sup = Some((v, t, j));
            }
            if inf.is_none_or(|(s, _, _)| v < s) {
                inf = Some((v, t, j));
            }
        }
    }
    let (big_m, t_sup, j_sup) = sup.expect("at least one sample");
    let (small_m, t_inf, j_inf) = inf.expect("at least one sample");

    let ts = p.t_support();
    let mut f_buf = vec![T::zero(); p.dim()];
    let mut f_sq = |t: T| {
        p.forcing_into(t, &mut f_buf);
        sq_norm(&f_buf)
    };
    let core = integrate::adaptive(&mut f_sq, -ts, ts, cfg.quad_tol, 50);
    if !core.value.is_finite() {
        return Err(Error::Evaluation { what: "|f|^2 integral", t: f64::NAN, x: vec![] });
    }
    let four = T::lit(4.0);
    let tail = integrate::adaptive(&mut f_sq, ts, four * ts, cfg.quad_tol, 40).value
        + integrate::adaptive(&mut f_sq, -four * ts, -ts, cfg.quad_tol, 40).value;

    let sqrt2 = T::SQRT_2();
    let f_l2 = core.value.sqrt();
    let budget = (T::one() - big_m - big_m) / (sqrt2 + sqrt2);
    Ok(DerivedConstants {
        big_m,
        big_m_witness: Witness { t: t_sup, x: sphere[j_sup].clone(), value: big_m },
        small_m,
        small_m_witness: Witness { t: t_inf, x: sphere[j_inf].clone(), value: small_m },
        f_l2,
        f_tail: tail,
        f_quadrature_error: core.error_estimate,
        budget,
        rho: T::FRAC_1_SQRT_2(),
        alpha: (budget - f_l2) / sqrt2,
    })
}
