//! Problem statement and solution containers.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{EvalError, Expr};
use crate::stencil::UniformGrid;

/// Right-hand side `f(t, x)`; evaluation may fail (e.g. a user expression
/// dividing by zero).
pub type RhsFn = dyn Fn(f64, f64) -> Result<f64, EvalError> + Send + Sync;

/// Values above this magnitude are treated as divergence.
pub const DIVERGENCE_BOUND: f64 = 1e100;

/// The Caputo initial value problem `D^alpha x = f(t, x)`, `x^(k)(0) = init[k]`,
/// on `[0, t_end]`, optionally with a known exact solution.
#[derive(Clone)]
pub struct ProblemSpec {
    alpha: f64,
    init: Vec<f64>,
    rhs: Arc<RhsFn>,
    t_end: f64,
    exact: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("alpha", &self.alpha)
            .field("init", &self.init)
            .field("t_end", &self.t_end)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn new<F>(alpha: f64, init: Vec<f64>, t_end: f64, rhs: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_fallible_rhs(alpha, init, t_end, move |t, x| Ok(rhs(t, x)))
    }

    pub fn with_fallible_rhs<F>(alpha: f64, init: Vec<f64>, t_end: f64, rhs: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64, EvalError> + Send + Sync + 'static,
    {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Config(format!("order alpha must be positive, got {alpha}")));
        }
        let needed = alpha.ceil() as usize;
        if init.len() != needed {
            return Err(Error::Config(format!(
                "alpha = {alpha} needs {needed} initial value(s), got {}",
                init.len()
            )));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::Config(format!("horizon must be positive, got {t_end}")));
        }
        Ok(Self {
            alpha,
            init,
            rhs: Arc::new(rhs),
            t_end,
            exact: None,
        })
    }

    /// Builds the right-hand side from an expression; `alpha` inside the
    /// expression is bound to this problem's order.
    pub fn from_expr(alpha: f64, init: Vec<f64>, t_end: f64, expr: Expr) -> Result<Self> {
        Self::with_fallible_rhs(alpha, init, t_end, move |t, x| expr.evaluate(t, x, alpha))
    }

    pub fn with_exact_solution<F>(mut self, exact: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn with_t_end(&self, t_end: f64) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::Config(format!("horizon must be positive, got {t_end}")));
        }
        let mut p = self.clone();
        p.t_end = t_end;
        Ok(p)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn exact(&self) -> Option<&(dyn Fn(f64) -> f64 + Send + Sync)> {
        self.exact.as_deref()
    }

    pub fn rhs(&self, t: f64, x: f64) -> Result<f64> {
        Ok((self.rhs)(t, x)?)
    }

    /// `Σ_{k < ceil(alpha)} t^k / k! x_0^(k)`.
    pub fn taylor_head(&self, t: f64) -> f64 {
        let mut term = 1.0;
        let mut acc = 0.0;
        for (k, &x0) in self.init.iter().enumerate() {
            if k > 0 {
                term *= t / k as f64;
            }
            acc += term * x0;
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Ok,
    Diverged,
}

/// Work counters collected during a solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Calls to the right-hand side, including those made by the starter.
    pub rhs_evals: u64,
    /// Cached `f` values read by interpolation stencils.
    pub cache_reads: u64,
    /// Past `f` values read by memory sums (the Adams baseline).
    pub history_reads: u64,
}

impl std::ops::AddAssign for SolveStats {
    fn add_assign(&mut self, rhs: Self) {
        self.rhs_evals += rhs.rhs_evals;
        self.cache_reads += rhs.cache_reads;
        self.history_reads += rhs.history_reads;
    }
}

/// Solution values on a uniform grid together with the cached `f(t_i, x_i)`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: UniformGrid,
    x: Vec<f64>,
    f_cache: Vec<f64>,
    status: SolveStatus,
    stats: SolveStats,
    head: Option<Box<Trajectory>>,
}

impl Trajectory {
    pub(crate) fn with_capacity(origin: f64, h: f64, capacity: usize) -> Result<Self> {
        Ok(Self {
            grid: UniformGrid::new(origin, h, 0)?,
            x: Vec::with_capacity(capacity),
            f_cache: Vec::with_capacity(capacity),
            status: SolveStatus::Ok,
            stats: SolveStats::default(),
            head: None,
        })
    }

    /// Assembles a trajectory from explicit values.
    pub fn from_parts(grid: UniformGrid, x: Vec<f64>, f_cache: Vec<f64>) -> Result<Self> {
        if x.len() != grid.count || f_cache.len() != grid.count {
            return Err(Error::Config(format!(
                "trajectory arrays ({}, {}) do not match grid size {}",
                x.len(),
                f_cache.len(),
                grid.count
            )));
        }
        Ok(Self {
            grid,
            x,
            f_cache,
            status: SolveStatus::Ok,
            stats: SolveStats::default(),
            head: None,
        })
    }

    pub(crate) fn push(&mut self, x: f64, f: f64) {
        self.x.push(x);
        self.f_cache.push(f);
        self.grid.count = self.x.len();
    }

    pub(crate) fn mark_diverged(&mut self) {
        self.status = SolveStatus::Diverged;
    }

    pub(crate) fn stats_mut(&mut self) -> &mut SolveStats {
        &mut self.stats
    }

    pub(crate) fn set_head(&mut self, head: Trajectory) {
        self.head = Some(Box::new(head));
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.grid.t(i)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn f_cache(&self) -> &[f64] {
        &self.f_cache
    }

    pub fn status(&self) -> SolveStatus {
        self.status
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    /// The fine trajectory on `[0, T0]` kept by split-domain solves.
    pub fn head(&self) -> Option<&Trajectory> {
        self.head.as_deref()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().enumerate().map(|(i, &x)| (self.grid.t(i), x))
    }

    /// `max_i |exact(t_i) - x_i|` over the stored grid.
    pub fn max_error<F: Fn(f64) -> f64>(&self, exact: F) -> f64 {
        self.points().map(|(t, x)| (exact(t) - x).abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn is_divergent(x: f64) -> bool {
    !x.is_finite() || x.abs() > DIVERGENCE_BOUND
}
