//! The Jacobi-predictor-corrector stepping loop.
//!
//! Each step evaluates the memory integral over `[t_origin, t_{n+1}]` with the
//! Gauss-Lobatto rule for `(1-s)^(alpha-1)`, mapping the nodes onto the time
//! axis and interpolating `f` there from cached grid values. The predictor
//! interpolates at every node (extrapolating from the last `IN` values near
//! `t_{n+1}`); the corrector uses stencils that may include the predicted
//! value at `t_{n+1}` and evaluates the end node directly.

use serde::{Deserialize, Serialize};

use crate::adams::{starter_samples, StarterConfig};
use crate::error::{Error, Result};
use crate::problem::{is_divergent, ProblemSpec, SolveStats, Trajectory};
use crate::quadrature::{gauss_lobatto_rule, JacobiWeight, QuadratureRule};
use crate::special::gamma;
use crate::split::{solve_split, HeadMemory, SplitConfig};
use crate::stencil::{map_node, select_stencil, Phase, Stencil, StencilParams, UniformInterpolator};

pub const DEFAULT_QUAD_INDEX: usize = 26;
pub const MAX_INTERP_POINTS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// `IN`, the stencil size and nominal convergence order.
    pub interp_points: usize,
    /// `JN`; the rule has `JN + 1` points.
    pub quad_index: usize,
    pub h: f64,
    /// `None` picks exact-start when the problem has an exact solution and the
    /// conservative refined Adams starter otherwise.
    pub starter: Option<StarterConfig>,
    pub split: Option<SplitConfig>,
}

impl SolverConfig {
    pub fn new(interp_points: usize, h: f64) -> Self {
        Self {
            interp_points,
            quad_index: DEFAULT_QUAD_INDEX,
            h,
            starter: None,
            split: None,
        }
    }

    pub fn with_quad_index(mut self, quad_index: usize) -> Self {
        self.quad_index = quad_index;
        self
    }

    pub fn with_starter(mut self, starter: StarterConfig) -> Self {
        self.starter = Some(starter);
        self
    }

    pub fn with_split(mut self, split: SplitConfig) -> Self {
        self.split = Some(split);
        self
    }

    /// Checks the invariants against `[origin, t_end]` and returns the step count `N`.
    pub fn steps_on(&self, origin: f64, t_end: f64) -> Result<usize> {
        if self.interp_points < 2 || self.interp_points > MAX_INTERP_POINTS {
            return Err(Error::Config(format!(
                "IN must lie in 2..={MAX_INTERP_POINTS}, got {}",
                self.interp_points
            )));
        }
        if self.quad_index < 2 {
            return Err(Error::Config(format!("JN must be at least 2, got {}", self.quad_index)));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::Config(format!("step must be positive, got {}", self.h)));
        }
        let n_steps = integer_ratio(t_end - origin, self.h).ok_or_else(|| {
            Error::Config(format!(
                "interval length {} is not an integer multiple of h = {}",
                t_end - origin,
                self.h
            ))
        })?;
        if self.interp_points > n_steps {
            return Err(Error::Config(format!(
                "IN = {} exceeds the number of steps N = {n_steps}",
                self.interp_points
            )));
        }
        Ok(n_steps)
    }

    pub fn resolved_starter(&self, problem: &ProblemSpec) -> StarterConfig {
        self.starter.unwrap_or_else(|| {
            if problem.exact().is_some() {
                StarterConfig::Exact
            } else {
                StarterConfig::refined_for(problem.alpha(), self.h, self.interp_points)
            }
        })
    }

    pub fn rule(&self, alpha: f64) -> Result<QuadratureRule> {
        gauss_lobatto_rule(&JacobiWeight::fractional(alpha)?, self.quad_index + 1)
    }
}

/// `Some(n)` if `len / h` is within `1e-9` (relative) of the positive integer `n`.
pub(crate) fn integer_ratio(len: f64, h: f64) -> Option<usize> {
    let r = len / h;
    let n = r.round();
    if n >= 1.0 && (r - n).abs() <= 1e-9 * n {
        Some(n as usize)
    } else {
        None
    }
}

/// Precomputed per-solve state shared by every step.
pub(crate) struct Stepper<'a> {
    problem: &'a ProblemSpec,
    rule: &'a QuadratureRule,
    params: StencilParams,
    interp: UniformInterpolator,
    inv_gamma: f64,
    head: Option<HeadMemory>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(
        problem: &'a ProblemSpec,
        rule: &'a QuadratureRule,
        interp_points: usize,
        head: Option<HeadMemory>,
    ) -> Result<Self> {
        let expected = JacobiWeight::fractional(problem.alpha())?;
        if rule.weight_function() != expected {
            return Err(Error::Config(format!(
                "quadrature weight {:?} does not match alpha = {}",
                rule.weight_function(),
                problem.alpha()
            )));
        }
        Ok(Self {
            problem,
            rule,
            params: StencilParams::new(interp_points)?,
            interp: UniformInterpolator::new(interp_points),
            inv_gamma: 1.0 / gamma(problem.alpha()),
            head,
        })
    }

    /// Cached-value reads per predictor and corrector pass.
    pub(crate) fn reads_per_step(&self) -> u64 {
        let size = self.params.size() as u64;
        let nodes = self.rule.len() as u64;
        nodes * size + (nodes - 1) * size
    }

    fn base_term(&self, t: f64) -> f64 {
        let mut v = self.problem.taylor_head(t);
        if let Some(head) = &self.head {
            v += head.integral(t, self.problem.alpha(), self.inv_gamma);
        }
        v
    }

    fn interpolate(
        &self,
        state: &Trajectory,
        stencil: Stencil,
        target: f64,
        extra: Option<f64>,
    ) -> f64 {
        let grid = state.grid();
        let f = state.f_cache();
        let mut buf = [0.0; MAX_INTERP_POINTS];
        let len = stencil.length;
        for (k, slot) in buf[..len].iter_mut().enumerate() {
            let idx = stencil.start + k;
            *slot = match (idx < f.len(), extra) {
                (true, _) => f[idx],
                (false, Some(v)) => v,
                (false, None) => f64::NAN,
            };
        }
        let u = (target - grid.t(stencil.start)) / grid.h;
        self.interp.eval(&buf[..len], u)
    }

    fn check_state(&self, state: &Trajectory, n: usize) -> Result<()> {
        if n + 1 < self.params.size() {
            return Err(Error::InsufficientHistory { n, needed: self.params.size() });
        }
        if state.len() != n + 1 {
            return Err(Error::Config(format!(
                "step {n} -> {} needs exactly {} accepted values, trajectory has {}",
                n + 1,
                n + 1,
                state.len()
            )));
        }
        Ok(())
    }

    fn prefactor(&self, state: &Trajectory, t_next: f64) -> f64 {
        ((t_next - state.grid().origin) * 0.5).powf(self.problem.alpha()) * self.inv_gamma
    }

    pub(crate) fn predict(&self, state: &Trajectory, n: usize) -> Result<f64> {
        self.check_state(state, n)?;
        let grid = state.grid();
        let t_next = grid.t(n + 1);
        let mut sum = 0.0;
        for (s, w) in self.rule.iter() {
            let target = map_node(s, grid.origin, t_next);
            let stencil = select_stencil(target, grid, &self.params, n, Phase::Predictor)?;
            sum += w * self.interpolate(state, stencil, target, None);
        }
        Ok(self.base_term(t_next) + self.prefactor(state, t_next) * sum)
    }

    /// Returns `(x_{n+1}, f(t_{n+1}, x^P))`.
    pub(crate) fn correct(&self, state: &Trajectory, n: usize, x_pred: f64) -> Result<(f64, f64)> {
        self.check_state(state, n)?;
        let grid = state.grid();
        let t_next = grid.t(n + 1);
        let f_pred = self.problem.rhs(t_next, x_pred)?;
        let nodes = self.rule.nodes();
        let weights = self.rule.weights();
        let last = nodes.len() - 1;
        let mut sum = weights[last] * f_pred;
        for j in 0..last {
            let target = map_node(nodes[j], grid.origin, t_next);
            let stencil = select_stencil(target, grid, &self.params, n, Phase::Corrector)?;
            sum += weights[j] * self.interpolate(state, stencil, target, Some(f_pred));
        }
        Ok((self.base_term(t_next) + self.prefactor(state, t_next) * sum, f_pred))
    }

    /// Advances from `state.len() - 1` until the grid holds `n_steps + 1` values
    /// or the divergence guard trips.
    pub(crate) fn run(&self, state: &mut Trajectory, n_steps: usize) -> Result<()> {
        let reads = self.reads_per_step();
        while state.len() <= n_steps {
            let n = state.len() - 1;
            let x_pred = self.predict(state, n)?;
            if is_divergent(x_pred) {
                state.mark_diverged();
                break;
            }
            let (x_next, _) = self.correct(state, n, x_pred)?;
            let stats = state.stats_mut();
            stats.rhs_evals += 1;
            stats.cache_reads += reads;
            if is_divergent(x_next) {
                state.mark_diverged();
                break;
            }
            let t_next = state.grid().t(n + 1);
            let f_next = self.problem.rhs(t_next, x_next)?;
            state.stats_mut().rhs_evals += 1;
            state.push(x_next, f_next);
        }
        Ok(())
    }
}

/// Builds a trajectory on `origin + i h` holding the starting values and their `f`.
pub(crate) fn seeded_trajectory(
    problem: &ProblemSpec,
    origin: f64,
    h: f64,
    capacity: usize,
    values: &[f64],
    starter_stats: SolveStats,
) -> Result<Trajectory> {
    let mut traj = Trajectory::with_capacity(origin, h, capacity)?;
    *traj.stats_mut() += starter_stats;
    for (i, &x) in values.iter().enumerate() {
        let t = origin + i as f64 * h;
        let f = problem.rhs(t, x)?;
        traj.stats_mut().rhs_evals += 1;
        traj.push(x, f);
    }
    Ok(traj)
}

/// `x^P_{n+1}` from a trajectory holding `x_0 .. x_n`.
pub fn predict(
    state: &Trajectory,
    n: usize,
    rule: &QuadratureRule,
    cfg: &SolverConfig,
    problem: &ProblemSpec,
) -> Result<f64> {
    let head = HeadMemory::for_state(state, cfg)?;
    Stepper::new(problem, rule, cfg.interp_points, head)?.predict(state, n)
}

/// `x_{n+1}` given the predicted value; the caller stores `f(t_{n+1}, x_{n+1})`.
pub fn correct(
    state: &Trajectory,
    n: usize,
    x_pred: f64,
    rule: &QuadratureRule,
    cfg: &SolverConfig,
    problem: &ProblemSpec,
) -> Result<f64> {
    let head = HeadMemory::for_state(state, cfg)?;
    Ok(Stepper::new(problem, rule, cfg.interp_points, head)?.correct(state, n, x_pred)?.0)
}

/// Full solve over `[0, T]`, or over `[T0, T]` with a head segment when `cfg.split` is set.
pub fn solve(problem: &ProblemSpec, cfg: &SolverConfig) -> Result<Trajectory> {
    if cfg.split.is_some() {
        return solve_split(problem, cfg);
    }
    let n_steps = cfg.steps_on(0.0, problem.t_end())?;
    let rule = cfg.rule(problem.alpha())?;
    let starter = cfg.resolved_starter(problem);
    let (values, stats) = starter_samples(
        problem,
        cfg.h,
        cfg.interp_points,
        &starter,
        cfg.h,
        problem.exact().map(|e| e as &dyn Fn(f64) -> f64),
    )?;
    let mut traj = seeded_trajectory(problem, 0.0, cfg.h, n_steps + 1, &values, stats)?;
    Stepper::new(problem, &rule, cfg.interp_points, None)?.run(&mut traj, n_steps)?;
    Ok(traj)
}
