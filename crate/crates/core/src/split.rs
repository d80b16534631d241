//! Split-domain solves: `[0, T0]` is resolved on a fine starter grid and its
//! memory contribution is added through a Legendre-Lobatto rule, while the
//! JPC machinery runs on the uniform grid over `[T0, T]`.
//!
//! Both the non-smooth-origin and the small-order variants use this module;
//! they differ only in why the split point is chosen.

use serde::{Deserialize, Serialize};

use crate::adams::starter_samples;
use crate::error::{Error, Result};
use crate::jpc::{integer_ratio, seeded_trajectory, SolverConfig, Stepper};
use crate::problem::{ProblemSpec, SolveStats, Trajectory};
use crate::quadrature::{gauss_lobatto_rule, JacobiWeight, QuadratureRule};
use crate::special::gamma;
use crate::stencil::{map_node, select_stencil, Phase, StencilParams, UniformInterpolator};

pub const DEFAULT_FINE_FACTOR: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub t0: f64,
    /// Index of the auxiliary Legendre-Lobatto rule; `None` means `2 JN`.
    pub aux_index: Option<usize>,
    /// The head grid step is `h / fine_factor`.
    pub fine_factor: usize,
}

impl SplitConfig {
    pub fn new(t0: f64) -> Self {
        Self {
            t0,
            aux_index: None,
            fine_factor: DEFAULT_FINE_FACTOR,
        }
    }

    pub fn with_aux_index(mut self, aux_index: usize) -> Self {
        self.aux_index = Some(aux_index);
        self
    }

    pub fn with_fine_factor(mut self, fine_factor: usize) -> Self {
        self.fine_factor = fine_factor;
        self
    }

    pub fn aux_index_for(&self, quad_index: usize) -> usize {
        self.aux_index.unwrap_or(2 * quad_index)
    }

    fn validate(&self, t_end: f64, quad_index: usize) -> Result<()> {
        if !(self.t0 > 0.0) || !(self.t0 < t_end) {
            return Err(Error::Config(format!(
                "split point must satisfy 0 < T0 < T = {t_end}, got {}",
                self.t0
            )));
        }
        if self.aux_index_for(quad_index) < 2 {
            return Err(Error::Config("auxiliary rule index must be at least 2".into()));
        }
        if self.fine_factor < 1 {
            return Err(Error::Config("fine_factor must be at least 1".into()));
        }
        Ok(())
    }
}

/// The head contribution `Σ c_j (t - tau_j)^(alpha-1)` with `c_j = w_j f(tau_j)`
/// precomputed, since neither depends on `t`.
#[derive(Clone, Debug)]
pub(crate) struct HeadMemory {
    t0: f64,
    taus: Vec<f64>,
    coeffs: Vec<f64>,
}

impl HeadMemory {
    pub(crate) fn new(head: &Trajectory, aux_rule: &QuadratureRule, interp_points: usize) -> Result<Self> {
        if aux_rule.weight_function() != JacobiWeight::legendre() {
            return Err(Error::Config("the head rule must use the constant weight".into()));
        }
        if head.len() < interp_points {
            return Err(Error::InsufficientHistory { n: head.len().saturating_sub(1), needed: interp_points });
        }
        let grid = head.grid();
        let t0 = grid.end();
        let params = StencilParams::new(interp_points)?;
        let interp = UniformInterpolator::new(interp_points);
        let last = head.len() - 1;
        let f = head.f_cache();
        let mut taus = Vec::with_capacity(aux_rule.len());
        let mut coeffs = Vec::with_capacity(aux_rule.len());
        for (s, w) in aux_rule.iter() {
            let tau = map_node(s, grid.origin, t0);
            let st = select_stencil(tau, grid, &params, last, Phase::Predictor)?;
            let u = (tau - grid.t(st.start)) / grid.h;
            let value = interp.eval(&f[st.start..st.end()], u);
            taus.push(tau);
            coeffs.push(w * 0.5 * (t0 - grid.origin) * value);
        }
        Ok(Self { t0, taus, coeffs })
    }

    pub(crate) fn for_state(state: &Trajectory, cfg: &SolverConfig) -> Result<Option<Self>> {
        let Some(split) = &cfg.split else {
            return Ok(None);
        };
        let head = state.head().ok_or_else(|| {
            Error::Config("split configuration given but the trajectory carries no head segment".into())
        })?;
        let aux = aux_rule(split, cfg.quad_index)?;
        Ok(Some(Self::new(head, &aux, cfg.interp_points)?))
    }

    pub(crate) fn integral(&self, t: f64, alpha: f64, inv_gamma: f64) -> f64 {
        let e = alpha - 1.0;
        let sum: f64 = self
            .taus
            .iter()
            .zip(&self.coeffs)
            .map(|(&tau, &c)| c * (t - tau).powf(e))
            .sum();
        sum * inv_gamma
    }
}

fn aux_rule(split: &SplitConfig, quad_index: usize) -> Result<QuadratureRule> {
    gauss_lobatto_rule(&JacobiWeight::legendre(), split.aux_index_for(quad_index) + 1)
}

/// `(1/Gamma(alpha)) ∫_0^{T0} (t_eval - tau)^(alpha-1) f(tau, x(tau)) dtau`, with
/// `T0` the end of `head` and the integrand interpolated from its cached `f`.
pub fn head_integral(
    problem: &ProblemSpec,
    t_eval: f64,
    head: &Trajectory,
    aux_rule: &QuadratureRule,
    interp_points: usize,
) -> Result<f64> {
    let t0 = head.grid().end();
    if !(t_eval > t0) {
        return Err(Error::Domain(format!(
            "head integral needs t_eval > T0 = {t0}, got {t_eval}"
        )));
    }
    let memory = HeadMemory::new(head, aux_rule, interp_points)?;
    let alpha = problem.alpha();
    Ok(memory.integral(t_eval, alpha, 1.0 / gamma(alpha)))
}

/// Solves on the uniform grid over `[T0, T]`; the fine head on `[0, T0]` is
/// attached to the returned trajectory.
pub fn solve_split(problem: &ProblemSpec, cfg: &SolverConfig) -> Result<Trajectory> {
    let split = cfg
        .split
        .ok_or_else(|| Error::Config("split solve needs a split configuration".into()))?;
    split.validate(problem.t_end(), cfg.quad_index)?;
    let n_steps = cfg.steps_on(split.t0, problem.t_end())?;
    let h = cfg.h;
    let fine_h = h / split.fine_factor as f64;
    let head_steps = integer_ratio(split.t0, fine_h).ok_or_else(|| {
        Error::Config(format!(
            "T0 = {} is not a multiple of the head step h / fine_factor = {fine_h}",
            split.t0
        ))
    })?;

    // One fine run covers the head and the first IN main-grid values.
    let fine_count = head_steps + (cfg.interp_points - 1) * split.fine_factor + 1;
    let starter = cfg.resolved_starter(problem);
    let (fine_values, starter_stats) = starter_samples(
        problem,
        fine_h,
        fine_count,
        &starter,
        h,
        problem.exact().map(|e| e as &dyn Fn(f64) -> f64),
    )?;

    let head = seeded_trajectory(
        problem,
        0.0,
        fine_h,
        head_steps + 1,
        &fine_values[..=head_steps],
        SolveStats::default(),
    )?;
    let head_stats = head.stats();
    let aux = aux_rule(&split, cfg.quad_index)?;
    let memory = HeadMemory::new(&head, &aux, cfg.interp_points)?;
    debug_assert!((memory.t0 - split.t0).abs() <= 1e-12 * split.t0);

    let main_start: Vec<f64> = (0..cfg.interp_points)
        .map(|i| fine_values[head_steps + i * split.fine_factor])
        .collect();
    let mut stats = starter_stats;
    stats += head_stats;
    let mut traj = seeded_trajectory(problem, split.t0, h, n_steps + 1, &main_start, stats)?;
    let rule = cfg.rule(problem.alpha())?;
    Stepper::new(problem, &rule, cfg.interp_points, Some(memory))?.run(&mut traj, n_steps)?;
    traj.set_head(head);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::UniformGrid;

    fn constant_head(t0: f64, steps: usize, value: f64) -> Trajectory {
        let grid = UniformGrid::new(0.0, t0 / steps as f64, steps + 1).unwrap();
        Trajectory::from_parts(grid, vec![0.0; steps + 1], vec![value; steps + 1]).unwrap()
    }

    #[test]
    fn head_integral_examples() {
        let legendre = gauss_lobatto_rule(&JacobiWeight::legendre(), 53).unwrap();
        let p = ProblemSpec::new(0.5, vec![0.0], 2.0, |_, _| 0.0).unwrap();
        let zero = constant_head(0.1, 10, 0.0);
        assert_eq!(head_integral(&p, 1.0, &zero, &legendre, 3).unwrap(), 0.0);

        let p1 = ProblemSpec::new(1.0, vec![0.0], 2.0, |_, _| 1.0).unwrap();
        let ones = constant_head(0.1, 10, 1.0);
        assert!((head_integral(&p1, 1.0, &ones, &legendre, 3).unwrap() - 0.1).abs() < 1e-12);

        // (1/Gamma(1/2)) * 2 (1 - sqrt(0.9)) = 0.0579046974038499052.
        let v = head_integral(&p, 1.0, &ones, &legendre, 3).unwrap();
        assert!((v - 0.05790469740384991).abs() < 1e-12, "{v}");

        assert!(matches!(head_integral(&p, 0.1, &ones, &legendre, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_rhs_split_keeps_initial_value() {
        let p = ProblemSpec::new(0.5, vec![1.0], 1.1, |_, _| 0.0)
            .unwrap()
            .with_exact_solution(|_| 1.0);
        let cfg = SolverConfig::new(3, 0.1).with_split(SplitConfig::new(0.1));
        let traj = solve_split(&p, &cfg).unwrap();
        assert_eq!(traj.len(), 11);
        assert_eq!(traj.grid().origin, 0.1);
        assert!(traj.x().iter().all(|&x| x == 1.0));
        assert!(traj.head().unwrap().x().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn split_validation() {
        let p = ProblemSpec::new(0.5, vec![1.0], 1.0, |_, _| 0.0).unwrap();
        let bad = SolverConfig::new(2, 0.1).with_split(SplitConfig::new(1.5));
        assert!(solve_split(&p, &bad).is_err());
        let off_grid = SolverConfig::new(2, 0.1).with_split(SplitConfig::new(0.123));
        assert!(solve_split(&p, &off_grid).is_err());
    }
}
