//! Fractional Adams-Bashforth-Moulton (PECE) scheme.
//!
//! Serves two roles: the O(N^2) baseline the JPC method is compared against,
//! and the starter that supplies `x_1 .. x_{IN-1}` on a refined substep.
//!
//! Predictor (product rectangle rule):
//!
//! ```text
//! x^P_{n+1} = T(t_{n+1}) + h^a / Gamma(a+1) * Σ_{j<=n} ((n+1-j)^a - (n-j)^a) f_j
//! ```
//!
//! Corrector (product trapezoid rule):
//!
//! ```text
//! x_{n+1} = T(t_{n+1}) + h^a / Gamma(a+2) * (f(t_{n+1}, x^P) + Σ_{j<=n} a_{j,n+1} f_j)
//! a_{0,n+1} = n^(a+1) - (n-a)(n+1)^a
//! a_{j,n+1} = (n-j+2)^(a+1) + (n-j)^(a+1) - 2(n-j+1)^(a+1)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{is_divergent, ProblemSpec, SolveStats, Trajectory};
use crate::special::gamma;

/// How the first `IN - 1` values after `x_0` are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarterConfig {
    /// Sample the problem's exact solution.
    Exact,
    /// Run the Adams scheme on the substep `h * 10^-k`.
    RefinedAdams { k: u32 },
}

impl StarterConfig {
    /// Smallest `k >= 1` with `h0^(1 + min(alpha, 1)) <= h^(IN + 1/2)`, `h0 = h 10^-k`.
    pub fn refined_for(alpha: f64, h: f64, interp_points: usize) -> Self {
        let order = 1.0 + alpha.min(1.0);
        let lg = -h.log10();
        let needed = lg * ((interp_points as f64 + 0.5) / order - 1.0);
        let k = needed.ceil().max(1.0) as u32;
        StarterConfig::RefinedAdams { k }
    }

    pub fn validate(&self) -> Result<()> {
        if let StarterConfig::RefinedAdams { k } = self {
            if *k < 1 {
                return Err(Error::Config("refinement exponent k must be at least 1".into()));
            }
            if *k > 8 {
                return Err(Error::Config(format!("refinement exponent k = {k} is impractically large")));
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for StarterConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StarterConfig::Exact => f.write_str("exact"),
            StarterConfig::RefinedAdams { k } => write!(f, "refined:{k}"),
        }
    }
}

/// Accepts `exact` or `refined:k`.
impl std::str::FromStr for StarterConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "exact" {
            return Ok(StarterConfig::Exact);
        }
        let k = s
            .strip_prefix("refined:")
            .and_then(|k| k.trim().parse::<u32>().ok())
            .ok_or_else(|| Error::Config(format!("starter must be `exact` or `refined:k`, got `{s}`")))?;
        let cfg = StarterConfig::RefinedAdams { k };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Coefficient tables for the Adams weights up to `n_steps`.
pub struct AdamsWeights {
    alpha: f64,
    pow_a: Vec<f64>,
    pow_a1: Vec<f64>,
}

impl AdamsWeights {
    pub fn new(alpha: f64, n_steps: usize) -> Self {
        let pow_a = (0..=n_steps + 1).map(|k| (k as f64).powf(alpha)).collect();
        let pow_a1 = (0..=n_steps + 1).map(|k| (k as f64).powf(alpha + 1.0)).collect();
        Self { alpha, pow_a, pow_a1 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Predictor weight of `f_j` at step `n -> n+1`, without the `h^a / Gamma(a+1)` factor.
    #[inline]
    pub fn b(&self, j: usize, n: usize) -> f64 {
        self.pow_a[n + 1 - j] - self.pow_a[n - j]
    }

    /// Corrector weight of `f_j` at step `n -> n+1`, without the `h^a / Gamma(a+2)` factor.
    #[inline]
    pub fn a(&self, j: usize, n: usize) -> f64 {
        if j == 0 {
            self.pow_a1[n] - (n as f64 - self.alpha) * self.pow_a[n + 1]
        } else {
            let m = n - j;
            self.pow_a1[m + 2] + self.pow_a1[m] - 2.0 * self.pow_a1[m + 1]
        }
    }
}

/// Solves on `t_i = i h`, `i = 0..=n_steps`, with one correction per step.
pub fn adams_solve(problem: &ProblemSpec, h: f64, n_steps: usize) -> Result<Trajectory> {
    if n_steps < 1 {
        return Err(Error::Config("Adams solve needs at least one step".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {h}")));
    }
    let alpha = problem.alpha();
    let weights = AdamsWeights::new(alpha, n_steps);
    let pred_scale = h.powf(alpha) / gamma(alpha + 1.0);
    let corr_scale = h.powf(alpha) / gamma(alpha + 2.0);

    let mut traj = Trajectory::with_capacity(0.0, h, n_steps + 1)?;
    let x0 = problem.init()[0];
    let f0 = problem.rhs(0.0, x0)?;
    traj.push(x0, f0);
    traj.stats_mut().rhs_evals += 1;

    for n in 0..n_steps {
        let t_next = (n + 1) as f64 * h;
        let head = problem.taylor_head(t_next);
        let f = traj.f_cache();
        let mut pred = 0.0;
        let mut corr = 0.0;
        for (j, &fj) in f.iter().enumerate() {
            pred += weights.b(j, n) * fj;
            corr += weights.a(j, n) * fj;
        }
        let x_pred = head + pred_scale * pred;
        let f_pred = problem.rhs(t_next, x_pred)?;
        let x_next = head + corr_scale * (f_pred + corr);
        let stats = traj.stats_mut();
        stats.history_reads += 2 * (n as u64 + 1);
        stats.rhs_evals += 2;
        if is_divergent(x_pred) || is_divergent(x_next) {
            traj.mark_diverged();
            break;
        }
        let f_next = problem.rhs(t_next, x_next)?;
        traj.push(x_next, f_next);
    }
    Ok(traj)
}

/// `x_0 .. x_{IN-1}` on the grid `t_i = i h`.
pub fn start_values(
    problem: &ProblemSpec,
    h: f64,
    interp_points: usize,
    cfg: &StarterConfig,
    exact_solution: Option<&dyn Fn(f64) -> f64>,
) -> Result<Vec<f64>> {
    Ok(starter_samples(problem, h, interp_points, cfg, h, exact_solution)?.0)
}

/// Values at `t_i = i spacing`, `i < count`, together with the work spent.
///
/// In refined mode the Adams substep is `base_h 10^-k`, which must divide `spacing`.
pub(crate) fn starter_samples(
    problem: &ProblemSpec,
    spacing: f64,
    count: usize,
    cfg: &StarterConfig,
    base_h: f64,
    exact_solution: Option<&dyn Fn(f64) -> f64>,
) -> Result<(Vec<f64>, SolveStats)> {
    cfg.validate()?;
    if count == 0 {
        return Ok((Vec::new(), SolveStats::default()));
    }
    match cfg {
        StarterConfig::Exact => {
            let exact = exact_solution.ok_or_else(|| {
                Error::Config("exact-start mode requires a registered exact solution".into())
            })?;
            Ok(((0..count).map(|i| exact(i as f64 * spacing)).collect(), SolveStats::default()))
        }
        StarterConfig::RefinedAdams { k } => {
            let h0 = base_h / 10f64.powi(*k as i32);
            let ratio_f = spacing / h0;
            let ratio = ratio_f.round() as usize;
            if ratio == 0 || (ratio_f - ratio as f64).abs() > 1e-9 * ratio_f {
                return Err(Error::Config(format!(
                    "starter substep {h0} does not divide the sampling spacing {spacing}"
                )));
            }
            let steps = (count - 1) * ratio;
            if steps == 0 {
                return Ok((vec![problem.init()[0]], SolveStats::default()));
            }
            let fine = adams_solve(problem, h0, steps)?;
            if fine.len() != steps + 1 {
                return Err(Error::Diverged { t: fine.t(fine.len()) });
            }
            let values = (0..count).map(|i| fine.x()[i * ratio]).collect();
            Ok((values, fine.stats()))
        }
    }
}
