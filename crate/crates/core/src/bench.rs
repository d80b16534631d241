//! Experiment harness: convergence sweeps, timing runs and flat-file export.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adams::adams_solve;
use crate::error::{Error, Result};
use crate::jpc::{solve, SolverConfig};
use crate::mittag_leffler::ml_solution;
use crate::problem::{ProblemSpec, SolveStatus, Trajectory};
use crate::special::gamma;
use crate::split::SplitConfig;

/// Problems with a registered closed-form solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinProblem {
    /// `D^a x = -x + g(t)` with `x(t) = t^8 + 3 t^7`.
    Poly8,
    /// `D^a x = -x`, `x(0) = 1`, solved by `E_a(-t^a)`.
    MlLinear,
}

impl BuiltinProblem {
    pub fn id(self) -> &'static str {
        match self {
            BuiltinProblem::Poly8 => "poly8",
            BuiltinProblem::MlLinear => "ml_linear",
        }
    }

    pub fn default_t_end(self) -> f64 {
        match self {
            BuiltinProblem::Poly8 => 1.0,
            BuiltinProblem::MlLinear => 1.1,
        }
    }

    /// The solution of `ml_linear` is not smooth at the origin, so it is run
    /// with the split solver by default.
    pub fn default_split(self) -> Option<SplitConfig> {
        match self {
            BuiltinProblem::Poly8 => None,
            BuiltinProblem::MlLinear => Some(SplitConfig::new(0.1)),
        }
    }

    pub fn problem(self, alpha: f64, t_end: f64) -> Result<ProblemSpec> {
        let second = alpha > 1.0;
        match self {
            BuiltinProblem::Poly8 => {
                let c8 = gamma(9.0) / gamma(9.0 - alpha);
                let c7 = 3.0 * gamma(8.0) / gamma(8.0 - alpha);
                let init = if second { vec![0.0, 0.0] } else { vec![0.0] };
                let exact = |t: f64| t.powi(8) + 3.0 * t.powi(7);
                Ok(ProblemSpec::new(alpha, init, t_end, move |t, x| {
                    -x + c8 * t.powf(8.0 - alpha) + c7 * t.powf(7.0 - alpha) + exact(t)
                })?
                .with_exact_solution(exact))
            }
            BuiltinProblem::MlLinear => {
                let init = if second { vec![1.0, 0.0] } else { vec![1.0] };
                Ok(ProblemSpec::new(alpha, init, t_end, |_, x| -x)?
                    .with_exact_solution(move |t| ml_solution(alpha, t).unwrap_or(f64::NAN)))
            }
        }
    }
}

impl fmt::Display for BuiltinProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for BuiltinProblem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "poly8" => Ok(BuiltinProblem::Poly8),
            "ml_linear" => Ok(BuiltinProblem::MlLinear),
            other => Err(Error::Config(format!(
                "unknown problem `{other}` (expected poly8 or ml_linear)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Jpc,
    Adams,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Jpc => "jpc",
            Method::Adams => "adams",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "jpc" => Ok(Method::Jpc),
            "adams" => Ok(Method::Adams),
            other => Err(Error::Config(format!("unknown method `{other}` (expected jpc or adams)"))),
        }
    }
}

/// Runs one method at the step `cfg.h` over `[0, T]`.
pub fn run_method(problem: &ProblemSpec, method: Method, cfg: &SolverConfig) -> Result<Trajectory> {
    match method {
        Method::Jpc => solve(problem, cfg),
        Method::Adams => {
            let n = cfg.steps_on(0.0, problem.t_end())?;
            adams_solve(problem, cfg.h, n)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceMeta {
    pub problem: String,
    pub method: Method,
    pub alpha: f64,
    pub interp_points: usize,
    pub quad_index: usize,
    pub starter: String,
    pub split_t0: Option<f64>,
    pub t_end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub max_error: f64,
    /// `None` on the first row.
    pub observed_order: Option<f64>,
    pub status: SolveStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub meta: ConvergenceMeta,
    /// Sorted by `h` descending.
    pub rows: Vec<ConvergenceRow>,
    /// Set when a solve diverged or the error grew as `h` shrank.
    pub unstable: bool,
}

/// `log(e_prev / e) / log(h_prev / h)`, i.e. `log2` of the error ratio when `h` halves.
pub fn observed_order(h_prev: f64, e_prev: f64, h: f64, e: f64) -> f64 {
    (e_prev / e).ln() / (h_prev / h).ln()
}

fn fill_orders(rows: &mut [ConvergenceRow]) {
    for i in 0..rows.len() {
        rows[i].observed_order = if i == 0 {
            None
        } else {
            let (p, c) = (rows[i - 1], rows[i]);
            Some(observed_order(p.h, p.max_error, c.h, c.max_error))
        };
    }
}

/// Solves `problem` at every step in `hs` and reports the maximum error
/// against the registered exact solution on the main grid.
pub fn run_convergence(
    problem: &ProblemSpec,
    problem_id: &str,
    method: Method,
    base: &SolverConfig,
    hs: &[f64],
) -> Result<ConvergenceReport> {
    let exact = problem
        .exact()
        .ok_or_else(|| Error::Config(format!("problem `{problem_id}` has no exact solution")))?;
    let mut rows = hs
        .par_iter()
        .map(|&h| {
            let cfg = SolverConfig { h, ..base.clone() };
            let traj = run_method(problem, method, &cfg)?;
            let max_error = traj.max_error(exact);
            Ok(ConvergenceRow {
                h,
                max_error,
                observed_order: None,
                status: traj.status(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.h.total_cmp(&a.h));
    fill_orders(&mut rows);
    let unstable = rows.iter().any(|r| {
        r.status != SolveStatus::Ok || !r.max_error.is_finite() || r.observed_order.is_some_and(|o| o < 0.0)
    });
    let starter = match method {
        Method::Jpc => base.resolved_starter(problem).to_string(),
        Method::Adams => "none".to_string(),
    };
    Ok(ConvergenceReport {
        meta: ConvergenceMeta {
            problem: problem_id.to_string(),
            method,
            alpha: problem.alpha(),
            interp_points: base.interp_points,
            quad_index: base.quad_index,
            starter,
            split_t0: base.split.map(|s| s.t0),
            t_end: problem.t_end(),
        },
        rows,
        unstable,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    pub wall_seconds: f64,
    /// Right-hand side calls plus history values touched; see [`work_count`].
    pub rhs_evals: u64,
    pub method: Method,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
}

/// Every right-hand side call and every stored `f` value read. For JPC the
/// reads per step are constant, for Adams they grow with the step index.
pub fn work_count(traj: &Trajectory) -> u64 {
    let s = traj.stats();
    s.rhs_evals + s.cache_reads + s.history_reads
}

/// Times each method on `[0, T]` for every `T` in `t_ends` at the fixed step
/// in `base`. Runs are sequential so wall times do not interfere.
pub fn run_timing(
    problem: &ProblemSpec,
    methods: &[Method],
    t_ends: &[f64],
    base: &SolverConfig,
) -> Result<TimingReport> {
    let mut rows = Vec::with_capacity(methods.len() * t_ends.len());
    for &method in methods {
        for &t_end in t_ends {
            let p = problem.with_t_end(t_end)?;
            let n = base.steps_on(0.0, t_end)?;
            let start = Instant::now();
            let traj = run_method(&p, method, base)?;
            let wall_seconds = start.elapsed().as_secs_f64();
            if traj.status() != SolveStatus::Ok {
                return Err(Error::Diverged { t: traj.grid().end() });
            }
            rows.push(TimingRow {
                n,
                wall_seconds,
                rhs_evals: work_count(&traj),
                method,
            });
        }
    }
    Ok(TimingReport { rows })
}

/// Smallest `N` (step `T / N`) whose maximum error is at most `target`,
/// found by doubling from `n_min` and then bisecting. Errors are assumed
/// to decrease with `N`; the result is not guaranteed otherwise.
pub fn min_steps_for_error(
    problem: &ProblemSpec,
    method: Method,
    base: &SolverConfig,
    target: f64,
    n_min: usize,
    n_max: usize,
) -> Result<usize> {
    let exact = problem
        .exact()
        .ok_or_else(|| Error::Config("error search needs an exact solution".into()))?;
    let t_end = problem.t_end();
    let error_at = |n: usize| -> Result<f64> {
        let cfg = SolverConfig { h: t_end / n as f64, ..base.clone() };
        let traj = run_method(problem, method, &cfg)?;
        Ok(if traj.status() == SolveStatus::Ok { traj.max_error(exact) } else { f64::INFINITY })
    };
    let mut hi = n_min.max(1);
    let mut lo = 0;
    while error_at(hi)? > target {
        if hi >= n_max {
            return Err(Error::Config(format!("error {target:e} not reached with N <= {n_max}")));
        }
        lo = hi;
        hi = (hi * 2).min(n_max);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if mid >= n_min && error_at(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), msg: msg.into() }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn data_lines<'a>(text: &'a str, header: &str, path: &Path) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => Ok(lines),
        _ => Err(format_err(path, format!("expected header `{header}`"))),
    }
}

fn parse_real(field: &str, line: usize, path: &Path) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| format_err(path, format!("line {}: bad number `{field}`", line + 1)))
}

pub const CONVERGENCE_HEADER: &str = "h,max_error,observed_order";
pub const TIMING_HEADER: &str = "N,wall_seconds,rhs_evals,method";

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CONVERGENCE_HEADER}\n");
        for r in &self.rows {
            let order = r.observed_order.map(real).unwrap_or_default();
            out += &format!("{},{},{}\n", real(r.h), real(r.max_error), order);
        }
        out
    }

    /// Rows only; metadata travels in the JSON form.
    pub fn rows_from_csv(text: &str, path: &Path) -> Result<Vec<ConvergenceRow>> {
        data_lines(text, CONVERGENCE_HEADER, path)?
            .map(|(i, line)| {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 3 {
                    return Err(format_err(path, format!("line {}: expected 3 fields", i + 1)));
                }
                let observed_order = match fields[2].trim() {
                    "" => None,
                    f => Some(parse_real(f, i, path)?),
                };
                Ok(ConvergenceRow {
                    h: parse_real(fields[0], i, path)?,
                    max_error: parse_real(fields[1], i, path)?,
                    observed_order,
                    status: SolveStatus::Ok,
                })
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_csv())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are always serializable")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        serde_json::from_str(&read_file(path)?).map_err(|e| format_err(path, e.to_string()))
    }

    pub fn read_csv_rows(path: &Path) -> Result<Vec<ConvergenceRow>> {
        Self::rows_from_csv(&read_file(path)?, path)
    }
}

impl TimingReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{TIMING_HEADER}\n");
        for r in &self.rows {
            out += &format!("{},{},{},{}\n", r.n, real(r.wall_seconds), r.rhs_evals, r.method);
        }
        out
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let rows = data_lines(text, TIMING_HEADER, path)?
            .map(|(i, line)| {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 4 {
                    return Err(format_err(path, format!("line {}: expected 4 fields", i + 1)));
                }
                let int = |f: &str| {
                    f.trim()
                        .parse::<u64>()
                        .map_err(|_| format_err(path, format!("line {}: bad integer `{f}`", i + 1)))
                };
                Ok(TimingRow {
                    n: int(fields[0])? as usize,
                    wall_seconds: parse_real(fields[1], i, path)?,
                    rhs_evals: int(fields[2])?,
                    method: fields[3].parse().map_err(|e: Error| format_err(path, e.to_string()))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_csv())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&read_file(path)?, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are always serializable")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_json())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        serde_json::from_str(&read_file(path)?).map_err(|e| format_err(path, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_follow_halving() {
        let mut rows: Vec<ConvergenceRow> = [(0.1, 8e-3), (0.05, 1e-3), (0.025, 1.25e-4)]
            .iter()
            .map(|&(h, e)| ConvergenceRow { h, max_error: e, observed_order: None, status: SolveStatus::Ok })
            .collect();
        fill_orders(&mut rows);
        assert_eq!(rows[0].observed_order, None);
        assert!((rows[1].observed_order.unwrap() - 3.0).abs() < 1e-12);
        assert!((rows[2].observed_order.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for p in [BuiltinProblem::Poly8, BuiltinProblem::MlLinear] {
            assert_eq!(p.id().parse::<BuiltinProblem>().unwrap(), p);
        }
        assert!("cubic".parse::<BuiltinProblem>().is_err());
        assert_eq!("adams".parse::<Method>().unwrap(), Method::Adams);
    }
}
