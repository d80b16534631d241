#![allow(clippy::excessive_precision)]
#![allow(dead_code)]

use jpc_core::bench::BuiltinProblem;
use jpc_core::ProblemSpec;

pub const STEPS: [f64; 6] = [0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125];

/// Maximum errors for `poly8` on `[0, 1]` at `h = 1/10 .. 1/320`, as printed in the
/// published convergence tables: `(alpha, IN, errors)`.
pub const POLY8_TABLES: &[(f64, usize, [f64; 6])] = &[
    (0.3, 2, [4.21e-1, 8.57e-2, 1.70e-2, 2.98e-3, 6.67e-4, 9.84e-5]),
    (0.5, 2, [2.27e-1, 4.65e-2, 9.99e-3, 1.89e-3, 4.17e-4, 1.06e-4]),
    (0.9, 2, [1.51e-1, 4.03e-2, 8.84e-3, 2.32e-3, 6.16e-4, 1.48e-4]),
    (1.5, 2, [1.47e-1, 3.95e-2, 9.01e-3, 2.35e-3, 6.14e-4, 1.64e-4]),
    (0.3, 3, [1.50e-1, 1.59e-2, 1.57e-3, 1.37e-4, 1.39e-5, 1.06e-6]),
    (0.5, 3, [6.69e-2, 7.01e-3, 7.19e-4, 6.85e-5, 7.05e-6, 9.50e-7]),
    (0.9, 3, [3.51e-2, 4.94e-3, 5.40e-4, 7.32e-5, 9.71e-6, 1.23e-6]),
    (1.5, 3, [3.24e-2, 4.46e-3, 5.89e-4, 7.95e-5, 1.05e-5, 1.37e-6]),
    (0.3, 4, [4.71e-2, 2.41e-3, 1.05e-4, 4.22e-6, 1.80e-7, 4.97e-9]),
    (0.5, 4, [1.48e-2, 5.09e-4, 1.43e-5, 2.99e-7, 1.73e-8, 3.92e-9]),
    (0.9, 4, [7.94e-4, 2.02e-4, 1.59e-5, 1.22e-6, 9.00e-8, 5.74e-9]),
    (1.5, 4, [4.34e-3, 3.65e-4, 2.20e-5, 1.54e-6, 1.08e-7, 6.62e-9]),
];

/// `ml_linear` on `[0, 1.1]` split at 0.1, `h = 1/10 .. 1/160`.
pub const ML_TABLES: &[(f64, usize, [f64; 5])] = &[
    (0.2, 2, [4.84e-3, 1.49e-3, 4.04e-4, 9.96e-5, 2.44e-5]),
    (0.5, 2, [2.30e-3, 5.10e-4, 1.02e-4, 1.89e-5, 3.95e-6]),
    (1.2, 2, [1.20e-4, 3.47e-5, 7.83e-6, 1.87e-6, 5.41e-7]),
    (1.8, 2, [3.72e-4, 1.06e-4, 2.62e-5, 6.35e-6, 1.62e-6]),
    (0.2, 3, [2.77e-3, 6.04e-4, 1.06e-4, 1.29e-5, 1.36e-6]),
    (0.5, 3, [7.30e-4, 1.14e-4, 1.43e-5, 1.40e-6, 3.78e-8]),
    (1.2, 3, [1.11e-5, 3.23e-6, 5.48e-7, 8.88e-8, 1.09e-8]),
    (1.8, 3, [1.64e-5, 3.00e-6, 4.64e-7, 5.91e-8, 7.84e-9]),
];

/// Adams baseline on `poly8`, `alpha = 0.5`, `h = 1/10 .. 1/320`.
pub const ADAMS_TABLE: [f64; 6] = [4.51e-1, 1.46e-1, 4.65e-2, 1.50e-2, 4.90e-3, 1.63e-3];

pub fn poly8(alpha: f64) -> ProblemSpec {
    BuiltinProblem::Poly8.problem(alpha, 1.0).unwrap()
}

pub fn ml_linear(alpha: f64, t_end: f64) -> ProblemSpec {
    BuiltinProblem::MlLinear.problem(alpha, t_end).unwrap()
}

pub fn poly8_exact(t: f64) -> f64 {
    t.powi(8) + 3.0 * t.powi(7)
}

/// Least-squares slope of `-log2(error)` against `log2(1/h)`.
pub fn fitted_order(hs: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| -h.log2()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

/// `true` if `value` is within `factor` of `reference` in either direction.
pub fn within_factor(value: f64, reference: f64, factor: f64) -> bool {
    value <= reference * factor && value >= reference / factor
}

pub const PRECEDENCE_T: f64 = 2.0;
pub const PRECEDENCE_X: f64 = 3.0;
pub const PRECEDENCE_ALPHA: f64 = 0.5;

/// Source and value at `t = 2, x = 3, alpha = 0.5`, worked out by hand.
pub const PRECEDENCE: &[(&str, f64)] = &[
    ("2+3*4^2", 50.0),
    ("-2^2", -4.0),
    ("(-2)^2", 4.0),
    ("2^3^2", 512.0),
    ("(2^3)^2", 64.0),
    ("8/4/2", 1.0),
    ("8/(4/2)", 4.0),
    ("10-4-3", 3.0),
    ("10-(4-3)", 9.0),
    ("2*3+4", 10.0),
    ("2*(3+4)", 14.0),
    ("2+3*4", 14.0),
    ("2^-1", 0.5),
    ("2^-1^2", 0.5),
    ("-x", -3.0),
    ("-(-x)", 3.0),
    ("x - -x", 6.0),
    ("-x^2", -9.0),
    ("t*-x", -6.0),
    ("t/-x*6", -4.0),
    ("-t*x", -6.0),
    ("t^x", 8.0),
    ("t^x/t", 4.0),
    ("x-t-1", 0.0),
    ("x*t^2", 12.0),
    ("(x*t)^2", 36.0),
    ("x^t*t", 18.0),
    ("1+t*x^2-4", 15.0),
    ("t^2^-1", std::f64::consts::SQRT_2),
    ("pow(t, x)", 8.0),
    ("pow(t, x)^2", 64.0),
    ("-pow(t, 2)", -4.0),
    ("sqrt(t+x+4)*3", 9.0),
    ("abs(t-x)*2", 2.0),
    ("alpha*t+x", 4.0),
    ("t^alpha^2", 1.189207115002721),
    ("exp(0)+ln(1)*t", 1.0),
    ("gamma(x+1)/t", 3.0),
    ("1 - t * x / 6 + 2 ^ 2", 4.0),
    ("((((x))))", 3.0),
    ("2e1+1.5E-1*t", 20.3),
    ("cos(0)^2+sin(0)", 1.0),
];
