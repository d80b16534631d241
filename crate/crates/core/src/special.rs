//! Gamma-family special functions in `f64` and double-double precision.

use std::f64::consts::PI;

use crate::xprec::DoubleDouble;

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// The Gamma function for real arguments.
///
/// Returns `NaN` at the poles (non-positive integers) and `+inf` on overflow.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x == x.floor() && x <= 23.0 {
        // Exact factorials.
        return (1..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // Split the power to avoid overflow for x near 171.
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * half * (-t).exp() * series
}

/// `1 / Gamma(x)`, which is entire: exactly zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        // 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
        return (PI * x).sin() * gamma(1.0 - x) / PI;
    }
    let g = gamma(x);
    if g.is_infinite() {
        0.0
    } else {
        1.0 / g
    }
}

/// Bernoulli numbers B_2 .. B_24 as (numerator, denominator).
const BERNOULLI: [(f64, f64); 12] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
];

const STIRLING_SHIFT: f64 = 30.0;

/// Stirling series for ln Gamma(z), accurate to double-double precision for z >= 30.
fn stirling_dd(z: DoubleDouble) -> DoubleDouble {
    let half_ln_two_pi = (DoubleDouble::PI * 2.0).ln() * 0.5;
    let mut acc = (z - 0.5) * z.ln() - z + half_ln_two_pi;
    let z2 = z.sqr();
    let mut zpow = z;
    for (n, &(num, den)) in BERNOULLI.iter().enumerate() {
        let two_n = 2.0 * (n as f64 + 1.0);
        let coeff = DoubleDouble::from(num) / (DoubleDouble::from(den) * (two_n * (two_n - 1.0)));
        acc += coeff / zpow;
        zpow *= z2;
    }
    acc
}

/// ln Gamma(x) in double-double precision for x > 0.
pub fn ln_gamma_dd(x: DoubleDouble) -> DoubleDouble {
    let mut z = x;
    let mut prod = DoubleDouble::ONE;
    while z.hi() < STIRLING_SHIFT {
        prod *= z;
        z += 1.0;
    }
    stirling_dd(z) - prod.ln()
}

/// Gamma(x) in double-double precision for 0 < x <= 170.
pub fn gamma_dd(x: DoubleDouble) -> DoubleDouble {
    let mut z = x;
    let mut prod = DoubleDouble::ONE;
    while z.hi() < STIRLING_SHIFT {
        prod *= z;
        z += 1.0;
    }
    stirling_dd(z).exp() / prod
}

/// Beta(a, b) in double-double precision for a, b > 0.
pub fn beta_dd(a: DoubleDouble, b: DoubleDouble) -> DoubleDouble {
    (ln_gamma_dd(a) + ln_gamma_dd(b) - ln_gamma_dd(a + b)).exp()
}
