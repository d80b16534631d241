//! The one-parameter Mittag-Leffler function `E_alpha(z)` for real `z <= 0`.
//!
//! Three regimes, chosen per argument with `u = |z|^(1/alpha)`:
//!
//! * plain `f64` power series with compensated summation while the largest
//!   term (about `e^u`) stays small;
//! * the optimally truncated asymptotic expansion for `|z| >= z_switch(alpha)`,
//!   plus the decaying oscillatory pair when `1 < alpha < 2`;
//! * the power series in double-double arithmetic in between.
//!
//! Per-order coefficient tables and `z_switch` are computed once and cached.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma_dd, rgamma};
use crate::xprec::DoubleDouble;

type Dd = DoubleDouble;

pub const DEFAULT_TOL: f64 = 1e-12;

/// `u` up to which the `f64` series loses at most ~2 digits.
const F64_SERIES_U: f64 = 4.0;
/// Largest `|z|` for the `f64` series regardless of order.
const F64_SERIES_Z: f64 = 5.0;
/// Target error of the asymptotic expansion when locating `z_switch`.
const ASYMPTOTIC_TARGET: f64 = 1e-13;
/// Largest `Gamma` argument tabulated for the series.
const SERIES_GAMMA_LIMIT: f64 = 168.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MLQuery {
    pub alpha: f64,
    pub z: f64,
    pub tol: f64,
}

impl MLQuery {
    pub fn new(alpha: f64, z: f64) -> Self {
        Self { alpha, z, tol: DEFAULT_TOL }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::Domain(format!("Mittag-Leffler order must lie in (0, 2], got {}", self.alpha)));
        }
        if !(self.z <= 0.0) || !self.z.is_finite() {
            return Err(Error::Domain(format!("Mittag-Leffler argument must be finite and <= 0, got {}", self.z)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Which evaluation path produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Closed,
    Series,
    ExtendedSeries,
    Asymptotic,
}

struct Tables {
    alpha: f64,
    /// `1 / Gamma(alpha k + 1)` in double-double.
    rg_dd: Vec<Dd>,
    rg: Vec<f64>,
    z_switch: f64,
}

fn cache() -> &'static Mutex<HashMap<u64, Arc<Tables>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Tables>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn tables(alpha: f64) -> Arc<Tables> {
    let key = alpha.to_bits();
    if let Some(t) = cache().lock().expect("cache poisoned").get(&key) {
        return Arc::clone(t);
    }
    let built = Arc::new(Tables::build(alpha));
    let mut guard = cache().lock().expect("cache poisoned");
    Arc::clone(guard.entry(key).or_insert(built))
}

impl Tables {
    fn build(alpha: f64) -> Self {
        let terms = (SERIES_GAMMA_LIMIT / alpha).floor() as usize;
        let a = Dd::from(alpha);
        let rg_dd: Vec<Dd> = (0..=terms)
            .map(|k| gamma_dd(a * Dd::from(k) + 1.0).recip())
            .collect();
        let rg = rg_dd.iter().map(|v| v.to_f64()).collect();
        let mut t = Self { alpha, rg_dd, rg, z_switch: f64::INFINITY };
        t.z_switch = t.locate_switch();
        t
    }

    /// Smallest `|z|` on a fine `u` grid where the asymptotic expansion meets
    /// its target and agrees with the extended-precision series.
    fn locate_switch(&self) -> f64 {
        let mut u = F64_SERIES_U;
        while u < 200.0 {
            let x = u.powf(self.alpha);
            if let Some((value, err)) = asymptotic(self.alpha, x) {
                if err <= ASYMPTOTIC_TARGET {
                    match self.series_dd(-x) {
                        Some((s, loss)) if loss <= ASYMPTOTIC_TARGET => {
                            if (s - value).abs() <= 10.0 * ASYMPTOTIC_TARGET {
                                return x;
                            }
                        }
                        // The series can no longer check it; the error estimate alone decides.
                        _ => return x,
                    }
                }
            }
            u += 0.25;
        }
        f64::INFINITY
    }

    /// `f64` series with Neumaier summation; `None` if the tabulated terms run out.
    fn series_f64(&self, z: f64) -> Option<(f64, f64)> {
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut pow = 1.0;
        let mut max_term: f64 = 0.0;
        for (k, &rg) in self.rg.iter().enumerate() {
            let term = pow * rg;
            let t = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
            max_term = max_term.max(term.abs());
            if k > 2 && term.abs() < 1e-18 * max_term.max(1.0) {
                return Some((sum + comp, max_term * 4e-16));
            }
            pow *= z;
            if !pow.is_finite() {
                return None;
            }
        }
        None
    }

    /// Double-double series; returns the value and an estimate of the rounding loss.
    fn series_dd(&self, z: f64) -> Option<(f64, f64)> {
        let zd = Dd::from(z);
        let mut sum = Dd::ZERO;
        let mut pow = Dd::ONE;
        let mut max_term: f64 = 0.0;
        for (k, &rg) in self.rg_dd.iter().enumerate() {
            let term = pow * rg;
            sum += term;
            let mag = term.to_f64().abs();
            max_term = max_term.max(mag);
            if k > 2 && mag < 1e-34 * max_term.max(1.0) {
                return Some((sum.to_f64(), max_term * 1e-31 + f64::EPSILON * sum.to_f64().abs()));
            }
            pow *= zd;
            if !pow.is_finite() {
                return None;
            }
        }
        None
    }
}

/// `ln Gamma(y)` for `y > 0`, accurate enough to compare term sizes.
fn ln_gamma_rough(y: f64) -> f64 {
    if y < 8.0 {
        let mut shift = 0.0;
        let mut z = y;
        while z < 8.0 {
            shift += z.ln();
            z += 1.0;
        }
        return ln_gamma_rough(z) - shift;
    }
    (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * y)
}

/// Optimally truncated expansion at `z = -x`; returns the value and the first
/// omitted term's envelope as the error estimate.
///
/// `|1/Gamma(1 - alpha k)| <= Gamma(alpha k) / pi`, and the oscillating sine
/// factor makes individual terms non-monotone, so truncation is decided on
/// the envelope `Gamma(alpha k) x^-k / pi`.
fn asymptotic(alpha: f64, x: f64) -> Option<(f64, f64)> {
    let ln_x = x.ln();
    let envelope = |k: usize| (ln_gamma_rough(alpha * k as f64) - k as f64 * ln_x).exp() / PI;
    let mut sum = 0.0;
    let neg_inv = -1.0 / x;
    let mut pow = neg_inv;
    let mut k = 1usize;
    let err = loop {
        let next = envelope(k + 1);
        let term = pow * rgamma(1.0 - alpha * k as f64);
        if !term.is_finite() {
            return None;
        }
        sum -= term;
        if next >= envelope(k) || k >= 2000 {
            break next;
        }
        k += 1;
        pow *= neg_inv;
        if pow == 0.0 {
            break 0.0;
        }
    };
    if alpha > 1.0 {
        let u = x.powf(1.0 / alpha);
        let theta = PI / alpha;
        sum += 2.0 / alpha * (u * theta.cos()).exp() * (u * theta.sin()).cos();
    }
    Some((sum, err))
}

/// `E_alpha(z)` together with the regime that produced it.
pub fn mittag_leffler_with_regime(q: MLQuery) -> Result<(f64, Regime)> {
    q.validate()?;
    let (alpha, z) = (q.alpha, q.z);
    if z == 0.0 {
        return Ok((1.0, Regime::Closed));
    }
    if alpha == 1.0 {
        return Ok((z.exp(), Regime::Closed));
    }
    if alpha == 2.0 {
        return Ok(((-z).sqrt().cos(), Regime::Closed));
    }
    let x = -z;
    let u = x.powf(1.0 / alpha);
    let tab = tables(alpha);
    if u <= F64_SERIES_U && x <= F64_SERIES_Z {
        if let Some((v, loss)) = tab.series_f64(z) {
            if loss <= q.tol {
                return Ok((v, Regime::Series));
            }
        }
    }
    if x >= tab.z_switch {
        if let Some((v, err)) = asymptotic(alpha, x) {
            if err <= q.tol {
                return Ok((v, Regime::Asymptotic));
            }
        }
    }
    if let Some((v, loss)) = tab.series_dd(z) {
        if loss <= q.tol {
            return Ok((v, Regime::ExtendedSeries));
        }
    }
    Err(Error::AccuracyUnreachable { alpha, z, tol: q.tol })
}

pub fn mittag_leffler(q: MLQuery) -> Result<f64> {
    Ok(mittag_leffler_with_regime(q)?.0)
}

/// `x(t) = E_alpha(-t^alpha)`, the solution of `D^alpha x = -x`, `x(0) = 1`.
pub fn ml_solution(alpha: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    mittag_leffler(MLQuery::new(alpha, -t.powf(alpha)))
}

/// The cached switch point `z_switch(alpha)` (as a magnitude).
pub fn switch_point(alpha: f64) -> Result<f64> {
    MLQuery::new(alpha, 0.0).validate()?;
    Ok(tables(alpha).z_switch)
}
