//! Gauss-Lobatto quadrature for Jacobi weights `(1-s)^a (1+s)^b` on `[-1, 1]`.
//!
//! Rules are built from the three-term recurrence of the monic Jacobi
//! polynomials. The last recurrence coefficients are replaced so that both
//! `-1` and `+1` become eigenvalues of the Jacobi matrix; the interior nodes
//! are located in `f64` and refined by Newton's method in double-double
//! arithmetic, and the weights come from the Christoffel function evaluated
//! in the same precision. Everything is rounded to `f64` only at the end.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::beta_dd;
use crate::xprec::DoubleDouble;

type Dd = DoubleDouble;

const NEWTON_TOL: f64 = 1e-30;
const NEWTON_MAX_ITER: usize = 40;

/// The weight `(1-s)^a (1+s)^b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiWeight {
    pub a: f64,
    pub b: f64,
}

impl JacobiWeight {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let w = Self { a, b };
        w.validate()?;
        Ok(w)
    }

    /// The weight `(1-s)^(alpha-1)` that absorbs the Riemann-Liouville kernel.
    pub fn fractional(alpha: f64) -> Result<Self> {
        Self::new(alpha - 1.0, 0.0)
    }

    /// The constant weight, i.e. Gauss-Lobatto-Legendre.
    pub fn legendre() -> Self {
        Self { a: 0.0, b: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > -1.0) || !(self.b > -1.0) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::Domain(format!(
                "Jacobi weight exponents must exceed -1, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// Zeroth moment `2^(a+b+1) B(a+1, b+1)` in double-double precision.
    fn mu0_dd(&self) -> Dd {
        let a = Dd::from(self.a);
        let b = Dd::from(self.b);
        let scale = Dd::from(2.0).powf(a + b + 1.0);
        if self.b == 0.0 {
            scale / (a + 1.0)
        } else if self.a == 0.0 {
            scale / (b + 1.0)
        } else {
            scale * beta_dd(a + 1.0, b + 1.0)
        }
    }
}

/// Three-term recurrence `p_{k+1}(s) = (s - alpha_k) p_k(s) - beta_k p_{k-1}(s)`
/// of the monic orthogonal polynomials. `beta_k[0]` is unused and stored as `mu0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceCoefficients {
    pub alpha_k: Vec<f64>,
    pub beta_k: Vec<f64>,
    pub mu0: f64,
}

struct RecurrenceDd {
    alpha: Vec<Dd>,
    beta: Vec<Dd>,
    mu0: Dd,
}

fn recurrence_dd(weight: &JacobiWeight, n: usize) -> RecurrenceDd {
    let a = Dd::from(weight.a);
    let b = Dd::from(weight.b);
    let ab = a + b;
    let mu0 = weight.mu0_dd();
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for k in 0..n {
        let kf = Dd::from(k);
        let two_k_ab = kf * 2.0 + ab;
        let alpha_k = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b.sqr() - a.sqr()) / (two_k_ab * (two_k_ab + 2.0))
        };
        alpha.push(alpha_k);
        let beta_k = match k {
            0 => mu0,
            // The general formula has a removable 0/0 at k = 1 when a + b = -1.
            1 => (a + 1.0) * (b + 1.0) * 4.0 / ((ab + 2.0).sqr() * (ab + 3.0)),
            _ => {
                kf * (kf + a) * (kf + b) * (kf + ab) * 4.0
                    / (two_k_ab.sqr() * (two_k_ab + 1.0) * (two_k_ab - 1.0))
            }
        };
        beta.push(beta_k);
    }
    RecurrenceDd { alpha, beta, mu0 }
}

/// First `n` recurrence coefficients of the monic Jacobi polynomials for `weight`.
pub fn jacobi_recurrence(weight: &JacobiWeight, n: usize) -> Result<RecurrenceCoefficients> {
    weight.validate()?;
    if n == 0 {
        return Err(Error::Domain("need at least one recurrence coefficient".into()));
    }
    let rec = recurrence_dd(weight, n);
    Ok(RecurrenceCoefficients {
        alpha_k: rec.alpha.iter().map(|v| v.to_f64()).collect(),
        beta_k: rec.beta.iter().map(|v| v.to_f64()).collect(),
        mu0: rec.mu0.to_f64(),
    })
}

fn moments_dd(weight: &JacobiWeight, k_max: usize) -> Vec<Dd> {
    // Integrating d/ds[s^k (1-s)^(a+1) (1+s)^(b+1)] over [-1, 1] gives
    // (k + a + b + 2) M_{k+1} = k M_{k-1} + (b - a) M_k.
    let a = Dd::from(weight.a);
    let b = Dd::from(weight.b);
    let mut m = Vec::with_capacity(k_max + 1);
    m.push(weight.mu0_dd());
    for k in 0..k_max {
        let kf = Dd::from(k);
        let prev = if k == 0 { Dd::ZERO } else { m[k - 1] * kf };
        let next = (prev + (b - a) * m[k]) / (kf + a + b + 2.0);
        m.push(next);
    }
    m
}

/// `∫_{-1}^{1} s^k (1-s)^a (1+s)^b ds`, exact up to double-double rounding.
pub fn moment(weight: &JacobiWeight, k: usize) -> Result<f64> {
    weight.validate()?;
    Ok(moments_dd(weight, k)[k].to_f64())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    GaussLobatto,
}

/// Nodes in ascending order with their positive weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    weight: JacobiWeight,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: RuleKind,
}

impl QuadratureRule {
    pub fn weight_function(&self) -> JacobiWeight {
        self.weight
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `Σ_j w_j g(s_j)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.iter().map(|(s, w)| w * g(s)).sum()
    }

    /// Like [`integrate`](Self::integrate), stopping at the first failed evaluation.
    pub fn try_integrate<E, F>(&self, mut g: F) -> Result<f64, E>
    where
        F: FnMut(f64) -> Result<f64, E>,
    {
        let mut acc = 0.0;
        for (s, w) in self.iter() {
            acc += w * g(s)?;
        }
        Ok(acc)
    }

    /// `node,weight` CSV with 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,weight\n");
        for (s, w) in self.iter() {
            let _ = writeln!(out, "{s:.16e},{w:.16e}");
        }
        out
    }
}

/// Symmetric tridiagonal eigenvalues by implicit QL with Wilkinson shifts.
/// `off[i]` couples rows `i` and `i + 1`.
fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Convergence(format!("QL iteration stalled on eigenvalue {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Monic polynomial values `p_0(x) .. p_deg(x)` under the given coefficients.
fn monic_values(alpha: &[Dd], beta: &[Dd], x: Dd, deg: usize) -> Vec<Dd> {
    let mut p = Vec::with_capacity(deg + 1);
    p.push(Dd::ONE);
    if deg >= 1 {
        p.push(x - alpha[0]);
    }
    for k in 1..deg {
        let next = (x - alpha[k]) * p[k] - beta[k] * p[k - 1];
        p.push(next);
    }
    p
}

/// Value and derivative of the degree-`deg` monic polynomial.
fn monic_with_derivative(alpha: &[Dd], beta: &[Dd], x: Dd, deg: usize) -> (Dd, Dd) {
    let (mut p_prev, mut p) = (Dd::ZERO, Dd::ONE);
    let (mut d_prev, mut d) = (Dd::ZERO, Dd::ZERO);
    for k in 0..deg {
        let b = if k == 0 { Dd::ZERO } else { beta[k] };
        let p_next = (x - alpha[k]) * p - b * p_prev;
        let d_next = p + (x - alpha[k]) * d - b * d_prev;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Gauss-Lobatto rule with `n_points` nodes including both endpoints, exact for
/// polynomials of degree `2 n_points - 3` against `weight`.
pub fn gauss_lobatto_rule(weight: &JacobiWeight, n_points: usize) -> Result<QuadratureRule> {
    weight.validate()?;
    if n_points < 3 {
        return Err(Error::Domain(format!(
            "a Gauss-Lobatto rule needs at least 3 points, got {n_points}"
        )));
    }
    let n = n_points - 1;
    let rec = recurrence_dd(weight, n_points);
    let mut alpha = rec.alpha;
    let mut beta = rec.beta;

    // Replace alpha_n, beta_n so that p_{n+1}(±1) = 0:
    //   alpha_n p_n(x) + beta_n p_{n-1}(x) = x p_n(x)  for x = -1, +1.
    let lo = monic_values(&alpha, &beta, Dd::from(-1.0), n);
    let hi = monic_values(&alpha, &beta, Dd::ONE, n);
    let (a11, a12, r1) = (lo[n], lo[n - 1], -lo[n]);
    let (a21, a22, r2) = (hi[n], hi[n - 1], hi[n]);
    let det = a11 * a22 - a12 * a21;
    alpha[n] = (r1 * a22 - a12 * r2) / det;
    beta[n] = (a11 * r2 - r1 * a21) / det;
    if !(beta[n].hi() > 0.0) {
        return Err(Error::Convergence(format!(
            "Lobatto modification produced non-positive coefficient {:e}",
            beta[n].hi()
        )));
    }

    let diag: Vec<f64> = alpha.iter().map(|v| v.to_f64()).collect();
    let off: Vec<f64> = beta[1..=n].iter().map(|v| v.to_f64().sqrt()).collect();
    let guesses = tridiagonal_eigenvalues(&diag, &off)?;

    let mut nodes_dd = Vec::with_capacity(n_points);
    nodes_dd.push(Dd::from(-1.0));
    for (i, &guess) in guesses[1..n].iter().enumerate() {
        let mut x = Dd::from(guess);
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = monic_with_derivative(&alpha, &beta, x, n + 1);
            let step = p / dp;
            x -= step;
            if step.abs().to_f64() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence(format!(
                "Newton refinement of interior node {} stalled near {guess}",
                i + 1
            )));
        }
        nodes_dd.push(x);
    }
    nodes_dd.push(Dd::ONE);
    for pair in nodes_dd.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::Convergence("refined nodes are not strictly increasing".into()));
        }
    }

    // Christoffel numbers: w = mu0 / Σ_k p_k(x)^2 / (beta_1 ... beta_k).
    let mut norms = Vec::with_capacity(n_points);
    norms.push(Dd::ONE);
    for k in 1..=n {
        let prev = norms[k - 1];
        norms.push(prev * beta[k]);
    }
    let mut weights = Vec::with_capacity(n_points);
    for &x in &nodes_dd {
        let p = monic_values(&alpha, &beta, x, n);
        let sum: Dd = p.iter().zip(&norms).map(|(pk, nk)| pk.sqr() / *nk).sum();
        let w = rec.mu0 / sum;
        if !(w.hi() > 0.0) {
            return Err(Error::Convergence(format!("non-positive weight at node {x}")));
        }
        weights.push(w.to_f64());
    }

    Ok(QuadratureRule {
        weight: *weight,
        nodes: nodes_dd.iter().map(|v| v.to_f64()).collect(),
        weights,
        kind: RuleKind::GaussLobatto,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_recurrence() {
        let rec = jacobi_recurrence(&JacobiWeight::legendre(), 2).unwrap();
        assert_eq!(rec.alpha_k[0], 0.0);
        assert_eq!(rec.alpha_k[1], 0.0);
        assert!((rec.beta_k[1] - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(rec.mu0, 2.0);
    }

    #[test]
    fn closed_form_zeroth_moments() {
        let w = JacobiWeight::new(-0.5, 0.0).unwrap();
        let rec = jacobi_recurrence(&w, 1).unwrap();
        assert!((rec.mu0 - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        let w = JacobiWeight::new(0.8, 0.0).unwrap();
        assert!((moment(&w, 0).unwrap() - 2f64.powf(1.8) / 1.8).abs() < 1e-15);
        assert!((moment(&w, 0).unwrap() - 1.9345568).abs() < 1e-7);
    }

    #[test]
    fn first_moment_closed_form() {
        let w = JacobiWeight::new(-0.5, 0.0).unwrap();
        let expected = 2f64.powf(0.5) / 0.5 - 2f64.powf(1.5) / 1.5;
        assert!((moment(&w, 1).unwrap() - expected).abs() < 1e-15);
        assert!((moment(&w, 1).unwrap() - 0.9428090).abs() < 1e-7);
    }

    #[test]
    fn moment_recurrence_matches_binomial_expansion() {
        // With u = 1 - s and b = 0: M_k = Σ_i C(k,i) (-1)^i 2^(a+i+1) / (a+i+1).
        // Fine in plain f64 for small k.
        let a = 0.37;
        let w = JacobiWeight::new(a, 0.0).unwrap();
        for k in 0..8usize {
            let mut acc = 0.0;
            let mut binom = 1.0;
            for i in 0..=k {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * 2f64.powf(a + i as f64 + 1.0) / (a + i as f64 + 1.0);
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
            let m = moment(&w, k).unwrap();
            assert!((m - acc).abs() < 1e-13 * acc.abs().max(1.0), "k = {k}: {m} vs {acc}");
        }
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(matches!(JacobiWeight::new(-1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(JacobiWeight::new(0.0, -1.5), Err(Error::Domain(_))));
        let bad = JacobiWeight { a: -2.0, b: 0.0 };
        assert!(jacobi_recurrence(&bad, 3).is_err());
        assert!(moment(&bad, 0).is_err());
        assert!(gauss_lobatto_rule(&bad, 5).is_err());
    }

    #[test]
    fn too_few_points_rejected() {
        let w = JacobiWeight::legendre();
        assert!(gauss_lobatto_rule(&w, 2).is_err());
        assert!(gauss_lobatto_rule(&w, 3).is_ok());
    }

    #[test]
    fn three_point_legendre_lobatto_is_simpson() {
        let rule = gauss_lobatto_rule(&JacobiWeight::legendre(), 3).unwrap();
        assert_eq!(rule.nodes()[0], -1.0);
        assert!(rule.nodes()[1].abs() < 1e-30);
        assert_eq!(rule.nodes()[2], 1.0);
        let expected = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for (w, e) in rule.weights().iter().zip(expected) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn integrate_constant_gives_zeroth_moment() {
        let w = JacobiWeight::new(-0.5, 0.0).unwrap();
        let rule = gauss_lobatto_rule(&w, 27).unwrap();
        assert!((rule.integrate(|_| 1.0) - 2.8284271247).abs() < 1e-10);
        assert!((rule.integrate(|_| 1.0) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn try_integrate_propagates_failure() {
        let rule = gauss_lobatto_rule(&JacobiWeight::legendre(), 5).unwrap();
        let r: Result<f64, &str> = rule.try_integrate(|s| if s > 0.5 { Err("bad") } else { Ok(s) });
        assert_eq!(r, Err("bad"));
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let rule = gauss_lobatto_rule(&JacobiWeight::legendre(), 4).unwrap();
        let csv = rule.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "node,weight");
        assert_eq!(lines.len(), 5);
        let (s, w) = lines[1].split_once(',').unwrap();
        assert_eq!(s.parse::<f64>().unwrap(), -1.0);
        assert_eq!(w.parse::<f64>().unwrap(), rule.weights()[0]);
    }
}
