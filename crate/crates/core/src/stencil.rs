//! Uniform-grid interpolation stencils.
//!
//! For a target time inside the history window, [`select_stencil`] picks `IN`
//! consecutive grid nodes following the predictor/corrector neighborhood
//! rules: `Pl` near the origin, `Pr` (predictor) or `Cr` (corrector) at the
//! right end of the history, and a centered `P` stencil with `ln` nodes to the
//! left of the target and `rn` to the right everywhere else.

use crate::error::{Error, Result};

/// Relative distance (in units of `h`) under which a node counts as coinciding
/// with the target.
const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformGrid {
    pub origin: f64,
    pub h: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn new(origin: f64, h: f64, count: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Config(format!("step must be positive, got {h}")));
        }
        if !(origin >= 0.0) {
            return Err(Error::Config(format!("grid origin must be non-negative, got {origin}")));
        }
        Ok(Self { origin, h, count })
    }

    #[inline]
    pub fn t(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.h
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.t(i))
    }

    pub fn end(&self) -> f64 {
        self.t(self.count.saturating_sub(1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StencilKind {
    /// The first `IN` nodes.
    Pl,
    /// The last `IN` accepted nodes (predictor extrapolation).
    Pr,
    /// The last `IN - 1` accepted nodes plus the predicted node.
    Cr,
    /// Centered around the target.
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stencil {
    pub start: usize,
    pub length: usize,
    pub kind: StencilKind,
}

impl Stencil {
    pub fn end(&self) -> usize {
        self.start + self.length
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Predictor,
    Corrector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StencilParams {
    size: usize,
    left: usize,
    right: usize,
}

impl StencilParams {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::Config(format!(
                "interpolation stencil needs at least 2 nodes, got {size}"
            )));
        }
        Ok(Self {
            size,
            left: size.div_ceil(2),
            right: size / 2,
        })
    }

    /// `IN`, the number of interpolation nodes.
    pub fn size(&self) -> usize {
        self.size
    }

    /// `ln = ceil(IN / 2)`.
    pub fn left(&self) -> usize {
        self.left
    }

    /// `rn = floor(IN / 2)`.
    pub fn right(&self) -> usize {
        self.right
    }
}

/// Picks the interpolation stencil for `target_t` at step `n -> n + 1`.
///
/// In the predictor phase nodes `0..=n` carry values; in the corrector phase
/// node `n + 1` carries the value from the predicted state as well.
pub fn select_stencil(
    target_t: f64,
    grid: &UniformGrid,
    params: &StencilParams,
    n: usize,
    phase: Phase,
) -> Result<Stencil> {
    let size = params.size;
    if n + 1 < size {
        return Err(Error::InsufficientHistory { n, needed: size });
    }
    let usable = match phase {
        Phase::Predictor => n + 1,
        Phase::Corrector => n + 2,
    };
    let u = (target_t - grid.origin) / grid.h;
    let left_nodes = if u < -TIE_TOL {
        0
    } else {
        ((u + TIE_TOL).floor() as usize + 1).min(usable)
    };

    let (start, kind) = if left_nodes <= params.left {
        (0, StencilKind::Pl)
    } else if phase == Phase::Predictor && left_nodes + params.right > n {
        (n + 1 - size, StencilKind::Pr)
    } else if phase == Phase::Corrector && left_nodes + params.right >= n + 2 {
        (n + 2 - size, StencilKind::Cr)
    } else {
        (left_nodes - params.left, StencilKind::P)
    };
    Ok(Stencil {
        start,
        length: size,
        kind,
    })
}

/// Affine map of `s ∈ [-1, 1]` onto `[left, right]`; the endpoints map exactly.
#[inline]
pub fn map_node(s: f64, left: f64, right: f64) -> f64 {
    if s == -1.0 {
        left
    } else if s == 1.0 {
        right
    } else {
        left + (1.0 + s) * (right - left) * 0.5
    }
}

/// Lagrange interpolation in barycentric form through arbitrary distinct nodes.
pub fn lagrange_eval(times: &[f64], values: &[f64], target_t: f64) -> Result<f64> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::Config("interpolation needs matching, non-empty node and value lists".into()));
    }
    let mut weights = vec![1.0; times.len()];
    for (k, &tk) in times.iter().enumerate() {
        for (j, &tj) in times.iter().enumerate() {
            if j != k {
                let d = tk - tj;
                if d == 0.0 {
                    return Err(Error::DuplicateNodes);
                }
                weights[k] /= d;
            }
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&tk, &fk), &wk) in times.iter().zip(values).zip(&weights) {
        let d = target_t - tk;
        if d == 0.0 {
            return Ok(fk);
        }
        let c = wk / d;
        num += c * fk;
        den += c;
    }
    Ok(num / den)
}

/// Barycentric interpolation on `IN` equispaced nodes; the weights are the
/// alternating binomial coefficients `(-1)^k C(IN-1, k)`.
#[derive(Clone, Debug)]
pub struct UniformInterpolator {
    weights: Vec<f64>,
}

impl UniformInterpolator {
    pub fn new(size: usize) -> Self {
        let mut weights = Vec::with_capacity(size);
        let mut c = 1.0;
        for k in 0..size {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            weights.push(sign * c);
            c = c * (size - 1 - k) as f64 / (k + 1) as f64;
        }
        Self { weights }
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    /// Interpolates `values` (taken at offsets `0, 1, .., IN-1`) at the offset `u`.
    #[inline]
    pub fn eval(&self, values: &[f64], u: f64) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, (&w, &f)) in self.weights.iter().zip(values).enumerate() {
            let d = u - k as f64;
            if d == 0.0 {
                return f;
            }
            let c = w / d;
            num += c * f;
            den += c;
        }
        num / den
    }
}
