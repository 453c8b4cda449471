//! Edge energies `w(ℓ)` and their derivatives.
//!
//! Each edge contributes `c · φ(ℓ)` where `c` is its weight and `φ` is
//! fixed by the variant:
//! - quadratic: `φ(x) = x²/2`;
//! - sinh-half-squared: `φ(x) = 2 sinh²(x/2)`, so `φ'(x) = sinh x`;
//! - custom: a cubic Hermite interpolant through sampled `(x, φ, φ')`.

use crate::delaunay_cert::dual_edge_length;
use crate::dual_cocycle::DualRealization;
use crate::error::{Error, Result};
use crate::harmonic::{edge_lengths, EdgeWeights};
use crate::minkowski::MinkVec;
use crate::surface::MarkedSurface;

/// Sampled increasing profile for custom energies.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneTable {
    xs: Vec<f64>,
    ws: Vec<f64>,
    dws: Vec<f64>,
}

impl MonotoneTable {
    /// Builds a table from samples of `φ` and `φ'` on increasing nodes.
    ///
    /// The interpolant's derivative is a quadratic on each interval; it is
    /// required to stay positive over the whole open range.
    pub fn new(xs: Vec<f64>, ws: Vec<f64>, dws: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ws.len() || xs.len() != dws.len() {
            return Err(Error::Monotonicity("need at least two (x, w, w') samples".into()));
        }
        if xs[0] < 0.0 || xs.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Monotonicity("nodes must be increasing and non-negative".into()));
        }
        if let Some(k) = dws.iter().enumerate().position(|(k, &d)| d <= 0.0 && xs[k] > 0.0) {
            return Err(Error::Monotonicity(format!("w' <= 0 at x = {}", xs[k])));
        }
        let t = MonotoneTable { xs, ws, dws };
        for k in 0..t.xs.len() - 1 {
            // the derivative is quadratic on the interval; test it densely
            for s in 1..64 {
                let x = t.xs[k] + (t.xs[k + 1] - t.xs[k]) * s as f64 / 64.0;
                if t.eval(x).1 <= 0.0 {
                    return Err(Error::Monotonicity(format!("interpolated w' <= 0 near x = {x}")));
                }
            }
        }
        Ok(t)
    }

    /// Samples an analytic profile on a grid.
    pub fn sample(xs: Vec<f64>, w: impl Fn(f64) -> f64, dw: impl Fn(f64) -> f64) -> Result<Self> {
        let ws = xs.iter().map(|&x| w(x)).collect();
        let dws = xs.iter().map(|&x| dw(x)).collect();
        MonotoneTable::new(xs, ws, dws)
    }

    /// The `(x, w, w')` nodes.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.xs.len()).map(|k| (self.xs[k], self.ws[k], self.dws[k]))
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        let k = match self.xs.partition_point(|&a| a <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (w0, w1, d0, d1) = (self.ws[k], self.ws[k + 1], self.dws[k] * h, self.dws[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let w = (2.0 * t3 - 3.0 * t2 + 1.0) * w0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * w1
            + (t3 - t2) * d1;
        let dw = ((6.0 * t2 - 6.0 * t) * w0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * w1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        (w, dw)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnergyVariant {
    Quadratic,
    SinhHalfSquared,
    Custom(MonotoneTable),
}

impl EnergyVariant {
    pub fn name(&self) -> &'static str {
        match self {
            EnergyVariant::Quadratic => "quadratic",
            EnergyVariant::SinhHalfSquared => "sinh_half_squared",
            EnergyVariant::Custom(_) => "custom",
        }
    }

    /// `c · φ(x)` without domain checks.
    pub fn value(&self, c: f64, x: f64) -> f64 {
        match self {
            EnergyVariant::Quadratic => 0.5 * c * x * x,
            EnergyVariant::SinhHalfSquared => {
                let s = (0.5 * x).sinh();
                2.0 * c * s * s
            }
            EnergyVariant::Custom(t) => c * t.eval(x).0,
        }
    }

    /// `c · φ'(x)` without domain checks.
    pub fn derivative(&self, c: f64, x: f64) -> f64 {
        match self {
            EnergyVariant::Quadratic => c * x,
            EnergyVariant::SinhHalfSquared => c * x.sinh(),
            EnergyVariant::Custom(t) => c * t.eval(x).1,
        }
    }

    /// `c · φ'(x) / sinh x`, the coefficient of `f_i × f_j` in the dual
    /// edge vector; continuous at `x = 0`.
    pub fn cross_coefficient(&self, c: f64, x: f64) -> f64 {
        match self {
            EnergyVariant::Quadratic => {
                if x < 1e-8 {
                    c
                } else {
                    c * x / x.sinh()
                }
            }
            EnergyVariant::SinhHalfSquared => c,
            EnergyVariant::Custom(_) => self.derivative(c, x) / x.sinh(),
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        if x <= 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("edge length {x} is not positive")));
        }
        if let EnergyVariant::Custom(t) = self {
            let (a, b) = t.range();
            if x < a || x > b {
                return Err(Error::Domain(format!("edge length {x} outside table [{a}, {b}]")));
            }
        }
        Ok(())
    }

    pub fn w(&self, c: f64, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.value(c, x))
    }

    pub fn w_prime(&self, c: f64, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.derivative(c, x))
    }
}

/// Weights of the sinh-half-squared energy read back from a dual surface:
/// `c = ‖Δf†‖ / sinh ℓ`.
pub fn recover_weights_sinh(
    ms: &MarkedSurface,
    f: &[MinkVec],
    dual: &DualRealization,
    min_length: f64,
) -> Result<EdgeWeights> {
    let ls = edge_lengths(ms, f, min_length)?;
    let c = ls
        .iter()
        .enumerate()
        .map(|(e, l)| Ok(dual_edge_length(ms, dual, e)? / l.sinh()))
        .collect::<Result<Vec<_>>>()?;
    EdgeWeights::new(c)
}

/// `Σ ‖Δf†‖ tanh(ℓ/2)` over edges, the integrated mean curvature of the
/// dual surface; it equals the sinh-half-squared energy at an optimum.
pub fn mean_curvature_functional(
    ms: &MarkedSurface,
    f: &[MinkVec],
    dual: &DualRealization,
    min_length: f64,
) -> Result<f64> {
    let ls = edge_lengths(ms, f, min_length)?;
    ls.iter()
        .enumerate()
        .map(|(e, l)| Ok(dual_edge_length(ms, dual, e)? * (0.5 * l).tanh()))
        .sum()
}
