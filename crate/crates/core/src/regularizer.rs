//! Separable penalties the solvers can minimize against.
//!
//! [`ParSpec`] is the main implementor; [`SquaredL2`] and [`LHalf`] are the
//! classical baselines PARs are compared with.

use crate::error::Result;
use crate::par::{ParSpec, SubgradInterval, DEFAULT_QUANT_TOL};
use crate::prox::prox_any;

pub trait Regularizer: Send + Sync {
    /// Per-coordinate penalty value (may be `+inf`).
    fn value(&self, x: f64) -> f64;

    /// `argmin_z weight * value(z) + (z - x)^2 / 2`.
    fn prox(&self, weight: f64, x: f64) -> Result<f64>;

    /// Clarke subdifferential at `x`.
    fn subgradient(&self, x: f64) -> SubgradInterval;

    /// Nearest point where the subdifferential is set-valued, if within `tol`.
    fn kink_within(&self, _x: f64, _tol: f64) -> Option<f64> {
        None
    }

    /// Quantization rate, for penalties that have a level set.
    fn quantization_rate(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    fn value_sum(&self, x: &[f64]) -> f64 {
        x.iter().map(|&v| self.value(v)).sum()
    }

    fn prox_vec(&self, weight: f64, x: &[f64]) -> Result<Vec<f64>> {
        x.iter().map(|&v| self.prox(weight, v)).collect()
    }
}

impl Regularizer for ParSpec {
    fn value(&self, x: f64) -> f64 {
        ParSpec::value(self, x)
    }

    fn prox(&self, weight: f64, x: f64) -> Result<f64> {
        prox_any(self, weight, x).map(|r| r.point)
    }

    fn subgradient(&self, x: f64) -> SubgradInterval {
        self.subdifferential(x)
    }

    fn kink_within(&self, x: f64, tol: f64) -> Option<f64> {
        let k = self.nearest_kink(x);
        ((k - x).abs() <= tol).then_some(k)
    }

    fn quantization_rate(&self, x: &[f64]) -> Option<f64> {
        Some(ParSpec::quantization_rate(self, x, DEFAULT_QUANT_TOL).rate)
    }
}

/// `x^2 / 2`, the ridge penalty.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredL2;

impl Regularizer for SquaredL2 {
    fn value(&self, x: f64) -> f64 {
        0.5 * x * x
    }

    fn prox(&self, weight: f64, x: f64) -> Result<f64> {
        Ok(x / (1.0 + weight))
    }

    fn subgradient(&self, x: f64) -> SubgradInterval {
        SubgradInterval::point(x)
    }
}

/// `|x|^{1/2}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LHalf;

impl LHalf {
    fn prox_magnitude(w: f64, u: f64) -> f64 {
        if w == 0.0 || u == 0.0 {
            return u;
        }
        // interior stationary points solve g(z) = z - u + w / (2 sqrt z) = 0;
        // g is convex with its minimum at z_c, the local minimizer is the larger root
        let g = |z: f64| z - u + w / (2.0 * z.sqrt());
        let zc = (w / 4.0).powf(2.0 / 3.0);
        if zc >= u || g(zc) > 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (zc, u);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let z = 0.5 * (lo + hi);
        let interior = w * z.sqrt() + 0.5 * (z - u) * (z - u);
        if interior < 0.5 * u * u {
            z
        } else {
            0.0
        }
    }
}

impl Regularizer for LHalf {
    fn value(&self, x: f64) -> f64 {
        x.abs().sqrt()
    }

    fn prox(&self, weight: f64, x: f64) -> Result<f64> {
        let m = Self::prox_magnitude(weight, x.abs());
        Ok(if m == 0.0 { 0.0 } else { m.copysign(x) })
    }

    fn subgradient(&self, x: f64) -> SubgradInterval {
        if x == 0.0 {
            SubgradInterval::hull(f64::NEG_INFINITY, f64::INFINITY)
        } else {
            let d = 0.5 / x.abs().sqrt();
            SubgradInterval::point(d.copysign(x))
        }
    }
}
