//! Scalar Gaussian beliefs and the standard-normal helpers used by the
//! moment-matching code.

use serde::{Deserialize, Serialize};
use libm::erfc;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::ops::{Add, Neg};

use crate::error::MathError;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A mean/variance pair. Variance zero is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBelief {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianBelief {
    pub fn new(mean: f64, variance: f64) -> Result<Self, MathError> {
        if !mean.is_finite() || !variance.is_finite() || variance < 0.0 {
            return Err(MathError::InvalidBelief { mean, variance });
        }
        Ok(Self { mean, variance })
    }

    pub const fn point(mean: f64) -> Self {
        Self { mean, variance: 0.0 }
    }

    pub const fn standard() -> Self {
        Self { mean: 0.0, variance: 1.0 }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn is_valid(&self) -> bool {
        self.mean.is_finite() && self.variance.is_finite() && self.variance >= 0.0
    }
}

/// Sum of independent Gaussians.
impl Add for GaussianBelief {
    type Output = GaussianBelief;

    fn add(self, rhs: Self) -> Self::Output {
        GaussianBelief {
            mean: self.mean + rhs.mean,
            variance: self.variance + rhs.variance,
        }
    }
}

impl Neg for GaussianBelief {
    type Output = GaussianBelief;

    fn neg(self) -> Self::Output {
        GaussianBelief {
            mean: -self.mean,
            variance: self.variance,
        }
    }
}

impl fmt::Display for GaussianBelief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N({:.6}, {:.6})", self.mean, self.variance)
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Standard normal CDF through the complementary error function, which keeps
/// full relative precision in the lower tail.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `ln Φ(x)`, finite for every finite `x`.
pub fn std_normal_log_cdf(x: f64) -> f64 {
    if x > -30.0 {
        return (0.5 * erfc(-x / SQRT_2)).ln();
    }
    // asymptotic expansion of the Mills ratio
    let x2 = x * x;
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    std_normal_log_pdf(x) - (-x).ln() + series.ln()
}

/// `φ(x) / Φ(x)` (inverse Mills ratio), stable for large negative `x`.
pub fn inverse_mills(x: f64) -> f64 {
    (std_normal_log_pdf(x) - std_normal_log_cdf(x)).exp()
}

/// Log density of `N(x; mean, variance)`.
pub fn normal_log_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let z = x - mean;
    -0.5 * z * z / variance - 0.5 * variance.ln() - LN_SQRT_2PI
}
