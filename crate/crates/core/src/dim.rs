//! Ambient dimension and the dimension-dependent constants of the
//! fourth-order conformal calculus.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Ambient dimension n ≥ 5 together with the constants
/// a(n), b(n), c(n), d(n) used throughout the Paneitz/Q-curvature
/// formulas. Constructed once, read-only afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension {
    n: usize,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Dimension {
    pub fn new(n: usize) -> Result<Self, CoreError> {
        if n < 5 {
            return Err(CoreError::DimensionTooSmall { n });
        }
        let nf = n as f64;
        Ok(Self {
            n,
            a: 4.0 / (nf - 2.0),
            b: ((nf - 2.0) * (nf - 2.0) + 4.0) / (2.0 * (nf - 1.0) * (nf - 2.0)),
            c: (nf - 4.0) / 2.0,
            d: nf * (nf - 4.0) * (nf * nf - 4.0) / 16.0,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// a(n) = 4/(n−2), the Ricci coefficient of the Paneitz operator.
    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    /// b(n) = ((n−2)² + 4)/(2(n−1)(n−2)), the scalar-curvature coefficient.
    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// c(n) = (n−4)/2, the zeroth-order (Q-curvature) coefficient.
    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    /// d(n) = n(n−4)(n²−4)/16, the bubble nonlinearity constant.
    #[inline]
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Critical Sobolev-type exponent 2n/(n−4).
    #[inline]
    pub fn crit_exp(&self) -> f64 {
        2.0 * self.nf() / (self.nf() - 4.0)
    }

    /// Nonlinearity exponent (n+4)/(n−4).
    #[inline]
    pub fn nl_exp(&self) -> f64 {
        (self.nf() + 4.0) / (self.nf() - 4.0)
    }

    /// Dual exponent 2n/(n+4) of the natural right-hand-side space.
    #[inline]
    pub fn dual_exp(&self) -> f64 {
        2.0 * self.nf() / (self.nf() + 4.0)
    }

    /// Constant Q-curvature n(n²−4)/8 of the unit round sphere.
    #[inline]
    pub fn sphere_q(&self) -> f64 {
        self.nf() * (self.nf() * self.nf() - 4.0) / 8.0
    }
}

impl TryFrom<usize> for Dimension {
    type Error = CoreError;
    fn try_from(n: usize) -> Result<Self, Self::Error> {
        Dimension::new(n)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.n
    }
}
