//! Spatial dimension and the constants derived from it.

use std::f64::consts::PI;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension `N ≥ 5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(n: u32) -> Result<Self> {
        if n < 5 {
            return Err(Error::Dimension(n));
        }
        Ok(Self(n))
    }

    #[inline]
    pub fn n(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn nf(self) -> f64 {
        self.0 as f64
    }

    /// Critical exponent `(N+4)/(N-4)` as an exact rational.
    pub fn p_exact(self) -> Ratio<i64> {
        let n = self.0 as i64;
        Ratio::new(n + 4, n - 4)
    }

    /// Critical exponent `(N+4)/(N-4)`.
    #[inline]
    pub fn p(self) -> f64 {
        (self.nf() + 4.0) / (self.nf() - 4.0)
    }

    /// Blow-up exponent `σ = (N-2)/(2(N-3))`, so that `μ = d ε^σ`.
    pub fn sigma_exact(self) -> Ratio<i64> {
        let n = self.0 as i64;
        Ratio::new(n - 2, 2 * (n - 3))
    }

    /// Reduced-energy exponent `κ = (N-2)(N-4)/(2(N-3)) = σ(N-4)`.
    pub fn kappa_exact(self) -> Ratio<i64> {
        let n = self.0 as i64;
        Ratio::new((n - 2) * (n - 4), 2 * (n - 3))
    }

    #[inline]
    pub fn sigma(self) -> f64 {
        ratio_f64(self.sigma_exact())
    }

    #[inline]
    pub fn kappa(self) -> f64 {
        ratio_f64(self.kappa_exact())
    }

    /// Bubble normalisation `α_N = (N(N-4)(N-2)(N+2))^((N-4)/8)`.
    pub fn alpha(self) -> f64 {
        let n = self.nf();
        (n * (n - 4.0) * (n - 2.0) * (n + 2.0)).powf((n - 4.0) / 8.0)
    }

    /// Surface measure of the unit sphere `S^(N-1)`, i.e. `2π^(N/2)/Γ(N/2)`.
    pub fn sphere_measure(self) -> f64 {
        sphere_measure(self.0)
    }

    /// Surface measure of `S^(N-2)`, the sphere of directions orthogonal to
    /// a fixed axis; used by the two-dimensional (r, θ) reduction.
    pub fn equator_measure(self) -> f64 {
        sphere_measure(self.0 - 1)
    }

    /// Normalisation of the bi-Laplacian fundamental solution:
    /// `Δ²|x|^(4-N) = 2(N-2)(N-4)|S^(N-1)| δ`.
    pub fn k_fundamental(self) -> f64 {
        let n = self.nf();
        2.0 * (n - 2.0) * (n - 4.0) * self.sphere_measure()
    }

    /// The constant `(N-4)(N-2)|S^(N-1)|` written in front of the Dirac mass
    /// in the literature statement of the Green problem. Kept for reporting.
    pub fn gamma_literature(self) -> f64 {
        let n = self.nf();
        (n - 2.0) * (n - 4.0) * self.sphere_measure()
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "N={}", self.0)
    }
}

pub fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `|S^(m-1)|`, the measure of the unit sphere in `R^m`, by the recursion
/// `|S^(m+1)| = 2π/m · |S^(m-1)|`.
pub fn sphere_measure(m: u32) -> f64 {
    match m {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 2.0) * sphere_measure(m - 2),
    }
}
