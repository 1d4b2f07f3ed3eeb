//! Closed-form bubbles, their Laplacians, the linearised kernel fields, the
//! exterior correctors and the hole coefficients `a₁`, `a₂`.
//!
//! Points are plain slices of length `N`. Every function here is pure.

use crate::dimension::Dimension;
use crate::error::{invalid, Error, Result};

/// Exponents above this magnitude are evaluated through `exp(e·ln b)`.
const LOG_SPACE_EXPONENT: f64 = 50.0;

/// `base^exponent` for positive `base`, in log space for large exponents.
#[inline]
pub fn pow_stable(base: f64, exponent: f64) -> f64 {
    if exponent.abs() > LOG_SPACE_EXPONENT {
        (exponent * base.ln()).exp()
    } else {
        base.powf(exponent)
    }
}

/// Concentration weight and centre of a bubble.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleParams {
    mu: f64,
    xi: Vec<f64>,
}

impl BubbleParams {
    pub fn new(mu: f64, xi: Vec<f64>) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid("mu", format!("must be positive and finite, got {mu}")));
        }
        if xi.iter().any(|c| !c.is_finite()) {
            return Err(invalid("xi", "non-finite coordinate"));
        }
        Ok(Self { mu, xi })
    }

    /// Bubble centred at the origin.
    pub fn centered(dim: Dimension, mu: f64) -> Result<Self> {
        Self::new(mu, vec![0.0; dim.n() as usize])
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[inline]
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    fn dist2(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.xi.len());
        x.iter().zip(&self.xi).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// Rescaled parameters `(d, τ, ε)` with `μ = d ε^σ`, `ξ = μ τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedParams {
    pub d: f64,
    pub tau: Vec<f64>,
    pub eps: f64,
}

impl ReducedParams {
    pub fn new(d: f64, tau: Vec<f64>, eps: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return Err(invalid("d", format!("must be positive, got {d}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid("eps", format!("must lie in (0, 1), got {eps}")));
        }
        Ok(Self { d, tau, eps })
    }

    /// Radial configuration `τ = 0`.
    pub fn radial(dim: Dimension, d: f64, eps: f64) -> Result<Self> {
        Self::new(d, vec![0.0; dim.n() as usize], eps)
    }

    /// Checks `d ∈ [δ, 1/δ]` and `|τ| ≤ 1/δ`.
    pub fn check_compact(&self, delta: f64) -> Result<()> {
        if !(delta > 0.0) {
            return Err(invalid("delta", "must be positive"));
        }
        if self.d < delta || self.d > 1.0 / delta {
            return Err(invalid("d", format!("{} outside [{delta}, {}]", self.d, 1.0 / delta)));
        }
        if norm(&self.tau) > 1.0 / delta {
            return Err(invalid("tau", format!("|tau| exceeds 1/delta = {}", 1.0 / delta)));
        }
        Ok(())
    }

    pub fn mu(&self, dim: Dimension) -> f64 {
        self.d * self.eps.powf(dim.sigma())
    }

    pub fn to_bubble(&self, dim: Dimension) -> Result<BubbleParams> {
        let mu = self.mu(dim);
        BubbleParams::new(mu, self.tau.iter().map(|t| mu * t).collect())
    }
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `U_{μ,ξ}(x) = α_N (μ/(μ²+|x-ξ|²))^((N-4)/2)`.
pub fn bubble_eval(dim: Dimension, b: &BubbleParams, x: &[f64]) -> f64 {
    bubble_radial(dim, b.mu, b.dist2(x).sqrt())
}

/// Bubble as a function of the distance `r = |x-ξ|`.
#[inline]
pub fn bubble_radial(dim: Dimension, mu: f64, r: f64) -> f64 {
    let n = dim.nf();
    dim.alpha() * pow_stable(mu / (mu * mu + r * r), (n - 4.0) / 2.0)
}

/// `ΔU_{μ,ξ}(x) = -α_N(N-4) μ^((N-4)/2) (2|x-ξ|²+Nμ²)/(μ²+|x-ξ|²)^(N/2)`.
pub fn bubble_laplacian(dim: Dimension, b: &BubbleParams, x: &[f64]) -> f64 {
    bubble_laplacian_radial(dim, b.mu, b.dist2(x).sqrt())
}

#[inline]
pub fn bubble_laplacian_radial(dim: Dimension, mu: f64, r: f64) -> f64 {
    let n = dim.nf();
    let s = mu * mu + r * r;
    -dim.alpha() * (n - 4.0) * pow_stable(mu, (n - 4.0) / 2.0) * (2.0 * r * r + n * mu * mu)
        / pow_stable(s, n / 2.0)
}

/// Radial derivative of `ΔU_{μ,0}` at distance `r`.
pub fn bubble_laplacian_dr(dim: Dimension, mu: f64, r: f64) -> f64 {
    let n = dim.nf();
    let s = mu * mu + r * r;
    dim.alpha() * (n - 4.0) * pow_stable(mu, (n - 4.0) / 2.0) * r
        * ((2.0 * n - 4.0) * r * r + (n * n - 4.0) * mu * mu)
        / pow_stable(s, n / 2.0 + 1.0)
}

/// Kernel fields of the linearised bubble equation:
/// `Z₀ = ∂U/∂μ` and `Z_i = ∂U/∂ξ_i` for `i = 1..=N`.
pub fn kernel_field_z(dim: Dimension, b: &BubbleParams, i: usize, x: &[f64]) -> Result<f64> {
    let n_us = dim.n() as usize;
    if i > n_us {
        return Err(invalid("i", format!("kernel index {i} outside 0..={n_us}")));
    }
    let n = dim.nf();
    let mu = b.mu;
    let r2 = b.dist2(x);
    let s = mu * mu + r2;
    let a = dim.alpha();
    Ok(if i == 0 {
        a * (n - 4.0) / 2.0 * pow_stable(mu, (n - 6.0) / 2.0) * (r2 - mu * mu)
            / pow_stable(s, (n - 2.0) / 2.0)
    } else {
        a * (n - 4.0) * pow_stable(mu, (n - 4.0) / 2.0) * (x[i - 1] - b.xi[i - 1])
            / pow_stable(s, (n - 2.0) / 2.0)
    })
}

/// Exterior correctors on `|x| ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corrector {
    /// `|x|^(-(N-4))`
    Phi1,
    /// `|x|^(-(N-2))`
    Phi2,
    /// `φ₁ + φ₂`
    Upsilon,
}

pub fn corrector_eval(dim: Dimension, which: Corrector, x: &[f64]) -> Result<f64> {
    corrector_radial(dim, which, norm(x))
}

pub fn corrector_radial(dim: Dimension, which: Corrector, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::OutsideDomain(format!("corrector needs |x| >= 1, got {r}")));
    }
    let n = dim.nf();
    let p1 = r.powf(-(n - 4.0));
    let p2 = r.powf(-(n - 2.0));
    Ok(match which {
        Corrector::Phi1 => p1,
        Corrector::Phi2 => p2,
        Corrector::Upsilon => p1 + p2,
    })
}

/// Laplacian of a corrector: `Δφ₁ = -2(N-4)|x|^(-(N-2))`, `Δφ₂ = 0` off the origin.
pub fn corrector_laplacian_radial(dim: Dimension, which: Corrector, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::OutsideDomain(format!("corrector needs |x| >= 1, got {r}")));
    }
    let n = dim.nf();
    let l1 = -2.0 * (n - 4.0) * r.powf(-(n - 2.0));
    Ok(match which {
        Corrector::Phi1 | Corrector::Upsilon => l1,
        Corrector::Phi2 => 0.0,
    })
}

/// Hole coefficients `(a₁, a₂)` in the explicit form
/// `a₁ = (α_N/2) ε²(2|τ|²+N)/(μ^(N/2)(1+|τ|²)^(N/2))`,
/// `a₂ = α_N μ^(-(N-4)/2)(1+|τ|²)^(-(N-4)/2) - a₁`.
pub fn coeff_a1_a2(dim: Dimension, rp: &ReducedParams) -> (f64, f64) {
    let n = dim.nf();
    let a = dim.alpha();
    let mu = rp.mu(dim);
    let t2: f64 = rp.tau.iter().map(|t| t * t).sum();
    let a1 = 0.5 * a * rp.eps * rp.eps * (2.0 * t2 + n)
        / (pow_stable(mu, n / 2.0) * pow_stable(1.0 + t2, n / 2.0));
    let a2 = a / (pow_stable(mu, (n - 4.0) / 2.0) * pow_stable(1.0 + t2, (n - 4.0) / 2.0)) - a1;
    (a1, a2)
}

/// Hole coefficients through the unit bubble: `a₁ = -ΔU(τ)/(2(N-4)) ε²/μ^(N/2)`,
/// `a₂ = U(τ)/μ^((N-4)/2) - a₁`.
pub fn coeff_a1_a2_via_bubble(dim: Dimension, rp: &ReducedParams) -> (f64, f64) {
    let n = dim.nf();
    let mu = rp.mu(dim);
    let t = norm(&rp.tau);
    let u = bubble_radial(dim, 1.0, t);
    let lu = bubble_laplacian_radial(dim, 1.0, t);
    let a1 = -lu / (2.0 * (n - 4.0)) * rp.eps * rp.eps / pow_stable(mu, n / 2.0);
    let a2 = u / pow_stable(mu, (n - 4.0) / 2.0) + lu / (2.0 * (n - 4.0)) * rp.eps * rp.eps
        / pow_stable(mu, n / 2.0);
    (a1, a2)
}
