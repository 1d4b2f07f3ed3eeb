//! Bubble integrals: the constants of the reduced energy and the two Green
//! representation identities of the bubble, plus the weighted norms used on
//! expanded annuli.

use serde::Serialize;

use crate::analytic::{bubble_laplacian_dr, bubble_laplacian_radial, bubble_radial, norm};
use crate::dimension::Dimension;
use crate::error::{invalid, Error, Result};
use crate::grid::RadialField;
use crate::quadrature::{integrate_with_breaks, Estimate, GaussLegendre, QuadratureRule, TailMap};

/// Nodes per panel of the default radial rule; the estimate doubles it.
pub const DEFAULT_NODES: usize = 32;
/// Self-convergence demanded of the bubble constants.
pub const CONSTANT_TOL: f64 = 1e-9;
/// Relative residual accepted for the representation identities.
pub const IDENTITY_TOL: f64 = 1e-4;

/// Constants of the reduced energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct PaperConstants {
    /// `∫ U^(2N/(N-4))`.
    pub a_n: f64,
    /// `(3/4)(N-2)|S^(N-1)|` as printed.
    pub b_n: f64,
    /// `(1/2) α_N ∫ U^p`.
    pub c_n: f64,
    pub sphere_measure: f64,
    /// `R₁(0)/U(0)`, the constant that makes the `|y|^(4-N)` representation exact.
    pub k_n: f64,
    /// `b_N` consistent with `k_n`: `(1/2)(k_N/(2(N-4)) + (N-2)|S^(N-1)|)`.
    pub b_n_effective: f64,
}

impl PaperConstants {
    pub fn compute(dim: Dimension) -> Result<Self> {
        let a_n = constant_a_n(dim)?.value;
        let (b_n, c) = constant_b_n_c_n(dim)?;
        let r1 = representation_identity_4(dim, &[0.0])?;
        let k_n = r1.implied_constant;
        let n = dim.nf();
        let s = dim.sphere_measure();
        let b_n_effective = 0.5 * (k_n / (2.0 * (n - 4.0)) + (n - 2.0) * s);
        Ok(Self { a_n, b_n, c_n: c.value, sphere_measure: s, k_n, b_n_effective })
    }
}

fn rule() -> QuadratureRule {
    QuadratureRule::radial_default(DEFAULT_NODES)
}

/// `a_N = |S^(N-1)| ∫₀^∞ r^(N-1) U_{μ,0}(r)^(2N/(N-4)) dr`, with
/// breakpoints scaled by `μ`.
pub fn constant_a_n_scaled(dim: Dimension, mu: f64) -> Result<Estimate> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(invalid("mu", "must be positive"));
    }
    let n = dim.nf();
    let q = 2.0 * n / (n - 4.0);
    let base = rule();
    let scaled = QuadratureRule::new(base.nodes_per_panel, base.breakpoints.iter().map(|b| b * mu).collect(), TailMap::Algebraic)?;
    let est = scaled.integrate_estimated(|r| r.powf(n - 1.0) * bubble_radial(dim, mu, r).powf(q));
    let s = dim.sphere_measure();
    Estimate { value: s * est.value, error: s * est.error }.require(CONSTANT_TOL)
}

pub fn constant_a_n(dim: Dimension) -> Result<Estimate> {
    constant_a_n_scaled(dim, 1.0)
}

/// `∫_{R^N} U^p` for the standard bubble.
pub fn integral_u_p(dim: Dimension) -> Result<Estimate> {
    let n = dim.nf();
    let p = dim.p();
    let est = rule().integrate_estimated(|r| r.powf(n - 1.0) * bubble_radial(dim, 1.0, r).powf(p));
    let s = dim.sphere_measure();
    Estimate { value: s * est.value, error: s * est.error }.require(CONSTANT_TOL)
}

/// `(b_N, c_N)`: `b_N` in closed form, `c_N` by quadrature.
pub fn constant_b_n_c_n(dim: Dimension) -> Result<(f64, Estimate)> {
    let n = dim.nf();
    let b = 0.75 * (n - 2.0) * dim.sphere_measure();
    let i = integral_u_p(dim)?;
    let half_alpha = 0.5 * dim.alpha();
    Ok((b, Estimate { value: half_alpha * i.value, error: half_alpha * i.error }))
}

/// `∫_{B_R} U^p` through the divergence theorem: `|S^(N-1)| R^(N-1) ∂_r ΔU(R)`.
pub fn integral_u_p_flux(dim: Dimension, radius: f64) -> f64 {
    dim.sphere_measure() * radius.powf(dim.nf() - 1.0) * bubble_laplacian_dr(dim, 1.0, radius)
}

/// Outcome of a representation identity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    pub tau_norm: f64,
    /// The quadrature value of the convolution integral.
    pub integral: Estimate,
    /// The closed-form right-hand side.
    pub reference: f64,
    pub relative_residual: f64,
    /// Integral divided by the bubble factor (`U(τ)` or `-ΔU(τ)`).
    pub implied_constant: f64,
}

impl IdentityReport {
    pub fn passes(&self) -> bool {
        self.relative_residual <= IDENTITY_TOL && self.integral.relative_error() <= IDENTITY_TOL
    }
}

/// `∫ U^p(y) |y + τ|^(-a) dy` with `|τ| = t` by the split described on
/// [`representation_identity_4`], using `n` Gauss nodes per panel in each
/// variable.
fn kernel_convolution(dim: Dimension, t: f64, a: f64, n: usize) -> f64 {
    let nf = dim.nf();
    let p = dim.p();
    let up = |r: f64| bubble_radial(dim, 1.0, r).powf(p);
    let gl = GaussLegendre::new(n);
    if t == 0.0 {
        let q = QuadratureRule::new(n, rule().breakpoints, TailMap::Algebraic).expect("static breakpoints");
        return dim.sphere_measure() * q.integrate(|r| r.powf(nf - 1.0 - a) * up(r));
    }
    let eq = dim.equator_measure();
    let sin_pow = |th: f64| th.sin().powf(nf - 2.0);
    let half = 0.5;

    // |y + τ| < 1/2: spherical coordinates about -τ, so the kernel is ρ^(-a)
    let inner_breaks = [0.125, 0.25, 0.375, t];
    let inner = integrate_with_breaks(&gl, 0.0, half, &inner_breaks, |rho| {
        let ang = integrate_with_breaks(&gl, 0.0, std::f64::consts::PI, &[], |th| {
            let d2 = (rho * rho + t * t - 2.0 * rho * t * th.cos()).max(0.0);
            sin_pow(th) * up(d2.sqrt())
        });
        rho.powf(nf - 1.0 - a) * ang
    });

    // |y + τ| > 1/2: bubble coordinates, angle φ measured from τ
    let angular = |r: f64| -> f64 {
        let c = if r == 0.0 { f64::NEG_INFINITY } else { (0.25 - r * r - t * t) / (2.0 * r * t) };
        if c >= 1.0 {
            return 0.0;
        }
        let phi_c = if c <= -1.0 { std::f64::consts::PI } else { c.acos() };
        gl.integrate(0.0, phi_c, |ph| {
            let d2 = r * r + t * t + 2.0 * r * t * ph.cos();
            sin_pow(ph) * d2.powf(-0.5 * a)
        })
    };
    let mut bps = rule().breakpoints;
    bps.extend([(t - half).abs(), t + half]);
    bps.sort_by(|x, y| x.total_cmp(y));
    bps.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let q = QuadratureRule::new(n, bps, TailMap::Algebraic).expect("sorted breakpoints");
    let outer = q.integrate(|r| r.powf(nf - 1.0) * up(r) * angular(r));
    eq * (inner + outer)
}

fn convolution_estimated(dim: Dimension, t: f64, a: f64) -> Estimate {
    let coarse = kernel_convolution(dim, t, a, DEFAULT_NODES);
    let fine = kernel_convolution(dim, t, a, 2 * DEFAULT_NODES);
    Estimate { value: fine, error: (fine - coarse).abs() }
}

fn check_tau(tau: &[f64]) -> Result<f64> {
    let t = norm(tau);
    if !t.is_finite() || tau.is_empty() {
        return Err(invalid("tau", "must be a finite, non-empty point"));
    }
    Ok(t)
}

/// `R₁(τ) = ∫ U^p(y)|y+τ|^(4-N) dy` against `k_N U(τ)` with
/// `k_N = 2(N-2)(N-4)|S^(N-1)|`.
///
/// The integral is split at `|y+τ| = 1/2`. Inside, spherical coordinates
/// centred at `-τ` absorb the kernel into the radial weight `ρ^(N-1-a)`.
/// Outside, bubble-centred coordinates are used with the angular range cut
/// at `cos φ = (1/4 - r² - t²)/(2rt)`; radial panels break where the cut
/// switches on and off (`r = |t - 1/2|`, `t + 1/2`).
pub fn representation_identity_4(dim: Dimension, tau: &[f64]) -> Result<IdentityReport> {
    let t = check_tau(tau)?;
    let a = dim.nf() - 4.0;
    let integral = convolution_estimated(dim, t, a);
    let u = bubble_radial(dim, 1.0, t);
    let reference = dim.k_fundamental() * u;
    report(t, integral, reference, u)
}

/// `R₂(τ) = ∫ U^p(y)|y+τ|^(2-N) dy` against `-(N-2)|S^(N-1)| ΔU(τ)`.
pub fn representation_identity_2(dim: Dimension, tau: &[f64]) -> Result<IdentityReport> {
    let t = check_tau(tau)?;
    let a = dim.nf() - 2.0;
    let integral = convolution_estimated(dim, t, a);
    let lap = bubble_laplacian_radial(dim, 1.0, t);
    let reference = -(dim.nf() - 2.0) * dim.sphere_measure() * lap;
    report(t, integral, reference, -lap)
}

fn report(t: f64, integral: Estimate, reference: f64, factor: f64) -> Result<IdentityReport> {
    if !integral.value.is_finite() {
        return Err(Error::Quadrature { estimate: f64::INFINITY, tolerance: IDENTITY_TOL });
    }
    Ok(IdentityReport {
        tau_norm: t,
        integral,
        reference,
        relative_residual: (integral.value - reference).abs() / reference.abs(),
        implied_constant: integral.value / factor,
    })
}

/// Which weighted sup norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightedNorm {
    /// `Σ_{i≤3} sup (1+|y-ξ'|²)^((2+i)/2) |∂_r^i η|`.
    Star,
    /// `sup (1+|y-ξ'|²)^4 |η|`.
    StarStar,
}

/// Weighted sup norm of a radial field over its grid nodes, a lower bound
/// of the continuous supremum. For an offset centre the weight is taken at
/// the farthest point of each sphere, `|y - ξ'| = r + |ξ'|`.
pub fn weighted_norms(field: &RadialField, center_offset: &[f64], which: WeightedNorm) -> Result<f64> {
    let c = norm(center_offset);
    let nodes = field.grid.nodes();
    let weight = |r: f64, power: f64| (1.0 + (r + c) * (r + c)).powf(power);
    match which {
        WeightedNorm::StarStar => Ok(nodes
            .iter()
            .zip(&field.values)
            .map(|(&r, v)| weight(r, 4.0) * v.abs())
            .fold(0.0, f64::max)),
        WeightedNorm::Star => {
            let ders = field.derivatives.as_ref().ok_or(Error::MissingData("radial derivatives up to order 3"))?;
            let mut total = nodes.iter().zip(&field.values).map(|(&r, v)| weight(r, 1.0) * v.abs()).fold(0.0, f64::max);
            for (i, d) in ders.iter().enumerate() {
                let power = (3.0 + i as f64) / 2.0;
                total += nodes.iter().zip(d).map(|(&r, v)| weight(r, power) * v.abs()).fold(0.0, f64::max);
            }
            Ok(total)
        }
    }
}
