//! Navier Green's function of the bi-Laplacian on the unit ball and on
//! annuli `ε < |y| < 1`, and its regular part
//! `H(x, y) = |x-y|^(4-N) - G(x, y)`.
//!
//! `H(x, ·)` is biharmonic with `H = |x-·|^(4-N)` and
//! `ΔH = -2(N-4)|x-·|^(2-N)` on every boundary sphere. Both boundary traces
//! have exact Gegenbauer expansions in `C_l^λ`, `λ = (N-2)/2`, so each degree
//! reduces to a small linear system for the radial profile
//! `a r^l + b r^(l+2) [+ c r^(2-N-l) + d r^(4-N-l)]`.
//! For a source at the centre of the ball everything collapses to the closed
//! form `H(0, y) = 2(N-2)/N - (N-4)/N |y|²`.

use nalgebra::{Matrix4, Vector4};

use crate::analytic::norm;
use crate::dimension::Dimension;
use crate::error::{invalid, Error, Result};
use crate::fdcheck;

/// Default Gegenbauer degree cutoff for off-centre sources.
pub const DEFAULT_DEGREE: usize = 32;

/// The pierced ball `inner < |x| < outer`; `inner = 0` is the solid ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusDomain {
    pub inner: f64,
    pub outer: f64,
    pub dim: Dimension,
}

impl AnnulusDomain {
    pub fn new(dim: Dimension, inner: f64) -> Result<Self> {
        if !(inner >= 0.0 && inner < 1.0) {
            return Err(invalid("inner", format!("hole radius must lie in [0, 1), got {inner}")));
        }
        Ok(Self { inner, outer: 1.0, dim })
    }

    pub fn ball(dim: Dimension) -> Self {
        Self { inner: 0.0, outer: 1.0, dim }
    }

    pub fn is_ball(&self) -> bool {
        self.inner == 0.0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        r > self.inner && r < self.outer || (self.is_ball() && r < self.outer)
    }
}

/// `H(0, 0)` on the unit ball: `2(N-2)/N`.
pub fn h00_ball(dim: Dimension) -> f64 {
    2.0 * (dim.nf() - 2.0) / dim.nf()
}

/// `H(0, y)` on the unit ball as a function of `r = |y|`.
pub fn h_center_ball(dim: Dimension, r: f64) -> f64 {
    let n = dim.nf();
    2.0 * (n - 2.0) / n - (n - 4.0) / n * r * r
}

/// `ΔH(0, ·)` on the unit ball (constant `-2(N-4)`).
pub fn h_center_ball_laplacian(dim: Dimension) -> f64 {
    -2.0 * (dim.nf() - 4.0)
}

/// Gegenbauer polynomials `C_0^λ(t), ..., C_L^λ(t)`.
fn gegenbauer(lambda: f64, t: f64, degree: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(degree + 1);
    c.push(1.0);
    if degree >= 1 {
        c.push(2.0 * lambda * t);
    }
    for n in 2..=degree {
        let nf = n as f64;
        let next = (2.0 * t * (nf + lambda - 1.0) * c[n - 1] - (nf + 2.0 * lambda - 2.0) * c[n - 2]) / nf;
        c.push(next);
    }
    c
}

/// Regular part of the Navier Green's function for a fixed source `x`.
#[derive(Debug, Clone)]
pub struct GreenRegularPart {
    pub domain: AnnulusDomain,
    /// Constant `k_N` in `Δ²G = k_N δ_x` implied by the kernel `|x-y|^(4-N)`.
    pub normalization: f64,
    source: Vec<f64>,
    s: f64,
    /// Per-degree profile coefficients of the basis in `radial_basis`.
    coeffs: Vec<[f64; 4]>,
}

impl GreenRegularPart {
    /// Builds the expansion for source `x` with degree cutoff `degree`.
    pub fn new(domain: AnnulusDomain, x: &[f64], degree: usize) -> Result<Self> {
        let dim = domain.dim;
        if x.len() != dim.n() as usize {
            return Err(invalid("x", "dimension mismatch"));
        }
        if !domain.contains(x) {
            return Err(Error::OutsideDomain(format!("source |x| = {} not inside domain", norm(x))));
        }
        let s = norm(x);
        let n = dim.nf();
        let lambda = (n - 2.0) / 2.0;
        let eps = domain.inner;
        // degree 0 only when the source sits at the centre
        let degree = if s == 0.0 { 0 } else { degree };
        let mut coeffs = Vec::with_capacity(degree + 1);
        for l in 0..=degree {
            let lf = l as f64;
            // Boundary data on |y| = R for the C_l^λ component.
            let value = |big_r: f64| -> f64 {
                let (r_lo, r_hi) = if big_r > s { (s, big_r) } else { (big_r, s) };
                let rho = r_lo / r_hi;
                r_hi.powf(4.0 - n)
                    * (lambda - 1.0)
                    * (rho.powi(l as i32) / (lf + lambda - 1.0)
                        - rho.powi(l as i32 + 2) / (lf + lambda + 1.0))
            };
            let lap = |big_r: f64| -> f64 {
                let (r_lo, r_hi) = if big_r > s { (s, big_r) } else { (big_r, s) };
                -2.0 * (n - 4.0) * r_lo.powi(l as i32) / r_hi.powf(lf + n - 2.0)
            };
            let c2 = 4.0 * lf + 2.0 * n;
            if domain.is_ball() {
                let b = lap(1.0) / c2;
                let a = value(1.0) - b;
                coeffs.push([a, b, 0.0, 0.0]);
            } else {
                let c4 = -(4.0 * lf + 2.0 * n - 8.0);
                let e3 = eps.powf(n - 2.0 + lf);
                let e4 = eps.powf(n - 4.0 + lf);
                // rows: value at 1, Laplacian at 1, value at ε, Laplacian at ε
                let m = Matrix4::new(
                    1.0, 1.0, e3, e4,
                    0.0, c2, 0.0, c4 * e4,
                    eps.powi(l as i32), eps.powi(l as i32 + 2), 1.0, 1.0,
                    0.0, c2 * eps.powi(l as i32), 0.0, c4 / (eps * eps),
                );
                let rhs = Vector4::new(value(1.0), lap(1.0), value(eps), lap(eps));
                let sol = m
                    .lu()
                    .solve(&rhs)
                    .ok_or_else(|| Error::LinearSolve(format!("degree {l} boundary system singular")))?;
                coeffs.push([sol[0], sol[1], sol[2], sol[3]]);
            }
        }
        Ok(Self { domain, normalization: dim.k_fundamental(), source: x.to_vec(), s, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn source(&self) -> &[f64] {
        &self.source
    }

    /// `H(x, y)` for the stored source `x`.
    pub fn eval(&self, y: &[f64]) -> f64 {
        let (r, t) = self.polar(y);
        self.eval_polar(r, t)
    }

    /// `ΔH(x, y)` (Laplacian in `y`).
    pub fn laplacian(&self, y: &[f64]) -> f64 {
        let (r, t) = self.polar(y);
        let dim = self.domain.dim;
        let n = dim.nf();
        let lambda = (n - 2.0) / 2.0;
        let c = gegenbauer(lambda, t, self.degree());
        let eps = self.domain.inner;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(l, k)| {
                let lf = l as f64;
                let mut v = k[1] * (4.0 * lf + 2.0 * n) * r.powi(l as i32);
                if !self.domain.is_ball() {
                    let c4 = -(4.0 * lf + 2.0 * n - 8.0);
                    v += k[3] * c4 / (eps * eps) * (r / eps).powf(2.0 - n - lf);
                }
                v * c[l]
            })
            .sum()
    }

    fn polar(&self, y: &[f64]) -> (f64, f64) {
        let r = norm(y);
        let t = if r == 0.0 || self.s == 0.0 {
            1.0
        } else {
            let dot: f64 = y.iter().zip(&self.source).map(|(a, b)| a * b).sum();
            (dot / (r * self.s)).clamp(-1.0, 1.0)
        };
        (r, t)
    }

    fn eval_polar(&self, r: f64, t: f64) -> f64 {
        let n = self.domain.dim.nf();
        let lambda = (n - 2.0) / 2.0;
        let c = gegenbauer(lambda, t, self.degree());
        let eps = self.domain.inner;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(l, k)| {
                let lf = l as f64;
                let mut v = k[0] * r.powi(l as i32) + k[1] * r.powi(l as i32 + 2);
                if !self.domain.is_ball() {
                    v += k[2] * (r / eps).powf(2.0 - n - lf) + k[3] * (r / eps).powf(4.0 - n - lf);
                }
                v * c[l]
            })
            .sum()
    }
}

/// `H(x, y)` on the unit ball. Centre sources use the closed form.
pub fn regular_part_ball(dim: Dimension, x: &[f64], y: &[f64]) -> Result<f64> {
    regular_part(AnnulusDomain::ball(dim), x, y, DEFAULT_DEGREE)
}

/// `H(x, y)` on `dom` with degree cutoff `degree`.
pub fn regular_part(dom: AnnulusDomain, x: &[f64], y: &[f64], degree: usize) -> Result<f64> {
    let n = dom.dim.n() as usize;
    if x.len() != n || y.len() != n {
        return Err(invalid("point", "dimension mismatch"));
    }
    if !dom.contains(y) {
        return Err(Error::OutsideDomain(format!("|y| = {} not inside domain", norm(y))));
    }
    if dom.is_ball() {
        if norm(x) == 0.0 {
            if !dom.contains(y) {
                return Err(Error::OutsideDomain("y".into()));
            }
            return Ok(h_center_ball(dom.dim, norm(y)));
        }
        if norm(y) == 0.0 && dom.contains(x) {
            return Ok(h_center_ball(dom.dim, norm(x)));
        }
    }
    Ok(GreenRegularPart::new(dom, x, degree)?.eval(y))
}

/// `G(x, y) = |x-y|^(4-N) - H(x, y)`.
pub fn green_navier(dim: Dimension, dom: AnnulusDomain, x: &[f64], y: &[f64]) -> Result<f64> {
    if dom.dim != dim {
        return Err(invalid("dom", "dimension mismatch"));
    }
    let dist: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if dist == 0.0 {
        return Err(Error::Singular("G(x, x) is singular".into()));
    }
    if !dom.contains(x) {
        return Err(Error::OutsideDomain(format!("|x| = {} not inside domain", norm(x))));
    }
    let h = regular_part(dom, x, y, DEFAULT_DEGREE)?;
    Ok(dist.powf(4.0 - dim.nf()) - h)
}

/// `G(0, y)` on the unit ball in closed form, as a function of `r = |y|`.
pub fn green_center_ball(dim: Dimension, r: f64) -> f64 {
    r.powf(4.0 - dim.nf()) - h_center_ball(dim, r)
}

/// Recovers `k_N` from the flux identity `∮_{|y|=ρ} ∂_ρ ΔG(0, y) dS = k_N`,
/// differencing the ball's `G(0, ·)` numerically in `N` dimensions.
pub fn measured_k_flux(dim: Dimension, rho: f64) -> f64 {
    let n = dim.n() as usize;
    let g = |y: &[f64]| green_center_ball(dim, norm(y));
    let h_lap = 1e-3 * rho;
    let h_dr = 1e-2 * rho;
    let lap_at = |r: f64| {
        let mut y = vec![0.0; n];
        y[0] = r;
        fdcheck::laplacian_extrapolated(&g, &y, h_lap).value
    };
    let d = |h: f64| (lap_at(rho + h) - lap_at(rho - h)) / (2.0 * h);
    let dr = fdcheck::richardson(d(h_dr), d(h_dr / 2.0), 2);
    dim.sphere_measure() * rho.powf(dim.nf() - 1.0) * dr
}
