//! The reduced energy Ψ(d, τ), its critical point, and the discrete energy functional.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::green::h00_ball;
use crate::grid::{integrate_nodal, RadialField, RadialGrid};
use crate::identities::PaperConstants;
use crate::solver::{annulus_grid, projected_bubble};
use crate::Dimension;

/// Which coefficient multiplies the hole interaction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleCoefficient {
    /// `(3/4)(N-2)|S^(N-1)|`, as printed.
    Printed,
    /// `(N-2)|S^(N-1)|`, consistent with the measured Green normalisation.
    Consistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiModel {
    pub dim: Dimension,
    pub constants: PaperConstants,
    pub h00: f64,
    pub hole: HoleCoefficient,
}

impl PsiModel {
    pub fn new(dim: Dimension, hole: HoleCoefficient) -> Result<Self> {
        Self::with_constants(dim, PaperConstants::compute(dim)?, h00_ball(dim), hole)
    }

    pub fn with_constants(dim: Dimension, constants: PaperConstants, h00: f64, hole: HoleCoefficient) -> Result<Self> {
        let vals = [constants.a_n, constants.b_n, constants.c_n, constants.b_n_effective, h00];
        if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("constants", "all constants must be positive"));
        }
        Ok(Self { dim, constants, h00, hole })
    }

    pub fn b(&self) -> f64 {
        match self.hole {
            HoleCoefficient::Printed => self.constants.b_n,
            HoleCoefficient::Consistent => self.constants.b_n_effective,
        }
    }

    fn c_h(&self) -> f64 {
        self.constants.c_n * self.h00
    }
}

// g(q) = -ΔU·U at |τ|² = q, with μ = 1, ξ = 0, and its first two q-derivatives.
fn hole_profile(dim: Dimension, q: f64) -> [f64; 3] {
    let n = dim.nf();
    let k = (n - 4.0) * dim.alpha().powi(2);
    let s = 1.0 + q;
    let h = 2.0 * s - (n - 2.0) * (n + 2.0 * q);
    let dh = -2.0 * (n - 3.0);
    let g = k * (n + 2.0 * q) * s.powf(-(n - 2.0));
    let g1 = k * s.powf(-(n - 1.0)) * h;
    let g2 = k * (-(n - 1.0) * s.powf(-n) * h + s.powf(-(n - 1.0)) * dh);
    [g, g1, g2]
}

fn check_args(model: &PsiModel, d: f64, tau: &[f64]) -> Result<()> {
    if !(d.is_finite() && d > 0.0) {
        return Err(invalid("d", format!("must be positive, got {d}")));
    }
    if tau.len() != model.dim.n() as usize || tau.iter().any(|t| !t.is_finite()) {
        return Err(invalid("tau", format!("expected {} finite components", model.dim.n())));
    }
    Ok(())
}

/// Ψ(d, τ) = −b ΔU(τ)U(τ) d^(−(N−2)) + c H(0,0) d^(N−4).
pub fn psi_eval(model: &PsiModel, d: f64, tau: &[f64]) -> Result<f64> {
    check_args(model, d, tau)?;
    let n = model.dim.nf();
    let q = tau.iter().map(|t| t * t).sum::<f64>();
    let [g, _, _] = hole_profile(model.dim, q);
    Ok(model.b() * g * d.powf(-(n - 2.0)) + model.c_h() * d.powf(n - 4.0))
}

/// Gradient in the order `(∂_d, ∂_τ1, …, ∂_τN)`.
pub fn psi_gradient(model: &PsiModel, d: f64, tau: &[f64]) -> Result<Vec<f64>> {
    check_args(model, d, tau)?;
    let n = model.dim.nf();
    let q = tau.iter().map(|t| t * t).sum::<f64>();
    let [g, g1, _] = hole_profile(model.dim, q);
    let b = model.b();
    let mut out = Vec::with_capacity(tau.len() + 1);
    out.push(-(n - 2.0) * b * g * d.powf(-(n - 1.0)) + (n - 4.0) * model.c_h() * d.powf(n - 5.0));
    let scale = b * d.powf(-(n - 2.0)) * 2.0 * g1;
    out.extend(tau.iter().map(|t| scale * t));
    Ok(out)
}

pub fn psi_hessian(model: &PsiModel, d: f64, tau: &[f64]) -> Result<DMatrix<f64>> {
    check_args(model, d, tau)?;
    let n = model.dim.nf();
    let m = tau.len();
    let q = tau.iter().map(|t| t * t).sum::<f64>();
    let [g, g1, g2] = hole_profile(model.dim, q);
    let b = model.b();
    let mut h = DMatrix::zeros(m + 1, m + 1);
    h[(0, 0)] = (n - 2.0) * (n - 1.0) * b * g * d.powf(-n) + (n - 4.0) * (n - 5.0) * model.c_h() * d.powf(n - 6.0);
    let cross = -(n - 2.0) * b * d.powf(-(n - 1.0)) * 2.0 * g1;
    let dd = b * d.powf(-(n - 2.0));
    for i in 0..m {
        h[(0, i + 1)] = cross * tau[i];
        h[(i + 1, 0)] = cross * tau[i];
        for j in 0..m {
            let delta = if i == j { 2.0 * g1 } else { 0.0 };
            h[(i + 1, j + 1)] = dd * (delta + 4.0 * tau[i] * tau[j] * g2);
        }
    }
    Ok(h)
}

/// Closed-form d*: the (2N−6)-th root of `(N−2) b N(N−4)α² / ((N−4) c H00)`.
pub fn d_star_closed_form(model: &PsiModel) -> f64 {
    let n = model.dim.nf();
    let g0 = hole_profile(model.dim, 0.0)[0];
    ((n - 2.0) * model.b() * g0 / ((n - 4.0) * model.c_h())).powf(1.0 / (2.0 * n - 6.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub d_star: f64,
    pub tau_star: Vec<f64>,
    pub gradient_residual: f64,
    pub newton_iterations: usize,
    pub d_curvature: f64,
    /// Eigenvalues of the τ-block, ascending.
    pub tau_eigenvalues: Vec<f64>,
    pub positive: usize,
    pub negative: usize,
}

pub const CRITICAL_TOL: f64 = 1e-12;

pub fn psi_critical_point(model: &PsiModel) -> Result<CriticalPoint> {
    let m = model.dim.n() as usize;
    let tau = vec![0.0; m];
    let mut d = d_star_closed_form(model);
    let mut iterations = 0;
    let scale = psi_eval(model, d, &tau)? / d;
    let mut res = psi_gradient(model, d, &tau)?[0].abs() / scale;
    while res > CRITICAL_TOL && iterations < 50 {
        let g = psi_gradient(model, d, &tau)?[0];
        let h = psi_hessian(model, d, &tau)?[(0, 0)];
        d -= g / h;
        iterations += 1;
        res = psi_gradient(model, d, &tau)?[0].abs() / scale;
    }
    if res > CRITICAL_TOL {
        return Err(Error::NotConverged(format!("critical point residual {res:e}")));
    }
    let hess = psi_hessian(model, d, &tau)?;
    let block = hess.view((1, 1), (m, m)).into_owned();
    let mut eig: Vec<f64> = SymmetricEigen::new(block).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let positive = eig.iter().filter(|&&e| e > 0.0).count();
    let negative = eig.iter().filter(|&&e| e < 0.0).count();
    Ok(CriticalPoint {
        d_star: d,
        tau_star: tau,
        gradient_residual: res,
        newton_iterations: iterations,
        d_curvature: hess[(0, 0)],
        tau_eigenvalues: eig,
        positive,
        negative,
    })
}

/// `(1/2)∫|Δv|² − (1/(p+1))∫v₊^(p+1)` over the field's grid.
pub fn energy_eval(dim: Dimension, field: &RadialField) -> Result<f64> {
    let lap = field.laplacian.as_ref().ok_or(Error::MissingData("laplacian"))?;
    let p = dim.p();
    let grid = &field.grid;
    let kinetic: Vec<f64> = lap.iter().map(|l| l * l).collect();
    let potential: Vec<f64> = field.values.iter().map(|v| v.max(0.0).powf(p + 1.0)).collect();
    Ok(0.5 * integrate_nodal(dim, grid, &kinetic) - integrate_nodal(dim, grid, &potential) / (p + 1.0))
}

/// `v(y) = ε^(σ(N−4)/2) u(ε^σ y)` on the expanded annulus.
pub fn to_expanded(dim: Dimension, field: &RadialField, eps: f64) -> Result<RadialField> {
    let n = dim.nf();
    let s = eps.powf(dim.sigma());
    let amp = s.powf((n - 4.0) / 2.0);
    let grid = RadialGrid::from_nodes(field.grid.nodes().iter().map(|r| r / s).collect())?;
    let values = field.values.iter().map(|u| amp * u).collect();
    let out = RadialField::new(grid, values)?;
    match &field.laplacian {
        Some(l) => out.with_laplacian(l.iter().map(|x| amp * s * s * x).collect()),
        None => Ok(out),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck {
    pub eps: f64,
    pub d: f64,
    pub energy: f64,
    pub leading: f64,
    pub correction: f64,
    /// `|I(PU) − leading − correction| / correction`.
    pub relative_discrepancy: f64,
    pub expanded_energy: f64,
}

impl EnergyCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.relative_discrepancy <= tol
    }
}

/// Compares `I(PU)` at `μ = d ε^σ` against `(2/N) a_N + ε^κ Ψ(d, 0)`.
pub fn energy_expansion(model: &PsiModel, eps: f64, d: f64, nodes: usize) -> Result<EnergyCheck> {
    let dim = model.dim;
    let mu = d * eps.powf(dim.sigma());
    let grid = annulus_grid(eps, nodes, mu)?;
    let pu = projected_bubble(dim, &grid, mu)?;
    let energy = energy_eval(dim, &pu)?;
    let expanded_energy = energy_eval(dim, &to_expanded(dim, &pu, eps)?)?;
    let leading = 2.0 / dim.nf() * model.constants.a_n;
    let correction = eps.powf(dim.kappa()) * psi_eval(model, d, &vec![0.0; dim.n() as usize])?;
    Ok(EnergyCheck {
        eps,
        d,
        energy,
        leading,
        correction,
        relative_discrepancy: (energy - leading - correction).abs() / correction,
        expanded_energy,
    })
}

/// Sign change of ∂Ψ/∂d along a log-spaced bracket at τ = 0; returns the bracketing intervals.
pub fn d_sign_changes(model: &PsiModel, lo: f64, hi: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    let tau = vec![0.0; model.dim.n() as usize];
    let step = (hi / lo).ln() / (samples - 1) as f64;
    let ds: Vec<f64> = (0..samples).map(|k| lo * (step * k as f64).exp()).collect();
    let mut out = Vec::new();
    let mut prev = psi_gradient(model, ds[0], &tau)?[0];
    for w in ds.windows(2) {
        let g = psi_gradient(model, w[1], &tau)?[0];
        if prev.signum() != g.signum() {
            out.push((w[0], w[1]));
        }
        prev = g;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n: u32) -> PsiModel {
        PsiModel::new(Dimension::new(n).unwrap(), HoleCoefficient::Consistent).unwrap()
    }

    #[test]
    fn center_value_matches_closed_form() {
        let m = model(5);
        let a = m.dim.alpha();
        let d: f64 = 1.3;
        let expected = m.b() * 5.0 * a * a * d.powi(-3) + m.constants.c_n * 1.2 * d;
        let got = psi_eval(&m, d, &[0.0; 5]).unwrap();
        assert!((got / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn profile_matches_bubble() {
        let dim = Dimension::new(6).unwrap();
        for t in [0.0, 0.4, 1.7] {
            let g = hole_profile(dim, t * t)[0];
            let direct = -crate::analytic::bubble_laplacian_radial(dim, 1.0, t) * crate::analytic::bubble_radial(dim, 1.0, t);
            assert!((g / direct - 1.0).abs() < 1e-13, "{t}");
        }
    }

    #[test]
    fn rejects_nonpositive_d() {
        let m = model(5);
        assert!(psi_eval(&m, 0.0, &[0.0; 5]).is_err());
        assert!(psi_eval(&m, -1.0, &[0.0; 5]).is_err());
    }

    #[test]
    fn large_d_dominated_by_regular_part() {
        let m = model(6);
        let d = 1e4;
        let ratio = psi_eval(&m, d, &[0.0; 6]).unwrap() / (m.constants.c_n * m.h00 * d.powi(2));
        assert!((ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_field_zero_energy() {
        let dim = Dimension::new(5).unwrap();
        let g = RadialGrid::geometric(0.1, 1.0, 50).unwrap();
        let f = RadialField::new(g, vec![0.0; 50]).unwrap().with_laplacian(vec![0.0; 50]).unwrap();
        assert_eq!(energy_eval(dim, &f).unwrap(), 0.0);
    }

    #[test]
    fn energy_needs_laplacian() {
        let dim = Dimension::new(5).unwrap();
        let g = RadialGrid::geometric(0.1, 1.0, 50).unwrap();
        let f = RadialField::new(g, vec![0.0; 50]).unwrap();
        assert_eq!(energy_eval(dim, &f), Err(Error::MissingData("laplacian")));
    }
}
