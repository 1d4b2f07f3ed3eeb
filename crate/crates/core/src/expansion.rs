//! First-order expansion of the projected bubble on the pierced ball.
//!
//! `R_ε = PU − U + α μ^((N−4)/2) H(·,0) + a₁φ₁(·/ε) + a₂φ₂(·/ε)` is assembled
//! nodewise, its Laplacian taken from the companion field of the split solve.

use serde::Serialize;

use crate::analytic::{bubble_laplacian_radial, bubble_radial, coeff_a1_a2, corrector_laplacian_radial, corrector_radial, Corrector, ReducedParams};
use crate::error::{invalid, Error, Result};
use crate::green::{h_center_ball, h_center_ball_laplacian};
use crate::grid::{RadialField, RadialGrid};
use crate::identities::{weighted_norms, WeightedNorm};
use crate::par;
use crate::scaling::loglog_fit;
use crate::solver::{annulus_grid, projected_bubble};
use crate::Dimension;

fn check_radial(rp: &ReducedParams) -> Result<()> {
    if rp.tau.iter().any(|t| *t != 0.0) {
        return Err(invalid("tau", "only the radial configuration tau = 0 is supported"));
    }
    Ok(())
}

fn check_grid(grid: &RadialGrid, rp: &ReducedParams) -> Result<()> {
    if (grid.inner() - rp.eps).abs() > 1e-12 * rp.eps || (grid.outer() - 1.0).abs() > 1e-12 {
        return Err(Error::GridMismatch(format!("grid spans [{}, {}], expected [{}, 1]", grid.inner(), grid.outer(), rp.eps)));
    }
    Ok(())
}

/// `PU_{μ,0}` on the annulus `ε < |x| < 1`, with its Laplacian.
pub fn compute_projection(dim: Dimension, grid: &RadialGrid, rp: &ReducedParams) -> Result<RadialField> {
    check_radial(rp)?;
    check_grid(grid, rp)?;
    projected_bubble(dim, grid, rp.mu(dim))
}

/// Analytic part `−U + αμ^((N−4)/2)H + a₁φ₁(r/ε) + a₂φ₂(r/ε)` and its Laplacian.
fn analytic_part(dim: Dimension, rp: &ReducedParams, r: f64) -> Result<(f64, f64)> {
    let n = dim.nf();
    let mu = rp.mu(dim);
    let (a1, a2) = coeff_a1_a2(dim, rp);
    let amp = dim.alpha() * mu.powf((n - 4.0) / 2.0);
    let s = (r / rp.eps).max(1.0);
    let v = -bubble_radial(dim, mu, r)
        + amp * h_center_ball(dim, r)
        + a1 * corrector_radial(dim, Corrector::Phi1, s)?
        + a2 * corrector_radial(dim, Corrector::Phi2, s)?;
    let lap = -bubble_laplacian_radial(dim, mu, r)
        + amp * h_center_ball_laplacian(dim)
        + (a1 * corrector_laplacian_radial(dim, Corrector::Phi1, s)? + a2 * corrector_laplacian_radial(dim, Corrector::Phi2, s)?)
            / (rp.eps * rp.eps);
    Ok((v, lap))
}

pub fn assemble_remainder(dim: Dimension, rp: &ReducedParams, pu: &RadialField) -> Result<RadialField> {
    check_radial(rp)?;
    check_grid(&pu.grid, rp)?;
    let lap = pu.laplacian.as_ref().ok_or(Error::MissingData("laplacian of PU"))?;
    let mut values = Vec::with_capacity(pu.values.len());
    let mut laps = Vec::with_capacity(pu.values.len());
    for ((&r, &v), &l) in pu.grid.nodes().iter().zip(&pu.values).zip(lap) {
        let (a, al) = analytic_part(dim, rp, r)?;
        values.push(v + a);
        laps.push(l + al);
    }
    RadialField::new(pu.grid.clone(), values)?.with_laplacian(laps)
}

/// The closed-form value of `R_ε` on `|x| = ε` for τ = 0.
pub fn hole_boundary_value(dim: Dimension, rp: &ReducedParams) -> f64 {
    let n = dim.nf();
    let mu = rp.mu(dim);
    let m = (n - 4.0) / 2.0;
    let e = rp.eps;
    dim.alpha() * (-mu.powf(m) / (mu * mu + e * e).powf(m) + mu.powf(m) * h_center_ball(dim, e) + mu.powf(-m))
}

/// `(sup |R|/bracket, sup |ΔR|/bracket)` over the grid nodes.
pub fn check_bounds(dim: Dimension, rp: &ReducedParams, remainder: &RadialField) -> Result<(f64, f64)> {
    let lap = remainder.laplacian.as_ref().ok_or(Error::MissingData("laplacian of R"))?;
    let n = dim.nf();
    let mu = rp.mu(dim);
    let e = rp.eps.powf(n - 1.0);
    let mut ratio_r = 0.0f64;
    let mut ratio_dr = 0.0f64;
    for ((&r, &v), &l) in remainder.grid.nodes().iter().zip(&remainder.values).zip(lap) {
        let b1 = e * mu.powf(-(n + 2.0) / 2.0) * r.powf(-(n - 4.0)) + e * mu.powf(-(n - 2.0) / 2.0) * r.powf(-(n - 2.0));
        let b2 = e * mu.powf(-(n + 2.0) / 2.0) * r.powf(-(n - 2.0));
        ratio_r = ratio_r.max(v.abs() / b1);
        ratio_dr = ratio_dr.max(l.abs() / b2);
    }
    Ok((ratio_r, ratio_dr))
}

/// `E = f(V) − f(U_{d,0})` on the expanded annulus, `V(y) = ε^(σ(N−4)/2) PU(ε^σ y)`.
pub fn error_term(dim: Dimension, rp: &ReducedParams, pu: &RadialField) -> Result<RadialField> {
    let n = dim.nf();
    let p = dim.p();
    let s = rp.eps.powf(dim.sigma());
    let amp = s.powf((n - 4.0) / 2.0);
    let grid = RadialGrid::from_nodes(pu.grid.nodes().iter().map(|r| r / s).collect())?;
    let values = grid
        .nodes()
        .iter()
        .zip(&pu.values)
        .map(|(&y, &v)| (amp * v).max(0.0).powf(p) - bubble_radial(dim, rp.d, y).powf(p))
        .collect();
    RadialField::new(grid, values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub eps: f64,
    pub d: f64,
    pub tau: Vec<f64>,
    pub sup_ratio_r: f64,
    pub sup_ratio_dr: f64,
    pub e_starstar: f64,
    /// `‖E‖_**` restricted to the hole layer `|y| < 1`.
    pub e_starstar_hole_layer: f64,
    /// `μ^(−(N−4)/2) R_ε` at `|x| = 1` and `|x| = ε`.
    pub r_hat_outer: f64,
    pub r_hat_hole: f64,
    pub hole_value_error: f64,
    pub grid_meta: String,
}

pub fn expansion_report(dim: Dimension, eps: f64, d: f64, nodes: usize) -> Result<ExpansionReport> {
    let rp = ReducedParams::radial(dim, d, eps)?;
    let mu = rp.mu(dim);
    let grid = annulus_grid(eps, nodes, mu)?;
    let pu = compute_projection(dim, &grid, &rp)?;
    let rem = assemble_remainder(dim, &rp, &pu)?;
    let (sup_ratio_r, sup_ratio_dr) = check_bounds(dim, &rp, &rem)?;
    let e = error_term(dim, &rp, &pu)?;
    let origin = vec![0.0; dim.n() as usize];
    let e_starstar = weighted_norms(&e, &origin, WeightedNorm::StarStar)?;
    let k = e.grid.count_below(1.0).max(2);
    let layer = RadialField::new(RadialGrid::from_nodes(e.grid.nodes()[..k].to_vec())?, e.values[..k].to_vec())?;
    let e_starstar_hole_layer = weighted_norms(&layer, &origin, WeightedNorm::StarStar)?;
    let scale = mu.powf(-(dim.nf() - 4.0) / 2.0);
    let hole = hole_boundary_value(dim, &rp);
    Ok(ExpansionReport {
        eps,
        d,
        tau: rp.tau.clone(),
        sup_ratio_r,
        sup_ratio_dr,
        e_starstar,
        e_starstar_hole_layer,
        r_hat_outer: scale * rem.values[rem.values.len() - 1],
        r_hat_hole: scale * rem.values[0],
        hole_value_error: (rem.values[0] - hole).abs() / hole.abs(),
        grid_meta: format!("clustered annulus [{eps}, 1], {nodes} nodes, core {mu}"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionVerdict {
    pub reports: Vec<ExpansionReport>,
    pub kappa: f64,
    pub slope_ratio_r: f64,
    pub slope_ratio_dr: f64,
    pub slope_e_starstar: f64,
    pub slope_e_starstar_hole_layer: f64,
    pub slope_r_hat_outer: f64,
    pub slope_r_hat_hole: f64,
    pub bounded: bool,
    pub e_slope_within_tolerance: bool,
}

/// Lowest slope of the log ratios admitted as "no growth".
pub const RATIO_SLOPE_FLOOR: f64 = -0.1;
pub const E_SLOPE_TOL: f64 = 0.1;

pub fn verify_expansion(dim: Dimension, schedule: &[f64], d: f64, nodes: usize) -> Result<ExpansionVerdict> {
    if schedule.len() < 3 {
        return Err(invalid("eps", format!("at least 3 eps values required, got {}", schedule.len())));
    }
    let reports = par::map(schedule, |&e| expansion_report(dim, e, d, nodes)).into_iter().collect::<Result<Vec<_>>>()?;
    let eps: Vec<f64> = reports.iter().map(|r| r.eps).collect();
    let slope = |f: fn(&ExpansionReport) -> f64| -> Result<f64> {
        let y: Vec<f64> = reports.iter().map(|r| f(r).abs()).collect();
        Ok(loglog_fit(&eps, &y)?.slope)
    };
    let slope_ratio_r = slope(|r| r.sup_ratio_r)?;
    let slope_ratio_dr = slope(|r| r.sup_ratio_dr)?;
    let slope_e_starstar = slope(|r| r.e_starstar)?;
    let slope_e_starstar_hole_layer = slope(|r| r.e_starstar_hole_layer)?;
    let slope_r_hat_outer = slope(|r| r.r_hat_outer)?;
    let slope_r_hat_hole = slope(|r| r.r_hat_hole)?;
    let kappa = dim.kappa();
    Ok(ExpansionVerdict {
        reports,
        kappa,
        slope_ratio_r,
        slope_ratio_dr,
        slope_e_starstar,
        slope_e_starstar_hole_layer,
        slope_r_hat_outer,
        slope_r_hat_hole,
        bounded: slope_ratio_r >= RATIO_SLOPE_FLOOR && slope_ratio_dr >= RATIO_SLOPE_FLOOR,
        e_slope_within_tolerance: (slope_e_starstar - kappa).abs() <= E_SLOPE_TOL * kappa,
    })
}
