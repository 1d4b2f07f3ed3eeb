use pierced::analytic::{bubble_radial, coeff_a1_a2, ReducedParams};
use pierced::expansion::*;
use pierced::green::h_center_ball;
use pierced::grid::{RadialField, RadialGrid, RadialLaplacian};
use pierced::solver::{annulus_grid, projected_bubble};
use pierced::Dimension;

fn dim(n: u32) -> Dimension {
    Dimension::new(n).unwrap()
}

fn setup(n: u32, eps: f64, d: f64, nodes: usize) -> (Dimension, ReducedParams, RadialField) {
    let dm = dim(n);
    let rp = ReducedParams::radial(dm, d, eps).unwrap();
    let grid = annulus_grid(eps, nodes, rp.mu(dm)).unwrap();
    let pu = compute_projection(dm, &grid, &rp).unwrap();
    (dm, rp, pu)
}

#[test]
fn hole_value_matches_boundary_system() {
    for n in [5, 6, 7] {
        for eps in [1e-1, 1e-2, 1e-3] {
            let (d, rp, pu) = setup(n, eps, 1.5, 800);
            let r = assemble_remainder(d, &rp, &pu).unwrap();
            let want = hole_boundary_value(d, &rp);
            assert!((r.values[0] - want).abs() <= 1e-8 * want.abs(), "N={n} eps={eps}");
        }
    }
}

#[test]
fn outer_value_matches_boundary_system() {
    for n in [5, 6] {
        let (d, rp, pu) = setup(n, 0.01, 1.5, 800);
        let r = assemble_remainder(d, &rp, &pu).unwrap();
        let nf = n as f64;
        let mu = rp.mu(d);
        let (a1, a2) = coeff_a1_a2(d, &rp);
        let m = (nf - 4.0) / 2.0;
        let want = d.alpha() * (-mu.powf(m) / (mu * mu + 1.0).powf(m) + mu.powf(m))
            + a1 * rp.eps.powf(nf - 4.0)
            + a2 * rp.eps.powf(nf - 2.0);
        let got = *r.values.last().unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs(), "N={n}: {got} vs {want}");
    }
}

#[test]
fn assembly_is_affine_in_pu() {
    let (d, rp, pu) = setup(5, 0.05, 1.8, 600);
    let base = assemble_remainder(d, &rp, &pu).unwrap();
    let e = rp.eps;
    let z: Vec<f64> = pu.grid.nodes().iter().map(|r| (r - e).powi(3) * (1.0 - r).powi(3)).collect();
    let delta = 0.37;
    let shifted_vals: Vec<f64> = pu.values.iter().zip(&z).map(|(v, z)| v + delta * z).collect();
    let shifted = RadialField::new(pu.grid.clone(), shifted_vals).unwrap().with_laplacian(pu.laplacian.clone().unwrap()).unwrap();
    let moved = assemble_remainder(d, &rp, &shifted).unwrap();
    for ((a, b), z) in moved.values.iter().zip(&base.values).zip(&z) {
        assert!((a - b - delta * z).abs() < 1e-13 * (1.0 + a.abs()));
    }
}

#[test]
fn ball_projection_two_term_expansion() {
    for n in [5, 6, 7] {
        let d = dim(n);
        let mu = 1e-2;
        let grid = RadialGrid::ball(32000, mu).unwrap();
        let pu = projected_bubble(d, &grid, mu).unwrap();
        let amp = d.alpha() * mu.powf((n as f64 - 4.0) / 2.0);
        let dev = grid
            .nodes()
            .iter()
            .zip(&pu.values)
            .map(|(&r, v)| (v - bubble_radial(d, mu, r) + amp * h_center_ball(d, r)).abs())
            .fold(0.0, f64::max);
        assert!(dev <= 5.0 * mu.powf((n as f64 - 4.0) / 2.0), "N={n}: {dev}");
    }
}

#[test]
fn sup_ratios_stable_under_refinement() {
    let d = dim(5);
    for eps in [1e-1, 1e-2] {
        let a = expansion_report(d, eps, 1.88, 1000).unwrap();
        let b = expansion_report(d, eps, 1.88, 2000).unwrap();
        assert!((a.sup_ratio_r / b.sup_ratio_r - 1.0).abs() < 0.05);
        assert!((a.sup_ratio_dr / b.sup_ratio_dr - 1.0).abs() < 0.05);
        assert!(a.sup_ratio_r > 0.0 && a.sup_ratio_dr.is_finite());
    }
}

// Δ_h applied to the Laplacian companion of R: zero up to discretisation error,
// which falls at second order.
#[test]
fn remainder_is_discretely_biharmonic() {
    let d = dim(6);
    let eps = 0.05;
    let rp = ReducedParams::radial(d, 1.4, eps).unwrap();
    let mu = rp.mu(d);
    let p = d.p();
    let levels: Vec<f64> = [400usize, 800, 1600]
        .iter()
        .map(|&n| {
            let grid = RadialGrid::geometric(eps, 1.0, n).unwrap();
            let pu = compute_projection(d, &grid, &rp).unwrap();
            let r = assemble_remainder(d, &rp, &pu).unwrap();
            let lap = RadialLaplacian::new(d, &grid).apply(r.laplacian.as_ref().unwrap());
            let scale = bubble_radial(d, mu, eps).powf(p);
            (1..n - 1).map(|i| lap[i].abs()).fold(0.0, f64::max) / scale
        })
        .collect();
    for w in levels.windows(2) {
        assert!((w[0] / w[1]).log2() > 1.8, "{levels:?}");
    }
}

#[test]
fn rescaled_boundary_magnitudes() {
    let d = dim(7);
    let s = d.sigma();
    let v = verify_expansion(d, &[1e-1, 10f64.powf(-1.5), 1e-2], 1.3, 1200).unwrap();
    assert!((v.slope_r_hat_outer - 2.0 * s).abs() < 0.1, "outer slope {}", v.slope_r_hat_outer);
    assert!(v.slope_r_hat_hole >= 1.0 - s * 4.0 - 0.1, "hole slope {}", v.slope_r_hat_hole);
    assert!(v.reports.iter().all(|r| r.r_hat_outer >= 0.0));
}
