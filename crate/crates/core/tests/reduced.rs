use pierced::grid::RadialGrid;
use pierced::reduced::*;
use pierced::solver::{annulus_grid, projected_bubble};
use pierced::Dimension;
use proptest::prelude::*;

fn model(n: u32) -> PsiModel {
    PsiModel::new(Dimension::new(n).unwrap(), HoleCoefficient::Consistent).unwrap()
}

fn tau_of(n: usize, t: &[f64]) -> Vec<f64> {
    (0..n).map(|i| t[i % t.len()] / (1.0 + i as f64)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_central_differences(n in 5u32..9, d in 0.2f64..5.0, t in prop::collection::vec(-1.5f64..1.5, 3)) {
        let m = model(n);
        let tau = tau_of(n as usize, &t);
        let g = psi_gradient(&m, d, &tau).unwrap();
        let h = 1e-5;
        let scale = psi_eval(&m, d, &tau).unwrap();
        let fd_d = (psi_eval(&m, d + h, &tau).unwrap() - psi_eval(&m, d - h, &tau).unwrap()) / (2.0 * h);
        prop_assert!((g[0] - fd_d).abs() <= 1e-6 * g[0].abs().max(scale / d));
        for i in 0..tau.len() {
            let mut p = tau.clone();
            let mut q = tau.clone();
            p[i] += h;
            q[i] -= h;
            let fd = (psi_eval(&m, d, &p).unwrap() - psi_eval(&m, d, &q).unwrap()) / (2.0 * h);
            prop_assert!((g[i + 1] - fd).abs() <= 1e-6 * scale, "component {}: {} vs {}", i, g[i + 1], fd);
        }
    }

    #[test]
    fn even_in_tau(d in 0.2f64..5.0, t in prop::collection::vec(-2.0f64..2.0, 5)) {
        let m = model(5);
        let neg: Vec<f64> = t.iter().map(|x| -x).collect();
        prop_assert_eq!(psi_eval(&m, d, &t).unwrap(), psi_eval(&m, d, &neg).unwrap());
    }

    #[test]
    fn rescaling_h00_moves_argmin(lambda in 0.1f64..10.0, n in 5u32..9) {
        let m = model(n);
        let mut scaled = m.clone();
        scaled.h00 *= lambda;
        let nf = n as f64;
        let expected = d_star_closed_form(&m) * lambda.powf(-1.0 / (2.0 * nf - 6.0));
        prop_assert!((d_star_closed_form(&scaled) / expected - 1.0).abs() < 1e-13);
    }

    #[test]
    fn common_rescaling_of_b_and_c_keeps_argmin(f in 0.01f64..100.0) {
        let m = model(6);
        let mut s = m.clone();
        s.constants.b_n_effective *= f;
        s.constants.c_n *= f;
        let a = psi_critical_point(&m).unwrap().d_star;
        let b = psi_critical_point(&s).unwrap().d_star;
        prop_assert!((a / b - 1.0).abs() < 1e-13);
    }
}

#[test]
fn center_value_uses_bubble_product() {
    for n in 5..9 {
        let m = model(n);
        let nf = n as f64;
        let g0 = nf * (nf - 4.0) * m.dim.alpha().powi(2);
        let d: f64 = 0.7;
        let expected = m.b() * g0 * d.powf(-(nf - 2.0)) + m.constants.c_n * 2.0 * (nf - 2.0) / nf * d.powf(nf - 4.0);
        assert!((psi_eval(&m, d, &vec![0.0; n as usize]).unwrap() / expected - 1.0).abs() < 1e-13);
    }
}

#[test]
fn critical_point_residual_and_curvature() {
    for n in 5..9 {
        let m = model(n);
        let cp = psi_critical_point(&m).unwrap();
        assert!(cp.gradient_residual <= 1e-12);
        assert!(cp.d_curvature > 0.0);
        let tau = vec![0.0; n as usize];
        let h = 1e-4 * cp.d_star;
        let fd = (psi_eval(&m, cp.d_star + h, &tau).unwrap() - 2.0 * psi_eval(&m, cp.d_star, &tau).unwrap()
            + psi_eval(&m, cp.d_star - h, &tau).unwrap())
            / (h * h);
        assert!((fd / cp.d_curvature - 1.0).abs() < 1e-5, "N={n}: {fd} vs {}", cp.d_curvature);
        assert_eq!(cp.tau_eigenvalues.len(), n as usize);
        assert_eq!(cp.positive + cp.negative, n as usize);
    }
}

#[test]
fn unique_sign_change_of_d_derivative() {
    for n in 5..9 {
        let m = model(n);
        let d_star = psi_critical_point(&m).unwrap().d_star;
        let brackets = d_sign_changes(&m, 1e-3, 1e3, 601).unwrap();
        assert_eq!(brackets.len(), 1, "N={n}");
        assert!(brackets[0].0 <= d_star && d_star <= brackets[0].1);
    }
}

#[test]
fn hessian_is_symmetric_off_center() {
    let m = model(6);
    let tau = [0.3, -0.2, 0.1, 0.0, 0.5, 0.05];
    let h = psi_hessian(&m, 1.2, &tau).unwrap();
    assert!((&h - h.transpose()).amax() < 1e-12 * h.amax());
    let step = 1e-6;
    for j in 0..tau.len() {
        let mut p = tau.to_vec();
        let mut q = tau.to_vec();
        p[j] += step;
        q[j] -= step;
        let gp = psi_gradient(&m, 1.2, &p).unwrap();
        let gq = psi_gradient(&m, 1.2, &q).unwrap();
        for i in 0..=tau.len() {
            let fd = (gp[i] - gq[i]) / (2.0 * step);
            assert!((fd - h[(i, j + 1)]).abs() < 1e-6 * h.amax(), "({i},{j})");
        }
    }
}

#[test]
fn energy_invariant_under_expansion() {
    let dim = Dimension::new(5).unwrap();
    let eps = 0.01;
    let mu = 1.88 * f64::powf(eps, dim.sigma());
    let pu = projected_bubble(dim, &annulus_grid(eps, 1500, mu).unwrap(), mu).unwrap();
    let a = energy_eval(dim, &pu).unwrap();
    let b = energy_eval(dim, &to_expanded(dim, &pu, eps).unwrap()).unwrap();
    assert!((a / b - 1.0).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn ball_energy_approaches_bubble_energy() {
    let dim = Dimension::new(6).unwrap();
    let m = model(6);
    let leading = 2.0 / 6.0 * m.constants.a_n;
    let gaps: Vec<f64> = [2e-2, 1e-2]
        .iter()
        .map(|&mu| {
            let pu = projected_bubble(dim, &RadialGrid::ball(3000, mu).unwrap(), mu).unwrap();
            energy_eval(dim, &pu).unwrap() - leading
        })
        .collect();
    // the regular part raises the energy by c H00 μ^(N-4)
    for (gap, mu) in gaps.iter().zip([2e-2, 1e-2]) {
        let pred = m.constants.c_n * m.h00 * mu * mu;
        assert!((gap / pred - 1.0).abs() < 0.1, "mu={mu}: {gap} vs {pred}");
    }
}
