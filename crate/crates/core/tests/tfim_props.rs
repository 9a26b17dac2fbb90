use proptest::prelude::*;
use quantum_grueneisen::tfim::{
    curvature, derivatives, e0_per_site, e0_quadrature, finite_chain_e0, Scheme, TfimParams,
};

fn params(b: f64, j: f64) -> TfimParams {
    TfimParams::new(b, j).unwrap()
}

#[test]
fn closed_form_matches_quadrature_grid() {
    for i in 1..=60 {
        let lambda = 0.05 * i as f64;
        if (0.99..=1.01).contains(&lambda) {
            continue;
        }
        let p = params(1.0, lambda);
        let e = e0_per_site(&p).unwrap();
        let q = e0_quadrature(&p, 1e-13).unwrap();
        assert!((e - q).abs() <= 1e-9 * e.abs(), "lambda = {lambda}");
    }
}

#[test]
fn curvature_diverges_logarithmically() {
    for side in [-1.0, 1.0] {
        let values: Vec<f64> = (2..=6).map(|k| curvature(1.0 + side * 10f64.powi(-k)).unwrap().abs()).collect();
        let steps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|&s| s > 0.0), "side {side}: {values:?}");
        let mean = steps.iter().sum::<f64>() / steps.len() as f64;
        assert!(steps.iter().all(|s| (s - mean).abs() <= 0.2 * mean), "side {side}: {steps:?}");
    }
}

#[test]
fn analytic_and_stencil_components_agree() {
    let lambdas = (0..9).map(|i| 0.1 + 0.1 * i as f64).chain((0..20).map(|i| 1.1 + 0.1 * i as f64));
    for lambda in lambdas {
        for b in [0.5, 1.0, 2.0] {
            let p = params(b, lambda * b);
            let a = derivatives(&p, Scheme::Analytic).unwrap();
            let f = derivatives(&p, Scheme::FiniteDifference).unwrap();
            assert!((a.cross / a.second + 1.0 / lambda).abs() < 1e-12 / lambda);
            assert!((a.cross - f.cross).abs() <= 1e-6 * a.cross.abs(), "cross at {lambda}, B = {b}");
            assert!((a.second - f.second).abs() <= 1e-6 * a.second.abs(), "second at {lambda}, B = {b}");
        }
    }
}

#[test]
fn finite_chains_approach_the_thermodynamic_limit() {
    for lambda in [0.5, 1.0, 2.0] {
        let p = params(1.0, lambda);
        let bulk = e0_per_site(&p).unwrap() / 2.0;
        for n in [8, 12, 16, 20] {
            let e = finite_chain_e0(n, &p).unwrap().e0_total;
            let c = n as f64 * (e / n as f64 - bulk).abs();
            assert!(c < 4.0, "lambda = {lambda}, n = {n}: C = {c}");
        }
    }
}

proptest! {
    #[test]
    fn energy_scales_with_field(b in 0.01f64..10.0, j in 0.0f64..10.0) {
        let lhs = e0_per_site(&params(b, j)).unwrap();
        let rhs = b * e0_per_site(&params(1.0, j / b)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs());
    }

    #[test]
    fn single_particle_energies_are_non_negative(n in 2usize..20, b in 0.0f64..3.0, j in 0.0f64..3.0) {
        let s = finite_chain_e0(n, &params(b, j)).unwrap();
        prop_assert_eq!(s.single_particle_energies.len(), n);
        prop_assert!(s.single_particle_energies.iter().all(|&e| e >= 0.0));
        prop_assert!(s.e0_total <= 0.0);
    }
}

#[test]
fn derivatives_match_differentiated_quadrature() {
    // Richardson-extrapolated central differences of the quadrature energy.
    let e = |b: f64, j: f64| e0_quadrature(&params(b, j), 1e-14).unwrap();
    let cross_at = |d: f64| (e(1.0 + d, 0.5 + d) - e(1.0 + d, 0.5 - d) - e(1.0 - d, 0.5 + d) + e(1.0 - d, 0.5 - d)) / (4.0 * d * d);
    let second_at = |d: f64| (e(1.0 + d, 0.5) - 2.0 * e(1.0, 0.5) + e(1.0 - d, 0.5)) / (d * d);
    let rich = |f: &dyn Fn(f64) -> f64, d: f64| (4.0 * f(0.5 * d) - f(d)) / 3.0;
    let cross = rich(&cross_at, 2e-3);
    let second = rich(&second_at, 2e-3);
    let a = derivatives(&params(1.0, 0.5), Scheme::Analytic).unwrap();
    assert!((a.cross - cross).abs() <= 1e-6 * a.cross.abs(), "{} vs {cross}", a.cross);
    assert!((a.second - second).abs() <= 1e-6 * a.second.abs(), "{} vs {second}", a.second);
}
