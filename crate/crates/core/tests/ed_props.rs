use num_complex::Complex64;
use quantum_grueneisen::ed::{build_kane, build_kane_with, build_tfim, ground_state, HyperfineLayout, SpinHamiltonian};
use quantum_grueneisen::tfim::{finite_chain_e0, TfimParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[test]
fn ground_energy_matches_free_fermions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in 2..=12 {
        for _ in 0..20 {
            let p = TfimParams::new(rng.gen_range(0.05..2.0), rng.gen_range(0.0..2.0)).unwrap();
            let ed = ground_state(&build_tfim(n, &p).unwrap()).unwrap().energy;
            let ff = finite_chain_e0(n, &p).unwrap().e0_total;
            assert!((ed - ff).abs() <= 1e-9, "n = {n}, {p:?}: {ed} vs {ff}");
        }
    }
}

#[test]
fn expectation_values_respect_the_variational_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = build_tfim(8, &TfimParams::new(1.0, 0.8).unwrap()).unwrap();
    let e0 = ground_state(&h).unwrap().energy;
    for _ in 0..50 {
        let mut v: Vec<f64> = (0..h.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        assert!(h.expectation(&v) >= e0 - 1e-12);
    }
}

fn total_sz(i: usize, n: usize) -> f64 {
    (0..n).map(|b| if i >> b & 1 == 0 { 1.0 } else { -1.0 }).sum()
}

fn commutator_with_sz(h: &SpinHamiltonian) -> f64 {
    let n = h.n_spins();
    let mut worst = 0.0_f64;
    for i in 0..h.dim() {
        for (j, v) in h.row(i) {
            worst = worst.max((v * (total_sz(j, n) - total_sz(i, n))).abs());
        }
    }
    worst
}

#[test]
fn hamiltonians_are_symmetric_and_kane_conserves_magnetization() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let p = TfimParams::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)).unwrap();
        assert_eq!(build_tfim(6, &p).unwrap().max_asymmetry(), 0.0);
        let (a1, a2, jp, mu, nz) = (
            rng.gen_range(0.0..0.1),
            rng.gen_range(0.0..0.1),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.1..2.0),
            rng.gen_range(-0.1..0.1),
        );
        for layout in [HyperfineLayout::OwnElectron, HyperfineLayout::PaperLiteral] {
            let h = build_kane_with(a1, a2, jp, mu, nz, layout).unwrap();
            assert!(h.max_asymmetry() <= 1e-15);
            assert!(commutator_with_sz(&h) <= 1e-12);
        }
    }
}

#[test]
fn ground_state_examples() {
    let gs = ground_state(&build_tfim(2, &TfimParams::new(1.0, 0.0).unwrap()).unwrap()).unwrap();
    assert!((gs.energy + 2.0).abs() < 1e-12);
    for c in &gs.vector {
        assert!((*c - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }
    let gs = ground_state(&build_kane(0.0, 0.0, 0.0, 1.0, 0.0).unwrap()).unwrap();
    assert!((gs.energy + 2.0).abs() < 1e-12);
    assert_eq!(gs.gap, 0.0);
}
