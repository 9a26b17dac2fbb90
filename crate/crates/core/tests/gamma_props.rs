use quantum_grueneisen::entanglement::{tfim_entropy_model, Cut};
use quantum_grueneisen::gamma::{
    gamma0k, gamma0k_entropy, mixed_partial, scan, second_partial, tilted_field_exact, tilted_field_model,
    Component, GammaStatus, ScanAxis, ScanReport, TwoParamModel, ENTROPY_FLATNESS_BITS,
};
use quantum_grueneisen::kane::{self, KaneParams};
use quantum_grueneisen::tfim::{self, Scheme, TfimParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect()
}

#[test]
fn stencils_are_exact_on_low_degree_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let c: Vec<f64> = (0..25).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c2 = c.clone();
        let f = TwoParamModel::new("poly", "h", "g", move |h, g| {
            let mut s = 0.0;
            for a in 0..5 {
                for b in 0..5 {
                    s += c2[5 * a + b] * h.powi(a as i32) * g.powi(b as i32);
                }
            }
            Ok(s)
        });
        let (h, g): (f64, f64) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let (mut mixed, mut second) = (0.0, 0.0);
        for a in 0..5 {
            for b in 0..5 {
                let k = c[5 * a + b];
                if a >= 1 && b >= 1 {
                    mixed += k * (a * b) as f64 * h.powi(a as i32 - 1) * g.powi(b as i32 - 1);
                }
                if a >= 2 {
                    second += k * (a * (a - 1)) as f64 * h.powi(a as i32 - 2) * g.powi(b as i32);
                }
            }
        }
        let m = mixed_partial(&f, h, g).unwrap().value;
        let s = second_partial(&f, h, g).unwrap().value;
        assert!((m - mixed).abs() <= 1e-9 * mixed.abs().max(1.0), "mixed {m} vs {mixed}");
        assert!((s - second).abs() <= 1e-9 * second.abs().max(1.0), "second {s} vs {second}");
    }
}

#[test]
fn gamma_is_positive_for_positive_coupling() {
    let m = tfim::energy_model();
    for j in [0.1, 0.3, 0.7, 0.95, 1.05, 1.5, 3.0] {
        let e = gamma0k(&m, 1.0, j).unwrap();
        let g = e.gamma.expect("finite gamma");
        assert!(g > 0.0 && (g - 1.0 / j).abs() < 1e-3 * g, "J = {j}: {g}");
    }
    let t = tilted_field_model();
    for g in [0.2, 1.0, 4.0] {
        let e = gamma0k(&t, 1.3, g).unwrap();
        assert!((e.gamma.unwrap() - 1.0 / g).abs() < 1e-6 / g);
    }
}

#[test]
fn entropy_gamma_examples() {
    let s = tfim_entropy_model(10, Cut::HalfChain);
    let e = gamma0k_entropy(&s, 1.0, 0.5, ENTROPY_FLATNESS_BITS).unwrap();
    assert_eq!(e.status, GammaStatus::Ok);
    assert!((e.gamma.unwrap() - 2.0).abs() < 0.2);
    let e = gamma0k_entropy(&s, 1.0, 20.0, ENTROPY_FLATNESS_BITS).unwrap();
    assert_eq!(e.status, GammaStatus::DenominatorNearZero);
    assert!(e.gamma.is_none());
}

/// Bisects a sign-change bracket on the analytic component (`None` on the
/// singular locus) and checks it ends on a zero or on a pole.
fn assert_sound(report: &ScanReport, component: impl Fn(Component, f64) -> Option<f64>) {
    for sc in &report.sign_changes {
        let f = |x| component(sc.component, x);
        let (mut lo, mut hi) = (sc.lo, sc.hi);
        let (flo, fhi) = (f(lo).unwrap(), f(hi).unwrap());
        assert!(flo * fhi < 0.0, "bracket {sc:?} has no analytic sign change");
        let scale = flo.abs().max(fhi.abs());
        let mut on_locus = false;
        for _ in 0..20 {
            let mid = 0.5 * (lo + hi);
            let Some(fm) = f(mid) else {
                on_locus = true;
                break;
            };
            if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let pole = on_locus || f(lo).unwrap().abs().min(f(hi).unwrap().abs()) >= 1e3 * scale;
        let zero = !on_locus && f(0.5 * (lo + hi)).is_some_and(|v| v.abs() <= 1e-4 * scale);
        assert!(zero || pole, "bracket {sc:?} ends on neither a zero nor a pole");
    }
}

#[test]
fn scanner_brackets_are_sound() {
    let kane_report = scan(&kane::energy_model(1e-3), ScanAxis::H, 1.0, &linspace(0.05, 1.0, 96)).unwrap();
    assert!(!kane_report.sign_changes.is_empty());
    assert_sound(&kane_report, |c, jp| {
        let d = kane::derivatives(&KaneParams::new(1e-3, jp, 1.0).unwrap()).ok()?;
        Some(match c {
            Component::Mixed => d.cross,
            Component::Second => d.second,
        })
    });

    let tfim_report = scan(&tfim::energy_model(), ScanAxis::G, 1.0, &linspace(0.2, 2.0, 37)).unwrap();
    assert_sound(&tfim_report, |c, j| {
        let d = tfim::derivatives(&TfimParams::new(1.0, j).unwrap(), Scheme::Analytic).ok()?;
        Some(match c {
            Component::Mixed => d.cross,
            Component::Second => d.second,
        })
    });

    let tilted = scan(&tilted_field_model(), ScanAxis::H, 1.0, &linspace(-1.0, 1.0, 20)).unwrap();
    assert!(!tilted.sign_changes.is_empty());
    assert_sound(&tilted, |c, h| {
        let (mixed, second, _) = tilted_field_exact(h, 1.0).ok()?;
        Some(match c {
            Component::Mixed => mixed,
            Component::Second => second,
        })
    });
}

#[test]
fn kane_pole_found_between_grid_nodes() {
    let grid = linspace(0.07, 0.97, 23);
    assert!(grid.iter().all(|&x| (x - 0.5).abs() > 1e-3));
    let r = scan(&kane::energy_model(1e-3), ScanAxis::H, 1.0, &grid).unwrap();
    assert_eq!(r.divergence_candidates.len(), 1);
    assert!(r.divergence_candidates[0].contains(0.5));
}

#[test]
fn tilted_control_is_clean_at_every_grid_density() {
    for n in (8..=160).step_by(3) {
        let r = scan(&tilted_field_model(), ScanAxis::G, 1.0, &linspace(0.1, 2.0, n)).unwrap();
        assert!(r.divergence_candidates.is_empty() && r.sign_changes.is_empty(), "n = {n}");
    }
}

#[test]
fn scan_report_round_trips_through_json() {
    let r = scan(&kane::energy_model(1e-3), ScanAxis::H, 1.0, &linspace(0.05, 1.0, 20)).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: ScanReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn critical_points_found_once_at_every_grid_density() {
    for n in (8..=120).step_by(4) {
        let r = scan(&tfim::energy_model(), ScanAxis::G, 1.0, &linspace(0.2, 2.0, n)).unwrap();
        let spans: Vec<_> = r.divergence_candidates.iter().map(|d| (d.lo, d.hi)).collect();
        assert!(spans.len() == 1 && r.divergence_candidates[0].contains(1.0), "tfim n = {n}: {spans:?}");

        let r = scan(&kane::energy_model(1e-3), ScanAxis::H, 1.0, &linspace(0.05, 1.0, n)).unwrap();
        let spans: Vec<_> = r.divergence_candidates.iter().map(|d| (d.lo, d.hi)).collect();
        assert!(spans.len() == 1 && r.divergence_candidates[0].contains(0.5), "kane n = {n}: {spans:?}");
    }
}

#[test]
fn tfim_mixed_partial_matches_analytic_cross() {
    let d = mixed_partial(&tfim::energy_model(), 1.0, 0.5).unwrap();
    let a = tfim::derivatives(&TfimParams::new(1.0, 0.5).unwrap(), Scheme::Analytic).unwrap();
    assert!((d.value - a.cross).abs() <= d.err + a.err_cross + 1e-9 * a.cross.abs());
}
