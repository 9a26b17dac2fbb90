//! End-to-end self checks, run by `quantum-grueneisen selftest`.
//!
//! Each check recomputes a reference result from an independent route
//! (quadrature, free fermions, exact diagonalization, closed forms) and
//! reports pass or fail with a one-line summary.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ed::{build_tfim, ground_state, hellmann_feynman_check};
use crate::entanglement::{
    concurrence, ghz_state, maximally_mixed_entropy, partial_trace, tfim_entanglement_profile, von_neumann_entropy,
    Cut, DensityMatrix,
};
use crate::gamma::{gamma0k, tilted_field_model, GammaStatus};
use crate::kane::{self, KaneParams};
use crate::tfim::{self, Scheme, TfimParams};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub time_limit: Option<Duration>,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

type Outcome = std::result::Result<String, String>;

struct Check {
    id: u32,
    name: &'static str,
    limit_secs: Option<u64>,
    run: fn() -> Outcome,
}

const CHECKS: [Check; 9] = [
    Check {
        id: 1,
        name: "tfim analytic anchors",
        limit_secs: Some(1),
        run: tfim_anchors,
    },
    Check {
        id: 2,
        name: "elliptic closed form vs quadrature",
        limit_secs: Some(5),
        run: closed_form_vs_quadrature,
    },
    Check {
        id: 3,
        name: "logarithmic growth at the critical point",
        limit_secs: Some(10),
        run: qcp_signature,
    },
    Check {
        id: 4,
        name: "free fermions vs exact diagonalization",
        limit_secs: Some(60),
        run: free_fermion_oracle,
    },
    Check {
        id: 5,
        name: "Hellmann-Feynman",
        limit_secs: Some(30),
        run: hellmann_feynman,
    },
    Check {
        id: 6,
        name: "entanglement anchors",
        limit_secs: None,
        run: entanglement_anchors,
    },
    Check {
        id: 7,
        name: "half-chain entropy profile, N = 10",
        limit_secs: Some(120),
        run: entropy_profile,
    },
    Check {
        id: 8,
        name: "Kane anchors and ED cross-check",
        limit_secs: Some(30),
        run: kane_anchors,
    },
    Check {
        id: 9,
        name: "closed Grueneisen ratios",
        limit_secs: None,
        run: closed_ratios,
    },
];

/// Ids of the available checks.
pub fn ids() -> Vec<u32> {
    CHECKS.iter().map(|c| c.id).collect()
}

/// Runs one check; `None` for an unknown id.
pub fn run(id: u32) -> Option<CheckResult> {
    let check = CHECKS.iter().find(|c| c.id == id)?;
    let start = Instant::now();
    let outcome = (check.run)();
    let elapsed = start.elapsed();
    let time_limit = check.limit_secs.map(Duration::from_secs);
    let (mut passed, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if let Some(limit) = time_limit {
        if elapsed > limit {
            passed = false;
            detail = format!("{detail}; exceeded {} s", limit.as_secs());
        }
    }
    Some(CheckResult {
        id,
        name: check.name,
        passed,
        detail,
        elapsed,
        time_limit,
    })
}

pub fn run_all() -> Vec<CheckResult> {
    ids().into_iter().filter_map(run).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn num<T>(r: crate::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn tfim_anchors() -> Outcome {
    let free = num(tfim::e0_per_site(&num(TfimParams::new(1.0, 0.0))?))?;
    ensure((free + 2.0).abs() <= 1e-12, || format!("E0(B=1, J=0) = {free}"))?;
    let crit = num(tfim::e0_per_site(&num(TfimParams::new(1.0, 1.0))?))?;
    ensure((crit + 8.0 / PI).abs() <= 1e-10, || format!("E0(B=1, J=1) = {crit}"))?;
    Ok(format!("E0(1,0) = {free}, E0(1,1) + 8/pi = {:.1e}", crit + 8.0 / PI))
}

fn closed_form_vs_quadrature() -> Outcome {
    let mut worst = (0.0_f64, 0.0);
    for i in 1..=60 {
        let lambda = 0.05 * i as f64;
        if lambda > 0.99 && lambda < 1.01 {
            continue;
        }
        let p = num(TfimParams::from_lambda(lambda))?;
        let closed = num(tfim::e0_per_site(&p))?;
        let quad = num(tfim::e0_quadrature(&p, 1e-13))?;
        let rel = ((closed - quad) / quad).abs();
        if rel > worst.0 {
            worst = (rel, lambda);
        }
    }
    ensure(worst.0 <= 1e-9, || format!("relative discrepancy {:.2e} at lambda = {}", worst.0, worst.1))?;
    Ok(format!("max relative discrepancy {:.2e}", worst.0))
}

fn qcp_signature() -> Outcome {
    let mut summary = Vec::new();
    for side in [-1.0, 1.0] {
        let mut mags = Vec::new();
        for k in 2..=5 {
            let lambda = 1.0 + side * 10f64.powi(-k);
            let p = num(TfimParams::new(1.0, lambda))?;
            mags.push(num(tfim::derivatives(&p, Scheme::Analytic))?.cross.abs());
        }
        let inc: Vec<f64> = mags.windows(2).map(|w| w[1] - w[0]).collect();
        ensure(inc.iter().all(|d| *d > 0.0), || format!("|cross| not increasing: {mags:?}"))?;
        let mean = inc.iter().sum::<f64>() / inc.len() as f64;
        let spread = inc.iter().map(|d| (d / mean - 1.0).abs()).fold(0.0, f64::max);
        ensure(spread <= 0.2, || format!("increments {inc:?} vary by {spread:.3}"))?;
        summary.push(format!("side {side:+}: increments {:.4}..{:.4}", inc[0], inc[inc.len() - 1]));
    }
    Ok(summary.join("; "))
}

fn free_fermion_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f1e);
    let mut worst = 0.0_f64;
    for n in [2, 4, 8, 12] {
        for _ in 0..10 {
            let p = num(TfimParams::new(rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0)))?;
            let ff = num(tfim::finite_chain_e0(n, &p))?.e0_total;
            let ed = num(ground_state(&num(build_tfim(n, &p))?))?.energy;
            let d = (ff - ed).abs();
            worst = worst.max(d);
            ensure(d <= 1e-9, || {
                format!("N = {n}, B = {}, J = {}: |{ff} - {ed}| = {d:.2e}", p.b(), p.j())
            })?;
        }
    }
    Ok(format!("max |E_ff - E_ed| = {worst:.2e} over 40 chains"))
}

fn hellmann_feynman() -> Outcome {
    let mut worst = 0.0_f64;
    for lambda in [0.3, 0.5, 2.0] {
        let hf = num(hellmann_feynman_check(10, &num(TfimParams::new(1.0, lambda))?))?;
        worst = worst.max(hf.discrepancy);
        ensure(hf.discrepancy <= 1e-6, || {
            format!("lambda = {lambda}: dE/dJ = {}, <dH/dJ> = {}", hf.lhs, hf.rhs)
        })?;
    }
    Ok(format!("max discrepancy {worst:.2e}"))
}

fn entanglement_anchors() -> Outcome {
    let c = |re: f64| Complex64::new(re, 0.0);
    let product = [c(1.0), c(0.0), c(0.0), c(0.0)];
    let s = von_neumann_entropy(&num(partial_trace(&product[..], 2, &[0]))?).bits;
    ensure(s.abs() <= 1e-12, || format!("product state entropy {s}"))?;
    let plus = vec![c(0.25); 16];
    let s = von_neumann_entropy(&num(partial_trace(&plus, 4, &[0, 1]))?).bits;
    ensure(s.abs() <= 1e-12, || format!("|++++> half entropy {s}"))?;
    let pure = von_neumann_entropy(&num(DensityMatrix::from_pure(&product))?).bits;
    ensure(pure.abs() <= 1e-12, || format!("pure projector entropy {pure}"))?;

    let s = von_neumann_entropy(&num(DensityMatrix::maximally_mixed(2))?).bits;
    ensure((s - 1.0).abs() <= 1e-12, || format!("I/2 entropy {s}"))?;
    let s = von_neumann_entropy(&num(DensityMatrix::maximally_mixed(4))?).bits;
    ensure((s - 2.0).abs() <= 1e-12, || format!("I4/4 entropy {s}"))?;
    for n in [1u32, 10, 30] {
        let s = num(maximally_mixed_entropy(n))?.bits;
        ensure(s == n as f64, || format!("rho_{n} entropy {s}"))?;
    }

    for n in 3..=8 {
        let ghz = num(ghz_state(n))?;
        for i in 0..n {
            let s = von_neumann_entropy(&num(partial_trace(&ghz, n, &[i]))?).bits;
            ensure((s - 1.0).abs() <= 1e-10, || format!("GHZ{n} site {i} entropy {s}"))?;
            for j in i + 1..n {
                let cc = num(concurrence(&num(partial_trace(&ghz, n, &[i, j]))?))?;
                ensure(cc <= 1e-10, || format!("GHZ{n} pair ({i},{j}) concurrence {cc}"))?;
            }
        }
    }
    Ok("product 0, I/2 1, rho_n n bits, GHZ(3..8) pairs 0 and sites 1 bit".to_string())
}

fn entropy_profile() -> Outcome {
    let grid: Vec<f64> = (0..37).map(|i| 0.2 + 0.05 * i as f64).collect();
    let entropy = |lambda: f64| -> std::result::Result<f64, String> {
        let p = num(TfimParams::new(1.0, lambda))?;
        Ok(num(tfim_entanglement_profile(10, &p, Cut::HalfChain))?.entropy.bits)
    };
    let s: Vec<f64> = grid.iter().map(|&l| entropy(l)).collect::<std::result::Result<_, _>>()?;
    if let Some(i) = s.windows(2).position(|w| w[1] <= w[0]) {
        return Err(format!(
            "S_N not increasing between lambda = {:.2} and {:.2}",
            grid[i],
            grid[i + 1]
        ));
    }
    let (k, slope) = s
        .windows(2)
        .map(|w| (w[1] - w[0]) / 0.05)
        .enumerate()
        .fold((0, f64::MIN), |best, (k, d)| if d > best.1 { (k, d) } else { best });
    let at = 0.5 * (grid[k] + grid[k + 1]);
    ensure((0.8..=1.2).contains(&at), || format!("steepest slope {slope:.3} at lambda = {at:.3}"))?;
    let far = entropy(20.0)?;
    ensure((far - 1.0).abs() <= 0.15, || format!("S_N(20) = {far}"))?;
    Ok(format!("monotone; steepest slope {slope:.3} at lambda = {at:.3}; S_N(20) = {far:.6}"))
}

fn kane_anchors() -> Outcome {
    let kp = |a: f64, jp: f64| num(KaneParams::new(a, jp, 1.0));
    let e = num(kane::splitting(&kp(1e-3, 0.25)?))?;
    ensure(e == 2e-6, || format!("splitting = {e:e}"))?;

    let below = num(kane::derivatives(&kp(1e-3, 0.5 - 9e-4)?))?;
    let above = num(kane::derivatives(&kp(1e-3, 0.5 + 9e-4)?))?;
    ensure(below.cross < 0.0 && above.cross > 0.0, || "cross derivative keeps its sign".to_string())?;
    ensure(below.second_term < 0.0 && above.second_term > 0.0, || {
        "second term keeps its sign".to_string()
    })?;

    let rel_err = |a: f64| -> std::result::Result<f64, String> {
        let p = kp(a, 0.25)?;
        let exact = num(kane::splitting(&p))?;
        Ok(((num(kane::ed_splitting(&p))? - exact) / exact).abs())
    };
    let small = rel_err(1e-3)?;
    let big = rel_err(1e-2)?;
    ensure(small <= 1e-2, || format!("ED relative error {small:.2e} at A = 1e-3"))?;
    let ratio = big / small;
    ensure((70.0..=130.0).contains(&ratio), || format!("error ratio {ratio:.1}, expected about 100"))?;
    Ok(format!(
        "ED relative error {small:.2e} (A = 1e-3), {big:.2e} (A = 1e-2), ratio {ratio:.1}"
    ))
}

fn closed_ratios() -> Outcome {
    let check = |label: &str, est: crate::gamma::GammaEstimate, want: f64, tol: f64| -> std::result::Result<f64, String> {
        let g = est
            .gamma
            .ok_or_else(|| format!("{label}: status {}", est.status.as_str()))?;
        ensure(est.status == GammaStatus::Ok && (g - want).abs() <= tol, || {
            format!("{label}: gamma = {g}, expected {want}")
        })?;
        Ok((g - want).abs())
    };
    let mut worst = [0.0_f64; 3];
    let tfim_model = tfim::energy_model();
    for j in [0.25, 0.5, 2.0] {
        let d = check("tfim", num(gamma0k(&tfim_model, 1.0, j))?, 1.0 / j, 1e-3)?;
        worst[0] = worst[0].max(d);
    }
    let kane_model = kane::energy_model(1e-3);
    for jp in [0.1, 0.25, 1.0] {
        let d = check("kane", num(gamma0k(&kane_model, jp, 1.0))?, 0.5 / jp, 1e-4)?;
        worst[1] = worst[1].max(d);
    }
    let tilted = tilted_field_model();
    for g in [0.5, 1.0, 2.0] {
        let d = check("tilted", num(gamma0k(&tilted, 1.0, g))?, 1.0 / g, 1e-6)?;
        worst[2] = worst[2].max(d);
    }
    Ok(format!(
        "max |gamma - closed form|: tfim {:.1e}, kane {:.1e}, tilted {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}
