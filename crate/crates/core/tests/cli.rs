use std::path::Path;
use std::process::{Command, Output};

use quantum_grueneisen::gamma::{Component, ScanReport};

const EXE: &str = env!("CARGO_BIN_EXE_quantum-grueneisen");

fn run(args: &[&str]) -> Output {
    Command::new(EXE).args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Csv {
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# quantum-grueneisen v"));
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Csv { header, rows }
    }

    fn column(&self, name: &str) -> Vec<Option<f64>> {
        let i = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }

    fn status(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.last().unwrap().clone()).collect()
    }
}

#[test]
fn tfim_cross_peaks_next_to_the_critical_point() {
    let csv = Csv::parse(&stdout(&run(&["tfim-sweep", "--grid", "0.2:2.0:37", "--n-sites", "10"])));
    let lambda = csv.column("lambda");
    let cross = csv.column("cross");
    let (imax, _) = cross
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| (i, c.abs())))
        .fold((0, 0.0), |b, (i, c)| if c > b.1 { (i, c) } else { b });
    let l = lambda[imax].unwrap();
    assert!((l - 1.0).abs() < 0.05 + 1e-12, "max |cross| at {l}");
    for (s, l) in csv.status().iter().zip(&lambda) {
        assert_eq!(s == "ok", (l.unwrap() - 1.0).abs() > 1e-6);
    }
    assert!(csv.column("entropy_bits").iter().flatten().all(|s| (0.0..=1.1).contains(s)));
}

#[test]
fn tfim_entropy_approaches_one_bit_deep_in_the_ordered_phase() {
    let csv = Csv::parse(&stdout(&run(&["tfim-sweep", "--grid", "5:40:8", "--n-sites", "10"])));
    let dev: Vec<f64> = csv.column("entropy_bits").iter().map(|s| (s.unwrap() - 1.0).abs()).collect();
    assert!(dev.windows(2).all(|w| w[1] <= w[0]), "{dev:?}");
    assert!(dev[dev.len() - 1] < 1e-5);
}

#[test]
fn tfim_entropy_is_small_near_the_product_state() {
    let csv = Csv::parse(&stdout(&run(&["tfim-sweep", "--grid", "0.2:0.4:3", "--n-sites", "10"])));
    assert!(csv.column("entropy_bits").iter().all(|s| s.unwrap() < 0.2));
}

#[test]
fn kane_sweep_brackets_the_locus() {
    let csv = Csv::parse(&stdout(&run(&["kane-sweep", "--grid", "0.05:1.0:96", "--muBB", "1", "--A", "1e-3"])));
    let jp = csv.column("Jp");
    for name in ["cross", "second_term"] {
        let col = csv.column(name);
        let pts: Vec<(f64, f64)> = jp.iter().zip(&col).filter_map(|(x, v)| Some((x.unwrap(), (*v)?))).collect();
        let flips: Vec<(f64, f64)> =
            pts.windows(2).filter(|w| w[0].1 * w[1].1 < 0.0).map(|w| (w[0].0, w[1].0)).collect();
        assert_eq!(flips.len(), 1, "{name}: {flips:?}");
        assert!(flips[0].0 < 0.5 && 0.5 < flips[0].1);
    }
    for ((x, g), s) in jp.iter().zip(csv.column("gamma")).zip(csv.status()) {
        let x = x.unwrap();
        if s == "ok" {
            assert!((g.unwrap() - 0.5 / x).abs() < 1e-4);
        } else {
            assert!((x - 0.5).abs() < 1e-12 && g.is_none());
        }
    }
}

#[test]
fn kane_without_hyperfine_coupling_has_no_splitting() {
    let out = run(&["kane-sweep", "--grid", "0.05:0.45:9", "--A", "0", "--outputs", "splitting,ed_splitting"]);
    let csv = Csv::parse(&stdout(&out));
    assert!(csv.column("splitting").iter().all(|s| *s == Some(0.0)));
    assert!(csv.column("ed_splitting").iter().all(|s| *s == Some(0.0)));
}

#[test]
fn scan_json_round_trips() {
    for (model, grid, expect) in [("tfim", "0.2:2.0:37", Some(1.0)), ("kane", "0.05:1.0:96", Some(0.5)), ("tilted", "0.1:2.0:20", None)] {
        let text = stdout(&run(&["scan", "--model", model, "--grid", grid]));
        let report: ScanReport = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
        match expect {
            Some(x) => {
                assert_eq!(report.divergence_candidates.len(), 1, "{model}");
                assert!(report.divergence_candidates[0].contains(x));
            }
            None => assert!(report.divergence_candidates.is_empty() && report.sign_changes.is_empty()),
        }
        if model == "kane" {
            for c in [Component::Mixed, Component::Second] {
                assert!(report.sign_changes.iter().any(|s| s.component == c && s.lo < 0.5 && 0.5 < s.hi));
            }
        }
    }
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("kane.json");
    std::fs::write(
        &cfg,
        r#"{"model": "kane", "fixed": {"A": 0.001, "muBB": 1.0}, "swept": "Jp",
            "grid": [0.1, 0.2, 0.25], "outputs": ["splitting", "gamma"], "format": "json"}"#,
    )
    .unwrap();
    let out_path = dir.path().join("out.csv");
    let o = run(&["kane-sweep", "--config", cfg.to_str().unwrap(), "--format", "csv", "--output", out_path.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let csv = Csv::parse(&std::fs::read_to_string(&out_path).unwrap());
    assert_eq!(csv.header, ["Jp", "muBB", "exchange_ratio", "splitting", "gamma", "status"]);
    assert_eq!(csv.column("splitting")[2], Some(2e-6));

    let json = stdout(&run(&["kane-sweep", "--config", cfg.to_str().unwrap()]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["rows"][2]["values"][0].as_f64(), Some(2e-6));
}

#[test]
fn singular_rows_have_empty_numeric_cells() {
    let csv = Csv::parse(&stdout(&run(&["kane-sweep", "--grid", "0.25:0.75:3"])));
    assert_eq!(csv.status(), ["ok", "singular", "ok"]);
    let row = &csv.rows[1];
    assert_eq!(row[..3].iter().filter(|c| c.is_empty()).count(), 0);
    assert!(row[3..row.len() - 1].iter().all(String::is_empty));
}

#[test]
fn entanglement_of_a_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("bell.json");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    std::fs::write(&state, format!("[[{s}, 0], [0, 0], [0, 0], [0, {s}]]")).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["entanglement", "--state", state.to_str().unwrap()]))).unwrap();
    assert!((v["entropy_bits"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["concurrence"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let ghz = dir.path().join("ghz.json");
    std::fs::write(&ghz, format!("[[{s}, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0], [{s}, 0]]")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&run(&[
        "entanglement",
        "--state",
        ghz.to_str().unwrap(),
        "--keep",
        "0,2",
    ])))
    .unwrap();
    assert!((v["entropy_bits"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["concurrence"].as_f64().unwrap().abs() < 1e-10);
}

fn code(args: &[&str]) -> Option<i32> {
    run(args).status.code()
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["tfim-sweep"]), Some(2));
    assert_eq!(code(&["tfim-sweep", "--grid", "2:1:5"]), Some(2));
    assert_eq!(code(&["tfim-sweep", "--grid", "0.2:2:5", "--outputs", "entropy_bits"]), Some(2));
    assert_eq!(code(&["kane-sweep", "--grid", "0.1:0.4:4", "--B", "1"]), Some(2));
    assert_eq!(code(&["tfim-sweep", "--grid", "0.2:2:5", "--J", "2"]), Some(2));
    assert_eq!(code(&["kane-sweep", "--grid", "0.1:0.4:4", "--Jp", "0.2"]), Some(2));
    assert_eq!(code(&["scan", "--model", "custom", "--grid", "0:1:10"]), Some(2));
    assert_eq!(code(&["scan", "--model", "tfim", "--grid", "0.2:2:37", "--format", "csv"]), Some(2));
    assert_eq!(code(&["no-such-command"]), Some(2));
    assert_eq!(code(&["tfim-sweep", "--grid", "-1:1:3", "--swept", "J"]), Some(3));
    assert_eq!(code(&["entanglement", "--state", "/nonexistent/state.json"]), Some(4));
    let o = Command::new(EXE)
        .args(["tfim-sweep", "--grid", "0.2:2:5"])
        .env("QG_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let bad_dir = Path::new("/nonexistent-dir/out.csv");
    assert_eq!(code(&["tfim-sweep", "--grid", "0.2:2:5", "--output", bad_dir.to_str().unwrap()]), Some(4));
}

#[test]
fn selftest_subset() {
    let o = run(&["selftest", "--only", "1,6"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("[PASS]")));
    assert_eq!(code(&["selftest", "--only", "99"]), Some(2));
}
