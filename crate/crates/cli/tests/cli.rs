use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;

use afqms_core::algebra::{Kernel, C64};
use afqms_core::format::kernel_to_json;
use afqms_core::{BrattelDiagram, TruncatedGroupoid, UnitUltrametric};

fn afqms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afqms"))
        .args(args)
        .env_remove("AFQMS_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("afqms-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

fn value(json: &str, key: &str) -> f64 {
    let at = json.find(&format!("\"{key}\": ")).unwrap() + key.len() + 4;
    let rest = &json[at..];
    let end = rest.find([',', '\n']).unwrap();
    rest[..end].trim().parse().unwrap()
}

#[test]
fn check_exit_codes() {
    let ok = afqms(&["check", "--diagram", &data("car.bratteli"), "--resolution", "6"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("\"64\""));

    let zero = scratch("zero.bratteli", "bratteli v1\nlevels 1\nsizes 1 1\nmatrix 1: []\nsources: (0,0)\n");
    let bad = afqms(&["check", "--diagram", &zero, "--resolution", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("0 rows"));

    let missing = afqms(&["check", "--diagram", "/no/such/diagram.bratteli"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn analyze_is_reproducible_across_runs_and_thread_counts() {
    let args = ["analyze", "--resolution", "4", "--level", "3", "--order", "2", "--seed", "11"];
    let a = afqms(&args);
    let b = afqms(&args);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "3"]);
    let c = afqms(&threaded);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let text = stdout(&a);
    for key in ["\"version\"", "\"base\"", "\"resolution\"", "\"level\"", "\"seed\": 11"] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn analyze_unit_and_diagonal_kernels() {
    let g = Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(3), 3, UnitUltrametric::default()).unwrap());
    let unit = scratch("unit.json", &kernel_to_json(&Kernel::identity(&g)));
    let o = afqms(&["analyze", "--resolution", "3", "--kernel", &unit, "--order", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(value(&text, "i_norm"), 1.0);
    assert_eq!(value(&text, "op_norm"), 1.0);
    assert_eq!(value(&text, "l_lip"), 0.0);
    assert!(text.contains("\"seed\": null"));

    let values: Vec<C64> = (0..8).map(|i| C64::new(i as f64, -0.5 * i as f64)).collect();
    let diag = scratch("diag.json", &kernel_to_json(&Kernel::diagonal(&g, &values).unwrap()));
    let o = afqms(&["analyze", "--resolution", "3", "--kernel", &diag, "--order", "3"]);
    let text = stdout(&o);
    assert_eq!(text.matches("\"value\": 0.0").count(), 3, "{text}");

    let broken = scratch("broken.json", "{\"format\": \"afqms-kernel\"");
    let o = afqms(&["analyze", "--resolution", "3", "--kernel", &broken]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn analyze_with_multiplier() {
    let o = afqms(&["analyze", "--resolution", "3", "--level", "3", "--multiplier", "truncation:0"]);
    assert_eq!(o.status.code(), Some(0));
    let o = afqms(&["analyze", "--resolution", "3", "--multiplier", "gaussian:1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bound_table() {
    let o = afqms(&["bound", "--resolution", "10", "--m-range", "1..5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,k_max,beta_partial,tail,beta_total,ratio,conclusive");
    for (m, line) in (1..=5).zip(&lines[1..]) {
        let cells: Vec<&str> = line.split(',').collect();
        let total: f64 = cells[4].parse().unwrap();
        assert!((total - 0.5f64.powi(m + 1)).abs() < 1e-12);
        assert_eq!(cells[6], "true");
    }

    let id = scratch("id.bratteli", "bratteli v1\nlevels 3\nsizes 1 1 1 1\nmatrix 1: [[1]]\nmatrix 2: [[1]]\nmatrix 3: [[1]]\nsources: (0,0)\n");
    let o = afqms(&["bound", "--diagram", &id, "--resolution", "3", "--m-range", "0..2"]);
    assert!(stdout(&o).lines().skip(1).all(|l| l.split(',').nth(4) == Some("0e0")));

    let o = afqms(&["bound", "--resolution", "4", "--m-range", "2..4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn net_and_mk_reports() {
    let o = afqms(&["net", "--resolution", "4", "--radius", "8", "--eps", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "certified_radius"), 8.0);

    let car = data("car.bratteli");
    let o = afqms(&["net", "--diagram", &car, "--resolution", "3", "--radius", "16"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("too small"));

    let tree = afqms(&["mk", "--resolution", "3", "--seed", "4", "--iters", "30"]);
    let lp = afqms(&["mk", "--resolution", "3", "--seed", "4", "--iters", "30", "--solver", "lp"]);
    assert_eq!(tree.status.code(), Some(0));
    let (t, l) = (stdout(&tree), stdout(&lp));
    assert!((value(&t, "transport") - value(&l, "transport")).abs() < 1e-9);
    assert!(value(&t, "value") >= value(&t, "wasserstein") - 1e-6);
}

#[test]
fn accept_subset_and_controlled_failure() {
    let o = afqms(&["accept", "--filter", "1,car-qgh"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().all(|l| l.starts_with("PASS")));

    let o = afqms(&["accept", "--filter", "commutator", "--tolerance-scale", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("FAIL [03]"));
}
