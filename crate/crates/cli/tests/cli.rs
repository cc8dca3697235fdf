use std::path::Path;
use std::process::{Command, Output};

fn wlp(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wlp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn sigma_of_a_single_exponential_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = wlp(&["sigma", "--n", "32", "--function", "exp:k=3", "--partition", "[[3,3]]"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("sigma.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,x,sigma"));
    let values: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 32);
    assert!(values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    assert!(!csv.contains('\r'));
}

#[test]
fn lemma4_unit_weight_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = wlp(&["lemma4", "--p-grid", "1.5", "--weight", "unit"], dir.path());
    assert!(o.status.success());
    let csv = read(&dir.path().join("lemma4.csv"));
    assert_eq!(csv, "p,c,a,b,alpha_p,A_1,margin,pass\n1.5,0.375,0.25,0.75,1,1,0,true\n");
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("p_grid     = [1.5]"));
    assert_eq!(report, read(&dir.path().join("report.txt")));
}

#[test]
fn theorem2_sweep_is_reproducible() {
    let root = tempfile::tempdir().unwrap();
    let args = ["theorem2-sweep", "--seed", "42", "--ns", "16,32", "--trials", "40"];
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    assert!(wlp(&args, &a).status.success());
    assert!(wlp(&args, &b).status.success());
    for f in ["theorem2.csv", "theorem2_growth.csv", "theorem2.json"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let other = root.path().join("c");
    let args = ["theorem2-sweep", "--seed", "43", "--ns", "16,32", "--trials", "40"];
    assert!(wlp(&args, &other).status.success());
    assert_ne!(read(&a.join("theorem2.csv")), read(&other.join("theorem2.csv")));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["correct-sweep"][..],
        &["sigma", "--n", "100"],
        &["weights", "--weight", "nosuch"],
        &["sigma", "--partition", "[[5,1]]"],
        &["sigma", "--n", "16", "--partition", "[[0,20]]"],
        &["lemma1", "--t-grid", ""],
        &["correct-sweep", "--seed", "1", "--b-grid", "0.9,0.5"],
    ] {
        let o = wlp(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn compute_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // α_p needs p ≤ 2 for the mixing probe's q.
    let o = wlp(&["lemma1", "--q", "2.5"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command": "lemma4", "n": 64, "p_grid": [1.25, 1.75], "weight": "power:delta=-0.2"}"#)
        .unwrap();
    let out = dir.path().join("out");
    let o = wlp(&["lemma4", "--config", cfg.to_str().unwrap(), "--p-grid", "1.5"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out.join("lemma4.csv"));
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("1.5,"));
    let report = read(&out.join("report.txt"));
    assert!(report.contains("power:delta=-0.2"));
    assert!(report.contains("n          = 64"));

    let o = wlp(&["weights", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn correct_sweep_writes_curve_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = wlp(&["correct-sweep", "--n", "128", "--seed", "11", "--strategy", "damp"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("sweep.csv"));
    assert!(csv.starts_with("B_target,epsilon,B_achieved,iterations,converged\n"));
    let eps: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(eps.windows(2).all(|x| x[1] <= x[0]));
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("verification: pass"));
    assert!(report.contains("fit B =") || report.contains("fit skipped"));
    let json: serde_json::Value = serde_json::from_str(&read(&dir.path().join("sweep.json"))).unwrap();
    assert_eq!(json["strategy"], "damp");
}

#[test]
fn regularize_prints_the_plan_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = wlp(&["regularize", "--n", "256", "--partition", "[[-40,-3],[0,5],[10,90]]"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("positive half validator: pass"));
    assert!(report.contains("negative (mirrored) half validator: pass"));
    assert!(report.contains("colors"));
    let csv = read(&dir.path().join("plan.csv"));
    assert!(csv.starts_with("half,group,interval,piece,hull_lo,hull_hi,padded_lo,padded_hi\n"));
    let json: serde_json::Value = serde_json::from_str(&read(&dir.path().join("plan.json"))).unwrap();
    assert_eq!(json["partition"], serde_json::json!([[-40, -3], [0, 5], [10, 90]]));
}

#[test]
fn sigma_reads_a_function_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    let mut text = String::from("index,re,im\n");
    for m in 0..16 {
        text.push_str(&format!("{m},{},0\n", if m == 0 { 1.0 } else { 0.0 }));
    }
    std::fs::write(&f, text).unwrap();
    let out = dir.path().join("out");
    let o = wlp(&["sigma", "--n", "16", "--function", f.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&read(&out.join("sigma.json"))).unwrap();
    // a delta has flat spectrum; the dyadic window covers every frequency
    let (f2, s2) = (json["l2_f"].as_f64().unwrap(), json["l2_sigma"].as_f64().unwrap());
    assert!((f2 - s2).abs() < 1e-14);
}
