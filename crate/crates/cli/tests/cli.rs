use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspzero")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let cache = dir.join("cache");
    let out = dir.join("out");
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--cache-dir", cache.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    run(&all)
}

fn ok(o: &Output) {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    r.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn cache_files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    v.sort();
    v
}

fn dim(k: u32) -> usize {
    let q = (k / 12) as usize;
    if k % 12 == 2 {
        q - 1
    } else {
        q
    }
}

#[test]
fn eigenform_cache_is_idempotent_and_repaired() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&run_in(tmp.path(), &["eigenform", "--weights", "12", "--precision-bits", "192"]));
    let cache = tmp.path().join("cache");
    assert_eq!(cache_files(&cache).len(), 1);

    ok(&run_in(tmp.path(), &["eigenform", "--weights", "12..40"]));
    let files = cache_files(&cache);
    let want: usize = (12..=40).step_by(2).map(dim).sum();
    assert_eq!(files.len(), want);
    assert!(!files.iter().any(|f| f.contains("k00014")));

    let path = cache.join(&files[files.len() - 1]);
    let before = fs::metadata(&path).unwrap().modified().unwrap();
    let text = fs::read_to_string(&path).unwrap();
    ok(&run_in(tmp.path(), &["eigenform", "--weights", "12..40"]));
    assert_eq!(fs::metadata(&path).unwrap().modified().unwrap(), before);

    fs::write(&path, text.replacen("\n2 ", "\n2 7", 1)).unwrap();
    ok(&run_in(tmp.path(), &["eigenform", "--weights", "40"]));
    assert_eq!(fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn invalid_configuration_exits_with_2() {
    for args in [
        &["eigenform", "--weights", "13"][..],
        &["eigenform", "--weights", "10"],
        &["census", "--precision-bits", "32"],
        &["census", "--segments", "delta4"],
        &["model", "--delta", "0.9"],
        &["census", "--Y", "-3"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn census_small_weights() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&run_in(tmp.path(), &["census", "--weights", "12,24"]));
    let rows = read_csv(&tmp.path().join("out/census_summary.csv"));
    let (k, n1, n2, n3, status) =
        (column(&rows, "k"), column(&rows, "n_delta1"), column(&rows, "n_delta2"), column(&rows, "n_delta3"), column(&rows, "status"));
    assert_eq!(rows.len(), 1 + 1 + 2);
    let delta = &rows[1];
    assert_eq!((delta[k].as_str(), delta[n1].as_str(), delta[n2].as_str(), delta[n3].as_str()), ("12", "0", "0", "0"));
    for r in &rows[2..] {
        assert_eq!(r[k], "24");
        let total: u32 = [n1, n2, n3].iter().map(|&c| r[c].parse::<u32>().unwrap()).sum();
        assert_eq!(total, 1);
        assert_eq!(r[status], "ok");
    }
    let zeros = read_csv(&tmp.path().join("out/census/k00024_i000_zeros.csv"));
    assert_eq!(zeros[0], ["segment", "param_lo", "param_hi", "location", "width", "flags"]);
    assert!(zeros.iter().any(|r| r[0] == "first_negative"));
    let ladder = read_csv(&tmp.path().join("out/census/k00024_i000_ladder.csv"));
    assert_eq!(ladder[0], ["l", "alpha", "y", "lambda", "residual"]);
}

#[test]
fn census_outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["census", "--weights", "36,40", "--Y", "1.5,0.5sqrtk"];
    ok(&run_in(a.path(), &args));
    ok(&run_in(b.path(), &args));
    for name in ["census_summary.csv", "census/k00040_i002_zeros.csv", "census/k00036_i001_ladder.csv"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn model_runs_without_eigenforms_at_large_weight() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&run_in(tmp.path(), &["model", "--weights", "1000000", "--segments", "delta3"]));
    let profile = read_csv(&tmp.path().join("out/model/k1000000_delta3_density.csv"));
    assert_eq!(profile[0], ["y", "density"]);
    assert!(profile.len() > 100);
    assert!(!tmp.path().join("cache").exists());
    let summary = read_csv(&tmp.path().join("out/model_summary.csv"));
    let e: f64 = summary[1][column(&summary, "expected")].parse().unwrap();
    let pred = 1e3 / (4.0 * std::f64::consts::PI) * 3f64.ln();
    assert!((e / pred - 1.0).abs() < 0.05, "{e} vs {pred}");
}

#[test]
fn model_monte_carlo_output() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&run_in(tmp.path(), &["model", "--weights", "120", "--segments", "delta1", "--trials", "20", "--seed", "5"]));
    let mc = read_csv(&tmp.path().join("out/model/k00120_delta1_mc.csv"));
    assert_eq!(mc[0], ["trial", "count"]);
    assert_eq!(mc.len(), 21);
}

#[test]
fn compare_joins_census_and_model() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&run_in(tmp.path(), &["census", "--weights", "300", "--Y", "3sqrtk"]));
    ok(&run_in(tmp.path(), &["compare", "--weights", "300"]));
    let census_only = read_csv(&tmp.path().join("out/compare.csv"));
    assert_eq!(census_only[1][column(&census_only, "prediction_source")], "census");

    ok(&run_in(tmp.path(), &["model", "--weights", "300"]));
    ok(&run_in(tmp.path(), &["compare", "--weights", "300"]));
    let rows = read_csv(&tmp.path().join("out/compare.csv"));
    assert_eq!(rows.len(), 1 + 25);
    for name in ["ratio_delta1", "ratio_delta2", "ratio_delta3", "ratio_real"] {
        let c = column(&rows, name);
        for r in &rows[1..] {
            let v: f64 = r[c].parse().unwrap_or_else(|_| panic!("{name}: {}", r[c]));
            assert!(v.is_finite() && v >= 0.0);
        }
    }
    assert!(rows[1..].iter().all(|r| r[column(&rows, "prediction_source")] == "model"));
}

#[test]
fn compare_without_census_fails() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_in(tmp.path(), &["compare"]).status.code(), Some(1));
}
