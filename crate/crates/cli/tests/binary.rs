//! End-to-end runs of the `invgof` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use invariant_gof::montecarlo::CriticalValueTable;
use invariant_gof::{FamilySpec, ParamPair, StatisticKind};
use invariant_gof_cli::{cmd_test, TableSource, TestOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn invgof(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invgof"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_values(dir: &Path, name: &str, values: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let body: String = values.iter().map(|v| format!("{v:?}\n")).collect();
    std::fs::write(&path, body).unwrap();
    path
}

fn weibull_file(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = ParamPair::new(2.5, 1.7).unwrap();
    let s = FamilySpec::Weibull.sample(&p, n, &mut rng).unwrap();
    write_values(dir, &format!("weibull-{seed}.txt"), s.values())
}

/// Two well-separated clusters: far from any Weibull shape.
fn bimodal_file(dir: &Path, n: usize) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let centre = if i % 2 == 0 { 1.0 } else { 100.0 };
            centre * rng.gen_range(0.99..1.01)
        })
        .collect();
    write_values(dir, "bimodal.txt", &values)
}

fn small_table(dir: &Path, sizes: &str) -> PathBuf {
    let path = dir.join(format!("table-{}.cvt", sizes.replace(',', "-")));
    let out = invgof(&[
        "table",
        "--n",
        sizes,
        "--M",
        "1000",
        "--seed",
        "11",
        "--out-path",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

/// Value of a `key   value` line in text output.
fn text_field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no {key} line in\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn fit_text_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let data = weibull_file(dir.path(), 40, 1);
    let text = invgof(&["fit", data.to_str().unwrap()]);
    let js = invgof(&["fit", data.to_str().unwrap(), "--out", "json"]);
    assert!(text.status.success() && js.status.success());
    let text = String::from_utf8(text.stdout).unwrap();
    let js = json(&js);
    let c = js["fit"]["params"]["c"].as_f64().unwrap();
    let kappa = js["fit"]["params"]["kappa"].as_f64().unwrap();
    assert!((text_field(&text, "c_hat") - c).abs() < 1e-6);
    assert!((text_field(&text, "kappa_hat") - kappa).abs() < 1e-6);
    assert_eq!(js["n"], 40);
}

#[test]
fn test_matches_in_process_pipeline_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let table = small_table(dir.path(), "30");
    for data in [
        weibull_file(dir.path(), 30, 2),
        bimodal_file(dir.path(), 30),
    ] {
        let out = invgof(&[
            "test",
            data.to_str().unwrap(),
            "--table",
            table.to_str().unwrap(),
            "--out",
            "json",
        ]);
        let report = cmd_test(
            &data,
            &TestOptions {
                family: FamilySpec::Weibull,
                table: TableSource::File(table.clone()),
                alphas: None,
                interpolate_n: false,
            },
        )
        .unwrap();
        let expected_code = if report.any_rejection() { 1 } else { 0 };
        assert_eq!(out.status.code(), Some(expected_code));
        let got = json(&out);
        let want: Value = serde_json::from_str(&report.render_json()).unwrap();
        assert_eq!(got, want);
    }
}

#[test]
fn clear_misfit_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let table = small_table(dir.path(), "30");
    let data = bimodal_file(dir.path(), 30);
    let out = invgof(&[
        "test",
        data.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.lines().any(|l| l.starts_with("AD") && l.contains('*')),
        "{text}"
    );
}

#[test]
fn text_report_shows_json_values() {
    let dir = tempfile::tempdir().unwrap();
    let table = small_table(dir.path(), "30");
    let data = weibull_file(dir.path(), 30, 3);
    let base = [
        "test",
        data.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ];
    let text = String::from_utf8(invgof(&base).stdout).unwrap();
    let js = json(&invgof(&[&base[..], &["--out", "json"]].concat()));
    for result in js["results"].as_array().unwrap() {
        let name = result["kind"].as_str().unwrap();
        let value = result["value"].as_f64().unwrap();
        let row = text
            .lines()
            .find(|l| l.split_whitespace().next() == Some(name))
            .unwrap_or_else(|| panic!("no {name} row in\n{text}"));
        let shown: f64 = row.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert!((shown - value).abs() <= 5e-4, "{name}: {shown} vs {value}");
    }
}

#[test]
fn untabulated_size_needs_interpolation() {
    let dir = tempfile::tempdir().unwrap();
    let table = small_table(dir.path(), "20,40");
    let data = weibull_file(dir.path(), 30, 4);
    let args = [
        "test",
        data.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ];
    let out = invgof(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("30"));

    let out = invgof(&[&args[..], &["--interp-n"]].concat());
    assert!(matches!(out.status.code(), Some(0 | 1)));
    assert!(String::from_utf8_lossy(&out.stderr).contains("interpolat"));
}

#[test]
fn bad_input_reports_line_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "1.5\n2.0\nabc\n-3\n").unwrap();
    let out = invgof(&["fit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("line 4"), "{err}");

    let out = invgof(&["fit", dir.path().join("missing.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_file_round_trips_and_csv_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.cvt");
    let csv = dir.path().join("t.csv");
    let out = invgof(&[
        "table",
        "--n",
        "25",
        "--M",
        "1000",
        "--statistics",
        "AD,KS",
        "--out-path",
        path.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = CriticalValueTable::read(&path).unwrap();
    assert_eq!(table.to_text(), std::fs::read_to_string(&path).unwrap());
    assert_eq!(
        table.provenance().statistics,
        vec![StatisticKind::AD, StatisticKind::KS]
    );
    let csv = std::fs::read_to_string(&csv).unwrap();
    // Header plus 2 statistics x 3 alphas.
    assert_eq!(csv.lines().count(), 7);
}
