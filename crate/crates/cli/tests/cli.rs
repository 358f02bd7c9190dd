use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use infoextract_cli::plot::{lineplot_svg, scatter_pair_svg, Series};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infoextract"))
        .current_dir(dir)
        .env_remove("INFOEXTRACT_THREADS")
        .args(args)
        .output()
        .expect("spawn infoextract")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn synth_extract_reconstruct_pipeline_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "gaussian-copula", "--rho", "0.7", "--n", "2000", "--seed", "3", "-o", "d.csv"]);
    ok(d, &["extract", "-i", "d.csv", "--target", "x", "--given", "y", "-o", "out.csv", "--layers", "l.json"]);
    ok(d, &["reconstruct", "-i", "out.csv", "--layers", "l.json", "--denormalize", "-o", "back.csv"]);

    let (h0, raw) = read_csv(&d.join("d.csv"));
    let (h1, back) = read_csv(&d.join("back.csv"));
    assert_eq!(h0, h1);
    assert_eq!(raw.len(), back.len());
    // denormalized values go back through the stored quantile map, so compare
    // ranks rather than raw values
    let col = |t: &[Vec<f64>], j: usize| t.iter().map(|r| r[j]).collect::<Vec<_>>();
    let order = |v: Vec<f64>| {
        let mut i: Vec<usize> = (0..v.len()).collect();
        i.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        i
    };
    for j in 0..h0.len() {
        let (a, b) = (order(col(&raw, j)), order(col(&back, j)));
        let same = a.iter().zip(&b).filter(|(p, q)| p == q).count();
        assert!(same as f64 >= 0.9 * a.len() as f64, "column {j}: {same} ranks agree");
    }

    let layers = json(&d.join("l.json"));
    assert!(layers.get("layers").is_some());
    let config = json(&d.join("out.csv.config.json"));
    assert!(config.to_string().contains("\"target\":\"x\""));
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(run(dir.path(), &["--version"]).status.code(), Some(0));
    assert_eq!(run(dir.path(), &["extract", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(d, &["mi", "-i", "missing.csv", "--x", "a", "--y", "b"]).status.code(), Some(1));
    fs::write(d.join("bad.csv"), "a,b\n0.1,0.2\n0.3,oops\n").unwrap();
    let out = run(d, &["--json-errors", "mi", "-i", "bad.csv", "--x", "a", "--y", "b"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "ParseError");
    assert_eq!(err["line"], 3);
}

#[test]
fn json_usage_error_is_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--json-errors", "extract", "--target", "x"]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "UsageError");
}

#[test]
fn singular_regression_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("x,a,b\n");
    for i in 0..300u64 {
        let u = ((i * 7919) % 300) as f64 / 300.0 + 0.001;
        let x = ((i * 104_729) % 300) as f64 / 300.0 + 0.001;
        csv.push_str(&format!("{x},{u},{u}\n"));
    }
    fs::write(d.join("dup.csv"), csv).unwrap();
    let out = run(
        d,
        &[
            "--json-errors", "extract", "-i", "dup.csv", "--normalized", "--target", "x", "--given", "a,b",
            "--method", "moment-regression", "--ridge", "0", "-o", "o.csv", "--layers", "l.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "NumericalFailure");
    assert!(!d.join("o.csv").exists());
}

#[test]
fn existing_outputs_are_kept_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "independent", "--n", "200", "-o", "d.csv"]);
    let before = fs::read(d.join("d.csv")).unwrap();
    let out = run(d, &["synth", "--kind", "independent", "--n", "300", "--seed", "9", "-o", "d.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(fs::read(d.join("d.csv")).unwrap(), before);
    ok(d, &["--force", "synth", "--kind", "independent", "--n", "300", "--seed", "9", "-o", "d.csv"]);
    assert_ne!(fs::read(d.join("d.csv")).unwrap(), before);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "markov-chain", "--n", "2000", "--seed", "4", "-o", "c.csv"]);
    ok(d, &["--threads", "1", "decouple", "-i", "c.csv", "-o", "t1.csv", "--layers", "t1.json"]);
    ok(d, &["--threads", "4", "decouple", "-i", "c.csv", "-o", "t4.csv", "--layers", "t4.json"]);
    assert_eq!(fs::read(d.join("t1.csv")).unwrap(), fs::read(d.join("t4.csv")).unwrap());
    assert_eq!(fs::read(d.join("t1.json")).unwrap(), fs::read(d.join("t4.json")).unwrap());
}

#[test]
fn units_switch_between_bits_and_nats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "gaussian-copula", "--n", "2000", "--seed", "5", "-o", "d.csv"]);
    ok(d, &["mi", "-i", "d.csv", "--x", "x", "--y", "y", "-o", "bits.json"]);
    ok(d, &["--units", "nats", "mi", "-i", "d.csv", "--x", "x", "--y", "y", "-o", "nats.json"]);
    let value = |f: &str| {
        let v = json(&d.join(f));
        let obj = v.as_object().unwrap();
        let key = obj.keys().find(|k| ["mi", "I", "value"].contains(&k.as_str())).unwrap().clone();
        obj[&key].as_f64().unwrap()
    };
    let (b, n) = (value("bits.json"), value("nats.json"));
    assert!((b * std::f64::consts::LN_2 - n).abs() < 1e-12, "{b} bits vs {n} nats");
}

#[test]
fn single_series_line_plot_has_one_polyline() {
    let svg = lineplot_svg("t", vec![Series::new("s", vec![(0.0, 1.0), (1.0, 2.0)])]).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn empty_or_non_finite_series_are_rejected() {
    assert!(matches!(
        lineplot_svg("t", vec![Series::new("s", vec![])]),
        Err(infoextract::Error::InvalidInput(_))
    ));
    assert!(matches!(
        lineplot_svg("t", vec![Series::new("s", vec![(0.0, f64::NAN)])]),
        Err(infoextract::Error::InvalidInput(_))
    ));
    assert!(lineplot_svg("t", vec![]).is_err());
}

#[test]
fn scatter_pair_draws_two_panels() {
    let pts: Vec<(f64, f64)> = (0..5000).map(|i| (i as f64, (i % 7) as f64)).collect();
    let svg = scatter_pair_svg("x", "y", pts.clone(), pts).unwrap();
    assert_eq!(svg.matches("<rect x=").count() - svg.matches("width=\"10\"").count(), 2);
    assert_eq!(svg.matches("<circle").count(), 2 * infoextract_cli::plot::MAX_SCATTER_POINTS);
}

#[test]
fn reconstruct_matches_normalized_input_within_two_grid_steps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "gaussian-copula", "--rho", "0.7", "--n", "10000", "--seed", "1", "-o", "d.csv"]);
    ok(d, &["extract", "-i", "d.csv", "--target", "x", "--given", "y", "-o", "out.csv", "--layers", "l.json"]);
    ok(d, &["reconstruct", "-i", "out.csv", "--layers", "l.json", "-o", "back.csv"]);
    ok(d, &["normalize", "-i", "d.csv", "-o", "dn.csv"]);
    let (h0, norm) = read_csv(&d.join("dn.csv"));
    let (h1, back) = read_csv(&d.join("back.csv"));
    assert_eq!(h0, h1);
    let worst = norm
        .iter()
        .zip(&back)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max);
    assert!(worst <= 2.0 / 1024.0, "max error {worst}");
}

#[test]
fn dmi_on_markov_chain_drops_below_plain_mi() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "--kind", "markov-chain", "--n", "10000", "--seed", "2", "-o", "chain.csv"]);
    let out = ok(d, &["--units", "nats", "dmi", "-i", "chain.csv", "--x", "x", "--y", "y", "--z", "z"]);
    let rec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rec = if rec.is_array() { rec[0].clone() } else { rec };
    let (i, i_d) = (rec["I"].as_f64().unwrap(), rec["I_d"].as_f64().unwrap());
    assert!(i >= 0.1 && i_d <= 0.02 && i > i_d, "I = {i}, I_d = {i_d}");
    assert_eq!(rec["units"], "nats");
}
