use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use latspec::{simulate, CoefficientKernel, FieldModel, InnovationSpec, LatticeShape, StreamKey};

const SUBCOMMANDS: [&str; 5] = ["simulate", "spectrum", "clt", "martingale-error", "lln"];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_latspec"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Set `UPDATE_GOLDEN=1` to rewrite the files after an intended change.
#[test]
fn help_matches_golden_files() {
    let mut cases = vec![("latspec.txt".to_string(), vec!["--help"])];
    for sub in SUBCOMMANDS {
        cases.push((format!("{sub}.txt"), vec![sub, "--help"]));
    }
    for (file, args) in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0));
        let path = golden_dir().join(&file);
        if std::env::var_os("UPDATE_GOLDEN").is_some() {
            fs::write(&path, &out.stdout).unwrap();
        }
        let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {file}"));
        assert_eq!(stdout(&out), expected, "{file}");
    }
}

#[test]
fn every_subcommand_documents_every_flag() {
    for sub in SUBCOMMANDS {
        let help = stdout(&run(&[sub, "--help"]));
        for flag in ["--config", "--out", "--seed", "--no-timestamp", "--replicates", "--negative-control"] {
            assert!(help.contains(flag), "{sub} --help lacks {flag}");
        }
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["clt"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--config", "x.toml", "--seed", "minus-one"]).status.code(), Some(2));
}

#[test]
fn missing_config_exits_3() {
    let out = run(&["simulate", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("/nonexistent/run.toml"));
}

#[test]
fn unwritable_output_exits_3() {
    let config = configs().join("simulate-iid.toml");
    let out = run(&["simulate", "--config", config.to_str().unwrap(), "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_key_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.toml", "[model]\nkind = \"iid\"\ncolour = \"red\"\n");
    let out = run(&["simulate", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("colour") && err.contains("line 3"), "{err}");
}

#[test]
fn simulate_iid_is_reproducible() {
    let config = configs().join("simulate-iid.toml");
    let a = run(&["simulate", "--config", config.to_str().unwrap()]);
    let b = run(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u1,u2,value");
    assert_eq!(lines.len(), 17);
    let c = run(&["simulate", "--config", config.to_str().unwrap(), "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn diagonal_volterra_entry_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "diag.toml",
        "[model]\nkind = \"volterra\"\npairs = [{ u = [1, 0], v = [1, 0], value = 1.0 }]\n\n[simulate]\nshape = [4, 4]\n",
    );
    let out = run(&["simulate", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("[1, 0],[1, 0]"), "{}", stderr(&out));
}

#[test]
fn simulate_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "lin.toml",
        "[model]\nkind = \"linear\"\ncoefficients = [{ lag = [0, 0], value = 1.0 }, { lag = [1, 0], value = 0.5 }]\n\n\
         [experiment]\nmaster_seed = 2\n\n[simulate]\nshape = [2, 2]\n",
    );
    let out = run(&["simulate", "--config", &config]);
    let model = FieldModel::linear(
        CoefficientKernel::new(2, vec![(vec![0, 0], 1.0), (vec![1, 0], 0.5)]).unwrap(),
        InnovationSpec::StandardNormal,
    );
    let sample = simulate(&model, &LatticeShape::cube(2, 2).unwrap(), StreamKey::innovations(2, 0)).unwrap();
    let values: Vec<f64> =
        stdout(&out).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values, sample.values);
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn spectrum_of_white_noise_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "iid.toml", "[model]\nkind = \"iid\"\n\n[spectrum]\ngrid = [4, 3]\nshape = [4, 4]\n");
    let out = run(&["spectrum", "--config", &config]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 12);
    let flat = 1.0 / (4.0 * std::f64::consts::PI.powi(2));
    for r in rows {
        for v in &r[2..] {
            assert!((v - flat).abs() < 1e-12, "{r:?}");
        }
    }
}

#[test]
fn spectrum_of_linear_field_agrees_with_partial_sum() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("spectrum.csv");
    let config = configs().join("spectrum-linear.toml");
    let out = run(&["spectrum", "--config", config.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(out_path).unwrap();
    assert!(text.starts_with("t1,t2,f_analytic,f_partial_sum,fejer_smoothed\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 32 * 32);
    for r in rows {
        assert!((r[2] - r[3]).abs() <= 1e-12);
    }
}

#[test]
fn volterra_json_config_runs_every_subcommand() {
    let config = configs().join("volterra-2d.json");
    let c = config.to_str().unwrap();
    let spectrum = run(&["spectrum", "--config", c]);
    assert_eq!(spectrum.status.code(), Some(0), "{}", stderr(&spectrum));
    for r in csv_rows(&stdout(&spectrum)) {
        assert!((r[2] - r[3]).abs() <= 1e-12);
    }
    let clt = run(&["clt", "--config", c, "--replicates", "400", "--no-timestamp"]);
    assert!(matches!(clt.status.code(), Some(0 | 1)), "{}", stderr(&clt));
    let mart = run(&["martingale-error", "--config", c, "--replicates", "200"]);
    assert_eq!(mart.status.code(), Some(0), "{}", stderr(&mart));
}

#[test]
fn clt_report_is_schema_stable() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "clt.toml",
        "[model]\nkind = \"iid\"\n\n[experiment]\nfrequencies = [[1.0, 1.1142135623730951]]\nshapes = [[16, 16]]\n\
         replicates = 400\nmaster_seed = 4\n\n[output]\ncsv = \"report.csv\"\n",
    );
    let report = dir.path().join("report.json");
    let out = bin()
        .current_dir(dir.path())
        .args(["clt", "--config", &config, "--out", report.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert!(json["generated_at_unix"].is_u64());
    for key in ["model", "master_seed", "replicates", "checks", "negative_control", "results", "pass"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    let again = bin()
        .current_dir(dir.path())
        .args(["clt", "--config", &config, "--no-timestamp"])
        .output()
        .unwrap();
    let json: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    assert!(json.get("generated_at_unix").is_none());
    let third = bin()
        .current_dir(dir.path())
        .args(["clt", "--config", &config, "--no-timestamp"])
        .output()
        .unwrap();
    assert_eq!(again.stdout, third.stdout);

    let control = bin()
        .current_dir(dir.path())
        .args(["clt", "--config", &config, "--no-timestamp", "--negative-control"])
        .output()
        .unwrap();
    assert_eq!(control.status.code(), Some(1));
}

#[test]
fn non_generic_frequency_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "clt.toml",
        "[model]\nkind = \"iid\"\n\n[experiment]\nfrequencies = [[0.0, 1.0]]\nshapes = [[8, 8]]\n",
    );
    let out = run(&["clt", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not generic"));
}

#[test]
fn martingale_error_of_white_noise_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "m.toml",
        "[model]\nkind = \"iid\"\n\n[experiment]\nfrequencies = [[1.0, 1.1142135623730951]]\n\
         shapes = [[4, 4], [8, 8]]\nreplicates = 50\n",
    );
    let out = run(&["martingale-error", "--config", &config]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("frequency,shape,estimate,standard_error\n"));
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2], "0");
    }
}

#[test]
fn martingale_error_for_gaussian_columns_is_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "m.toml",
        "[model]\nkind = \"gaussian-columns\"\nphi = 0.5\n\n[experiment]\nfrequencies = [[1.0, 1.1142135623730951]]\n\
         shapes = [[4, 4]]\nreplicates = 50\n",
    );
    let out = run(&["martingale-error", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unsupported"));
}

#[test]
fn martingale_error_ladder_decreases() {
    let config = configs().join("martingale-linear.toml");
    let out = run(&["martingale-error", "--config", config.to_str().unwrap(), "--replicates", "300"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 5);
}

#[test]
fn lln_ladder() {
    let config = configs().join("lln-linear.toml");
    let out = run(&["lln", "--config", config.to_str().unwrap(), "--replicates", "300"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("n1,n2,estimate,standard_error\n"));
    assert_eq!(text.lines().count(), 4);
}
