//! End-to-end tests of the `thermosqueeze` binary: exit codes, output
//! layout, configuration precedence and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_thermosqueeze"));
    c.env_remove("THERMOSQUEEZE_THREADS").env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

/// Value of `key` in key-value output.
fn kv(text: &str, key: &str) -> Option<String> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(String::from))
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn coeffs_defaults_reproduce_the_running_example() {
    let o = run(&["coeffs", "--z", "1", "--m", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with(&format!("# thermosqueeze {} coeffs\n", env!("CARGO_PKG_VERSION"))));
    assert!(text.contains("# units: frequencies in units of kappa, rates in units of gamma_c\n"));
    assert!(text.contains("# omega_a = 1.00000000e1\n"));
    assert!(text.contains("# n_a = 1.00000000e3\n"));
    assert!(text.contains("# qmax = 20\n"));
    let gn: f64 = kv(&text, "gammaN").unwrap().parse().unwrap();
    assert!((gn - 207.49).abs() < 0.01);
    assert_eq!(kv(&text, "squeezing_class").as_deref(), Some("classical"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["coeffs", "--m", "0"]).status.code(), Some(1));
    assert_eq!(run(&["coeffs", "--z", "abc"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    // 2z not an integer: no resonant squeezing pair
    let o = run(&["coeffs", "--z", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain error"));
    assert_eq!(run(&["coeffs", "--qmax", "5"]).status.code(), Some(2));
    assert_eq!(run(&["figures", "--which", "fig9"]).status.code(), Some(2));
    assert_eq!(run(&["rydberg", "--n", "1"]).status.code(), Some(2));
}

#[test]
fn unresolved_reservoir_table_is_a_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("narrow.csv");
    // a 0.02-wide line sampled every 0.1
    let mut s = String::from("omega,G0\n");
    for i in 0..401 {
        let w = -20.0 + i as f64 * 0.1;
        s += &format!("{w},{}\n", 1.0 / (1.0 + (w - 3.05f64).powi(2) / 1e-4));
    }
    fs::write(&path, s).unwrap();
    let o = run(&[
        "response",
        "--reservoir-file",
        path.to_str().unwrap(),
        "--n-a",
        "0",
        "--from",
        "3",
        "--to",
        "3.1",
        "--points",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn tabulated_reservoir_response_matches_the_cavity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cavity.csv");
    let mut s = String::from("# Lorentzian cavity, kappa = gamma_c = 1\nomega,G0\n");
    for i in 0..=24000 {
        let w = -60.0 + i as f64 * 5e-3;
        let x = 2.0 * (w - 10.0);
        s += &format!("{w:.6},{:.17e}\n", 1.0 / std::f64::consts::TAU / (1.0 + x * x));
    }
    fs::write(&path, s).unwrap();
    let table = run(&[
        "response", "--reservoir-file", path.to_str().unwrap(), "--n-a", "0", "--from", "8", "--to", "12", "--points",
        "9",
    ]);
    assert_eq!(table.status.code(), Some(0), "{}", String::from_utf8_lossy(&table.stderr));
    let closed = run(&["response", "--n-a", "0", "--from", "8", "--to", "12", "--points", "9"]);
    let rows = |o: &Output| -> Vec<Vec<f64>> {
        data_lines(&stdout(o))[1..]
            .iter()
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    for (a, b) in rows(&table).iter().zip(rows(&closed)) {
        assert_eq!(a[0], b[0]);
        assert!((a[1] - b[1]).abs() < 1e-6, "gamma_T at {}: {} vs {}", a[0], a[1], b[1]);
        assert!((a[2] - b[2]).abs() < 1e-5, "delta_T at {}: {} vs {}", a[0], a[2], b[2]);
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "format = \"keyvalue\"\n[model]\nz = 3\nm = \"2\"\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = stdout(&run(&["--config", c, "coeffs"]));
    assert!(from_file.contains("# z = 3.00000000e0\n"));
    let flag = stdout(&run(&["--config", c, "coeffs", "--z", "1"]));
    assert!(flag.contains("# z = 1.00000000e0\n"));
    assert_eq!(kv(&flag, "gammaN"), kv(&stdout(&run(&["coeffs"])), "gammaN"));

    fs::write(&cfg, "[model]\nzed = 3\n").unwrap();
    let o = run(&["--config", c, "coeffs"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(&["--config", "/nonexistent.toml", "coeffs"]).status.code(), Some(1));
}

#[test]
fn output_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str, args: &[&str]| {
        let p = dir.path().join(name);
        let mut a = vec!["--output", p.to_str().unwrap()];
        a.extend_from_slice(args);
        assert_eq!(run(&a).status.code(), Some(0));
        fs::read(&p).unwrap()
    };
    let scan = ["scan", "--var", "z", "--range", "0.5:3:0.5", "--threads", "3"];
    assert_eq!(read("a.csv", &scan), read("b.csv", &scan));
    let spec = ["spectrum", "--z", "3", "--points", "51"];
    assert_eq!(read("c.csv", &spec), read("d.csv", &spec));
}

#[test]
fn single_point_scan_equals_coeffs() {
    let scan = stdout(&run(&["scan", "--var", "z", "--values", "1"]));
    let coeffs = stdout(&run(&["--format", "csv", "coeffs", "--z", "1"]));
    assert_eq!(data_lines(&scan), data_lines(&coeffs));
    assert_eq!(data_lines(&scan).len(), 2);
}

#[test]
fn m_scan_finds_m2_optimal() {
    let o = run(&["scan", "--var", "m", "--values", "2,1,2/3,1/2,2/5", "--z", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines = data_lines(&text);
    let cols: Vec<&str> = lines[0].split(',').collect();
    let i = cols.iter().position(|c| *c == "gammaN_minus_gammaAbsM").unwrap();
    let diffs: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect();
    let best = diffs.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(best, 0, "{diffs:?}");
}

#[test]
fn scan_marks_bad_points_and_exits_2() {
    let o = run(&["scan", "--var", "z", "--values", "1,0.3,2"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(",ok"));
    assert!(lines[2].contains("domain_error"));
    assert!(lines[3].ends_with(",ok"));
}

#[test]
fn thread_count_from_environment() {
    let ok = bin()
        .args(["scan", "--var", "n_a", "--values", "0,1,10"])
        .env("THERMOSQUEEZE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = bin()
        .args(["scan", "--var", "n_a", "--values", "0"])
        .env("THERMOSQUEEZE_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn figures_are_written_with_headers() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figures", "--which", "fig1,fig2d", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for id in ["fig1", "fig2d"] {
        let text = fs::read_to_string(dir.path().join(format!("{id}.csv"))).unwrap();
        assert!(text.starts_with(&format!("# thermosqueeze {} figures {id}\n", env!("CARGO_PKG_VERSION"))));
        assert!(text.contains("# omega_a = 1.00000000e1\n# n_a = 1.00000000e3\n"));
    }
    // an unknown id among valid ones writes nothing
    let empty = dir.path().join("none");
    let o = run(&["figures", "--which", "fig1,figX", "--out-dir", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!Path::new(&empty).exists());
}

#[test]
fn rydberg_and_estimate_report_si_values() {
    let r = stdout(&run(&["rydberg"]));
    let radial: f64 = kv(&r, "radial_R_a0").unwrap().parse().unwrap();
    assert!((radial + 768.815).abs() < 1e-3);

    let e = stdout(&run(&["estimate"]));
    assert!(e.contains("# units: SI"));
    let g0: f64 = kv(&e, "gamma_0_per_s").unwrap().parse().unwrap();
    assert!((g0 / 1.1e-5 - 1.0).abs() < 0.15);
    assert!(kv(&e, "valid[kappa >> g]").unwrap().starts_with("pass"));

    let c = stdout(&run(&["estimate", "--mode", "circuit", "--format", "csv"]));
    let lines = data_lines(&c);
    assert!(lines[0].contains("gamma_c_per_s"));
    assert_eq!(lines.len(), 2);
}

#[test]
fn dynamics_and_spectra_tables() {
    let d = stdout(&run(&["dynamics", "--points", "11"]));
    let lines = data_lines(&d);
    assert_eq!(lines[0], "t,sx,sy,sz,excited_population,dipole_correlation");
    assert_eq!(lines.len(), 12);
    assert!(lines[1].starts_with("0.00000000e0,0.00000000e0,0.00000000e0,1.00000000e0,"));

    let s = stdout(&run(&["resfluor", "--phi", "pi", "--rabi", "5000", "--points", "5"]));
    assert!(s.contains("# gamma_phi = "));
    assert!(s.contains("# unmodulated_gamma_phi_rwa = 1.00050000e3\n"));
    assert_eq!(data_lines(&s).len(), 6);

    assert_eq!(run(&["--format", "keyvalue", "spectrum"]).status.code(), Some(1));
}
