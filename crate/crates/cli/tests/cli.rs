use std::process::Command as Process;

use clap::Parser;
use pulsed_squeeze_cli::{run, Cli, Column, Dataset, RunConfig};

fn invoke(args: &[&str]) -> (i32, String) {
    let argv = std::iter::once("pulsed-squeeze").chain(args.iter().copied());
    let cli = Cli::try_parse_from(argv).expect("arguments parse");
    let mut out = Vec::new();
    let code = run(&cli, &mut out).unwrap_or_else(|e| e.exit_code());
    (code, String::from_utf8(out).unwrap())
}

fn dataset(args: &[&str]) -> Dataset {
    let argv = std::iter::once("pulsed-squeeze").chain(args.iter().copied());
    let cli = Cli::try_parse_from(argv).unwrap();
    let (kind, flags) = cli.command.split();
    pulsed_squeeze_cli::execute(kind, &RunConfig::from_flags(flags).unwrap())
        .unwrap()
        .dataset
}

fn numbers<'a>(d: &'a Dataset, name: &str) -> &'a [Option<f64>] {
    match d.column(name) {
        Some(Column::Number(v)) => v,
        other => panic!("{name}: {other:?}"),
    }
}

#[test]
fn photon_below_threshold_is_zero_with_note() {
    let d = dataset(&["photon", "--F0", "0.6", "--F1", "0.3", "--samples", "5"]);
    assert!(numbers(&d, "n").iter().all(|v| *v == Some(0.0)));
    assert_eq!(d.meta_value("info.regime"), Some("below"));
    assert!(d.meta_value("info.note").is_some());
}

#[test]
fn photon_stationary_reference_parameters() {
    let d = dataset(&["photon", "--F0", "2", "--epsilon", "1e-8", "--samples", "4"]);
    for v in numbers(&d, "n") {
        assert!((v.unwrap() / 1e8 - 1.0).abs() < 1e-6);
    }
}

#[test]
fn variance_trivial_levels() {
    for (f0, level) in [("0", 0.5), ("1", 0.25)] {
        let d = dataset(&[
            "variance",
            "--F0",
            f0,
            "--samples",
            "3",
            "--source-mode",
            "vacuum",
        ]);
        for v in numbers(&d, "V_vacuum_source") {
            assert!((v.unwrap() - level).abs() < 1e-9);
        }
    }
    let d = dataset(&["variance", "--F0", "0", "--samples", "3"]);
    assert_eq!(numbers(&d, "V"), numbers(&d, "V_vacuum_source"));
}

#[test]
fn variance_reports_grid_minimum() {
    let d = dataset(&[
        "variance",
        "--F0",
        "2",
        "--F1",
        "1.5",
        "--t-end",
        "3.2",
        "--samples",
        "65",
    ]);
    let v = numbers(&d, "V_vacuum_source");
    let min = v.iter().map(|x| x.unwrap()).fold(f64::INFINITY, f64::min);
    let reported: f64 = d
        .meta_value("info.V_vacuum_source_min")
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(reported, min);
    assert!(d.meta_value("info.V_min").is_some());
}

#[test]
fn round_trip_through_header_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["csv", "json"] {
        let first = dir.path().join(format!("first.{format}"));
        let second = dir.path().join(format!("second.{format}"));
        let f = first.to_str().unwrap();
        let s = second.to_str().unwrap();
        let args = [
            "photon",
            "--F0",
            "2",
            "--F1",
            "3",
            "--phi",
            "0.25",
            "--samples",
            "33",
            "--format",
            format,
            "--out",
            f,
        ];
        assert_eq!(invoke(&args).0, 0);
        assert_eq!(invoke(&["photon", "--config", f, "--out", s]).0, 0);
        assert_eq!(
            std::fs::read(&first).unwrap(),
            std::fs::read(&second).unwrap(),
            "{format}"
        );
    }
}

#[test]
fn physical_run_header_reproduces_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let args = [
        "variance",
        "--gamma",
        "0.5",
        "--gamma-l",
        "2",
        "--k",
        "1e-4",
        "--f0",
        "2e4",
        "--f1",
        "1e4",
        "--delta",
        "1",
        "--samples",
        "9",
        "--out",
        first.to_str().unwrap(),
    ];
    assert_eq!(invoke(&args).0, 0);
    let text = std::fs::read_to_string(&first).unwrap();
    assert!(text.contains("# info.gamma=5.0000000000000000e-1"));
    assert!(text.contains("# F0=2.00000000000000"));
    assert_eq!(
        invoke(&[
            "variance",
            "--config",
            first.to_str().unwrap(),
            "--out",
            second.to_str().unwrap()
        ])
        .0,
        0
    );
    let strip = |s: String| {
        s.lines()
            .filter(|l| !l.starts_with("# info.gamma") && !l.starts_with("# info.k"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(
        strip(text),
        strip(std::fs::read_to_string(&second).unwrap())
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "F0 = 0.5\nsamples = 3\n# comment line\n").unwrap();
    let p = path.to_str().unwrap();
    let d = dataset(&["photon", "--config", p]);
    assert_eq!(d.meta_value("info.regime"), Some("below"));
    let d = dataset(&["photon", "--config", p, "--F0", "3"]);
    assert_eq!(d.meta_value("info.regime"), Some("above"));
    assert_eq!(d.rows(), 3);
}

#[test]
fn check_and_minima_are_deterministic() {
    for args in [
        vec!["check", "--F0", "2", "--F1", "1.5"],
        vec![
            "minima",
            "--fbar-grid",
            "0.8,1.2",
            "--f1-levels",
            "0,1.5",
            "--oracle",
        ],
    ] {
        let (code_a, a) = invoke(&args);
        let (code_b, b) = invoke(&args);
        assert_eq!((code_a, code_b), (0, 0));
        assert_eq!(a, b);
    }
}

#[test]
fn minima_gap_at_threshold() {
    let d = dataset(&["minima", "--fbar-grid", "1", "--f1-levels", "0"]);
    assert_eq!(numbers(&d, "v_min"), &[None]);
    assert_eq!(
        d.column("status"),
        Some(&Column::Text(vec!["divergent".into()]))
    );
    // The vacuum column has no divergence.
    assert!((numbers(&d, "v_min_vacuum_source")[0].unwrap() - 0.25).abs() < 1e-9);
    assert!(d
        .to_csv()
        .lines()
        .last()
        .unwrap()
        .starts_with("1.0000000000000000e0,0.0000000000000000e0,,,divergent"));
}

#[test]
fn minima_oracle_agrees() {
    let d = dataset(&[
        "minima",
        "--fbar-grid",
        "0.7,1.3",
        "--f1-levels",
        "0.75,1.5",
        "--oracle",
    ]);
    let worst: f64 = d.meta_value("info.max_residual").unwrap().parse().unwrap();
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn check_reference_residuals() {
    for (f1, limit) in [("0", 1e-9), ("1.5", 1e-6), ("3", 1e-6)] {
        let (code, out) = invoke(&["check", "--F0", "2", "--F1", f1]);
        assert_eq!(code, 0, "{out}");
        let line = out
            .lines()
            .find(|l| l.starts_with("# info.max_residual="))
            .unwrap();
        let r: f64 = line.split('=').nth(1).unwrap().parse().unwrap();
        assert!(r < limit, "F1 = {f1}: {r:e}");
    }
}

#[test]
fn scan_delta_reports_fit() {
    assert_eq!(
        invoke(&[
            "scan-delta",
            "--F0",
            "1",
            "--F1",
            "1.5",
            "--delta-grid",
            "2"
        ])
        .0,
        4
    );
    let d = dataset(&[
        "scan-delta",
        "--F0",
        "1",
        "--F1",
        "1.5",
        "--delta-grid",
        "2,100,1000",
        "--source-mode",
        "vacuum",
    ]);
    assert_eq!(d.rows(), 3);
    assert!(d.meta_value("info.fast_modulation_C").is_some());
    let deepest: f64 = d.meta_value("info.deepest_Delta").unwrap().parse().unwrap();
    assert_eq!(deepest, 2.0);
}

#[test]
fn exit_codes() {
    assert_eq!(invoke(&["photon", "--F0", "1"]).0, 4);
    assert_eq!(
        invoke(&["variance", "--F0", "0.5", "--m0", "-3", "--samples", "2"]).0,
        6
    );
    assert_eq!(invoke(&["photon", "--samples", "1"]).0, 2);
    assert_eq!(
        invoke(&["photon", "--epsilon", "1e-8", "--gamma", "1"]).0,
        2
    );
    assert_eq!(
        invoke(&["check", "--F0", "2", "--F1", "3", "--rel-tol", "1e-3"]).0,
        8
    );
    assert_eq!(invoke(&["photon", "--config", "/nonexistent/cfg"]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("out.csv");
    assert_eq!(
        invoke(&["photon", "--samples", "2", "--out", bad.to_str().unwrap()]).0,
        9
    );
}

#[test]
fn binary_entry_point() {
    let bin = env!("CARGO_BIN_EXE_pulsed-squeeze");
    let out = Process::new(bin)
        .args(["variance", "--F0", "0", "--samples", "2", "--phi", "-1"])
        .env("PULSED_SQUEEZE_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("# phi=-1.0000000000000000e0"));

    let out = Process::new(bin)
        .args(["photon", "--F0", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("F0"));

    let out = Process::new(bin)
        .arg("photon")
        .env("PULSED_SQUEEZE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
