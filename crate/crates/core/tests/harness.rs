use std::path::Path;
use std::process::Command;

use afrelay::beamformer::Scheme;
use afrelay::harness::{
    figure_preset, read_results, run_sweep, write_per_trial, write_results, Mode, RowMode, SchemeSpec, SweepSpec,
    SweepVariable, CSV_HEADER,
};
use afrelay::NetworkConfig;

fn small_spec() -> SweepSpec {
    let cfg = NetworkConfig::from_snr_db(4, 2, 10.0, 10.0, 0.1, 0.1).unwrap();
    let mut spec = SweepSpec::new(
        SweepVariable::K,
        vec![2.0, 4.0, 6.0],
        cfg,
        vec![SchemeSpec::MmseRzfOptimized, SchemeSpec::Fixed(Scheme::ZfZf), SchemeSpec::Fixed(Scheme::MfMf)],
    );
    spec.trials = 40;
    spec.mode = Mode::Both;
    spec.expectation_samples = 5000;
    spec
}

#[test]
fn golden_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_results(&[], &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "sweep_var,sweep_value,scheme,mode,M,N,K,pnr_db,qnr_db,e1_sq,e2_sq,alpha_mmse,alpha_rzf,trials,rate_mean_bits,rate_stderr_bits,degenerate_resamples,seed\n"
    );
    assert_eq!(CSV_HEADER.len(), 18);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_results(&run_sweep(&spec).unwrap(), &a).unwrap();
    write_results(&run_sweep(&spec).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

fn close(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

#[test]
fn written_rows_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let rows = run_sweep(&small_spec()).unwrap();
    write_results(&rows, &path).unwrap();
    let back = read_results(&path).unwrap();
    assert_eq!(back.len(), rows.len());
    for (r, p) in rows.iter().zip(&back) {
        assert_eq!(p.scheme, r.scheme.tag());
        assert_eq!(p.mode, r.mode.tag());
        assert_eq!((p.m, p.n, p.k, p.trials), (r.config.m, r.config.n, r.config.k, r.trials));
        assert_eq!(p.degenerate_resamples, r.degenerate_resamples);
        for (x, y) in [
            (p.sweep_value, r.sweep_value),
            (p.pnr_db, r.config.pnr_db()),
            (p.e1_sq, r.config.e1_sq),
            (p.e2_sq, r.config.e2_sq),
            (p.alpha_mmse, r.alpha_mmse),
            (p.alpha_rzf, r.alpha_rzf),
            (p.rate_mean_bits, r.rate_mean),
            (p.rate_stderr_bits, r.rate_stderr),
        ] {
            assert!(close(x, y), "{x} vs {y}");
        }
    }
}

#[test]
fn rows_are_sorted_and_skips_go_to_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let rows = run_sweep(&small_spec()).unwrap();
    let keys: Vec<_> = rows.iter().map(|r| (r.scheme.tag(), r.sweep_value)).collect();
    assert!(keys.windows(2).all(|w| w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 <= w[1].1)));

    write_results(&rows, &path).unwrap();
    let sidecar = dir.path().join("rows.csv.skipped.csv");
    let text = std::fs::read_to_string(sidecar).unwrap();
    let zf_asym = rows.iter().filter(|r| r.scheme == Scheme::ZfZf && r.mode == RowMode::Asymptotic).count();
    assert_eq!(text.lines().count(), 1 + zf_asym);
    assert!(text.lines().skip(1).all(|l| l.contains("ZF_ZF") && l.contains("Wishart")));
}

#[test]
fn per_trial_companion_lists_every_trial() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trials.csv");
    let rows = run_sweep(&small_spec()).unwrap();
    write_per_trial(&rows, &path).unwrap();
    let ergodic_rows = rows.iter().filter(|r| r.mode == RowMode::Ergodic).count();
    assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), 1 + 40 * ergodic_rows);
}

#[test]
fn io_errors_carry_the_path() {
    let err = write_results(&[], Path::new("/nonexistent/dir/out.csv")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
}

#[test]
fn feedback_sweep_rises_with_diminishing_increments() {
    let mut spec = figure_preset("fig7").unwrap();
    spec.schemes = vec![SchemeSpec::MmseRzfOptimized];
    spec.trials = 300;
    let rates: Vec<f64> = run_sweep(&spec).unwrap().iter().map(|r| r.rate_mean).collect();
    assert!(rates.windows(2).all(|w| w[1] > w[0]), "{rates:?}");
    let increments: Vec<f64> = rates.windows(2).map(|w| w[1] - w[0]).collect();
    // B = 16, 20, 24, 28, 32 are the last five grid points.
    assert!(increments[3..].windows(2).all(|w| w[1] < w[0]), "{increments:?}");
}

#[test]
fn cli_simulate_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        r#"
sweep_variable = "pnr_qnr"
values = [0, 10]
trials = 20
schemes = ["MMSE_RZF", "MF_RZF"]
expectation_samples = 2000

[network]
m = 4
k = 3
pnr_db = 10
qnr_db = 10
e1_sq = 0.1
e2_sq = 0.1
"#,
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_afrelay"))
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--threads", "2"])
        .output()
        .unwrap();
    assert!(status.status.success());
    let rows = read_results(&out).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.trials == 20 && r.sweep_var == "pnr_qnr"));
}

#[test]
fn cli_rejects_unknown_preset_and_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_afrelay"))
        .args(["simulate", "--preset", "fig9", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(!status.status.success());

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "sweep_variable = \"K\"\nvalues = [1]\nbogus = 1\n").unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_afrelay")).args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("bad.toml"));
}
