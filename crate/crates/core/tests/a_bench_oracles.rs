//! Harness checks: path matching, CSV, aggregation and the command line.

mod common;

use std::f64::consts::PI;
use std::process::Command;

use num_complex::Complex64;

use common::{angle_cost, brute_force_assignment, mean_se};
use tsdce::bench::experiment::{score_trial, tsdce_config};
use tsdce::bench::{
    format_csv, match_paths, parse_csv, parse_config, read_csv, run_experiment, trial_channel, trial_observation,
    ExperimentConfig, Method, MetricRecord, NEG_INF_DB,
};
use tsdce::channel::PathParams;
use tsdce::numkit::SeededRng;
use tsdce::observation::build_codebook;
use tsdce::Error;

fn small_config(paths: usize, trials: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n_t: 8,
        n_r: 8,
        p_count: 8,
        q_count: 8,
        paths,
        l_desired: paths,
        rounds: 2,
        trials,
        seed,
        snr_db_list: vec![0.0, 10.0, 20.0],
        ..ExperimentConfig::default()
    }
}

fn random_paths(rng: &mut SeededRng, count: usize) -> Vec<PathParams> {
    (0..count)
        .map(|_| PathParams::from_angles(Complex64::new(1.0, 0.0), rng.uniform_range(0.0, PI), rng.uniform_range(0.0, PI)))
        .collect()
}

#[test]
fn matching_agrees_with_brute_force() {
    let mut rng = SeededRng::new(21);
    for _ in 0..300 {
        let n_true = 1 + (rng.next_u64() % 4) as usize;
        let n_est = 1 + (rng.next_u64() % 4) as usize;
        let truth = random_paths(&mut rng, n_true);
        let est = random_paths(&mut rng, n_est);
        let cost: Vec<Vec<f64>> = truth.iter().map(|t| est.iter().map(|e| angle_cost(t, e)).collect()).collect();
        let pairing = match_paths(&truth, &est);
        assert_eq!(pairing.pairs.len(), n_true.min(n_est));
        let recomputed: f64 = pairing.pairs.iter().map(|&(i, j)| cost[i][j]).sum();
        assert!((recomputed - pairing.cost).abs() < 1e-9);
        assert!((pairing.cost - brute_force_assignment(&cost)).abs() < 1e-9);
        let mut used: Vec<usize> = pairing.pairs.iter().map(|p| p.1).collect();
        used.sort_unstable();
        used.dedup();
        assert_eq!(used.len(), pairing.pairs.len());
    }
}

#[test]
fn csv_round_trip_within_six_digits() {
    let records = vec![
        MetricRecord {
            method: "tsdce".into(),
            snr_db: -5.0,
            nmse_db: -23.456789123,
            doa_rmse_deg: Some(0.012345678),
            p_detect: Some(0.875),
            mean_sse: 1.23456789e-7,
            trials: 1000,
            wall_ms: 12345.678,
        },
        MetricRecord {
            method: "ls".into(),
            snr_db: 20.0,
            nmse_db: NEG_INF_DB,
            doa_rmse_deg: None,
            p_detect: None,
            mean_sse: 0.0,
            trials: 7,
            wall_ms: 0.0,
        },
    ];
    let text = format_csv(&records);
    assert_eq!(text.lines().count(), 3);
    let back = parse_csv(&text).unwrap();
    assert_eq!(back.len(), records.len());
    let close = |a: f64, b: f64| (a - b).abs() <= 5e-6 * a.abs().max(b.abs()) || a == b;
    for (a, b) in records.iter().zip(&back) {
        assert_eq!(a.method, b.method);
        assert_eq!(a.trials, b.trials);
        assert!(close(a.snr_db, b.snr_db) && close(a.nmse_db, b.nmse_db));
        assert!(close(a.mean_sse, b.mean_sse) && close(a.wall_ms, b.wall_ms));
        assert_eq!(a.doa_rmse_deg.is_some(), b.doa_rmse_deg.is_some());
        assert_eq!(a.p_detect.is_some(), b.p_detect.is_some());
        if let (Some(x), Some(y)) = (a.doa_rmse_deg, b.doa_rmse_deg) {
            assert!(close(x, y));
        }
    }
    assert_eq!(format_csv(&back), text);
    assert_eq!(parse_csv(&format_csv(&[])).unwrap(), Vec::new());
}

#[test]
fn records_aggregate_the_per_trial_scores() {
    let cfg = ExperimentConfig {
        methods: vec![Method::Tsdce, Method::Ls],
        ..small_config(2, 60, 22)
    };
    let records = run_experiment(&cfg).unwrap();
    let cb = build_codebook(cfg.p_count, cfg.q_count, cfg.n_t, cfg.n_r).unwrap();
    let tcfg = tsdce_config(&cfg).unwrap();
    for rec in &records {
        let method: Method = rec.method.parse().unwrap();
        let (mut ratio, mut sse) = (0.0, 0.0);
        for t in 0..cfg.trials {
            let ch = trial_channel(&cfg, t).unwrap();
            let obs = trial_observation(&cfg, &cb, &ch, rec.snr_db, t).unwrap();
            let s = score_trial(method, &cfg, &tcfg, &ch, &obs).unwrap();
            ratio += s.ratio / cfg.trials as f64;
            sse += s.sse / cfg.trials as f64;
        }
        assert!((rec.nmse_db - 10.0 * ratio.log10()).abs() < 1e-9);
        assert!((rec.mean_sse - sse).abs() <= 1e-9 * sse);
        assert_eq!(rec.trials, cfg.trials);
    }
}

#[test]
fn ls_nmse_and_sse_are_consistent() {
    // LS error is independent of the channel, so E[ratio] = E[sse] E[1/||H||^2]
    // (the plain product with mean ||H||^2 would be off by Jensen's gap).
    let cfg = ExperimentConfig {
        methods: vec![Method::Ls],
        snr_db_list: vec![10.0],
        ..small_config(3, 3000, 23)
    };
    let rec = &run_experiment(&cfg).unwrap()[0];
    let inv_energy: Vec<f64> = (0..cfg.trials)
        .map(|t| 1.0 / trial_channel(&cfg, t).unwrap().h.frobenius_norm_sq())
        .collect();
    let (mean_inv, se_inv) = mean_se(&inv_energy);
    let predicted = rec.mean_sse * mean_inv;
    let ratio = 10f64.powf(rec.nmse_db / 10.0);
    let rel = (ratio - predicted).abs() / predicted;
    assert!(rel < 0.05 + 3.0 * se_inv / mean_inv, "ratio {ratio} vs {predicted}");
    // and the sse itself is the analytic noise propagation
    let expect = 64.0 * 64.0 * cfg.noise_variance(10.0) / (cfg.rho * 64.0);
    assert!((rec.mean_sse - expect).abs() / expect < 0.03, "{} vs {expect}", rec.mean_sse);
}

#[test]
fn detection_probability_grows_with_snr() {
    for method in [Method::Tsdce, Method::DftPeak] {
        let cfg = ExperimentConfig {
            methods: vec![method],
            n_dft: 64,
            snr_db_list: vec![-5.0, 5.0, 15.0, 25.0],
            ..small_config(2, 500, 24)
        };
        let recs = run_experiment(&cfg).unwrap();
        for w in recs.windows(2) {
            let (a, b) = (w[0].p_detect.unwrap(), w[1].p_detect.unwrap());
            assert!(b >= a - 0.02, "{method}: {a} then {b}");
        }
    }
}

#[test]
fn config_errors_carry_line_numbers() {
    match parse_config("n_t = 8\n# comment\nbogus = 1\n") {
        Err(Error::Config { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        parse_config("snr_db = -4000"),
        Err(Error::InvalidConfiguration(_))
    ));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tsdce"))
}

fn write_config(dir: &std::path::Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("cfg.txt");
    std::fs::write(&p, text).unwrap();
    p
}

const TINY: &str = "n_t = 4\nn_r = 4\np_count = 4\nq_count = 4\npaths = 1\ntrials = 20\nsnr_db = 0, 20\nn_dft = 16\n";

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");

    let bad = write_config(dir.path(), "paths = 2\nbogus = 3\n");
    let st = cli().args(["run", "--config"]).arg(&bad).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));

    let cfg = write_config(dir.path(), TINY);
    let st = cli()
        .env("TSDCE_THREADS", "0")
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(2));

    let missing = dir.path().join("absent.txt");
    let st = cli().args(["run", "--config"]).arg(&missing).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(1));

    let st = cli().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(st.success());
    let recs = read_csv(&out).unwrap();
    assert_eq!(recs.len(), 4);
}

#[test]
fn cli_bound_and_single() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    for kind in ["lemma3", "lemma4", "crlb"] {
        let out = dir.path().join(format!("{kind}.csv"));
        let st = cli()
            .args(["bound", "--kind", kind, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(st.success(), "{kind}");
        let recs = read_csv(&out).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs[1].nmse_db < recs[0].nmse_db);
    }
    let dump = dir.path().join("dump");
    let st = cli()
        .args(["single", "--snr-db", "-3", "--trial", "2", "--config"])
        .arg(&cfg)
        .arg("--dump")
        .arg(&dump)
        .status()
        .unwrap();
    assert!(st.success());
    for f in ["h.csv", "y.csv", "d.csv", "d_bar.csv", "h_hat.csv", "truth.csv", "estimates.csv"] {
        assert!(dump.join(f).is_file(), "{f}");
    }
}
