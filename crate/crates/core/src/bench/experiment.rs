//! Monte Carlo sweep over SNRs and methods.
//!
//! Trial `t` draws its channel from substream 0 of `SeededRng::for_trial(seed,
//! t)` and its noise from substream 1, so every SNR, method and codebook size
//! sees the same channels, and the noise of a trial only changes in scale
//! across SNRs. CRLB perturbations use substream 2. Trials run in parallel;
//! results are collected in trial order and reduced sequentially, which makes
//! the output independent of the thread count.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Method};
use super::csv::write_matrix;
use super::metrics::{angle_errors_deg, doa_metrics, match_paths, nmse_ratio, ratio_to_db, MetricRecord};
use crate::analysis::{dft_peak_baseline, upper_bound_multi_path, upper_bound_single_path, CrlbBound};
use crate::channel::{build_channel, sample_paths, ChannelRealization, PathParams};
use crate::error::{Error, Result};
use crate::numkit::{ComplexMatrix, SeededRng};
use crate::observation::{
    build_codebook, snr_in_spatial_domain, spatial_ls_estimate, synthesize_observation, to_spatial, Codebook,
    Observation,
};
use crate::tsdce::{self, reconstruct_channel, TsdceConfig};

pub const CHANNEL_STREAM: u64 = 0;
pub const NOISE_STREAM: u64 = 1;
pub const CRLB_STREAM: u64 = 2;

/// Trial-failure fraction above which a run is rejected.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// Channel of trial `trial`; identical for every SNR and method.
pub fn trial_channel(cfg: &ExperimentConfig, trial: usize) -> Result<ChannelRealization> {
    let mut rng = SeededRng::for_trial(cfg.seed, trial as u64).substream(CHANNEL_STREAM);
    let paths = sample_paths(cfg.paths, &mut rng, cfg.angle_range)?;
    build_channel(paths, cfg.n_t, cfg.n_r)
}

pub fn trial_observation(
    cfg: &ExperimentConfig,
    cb: &Codebook,
    ch: &ChannelRealization,
    snr_db: f64,
    trial: usize,
) -> Result<Observation> {
    let mut rng = SeededRng::for_trial(cfg.seed, trial as u64).substream(NOISE_STREAM);
    synthesize_observation(ch, cb, cfg.rho, cfg.noise_variance(snr_db), &mut rng)
}

pub fn tsdce_config(cfg: &ExperimentConfig) -> Result<TsdceConfig> {
    TsdceConfig::new(cfg.l_desired, cfg.rounds, cfg.rho, cfg.n_t, cfg.n_r)
}

/// Outcome of one method on one trial.
#[derive(Debug, Clone)]
pub struct TrialScore {
    pub ratio: f64,
    pub sse: f64,
    /// Absolute AoA/AoD errors of matched paths, degrees.
    pub angle_errors: Vec<f64>,
    pub failed: bool,
}

/// Channel estimate and, for parametric methods, path estimates.
/// On failure the best available partial result is returned with `failed`.
fn estimate(
    method: Method,
    cfg: &ExperimentConfig,
    tcfg: &TsdceConfig,
    obs: &Observation,
) -> (ComplexMatrix, Option<Vec<PathParams>>, bool) {
    let (n_t, n_r) = (cfg.n_t, cfg.n_r);
    let zero = || ComplexMatrix::zeros(n_r, n_t);
    match method {
        Method::Tsdce => match tsdce::run(obs, tcfg) {
            Ok(est) => (reconstruct_channel(&est, n_t, n_r), Some(est), false),
            Err(Error::Estimation { partial, source }) => {
                log::warn!("tsdce trial failed: {source}");
                (reconstruct_channel(&partial, n_t, n_r), Some(partial), true)
            }
            Err(e) => {
                log::warn!("tsdce trial failed: {e}");
                (zero(), Some(Vec::new()), true)
            }
        },
        Method::Ls => match to_spatial(obs, n_t, n_r).and_then(|sp| spatial_ls_estimate(&sp, obs.rho)) {
            Ok(h) => (h, None, false),
            Err(e) => {
                log::warn!("ls trial failed: {e}");
                (zero(), None, true)
            }
        },
        Method::DftPeak => match dft_peak_baseline(obs, n_t, n_r, cfg.l_desired, cfg.n_dft) {
            Ok(est) => (reconstruct_channel(&est, n_t, n_r), Some(est), false),
            Err(e) => {
                log::warn!("dft_peak trial failed: {e}");
                (zero(), Some(Vec::new()), true)
            }
        },
    }
}

pub fn score_trial(
    method: Method,
    cfg: &ExperimentConfig,
    tcfg: &TsdceConfig,
    ch: &ChannelRealization,
    obs: &Observation,
) -> Result<TrialScore> {
    let (h_hat, paths, failed) = estimate(method, cfg, tcfg, obs);
    let ratio = nmse_ratio(&h_hat, &ch.h)?;
    let sse = (&h_hat - &ch.h).frobenius_norm_sq();
    let angle_errors = match paths {
        Some(est) => {
            let pairing = match_paths(&ch.paths, &est);
            angle_errors_deg(&ch.paths, &est, &pairing)
        }
        None => Vec::new(),
    };
    Ok(TrialScore {
        ratio,
        sse,
        angle_errors,
        failed,
    })
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfiguration(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Run the sweep on the global rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricRecord>> {
    run_experiment_with_threads(cfg, None)
}

/// Run the sweep, optionally on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<MetricRecord>> {
    cfg.validate()?;
    let cb = build_codebook(cfg.p_count, cfg.q_count, cfg.n_t, cfg.n_r)?;
    let tcfg = tsdce_config(cfg)?;
    let channels: Vec<ChannelRealization> = in_pool(threads, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| trial_channel(cfg, t))
            .collect::<Result<Vec<_>>>()
    })??;

    let mut records = Vec::with_capacity(cfg.snr_db_list.len() * cfg.methods.len());
    for &snr_db in &cfg.snr_db_list {
        let started = Instant::now();
        // scores[trial][method]
        let scores: Vec<Vec<TrialScore>> = in_pool(threads, || {
            channels
                .par_iter()
                .enumerate()
                .map(|(t, ch)| {
                    let obs = trial_observation(cfg, &cb, ch, snr_db, t)?;
                    cfg.methods
                        .iter()
                        .map(|&m| score_trial(m, cfg, &tcfg, ch, &obs))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })??;
        let elapsed_ms = started.elapsed().as_secs_f64() * 1e3 / cfg.methods.len() as f64;

        for (k, &method) in cfg.methods.iter().enumerate() {
            let column = scores.iter().map(|row| &row[k]);
            records.push(aggregate(cfg, method, snr_db, column, if cfg.timing { elapsed_ms } else { 0.0 })?);
        }
    }
    Ok(records)
}

fn aggregate<'a>(
    cfg: &ExperimentConfig,
    method: Method,
    snr_db: f64,
    scores: impl Iterator<Item = &'a TrialScore>,
    wall_ms: f64,
) -> Result<MetricRecord> {
    let mut ratio_sum = 0.0;
    let mut sse_sum = 0.0;
    let mut failed = 0;
    let mut errors = Vec::new();
    for s in scores {
        ratio_sum += s.ratio;
        sse_sum += s.sse;
        failed += usize::from(s.failed);
        errors.extend_from_slice(&s.angle_errors);
    }
    if failed as f64 > MAX_FAILURE_RATE * cfg.trials as f64 {
        return Err(Error::FailureRate {
            failed,
            trials: cfg.trials,
        });
    }
    if failed > 0 {
        log::warn!("{method} at {snr_db} dB: {failed} of {} trials failed", cfg.trials);
    }
    let n = cfg.trials as f64;
    let (doa_rmse_deg, p_detect) = if method.is_parametric() {
        let (rmse, p) = doa_metrics(&errors, 2 * cfg.paths * cfg.trials, cfg.detection_threshold_deg)?;
        (rmse, Some(p))
    } else {
        (None, None)
    };
    Ok(MetricRecord {
        method: method.name().to_string(),
        snr_db,
        nmse_db: ratio_to_db(ratio_sum / n),
        doa_rmse_deg,
        p_detect,
        mean_sse: sse_sum / n,
        trials: cfg.trials,
        wall_ms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Single-path SVD-stage upper bound.
    Lemma3,
    /// Multi-path upper bound from ordered Marchenko–Pastur eigenvalues.
    Lemma4,
    /// Monte Carlo CRLB reconstruction.
    Crlb,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Lemma3 => "lemma3",
            BoundKind::Lemma4 => "lemma4",
            BoundKind::Crlb => "crlb",
        }
    }
}

/// Bound curve over the configured SNRs, in the metric record layout.
///
/// `mean_sse` is the bound in squared-error units and `nmse_db` the same
/// value normalized by `E||H||_F^2 = n_t n_r`. Analytic bounds report
/// `trials = 0`. The CRLB averages over the same channels as [`run_experiment`]
/// and treats the residual as white Gaussian.
pub fn bound_curve(cfg: &ExperimentConfig, kind: BoundKind, threads: Option<usize>) -> Result<Vec<MetricRecord>> {
    cfg.validate()?;
    let (n_t, n_r) = (cfg.n_t, cfg.n_r);
    let qp = (cfg.p_count * cfg.q_count) as f64;
    let energy = (n_t * n_r) as f64;
    let channels: Vec<ChannelRealization> = if kind == BoundKind::Crlb {
        (0..cfg.trials).map(|t| trial_channel(cfg, t)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let mut out = Vec::with_capacity(cfg.snr_db_list.len());
    for &snr_db in &cfg.snr_db_list {
        let sigma_n_sq = cfg.noise_variance(snr_db);
        let sigma_z_sq = sigma_n_sq / qp;
        let (nmse_db, mean_sse, trials) = match kind {
            BoundKind::Lemma3 => {
                let snr_c = snr_in_spatial_domain(cfg.rho / sigma_n_sq, cfg.p_count, cfg.q_count, n_t, n_r);
                let sse = upper_bound_single_path(snr_c, n_t, n_r);
                (ratio_to_db(sse / energy), sse, 0)
            }
            BoundKind::Lemma4 => {
                let sse = upper_bound_multi_path(cfg.paths, cfg.rho, n_t, n_r, sigma_z_sq)?;
                (ratio_to_db(sse / energy), sse, 0)
            }
            BoundKind::Crlb => {
                let bound = CrlbBound::new(n_t, n_r, cfg.rho, sigma_z_sq)?;
                let samples: Vec<(f64, f64)> = in_pool(threads, || {
                    channels
                        .par_iter()
                        .enumerate()
                        .map(|(t, ch)| {
                            let mut rng = SeededRng::for_trial(cfg.seed, t as u64).substream(CRLB_STREAM);
                            let s = bound.sample(ch, &mut rng)?;
                            Ok((s.nmse_ratio, s.nmse_ratio * ch.h.frobenius_norm_sq()))
                        })
                        .collect::<Result<Vec<_>>>()
                })??;
                let n = samples.len() as f64;
                let ratio = samples.iter().map(|s| s.0).sum::<f64>() / n;
                let sse = samples.iter().map(|s| s.1).sum::<f64>() / n;
                (ratio_to_db(ratio), sse, cfg.trials)
            }
        };
        out.push(MetricRecord {
            method: kind.name().to_string(),
            snr_db,
            nmse_db,
            doa_rmse_deg: None,
            p_detect: None,
            mean_sse,
            trials,
            wall_ms: 0.0,
        });
    }
    Ok(out)
}

/// Summary of a single dumped realization.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub truth: Vec<PathParams>,
    pub estimates: Vec<PathParams>,
    pub nmse_ratio: f64,
}

fn write_paths(paths: &[(usize, usize, PathParams)], path: &Path) -> Result<()> {
    let mut text = String::from("round,path,gain_re,gain_im,aod,aoa,omega_aod,omega_aoa\n");
    for (round, l, p) in paths {
        let g = p.gain();
        text.push_str(&format!(
            "{round},{l},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            g.re, g.im, p.aod, p.aoa, p.omega_aod, p.omega_aoa
        ));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Run TSDCE on one trial and write its intermediate matrices to `dir`:
/// `h`, `y`, `d`, `d_bar`, `h_hat`, `residual_k{round}_l{path}` (matrices as
/// `m,n,re,im`), plus `truth.csv` and `estimates.csv` (one row per step).
pub fn dump_single(cfg: &ExperimentConfig, snr_db: f64, trial: usize, dir: &Path) -> Result<SingleRun> {
    cfg.validate()?;
    if !snr_db.is_finite() {
        return Err(Error::InvalidConfiguration(format!("snr must be finite, got {snr_db}")));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cb = build_codebook(cfg.p_count, cfg.q_count, cfg.n_t, cfg.n_r)?;
    let ch = trial_channel(cfg, trial)?;
    let obs = trial_observation(cfg, &cb, &ch, snr_db, trial)?;
    let sp = to_spatial(&obs, cfg.n_t, cfg.n_r)?;
    let (estimates, trace) = tsdce::run_traced(&obs, &tsdce_config(cfg)?)?;
    let h_hat = reconstruct_channel(&estimates, cfg.n_t, cfg.n_r);

    write_matrix(&ch.h, dir.join("h.csv"))?;
    write_matrix(&obs.y, dir.join("y.csv"))?;
    write_matrix(&sp.d, dir.join("d.csv"))?;
    write_matrix(&sp.d_bar, dir.join("d_bar.csv"))?;
    write_matrix(&h_hat, dir.join("h_hat.csv"))?;
    for step in &trace {
        write_matrix(&step.residual, dir.join(format!("residual_k{}_l{}.csv", step.round, step.path)))?;
    }
    let truth: Vec<_> = ch.paths.iter().enumerate().map(|(l, p)| (0, l, *p)).collect();
    write_paths(&truth, &dir.join("truth.csv"))?;
    let steps: Vec<_> = trace.iter().map(|s| (s.round, s.path, s.estimate)).collect();
    write_paths(&steps, &dir.join("estimates.csv"))?;

    Ok(SingleRun {
        truth: ch.paths.clone(),
        nmse_ratio: nmse_ratio(&h_hat, &ch.h)?,
        estimates,
    })
}
