//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # three-path sweep, two refinement rounds
//! n_t = 16
//! n_r = 16
//! p_count = 16
//! q_count = 16
//! paths = 3
//! rounds = 2
//! snr_db = 0, 10, 20
//! trials = 200
//! methods = tsdce, ls
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Tsdce,
    Ls,
    DftPeak,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Tsdce => "tsdce",
            Method::Ls => "ls",
            Method::DftPeak => "dft_peak",
        }
    }

    /// Whether the method returns path parameters (and so has DoA metrics).
    pub fn is_parametric(self) -> bool {
        !matches!(self, Method::Ls)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tsdce" => Ok(Method::Tsdce),
            "ls" => Ok(Method::Ls),
            "dft_peak" => Ok(Method::DftPeak),
            other => Err(format!("unknown method `{other}` (expected tsdce, ls or dft_peak)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub p_count: usize,
    pub q_count: usize,
    /// True number of paths `L`.
    pub paths: usize,
    /// Paths the estimators look for; defaults to `paths`.
    pub l_desired: usize,
    /// Refinement rounds `K`.
    pub rounds: usize,
    pub snr_db_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub rho: f64,
    pub detection_threshold_deg: f64,
    pub angle_range: (f64, f64),
    pub n_dft: usize,
    /// Record wall-clock time per record. Off by default so that output is
    /// reproducible byte for byte.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_t: 16,
            n_r: 16,
            p_count: 16,
            q_count: 16,
            paths: 3,
            l_desired: 3,
            rounds: 2,
            snr_db_list: vec![0.0, 10.0, 20.0],
            trials: 1000,
            seed: 0,
            methods: vec![Method::Tsdce, Method::Ls],
            rho: 1.0,
            detection_threshold_deg: 1.0,
            angle_range: (0.0, PI),
            n_dft: crate::analysis::DEFAULT_N_DFT,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfiguration(m));
        if self.n_t < 2 || self.n_r < 2 {
            return bad(format!("arrays need at least 2 antennas, got n_t={}, n_r={}", self.n_t, self.n_r));
        }
        if self.p_count < self.n_t || self.q_count < self.n_r {
            return bad(format!(
                "codebook {}x{} smaller than the {}x{} array",
                self.q_count, self.p_count, self.n_r, self.n_t
            ));
        }
        if self.paths == 0 || self.l_desired == 0 {
            return bad("paths and l_desired must be at least 1".into());
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if self.snr_db_list.is_empty() {
            return bad("snr_db must list at least one value".into());
        }
        // the noise variance must stay a positive finite number
        if let Some(s) = self.snr_db_list.iter().find(|&&s| {
            let v = self.noise_variance(s);
            !(s.is_finite() && v > 0.0 && v.is_finite())
        }) {
            return bad(format!("snr_db value {s} gives a degenerate noise variance"));
        }
        if !(self.detection_threshold_deg > 0.0) {
            return bad(format!(
                "detection_threshold_deg must be positive, got {}",
                self.detection_threshold_deg
            ));
        }
        let (lo, hi) = self.angle_range;
        if !(0.0 <= lo && lo < hi && hi <= PI) {
            return bad(format!("angle_range must satisfy 0 <= lo < hi <= pi, got [{lo}, {hi}]"));
        }
        if !self.n_dft.is_power_of_two() || self.n_dft < self.p_count.max(self.q_count) {
            return bad(format!("n_dft must be a power of two >= max(P, Q), got {}", self.n_dft));
        }
        Ok(())
    }

    /// Noise variance for a given SNR in dB (`SNR = rho / sigma_n^2`).
    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        self.rho / 10f64.powf(snr_db / 10.0)
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::Config {
        line,
        message: format!("bad value for `{key}`: {e}"),
    })
}

fn parse_list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(line, key, s))
        .collect()
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config {
            line,
            message: format!("bad value for `{key}`: expected true or false"),
        }),
    }
}

/// Parse and validate a configuration. Missing keys take their defaults;
/// `l_desired` follows `paths` unless given explicitly.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut l_desired = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n_t" => cfg.n_t = parse_value(line, key, value)?,
            "n_r" => cfg.n_r = parse_value(line, key, value)?,
            "p_count" => cfg.p_count = parse_value(line, key, value)?,
            "q_count" => cfg.q_count = parse_value(line, key, value)?,
            "paths" => cfg.paths = parse_value(line, key, value)?,
            "l_desired" => l_desired = Some(parse_value(line, key, value)?),
            "rounds" => cfg.rounds = parse_value(line, key, value)?,
            "snr_db" => cfg.snr_db_list = parse_list(line, key, value)?,
            "trials" => cfg.trials = parse_value(line, key, value)?,
            "seed" => cfg.seed = parse_value(line, key, value)?,
            "methods" => cfg.methods = parse_list(line, key, value)?,
            "rho" => cfg.rho = parse_value(line, key, value)?,
            "detection_threshold_deg" => cfg.detection_threshold_deg = parse_value(line, key, value)?,
            "angle_range" => {
                let v: Vec<f64> = parse_list(line, key, value)?;
                if v.len() != 2 {
                    return Err(Error::Config {
                        line,
                        message: "angle_range takes two values: lo, hi (radians)".into(),
                    });
                }
                cfg.angle_range = (v[0], v[1]);
            }
            "n_dft" => cfg.n_dft = parse_value(line, key, value)?,
            "timing" => cfg.timing = parse_bool(line, key, value)?,
            other => {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key `{other}`"),
                })
            }
        }
    }
    cfg.l_desired = l_desired.unwrap_or(cfg.paths);
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
