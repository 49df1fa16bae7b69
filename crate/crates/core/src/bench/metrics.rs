use crate::channel::PathParams;
use crate::error::{Error, Result};
use crate::numkit::ComplexMatrix;

/// Value written in place of `-inf` dB.
pub const NEG_INF_DB: f64 = -999.0;

/// Largest problem solved by exhaustive assignment search.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// One row of experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub method: String,
    pub snr_db: f64,
    pub nmse_db: f64,
    /// Absent when nothing was detected or the method has no angles.
    pub doa_rmse_deg: Option<f64>,
    /// Absent for methods that do not estimate angles.
    pub p_detect: Option<f64>,
    pub mean_sse: f64,
    pub trials: usize,
    pub wall_ms: f64,
}

/// Per-trial error ratio `||H_hat - H||_F^2 / ||H||_F^2`.
pub fn nmse_ratio(h_hat: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    if h_hat.shape() != h.shape() {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: {:?} vs {:?}",
            h_hat.shape(),
            h.shape()
        )));
    }
    let denom = h.frobenius_norm_sq();
    if denom == 0.0 {
        return Err(Error::InvalidArgument("reference channel has zero norm".into()));
    }
    Ok((h_hat - h).frobenius_norm_sq() / denom)
}

/// `10 log10(ratio)`, with `-inf` mapped to the sentinel.
pub fn ratio_to_db(ratio: f64) -> f64 {
    if ratio <= 0.0 {
        NEG_INF_DB
    } else {
        10.0 * ratio.log10()
    }
}

/// Per-trial ratio; aggregate by averaging ratios then [`ratio_to_db`].
pub fn nmse_db(h_hat: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    nmse_ratio(h_hat, h)
}

/// One-to-one assignment between true paths and estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    /// `(true index, estimate index)`, sorted by true index.
    pub pairs: Vec<(usize, usize)>,
    pub cost: f64,
}

/// `|AoA error| + |AoD error|` in degrees.
pub fn angle_cost_deg(truth: &PathParams, est: &PathParams) -> f64 {
    ((truth.aoa - est.aoa).abs() + (truth.aod - est.aod).abs()).to_degrees()
}

/// Minimum total cost assignment. With unequal counts only `min(L, L_d)`
/// pairs are formed. Exhaustive up to [`EXHAUSTIVE_LIMIT`] paths, greedy
/// beyond.
pub fn match_paths(truth: &[PathParams], estimates: &[PathParams]) -> Pairing {
    let cost: Vec<Vec<f64>> = truth
        .iter()
        .map(|t| estimates.iter().map(|e| angle_cost_deg(t, e)).collect())
        .collect();
    if truth.len().max(estimates.len()) <= EXHAUSTIVE_LIMIT {
        exhaustive(&cost, truth.len(), estimates.len())
    } else {
        greedy(&cost, truth.len(), estimates.len())
    }
}

fn exhaustive(cost: &[Vec<f64>], n_true: usize, n_est: usize) -> Pairing {
    // Assign each true path either an unused estimate or nothing, keeping
    // exactly min(n_true, n_est) pairs.
    let target = n_true.min(n_est);
    let mut best = Pairing {
        pairs: Vec::new(),
        cost: f64::INFINITY,
    };
    let mut used = vec![false; n_est];
    let mut current = Vec::with_capacity(target);

    #[allow(clippy::too_many_arguments)]
    fn search(
        i: usize,
        acc: f64,
        cost: &[Vec<f64>],
        n_true: usize,
        target: usize,
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        best: &mut Pairing,
    ) {
        if current.len() + (n_true - i) < target || acc >= best.cost {
            return;
        }
        if i == n_true {
            best.cost = acc;
            best.pairs = current.clone();
            return;
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                current.push((i, j));
                search(i + 1, acc + cost[i][j], cost, n_true, target, used, current, best);
                current.pop();
                used[j] = false;
            }
        }
        search(i + 1, acc, cost, n_true, target, used, current, best);
    }

    search(0, 0.0, cost, n_true, target, &mut used, &mut current, &mut best);
    if target == 0 {
        best.cost = 0.0;
    }
    best
}

fn greedy(cost: &[Vec<f64>], n_true: usize, n_est: usize) -> Pairing {
    let mut cells: Vec<(f64, usize, usize)> = (0..n_true)
        .flat_map(|i| (0..n_est).map(move |j| (i, j)))
        .map(|(i, j)| (cost[i][j], i, j))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut ti = vec![false; n_true];
    let mut ej = vec![false; n_est];
    let mut pairs = Vec::new();
    let mut total = 0.0;
    for (c, i, j) in cells {
        if !ti[i] && !ej[j] {
            ti[i] = true;
            ej[j] = true;
            pairs.push((i, j));
            total += c;
        }
    }
    pairs.sort_unstable();
    Pairing { pairs, cost: total }
}

/// Absolute AoA and AoD errors (degrees) of every matched pair, two per pair.
pub fn angle_errors_deg(truth: &[PathParams], estimates: &[PathParams], pairing: &Pairing) -> Vec<f64> {
    pairing
        .pairs
        .iter()
        .flat_map(|&(i, j)| {
            [
                (truth[i].aoa - estimates[j].aoa).abs().to_degrees(),
                (truth[i].aod - estimates[j].aod).abs().to_degrees(),
            ]
        })
        .collect()
}

/// Pooled DoA statistics.
///
/// `errors_deg` are individual angle measurements; `measurements` is the
/// total number of angles that should have been detected (`2 L trials`).
/// Returns the RMSE over detected measurements (absent if none) and the
/// detection probability.
pub fn doa_metrics(errors_deg: &[f64], measurements: usize, threshold_deg: f64) -> Result<(Option<f64>, f64)> {
    if !(threshold_deg > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {threshold_deg}")));
    }
    if measurements == 0 || errors_deg.len() > measurements {
        return Err(Error::InvalidArgument(format!(
            "{} errors for {measurements} measurements",
            errors_deg.len()
        )));
    }
    let detected: Vec<f64> = errors_deg.iter().copied().filter(|e| e.abs() <= threshold_deg).collect();
    let p_detect = detected.len() as f64 / measurements as f64;
    if detected.is_empty() {
        return Ok((None, 0.0));
    }
    let mse = detected.iter().map(|e| e * e).sum::<f64>() / detected.len() as f64;
    Ok((Some(mse.sqrt()), p_detect))
}
