use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::cluster::{self, Cluster};
use crate::error::{Error, Result};
use crate::pisot::PisotNumber;
use crate::spectrum::SpectrumCandidate;
use crate::transform::{self, FastMuHat, Scale};

/// Above this many samples the double-precision path is used.
pub const FAST_THRESHOLD: u64 = 10_000;

/// Size of the subsample checked against the precise path.
pub const VALIDATION_POINTS: usize = 1_000;

pub const DEFAULT_GAP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Match {
    Matched { cluster: usize, candidate: String, distance: f64 },
    Unmatched { cluster: usize, nearest: Option<String>, distance: Option<f64> },
}

impl Match {
    pub fn is_matched(&self) -> bool {
        matches!(self, Match::Matched { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub r: String,
    pub r_kind: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub n_min: u64,
    pub eta: f64,
    pub gap: f64,
    pub fast: bool,
    /// Largest fast-vs-precise deviation on the validation subsample.
    pub validation_deviation: Option<f64>,
    pub retained: usize,
    pub clusters: Vec<Cluster>,
    pub matches: Vec<Match>,
    pub max_gap: f64,
}

impl ClusterReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn all_matched(&self) -> bool {
        !self.matches.is_empty() && self.matches.iter().all(Match::is_matched)
    }
}

/// `|mu_hat(r n)|` for `n` in `ns`, through the fast path (validated on a
/// subsample against the precise one) or the precise path.
pub(crate) fn moduli(
    p: &PisotNumber,
    r: &Scale,
    ns: &[u64],
    fast: bool,
    max_deviation: f64,
) -> Result<(Vec<f64>, Option<f64>)> {
    let rv = r.to_float(p);
    if rv <= 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    if fast {
        let vals = transform::fast_moduli(p.theta(), rv.to_f64(), ns);
        let dev = transform::validate_fast(p.theta(), &rv, ns, VALIDATION_POINTS)?;
        if dev >= max_deviation {
            return Err(Error::RouteMismatch(format!(
                "fast path deviates by {dev:e} from the precise path (limit {max_deviation:e})"
            )));
        }
        return Ok((vals, Some(dev)));
    }
    let theta = p.theta();
    let wp = p.working_prec();
    let vals = ns
        .par_iter()
        .map(|&n| {
            let t = Float::with_val(wp, &rv * n);
            transform::mu_hat(theta, &t, 1e-20).map(|m| m.value.to_f64().abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((vals, None))
}

/// Clusters the values `|mu_hat(r n)| >= eta` over `n_min <= n <= N`.
pub fn sample_and_cluster(
    p: &PisotNumber,
    r: &Scale,
    n_max: u64,
    eta: f64,
    gap: f64,
    n_min: u64,
) -> Result<ClusterReport> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta must lie in (0, 1), got {eta}")));
    }
    if !(gap > 0.0) {
        return Err(Error::InvalidArgument(format!("gap must be positive, got {gap}")));
    }
    if n_min >= n_max {
        return Err(Error::InvalidArgument(format!("n_min = {n_min} must be below N = {n_max}")));
    }
    let ns: Vec<u64> = (n_min.max(1)..=n_max).collect();
    let fast = n_max > FAST_THRESHOLD;
    let (vals, dev) = moduli(p, r, &ns, fast, eta / 10.0)?;
    let retained: Vec<(u64, f64)> = ns
        .iter()
        .zip(&vals)
        .filter(|(_, &v)| v >= eta)
        .map(|(&n, &v)| (n, v))
        .collect();
    if retained.is_empty() {
        return Err(Error::EmptyRetention { eta });
    }
    let values: Vec<f64> = retained.iter().map(|s| s.1).collect();
    Ok(ClusterReport {
        seed: None,
        r: r.label(),
        r_kind: if r.is_real() { "real" } else { "field" }.into(),
        n: n_max,
        n_min,
        eta,
        gap,
        fast,
        validation_deviation: dev,
        retained: retained.len(),
        clusters: cluster::split_by_gaps(&retained, gap),
        matches: Vec::new(),
        max_gap: cluster::max_gap(&values),
    })
}

/// Pairs each cluster with the nearest predicted value, matched when the
/// distance is at most `tolerance`.
pub fn match_clusters(report: &mut ClusterReport, candidates: &[SpectrumCandidate], tolerance: f64) {
    let preds: Vec<(String, f64)> =
        candidates.iter().map(|c| (c.id.to_string(), c.predicted.to_f64())).collect();
    report.matches = report
        .clusters
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let best = preds
                .iter()
                .map(|(id, v)| (id, (c.center - v).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match best {
                Some((id, d)) if d <= tolerance => {
                    Match::Matched { cluster: i, candidate: id.clone(), distance: d }
                }
                Some((id, d)) => Match::Unmatched { cluster: i, nearest: Some(id.clone()), distance: Some(d) },
                None => Match::Unmatched { cluster: i, nearest: None, distance: None },
            }
        })
        .collect();
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub max_gap: f64,
}

fn estimate(values: &[f64]) -> IntervalEstimate {
    let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    IntervalEstimate {
        lower: if values.is_empty() { 0.0 } else { lower },
        upper: if values.is_empty() { 0.0 } else { upper },
        count: values.len(),
        max_gap: cluster::max_gap(values),
    }
}

/// Spread of `|mu_hat(r n)|` over `N/2 <= n <= N`, keeping values `>= eta`.
pub fn interval_fill_test(p: &PisotNumber, r: &Scale, n_max: u64, eta: f64) -> Result<IntervalEstimate> {
    let ns: Vec<u64> = ((n_max / 2).max(1)..=n_max).collect();
    let fast = n_max > FAST_THRESHOLD;
    let (vals, _) = moduli(p, r, &ns, fast, 1e-6)?;
    let kept: Vec<f64> = vals.into_iter().filter(|&v| v >= eta).collect();
    Ok(estimate(&kept))
}

/// `C = 2 pi theta / (theta - 1)`: `mu_theta` lives on
/// `[-theta/(theta-1), theta/(theta-1)]`, so `|d/dt mu_hat| <= C`.
pub fn derivative_bound(theta: f64) -> f64 {
    std::f64::consts::TAU * theta / (theta - 1.0)
}

/// Range of the signed values `mu_hat(t)` on a grid over `[T/2, T]`, plus the
/// exact zeros `t = theta^n / 4` that fall in the range.
pub fn estimate_j(theta: &Float, t_max: f64, grid_step: Option<f64>) -> Result<IntervalEstimate> {
    let th = theta.to_f64();
    if !(th > 1.0) || !(t_max > 0.0) {
        return Err(Error::InvalidArgument("need theta > 1 and T > 0".into()));
    }
    let step = grid_step.unwrap_or(1.0 / (4.0 * derivative_bound(th)));
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
    }
    let start = t_max / 2.0;
    let count = ((t_max - start) / step).floor() as u64 + 1;
    let ev = FastMuHat::new(theta);
    let mut values: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| ev.eval(start + i as f64 * step).0)
        .collect();
    let mut pow = th;
    while pow / 4.0 <= t_max {
        if pow / 4.0 >= start {
            values.push(0.0);
        }
        pow *= th;
    }
    Ok(estimate(&values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMax {
    pub k: u32,
    pub start: u64,
    pub end: u64,
    pub max: f64,
    pub argmax: u64,
}

/// `max |mu_hat(n)|` over each complete dyadic block `[2^k, 2^(k+1))` inside `[1, N]`.
pub fn decay_check(theta: &Float, n_max: u64) -> Result<Vec<BlockMax>> {
    if *theta <= 1 {
        return Err(Error::InvalidArgument("theta must exceed 1".into()));
    }
    let ev = FastMuHat::new(theta);
    let mut out = Vec::new();
    let mut k = 0u32;
    while k < 63 && (1u64 << (k + 1)) - 1 <= n_max {
        let start = 1u64 << k;
        let end = (1u64 << (k + 1)) - 1;
        let (argmax, max) = (start..=end)
            .into_par_iter()
            .map(|n| (n, ev.eval(n as f64).0.abs()))
            .reduce(|| (0, -1.0), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0 && b.0 != 0) { b } else { a });
        out.push(BlockMax { k, start, end, max, argmax });
        k += 1;
    }
    Ok(out)
}

/// Whether the last `count` block maxima decrease strictly.
pub fn strictly_decreasing_tail(blocks: &[BlockMax], count: usize) -> bool {
    if blocks.len() < count {
        return false;
    }
    blocks[blocks.len() - count..].windows(2).all(|w| w[1].max < w[0].max)
}
