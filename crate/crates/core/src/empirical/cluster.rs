//! Deterministic clustering: sorted-gap splitting on the line and grid
//! hashing in the plane.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Number of witnesses kept per cluster.
pub const WITNESSES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    /// Smallest sample indices in the cluster.
    pub witnesses: Vec<u64>,
}

/// Splits `(index, value)` samples at gaps larger than `gap` after sorting by
/// value. Clusters come out in increasing value order.
pub fn split_by_gaps(samples: &[(u64, f64)], gap: f64) -> Vec<Cluster> {
    let mut sorted: Vec<(u64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i].1 - sorted[i - 1].1 > gap {
            if i > start {
                out.push(summarize(&sorted[start..i]));
            }
            start = i;
        }
    }
    out
}

fn summarize(run: &[(u64, f64)]) -> Cluster {
    let sum: f64 = run.iter().map(|s| s.1).sum();
    let mut ids: Vec<u64> = run.iter().map(|s| s.0).collect();
    ids.sort_unstable();
    ids.truncate(WITNESSES);
    Cluster {
        center: sum / run.len() as f64,
        min: run[0].1,
        max: run[run.len() - 1].1,
        count: run.len(),
        witnesses: ids,
    }
}

/// Largest difference between consecutive sorted values, 0 for fewer than two.
pub fn max_gap(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneCluster {
    pub center: [f64; 2],
    pub radius: f64,
    pub count: usize,
    pub witnesses: Vec<u64>,
}

/// Groups points whose grid cells of side `gap` touch (8-neighbourhood).
/// Output is ordered by the smallest cell of each group.
pub fn grid_clusters(points: &[(u64, [f64; 2])], gap: f64) -> Vec<PlaneCluster> {
    let cell = |p: &[f64; 2]| ((p[0] / gap).floor() as i64, (p[1] / gap).floor() as i64);
    let mut cells: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, (_, p)) in points.iter().enumerate() {
        cells.entry(cell(p)).or_default().push(i);
    }
    let mut seen: BTreeSet<(i64, i64)> = BTreeSet::new();
    let mut out = Vec::new();
    for &start in cells.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut stack = vec![start];
        seen.insert(start);
        let mut members: Vec<usize> = Vec::new();
        while let Some(c) = stack.pop() {
            members.extend(&cells[&c]);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let nb = (c.0 + dx, c.1 + dy);
                    if cells.contains_key(&nb) && seen.insert(nb) {
                        stack.push(nb);
                    }
                }
            }
        }
        members.sort_unstable();
        let n = members.len() as f64;
        let cx = members.iter().map(|&i| points[i].1[0]).sum::<f64>() / n;
        let cy = members.iter().map(|&i| points[i].1[1]).sum::<f64>() / n;
        let mut ids: Vec<u64> = members.iter().map(|&i| points[i].0).collect();
        ids.sort_unstable();
        ids.truncate(WITNESSES);
        out.push(PlaneCluster {
            center: [cx, cy],
            radius: cx.hypot(cy),
            count: members.len(),
            witnesses: ids,
        });
    }
    out
}

/// Fraction of `bins` equal angular sectors hit by the given points.
pub fn angular_coverage(points: &[[f64; 2]], bins: usize) -> f64 {
    if bins == 0 {
        return 0.0;
    }
    let mut hit = vec![false; bins];
    for p in points {
        let a = p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU);
        let b = ((a / std::f64::consts::TAU) * bins as f64) as usize;
        hit[b.min(bins - 1)] = true;
    }
    hit.iter().filter(|&&h| h).count() as f64 / bins as f64
}
