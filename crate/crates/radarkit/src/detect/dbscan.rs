//! Density-based clustering of detection points with noise labels.
//!
//! A point is a core point when at least `min_pts` points (itself included)
//! lie within `eps` of it. Clusters are the maximal sets reachable through
//! core points; non-core points inside some core point's neighborhood join
//! the first cluster that reaches them in scan order, everything else is
//! noise. Scanning in input order makes the border-point tie-break
//! deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GridPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    /// Neighborhood radius in meters.
    pub eps_m: f64,
    /// Minimum neighborhood size (self included) for a core point.
    pub min_pts: usize,
}

impl DbscanParams {
    /// The empirically chosen reference settings: eps 0.3 m, 40 points.
    pub fn reference_defaults() -> Self {
        DbscanParams {
            eps_m: 0.3,
            min_pts: 40,
        }
    }
}

/// Bucket grid of cell size eps: a point's neighbors can only live in its
/// own or the eight surrounding buckets. Buckets hold indices in ascending
/// order, so traversal is deterministic.
struct NeighborIndex<'a> {
    points: &'a [GridPoint],
    eps: f64,
    buckets: std::collections::HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> NeighborIndex<'a> {
    fn new(points: &'a [GridPoint], eps: f64) -> Self {
        let mut buckets: std::collections::HashMap<(i64, i64), Vec<usize>> =
            std::collections::HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets
                .entry(((p.x / eps).floor() as i64, (p.y / eps).floor() as i64))
                .or_default()
                .push(i);
        }
        NeighborIndex {
            points,
            eps,
            buckets,
        }
    }

    /// Collect the neighbors of point `i` (self included) into `out`,
    /// reusing its allocation.
    fn query_into(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        let p = self.points[i];
        let eps_sq = self.eps * self.eps;
        let (bx, by) = (
            (p.x / self.eps).floor() as i64,
            (p.y / self.eps).floor() as i64,
        );
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.buckets.get(&(bx + dx, by + dy)) {
                    out.extend(bucket.iter().copied().filter(|&j| {
                        let q = self.points[j];
                        (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) <= eps_sq
                    }));
                }
            }
        }
    }
}

/// Cluster label per input point; `None` marks noise.
pub fn dbscan(points: &[GridPoint], eps_m: f64, min_pts: usize) -> Result<Vec<Option<usize>>> {
    if !crate::geometry::positive(eps_m) {
        return Err(Error::domain(format!("eps must be positive, got {eps_m}")));
    }
    if min_pts < 1 {
        return Err(Error::domain("min_pts must be >= 1"));
    }

    let n = points.len();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut next_cluster = 0usize;

    let index = NeighborIndex::new(points, eps_m);
    let mut queue = std::collections::VecDeque::new();
    let mut nbrs = Vec::new();

    for i in 0..n {
        if seen[i] || labels[i].is_some() {
            continue;
        }
        seen[i] = true;
        index.query_into(i, &mut nbrs);
        if nbrs.len() < min_pts {
            continue; // noise unless a later cluster reaches it
        }
        let cluster = next_cluster;
        next_cluster += 1;
        labels[i] = Some(cluster);

        // Labeling at push time keeps every point in the queue at most once.
        for &v in &nbrs {
            if labels[v].is_none() {
                labels[v] = Some(cluster);
                queue.push_back(v);
            }
        }
        while let Some(q) = queue.pop_front() {
            seen[q] = true;
            index.query_into(q, &mut nbrs);
            if nbrs.len() >= min_pts {
                for &v in &nbrs {
                    if labels[v].is_none() {
                        labels[v] = Some(cluster);
                        queue.push_back(v);
                    }
                }
            }
        }
    }
    Ok(labels)
}

/// A cluster of detection points with its centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub members: Vec<GridPoint>,
    pub centroid: GridPoint,
}

/// Group labeled points into clusters, ordered by cluster id.
pub fn clusters_from_labels(points: &[GridPoint], labels: &[Option<usize>]) -> Vec<Cluster> {
    let n_clusters = labels.iter().flatten().copied().max().map_or(0, |m| m + 1);
    let mut groups: Vec<Vec<GridPoint>> = vec![Vec::new(); n_clusters];
    for (p, l) in points.iter().zip(labels.iter()) {
        if let Some(c) = l {
            groups[*c].push(*p);
        }
    }
    groups
        .into_iter()
        .filter(|members| !members.is_empty())
        .map(|members| {
            let n = members.len() as f64;
            let cx = members.iter().map(|p| p.x).sum::<f64>() / n;
            let cy = members.iter().map(|p| p.y).sum::<f64>() / n;
            Cluster {
                members,
                centroid: GridPoint::new(cx, cy),
            }
        })
        .collect()
}
