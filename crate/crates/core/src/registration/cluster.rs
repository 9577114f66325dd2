use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;

use super::{PointCloud, RegistrationError};
use crate::geometry::Vec3;

/// Drop points whose mean distance to their `neighbors` nearest neighbours
/// exceeds `mean + std_ratio * std` of that statistic over the cloud
/// (sample standard deviation). Neighbours are exact, found by ring search
/// over a uniform grid.
pub fn remove_statistical_outliers(
    cloud: &PointCloud,
    neighbors: usize,
    std_ratio: f64,
) -> Result<PointCloud, RegistrationError> {
    cloud.check_finite()?;
    if neighbors == 0 {
        return Err(RegistrationError::InvalidParameter { name: "neighbors", value: 0.0 });
    }
    let n = cloud.len();
    if n <= neighbors {
        return Err(RegistrationError::InsufficientPoints { got: n, need: neighbors });
    }
    let pts = &cloud.points;
    let grid = Grid::new(pts, knn_cell_size(pts, neighbors));
    let mean_knn: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| grid.nearest_distances(pts, i, neighbors).iter().sum::<f64>() / neighbors as f64)
        .collect();
    let mean = mean_knn.iter().sum::<f64>() / n as f64;
    let var = mean_knn.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let limit = mean + std_ratio * var.sqrt();
    let kept = pts
        .iter()
        .zip(&mean_knn)
        .filter(|(_, m)| **m <= limit)
        .map(|(p, _)| *p)
        .collect();
    Ok(cloud.with_points(kept))
}

// Sized so a scanned surface puts roughly k points in a cell. Any positive
// size gives exact results; this only affects speed.
fn knn_cell_size(points: &[Vec3], k: usize) -> f64 {
    let (lo, hi) = points.iter().fold(
        (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    );
    let extent = (hi - lo).max();
    let size = extent * (k as f64 / points.len() as f64).sqrt();
    if size > 0.0 { size } else { 1.0 }
}

type Cell = (i64, i64, i64);

struct Grid {
    eps: f64,
    cells: HashMap<Cell, Vec<usize>>,
    lo: Cell,
    hi: Cell,
}

impl Grid {
    fn new(points: &[Vec3], eps: f64) -> Self {
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        let (mut lo, mut hi) = ((i64::MAX, i64::MAX, i64::MAX), (i64::MIN, i64::MIN, i64::MIN));
        for (i, p) in points.iter().enumerate() {
            let c = Self::cell(p, eps);
            lo = (lo.0.min(c.0), lo.1.min(c.1), lo.2.min(c.2));
            hi = (hi.0.max(c.0), hi.1.max(c.1), hi.2.max(c.2));
            cells.entry(c).or_default().push(i);
        }
        Grid { eps, cells, lo, hi }
    }

    fn cell(p: &Vec3, eps: f64) -> Cell {
        (
            (p.x / eps).floor() as i64,
            (p.y / eps).floor() as i64,
            (p.z / eps).floor() as i64,
        )
    }

    /// Indices within `eps` of `points[i]`, itself included.
    fn region(&self, points: &[Vec3], i: usize) -> Vec<usize> {
        let p = points[i];
        let (cx, cy, cz) = Self::cell(&p, self.eps);
        let eps2 = self.eps * self.eps;
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(members) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        out.extend(members.iter().copied().filter(|&j| (points[j] - p).norm_squared() <= eps2));
                    }
                }
            }
        }
        out
    }

    /// Distances from `points[i]` to its `k` nearest other points, ascending.
    /// Exact duplicates of `points[i]` count as neighbours at distance zero.
    fn nearest_distances(&self, points: &[Vec3], i: usize, k: usize) -> Vec<f64> {
        let p = points[i];
        let (cx, cy, cz) = Self::cell(&p, self.eps);
        let reach = [cx - self.lo.0, self.hi.0 - cx, cy - self.lo.1, self.hi.1 - cy, cz - self.lo.2, self.hi.2 - cz]
            .into_iter()
            .max()
            .unwrap_or(0);
        let mut best: Vec<f64> = Vec::new();
        for r in 0..=reach {
            for dx in -r..=r {
                for dy in -r..=r {
                    // only the shell at Chebyshev radius r
                    let full = dx.abs() == r || dy.abs() == r;
                    let step = if full || r == 0 { 1 } else { 2 * r as usize };
                    for dz in (-r..=r).step_by(step.max(1)) {
                        if let Some(members) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                            best.extend(members.iter().filter(|&&j| j != i).map(|&j| (points[j] - p).norm()));
                        }
                    }
                }
            }
            if best.len() > k {
                best.select_nth_unstable_by(k - 1, f64::total_cmp);
                best.truncate(k);
            }
            // unvisited cells are more than r cells away
            if best.len() == k && best.iter().all(|d| *d <= r as f64 * self.eps) {
                break;
            }
        }
        best.sort_by(f64::total_cmp);
        best
    }
}

/// Density-based clustering. A point with at least `min_points` points
/// (itself included) within `eps` is a core point; clusters grow from core
/// points in index order and border points join the first cluster that
/// reaches them. Noise is dropped. Clusters come back largest first, ties in
/// discovery order.
pub fn dbscan_cluster(cloud: &PointCloud, eps: f64, min_points: usize) -> Result<Vec<PointCloud>, RegistrationError> {
    cloud.check_finite()?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(RegistrationError::InvalidParameter { name: "eps", value: eps });
    }
    if min_points == 0 {
        return Err(RegistrationError::InvalidParameter { name: "min_points", value: 0.0 });
    }
    let labels = dbscan_labels(&cloud.points, eps, min_points);
    let count = labels.iter().flatten().max().map_or(0, |m| m + 1);
    if count == 0 {
        return Err(RegistrationError::NoCluster);
    }
    let mut clusters: Vec<Vec<Vec3>> = vec![Vec::new(); count];
    for (p, label) in cloud.points.iter().zip(&labels) {
        if let Some(c) = label {
            clusters[*c].push(*p);
        }
    }
    clusters.sort_by_key(|c| std::cmp::Reverse(c.len()));
    Ok(clusters.into_iter().map(|pts| cloud.with_points(pts)).collect())
}

fn enqueue(queue: &mut VecDeque<usize>, queued: &mut [bool], items: Vec<usize>) {
    for j in items {
        if !std::mem::replace(&mut queued[j], true) {
            queue.push_back(j);
        }
    }
}

/// Cluster label per point, `None` for noise.
pub(crate) fn dbscan_labels(points: &[Vec3], eps: f64, min_points: usize) -> Vec<Option<usize>> {
    let grid = Grid::new(points, eps);
    let n = points.len();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    // A point popped once is settled for good, so it never needs queueing again.
    let mut queued = vec![false; n];
    let mut next = 0;
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let seeds = grid.region(points, i);
        if seeds.len() < min_points {
            continue;
        }
        let cluster = next;
        next += 1;
        labels[i] = Some(cluster);
        let mut queue = VecDeque::new();
        enqueue(&mut queue, &mut queued, seeds);
        while let Some(j) = queue.pop_front() {
            if labels[j].is_none() {
                labels[j] = Some(cluster);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            let region = grid.region(points, j);
            if region.len() >= min_points {
                enqueue(&mut queue, &mut queued, region);
            }
        }
    }
    labels
}
