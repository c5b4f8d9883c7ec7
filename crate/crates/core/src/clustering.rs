//! Balanced k-means on a Hungarian assignment core.
//!
//! Each iteration assigns the `n` points to `n` slots, slot `s` belonging to
//! cluster `s mod k`, so cluster sizes are fixed at `ceil(n/k)` or
//! `floor(n/k)`. The slot matrix has only `k` distinct columns, so the
//! assignment is solved as the equivalent capacitated transportation problem
//! (same optimum as [`hungarian_min_cost`] on the slot matrix) in
//! `O(n^2 k + n k^3)` instead of `O(n^3)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Point;

pub const DEFAULT_MAX_ITERS: usize = 100;

/// A minimum-cost perfect matching of rows to columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `columns[row]` is the column matched to `row`.
    pub columns: Vec<usize>,
    pub cost: f64,
}

/// Solve the square assignment problem on `cost` (rows x columns) in `O(n^3)`.
pub fn hungarian_min_cost(cost: &[Vec<f64>]) -> Result<Assignment> {
    let n = cost.len();
    let mut flat = Vec::with_capacity(n * n);
    for (row, r) in cost.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NonSquare { rows: n, row, cols: r.len() });
        }
        for (col, &c) in r.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
        flat.extend_from_slice(r);
    }
    let columns = solve_flat(n, &flat);
    let total = columns.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok(Assignment { columns, cost: total })
}

/// Shortest-augmenting-path Hungarian method with dual potentials over a
/// row-major `n x n` matrix. Entries must be finite. Ties resolve to the
/// lowest column index.
pub(crate) fn solve_flat(n: usize, a: &[f64]) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    // 1-based internally; index 0 is the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let row = &a[(i0 - 1) * n..i0 * n];
            let ui0 = u[i0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - ui0 - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut columns = vec![0usize; n];
    for j in 1..=n {
        if p[j] != 0 {
            columns[p[j] - 1] = j - 1;
        }
    }
    columns
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    /// Cluster index in `0..k` for each input point.
    pub labels: Vec<usize>,
    pub centroids: Vec<Point>,
    pub iterations: usize,
    /// Within-cluster squared-distance sum after each iteration.
    pub objective_history: Vec<f64>,
}

impl Clustering {
    pub fn objective(&self) -> f64 {
        self.objective_history.last().copied().unwrap_or(0.0)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }
}

/// Within-cluster squared distance of `labels` against `centroids`.
pub fn within_cluster_cost(points: &[Point], labels: &[usize], centroids: &[Point]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| p.distance_sq(centroids[l]))
        .sum()
}

fn centroids_of(points: &[Point], labels: &[usize], k: usize) -> Vec<Point> {
    let mut sum = vec![(0.0f64, 0.0f64, 0usize); k];
    for (p, &l) in points.iter().zip(labels) {
        sum[l].0 += p.x;
        sum[l].1 += p.y;
        sum[l].2 += 1;
    }
    sum.into_iter()
        .map(|(x, y, c)| Point::new(x / c as f64, y / c as f64))
        .collect()
}

/// k-means++ seeding drawn from `rng`.
fn seed_centroids(points: &[Point], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let n = points.len();
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = points.iter().map(|p| p.distance_sq(centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let c = points[next];
        centers.push(c);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(p.distance_sq(c));
        }
    }
    centers
}

/// Slot capacities: cluster `c` owns the slots `s < n` with `s mod k == c`.
pub fn slot_capacities(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|c| n / k + usize::from(c < n % k)).collect()
}

/// Optimal assignment of `n` points to `k` clusters with capacities `caps`
/// (summing to `n`), minimizing the sum of `cost[i * k + c]`.
///
/// Successive shortest paths: points are inserted in index order and each
/// insertion follows a cheapest chain of reassignments, found by
/// Bellman-Ford over the `k` cluster nodes, ending at a cluster with spare
/// capacity. Ties go to the lower point or cluster index.
pub fn balanced_assignment(cost: &[f64], n: usize, k: usize, caps: &[usize]) -> Result<Vec<usize>> {
    if cost.len() != n * k || caps.len() != k {
        return Err(Error::domain("cost matrix or capacity list has the wrong shape"));
    }
    if caps.iter().sum::<usize>() != n {
        return Err(Error::domain("capacities must sum to the number of points"));
    }
    if let Some(pos) = cost.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFinite { row: pos / k.max(1), col: pos % k.max(1) });
    }
    const NONE: usize = usize::MAX;
    let mut labels = vec![NONE; n];
    let mut load = vec![0usize; k];
    let mut w = vec![0.0f64; k * k];
    let mut arg = vec![NONE; k * k];
    let mut dist = vec![0.0f64; k];
    let mut pred = vec![NONE; k];
    for i in 0..n {
        // Cheapest single move between each ordered pair of clusters.
        w.iter_mut().for_each(|x| *x = f64::INFINITY);
        arg.iter_mut().for_each(|x| *x = NONE);
        for (p, &a) in labels[..i].iter().enumerate() {
            let row = &cost[p * k..(p + 1) * k];
            for b in 0..k {
                if b == a {
                    continue;
                }
                let d = row[b] - row[a];
                if d < w[a * k + b] {
                    w[a * k + b] = d;
                    arg[a * k + b] = p;
                }
            }
        }
        dist.copy_from_slice(&cost[i * k..(i + 1) * k]);
        pred.iter_mut().for_each(|x| *x = NONE);
        for _ in 0..k {
            let mut changed = false;
            for a in 0..k {
                if load[a] == 0 {
                    continue;
                }
                for b in 0..k {
                    let e = w[a * k + b];
                    if e.is_finite() {
                        let cand = dist[a] + e;
                        if cand < dist[b] - 1e-12 * (1.0 + dist[b].abs()) {
                            dist[b] = cand;
                            pred[b] = a;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut target = NONE;
        for c in 0..k {
            if load[c] < caps[c] && (target == NONE || dist[c] < dist[target]) {
                target = c;
            }
        }
        // Walk the chain back to the cluster that takes point i.
        let mut b = target;
        let mut hops = 0;
        while pred[b] != NONE {
            let a = pred[b];
            labels[arg[a * k + b]] = b;
            b = a;
            hops += 1;
            if hops > k {
                return Err(Error::domain("reassignment chain did not terminate"));
            }
        }
        labels[i] = b;
        load[target] += 1;
    }
    Ok(labels)
}

/// Local search on a stable labelling: move single points from a larger
/// cluster to a smaller one (which keeps sizes within one of each other) and
/// exchange pairs of points between clusters, while either lowers the
/// within-cluster squared distance with centroids following their members.
/// Returns whether anything changed.
fn swap_polish(points: &[Point], labels: &mut [usize], k: usize) -> bool {
    let mut sx = vec![0.0f64; k];
    let mut sy = vec![0.0f64; k];
    let mut m = vec![0usize; k];
    let mut scale = 0.0f64;
    for (p, &l) in points.iter().zip(labels.iter()) {
        sx[l] += p.x;
        sy[l] += p.y;
        m[l] += 1;
        scale = scale.max(p.x.abs()).max(p.y.abs());
    }
    let tol = 1e-9 * (scale * scale).max(1.0);
    // -|S|^2/m, the size-dependent part of one cluster's cost.
    let part = |sx: f64, sy: f64, m: usize| if m == 0 { 0.0 } else { -(sx * sx + sy * sy) / m as f64 };
    let mut any = false;
    loop {
        let mut improved = false;
        for i in 0..points.len() {
            let a = labels[i];
            let p = points[i];
            for b in 0..k {
                if b == a || m[b] + 1 != m[a] {
                    continue;
                }
                let delta = part(sx[a] - p.x, sy[a] - p.y, m[a] - 1) + part(sx[b] + p.x, sy[b] + p.y, m[b] + 1)
                    - part(sx[a], sy[a], m[a])
                    - part(sx[b], sy[b], m[b]);
                if delta < -tol {
                    sx[a] -= p.x;
                    sy[a] -= p.y;
                    m[a] -= 1;
                    sx[b] += p.x;
                    sy[b] += p.y;
                    m[b] += 1;
                    labels[i] = b;
                    improved = true;
                    break;
                }
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let (a, b) = (labels[i], labels[j]);
                if a == b {
                    continue;
                }
                let (dx, dy) = (points[j].x - points[i].x, points[j].y - points[i].y);
                let delta = part(sx[a] + dx, sy[a] + dy, m[a]) + part(sx[b] - dx, sy[b] - dy, m[b])
                    - part(sx[a], sy[a], m[a])
                    - part(sx[b], sy[b], m[b]);
                if delta < -tol {
                    sx[a] += dx;
                    sy[a] += dy;
                    sx[b] -= dx;
                    sy[b] -= dy;
                    labels.swap(i, j);
                    improved = true;
                }
            }
        }
        if !improved {
            return any;
        }
        any = true;
    }
}

/// One seeded run of [`balanced_kmeans`].
fn balanced_kmeans_once(points: &[Point], k: usize, rng: &mut ChaCha8Rng, max_iters: usize) -> Result<Clustering> {
    let n = points.len();
    let mut centroids = seed_centroids(points, k, rng);
    let mut caps = slot_capacities(n, k);
    let mut labels: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut cost = vec![0.0f64; n * k];
    let mut iterations = 0;
    loop {
        let mut converged = false;
        while iterations < max_iters.max(1) {
            iterations += 1;
            for (i, p) in points.iter().enumerate() {
                for (c, centroid) in centroids.iter().enumerate() {
                    cost[i * k + c] = p.distance_sq(*centroid);
                }
            }
            let next = balanced_assignment(&cost, n, k, &caps)?;
            converged = next == labels;
            labels = next;
            if converged {
                break;
            }
            centroids = centroids_of(points, &labels, k);
            history.push(within_cluster_cost(points, &labels, &centroids));
        }
        // A stable labelling can still be improved by exchanging members.
        if !converged || !swap_polish(points, &mut labels, k) {
            break;
        }
        // Moves may hand the larger sizes to other clusters.
        caps.iter_mut().for_each(|c| *c = 0);
        labels.iter().for_each(|&l| caps[l] += 1);
        centroids = centroids_of(points, &labels, k);
        history.push(within_cluster_cost(points, &labels, &centroids));
    }
    Ok(Clustering {
        k,
        labels,
        centroids,
        iterations,
        objective_history: history,
    })
}

/// Point-cluster pairs one start may cost before the start budget shrinks.
pub const RESTART_WORK: usize = 2048;
pub const MAX_RESTARTS: usize = 64;

/// Seeded starts for `n` points and `k` clusters: many on small inputs,
/// down to one when `n * k` exceeds [`RESTART_WORK`].
pub fn restarts_for(n: usize, k: usize) -> usize {
    (RESTART_WORK / (n * k).max(1)).clamp(1, MAX_RESTARTS)
}

/// Balanced k-means, deterministic in `(points, k, seed)`.
///
/// [`restarts_for`] starts are seeded k-means++ style from one stream and
/// the lowest final objective is kept (ties to the earliest). Within a start, assignment and centroid steps alternate
/// until labels repeat; a pairwise exchange pass then tries to escape the
/// local optimum and, if it moves anything, the alternation resumes. Each
/// start runs at most `max_iters` assignment steps.
pub fn balanced_kmeans(points: &[Point], k: usize, seed: u64, max_iters: usize) -> Result<Clustering> {
    let n = points.len();
    if n == 0 {
        return Err(Error::domain("balanced k-means on an empty point set"));
    }
    if k < 1 || k > n {
        return Err(Error::domain(format!("k must lie in 1..={n}, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = balanced_kmeans_once(points, k, &mut rng, max_iters)?;
    for _ in 1..restarts_for(n, k) {
        let run = balanced_kmeans_once(points, k, &mut rng, max_iters)?;
        if run.objective() < best.objective() {
            best = run;
        }
    }
    Ok(best)
}
