//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use droneplace_core::geometry::Circle;
use droneplace_core::model::{Area, Point, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(r: &mut ChaCha8Rng, n: usize, side: f64) -> Vec<Point> {
    (0..n).map(|_| Point::new(r.random_range(0.0..side), r.random_range(0.0..side))).collect()
}

/// Circumscribed circle of a non-degenerate triangle.
fn circumcircle(a: Point, b: Point, c: Point) -> Option<Circle> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if d.abs() < 1e-9 {
        return None;
    }
    let a2 = a.x * a.x + a.y * a.y;
    let b2 = b.x * b.x + b.y * b.y;
    let c2 = c.x * c.x + c.y * c.y;
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let center = Point::new(ux, uy);
    Some(Circle::new(center, center.distance(a)))
}

/// Smallest circle over every pair and triple candidate that encloses all
/// points: O(n^4).
pub fn brute_force_mec(points: &[Point]) -> Circle {
    if points.len() == 1 {
        return Circle::new(points[0], 0.0);
    }
    let encloses = |c: &Circle| points.iter().all(|p| c.center.distance(*p) <= c.radius * (1.0 + 1e-12) + 1e-9);
    let mut best: Option<Circle> = None;
    let mut consider = |c: Circle| {
        if best.is_none_or(|b| c.radius < b.radius) && encloses(&c) {
            best = Some(c);
        }
    };
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i], points[j]);
            consider(Circle::new(Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0), a.distance(b) / 2.0));
            for &p in &points[j + 1..] {
                if let Some(c) = circumcircle(a, b, p) {
                    consider(c);
                }
            }
        }
    }
    best.expect("some pair circle encloses everything")
}

/// Minimum total cost over all permutations (Heap's algorithm).
pub fn brute_force_assignment(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let total = |p: &[usize]| p.iter().enumerate().map(|(r, &c)| cost[r][c]).sum::<f64>();
    let mut best = total(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(total(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Squared-distance sum of a labelling against its own cluster means.
pub fn partition_cost(points: &[Point], labels: &[usize], k: usize) -> f64 {
    let mut sx = vec![0.0; k];
    let mut sy = vec![0.0; k];
    let mut cnt = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        sx[l] += p.x;
        sy[l] += p.y;
        cnt[l] += 1;
    }
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| {
            let c = Point::new(sx[l] / cnt[l] as f64, sy[l] / cnt[l] as f64);
            p.distance_sq(c)
        })
        .sum()
}

/// Best objective over every labelling whose cluster sizes differ by at most one.
pub fn brute_force_balanced(points: &[Point], k: usize) -> f64 {
    let n = points.len();
    let (lo, hi) = (n / k, n.div_ceil(k));
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut sizes = vec![0usize; k];
        for l in labels.iter_mut() {
            *l = c % k;
            sizes[*l] += 1;
            c /= k;
        }
        if sizes.iter().all(|&s| s >= lo && s <= hi) {
            best = best.min(partition_cost(points, &labels, k));
        }
    }
    best
}

/// Root of a monotone function on `[lo, hi]` by plain bisection.
pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rising = f(hi) > f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximizer of a unimodal function by golden-section search.
pub fn golden_max(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Lens area by uniform sampling of the first disk's bounding square.
pub fn monte_carlo_lens(c1: &Circle, c2: &Circle, samples: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let side = 2.0 * c1.radius;
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = Point::new(
            c1.center.x - c1.radius + r.random::<f64>() * side,
            c1.center.y - c1.radius + r.random::<f64>() * side,
        );
        if c1.center.distance(p) <= c1.radius && c2.center.distance(p) <= c2.radius {
            hits += 1;
        }
    }
    hits as f64 / samples as f64 * side * side
}

/// Hotspot-flavoured random scenario on a square area.
pub fn clustered_scenario(seed: u64, n: usize, side: f64, gbs: Point) -> Scenario {
    let mut r = rng(seed);
    let hubs: Vec<Point> = random_points(&mut r, 4, side);
    let area = Area::new(0.0, side, 0.0, side);
    let mut ues = Vec::with_capacity(n);
    while ues.len() < n {
        let p = if r.random::<f64>() < 0.7 {
            let h = hubs[r.random_range(0..hubs.len())];
            Point::new(h.x + r.random_range(-40.0..40.0), h.y + r.random_range(-40.0..40.0))
        } else {
            Point::new(r.random_range(0.0..side), r.random_range(0.0..side))
        };
        if area.contains(p) {
            ues.push(p);
        }
    }
    Scenario { area, gbs, ues }
}

use droneplace_core::geometry::optimal_elevation_angle;
use droneplace_core::model::{Association, DbsSite, Placement, SystemConfig, Tag};

/// Drones on the optimal elevation cone with random radii inside the
/// admissible range, and a random association over them.
pub fn random_placement(seed: u64, scenario: &Scenario, k: usize, cfg: &SystemConfig) -> Placement {
    let mut r = rng(seed);
    let theta = optimal_elevation_angle(&cfg.env).unwrap();
    let (r_min, r_max) = droneplace_core::geometry::radius_bounds_at(theta, cfg);
    let a = scenario.area;
    let dbs: Vec<DbsSite> = (0..k)
        .map(|j| {
            let radius = r.random_range(r_min..r_max.min(250.0));
            DbsSite {
                id: j + 1,
                x: r.random_range(a.x_min..a.x_max),
                y: r.random_range(a.y_min..a.y_max),
                altitude_m: radius * theta.tan(),
                radius_m: radius,
            }
        })
        .collect();
    let tags = scenario
        .ues
        .iter()
        .map(|&p| {
            let covering: Vec<usize> = (0..k).filter(|&j| dbs[j].covers(p)).collect();
            match r.random_range(0..4) {
                0 => Tag::Unserved,
                1 => Tag::Gbs,
                _ if !covering.is_empty() => Tag::Dbs(covering[r.random_range(0..covering.len())]),
                _ if k > 0 => Tag::Dbs(r.random_range(0..k)),
                _ => Tag::Gbs,
            }
        })
        .collect();
    let n = scenario.ues.len();
    Placement { dbs, association: Association(tags), sinr_db: vec![None; n] }
}

pub fn uniform_scenario(seed: u64, n: usize, side: f64) -> Scenario {
    let mut r = rng(seed);
    let ues = random_points(&mut r, n, side);
    let gbs = Point::new(r.random_range(0.0..side), r.random_range(0.0..side));
    Scenario { area: Area::new(0.0, side, 0.0, side), gbs, ues }
}
