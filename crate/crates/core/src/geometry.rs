//! Computational geometry and the altitude/coverage-radius relation.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel;
use crate::error::{Error, Result};
use crate::math;
use crate::model::{Environment, Point, SystemConfig};

/// Containment slack used by the enclosing-circle construction (meters).
pub const CONTAINMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub const fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.contains_eps(p, 0.0)
    }

    pub fn contains_eps(&self, p: Point, eps: f64) -> bool {
        self.center.distance(p) <= self.radius + eps
    }

    pub fn area(&self) -> f64 {
        math::PI * self.radius * self.radius
    }

    fn diameter(a: Point, b: Point) -> Self {
        let center = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        Self::new(center, a.distance(b) / 2.0)
    }

    /// Smallest circle through (or, when collinear, spanning) three points.
    fn through_three(a: Point, b: Point, c: Point) -> Self {
        let (bx, by) = (b.x - a.x, b.y - a.y);
        let (cx, cy) = (c.x - a.x, c.y - a.y);
        let d = 2.0 * (bx * cy - by * cx);
        let scale = (bx * bx + by * by).max(cx * cx + cy * cy);
        if d.abs() <= 1e-12 * scale {
            // Collinear: the two farthest points form the diameter.
            let ab = Self::diameter(a, b);
            let ac = Self::diameter(a, c);
            let bc = Self::diameter(b, c);
            let mut best = ab;
            for cand in [ac, bc] {
                if cand.radius > best.radius {
                    best = cand;
                }
            }
            return best;
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        let center = Point::new(a.x + ux, a.y + uy);
        let radius = center
            .distance(a)
            .max(center.distance(b))
            .max(center.distance(c));
        Self::new(center, radius)
    }
}

/// Left-hand side of the optimal elevation-angle condition at `theta` (radians).
///
/// Its unique root in `(0, pi/2)` maximizes coverage for a path-loss budget.
pub fn elevation_residual(theta: f64, env: &Environment) -> f64 {
    let e = math::exp(-env.b * (theta.to_degrees() - env.a));
    let denom = env.a * e + 1.0;
    math::PI / (9.0 * math::ln(10.0)) * math::tan(theta)
        + env.a * env.b * (env.eta_los - env.eta_nlos) * e / (denom * denom)
}

/// Optimal elevation angle `theta*` (radians) of an environment, by bisection.
pub fn optimal_elevation_angle(env: &Environment) -> Result<f64> {
    let no_root = || Error::NoRoot {
        label: env.label.clone(),
        a: env.a,
        b: env.b,
        eta_los: env.eta_los,
        eta_nlos: env.eta_nlos,
    };
    let eps = 1e-9;
    let mut lo = eps;
    let mut hi = math::PI / 2.0 - eps;
    let f_lo = elevation_residual(lo, env);
    let f_hi = elevation_residual(hi, env);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(no_root());
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = elevation_residual(mid, env);
        if f == 0.0 {
            return Ok(mid);
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (elevation_residual(lo, env).abs(), elevation_residual(hi, env).abs());
    Ok(if flo <= fhi { lo } else { hi })
}

/// Result of mapping a coverage radius to a flying altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeFix {
    pub altitude_m: f64,
    /// The unconstrained altitude was outside `[h_min, h_max]`.
    pub clamped: bool,
    /// Edge path loss at this altitude and radius exceeds `L_allowable`.
    pub loss_exceeded: bool,
}

/// Altitude for coverage radius `r_m`, given a precomputed `theta*`.
pub fn altitude_for_radius_at(r_m: f64, theta: f64, config: &SystemConfig) -> AltitudeFix {
    let h = r_m * math::tan(theta);
    let clamped_h = h.max(config.h_min_m).min(config.h_max_m);
    let clamped = clamped_h != h;
    let loss = channel::atg_mean_path_loss_unchecked(
        clamped_h,
        r_m,
        &config.env,
        config.fc_hz,
        config.speed_of_light,
    );
    AltitudeFix {
        altitude_m: clamped_h,
        clamped,
        loss_exceeded: loss > config.l_allowable_db,
    }
}

/// Altitude `h = r tan(theta*)`, clamped into `[h_min, h_max]`.
pub fn altitude_for_radius(r_m: f64, env: &Environment, config: &SystemConfig) -> Result<AltitudeFix> {
    if !(r_m > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {r_m}")));
    }
    let theta = optimal_elevation_angle(env)?;
    let mut cfg = config.clone();
    cfg.env = env.clone();
    Ok(altitude_for_radius_at(r_m, theta, &cfg))
}

/// Coverage radius along `theta*` where the mean air-to-ground loss reaches
/// `L_allowable`. Loss grows as `20 log10(r)` along a fixed elevation angle,
/// so the inversion is closed-form.
pub fn loss_limited_radius(theta: f64, config: &SystemConfig) -> f64 {
    let env = &config.env;
    let p_los = channel::los_probability_at_angle(theta.to_degrees(), env);
    let excess = p_los * env.eta_los + (1.0 - p_los) * env.eta_nlos;
    let fspl_1m = 20.0 * math::log10(4.0 * math::PI * config.fc_hz / config.speed_of_light);
    let d = math::powf(10.0, (config.l_allowable_db - excess - fspl_1m) / 20.0);
    d * math::cos(theta)
}

/// `(r_min, r_max)` implied by the altitude bounds and the loss budget.
pub fn radius_bounds_at(theta: f64, config: &SystemConfig) -> (f64, f64) {
    let t = math::tan(theta);
    let r_min = config.h_min_m / t;
    let r_max = (config.h_max_m / t).min(loss_limited_radius(theta, config));
    (r_min, r_max)
}

pub fn radius_bounds(env: &Environment, config: &SystemConfig) -> Result<(f64, f64)> {
    let theta = optimal_elevation_angle(env)?;
    let mut cfg = config.clone();
    cfg.env = env.clone();
    Ok(radius_bounds_at(theta, &cfg))
}

/// Smallest circle enclosing `points`.
///
/// Randomized incremental construction (Welzl style) with expected linear
/// time; the visiting order is shuffled from `seed`, so the result is
/// reproducible. Every input point lies within [`CONTAINMENT_EPS`] of the
/// returned disk.
pub fn minimum_enclosing_circle(points: &[Point], seed: u64) -> Result<Circle> {
    if points.is_empty() {
        return Err(Error::domain("minimum enclosing circle of an empty point set"));
    }
    let mut pts: Vec<Point> = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pts.shuffle(&mut rng);

    let eps = CONTAINMENT_EPS * 0.5;
    let mut c = Circle::new(pts[0], 0.0);
    for i in 1..pts.len() {
        if c.contains_eps(pts[i], eps) {
            continue;
        }
        c = Circle::new(pts[i], 0.0);
        for j in 0..i {
            if c.contains_eps(pts[j], eps) {
                continue;
            }
            c = Circle::diameter(pts[i], pts[j]);
            for l in 0..j {
                if !c.contains_eps(pts[l], eps) {
                    c = Circle::through_three(pts[i], pts[j], pts[l]);
                }
            }
        }
    }
    Ok(c)
}

/// Area of the intersection of two disks.
pub fn circle_overlap_area(c1: &Circle, c2: &Circle) -> f64 {
    let (r1, r2) = (c1.radius, c2.radius);
    let d = c1.center.distance(c2.center);
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return math::PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * math::acos(a1) + r2 * r2 * math::acos(a2) - 0.5 * math::sqrt(k.max(0.0))
}
