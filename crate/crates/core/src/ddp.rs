//! Data-driven placement: seed the GBS with its best UEs, cluster the rest
//! into balanced groups, fly one drone over each group's enclosing circle,
//! then alternate re-association and refinement until the layout settles.
//! The drone count grows from its lower bound until the satisfaction target
//! is met or the upper bound is exhausted.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::channel::{CellLoads, Radio};
use crate::clustering::{self, balanced_kmeans};
use crate::error::{Error, Result};
use crate::geometry::{self, CONTAINMENT_EPS};
use crate::math;
use crate::metrics::{self, FadingMode, RATE_TOLERANCE};
use crate::model::{db_to_linear, linear_to_db, Association, DbsSite, Placement, Point, Scenario, SystemConfig, Tag};

/// Largest coordinate change (meters) still counted as "not moving".
pub const MOVE_TOLERANCE_M: f64 = 1e-6;
pub const DEFAULT_INNER_ITER_CAP: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DdpMode {
    /// Clustering, enclosing-circle refinement and re-association.
    #[default]
    Full,
    /// Clustering only: one drone over each cluster centroid, no refinement
    /// or re-association. Requires a fixed `k`.
    BalancedKMeansOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdpOptions {
    /// Use exactly this many drones instead of searching.
    pub k_override: Option<usize>,
    pub mode: DdpMode,
    pub kmeans_max_iters: usize,
    pub inner_iter_cap: usize,
    /// Start from the GBS association; when false every UE begins unserved.
    pub gbs_participates: bool,
}

impl Default for DdpOptions {
    fn default() -> Self {
        Self {
            k_override: None,
            mode: DdpMode::Full,
            kmeans_max_iters: clustering::DEFAULT_MAX_ITERS,
            inner_iter_cap: DEFAULT_INNER_ITER_CAP,
            gbs_participates: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Infeasibility {
    /// The backhaul-derived upper bound lies below the demand lower bound.
    BoundsCrossed { k_min: usize, k_max: usize },
    /// Every admissible drone count missed the satisfaction target.
    TargetMissed { k_max: usize, best_satisfied: usize, required: usize },
    /// The regions together use more drones than the upper bound allows.
    FleetExceeded { k_total: usize, k_max: usize },
    /// A partition region failed; `index` is its position in the plan.
    Region { index: usize, cause: alloc::boxed::Box<Infeasibility> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdpOutcome {
    pub placement: Placement,
    /// Drone counts tried, in order.
    pub k_searched: Vec<usize>,
    pub feasible: bool,
    pub satisfied_count: usize,
    pub satisfaction_rate: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub infeasibility: Option<Infeasibility>,
    /// Refinement iterations spent at each tried `k`. For a partitioned
    /// run, one entry per region with that region's total.
    pub inner_iterations: Vec<usize>,
}

/// Number of UEs the satisfaction target requires.
pub fn required_satisfied(n: usize, tau: f64) -> usize {
    math::ceil(tau * n as f64 - 1e-9).max(0.0) as usize
}

/// Interference-free, full-band GBS SINR (linear) of each UE.
pub fn gbs_snr(scenario: &Scenario, config: &SystemConfig) -> Vec<f64> {
    let radio = Radio::new(config);
    let noise = config.b_hz * radio.noise_mw_per_hz;
    scenario
        .ues
        .iter()
        .map(|&ue| radio.gbs_received_mw(scenario.gbs, ue) / noise)
        .collect()
}

/// Tag the GBS with the UEs of highest interference-free SINR, as many as
/// both the SINR threshold and the GBS capacity allow (`C_G / c_min`).
/// Ties go to the lower UE index. Everyone else stays unserved.
pub fn initial_gbs_association(scenario: &Scenario, config: &SystemConfig) -> Association {
    let snr = gbs_snr(scenario, config);
    let mut qualifying: Vec<usize> = (0..snr.len())
        .filter(|&i| linear_to_db(snr[i]) >= config.gamma_th_db)
        .collect();
    let cap = if config.c_min_bps > 0.0 {
        math::floor(config.c_hat_gbs_bps / config.c_min_bps * (1.0 + RATE_TOLERANCE)) as usize
    } else {
        usize::MAX
    };
    qualifying.sort_by(|&a, &b| snr[b].total_cmp(&snr[a]).then(a.cmp(&b)));
    let mut assoc = Association::unserved(scenario.ues.len());
    for &i in qualifying.iter().take(cap) {
        assoc.set(i, Tag::Gbs);
    }
    assoc
}

/// Fewest drones able to carry `tau` of the unserved demand at threshold
/// spectral efficiency over the full band.
pub fn k_lower_bound(n_unserved: usize, config: &SystemConfig) -> usize {
    if config.tau <= 0.0 || n_unserved == 0 {
        return 0;
    }
    let per_drone = config.b_hz * math::log2(1.0 + db_to_linear(config.gamma_th_db));
    let x = config.tau * n_unserved as f64 * config.c_min_bps / per_drone;
    (math::ceil(x * (1.0 - 1e-12)) as usize).max(1)
}

/// Most drones the shared backhaul band can feed at threshold, capped by the
/// fleet size. With `ignore_backhaul_k_cap` only the fleet size applies.
pub fn k_upper_bound(config: &SystemConfig) -> usize {
    if config.ignore_backhaul_k_cap {
        return config.k_max_cap;
    }
    let bk = config.b_bk_hz * math::log2(1.0 + db_to_linear(config.gamma_th_bk_db));
    let cell = config.b_hz * math::log2(1.0 + db_to_linear(config.gamma_th_db));
    let ratio = math::floor(bk / cell * (1.0 + 1e-12)) as usize;
    ratio.min(config.k_max_cap)
}

/// Elevation angle and radius bounds shared by every refinement step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Shape {
    theta: f64,
    r_min: f64,
    r_max: f64,
}

impl Shape {
    pub(crate) fn new(config: &SystemConfig) -> Result<Self> {
        let theta = geometry::optimal_elevation_angle(&config.env)?;
        let (r_min, r_max) = geometry::radius_bounds_at(theta, config);
        Ok(Self { theta, r_min, r_max })
    }

    fn site(&self, id: usize, center: Point, radius: f64, config: &SystemConfig) -> DbsSite {
        let r = radius.max(self.r_min).min(self.r_max);
        let fix = geometry::altitude_for_radius_at(r, self.theta, config);
        DbsSite { id, x: center.x, y: center.y, altitude_m: fix.altitude_m, radius_m: r }
    }
}

fn members_points(members: &[usize], scenario: &Scenario) -> Vec<Point> {
    members.iter().map(|&i| scenario.ues[i]).collect()
}

/// One drone per cluster (UE index lists): centre and radius from the
/// minimum enclosing circle, radius clamped into the admissible range,
/// altitude from the optimal elevation angle.
pub fn refine_placement(clusters: &[Vec<usize>], scenario: &Scenario, config: &SystemConfig, seed: u64) -> Result<Vec<DbsSite>> {
    let shape = Shape::new(config)?;
    clusters
        .iter()
        .enumerate()
        .map(|(j, members)| {
            if members.is_empty() {
                return Err(Error::Invalid(format!("cluster {j} has no members")));
            }
            Ok(refine_one(j, members, scenario, config, &shape, seed))
        })
        .collect()
}

fn refine_one(j: usize, members: &[usize], scenario: &Scenario, config: &SystemConfig, shape: &Shape, seed: u64) -> DbsSite {
    let pts = members_points(members, scenario);
    let mec = geometry::minimum_enclosing_circle(&pts, seed.wrapping_add(j as u64))
        .expect("members are non-empty");
    // Pad by the containment slack so every member tests as covered.
    shape.site(j + 1, mec.center, mec.radius + 2.0 * CONTAINMENT_EPS, config)
}

/// Whether UE `i` currently fails its link (or has none).
fn failing(i: usize, config: &SystemConfig, report: &metrics::EvaluationReport) -> bool {
    let o = &report.per_ue[i];
    o.link.is_none() || !o.sinr_ok || o.rate_bps < config.c_min_bps * (1.0 - RATE_TOLERANCE)
}

/// Re-associate every failing or unserved UE to the nearest covering drone
/// that would serve it at threshold with at least `c_min` after the move.
/// Failing UEs with no such drone become unserved. Decisions use the loads
/// as they evolve during the sweep; the failing set is fixed at its start.
pub fn reassociate(placement: &Placement, scenario: &Scenario, config: &SystemConfig) -> (Association, bool) {
    let report = metrics::evaluate(placement, scenario, config, FadingMode::Mean);
    let radio = Radio::new(config);
    let k = placement.dbs.len();
    let mut assoc = placement.association.clone();
    let mut loads = CellLoads::of(placement);
    let caps = report.dbs_capacity_bps.clone();
    let c_min_floor = config.c_min_bps * (1.0 - RATE_TOLERANCE);
    let mut changed = false;
    let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(k);
    for i in 0..scenario.ues.len() {
        if !failing(i, config, &report) {
            continue;
        }
        let ue = scenario.ues[i];
        let home = assoc.get(i);
        candidates.clear();
        for (j, s) in placement.dbs.iter().enumerate() {
            if home != Tag::Dbs(j) && s.covers(ue) {
                candidates.push((s.center().distance(ue), j));
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut moved = false;
        for &(_, j) in &candidates {
            let mut trial = loads.n_j.clone();
            trial[j] += 1;
            if let Tag::Dbs(h) = home {
                trial[h] -= 1;
            }
            let link = radio.dbs_link(ue, j, &placement.dbs, &trial, scenario.gbs);
            let share = caps[j] / trial[j] as f64;
            if link.meets_threshold && link.rate_bps >= c_min_floor && share >= c_min_floor {
                match home {
                    Tag::Dbs(h) => loads.n_j[h] -= 1,
                    Tag::Gbs => loads.n_g -= 1,
                    Tag::Unserved => {}
                }
                loads.n_j[j] += 1;
                assoc.set(i, Tag::Dbs(j));
                changed = true;
                moved = true;
                break;
            }
        }
        if !moved && home != Tag::Unserved {
            match home {
                Tag::Dbs(h) => loads.n_j[h] -= 1,
                Tag::Gbs => loads.n_g -= 1,
                Tag::Unserved => {}
            }
            assoc.set(i, Tag::Unserved);
        }
    }
    (assoc, changed)
}

/// Fill the placement's per-UE SINR cache from its current association.
pub fn update_sinr_cache(placement: &mut Placement, scenario: &Scenario, config: &SystemConfig) {
    let links = metrics::serving_links(placement, scenario, config, FadingMode::Mean);
    placement.sinr_db = links.iter().map(|l| l.map(|l| l.sinr_db)).collect();
}

/// Drop every associated UE that misses the SINR threshold, leaves its
/// disk, or falls short of `c_min`, repeating until no tag changes. Returns
/// the final evaluation.
pub fn prune_failing(placement: &mut Placement, scenario: &Scenario, config: &SystemConfig) -> metrics::EvaluationReport {
    loop {
        let report = metrics::evaluate(placement, scenario, config, FadingMode::Mean);
        let mut dropped = false;
        for i in 0..scenario.ues.len() {
            if placement.association.get(i) != Tag::Unserved && failing(i, config, &report) {
                placement.association.set(i, Tag::Unserved);
                dropped = true;
            }
        }
        if !dropped {
            update_sinr_cache(placement, scenario, config);
            return report;
        }
    }
}

fn max_move(a: &[DbsSite], b: &[DbsSite]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            (p.x - q.x)
                .abs()
                .max((p.y - q.y).abs())
                .max((p.radius_m - q.radius_m).abs())
                .max((p.altitude_m - q.altitude_m).abs())
        })
        .fold(0.0, f64::max)
}

/// Result of a run at one fixed drone count.
#[derive(Debug, Clone)]
pub(crate) struct FixedK {
    pub placement: Placement,
    pub satisfied: usize,
    pub iterations: usize,
}

/// Place exactly `k` drones over the UEs left unserved by `base`.
pub(crate) fn place_fixed_k(
    scenario: &Scenario,
    config: &SystemConfig,
    base: &Association,
    k: usize,
    seed: u64,
    options: &DdpOptions,
    shape: &Shape,
) -> Result<FixedK> {
    let unserved: Vec<usize> = (0..scenario.ues.len()).filter(|&i| base.get(i) == Tag::Unserved).collect();
    if k == 0 || unserved.is_empty() {
        let mut placement = Placement { dbs: Vec::new(), association: base.clone(), sinr_db: Vec::new() };
        let report = if options.mode == DdpMode::Full {
            prune_failing(&mut placement, scenario, config)
        } else {
            update_sinr_cache(&mut placement, scenario, config);
            metrics::evaluate(&placement, scenario, config, FadingMode::Mean)
        };
        return Ok(FixedK { placement, satisfied: report.satisfied_count, iterations: 0 });
    }
    let k = k.min(unserved.len());
    let pts = members_points(&unserved, scenario);
    let clusters = balanced_kmeans(&pts, k, seed, options.kmeans_max_iters)?;
    let mut assoc = base.clone();
    for (pos, &i) in unserved.iter().enumerate() {
        assoc.set(i, Tag::Dbs(clusters.labels[pos]));
    }

    if options.mode == DdpMode::BalancedKMeansOnly {
        let members = assoc.members(k);
        let dbs: Vec<DbsSite> = (0..k)
            .map(|j| {
                let c = clusters.centroids[j];
                let far = members[j].iter().map(|&i| c.distance(scenario.ues[i])).fold(0.0, f64::max);
                shape.site(j + 1, c, far, config)
            })
            .collect();
        for (j, m) in members.iter().enumerate() {
            for &i in m {
                if !dbs[j].covers(scenario.ues[i]) {
                    assoc.set(i, Tag::Unserved);
                }
            }
        }
        let mut placement = Placement { dbs, association: assoc, sinr_db: Vec::new() };
        update_sinr_cache(&mut placement, scenario, config);
        let satisfied = metrics::evaluate(&placement, scenario, config, FadingMode::Mean).satisfied_count;
        return Ok(FixedK { placement, satisfied, iterations: 0 });
    }

    let mut sites: Vec<DbsSite> = Vec::new();
    let mut last: Option<(usize, Placement)> = None;
    // Best iterate so far; returned only when the cap cuts the loop short.
    let mut best: Option<(usize, Placement)> = None;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.inner_iter_cap.max(1) {
        iterations += 1;
        let members = assoc.members(k);
        let next: Vec<DbsSite> = (0..k)
            .map(|j| {
                if members[j].is_empty() {
                    sites[j]
                } else {
                    refine_one(j, &members[j], scenario, config, shape, seed)
                }
            })
            .collect();
        let moved = if sites.is_empty() { f64::INFINITY } else { max_move(&sites, &next) };
        sites = next;
        let mut placement = Placement { dbs: sites.clone(), association: assoc.clone(), sinr_db: Vec::new() };
        let (re, changed) = reassociate(&placement, scenario, config);
        placement.association = re.clone();
        assoc = re;
        let report = prune_failing(&mut placement, scenario, config);
        if best.as_ref().is_none_or(|(s, _)| report.satisfied_count > *s) {
            best = Some((report.satisfied_count, placement.clone()));
        }
        last = Some((report.satisfied_count, placement));
        if moved <= MOVE_TOLERANCE_M && !changed {
            converged = true;
            break;
        }
    }
    let (satisfied, placement) = if converged { last } else { best }.expect("at least one iteration runs");
    Ok(FixedK { placement, satisfied, iterations })
}

/// Full placement search on `scenario`.
pub fn run_ddp(scenario: &Scenario, config: &SystemConfig, seed: u64, options: &DdpOptions) -> Result<DdpOutcome> {
    if options.mode == DdpMode::BalancedKMeansOnly && options.k_override.is_none() {
        return Err(Error::Invalid("the balanced k-means baseline needs a predefined drone count".into()));
    }
    let base = if options.gbs_participates {
        initial_gbs_association(scenario, config)
    } else {
        Association::unserved(scenario.ues.len())
    };
    run_ddp_from(scenario, config, seed, options, base)
}

/// [`run_ddp`] starting from a given initial association instead of the GBS
/// seeding step. UEs tagged unserved in `base` are the ones to cluster;
/// `options.gbs_participates` is ignored.
pub fn run_ddp_from(scenario: &Scenario, config: &SystemConfig, seed: u64, options: &DdpOptions, base: Association) -> Result<DdpOutcome> {
    if options.mode == DdpMode::BalancedKMeansOnly && options.k_override.is_none() {
        return Err(Error::Invalid("the balanced k-means baseline needs a predefined drone count".into()));
    }
    if base.len() != scenario.ues.len() {
        return Err(Error::Invalid(format!(
            "initial association covers {} UEs, scenario has {}",
            base.len(),
            scenario.ues.len()
        )));
    }
    let n = scenario.ues.len();
    let shape = Shape::new(config)?;
    let n_unserved = base.iter().filter(|t| *t == Tag::Unserved).count();
    let k_min = k_lower_bound(n_unserved, config);
    let k_max = k_upper_bound(config);
    let required = required_satisfied(n, config.tau);

    let ks: Vec<usize> = match options.k_override {
        Some(k) => vec![k],
        None if k_max < k_min => {
            let mut placement = Placement { dbs: Vec::new(), association: base, sinr_db: Vec::new() };
            let report = prune_failing(&mut placement, scenario, config);
            return Ok(DdpOutcome {
                placement,
                k_searched: Vec::new(),
                feasible: false,
                satisfied_count: report.satisfied_count,
                satisfaction_rate: report.satisfaction_rate,
                k_min,
                k_max,
                infeasibility: Some(Infeasibility::BoundsCrossed { k_min, k_max }),
                inner_iterations: Vec::new(),
            });
        }
        None => (k_min..=k_max.min(k_min.max(n_unserved))).collect(),
    };

    let mut searched = Vec::new();
    let mut inner = Vec::new();
    let mut best: Option<FixedK> = None;
    let mut feasible = false;
    for &k in &ks {
        let run = place_fixed_k(scenario, config, &base, k, seed, options, &shape)?;
        searched.push(k);
        inner.push(run.iterations);
        let hit = run.satisfied >= required;
        if best.as_ref().is_none_or(|b| run.satisfied > b.satisfied) || hit {
            best = Some(run);
        }
        if hit {
            feasible = true;
            break;
        }
    }
    let best = best.expect("at least one drone count is tried");
    let infeasibility = (!feasible).then_some(Infeasibility::TargetMissed {
        k_max: *ks.last().unwrap_or(&k_max),
        best_satisfied: best.satisfied,
        required,
    });
    Ok(DdpOutcome {
        satisfied_count: best.satisfied,
        satisfaction_rate: if n > 0 { best.satisfied as f64 / n as f64 } else { 0.0 },
        placement: best.placement,
        k_searched: searched,
        feasible,
        k_min,
        k_max,
        infeasibility,
        inner_iterations: inner,
    })
}
