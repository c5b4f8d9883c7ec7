//! GBS-anchored pre-partitioning on top of [`crate::ddp`].
//!
//! Once the GBS has taken its UEs, the area is cut along the GBS
//! coordinates into 1, 2 or 4 sub-regions, which are solved independently
//! and then merged. After the merge, UEs that can hear drones from another
//! region (and the GBS cell, whose load is now global) get fresh SINR
//! values, and one global re-association pass cleans up stale tags.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::channel::{self, CellLoads, Radio};
use crate::ddp::{self, DdpMode, DdpOptions, DdpOutcome, Infeasibility};
use crate::error::{Error, Result};
use crate::model::{Area, Association, Placement, Point, Scenario, SystemConfig, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    None,
    /// Two halves split by the vertical line `x = x_G`.
    SplitX,
    /// Two halves split by the horizontal line `y = y_G`.
    SplitY,
    Quad,
}

impl PartitionKind {
    pub fn regions(self) -> usize {
        match self {
            PartitionKind::None => 1,
            PartitionKind::SplitX | PartitionKind::SplitY => 2,
            PartitionKind::Quad => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub kind: PartitionKind,
    /// Sub-areas, left before right and bottom before top.
    pub areas: Vec<Area>,
    pub line_x: Option<f64>,
    pub line_y: Option<f64>,
}

impl PartitionPlan {
    /// Region holding `p`. Points on a cut belong to the left/bottom side.
    pub fn region_of(&self, p: Point) -> usize {
        let right = self.line_x.is_some_and(|x| p.x > x);
        let top = self.line_y.is_some_and(|y| p.y > y);
        match self.kind {
            PartitionKind::None => 0,
            PartitionKind::SplitX => usize::from(right),
            PartitionKind::SplitY => usize::from(top),
            PartitionKind::Quad => usize::from(right) + 2 * usize::from(top),
        }
    }

    /// UE indices of each region, ascending.
    pub fn split(&self, ues: &[Point]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.areas.len()];
        for (i, &p) in ues.iter().enumerate() {
            out[self.region_of(p)].push(i);
        }
        out
    }
}

/// Decide how to cut `area` around a GBS with interference-free coverage
/// radius `r_g`.
///
/// - All four boundary distances exceed `r_g`: four quadrants.
/// - Both x-distances exceed `r_g` but a y-distance does not: cut at `x = x_G`.
/// - Both y-distances exceed `r_g` but an x-distance does not: cut at `y = y_G`.
/// - Otherwise no cut.
pub fn classify_partition(area: &Area, gbs: Point, r_g: f64) -> Result<PartitionPlan> {
    if !area.contains(gbs) {
        return Err(Error::domain(format!("GBS ({}, {}) lies outside the area", gbs.x, gbs.y)));
    }
    if !(r_g > 0.0) {
        return Err(Error::domain(format!("GBS coverage radius must be positive, got {r_g}")));
    }
    let x_far = gbs.x - area.x_min > r_g && area.x_max - gbs.x > r_g;
    let y_far = gbs.y - area.y_min > r_g && area.y_max - gbs.y > r_g;
    let left = Area::new(area.x_min, gbs.x, area.y_min, area.y_max);
    let right = Area::new(gbs.x, area.x_max, area.y_min, area.y_max);
    let bottom = Area::new(area.x_min, area.x_max, area.y_min, gbs.y);
    let top = Area::new(area.x_min, area.x_max, gbs.y, area.y_max);
    Ok(match (x_far, y_far) {
        (true, true) => PartitionPlan {
            kind: PartitionKind::Quad,
            areas: vec![
                Area::new(area.x_min, gbs.x, area.y_min, gbs.y),
                Area::new(gbs.x, area.x_max, area.y_min, gbs.y),
                Area::new(area.x_min, gbs.x, gbs.y, area.y_max),
                Area::new(gbs.x, area.x_max, gbs.y, area.y_max),
            ],
            line_x: Some(gbs.x),
            line_y: Some(gbs.y),
        },
        (true, false) => PartitionPlan {
            kind: PartitionKind::SplitX,
            areas: vec![left, right],
            line_x: Some(gbs.x),
            line_y: None,
        },
        (false, true) => PartitionPlan {
            kind: PartitionKind::SplitY,
            areas: vec![bottom, top],
            line_x: None,
            line_y: Some(gbs.y),
        },
        (false, false) => PartitionPlan {
            kind: PartitionKind::None,
            areas: vec![*area],
            line_x: None,
            line_y: None,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionProbabilities {
    pub p1: f64,
    pub p2: f64,
    pub p4: f64,
    /// Both side lengths exceed `2 r_g`.
    pub valid: bool,
}

/// Probability of each cut count for a GBS placed uniformly in `area`.
pub fn partition_probabilities(area: &Area, r_g: f64) -> PartitionProbabilities {
    let (w, h) = (area.width(), area.height());
    let wh = w * h;
    PartitionProbabilities {
        p1: 4.0 * r_g * r_g / wh,
        p2: 2.0 * r_g * (w + h - 4.0 * r_g) / wh,
        p4: (w - 2.0 * r_g) * (h - 2.0 * r_g) / wh,
        valid: w > 2.0 * r_g && h > 2.0 * r_g,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReduction {
    /// Expected fraction of cubic clustering work saved; 0 when invalid.
    pub value: f64,
    pub valid: bool,
}

/// Expected saving of the cubic clustering cost from pre-partitioning, for
/// a GBS placed uniformly in `area` (equal-size regions assumed).
pub fn expected_complexity_reduction(area: &Area, r_g: f64) -> ComplexityReduction {
    let (w, h) = (area.width(), area.height());
    if !(w > 2.0 * r_g && h > 2.0 * r_g) {
        return ComplexityReduction { value: 0.0, valid: false };
    }
    let value = 1.0 - (w + 14.0 * r_g) * (h + 14.0 * r_g) / (64.0 * w * h);
    ComplexityReduction { value, valid: true }
}

/// Runs independent region jobs. Implementations may run them concurrently
/// but must return results in job order.
pub trait RegionExecutor {
    fn run(&self, jobs: usize, job: &(dyn Fn(usize) -> Result<DdpOutcome> + Sync)) -> Vec<Result<DdpOutcome>>;
}

/// Runs region jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl RegionExecutor for Sequential {
    fn run(&self, jobs: usize, job: &(dyn Fn(usize) -> Result<DdpOutcome> + Sync)) -> Vec<Result<DdpOutcome>> {
        (0..jobs).map(job).collect()
    }
}

/// Split `k` drones over regions in proportion to their unserved counts
/// (largest remainder, ties to the lower index), giving every region with
/// unserved UEs at least one drone when `k` allows.
pub fn split_k(k: usize, unserved: &[usize]) -> Vec<usize> {
    let total: usize = unserved.iter().sum();
    let mut out = vec![0usize; unserved.len()];
    if total == 0 || k == 0 {
        return out;
    }
    let mut rem: Vec<(u128, usize)> = Vec::with_capacity(unserved.len());
    let mut given = 0;
    for (r, &u) in unserved.iter().enumerate() {
        let num = k as u128 * u as u128;
        out[r] = (num / total as u128) as usize;
        given += out[r];
        rem.push((num % total as u128, r));
    }
    rem.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, r) in rem.iter().take(k - given) {
        out[r] += 1;
    }
    // Move drones from the richest region into empty-handed non-empty ones.
    while let Some(starved) = (0..out.len()).find(|&r| unserved[r] > 0 && out[r] == 0) {
        let donor = (0..out.len())
            .filter(|&r| out[r] > 1)
            .max_by(|&a, &b| out[a].cmp(&out[b]).then(b.cmp(&a)));
        let Some(donor) = donor else { break };
        out[donor] -= 1;
        out[starved] += 1;
    }
    out
}

/// Drones whose disk reaches a cut line.
pub fn boundary_drones(plan: &PartitionPlan, placement: &Placement) -> Vec<usize> {
    placement
        .dbs
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            plan.line_x.is_some_and(|x| (s.x - x).abs() <= s.radius_m)
                || plan.line_y.is_some_and(|y| (s.y - y).abs() <= s.radius_m)
        })
        .map(|(j, _)| j)
        .collect()
}

/// Stitch per-region outcomes into one placement over `scenario`. Drones are
/// renumbered in region order. SINR values are carried over from the regions
/// and then recomputed for every UE covered by a drone that reaches a cut
/// line, and for every GBS-served UE (the GBS load is only known globally).
pub fn merge_regions(scenario: &Scenario, config: &SystemConfig, plan: &PartitionPlan, members: &[Vec<usize>], outcomes: &[DdpOutcome]) -> Placement {
    let n = scenario.ues.len();
    let mut merged = Placement { dbs: Vec::new(), association: Association::unserved(n), sinr_db: vec![None; n] };
    for (region, out) in members.iter().zip(outcomes) {
        let offset = merged.dbs.len();
        for site in &out.placement.dbs {
            let mut s = *site;
            s.id = merged.dbs.len() + 1;
            merged.dbs.push(s);
        }
        for (local, &global) in region.iter().enumerate() {
            let tag = match out.placement.association.get(local) {
                Tag::Dbs(j) => Tag::Dbs(offset + j),
                t => t,
            };
            merged.association.set(global, tag);
            merged.sinr_db[global] = out.placement.sinr_db.get(local).copied().flatten();
        }
    }
    let touched = boundary_drones(plan, &merged);
    let radio = Radio::new(config);
    let loads = CellLoads::of(&merged);
    for i in 0..n {
        let ue = scenario.ues[i];
        let tag = merged.association.get(i);
        let stale = tag == Tag::Gbs || touched.iter().any(|&j| merged.dbs[j].covers(ue));
        if stale {
            merged.sinr_db[i] = radio.serving_link(i, &merged, scenario, &loads).map(|l| l.sinr_db);
        }
    }
    merged
}

fn sub_scenario(scenario: &Scenario, area: Area, members: &[usize]) -> Scenario {
    Scenario { area, gbs: scenario.gbs, ues: members.iter().map(|&i| scenario.ues[i]).collect() }
}

/// Enhanced placement: partition around the GBS, solve regions through
/// `executor`, merge, then run one global re-association pass.
pub fn run_eddp_with(scenario: &Scenario, config: &SystemConfig, seed: u64, options: &DdpOptions, executor: &dyn RegionExecutor) -> Result<DdpOutcome> {
    if options.mode == DdpMode::BalancedKMeansOnly && options.k_override.is_none() {
        return Err(Error::Invalid("the balanced k-means baseline needs a predefined drone count".into()));
    }
    let r_g = channel::gbs_coverage_radius(config);
    let plan = classify_partition(&scenario.area, scenario.gbs, r_g)?;
    if plan.kind == PartitionKind::None {
        return ddp::run_ddp(scenario, config, seed, options);
    }
    let n = scenario.ues.len();
    let base = if options.gbs_participates {
        ddp::initial_gbs_association(scenario, config)
    } else {
        Association::unserved(n)
    };
    let members = plan.split(&scenario.ues);
    let unserved: Vec<usize> = members
        .iter()
        .map(|m| m.iter().filter(|&&i| base.get(i) == Tag::Unserved).count())
        .collect();
    let region_k: Option<Vec<usize>> = options.k_override.map(|k| split_k(k, &unserved));
    let k_max = ddp::k_upper_bound(config);

    let job = |r: usize| -> Result<DdpOutcome> {
        let sub = sub_scenario(scenario, plan.areas[r], &members[r]);
        let local = Association(members[r].iter().map(|&i| base.get(i)).collect());
        let mut opts = options.clone();
        if unserved[r] == 0 {
            opts.k_override = Some(0);
            opts.mode = DdpMode::Full;
        } else if let Some(ks) = &region_k {
            opts.k_override = Some(ks[r]);
        }
        ddp::run_ddp_from(&sub, config, seed ^ r as u64, &opts, local)
    };
    let results = executor.run(members.len(), &job);
    let mut outcomes = Vec::with_capacity(results.len());
    for r in results {
        outcomes.push(r?);
    }

    let mut placement = merge_regions(scenario, config, &plan, &members, &outcomes);
    if options.mode == DdpMode::Full {
        let (assoc, _) = ddp::reassociate(&placement, scenario, config);
        placement.association = assoc;
    }
    let report = if options.mode == DdpMode::Full {
        ddp::prune_failing(&mut placement, scenario, config)
    } else {
        ddp::update_sinr_cache(&mut placement, scenario, config);
        crate::metrics::evaluate(&placement, scenario, config, crate::metrics::FadingMode::Mean)
    };

    let k_total = placement.dbs.len();
    let required = ddp::required_satisfied(n, config.tau);
    let region_failure = outcomes
        .iter()
        .enumerate()
        .find(|(_, o)| !o.feasible)
        .map(|(index, o)| Infeasibility::Region {
            index,
            cause: Box::new(o.infeasibility.clone().unwrap_or(Infeasibility::TargetMissed {
                k_max,
                best_satisfied: o.satisfied_count,
                required: 0,
            })),
        });
    let infeasibility = if options.k_override.is_none() && k_total > k_max {
        Some(Infeasibility::FleetExceeded { k_total, k_max })
    } else if let Some(f) = region_failure {
        Some(f)
    } else if report.satisfied_count < required {
        Some(Infeasibility::TargetMissed { k_max, best_satisfied: report.satisfied_count, required })
    } else {
        None
    };
    Ok(DdpOutcome {
        placement,
        k_searched: vec![k_total],
        feasible: infeasibility.is_none(),
        satisfied_count: report.satisfied_count,
        satisfaction_rate: report.satisfaction_rate,
        k_min: ddp::k_lower_bound(unserved.iter().sum(), config),
        k_max,
        infeasibility,
        inner_iterations: outcomes.iter().map(|o| o.inner_iterations.iter().sum()).collect(),
    })
}

/// [`run_eddp_with`] on the calling thread.
pub fn run_eddp(scenario: &Scenario, config: &SystemConfig, seed: u64, options: &DdpOptions) -> Result<DdpOutcome> {
    run_eddp_with(scenario, config, seed, options, &Sequential)
}
