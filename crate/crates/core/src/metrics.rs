//! Placement evaluation and empirical distributions over repeated runs.
//!
//! Rate accounting: every associated UE is granted the smaller of its
//! Shannon rate and an equal share of its cell's capacity (`C_G / N_G` for
//! the GBS, backhaul rate `C_j / N_j` for DBS `j`). A UE is *served* when it
//! is associated, inside its drone's disk, and meets the SINR threshold; it
//! is *satisfied* when it is served, its granted rate reaches `c_min`, and
//! (for drone links) its path loss stays within `L_allowable`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{self, CellLoads, DbsPower, LinkBudget, Radio};
use crate::error::{Error, Result};
use crate::geometry::{circle_overlap_area, Circle};
use crate::math;
use crate::model::{Placement, Scenario, SystemConfig, Tag};

/// Relative slack on rate comparisons against `c_min`.
pub const RATE_TOLERANCE: f64 = 1e-12;

/// How small-scale fading on terrestrial links is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FadingMode {
    /// Unit mean gain, fully deterministic.
    #[default]
    Mean,
    /// Rayleigh power gains `h ~ Exp(1)` drawn per UE in index order.
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UeOutcome {
    pub tag: Tag,
    /// Link on the serving cell; `None` when unserved.
    pub link: Option<LinkBudget>,
    /// Rate granted after the capacity share; zero unless served.
    pub rate_bps: f64,
    /// The UE lies inside its serving drone's disk (always true for the GBS).
    pub covered: bool,
    pub sinr_ok: bool,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintStatus {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n: usize,
    pub k: usize,
    pub sum_rate_bps: f64,
    pub satisfied_count: usize,
    /// Served UEs (SINR at threshold), regardless of rate.
    pub sinr_ok_count: usize,
    pub satisfaction_rate: f64,
    pub n_g: usize,
    pub n_j: Vec<usize>,
    pub gbs_rate_bps: f64,
    /// Backhaul capacity of each drone; zero when its backhaul SNR is below threshold.
    pub dbs_capacity_bps: Vec<f64>,
    pub dbs_power: Vec<DbsPower>,
    pub total_overlap_area_m2: f64,
    pub per_ue: Vec<UeOutcome>,
    pub constraints: Vec<ConstraintStatus>,
}

impl EvaluationReport {
    pub fn violations(&self) -> impl Iterator<Item = &ConstraintStatus> {
        self.constraints.iter().filter(|c| !c.holds)
    }

    pub fn is_feasible(&self) -> bool {
        self.constraints.iter().all(|c| c.holds)
    }

    pub fn total_dbs_power_mw(&self) -> f64 {
        self.dbs_power.iter().map(|p| p.power_mw).sum()
    }

    pub const CSV_COLUMNS: &'static [&'static str] = &[
        "n",
        "k",
        "n_g",
        "sum_rate_bps",
        "satisfied_count",
        "sinr_ok_count",
        "satisfaction_rate",
        "gbs_rate_bps",
        "total_overlap_area_m2",
        "total_dbs_power_mw",
        "violations",
    ];

    /// Flat row matching [`Self::CSV_COLUMNS`]. Floats use the shortest
    /// round-trip representation.
    pub fn csv_values(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.k.to_string(),
            self.n_g.to_string(),
            format!("{}", self.sum_rate_bps),
            self.satisfied_count.to_string(),
            self.sinr_ok_count.to_string(),
            format!("{}", self.satisfaction_rate),
            format!("{}", self.gbs_rate_bps),
            format!("{}", self.total_overlap_area_m2),
            format!("{}", self.total_dbs_power_mw()),
            self.violations().count().to_string(),
        ]
    }
}

/// Sum of pairwise lens areas of the drones' coverage disks.
pub fn total_overlap_area(placement: &Placement) -> f64 {
    let circles: Vec<Circle> = placement
        .dbs
        .iter()
        .map(|s| Circle::new(s.center(), s.radius_m))
        .collect();
    let mut total = 0.0;
    for a in 0..circles.len() {
        for b in a + 1..circles.len() {
            total += circle_overlap_area(&circles[a], &circles[b]);
        }
    }
    total
}

/// Backhaul capacity of each drone under an equal split of the backhaul
/// band; zero for drones whose backhaul SNR misses its threshold.
pub fn backhaul_capacities(placement: &Placement, scenario: &Scenario, config: &SystemConfig) -> Vec<f64> {
    let k = placement.dbs.len();
    placement
        .dbs
        .iter()
        .map(|s| match channel::backhaul_link(s, scenario.gbs, k, config) {
            Ok(l) if l.meets_threshold => l.rate_bps,
            _ => 0.0,
        })
        .collect()
}

/// Raw serving links of every UE under `fading`.
pub fn serving_links(placement: &Placement, scenario: &Scenario, config: &SystemConfig, fading: FadingMode) -> Vec<Option<LinkBudget>> {
    let radio = Radio::new(config);
    let loads = CellLoads::of(placement);
    let mut rng = match fading {
        FadingMode::Mean => None,
        FadingMode::Sampled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut out = Vec::with_capacity(scenario.ues.len());
    for (i, &ue) in scenario.ues.iter().enumerate() {
        // One draw per UE keeps the stream aligned with UE indices.
        let gain = match rng.as_mut() {
            Some(r) => -math::ln(1.0 - r.random::<f64>()),
            None => 1.0,
        };
        let link = match placement.association.get(i) {
            Tag::Gbs => Some(radio.gbs_link(ue, &placement.dbs, &loads.n_j, loads.n_g, scenario.gbs, gain)),
            Tag::Dbs(j) if j < placement.dbs.len() => {
                Some(radio.dbs_link(ue, j, &placement.dbs, &loads.n_j, scenario.gbs))
            }
            _ => None,
        };
        out.push(link);
    }
    out
}

/// Evaluate `placement` on `scenario`.
pub fn evaluate(placement: &Placement, scenario: &Scenario, config: &SystemConfig, fading: FadingMode) -> EvaluationReport {
    let links = serving_links(placement, scenario, config, fading);
    summarize(placement, scenario, config, &links)
}

/// Turn precomputed serving links into a report. `links[i]` must be `Some`
/// exactly for the associated UEs.
pub fn summarize(placement: &Placement, scenario: &Scenario, config: &SystemConfig, links: &[Option<LinkBudget>]) -> EvaluationReport {
    let n = scenario.ues.len();
    let k = placement.dbs.len();
    let loads = CellLoads::of(placement);
    let capacity = backhaul_capacities(placement, scenario, config);
    let gbs_share = if loads.n_g > 0 { config.c_hat_gbs_bps / loads.n_g as f64 } else { 0.0 };
    let c_min_floor = config.c_min_bps * (1.0 - RATE_TOLERANCE);

    let mut per_ue = Vec::with_capacity(n);
    let mut dbs_power = vec![DbsPower { power_mw: 0.0, rate_bps: 0.0 }; k];
    let mut gbs_rate = 0.0;
    let mut sum_rate = 0.0;
    let mut satisfied = 0usize;
    let mut sinr_ok_count = 0usize;
    let mut uncovered = 0usize;
    let mut dbs_short = 0usize;
    let mut gbs_short = 0usize;
    for (i, link) in links.iter().enumerate() {
        let tag = placement.association.get(i);
        let Some(link) = link else {
            per_ue.push(UeOutcome { tag, link: None, rate_bps: 0.0, covered: false, sinr_ok: false, satisfied: false });
            continue;
        };
        let (covered, share, loss_ok) = match tag {
            Tag::Dbs(j) => (
                placement.dbs[j].covers(scenario.ues[i]),
                capacity[j] / loads.n_j[j] as f64,
                link.path_loss_db <= config.l_allowable_db,
            ),
            _ => (true, gbs_share, true),
        };
        let sinr_ok = covered && link.meets_threshold;
        let rate = if sinr_ok { link.rate_bps.min(share) } else { 0.0 };
        let rate_ok = rate >= c_min_floor;
        let is_satisfied = sinr_ok && rate_ok && loss_ok;
        if !covered {
            uncovered += 1;
        }
        match tag {
            Tag::Dbs(j) => {
                if !rate_ok {
                    dbs_short += 1;
                }
                dbs_power[j].rate_bps += rate;
                if rate > 0.0 {
                    dbs_power[j].power_mw += channel::required_power_mw(
                        link.path_loss_db,
                        link.interference_mw(),
                        link.noise_mw,
                        link.bandwidth_hz,
                        rate,
                    );
                }
            }
            _ => {
                if !rate_ok {
                    gbs_short += 1;
                }
                gbs_rate += rate;
            }
        }
        sum_rate += rate;
        sinr_ok_count += usize::from(sinr_ok);
        satisfied += usize::from(is_satisfied);
        per_ue.push(UeOutcome { tag, link: Some(*link), rate_bps: rate, covered, sinr_ok, satisfied: is_satisfied });
    }

    let mut constraints = Vec::new();
    let mut push = |name: &str, holds: bool, detail: String| {
        constraints.push(ConstraintStatus { name: name.to_string(), holds, detail });
    };
    push("coverage", uncovered == 0, format!("{uncovered} drone-tagged UEs outside their disk"));
    push("dbs_min_rate", dbs_short == 0, format!("{dbs_short} drone-served UEs below c_min"));
    push("gbs_min_rate", gbs_short == 0, format!("{gbs_short} GBS-served UEs below c_min"));
    let over: Vec<usize> = (0..k)
        .filter(|&j| dbs_power[j].rate_bps > capacity[j] * (1.0 + RATE_TOLERANCE))
        .collect();
    push("backhaul_capacity", over.is_empty(), format!("drones over backhaul capacity: {over:?}"));
    let dead = capacity.iter().zip(&loads.n_j).filter(|(c, n)| **c == 0.0 && **n > 0).count();
    push("backhaul_snr", dead == 0, format!("{dead} loaded drones with unusable backhaul"));
    push(
        "gbs_capacity",
        gbs_rate <= config.c_hat_gbs_bps * (1.0 + RATE_TOLERANCE),
        format!("GBS delivers {gbs_rate} of {} bps", config.c_hat_gbs_bps),
    );
    let needed = config.tau * n as f64;
    push(
        "satisfaction_target",
        satisfied as f64 >= needed - 1e-9,
        format!("{satisfied} satisfied, {needed} required"),
    );
    push("fleet_size", k <= config.k_max_cap, format!("{k} drones of {} available", config.k_max_cap));
    let bad_alt = placement
        .dbs
        .iter()
        .filter(|s| s.altitude_m < config.h_min_m || s.altitude_m > config.h_max_m)
        .count();
    push("altitude_bounds", bad_alt == 0, format!("{bad_alt} drones outside altitude bounds"));

    EvaluationReport {
        n,
        k,
        sum_rate_bps: sum_rate,
        satisfied_count: satisfied,
        sinr_ok_count,
        satisfaction_rate: if n > 0 { satisfied as f64 / n as f64 } else { 0.0 },
        n_g: loads.n_g,
        n_j: loads.n_j,
        gbs_rate_bps: gbs_rate,
        dbs_capacity_bps: capacity,
        dbs_power,
        total_overlap_area_m2: total_overlap_area(placement),
        per_ue,
        constraints,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub samples: Vec<f64>,
    /// `n_bins + 1` ascending edges.
    pub edges: Vec<f64>,
    pub pdf: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Midpoint of the heaviest bin (first one on ties).
    pub fn mode(&self) -> f64 {
        let mut best = 0;
        for (b, &m) in self.pdf.iter().enumerate() {
            if m > self.pdf[best] {
                best = b;
            }
        }
        0.5 * (self.edges[best] + self.edges[best + 1])
    }
}

/// Histogram estimate of the distribution of `values` over `n_bins` equal
/// bins spanning the sample range. A constant sample gets a unit-wide range
/// centred on its value.
pub fn empirical_distribution(values: &[f64], n_bins: usize) -> Result<EmpiricalDistribution> {
    if values.is_empty() {
        return Err(Error::domain("empirical distribution of an empty sample"));
    }
    if n_bins == 0 {
        return Err(Error::domain("empirical distribution needs at least one bin"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("empirical distribution of non-finite samples"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let width = (hi - lo) / n_bins as f64;
    let edges: Vec<f64> = (0..=n_bins)
        .map(|b| if b == n_bins { hi } else { lo + width * b as f64 })
        .collect();
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let b = (math::floor((v - lo) / width) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let total = values.len() as f64;
    let pdf: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let mut cdf = Vec::with_capacity(n_bins);
    let mut running = 0usize;
    for &c in &counts {
        running += c;
        cdf.push(running as f64 / total);
    }
    Ok(EmpiricalDistribution { samples: values.to_vec(), edges, pdf, cdf })
}
