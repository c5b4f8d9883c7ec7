//! Propagation and rate models for the three downlinks: GBS-to-DBS mmWave
//! backhaul, DBS-to-UE air-to-ground, and GBS-to-UE terrestrial.
//!
//! Conventions:
//! - Every path-loss distance is floored at [`MIN_DISTANCE_M`].
//! - Small-scale Rayleigh fading on terrestrial links is replaced by its mean
//!   (`h = 1`) unless a caller passes an explicit gain.
//! - A cell's bandwidth is split equally among its associated UEs, and a DBS
//!   splits its fixed transmit power the same way.
//! - Noise bandwidth of a link equals its allocated bandwidth.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::model::{db_to_linear, linear_to_db, DbsSite, Environment, Placement, Point, Scenario, SystemConfig, Tag};

/// Floor applied to every distance entering a path-loss formula.
pub const MIN_DISTANCE_M: f64 = 1.0;

/// Budget of one link. Interference is split by source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub path_loss_db: f64,
    pub sinr_db: f64,
    pub bandwidth_hz: f64,
    pub rate_bps: f64,
    pub signal_mw: f64,
    pub noise_mw: f64,
    pub interference_from_gbs_mw: f64,
    pub interference_from_dbs_mw: f64,
    /// SINR is at or above the link's threshold.
    pub meets_threshold: bool,
}

impl LinkBudget {
    pub fn interference_mw(&self) -> f64 {
        self.interference_from_gbs_mw + self.interference_from_dbs_mw
    }
}

fn shannon(bandwidth_hz: f64, sinr: f64) -> f64 {
    bandwidth_hz * math::log2(1.0 + sinr)
}

/// 28 GHz line-of-sight backhaul loss, `61.4 + 20 log10(d)` dB.
pub fn backhaul_path_loss_db(distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::domain(format!("backhaul distance must be positive, got {distance_m}")));
    }
    Ok(61.4 + 20.0 * math::log10(distance_m))
}

/// Backhaul budget of `dbs` when `k` drones share the mmWave band equally.
/// The GBS antenna sits at ground level.
pub fn backhaul_link(dbs: &DbsSite, gbs: Point, k: usize, config: &SystemConfig) -> Result<LinkBudget> {
    if k == 0 {
        return Err(Error::domain("backhaul split over zero drones"));
    }
    let horizontal = dbs.center().distance(gbs);
    let d = math::hypot(horizontal, dbs.altitude_m).max(MIN_DISTANCE_M);
    let path_loss_db = backhaul_path_loss_db(d)?;
    let bandwidth_hz = config.b_bk_hz / k as f64;
    let signal_mw = db_to_linear(config.p_gbs_bk_dbm - path_loss_db);
    let noise_mw = bandwidth_hz * db_to_linear(config.n0_dbm_hz);
    let snr = signal_mw / noise_mw;
    let sinr_db = linear_to_db(snr);
    Ok(LinkBudget {
        path_loss_db,
        sinr_db,
        bandwidth_hz,
        rate_bps: shannon(bandwidth_hz, snr),
        signal_mw,
        noise_mw,
        interference_from_gbs_mw: 0.0,
        interference_from_dbs_mw: 0.0,
        meets_threshold: sinr_db >= config.gamma_th_bk_db,
    })
}

/// LoS probability at elevation angle `theta_deg` (degrees).
pub fn los_probability_at_angle(theta_deg: f64, env: &Environment) -> f64 {
    1.0 / (1.0 + env.a * math::exp(-env.b * (theta_deg - env.a)))
}

fn elevation_deg(h_m: f64, r_m: f64) -> f64 {
    math::atan2(h_m, r_m).to_degrees()
}

/// Probability that a drone at altitude `h_m` sees a ground point at
/// horizontal distance `r_m` in line of sight.
pub fn los_probability(h_m: f64, r_m: f64, env: &Environment) -> Result<f64> {
    if !(h_m > 0.0) {
        return Err(Error::domain(format!("altitude must be positive, got {h_m}")));
    }
    if !(r_m >= 0.0) {
        return Err(Error::domain(format!("horizontal distance must be >= 0, got {r_m}")));
    }
    Ok(los_probability_at_angle(elevation_deg(h_m, r_m), env))
}

/// Free-space loss at distance `d_m` (floored).
pub fn free_space_path_loss_db(d_m: f64, fc_hz: f64, speed_of_light: f64) -> f64 {
    20.0 * math::log10(4.0 * math::PI * fc_hz * d_m.max(MIN_DISTANCE_M) / speed_of_light)
}

pub(crate) fn atg_mean_path_loss_unchecked(h_m: f64, r_m: f64, env: &Environment, fc_hz: f64, c: f64) -> f64 {
    let p_los = los_probability_at_angle(elevation_deg(h_m, r_m), env);
    let d = math::hypot(r_m, h_m);
    free_space_path_loss_db(d, fc_hz, c) + p_los * env.eta_los + (1.0 - p_los) * env.eta_nlos
}

/// LoS/NLoS probability-weighted mean air-to-ground path loss (dB).
pub fn atg_mean_path_loss_db(h_m: f64, r_m: f64, env: &Environment, fc_hz: f64, speed_of_light: f64) -> Result<f64> {
    if !(h_m > 0.0) || !(r_m >= 0.0) || !(fc_hz > 0.0) {
        return Err(Error::domain(format!(
            "air-to-ground loss needs h > 0, r >= 0, fc > 0 (got h={h_m}, r={r_m}, fc={fc_hz})"
        )));
    }
    Ok(atg_mean_path_loss_unchecked(h_m, r_m, env, fc_hz, speed_of_light))
}

/// Interference-free GBS coverage radius over the full band with mean fading.
pub fn gbs_coverage_radius(config: &SystemConfig) -> f64 {
    let p_g = db_to_linear(config.p_gbs_dbm);
    let gamma = db_to_linear(config.gamma_th_db);
    let noise = config.b_hz * db_to_linear(config.n0_dbm_hz);
    math::powf(p_g / (gamma * noise), 1.0 / config.alpha)
}

/// Transmit power (mW) needed to deliver `rate_bps` over `bandwidth_hz`
/// through `path_loss_db` against `interference_mw` plus noise.
pub fn required_power_mw(path_loss_db: f64, interference_mw: f64, noise_mw: f64, bandwidth_hz: f64, rate_bps: f64) -> f64 {
    db_to_linear(path_loss_db) * (interference_mw + noise_mw) * (math::powf(2.0, rate_bps / bandwidth_hz) - 1.0)
}

/// Number of UEs each cell currently serves.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellLoads {
    pub n_g: usize,
    pub n_j: Vec<usize>,
}

impl CellLoads {
    pub fn of(placement: &Placement) -> Self {
        Self {
            n_g: placement.association.n_gbs(),
            n_j: placement.association.dbs_loads(placement.dbs.len()),
        }
    }
}

/// Linear-domain constants derived once from a [`SystemConfig`].
#[derive(Debug, Clone)]
pub struct Radio<'a> {
    pub config: &'a SystemConfig,
    pub noise_mw_per_hz: f64,
    pub p_gbs_mw: f64,
    pub p_dbs_mw: f64,
}

impl<'a> Radio<'a> {
    pub fn new(config: &'a SystemConfig) -> Self {
        Self {
            config,
            noise_mw_per_hz: db_to_linear(config.n0_dbm_hz),
            p_gbs_mw: db_to_linear(config.p_gbs_dbm),
            p_dbs_mw: db_to_linear(config.p_dbs_dbm),
        }
    }

    /// Mean air-to-ground channel gain (linear) from `site` to `ue`.
    pub fn atg_gain(&self, site: &DbsSite, ue: Point) -> f64 {
        db_to_linear(-self.atg_loss_db(site, ue))
    }

    pub fn atg_loss_db(&self, site: &DbsSite, ue: Point) -> f64 {
        let c = self.config;
        atg_mean_path_loss_unchecked(site.altitude_m, site.center().distance(ue), &c.env, c.fc_hz, c.speed_of_light)
    }

    /// Deterministic GBS power received at `ue` (mean fading).
    pub fn gbs_received_mw(&self, gbs: Point, ue: Point) -> f64 {
        self.p_gbs_mw * math::powf(gbs.distance(ue).max(MIN_DISTANCE_M), -self.config.alpha)
    }

    /// Co-channel interference at `ue` from every DBS other than `serving`
    /// whose coverage disk contains the UE. Each interferer radiates its
    /// per-UE power share; silent drones (no UEs) contribute nothing.
    pub fn dbs_interference_mw(&self, ue: Point, serving: Option<usize>, sites: &[DbsSite], n_j: &[usize]) -> f64 {
        let mut total = 0.0;
        for (j, site) in sites.iter().enumerate() {
            if Some(j) == serving || n_j[j] == 0 || !site.covers(ue) {
                continue;
            }
            total += self.p_dbs_mw / n_j[j] as f64 * self.atg_gain(site, ue);
        }
        total
    }

    /// Link from DBS `j` to `ue` under the given cell loads. `n_j[j]` is the
    /// load including this UE; zero is treated as one.
    pub fn dbs_link(&self, ue: Point, j: usize, sites: &[DbsSite], n_j: &[usize], gbs: Point) -> LinkBudget {
        let site = &sites[j];
        let share = n_j[j].max(1) as f64;
        let path_loss_db = self.atg_loss_db(site, ue);
        let bandwidth_hz = self.config.b_hz / share;
        let signal_mw = self.p_dbs_mw / share * db_to_linear(-path_loss_db);
        let noise_mw = bandwidth_hz * self.noise_mw_per_hz;
        let i_g = self.gbs_received_mw(gbs, ue);
        let i_u = self.dbs_interference_mw(ue, Some(j), sites, n_j);
        let sinr = signal_mw / (i_g + i_u + noise_mw);
        let sinr_db = linear_to_db(sinr);
        LinkBudget {
            path_loss_db,
            sinr_db,
            bandwidth_hz,
            rate_bps: shannon(bandwidth_hz, sinr),
            signal_mw,
            noise_mw,
            interference_from_gbs_mw: i_g,
            interference_from_dbs_mw: i_u,
            meets_threshold: sinr_db >= self.config.gamma_th_db,
        }
    }

    /// Link from the GBS to `ue`. Every DBS whose disk contains the UE
    /// interferes with its full transmit power; `fading_gain` scales the
    /// desired signal (1 for mean fading).
    pub fn gbs_link(&self, ue: Point, sites: &[DbsSite], n_j: &[usize], n_g: usize, gbs: Point, fading_gain: f64) -> LinkBudget {
        let r = gbs.distance(ue).max(MIN_DISTANCE_M);
        let path_loss_db = 10.0 * self.config.alpha * math::log10(r);
        let bandwidth_hz = self.config.b_hz / n_g.max(1) as f64;
        let signal_mw = self.p_gbs_mw * fading_gain * math::powf(r, -self.config.alpha);
        let noise_mw = bandwidth_hz * self.noise_mw_per_hz;
        let mut i_u = 0.0;
        for (j, site) in sites.iter().enumerate() {
            if n_j[j] > 0 && site.covers(ue) {
                i_u += self.p_dbs_mw * self.atg_gain(site, ue);
            }
        }
        let sinr = signal_mw / (i_u + noise_mw);
        let sinr_db = linear_to_db(sinr);
        LinkBudget {
            path_loss_db,
            sinr_db,
            bandwidth_hz,
            rate_bps: shannon(bandwidth_hz, sinr),
            signal_mw,
            noise_mw,
            interference_from_gbs_mw: 0.0,
            interference_from_dbs_mw: i_u,
            meets_threshold: sinr_db >= self.config.gamma_th_db,
        }
    }

    /// Link of UE `i` on whatever currently serves it, or `None` if unserved.
    pub fn serving_link(&self, i: usize, placement: &Placement, scenario: &Scenario, loads: &CellLoads) -> Option<LinkBudget> {
        let ue = scenario.ues[i];
        match placement.association.get(i) {
            Tag::Gbs => Some(self.gbs_link(ue, &placement.dbs, &loads.n_j, loads.n_g, scenario.gbs, 1.0)),
            Tag::Dbs(j) if j < placement.dbs.len() => Some(self.dbs_link(ue, j, &placement.dbs, &loads.n_j, scenario.gbs)),
            _ => None,
        }
    }
}

/// Indices of the drones (other than `serving`) whose disks contain UE `i`.
pub fn covering_interferers(i: usize, serving: Option<usize>, placement: &Placement, scenario: &Scenario) -> Vec<usize> {
    let ue = scenario.ues[i];
    placement
        .dbs
        .iter()
        .enumerate()
        .filter(|(j, s)| Some(*j) != serving && s.covers(ue))
        .map(|(j, _)| j)
        .collect()
}

/// Link of UE `ue_index` to DBS `serving` (0-based) on the placement's current loads.
pub fn dbs_ue_link(ue_index: usize, serving: usize, placement: &Placement, scenario: &Scenario, config: &SystemConfig) -> Result<LinkBudget> {
    let site = placement
        .dbs
        .get(serving)
        .ok_or_else(|| Error::domain(format!("no DBS with index {serving}")))?;
    let ue = *scenario
        .ues
        .get(ue_index)
        .ok_or_else(|| Error::domain(format!("no UE with index {ue_index}")))?;
    if !site.covers(ue) {
        return Err(Error::domain(format!(
            "UE {ue_index} lies {:.3} m from DBS {}, outside its {:.3} m coverage",
            site.center().distance(ue),
            site.id,
            site.radius_m
        )));
    }
    let loads = CellLoads::of(placement);
    Ok(Radio::new(config).dbs_link(ue, serving, &placement.dbs, &loads.n_j, scenario.gbs))
}

/// Link of UE `ue_index` to the GBS on the placement's current loads, mean fading.
pub fn gbs_ue_link(ue_index: usize, placement: &Placement, scenario: &Scenario, config: &SystemConfig) -> Result<LinkBudget> {
    let ue = *scenario
        .ues
        .get(ue_index)
        .ok_or_else(|| Error::domain(format!("no UE with index {ue_index}")))?;
    let loads = CellLoads::of(placement);
    Ok(Radio::new(config).gbs_link(ue, &placement.dbs, &loads.n_j, loads.n_g, scenario.gbs, 1.0))
}

/// Power and rate bookkeeping of one DBS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbsPower {
    /// Sum of the per-UE powers needed to sustain each UE's achieved rate.
    pub power_mw: f64,
    /// Sum of achieved per-UE rates.
    pub rate_bps: f64,
}

/// Per-DBS required power and delivered rate for the current association.
pub fn dbs_power_report(placement: &Placement, scenario: &Scenario, config: &SystemConfig) -> Vec<DbsPower> {
    let radio = Radio::new(config);
    let loads = CellLoads::of(placement);
    let mut out = alloc::vec![DbsPower { power_mw: 0.0, rate_bps: 0.0 }; placement.dbs.len()];
    for (i, tag) in placement.association.iter().enumerate() {
        let Tag::Dbs(j) = tag else { continue };
        if j >= placement.dbs.len() {
            continue;
        }
        let link = radio.dbs_link(scenario.ues[i], j, &placement.dbs, &loads.n_j, scenario.gbs);
        out[j].power_mw += required_power_mw(
            link.path_loss_db,
            link.interference_mw(),
            link.noise_mw,
            link.bandwidth_hz,
            link.rate_bps,
        );
        out[j].rate_bps += link.rate_bps;
    }
    out
}
