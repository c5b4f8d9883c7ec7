//! Domain types shared by every module, plus input validation.
//!
//! Units are SI throughout. Fields carrying decibel quantities are suffixed
//! `_db` or `_dbm`; everything else is linear (meters, Hz, bps). Internal
//! computation converts once through [`db_to_linear`] / [`linear_to_db`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;

/// Convert a decibel value to a linear ratio. Also maps dBm to mW.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    math::powf(10.0, db / 10.0)
}

/// Convert a linear ratio to decibels. Also maps mW to dBm.
#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * math::log10(linear)
}

/// A ground-plane point in meters. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn distance(self, other: Point) -> f64 {
        math::sqrt(self.distance_sq(other))
    }

    #[inline]
    pub fn distance_sq(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Axis-aligned serving rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Area {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// Closed-rectangle membership.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub area: Area,
    pub gbs: Point,
    /// UE ground positions. The index is the UE's identity.
    pub ues: Vec<Point>,
}

impl Scenario {
    pub fn n(&self) -> usize {
        self.ues.len()
    }
}

/// S-curve LoS parameters and excess losses of an air-to-ground environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub a: f64,
    pub b: f64,
    pub eta_los: f64,
    pub eta_nlos: f64,
    #[serde(default)]
    pub label: String,
}

impl Environment {
    /// Urban environment, `(a, b, eta_los, eta_nlos) = (9.61, 0.16, 1, 20)`.
    pub fn urban() -> Self {
        Self {
            a: 9.61,
            b: 0.16,
            eta_los: 1.0,
            eta_nlos: 20.0,
            label: String::from("urban"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub env: Environment,
    /// GBS cellular transmit power.
    pub p_gbs_dbm: f64,
    /// GBS mmWave backhaul transmit power.
    pub p_gbs_bk_dbm: f64,
    /// Fixed total transmit power of each DBS.
    pub p_dbs_dbm: f64,
    /// Terrestrial path-loss exponent.
    pub alpha: f64,
    pub n0_dbm_hz: f64,
    pub fc_hz: f64,
    pub fc_bk_hz: f64,
    pub b_hz: f64,
    /// Aggregate backhaul bandwidth shared by all DBSs.
    pub b_bk_hz: f64,
    pub gamma_th_db: f64,
    pub gamma_th_bk_db: f64,
    pub c_min_bps: f64,
    /// Target satisfaction rate in `[0, 1]`.
    pub tau: f64,
    /// Fleet size `K`.
    pub k_max_cap: usize,
    pub h_min_m: f64,
    pub h_max_m: f64,
    pub l_allowable_db: f64,
    /// Downlink capacity ceiling of the GBS.
    pub c_hat_gbs_bps: f64,
    pub speed_of_light: f64,
    /// Search up to `k_max_cap` instead of the backhaul-derived upper bound.
    #[serde(default)]
    pub ignore_backhaul_k_cap: bool,
}

impl SystemConfig {
    /// Urban defaults from the reference simulation setup.
    pub fn urban_default() -> Self {
        Self {
            env: Environment::urban(),
            p_gbs_dbm: 40.0,
            p_gbs_bk_dbm: 30.0,
            p_dbs_dbm: 20.0,
            alpha: 6.5,
            n0_dbm_hz: -174.0,
            fc_hz: 2.0e9,
            fc_bk_hz: 28.0e9,
            b_hz: 20.0e6,
            b_bk_hz: 20.0 * 100.0e6,
            gamma_th_db: 5.0,
            gamma_th_bk_db: -10.0,
            c_min_bps: 1.0e6,
            tau: 0.4,
            k_max_cap: 100,
            h_min_m: 20.0,
            h_max_m: 400.0,
            l_allowable_db: 119.0,
            c_hat_gbs_bps: 70.0e6,
            speed_of_light: 2.997925e8,
            ignore_backhaul_k_cap: false,
        }
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::urban_default()
    }
}

/// One placed drone base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbsSite {
    /// 1-based identifier, matching the association encoding.
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub altitude_m: f64,
    pub radius_m: f64,
}

impl DbsSite {
    pub fn center(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Whether a ground point lies in this DBS's coverage disk.
    pub fn covers(&self, p: Point) -> bool {
        self.center().distance(p) <= self.radius_m
    }
}

/// Which base station serves a UE.
///
/// Encoded on the wire as an integer: `0` is the GBS, `j >= 1` is DBS `j`
/// (1-based), `-1` is unserved. In memory `Dbs` holds the 0-based index into
/// [`Placement::dbs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Tag {
    Gbs,
    Dbs(usize),
    Unserved,
}

impl Tag {
    pub fn code(self) -> i64 {
        match self {
            Tag::Gbs => 0,
            Tag::Dbs(j) => j as i64 + 1,
            Tag::Unserved => -1,
        }
    }
}

impl From<Tag> for i64 {
    fn from(t: Tag) -> Self {
        t.code()
    }
}

impl TryFrom<i64> for Tag {
    type Error = String;

    fn try_from(v: i64) -> core::result::Result<Self, Self::Error> {
        match v {
            -1 => Ok(Tag::Unserved),
            0 => Ok(Tag::Gbs),
            j if j > 0 => Ok(Tag::Dbs((j - 1) as usize)),
            other => Err(format!("invalid association code {other}")),
        }
    }
}

/// Per-UE association tags, indexed like [`Scenario::ues`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Association(pub Vec<Tag>);

impl Association {
    pub fn unserved(n: usize) -> Self {
        Association(alloc::vec![Tag::Unserved; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Tag {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, tag: Tag) {
        self.0[i] = tag;
    }

    pub fn iter(&self) -> impl Iterator<Item = Tag> + '_ {
        self.0.iter().copied()
    }

    /// Number of UEs tagged to the GBS.
    pub fn n_gbs(&self) -> usize {
        self.0.iter().filter(|t| **t == Tag::Gbs).count()
    }

    /// Number of UEs tagged to each of `k` DBSs.
    pub fn dbs_loads(&self, k: usize) -> Vec<usize> {
        let mut loads = alloc::vec![0usize; k];
        for t in &self.0 {
            if let Tag::Dbs(j) = *t {
                if j < k {
                    loads[j] += 1;
                }
            }
        }
        loads
    }

    /// UE indices tagged to each of `k` DBSs, in ascending index order.
    pub fn members(&self, k: usize) -> Vec<Vec<usize>> {
        let mut out = alloc::vec![Vec::new(); k];
        for (i, t) in self.0.iter().enumerate() {
            if let Tag::Dbs(j) = *t {
                if j < k {
                    out[j].push(i);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Placement {
    pub dbs: Vec<DbsSite>,
    pub association: Association,
    /// SINR (dB) of each UE on its serving link; `None` when unserved.
    pub sinr_db: Vec<Option<f64>>,
}

impl Placement {
    /// No drones; every UE starts unserved.
    pub fn empty(n: usize) -> Self {
        Self {
            dbs: Vec::new(),
            association: Association::unserved(n),
            sinr_db: alloc::vec![None; n],
        }
    }

    pub fn k(&self) -> usize {
        self.dbs.len()
    }
}

/// One failed validation check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: String::from(field),
            message: message.into(),
        }
    }
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Check every [`SystemConfig`] invariant. Empty result means valid.
pub fn validate_config(config: &SystemConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let env = &config.env;
    if !(env.a > 0.0) {
        out.push(Violation::new("env.a", format!("must be > 0, got {}", env.a)));
    }
    if !(env.b > 0.0) {
        out.push(Violation::new("env.b", format!("must be > 0, got {}", env.b)));
    }
    if !(env.eta_nlos >= env.eta_los) {
        out.push(Violation::new(
            "env.eta_nlos",
            format!("must be >= eta_los ({} < {})", env.eta_nlos, env.eta_los),
        ));
    }
    if !(0.0..=1.0).contains(&config.tau) {
        out.push(Violation::new("tau", format!("must lie in [0, 1], got {}", config.tau)));
    }
    if !(config.alpha > 2.0) {
        out.push(Violation::new("alpha", format!("must be > 2, got {}", config.alpha)));
    }
    if !(config.h_min_m > 0.0 && config.h_min_m < config.h_max_m) {
        out.push(Violation::new(
            "h_min_m/h_max_m",
            format!(
                "altitude bounds must satisfy 0 < h_min < h_max, got [{}, {}]",
                config.h_min_m, config.h_max_m
            ),
        ));
    }
    for (field, v) in [
        ("fc_hz", config.fc_hz),
        ("fc_bk_hz", config.fc_bk_hz),
        ("b_hz", config.b_hz),
        ("b_bk_hz", config.b_bk_hz),
        ("speed_of_light", config.speed_of_light),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            out.push(Violation::new(field, format!("must be positive and finite, got {v}")));
        }
    }
    for (field, v) in [
        ("p_gbs_dbm", config.p_gbs_dbm),
        ("p_gbs_bk_dbm", config.p_gbs_bk_dbm),
        ("p_dbs_dbm", config.p_dbs_dbm),
        ("n0_dbm_hz", config.n0_dbm_hz),
        ("gamma_th_db", config.gamma_th_db),
        ("gamma_th_bk_db", config.gamma_th_bk_db),
        ("l_allowable_db", config.l_allowable_db),
    ] {
        if !v.is_finite() {
            out.push(Violation::new(field, format!("must be finite, got {v}")));
        }
    }
    if !(config.c_min_bps >= 0.0 && config.c_min_bps.is_finite()) {
        out.push(Violation::new(
            "c_min_bps",
            format!("must be finite and >= 0, got {}", config.c_min_bps),
        ));
    }
    if !(config.c_hat_gbs_bps >= 0.0) {
        out.push(Violation::new(
            "c_hat_gbs_bps",
            format!("must be >= 0, got {}", config.c_hat_gbs_bps),
        ));
    }
    if config.k_max_cap == 0 {
        out.push(Violation::new("k_max_cap", "fleet size must be at least 1"));
    }
    out
}

/// Check that the scenario is non-empty and every point lies in the area.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let a = &s.area;
    if !(a.x_min < a.x_max && a.y_min < a.y_max) {
        out.push(Violation::new("area", "requires x_min < x_max and y_min < y_max"));
        return out;
    }
    if !s.area.contains(s.gbs) {
        out.push(Violation::new(
            "gbs",
            format!("({}, {}) lies outside the area", s.gbs.x, s.gbs.y),
        ));
    }
    if s.ues.is_empty() {
        out.push(Violation::new("ues", "at least one UE is required"));
    }
    for (i, p) in s.ues.iter().enumerate() {
        if !s.area.contains(*p) {
            out.push(Violation::new(
                "ues",
                format!("UE {i} at ({}, {}) lies outside the area", p.x, p.y),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn default_config_is_valid() {
        assert!(validate_config(&SystemConfig::urban_default()).is_empty());
    }

    #[test]
    fn tau_out_of_range_names_tau() {
        let mut c = SystemConfig::urban_default();
        c.tau = 1.5;
        let v = validate_config(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "tau");
    }

    #[test]
    fn inverted_altitudes_flagged() {
        let mut c = SystemConfig::urban_default();
        c.h_min_m = 400.0;
        c.h_max_m = 20.0;
        let v = validate_config(&c);
        assert_eq!(v.len(), 1);
        assert!(v[0].field.contains("h_min_m"));
    }

    #[test]
    fn scenario_checks() {
        let area = Area::new(0.0, 600.0, 0.0, 600.0);
        let ok = Scenario {
            area,
            gbs: Point::new(100.0, 250.0),
            ues: (0..500).map(|i| Point::new(i as f64, (i * 7 % 600) as f64)).collect(),
        };
        assert!(validate_scenario(&ok).is_empty());

        let out = Scenario {
            ues: vec![Point::new(601.0, 0.0)],
            ..ok.clone()
        };
        assert_eq!(validate_scenario(&out).len(), 1);

        let empty = Scenario { ues: vec![], ..ok };
        let v = validate_scenario(&empty);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "ues");
    }

    #[test]
    fn tag_codes() {
        assert_eq!(Tag::Gbs.code(), 0);
        assert_eq!(Tag::Dbs(0).code(), 1);
        assert_eq!(Tag::Unserved.code(), -1);
        assert_eq!(Tag::try_from(3).unwrap(), Tag::Dbs(2));
        assert!(Tag::try_from(-2).is_err());
    }

    #[test]
    fn db_round_trip() {
        for x in [1e-12, 0.3, 1.0, 7.5, 1e9] {
            let back = db_to_linear(linear_to_db(x));
            assert!(((back - x) / x).abs() < 1e-12);
        }
    }
}
