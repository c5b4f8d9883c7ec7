//! Flash-crowd scenario generator: a mixture of Gaussian hotspots and a
//! uniform background over a rectangular area.

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use droneplace_core::{Area, Point, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hotspot {
    pub center: Point,
    pub std_dev_m: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrowdSpec {
    pub area: Area,
    pub gbs: Point,
    pub n_total: usize,
    pub hotspots: Vec<Hotspot>,
    pub uniform_weight: f64,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CrowdError {
    #[error("crowd weights must be finite, non-negative and not all zero")]
    Weights,
    #[error("hotspot {0} has a non-positive or non-finite standard deviation")]
    StdDev(usize),
    #[error("area must have positive width and height")]
    Area,
    #[error("GBS ({0}, {1}) lies outside the area")]
    Gbs(f64, f64),
}

/// Hotspot centres of the reference flash-crowd layout.
pub const REFERENCE_HOTSPOTS: [(f64, f64); 5] = [(200.0, 250.0), (150.0, 20.0), (340.0, 430.0), (400.0, 340.0), (480.0, 430.0)];
pub const REFERENCE_GBS: (f64, f64) = (100.0, 250.0);
pub const REFERENCE_SIDE_M: f64 = 600.0;
pub const REFERENCE_STD_DEV_M: f64 = 30.0;
/// Share of UEs drawn from hotspots (the rest are uniform).
pub const REFERENCE_HOTSPOT_SHARE: f64 = 0.8;

impl CrowdSpec {
    /// Reference layout: 600 m square, five equally weighted hotspots.
    pub fn reference(n_total: usize, seed: u64) -> Self {
        let per = REFERENCE_HOTSPOT_SHARE / REFERENCE_HOTSPOTS.len() as f64;
        Self {
            area: Area::new(0.0, REFERENCE_SIDE_M, 0.0, REFERENCE_SIDE_M),
            gbs: Point::new(REFERENCE_GBS.0, REFERENCE_GBS.1),
            n_total,
            hotspots: REFERENCE_HOTSPOTS
                .iter()
                .map(|&(x, y)| Hotspot { center: Point::new(x, y), std_dev_m: REFERENCE_STD_DEV_M, weight: per })
                .collect(),
            uniform_weight: 1.0 - REFERENCE_HOTSPOT_SHARE,
            seed,
        }
    }

    /// Same area and GBS as [`Self::reference`], uniform UEs only.
    pub fn uniform(n_total: usize, seed: u64) -> Self {
        Self { hotspots: Vec::new(), uniform_weight: 1.0, ..Self::reference(n_total, seed) }
    }

    fn validate(&self) -> Result<(), CrowdError> {
        if !(self.area.width() > 0.0 && self.area.height() > 0.0) {
            return Err(CrowdError::Area);
        }
        if !self.area.contains(self.gbs) {
            return Err(CrowdError::Gbs(self.gbs.x, self.gbs.y));
        }
        let weights = self.hotspots.iter().map(|h| h.weight).chain([self.uniform_weight]);
        let mut total = 0.0;
        for w in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(CrowdError::Weights);
            }
            total += w;
        }
        if !(total > 0.0) {
            return Err(CrowdError::Weights);
        }
        for (i, h) in self.hotspots.iter().enumerate() {
            if !(h.std_dev_m.is_finite() && h.std_dev_m > 0.0) {
                return Err(CrowdError::StdDev(i));
            }
        }
        Ok(())
    }
}

/// Draw `n_total` UEs. Each UE picks a component by weight; hotspot draws
/// falling outside the area are redrawn from the same hotspot.
pub fn generate_scenario(spec: &CrowdSpec) -> Result<Scenario, CrowdError> {
    spec.validate()?;
    let weights: Vec<f64> = spec.hotspots.iter().map(|h| h.weight).chain([spec.uniform_weight]).collect();
    let pick = WeightedIndex::new(&weights).map_err(|_| CrowdError::Weights)?;
    let normals: Vec<(Normal<f64>, Normal<f64>)> = spec
        .hotspots
        .iter()
        .map(|h| {
            (
                Normal::new(h.center.x, h.std_dev_m).expect("validated"),
                Normal::new(h.center.y, h.std_dev_m).expect("validated"),
            )
        })
        .collect();
    let a = spec.area;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut ues = Vec::with_capacity(spec.n_total);
    while ues.len() < spec.n_total {
        let c = pick.sample(&mut rng);
        let p = if c == spec.hotspots.len() {
            Point::new(rng.random_range(a.x_min..=a.x_max), rng.random_range(a.y_min..=a.y_max))
        } else {
            let (nx, ny) = &normals[c];
            loop {
                let p = Point::new(nx.sample(&mut rng), ny.sample(&mut rng));
                if a.contains(p) {
                    break p;
                }
            }
        };
        ues.push(p);
    }
    Ok(Scenario { area: a, gbs: spec.gbs, ues })
}

/// Scenario holding the first `n` UEs of `scenario`.
pub fn prefix(scenario: &Scenario, n: usize) -> Scenario {
    Scenario { area: scenario.area, gbs: scenario.gbs, ues: scenario.ues[..n.min(scenario.ues.len())].to_vec() }
}
