//! Timed runs, seed batches and parameter sweeps.
//!
//! Results tables never contain wall times, so they are byte-identical
//! across reruns and thread counts; timings go to a separate table.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use droneplace_core::ddp::{self, DdpMode, DdpOptions, DdpOutcome};
use droneplace_core::eddp::{self, RegionExecutor, Sequential};
use droneplace_core::metrics::{self, empirical_distribution, EvaluationReport, FadingMode};
use droneplace_core::{Placement, Scenario, SystemConfig, Tag};

use crate::crowd;
use crate::io;
use crate::parallel::{self, ThreadedRegions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bkm,
    Ddp,
    Eddp,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Bkm, Method::Ddp, Method::Eddp];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bkm => "bkm",
            Method::Ddp => "ddp",
            Method::Eddp => "eddp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bkm" => Ok(Method::Bkm),
            "ddp" => Ok(Method::Ddp),
            "eddp" => Ok(Method::Eddp),
            other => bail!("unknown method '{other}' (expected bkm, ddp or eddp)"),
        }
    }
}

/// How runs are spread over threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecPolicy {
    /// Concurrent runs (seeds and sweep cells).
    pub run_threads: usize,
    /// Concurrent partition regions inside one enhanced run.
    pub region_threads: usize,
}

impl ExecPolicy {
    pub fn sequential() -> Self {
        Self { run_threads: 1, region_threads: 1 }
    }

    /// Whole budget on runs; regions stay on the run's thread.
    pub fn from_env() -> Self {
        Self { run_threads: parallel::thread_budget(), region_threads: 1 }
    }
}

fn solve(scenario: &Scenario, config: &SystemConfig, method: Method, seed: u64, k: Option<usize>, regions: &dyn RegionExecutor) -> droneplace_core::Result<DdpOutcome> {
    match method {
        Method::Bkm => {
            let opts = DdpOptions { k_override: k, mode: DdpMode::BalancedKMeansOnly, ..DdpOptions::default() };
            ddp::run_ddp(scenario, config, seed, &opts)
        }
        Method::Ddp => ddp::run_ddp(scenario, config, seed, &DdpOptions { k_override: k, ..DdpOptions::default() }),
        Method::Eddp => eddp::run_eddp_with(scenario, config, seed, &DdpOptions { k_override: k, ..DdpOptions::default() }, regions),
    }
}

/// One solver call with its monotonic wall time (solver only, no IO).
pub fn timed_run(
    scenario: &Scenario,
    config: &SystemConfig,
    method: Method,
    seed: u64,
    k: Option<usize>,
    region_threads: usize,
) -> (droneplace_core::Result<DdpOutcome>, Duration) {
    let executor: Box<dyn RegionExecutor> = if region_threads > 1 {
        Box::new(ThreadedRegions { threads: region_threads })
    } else {
        Box::new(Sequential)
    };
    let start = Instant::now();
    let out = solve(scenario, config, method, seed, k, executor.as_ref());
    (out, start.elapsed())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub seed: u64,
    /// SHA-256 over scenario, config, method, seed and drone count.
    pub config_digest: String,
    pub k_final: usize,
    pub k_searched: Vec<usize>,
    pub feasible: bool,
    pub wall_time_s: f64,
    pub report: Option<EvaluationReport>,
    pub placement: Option<Placement>,
    pub error: Option<String>,
}

/// Digest binding a record to its exact inputs.
pub fn run_digest(scenario: &Scenario, config: &SystemConfig, method: Method, seed: u64, k: Option<usize>) -> String {
    let s = serde_json::to_value(scenario).expect("scenario serializes");
    let c = serde_json::to_value(config).expect("config serializes");
    let m = serde_json::json!({ "method": method, "seed": seed, "k": k });
    io::digest(&[&s, &c, &m])
}

/// Run one seed and evaluate the result in mean-fading mode.
pub fn run_record(scenario: &Scenario, config: &SystemConfig, method: Method, seed: u64, k: Option<usize>, region_threads: usize) -> RunRecord {
    let config_digest = run_digest(scenario, config, method, seed, k);
    let (out, wall) = timed_run(scenario, config, method, seed, k, region_threads);
    match out {
        Ok(o) => RunRecord {
            method,
            seed,
            config_digest,
            k_final: o.placement.k(),
            k_searched: o.k_searched.clone(),
            feasible: o.feasible,
            wall_time_s: wall.as_secs_f64(),
            report: Some(metrics::evaluate(&o.placement, scenario, config, FadingMode::Mean)),
            placement: Some(o.placement),
            error: None,
        },
        Err(e) => RunRecord {
            method,
            seed,
            config_digest,
            k_final: 0,
            k_searched: Vec::new(),
            feasible: false,
            wall_time_s: wall.as_secs_f64(),
            report: None,
            placement: None,
            error: Some(e.to_string()),
        },
    }
}

/// One record per seed, in seed-list order. The baseline needs `k`.
pub fn run_experiment(
    scenario: &Scenario,
    config: &SystemConfig,
    method: Method,
    seeds: &[u64],
    k: Option<usize>,
    policy: ExecPolicy,
) -> Result<Vec<RunRecord>> {
    if method == Method::Bkm && k.is_none() {
        bail!("the bkm baseline needs a predefined drone count; pass --k");
    }
    let pool = parallel::pool(policy.run_threads);
    Ok(pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| run_record(scenario, config, method, s, k, policy.region_threads))
            .collect()
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "param", content = "values")]
pub enum Vary {
    Tau(Vec<f64>),
    N(Vec<usize>),
}

impl Vary {
    pub fn len(&self) -> usize {
        match self {
            Vary::Tau(v) => v.len(),
            Vary::N(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self) -> &'static str {
        match self {
            Vary::Tau(_) => "tau",
            Vary::N(_) => "n",
        }
    }
}

impl FromStr for Vary {
    type Err = anyhow::Error;

    /// `tau=lo:hi:step` or `n=lo:hi:step` (inclusive), or a comma list.
    fn from_str(s: &str) -> Result<Self> {
        let (key, spec) = s.split_once('=').ok_or_else(|| anyhow::anyhow!("expected tau=... or n=..., got '{s}'"))?;
        let values: Vec<f64> = if spec.contains(':') {
            let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>()?;
            let [lo, hi, step] = parts[..] else { bail!("range must be lo:hi:step, got '{spec}'") };
            if !(step > 0.0) || hi < lo {
                bail!("range '{spec}' needs step > 0 and hi >= lo");
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| ((lo + step * i as f64) * 1e9).round() / 1e9).collect()
        } else {
            spec.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>()?
        };
        match key.trim() {
            "tau" => {
                if values.iter().any(|t| !(0.0..=1.0).contains(t)) {
                    bail!("tau values must lie in [0, 1]");
                }
                Ok(Vary::Tau(values))
            }
            "n" => Ok(Vary::N(values.iter().map(|v| v.round() as usize).collect())),
            other => bail!("unknown sweep parameter '{other}' (expected tau or n)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub tau: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cell: Cell,
    /// Drone count handed to the solver (fixed `k`, or the lower bound for the baseline).
    pub k_given: Option<usize>,
    pub record: RunRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub vary: Vary,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    /// Sorted by method, cell, then seed position.
    pub rows: Vec<SweepRow>,
}

/// Scenario and config of one sweep cell.
pub fn cell_inputs(scenario: &Scenario, config: &SystemConfig, cell: &Cell) -> (Scenario, SystemConfig) {
    let mut c = config.clone();
    c.tau = cell.tau;
    (crowd::prefix(scenario, cell.n), c)
}

/// Drone-count lower bound of a cell, used as the baseline's `k` when none is fixed.
pub fn baseline_k(scenario: &Scenario, config: &SystemConfig) -> usize {
    let base = ddp::initial_gbs_association(scenario, config);
    let unserved = base.iter().filter(|t| *t == Tag::Unserved).count();
    ddp::k_lower_bound(unserved, config).max(1)
}

/// Cross product of `vary` x `methods` x `seeds`. The n-sweep uses prefixes
/// of the scenario's UE list.
pub fn sweep(
    scenario: &Scenario,
    config: &SystemConfig,
    vary: &Vary,
    methods: &[Method],
    seeds: &[u64],
    k: Option<usize>,
    policy: ExecPolicy,
) -> Result<SweepResult> {
    let cells: Vec<Cell> = match vary {
        Vary::Tau(ts) => ts.iter().enumerate().map(|(index, &tau)| Cell { index, tau, n: scenario.ues.len() }).collect(),
        Vary::N(ns) => {
            if let Some(&big) = ns.iter().find(|&&n| n > scenario.ues.len() || n == 0) {
                bail!("cannot sweep to n = {big}: scenario has {} UEs", scenario.ues.len());
            }
            ns.iter().enumerate().map(|(index, &n)| Cell { index, tau: config.tau, n }).collect()
        }
    };
    let mut sorted_methods = methods.to_vec();
    sorted_methods.sort();
    sorted_methods.dedup();
    let mut tasks = Vec::new();
    for &m in &sorted_methods {
        for cell in &cells {
            for &seed in seeds {
                tasks.push((m, *cell, seed));
            }
        }
    }
    let pool = parallel::pool(policy.run_threads);
    let rows: Vec<SweepRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(m, cell, seed)| {
                let (s, c) = cell_inputs(scenario, config, &cell);
                let k_given = match (m, k) {
                    (_, Some(k)) => Some(k),
                    (Method::Bkm, None) => Some(baseline_k(&s, &c)),
                    _ => None,
                };
                let record = run_record(&s, &c, m, seed, k_given, policy.region_threads);
                SweepRow { cell, k_given, record }
            })
            .collect()
    });
    Ok(SweepResult { vary: vary.clone(), methods: sorted_methods, seeds: seeds.to_vec(), rows })
}

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

impl SweepResult {
    fn groups(&self) -> Vec<(Method, Cell, Vec<&SweepRow>)> {
        let mut out: Vec<(Method, Cell, Vec<&SweepRow>)> = Vec::new();
        for row in &self.rows {
            match out.last_mut() {
                Some((m, c, v)) if *m == row.record.method && c.index == row.cell.index => v.push(row),
                _ => out.push((row.record.method, row.cell, vec![row])),
            }
        }
        out
    }

    /// Per-run rows followed by one `mean` row per method and cell. No timings.
    pub fn results_csv(&self) -> Result<String> {
        let mut header: Vec<String> = ["method", "cell", "tau", "n", "seed", "k_given", "feasible", "k_final"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend(EvaluationReport::CSV_COLUMNS.iter().map(|s| s.to_string()));
        header.push("config_digest".into());
        header.push("error".into());
        let width = EvaluationReport::CSV_COLUMNS.len();
        let mut rows = Vec::new();
        for row in &self.rows {
            let r = &row.record;
            let mut v = vec![
                r.method.to_string(),
                row.cell.index.to_string(),
                row.cell.tau.to_string(),
                row.cell.n.to_string(),
                r.seed.to_string(),
                row.k_given.map(|k| k.to_string()).unwrap_or_default(),
                r.feasible.to_string(),
                r.k_final.to_string(),
            ];
            match &r.report {
                Some(rep) => v.extend(rep.csv_values()),
                None => v.extend(std::iter::repeat_n(String::new(), width)),
            }
            v.push(r.config_digest.clone());
            v.push(r.error.clone().unwrap_or_default());
            rows.push(v);
        }
        for (m, cell, group) in self.groups() {
            let reports: Vec<&EvaluationReport> = group.iter().filter_map(|r| r.record.report.as_ref()).collect();
            let col = |f: &dyn Fn(&EvaluationReport) -> f64| mean(&reports.iter().map(|r| f(r)).collect::<Vec<_>>()).to_string();
            let feasible = group.iter().filter(|r| r.record.feasible).count() as f64 / group.len() as f64;
            let k_final = mean(&group.iter().map(|r| r.record.k_final as f64).collect::<Vec<_>>());
            let mut v = vec![
                m.to_string(),
                cell.index.to_string(),
                cell.tau.to_string(),
                cell.n.to_string(),
                "mean".into(),
                String::new(),
                feasible.to_string(),
                k_final.to_string(),
            ];
            v.push(col(&|r| r.n as f64));
            v.push(col(&|r| r.k as f64));
            v.push(col(&|r| r.n_g as f64));
            v.push(col(&|r| r.sum_rate_bps));
            v.push(col(&|r| r.satisfied_count as f64));
            v.push(col(&|r| r.sinr_ok_count as f64));
            v.push(col(&|r| r.satisfaction_rate));
            v.push(col(&|r| r.gbs_rate_bps));
            v.push(col(&|r| r.total_overlap_area_m2));
            v.push(col(&|r| r.total_dbs_power_mw()));
            v.push(col(&|r| r.violations().count() as f64));
            v.push(String::new());
            v.push(format!("{} errors", group.len() - reports.len()));
            rows.push(v);
        }
        csv_bytes(&header, &rows)
    }

    /// Solver wall times per run plus per-group means.
    pub fn timing_csv(&self) -> Result<String> {
        let header: Vec<String> = ["method", "cell", "tau", "n", "seed", "wall_time_s"].iter().map(|s| s.to_string()).collect();
        let mut rows = Vec::new();
        for row in &self.rows {
            let r = &row.record;
            rows.push(vec![
                r.method.to_string(),
                row.cell.index.to_string(),
                row.cell.tau.to_string(),
                row.cell.n.to_string(),
                r.seed.to_string(),
                r.wall_time_s.to_string(),
            ]);
        }
        for (m, cell, group) in self.groups() {
            let t = mean(&group.iter().map(|r| r.record.wall_time_s).collect::<Vec<_>>());
            rows.push(vec![m.to_string(), cell.index.to_string(), cell.tau.to_string(), cell.n.to_string(), "mean".into(), t.to_string()]);
        }
        csv_bytes(&header, &rows)
    }

    /// Plot series as `(file name, contents)`: mean time, drone count and
    /// sum rate against the swept parameter for each method, and the
    /// satisfaction-rate PDF/CDF of each method in each cell.
    pub fn plot_series(&self, bins: usize) -> Result<Vec<(String, String)>> {
        let mut files = Vec::new();
        let param = self.vary.name();
        let groups = self.groups();
        for &m in &self.methods {
            let mine: Vec<_> = groups.iter().filter(|(gm, _, _)| *gm == m).collect();
            let x = |c: &Cell| if param == "tau" { c.tau.to_string() } else { c.n.to_string() };
            let series = |f: &dyn Fn(&SweepRow) -> Option<f64>| -> String {
                let mut s = format!("# {param} value\n");
                for (_, cell, rows) in &mine {
                    let vals: Vec<f64> = rows.iter().filter_map(|r| f(r)).collect();
                    s.push_str(&format!("{} {}\n", x(cell), mean(&vals)));
                }
                s
            };
            files.push((format!("{param}_time_{m}.dat"), series(&|r| Some(r.record.wall_time_s))));
            files.push((format!("{param}_k_{m}.dat"), series(&|r| r.record.report.as_ref().map(|rep| rep.k as f64))));
            files.push((format!("{param}_sumrate_{m}.dat"), series(&|r| r.record.report.as_ref().map(|rep| rep.sum_rate_bps))));
            for (_, cell, rows) in &mine {
                let sat: Vec<f64> = rows.iter().filter_map(|r| r.record.report.as_ref().map(|rep| rep.satisfaction_rate)).collect();
                if sat.is_empty() {
                    continue;
                }
                let d = empirical_distribution(&sat, bins)?;
                let mut pdf = String::from("# bin_center pdf\n");
                let mut cdf = String::from("# bin_right_edge cdf\n");
                for b in 0..d.pdf.len() {
                    pdf.push_str(&format!("{} {}\n", 0.5 * (d.edges[b] + d.edges[b + 1]), d.pdf[b]));
                    cdf.push_str(&format!("{} {}\n", d.edges[b + 1], d.cdf[b]));
                }
                files.push((format!("satisfaction_pdf_{m}_cell{}.dat", cell.index), pdf));
                files.push((format!("satisfaction_cdf_{m}_cell{}.dat", cell.index), cdf));
            }
        }
        Ok(files)
    }
}
