use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use droneplace::core::channel::gbs_coverage_radius;
use droneplace::core::ddp::{initial_gbs_association, k_lower_bound, k_upper_bound, Infeasibility};
use droneplace::core::eddp::{classify_partition, expected_complexity_reduction, partition_probabilities};
use droneplace::core::geometry::optimal_elevation_angle;
use droneplace::core::metrics::{evaluate, FadingMode};
use droneplace::core::{Placement, Point, Tag};
use droneplace::crowd::{generate_scenario, CrowdSpec};
use droneplace::experiment::{self, ExecPolicy, Method, Vary};
use droneplace::io;

#[derive(Parser)]
#[command(name = "droneplace", version, about = "Drone base-station placement over ground-user crowds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Five-hotspot flash crowd.
    Paper,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fading {
    Mean,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a UE scenario.
    Gen {
        #[arg(long, value_enum, default_value = "paper")]
        preset: Preset,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// GBS position override as X,Y.
        #[arg(long, value_parser = parse_point)]
        gbs: Option<Point>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Place drones with one method.
    Place {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a stored placement.
    Eval {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        placement: PathBuf,
        #[arg(long, value_enum, default_value = "mean")]
        fading: Fading,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run methods over a parameter range and seeds.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// `tau=lo:hi:step`, `n=lo:hi:step` or a comma list.
        #[arg(long)]
        vary: Vary,
        #[arg(long, value_delimiter = ',', default_value = "bkm,ddp,eddp")]
        methods: Vec<Method>,
        /// Number of seeds; runs use seeds 0..SEEDS.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Wall-time table; defaults to `<out stem>.timing.csv`.
        #[arg(long)]
        timing_out: Option<PathBuf>,
        /// Directory for plot series files.
        #[arg(long)]
        emit_plotdata: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
    /// Print analytic bounds for a scenario.
    Bounds {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<Point> {
    let (x, y) = s.split_once(',').context("expected X,Y")?;
    Ok(Point::new(x.trim().parse()?, y.trim().parse()?))
}

#[derive(Serialize)]
struct PlaceSummary<'a> {
    method: Method,
    seed: u64,
    k: usize,
    k_searched: &'a [usize],
    feasible: bool,
    satisfied_count: usize,
    satisfaction_rate: f64,
    sum_rate_bps: f64,
    wall_time_s: f64,
    infeasibility: Option<&'a Infeasibility>,
}

#[derive(Serialize)]
struct Bounds {
    n: usize,
    n_g: usize,
    n_unserved: usize,
    k_min: usize,
    k_max: usize,
    r_g_m: f64,
    theta_star_deg: f64,
    partition: String,
    p1: f64,
    p2: f64,
    p4: f64,
    complexity_reduction: Option<f64>,
}

enum Status {
    Ok,
    Infeasible,
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Gen { preset, n, seed, gbs, out } => {
            let mut spec = match preset {
                Preset::Paper => CrowdSpec::reference(n, seed),
                Preset::Uniform => CrowdSpec::uniform(n, seed),
            };
            if let Some(g) = gbs {
                spec.gbs = g;
            }
            let scenario = generate_scenario(&spec)?;
            io::write_json(&out, &scenario)?;
            Ok(Status::Ok)
        }
        Command::Place { scenario, config, method, k, seed, out } => {
            let s = io::load_scenario(&scenario)?;
            let c = io::load_config(config.as_deref())?;
            if method == Method::Bkm && k.is_none() {
                bail!("the bkm baseline needs a predefined drone count; pass --k");
            }
            let (outcome, wall) = experiment::timed_run(&s, &c, method, seed, k, droneplace::parallel::thread_budget());
            let o = outcome?;
            io::write_json(&out, &o.placement)?;
            let report = evaluate(&o.placement, &s, &c, FadingMode::Mean);
            let summary = PlaceSummary {
                method,
                seed,
                k: o.placement.k(),
                k_searched: &o.k_searched,
                feasible: o.feasible,
                satisfied_count: report.satisfied_count,
                satisfaction_rate: report.satisfaction_rate,
                sum_rate_bps: report.sum_rate_bps,
                wall_time_s: wall.as_secs_f64(),
                infeasibility: o.infeasibility.as_ref(),
            };
            print!("{}", io::to_json(&summary)?);
            Ok(if o.feasible { Status::Ok } else { Status::Infeasible })
        }
        Command::Eval { scenario, config, placement, fading, seed, out } => {
            let s = io::load_scenario(&scenario)?;
            let c = io::load_config(config.as_deref())?;
            let p: Placement = io::read_json(&placement)?;
            if p.association.len() != s.ues.len() || p.sinr_db.len() != s.ues.len() {
                bail!("placement covers {} UEs but the scenario has {}", p.association.len(), s.ues.len());
            }
            if let Some(bad) = p.association.iter().find(|t| matches!(t, Tag::Dbs(j) if *j >= p.k())) {
                bail!("placement tags UE with {bad:?} but has only {} drones", p.k());
            }
            let mode = match fading {
                Fading::Mean => FadingMode::Mean,
                Fading::Sampled => FadingMode::Sampled { seed },
            };
            let report = evaluate(&p, &s, &c, mode);
            io::write_json(&out, &report)?;
            for v in report.violations() {
                eprintln!("violated: {} ({})", v.name, v.detail);
            }
            Ok(if report.is_feasible() { Status::Ok } else { Status::Infeasible })
        }
        Command::Sweep { scenario, config, vary, methods, seeds, k, out, timing_out, emit_plotdata, bins } => {
            let s = io::load_scenario(&scenario)?;
            let c = io::load_config(config.as_deref())?;
            let seeds: Vec<u64> = (0..seeds).collect();
            let result = experiment::sweep(&s, &c, &vary, &methods, &seeds, k, ExecPolicy::from_env())?;
            io::write_text(&out, &result.results_csv()?)?;
            let timing = timing_out.unwrap_or_else(|| sibling(&out, "timing.csv"));
            io::write_text(&timing, &result.timing_csv()?)?;
            if let Some(dir) = emit_plotdata {
                for (name, body) in result.plot_series(bins)? {
                    io::write_text(&dir.join(name), &body)?;
                }
            }
            Ok(Status::Ok)
        }
        Command::Bounds { scenario, config } => {
            let s = io::load_scenario(&scenario)?;
            let c = io::load_config(config.as_deref())?;
            let base = initial_gbs_association(&s, &c);
            let n_g = base.n_gbs();
            let n_unserved = base.iter().filter(|t| matches!(t, Tag::Unserved)).count();
            let r_g = gbs_coverage_radius(&c);
            let plan = classify_partition(&s.area, s.gbs, r_g)?;
            let probs = partition_probabilities(&s.area, r_g);
            let red = expected_complexity_reduction(&s.area, r_g);
            let b = Bounds {
                n: s.ues.len(),
                n_g,
                n_unserved,
                k_min: k_lower_bound(n_unserved, &c),
                k_max: k_upper_bound(&c),
                r_g_m: r_g,
                theta_star_deg: optimal_elevation_angle(&c.env)?.to_degrees(),
                partition: format!("{:?}", plan.kind),
                p1: probs.p1,
                p2: probs.p2,
                p4: probs.p4,
                complexity_reduction: red.valid.then_some(red.value),
            };
            print!("{}", io::to_json(&b)?);
            Ok(Status::Ok)
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn main() -> ExitCode {
    // Usage errors exit with 1; clap's own code 2 means "infeasible" here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Infeasible) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
