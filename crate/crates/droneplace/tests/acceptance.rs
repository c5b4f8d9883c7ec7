//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use common::*;
use droneplace::core::channel::{backhaul_path_loss_db, gbs_coverage_radius, gbs_ue_link};
use droneplace::core::clustering::{balanced_kmeans, hungarian_min_cost, DEFAULT_MAX_ITERS};
use droneplace::core::ddp::{k_lower_bound, k_upper_bound, run_ddp, DdpOptions};
use droneplace::core::eddp::{classify_partition, expected_complexity_reduction, partition_probabilities, run_eddp, PartitionKind};
use droneplace::core::geometry::{elevation_residual, minimum_enclosing_circle, optimal_elevation_angle};
use droneplace::core::metrics::{evaluate, FadingMode};
use droneplace::core::{Area, Association, Placement, Point, Scenario, SystemConfig, Tag};
use droneplace::crowd::generate_scenario;
use droneplace::experiment::{baseline_k, mean, run_experiment, sweep, timed_run, ExecPolicy, Method, RunRecord, Vary};
use droneplace::presets::{experiment_config, reference_crowd, COMPARISON_K, REFERENCE_N};
use rand::Rng;

const SEEDS: u64 = 100;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn c1_oracles() -> Verdict {
    let mut r = rng(101);
    let mut mec_bad = 0;
    for case in 0..500 {
        let n = r.random_range(1..=12);
        let pts = random_points(&mut r, n, 1000.0);
        let got = minimum_enclosing_circle(&pts, case).unwrap();
        let want = brute_force_mec(&pts);
        if (got.radius - want.radius).abs() > 1e-9 || got.center.distance(want.center) > 1e-9 {
            mec_bad += 1;
        }
    }
    let mut hung_bad = 0;
    for _ in 0..200 {
        let cost: Vec<Vec<f64>> = (0..7).map(|_| (0..7).map(|_| r.random_range(0..1000) as f64).collect()).collect();
        if hungarian_min_cost(&cost).unwrap().cost != brute_force_assignment(&cost) {
            hung_bad += 1;
        }
    }
    let mut km_bad = 0;
    let mut worst: f64 = 1.0;
    for case in 0..100 {
        let n = r.random_range(2..=10);
        let k = r.random_range(1..=3usize.min(n));
        let pts = random_points(&mut r, n, 500.0);
        let c = balanced_kmeans(&pts, k, case, DEFAULT_MAX_ITERS).unwrap();
        let sizes = c.sizes();
        let balanced = sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1;
        let ratio = partition_cost(&pts, &c.labels, k) / brute_force_balanced(&pts, k).max(1e-300);
        worst = worst.max(ratio);
        if !balanced || ratio > 1.25 + 1e-12 {
            km_bad += 1;
        }
    }
    verdict(
        mec_bad + hung_bad + km_bad == 0,
        format!("MEC mismatches {mec_bad}/500, assignment mismatches {hung_bad}/200, k-means misses {km_bad}/100 (worst ratio {worst:.4})"),
    )
}

fn c2_spot_values() -> Verdict {
    let cfg = SystemConfig::urban_default();
    let bk = backhaul_path_loss_db(1.0).unwrap();
    let theta = optimal_elevation_angle(&cfg.env).unwrap();
    let residual = elevation_residual(theta, &cfg.env).abs();
    let deg = theta.to_degrees();
    let margin = |rr: f64| {
        let s = Scenario { area: Area::new(-1e4, 1e4, -1e4, 1e4), gbs: Point::new(0.0, 0.0), ues: vec![Point::new(rr, 0.0)] };
        let p = Placement { dbs: vec![], association: Association(vec![Tag::Gbs]), sinr_db: vec![None] };
        gbs_ue_link(0, &p, &s, &cfg).unwrap().sinr_db - cfg.gamma_th_db
    };
    let r_g = gbs_coverage_radius(&cfg);
    let r_bisect = bisect(1.0, 1e4, margin);
    let (k_lo, k_hi) = (k_lower_bound(450, &cfg), k_upper_bound(&cfg));
    let red = expected_complexity_reduction(&Area::new(0.0, 600.0, 0.0, 600.0), r_g);
    let pass = bk == 61.4
        && residual < 1e-12
        && deg > 42.0
        && deg < 43.0
        && (r_g - r_bisect).abs() <= 1e-6
        && k_lo == 5
        && k_hi == 6
        && red.valid
        && red.value > 0.70
        && red.value < 0.80;
    verdict(
        pass,
        format!(
            "backhaul loss {bk}, theta* {deg:.6} deg (residual {residual:.1e}), r_G {r_g:.6} m vs bisection {r_bisect:.6}, k bounds {k_lo}/{k_hi}, reduction {:.4}",
            red.value
        ),
    )
}

fn c3_partition_probabilities() -> Verdict {
    let area = Area::new(0.0, 600.0, 0.0, 600.0);
    let r_g = gbs_coverage_radius(&SystemConfig::urban_default());
    let want = partition_probabilities(&area, r_g);
    let mut r = rng(303);
    let samples = 10_000;
    let mut counts = [0usize; 3];
    for _ in 0..samples {
        let g = Point::new(r.random_range(0.0..600.0), r.random_range(0.0..600.0));
        counts[match classify_partition(&area, g, r_g).unwrap().kind {
            PartitionKind::None => 0,
            PartitionKind::SplitX | PartitionKind::SplitY => 1,
            PartitionKind::Quad => 2,
        }] += 1;
    }
    let freq = counts.map(|c| c as f64 / samples as f64);
    let exp = [want.p1, want.p2, want.p4];
    let worst = freq.iter().zip(exp).map(|(f, e)| (f - e).abs()).fold(0.0, f64::max);
    verdict(
        worst <= 0.02,
        format!("empirical {:.4}/{:.4}/{:.4} vs closed form {:.4}/{:.4}/{:.4}, max gap {worst:.4}", freq[0], freq[1], freq[2], exp[0], exp[1], exp[2]),
    )
}

fn report_mean(records: &[RunRecord], f: impl Fn(&droneplace::core::metrics::EvaluationReport) -> f64) -> f64 {
    mean(&records.iter().map(|r| f(r.report.as_ref().expect("run succeeded"))).collect::<Vec<_>>())
}

/// bkm, ddp and eddp at the comparison drone count on the reference preset.
fn comparison_runs() -> [Vec<RunRecord>; 3] {
    let s = generate_scenario(&reference_crowd(REFERENCE_N)).unwrap();
    let c = experiment_config();
    let seeds: Vec<u64> = (0..SEEDS).collect();
    Method::ALL.map(|m| run_experiment(&s, &c, m, &seeds, Some(COMPARISON_K), ExecPolicy::from_env()).unwrap())
}

fn c4_satisfaction(runs: &[Vec<RunRecord>; 3]) -> Verdict {
    let [bkm, ddp, eddp] = runs.each_ref().map(|r| 100.0 * report_mean(r, |rep| rep.satisfaction_rate));
    let ordered = eddp - ddp >= 5.0 && ddp - bkm >= 5.0;
    let windows = [(eddp, 68.0), (ddp, 54.0), (bkm, 38.0)];
    let within = windows.iter().all(|(got, target)| (got - target).abs() <= 10.0);
    verdict(
        ordered && within,
        format!(
            "mean satisfaction eddp {eddp:.1}% ddp {ddp:.1}% bkm {bkm:.1}% (targets 68/54/38 +-10): ordering with 5 pp gaps {}, windows {}",
            ok(ordered),
            ok(within)
        ),
    )
}

fn c5_sum_rate() -> Verdict {
    let s = generate_scenario(&reference_crowd(800)).unwrap();
    let c = experiment_config();
    let seeds: Vec<u64> = (0..SEEDS).collect();
    let k_bkm = baseline_k(&s, &c);
    let rate = |m: Method, k: Option<usize>| {
        let rs = run_experiment(&s, &c, m, &seeds, k, ExecPolicy::from_env()).unwrap();
        (report_mean(&rs, |r| r.sum_rate_bps), mean(&rs.iter().map(|r| r.k_final as f64).collect::<Vec<_>>()))
    };
    let (bkm, _) = rate(Method::Bkm, Some(k_bkm));
    let (ddp, k_ddp) = rate(Method::Ddp, None);
    let (eddp, k_eddp) = rate(Method::Eddp, None);
    let gbs_only = run_ddp(&s, &c, 0, &DdpOptions { k_override: Some(0), ..DdpOptions::default() }).unwrap();
    let gbs_rate = evaluate(&gbs_only.placement, &s, &c, FadingMode::Mean).sum_rate_bps;
    let pass = eddp >= 1.5 * ddp && ddp >= 1.3 * bkm && gbs_rate < 80e6;
    verdict(
        pass,
        format!(
            "N=800 mean sum rate eddp {:.1} Mbps (k {k_eddp:.2}), ddp {:.1} Mbps (k {k_ddp:.2}), bkm {:.1} Mbps (k {k_bkm}), GBS only {:.1} Mbps; eddp/ddp {:.3} (need 1.5), ddp/bkm {:.3} (need 1.3)",
            eddp / 1e6,
            ddp / 1e6,
            bkm / 1e6,
            gbs_rate / 1e6,
            eddp / ddp,
            ddp / bkm
        ),
    )
}

fn c6_overlap(runs: &[Vec<RunRecord>; 3]) -> Verdict {
    let [bkm, ddp, eddp] = runs.each_ref().map(|r| report_mean(r, |rep| rep.total_overlap_area_m2));
    verdict(
        eddp < ddp && ddp < bkm && eddp < 0.5 * bkm,
        format!("mean overlap eddp {eddp:.0} m2, ddp {ddp:.0} m2, bkm {bkm:.0} m2; eddp/bkm {:.3}", eddp / bkm),
    )
}

fn c7_runtime() -> Verdict {
    let mut spec = reference_crowd(REFERENCE_N);
    spec.gbs = Point::new(300.0, 300.0);
    let s = generate_scenario(&spec).unwrap();
    let c = experiment_config();
    let kind = classify_partition(&s.area, s.gbs, gbs_coverage_radius(&c)).unwrap().kind;
    let (mut t_ddp, mut t_eddp) = (0.0, 0.0);
    for seed in 0..SEEDS {
        let (o, t) = timed_run(&s, &c, Method::Ddp, seed, None, 1);
        o.unwrap();
        t_ddp += t.as_secs_f64();
        let (o, t) = timed_run(&s, &c, Method::Eddp, seed, None, 2);
        o.unwrap();
        t_eddp += t.as_secs_f64();
    }
    let ratio = t_eddp / t_ddp;
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    verdict(
        kind == PartitionKind::Quad && ratio <= 0.70,
        format!(
            "{kind:?} partition, mean wall time eddp {:.2} ms (2 region threads) vs ddp {:.2} ms, ratio {ratio:.3} (need <= 0.70), {cores} core(s)",
            1e3 * t_eddp / SEEDS as f64,
            1e3 * t_ddp / SEEDS as f64
        ),
    )
}

fn c8_invariants() -> Verdict {
    let mut sentinel_bad = 0;
    for seed in 0..50u64 {
        let mut r = rng(800 + seed);
        let gbs = Point::new(r.random_range(0.0..600.0), r.random_range(0.0..600.0));
        let s = clustered_scenario(800 + seed, r.random_range(1..=600), 600.0, gbs);
        let mut cfg = SystemConfig::urban_default();
        cfg.tau = 0.0;
        cfg.c_min_bps = 0.0;
        for o in [run_ddp(&s, &cfg, seed, &DdpOptions::default()).unwrap(), run_eddp(&s, &cfg, seed, &DdpOptions::default()).unwrap()] {
            if !o.feasible || o.placement.k() != 0 {
                sentinel_bad += 1;
            }
        }
    }
    // The property suites live in the test targets of both crates.
    let suites: &[&[&str]] = &[&["-p", "droneplace-core", "--tests"], &["-p", "droneplace", "--test", "harness"]];
    let mut summary = Vec::new();
    let mut suites_ok = true;
    for args in suites {
        let out = Command::new(env!("CARGO"))
            .arg("test")
            .args(*args)
            .arg("--offline")
            .current_dir(env!("CARGO_MANIFEST_DIR"))
            .output()
            .expect("cargo runs");
        let text = String::from_utf8_lossy(&out.stdout);
        let (mut passed, mut failed) = (0, 0);
        for line in text.lines().filter(|l| l.starts_with("test result:")) {
            let count = |word: &str| -> usize {
                line.split(';').find(|p| p.trim().ends_with(word)).and_then(|p| p.split_whitespace().rev().nth(1)).and_then(|n| n.parse().ok()).unwrap_or(0)
            };
            passed += count("passed");
            failed += count("failed");
        }
        suites_ok &= out.status.success() && failed == 0 && passed > 0;
        summary.push(format!("{}: {passed} passed, {failed} failed", args[1]));
    }
    verdict(
        sentinel_bad == 0 && suites_ok,
        format!("sentinel failures {sentinel_bad}/100 runs on 50 scenarios; suites {}", summary.join(", ")),
    )
}

fn c9_determinism() -> Verdict {
    let s = generate_scenario(&reference_crowd(REFERENCE_N)).unwrap();
    let c = experiment_config();
    let vary: Vary = "tau=0.2:0.6:0.2".parse().unwrap();
    let seeds: Vec<u64> = (0..5).collect();
    let run = |p: ExecPolicy| sweep(&s, &c, &vary, &Method::ALL, &seeds, None, p).unwrap().results_csv().unwrap();
    let a = run(ExecPolicy::sequential());
    let b = run(ExecPolicy::sequential());
    let threaded = run(ExecPolicy { run_threads: 4, region_threads: 2 });
    verdict(a == b && a == threaded, format!("{} CSV bytes; rerun identical {}, 4 run threads x 2 region threads identical {}", a.len(), a == b, a == threaded))
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "missed"
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
    let mut report = |id: usize, name: &'static str, v: Verdict| {
        println!("criterion {id} [{name}]: {} | {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, name, v));
    };
    report(1, "oracle equivalence", c1_oracles());
    report(2, "analytic spot values", c2_spot_values());
    report(3, "partition probabilities", c3_partition_probabilities());
    let runs = comparison_runs();
    report(4, "satisfaction ordering", c4_satisfaction(&runs));
    report(5, "sum-rate ordering", c5_sum_rate());
    report(6, "overlap reduction", c6_overlap(&runs));
    report(7, "runtime", c7_runtime());
    report(8, "invariant suites", c8_invariants());
    report(9, "determinism", c9_determinism());
    let failed: Vec<usize> = results.iter().filter(|(_, _, v)| !v.pass).map(|(id, _, _)| *id).collect();
    println!("acceptance: {} of {} criteria pass in {:.1} s", results.len() - failed.len(), results.len(), start.elapsed().as_secs_f64());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
