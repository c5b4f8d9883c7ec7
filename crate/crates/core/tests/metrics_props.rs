mod common;

use common::*;
use droneplace_core::geometry::{circle_overlap_area, Circle};
use droneplace_core::metrics::{empirical_distribution, evaluate, serving_links, summarize, total_overlap_area, FadingMode};
use droneplace_core::model::{db_to_linear, Point, SystemConfig, Tag};
use proptest::prelude::*;

fn cases() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

proptest! {
    #![proptest_config(cases())]

    #[test]
    fn mean_evaluation_is_pure(seed in any::<u64>(), n in 1usize..40, k in 0usize..6) {
        let cfg = SystemConfig::urban_default();
        let s = uniform_scenario(seed, n, 600.0);
        let p = random_placement(seed, &s, k, &cfg);
        let here = serde_json::to_string(&evaluate(&p, &s, &cfg, FadingMode::Mean)).unwrap();
        let again = serde_json::to_string(&evaluate(&p, &s, &cfg, FadingMode::Mean)).unwrap();
        prop_assert_eq!(&here, &again);
        let there = std::thread::scope(|sc| {
            sc.spawn(|| serde_json::to_string(&evaluate(&p, &s, &cfg, FadingMode::Mean)).unwrap()).join().unwrap()
        });
        prop_assert_eq!(here, there);
    }

    #[test]
    fn sampled_evaluation_is_reproducible(seed in any::<u64>(), fade in any::<u64>(), n in 1usize..40, k in 0usize..6) {
        let cfg = SystemConfig::urban_default();
        let s = uniform_scenario(seed, n, 600.0);
        let p = random_placement(seed, &s, k, &cfg);
        let a = evaluate(&p, &s, &cfg, FadingMode::Sampled { seed: fade });
        let b = evaluate(&p, &s, &cfg, FadingMode::Sampled { seed: fade });
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn report_totals_are_consistent(seed in any::<u64>(), n in 1usize..40, k in 0usize..6) {
        let cfg = SystemConfig::urban_default();
        let s = uniform_scenario(seed, n, 600.0);
        let p = random_placement(seed, &s, k, &cfg);
        let r = evaluate(&p, &s, &cfg, FadingMode::Mean);
        prop_assert_eq!(r.satisfaction_rate, r.satisfied_count as f64 / n as f64);
        prop_assert_eq!(r.satisfied_count, r.per_ue.iter().filter(|u| u.satisfied).count());
        let sum: f64 = r.per_ue.iter().filter(|u| u.sinr_ok).map(|u| u.rate_bps).sum();
        prop_assert!((r.sum_rate_bps - sum).abs() <= 1e-9 * sum.max(1.0));
    }

    #[test]
    fn overlap_is_zero_iff_no_disks_meet(seed in any::<u64>(), k in 0usize..7) {
        let cfg = SystemConfig::urban_default();
        let s = uniform_scenario(seed, 1, 800.0);
        let p = random_placement(seed, &s, k, &cfg);
        let disks: Vec<Circle> = p.dbs.iter().map(|d| Circle::new(d.center(), d.radius_m)).collect();
        let meet = (0..k).any(|a| (a + 1..k).any(|b| disks[a].center.distance(disks[b].center) < disks[a].radius + disks[b].radius));
        let total = total_overlap_area(&p);
        prop_assert_eq!(total > 0.0, meet, "total {}", total);
        let pairwise: f64 = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).map(|(a, b)| circle_overlap_area(&disks[a], &disks[b])).sum();
        prop_assert!((total - pairwise).abs() <= 1e-9 * pairwise.max(1.0));
    }

    #[test]
    fn degrading_a_link_never_helps(seed in any::<u64>(), n in 1usize..40, k in 0usize..6, pick in any::<prop::sample::Index>()) {
        let cfg = SystemConfig::urban_default();
        let s = uniform_scenario(seed, n, 600.0);
        let p = random_placement(seed, &s, k, &cfg);
        let mut links = serving_links(&p, &s, &cfg, FadingMode::Mean);
        let before = summarize(&p, &s, &cfg, &links);
        let i = pick.index(n);
        if let Some(l) = links[i].as_mut() {
            l.sinr_db = cfg.gamma_th_db - 1.0;
            l.rate_bps = l.bandwidth_hz * (1.0 + db_to_linear(l.sinr_db)).log2();
            l.meets_threshold = false;
        }
        let after = summarize(&p, &s, &cfg, &links);
        prop_assert!(after.sum_rate_bps <= before.sum_rate_bps);
        prop_assert!(after.satisfied_count <= before.satisfied_count);
    }

    #[test]
    fn empirical_distribution_is_normalised(values in prop::collection::vec(-1e6f64..1e6, 1..300), bins in 1usize..50) {
        let d = empirical_distribution(&values, bins).unwrap();
        prop_assert!((d.pdf.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for w in d.cdf.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        prop_assert_eq!(*d.cdf.last().unwrap(), 1.0);
        prop_assert_eq!(d.edges.len(), bins + 1);
    }
}

#[test]
fn sampled_fading_averages_to_the_mean_channel() {
    let cfg = SystemConfig::urban_default();
    let s = clustered_scenario(3, 300, 600.0, Point::new(300.0, 300.0));
    let p = random_placement(3, &s, 4, &cfg);
    let gbs: Vec<usize> = (0..s.ues.len()).filter(|&i| p.association.get(i) == Tag::Gbs).collect();
    assert!(gbs.len() >= 20);
    let mean_links = serving_links(&p, &s, &cfg, FadingMode::Mean);
    let reference: f64 = gbs.iter().map(|&i| db_to_linear(mean_links[i].unwrap().sinr_db)).sum::<f64>() / gbs.len() as f64;
    let seeds = 1000u64;
    let mut total = 0.0;
    for seed in 0..seeds {
        let links = serving_links(&p, &s, &cfg, FadingMode::Sampled { seed });
        total += gbs.iter().map(|&i| db_to_linear(links[i].unwrap().sinr_db)).sum::<f64>();
    }
    let sampled = total / (seeds as f64 * gbs.len() as f64);
    assert!((sampled / reference - 1.0).abs() <= 0.05, "{sampled} vs {reference}");
}
