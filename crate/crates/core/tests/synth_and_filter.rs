use evalpulse_core::dataset::{filter_items, EvaluationDataset, FilterConfig, Item, Timestamp, SECONDS_PER_DAY};
use evalpulse_core::distfit::{best_fit, Family};
use evalpulse_core::synth::{gen_lognormal_counts, Gibrat, SynthConfig};
use proptest::prelude::*;

#[test]
fn lognormal_counts_have_the_planted_log_mean() {
    let counts = gen_lognormal_counts(100_000, 5.492, 2.28, 1).unwrap();
    let mean = counts.iter().map(|&c| (c as f64).ln()).sum::<f64>() / counts.len() as f64;
    assert!((mean - 5.492).abs() < 0.03, "mean {mean}");
}

#[test]
fn gibrat_growth_from_a_large_start_selects_lognormal() {
    // starting at 100 keeps the rounded counts away from the floor at 1
    let counts = Gibrat { steps: 100, shock_sd: 0.2, initial: 100.0 }.counts(100_000, 2).unwrap();
    let samples: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let xmin = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let report = best_fit(&samples, xmin).unwrap();
    assert_eq!(report.best, Family::Lognormal);
    assert!(report.significant_winner);
    assert!(report.comparisons.iter().all(|c| c.r > 0.0 && c.p < 0.05), "{:?}", report.comparisons);
}

#[test]
fn synth_config_generation_is_deterministic() {
    let cfg = SynthConfig {
        seed: 3,
        n: 50,
        likes: evalpulse_core::synth::CountModel::Lognormal { mu: 2.0, sigma: 1.0 },
        dislikes: evalpulse_core::synth::CountModel::Lognormal { mu: 1.0, sigma: 1.0 },
        knot_model: None,
        emotion_model: None,
    };
    let a = cfg.generate().unwrap();
    let b = cfg.generate().unwrap();
    assert_eq!(a.dataset, b.dataset);
    assert!(a.dataset.items().iter().all(|i| i.likes >= 1 && i.dislikes >= 1));
}

fn fixture_dataset(rows: &[(u64, u64, Option<i64>, bool)]) -> EvaluationDataset {
    let as_of = Timestamp(1_600_000_000);
    let items = rows
        .iter()
        .enumerate()
        .map(|(i, &(l, d, age, english))| {
            let text = if english { "the title of this item" } else { "der titel ist hier" };
            let mut item = Item::new(format!("i{i}"), text, l, d);
            if let Some(days) = age {
                item = item.created(Timestamp(as_of.0 - days * SECONDS_PER_DAY));
            }
            item
        })
        .collect();
    EvaluationDataset::new(items, "fixture", as_of).unwrap()
}

fn english(text: &str) -> bool {
    text.starts_with("the")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn filtering_is_idempotent(rows in prop::collection::vec((0u64..5, 0u64..5, prop::option::of(0i64..800), any::<bool>()), 0..30)) {
        let cfg = FilterConfig::default();
        let (once, report1) = filter_items(fixture_dataset(&rows), &cfg, english);
        let (twice, report2) = filter_items(once.clone(), &cfg, english);
        prop_assert_eq!(once.items(), twice.items());
        prop_assert_eq!(report2.counts(), (report1.n_ld, report1.n_ld, report1.n_ld));
        prop_assert!(report1.n_crawled >= report1.n_year && report1.n_year >= report1.n_ld);
    }
}
