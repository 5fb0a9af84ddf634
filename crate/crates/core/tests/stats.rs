mod common;

use common::{doubled_midranks, enumerated_rank_sum_p, hand_mean_ranks};
use hhofenn::stats::{
    average_ranks, compare, friedman_mean_rank, rank_sum_exact, rank_sum_normal, summarize_values, wilcoxon_rank_sum,
    PValueMethod, RankSumOutcome, RankTable, WinnerFlag,
};
use proptest::prelude::*;

fn p_of(a: &[f64], b: &[f64]) -> f64 {
    wilcoxon_rank_sum(a, b).unwrap().p_value()
}

#[test]
fn known_small_sample_p_values() {
    // Complete separation of 3 vs 3: 2 of 20 arrangements are as extreme.
    assert!((p_of(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]) - 0.1).abs() < 1e-15);
    // 5 vs 5 separation: 2 / C(10, 5).
    let a = [1.0, 2.0, 3.0, 4.0, 5.0];
    let b = [6.0, 7.0, 8.0, 9.0, 10.0];
    assert!((p_of(&a, &b) - 2.0 / 252.0).abs() < 1e-15);
}

#[test]
fn large_samples_switch_to_the_normal_approximation() {
    let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
    let b: Vec<f64> = (0..30).map(|i| i as f64 + 10.5).collect();
    match wilcoxon_rank_sum(&a, &b).unwrap() {
        RankSumOutcome::Test(t) => assert_eq!(t.method, PValueMethod::NormalApproximation),
        RankSumOutcome::Degenerate => panic!("not degenerate"),
    }
    // Close to the exact value where both are available.
    let a: Vec<f64> = (0..8).map(|i| i as f64 * 1.3).collect();
    let b: Vec<f64> = (0..8).map(|i| i as f64 * 1.1 + 2.0).collect();
    let exact = rank_sum_exact(&a, &b).unwrap().p_value;
    let normal = rank_sum_normal(&a, &b).unwrap().p_value;
    assert!((exact - normal).abs() < 0.02, "{exact} vs {normal}");
}

#[test]
fn compare_flags_follow_direction_and_significance() {
    let low: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let high: Vec<f64> = (0..10).map(|i| 100.0 + i as f64).collect();
    assert_eq!(compare(&low, &high, 0.05).unwrap().flag, WinnerFlag::Winner);
    assert_eq!(compare(&high, &low, 0.05).unwrap().flag, WinnerFlag::Loser);
    assert_eq!(compare(&low, &low, 0.05).unwrap().flag, WinnerFlag::Equal);
    let same = [0.0; 4];
    let c = compare(&same, &same, 0.05).unwrap();
    assert!(c.outcome.is_degenerate() && c.outcome.p_value().is_nan());
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(wilcoxon_rank_sum(&[], &[1.0]).is_err());
    assert!(wilcoxon_rank_sum(&[f64::NAN], &[1.0]).is_err());
    assert!(summarize_values(&[]).is_err());
    let table = RankTable {
        functions: vec!["f".into()],
        algorithms: vec!["a".into(), "b".into()],
        cells: vec![vec![1.0, 2.0]],
    };
    assert!(friedman_mean_rank(&table).is_err());
}

#[test]
fn summary_uses_the_sample_deviation() {
    let s = summarize_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(s.mean, 2.5);
    assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    let one = summarize_values(&[7.0]).unwrap();
    assert!(one.single_run && one.std == 0.0);
}

proptest! {
    #[test]
    fn exact_test_matches_enumeration(
        a in prop::collection::vec(0u8..5, 1..6),
        b in prop::collection::vec(0u8..5, 1..6),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        if let RankSumOutcome::Test(t) = wilcoxon_rank_sum(&a, &b).unwrap() {
            prop_assert!((t.p_value - enumerated_rank_sum_p(&a, &b)).abs() <= 1e-12);
        }
    }

    #[test]
    fn p_value_is_symmetric_and_a_probability(
        a in prop::collection::vec(-10.0f64..10.0, 1..15),
        b in prop::collection::vec(-10.0f64..10.0, 1..15),
    ) {
        let (p, q) = (p_of(&a, &b), p_of(&b, &a));
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p - q).abs() <= 1e-12);
    }

    #[test]
    fn ranks_are_midranks(v in prop::collection::vec(0u8..6, 1..20)) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let ranks = average_ranks(&v);
        let n = v.len() as f64;
        prop_assert!((ranks.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
        for (r, d) in ranks.iter().zip(doubled_midranks(&v)) {
            prop_assert_eq!(*r * 2.0, d as f64);
        }
    }

    #[test]
    fn friedman_matches_hand_ranks(rows in prop::collection::vec(prop::collection::vec(0u8..4, 3), 2..7)) {
        let cells: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect();
        let table = RankTable {
            functions: (0..cells.len()).map(|i| i.to_string()).collect(),
            algorithms: vec!["a".into(), "b".into(), "c".into()],
            cells: cells.clone(),
        };
        let got = friedman_mean_rank(&table).unwrap();
        for (g, h) in got.mean_ranks.iter().zip(hand_mean_ranks(&cells)) {
            prop_assert!((g - h).abs() < 1e-12);
        }
        prop_assert!((got.mean_ranks.iter().sum::<f64>() - 6.0).abs() < 1e-9);
    }
}
