mod common;

use common::*;
use dafl::eval::*;
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn wilcoxon_exact_matches_enumeration() {
    let mut r = rng(42);
    for case in 0..100 {
        let n = 1 + case % 10;
        // coarse values so ties and zero differences occur
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(0..6) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| r.gen_range(0..6) as f64).collect();
        let w = wilcoxon_signed_rank(&x, &y).unwrap();
        let oracle = wilcoxon_enumeration(&x, &y);
        assert!((w.p_value - oracle).abs() < 1e-12, "case {case}: {} vs {oracle}", w.p_value);
    }
}

#[test]
fn wilcoxon_hand_cases() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    assert_eq!(wilcoxon_signed_rank(&x, &x).unwrap().p_value, 1.0);
    let y = [0.5, 1.0, 1.5, 2.0, 2.5];
    let w = wilcoxon_signed_rank(&x, &y).unwrap();
    assert_eq!(w.statistic, 0.0);
    assert!((w.p_value - 0.0625).abs() < 1e-12);
    assert!(wilcoxon_signed_rank(&x, &y[..4]).is_err());
}

#[test]
fn wilcoxon_normal_approximation_is_close_at_twenty() {
    let mut r = rng(7);
    for _ in 0..20 {
        let x: Vec<f64> = (0..20).map(|_| r.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..20).map(|_| r.gen_range(-1.0..1.0) + 0.2).collect();
        let exact = wilcoxon_enumeration(&x, &y);
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let mut abs: Vec<(f64, usize)> = d.iter().map(|v| v.abs()).zip(0..).collect();
        abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut plus = 0.0;
        for (rank, &(_, i)) in abs.iter().enumerate() {
            if d[i] > 0.0 {
                plus += rank as f64 + 1.0;
            }
        }
        let n: f64 = 20.0;
        let mean = n * (n + 1.0) / 4.0;
        let sd = (n * (n + 1.0) * (2.0 * n + 1.0) / 24.0).sqrt();
        let w = plus.min(n * (n + 1.0) / 2.0 - plus);
        let zval = (w - mean + 0.5) / sd;
        let normal = Normal::new(0.0, 1.0).unwrap().cdf(zval);
        assert!(((2.0 * normal).min(1.0) - exact).abs() < 0.01);
        assert!((wilcoxon_signed_rank(&x, &y).unwrap().p_value - exact).abs() < 1e-12);
    }
}

#[test]
fn friedman_hand_case() {
    let m = RankMatrix::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec!["1".into(), "2".into(), "3".into()],
        vec![vec![0.9, 0.8, 0.7]; 3],
    )
    .unwrap();
    let (stat, p) = friedman_test(&m).unwrap();
    assert!((stat - 6.0).abs() < 1e-12);
    assert!((p - (-3.0f64).exp()).abs() < 1e-10);
}

#[test]
fn friedman_identical_columns() {
    let m = RankMatrix::new(
        vec!["a".into(), "b".into()],
        vec!["1".into(), "2".into()],
        vec![vec![0.5, 0.5], vec![0.7, 0.7]],
    )
    .unwrap();
    assert_eq!(friedman_test(&m).unwrap(), (0.0, 1.0));
}

#[test]
fn holm_examples() {
    let (adj, rej) = holm_adjust(&[0.01, 0.02, 0.04], 0.05).unwrap();
    for (a, e) in adj.iter().zip([0.03, 0.04, 0.04]) {
        assert!((a - e).abs() < 1e-15);
    }
    assert_eq!(rej, vec![true, true, true]);
    let (_, rej) = holm_adjust(&[0.03, 0.03, 0.03], 0.05).unwrap();
    assert_eq!(rej, vec![false; 3]);
    assert_eq!(holm_adjust(&[0.2], 0.05).unwrap().0, vec![0.2]);
}

#[test]
fn bootstrap_equals_sequential_oracle() {
    let labels: Vec<usize> = (0..10).collect();
    let mut pred = labels.clone();
    for p in &mut pred[7..] {
        *p += 1;
    }
    let ours = bootstrap_accuracies(&pred, &labels, 500, 99).unwrap();
    assert_eq!(ours, bootstrap_oracle(&pred, &labels, 500, 99));
    let ci = bootstrap_ci(&pred, &labels, 500, 1.96, 99).unwrap();
    assert!((ci.halfwidth * (ci.n_tests as f64).sqrt() / ci.sigma - 1.96).abs() < 1e-12);
}

proptest! {
    #[test]
    fn rank_rows_sum_to_constant(seed in 0u64..100_000, m in 2usize..7) {
        let mut r = rng(seed);
        let row: Vec<f64> = (0..m).map(|_| r.gen_range(0..4) as f64).collect();
        let ranks = average_ranks(&row);
        let total: f64 = ranks.iter().sum();
        prop_assert!((total - (m * (m + 1)) as f64 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn holm_adjusted_is_monotone_and_bounded(ps in proptest::collection::vec(0.0f64..=1.0, 1..12)) {
        let (adj, _) = holm_adjust(&ps, 0.05).unwrap();
        let mut order: Vec<usize> = (0..ps.len()).collect();
        order.sort_by(|&a, &b| ps[a].partial_cmp(&ps[b]).unwrap());
        for w in order.windows(2) {
            prop_assert!(adj[w[1]] >= adj[w[0]]);
        }
        for (a, p) in adj.iter().zip(&ps) {
            prop_assert!(*a >= *p && *a <= 1.0);
        }
    }

    #[test]
    fn friedman_invariant_under_column_permutation(seed in 0u64..100_000) {
        let mut r = rng(seed);
        let acc: Vec<Vec<f64>> = (0..5).map(|_| (0..4).map(|_| r.gen_range(0.0..1.0)).collect()).collect();
        let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let blocks: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let a = friedman_test(&RankMatrix::new(names.clone(), blocks.clone(), acc.clone()).unwrap()).unwrap();
        let perm: Vec<Vec<f64>> = acc.iter().map(|row| vec![row[2], row[0], row[3], row[1]]).collect();
        let b = friedman_test(&RankMatrix::new(names, blocks, perm).unwrap()).unwrap();
        prop_assert!((a.0 - b.0).abs() < 1e-9);
    }
}

#[test]
fn report_round_trip_and_cliques() {
    let dir = tempfile::tempdir().unwrap();
    let m = RankMatrix::new(
        vec!["x".into(), "y".into(), "z".into()],
        (0..8).map(|i| i.to_string()).collect(),
        (0..8).map(|i| vec![0.5 + i as f64 * 0.001, 0.5 + i as f64 * 0.002, 0.49]).collect(),
    )
    .unwrap();
    let report = significance_report(&m, 0.05).unwrap();
    let path = dir.path().join("sig.json");
    export_report(&report, &path).unwrap();
    assert_eq!(load_report(&path).unwrap(), report);
    for row in report.adjusted_p.iter().zip(&report.raw_p) {
        for (a, r) in row.0.iter().zip(row.1) {
            assert!(a >= r && *a <= 1.0);
        }
    }
}
