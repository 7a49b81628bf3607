//! Effect-size, grouping and t-test checks against independent references.

use crossind_core::analysis::{
    candidate_sets, error_stats, eta, eta_from_stats, ln_gamma, pooled_t_test, search_grouping, Group,
};
use crossind_core::dataset::{Region, WindowSpec};
use crossind_core::harness::{EvaluationResult, FoldOutcome};
use crossind_core::CompetitiveLevel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn oracle_mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn oracle_sd(v: &[f64]) -> f64 {
    let m = oracle_mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Exhaustive search over level bitmasks of size one or two.
fn brute_force(pitchers: &[(CompetitiveLevel, f64)]) -> (u32, f64) {
    let mut best = (0u32, f64::NEG_INFINITY);
    let mut masks: Vec<u32> = (0u32..32).filter(|m| m.count_ones() == 1).collect();
    let mut pairs: Vec<u32> = (0u32..32).filter(|m| m.count_ones() == 2).collect();
    // singletons in level order, then pairs ordered by (lower, higher) level
    masks.sort_by_key(|m| m.trailing_zeros());
    pairs.sort_by_key(|m| (m.trailing_zeros(), 31 - m.leading_zeros()));
    masks.extend(pairs);
    for mask in masks {
        let inside = |l: CompetitiveLevel| mask & (1 << l.index()) != 0;
        let a: Vec<f64> = pitchers.iter().filter(|p| inside(p.0)).map(|p| p.1).collect();
        let b: Vec<f64> = pitchers.iter().filter(|p| !inside(p.0)).map(|p| p.1).collect();
        if a.len() < 2 || b.len() < 2 {
            continue;
        }
        let e = (oracle_mean(&a) - oracle_mean(&b)).abs() / (oracle_sd(&a) + oracle_sd(&b));
        if e > best.1 {
            best = (mask, e);
        }
    }
    best
}

fn random_fixture(rng: &mut ChaCha8Rng) -> Vec<(CompetitiveLevel, f64)> {
    let mut out = Vec::new();
    for level in CompetitiveLevel::ALL {
        let n = rng.random_range(1..=8);
        let centre = 70.0 + 4.0 * level.index() as f64 + rng.random_range(-6.0..6.0);
        for _ in 0..n {
            out.push((level, centre + rng.random_range(-5.0..5.0)));
        }
    }
    out
}

#[test]
fn eta_on_reported_group_statistics() {
    let e = eta_from_stats(84.54, 4.39, 77.60, 4.41).unwrap();
    assert!((e - 0.789).abs() <= 1e-3, "{e}");
}

#[test]
fn exactly_fifteen_distinct_candidates() {
    let sets = candidate_sets();
    assert_eq!(sets.len(), 15);
    let mut masks: Vec<u32> = sets.iter().map(|s| s.iter().map(|l| 1u32 << l.index()).sum()).collect();
    masks.sort_unstable();
    masks.dedup();
    assert_eq!(masks.len(), 15);
    assert!(masks.iter().all(|m| (1..=2).contains(&m.count_ones())));
}

#[test]
fn grouping_search_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let pitchers = random_fixture(&mut rng);
        let (mask, oracle_eta) = brute_force(&pitchers);
        let search = search_grouping(&pitchers).unwrap();
        assert_eq!(search.candidates.len(), 15);
        let got: u32 = search.best.intermediate.iter().map(|l| 1u32 << l.index()).sum();
        let got_eta = search.best.eta.unwrap();
        assert!(
            (got_eta - oracle_eta).abs() < 1e-12,
            "case {case}: {got_eta} vs {oracle_eta}"
        );
        assert_eq!(got, mask, "case {case}");
        assert_eq!(search.best.n_intermediate + search.best.n_expert, pitchers.len());
    }
}

#[test]
fn missing_level_is_an_error() {
    let pitchers: Vec<_> = CompetitiveLevel::ALL[..4]
        .iter()
        .flat_map(|&l| [(l, 80.0), (l, 82.0)])
        .collect();
    assert!(search_grouping(&pitchers).is_err());
}

#[test]
fn t_test_hand_fixture() {
    // means 5 and 3, pooled variance 28/5, df 5
    let r = pooled_t_test(&[2.0, 4.0, 6.0, 8.0], &[1.0, 3.0, 5.0]).unwrap();
    let pooled: f64 = 28.0 / 5.0;
    let t = 2.0 / (pooled * (1.0 / 4.0 + 1.0 / 3.0)).sqrt();
    assert_eq!(r.df, 5);
    assert!((r.t - t).abs() < 1e-6);
    assert!((r.cohen_d - 2.0 / pooled.sqrt()).abs() < 1e-6);
    assert!((r.mean_a - 5.0).abs() < 1e-12 && (r.mean_b - 3.0).abs() < 1e-12);
}

/// Pooled two-sample t and Cohen's d written out from sums of squares.
fn oracle_t_and_d(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ss = |v: &[f64]| {
        let m = oracle_mean(v);
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>()
    };
    let pooled = (ss(a) + ss(b)) / (na + nb - 2.0);
    let diff = oracle_mean(a) - oracle_mean(b);
    (diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt(), diff / pooled.sqrt())
}

#[test]
fn t_and_d_match_the_formula_on_random_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    for case in 0..100 {
        let a: Vec<f64> = (0..rng.random_range(2..25))
            .map(|_| rng.random_range(-3.0..5.0))
            .collect();
        let b: Vec<f64> = (0..rng.random_range(2..25))
            .map(|_| rng.random_range(-4.0..3.0))
            .collect();
        let r = pooled_t_test(&a, &b).unwrap();
        let (t, d) = oracle_t_and_d(&a, &b);
        assert_eq!(r.df, a.len() + b.len() - 2);
        assert!((r.t - t).abs() < 1e-6, "case {case}: t {} vs {t}", r.t);
        assert!((r.cohen_d - d).abs() < 1e-6, "case {case}: d {} vs {d}", r.cohen_d);
    }
}

#[test]
fn identical_samples_give_t_zero_and_p_one() {
    let a = [1.5, 2.5, 4.0, 7.25];
    let r = pooled_t_test(&a, &a).unwrap();
    assert!(r.t.abs() < 1e-12);
    assert!((r.p - 1.0).abs() < 1e-12);
    assert!(r.cohen_d.abs() < 1e-12);
}

#[test]
fn zero_variance_is_an_error() {
    let err = pooled_t_test(&[2.0, 2.0, 2.0], &[5.0, 5.0]).unwrap_err();
    assert!(err.to_string().contains("variance"), "{err}");
}

#[test]
fn degrees_of_freedom_for_reported_group_sizes() {
    let a: Vec<f64> = (0..14).map(|i| (i as f64).sin()).collect();
    let b: Vec<f64> = (0..36).map(|i| (i as f64).cos()).collect();
    assert_eq!(pooled_t_test(&a, &b).unwrap().df, 48);
}

#[test]
fn p_values_match_reference_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..100 {
        let na = rng.random_range(2..30);
        let nb = rng.random_range(2..30);
        let shift = rng.random_range(-2.0..2.0);
        let a: Vec<f64> = (0..na).map(|_| rng.random_range(-1.0..1.0) + shift).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = pooled_t_test(&a, &b).unwrap();
        let reference = StudentsT::new(0.0, 1.0, r.df as f64).unwrap();
        let p = 2.0 * reference.cdf(-r.t.abs());
        assert!((r.p - p).abs() < 1e-4, "case {case}: p {} vs {p}", r.p);
    }
}

#[test]
fn ln_gamma_matches_reference() {
    for x in [0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 24.5, 100.0] {
        let expect = statrs::function::gamma::ln_gamma(x);
        assert!((ln_gamma(x) - expect).abs() < 1e-10, "x={x}");
    }
}

fn fold(id: &str, level: CompetitiveLevel, errors: &[f64]) -> FoldOutcome {
    let truths = vec![80.0; errors.len()];
    let predictions: Vec<f64> = errors.iter().map(|e| 80.0 + e).collect();
    FoldOutcome {
        fold: 0,
        test_pitcher_id: id.into(),
        level,
        mean_prediction: oracle_mean(&predictions),
        mean_truth: 80.0,
        predictions,
        truths,
        epochs_run: 1,
        final_train_r2: 0.0,
        seed: 0,
    }
}

#[test]
fn per_pitcher_error_statistics() {
    let levels = [
        (CompetitiveLevel::HighSchool, 3),
        (CompetitiveLevel::Collegiate, 2),
        (CompetitiveLevel::Industrial, 2),
        (CompetitiveLevel::Independent, 2),
        (CompetitiveLevel::Professional, 2),
    ];
    let pitchers: Vec<(CompetitiveLevel, f64)> = levels
        .iter()
        .flat_map(|&(l, n)| (0..n).map(move |i| (l, 70.0 + 5.0 * l.index() as f64 + i as f64)))
        .collect();
    let grouping = search_grouping(&pitchers).unwrap().best;

    let mut folds = vec![fold("P0", CompetitiveLevel::HighSchool, &[2.0, -2.0, 0.0, 0.0, 0.0])];
    folds.push(fold("P1", CompetitiveLevel::Professional, &[1.0; 5]));
    let eval = EvaluationResult {
        spec: "gnn_gru:2,32".parse().unwrap(),
        region: Region::WholeBody,
        window: WindowSpec::FULL,
        repeat: 0,
        parameters: 0,
        folds,
        r2: 0.0,
    };
    let stats = error_stats(&eval, &grouping, None).unwrap();
    let p0 = &stats.pitchers[0];
    assert!((p0.mae - 0.8).abs() < 1e-12);
    assert!(p0.signed.abs() < 1e-12);
    assert!((stats.pitchers[1].signed - 1.0).abs() < 1e-12);
    assert_eq!(
        p0.group == Group::Intermediate,
        grouping.is_intermediate(CompetitiveLevel::HighSchool)
    );

    let roster = vec!["P0".to_string(), "P9".to_string()];
    assert!(error_stats(&eval, &grouping, Some(&roster)).is_err());
}

proptest! {
    #[test]
    fn absolute_error_bounds_signed_error(
        errors in prop::collection::vec(prop::collection::vec(-6.0f64..6.0, 1..6), 2..6),
    ) {
        let folds: Vec<FoldOutcome> = errors
            .iter()
            .enumerate()
            .map(|(i, e)| fold(&format!("P{i}"), CompetitiveLevel::ALL[i % 5], e))
            .collect();
        let eval = EvaluationResult {
            spec: "gnn_gru:2,32".parse().unwrap(),
            region: Region::WholeBody,
            window: WindowSpec::FULL,
            repeat: 0,
            parameters: 0,
            folds,
            r2: 0.0,
        };
        let pitchers: Vec<(CompetitiveLevel, f64)> = CompetitiveLevel::ALL
            .iter()
            .flat_map(|&l| [(l, 70.0 + l.index() as f64), (l, 71.5 + l.index() as f64)])
            .collect();
        let grouping = search_grouping(&pitchers).unwrap().best;
        let stats = error_stats(&eval, &grouping, None).unwrap();
        for p in &stats.pitchers {
            prop_assert!(p.mae + 1e-12 >= p.signed.abs());
        }
    }

    #[test]
    fn eta_is_invariant_to_shift_scale_and_order(
        a in prop::collection::vec(-50.0f64..50.0, 2..12),
        b in prop::collection::vec(-50.0f64..50.0, 2..12),
        shift in -100.0f64..100.0,
        scale in 0.1f64..10.0,
    ) {
        prop_assume!(oracle_sd(&a) + oracle_sd(&b) > 1e-6);
        let base = eta(&a, &b).unwrap();
        let t = |v: &[f64]| v.iter().map(|x| scale * x + shift).collect::<Vec<_>>();
        let moved = eta(&t(&a), &t(&b)).unwrap();
        prop_assert!((base - moved).abs() <= 1e-9 * base.max(1.0));
        prop_assert!((base - eta(&b, &a).unwrap()).abs() <= 1e-12 * base.max(1.0));
        prop_assert!(base >= 0.0);
    }

    #[test]
    fn p_value_is_a_probability_and_symmetric(
        a in prop::collection::vec(-5.0f64..5.0, 2..15),
        b in prop::collection::vec(-5.0f64..5.0, 2..15),
    ) {
        prop_assume!(oracle_sd(&a) + oracle_sd(&b) > 1e-6);
        let ab = pooled_t_test(&a, &b).unwrap();
        let ba = pooled_t_test(&b, &a).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab.p));
        prop_assert!((ab.t + ba.t).abs() < 1e-9 * ab.t.abs().max(1.0));
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
    }
}
