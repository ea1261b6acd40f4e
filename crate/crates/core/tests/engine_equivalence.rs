//! End-to-end filter-and-refine answers checked against brute-force scans
//! that never touch the index or the fast transform.

mod common;

use common::{brute_pairs, brute_range, brute_top_k, naive_dft, oracle_normalize};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specsim::datagen::{random_walk, GenKind, GenSpec};
use specsim::engine::Engine;
use specsim::metrics::RegionPolicy;
use specsim::signal::TimeSequence;

fn walk_dataset(count: usize, length: usize, seed: u64) -> Vec<TimeSequence> {
    random_walk(&GenSpec {
        kind: GenKind::RandomWalk { step_bound: 500.0 },
        count,
        length,
        seed,
    })
    .unwrap()
}

fn oracle_data(seqs: &[TimeSequence]) -> Vec<(String, Vec<f64>)> {
    seqs.iter()
        .map(|s| (s.id().to_string(), oracle_normalize(s.values())))
        .collect()
}

fn oracle_dist(a: &[f64], b: &[f64]) -> f64 {
    common::oracle_euclidean(a, b)
}

#[test]
fn range_answers_match_brute_force_under_both_policies() {
    let seqs = walk_dataset(300, 128, 42);
    let data = oracle_data(&seqs);
    let (engine, _) = Engine::index_dataset(seqs.clone(), 2, 16).unwrap();
    let max_amp = engine.max_amp().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    for round in 0..30 {
        let q = seqs.choose(&mut rng).unwrap();
        let eps = max_amp * [0.3, 0.5, 0.95][round % 3];
        let expected = brute_range(&data, &oracle_normalize(q.values()), eps, oracle_dist);

        let base = engine.range_query(q, eps, RegionPolicy::Baseline).unwrap();
        let sym = engine.range_query(q, eps, RegionPolicy::Symmetric).unwrap();

        let ids = |r: &specsim::engine::RangeReport| {
            r.answers
                .iter()
                .map(|(id, _)| id.clone())
                .collect::<Vec<_>>()
        };
        let want: Vec<String> = expected.iter().map(|(id, _)| id.clone()).collect();
        assert_eq!(ids(&base), want);
        assert_eq!(ids(&sym), want);
        for ((_, got), (_, oracle)) in base.answers.iter().zip(&expected) {
            assert!((got - oracle).abs() <= 1e-9);
        }
        // the filter may only add, never drop
        assert!(base.candidates >= base.answers.len());
        assert!(sym.candidates <= base.candidates);
        assert_eq!(base.false_positives, base.candidates - base.answers.len());
    }
}

#[test]
fn knn_matches_brute_force_top_k() {
    let seqs = walk_dataset(300, 128, 43);
    let data = oracle_data(&seqs);
    let (engine, _) = Engine::index_dataset(seqs.clone(), 2, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    for _ in 0..20 {
        let q = seqs.choose(&mut rng).unwrap();
        let expected = brute_top_k(&data, &oracle_normalize(q.values()), 10, oracle_dist);
        for bound in [RegionPolicy::Symmetric, RegionPolicy::Baseline] {
            let report = engine.knn_query_with_bound(q, 10, bound).unwrap();
            assert_eq!(report.answers.len(), 10);
            for ((gid, gd), (eid, ed)) in report.answers.iter().zip(&expected) {
                assert_eq!(gid, eid);
                assert!((gd - ed).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn knn_with_k_equal_to_dataset_size_is_a_full_ranking() {
    let seqs = walk_dataset(60, 64, 44);
    let data = oracle_data(&seqs);
    let q = seqs[11].clone();
    let (engine, _) = Engine::index_dataset(seqs, 2, 8).unwrap();
    let report = engine.knn_query(&q, 60).unwrap();
    let expected = brute_top_k(&data, &oracle_normalize(q.values()), 60, oracle_dist);
    assert_eq!(report.answers.len(), 60);
    for ((gid, _), (eid, _)) in report.answers.iter().zip(&expected) {
        assert_eq!(gid, eid);
    }
}

#[test]
fn all_pairs_matches_nested_loop_and_policies_agree() {
    let seqs = walk_dataset(200, 128, 45);
    let data = oracle_data(&seqs);
    let (engine, _) = Engine::index_dataset(seqs, 2, 16).unwrap();
    let max_amp = engine.max_amp().unwrap();

    // 0.32 * MaxAmp is sparse on uncorrelated walks; the larger threshold
    // exercises the refine path on a dense pair set
    for c in [0.32, 0.9] {
        let eps = max_amp * c;
        let expected = brute_pairs(&data, eps, oracle_dist);
        let want: Vec<(String, String)> = expected
            .iter()
            .map(|(a, b, _)| (a.clone(), b.clone()))
            .collect();

        let mut reports = Vec::new();
        for policy in [RegionPolicy::Baseline, RegionPolicy::Symmetric] {
            let report = engine.all_pairs(eps, policy).unwrap();
            let mut got: Vec<(String, String)> = report
                .answers
                .iter()
                .map(|(a, b, _)| (a.clone(), b.clone()))
                .collect();
            got.sort();
            assert_eq!(got, want, "policy {policy} c {c}");
            assert!(report.candidates >= report.answers.len());
            reports.push(report);
        }
        assert!(reports[1].candidates <= reports[0].candidates);
    }
}

#[test]
fn max_amp_equals_recomputed_spectra() {
    let seqs = walk_dataset(150, 128, 46);
    let (engine, _) = Engine::index_dataset(seqs.clone(), 3, 16).unwrap();
    let oracle: f64 = seqs
        .iter()
        .map(|s| naive_dft(&oracle_normalize(s.values()))[1].norm())
        .fold(0.0, f64::max);
    assert!((engine.max_amp().unwrap() - oracle).abs() <= 1e-9);
}

#[test]
fn built_engine_serves_queries_from_many_threads() {
    let seqs = walk_dataset(200, 64, 48);
    let (engine, _) = Engine::index_dataset(seqs.clone(), 2, 8).unwrap();
    let eps = engine.max_amp().unwrap() * 0.6;
    let baseline: Vec<Vec<String>> = seqs[..8]
        .iter()
        .map(|q| {
            engine
                .range_query(q, eps, RegionPolicy::Symmetric)
                .unwrap()
                .answers
                .into_iter()
                .map(|(id, _)| id)
                .collect()
        })
        .collect();

    std::thread::scope(|scope| {
        for chunk in seqs[..8].chunks(2).zip(baseline.chunks(2)) {
            let engine = &engine;
            scope.spawn(move || {
                for (q, expected) in chunk.0.iter().zip(chunk.1) {
                    let got: Vec<String> = engine
                        .range_query(q, eps, RegionPolicy::Symmetric)
                        .unwrap()
                        .answers
                        .into_iter()
                        .map(|(id, _)| id)
                        .collect();
                    assert_eq!(&got, expected);
                    let knn = engine.knn_query(q, 3).unwrap();
                    assert_eq!(knn.answers[0].0, q.id());
                }
            });
        }
    });
}

#[test]
fn report_csv_row_shape() {
    let seqs = walk_dataset(20, 64, 47);
    let q = seqs[0].clone();
    let (engine, _) = Engine::index_dataset(seqs, 2, 8).unwrap();
    let report = engine
        .range_query(&q, 1.0, RegionPolicy::Symmetric)
        .unwrap();
    let row = report.csv_row();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(
        fields.len(),
        specsim::engine::REPORT_CSV_HEADER.split(',').count()
    );
    assert_eq!(fields[0], "symmetric");
    assert_eq!(fields[1], "1");
}
