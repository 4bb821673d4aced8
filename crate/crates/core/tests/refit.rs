mod common;

use common::LiteralRefit;
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordrefit_core::refit::{prepare_refit, solve};
use wordrefit_core::{
    build_refit_graph, objective, refit, refit_step, replay, undo, ActionLog, BetaScheme, EmbeddingModel,
    RefitParams, RefitRequest,
};

fn random_request(rng: &mut ChaCha8Rng, model: &EmbeddingModel) -> (RefitRequest, LiteralRefit) {
    let uniform = rng.random_bool(0.3);
    let params = RefitParams {
        alpha: if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.1..3.0) },
        beta_scheme: if uniform { BetaScheme::Uniform } else { BetaScheme::InverseDegree },
        iterations: rng.random_range(1..15),
        convergence_epsilon: if rng.random_bool(0.5) { 0.0 } else { 1e-6 },
    };
    let n = model.len();
    if rng.random_bool(0.5) {
        let size = rng.random_range(2..=6.min(n));
        let ids = sample(rng, n, size).into_vec();
        let words: Vec<String> = ids.iter().map(|&i| model.vocab().word(i).to_string()).collect();
        (RefitRequest::round_robin(words).with_params(params), LiteralRefit::round_robin(&ids, uniform))
    } else {
        let size = rng.random_range(2..=6.min(n));
        let ids = sample(rng, n, size).into_vec();
        let words: Vec<String> = ids[1..].iter().map(|&i| model.vocab().word(i).to_string()).collect();
        (
            RefitRequest::targeted(model.vocab().word(ids[0]).to_string(), words).with_params(params),
            LiteralRefit::targeted(ids[0], &ids[1..], uniform),
        )
    }
}

fn anchors(model: &EmbeddingModel, rows: &[usize]) -> Vec<Vec<f64>> {
    rows.iter().map(|&r| common::row64(model, r)).collect()
}

#[test]
fn one_sweep_matches_literal_update_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let n = rng.random_range(3..=20);
        let d = rng.random_range(1..=8);
        let model = common::random_model(&mut rng, n, d, 0.0);
        let (req, literal) = random_request(&mut rng, &model);
        let graph = build_refit_graph(&model, &req).unwrap();
        assert_eq!(graph.rows, literal.rows);
        let q_hat = anchors(&model, &graph.rows);
        let mut ours = q_hat.clone();
        let mut theirs = q_hat.clone();
        refit_step(&graph, &q_hat, &mut ours, req.params.alpha).unwrap();
        literal.sweep(&q_hat, &mut theirs, req.params.alpha);
        for (a, b) in ours.iter().flatten().zip(theirs.iter().flatten()) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn objective_matches_term_by_term_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let model = common::random_model(&mut rng, 5, 4, 0.0);
        let (req, literal) = random_request(&mut rng, &model);
        let graph = build_refit_graph(&model, &req).unwrap();
        let q_hat = anchors(&model, &graph.rows);
        let mut q = q_hat.clone();
        for v in q.iter_mut().flatten() {
            *v += rng.random_range(-0.5..0.5);
        }
        let ours = objective(&graph, &q_hat, &q, req.params.alpha).unwrap();
        let theirs = literal.objective(&q_hat, &q, req.params.alpha);
        assert!((ours - theirs).abs() <= 1e-12 * theirs.max(1.0), "{ours} vs {theirs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn objective_trace_never_increases(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..40);
        let d = rng.random_range(1..12);
        let model = common::random_model(&mut rng, n, d, 0.0);
        let (req, _) = random_request(&mut rng, &model);
        let graph = build_refit_graph(&model, &req).unwrap();
        let sol = solve(&graph, &anchors(&model, &graph.rows), &req.params).unwrap();
        prop_assert!(sol.objective_trace.len() >= 2);
        for w in sol.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn targeted_step_lands_on_weighted_anchor_mean(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = common::random_model(&mut rng, 30, 6, 0.0);
        let (mut req, _) = random_request(&mut rng, &model);
        if req.target.is_none() {
            let mut group = req.group.clone();
            req.target = Some(group.remove(0));
            req.group = group;
            req.mode = wordrefit_core::RefitMode::Targeted;
        }
        req.params.alpha = rng.random_range(0.1..3.0);
        let graph = build_refit_graph(&model, &req).unwrap();
        let q_hat = anchors(&model, &graph.rows);
        let mut q = q_hat.clone();
        let beta_sum: f64 = graph.edges.iter().map(|e| e.weight).sum();
        let m: Vec<f64> = (0..model.dims())
            .map(|k| {
                let pull: f64 = graph.edges.iter().map(|e| e.weight * q_hat[e.b][k]).sum();
                (req.params.alpha * q_hat[0][k] + pull) / (req.params.alpha + beta_sum)
            })
            .collect();
        let dist = |v: &[f64]| v.iter().zip(&m).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let before = dist(&q[0]);
        refit_step(&graph, &q_hat, &mut q, req.params.alpha).unwrap();
        let after = dist(&q[0]);
        prop_assert!(after <= 1e-12);
        prop_assert!(before == 0.0 || after < before);
        for i in 1..q.len() {
            prop_assert_eq!(&q[i], &q_hat[i]);
        }
    }
}

#[test]
fn targeted_refit_changes_only_the_target_row() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let mut model = common::random_model(&mut rng, 25, 5, 0.0);
        let before = model.clone();
        let ids = sample(&mut rng, 25, 4).into_vec();
        let words: Vec<String> = ids.iter().map(|&i| model.vocab().word(i).to_string()).collect();
        let mut log = ActionLog::new();
        refit(&mut model, &mut log, &RefitRequest::targeted(words[0].clone(), words[1..].to_vec())).unwrap();
        for row in 0..25 {
            if row != ids[0] {
                assert_eq!(model.row(row), before.row(row));
            }
        }
    }
}

#[test]
fn replay_reproduces_live_model_bit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let mut model = common::random_model(&mut rng, 50, 8, 0.0);
        let initial = model.clone();
        let mut log = ActionLog::new();
        for _ in 0..3 {
            let (req, _) = random_request(&mut rng, &model);
            match refit(&mut model, &mut log, &req) {
                Ok(_) | Err(wordrefit_core::Error::ZeroVector(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
        let replayed = replay(initial.clone(), &log).unwrap();
        let bits = |m: &EmbeddingModel| m.raw().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&replayed), bits(&model));

        let mid = {
            let mut m = initial.clone();
            let mut l = ActionLog::new();
            for e in &log.entries()[..log.len().saturating_sub(1)] {
                refit(&mut m, &mut l, &e.request).unwrap();
            }
            m
        };
        if !log.is_empty() {
            undo(&mut model, &mut log).unwrap();
            assert_eq!(bits(&model), bits(&mid));
        }
    }
}

#[test]
fn prepared_refit_exposes_fixed_point_solution() {
    let model = EmbeddingModel::from_rows([
        ("t", vec![1.0, 0.0]),
        ("g1", vec![0.0, 1.0]),
        ("g2", vec![1.0, 1.0]),
    ])
    .unwrap();
    let p = prepare_refit(&model, &RefitRequest::targeted("t", ["g1", "g2"])).unwrap();
    // (1*[1,0] + 0.5*[0,1] + 0.5*[1,1]) / 2
    assert_eq!(p.solution.vectors[0], vec![0.75, 0.5]);
    assert_eq!(p.moved, vec!["t"]);
}
