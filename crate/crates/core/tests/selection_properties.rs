mod support;

use proptest::prelude::*;
use rand::{Rng, RngCore};
use support::*;
use zpdrec_core::selector::{
    assess_select, assess_select_with_odds, balance_probability, choose_assessment, next_material, recommend_select,
    relevance, turn_rng, zpd_candidates,
};
use zpdrec_core::student::SolveOdds;
use zpdrec_core::{init_state, GraphConfig, Heuristic, KnowledgeStatus, Mode, PoGraph, SelectorConfig};

fn random_graph(r: &mut impl Rng, max_n: usize) -> PoGraph {
    let n = r.random_range(2..=max_n);
    let alpha = [1.0, 0.8, 0.6][r.random_range(0..3)];
    let corpus = random_corpus(r, n, 7, 5, true);
    PoGraph::build(&corpus, GraphConfig::new(alpha).unwrap())
}

#[test]
fn propagation_matches_recomputation() {
    let mut r = rng(11);
    for _ in 0..100 {
        let g = random_graph(&mut r, 50);
        let easier = brute_easier(&g);
        let mut state = init_state(&g, 0);
        let k = r.random_range(0..=g.len());
        let log = random_responses(&mut r, &g, &mut state, k);
        assert!(state.contradictions().is_empty());
        assert_eq!(state.statuses(), brute_statuses(&easier, &log).as_slice());
        assert!(state.is_closed(&g));
    }
}

#[test]
fn statuses_only_move_out_of_unknown() {
    let mut r = rng(12);
    for _ in 0..50 {
        let g = random_graph(&mut r, 30);
        let mut state = init_state(&g, 0);
        let mut before = state.statuses().to_vec();
        while state.unknown_set().count_ones(..) > 0 {
            random_responses(&mut r, &g, &mut state, 1);
            for (old, new) in before.iter().zip(state.statuses()) {
                if *old != KnowledgeStatus::Unknown {
                    assert_eq!(old, new);
                }
            }
            before = state.statuses().to_vec();
        }
    }
}

#[test]
fn contradiction_overrides_locally() {
    // Chain A > B > C: solving A infers B solvable; failing B then contradicts.
    let ids = vec!["A".into(), "B".into(), "C".into()];
    let g = PoGraph::from_parts(ids, 1.0, vec![vec![0], vec![1], vec![2]], vec![(0, 1), (1, 2)]).unwrap();
    let mut s = init_state(&g, 0);
    s.present(0).unwrap();
    s.record_response(&g, 0, true).unwrap();
    assert_eq!(s.status(1), KnowledgeStatus::InferredSolvable);
    s.present(1).unwrap();
    let out = s.record_response(&g, 1, false).unwrap();
    let c = out.contradiction.expect("contradiction reported");
    assert_eq!(
        (c.material, c.inferred, c.solved),
        (1, KnowledgeStatus::InferredSolvable, false)
    );
    assert_eq!(out.newly_inferred, 0);
    assert_eq!(s.contradictions().len(), 1);
    // The observation wins locally and nothing else moves.
    assert_eq!(s.status(0), KnowledgeStatus::ObservedSolved);
    assert_eq!(s.status(1), KnowledgeStatus::ObservedFailed);
    assert_eq!(s.status(2), KnowledgeStatus::InferredSolvable);
}

#[test]
fn assessment_matches_exhaustive_argmax() {
    let mut r = rng(13);
    for _ in 0..100 {
        let g = random_graph(&mut r, 30);
        let easier = brute_easier(&g);
        let mut state = init_state(&g, 0);
        let k = r.random_range(0..g.len());
        random_responses(&mut r, &g, &mut state, k);
        let got = assess_select(&state, &g).ok().map(|s| s.material);
        let want = brute_assess(&g, &easier, state.statuses(), state.p_estimate());
        assert_eq!(got, want);

        let odds = SolveOdds {
            solved: r.random_range(0..10),
            failed: r.random_range(0..10),
        };
        let got = assess_select_with_odds(&state, &g, odds).ok().map(|s| s.material);
        let want = brute_assess(&g, &easier, state.statuses(), odds.probability());
        assert_eq!(got, want);
    }
}

#[test]
fn recommendation_stays_in_zone() {
    let mut r = rng(14);
    for _ in 0..100 {
        let g = random_graph(&mut r, 40);
        let mut state = init_state(&g, 0);
        let k = r.random_range(0..g.len());
        random_responses(&mut r, &g, &mut state, k);
        let cands = zpd_candidates(&state, &g);
        let solvable: Vec<usize> = (0..g.len()).filter(|&i| state.status(i).is_solvable()).collect();
        for &c in &cands {
            assert_eq!(state.status(c), KnowledgeStatus::Unknown);
            if solvable.is_empty() {
                assert!(g.is_minimal(c));
            } else {
                let rel = g.direct_easier(c).filter(|t| solvable.contains(t)).count();
                assert!(rel > 0);
                assert_eq!(relevance(c, &state, &g), rel);
            }
        }
        match recommend_select(&state, &g) {
            Ok(sel) if sel.heuristic == Heuristic::Recommendation => {
                assert!(cands.contains(&sel.material));
                let best = cands.iter().map(|&c| relevance(c, &state, &g)).max().unwrap();
                if !solvable.is_empty() {
                    assert_eq!(relevance(sel.material, &state, &g), best);
                }
            }
            Ok(sel) => {
                assert!(cands.is_empty());
                assert_eq!(sel.heuristic, Heuristic::Assessment);
            }
            Err(_) => assert_eq!(state.unknown_set().count_ones(..), 0),
        }
    }
}

#[test]
fn selection_never_repeats_and_exhausts() {
    let mut r = rng(15);
    for mode in Mode::ALL {
        for seed in 0..10 {
            let g = random_graph(&mut r, 30);
            let cfg = SelectorConfig::new(mode, 10, seed).unwrap();
            let mut state = init_state(&g, seed);
            let mut seen = std::collections::HashSet::new();
            for turn in 0.. {
                let Ok(sel) = next_material(&state, &g, &cfg, &mut turn_rng(seed, turn)) else {
                    break;
                };
                assert!(seen.insert(sel.material));
                assert_eq!(state.status(sel.material), KnowledgeStatus::Unknown);
                state.present(sel.material).unwrap();
                state.record_response(&g, sel.material, r.random_bool(0.5)).unwrap();
            }
            assert_eq!(state.unknown_set().count_ones(..), 0);
        }
    }
}

#[test]
fn balance_probability_schedule() {
    assert_eq!(balance_probability(0, 50), 1.0);
    assert_eq!(balance_probability(25, 50), 0.5);
    assert_eq!(balance_probability(50, 50), 0.0);
    assert_eq!(balance_probability(80, 50), 0.0);
    assert_eq!(balance_probability(1, 1), 0.0);
}

/// Returns a fixed word, so every uniform draw lands at the same point.
struct Fixed(u64);

impl RngCore for Fixed {
    fn next_u32(&mut self) -> u32 {
        (self.0 >> 32) as u32
    }
    fn next_u64(&mut self) -> u64 {
        self.0
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for (i, b) in dst.iter_mut().enumerate() {
            *b = self.0.to_le_bytes()[i % 8];
        }
    }
}

#[test]
fn adaptive_mode_follows_the_coin() {
    let mut r = rng(16);
    let g = random_graph(&mut r, 30);
    let mut state = init_state(&g, 0);
    random_responses(&mut r, &g, &mut state, 3);
    let cfg = SelectorConfig::new(Mode::Adaptive, 1000, 0).unwrap();
    // Draw near 0 is below p_assess, draw near 1 is above.
    let low = next_material(&state, &g, &cfg, &mut Fixed(0)).unwrap();
    assert_eq!(low, assess_select(&state, &g).unwrap());
    let high = next_material(&state, &g, &cfg, &mut Fixed(u64::MAX)).unwrap();
    assert_eq!(high, recommend_select(&state, &g).unwrap());
}

#[test]
fn horizon_one_degenerates_after_first_turn() {
    let mut r = rng(17);
    for seed in 0..20 {
        let g = random_graph(&mut r, 30);
        let adaptive = SelectorConfig::new(Mode::Adaptive, 1, seed).unwrap();
        let mut state = init_state(&g, seed);
        // First turn: p_assess = 1, always assessment.
        let first = next_material(&state, &g, &adaptive, &mut turn_rng(seed, 0)).unwrap();
        assert_eq!(first, assess_select(&state, &g).unwrap());
        state.present(first.material).unwrap();
        state.record_response(&g, first.material, r.random_bool(0.5)).unwrap();
        for turn in 1.. {
            let a = next_material(&state, &g, &adaptive, &mut turn_rng(seed, turn));
            let b = recommend_select(&state, &g);
            assert_eq!(a, b);
            let Ok(sel) = a else { break };
            state.present(sel.material).unwrap();
            state.record_response(&g, sel.material, r.random_bool(0.5)).unwrap();
        }
    }
}

#[test]
fn choose_assessment_frequency() {
    let mut hits = 0;
    for i in 0..10_000u64 {
        if choose_assessment(25, 50, &mut turn_rng(7, i)) {
            hits += 1;
        }
    }
    let f = hits as f64 / 10_000.0;
    assert!((f - 0.5).abs() <= 0.02, "{f}");
}

proptest! {
    #[test]
    fn assess_oracle_prop(seed in any::<u64>(), k in 0usize..20) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, 20);
        let easier = brute_easier(&g);
        let mut state = init_state(&g, 0);
        random_responses(&mut r, &g, &mut state, k);
        let got = assess_select(&state, &g).ok().map(|s| s.material);
        prop_assert_eq!(got, brute_assess(&g, &easier, state.statuses(), state.p_estimate()));
    }

    #[test]
    fn propagation_oracle_prop(seed in any::<u64>(), k in 0usize..30) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, 30);
        let easier = brute_easier(&g);
        let mut state = init_state(&g, 0);
        let log = random_responses(&mut r, &g, &mut state, k);
        let want = brute_statuses(&easier, &log);
        prop_assert_eq!(state.statuses(), want.as_slice());
    }
}
