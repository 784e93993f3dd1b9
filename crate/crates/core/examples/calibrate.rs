//! Recomputes the inference-accuracy floor stored in
//! `tests/fixtures/calibration.json`.
//!
//! Runs the default synthetic setup (α = 0.8, β = 0.8, no noise, 100
//! adaptive sessions, seed 42) and scores every inferred status against a
//! direct count of each material's known concepts.

use std::collections::HashSet;

use zpdrec_core::simulate::{gen_synthetic_corpus, simulate_batch, BatchParams, SynthParams};
use zpdrec_core::{GraphConfig, PoGraph};

fn main() {
    let corpus = gen_synthetic_corpus(&SynthParams::default()).unwrap();
    let graph = PoGraph::build(&corpus, GraphConfig::new(0.8).unwrap());
    let params = BatchParams {
        beta: 0.8,
        noise: 0.0,
        n_students: 100,
        seed: 42,
        ..Default::default()
    };
    let (traces, students) = simulate_batch(&graph, &corpus, &params).unwrap();

    let (mut correct, mut inferred) = (0usize, 0usize);
    for (trace, student) in traces.iter().zip(&students) {
        for (i, status) in trace.final_statuses.iter().enumerate() {
            if !status.is_inferred() {
                continue;
            }
            let concepts: HashSet<&String> = corpus.get(i).concepts().keys().collect();
            let known = concepts.iter().filter(|c| student.known_vocab.contains(**c)).count();
            let understood = 5 * known >= 4 * concepts.len();
            inferred += 1;
            correct += usize::from(understood == status.is_solvable());
        }
    }
    let measured = correct as f64 / inferred as f64;
    let min_accuracy = (measured * 100.0).floor() / 100.0;
    println!(
        "{}",
        serde_json::json!({
            "alpha": 0.8,
            "beta": 0.8,
            "noise": 0.0,
            "n_students": 100,
            "seed": 42,
            "mode": "adaptive",
            "horizon": 50,
            "correct": correct,
            "inferred": inferred,
            "measured_accuracy": measured,
            "min_accuracy": min_accuracy,
        })
    );
}
