//! Brute-force oracles and random-instance generators shared by the test
//! suites. Expected values are computed from definitions here, never by the
//! graph-building or selection code under test.

#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zpdrec_core::{Corpus, KnowledgeStatus, Material, Media, PoGraph, StudentState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small corpus over a tiny vocabulary, so inclusions and near-inclusions
/// are common. Mixed media when `multimedia` is set.
pub fn random_corpus(rng: &mut impl Rng, n: usize, vocab: usize, max_len: usize, multimedia: bool) -> Corpus {
    let tokens: Vec<String> = (0..vocab).map(|i| format!("t{i}")).collect();
    let materials = (0..n)
        .map(|i| {
            let len = rng.random_range(1..=max_len);
            let concepts: Vec<String> = (0..len).map(|_| tokens.choose(rng).unwrap().clone()).collect();
            let id = format!("n{:03}", (i * 37) % 1000);
            let media = if multimedia {
                [Media::Text, Media::Audio, Media::Video][rng.random_range(0..3)]
            } else {
                Media::Text
            };
            // Few distinct rates so ties happen.
            let rate = (media != Media::Text).then(|| rng.random_range(3..=6) as f64);
            let subs = media == Media::Video && rng.random_bool(0.5);
            Material::new(id, media, concepts, rate, subs).unwrap()
        })
        .collect();
    Corpus::from_materials(materials).unwrap()
}

fn distinct(m: &Material) -> HashSet<&str> {
    m.concepts().keys().map(String::as_str).collect()
}

/// Direct evaluation of the fuzzy-harder definition with the media rules.
pub fn brute_fuzzy_harder(h: &Material, e: &Material, alpha: f64) -> bool {
    let hs = distinct(h);
    let es = distinct(e);
    let covered = es.iter().filter(|c| hs.contains(*c)).count();
    let vocab_ok = covered as f64 / es.len() as f64 >= alpha;
    let rate = |m: &Material| m.speaking_rate().unwrap();
    let media_ok = match (h.media(), e.media()) {
        (Media::Text, _) | (_, Media::Text) => true,
        (Media::Audio, Media::Audio) | (Media::Audio, Media::Video) | (Media::Video, Media::Audio) => {
            rate(h) >= rate(e)
        }
        (Media::Video, Media::Video) => rate(h) >= rate(e) && (!h.has_subtitles() || e.has_subtitles()),
    };
    vocab_ok && media_ok
}

pub fn brute_relation(corpus: &Corpus, alpha: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..corpus.len() {
        for j in 0..corpus.len() {
            if i != j && brute_fuzzy_harder(corpus.get(i), corpus.get(j), alpha) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Transitive closure (paths of length ≥ 1).
pub fn floyd_warshall(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(a, b) in pairs {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// Equivalence classes by mutual reachability, each sorted, ordered by first member.
pub fn brute_scc(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let r = floyd_warshall(n, pairs);
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let class: Vec<usize> = (i..n).filter(|&j| j == i || (r[i][j] && r[j][i])).collect();
        for &j in &class {
            assigned[j] = true;
        }
        classes.push(class);
    }
    classes
}

/// Random DAG relation on `n` nodes: pairs only from lower to higher index
/// of a random permutation.
pub fn random_dag(rng: &mut impl Rng, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(density) {
                pairs.push((order[a], order[b]));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Material-level closure of a built graph, recomputed from its class
/// edges plus sibling links: `easier[s][t]` iff t is below s (t ≠ s).
pub fn brute_easier(graph: &PoGraph) -> Vec<Vec<bool>> {
    let n = graph.len();
    let mut pairs = Vec::new();
    for &(a, b) in graph.class_edges() {
        for &x in &graph.classes()[a] {
            for &y in &graph.classes()[b] {
                pairs.push((x, y));
            }
        }
    }
    for class in graph.classes() {
        for &x in class {
            for &y in class {
                if x != y {
                    pairs.push((x, y));
                }
            }
        }
    }
    let mut r = floyd_warshall(n, &pairs);
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = false;
    }
    r
}

/// Statuses recomputed from scratch from the observed responses.
pub fn brute_statuses(easier: &[Vec<bool>], responses: &[(usize, bool)]) -> Vec<KnowledgeStatus> {
    let n = easier.len();
    let mut out = vec![KnowledgeStatus::Unknown; n];
    for t in 0..n {
        let below_solved = responses.iter().any(|&(s, ok)| ok && easier[s][t]);
        let above_failed = responses.iter().any(|&(f, ok)| !ok && easier[t][f]);
        out[t] = if below_solved {
            KnowledgeStatus::InferredSolvable
        } else if above_failed {
            KnowledgeStatus::InferredUnsolvable
        } else {
            KnowledgeStatus::Unknown
        };
    }
    for &(s, ok) in responses {
        out[s] = if ok {
            KnowledgeStatus::ObservedSolved
        } else {
            KnowledgeStatus::ObservedFailed
        };
    }
    out
}

/// Answers `k` random unknown materials with random outcomes.
pub fn random_responses(rng: &mut impl Rng, graph: &PoGraph, state: &mut StudentState, k: usize) -> Vec<(usize, bool)> {
    let mut log = Vec::new();
    for _ in 0..k {
        let unknown: Vec<usize> = state.unknown_set().ones().collect();
        let Some(&v) = unknown.choose(rng) else { break };
        let ok = rng.random_bool(0.5);
        state.present(v).unwrap();
        state.record_response(graph, v, ok).unwrap();
        log.push((v, ok));
    }
    log
}

/// Exhaustive expected-gain argmax: highest score, ties to smallest id.
pub fn brute_assess(graph: &PoGraph, easier: &[Vec<bool>], statuses: &[KnowledgeStatus], p: f64) -> Option<usize> {
    let n = graph.len();
    let mut best: Option<(f64, usize)> = None;
    for v in 0..n {
        if statuses[v] != KnowledgeStatus::Unknown {
            continue;
        }
        let plus = 1
            + (0..n)
                .filter(|&t| easier[v][t] && statuses[t] == KnowledgeStatus::Unknown)
                .count();
        let minus = 1
            + (0..n)
                .filter(|&t| easier[t][v] && statuses[t] == KnowledgeStatus::Unknown)
                .count();
        let score = p * plus as f64 + (1.0 - p) * minus as f64;
        best = match best {
            None => Some((score, v)),
            Some((bs, bv)) => {
                if score > bs + 1e-9 || ((score - bs).abs() <= 1e-9 && graph.id(v) < graph.id(bv)) {
                    Some((score, v))
                } else {
                    Some((bs, bv))
                }
            }
        };
    }
    best.map(|(_, v)| v)
}
