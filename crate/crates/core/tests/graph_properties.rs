mod support;

use proptest::prelude::*;
use support::*;
use zpdrec_core::pograph::{reachability, reduce, resolve_cycles, CoverageMatrix, Relation};
use zpdrec_core::{build_relation, density_sweep, Corpus, GraphConfig, GraphFile, Material, PoGraph};

fn cfg(alpha: f64) -> GraphConfig {
    GraphConfig::new(alpha).unwrap()
}

#[test]
fn relation_matches_brute_force_on_random_corpora() {
    let mut r = rng(1);
    for _ in 0..40 {
        let n = r.random_range(2..=40);
        let corpus = random_corpus(&mut r, n, 8, 6, true);
        for alpha in [1.0, 0.9, 0.75, 0.5, 0.2] {
            let got = build_relation(&corpus, cfg(alpha));
            assert_eq!(got.pairs(), brute_relation(&corpus, alpha), "alpha {alpha}");
        }
    }
}

#[test]
fn strict_limit_is_set_inclusion_for_text() {
    let mut r = rng(2);
    for _ in 0..40 {
        let corpus = random_corpus(&mut r, 25, 6, 5, false);
        let rel = build_relation(&corpus, cfg(1.0));
        for i in 0..corpus.len() {
            for j in 0..corpus.len() {
                let a = corpus.get(i).distinct_concepts();
                let b = corpus.get(j).distinct_concepts();
                let included = b.iter().all(|c| a.contains(c));
                assert_eq!(rel.contains(i, j), i != j && included);
            }
        }
    }
}

#[test]
fn coverage_matrix_matches_per_pair_coverage() {
    let mut r = rng(3);
    let corpus = random_corpus(&mut r, 30, 10, 8, true);
    let m = CoverageMatrix::compute(&corpus);
    for i in 0..corpus.len() {
        for j in 0..corpus.len() {
            let direct = zpdrec_core::pograph::coverage(corpus.get(i), corpus.get(j));
            assert_eq!(m.coverage(i, j), direct);
        }
    }
}

#[test]
fn density_sweep_is_monotone_in_alpha() {
    let mut r = rng(4);
    for _ in 0..10 {
        let corpus = random_corpus(&mut r, 40, 12, 8, true);
        let alphas = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5];
        let rows = density_sweep(&corpus, &alphas).unwrap();
        for w in rows.windows(2) {
            assert!(w[0].relation_count <= w[1].relation_count);
        }
        for (row, &alpha) in rows.iter().zip(&alphas) {
            assert_eq!(row.relation_count, brute_relation(&corpus, alpha).len());
        }
    }
}

#[test]
fn condensation_matches_mutual_reachability() {
    let mut r = rng(5);
    for _ in 0..100 {
        let n = r.random_range(1..=30);
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && r.random_bool(0.06) {
                    pairs.push((a, b));
                }
            }
        }
        let cond = resolve_cycles(n, &pairs);
        assert_eq!(cond.classes, brute_scc(n, &pairs));
        for (c, members) in cond.classes.iter().enumerate() {
            for &m in members {
                assert_eq!(cond.class_of[m], c);
            }
        }
        // Class pairs are exactly the cross-class relation pairs, lifted.
        let mut lifted: Vec<_> = pairs
            .iter()
            .map(|&(a, b)| (cond.class_of[a], cond.class_of[b]))
            .filter(|(a, b)| a != b)
            .collect();
        lifted.sort_unstable();
        lifted.dedup();
        let mut got = cond.class_pairs.clone();
        got.sort_unstable();
        got.dedup();
        assert_eq!(got, lifted);
    }
}

#[test]
fn reduction_is_sound_and_preserves_reachability() {
    let mut r = rng(6);
    for _ in 0..100 {
        let n = r.random_range(1..=40);
        let density = r.random_range(0.02..0.4);
        let pairs = random_dag(&mut r, n, density);
        let edges = reduce(n, &pairs);
        for e in &edges {
            assert!(pairs.binary_search(e).is_ok(), "edge {e:?} not in relation");
        }
        let closure = floyd_warshall(n, &pairs);
        let edge_closure = floyd_warshall(n, &edges);
        // Every relation pair stays reachable through the edges.
        for &(a, b) in &pairs {
            assert!(edge_closure[a][b]);
        }
        // Reachability stays within the relation's closure.
        for a in 0..n {
            for b in 0..n {
                if edge_closure[a][b] {
                    assert!(closure[a][b]);
                }
            }
        }
        let classes: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let reach = reachability(&classes, &edges);
        for a in 0..n {
            for b in 0..n {
                assert_eq!(reach.easier[a].contains(b), closure[a][b]);
                assert_eq!(reach.harder[b].contains(a), closure[a][b]);
            }
        }
    }
}

#[test]
fn reduction_drops_only_pairs_with_an_intermediate() {
    let mut r = rng(7);
    for _ in 0..60 {
        let n = r.random_range(2..=25);
        let pairs = random_dag(&mut r, n, 0.3);
        let edges = reduce(n, &pairs);
        let has = |a: usize, b: usize| pairs.binary_search(&(a, b)).is_ok();
        for &(a, b) in &pairs {
            let intermediate = (0..n).any(|k| has(a, k) && has(k, b));
            assert_eq!(edges.binary_search(&(a, b)).is_ok(), !intermediate);
        }
    }
}

#[test]
fn built_graph_reach_covers_relation() {
    let mut r = rng(8);
    for _ in 0..30 {
        let corpus = random_corpus(&mut r, 35, 8, 5, true);
        for alpha in [1.0, 0.7] {
            let g = PoGraph::build(&corpus, cfg(alpha));
            let easier = brute_easier(&g);
            for &(a, b) in brute_relation(&corpus, alpha).iter() {
                assert!(g.easier_reach(a).contains(b));
                assert!(g.harder_reach(b).contains(a));
            }
            for s in 0..g.len() {
                for t in 0..g.len() {
                    assert_eq!(g.easier_reach(s).contains(t), easier[s][t]);
                }
            }
        }
    }
}

#[test]
fn graph_is_independent_of_input_order() {
    let mut r = rng(9);
    for _ in 0..10 {
        let corpus = random_corpus(&mut r, 30, 8, 5, true);
        let mut shuffled: Vec<Material> = corpus.materials().to_vec();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, r.random_range(0..=i));
        }
        let other = Corpus::from_materials(shuffled).unwrap();
        let a = GraphFile::from_graph(&PoGraph::build(&corpus, cfg(0.8)), "d");
        let b = GraphFile::from_graph(&PoGraph::build(&other, cfg(0.8)), "d");
        assert_eq!(a.to_json(), b.to_json());
    }
}

#[test]
fn graph_file_round_trips() {
    let mut r = rng(10);
    for _ in 0..10 {
        let corpus = random_corpus(&mut r, 30, 7, 5, true);
        let g = PoGraph::build(&corpus, cfg(0.75));
        let json = GraphFile::from_graph(&g, "abc").to_json();
        let back = GraphFile::parse(&json).unwrap().into_graph(&corpus, "abc").unwrap();
        assert_eq!(back.classes(), g.classes());
        assert_eq!(back.class_edges(), g.class_edges());
        assert_eq!(GraphFile::from_graph(&back, "abc").to_json(), json);
    }
}

proptest! {
    #[test]
    fn relation_matches_oracle(seed in any::<u64>(), n in 2usize..20, alpha in 0.05f64..=1.0) {
        let mut r = rng(seed);
        let corpus = random_corpus(&mut r, n, 6, 5, true);
        let rel = build_relation(&corpus, cfg(alpha));
        let want = brute_relation(&corpus, alpha);
        prop_assert_eq!(rel.pairs(), want.as_slice());
    }

    #[test]
    fn from_relation_matches_build(seed in any::<u64>(), n in 2usize..25) {
        let mut r = rng(seed);
        let corpus = random_corpus(&mut r, n, 6, 4, true);
        let built = PoGraph::build(&corpus, cfg(0.8));
        let rel = Relation::new(n, brute_relation(&corpus, 0.8));
        let ids = corpus.ids().map(str::to_owned).collect();
        let manual = PoGraph::from_relation(ids, 0.8, rel);
        prop_assert_eq!(built.classes(), manual.classes());
        prop_assert_eq!(built.class_edges(), manual.class_edges());
    }
}

use rand::Rng;
