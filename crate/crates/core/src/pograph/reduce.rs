//! Cycle condensation, the one-intermediate edge reduction, and reachability.

use fixedbitset::FixedBitSet;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

/// Strongly connected components of a relation, collapsed to classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    /// Members of each class, ascending. Classes are ordered by smallest member.
    pub classes: Vec<Vec<usize>>,
    /// Class index of every node.
    pub class_of: Vec<usize>,
    /// Class-level relation, sorted, no self pairs. Acyclic.
    pub class_pairs: Vec<(usize, usize)>,
}

/// Groups mutually related nodes and lifts the relation to those groups.
pub fn resolve_cycles(n: usize, pairs: &[(usize, usize)]) -> Condensation {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, pairs.len());
    for _ in 0..n {
        g.add_node(());
    }
    for &(a, b) in pairs {
        g.add_edge(NodeIndex::new(a), NodeIndex::new(b), ());
    }
    let mut classes: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|comp| {
            let mut members: Vec<usize> = comp.into_iter().map(|v| v.index()).collect();
            members.sort_unstable();
            members
        })
        .collect();
    classes.sort_unstable_by_key(|c| c[0]);

    let mut class_of = vec![0; n];
    for (c, members) in classes.iter().enumerate() {
        for &m in members {
            class_of[m] = c;
        }
    }
    let mut class_pairs: Vec<(usize, usize)> = pairs
        .iter()
        .map(|&(a, b)| (class_of[a], class_of[b]))
        .filter(|(x, y)| x != y)
        .collect();
    class_pairs.sort_unstable();
    class_pairs.dedup();
    Condensation {
        classes,
        class_of,
        class_pairs,
    }
}

/// Keeps `(a, b)` unless some `c` has both `(a, c)` and `(c, b)`.
///
/// For a transitive relation this is the transitive reduction. `pairs` must
/// not contain self pairs.
pub fn reduce(n: usize, pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut succ = vec![FixedBitSet::with_capacity(n); n];
    let mut pred = vec![FixedBitSet::with_capacity(n); n];
    for &(a, b) in pairs {
        succ[a].insert(b);
        pred[b].insert(a);
    }
    let mut kept: Vec<(usize, usize)> = pairs
        .iter()
        .copied()
        .filter(|&(a, b)| succ[a].is_disjoint(&pred[b]))
        .collect();
    kept.sort_unstable();
    kept.dedup();
    kept
}

/// Topological order of an edge list over `n` nodes, or `None` on a cycle.
pub fn topo_order(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut indegree = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for &(a, b) in edges {
        out[a].push(b);
        indegree[b] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Per-material reachability sets over class-level direct edges.
#[derive(Debug, Clone)]
pub struct Reach {
    /// `easier[s]`: materials strictly below `s`, plus its class siblings.
    pub easier: Vec<FixedBitSet>,
    /// `harder[s]`: materials strictly above `s`, plus its class siblings.
    pub harder: Vec<FixedBitSet>,
}

/// Expands class-level closure of `class_edges` to material granularity.
///
/// Panics if `class_edges` is cyclic; callers validate first.
pub fn reachability(classes: &[Vec<usize>], class_edges: &[(usize, usize)]) -> Reach {
    let k = classes.len();
    let n: usize = classes.iter().map(Vec::len).sum();
    let order = topo_order(k, class_edges).expect("class edges must be acyclic");
    let mut out = vec![Vec::new(); k];
    let mut inn = vec![Vec::new(); k];
    for &(a, b) in class_edges {
        out[a].push(b);
        inn[b].push(a);
    }

    let down = class_closure(k, order.iter().rev(), &out);
    let up = class_closure(k, order.iter(), &inn);

    let expand = |closure: &[FixedBitSet]| -> Vec<FixedBitSet> {
        let mut per_class: Vec<FixedBitSet> = Vec::with_capacity(k);
        for (c, reach) in closure.iter().enumerate() {
            let mut bits = FixedBitSet::with_capacity(n);
            for d in reach.ones().chain(std::iter::once(c)) {
                for &m in &classes[d] {
                    bits.insert(m);
                }
            }
            per_class.push(bits);
        }
        let mut per_node = vec![FixedBitSet::new(); n];
        for (c, members) in classes.iter().enumerate() {
            for &m in members {
                let mut bits = per_class[c].clone();
                bits.set(m, false);
                per_node[m] = bits;
            }
        }
        per_node
    };
    Reach {
        easier: expand(&down),
        harder: expand(&up),
    }
}

// Closure along `adj`, visiting classes so every neighbor is finished first.
fn class_closure<'a>(k: usize, order: impl Iterator<Item = &'a usize>, adj: &[Vec<usize>]) -> Vec<FixedBitSet> {
    let mut closure = vec![FixedBitSet::with_capacity(k); k];
    for &c in order {
        let mut bits = FixedBitSet::with_capacity(k);
        for &d in &adj[c] {
            bits.insert(d);
            bits.union_with(&closure[d]);
        }
        closure[c] = bits;
    }
    closure
}
