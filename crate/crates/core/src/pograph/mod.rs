//! The α-fuzzy partial-ordering graph.
//!
//! Building a graph runs four stages over a corpus:
//!
//! 1. pairwise fuzzy-harder relation (coverage ≥ α plus media dominance),
//! 2. condensation of mutually related materials into equivalence classes,
//! 3. reduction to "directly harder than" edges between classes,
//! 4. per-material reachability in both directions.
//!
//! Edges always point from the harder class to the easier one.

mod file;
mod reduce;
mod relation;

pub use file::{GraphError, GraphFile};
pub use reduce::{reachability, reduce, resolve_cycles, topo_order, Condensation, Reach};
pub use relation::{coverage, fuzzy_harder, media_dominates, CoverageMatrix, Relation};

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::corpus::Corpus;

pub const DEFAULT_ALPHA: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphConfig {
    alpha: f64,
}

impl GraphConfig {
    pub fn new(alpha: f64) -> Result<Self, GraphError> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(GraphConfig { alpha })
        } else {
            Err(GraphError::InvalidAlpha(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig { alpha: DEFAULT_ALPHA }
    }
}

/// Exactly the pairs `(i, j)`, `i != j`, where material `i` is fuzzily harder than `j`.
pub fn build_relation(corpus: &Corpus, config: GraphConfig) -> Relation {
    CoverageMatrix::compute(corpus).relation(config.alpha)
}

#[derive(Debug, Clone)]
pub struct PoGraph {
    node_ids: Vec<String>,
    alpha: f64,
    relation: Option<Relation>,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    class_edges: Vec<(usize, usize)>,
    out_classes: Vec<Vec<usize>>,
    reach: Reach,
}

impl PoGraph {
    pub fn build(corpus: &Corpus, config: GraphConfig) -> Self {
        Self::from_matrix(corpus, &CoverageMatrix::compute(corpus), config)
    }

    pub fn from_matrix(corpus: &Corpus, matrix: &CoverageMatrix, config: GraphConfig) -> Self {
        let relation = matrix.relation(config.alpha);
        Self::from_relation(corpus.ids().map(str::to_owned).collect(), config.alpha, relation)
    }

    /// Condenses, reduces, and indexes an already computed relation.
    pub fn from_relation(node_ids: Vec<String>, alpha: f64, relation: Relation) -> Self {
        assert_eq!(node_ids.len(), relation.node_count());
        let cond = resolve_cycles(relation.node_count(), relation.pairs());
        let direct = reduce(cond.classes.len(), &cond.class_pairs);
        let mut graph = Self::assemble(node_ids, alpha, cond.classes, cond.class_of, direct);
        graph.relation = Some(relation);
        graph
    }

    /// Rebuilds a graph from stored classes and direct class edges.
    ///
    /// Classes must partition `0..node_ids.len()`; edges must be acyclic.
    pub fn from_parts(
        node_ids: Vec<String>,
        alpha: f64,
        mut classes: Vec<Vec<usize>>,
        class_edges: Vec<(usize, usize)>,
    ) -> Result<Self, GraphError> {
        let n = node_ids.len();
        let mut class_of = vec![usize::MAX; n];
        for members in &mut classes {
            if members.is_empty() {
                return Err(GraphError::Invalid("empty class".into()));
            }
            members.sort_unstable();
        }
        // Canonical class order: by smallest member.
        let mut perm: Vec<usize> = (0..classes.len()).collect();
        perm.sort_unstable_by_key(|&c| classes[c][0]);
        let mut renumber = vec![0; classes.len()];
        for (new, &old) in perm.iter().enumerate() {
            renumber[old] = new;
        }
        let classes: Vec<Vec<usize>> = perm.iter().map(|&c| classes[c].clone()).collect();
        for (c, members) in classes.iter().enumerate() {
            for &m in members {
                if m >= n || class_of[m] != usize::MAX {
                    return Err(GraphError::Invalid(format!("node {m} not in exactly one class")));
                }
                class_of[m] = c;
            }
        }
        if let Some(m) = class_of.iter().position(|&c| c == usize::MAX) {
            return Err(GraphError::Invalid(format!("material {:?} has no class", node_ids[m])));
        }
        let mut edges: Vec<(usize, usize)> = class_edges
            .into_iter()
            .map(|(a, b)| (renumber[a], renumber[b]))
            .collect();
        if edges.iter().any(|&(a, b)| a == b) {
            return Err(GraphError::Invalid("edge inside a class".into()));
        }
        edges.sort_unstable();
        edges.dedup();
        if topo_order(classes.len(), &edges).is_none() {
            return Err(GraphError::Cyclic);
        }
        Ok(Self::assemble(node_ids, alpha, classes, class_of, edges))
    }

    fn assemble(
        node_ids: Vec<String>,
        alpha: f64,
        classes: Vec<Vec<usize>>,
        class_of: Vec<usize>,
        class_edges: Vec<(usize, usize)>,
    ) -> Self {
        let mut out_classes = vec![Vec::new(); classes.len()];
        for &(a, b) in &class_edges {
            out_classes[a].push(b);
        }
        let reach = reachability(&classes, &class_edges);
        PoGraph {
            node_ids,
            alpha,
            relation: None,
            classes,
            class_of,
            class_edges,
            out_classes,
            reach,
        }
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn id(&self, node: usize) -> &str {
        &self.node_ids[node]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|n| n == id)
    }

    /// Raw fuzzy-harder relation; absent for graphs loaded from a file.
    pub fn relation(&self) -> Option<&Relation> {
        self.relation.as_ref()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, node: usize) -> usize {
        self.class_of[node]
    }

    /// Direct edges between classes, `(harder, easier)`, sorted.
    pub fn class_edges(&self) -> &[(usize, usize)] {
        &self.class_edges
    }

    /// Materials `t` with a direct edge `node → t`: every member of every
    /// class directly below `node`'s class.
    pub fn direct_easier(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_classes[self.class_of[node]]
            .iter()
            .flat_map(move |&c| self.classes[c].iter().copied())
    }

    /// True when `node`'s class has no outgoing direct edge.
    pub fn is_minimal(&self, node: usize) -> bool {
        self.out_classes[self.class_of[node]].is_empty()
    }

    pub fn easier_reach(&self, node: usize) -> &FixedBitSet {
        &self.reach.easier[node]
    }

    pub fn harder_reach(&self, node: usize) -> &FixedBitSet {
        &self.reach.harder[node]
    }

    /// Representative id of a class: its lexicographically smallest member.
    pub fn representative(&self, class: usize) -> &str {
        self.classes[class]
            .iter()
            .map(|&m| self.node_ids[m].as_str())
            .min()
            .expect("classes are nonempty")
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            alpha: self.alpha,
            nodes: self.len(),
            edges: self.class_edges.len(),
            classes: self.classes.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub alpha: f64,
    pub nodes: usize,
    pub edges: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityRow {
    pub alpha: f64,
    pub relation_count: usize,
    pub edge_count: usize,
    pub class_count: usize,
}

/// Relation, edge, and class counts per α, from a single coverage pass.
pub fn density_sweep(corpus: &Corpus, alphas: &[f64]) -> Result<Vec<DensityRow>, GraphError> {
    let configs = alphas
        .iter()
        .map(|&a| GraphConfig::new(a))
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = CoverageMatrix::compute(corpus);
    Ok(configs
        .into_iter()
        .map(|config| {
            let g = PoGraph::from_matrix(corpus, &matrix, config);
            DensityRow {
                alpha: config.alpha,
                relation_count: g.relation().map_or(0, Relation::len),
                edge_count: g.class_edges.len(),
                class_count: g.classes.len(),
            }
        })
        .collect())
}
