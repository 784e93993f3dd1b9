//! JSON graph file: `{alpha, corpus_digest, classes, edges}`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::PoGraph;
use crate::corpus::Corpus;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("alpha must be in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("class edges contain a cycle")]
    Cyclic,
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("graph was built from corpus {expected}, but the corpus digest is {actual}")]
    DigestMismatch { expected: String, actual: String },
    #[error("unknown material id {0:?} in graph file")]
    UnknownId(String),
    #[error("graph file: {0}")]
    Json(#[from] serde_json::Error),
}

/// On-disk graph. Classes are sorted member lists, ordered by first member;
/// edges are `[harder, easier]` class representatives, sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub alpha: f64,
    pub corpus_digest: String,
    pub classes: Vec<Vec<String>>,
    pub edges: Vec<[String; 2]>,
}

impl GraphFile {
    pub fn from_graph(graph: &PoGraph, corpus_digest: impl Into<String>) -> Self {
        let mut classes: Vec<Vec<String>> = graph
            .classes()
            .iter()
            .map(|members| {
                let mut ids: Vec<String> = members.iter().map(|&m| graph.id(m).to_owned()).collect();
                ids.sort();
                ids
            })
            .collect();
        classes.sort();
        let mut edges: Vec<[String; 2]> = graph
            .class_edges()
            .iter()
            .map(|&(a, b)| [graph.representative(a).to_owned(), graph.representative(b).to_owned()])
            .collect();
        edges.sort();
        GraphFile {
            alpha: graph.alpha(),
            corpus_digest: corpus_digest.into(),
            classes,
            edges,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("graph file serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, GraphError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Rebuilds the graph over `corpus`, checking the digest first.
    pub fn into_graph(self, corpus: &Corpus, corpus_digest: &str) -> Result<PoGraph, GraphError> {
        if self.corpus_digest != corpus_digest {
            return Err(GraphError::DigestMismatch {
                expected: self.corpus_digest,
                actual: corpus_digest.to_owned(),
            });
        }
        super::GraphConfig::new(self.alpha)?;
        let lookup = |id: &str| corpus.position(id).ok_or_else(|| GraphError::UnknownId(id.to_owned()));
        let mut class_of_id: HashMap<usize, usize> = HashMap::new();
        let mut classes = Vec::with_capacity(self.classes.len());
        for (c, members) in self.classes.iter().enumerate() {
            let mut idx = Vec::with_capacity(members.len());
            for id in members {
                let m = lookup(id)?;
                class_of_id.insert(m, c);
                idx.push(m);
            }
            classes.push(idx);
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for [h, e] in &self.edges {
            let (h, e) = (lookup(h)?, lookup(e)?);
            let class = |m: usize| {
                class_of_id
                    .get(&m)
                    .copied()
                    .ok_or_else(|| GraphError::Invalid(format!("edge endpoint {m} has no class")))
            };
            edges.push((class(h)?, class(e)?));
        }
        PoGraph::from_parts(corpus.ids().map(str::to_owned).collect(), self.alpha, classes, edges)
    }
}
