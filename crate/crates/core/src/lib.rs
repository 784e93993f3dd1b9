//! Adaptive learning-material recommendation over fuzzy partial-ordering graphs.
//!
//! Materials are ordered by concept coverage into a DAG of "directly harder
//! than" edges ([`pograph`]). A student's knowledge is tracked per material
//! and propagated along that DAG ([`student`]), and the next material is
//! chosen by expected information gain, by zone-of-proximal-development
//! relevance, or by a schedule mixing the two ([`selector`]). [`simulate`]
//! drives whole sessions with synthetic corpora and students.

pub mod corpus;
pub mod pograph;
pub mod selector;
pub mod simulate;
pub mod student;

pub use corpus::{concept_stats, corpus_digest, load_corpus, ConceptStats, Corpus, CorpusError, Material, Media};
pub use pograph::{build_relation, density_sweep, DensityRow, GraphConfig, GraphError, GraphFile, PoGraph, Relation};
pub use selector::{Heuristic, Mode, SelectionResult, SelectorConfig};
pub use student::{init_state, KnowledgeStatus, StudentState};
