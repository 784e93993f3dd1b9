//! Per-student knowledge over a graph, with response propagation.
//!
//! A solved material implies every material below it is solvable; a failed
//! one implies every material above it is not. Only `Unknown` statuses are
//! ever filled in by propagation.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pograph::PoGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnowledgeStatus {
    Unknown,
    InferredSolvable,
    InferredUnsolvable,
    ObservedSolved,
    ObservedFailed,
}

impl KnowledgeStatus {
    pub fn is_solvable(self) -> bool {
        matches!(self, Self::InferredSolvable | Self::ObservedSolved)
    }

    pub fn is_unsolvable(self) -> bool {
        matches!(self, Self::InferredUnsolvable | Self::ObservedFailed)
    }

    pub fn is_known(self) -> bool {
        self != Self::Unknown
    }

    pub fn is_observed(self) -> bool {
        matches!(self, Self::ObservedSolved | Self::ObservedFailed)
    }

    pub fn is_inferred(self) -> bool {
        matches!(self, Self::InferredSolvable | Self::InferredUnsolvable)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StudentError {
    #[error("material {0} is out of range")]
    OutOfRange(usize),
    #[error("material {0} has already been answered")]
    AlreadyAnswered(usize),
    #[error("material {got} was not presented (pending: {pending:?})")]
    NotPresented { got: usize, pending: Option<usize> },
    #[error("material {pending} is still awaiting a response")]
    ResponsePending { pending: usize },
    #[error("material {0} is not unknown")]
    NotUnknown(usize),
}

/// A direct observation that disagreed with an earlier inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Contradiction {
    pub material: usize,
    pub inferred: KnowledgeStatus,
    pub solved: bool,
}

/// N+ and N−: presented materials solved and failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveOdds {
    pub solved: u64,
    pub failed: u64,
}

impl SolveOdds {
    /// N+ / (N+ + N−), or 0.5 before any response.
    pub fn probability(self) -> f64 {
        let total = self.solved + self.failed;
        if total == 0 {
            0.5
        } else {
            self.solved as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StatusCounts {
    pub unknown: usize,
    pub inferred_solvable: usize,
    pub inferred_unsolvable: usize,
    pub observed_solved: usize,
    pub observed_failed: usize,
}

impl StatusCounts {
    pub fn known(&self) -> usize {
        self.inferred_solvable + self.inferred_unsolvable + self.observed_solved + self.observed_failed
    }
}

/// What one response changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResponseOutcome {
    pub newly_inferred: usize,
    pub contradiction: Option<Contradiction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudentState {
    status: Vec<KnowledgeStatus>,
    n_pos: u64,
    n_neg: u64,
    presented: Vec<usize>,
    pending: Option<usize>,
    rng_seed: u64,
    unknown: FixedBitSet,
    solvable: FixedBitSet,
    contradictions: Vec<Contradiction>,
}

/// Fresh state: nothing known about the student.
pub fn init_state(graph: &PoGraph, seed: u64) -> StudentState {
    StudentState::new(graph.len(), seed)
}

impl StudentState {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut unknown = FixedBitSet::with_capacity(n);
        unknown.insert_range(..);
        StudentState {
            status: vec![KnowledgeStatus::Unknown; n],
            n_pos: 0,
            n_neg: 0,
            presented: Vec::new(),
            pending: None,
            rng_seed: seed,
            unknown,
            solvable: FixedBitSet::with_capacity(n),
            contradictions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.status.len()
    }

    pub fn is_empty(&self) -> bool {
        self.status.is_empty()
    }

    pub fn status(&self, node: usize) -> KnowledgeStatus {
        self.status[node]
    }

    pub fn statuses(&self) -> &[KnowledgeStatus] {
        &self.status
    }

    pub fn n_pos(&self) -> u64 {
        self.n_pos
    }

    pub fn n_neg(&self) -> u64 {
        self.n_neg
    }

    /// #Prob: number of materials answered so far.
    pub fn problems_seen(&self) -> usize {
        self.presented.len()
    }

    pub fn presented(&self) -> &[usize] {
        &self.presented
    }

    pub fn pending(&self) -> Option<usize> {
        self.pending
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn contradictions(&self) -> &[Contradiction] {
        &self.contradictions
    }

    pub fn unknown_set(&self) -> &FixedBitSet {
        &self.unknown
    }

    /// ObservedSolved ∪ InferredSolvable.
    pub fn solvable_set(&self) -> &FixedBitSet {
        &self.solvable
    }

    pub fn odds(&self) -> SolveOdds {
        SolveOdds {
            solved: self.n_pos,
            failed: self.n_neg,
        }
    }

    /// Estimated probability that the student solves the next material.
    pub fn p_estimate(&self) -> f64 {
        self.odds().probability()
    }

    /// Marks `node` as shown and awaiting a response.
    pub fn present(&mut self, node: usize) -> Result<(), StudentError> {
        self.check_range(node)?;
        if self.status[node].is_observed() {
            return Err(StudentError::AlreadyAnswered(node));
        }
        match self.pending {
            Some(p) if p != node => Err(StudentError::ResponsePending { pending: p }),
            _ => {
                self.pending = Some(node);
                Ok(())
            }
        }
    }

    /// Applies the student's answer on the pending material and propagates it.
    pub fn record_response(
        &mut self,
        graph: &PoGraph,
        node: usize,
        solved: bool,
    ) -> Result<ResponseOutcome, StudentError> {
        self.check_range(node)?;
        if self.status[node].is_observed() {
            return Err(StudentError::AlreadyAnswered(node));
        }
        if self.pending != Some(node) {
            return Err(StudentError::NotPresented {
                got: node,
                pending: self.pending,
            });
        }
        self.pending = None;
        self.presented.push(node);
        if solved {
            self.n_pos += 1;
        } else {
            self.n_neg += 1;
        }

        let prior = self.status[node];
        let contradicts = (solved && prior.is_unsolvable()) || (!solved && prior.is_solvable());
        self.set(
            node,
            if solved {
                KnowledgeStatus::ObservedSolved
            } else {
                KnowledgeStatus::ObservedFailed
            },
        );
        if contradicts {
            let c = Contradiction {
                material: node,
                inferred: prior,
                solved,
            };
            log::info!("response contradicts inference: {c:?}");
            self.contradictions.push(c);
            return Ok(ResponseOutcome {
                newly_inferred: 0,
                contradiction: Some(c),
            });
        }

        let (reach, inferred) = if solved {
            (graph.easier_reach(node), KnowledgeStatus::InferredSolvable)
        } else {
            (graph.harder_reach(node), KnowledgeStatus::InferredUnsolvable)
        };
        let mut targets = reach.clone();
        targets.intersect_with(&self.unknown);
        let newly_inferred = targets.count_ones(..);
        for t in targets.ones() {
            self.set(t, inferred);
        }
        debug_assert!(!self.contradictions.is_empty() || self.is_closed(graph));
        Ok(ResponseOutcome {
            newly_inferred,
            contradiction: None,
        })
    }

    fn set(&mut self, node: usize, status: KnowledgeStatus) {
        self.status[node] = status;
        self.unknown.set(node, status == KnowledgeStatus::Unknown);
        self.solvable.set(node, status.is_solvable());
    }

    fn check_range(&self, node: usize) -> Result<(), StudentError> {
        if node < self.status.len() {
            Ok(())
        } else {
            Err(StudentError::OutOfRange(node))
        }
    }

    /// `(n+, n−)` for an unknown material: itself plus the unknown materials
    /// that a solve (resp. a failure) would settle.
    pub fn info_gain(&self, graph: &PoGraph, node: usize) -> Result<(usize, usize), StudentError> {
        self.check_range(node)?;
        if self.status[node] != KnowledgeStatus::Unknown {
            return Err(StudentError::NotUnknown(node));
        }
        Ok(self.info_gain_unchecked(graph, node))
    }

    pub(crate) fn info_gain_unchecked(&self, graph: &PoGraph, node: usize) -> (usize, usize) {
        let below = graph.easier_reach(node).intersection_count(&self.unknown);
        let above = graph.harder_reach(node).intersection_count(&self.unknown);
        (1 + below, 1 + above)
    }

    /// Solvable statuses closed downward and unsolvable ones closed upward.
    pub fn is_closed(&self, graph: &PoGraph) -> bool {
        (0..self.len()).all(|v| {
            let st = self.status[v];
            if st.is_solvable() {
                graph.easier_reach(v).ones().all(|t| self.status[t].is_solvable())
            } else if st.is_unsolvable() {
                graph.harder_reach(v).ones().all(|t| self.status[t].is_unsolvable())
            } else {
                true
            }
        })
    }

    pub fn counts(&self) -> StatusCounts {
        let mut c = StatusCounts::default();
        for st in &self.status {
            match st {
                KnowledgeStatus::Unknown => c.unknown += 1,
                KnowledgeStatus::InferredSolvable => c.inferred_solvable += 1,
                KnowledgeStatus::InferredUnsolvable => c.inferred_unsolvable += 1,
                KnowledgeStatus::ObservedSolved => c.observed_solved += 1,
                KnowledgeStatus::ObservedFailed => c.observed_failed += 1,
            }
        }
        c
    }

    pub fn snapshot(&self, graph: &PoGraph) -> StateSnapshot {
        StateSnapshot {
            statuses: self
                .status
                .iter()
                .enumerate()
                .map(|(i, &s)| (graph.id(i).to_owned(), s))
                .collect(),
            n_pos: self.n_pos,
            n_neg: self.n_neg,
            presented: self.presented.iter().map(|&i| graph.id(i).to_owned()).collect(),
        }
    }
}

/// Serializable view of a state, keyed by material id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub statuses: BTreeMap<String, KnowledgeStatus>,
    pub n_pos: u64,
    pub n_neg: u64,
    pub presented: Vec<String>,
}
