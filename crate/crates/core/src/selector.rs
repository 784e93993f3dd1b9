//! Next-material selection.
//!
//! Two heuristics are available. Assessment picks the unknown material with
//! the largest expected number of newly classified materials,
//! `p·n⁺ + (1−p)·n⁻`. Recommendation picks, among unknown materials directly
//! harder than something the student can solve, the one with the most such
//! edges. The adaptive mode mixes them: assessment with probability
//! `max(0, 1 − #Prob/M)`, recommendation otherwise.
//!
//! Only `Unknown` materials are eligible. Ties go to the smallest id.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pograph::PoGraph;
use crate::student::{SolveOdds, StudentState};

pub const DEFAULT_BALANCE_HORIZON: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Adaptive,
    NonAdaptive,
    AssessmentOnly,
    Random,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Adaptive, Mode::NonAdaptive, Mode::AssessmentOnly, Mode::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Adaptive => "adaptive",
            Mode::NonAdaptive => "non-adaptive",
            Mode::AssessmentOnly => "assessment-only",
            Mode::Random => "random",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown mode {0:?} (expected adaptive, non-adaptive, assessment-only, or random)")]
    UnknownMode(String),
    #[error("balance horizon M must be at least 1")]
    ZeroHorizon,
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ConfigError::UnknownMode(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectorConfig {
    mode: Mode,
    horizon: u32,
    seed: u64,
}

impl SelectorConfig {
    pub fn new(mode: Mode, horizon: u32, seed: u64) -> Result<Self, ConfigError> {
        if horizon == 0 {
            return Err(ConfigError::ZeroHorizon);
        }
        Ok(SelectorConfig { mode, horizon, seed })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The balance horizon M.
    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    Assessment,
    Recommendation,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionResult {
    pub material: usize,
    pub heuristic: Heuristic,
    /// Expected gain for assessment, relevance for recommendation, 0 for random.
    pub score: f64,
    pub candidates_considered: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no eligible material left")]
pub struct Exhausted;

fn eligible(state: &StudentState) -> impl Iterator<Item = usize> + '_ {
    state.unknown_set().ones()
}

// a < b in the tie-break order
fn id_less(graph: &PoGraph, a: usize, b: usize) -> bool {
    graph.id(a) < graph.id(b)
}

/// Expected-information-gain selection with p from the state's own counters.
pub fn assess_select(state: &StudentState, graph: &PoGraph) -> Result<SelectionResult, Exhausted> {
    assess_select_with_odds(state, graph, state.odds())
}

/// As [`assess_select`], with p taken from `odds` instead of the state.
pub fn assess_select_with_odds(
    state: &StudentState,
    graph: &PoGraph,
    odds: SolveOdds,
) -> Result<SelectionResult, Exhausted> {
    // Scores are compared as integers scaled by N+ + N− (or 2 at the 0.5 prior).
    let (w_pos, w_neg, scale) = match odds.solved + odds.failed {
        0 => (1u128, 1u128, 2u128),
        t => (odds.solved as u128, odds.failed as u128, t as u128),
    };
    let mut best: Option<(u128, usize)> = None;
    let mut considered = 0;
    for v in eligible(state) {
        considered += 1;
        let (n_plus, n_minus) = state.info_gain_unchecked(graph, v);
        let key = w_pos * n_plus as u128 + w_neg * n_minus as u128;
        let better = match best {
            None => true,
            Some((k, b)) => match key.cmp(&k) {
                Ordering::Greater => true,
                Ordering::Equal => id_less(graph, v, b),
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((key, v));
        }
    }
    let (key, material) = best.ok_or(Exhausted)?;
    Ok(SelectionResult {
        material,
        heuristic: Heuristic::Assessment,
        score: key as f64 / scale as f64,
        candidates_considered: considered,
    })
}

/// Unknown materials directly harder than something the student can solve.
///
/// With nothing solvable yet, the unknown minimal materials instead.
/// Sorted by node index.
pub fn zpd_candidates(state: &StudentState, graph: &PoGraph) -> Vec<usize> {
    if state.solvable_set().is_clear() {
        return eligible(state).filter(|&v| graph.is_minimal(v)).collect();
    }
    eligible(state).filter(|&v| relevance(v, state, graph) > 0).collect()
}

/// Number of direct edges from `node` to solvable materials.
pub fn relevance(node: usize, state: &StudentState, graph: &PoGraph) -> usize {
    let solvable = state.solvable_set();
    graph.direct_easier(node).filter(|&t| solvable.contains(t)).count()
}

/// Most relevant ZPD candidate; falls back to assessment when there is none.
pub fn recommend_select(state: &StudentState, graph: &PoGraph) -> Result<SelectionResult, Exhausted> {
    let candidates = zpd_candidates(state, graph);
    let best = candidates
        .iter()
        .map(|&v| (relevance(v, state, graph), v))
        .reduce(|best, cur| match cur.0.cmp(&best.0) {
            Ordering::Greater => cur,
            Ordering::Equal if id_less(graph, cur.1, best.1) => cur,
            _ => best,
        });
    match best {
        Some((rel, material)) => Ok(SelectionResult {
            material,
            heuristic: Heuristic::Recommendation,
            score: rel as f64,
            candidates_considered: candidates.len(),
        }),
        None => assess_select(state, graph),
    }
}

/// Probability of taking the assessment heuristic after `problems_seen` answers.
pub fn balance_probability(problems_seen: usize, horizon: u32) -> f64 {
    (1.0 - problems_seen as f64 / horizon as f64).max(0.0)
}

/// One coin flip of the adaptive schedule; `true` means assess.
pub fn choose_assessment<R: Rng + ?Sized>(problems_seen: usize, horizon: u32, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    u < balance_probability(problems_seen, horizon)
}

/// The RNG for turn `turn` of a session seeded with `seed`.
///
/// Each turn gets its own ChaCha stream, so a selection depends only on the
/// state, the seed, and the turn index.
pub fn turn_rng(seed: u64, turn: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(turn);
    rng
}

pub fn next_material<R: Rng + ?Sized>(
    state: &StudentState,
    graph: &PoGraph,
    config: &SelectorConfig,
    rng: &mut R,
) -> Result<SelectionResult, Exhausted> {
    match config.mode {
        Mode::Adaptive => {
            if choose_assessment(state.problems_seen(), config.horizon, rng) {
                assess_select(state, graph)
            } else {
                recommend_select(state, graph)
            }
        }
        Mode::NonAdaptive => recommend_select(state, graph),
        Mode::AssessmentOnly => assess_select(state, graph),
        Mode::Random => {
            let pool: Vec<usize> = eligible(state).collect();
            if pool.is_empty() {
                return Err(Exhausted);
            }
            let material = pool[rng.random_range(0..pool.len())];
            Ok(SelectionResult {
                material,
                heuristic: Heuristic::Random,
                score: 0.0,
                candidates_considered: pool.len(),
            })
        }
    }
}
