//! Synthetic corpora, simulated students, and batch session runs.
//!
//! A simulated student knows a fixed set of concept tokens and understands a
//! material when it knows at least a fraction β of the material's distinct
//! concepts. Responses may be flipped with a fixed noise probability.
//! Inference accuracy is always scored against the noiseless rule.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Material, Media};
use crate::pograph::PoGraph;
use crate::selector::{next_material, turn_rng, Heuristic, Mode, SelectorConfig};
use crate::student::{init_state, KnowledgeStatus, StudentError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid synthetic parameters: {0}")]
    Params(String),
    #[error("max_turns must be at least 1")]
    ZeroTurns,
    #[error("graph and corpus disagree at node {0}")]
    Mismatch(usize),
    #[error("no traces to evaluate")]
    NoTraces,
    #[error(transparent)]
    Student(#[from] StudentError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediaMix {
    pub text: f64,
    pub audio: f64,
    pub video: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_materials: usize,
    pub vocab_size: usize,
    pub zipf_exponent: f64,
    /// Inclusive min/max distinct concepts per material.
    pub length_range: (usize, usize),
    pub media_mix: MediaMix,
    /// Inclusive speaking-rate range for audio and video, moras per second.
    pub rate_range: (f64, f64),
    pub subtitle_probability: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_materials: 200,
            vocab_size: 1000,
            zipf_exponent: 1.3,
            length_range: (5, 30),
            media_mix: MediaMix {
                text: 0.6,
                audio: 0.2,
                video: 0.2,
            },
            rate_range: (5.0, 8.0),
            subtitle_probability: 0.5,
            seed: 42,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Params(m.to_owned()));
        let (lo, hi) = self.length_range;
        let mix = self.media_mix;
        if self.n_materials == 0 {
            return bad("n_materials must be at least 1");
        }
        if lo == 0 || lo > hi {
            return bad("length_range must satisfy 1 <= min <= max");
        }
        if hi > self.vocab_size {
            return bad("length_range max exceeds vocab_size");
        }
        if !(self.zipf_exponent.is_finite() && self.zipf_exponent >= 0.0) {
            return bad("zipf_exponent must be finite and nonnegative");
        }
        if [mix.text, mix.audio, mix.video].iter().any(|&p| !(p >= 0.0)) {
            return bad("media proportions must be nonnegative");
        }
        if ((mix.text + mix.audio + mix.video) - 1.0).abs() > 1e-9 {
            return bad("media proportions must sum to 1");
        }
        let (r0, r1) = self.rate_range;
        if !(r0.is_finite() && r1.is_finite() && 0.0 <= r0 && r0 <= r1) {
            return bad("rate_range must satisfy 0 <= min <= max");
        }
        if !(0.0..=1.0).contains(&self.subtitle_probability) {
            return bad("subtitle_probability must be in [0, 1]");
        }
        Ok(())
    }
}

/// Token name for frequency rank `rank` (0-based) in a vocabulary of `size`.
pub fn token_name(rank: usize, size: usize) -> String {
    let width = size.saturating_sub(1).to_string().len().max(3);
    format!("w{rank:0width$}")
}

/// Deterministic Zipfian corpus.
pub fn gen_synthetic_corpus(params: &SynthParams) -> Result<Corpus, SimError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let zipf =
        Zipf::new(params.vocab_size as f64, params.zipf_exponent).map_err(|e| SimError::Params(e.to_string()))?;
    let (lo, hi) = params.length_range;
    let (r0, r1) = params.rate_range;
    let id_width = params.n_materials.saturating_sub(1).to_string().len().max(3);

    let mut materials = Vec::with_capacity(params.n_materials);
    for i in 0..params.n_materials {
        let target = rng.random_range(lo..=hi);
        let mut distinct = HashSet::new();
        let mut draws = Vec::new();
        while distinct.len() < target {
            let rank = zipf.sample(&mut rng) as usize - 1;
            distinct.insert(rank);
            draws.push(token_name(rank, params.vocab_size));
        }
        let u: f64 = rng.random();
        let media = if u < params.media_mix.text {
            Media::Text
        } else if u < params.media_mix.text + params.media_mix.audio {
            Media::Audio
        } else {
            Media::Video
        };
        let rate = (media != Media::Text).then(|| {
            let r = if r1 > r0 { rng.random_range(r0..=r1) } else { r0 };
            (r * 10.0).round() / 10.0
        });
        let subtitles = media == Media::Video && rng.random::<f64>() < params.subtitle_probability;
        let id = format!("m{i:0id_width$}");
        let material = Material::new(id.clone(), media, draws, rate, subtitles)
            .expect("generator respects material invariants")
            .with_display(format!("Synthetic {media} {i}"), format!("synthetic://{id}"));
        materials.push(material);
    }
    Ok(Corpus::from_materials(materials).expect("generated ids are unique"))
}

/// A student with a static vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStudent {
    pub known_vocab: HashSet<String>,
    /// Comprehension threshold in (0, 1].
    pub beta: f64,
    /// Response flip probability in [0, 0.5).
    pub noise: f64,
    pub seed: u64,
}

impl SimStudent {
    pub fn new(known_vocab: HashSet<String>, beta: f64, noise: f64, seed: u64) -> Result<Self, SimError> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(SimError::Params(format!("beta must be in (0, 1], got {beta}")));
        }
        if !(0.0..0.5).contains(&noise) {
            return Err(SimError::Params(format!("noise must be in [0, 0.5), got {noise}")));
        }
        Ok(SimStudent {
            known_vocab,
            beta,
            noise,
            seed,
        })
    }

    /// Samples a vocabulary: tokens ranked by document frequency, an ability
    /// cut drawn uniformly over the ranks, and a logistic blur around the cut.
    pub fn sample(corpus: &Corpus, beta: f64, noise: f64, seed: u64) -> Result<Self, SimError> {
        let ranked = frequency_ranking(corpus);
        let v = ranked.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let cut = rng.random_range(0.0..=v);
        let width = (v / 20.0).max(1.0);
        let known = ranked
            .into_iter()
            .enumerate()
            .filter(|&(r, _)| {
                let p = 1.0 / (1.0 + ((r as f64 - cut) / width).exp());
                rng.random::<f64>() < p
            })
            .map(|(_, t)| t)
            .collect();
        Self::new(known, beta, noise, seed)
    }

    /// Noiseless comprehension: known fraction of distinct concepts ≥ β.
    pub fn understands(&self, material: &Material) -> bool {
        let distinct = material.distinct_concepts();
        let known = distinct.iter().filter(|c| self.known_vocab.contains(*c)).count();
        known as f64 / distinct.len() as f64 >= self.beta
    }
}

fn frequency_ranking(corpus: &Corpus) -> Vec<String> {
    let mut df: HashMap<&str, usize> = HashMap::new();
    for m in corpus.materials() {
        for c in m.distinct_concepts() {
            *df.entry(c.as_str()).or_insert(0) += 1;
        }
    }
    let mut tokens: Vec<(&str, usize)> = df.into_iter().collect();
    tokens.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    tokens.into_iter().map(|(t, _)| t.to_owned()).collect()
}

/// Response RNG for turn `turn`; disjoint from the selector's streams.
pub fn response_rng(student_seed: u64, turn: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(student_seed);
    rng.set_stream(turn | 1 << 63);
    rng
}

/// Comprehension with noise. Always consumes exactly one draw.
pub fn sim_response<R: Rng + ?Sized>(student: &SimStudent, material: &Material, rng: &mut R) -> bool {
    let flip = rng.random::<f64>() < student.noise;
    student.understands(material) ^ flip
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub turn: usize,
    pub material_id: String,
    pub heuristic: Heuristic,
    pub score: f64,
    pub response: bool,
    pub known_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub turns: usize,
    pub known_fraction: f64,
    /// Turns needed until ≥ 90% of materials had a known status.
    pub turns_to_90pct: Option<usize>,
    pub inference_accuracy: f64,
    pub inferred_count: usize,
    pub contradiction_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionTrace {
    pub mode: Mode,
    pub records: Vec<TurnRecord>,
    pub final_statuses: Vec<KnowledgeStatus>,
    pub summary: TraceSummary,
}

impl SessionTrace {
    /// One JSON object per turn.
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }
}

/// Inferred statuses checked against the student's noiseless comprehension.
/// Returns `(correct, inferred)`.
fn score_inferences(statuses: &[KnowledgeStatus], corpus: &Corpus, student: &SimStudent) -> (usize, usize) {
    let mut correct = 0;
    let mut inferred = 0;
    for (i, st) in statuses.iter().enumerate() {
        if st.is_inferred() {
            inferred += 1;
            if st.is_solvable() == student.understands(corpus.get(i)) {
                correct += 1;
            }
        }
    }
    (correct, inferred)
}

fn accuracy(correct: usize, inferred: usize) -> f64 {
    if inferred == 0 {
        1.0
    } else {
        correct as f64 / inferred as f64
    }
}

/// Runs select → respond → update until exhaustion or `max_turns`.
pub fn run_session(
    graph: &PoGraph,
    corpus: &Corpus,
    student: &SimStudent,
    config: &SelectorConfig,
    max_turns: usize,
) -> Result<SessionTrace, SimError> {
    if max_turns == 0 {
        return Err(SimError::ZeroTurns);
    }
    if graph.len() != corpus.len() {
        return Err(SimError::Mismatch(graph.len().min(corpus.len())));
    }
    if let Some(i) = (0..graph.len()).find(|&i| graph.id(i) != corpus.get(i).id()) {
        return Err(SimError::Mismatch(i));
    }
    let n = graph.len();
    let mut state = init_state(graph, config.seed());
    let mut records = Vec::new();
    let mut turns_to_90pct = None;
    for turn in 0..max_turns {
        let Ok(sel) = next_material(&state, graph, config, &mut turn_rng(config.seed(), turn as u64)) else {
            break;
        };
        state.present(sel.material)?;
        let response = sim_response(
            student,
            corpus.get(sel.material),
            &mut response_rng(student.seed, turn as u64),
        );
        state.record_response(graph, sel.material, response)?;
        let known_after = n - state.unknown_set().count_ones(..);
        if turns_to_90pct.is_none() && known_after * 10 >= n * 9 {
            turns_to_90pct = Some(turn + 1);
        }
        records.push(TurnRecord {
            turn,
            material_id: graph.id(sel.material).to_owned(),
            heuristic: sel.heuristic,
            score: sel.score,
            response,
            known_after,
        });
    }
    let final_statuses = state.statuses().to_vec();
    let (correct, inferred) = score_inferences(&final_statuses, corpus, student);
    let known = n - state.unknown_set().count_ones(..);
    Ok(SessionTrace {
        mode: config.mode(),
        summary: TraceSummary {
            turns: records.len(),
            known_fraction: known as f64 / n as f64,
            turns_to_90pct,
            inference_accuracy: accuracy(correct, inferred),
            inferred_count: inferred,
            contradiction_count: state.contradictions().len(),
        },
        records,
        final_statuses,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub mode: Mode,
    pub n_students: usize,
    /// Mean over the sessions that reached 90%; `None` if none did.
    pub mean_turns_to_90pct: Option<f64>,
    pub sessions_reaching_90pct: usize,
    /// Pooled over all sessions of this mode.
    pub inference_accuracy: f64,
    pub inferred_count: usize,
    /// Accuracy is 1.0 by convention when nothing was inferred.
    pub accuracy_vacuous: bool,
    pub mean_recommend_relevance: Option<f64>,
    pub contradiction_count: usize,
}

/// Per-mode aggregates. `students[i]` is the latent truth behind `traces[i]`.
pub fn evaluate(traces: &[SessionTrace], students: &[SimStudent], corpus: &Corpus) -> Result<Vec<Report>, SimError> {
    if traces.is_empty() {
        return Err(SimError::NoTraces);
    }
    assert_eq!(traces.len(), students.len(), "one latent student per trace");
    let mut by_mode: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, t) in traces.iter().enumerate() {
        let key = Mode::ALL.iter().position(|&m| m == t.mode).expect("mode listed");
        by_mode.entry(key).or_default().push(i);
    }
    Ok(by_mode
        .into_iter()
        .map(|(key, idx)| {
            let mut reached = Vec::new();
            let (mut correct, mut inferred, mut contradictions) = (0, 0, 0);
            let (mut rel_sum, mut rel_n) = (0.0, 0usize);
            for &i in &idx {
                let t = &traces[i];
                if let Some(k) = t.summary.turns_to_90pct {
                    reached.push(k as f64);
                }
                let (c, n) = score_inferences(&t.final_statuses, corpus, &students[i]);
                correct += c;
                inferred += n;
                contradictions += t.summary.contradiction_count;
                for r in t.records.iter().filter(|r| r.heuristic == Heuristic::Recommendation) {
                    rel_sum += r.score;
                    rel_n += 1;
                }
            }
            Report {
                mode: Mode::ALL[key],
                n_students: idx.len(),
                mean_turns_to_90pct: (!reached.is_empty()).then(|| reached.iter().sum::<f64>() / reached.len() as f64),
                sessions_reaching_90pct: reached.len(),
                inference_accuracy: accuracy(correct, inferred),
                inferred_count: inferred,
                accuracy_vacuous: inferred == 0,
                mean_recommend_relevance: (rel_n > 0).then(|| rel_sum / rel_n as f64),
                contradiction_count: contradictions,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchParams {
    pub mode: Mode,
    pub horizon: u32,
    pub n_students: usize,
    pub seed: u64,
    pub beta: f64,
    pub noise: f64,
    /// `None` runs every session to exhaustion.
    pub max_turns: Option<usize>,
}

impl Default for BatchParams {
    fn default() -> Self {
        BatchParams {
            mode: Mode::Adaptive,
            horizon: crate::selector::DEFAULT_BALANCE_HORIZON,
            n_students: 100,
            seed: 42,
            beta: 0.8,
            noise: 0.0,
            max_turns: None,
        }
    }
}

/// Independent sessions in parallel; session `i` uses seed `seed + i` for both
/// its student and its selector.
pub fn simulate_batch(
    graph: &PoGraph,
    corpus: &Corpus,
    params: &BatchParams,
) -> Result<(Vec<SessionTrace>, Vec<SimStudent>), SimError> {
    let config =
        |seed| SelectorConfig::new(params.mode, params.horizon, seed).map_err(|e| SimError::Params(e.to_string()));
    config(params.seed)?;
    let max_turns = params.max_turns.unwrap_or(corpus.len()).max(1);
    let results: Vec<(SessionTrace, SimStudent)> = (0..params.n_students)
        .into_par_iter()
        .map(|i| {
            let seed = params.seed.wrapping_add(i as u64);
            let student = SimStudent::sample(corpus, params.beta, params.noise, seed)?;
            let trace = run_session(graph, corpus, &student, &config(seed)?, max_turns)?;
            Ok((trace, student))
        })
        .collect::<Result<_, SimError>>()?;
    Ok(results.into_iter().unzip())
}
