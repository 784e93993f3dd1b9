//! Concept-annotated learning materials and the line-delimited corpus format.
//!
//! A corpus file is UTF-8 with one JSON object per line:
//!
//! ```text
//! {"id":"m1","media":"text","concepts":["a","b","a"],"title":"..","content":".."}
//! {"id":"m2","media":"video","concepts":["a"],"speaking_rate":6.5,"subtitles":true,"title":"..","content":".."}
//! ```
//!
//! Concepts are opaque tokens. Repeats are kept as counts, but every
//! difficulty comparison works on the distinct set.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate material id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: material {id:?}: {message}")]
    InvalidMaterial { line: usize, id: String, message: String },
    #[error("material {id:?}: {message}")]
    Invalid { id: String, message: String },
    #[error("corpus is empty")]
    Empty,
    #[error("duplicate material id {0:?}")]
    Duplicate(String),
    #[error("reading corpus: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Media {
    Text,
    Audio,
    Video,
}

impl fmt::Display for Media {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Media::Text => "text",
            Media::Audio => "audio",
            Media::Video => "video",
        })
    }
}

/// One learning item: a text, an audio clip, or a video.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    id: String,
    media: Media,
    concepts: BTreeMap<String, u32>,
    distinct: Vec<String>,
    speaking_rate: Option<f64>,
    has_subtitles: bool,
    title: String,
    content: String,
}

impl Material {
    /// Builds a text material. Fails if `concepts` is empty.
    pub fn text<I, S>(id: impl Into<String>, concepts: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(id.into(), Media::Text, concepts, None, false)
    }

    pub fn audio<I, S>(id: impl Into<String>, concepts: I, speaking_rate: f64) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(id.into(), Media::Audio, concepts, Some(speaking_rate), false)
    }

    pub fn video<I, S>(
        id: impl Into<String>,
        concepts: I,
        speaking_rate: f64,
        has_subtitles: bool,
    ) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(id.into(), Media::Video, concepts, Some(speaking_rate), has_subtitles)
    }

    /// General constructor; enforces the per-media feature rules.
    pub fn new<I, S>(
        id: String,
        media: Media,
        concepts: I,
        speaking_rate: Option<f64>,
        has_subtitles: bool,
    ) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let invalid = |message: &str| CorpusError::Invalid {
            id: id.clone(),
            message: message.to_string(),
        };
        match (media, speaking_rate) {
            (Media::Text, Some(_)) => return Err(invalid("text material must not have speaking_rate")),
            (Media::Audio | Media::Video, None) => {
                return Err(invalid("speaking_rate is required for audio and video"))
            }
            (_, Some(rate)) if !rate.is_finite() || rate < 0.0 => {
                return Err(invalid("speaking_rate must be a finite nonnegative number"))
            }
            _ => {}
        }
        if has_subtitles && media != Media::Video {
            return Err(invalid("subtitles are only meaningful for video"));
        }
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for c in concepts {
            *counts.entry(c.into()).or_insert(0) += 1;
        }
        if counts.is_empty() {
            return Err(invalid("concepts must be nonempty"));
        }
        let distinct = counts.keys().cloned().collect();
        Ok(Material {
            id,
            media,
            concepts: counts,
            distinct,
            speaking_rate,
            has_subtitles,
            title: String::new(),
            content: String::new(),
        })
    }

    pub fn with_display(mut self, title: impl Into<String>, content: impl Into<String>) -> Self {
        self.title = title.into();
        self.content = content.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn media(&self) -> Media {
        self.media
    }

    /// Concept multiset as token → occurrence count.
    pub fn concepts(&self) -> &BTreeMap<String, u32> {
        &self.concepts
    }

    /// Distinct concept tokens, sorted.
    pub fn distinct_concepts(&self) -> &[String] {
        &self.distinct
    }

    pub fn speaking_rate(&self) -> Option<f64> {
        self.speaking_rate
    }

    pub fn has_subtitles(&self) -> bool {
        self.has_subtitles
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn content(&self) -> &str {
        &self.content
    }

    fn to_record(&self) -> Record {
        let concepts = self
            .concepts
            .iter()
            .flat_map(|(c, &n)| std::iter::repeat_n(c.clone(), n as usize))
            .collect();
        Record {
            id: self.id.clone(),
            media: self.media,
            concepts,
            speaking_rate: self.speaking_rate,
            subtitles: (self.media == Media::Video).then_some(self.has_subtitles),
            title: self.title.clone(),
            content: self.content.clone(),
        }
    }
}

/// Wire form of one corpus line.
#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: String,
    media: Media,
    concepts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    speaking_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subtitles: Option<bool>,
    title: String,
    content: String,
}

const RECORD_FIELDS: [&str; 7] = [
    "id",
    "media",
    "concepts",
    "speaking_rate",
    "subtitles",
    "title",
    "content",
];

/// An immutable, indexed collection of materials.
#[derive(Debug, Clone)]
pub struct Corpus {
    materials: Vec<Material>,
    index: HashMap<String, usize>,
    vocab: BTreeSet<String>,
    // Interned distinct concept sets, sorted, one per material.
    concept_ids: Vec<Vec<u32>>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.materials == other.materials
    }
}

impl Corpus {
    pub fn from_materials(materials: Vec<Material>) -> Result<Self, CorpusError> {
        if materials.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut index = HashMap::with_capacity(materials.len());
        for (i, m) in materials.iter().enumerate() {
            if index.insert(m.id.clone(), i).is_some() {
                return Err(CorpusError::Duplicate(m.id.clone()));
            }
        }
        let vocab: BTreeSet<String> = materials.iter().flat_map(|m| m.distinct.iter().cloned()).collect();
        let token_ids: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i as u32)).collect();
        // distinct lists are sorted and the vocab numbering is order-preserving,
        // so the interned lists come out sorted as well.
        let concept_ids = materials
            .iter()
            .map(|m| m.distinct.iter().map(|t| token_ids[t.as_str()]).collect())
            .collect();
        Ok(Corpus {
            materials,
            index,
            vocab,
            concept_ids,
        })
    }

    /// Parses the line-delimited format. Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut materials = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| CorpusError::Malformed {
                line,
                message: e.to_string(),
            })?;
            let Some(obj) = value.as_object() else {
                return Err(CorpusError::Malformed {
                    line,
                    message: "expected a JSON object".into(),
                });
            };
            for key in obj.keys() {
                if !RECORD_FIELDS.contains(&key.as_str()) {
                    log::warn!("corpus line {line}: ignoring unknown field {key:?}");
                }
            }
            let record: Record = serde_json::from_value(value).map_err(|e| CorpusError::Malformed {
                line,
                message: e.to_string(),
            })?;
            if let Some(first) = seen.insert(record.id.clone(), line) {
                log::debug!("id {:?} first seen on line {first}", record.id);
                return Err(CorpusError::DuplicateId { line, id: record.id });
            }
            let material = Material::new(
                record.id.clone(),
                record.media,
                record.concepts,
                record.speaking_rate,
                record.subtitles.unwrap_or(false),
            )
            .map_err(|e| match e {
                CorpusError::Invalid { id, message } => CorpusError::InvalidMaterial { line, id, message },
                other => other,
            })?
            .with_display(record.title, record.content);
            materials.push(material);
        }
        Self::from_materials(materials)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CorpusError> {
        let text = std::str::from_utf8(bytes).map_err(|e| CorpusError::Malformed {
            line: bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1,
            message: "invalid UTF-8".into(),
        })?;
        Self::parse(text)
    }

    /// Serializes back to the line-delimited format (one trailing newline per record).
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.materials {
            out.push_str(&serde_json::to_string(&m.to_record()).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn get(&self, idx: usize) -> &Material {
        &self.materials[idx]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn by_id(&self, id: &str) -> Option<&Material> {
        self.position(id).map(|i| &self.materials[i])
    }

    pub fn vocab(&self) -> &BTreeSet<String> {
        &self.vocab
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.materials.iter().map(|m| m.id.as_str())
    }

    /// Sorted interned distinct-concept ids of material `idx`.
    pub(crate) fn concept_ids(&self, idx: usize) -> &[u32] {
        &self.concept_ids[idx]
    }
}

/// Reads and parses a corpus file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let bytes = std::fs::read(path)?;
    Corpus::from_bytes(&bytes)
}

/// Hex SHA-256 of raw corpus bytes, as recorded in graph files.
pub fn corpus_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConceptStats {
    pub material_count: usize,
    pub vocab_size: usize,
    /// distinct-concept count → number of materials with that many.
    pub histogram: BTreeMap<usize, usize>,
}

pub fn concept_stats(corpus: &Corpus) -> ConceptStats {
    let mut histogram = BTreeMap::new();
    for m in corpus.materials() {
        *histogram.entry(m.distinct_concepts().len()).or_insert(0) += 1;
    }
    ConceptStats {
        material_count: corpus.len(),
        vocab_size: corpus.vocab().len(),
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, media: &str, concepts: &str, extra: &str) -> String {
        format!(r#"{{"id":"{id}","media":"{media}","concepts":{concepts}{extra},"title":"t","content":"c"}}"#)
    }

    #[test]
    fn loads_in_file_order() {
        let text = [
            line("m1", "text", r#"["a","b"]"#, ""),
            line("m2", "audio", r#"["a"]"#, r#","speaking_rate":5.5"#),
            line("m3", "video", r#"["c"]"#, r#","speaking_rate":6,"subtitles":true"#),
        ]
        .join("\n");
        let corpus = Corpus::parse(&text).unwrap();
        assert_eq!(corpus.ids().collect::<Vec<_>>(), ["m1", "m2", "m3"]);
        assert_eq!(corpus.position("m3"), Some(2));
        assert!(corpus.get(2).has_subtitles());
        assert_eq!(corpus.get(1).speaking_rate(), Some(5.5));
    }

    #[test]
    fn duplicate_id_names_second_line() {
        let text = [
            line("m1", "text", r#"["a"]"#, ""),
            line("m2", "text", r#"["b"]"#, ""),
            line("m3", "text", r#"["c"]"#, ""),
            line("m1", "text", r#"["d"]"#, ""),
        ]
        .join("\n");
        let err = Corpus::parse(&text).unwrap_err();
        assert!(
            matches!(err, CorpusError::DuplicateId { line: 4, ref id } if id == "m1"),
            "{err}"
        );
    }

    #[test]
    fn audio_without_rate_names_field() {
        let text = line("a1", "audio", r#"["a"]"#, "");
        let err = Corpus::parse(&text).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidMaterial { line: 1, .. }));
        assert!(err.to_string().contains("speaking_rate"), "{err}");
    }

    #[test]
    fn text_with_rate_rejected() {
        let text = line("t1", "text", r#"["a"]"#, r#","speaking_rate":3.0"#);
        assert!(Corpus::parse(&text).is_err());
    }

    #[test]
    fn empty_concepts_rejected() {
        let text = line("t1", "text", "[]", "");
        let err = Corpus::parse(&text).unwrap_err();
        assert!(err.to_string().contains("concepts"), "{err}");
    }

    #[test]
    fn malformed_line_cites_line_number() {
        let text = format!("{}\n{{not json", line("m1", "text", r#"["a"]"#, ""));
        let err = Corpus::parse(&text).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }));
    }

    #[test]
    fn unknown_fields_ignored() {
        let text = line("m1", "text", r#"["a"]"#, r#","difficulty":3"#);
        assert_eq!(Corpus::parse(&text).unwrap().len(), 1);
    }

    #[test]
    fn subtitles_on_audio_rejected() {
        let text = line("a1", "audio", r#"["a"]"#, r#","speaking_rate":1,"subtitles":true"#);
        assert!(Corpus::parse(&text).is_err());
    }

    #[test]
    fn empty_file_rejected() {
        assert!(matches!(Corpus::parse("\n\n"), Err(CorpusError::Empty)));
    }

    #[test]
    fn multiset_counts_and_distinct() {
        let m = Material::text("x", ["b", "a", "b"]).unwrap();
        assert_eq!(m.distinct_concepts(), ["a", "b"]);
        assert_eq!(m.concepts()["b"], 2);
    }

    #[test]
    fn stats_histogram() {
        let corpus = Corpus::from_materials(vec![
            Material::text("a", ["1", "2", "3"]).unwrap(),
            Material::text("b", ["1", "2", "4", "4"]).unwrap(),
            Material::text("c", ["1", "2", "3", "5", "6"]).unwrap(),
        ])
        .unwrap();
        let stats = concept_stats(&corpus);
        assert_eq!(stats.material_count, 3);
        assert_eq!(stats.vocab_size, 6);
        assert_eq!(stats.histogram, BTreeMap::from([(3, 2), (5, 1)]));
    }

    #[test]
    fn single_material_stats() {
        let corpus = Corpus::from_materials(vec![Material::text("a", ["x"]).unwrap()]).unwrap();
        assert_eq!(concept_stats(&corpus).material_count, 1);
    }

    #[test]
    fn interned_ids_sorted() {
        let corpus = Corpus::from_materials(vec![
            Material::text("a", ["z", "m"]).unwrap(),
            Material::text("b", ["a", "z"]).unwrap(),
        ])
        .unwrap();
        for i in 0..corpus.len() {
            assert!(corpus.concept_ids(i).windows(2).all(|w| w[0] < w[1]));
        }
    }
}
