//! Pairwise fuzzy-harder comparisons.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::corpus::{Corpus, Material, Media};

/// Fraction of `easier`'s distinct concepts that `harder` also requires.
pub fn coverage(harder: &Material, easier: &Material) -> f64 {
    let shared = sorted_overlap(harder.distinct_concepts(), easier.distinct_concepts());
    shared as f64 / easier.distinct_concepts().len() as f64
}

/// Media-feature side of the harder-than test.
///
/// Any pair involving a text is judged on vocabulary alone. Audio/audio and
/// audio/video pairs also need the speaking rate to be at least as fast.
/// Video/video pairs additionally forbid a subtitled video from being harder
/// than an unsubtitled one.
pub fn media_dominates(harder: &Material, easier: &Material) -> bool {
    match (harder.media(), easier.media()) {
        (Media::Text, _) | (_, Media::Text) => true,
        (Media::Video, Media::Video) => {
            rate_at_least(harder, easier) && !(harder.has_subtitles() && !easier.has_subtitles())
        }
        _ => rate_at_least(harder, easier),
    }
}

fn rate_at_least(harder: &Material, easier: &Material) -> bool {
    // Both rates are present for audio/video by construction.
    harder.speaking_rate().unwrap_or(0.0) >= easier.speaking_rate().unwrap_or(0.0)
}

/// True iff `harder` is `alpha`-fuzzily harder than `easier`.
pub fn fuzzy_harder(harder: &Material, easier: &Material, alpha: f64) -> bool {
    coverage(harder, easier) >= alpha && media_dominates(harder, easier)
}

fn sorted_overlap<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Ordered pairs `(harder, easier)` of corpus positions, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Relation {
    pub(crate) n: usize,
    pub(crate) pairs: Vec<(usize, usize)>,
}

impl Relation {
    pub fn new(n: usize, mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        debug_assert!(pairs.iter().all(|&(a, b)| a < n && b < n));
        Relation { n, pairs }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, harder: usize, easier: usize) -> bool {
        self.pairs.binary_search(&(harder, easier)).is_ok()
    }
}

/// All pairwise concept overlaps and media dominance bits of a corpus.
///
/// Computed once (in parallel, one row per task); relations for any number
/// of α values are then read off without touching the concept sets again.
#[derive(Debug, Clone)]
pub struct CoverageMatrix {
    n: usize,
    sizes: Vec<u32>,
    overlap: Vec<u32>,
    dominates: FixedBitSet,
}

impl CoverageMatrix {
    pub fn compute(corpus: &Corpus) -> Self {
        let n = corpus.len();
        let rows: Vec<(Vec<u32>, Vec<bool>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mine = corpus.concept_ids(i);
                let harder = corpus.get(i);
                let overlaps = (0..n)
                    .map(|j| sorted_overlap(mine, corpus.concept_ids(j)) as u32)
                    .collect();
                let dom = (0..n).map(|j| media_dominates(harder, corpus.get(j))).collect();
                (overlaps, dom)
            })
            .collect();
        let mut overlap = Vec::with_capacity(n * n);
        let mut dominates = FixedBitSet::with_capacity(n * n);
        for (i, (row, dom)) in rows.into_iter().enumerate() {
            overlap.extend(row);
            for (j, d) in dom.into_iter().enumerate() {
                dominates.set(i * n + j, d);
            }
        }
        let sizes = (0..n).map(|j| corpus.concept_ids(j).len() as u32).collect();
        CoverageMatrix {
            n,
            sizes,
            overlap,
            dominates,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Same value as [`coverage`] on the underlying materials.
    pub fn coverage(&self, harder: usize, easier: usize) -> f64 {
        self.overlap[harder * self.n + easier] as f64 / self.sizes[easier] as f64
    }

    pub fn fuzzy_harder(&self, harder: usize, easier: usize, alpha: f64) -> bool {
        harder != easier && self.coverage(harder, easier) >= alpha && self.dominates.contains(harder * self.n + easier)
    }

    pub fn relation(&self, alpha: f64) -> Relation {
        let n = self.n;
        let pairs = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                (0..n)
                    .filter(move |&j| self.fuzzy_harder(i, j, alpha))
                    .map(move |j| (i, j))
            })
            .collect();
        // par collect keeps row order, so pairs are already sorted.
        Relation { n, pairs }
    }
}
