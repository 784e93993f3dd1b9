//! Benchmark fixtures shared by the criterion targets.

use zpdrec_core::simulate::{gen_synthetic_corpus, SynthParams};
use zpdrec_core::Corpus;

/// Default synthetic corpus scaled to `n` materials.
pub fn corpus(n: usize) -> Corpus {
    gen_synthetic_corpus(&SynthParams {
        n_materials: n,
        ..SynthParams::default()
    })
    .expect("default parameters are valid")
}
