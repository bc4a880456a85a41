//! Fixtures shared by the benchmarks: synthetic graphs at a given scale,
//! rendered once as N-Triples and once parsed.

use physkge::engine::{init_embeddings, EmbeddingConfig, EmbeddingState};
use physkge::rdf::KnowledgeGraph;
use physkge::similarity::{build_similarity, count_cooccurrences};
use physkge::synth::{generate, generate_graph, SynthSpec};
use physkge::SimilarityGraph;

pub const SEED: u64 = 17;

pub fn ntriples(universities: usize) -> Vec<u8> {
    let mut out = Vec::new();
    generate(&SynthSpec::new(universities, SEED), &mut out).expect("in-memory generation");
    out
}

pub fn graph(universities: usize) -> KnowledgeGraph {
    generate_graph(&SynthSpec::new(universities, SEED)).expect("valid spec")
}

pub fn config(k: usize) -> EmbeddingConfig {
    EmbeddingConfig {
        dim: 25,
        k,
        seed: SEED,
        track_objective: false,
        ..EmbeddingConfig::default()
    }
}

/// Similarity graph and a freshly initialized state, ready for sweeps.
pub fn sweep_fixture(g: &KnowledgeGraph, config: &EmbeddingConfig) -> (SimilarityGraph, EmbeddingState) {
    let stats = count_cooccurrences(g);
    let sim = build_similarity(&stats, config.k, config.omega, config.seed).expect("valid k");
    let state = init_embeddings(g.vocab.len(), config);
    (sim, state)
}
