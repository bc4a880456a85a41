//! Knowledge graph embeddings computed by a physical force model.
//!
//! Every IRI and blank node of an RDF graph becomes a unit mass in `R^n`.
//! Terms with positive PPMI similarity are joined by springs whose constant is
//! the similarity; a sample of dissimilar terms pushes each term away with an
//! inverse-spring force. Displacements are damped by a system energy that is
//! released linearly after every sweep, so the iteration always terminates.
//!
//! The crate is split along the pipeline:
//!
//! - [`rdf`]: N-Triples ingest, vocabulary interning, typed-subject index
//! - [`similarity`]: co-occurrence counting, PPMI, positive/negative sampling
//! - [`engine`]: initialization, forces, synchronous sweeps, the run loop
//! - [`eval`]: cluster purity, type prediction, k-NN and k-means
//! - [`synth`]: deterministic university-style graphs for scaling runs
//! - [`persist`] and [`scaling`]: embedding files and the OLS runtime fit

pub mod engine;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod persist;
pub mod rdf;
pub mod scaling;
pub mod similarity;
pub mod synth;

pub use engine::{
    EmbeddingConfig, EmbeddingState, EnergySchedule, IterationRecord, RepulsionMode, RunOutcome,
    RunReport, StopReason,
};
pub use error::{Error, Result};
pub use eval::{Clustering, NeighborList, PredictionScore};
pub use matrix::Embeddings;
pub use rdf::{KnowledgeGraph, Object, TermId, Triple, TripleStore, TypeIndex, Vocabulary};
pub use scaling::{OlsFit, ScalingReport};
pub use similarity::{CooccurrenceStats, SimilarityGraph};
pub use synth::SynthSpec;
