use std::io;

use crate::rdf::TermId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message} near `{token}`")]
    Syntax {
        line: usize,
        message: String,
        token: String,
    },

    /// Malformed embedding, cluster or header file.
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid binary graph cache: {0}")]
    Cache(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("PPMI is undefined for a term paired with itself (term {0})")]
    SelfPair(TermId),

    #[error("term {term} has an all-zero type vector; cosine is undefined")]
    ZeroTypeVector { term: String },

    #[error("numerical divergence in iteration {iteration}: term {term} has a non-finite coordinate")]
    Divergence {
        iteration: usize,
        term_id: TermId,
        term: String,
    },

    #[error(
        "estimated embedding memory {required} bytes (2 x {terms} terms x {dim} dims x 8 bytes) exceeds budget {budget}"
    )]
    MemoryBudget {
        required: u64,
        budget: u64,
        terms: usize,
        dim: usize,
    },

    #[error("unknown term `{0}`")]
    UnknownTerm(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
