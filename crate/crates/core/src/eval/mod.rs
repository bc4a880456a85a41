//! Extrinsic quality measures over typed subjects.
//!
//! Both metrics compare binary type vectors by cosine. Since the vectors are
//! 0/1, `cos(a, b) = |a ∩ b| / sqrt(|a| |b|)`, and the sum of all pairwise
//! cosines inside a cluster equals `|Σ a / |a||²`, which keeps purity linear in
//! the cluster size.

mod cluster;
mod knn;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cluster::{kmeans, Clustering, KMEANS_MAX_ITERS};
pub use knn::{knn, knn_all, NeighborList};

use crate::error::{Error, Result};
use crate::matrix::Embeddings;
use crate::rdf::{TermId, TypeIndex, Vocabulary};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurityOptions {
    /// Drop the `x = y` terms from each cluster's double sum. Clusters with a
    /// single member then have no pairs and are skipped.
    pub exclude_diagonal: bool,
}

/// Mean over non-empty clusters of the normalized pairwise type cosine.
/// Noise points are ignored. Returns 0 when there is no cluster to score.
pub fn cluster_purity(clustering: &Clustering, types: &TypeIndex) -> Result<f64> {
    cluster_purity_with(clustering, types, PurityOptions::default())
}

pub fn cluster_purity_with(clustering: &Clustering, types: &TypeIndex, opts: PurityOptions) -> Result<f64> {
    let mut acc = vec![0.0; types.num_classes()];
    let mut total = 0.0;
    let mut scored = 0usize;
    for members in clustering.members() {
        let n = members.len();
        if n == 0 || (opts.exclude_diagonal && n < 2) {
            continue;
        }
        acc.fill(0.0);
        for &x in &members {
            let set = types
                .types_of(x)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::ZeroTypeVector { term: format!("#{x}") })?;
            let w = 1.0 / (set.len() as f64).sqrt();
            for &c in set {
                acc[c as usize] += w;
            }
        }
        let all_pairs: f64 = acc.iter().map(|v| v * v).sum();
        let n = n as f64;
        total += if opts.exclude_diagonal {
            ((all_pairs - n) / (n * (n - 1.0))).max(0.0)
        } else {
            all_pairs / (n * n)
        };
        scored += 1;
    }
    Ok(if scored == 0 {
        0.0
    } else {
        (total / scored as f64).min(1.0)
    })
}

/// Replaces the `#id` placeholder in a [`Error::ZeroTypeVector`] with the term.
pub fn name_terms(err: Error, vocab: &Vocabulary) -> Error {
    match err {
        Error::ZeroTypeVector { term } => {
            let named = term
                .strip_prefix('#')
                .and_then(|s| s.parse::<TermId>().ok())
                .filter(|&id| (id as usize) < vocab.len())
                .map_or(term.clone(), |id| vocab.term(id).to_owned());
            Error::ZeroTypeVector { term: named }
        }
        e => e,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionScore {
    pub mu: usize,
    pub score: f64,
    pub sample_size: usize,
    /// Sample terms whose neighbor type sum was the zero vector; each added 0.
    pub zero_neighbor_sums: usize,
}

/// Mean cosine between `type(x)` and the summed type vectors of the `mu`
/// nearest neighbors of `x`, where neighbors are searched within `sample`.
pub fn type_prediction_score(
    embeddings: &Embeddings,
    types: &TypeIndex,
    sample: &[TermId],
    mu: usize,
) -> Result<PredictionScore> {
    if sample.len() < 2 {
        return Err(Error::Config(format!(
            "type prediction needs at least 2 sample terms, got {}",
            sample.len()
        )));
    }
    let parts = prediction_contributions(embeddings, types, sample, mu)?;
    let zero_neighbor_sums = parts.iter().filter(|p| p.is_none()).count();
    let total: f64 = parts.iter().map(|p| p.unwrap_or(0.0)).sum();
    Ok(PredictionScore {
        mu,
        score: total / sample.len() as f64,
        sample_size: sample.len(),
        zero_neighbor_sums,
    })
}

/// Per-term summands of [`type_prediction_score`], in sample order. `None`
/// marks a zero neighbor type sum.
pub fn prediction_contributions(
    embeddings: &Embeddings,
    types: &TypeIndex,
    sample: &[TermId],
    mu: usize,
) -> Result<Vec<Option<f64>>> {
    if mu == 0 {
        return Err(Error::Config("mu must be at least 1".into()));
    }
    if let Some(&x) = sample.iter().find(|&&x| types.types_of(x).is_none_or(<[u32]>::is_empty)) {
        return Err(Error::ZeroTypeVector { term: format!("#{x}") });
    }
    Ok(sample
        .par_iter()
        .map(|&x| {
            let nn = knn::knn_unchecked(embeddings, sample, x, mu);
            let mut sum = vec![0.0; types.num_classes()];
            for &y in &nn.neighbors {
                for &c in types.types_of(y).unwrap_or(&[]) {
                    sum[c as usize] += 1.0;
                }
            }
            prediction_cosine(types.types_of(x).unwrap_or(&[]), &sum)
        })
        .collect())
}

/// Cosine between a binary vector given by its set bits and a dense vector;
/// `None` when either is zero.
fn prediction_cosine(set: &[u32], dense: &[f64]) -> Option<f64> {
    let norm = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || set.is_empty() {
        return None;
    }
    let dot: f64 = set.iter().map(|&c| dense[c as usize]).sum();
    Some(dot / ((set.len() as f64).sqrt() * norm))
}

/// All of `candidates` when `size` covers them, otherwise a seeded uniform
/// subset of `size` terms. The result is ascending.
pub fn select_sample(candidates: &[TermId], size: usize, seed: u64) -> Vec<TermId> {
    if size >= candidates.len() {
        return candidates.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<TermId> = index::sample(&mut rng, candidates.len(), size)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    out.sort_unstable();
    out
}

/// Everything `eval` reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub typed_subjects: usize,
    pub classes: usize,
    pub sample_size: usize,
    pub seed: u64,
    pub prediction: Vec<PredictionScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clusters: Option<usize>,
}
