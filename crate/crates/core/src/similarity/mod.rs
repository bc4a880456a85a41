//! PPMI similarity and the per-term positive and negative samples.
//!
//! The dense `|V| x |V|` similarity matrix is never built. Positives come from
//! a bounded priority queue over each term's co-occurrence row; negatives are
//! drawn uniformly from the complement of that row, which is exactly the set
//! of terms with zero PPMI.

mod cooccurrence;
mod topk;

use std::io::Write;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use cooccurrence::{
    count_cooccurrences, count_cooccurrences_with, ppmi_from_counts, CooccurrenceOptions,
    CooccurrenceStats,
};
pub use topk::{Scored, TopK};

use crate::error::{Error, Result};
use crate::rdf::{TermId, Vocabulary};

/// Flattened per-term lists: the entries of term `x` live at
/// `offsets[x]..offsets[x + 1]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PositiveSets {
    offsets: Vec<usize>,
    ids: Vec<TermId>,
    weights: Vec<f64>,
}

impl PositiveSets {
    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Neighbor ids, best first, and their PPMI weights.
    pub fn of(&self, x: TermId) -> (&[TermId], &[f64]) {
        let r = self.offsets[x as usize]..self.offsets[x as usize + 1];
        (&self.ids[r.clone()], &self.weights[r])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NegativeSets {
    offsets: Vec<usize>,
    ids: Vec<TermId>,
}

impl NegativeSets {
    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ascending ids.
    pub fn of(&self, x: TermId) -> &[TermId] {
        &self.ids[self.offsets[x as usize]..self.offsets[x as usize + 1]]
    }
}

fn flatten<T: Copy>(rows: Vec<Vec<T>>) -> (Vec<usize>, Vec<T>) {
    let total = rows.iter().map(Vec::len).sum();
    let mut offsets = Vec::with_capacity(rows.len() + 1);
    let mut flat = Vec::with_capacity(total);
    offsets.push(0);
    for r in rows {
        flat.extend_from_slice(&r);
        offsets.push(flat.len());
    }
    (offsets, flat)
}

/// For every term, its `k` highest-PPMI neighbors (all of them when fewer than
/// `k` are positive). Ties are broken by ascending term id.
pub fn build_positive_sets(stats: &CooccurrenceStats, k: usize) -> Result<PositiveSets> {
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    let rows: Vec<Vec<Scored>> = (0..stats.num_terms() as TermId)
        .into_par_iter()
        .map(|x| {
            let mut q = TopK::new(k);
            for (y, w) in stats.positive_row(x) {
                q.push(y, w);
            }
            q.into_sorted()
        })
        .collect();
    let ids = rows.iter().map(|r| r.iter().map(|s| s.id).collect()).collect();
    let weights = rows
        .iter()
        .map(|r| r.iter().map(|s| s.weight).collect())
        .collect();
    let (offsets, ids) = flatten(ids);
    let (_, weights) = flatten(weights);
    Ok(PositiveSets {
        offsets,
        ids,
        weights,
    })
}

/// For every term `x`, up to `k` distinct ids drawn uniformly without
/// replacement from `{y != x : PPMI(x, y) = 0}`.
///
/// Each term draws from its own ChaCha stream keyed by `(seed, x)`, so the
/// result does not depend on thread count or scheduling.
pub fn sample_negatives(stats: &CooccurrenceStats, k: usize, seed: u64) -> Result<NegativeSets> {
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    let m = stats.num_terms();
    let rows: Vec<Vec<TermId>> = (0..m as TermId)
        .into_par_iter()
        .map(|x| {
            let mut excluded: Vec<TermId> = stats.positive_row(x).map(|(y, _)| y).collect();
            let at = excluded.partition_point(|&y| y < x);
            excluded.insert(at, x);
            let pool = m - excluded.len();
            let amount = k.min(pool);
            if amount == 0 {
                return Vec::new();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(x as u64);
            let mut out: Vec<TermId> = index::sample(&mut rng, pool, amount)
                .into_iter()
                .map(|r| nth_allowed(&excluded, r))
                .collect();
            out.sort_unstable();
            out
        })
        .collect();
    let (offsets, ids) = flatten(rows);
    Ok(NegativeSets { offsets, ids })
}

/// The `r`-th (0-based) id not contained in the ascending list `excluded`.
fn nth_allowed(excluded: &[TermId], r: usize) -> TermId {
    // Below excluded[j] there are excluded[j] - j allowed ids; that count is
    // non-decreasing in j.
    let (mut lo, mut hi) = (0, excluded.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if excluded[mid] as usize - mid <= r {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    (r + lo) as TermId
}

/// The sparse similarity structure the iteration runs on: `P(x)` with PPMI
/// weights and `N(x)` with the implicit weight `-omega`.
#[derive(Clone, Debug)]
pub struct SimilarityGraph {
    positives: PositiveSets,
    negatives: NegativeSets,
    omega: f64,
    k: usize,
}

impl SimilarityGraph {
    pub fn new(positives: PositiveSets, negatives: NegativeSets, omega: f64, k: usize) -> Result<Self> {
        if positives.len() != negatives.len() {
            return Err(Error::Config(format!(
                "positive sets cover {} terms but negative sets cover {}",
                positives.len(),
                negatives.len()
            )));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Config(format!("omega must be positive, got {omega}")));
        }
        Ok(Self {
            positives,
            negatives,
            omega,
            k,
        })
    }

    /// Builds a graph from explicit lists without checking the PPMI
    /// invariants. Intended for hand-made instances; `omega` may be any value.
    pub fn from_lists(positives: Vec<Vec<(TermId, f64)>>, negatives: Vec<Vec<TermId>>, omega: f64) -> Self {
        assert_eq!(positives.len(), negatives.len());
        let k = positives
            .iter()
            .map(Vec::len)
            .chain(negatives.iter().map(Vec::len))
            .max()
            .unwrap_or(0);
        let (offsets, ids) = flatten(positives.iter().map(|r| r.iter().map(|p| p.0).collect()).collect());
        let (_, weights) = flatten(positives.iter().map(|r| r.iter().map(|p| p.1).collect()).collect());
        let (noff, nids) = flatten(negatives);
        Self {
            positives: PositiveSets {
                offsets,
                ids,
                weights,
            },
            negatives: NegativeSets {
                offsets: noff,
                ids: nids,
            },
            omega,
            k,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.positives.len()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn positives(&self, x: TermId) -> (&[TermId], &[f64]) {
        self.positives.of(x)
    }

    pub fn negatives(&self, x: TermId) -> &[TermId] {
        self.negatives.of(x)
    }

    pub fn positive_sets(&self) -> &PositiveSets {
        &self.positives
    }

    pub fn negative_sets(&self) -> &NegativeSets {
        &self.negatives
    }

    /// Writes `term  neighbor  weight` rows; negatives carry `-omega`.
    pub fn write_tsv<W: Write>(&self, vocab: &Vocabulary, mut out: W) -> std::io::Result<()> {
        for x in 0..self.num_terms() as TermId {
            let (ids, ws) = self.positives(x);
            for (&y, &w) in ids.iter().zip(ws) {
                writeln!(out, "{}\t{}\t{:e}", vocab.term(x), vocab.term(y), w)?;
            }
            for &y in self.negatives(x) {
                writeln!(out, "{}\t{}\t{:e}", vocab.term(x), vocab.term(y), -self.omega)?;
            }
        }
        out.flush()
    }
}

/// Positives, then seeded negatives, packaged with `omega`.
pub fn build_similarity(
    stats: &CooccurrenceStats,
    k: usize,
    omega: f64,
    seed: u64,
) -> Result<SimilarityGraph> {
    let positives = build_positive_sets(stats, k)?;
    let negatives = sample_negatives(stats, k, seed)?;
    SimilarityGraph::new(positives, negatives, omega, k)
}
