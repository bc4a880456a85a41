use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{squared_euclidean, Embeddings};
use crate::rdf::TermId;

/// The `mu` nearest neighbors of `query`, closest first.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborList {
    pub query: TermId,
    pub neighbors: Vec<TermId>,
}

/// Exact nearest neighbors of `query` among `pool` by Euclidean distance,
/// ties broken by ascending term id. `query` itself is never returned.
pub fn knn(embeddings: &Embeddings, pool: &[TermId], query: TermId, mu: usize) -> Result<NeighborList> {
    if mu == 0 {
        return Err(Error::Config("mu must be at least 1".into()));
    }
    if !pool.contains(&query) {
        return Err(Error::Config(format!("query term {query} is not in the candidate pool")));
    }
    Ok(knn_unchecked(embeddings, pool, query, mu))
}

pub(crate) fn knn_unchecked(embeddings: &Embeddings, pool: &[TermId], query: TermId, mu: usize) -> NeighborList {
    let q = embeddings.row(query as usize);
    let mut cand: Vec<(f64, TermId)> = pool
        .iter()
        .filter(|&&y| y != query)
        .map(|&y| (squared_euclidean(q, embeddings.row(y as usize)), y))
        .collect();
    let cmp = |a: &(f64, TermId), b: &(f64, TermId)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let take = mu.min(cand.len());
    if take > 0 && take < cand.len() {
        cand.select_nth_unstable_by(take - 1, cmp);
        cand.truncate(take);
    }
    cand.sort_unstable_by(cmp);
    NeighborList {
        query,
        neighbors: cand.into_iter().map(|(_, y)| y).collect(),
    }
}

/// [`knn`] for every pool member, in pool order.
pub fn knn_all(embeddings: &Embeddings, pool: &[TermId], mu: usize) -> Result<Vec<NeighborList>> {
    if mu == 0 {
        return Err(Error::Config("mu must be at least 1".into()));
    }
    Ok(pool
        .par_iter()
        .map(|&x| knn_unchecked(embeddings, pool, x, mu))
        .collect())
}
