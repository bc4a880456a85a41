use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rdf::{KnowledgeGraph, TermId};

/// Triple-level occurrence counts over the vocabulary.
///
/// `term_freq[x]` counts triples containing `x` in any position (once per
/// triple), and the pair table counts triples containing both members of an
/// unordered pair. The pair table is stored as a symmetric CSR adjacency: row
/// `x` lists every `y != x` that shares a triple with `x`, ascending.
#[derive(Clone, Debug, Default)]
pub struct CooccurrenceStats {
    term_freq: Vec<u32>,
    total: u64,
    offsets: Vec<usize>,
    neighbors: Vec<TermId>,
    counts: Vec<u32>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CooccurrenceOptions {
    /// Triples with this predicate are left out entirely (they count neither
    /// towards the marginals nor towards `|G|`).
    pub exclude_predicate: Option<TermId>,
}

pub fn count_cooccurrences(graph: &KnowledgeGraph) -> CooccurrenceStats {
    count_cooccurrences_with(graph, CooccurrenceOptions::default())
}

pub fn count_cooccurrences_with(
    graph: &KnowledgeGraph,
    options: CooccurrenceOptions,
) -> CooccurrenceStats {
    let m = graph.vocab.len();
    let triples = graph.store.triples();
    let mut term_freq = vec![0u32; m];
    let mut total = 0u64;
    // Each triple yields at most 3 unordered pairs, stored in both directions.
    let mut keys: Vec<u64> = Vec::with_capacity(triples.len() * 6);
    for t in triples {
        if options.exclude_predicate == Some(t.predicate) {
            continue;
        }
        total += 1;
        let (terms, n) = t.distinct_terms();
        let terms = &terms[..n];
        for &x in terms {
            term_freq[x as usize] += 1;
        }
        for (i, &a) in terms.iter().enumerate() {
            for &b in &terms[i + 1..] {
                keys.push(pair_key(a, b));
                keys.push(pair_key(b, a));
            }
        }
    }
    keys.par_sort_unstable();

    let mut row_len = vec![0usize; m];
    let mut distinct = 0usize;
    let mut prev = None;
    for &k in &keys {
        if prev != Some(k) {
            row_len[(k >> 32) as usize] += 1;
            distinct += 1;
            prev = Some(k);
        }
    }
    let mut offsets = Vec::with_capacity(m + 1);
    offsets.push(0);
    let mut acc = 0;
    for len in row_len {
        acc += len;
        offsets.push(acc);
    }
    let mut neighbors = Vec::with_capacity(distinct);
    let mut counts: Vec<u32> = Vec::with_capacity(distinct);
    let mut prev = None;
    for &k in &keys {
        if prev == Some(k) {
            *counts.last_mut().unwrap() += 1;
        } else {
            neighbors.push(k as u32);
            counts.push(1);
            prev = Some(k);
        }
    }
    CooccurrenceStats {
        term_freq,
        total,
        offsets,
        neighbors,
        counts,
    }
}

#[inline]
fn pair_key(a: TermId, b: TermId) -> u64 {
    ((a as u64) << 32) | b as u64
}

impl CooccurrenceStats {
    pub fn num_terms(&self) -> usize {
        self.term_freq.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn term_freq(&self, x: TermId) -> u32 {
        self.term_freq[x as usize]
    }

    /// Number of triples containing both `x` and `y`. Zero for `x == y`.
    pub fn pair_freq(&self, x: TermId, y: TermId) -> u32 {
        if x == y {
            return 0;
        }
        let (ids, counts) = self.row(x);
        match ids.binary_search(&y) {
            Ok(i) => counts[i],
            Err(_) => 0,
        }
    }

    /// Co-occurring terms of `x` (ascending ids) and their pair counts.
    pub fn row(&self, x: TermId) -> (&[TermId], &[u32]) {
        let r = self.offsets[x as usize]..self.offsets[x as usize + 1];
        (&self.neighbors[r.clone()], &self.counts[r])
    }

    /// Number of stored (directed) pair entries.
    pub fn stored_pairs(&self) -> usize {
        self.neighbors.len()
    }

    /// `max(0, ln(P(x,y) / (P(x) P(y))))`.
    pub fn ppmi(&self, x: TermId, y: TermId) -> Result<f64> {
        if x == y {
            return Err(Error::SelfPair(x));
        }
        Ok(ppmi_from_counts(
            self.pair_freq(x, y),
            self.term_freq(x),
            self.term_freq(y),
            self.total,
        ))
    }

    /// Terms with strictly positive PPMI to `x` and their weights, ascending by id.
    pub fn positive_row(&self, x: TermId) -> impl Iterator<Item = (TermId, f64)> + '_ {
        let (ids, counts) = self.row(x);
        let fx = self.term_freq(x);
        ids.iter().zip(counts).filter_map(move |(&y, &c)| {
            let w = ppmi_from_counts(c, fx, self.term_freq(y), self.total);
            (w > 0.0).then_some((y, w))
        })
    }
}

/// PPMI from raw counts. The positivity test `c * total > fx * fy` is done in
/// exact integer arithmetic, so a ratio of exactly one always maps to zero.
#[inline]
pub fn ppmi_from_counts(pair: u32, fx: u32, fy: u32, total: u64) -> f64 {
    if pair == 0 {
        return 0.0;
    }
    let num = pair as u128 * total as u128;
    let den = fx as u128 * fy as u128;
    if num <= den {
        0.0
    } else {
        (num as f64 / den as f64).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_ntriples;

    fn stats(src: &str) -> (KnowledgeGraph, CooccurrenceStats) {
        let g = parse_ntriples(src.as_bytes()).unwrap();
        let s = count_cooccurrences(&g);
        (g, s)
    }

    #[test]
    fn repeated_term_counts_once_per_triple() {
        let (g, s) = stats("<a> <p> <a> .\n");
        let a = g.vocab.id("<a>").unwrap();
        let p = g.vocab.id("<p>").unwrap();
        assert_eq!(s.term_freq(a), 1);
        assert_eq!(s.pair_freq(a, p), 1);
        assert_eq!(s.pair_freq(a, a), 0);
    }

    #[test]
    fn two_triple_counts() {
        let (g, s) = stats("<a> <p> <b> .\n<a> <p> <c> .\n");
        let id = |t: &str| g.vocab.id(t).unwrap();
        assert_eq!(s.term_freq(id("<a>")), 2);
        assert_eq!(s.term_freq(id("<p>")), 2);
        assert_eq!(s.pair_freq(id("<a>"), id("<p>")), 2);
        assert_eq!(s.pair_freq(id("<p>"), id("<a>")), 2);
        assert_eq!(s.pair_freq(id("<b>"), id("<c>")), 0);
        assert_eq!(s.total(), 2);
    }

    #[test]
    fn empty_store() {
        let (_, s) = stats("");
        assert_eq!(s.total(), 0);
        assert_eq!(s.num_terms(), 0);
        assert_eq!(s.stored_pairs(), 0);
    }

    #[test]
    fn literal_triples_count_their_terms() {
        let (g, s) = stats("<a> <q> \"lit\" .\n");
        let a = g.vocab.id("<a>").unwrap();
        let q = g.vocab.id("<q>").unwrap();
        assert_eq!(s.total(), 1);
        assert_eq!(s.pair_freq(a, q), 1);
    }

    #[test]
    fn four_triple_ppmi() {
        let (g, s) = stats("<a> <p> <b> .\n<a> <p> <c> .\n<b> <q> <c> .\n<a> <q> <b> .\n");
        let id = |t: &str| g.vocab.id(t).unwrap();
        let v = s.ppmi(id("<a>"), id("<p>")).unwrap();
        assert!((v - (4.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((v - 0.28768).abs() < 1e-5);
        assert!(matches!(s.ppmi(id("<a>"), id("<a>")), Err(Error::SelfPair(_))));
    }

    #[test]
    fn truncation_boundary_is_zero() {
        // P(x,y) = P(x) P(y) exactly: 1 * 4 == 2 * 2
        assert_eq!(ppmi_from_counts(1, 2, 2, 4), 0.0);
        assert_eq!(ppmi_from_counts(0, 1, 1, 10), 0.0);
        assert!(ppmi_from_counts(1, 1, 1, 2) > 0.0);
    }

    #[test]
    fn excluding_a_predicate() {
        let g = parse_ntriples("<a> <t> <C> .\n<a> <p> <b> .\n".as_bytes()).unwrap();
        let t = g.vocab.id("<t>");
        let s = count_cooccurrences_with(&g, CooccurrenceOptions { exclude_predicate: t });
        assert_eq!(s.total(), 1);
        assert_eq!(s.term_freq(g.vocab.id("<C>").unwrap()), 0);
    }
}
