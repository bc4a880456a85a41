use std::collections::BTreeMap;
use std::io::BufRead;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{squared_euclidean, Embeddings};
use crate::rdf::{TermId, Vocabulary};

/// Upper bound on Lloyd iterations.
pub const KMEANS_MAX_ITERS: usize = 100;

/// A cluster label (dense, `0..L`) or `None` for noise, per evaluated term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    assignments: Vec<(TermId, Option<u32>)>,
    num_clusters: usize,
}

impl Clustering {
    /// Labels must be below `num_clusters`.
    pub fn new(assignments: Vec<(TermId, Option<u32>)>, num_clusters: usize) -> Result<Self> {
        if let Some((t, l)) = assignments
            .iter()
            .find(|(_, l)| l.is_some_and(|l| l as usize >= num_clusters))
        {
            return Err(Error::Config(format!(
                "term {t} has label {} but there are only {num_clusters} clusters",
                l.unwrap()
            )));
        }
        Ok(Self {
            assignments,
            num_clusters,
        })
    }

    pub fn assignments(&self) -> &[(TermId, Option<u32>)] {
        &self.assignments
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    /// Members of every cluster, in assignment order. Noise is dropped.
    pub fn members(&self) -> Vec<Vec<TermId>> {
        let mut out = vec![Vec::new(); self.num_clusters];
        for &(t, l) in &self.assignments {
            if let Some(l) = l {
                out[l as usize].push(t);
            }
        }
        out
    }

    /// Reads `term <TAB> label` lines. Integer labels are remapped densely in
    /// ascending order; negative labels and `noise` mark noise points.
    pub fn read_tsv<R: BufRead>(reader: R, vocab: &Vocabulary, path: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let format = |message: String| Error::Format {
                path: path.to_owned(),
                line: lineno,
                message,
            };
            let (term, label) = trimmed
                .rsplit_once('\t')
                .ok_or_else(|| format("expected `term<TAB>label`".into()))?;
            let id = vocab
                .id(term)
                .ok_or_else(|| format(format!("unknown term `{term}`")))?;
            let label = match label.trim() {
                "noise" => None,
                s => {
                    let v: i64 = s.parse().map_err(|_| format(format!("invalid cluster label `{s}`")))?;
                    (v >= 0).then_some(v)
                }
            };
            raw.push((id, label));
        }
        let dense: BTreeMap<i64, u32> = raw
            .iter()
            .filter_map(|&(_, l)| l)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, l)| (l, i as u32))
            .collect();
        let assignments = raw
            .into_iter()
            .map(|(t, l)| (t, l.map(|l| dense[&l])))
            .collect();
        Ok(Self {
            assignments,
            num_clusters: dense.len(),
        })
    }

    pub fn write_tsv<W: std::io::Write>(&self, vocab: &Vocabulary, mut out: W) -> std::io::Result<()> {
        for &(t, l) in &self.assignments {
            match l {
                Some(l) => writeln!(out, "{}\t{l}", vocab.term(t))?,
                None => writeln!(out, "{}\t-1", vocab.term(t))?,
            }
        }
        out.flush()
    }
}

/// Lloyd's algorithm on the rows listed in `pool`. Centroids start at `l`
/// distinct pool points chosen by `seed`; a cluster that loses all members
/// keeps its previous centroid.
pub fn kmeans(embeddings: &Embeddings, pool: &[TermId], l: usize, seed: u64) -> Result<Clustering> {
    if l == 0 {
        return Err(Error::Config("number of clusters must be at least 1".into()));
    }
    if pool.is_empty() {
        return Err(Error::Config("k-means needs a nonempty pool".into()));
    }
    if l > pool.len() {
        return Err(Error::Config(format!(
            "{l} clusters requested for a pool of {} points",
            pool.len()
        )));
    }
    let dim = embeddings.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = index::sample(&mut rng, pool.len(), l).into_vec();
    picks.sort_unstable();
    let mut centroids: Vec<f64> = picks
        .iter()
        .flat_map(|&i| embeddings.row(pool[i] as usize).iter().copied())
        .collect();

    let mut labels = vec![u32::MAX; pool.len()];
    for _ in 0..KMEANS_MAX_ITERS {
        let next: Vec<u32> = pool
            .par_iter()
            .map(|&x| {
                let p = embeddings.row(x as usize);
                let mut best = (f64::INFINITY, 0u32);
                for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
                    let d = squared_euclidean(p, centroid);
                    if d < best.0 {
                        best = (d, c as u32);
                    }
                }
                best.1
            })
            .collect();
        if next == labels {
            break;
        }
        labels = next;
        let mut sums = vec![0.0; l * dim];
        let mut counts = vec![0usize; l];
        for (&x, &c) in pool.iter().zip(&labels) {
            counts[c as usize] += 1;
            let row = embeddings.row(x as usize);
            for (s, v) in sums[c as usize * dim..][..dim].iter_mut().zip(row) {
                *s += v;
            }
        }
        for c in 0..l {
            if counts[c] > 0 {
                let n = counts[c] as f64;
                for (dst, s) in centroids[c * dim..][..dim].iter_mut().zip(&sums[c * dim..][..dim]) {
                    *dst = s / n;
                }
            }
        }
    }
    Clustering::new(
        pool.iter().zip(labels).map(|(&x, c)| (x, Some(c))).collect(),
        l,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_ntriples;

    #[test]
    fn single_cluster() {
        let e = Embeddings::from_vec(3, 1, vec![0.0, 4.0, 9.0]);
        let c = kmeans(&e, &[0, 1, 2], 1, 3).unwrap();
        assert_eq!(c.num_clusters(), 1);
        assert_eq!(c.members(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn separated_blobs() {
        let e = Embeddings::from_vec(4, 2, vec![0.0, 0.0, 0.1, 0.0, 50.0, 50.0, 50.0, 50.1]);
        for seed in 0..10 {
            let c = kmeans(&e, &[0, 1, 2, 3], 2, seed).unwrap();
            let l: Vec<_> = c.assignments().iter().map(|a| a.1.unwrap()).collect();
            assert_eq!(l[0], l[1]);
            assert_eq!(l[2], l[3]);
            assert_ne!(l[0], l[2]);
            assert_eq!(c, kmeans(&e, &[0, 1, 2, 3], 2, seed).unwrap());
        }
    }

    #[test]
    fn too_many_clusters() {
        let e = Embeddings::from_vec(2, 1, vec![0.0, 1.0]);
        assert!(kmeans(&e, &[0, 1], 3, 0).is_err());
        assert!(kmeans(&e, &[0, 1], 0, 0).is_err());
        assert!(kmeans(&e, &[], 1, 0).is_err());
    }

    #[test]
    fn reads_tsv_with_noise() {
        let g = parse_ntriples("<a> <p> <b> .\n<c> <p> <d> .\n".as_bytes()).unwrap();
        let src = "<a>\t7\n<b>\t-1\n\n<c>\t3\n<d>\tnoise\n";
        let c = Clustering::read_tsv(src.as_bytes(), &g.vocab, "c.tsv").unwrap();
        assert_eq!(c.num_clusters(), 2);
        let a = g.vocab.id("<a>").unwrap();
        let cc = g.vocab.id("<c>").unwrap();
        assert_eq!(c.members(), vec![vec![cc], vec![a]]);

        let mut buf = Vec::new();
        c.write_tsv(&g.vocab, &mut buf).unwrap();
        let back = Clustering::read_tsv(buf.as_slice(), &g.vocab, "c.tsv").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn tsv_errors_carry_line_numbers() {
        let g = parse_ntriples("<a> <p> <b> .\n".as_bytes()).unwrap();
        for (src, line) in [("<a>\t0\n<zz>\t1\n", 2), ("<a> 0\n", 1), ("<a>\t0\n\n<b>\tx\n", 3)] {
            match Clustering::read_tsv(src.as_bytes(), &g.vocab, "f") {
                Err(Error::Format { line: l, .. }) => assert_eq!(l, line, "{src:?}"),
                other => panic!("{other:?}"),
            }
        }
    }
}
