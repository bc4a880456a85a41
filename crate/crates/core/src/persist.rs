//! Embedding files: `term<TAB>v1<TAB>...<TAB>vn` rows plus a JSON header in
//! `<path>.header.json`. Values use Rust's shortest round-trip formatting, so
//! reading a written file reproduces every bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Embeddings;
use crate::rdf::Vocabulary;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingHeader {
    pub format_version: u32,
    pub dimension: usize,
    pub vocab_size: usize,
}

/// A loaded embedding file.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingFile {
    pub header: EmbeddingHeader,
    pub terms: Vec<String>,
    pub embeddings: Embeddings,
}

impl EmbeddingFile {
    /// Reorders rows to follow `vocab` ids. Every vocabulary term must have a row.
    pub fn align_to(&self, vocab: &Vocabulary) -> Result<Embeddings> {
        let by_term: std::collections::HashMap<&str, usize> = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let dim = self.header.dimension;
        let mut out = Embeddings::zeros(vocab.len(), dim);
        for (id, term) in vocab.terms().iter().enumerate() {
            let row = *by_term
                .get(term.as_str())
                .ok_or_else(|| Error::UnknownTerm(term.clone()))?;
            out.row_mut(id).copy_from_slice(self.embeddings.row(row));
        }
        Ok(out)
    }
}

pub fn header_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".header.json");
    PathBuf::from(s)
}

/// Writes rows in vocabulary order.
pub fn write_embeddings_to<W: Write>(vocab: &Vocabulary, embeddings: &Embeddings, mut out: W) -> Result<()> {
    if embeddings.rows() != vocab.len() {
        return Err(Error::Config(format!(
            "{} embedding rows for {} vocabulary terms",
            embeddings.rows(),
            vocab.len()
        )));
    }
    for (id, term) in vocab.terms().iter().enumerate() {
        out.write_all(term.as_bytes())?;
        for v in embeddings.row(id) {
            write!(out, "\t{v:e}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_embeddings(path: impl AsRef<Path>, vocab: &Vocabulary, embeddings: &Embeddings) -> Result<()> {
    let path = path.as_ref();
    write_embeddings_to(vocab, embeddings, BufWriter::new(File::create(path)?))?;
    let header = EmbeddingHeader {
        format_version: FORMAT_VERSION,
        dimension: embeddings.dim(),
        vocab_size: vocab.len(),
    };
    let mut h = BufWriter::new(File::create(header_path(path))?);
    serde_json::to_writer_pretty(&mut h, &header)?;
    h.write_all(b"\n")?;
    h.flush()?;
    Ok(())
}

/// Parses rows against a known header. `path` only labels errors.
pub fn read_embeddings_from<R: BufRead>(header: EmbeddingHeader, reader: R, path: &str) -> Result<EmbeddingFile> {
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Format {
            path: path.to_owned(),
            line: 0,
            message: format!("unsupported format version {}", header.format_version),
        });
    }
    let n = header.dimension;
    let mut terms = Vec::with_capacity(header.vocab_size);
    let mut data = Vec::with_capacity(header.vocab_size * n);
    let mut lines = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        lines = lineno;
        let err = |message: String| Error::Format {
            path: path.to_owned(),
            line: lineno,
            message,
        };
        let mut fields = line.trim_end_matches('\r').split('\t');
        let term = fields.next().unwrap_or_default();
        if term.is_empty() {
            return Err(err("missing term".into()));
        }
        let before = data.len();
        for f in fields {
            let v: f64 = f.parse().map_err(|_| err(format!("invalid number `{f}`")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite value `{f}`")));
            }
            data.push(v);
        }
        let got = data.len() - before;
        if got != n {
            return Err(err(format!("expected {n} values, found {got}")));
        }
        if terms.len() == header.vocab_size {
            return Err(err(format!("more rows than the declared {}", header.vocab_size)));
        }
        terms.push(term.to_owned());
    }
    if terms.len() != header.vocab_size {
        return Err(Error::Format {
            path: path.to_owned(),
            line: lines,
            message: format!("expected {} rows, found {}", header.vocab_size, terms.len()),
        });
    }
    Ok(EmbeddingFile {
        header,
        embeddings: Embeddings::from_vec(terms.len(), n, data),
        terms,
    })
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingFile> {
    let path = path.as_ref();
    let hp = header_path(path);
    let header: EmbeddingHeader = serde_json::from_reader(BufReader::new(File::open(&hp)?)).map_err(|e| {
        Error::Format {
            path: hp.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        }
    })?;
    read_embeddings_from(header, BufReader::new(File::open(path)?), &path.display().to_string())
}
