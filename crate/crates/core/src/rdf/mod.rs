//! RDF ingest: N-Triples parsing, term interning and the typed-subject index.
//!
//! Only IRIs and blank nodes are interned into the [`Vocabulary`]; literals
//! are kept in a side table so that distinct literal objects still yield
//! distinct triples, but they never receive a term id.

mod cache;
mod ntriples;
mod types;

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;

pub use cache::{read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};
pub use ntriples::write_ntriples;
pub use types::TypeIndex;

use crate::error::{Error, Result};
use ntriples::{parse_line, RawObject, RawTerm};

pub type TermId = u32;

pub const RDF_TYPE: &str = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Object {
    Term(TermId),
    /// Index into [`TripleStore::literals`]. Never a vocabulary id.
    Literal(u32),
}

impl Object {
    pub fn term(self) -> Option<TermId> {
        match self {
            Object::Term(t) => Some(t),
            Object::Literal(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: TermId,
    pub predicate: TermId,
    pub object: Object,
}

impl Triple {
    /// Distinct vocabulary terms of the triple, ascending. A term repeated in
    /// several positions appears once.
    pub fn distinct_terms(&self) -> ([TermId; 3], usize) {
        let mut buf = [self.subject, self.predicate, 0];
        let mut len = 2;
        if let Object::Term(o) = self.object {
            buf[2] = o;
            len = 3;
        }
        buf[..len].sort_unstable();
        let mut w = 1;
        for r in 1..len {
            if buf[r] != buf[w - 1] {
                buf[w] = buf[r];
                w += 1;
            }
        }
        (buf, w)
    }
}

/// Bidirectional map between term strings and dense ids `0..len`.
///
/// Terms are stored in their N-Triples surface form: `<iri>` or `_:label`.
#[derive(Clone, Debug, Default)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, TermId>,
    is_predicate: Vec<bool>,
    triple_count: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, id: TermId) -> &str {
        &self.terms[id as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.index.get(term).copied()
    }

    pub fn is_predicate(&self, id: TermId) -> bool {
        self.is_predicate[id as usize]
    }

    /// `|G|` after deduplication, literal-object triples included.
    pub fn triple_count(&self) -> usize {
        self.triple_count
    }

    fn intern(&mut self, term: String) -> TermId {
        if let Some(&id) = self.index.get(&term) {
            return id;
        }
        let id = TermId::try_from(self.terms.len()).expect("vocabulary exceeds u32 ids");
        self.index.insert(term.clone(), id);
        self.terms.push(term);
        self.is_predicate.push(false);
        id
    }

    /// Rebuilds a vocabulary from an ordered term list and its triples.
    pub(crate) fn from_parts(terms: Vec<String>, triples: &[Triple]) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i as TermId).is_some() {
                return Err(Error::Cache(format!("duplicate term {t}")));
            }
        }
        let mut is_predicate = vec![false; terms.len()];
        for t in triples {
            is_predicate[t.predicate as usize] = true;
        }
        Ok(Self {
            terms,
            index,
            is_predicate,
            triple_count: triples.len(),
        })
    }
}

/// Deduplicated, integer-encoded triple set.
#[derive(Clone, Debug, Default)]
pub struct TripleStore {
    triples: Vec<Triple>,
    literals: Vec<String>,
}

impl TripleStore {
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn literal(&self, id: u32) -> &str {
        &self.literals[id as usize]
    }

    pub fn literals(&self) -> &[String] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct KnowledgeGraph {
    pub vocab: Vocabulary,
    pub store: TripleStore,
}

impl KnowledgeGraph {
    pub(crate) fn from_parts(
        terms: Vec<String>,
        literals: Vec<String>,
        triples: Vec<Triple>,
    ) -> Result<Self> {
        let vocab = Vocabulary::from_parts(terms, &triples)?;
        let mut seen = HashSet::with_capacity(triples.len());
        for t in &triples {
            if !seen.insert(*t) {
                return Err(Error::Cache("duplicate triple".into()));
            }
        }
        Ok(Self {
            vocab,
            store: TripleStore { triples, literals },
        })
    }

    pub fn type_index(&self) -> TypeIndex {
        TypeIndex::build(self, RDF_TYPE)
    }

    /// Id of the `rdf:type` predicate, if the graph uses it.
    pub fn type_predicate(&self, type_iri: &str) -> Option<TermId> {
        self.vocab.id(type_iri)
    }
}

/// Accumulates triples from one or more N-Triples sources.
///
/// Each call to [`GraphBuilder::add_ntriples`] opens a new blank-node scope:
/// `_:b` in two different sources denotes two different nodes.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    vocab: Vocabulary,
    literals: Vec<String>,
    literal_index: HashMap<String, u32>,
    triples: Vec<Triple>,
    seen: HashSet<Triple>,
    scope: usize,
    lines_with_literals: usize,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_ntriples<R: BufRead>(&mut self, mut reader: R) -> Result<()> {
        let scope = self.scope;
        self.scope += 1;
        let mut blanks: HashMap<String, TermId> = HashMap::new();
        let mut line = String::new();
        let mut lineno = 0;
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            lineno += 1;
            let Some((s, p, o)) = parse_line(&line, lineno)? else {
                continue;
            };
            let subject = self.intern_term(s, scope, &mut blanks);
            let predicate = self.intern_term(p, scope, &mut blanks);
            let object = match o {
                RawObject::Term(t) => Object::Term(self.intern_term(t, scope, &mut blanks)),
                RawObject::Literal(lit) => {
                    self.lines_with_literals += 1;
                    Object::Literal(self.intern_literal(lit))
                }
            };
            self.vocab.is_predicate[predicate as usize] = true;
            let triple = Triple {
                subject,
                predicate,
                object,
            };
            if self.seen.insert(triple) {
                self.triples.push(triple);
            }
        }
        Ok(())
    }

    fn intern_term(
        &mut self,
        raw: RawTerm<'_>,
        scope: usize,
        blanks: &mut HashMap<String, TermId>,
    ) -> TermId {
        match raw {
            RawTerm::Iri(iri) => self.vocab.intern(iri.to_owned()),
            RawTerm::Blank(label) => {
                if let Some(&id) = blanks.get(label) {
                    return id;
                }
                let mut name = format!("_:{label}");
                let mut suffix = scope;
                // Another source already owns this label; pick a fresh one.
                while self.vocab.id(&name).is_some() {
                    name = format!("_:{label}x{suffix}");
                    suffix += 1;
                }
                let id = self.vocab.intern(name);
                blanks.insert(label.to_owned(), id);
                id
            }
        }
    }

    fn intern_literal(&mut self, lit: &str) -> u32 {
        if let Some(&id) = self.literal_index.get(lit) {
            return id;
        }
        let id = self.literals.len() as u32;
        self.literal_index.insert(lit.to_owned(), id);
        self.literals.push(lit.to_owned());
        id
    }

    /// Number of parsed statements (duplicates included) whose object was a literal.
    pub fn literal_statements(&self) -> usize {
        self.lines_with_literals
    }

    pub fn finish(mut self) -> KnowledgeGraph {
        self.vocab.triple_count = self.triples.len();
        KnowledgeGraph {
            vocab: self.vocab,
            store: TripleStore {
                triples: self.triples,
                literals: self.literals,
            },
        }
    }
}

/// Parses a single N-Triples source into a fresh graph.
pub fn parse_ntriples<R: BufRead>(reader: R) -> Result<KnowledgeGraph> {
    let mut b = GraphBuilder::new();
    b.add_ntriples(reader)?;
    Ok(b.finish())
}

/// Loads a graph from disk. Gzip input and the binary cache format are
/// recognised by their magic bytes; anything else is read as N-Triples.
pub fn read_graph(path: impl AsRef<Path>) -> Result<KnowledgeGraph> {
    read_graphs(std::slice::from_ref(&path.as_ref()))
}

/// Loads and merges several files; blank nodes stay scoped per file.
pub fn read_graphs<P: AsRef<Path>>(paths: &[P]) -> Result<KnowledgeGraph> {
    if let [single] = paths {
        let mut reader = BufReader::new(File::open(single)?);
        if reader.fill_buf()?.starts_with(CACHE_MAGIC) {
            return read_cache(reader);
        }
    }
    let mut b = GraphBuilder::new();
    for p in paths {
        b.add_ntriples(open_text(p.as_ref())?)?;
    }
    Ok(b.finish())
}

fn open_text(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut reader = BufReader::new(File::open(path)?);
    let head = reader.fill_buf()?;
    if head.starts_with(&[0x1f, 0x8b]) {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(reader))))
    } else if head.starts_with(CACHE_MAGIC) {
        Err(Error::Cache(format!(
            "{} is a binary cache; it cannot be merged with other inputs",
            path.display()
        )))
    } else {
        Ok(Box::new(reader))
    }
}

/// Opens `path` for writing, gzip-compressed when it ends in `.gz`.
pub(crate) fn create_output(path: &Path) -> io::Result<Box<dyn Write>> {
    let file = io::BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(flate2::write::GzEncoder::new(
            file,
            flate2::Compression::default(),
        )))
    } else {
        Ok(Box::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> KnowledgeGraph {
        parse_ntriples(s.as_bytes()).unwrap()
    }

    #[test]
    fn empty_input_is_an_empty_graph() {
        let g = parse("");
        assert_eq!(g.vocab.len(), 0);
        assert_eq!(g.store.len(), 0);
        assert_eq!(g.vocab.triple_count(), 0);
    }

    #[test]
    fn literals_are_not_interned() {
        let g = parse("<a> <p> <b> .\n<a> <q> \"lit\" .\n");
        let mut terms: Vec<_> = g.vocab.terms().to_vec();
        terms.sort();
        assert_eq!(terms, ["<a>", "<b>", "<p>", "<q>"]);
        assert_eq!(g.vocab.triple_count(), 2);
        assert_eq!(g.store.literals(), ["\"lit\""]);
    }

    #[test]
    fn duplicate_triples_collapse() {
        let g = parse("<a> <p> <b> .\n# comment\n<a> <p> <b> .\n");
        assert_eq!(g.vocab.triple_count(), 1);
        assert_eq!(g.store.len(), 1);
    }

    #[test]
    fn distinct_literals_are_distinct_triples() {
        let g = parse("<a> <p> \"x\" .\n<a> <p> \"y\" .\n<a> <p> \"x\"@en .\n");
        assert_eq!(g.store.len(), 3);
        assert_eq!(g.vocab.len(), 2);
    }

    #[test]
    fn predicate_flags() {
        let g = parse("<a> <p> <b> .\n<p> <q> <a> .\n");
        let p = g.vocab.id("<p>").unwrap();
        let a = g.vocab.id("<a>").unwrap();
        assert!(g.vocab.is_predicate(p));
        assert!(!g.vocab.is_predicate(a));
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = parse_ntriples("<a> <p> <b> .\n<a> <p> <b>\n".as_bytes()).unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn blank_nodes_are_scoped_per_source() {
        let mut b = GraphBuilder::new();
        b.add_ntriples("_:x <p> <a> .\n".as_bytes()).unwrap();
        b.add_ntriples("_:x <p> <a> .\n_:x <q> <a> .\n".as_bytes())
            .unwrap();
        let g = b.finish();
        assert_eq!(g.store.len(), 3);
        // <p>, <a>, <q> and two distinct blank nodes.
        assert_eq!(g.vocab.len(), 5);
    }

    #[test]
    fn repeated_term_in_triple() {
        let g = parse("<a> <p> <a> .\n");
        let (buf, n) = g.store.triples()[0].distinct_terms();
        assert_eq!(n, 2);
        assert!(buf[0] < buf[1]);
    }
}
