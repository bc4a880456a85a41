use std::collections::BTreeSet;

use super::{KnowledgeGraph, Object, TermId};

/// Classes `C`, typed subjects `S` and each subject's binary type vector.
///
/// A subject is typed when it has at least one `rdf:type` statement and never
/// occurs as a predicate. Type vectors are stored sparsely as ascending class
/// indices into [`TypeIndex::classes`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeIndex {
    classes: Vec<TermId>,
    typed_subjects: Vec<TermId>,
    type_vectors: Vec<Vec<u32>>,
}

impl TypeIndex {
    /// `type_iri` is the predicate in surface form, e.g. [`super::RDF_TYPE`].
    pub fn build(graph: &KnowledgeGraph, type_iri: &str) -> Self {
        let Some(type_pred) = graph.vocab.id(type_iri) else {
            return Self::default();
        };
        let mut classes = BTreeSet::new();
        let mut pairs = Vec::new();
        for t in graph.store.triples() {
            if t.predicate != type_pred {
                continue;
            }
            let Object::Term(class) = t.object else {
                continue;
            };
            classes.insert(class);
            if !graph.vocab.is_predicate(t.subject) {
                pairs.push((t.subject, class));
            }
        }
        let classes: Vec<TermId> = classes.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();

        let mut typed_subjects = Vec::new();
        let mut type_vectors: Vec<Vec<u32>> = Vec::new();
        for (subject, class) in pairs {
            let ci = classes.binary_search(&class).expect("class collected above") as u32;
            if typed_subjects.last() != Some(&subject) {
                typed_subjects.push(subject);
                type_vectors.push(Vec::new());
            }
            type_vectors.last_mut().unwrap().push(ci);
        }
        Self {
            classes,
            typed_subjects,
            type_vectors,
        }
    }

    /// Builds an index directly from per-subject class lists. Subjects must be
    /// distinct; class indices must be `< num_classes`.
    pub fn from_assignments(classes: Vec<TermId>, mut subjects: Vec<(TermId, Vec<u32>)>) -> Self {
        subjects.sort_by_key(|(s, _)| *s);
        let mut typed_subjects = Vec::with_capacity(subjects.len());
        let mut type_vectors = Vec::with_capacity(subjects.len());
        for (s, mut v) in subjects {
            assert!(v.iter().all(|&c| (c as usize) < classes.len()));
            v.sort_unstable();
            v.dedup();
            typed_subjects.push(s);
            type_vectors.push(v);
        }
        Self {
            classes,
            typed_subjects,
            type_vectors,
        }
    }

    pub fn classes(&self) -> &[TermId] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    /// Ascending term ids.
    pub fn typed_subjects(&self) -> &[TermId] {
        &self.typed_subjects
    }

    pub fn is_typed(&self, x: TermId) -> bool {
        self.typed_subjects.binary_search(&x).is_ok()
    }

    /// Class indices set in `type(x)`, or `None` if `x` is not a typed subject.
    pub fn types_of(&self, x: TermId) -> Option<&[u32]> {
        self.typed_subjects
            .binary_search(&x)
            .ok()
            .map(|i| self.type_vectors[i].as_slice())
    }

    /// Dense binary vector of length `|C|`.
    pub fn type_vector(&self, x: TermId) -> Option<Vec<f64>> {
        self.types_of(x).map(|set| {
            let mut v = vec![0.0; self.classes.len()];
            for &c in set {
                v[c as usize] = 1.0;
            }
            v
        })
    }

    pub fn shares_class(&self, x: TermId, y: TermId) -> bool {
        match (self.types_of(x), self.types_of(y)) {
            (Some(a), Some(b)) => a.iter().any(|c| b.binary_search(c).is_ok()),
            _ => false,
        }
    }
}
