//! Deterministic university-style graphs.
//!
//! Each university has departments; each department has faculty in four
//! ranks, courses, research groups, graduate and undergraduate students and
//! publications. Every entity is typed and every link stays inside one
//! university. Apart from department-to-university and degree links, links
//! also stay inside one department; departments are the planted communities.

use std::io::Write;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rdf::{parse_ntriples, KnowledgeGraph, RDF_TYPE};

pub const NAMESPACE: &str = "http://example.org/univ#";

/// Class local names in role order.
pub const CLASS_NAMES: [&str; 14] = [
    "University",
    "Department",
    "FullProfessor",
    "AssociateProfessor",
    "AssistantProfessor",
    "Lecturer",
    "UndergraduateStudent",
    "GraduateStudent",
    "TeachingAssistant",
    "ResearchAssistant",
    "Course",
    "GraduateCourse",
    "Publication",
    "ResearchGroup",
];

/// Average triples per university, measured over many seeds.
const TRIPLES_PER_UNIVERSITY: usize = 4_600;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Scale parameter; output size is linear in it.
    pub universities: usize,
    /// Number of distinct classes, `1..=14`. Roles map to classes round robin.
    pub classes: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            universities: 1,
            classes: CLASS_NAMES.len(),
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn new(universities: usize, seed: u64) -> Self {
        Self {
            universities,
            seed,
            ..Self::default()
        }
    }

    pub fn approx_triples(&self) -> usize {
        self.universities * TRIPLES_PER_UNIVERSITY
    }

    /// Smallest scale whose estimate reaches `triples`.
    pub fn universities_for(triples: usize) -> usize {
        triples.div_ceil(TRIPLES_PER_UNIVERSITY).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.universities == 0 {
            return Err(Error::Config("scale must be at least 1".into()));
        }
        if !(1..=CLASS_NAMES.len()).contains(&self.classes) {
            return Err(Error::Config(format!(
                "classes must be in 1..={}, got {}",
                CLASS_NAMES.len(),
                self.classes
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Role {
    University = 0,
    Department,
    FullProfessor,
    AssociateProfessor,
    AssistantProfessor,
    Lecturer,
    UndergraduateStudent,
    GraduateStudent,
    TeachingAssistant,
    ResearchAssistant,
    Course,
    GraduateCourse,
    Publication,
    ResearchGroup,
}

const DEPARTMENTS: usize = 4;

/// Rank, head count per department, publication range per member.
const FACULTY: [(Role, usize, (usize, usize)); 4] = [
    (Role::FullProfessor, 3, (6, 10)),
    (Role::AssociateProfessor, 4, (4, 8)),
    (Role::AssistantProfessor, 4, (2, 6)),
    (Role::Lecturer, 2, (0, 2)),
];

struct Emitter<W: Write> {
    out: W,
    classes: usize,
    triples: usize,
}

impl<W: Write> Emitter<W> {
    fn link(&mut self, s: &str, p: &str, o: &str) -> std::io::Result<()> {
        self.triples += 1;
        writeln!(self.out, "<{s}> <{NAMESPACE}{p}> <{o}> .")
    }

    fn literal(&mut self, s: &str, p: &str, value: &str) -> std::io::Result<()> {
        self.triples += 1;
        writeln!(self.out, "<{s}> <{NAMESPACE}{p}> \"{value}\" .")
    }

    fn typed(&mut self, s: &str, role: Role) -> std::io::Result<()> {
        self.triples += 1;
        let class = CLASS_NAMES[role as usize % self.classes];
        writeln!(self.out, "<{s}> {RDF_TYPE} <{NAMESPACE}{class}> .")
    }
}

/// Writes the graph for `spec` as N-Triples and returns the triple count.
pub fn generate<W: Write>(spec: &SynthSpec, out: W) -> Result<usize> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut e = Emitter {
        out,
        classes: spec.classes,
        triples: 0,
    };
    for u in 0..spec.universities {
        university(&mut e, &mut rng, u)?;
    }
    e.out.flush()?;
    Ok(e.triples)
}

fn university<W: Write>(e: &mut Emitter<W>, rng: &mut ChaCha8Rng, u: usize) -> std::io::Result<()> {
    let univ = format!("http://www.University{u}.edu");
    e.typed(&univ, Role::University)?;
    e.literal(&univ, "name", &format!("University{u}"))?;
    for d in 0..DEPARTMENTS {
        let dept = format!("http://www.Department{d}.University{u}.edu");
        e.typed(&dept, Role::Department)?;
        e.link(&dept, "subOrganizationOf", &univ)?;
        e.literal(&dept, "name", &format!("Department{d}"))?;

        let mut faculty = Vec::new();
        for (role, heads, (plo, phi)) in FACULTY {
            let name = CLASS_NAMES[role as usize];
            for i in 0..heads {
                let f = format!("{dept}/{name}{i}");
                e.typed(&f, role)?;
                e.link(&f, "worksFor", &dept)?;
                e.literal(&f, "name", &format!("{name}{i}"))?;
                e.literal(&f, "emailAddress", &format!("{name}{i}@Department{d}.University{u}.edu"))?;
                faculty.push((f, rng.gen_range(plo..=phi)));
            }
        }
        e.link(&faculty[0].0, "headOf", &dept)?;

        let mut courses = Vec::new();
        let mut grad_courses = Vec::new();
        for (f, _) in &faculty {
            for c in 0..rng.gen_range(1..=2) {
                let course = format!("{f}/Course{c}");
                e.typed(&course, Role::Course)?;
                e.link(f, "teacherOf", &course)?;
                courses.push(course);
            }
            let gc = format!("{f}/GraduateCourse0");
            e.typed(&gc, Role::GraduateCourse)?;
            e.link(f, "teacherOf", &gc)?;
            grad_courses.push(gc);
        }

        for g in 0..rng.gen_range(2..=4) {
            let group = format!("{dept}/ResearchGroup{g}");
            e.typed(&group, Role::ResearchGroup)?;
            e.link(&group, "subOrganizationOf", &dept)?;
        }

        let mut grads = Vec::new();
        let grad_count = (0..faculty.len()).map(|_| rng.gen_range(2..=3)).sum::<usize>();
        for i in 0..grad_count {
            let s = format!("{dept}/GraduateStudent{i}");
            e.typed(&s, Role::GraduateStudent)?;
            e.link(&s, "memberOf", &dept)?;
            e.literal(&s, "name", &format!("GraduateStudent{i}"))?;
            e.link(&s, "advisor", &faculty.choose(rng).unwrap().0)?;
            e.link(&s, "undergraduateDegreeFrom", &univ)?;
            let n = rng.gen_range(1..=3).min(grad_courses.len());
            for c in index::sample(rng, grad_courses.len(), n) {
                e.link(&s, "takesCourse", &grad_courses[c])?;
            }
            let roll: f64 = rng.gen();
            if roll < 0.25 {
                e.typed(&s, Role::TeachingAssistant)?;
                e.link(&s, "teachingAssistantOf", courses.choose(rng).unwrap())?;
            } else if roll < 0.5 {
                e.typed(&s, Role::ResearchAssistant)?;
            }
            grads.push(s);
        }

        let undergrad_count = (0..faculty.len()).map(|_| rng.gen_range(6..=9)).sum::<usize>();
        for i in 0..undergrad_count {
            let s = format!("{dept}/UndergraduateStudent{i}");
            e.typed(&s, Role::UndergraduateStudent)?;
            e.link(&s, "memberOf", &dept)?;
            e.literal(&s, "name", &format!("UndergraduateStudent{i}"))?;
            let n = rng.gen_range(2..=4).min(courses.len());
            for c in index::sample(rng, courses.len(), n) {
                e.link(&s, "takesCourse", &courses[c])?;
            }
            if rng.gen::<f64>() < 0.2 {
                e.link(&s, "advisor", &faculty.choose(rng).unwrap().0)?;
            }
        }

        for (f, pubs) in &faculty {
            for p in 0..*pubs {
                let publication = format!("{f}/Publication{p}");
                e.typed(&publication, Role::Publication)?;
                e.link(&publication, "publicationAuthor", f)?;
                if rng.gen::<f64>() < 0.5 {
                    e.link(&publication, "publicationAuthor", grads.choose(rng).unwrap())?;
                }
            }
        }
    }
    Ok(())
}

/// Writes to `path`, gzip-compressed when it ends in `.gz`.
pub fn generate_to_path(spec: &SynthSpec, path: impl AsRef<Path>) -> Result<usize> {
    spec.validate()?;
    let out = crate::rdf::create_output(path.as_ref())?;
    generate(spec, out)
}

/// Generates and parses in memory.
pub fn generate_graph(spec: &SynthSpec) -> Result<KnowledgeGraph> {
    let mut buf = Vec::with_capacity(spec.approx_triples() * 120);
    generate(spec, &mut buf)?;
    parse_ntriples(buf.as_slice())
}

/// University index and, below department level, the department index of a
/// generated IRI. Accepts the bare IRI or its `<...>` form.
pub fn community_of(iri: &str) -> Option<(usize, Option<usize>)> {
    let iri = iri.strip_prefix('<').unwrap_or(iri);
    let iri = iri.strip_suffix('>').unwrap_or(iri);
    let host = iri.strip_prefix("http://www.")?;
    let host = host.split('/').next()?;
    let host = host.strip_suffix(".edu")?;
    match host.split_once('.') {
        None => Some((host.strip_prefix("University")?.parse().ok()?, None)),
        Some((dept, univ)) => Some((
            univ.strip_prefix("University")?.parse().ok()?,
            Some(dept.strip_prefix("Department")?.parse().ok()?),
        )),
    }
}

/// Same university, and the same department unless either side is a
/// university-level entity.
pub fn same_community(a: (usize, Option<usize>), b: (usize, Option<usize>)) -> bool {
    a.0 == b.0
        && match (a.1, b.1) {
            (Some(x), Some(y)) => x == y,
            _ => true,
        }
}
