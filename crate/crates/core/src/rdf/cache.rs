//! Compact binary graph cache.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic  "KGBC"          4 bytes
//! version u16, reserved u16
//! term count u64,    then per term:    len u32 + UTF-8 bytes
//! literal count u64, then per literal: len u32 + UTF-8 bytes
//! triple count u64
//! subjects   u32 x count
//! predicates u32 x count
//! objects    u32 x count   (high bit set = literal index)
//! ```

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};

use super::{KnowledgeGraph, Object, Triple};

pub const CACHE_MAGIC: &[u8; 4] = b"KGBC";
pub const CACHE_VERSION: u16 = 1;
const LITERAL_FLAG: u32 = 1 << 31;

pub fn write_cache<W: Write>(graph: &KnowledgeGraph, mut out: W) -> Result<()> {
    out.write_all(CACHE_MAGIC)?;
    out.write_all(&CACHE_VERSION.to_le_bytes())?;
    out.write_all(&0u16.to_le_bytes())?;
    write_strings(&mut out, graph.vocab.terms())?;
    write_strings(&mut out, graph.store.literals())?;
    let triples = graph.store.triples();
    out.write_all(&(triples.len() as u64).to_le_bytes())?;
    for t in triples {
        out.write_all(&t.subject.to_le_bytes())?;
    }
    for t in triples {
        out.write_all(&t.predicate.to_le_bytes())?;
    }
    for t in triples {
        let o = match t.object {
            Object::Term(id) => id,
            Object::Literal(id) => id | LITERAL_FLAG,
        };
        out.write_all(&o.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn write_strings<W: Write>(out: &mut W, items: &[String]) -> Result<()> {
    out.write_all(&(items.len() as u64).to_le_bytes())?;
    for s in items {
        out.write_all(&(s.len() as u32).to_le_bytes())?;
        out.write_all(s.as_bytes())?;
    }
    Ok(())
}

pub fn read_cache<R: BufRead>(mut input: R) -> Result<KnowledgeGraph> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::Cache("bad magic bytes".into()));
    }
    let version = read_u16(&mut input)?;
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    read_u16(&mut input)?;
    let terms = read_strings(&mut input)?;
    let literals = read_strings(&mut input)?;
    let n = read_u64(&mut input)? as usize;
    let subjects = read_ids(&mut input, n)?;
    let predicates = read_ids(&mut input, n)?;
    let objects = read_ids(&mut input, n)?;

    let check = |id: u32| -> Result<u32> {
        if (id as usize) < terms.len() {
            Ok(id)
        } else {
            Err(Error::Cache(format!("term id {id} out of range")))
        }
    };
    let mut triples = Vec::with_capacity(n);
    for i in 0..n {
        let object = if objects[i] & LITERAL_FLAG != 0 {
            let l = objects[i] & !LITERAL_FLAG;
            if l as usize >= literals.len() {
                return Err(Error::Cache(format!("literal id {l} out of range")));
            }
            Object::Literal(l)
        } else {
            Object::Term(check(objects[i])?)
        };
        triples.push(Triple {
            subject: check(subjects[i])?,
            predicate: check(predicates[i])?,
            object,
        });
    }
    KnowledgeGraph::from_parts(terms, literals, triples)
}

fn read_u16<R: Read>(r: &mut R) -> Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_strings<R: Read>(r: &mut R) -> Result<Vec<String>> {
    let n = read_u64(r)? as usize;
    let mut out = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let len = read_u32(r)? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        out.push(String::from_utf8(buf).map_err(|e| Error::Cache(e.to_string()))?);
    }
    Ok(out)
}

fn read_ids<R: Read>(r: &mut R, n: usize) -> Result<Vec<u32>> {
    let mut buf = vec![0u8; n * 4];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
