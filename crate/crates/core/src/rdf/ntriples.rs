//! Line-oriented N-Triples reader and writer.
//!
//! IRIs and literals are validated but kept in their escaped surface form, so
//! writing a parsed graph back out reproduces each term byte for byte.

use std::io::Write;

use crate::error::{Error, Result};

use super::{KnowledgeGraph, Object};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RawTerm<'a> {
    /// Includes the angle brackets.
    Iri(&'a str),
    /// Label without the `_:` prefix.
    Blank(&'a str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RawObject<'a> {
    Term(RawTerm<'a>),
    /// Full lexical form including quotes and any language tag or datatype.
    Literal(&'a str),
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn bytes(&self) -> &'a [u8] {
        self.src.as_bytes()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        matches!(self.peek(), None | Some(b'\n' | b'\r'))
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let rest = &self.src[self.pos.min(self.src.len())..];
        let token: String = rest
            .split(|c: char| c.is_whitespace())
            .next()
            .unwrap_or("")
            .chars()
            .take(40)
            .collect();
        Error::Syntax {
            line: self.line,
            message: message.into(),
            token: if token.is_empty() {
                "<end of line>".into()
            } else {
                token
            },
        }
    }

    fn iri(&mut self) -> Result<&'a str> {
        let start = self.pos;
        debug_assert_eq!(self.peek(), Some(b'<'));
        self.pos += 1;
        loop {
            match self.peek() {
                None | Some(b'\n' | b'\r') => {
                    self.pos = start;
                    return Err(self.error("unterminated IRI"));
                }
                Some(b'>') => {
                    self.pos += 1;
                    return Ok(&self.src[start..self.pos]);
                }
                Some(b'\\') => self.unicode_escape(start)?,
                Some(c) if c <= 0x20 || b"<\"{}|^`".contains(&c) => {
                    let bad = self.pos;
                    self.pos = start;
                    return Err(self.error(format!(
                        "character {:?} not allowed in IRI (column {})",
                        c as char,
                        bad + 1
                    )));
                }
                Some(_) => self.pos += 1,
            }
        }
    }

    fn unicode_escape(&mut self, token_start: usize) -> Result<()> {
        let digits = match self.bytes().get(self.pos + 1) {
            Some(b'u') => 4,
            Some(b'U') => 8,
            _ => {
                self.pos = token_start;
                return Err(self.error("invalid escape in IRI"));
            }
        };
        let hex = self.bytes().get(self.pos + 2..self.pos + 2 + digits);
        if !hex.is_some_and(|h| h.iter().all(u8::is_ascii_hexdigit)) {
            self.pos = token_start;
            return Err(self.error("malformed unicode escape"));
        }
        self.pos += 2 + digits;
        Ok(())
    }

    fn blank(&mut self) -> Result<&'a str> {
        let start = self.pos;
        self.pos += 2;
        let label_start = self.pos;
        match self.src[self.pos..].chars().next() {
            Some(c) if c.is_alphanumeric() || c == '_' => {}
            _ => {
                self.pos = start;
                return Err(self.error("empty or invalid blank node label"));
            }
        }
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '\u{B7}') {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        // A label cannot end with '.'; that dot is the statement terminator.
        while self.pos > label_start + 1 && self.bytes()[self.pos - 1] == b'.' {
            self.pos -= 1;
        }
        Ok(&self.src[label_start..self.pos])
    }

    fn literal(&mut self) -> Result<&'a str> {
        let start = self.pos;
        self.pos += 1;
        loop {
            match self.peek() {
                None | Some(b'\n' | b'\r') => {
                    self.pos = start;
                    return Err(self.error("unterminated literal"));
                }
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(b'\\') => match self.bytes().get(self.pos + 1) {
                    Some(b't' | b'b' | b'n' | b'r' | b'f' | b'"' | b'\'' | b'\\') => self.pos += 2,
                    Some(b'u' | b'U') => self.unicode_escape(start)?,
                    _ => {
                        self.pos = start;
                        return Err(self.error("invalid escape in literal"));
                    }
                },
                Some(_) => self.pos += 1,
            }
        }
        match self.peek() {
            Some(b'@') => {
                self.pos += 1;
                let tag_start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == b'-' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let tag = &self.src[tag_start..self.pos];
                if tag.is_empty()
                    || !tag.as_bytes()[0].is_ascii_alphabetic()
                    || tag.ends_with('-')
                {
                    self.pos = start;
                    return Err(self.error("malformed language tag"));
                }
            }
            Some(b'^') => {
                if self.bytes().get(self.pos + 1) != Some(&b'^')
                    || self.bytes().get(self.pos + 2) != Some(&b'<')
                {
                    return Err(self.error("expected ^^<datatype>"));
                }
                self.pos += 2;
                self.iri()?;
            }
            _ => {}
        }
        Ok(&self.src[start..self.pos])
    }

    fn term(&mut self, what: &str) -> Result<RawTerm<'a>> {
        match (self.peek(), self.bytes().get(self.pos + 1)) {
            (Some(b'<'), _) => Ok(RawTerm::Iri(self.iri()?)),
            (Some(b'_'), Some(b':')) => Ok(RawTerm::Blank(self.blank()?)),
            _ => Err(self.error(format!("expected IRI or blank node as {what}"))),
        }
    }
}

/// Parses one line. Returns `None` for blank lines and comments.
pub(crate) fn parse_line(
    line: &str,
    lineno: usize,
) -> Result<Option<(RawTerm<'_>, RawTerm<'_>, RawObject<'_>)>> {
    let mut c = Cursor {
        src: line,
        pos: 0,
        line: lineno,
    };
    c.skip_ws();
    if c.at_end() || c.peek() == Some(b'#') {
        return Ok(None);
    }
    let subject = c.term("subject")?;
    c.skip_ws();
    let predicate = match c.peek() {
        Some(b'<') => RawTerm::Iri(c.iri()?),
        _ => return Err(c.error("expected IRI as predicate")),
    };
    c.skip_ws();
    let object = match c.peek() {
        Some(b'"') => RawObject::Literal(c.literal()?),
        _ => RawObject::Term(c.term("object")?),
    };
    c.skip_ws();
    if c.peek() != Some(b'.') {
        return Err(c.error("expected '.' after object"));
    }
    c.pos += 1;
    c.skip_ws();
    if !(c.at_end() || c.peek() == Some(b'#')) {
        return Err(c.error("unexpected content after '.'"));
    }
    Ok(Some((subject, predicate, object)))
}

/// Serializes the graph as N-Triples, one statement per line, in store order.
pub fn write_ntriples<W: Write>(graph: &KnowledgeGraph, mut out: W) -> std::io::Result<()> {
    let v = &graph.vocab;
    for t in graph.store.triples() {
        let object = match t.object {
            Object::Term(o) => v.term(o),
            Object::Literal(l) => graph.store.literal(l),
        };
        writeln!(
            out,
            "{} {} {} .",
            v.term(t.subject),
            v.term(t.predicate),
            object
        )?;
    }
    out.flush()
}
