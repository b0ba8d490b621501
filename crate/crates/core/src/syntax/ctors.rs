use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::names::Tag;

/// Constructor tag → arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorTable {
    entries: BTreeMap<Tag, usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CtorTableError {
    #[error("line {line}: expected `TAG ARITY`")]
    Malformed { line: usize },
    #[error("line {line}: invalid arity `{text}`")]
    BadArity { line: usize, text: String },
    #[error("line {line}: invalid tag `{text}`")]
    BadTag { line: usize, text: String },
    #[error("line {line}: duplicate tag `{tag}`")]
    Duplicate { line: usize, tag: String },
}

impl CtorTable {
    pub fn new() -> Self {
        CtorTable {
            entries: BTreeMap::new(),
        }
    }

    /// `Tt/0`, `Ff/0`, `Some/1`, `Pair/2`.
    pub fn standard() -> Self {
        let mut t = CtorTable::new();
        for (tag, arity) in [("Tt", 0), ("Ff", 0), ("Some", 1), ("Pair", 2)] {
            t.insert(Tag::new(tag), arity).expect("distinct tags");
        }
        t
    }

    pub fn insert(&mut self, tag: Tag, arity: usize) -> Result<(), Tag> {
        if self.entries.contains_key(&tag) {
            return Err(tag);
        }
        self.entries.insert(tag, arity);
        Ok(())
    }

    pub fn arity(&self, tag: &Tag) -> Option<usize> {
        self.entries.get(tag).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tag, usize)> {
        self.entries.iter().map(|(t, a)| (t, *a))
    }

    pub fn tags(&self) -> impl Iterator<Item = &Tag> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses the table file format: one `TAG ARITY` pair per line, `#` starts
    /// a comment.
    pub fn parse(text: &str) -> Result<Self, CtorTableError> {
        let mut table = CtorTable::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut words = content.split_whitespace();
            let (Some(tag), Some(arity), None) = (words.next(), words.next(), words.next()) else {
                return Err(CtorTableError::Malformed { line });
            };
            if !super::surface::is_ident(tag) {
                return Err(CtorTableError::BadTag {
                    line,
                    text: tag.to_string(),
                });
            }
            let arity: usize = arity.parse().map_err(|_| CtorTableError::BadArity {
                line,
                text: arity.to_string(),
            })?;
            table
                .insert(Tag::new(tag), arity)
                .map_err(|t| CtorTableError::Duplicate {
                    line,
                    tag: t.to_string(),
                })?;
        }
        Ok(table)
    }
}

impl Default for CtorTable {
    fn default() -> Self {
        CtorTable::standard()
    }
}

impl fmt::Display for CtorTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (tag, arity) in self.iter() {
            writeln!(f, "{tag} {arity}")?;
        }
        Ok(())
    }
}
