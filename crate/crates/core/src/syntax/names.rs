use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A named target-language variable.
///
/// Names drawn from a [`NameSupply`] render as `<prefix><N>` (e.g. `v12`), but
/// any identifier is a valid name, which lets hand-written programs use
/// readable names such as `x1` or `r`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var(Arc::from(name.as_ref()))
    }

    pub fn indexed(prefix: &str, n: u64) -> Self {
        Var::new(format!("{prefix}{n}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The counter `m` if this name is `prefix` followed by the canonical
    /// decimal rendering of `m` (no leading zeros).
    pub fn supply_index(&self, prefix: &str) -> Option<u64> {
        let digits = self.0.strip_prefix(prefix)?;
        if digits.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
            || (digits.len() > 1 && digits.starts_with('0'))
        {
            return None;
        }
        digits.parse().ok()
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// A constructor tag, shared by both languages.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tag(Arc<str>);

impl Tag {
    pub fn new(name: impl AsRef<str>) -> Self {
        Tag(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Tag {
    fn from(s: &str) -> Self {
        Tag::new(s)
    }
}

pub const DEFAULT_PREFIX: &str = "v";

/// A co-finite supply of fresh names: `{prefix·m | m >= next}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NameSupply {
    pub next: u64,
    pub prefix: String,
}

impl NameSupply {
    pub fn new(next: u64) -> Self {
        NameSupply::with_prefix(DEFAULT_PREFIX, next)
    }

    pub fn with_prefix(prefix: impl Into<String>, next: u64) -> Self {
        NameSupply {
            next,
            prefix: prefix.into(),
        }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var::indexed(&self.prefix, self.next);
        self.next += 1;
        v
    }

    /// Draws a name from the same counter but renders it with another prefix.
    /// The result is still unique among everything this supply hands out.
    pub fn fresh_with(&mut self, prefix: &str) -> Var {
        let v = Var::indexed(prefix, self.next);
        self.next += 1;
        v
    }

    pub fn contains(&self, v: &Var) -> bool {
        v.supply_index(&self.prefix).is_some_and(|m| m >= self.next)
    }

    /// Names drawn between `self` and a later state `after` of the same supply.
    pub fn drawn_until(&self, after: &NameSupply) -> impl Iterator<Item = Var> + '_ {
        (self.next..after.next.max(self.next)).map(|m| Var::indexed(&self.prefix, m))
    }
}

impl Default for NameSupply {
    fn default() -> Self {
        NameSupply::new(0)
    }
}

/// A co-finite name set `{prefix·m | m >= floor} \ removed`.
///
/// Used by the relational checker, which may consume names in any order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoFiniteSet {
    pub prefix: String,
    pub floor: u64,
    pub removed: BTreeSet<u64>,
}

impl CoFiniteSet {
    pub fn contains(&self, v: &Var) -> bool {
        v.supply_index(&self.prefix)
            .is_some_and(|m| m >= self.floor && !self.removed.contains(&m))
    }

    /// Removes `v`, returning false if it was not a member.
    pub fn take(&mut self, v: &Var) -> bool {
        if !self.contains(v) {
            return false;
        }
        let m = v.supply_index(&self.prefix).expect("member has an index");
        self.removed.insert(m)
    }

    /// The smallest counter-based supply contained in this set.
    pub fn to_supply(&self) -> NameSupply {
        let next = self
            .removed
            .iter()
            .next_back()
            .map_or(self.floor, |m| (m + 1).max(self.floor));
        NameSupply::with_prefix(self.prefix.clone(), next)
    }

    /// True when this is exactly the set represented by `supply`, i.e. the
    /// removed names form the contiguous range `[floor, supply.next)`.
    pub fn is_exactly(&self, supply: &NameSupply) -> bool {
        self.prefix == supply.prefix
            && supply.next >= self.floor
            && self.removed.len() as u64 == supply.next - self.floor
            && self
                .removed
                .iter()
                .all(|m| (self.floor..supply.next).contains(m))
    }
}

impl From<&NameSupply> for CoFiniteSet {
    fn from(s: &NameSupply) -> Self {
        CoFiniteSet {
            prefix: s.prefix.clone(),
            floor: s.next,
            removed: BTreeSet::new(),
        }
    }
}
