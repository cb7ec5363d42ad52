//! String-keyed primitive values that attach state to nodes and the world.
//!
//! Tags decouple protocol state from concrete node types: a protocol stores
//! its variables under string keys instead of struct members, which is what
//! makes snapshots and protocol-part replacement possible. Every entry is
//! flagged either persistent (survives save/load) or volatile (dropped).

use std::collections::BTreeMap;
use std::fmt;

/// One of the four primitive value types a tag can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum TagValue {
    Int(i64),
    Real(f64),
    Str(String),
    Bool(bool),
}

impl TagValue {
    /// Type name used in the snapshot format and error messages.
    pub fn type_name(&self) -> &'static str {
        match self {
            TagValue::Int(_) => "int",
            TagValue::Real(_) => "real",
            TagValue::Str(_) => "str",
            TagValue::Bool(_) => "bool",
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            TagValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    /// Numeric view; integers coerce to reals.
    pub fn as_real(&self) -> Option<f64> {
        match self {
            TagValue::Real(v) => Some(*v),
            TagValue::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            TagValue::Str(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            TagValue::Bool(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for TagValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagValue::Int(v) => write!(f, "{v}"),
            TagValue::Real(v) => write!(f, "{v}"),
            TagValue::Str(v) => write!(f, "{v}"),
            TagValue::Bool(v) => write!(f, "{v}"),
        }
    }
}

impl From<i64> for TagValue {
    fn from(v: i64) -> Self {
        TagValue::Int(v)
    }
}

impl From<f64> for TagValue {
    fn from(v: f64) -> Self {
        TagValue::Real(v)
    }
}

impl From<&str> for TagValue {
    fn from(v: &str) -> Self {
        TagValue::Str(v.to_string())
    }
}

impl From<String> for TagValue {
    fn from(v: String) -> Self {
        TagValue::Str(v)
    }
}

impl From<bool> for TagValue {
    fn from(v: bool) -> Self {
        TagValue::Bool(v)
    }
}

/// A tag value together with its persistence flag.
#[derive(Debug, Clone, PartialEq)]
pub struct TagEntry {
    pub value: TagValue,
    pub persistent: bool,
}

/// Ordered map of tags. Iteration order is the key order, which keeps
/// snapshots and replays byte-stable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TagMap {
    entries: BTreeMap<String, TagEntry>,
}

impl TagMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets a tag, overwriting any prior entry including its persistence flag.
    pub fn set(&mut self, key: impl Into<String>, value: TagValue, persistent: bool) {
        self.entries
            .insert(key.into(), TagEntry { value, persistent });
    }

    pub fn get(&self, key: &str) -> Option<&TagValue> {
        self.entries.get(key).map(|e| &e.value)
    }

    pub fn entry(&self, key: &str) -> Option<&TagEntry> {
        self.entries.get(key)
    }

    pub fn remove(&mut self, key: &str) -> Option<TagEntry> {
        self.entries.remove(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TagEntry)> {
        self.entries.iter().map(|(k, e)| (k.as_str(), e))
    }

    /// Only the entries that survive a save/load round-trip.
    pub fn persistent_entries(&self) -> impl Iterator<Item = (&str, &TagValue)> {
        self.entries
            .iter()
            .filter(|(_, e)| e.persistent)
            .map(|(k, e)| (k.as_str(), &e.value))
    }
}
