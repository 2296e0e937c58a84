//! Entity references: a class name plus a disambiguating index, e.g. "cabinet 2".

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// A lexical reference to an object or receptacle instance.
///
/// References are resolved against the world state at step time, not at
/// parse time, so a reference may name an entity that does not exist.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityRef {
    pub class: String,
    pub index: u32,
}

impl EntityRef {
    pub fn new(class: impl Into<String>, index: u32) -> Self {
        Self {
            class: class.into(),
            index,
        }
    }

    /// Canonical map key / display form, e.g. "spraybottle 2".
    pub fn key(&self) -> String {
        format!("{} {}", self.class, self.index)
    }

    /// Order used for candidate enumeration: class ascending, index ascending.
    pub fn enum_order(&self) -> (&str, u32) {
        (&self.class, self.index)
    }

    /// Order used when rendering entity lists: class ascending, index
    /// descending ("a cabinet 4, a cabinet 3, ...").
    pub fn render_cmp(&self, other: &EntityRef) -> Ordering {
        self.class
            .cmp(&other.class)
            .then(other.index.cmp(&self.index))
    }
}

impl fmt::Display for EntityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.class, self.index)
    }
}

impl PartialOrd for EntityRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EntityRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.class
            .cmp(&other.class)
            .then(self.index.cmp(&other.index))
    }
}

/// Join entity names as an observation list: "a candle 1, and a spraybottle 2".
///
/// Every item is prefixed with "a" regardless of its initial letter, matching
/// ALFWorld's transcript style ("a apple 1"). Two or more items get a comma
/// before the final "and". An empty list renders as "nothing".
pub fn render_entity_list(items: &[EntityRef]) -> String {
    let mut sorted: Vec<&EntityRef> = items.iter().collect();
    sorted.sort_by(|a, b| a.render_cmp(b));
    match sorted.len() {
        0 => "nothing".to_string(),
        1 => format!("a {}", sorted[0]),
        _ => {
            let head: Vec<String> = sorted[..sorted.len() - 1]
                .iter()
                .map(|e| format!("a {e}"))
                .collect();
            format!("{}, and a {}", head.join(", "), sorted[sorted.len() - 1])
        }
    }
}
