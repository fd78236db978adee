use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Constant,
    Infinitesimal,
}

/// Declared symbols of one game, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    symbols: IndexMap<String, SymbolKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolError {
    #[error("symbol `{0}` declared twice")]
    Duplicate(String),
    #[error("`{0}` is not a valid identifier")]
    BadName(String),
}

/// Letters, digits and underscore, not starting with a digit.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, kind: SymbolKind) -> Result<(), SymbolError> {
        if !is_identifier(name) {
            return Err(SymbolError::BadName(name.to_string()));
        }
        if self.symbols.contains_key(name) {
            return Err(SymbolError::Duplicate(name.to_string()));
        }
        self.symbols.insert(name.to_string(), kind);
        Ok(())
    }

    pub fn with(mut self, name: &str, kind: SymbolKind) -> Self {
        self.declare(name, kind).expect("valid symbol");
        self
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        self.symbols.get(name).copied()
    }

    pub fn is_infinitesimal(&self, name: &str) -> bool {
        self.kind(name) == Some(SymbolKind::Infinitesimal)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, SymbolKind)> {
        self.symbols.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn names_of(&self, kind: SymbolKind) -> Vec<String> {
        self.iter()
            .filter(|(_, k)| *k == kind)
            .map(|(n, _)| n.to_string())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}
