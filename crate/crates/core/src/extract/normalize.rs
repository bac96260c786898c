use std::collections::BTreeMap;

use super::ExtractError;

/// Token → expansion table (e.g. `temp` → `temperature`, `sa` → `supply air`).
///
/// An empty expansion drops the token. Every expansion token must be a fixed
/// point of the normalizer so normalization stays idempotent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AbbreviationTable {
    entries: BTreeMap<String, Vec<String>>,
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() && !c.is_uppercase())
}

impl AbbreviationTable {
    pub fn new<K, V, I>(entries: I) -> Result<Self, ExtractError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            let key: String = k.into();
            if !is_token(&key) {
                return Err(ExtractError::InvalidAbbreviation(format!(
                    "key {key:?} must be a non-empty lowercase alphanumeric token"
                )));
            }
            let expansion: Vec<String> = v.as_ref().split_whitespace().map(str::to_string).collect();
            if let Some(bad) = expansion.iter().find(|t| !is_token(t)) {
                return Err(ExtractError::InvalidAbbreviation(format!(
                    "expansion token {bad:?} of {key:?} must be lowercase alphanumeric"
                )));
            }
            if expansion.len() > 1 && expansion.contains(&key) {
                return Err(ExtractError::InvalidAbbreviation(format!(
                    "{key:?} expands to itself plus other tokens"
                )));
            }
            map.insert(key, expansion);
        }
        let table = AbbreviationTable { entries: map };
        for (key, expansion) in &table.entries {
            for tok in expansion {
                if table.expand_chunk(tok) != [tok.clone()] {
                    return Err(ExtractError::InvalidAbbreviation(format!(
                        "expansion token {tok:?} of {key:?} is itself rewritten"
                    )));
                }
            }
        }
        Ok(table)
    }

    pub fn from_json(text: &str) -> Result<Self, ExtractError> {
        let raw: BTreeMap<String, String> = serde_json::from_str(text)
            .map_err(|e| ExtractError::InvalidAbbreviation(e.to_string()))?;
        Self::new(raw)
    }

    pub fn to_json_map(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .map(|(k, v)| (k.clone(), v.join(" ")))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lowercased pieces of a label between separators. Anything that is not
    /// a letter or digit separates.
    pub fn chunks(label: &str) -> Vec<String> {
        label
            .split(|c: char| !c.is_alphanumeric())
            .filter(|c| !c.is_empty())
            .map(str::to_lowercase)
            .collect()
    }

    /// Expands one chunk. A chunk that is itself a key expands whole
    /// (so `co2` can survive); otherwise it is split at letter/digit
    /// boundaries and each piece is looked up.
    pub fn expand_chunk(&self, chunk: &str) -> Vec<String> {
        if let Some(exp) = self.entries.get(chunk) {
            return exp.clone();
        }
        let mut out = Vec::new();
        for piece in split_digit_boundaries(chunk) {
            match self.entries.get(piece) {
                Some(exp) => out.extend(exp.iter().cloned()),
                None => out.push(piece.to_string()),
            }
        }
        out
    }

    pub fn normalize(&self, label: &str) -> Vec<String> {
        Self::chunks(label)
            .iter()
            .flat_map(|c| self.expand_chunk(c))
            .collect()
    }
}

fn split_digit_boundaries(chunk: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut prev_digit = None;
    for (i, c) in chunk.char_indices() {
        let digit = c.is_ascii_digit();
        if prev_digit.is_some_and(|p| p != digit) {
            out.push(&chunk[start..i]);
            start = i;
        }
        prev_digit = Some(digit);
    }
    if start < chunk.len() {
        out.push(&chunk[start..]);
    }
    out
}

pub fn is_numeric(token: &str) -> bool {
    !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit())
}
