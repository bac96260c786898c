use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ExtractError;

/// Japanese phrase → English phrase table, matched longest key first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    entries: BTreeMap<String, String>,
    max_key_chars: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryFile {
    pub en: BTreeMap<String, String>,
}

/// One piece of a segmented label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Phrase { key: String, english: String },
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Translation {
    pub text: String,
    /// Runs of Japanese characters no dictionary key covered.
    pub untranslated: Vec<String>,
}

pub(crate) fn is_japanese(c: char) -> bool {
    matches!(c as u32,
        0x3000..=0x303F   // CJK punctuation
        | 0x3040..=0x309F // hiragana
        | 0x30A0..=0x30FF // katakana
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xF900..=0xFAFF
        | 0xFF66..=0xFF9F // half-width katakana
    )
}

impl Dictionary {
    pub fn new<K, V, I>(entries: I) -> Result<Self, ExtractError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (k, v) in entries {
            let (k, v) = (k.into(), v.into());
            if k.is_empty() {
                return Err(ExtractError::InvalidDictionary("empty key".into()));
            }
            map.insert(k, v);
        }
        let max_key_chars = map.keys().map(|k| k.chars().count()).max().unwrap_or(0);
        Ok(Dictionary {
            entries: map,
            max_key_chars,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ExtractError> {
        let file: DictionaryFile = serde_json::from_str(text)
            .map_err(|e| ExtractError::InvalidDictionary(e.to_string()))?;
        Self::new(file.en)
    }

    pub fn to_file(&self) -> DictionaryFile {
        DictionaryFile {
            en: self.entries.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Greedy longest-match segmentation. Keys are only tried at non-ASCII
    /// positions, so ASCII runs always pass through untouched.
    pub fn segment(&self, label: &str) -> Vec<Segment> {
        let chars: Vec<char> = label.chars().collect();
        let mut segments = Vec::new();
        let mut text = String::new();
        let mut i = 0;
        while i < chars.len() {
            let hit = if chars[i].is_ascii() {
                None
            } else {
                let longest = self.max_key_chars.min(chars.len() - i);
                (1..=longest).rev().find_map(|len| {
                    let key: String = chars[i..i + len].iter().collect();
                    self.entries.get(&key).map(|en| (len, key, en.clone()))
                })
            };
            match hit {
                Some((len, key, english)) => {
                    if !text.is_empty() {
                        segments.push(Segment::Text(std::mem::take(&mut text)));
                    }
                    segments.push(Segment::Phrase { key, english });
                    i += len;
                }
                None => {
                    text.push(chars[i]);
                    i += 1;
                }
            }
        }
        if !text.is_empty() {
            segments.push(Segment::Text(text));
        }
        segments
    }

    pub fn translate(&self, label: &str) -> Translation {
        let mut out = String::with_capacity(label.len());
        let mut untranslated = Vec::new();
        let mut after_phrase = false;
        for seg in self.segment(label) {
            match seg {
                Segment::Phrase { english, .. } => {
                    if out.chars().last().is_some_and(char::is_alphanumeric) {
                        out.push(' ');
                    }
                    out.push_str(&english);
                    after_phrase = true;
                }
                Segment::Text(t) => {
                    if after_phrase && t.chars().next().is_some_and(char::is_alphanumeric) {
                        out.push(' ');
                    }
                    let mut run = String::new();
                    for c in t.chars() {
                        if is_japanese(c) && !c.is_whitespace() {
                            run.push(c);
                        } else if !run.is_empty() {
                            untranslated.push(std::mem::take(&mut run));
                        }
                    }
                    if !run.is_empty() {
                        untranslated.push(run);
                    }
                    out.push_str(&t);
                    after_phrase = false;
                }
            }
        }
        Translation {
            text: out,
            untranslated,
        }
    }
}
