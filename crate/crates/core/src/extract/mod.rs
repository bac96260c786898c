//! Translation, normalization, tokenization and the floor/room layout.

mod dictionary;
mod normalize;
mod tokenize;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dictionary::{Dictionary, DictionaryFile, Segment, Translation};
pub use normalize::{is_numeric, AbbreviationTable};
pub use tokenize::{term_candidates, tokenize_point, EquipmentRef, TokenizedPoint};

use crate::ingest::RawPoint;
use crate::registry::HvacTermRegistry;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("invalid dictionary: {0}")]
    InvalidDictionary(String),
    #[error("invalid abbreviation table: {0}")]
    InvalidAbbreviation(String),
}

pub fn translate_label(label: &str, dict: &Dictionary) -> String {
    dict.translate(label).text
}

/// Tokenizes a whole point list; output order follows input order.
pub fn tokenize_all(
    points: &[RawPoint],
    dict: &Dictionary,
    abbrevs: &AbbreviationTable,
    registry: &HvacTermRegistry,
) -> Vec<TokenizedPoint> {
    points
        .par_iter()
        .map(|p| tokenize_point(p, dict, abbrevs, registry))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FloorLayout {
    pub floor: u32,
    pub rooms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SemiLayout {
    pub floors: Vec<FloorLayout>,
}

pub fn build_semi_layout(points: &[TokenizedPoint]) -> SemiLayout {
    let mut floors: BTreeMap<u32, BTreeSet<(usize, String)>> = BTreeMap::new();
    for p in points {
        if let Some(f) = p.floor {
            let rooms = floors.entry(f).or_default();
            if let Some(r) = &p.room {
                // shorter digit strings first gives numeric order
                rooms.insert((r.len(), r.clone()));
            }
        }
    }
    SemiLayout {
        floors: floors
            .into_iter()
            .map(|(floor, rooms)| FloorLayout {
                floor,
                rooms: rooms.into_iter().map(|(_, r)| r).collect(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(floor: Option<u32>, room: Option<&str>) -> TokenizedPoint {
        TokenizedPoint {
            floor,
            room: room.map(str::to_string),
            ..Default::default()
        }
    }

    #[test]
    fn layout_dedupes_and_sorts() {
        let layout = build_semi_layout(&[
            tp(Some(3), Some("101")),
            tp(Some(1), Some("12")),
            tp(Some(3), Some("101")),
            tp(Some(3), Some("99")),
            tp(None, Some("5")),
        ]);
        assert_eq!(
            layout.floors,
            vec![
                FloorLayout { floor: 1, rooms: vec!["12".into()] },
                FloorLayout { floor: 3, rooms: vec!["99".into(), "101".into()] },
            ]
        );
        assert!(build_semi_layout(&[tp(None, None)]).floors.is_empty());
        let json = serde_json::to_string(&layout).unwrap();
        assert!(json.starts_with(r#"{"floors":[{"floor":1,"rooms":["12"]}"#));
    }
}
