use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::dictionary::Dictionary;
use super::normalize::{is_numeric, AbbreviationTable};
use crate::ingest::RawPoint;
use crate::registry::HvacTermRegistry;

/// A (term, number) equipment reference such as `sdf` + `102_7`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EquipmentRef {
    pub term: String,
    pub number: String,
}

impl EquipmentRef {
    pub fn new(term: impl Into<String>, number: impl Into<String>) -> Self {
        EquipmentRef {
            term: term.into(),
            number: number.into(),
        }
    }

    /// `AC_977`, `SDF_102_7`.
    pub fn local_name(&self) -> String {
        format!("{}_{}", self.term.to_ascii_uppercase(), self.number)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenizedPoint {
    pub code: String,
    /// Translated (English) label.
    pub label: String,
    pub tokens: Vec<String>,
    pub floor: Option<u32>,
    pub room: Option<String>,
    pub equipment: Vec<EquipmentRef>,
    pub reserve: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub untranslated: Vec<String>,
    /// Word+number pairs whose word is not a registered term.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<EquipmentRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

enum Item {
    Floor,
    Tok(String),
}

fn floor_of(chunk: &str) -> Option<u32> {
    let digits = chunk.strip_suffix('f')?;
    if is_numeric(digits) {
        digits.parse().ok()
    } else {
        None
    }
}

pub fn tokenize_point(
    point: &RawPoint,
    dict: &Dictionary,
    abbrevs: &AbbreviationTable,
    registry: &HvacTermRegistry,
) -> TokenizedPoint {
    let translation = dict.translate(&point.name);
    let mut notes = Vec::new();

    let mut items = Vec::new();
    let mut floor = None;
    for chunk in AbbreviationTable::chunks(&translation.text) {
        match floor_of(&chunk) {
            Some(n) if floor.is_none() => {
                floor = Some(n);
                items.push(Item::Floor);
            }
            found => {
                if found.is_some() {
                    notes.push(format!("additional floor token {chunk:?} kept as text"));
                }
                items.extend(abbrevs.expand_chunk(&chunk).into_iter().map(Item::Tok));
            }
        }
    }

    // token positions, with whether each comes after the floor marker
    let mut toks: Vec<(String, bool)> = Vec::new();
    let mut past_floor = false;
    for item in items {
        match item {
            Item::Floor => past_floor = true,
            Item::Tok(t) => toks.push((t, past_floor)),
        }
    }

    let mut consumed = vec![false; toks.len()];
    let mut equipment: Vec<EquipmentRef> = Vec::new();
    let mut candidates = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let tok = &toks[i].0;
        let numbers_from = i + 1;
        let mut end = numbers_from;
        while end < toks.len() && is_numeric(&toks[end].0) {
            end += 1;
        }
        if end > numbers_from && registry.is_term(tok) {
            let number: Vec<&str> = toks[numbers_from..end].iter().map(|(t, _)| t.as_str()).collect();
            let eq = EquipmentRef::new(tok.clone(), number.join("_"));
            if !equipment.contains(&eq) {
                equipment.push(eq);
            }
            // "VAV_811_System" names the unit's system, not a measurement
            if toks.get(end).is_some_and(|(t, _)| t == "system") {
                end += 1;
            }
            consumed[i..end].iter_mut().for_each(|c| *c = true);
            i = end;
            continue;
        }
        if end == numbers_from + 1 && tok.len() >= 2 && tok.bytes().all(|b| b.is_ascii_lowercase()) {
            candidates.push(EquipmentRef::new(tok.clone(), toks[numbers_from].0.clone()));
        }
        i += 1;
    }

    let mut room = None;
    let mut room_ix = None;
    for (ix, (t, after)) in toks.iter().enumerate() {
        if *after && !consumed[ix] && is_numeric(t) {
            if room.is_none() {
                room = Some(t.clone());
                room_ix = Some(ix);
            } else {
                notes.push(format!("number {t:?} after floor not used as room"));
            }
        }
    }

    let reserve = toks.first().is_some_and(|(t, _)| t == "reserve");
    let tokens = toks
        .into_iter()
        .enumerate()
        .filter(|(ix, _)| !consumed[*ix] && Some(*ix) != room_ix)
        .map(|(_, (t, _))| t)
        .collect();

    TokenizedPoint {
        code: point.code.clone(),
        label: translation.text,
        tokens,
        floor,
        room,
        equipment,
        reserve,
        untranslated: translation.untranslated,
        candidates,
        notes,
    }
}

/// Registered terms plus unregistered word+number candidates, with the
/// number of points mentioning each.
pub fn term_candidates(points: &[TokenizedPoint]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for p in points {
        let mut terms: Vec<&str> = p
            .equipment
            .iter()
            .chain(&p.candidates)
            .map(|e| e.term.as_str())
            .collect();
        terms.sort_unstable();
        terms.dedup();
        for t in terms {
            *counts.entry(t.to_string()).or_insert(0) += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn tok(name: &str) -> TokenizedPoint {
        tokenize_point(
            &RawPoint::new("1", name, None),
            &fixtures::dictionary(),
            &fixtures::abbreviations(),
            &fixtures::registry(),
        )
    }

    #[test]
    fn locker_point() {
        let t = tok("10F_536_Locker_Room_in_library_On_Off_Status");
        assert_eq!(t.floor, Some(10));
        assert_eq!(t.room.as_deref(), Some("536"));
        assert_eq!(t.tokens, ["locker", "room", "library", "on", "off", "status"]);
        assert!(t.equipment.is_empty());
        assert!(!t.reserve);
    }

    #[test]
    fn reserve_and_bare_unit() {
        let t = tok("Reserve_AV");
        assert!(t.reserve);
        let t = tok("AC_977");
        assert_eq!(t.equipment, [EquipmentRef::new("ac", "977")]);
        assert!(t.tokens.is_empty());
    }

    #[test]
    fn multi_unit_and_compound_numbers() {
        let t = tok("3F_VAV_331_System__AC_303_Status_On_Off");
        assert_eq!(t.floor, Some(3));
        assert_eq!(t.room, None);
        assert_eq!(t.equipment, [EquipmentRef::new("vav", "331"), EquipmentRef::new("ac", "303")]);
        assert_eq!(t.tokens, ["status", "on", "off"]);

        let t = tok("SDF_102_7_SP_Value");
        assert_eq!(t.equipment, [EquipmentRef::new("sdf", "102_7")]);
        assert_eq!(t.equipment[0].local_name(), "SDF_102_7");
        assert_eq!(t.tokens, ["setpoint", "value"]);

        let t = tok("SDF1_People number");
        assert_eq!(t.equipment, [EquipmentRef::new("sdf", "1")]);
        assert_eq!(t.tokens, ["occupancy", "count"]);
    }

    #[test]
    fn japanese_label_translates_first() {
        let t = tok("VAV-1 給気温度設定値");
        assert_eq!(t.label, "VAV-1 Supply Air Temperature Setpoint");
        assert_eq!(t.equipment, [EquipmentRef::new("vav", "1")]);
        assert_eq!(t.tokens, ["supply", "air", "temperature", "setpoint"]);
    }

    #[test]
    fn unknown_word_number_pairs_become_candidates() {
        let t = tok("FCU_12_Return_Temp");
        assert_eq!(t.candidates, [EquipmentRef::new("fcu", "12")]);
        let counts = term_candidates(&[t, tok("AC_1_x"), tok("AC_2_y")]);
        assert_eq!(counts["fcu"], 1);
        assert_eq!(counts["ac"], 2);
    }
}
