use std::collections::BTreeMap;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::StoreError;
use crate::ingest::TimeseriesSample;

/// Decimal rendering of the first 128 bits of SHA-256(namespace, 0x00, code).
pub fn timeseries_id(namespace: &str, code: &str) -> String {
    let mut h = Sha256::new();
    h.update(namespace.as_bytes());
    h.update([0u8]);
    h.update(code.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 16];
    bytes.copy_from_slice(&digest[..16]);
    u128::from_be_bytes(bytes).to_string()
}

/// Bijective id ↔ point-code map.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, String>", into = "BTreeMap<String, String>")]
pub struct TimeseriesIndex {
    by_id: BTreeMap<String, String>,
    by_code: BTreeMap<String, String>,
}

impl TryFrom<BTreeMap<String, String>> for TimeseriesIndex {
    type Error = String;
    fn try_from(by_id: BTreeMap<String, String>) -> Result<Self, String> {
        let mut by_code = BTreeMap::new();
        for (id, code) in &by_id {
            if id.is_empty() || id.len() > 39 || !id.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("invalid timeseries id {id:?}"));
            }
            if let Some(other) = by_code.insert(code.clone(), id.clone()) {
                return Err(format!("point {code} has two ids ({other}, {id})"));
            }
        }
        Ok(TimeseriesIndex { by_id, by_code })
    }
}

impl From<TimeseriesIndex> for BTreeMap<String, String> {
    fn from(ix: TimeseriesIndex) -> Self {
        ix.by_id
    }
}

impl TimeseriesIndex {
    /// Idempotent per code; a hash collision with another code is an error.
    pub fn assign(&mut self, namespace: &str, code: &str) -> Result<String, StoreError> {
        if let Some(id) = self.by_code.get(code) {
            return Ok(id.clone());
        }
        let id = timeseries_id(namespace, code);
        if let Some(other) = self.by_id.get(&id) {
            return Err(StoreError::Collision {
                id,
                codes: (other.clone(), code.to_string()),
            });
        }
        self.by_id.insert(id.clone(), code.to_string());
        self.by_code.insert(code.to_string(), id.clone());
        Ok(id)
    }

    pub fn id_of(&self, code: &str) -> Option<&str> {
        self.by_code.get(code).map(String::as_str)
    }

    pub fn code_of(&self, id: &str) -> Option<&str> {
        self.by_id.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    /// Point code → id.
    pub fn by_code(&self) -> &BTreeMap<String, String> {
        &self.by_code
    }
}

/// Samples of the point behind `id` within `[from, to]`, time-ordered.
pub fn samples_in_range(
    index: &TimeseriesIndex,
    samples: &[TimeseriesSample],
    id: &str,
    from: NaiveDateTime,
    to: NaiveDateTime,
) -> Result<Vec<TimeseriesSample>, StoreError> {
    let code = index
        .code_of(id)
        .ok_or_else(|| StoreError::NotFound(format!("timeseries {id}")))?;
    if from > to {
        return Err(StoreError::InvalidRange);
    }
    let mut out: Vec<TimeseriesSample> = samples
        .iter()
        .filter(|s| s.code == code && s.timestamp >= from && s.timestamp <= to)
        .cloned()
        .collect();
    out.sort_by_key(|s| s.timestamp);
    Ok(out)
}
