use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// One operator decision: a class assignment, or an exclusion when
/// `class` is absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub code: String,
    #[serde(default)]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub timestamp: DateTime<Utc>,
}

impl Decision {
    pub fn new(code: impl Into<String>, class: Option<String>, note: Option<String>) -> Self {
        Decision {
            code: code.into(),
            class,
            note,
            timestamp: Utc::now(),
        }
    }
}

/// Append-only; replay order is file order and the latest entry per code wins.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionLog {
    entries: Vec<Decision>,
}

impl DecisionLog {
    pub fn append(&mut self, d: Decision) {
        self.entries.push(d);
    }

    pub fn entries(&self) -> &[Decision] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn latest(&self) -> BTreeMap<&str, &Decision> {
        let mut out = BTreeMap::new();
        for d in &self.entries {
            out.insert(d.code.as_str(), d);
        }
        out
    }
}
