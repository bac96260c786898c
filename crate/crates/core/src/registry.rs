//! Operator-supplied HVAC equipment vocabulary and its relation topology.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ontology::{ClassKind, Taxonomy};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("registry parse error: {0}")]
    Parse(String),
    #[error("term {0:?} must be lowercase ASCII letters")]
    InvalidTerm(String),
    #[error("term {term:?} maps to unknown class {class:?}")]
    UnknownClass { term: String, class: String },
    #[error("term {term:?} maps to {class:?}, which is not an equipment class")]
    NotEquipment { term: String, class: String },
    #[error("topology edge {0:?} references an unregistered term")]
    UnknownTerm(String),
    #[error("topology edge uses unregistered relation {0:?}")]
    UnknownRelation(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HvacTerm {
    pub brick_class: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TopologyEdge(pub String, pub String, pub String);

impl TopologyEdge {
    pub fn source(&self) -> &str {
        &self.0
    }
    pub fn relation(&self) -> &str {
        &self.1
    }
    pub fn target(&self) -> &str {
        &self.2
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HvacTermRegistry {
    pub terms: BTreeMap<String, HvacTerm>,
    #[serde(default)]
    pub topology: Vec<TopologyEdge>,
}

impl HvacTermRegistry {
    pub fn from_json(text: &str, tax: &Taxonomy) -> Result<Self, RegistryError> {
        let reg: HvacTermRegistry =
            serde_json::from_str(text).map_err(|e| RegistryError::Parse(e.to_string()))?;
        reg.validate(tax)?;
        Ok(reg)
    }

    pub fn validate(&self, tax: &Taxonomy) -> Result<(), RegistryError> {
        for (term, def) in &self.terms {
            if term.is_empty() || !term.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(RegistryError::InvalidTerm(term.clone()));
            }
            match tax.kind(&def.brick_class) {
                Err(_) => {
                    return Err(RegistryError::UnknownClass {
                        term: term.clone(),
                        class: def.brick_class.clone(),
                    })
                }
                Ok(ClassKind::Equipment) => {}
                Ok(_) => {
                    return Err(RegistryError::NotEquipment {
                        term: term.clone(),
                        class: def.brick_class.clone(),
                    })
                }
            }
        }
        for edge in &self.topology {
            for t in [edge.source(), edge.target()] {
                if !self.terms.contains_key(t) {
                    return Err(RegistryError::UnknownTerm(t.to_string()));
                }
            }
            if tax.relation(edge.relation()).is_err() {
                return Err(RegistryError::UnknownRelation(edge.relation().to_string()));
            }
        }
        Ok(())
    }

    pub fn is_term(&self, token: &str) -> bool {
        self.terms.contains_key(token)
    }

    pub fn term(&self, token: &str) -> Option<&HvacTerm> {
        self.terms.get(token)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Relations the topology declares from `source` to `target`.
    pub fn relations_between<'a>(
        &'a self,
        source: &'a str,
        target: &'a str,
    ) -> impl Iterator<Item = &'a str> + 'a {
        self.topology
            .iter()
            .filter(move |e| e.source() == source && e.target() == target)
            .map(TopologyEdge::relation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixture_registry_is_valid() {
        let reg = fixtures::registry();
        assert_eq!(reg.term("ac").unwrap().brick_class, "AHU");
        assert_eq!(reg.term("sdf").unwrap().brick_class, "SDF");
        assert!(reg.relations_between("ac", "cav").any(|r| r == "feeds"));
        assert!(reg.relations_between("cav", "ac").next().is_none());
    }

    #[test]
    fn rejects_bad_entries() {
        let tax = fixtures::taxonomy();
        let bad_class = r#"{"terms":{"ac":{"brick_class":"Nope"}}}"#;
        assert!(matches!(
            HvacTermRegistry::from_json(bad_class, &tax),
            Err(RegistryError::UnknownClass { .. })
        ));
        let point_class = r#"{"terms":{"ac":{"brick_class":"Temperature_Sensor"}}}"#;
        assert!(matches!(
            HvacTermRegistry::from_json(point_class, &tax),
            Err(RegistryError::NotEquipment { .. })
        ));
        let bad_rel = r#"{"terms":{"ac":{"brick_class":"AHU"}},"topology":[["ac","blows","ac"]]}"#;
        assert_eq!(
            HvacTermRegistry::from_json(bad_rel, &tax),
            Err(RegistryError::UnknownRelation("blows".into()))
        );
        let bad_term = r#"{"terms":{"ac1":{"brick_class":"AHU"}}}"#;
        assert!(HvacTermRegistry::from_json(bad_term, &tax).is_err());
    }
}
