//! Curated Brick class taxonomy and relation registry.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::{self, Graph, Iri, Term, OWL, RDFS};

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("reading taxonomy {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("taxonomy JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("taxonomy Turtle: {0}")]
    Turtle(#[from] rdf::ParseError),
    #[error("empty taxonomy")]
    Empty,
    #[error("duplicate class {0:?}")]
    DuplicateClass(String),
    #[error("class {class:?} names unknown superclass {superclass:?}")]
    DanglingSuperclass { class: String, superclass: String },
    #[error("superclass chain of {0:?} is cyclic")]
    Cycle(String),
    #[error("class {0:?} has no superclass but is not one of Point, Equipment, Location")]
    InvalidRoot(String),
    #[error("class {class:?} declared {declared} but its root is {root}")]
    KindMismatch {
        class: String,
        declared: ClassKind,
        root: ClassKind,
    },
    #[error("relation {0:?} has conflicting inverse declarations")]
    InverseConflict(String),
    #[error("invalid namespace: {0}")]
    Namespace(#[from] rdf::RdfError),
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("unknown relation {0:?}")]
    UnknownRelation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Point,
    Equipment,
    Location,
}

impl ClassKind {
    fn root_name(self) -> &'static str {
        match self {
            ClassKind::Point => "Point",
            ClassKind::Equipment => "Equipment",
            ClassKind::Location => "Location",
        }
    }

    fn from_root(name: &str) -> Option<Self> {
        match name {
            "Point" => Some(ClassKind::Point),
            "Equipment" => Some(ClassKind::Equipment),
            "Location" => Some(ClassKind::Location),
            _ => None,
        }
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassKind::Point => "point",
            ClassKind::Equipment => "equipment",
            ClassKind::Location => "location",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrickClass {
    pub name: String,
    pub superclass: Option<String>,
    pub kind: ClassKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDef {
    pub name: String,
    pub inverse: String,
}

/// On-disk JSON shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaxonomyFile {
    pub namespace: String,
    pub classes: Vec<BrickClass>,
    #[serde(default)]
    pub relations: Vec<RelationDef>,
}

/// Validated, immutable class hierarchy.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    namespace: Iri,
    classes: BTreeMap<String, BrickClass>,
    relations: BTreeMap<String, RelationDef>,
    chains: BTreeMap<String, Vec<String>>,
}

pub fn load_taxonomy(path: impl AsRef<Path>) -> Result<Taxonomy, TaxonomyError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("ttl") => Taxonomy::from_turtle(&text, None),
        _ => Taxonomy::from_json(&text),
    }
}

impl Taxonomy {
    pub fn from_json(text: &str) -> Result<Self, TaxonomyError> {
        let file: TaxonomyFile = serde_json::from_str(text)?;
        Self::from_file(file)
    }

    pub fn from_file(file: TaxonomyFile) -> Result<Self, TaxonomyError> {
        let namespace = Iri::new(&file.namespace)?;
        if file.classes.is_empty() {
            return Err(TaxonomyError::Empty);
        }
        let mut classes = BTreeMap::new();
        for class in file.classes {
            if classes.contains_key(&class.name) {
                return Err(TaxonomyError::DuplicateClass(class.name));
            }
            classes.insert(class.name.clone(), class);
        }

        let mut chains = BTreeMap::new();
        for (name, class) in &classes {
            let mut chain = Vec::new();
            let mut current = class;
            while let Some(sup) = &current.superclass {
                if sup == name || chain.len() > classes.len() {
                    return Err(TaxonomyError::Cycle(name.clone()));
                }
                current = classes.get(sup).ok_or_else(|| TaxonomyError::DanglingSuperclass {
                    class: current.name.clone(),
                    superclass: sup.clone(),
                })?;
                chain.push(sup.clone());
            }
            let root_kind = ClassKind::from_root(&current.name)
                .ok_or_else(|| TaxonomyError::InvalidRoot(current.name.clone()))?;
            if class.kind != root_kind {
                return Err(TaxonomyError::KindMismatch {
                    class: name.clone(),
                    declared: class.kind,
                    root: root_kind,
                });
            }
            chains.insert(name.clone(), chain);
        }

        let mut relations: BTreeMap<String, RelationDef> = BTreeMap::new();
        for rel in &file.relations {
            if relations.get(&rel.name).is_some_and(|r| r.inverse != rel.inverse) {
                return Err(TaxonomyError::InverseConflict(rel.name.clone()));
            }
            relations.insert(rel.name.clone(), rel.clone());
        }
        // close under inversion; a one-sided declaration implies its mirror
        for rel in file.relations {
            match relations.get(&rel.inverse) {
                Some(mirror) if mirror.inverse != rel.name => {
                    return Err(TaxonomyError::InverseConflict(rel.inverse));
                }
                Some(_) => {}
                None => {
                    relations.insert(
                        rel.inverse.clone(),
                        RelationDef {
                            name: rel.inverse,
                            inverse: rel.name,
                        },
                    );
                }
            }
        }

        Ok(Taxonomy {
            namespace,
            classes,
            relations,
            chains,
        })
    }

    /// Reads `rdfs:subClassOf` and `owl:inverseOf` statements from a Turtle
    /// document. Classes are identified by IRIs under `namespace` (defaults to
    /// the document's `brick:` prefix).
    pub fn from_turtle(text: &str, namespace: Option<&str>) -> Result<Self, TaxonomyError> {
        let graph = rdf::parse_turtle(text)?;
        Self::from_graph(&graph, namespace)
    }

    pub fn from_graph(graph: &Graph, namespace: Option<&str>) -> Result<Self, TaxonomyError> {
        let ns = match namespace {
            Some(ns) => Iri::new(ns)?,
            None => graph
                .namespace("brick")
                .cloned()
                .unwrap_or(Iri::new(rdf::BRICK)?),
        };
        let sub_class_of = Iri::new(format!("{RDFS}subClassOf"))?;
        let owl_class = Term::Iri(Iri::new(format!("{OWL}Class"))?);
        let inverse_of = Iri::new(format!("{OWL}inverseOf"))?;
        let local = |iri: &Iri| iri.strip_base(&ns).map(str::to_string);

        let mut parents: BTreeMap<String, Option<String>> = BTreeMap::new();
        for s in graph.subjects_with(&Iri::rdf_type(), &owl_class) {
            if let Some(name) = local(s) {
                parents.entry(name).or_insert(None);
            }
        }
        for t in graph.query(None, Some(&sub_class_of), None) {
            let (Some(child), Some(parent)) = (local(&t.subject), t.object.as_iri().and_then(local)) else {
                continue;
            };
            // single inheritance: query order is sorted, so the first parent wins
            if matches!(parents.get(&child), Some(Some(_))) {
                continue;
            }
            parents.insert(child, Some(parent.clone()));
            parents.entry(parent).or_insert(None);
        }

        fn root_of<'a>(parents: &'a BTreeMap<String, Option<String>>, mut name: &'a str) -> Option<ClassKind> {
            for _ in 0..=parents.len() {
                match parents.get(name) {
                    Some(Some(p)) => name = p,
                    _ => return ClassKind::from_root(name),
                }
            }
            None
        }
        let classes = parents
            .iter()
            .map(|(name, sup)| BrickClass {
                name: name.clone(),
                superclass: sup.clone(),
                kind: root_of(&parents, name).unwrap_or(ClassKind::Point),
            })
            .collect();
        let relations = graph
            .query(None, Some(&inverse_of), None)
            .into_iter()
            .filter_map(|t| {
                Some(RelationDef {
                    name: local(&t.subject)?,
                    inverse: t.object.as_iri().and_then(local)?,
                })
            })
            .collect();
        Self::from_file(TaxonomyFile {
            namespace: ns.to_string(),
            classes,
            relations,
        })
    }

    pub fn namespace(&self) -> &Iri {
        &self.namespace
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> impl Iterator<Item = &BrickClass> {
        self.classes.values()
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationDef> {
        self.relations.values()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    pub fn class(&self, name: &str) -> Result<&BrickClass, TaxonomyError> {
        self.classes
            .get(name)
            .ok_or_else(|| TaxonomyError::UnknownClass(name.to_string()))
    }

    pub fn kind(&self, name: &str) -> Result<ClassKind, TaxonomyError> {
        self.class(name).map(|c| c.kind)
    }

    /// Ancestors from the immediate superclass up to the root.
    pub fn superclass_chain(&self, name: &str) -> Result<&[String], TaxonomyError> {
        self.chains
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| TaxonomyError::UnknownClass(name.to_string()))
    }

    pub fn depth(&self, name: &str) -> Result<usize, TaxonomyError> {
        self.superclass_chain(name).map(<[String]>::len)
    }

    /// True when `class` is `ancestor` or one of its descendants.
    pub fn is_a(&self, class: &str, ancestor: &str) -> bool {
        class == ancestor
            || self
                .chains
                .get(class)
                .is_some_and(|chain| chain.iter().any(|c| c == ancestor))
    }

    /// Lowercase underscore-separated parts of the class name.
    pub fn class_tokens(&self, name: &str) -> Result<BTreeSet<String>, TaxonomyError> {
        self.class(name)?;
        Ok(split_class_name(name).map(str::to_lowercase).collect())
    }

    pub fn relation(&self, name: &str) -> Result<&RelationDef, TaxonomyError> {
        self.relations
            .get(name)
            .ok_or_else(|| TaxonomyError::UnknownRelation(name.to_string()))
    }

    pub fn relation_inverse(&self, name: &str) -> Result<&str, TaxonomyError> {
        self.relation(name).map(|r| r.inverse.as_str())
    }

    pub fn class_iri(&self, name: &str) -> Iri {
        Iri::join(&self.namespace, name).expect("class names are valid IRI suffixes")
    }

    pub fn relation_iri(&self, name: &str) -> Iri {
        Iri::join(&self.namespace, name).expect("relation names are valid IRI suffixes")
    }

    /// Class name for an IRI under this taxonomy's namespace.
    pub fn class_of_iri<'a>(&self, iri: &'a Iri) -> Option<&'a str> {
        iri.strip_base(&self.namespace)
            .filter(|local| self.classes.contains_key(*local))
    }

    pub fn relation_of_iri<'a>(&self, iri: &'a Iri) -> Option<&'a str> {
        iri.strip_base(&self.namespace)
            .filter(|local| self.relations.contains_key(*local))
    }

    pub fn root(kind: ClassKind) -> &'static str {
        kind.root_name()
    }
}

/// Non-empty underscore-separated parts of a class name, original case.
pub fn split_class_name(name: &str) -> impl Iterator<Item = &str> {
    name.split('_').filter(|t| !t.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn tax() -> Taxonomy {
        fixtures::taxonomy()
    }

    fn file(classes: &[(&str, Option<&str>, ClassKind)]) -> TaxonomyFile {
        TaxonomyFile {
            namespace: rdf::BRICK.into(),
            classes: classes
                .iter()
                .map(|(n, s, k)| BrickClass {
                    name: n.to_string(),
                    superclass: s.map(str::to_string),
                    kind: *k,
                })
                .collect(),
            relations: vec![],
        }
    }

    #[test]
    fn fixture_contains_matched_classes() {
        let t = tax();
        for name in [
            "Humidity_Sensor",
            "Occupancy_Count_Sensor",
            "Illuminance_Sensor",
            "Auditorium",
            "Average_Zone_Air_Temperature_Sensor",
            "Thermostat",
            "CO2_Sensor",
        ] {
            assert!(t.contains(name), "{name}");
        }
        assert!(t.len() >= 150);
    }

    #[test]
    fn chains() {
        let t = tax();
        assert_eq!(
            t.superclass_chain("On_Off_Status").unwrap(),
            ["On_Status", "Status", "Point"]
        );
        assert!(t.superclass_chain("Point").unwrap().is_empty());
        assert_eq!(t.superclass_chain("AHU").unwrap(), ["Equipment"]);
        assert!(matches!(
            t.superclass_chain("Nope"),
            Err(TaxonomyError::UnknownClass(_))
        ));
        assert!(t.is_a("Zone_Air_Temperature_Sensor", "Temperature_Sensor"));
        assert!(!t.is_a("Temperature_Sensor", "Zone_Air_Temperature_Sensor"));
    }

    #[test]
    fn tokens() {
        let t = tax();
        let toks = |n| t.class_tokens(n).unwrap().into_iter().collect::<Vec<_>>();
        assert_eq!(toks("Average_Zone_Air_Temperature_Sensor"), ["air", "average", "sensor", "temperature", "zone"]);
        assert_eq!(toks("Auditorium"), ["auditorium"]);
        assert_eq!(toks("On_Off_Status"), ["off", "on", "status"]);
    }

    #[test]
    fn inverses() {
        let t = tax();
        assert_eq!(t.relation_inverse("feeds").unwrap(), "isFedBy");
        assert_eq!(t.relation_inverse("hasPoint").unwrap(), "isPointOf");
        for r in t.relations() {
            let inv = t.relation_inverse(&r.name).unwrap();
            assert_eq!(t.relation_inverse(inv).unwrap(), r.name);
        }
        assert!(t.relation_inverse("hasTag").is_err());
    }

    #[test]
    fn invariants_over_fixture() {
        let t = tax();
        for c in t.classes() {
            let chain = t.superclass_chain(&c.name).unwrap();
            assert!(chain.len() <= t.len());
            let root = chain.last().map(String::as_str).unwrap_or(&c.name);
            assert_eq!(t.kind(root).unwrap(), c.kind);
            assert!(!t.class_tokens(&c.name).unwrap().is_empty());
        }
    }

    #[test]
    fn rejects_self_cycle() {
        let err = Taxonomy::from_file(file(&[
            ("Point", None, ClassKind::Point),
            ("Loop", Some("Loop"), ClassKind::Point),
        ]))
        .unwrap_err();
        assert!(matches!(err, TaxonomyError::Cycle(ref n) if n == "Loop"), "{err}");
    }

    #[test]
    fn rejects_long_cycle() {
        let err = Taxonomy::from_file(file(&[
            ("A", Some("B"), ClassKind::Point),
            ("B", Some("C"), ClassKind::Point),
            ("C", Some("A"), ClassKind::Point),
        ]))
        .unwrap_err();
        assert!(matches!(err, TaxonomyError::Cycle(_)), "{err}");
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(Taxonomy::from_file(file(&[])), Err(TaxonomyError::Empty)));
        assert_eq!(
            Taxonomy::from_file(file(&[])).unwrap_err().to_string(),
            "empty taxonomy"
        );
        assert!(matches!(
            Taxonomy::from_file(file(&[("A", Some("Missing"), ClassKind::Point)])),
            Err(TaxonomyError::DanglingSuperclass { .. })
        ));
        assert!(matches!(
            Taxonomy::from_file(file(&[("Point", None, ClassKind::Point), ("Point", None, ClassKind::Point)])),
            Err(TaxonomyError::DuplicateClass(_))
        ));
        assert!(matches!(
            Taxonomy::from_file(file(&[("Thing", None, ClassKind::Point)])),
            Err(TaxonomyError::InvalidRoot(_))
        ));
        assert!(matches!(
            Taxonomy::from_file(file(&[
                ("Point", None, ClassKind::Point),
                ("Room", Some("Point"), ClassKind::Location)
            ])),
            Err(TaxonomyError::KindMismatch { .. })
        ));
    }

    #[test]
    fn one_sided_relation_gets_mirror() {
        let mut f = file(&[("Point", None, ClassKind::Point)]);
        f.relations.push(RelationDef {
            name: "feeds".into(),
            inverse: "isFedBy".into(),
        });
        let t = Taxonomy::from_file(f).unwrap();
        assert_eq!(t.relation_inverse("isFedBy").unwrap(), "feeds");
    }

    #[test]
    fn turtle_loader() {
        let text = r#"@prefix brick: <https://brickschema.org/schema/Brick#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
brick:Point a owl:Class .
brick:Status rdfs:subClassOf brick:Point .
brick:On_Status rdfs:subClassOf brick:Status .
brick:On_Off_Status rdfs:subClassOf brick:On_Status .
brick:Equipment a owl:Class .
brick:AHU rdfs:subClassOf brick:Equipment .
brick:feeds owl:inverseOf brick:isFedBy .
"#;
        let t = Taxonomy::from_turtle(text, None).unwrap();
        assert_eq!(t.superclass_chain("On_Off_Status").unwrap(), ["On_Status", "Status", "Point"]);
        assert_eq!(t.kind("AHU").unwrap(), ClassKind::Equipment);
        assert_eq!(t.relation_inverse("isFedBy").unwrap(), "feeds");
    }
}
