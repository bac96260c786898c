//! Required-points templates and graph validation.
//!
//! A template names an equipment class and the point classes its instances
//! must expose through `hasPoint`. Templates referenced as a dependency of
//! another template are fragments: their requirements are inherited by the
//! dependent, and they are never applied on their own.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ClassKind, Taxonomy};
use crate::rdf::{Graph, Iri};

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("reading templates {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing templates {file}: {message}")]
    Parse { file: String, message: String },
    #[error("duplicate template name {0:?}")]
    Duplicate(String),
    #[error("template {template:?}: unknown class {class:?}")]
    UnknownClass { template: String, class: String },
    #[error("template {template:?}: {class:?} is not {expected} class")]
    WrongKind {
        template: String,
        class: String,
        expected: &'static str,
    },
    #[error("template {template:?} depends on unknown template {dependency:?}")]
    UnknownDependency { template: String, dependency: String },
    #[error("template dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredPoint {
    pub role: String,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub name: String,
    pub target_class: String,
    #[serde(default)]
    pub required_points: Vec<RequiredPoint>,
    #[serde(default)]
    pub dependencies: Vec<String>,
}

/// A checked template set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemplateLibrary {
    templates: BTreeMap<String, Template>,
}

impl TemplateLibrary {
    pub fn new(templates: Vec<Template>, tax: &Taxonomy) -> Result<Self, TemplateError> {
        let mut map = BTreeMap::new();
        for t in templates {
            check_class(tax, &t.name, &t.target_class, ClassKind::Equipment)?;
            for r in &t.required_points {
                check_class(tax, &t.name, &r.class, ClassKind::Point)?;
            }
            if map.contains_key(&t.name) {
                return Err(TemplateError::Duplicate(t.name));
            }
            map.insert(t.name.clone(), t);
        }
        for t in map.values() {
            for d in &t.dependencies {
                if !map.contains_key(d) {
                    return Err(TemplateError::UnknownDependency {
                        template: t.name.clone(),
                        dependency: d.clone(),
                    });
                }
            }
        }
        let lib = TemplateLibrary { templates: map };
        lib.check_acyclic()?;
        Ok(lib)
    }

    pub fn parse(text: &str, file: &str, tax: &Taxonomy) -> Result<Self, TemplateError> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let parse_err = |message: String| TemplateError::Parse {
            file: file.to_string(),
            message,
        };
        let templates: Vec<Template> = if file.ends_with(".json") {
            serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?
        } else {
            let v: Option<Vec<Template>> = serde_yaml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
            v.unwrap_or_default()
        };
        Self::new(templates, tax)
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn get(&self, name: &str) -> Option<&Template> {
        self.templates.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Template> {
        self.templates.values()
    }

    fn check_acyclic(&self) -> Result<(), TemplateError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        fn visit<'a>(
            lib: &'a TemplateLibrary,
            name: &'a str,
            marks: &mut BTreeMap<&'a str, Mark>,
            stack: &mut Vec<&'a str>,
        ) -> Result<(), TemplateError> {
            match marks.get(name) {
                Some(Mark::Done) => return Ok(()),
                Some(Mark::Active) => {
                    let start = stack.iter().position(|n| *n == name).unwrap_or(0);
                    let mut cycle: Vec<String> = stack[start..].iter().map(|s| s.to_string()).collect();
                    cycle.push(name.to_string());
                    return Err(TemplateError::Cycle(cycle));
                }
                None => {}
            }
            marks.insert(name, Mark::Active);
            stack.push(name);
            for d in &lib.templates[name].dependencies {
                visit(lib, d, marks, stack)?;
            }
            stack.pop();
            marks.insert(name, Mark::Done);
            Ok(())
        }
        let mut marks = BTreeMap::new();
        for name in self.templates.keys() {
            visit(self, name, &mut marks, &mut Vec::new())?;
        }
        Ok(())
    }

    /// Templates applied to instances: those no other template depends on.
    pub fn applicable(&self) -> Vec<&Template> {
        let fragments: BTreeSet<&str> = self
            .templates
            .values()
            .flat_map(|t| t.dependencies.iter().map(String::as_str))
            .collect();
        self.templates
            .values()
            .filter(|t| !fragments.contains(t.name.as_str()))
            .collect()
    }

    /// Own requirements followed by those of transitive dependencies,
    /// deduplicated by class.
    pub fn effective_requirements(&self, name: &str) -> Vec<RequiredPoint> {
        let mut out: Vec<RequiredPoint> = Vec::new();
        let mut seen = BTreeSet::new();
        let mut queue = vec![name];
        while let Some(n) = queue.pop() {
            if !seen.insert(n) {
                continue;
            }
            let Some(t) = self.templates.get(n) else { continue };
            for r in &t.required_points {
                if !out.iter().any(|o| o.class == r.class) {
                    out.push(r.clone());
                }
            }
            queue.extend(t.dependencies.iter().rev().map(String::as_str));
        }
        out
    }
}

fn check_class(tax: &Taxonomy, template: &str, class: &str, kind: ClassKind) -> Result<(), TemplateError> {
    match tax.kind(class) {
        Err(_) => Err(TemplateError::UnknownClass {
            template: template.to_string(),
            class: class.to_string(),
        }),
        Ok(k) if k != kind => Err(TemplateError::WrongKind {
            template: template.to_string(),
            class: class.to_string(),
            expected: match kind {
                ClassKind::Point => "a point",
                ClassKind::Equipment => "an equipment",
                ClassKind::Location => "a location",
            },
        }),
        Ok(_) => Ok(()),
    }
}

pub fn load_templates(path: impl AsRef<Path>, tax: &Taxonomy) -> Result<TemplateLibrary, TemplateError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TemplateError::Io {
        path: path.display().to_string(),
        source,
    })?;
    TemplateLibrary::parse(&text, &path.display().to_string(), tax)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub equipment: String,
    pub template: String,
    pub status: Status,
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub results: Vec<InstanceResult>,
    pub summary: ValidationSummary,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &InstanceResult> {
        self.results.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn to_table(&self) -> String {
        let headers = ["equipment", "template", "status", "missing"];
        let rows: Vec<[String; 4]> = self
            .results
            .iter()
            .map(|r| {
                [
                    r.equipment.clone(),
                    r.template.clone(),
                    match r.status {
                        Status::Pass => "pass".into(),
                        Status::Fail => "FAIL".into(),
                    },
                    r.missing.join(", "),
                ]
            })
            .collect();
        let mut widths = headers.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |cells: [&str; 4]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(headers);
        for row in &rows {
            line([&row[0], &row[1], &row[2], &row[3]]);
        }
        let _ = writeln!(
            out,
            "{} instances, {} passed, {} failed",
            self.summary.instances, self.summary.passed, self.summary.failed
        );
        out
    }
}

fn classes_of<'a>(graph: &'a Graph, tax: &'a Taxonomy, node: &Iri) -> Vec<&'a str> {
    graph.types_of(node).filter_map(|t| tax.class_of_iri(t)).collect()
}

/// Checks every instance of a templated class. Each instance is reported
/// once, against the applicable template with the deepest target class.
pub fn validate(graph: &Graph, templates: &TemplateLibrary, tax: &Taxonomy) -> ValidationReport {
    let mut applicable = templates.applicable();
    applicable.sort_by(|a, b| {
        let da = tax.depth(&a.target_class).unwrap_or(0);
        let db = tax.depth(&b.target_class).unwrap_or(0);
        db.cmp(&da).then_with(|| a.name.cmp(&b.name))
    });
    if applicable.is_empty() {
        return ValidationReport::default();
    }

    let mut instances: BTreeMap<&Iri, &Template> = BTreeMap::new();
    for s in graph.subjects() {
        let classes = classes_of(graph, tax, s);
        if let Some(t) = applicable
            .iter()
            .find(|t| classes.iter().any(|c| tax.is_a(c, &t.target_class)))
        {
            instances.insert(s, t);
        }
    }

    let has_point = tax.relation_iri("hasPoint");
    let requirements: BTreeMap<&str, Vec<RequiredPoint>> = applicable
        .iter()
        .map(|t| (t.name.as_str(), templates.effective_requirements(&t.name)))
        .collect();

    let entries: Vec<(&Iri, &Template)> = instances.into_iter().collect();
    let results: Vec<InstanceResult> = entries
        .par_iter()
        .map(|(node, t)| {
            let point_classes: Vec<&str> = graph
                .objects(node, &has_point)
                .filter_map(|o| o.as_iri())
                .flat_map(|p| classes_of(graph, tax, p))
                .collect();
            let missing: Vec<String> = requirements[t.name.as_str()]
                .iter()
                .filter(|r| !point_classes.iter().any(|c| tax.is_a(c, &r.class)))
                .map(|r| r.class.clone())
                .collect();
            InstanceResult {
                equipment: node.as_str().to_string(),
                template: t.name.clone(),
                status: if missing.is_empty() { Status::Pass } else { Status::Fail },
                missing,
            }
        })
        .collect();

    let passed = results.iter().filter(|r| r.status == Status::Pass).count();
    ValidationReport {
        summary: ValidationSummary {
            instances: results.len(),
            passed,
            failed: results.len() - passed,
        },
        results,
    }
}
