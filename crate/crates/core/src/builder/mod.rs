//! RDF model construction: equipment, feeds topology, point connections,
//! tagging, reasoning and the completion sweep.

mod naming;
mod toggles;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use naming::{sanitize_local, PointNames};
pub use toggles::{Module, ModuleToggles, Provenance, Route};

use crate::extract::{EquipmentRef, TokenizedPoint};
use crate::matcher::{MatchResult, MatchStatus, Score};
use crate::ontology::{split_class_name, ClassKind, Taxonomy};
use crate::rdf::{self, Graph, Iri, Literal, RdfError, Term, Triple};
use crate::registry::HvacTermRegistry;

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("invalid build configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Rdf(#[from] RdfError),
    #[error("point {code} is assigned unknown class {class:?}")]
    UnknownClass { code: String, class: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub prefix: String,
    pub base: String,
    #[serde(default)]
    pub toggles: ModuleToggles,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            prefix: "building".into(),
            base: "http://example.com/building#".into(),
            toggles: ModuleToggles::all(),
        }
    }
}

impl BuildConfig {
    pub fn new(prefix: impl Into<String>, base: impl Into<String>) -> Self {
        BuildConfig {
            prefix: prefix.into(),
            base: base.into(),
            toggles: ModuleToggles::all(),
        }
    }

    pub fn base_iri(&self) -> Result<Iri, BuildError> {
        if !(self.base.ends_with('#') || self.base.ends_with('/')) {
            return Err(BuildError::Config(format!("base IRI {:?} must end in '#' or '/'", self.base)));
        }
        Ok(Iri::new(&self.base)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EquipmentNode {
    pub term: String,
    pub number: String,
    pub class: String,
    pub iri: String,
}

/// One node per distinct registered (term, number) in the points, plus a
/// count of unregistered word+number candidates.
pub fn detect_equipment<'a>(
    points: impl IntoIterator<Item = &'a TokenizedPoint>,
    reg: &HvacTermRegistry,
    base: &Iri,
) -> Result<(BTreeSet<EquipmentNode>, BTreeMap<String, usize>), BuildError> {
    let mut nodes = BTreeSet::new();
    let mut unknown = BTreeMap::new();
    for p in points {
        for eq in &p.equipment {
            if let Some(node) = equipment_node(eq, reg, base)? {
                nodes.insert(node);
            }
        }
        for c in &p.candidates {
            *unknown.entry(c.term.clone()).or_insert(0) += 1;
        }
    }
    Ok((nodes, unknown))
}

fn equipment_node(eq: &EquipmentRef, reg: &HvacTermRegistry, base: &Iri) -> Result<Option<EquipmentNode>, BuildError> {
    let Some(term) = reg.term(&eq.term) else {
        return Ok(None);
    };
    Ok(Some(EquipmentNode {
        term: eq.term.clone(),
        number: eq.number.clone(),
        class: term.brick_class.clone(),
        iri: Iri::join(base, &eq.local_name())?.as_str().to_string(),
    }))
}

fn pair_module(tax: &Taxonomy, source: &str, target: &str) -> Option<Module> {
    let is = |c: &str, a: &str| tax.is_a(c, a);
    if is(source, "AHU") && is(target, "CAV") {
        Some(Module::Ac2Cav)
    } else if is(source, "AHU") && is(target, "SDF") {
        Some(Module::Ac2Sdf)
    } else if is(source, "AHU") && is(target, "VAV") {
        Some(Module::Ac2Vav)
    } else if is(source, "CAV") && is(target, "SDF") {
        Some(Module::Cav2Sdf)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Link {
    pub triple: Triple,
    /// `None` for operator-defined pairs outside the four named modules.
    pub module: Option<Module>,
}

/// Topology edges between units named in the same label, honoring toggles.
pub fn link_equipment<'a>(
    points: impl IntoIterator<Item = &'a TokenizedPoint>,
    reg: &HvacTermRegistry,
    tax: &Taxonomy,
    base: &Iri,
    toggles: &ModuleToggles,
) -> Result<BTreeSet<Link>, BuildError> {
    let mut links = BTreeSet::new();
    for p in points {
        for a in &p.equipment {
            for b in &p.equipment {
                if a == b {
                    continue;
                }
                let (Some(sa), Some(sb)) = (equipment_node(a, reg, base)?, equipment_node(b, reg, base)?) else {
                    continue;
                };
                for rel in reg.relations_between(&a.term, &b.term) {
                    let module = pair_module(tax, &sa.class, &sb.class);
                    if module.is_some_and(|m| !toggles.enabled(m)) {
                        continue;
                    }
                    links.insert(Link {
                        triple: Triple::new(Iri::new(&sa.iri)?, tax.relation_iri(rel), Term::Iri(Iri::new(&sb.iri)?)),
                        module,
                    });
                }
            }
        }
    }
    Ok(links)
}

/// Capitalized class-name tokens of a class and all its superclasses.
pub fn tags_for_class(tax: &Taxonomy, class: &str) -> BTreeSet<String> {
    let mut tags = BTreeSet::new();
    let chain = tax.superclass_chain(class).unwrap_or(&[]);
    for c in std::iter::once(class).chain(chain.iter().map(String::as_str)) {
        tags.extend(split_class_name(c).map(str::to_string));
    }
    tags
}

pub fn tag_iri(tag: &str) -> Result<Iri, RdfError> {
    Iri::new(format!("tag:{tag}"))
}

pub fn has_tag_iri(tax: &Taxonomy) -> Iri {
    Iri::join(tax.namespace(), "hasTag").expect("valid")
}

pub fn timeseries_predicate() -> Iri {
    Iri::new(format!("{}hasTimeseriesId", rdf::BRICK_REF)).expect("valid")
}

/// hasTag triples for every point-typed subject, from its types and their
/// superclasses.
pub fn apply_tagging(graph: &Graph, tax: &Taxonomy) -> Result<Vec<Triple>, RdfError> {
    let has_tag = has_tag_iri(tax);
    let mut out = Vec::new();
    for s in graph.subjects() {
        let classes: Vec<&str> = graph.types_of(s).filter_map(|t| tax.class_of_iri(t)).collect();
        if !classes.iter().any(|c| tax.kind(c).ok() == Some(ClassKind::Point)) {
            continue;
        }
        let tags: BTreeSet<String> = classes.iter().flat_map(|c| tags_for_class(tax, c)).collect();
        for tag in tags {
            out.push(Triple::new(s.clone(), has_tag.clone(), Term::Iri(tag_iri(&tag)?)));
        }
    }
    Ok(out)
}

/// Triples directly implied by one triple: superclass types for a type
/// assertion, the inverse for a registered relation.
fn implied(tax: &Taxonomy, t: &Triple) -> Vec<Triple> {
    let mut out = Vec::new();
    let Term::Iri(obj) = &t.object else {
        return out;
    };
    if t.predicate.as_str() == rdf::RDF_TYPE {
        if let Some(class) = tax.class_of_iri(obj) {
            for sup in tax.superclass_chain(class).unwrap_or(&[]) {
                out.push(Triple::new(t.subject.clone(), t.predicate.clone(), Term::Iri(tax.class_iri(sup))));
            }
        }
    } else if let Some(rel) = tax.relation_of_iri(&t.predicate) {
        if let Ok(inv) = tax.relation_inverse(rel) {
            out.push(Triple::new(obj.clone(), tax.relation_iri(inv), Term::Iri(t.subject.clone())));
        }
    }
    out
}

/// Superclass types and inverse relations missing from the graph.
pub fn apply_reasoning(graph: &Graph, tax: &Taxonomy) -> Vec<Triple> {
    let mut new: BTreeSet<Triple> = BTreeSet::new();
    for t in graph.iter() {
        for i in implied(tax, &t) {
            if !graph.contains(&i) {
                new.insert(i);
            }
        }
    }
    new.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExclusionReason {
    Reserve,
    NoMatch,
    Operator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub code: String,
    pub label: String,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rematch {
    pub code: String,
    pub label: String,
    pub class: String,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreatedNode {
    pub node: String,
    pub class: String,
    pub referenced_by: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompletionReport {
    pub created_nodes: Vec<CreatedNode>,
    pub rematched: Vec<Rematch>,
    pub excluded: Vec<Exclusion>,
}

impl CompletionReport {
    pub fn is_empty(&self) -> bool {
        self.created_nodes.is_empty() && self.rematched.is_empty() && self.excluded.is_empty()
    }
}

/// Final class of each kept point after the relaxed re-match; everything
/// else is listed as excluded.
pub fn resolve_points<'a>(
    points: &'a [TokenizedPoint],
    matches: &[MatchResult],
    threshold: Score,
    report: &mut CompletionReport,
) -> Vec<(&'a TokenizedPoint, String)> {
    let by_code: BTreeMap<&str, &MatchResult> = matches.iter().map(|m| (m.code.as_str(), m)).collect();
    let relaxed = threshold.half();
    let mut kept = Vec::new();
    for tp in points {
        let Some(m) = by_code.get(tp.code.as_str()) else {
            report.excluded.push(Exclusion {
                code: tp.code.clone(),
                label: tp.label.clone(),
                reason: ExclusionReason::NoMatch,
            });
            continue;
        };
        if let Some(class) = &m.best {
            kept.push((tp, class.clone()));
            continue;
        }
        let reason = if m.status == MatchStatus::Overridden {
            ExclusionReason::Operator
        } else if tp.reserve || m.reserve {
            ExclusionReason::Reserve
        } else if let Some(alt) = m.alternates.first().filter(|a| a.score >= relaxed) {
            report.rematched.push(Rematch {
                code: tp.code.clone(),
                label: tp.label.clone(),
                class: alt.class.clone(),
                score: alt.score,
            });
            kept.push((tp, alt.class.clone()));
            continue;
        } else {
            ExclusionReason::NoMatch
        };
        report.excluded.push(Exclusion {
            code: tp.code.clone(),
            label: tp.label.clone(),
            reason,
        });
    }
    kept
}

pub struct BuildInput<'a> {
    pub points: &'a [TokenizedPoint],
    pub matches: &'a [MatchResult],
    pub registry: &'a HvacTermRegistry,
    pub taxonomy: &'a Taxonomy,
    /// Point code → timeseries id.
    pub timeseries_ids: &'a BTreeMap<String, String>,
    /// Match threshold; half of it is the re-match floor.
    pub threshold: Score,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub graph: Graph,
    pub provenance: Provenance,
    pub report: CompletionReport,
    pub equipment: BTreeSet<EquipmentNode>,
    pub unknown_terms: BTreeMap<String, usize>,
    /// Point code → IRI, for every point kept in the model.
    pub point_iris: BTreeMap<String, Iri>,
    /// Point code → other units its label names besides the one it is attached to.
    pub related: BTreeMap<String, Vec<String>>,
}

impl BuildOutput {
    pub fn module_triples(&self, m: Module) -> BTreeSet<Triple> {
        self.provenance.module_triples(m)
    }
}

pub fn room_local(floor: u32, room: &str) -> String {
    format!("Room_{floor}F_{room}")
}

pub fn floor_local(floor: u32) -> String {
    format!("Floor_{floor}")
}

pub fn build_model(input: &BuildInput<'_>, cfg: &BuildConfig) -> Result<BuildOutput, BuildError> {
    let tax = input.taxonomy;
    let reg = input.registry;
    let base = cfg.base_iri()?;
    let a = Iri::rdf_type();
    let has_point = tax.relation_iri("hasPoint");
    let has_part = tax.relation_iri("hasPart");
    let has_location = tax.relation_iri("hasLocation");
    let has_tag = has_tag_iri(tax);
    let ts_pred = timeseries_predicate();
    let none: Route = Route::new();
    let only = |m: Module| Route::from([m]);

    let mut report = CompletionReport::default();
    let kept = resolve_points(input.points, input.matches, input.threshold, &mut report);
    for (tp, class) in &kept {
        if tax.kind(class).is_err() {
            return Err(BuildError::UnknownClass {
                code: tp.code.clone(),
                class: class.clone(),
            });
        }
    }

    let mut plan = Provenance::default();
    let node_iri = |local: &str| Iri::join(&base, local);

    // equipment seen in kept points, then any unit referenced elsewhere
    let (equipment, _) = detect_equipment(kept.iter().map(|(tp, _)| *tp), reg, &base)?;
    let (_, unknown_terms) = detect_equipment(input.points, reg, &base)?;
    let mut all_equipment = equipment.clone();
    for tp in input.points {
        for eq in &tp.equipment {
            if let Some(node) = equipment_node(eq, reg, &base)? {
                if all_equipment.insert(node.clone()) {
                    report.created_nodes.push(CreatedNode {
                        node: eq.local_name(),
                        class: node.class,
                        referenced_by: tp.code.clone(),
                    });
                }
            }
        }
    }
    for node in &all_equipment {
        plan.add(Triple::new(Iri::new(&node.iri)?, a.clone(), Term::Iri(tax.class_iri(&node.class))), none.clone());
    }

    for link in link_equipment(input.points, reg, tax, &base, &ModuleToggles::all())? {
        let route = link.module.map_or_else(Route::new, only);
        plan.add(link.triple, route);
    }

    // location nodes reserve their names even when not emitted
    let mut reserved: BTreeSet<String> = all_equipment
        .iter()
        .map(|n| n.iri[base.as_str().len()..].to_string())
        .collect();
    for (tp, _) in &kept {
        if let Some(f) = tp.floor {
            reserved.insert(floor_local(f));
            if let Some(r) = &tp.room {
                reserved.insert(room_local(f, r));
            }
        }
    }
    let names = PointNames::mint(kept.iter().map(|(tp, _)| *tp), &reserved);

    let mut point_iris = BTreeMap::new();
    let mut related = BTreeMap::new();
    for (tp, class) in &kept {
        let p = node_iri(names.get(&tp.code).expect("minted for every kept point"))?;
        point_iris.insert(tp.code.clone(), p.clone());
        plan.add(Triple::new(p.clone(), a.clone(), Term::Iri(tax.class_iri(class))), none.clone());
        if let Some(id) = input.timeseries_ids.get(&tp.code) {
            plan.add(Triple::new(p.clone(), ts_pred.clone(), Literal::plain(id.clone())), none.clone());
        }

        // points hang off their unit or location; a matched location is
        // placed in its unit or floor instead
        let is_point = tax.kind(class).ok() == Some(ClassKind::Point);
        let (unit_link, place_link) = if is_point {
            (&has_point, &has_point)
        } else {
            (&has_location, &has_part)
        };
        let units: Vec<&EquipmentRef> = tp.equipment.iter().filter(|e| reg.is_term(&e.term)).collect();
        let pc = only(Module::PointConnection);
        if let Some((last, others)) = units.split_last() {
            let unit = node_iri(&last.local_name())?;
            plan.add(Triple::new(unit, unit_link.clone(), Term::Iri(p.clone())), pc.clone());
            if !others.is_empty() {
                related.insert(tp.code.clone(), others.iter().map(|e| e.local_name()).collect());
            }
        } else if let Some(f) = tp.floor {
            let floor = node_iri(&floor_local(f))?;
            plan.add(Triple::new(floor.clone(), a.clone(), Term::Iri(tax.class_iri("Floor"))), pc.clone());
            let holder = match &tp.room {
                Some(r) if is_point => {
                    let room = node_iri(&room_local(f, r))?;
                    plan.add(Triple::new(room.clone(), a.clone(), Term::Iri(tax.class_iri("Room"))), pc.clone());
                    plan.add(Triple::new(floor, has_part.clone(), Term::Iri(room.clone())), pc.clone());
                    room
                }
                _ => floor,
            };
            plan.add(Triple::new(holder, place_link.clone(), Term::Iri(p.clone())), pc.clone());
        }

        if is_point {
            for tag in tags_for_class(tax, class) {
                plan.add(Triple::new(p.clone(), has_tag.clone(), Term::Iri(tag_iri(&tag)?)), only(Module::Tagging));
            }
        }
    }

    // one pass suffices: chains are complete and inverses of inferred
    // relations are the original triples
    let asserted: Vec<(Triple, Vec<Route>)> = plan.iter().map(|(t, r)| (t.clone(), r.to_vec())).collect();
    for (t, routes) in asserted {
        for inferred in implied(tax, &t) {
            for r in &routes {
                let mut route = r.clone();
                route.insert(Module::Reasoning);
                plan.add(inferred.clone(), route);
            }
        }
    }

    let mut graph = Graph::new();
    graph.bind_prefix("brick", tax.namespace().clone())?;
    graph.bind_prefix(&cfg.prefix, base.clone())?;
    graph.bind_prefix("ref", Iri::new(rdf::BRICK_REF)?)?;
    graph.extend(plan.emitted(&cfg.toggles).cloned());

    Ok(BuildOutput {
        graph,
        provenance: plan,
        report,
        equipment: all_equipment,
        unknown_terms,
        point_iris,
        related,
    })
}
