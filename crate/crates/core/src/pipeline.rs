//! Pipeline stages over a project directory, shared by the CLI and the API.
//!
//! Each stage reads the checkpoint of its predecessor and writes its own,
//! so operators can inspect or edit artifacts between steps.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builder::{build_model, BuildError, BuildInput, CompletionReport, Module};
use crate::extract::{
    build_semi_layout, term_candidates, tokenize_all, AbbreviationTable, Dictionary, ExtractError, SemiLayout,
    TokenizedPoint,
};
use crate::fixtures;
use crate::ingest::{orphan_samples, IngestError, PointList, RawPoint, TimeseriesSample};
use crate::matcher::{MatchResult, MatchStats, MatchStatus, Matcher};
use crate::ontology::{load_taxonomy, ClassKind, Taxonomy, TaxonomyError};
use crate::rdf::serialize_turtle;
use crate::registry::{HvacTermRegistry, RegistryError};
use crate::store::{
    Decision, Project, StoreError, LAYOUT, MATCHES, MODEL, POINTLIST, REGISTRY, REPORTS, TIMESERIES, TOKENS,
    TRANSLATIONS, TS_INDEX,
};
use crate::validate::{load_templates, validate as validate_graph, TemplateError, TemplateLibrary, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Translate,
    Tokenize,
    Match,
    Layout,
    Graph,
    Validate,
    Report,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Translate => "translate",
            Stage::Tokenize => "tokenize",
            Stage::Match => "match",
            Stage::Layout => "layout",
            Stage::Graph => "graph",
            Stage::Validate => "validate",
            Stage::Report => "report",
        }
    }

    /// Checkpoint file the stage produces.
    pub fn artifact(self) -> &'static str {
        match self {
            Stage::Ingest => POINTLIST,
            Stage::Translate => TRANSLATIONS,
            Stage::Tokenize => TOKENS,
            Stage::Match => MATCHES,
            Stage::Layout => LAYOUT,
            Stage::Graph => MODEL,
            Stage::Validate => "reports/validation.json",
            Stage::Report => "reports/summary.json",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{stage} needs the output of `{prerequisite}`; run `{prerequisite}` first")]
    Missing { stage: Stage, prerequisite: Stage },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("{path}: {source}")]
    Resource {
        path: String,
        #[source]
        source: ExtractError,
    },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("unknown class {0:?}")]
    UnknownClass(String),
}

impl PipelineError {
    /// True for faults in user-supplied input rather than internal failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, PipelineError::Store(StoreError::Io { .. }))
    }
}

/// Taxonomy, vocabulary tables and templates a project runs with.
#[derive(Debug, Clone)]
pub struct Resources {
    pub taxonomy: Taxonomy,
    pub dictionary: Dictionary,
    pub abbreviations: AbbreviationTable,
    pub registry: HvacTermRegistry,
    pub templates: TemplateLibrary,
}

fn read_resource(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|source| {
        StoreError::Io {
            path: path.display().to_string(),
            source,
        }
        .into()
    })
}

impl Resources {
    pub fn bundled() -> Self {
        Resources {
            taxonomy: fixtures::taxonomy(),
            dictionary: fixtures::dictionary(),
            abbreviations: fixtures::abbreviations(),
            registry: fixtures::registry(),
            templates: fixtures::templates(),
        }
    }

    /// Project overrides where configured, bundled data otherwise. The
    /// registry is the project's own `registry.json` when present.
    pub fn load(project: &Project) -> Result<Self, PipelineError> {
        let r = &project.config.resources;
        let taxonomy = match &r.taxonomy {
            Some(p) if p.extension().is_some_and(|e| e == "ttl") => {
                Taxonomy::from_turtle(&read_resource(p)?, None)?
            }
            Some(p) => load_taxonomy(p)?,
            None => fixtures::taxonomy(),
        };
        let dictionary = match &r.dictionary {
            Some(p) => Dictionary::from_json(&read_resource(p)?).map_err(|source| PipelineError::Resource {
                path: p.display().to_string(),
                source,
            })?,
            None => fixtures::dictionary(),
        };
        let abbreviations = match &r.abbreviations {
            Some(p) => {
                AbbreviationTable::from_json(&read_resource(p)?).map_err(|source| PipelineError::Resource {
                    path: p.display().to_string(),
                    source,
                })?
            }
            None => fixtures::abbreviations(),
        };
        let registry = if project.has(REGISTRY) {
            HvacTermRegistry::from_json(&project.read_text(REGISTRY)?, &taxonomy)?
        } else {
            HvacTermRegistry::from_json(fixtures::REGISTRY_JSON, &taxonomy)?
        };
        let templates = match &r.templates {
            Some(p) => load_templates(p, &taxonomy)?,
            None => TemplateLibrary::parse(fixtures::TEMPLATES_JSON, "templates.json", &taxonomy)?,
        };
        Ok(Resources {
            taxonomy,
            dictionary,
            abbreviations,
            registry,
            templates,
        })
    }
}

impl Stage {
    /// The stage whose output this one consumes.
    pub fn upstream(self) -> Option<Stage> {
        match self {
            Stage::Ingest => None,
            Stage::Translate => Some(Stage::Ingest),
            Stage::Tokenize => Some(Stage::Translate),
            Stage::Match | Stage::Layout => Some(Stage::Tokenize),
            Stage::Graph | Stage::Report => Some(Stage::Match),
            Stage::Validate => Some(Stage::Graph),
        }
    }
}

/// Fails naming the earliest stage that still has to run.
fn require(project: &Project, stage: Stage, prerequisite: Stage) -> Result<(), PipelineError> {
    if project.has(prerequisite.artifact()) {
        return Ok(());
    }
    let mut first = prerequisite;
    while let Some(up) = first.upstream().filter(|u| !project.has(u.artifact())) {
        first = up;
    }
    Err(PipelineError::Missing {
        stage,
        prerequisite: first,
    })
}

fn write_report<T: Serialize>(project: &Project, name: &str, value: &T) -> Result<(), PipelineError> {
    project.write_json(&format!("{REPORTS}/{name}"), value)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub points: usize,
    pub samples: usize,
    /// Codes of samples that name no point in the list.
    pub orphan_codes: Vec<String>,
    pub timeseries_ids: usize,
}

/// Stores the point list and samples, mints timeseries ids and clears
/// every downstream checkpoint.
pub fn ingest(project: &Project, list: &PointList, samples: &[TimeseriesSample]) -> Result<IngestSummary, PipelineError> {
    let mut orphan_codes: Vec<String> = orphan_samples(list, samples).into_iter().map(|s| s.code.clone()).collect();
    orphan_codes.dedup();
    let mut index = crate::store::TimeseriesIndex::default();
    for p in &list.points {
        index.assign(&project.config.build.base, &p.code)?;
    }
    project.save_point_list(list)?;
    if samples.is_empty() {
        project.remove(TIMESERIES)?;
    } else {
        project.save_samples(samples)?;
    }
    project.write_json(TS_INDEX, &index)?;
    for stage in [Stage::Translate, Stage::Tokenize, Stage::Match, Stage::Layout, Stage::Graph, Stage::Validate, Stage::Report] {
        project.remove(stage.artifact())?;
    }
    Ok(IngestSummary {
        points: list.len(),
        samples: samples.len(),
        orphan_codes,
        timeseries_ids: index.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslatedLabel {
    pub code: String,
    pub name: String,
    pub translated: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub untranslated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslateSummary {
    pub points: usize,
    pub changed: usize,
    pub untranslated: usize,
}

pub fn translate(project: &Project, res: &Resources) -> Result<TranslateSummary, PipelineError> {
    require(project, Stage::Translate, Stage::Ingest)?;
    let list = project.point_list()?;
    let labels: Vec<TranslatedLabel> = list
        .points
        .iter()
        .map(|p| {
            let t = res.dictionary.translate(&p.name);
            TranslatedLabel {
                code: p.code.clone(),
                name: p.name.clone(),
                translated: t.text,
                untranslated: t.untranslated,
            }
        })
        .collect();
    project.write_json(TRANSLATIONS, &labels)?;
    Ok(TranslateSummary {
        points: labels.len(),
        changed: labels.iter().filter(|l| l.name != l.translated).count(),
        untranslated: labels.iter().filter(|l| !l.untranslated.is_empty()).count(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizeSummary {
    pub points: usize,
    pub with_equipment: usize,
    pub with_floor: usize,
    /// Equipment-like words and how many points mention each.
    pub terms: BTreeMap<String, usize>,
}

/// Tokenizes the (possibly operator-edited) translated labels.
pub fn tokenize(project: &Project, res: &Resources) -> Result<TokenizeSummary, PipelineError> {
    require(project, Stage::Tokenize, Stage::Translate)?;
    let labels: Vec<TranslatedLabel> = project.read_json(TRANSLATIONS)?;
    let raw: Vec<RawPoint> = labels
        .iter()
        .map(|l| RawPoint::new(l.code.clone(), l.translated.clone(), None))
        .collect();
    let mut points = tokenize_all(&raw, &res.dictionary, &res.abbreviations, &res.registry);
    for (p, l) in points.iter_mut().zip(&labels) {
        for run in &l.untranslated {
            if !p.untranslated.contains(run) {
                p.untranslated.push(run.clone());
            }
        }
    }
    project.write_json(TOKENS, &points)?;
    Ok(TokenizeSummary {
        points: points.len(),
        with_equipment: points.iter().filter(|p| !p.equipment.is_empty()).count(),
        with_floor: points.iter().filter(|p| p.floor.is_some()).count(),
        terms: term_candidates(&points),
    })
}

pub fn tokens(project: &Project) -> Result<Vec<TokenizedPoint>, PipelineError> {
    Ok(project.read_json(TOKENS)?)
}

/// Automatic matching with the latest operator decision applied per point.
pub fn match_points(project: &Project, res: &Resources) -> Result<MatchStats, PipelineError> {
    require(project, Stage::Match, Stage::Tokenize)?;
    let points = tokens(project)?;
    let matcher = Matcher::new(&res.taxonomy, project.config.matching);
    let log = project.decisions()?;
    let latest = log.latest();
    let results: Vec<MatchResult> = points
        .iter()
        .map(|tp| match latest.get(tp.code.as_str()) {
            Some(d) if d.class.as_deref().is_none_or(|c| res.taxonomy.contains(c)) => {
                matcher.overridden(tp, d.class.as_deref())
            }
            _ => matcher.match_point(tp),
        })
        .collect();
    let stats = MatchStats::of(&results);
    project.write_json(MATCHES, &results)?;
    write_report(project, "match_stats.json", &stats)?;
    Ok(stats)
}

pub fn matches(project: &Project) -> Result<Vec<MatchResult>, PipelineError> {
    if !project.has(MATCHES) {
        return Err(PipelineError::Missing {
            stage: Stage::Graph,
            prerequisite: Stage::Match,
        });
    }
    Ok(project.read_json(MATCHES)?)
}

pub fn layout(project: &Project) -> Result<SemiLayout, PipelineError> {
    require(project, Stage::Layout, Stage::Tokenize)?;
    let layout = build_semi_layout(&tokens(project)?);
    project.write_json(LAYOUT, &layout)?;
    Ok(layout)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub triples: usize,
    pub equipment: usize,
    pub points: usize,
    pub toggles: String,
    pub by_predicate: BTreeMap<String, usize>,
    pub module_triples: BTreeMap<String, usize>,
    pub unknown_terms: BTreeMap<String, usize>,
    pub completion: CompletionReport,
}

pub fn graph(project: &Project, res: &Resources) -> Result<GraphSummary, PipelineError> {
    require(project, Stage::Graph, Stage::Match)?;
    let points = tokens(project)?;
    let results = matches(project)?;
    let index = project.timeseries_index()?;
    let out = build_model(
        &BuildInput {
            points: &points,
            matches: &results,
            registry: &res.registry,
            taxonomy: &res.taxonomy,
            timeseries_ids: index.by_code(),
            threshold: project.config.matching.threshold,
        },
        &project.config.build,
    )?;
    let ttl = serialize_turtle(&out.graph);
    let mut by_predicate = BTreeMap::new();
    for t in out.graph.iter() {
        let p = t.predicate.as_str();
        let short = p.rsplit(['#', '/']).next().unwrap_or(p).to_string();
        *by_predicate.entry(short).or_insert(0) += 1;
    }
    let summary = GraphSummary {
        triples: out.graph.len(),
        equipment: out.equipment.len() + out.report.created_nodes.len(),
        points: out.point_iris.len(),
        toggles: project.config.build.toggles.to_string(),
        by_predicate,
        module_triples: Module::ALL
            .iter()
            .map(|m| (m.name().to_string(), out.module_triples(*m).len()))
            .collect(),
        unknown_terms: out.unknown_terms.clone(),
        completion: out.report.clone(),
    };
    project.write_text(MODEL, &ttl)?;
    write_report(project, "completion.json", &out.report)?;
    write_report(project, "graph.json", &summary)?;
    Ok(summary)
}

pub fn validate(project: &Project, res: &Resources) -> Result<ValidationReport, PipelineError> {
    require(project, Stage::Validate, Stage::Graph)?;
    let g = project.graph()?;
    let report = validate_graph(&g, &res.templates, &res.taxonomy);
    write_report(project, "validation.json", &report)?;
    project.write_text(&format!("{REPORTS}/validation.txt"), &report.to_table())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub project: String,
    pub stats: MatchStats,
    pub overridden: usize,
    pub decisions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<crate::validate::ValidationSummary>,
}

impl Summary {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "project {}: {} points, {} matched, {} unmatched, match rate {:.1}%\n",
            self.project,
            self.stats.total,
            self.stats.matched,
            self.stats.nomatch,
            self.stats.match_rate * 100.0
        );
        s.push_str(&format!("operator decisions: {} ({} points overridden)\n", self.decisions, self.overridden));
        if let Some(g) = &self.graph {
            s.push_str(&format!(
                "graph: {} triples, {} equipment, {} points (modules: {})\n",
                g.triples, g.equipment, g.points, g.toggles
            ));
            s.push_str(&format!(
                "completion: {} nodes created, {} re-matched, {} excluded\n",
                g.completion.created_nodes.len(),
                g.completion.rematched.len(),
                g.completion.excluded.len()
            ));
        }
        if let Some(v) = &self.validation {
            s.push_str(&format!(
                "validation: {} instances, {} passed, {} failed\n",
                v.instances, v.passed, v.failed
            ));
        }
        s
    }
}

pub fn report(project: &Project) -> Result<Summary, PipelineError> {
    require(project, Stage::Report, Stage::Match)?;
    let results = matches(project)?;
    let graph_path = format!("{REPORTS}/graph.json");
    let validation_path = format!("{REPORTS}/validation.json");
    let summary = Summary {
        project: project.config.id.clone(),
        stats: MatchStats::of(&results),
        overridden: results.iter().filter(|r| r.status == MatchStatus::Overridden).count(),
        decisions: project.decisions()?.len(),
        graph: if project.has(MODEL) && project.has(&graph_path) {
            Some(project.read_json(&graph_path)?)
        } else {
            None
        },
        validation: if project.has(&validation_path) {
            Some(project.read_json::<ValidationReport>(&validation_path)?.summary)
        } else {
            None
        },
    };
    write_report(project, "summary.json", &summary)?;
    project.write_text(&format!("{REPORTS}/summary.txt"), &summary.to_text())?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAll {
    pub ingest: Option<IngestSummary>,
    pub translate: TranslateSummary,
    pub tokenize: TokenizeSummary,
    pub stats: MatchStats,
    pub layout: SemiLayout,
    pub graph: GraphSummary,
    pub validation: ValidationReport,
    pub summary: Summary,
}

/// Every stage in order; ingests `input` first when given.
pub fn run_all(
    project: &Project,
    res: &Resources,
    input: Option<(&PointList, &[TimeseriesSample])>,
) -> Result<RunAll, PipelineError> {
    let ingest = input.map(|(list, samples)| ingest(project, list, samples)).transpose()?;
    let translate = translate(project, res)?;
    let tokenize = tokenize(project, res)?;
    let stats = match_points(project, res)?;
    let layout = layout(project)?;
    let graph = graph(project, res)?;
    let validation = validate(project, res)?;
    let summary = report(project)?;
    Ok(RunAll {
        ingest,
        translate,
        tokenize,
        stats,
        layout,
        graph,
        validation,
        summary,
    })
}

/// Records an operator decision and updates the stored match in place.
/// `class = None` excludes the point.
pub fn override_match(
    project: &Project,
    res: &Resources,
    code: &str,
    class: Option<&str>,
    note: Option<String>,
) -> Result<MatchResult, PipelineError> {
    let mut results = matches(project)?;
    let points = tokens(project)?;
    let tp = points
        .iter()
        .find(|p| p.code == code)
        .ok_or_else(|| PipelineError::UnknownPoint(code.to_string()))?;
    if let Some(c) = class {
        match res.taxonomy.kind(c) {
            Ok(ClassKind::Point | ClassKind::Location) => {}
            _ => return Err(PipelineError::UnknownClass(c.to_string())),
        }
    }
    let slot = results
        .iter_mut()
        .find(|r| r.code == code)
        .ok_or_else(|| PipelineError::UnknownPoint(code.to_string()))?;
    let updated = Matcher::new(&res.taxonomy, project.config.matching).overridden(tp, class);
    *slot = updated.clone();
    project.append_decision(Decision::new(code, class.map(str::to_string), note))?;
    project.write_json(MATCHES, &results)?;
    write_report(project, "match_stats.json", &MatchStats::of(&results))?;
    Ok(updated)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixCandidate {
    pub term: String,
    pub count: usize,
    pub registered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
}

pub fn prefixes(project: &Project, res: &Resources) -> Result<Vec<PrefixCandidate>, PipelineError> {
    if !project.has(TOKENS) {
        return Err(PipelineError::Missing {
            stage: Stage::Tokenize,
            prerequisite: Stage::Tokenize,
        });
    }
    let mut out: Vec<PrefixCandidate> = term_candidates(&tokens(project)?)
        .into_iter()
        .map(|(term, count)| {
            let class = res.registry.term(&term).map(|t| t.brick_class.clone());
            PrefixCandidate {
                registered: class.is_some(),
                term,
                count,
                class,
            }
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));
    Ok(out)
}

/// Replaces the project registry and refreshes the stages it feeds.
pub fn update_registry(
    project: &Project,
    res: &mut Resources,
    registry: HvacTermRegistry,
) -> Result<(), PipelineError> {
    registry.validate(&res.taxonomy)?;
    project.write_json(REGISTRY, &registry)?;
    res.registry = registry;
    if project.has(TRANSLATIONS) {
        tokenize(project, res)?;
        match_points(project, res)?;
        layout(project)?;
    }
    Ok(())
}
