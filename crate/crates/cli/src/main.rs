//! `brickgen`: runs the point-list → Brick pipeline over a project directory.
//!
//! Exit codes: 0 success, 1 validation failures, 2 input errors (including
//! a stage run before its prerequisite), 3 internal I/O failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use brickgen_core::builder::{BuildConfig, ModuleToggles};
use brickgen_core::ingest::{parse_pointlist, parse_timeseries, PointList, PointListFormat, TimeseriesSample};
use brickgen_core::matcher::Score;
use brickgen_core::pipeline::{self, PipelineError, Resources};
use brickgen_core::registry::HvacTermRegistry;
use brickgen_core::store::{Project, ProjectConfig, StoreError, CONFIG};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "brickgen", version, about = "Generate Brick RDF models from BMS point lists")]
struct Cli {
    /// Project directory.
    #[arg(long, short, global = true, env = "BRICKGEN_PROJECT", default_value = ".")]
    project: PathBuf,
    #[command(flatten)]
    resources: ResourceFlags,
    /// Print full JSON results instead of a summary line.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

/// Overrides persisted into the project's config.json when given.
#[derive(Debug, Args, Default)]
struct ResourceFlags {
    /// Translation dictionary (JSON).
    #[arg(long, global = true)]
    dict: Option<PathBuf>,
    /// Abbreviation table (JSON).
    #[arg(long, global = true)]
    abbreviations: Option<PathBuf>,
    /// Class taxonomy (JSON, YAML or Turtle).
    #[arg(long, global = true)]
    taxonomy: Option<PathBuf>,
    /// HVAC term registry (JSON); copied into the project.
    #[arg(long, global = true)]
    registry: Option<PathBuf>,
    /// Validation templates (JSON or YAML).
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
    /// Minimum similarity for a match, 0..1.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Enabled modules, e.g. `point_connection,tagging` or `all`.
    #[arg(long, global = true)]
    toggles: Option<String>,
    /// Point-list format; inferred from the file extension by default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create a project directory.
    Init {
        /// Project id; defaults to the directory name.
        #[arg(long)]
        id: Option<String>,
        /// Turtle prefix for generated entities.
        #[arg(long)]
        prefix: Option<String>,
        /// Namespace IRI for generated entities (ends in '#' or '/').
        #[arg(long)]
        base: Option<String>,
    },
    /// Load a point list (and optional samples); clears downstream outputs.
    Ingest {
        pointlist: PathBuf,
        #[arg(long)]
        timeseries: Option<PathBuf>,
    },
    Translate,
    Tokenize,
    Match,
    Layout,
    Graph,
    Validate,
    Report,
    /// Every stage in order, optionally ingesting first.
    RunAll {
        #[arg(long)]
        pointlist: Option<PathBuf>,
        #[arg(long)]
        timeseries: Option<PathBuf>,
    },
    /// Record an operator decision for one point.
    Decide {
        code: String,
        #[arg(long, conflicts_with = "exclude", required_unless_present = "exclude")]
        class: Option<String>,
        #[arg(long)]
        exclude: bool,
        #[arg(long)]
        note: Option<String>,
    },
    /// Equipment-like terms found in labels and whether they are registered.
    Prefixes,
    /// Serve the HTTP API over a directory of projects.
    Serve {
        #[arg(long, env = "BRICKGEN_ROOT", default_value = ".")]
        root: PathBuf,
        #[arg(long, env = "BRICKGEN_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
    #[error("validation failed: {failed} of {instances} instances; see {report}")]
    Validation {
        failed: usize,
        instances: usize,
        report: String,
    },
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        CliError::Pipeline(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => 1,
            CliError::Input(_) => 2,
            CliError::Pipeline(e) if e.is_input_error() => 2,
            CliError::Pipeline(_) | CliError::Internal(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let Cli {
        project: dir,
        resources: flags,
        json,
        command,
    } = cli;
    match command {
        Command::Init { id, prefix, base } => init(&dir, id, prefix, base, &flags, json),
        Command::Serve { root, bind } => serve(root, &bind),
        command => {
            let (project, mut res) = open(&dir, &flags)?;
            let _lock = project.lock()?;
            stage(&project, &mut res, command, &flags, json)
        }
    }
}

fn init(
    dir: &Path,
    id: Option<String>,
    prefix: Option<String>,
    base: Option<String>,
    flags: &ResourceFlags,
    json: bool,
) -> Result<(), CliError> {
    let id = match id {
        Some(id) => id,
        None => std::path::absolute(dir)
            .ok()
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .ok_or_else(|| CliError::Input(format!("cannot derive a project id from {}", dir.display())))?,
    };
    if !brickgen_core::store::valid_project_id(&id) {
        return Err(CliError::Input(format!("invalid project id {id:?}; pass --id")));
    }
    let defaults = BuildConfig::default();
    let build = BuildConfig::new(prefix.unwrap_or(defaults.prefix), base.unwrap_or(defaults.base));
    build.base_iri().map_err(|e| CliError::Input(e.to_string()))?;
    let mut config = ProjectConfig::new(id, build);
    apply_flags(&mut config, flags)?;
    let project = Project::init(dir, config)?;
    if let Some(path) = &flags.registry {
        let mut res = Resources::load(&project)?;
        let registry = load_registry(path, &res)?;
        pipeline::update_registry(&project, &mut res, registry)?;
    }
    Resources::load(&project)?;
    emit(json, &project.config, || {
        format!(
            "initialized project {} at {} ({} -> {})",
            project.config.id,
            dir.display(),
            project.config.build.prefix,
            project.config.build.base
        )
    })
}

fn serve(root: PathBuf, bind: &str) -> Result<(), CliError> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
    rt.block_on(brickgen_api::serve(root, bind))
        .map_err(|e| CliError::Input(format!("serve on {bind}: {e}")))
}

/// Opens the project, persisting any resource flags first.
fn open(dir: &Path, flags: &ResourceFlags) -> Result<(Project, Resources), CliError> {
    if !dir.join(CONFIG).is_file() {
        return Err(CliError::Input(format!(
            "{} is not a project directory; run `init` first",
            dir.display()
        )));
    }
    let mut project = Project::open(dir)?;
    let before = project.config.clone();
    apply_flags(&mut project.config, flags)?;
    if project.config != before {
        let _lock = project.lock()?;
        project.save_config()?;
    }
    let mut res = Resources::load(&project)?;
    if let Some(path) = &flags.registry {
        let registry = load_registry(path, &res)?;
        let _lock = project.lock()?;
        pipeline::update_registry(&project, &mut res, registry)?;
    }
    Ok((project, res))
}

fn apply_flags(config: &mut ProjectConfig, flags: &ResourceFlags) -> Result<(), CliError> {
    let r = &mut config.resources;
    for (slot, flag) in [
        (&mut r.dictionary, &flags.dict),
        (&mut r.abbreviations, &flags.abbreviations),
        (&mut r.taxonomy, &flags.taxonomy),
        (&mut r.templates, &flags.templates),
    ] {
        if let Some(path) = flag {
            let abs = std::path::absolute(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            if !abs.is_file() {
                return Err(CliError::Input(format!("{}: no such file", path.display())));
            }
            *slot = Some(abs);
        }
    }
    if let Some(t) = flags.threshold {
        config.matching.threshold =
            Score::from_decimal(t).ok_or_else(|| CliError::Input(format!("threshold {t} outside 0..1")))?;
    }
    if let Some(t) = &flags.toggles {
        config.build.toggles = t.parse::<ModuleToggles>().map_err(CliError::Input)?;
    }
    Ok(())
}

fn load_registry(path: &Path, res: &Resources) -> Result<HvacTermRegistry, CliError> {
    let text = read_input(path)?;
    HvacTermRegistry::from_json(&text, &res.taxonomy).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_inputs(
    pointlist: &Path,
    timeseries: Option<&Path>,
    format: Option<Format>,
) -> Result<(PointList, Vec<TimeseriesSample>), CliError> {
    let format = match format {
        Some(Format::Csv) => PointListFormat::Csv,
        Some(Format::Json) => PointListFormat::Json,
        None => PointListFormat::from_path(pointlist).unwrap_or(PointListFormat::Csv),
    };
    let list = parse_pointlist(pointlist, format).map_err(|e| CliError::Input(format!("{}: {e}", pointlist.display())))?;
    let samples = match timeseries {
        Some(p) => parse_timeseries(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => Vec::new(),
    };
    Ok((list, samples))
}

fn emit<T: Serialize>(json: bool, value: &T, line: impl FnOnce() -> String) -> Result<(), CliError> {
    if json {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        println!("{text}");
    } else {
        println!("{}", line());
    }
    Ok(())
}

fn validation_outcome(project: &Project, report: &brickgen_core::validate::ValidationReport) -> Result<(), CliError> {
    if report.is_ok() {
        return Ok(());
    }
    eprint!("{}", report.to_table());
    Err(CliError::Validation {
        failed: report.summary.failed,
        instances: report.summary.instances,
        report: project.report_path("validation.json").display().to_string(),
    })
}

fn stage(
    project: &Project,
    res: &mut Resources,
    command: Command,
    flags: &ResourceFlags,
    json: bool,
) -> Result<(), CliError> {
    match command {
        Command::Ingest { pointlist, timeseries } => {
            let (list, samples) = load_inputs(&pointlist, timeseries.as_deref(), flags.format)?;
            let s = pipeline::ingest(project, &list, &samples)?;
            emit(json, &s, || {
                format!(
                    "ingest: {} points, {} samples, {} timeseries ids, {} orphan codes",
                    s.points,
                    s.samples,
                    s.timeseries_ids,
                    s.orphan_codes.len()
                )
            })
        }
        Command::Translate => {
            let s = pipeline::translate(project, res)?;
            emit(json, &s, || {
                format!(
                    "translate: {} labels, {} changed, {} with untranslated text",
                    s.points, s.changed, s.untranslated
                )
            })
        }
        Command::Tokenize => {
            let s = pipeline::tokenize(project, res)?;
            emit(json, &s, || {
                format!(
                    "tokenize: {} points, {} name equipment, {} carry a floor, {} equipment terms",
                    s.points,
                    s.with_equipment,
                    s.with_floor,
                    s.terms.len()
                )
            })
        }
        Command::Match => {
            let s = pipeline::match_points(project, res)?;
            emit(json, &s, || {
                format!(
                    "match: {}/{} matched ({:.1}%), {} without a match",
                    s.matched,
                    s.total,
                    s.match_rate * 100.0,
                    s.nomatch
                )
            })
        }
        Command::Layout => {
            let s = pipeline::layout(project)?;
            emit(json, &s, || {
                let floors: Vec<String> = s.floors.iter().map(|f| f.floor.to_string()).collect();
                format!("layout: {} floors [{}]", floors.len(), floors.join(", "))
            })
        }
        Command::Graph => {
            let s = pipeline::graph(project, res)?;
            emit(json, &s, || {
                format!(
                    "graph: {} triples, {} equipment, {} points, modules {} -> {}",
                    s.triples,
                    s.equipment,
                    s.points,
                    s.toggles,
                    project.path(brickgen_core::store::MODEL).display()
                )
            })
        }
        Command::Validate => {
            let r = pipeline::validate(project, res)?;
            emit(json, &r, || {
                format!(
                    "validate: {}/{} instances pass -> {}",
                    r.summary.passed,
                    r.summary.instances,
                    project.report_path("validation.json").display()
                )
            })?;
            validation_outcome(project, &r)
        }
        Command::Report => {
            let s = pipeline::report(project)?;
            emit(json, &s, || s.to_text().trim_end().to_string())
        }
        Command::RunAll { pointlist, timeseries } => {
            let inputs = match &pointlist {
                Some(p) => Some(load_inputs(p, timeseries.as_deref(), flags.format)?),
                None if timeseries.is_some() => {
                    return Err(CliError::Input("--timeseries needs --pointlist".into()));
                }
                None => None,
            };
            let all = pipeline::run_all(project, res, inputs.as_ref().map(|(l, s)| (l, s.as_slice())))?;
            emit(json, &all, || {
                format!(
                    "run-all: {}/{} matched, {} triples, {}/{} instances pass -> {}",
                    all.stats.matched,
                    all.stats.total,
                    all.graph.triples,
                    all.validation.summary.passed,
                    all.validation.summary.instances,
                    project.path(brickgen_core::store::MODEL).display()
                )
            })?;
            validation_outcome(project, &all.validation)
        }
        Command::Decide {
            code,
            class,
            exclude,
            note,
        } => {
            let class = if exclude { None } else { class };
            let m = pipeline::override_match(project, res, &code, class.as_deref(), note)?;
            emit(json, &m, || match &class {
                Some(c) => format!("decide: {code} -> {c}; rerun `graph` to apply"),
                None => format!("decide: {code} excluded; rerun `graph` to apply"),
            })
        }
        Command::Prefixes => {
            let list = pipeline::prefixes(project, res)?;
            emit(json, &list, || {
                list.iter()
                    .map(|c| {
                        format!(
                            "{}\t{}\t{}",
                            c.term,
                            c.count,
                            c.class.as_deref().unwrap_or(if c.registered { "registered" } else { "-" })
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            })
        }
        Command::Init { .. } | Command::Serve { .. } => unreachable!("handled before opening a project"),
    }
}
