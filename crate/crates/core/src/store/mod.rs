//! File-backed project directories.
//!
//! Layout: `config.json`, `registry.json`, `pointlist.csv`,
//! `timeseries.csv`, `decisions.json`, `ts_index.json`, stage checkpoints
//! (`translations.json`, `tokens.json`, `matches.json`), `layout.json`,
//! `model.ttl` and `reports/`. Writes go through a temp file and rename;
//! mutations hold `.lock`.

mod decisions;
mod timeseries;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use decisions::{Decision, DecisionLog};
pub use timeseries::{samples_in_range, timeseries_id, TimeseriesIndex};

use crate::builder::BuildConfig;
use crate::ingest::{self, PointList, PointListFormat, TimeseriesSample};
use crate::matcher::MatchConfig;
use crate::rdf::{parse_turtle, serialize_turtle, Graph};

pub const CONFIG: &str = "config.json";
pub const REGISTRY: &str = "registry.json";
pub const POINTLIST: &str = "pointlist.csv";
pub const TIMESERIES: &str = "timeseries.csv";
pub const DECISIONS: &str = "decisions.json";
pub const TS_INDEX: &str = "ts_index.json";
pub const TRANSLATIONS: &str = "translations.json";
pub const TOKENS: &str = "tokens.json";
pub const MATCHES: &str = "matches.json";
pub const LAYOUT: &str = "layout.json";
pub const MODEL: &str = "model.ttl";
pub const REPORTS: &str = "reports";
const LOCK: &str = ".lock";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {file}: {message}")]
    Parse { file: String, message: String },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("project already exists at {0}")]
    Exists(String),
    #[error("project {0} is locked by another writer")]
    Locked(String),
    #[error("timeseries range start is after its end")]
    InvalidRange,
    #[error("timeseries id {id} collides for points {} and {}", .codes.0, .codes.1)]
    Collision { id: String, codes: (String, String) },
    #[error("invalid project id {0:?}")]
    InvalidId(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Optional overrides of the bundled data; `None` uses the built-in copy.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResourcePaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abbreviations: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectConfig {
    pub id: String,
    pub build: BuildConfig,
    #[serde(default)]
    pub matching: MatchConfig,
    #[serde(default)]
    pub resources: ResourcePaths,
    pub created: DateTime<Utc>,
    pub updated: DateTime<Utc>,
}

impl ProjectConfig {
    pub fn new(id: impl Into<String>, build: BuildConfig) -> Self {
        let now = Utc::now();
        ProjectConfig {
            id: id.into(),
            build,
            matching: MatchConfig::default(),
            resources: ResourcePaths::default(),
            created: now,
            updated: now,
        }
    }
}

pub fn valid_project_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
        && !id.starts_with('-')
}

/// Exclusive writer lock; released on drop.
#[derive(Debug)]
pub struct ProjectLock {
    path: PathBuf,
}

impl ProjectLock {
    pub fn acquire(dir: &Path) -> Result<Self, StoreError> {
        let path = dir.join(LOCK);
        for _ in 0..2 {
            match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    let _ = write!(f, "{}", std::process::id());
                    return Ok(ProjectLock { path });
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    if !Self::is_stale(&path) {
                        return Err(StoreError::Locked(dir.display().to_string()));
                    }
                    let _ = fs::remove_file(&path);
                }
                Err(e) => return Err(io_err(&path)(e)),
            }
        }
        Err(StoreError::Locked(dir.display().to_string()))
    }

    /// A lock whose owning process no longer exists (checked where `/proc` is available).
    fn is_stale(path: &Path) -> bool {
        let Ok(pid) = fs::read_to_string(path) else { return false };
        let Ok(pid) = pid.trim().parse::<u32>() else { return false };
        let proc_root = Path::new("/proc");
        proc_root.join("self").exists() && !proc_root.join(pid.to_string()).exists()
    }
}

impl Drop for ProjectLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Writes via a sibling temp file and rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(contents).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Project {
    pub dir: PathBuf,
    pub config: ProjectConfig,
}

impl Project {
    /// Creates the directory and writes the config and an empty decision log.
    pub fn init(dir: impl Into<PathBuf>, config: ProjectConfig) -> Result<Self, StoreError> {
        let dir = dir.into();
        if !valid_project_id(&config.id) {
            return Err(StoreError::InvalidId(config.id));
        }
        if dir.join(CONFIG).exists() {
            return Err(StoreError::Exists(dir.display().to_string()));
        }
        fs::create_dir_all(dir.join(REPORTS)).map_err(io_err(&dir))?;
        let p = Project { dir, config };
        p.write_json(CONFIG, &p.config)?;
        p.write_json(DECISIONS, &DecisionLog::default())?;
        Ok(p)
    }

    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(StoreError::NotFound(format!("project directory {}", dir.display())));
        }
        if !dir.join(CONFIG).is_file() {
            return Err(StoreError::NotFound(format!("{}", dir.join(CONFIG).display())));
        }
        let mut p = Project {
            dir,
            config: ProjectConfig::new("x", BuildConfig::default()),
        };
        p.config = p.read_json(CONFIG)?;
        Ok(p)
    }

    pub fn lock(&self) -> Result<ProjectLock, StoreError> {
        ProjectLock::acquire(&self.dir)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn report_path(&self, name: &str) -> PathBuf {
        self.dir.join(REPORTS).join(name)
    }

    pub fn has(&self, name: &str) -> bool {
        self.path(name).is_file()
    }

    pub fn read_text(&self, name: &str) -> Result<String, StoreError> {
        let path = self.path(name);
        if !path.is_file() {
            return Err(StoreError::NotFound(path.display().to_string()));
        }
        fs::read_to_string(&path).map_err(io_err(&path))
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<(), StoreError> {
        write_atomic(&self.path(name), text.as_bytes())
    }

    pub fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<T, StoreError> {
        let text = self.read_text(name)?;
        serde_json::from_str(&text).map_err(|e| StoreError::Parse {
            file: self.path(name).display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<(), StoreError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable artifact");
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn remove(&self, name: &str) -> Result<(), StoreError> {
        let path = self.path(name);
        match fs::remove_file(&path) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    pub fn save_config(&mut self) -> Result<(), StoreError> {
        self.config.updated = Utc::now();
        self.write_json(CONFIG, &self.config)
    }

    pub fn point_list(&self) -> Result<PointList, StoreError> {
        let text = self.read_text(POINTLIST)?;
        let mut list = ingest::parse_pointlist_str(&text, PointListFormat::Csv).map_err(|e| StoreError::Parse {
            file: self.path(POINTLIST).display().to_string(),
            message: e.to_string(),
        })?;
        list.source = POINTLIST.into();
        Ok(list)
    }

    pub fn save_point_list(&self, list: &PointList) -> Result<(), StoreError> {
        self.write_text(POINTLIST, &ingest::write_pointlist_csv(list))
    }

    /// Empty when no timeseries was ingested.
    pub fn samples(&self) -> Result<Vec<TimeseriesSample>, StoreError> {
        if !self.has(TIMESERIES) {
            return Ok(Vec::new());
        }
        ingest::parse_timeseries_str(&self.read_text(TIMESERIES)?).map_err(|e| StoreError::Parse {
            file: self.path(TIMESERIES).display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn save_samples(&self, samples: &[TimeseriesSample]) -> Result<(), StoreError> {
        self.write_text(TIMESERIES, &ingest::write_timeseries_csv(samples))
    }

    pub fn decisions(&self) -> Result<DecisionLog, StoreError> {
        if !self.has(DECISIONS) {
            return Ok(DecisionLog::default());
        }
        self.read_json(DECISIONS)
    }

    pub fn append_decision(&self, d: Decision) -> Result<DecisionLog, StoreError> {
        let mut log = self.decisions()?;
        log.append(d);
        self.write_json(DECISIONS, &log)?;
        Ok(log)
    }

    pub fn timeseries_index(&self) -> Result<TimeseriesIndex, StoreError> {
        if !self.has(TS_INDEX) {
            return Ok(TimeseriesIndex::default());
        }
        self.read_json(TS_INDEX)
    }

    /// Assigns ids for every code (namespace = the build base IRI) and persists the index.
    pub fn assign_timeseries_ids<'a>(
        &self,
        codes: impl IntoIterator<Item = &'a str>,
    ) -> Result<TimeseriesIndex, StoreError> {
        let mut ix = self.timeseries_index()?;
        for code in codes {
            ix.assign(&self.config.build.base, code)?;
        }
        self.write_json(TS_INDEX, &ix)?;
        Ok(ix)
    }

    pub fn get_timeseries(
        &self,
        id: &str,
        from: NaiveDateTime,
        to: NaiveDateTime,
    ) -> Result<Vec<TimeseriesSample>, StoreError> {
        samples_in_range(&self.timeseries_index()?, &self.samples()?, id, from, to)
    }

    pub fn graph(&self) -> Result<Graph, StoreError> {
        parse_turtle(&self.read_text(MODEL)?).map_err(|e| StoreError::Parse {
            file: self.path(MODEL).display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn save_graph(&self, g: &Graph) -> Result<(), StoreError> {
        self.write_text(MODEL, &serialize_turtle(g))
    }
}

/// Persistent project state as a single value.
#[derive(Debug, Clone)]
pub struct ProjectState {
    pub config: ProjectConfig,
    pub points: Option<PointList>,
    pub samples: Vec<TimeseriesSample>,
    pub decisions: DecisionLog,
    pub index: TimeseriesIndex,
    pub graph: Option<Graph>,
}

pub fn save_project(dir: impl Into<PathBuf>, state: &ProjectState) -> Result<Project, StoreError> {
    let dir = dir.into();
    fs::create_dir_all(dir.join(REPORTS)).map_err(io_err(&dir))?;
    let p = Project {
        dir,
        config: state.config.clone(),
    };
    let _lock = p.lock()?;
    p.write_json(CONFIG, &p.config)?;
    if let Some(points) = &state.points {
        p.save_point_list(points)?;
    }
    if !state.samples.is_empty() {
        p.save_samples(&state.samples)?;
    }
    p.write_json(DECISIONS, &state.decisions)?;
    p.write_json(TS_INDEX, &state.index)?;
    if let Some(g) = &state.graph {
        p.save_graph(g)?;
    }
    Ok(p)
}

pub fn load_project(dir: impl Into<PathBuf>) -> Result<(Project, ProjectState), StoreError> {
    let p = Project::open(dir)?;
    let state = ProjectState {
        config: p.config.clone(),
        points: if p.has(POINTLIST) { Some(p.point_list()?) } else { None },
        samples: p.samples()?,
        decisions: p.decisions()?,
        index: p.timeseries_index()?,
        graph: if p.has(MODEL) { Some(p.graph()?) } else { None },
    };
    Ok((p, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ingest::parse_timestamp;

    fn fixture_project(dir: &Path) -> Project {
        let p = Project::init(dir, ProjectConfig::new("ftc", fixtures::ftc_build_config())).unwrap();
        let list = fixtures::ftc_pointlist();
        p.save_point_list(&list).unwrap();
        p.save_samples(&ingest::parse_timeseries_str(fixtures::FTC_TIMESERIES_CSV).unwrap())
            .unwrap();
        p.assign_timeseries_ids(list.points.iter().map(|x| x.code.as_str())).unwrap();
        p
    }

    #[test]
    fn timeseries_lookup() {
        let tmp = tempfile::tempdir().unwrap();
        let p = fixture_project(tmp.path());
        let id = p.timeseries_index().unwrap().id_of("12.34.567.890").unwrap().to_string();
        let day = |s: &str| parse_timestamp(s).unwrap();
        let got = p.get_timeseries(&id, day("2023-04-01"), day("2023-04-01T23:59:59")).unwrap();
        assert_eq!(got.first().map(|s| s.value), Some(25.0));
        assert!(got.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        let empty = p.get_timeseries(&id, day("2020-01-01"), day("2020-01-02")).unwrap();
        assert!(empty.is_empty());
        assert!(matches!(
            p.get_timeseries("123", day("2023-04-01"), day("2023-04-02")),
            Err(StoreError::NotFound(_))
        ));
        assert!(matches!(
            p.get_timeseries(&id, day("2023-04-02"), day("2023-04-01")),
            Err(StoreError::InvalidRange)
        ));
    }

    #[test]
    fn save_load_roundtrip() {
        let tmp = tempfile::tempdir().unwrap();
        let p = fixture_project(tmp.path());
        let g = parse_turtle(fixtures::THERMOSTAT_TTL).unwrap();
        p.save_graph(&g).unwrap();
        p.append_decision(Decision::new("20.01.001.006", Some("Setpoint".into()), None)).unwrap();
        p.append_decision(Decision::new("20.01.001.006", None, Some("spare".into()))).unwrap();

        let (_, state) = load_project(tmp.path()).unwrap();
        assert_eq!(state.decisions.latest()["20.01.001.006"].class, None);
        assert_eq!(state.config, p.config);
        let again = tempfile::tempdir().unwrap();
        save_project(again.path(), &state).unwrap();
        let (_, state2) = load_project(again.path()).unwrap();
        assert_eq!(
            serialize_turtle(state.graph.as_ref().unwrap()),
            serialize_turtle(state2.graph.as_ref().unwrap())
        );
        assert_eq!(state.decisions, state2.decisions);
        assert_eq!(state.index, state2.index);
        assert_eq!(state.points, state2.points);
        assert_eq!(state.samples, state2.samples);
    }

    #[test]
    fn config_roundtrip_keeps_exact_threshold() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = ProjectConfig::new("t", fixtures::ftc_build_config());
        cfg.matching.threshold = crate::matcher::Score::new(1, 3);
        cfg.build.toggles = "point_connection,tagging".parse().unwrap();
        Project::init(tmp.path(), cfg.clone()).unwrap();
        assert_eq!(Project::open(tmp.path()).unwrap().config, cfg);
    }

    #[test]
    fn errors() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(load_project(tmp.path().join("missing")), Err(StoreError::NotFound(_))));
        let p = fixture_project(tmp.path());
        assert!(matches!(
            Project::init(tmp.path(), p.config.clone()),
            Err(StoreError::Exists(_))
        ));
        p.write_text(DECISIONS, "{not json").unwrap();
        match p.decisions() {
            Err(StoreError::Parse { file, .. }) => assert!(file.ends_with(DECISIONS)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Project::init(tmp.path().join("x"), ProjectConfig::new("../x", BuildConfig::default())),
            Err(StoreError::InvalidId(_))
        ));
    }

    #[test]
    fn lock_is_exclusive() {
        let tmp = tempfile::tempdir().unwrap();
        let p = fixture_project(tmp.path());
        let held = p.lock().unwrap();
        assert!(matches!(p.lock(), Err(StoreError::Locked(_))));
        drop(held);
        drop(p.lock().unwrap());
    }
}
