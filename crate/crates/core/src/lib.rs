//! Point-list to Brick RDF model generation.

pub mod builder;
pub mod extract;
pub mod fixtures;
pub mod ingest;
pub mod matcher;
pub mod ontology;
pub mod pipeline;
pub mod rdf;
pub mod registry;
pub mod store;
pub mod validate;

pub use builder::{build_model, BuildConfig, BuildInput, BuildOutput, ModuleToggles};
pub use extract::TokenizedPoint;
pub use ingest::{PointList, RawPoint, TimeseriesSample};
pub use matcher::{MatchConfig, MatchResult, MatchStats, Score};
pub use ontology::{ClassKind, Taxonomy};
pub use pipeline::{PipelineError, Resources, Stage};
pub use rdf::{Graph, Iri, Term, Triple};
pub use registry::HvacTermRegistry;
pub use store::{Project, ProjectConfig};
pub use validate::{TemplateLibrary, ValidationReport};
