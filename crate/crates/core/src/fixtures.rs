//! Curated data shipped with the crate: taxonomy subset, dictionary,
//! abbreviation table, HVAC registry, templates and the sample building.

use crate::extract::{AbbreviationTable, Dictionary};
use crate::ontology::Taxonomy;
use crate::registry::HvacTermRegistry;

pub const TAXONOMY_JSON: &str = include_str!("../data/taxonomy.json");
pub const DICTIONARY_JSON: &str = include_str!("../data/dictionary.json");
pub const ABBREVIATIONS_JSON: &str = include_str!("../data/abbreviations.json");
pub const REGISTRY_JSON: &str = include_str!("../data/registry.json");
pub const TEMPLATES_JSON: &str = include_str!("../data/templates.json");

pub fn taxonomy() -> Taxonomy {
    Taxonomy::from_json(TAXONOMY_JSON).expect("bundled taxonomy is valid")
}

pub fn dictionary() -> Dictionary {
    Dictionary::from_json(DICTIONARY_JSON).expect("bundled dictionary is valid")
}

pub fn abbreviations() -> AbbreviationTable {
    AbbreviationTable::from_json(ABBREVIATIONS_JSON).expect("bundled abbreviations are valid")
}

pub fn registry() -> HvacTermRegistry {
    HvacTermRegistry::from_json(REGISTRY_JSON, &taxonomy()).expect("bundled registry is valid")
}

pub const FTC_PREFIX: &str = "ftc103";
pub const FTC_BASE: &str = "http://cube.com/ftc103#";
pub const FTC_POINTLIST_CSV: &str = include_str!("../data/ftc/pointlist.csv");
pub const FTC_TIMESERIES_CSV: &str = include_str!("../data/ftc/timeseries.csv");
pub const THERMOSTAT_TTL: &str = include_str!("../data/ftc/thermostat.ttl");

pub fn ftc_pointlist() -> crate::ingest::PointList {
    crate::ingest::parse_pointlist_str(FTC_POINTLIST_CSV, crate::ingest::PointListFormat::Csv)
        .expect("bundled point list is valid")
}

pub fn ftc_build_config() -> crate::builder::BuildConfig {
    crate::builder::BuildConfig::new(FTC_PREFIX, FTC_BASE)
}

pub fn templates() -> crate::validate::TemplateLibrary {
    crate::validate::TemplateLibrary::parse(TEMPLATES_JSON, "templates.json", &taxonomy())
        .expect("bundled templates are valid")
}

/// Synthetic labels in the sample building's styles; the `expected`
/// column holds the intended class (empty for points meant to stay unmatched).
pub const CORPUS_CSV: &str = include_str!("../data/corpus.csv");

pub fn corpus() -> crate::ingest::PointList {
    crate::ingest::parse_pointlist_str(CORPUS_CSV, crate::ingest::PointListFormat::Csv)
        .expect("bundled corpus is valid")
}

pub const GOLDEN_LOCKER_TTL: &str = include_str!("../data/ftc/golden_locker.ttl");
/// Subject of the golden locker-room block.
pub const LOCKER_POINT: &str = "http://cube.com/ftc103#10F_536_Locker_Room_in_library_On_Off_Status";
