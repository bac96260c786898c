//! Shared inputs for the benchmarks.

use std::collections::BTreeMap;

use brickgen_core::extract::tokenize_all;
use brickgen_core::fixtures;
use brickgen_core::matcher::match_corpus;
use brickgen_core::{
    build_model, BuildConfig, BuildInput, BuildOutput, HvacTermRegistry, MatchConfig, MatchResult, PointList, Taxonomy,
    TokenizedPoint,
};

/// A point list tokenized and matched with the bundled resources.
pub struct Prepared {
    pub list: PointList,
    pub taxonomy: Taxonomy,
    pub registry: HvacTermRegistry,
    pub points: Vec<TokenizedPoint>,
    pub matches: Vec<MatchResult>,
    pub ids: BTreeMap<String, String>,
}

impl Prepared {
    pub fn new(list: PointList) -> Self {
        let taxonomy = fixtures::taxonomy();
        let registry = fixtures::registry();
        let points = tokenize(&list, &registry);
        let (matches, _) = match_corpus(&points, &taxonomy, MatchConfig::default());
        let ids = points.iter().map(|p| (p.code.clone(), p.code.replace('.', ""))).collect();
        Prepared { list, taxonomy, registry, points, matches, ids }
    }

    pub fn ftc() -> Self {
        Self::new(fixtures::ftc_pointlist())
    }

    pub fn corpus() -> Self {
        Self::new(fixtures::corpus())
    }

    pub fn build(&self, cfg: &BuildConfig) -> BuildOutput {
        build_model(
            &BuildInput {
                points: &self.points,
                matches: &self.matches,
                registry: &self.registry,
                taxonomy: &self.taxonomy,
                timeseries_ids: &self.ids,
                threshold: MatchConfig::default().threshold,
            },
            cfg,
        )
        .expect("fixture builds")
    }
}

pub fn tokenize(list: &PointList, registry: &HvacTermRegistry) -> Vec<TokenizedPoint> {
    tokenize_all(&list.points, &fixtures::dictionary(), &fixtures::abbreviations(), registry)
}
