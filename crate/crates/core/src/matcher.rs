//! Jaccard class matching of tokenized points against the taxonomy.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::extract::{is_numeric, TokenizedPoint};
use crate::ontology::{ClassKind, Taxonomy};

/// Exact similarity score in [0, 1].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Score(pub Ratio<u64>);

impl Score {
    pub const ZERO: Score = Score(Ratio::new_raw(0, 1));
    pub const ONE: Score = Score(Ratio::new_raw(1, 1));

    pub fn new(numer: u64, denom: u64) -> Self {
        Score(Ratio::new(numer, denom))
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Exact value of a decimal literal such as `0.25`. Values outside
    /// [0, 1] or non-finite input are rejected.
    pub fn from_decimal(value: f64) -> Option<Self> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return None;
        }
        let text = value.to_string();
        let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
        let denom = 10u64.checked_pow(frac.len() as u32)?;
        let numer: u64 = format!("{int}{frac}").parse().ok()?;
        Some(Score(Ratio::new(numer, denom)))
    }

    /// Smallest-denominator fraction within 1e-9 of `value`; exact for the
    /// small denominators Jaccard scores have.
    fn from_rendered(value: f64) -> Option<Self> {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return None;
        }
        (1..=1_000_000u64).find_map(|d| {
            let n = (value * d as f64).round();
            ((value * d as f64 - n).abs() < 1e-9 * d as f64).then(|| Score::new(n as u64, d))
        })
    }

    pub fn half(self) -> Self {
        Score(self.0 / 2)
    }
}

impl fmt::Debug for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}", self.to_f64())
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Score::from_rendered(v).ok_or_else(|| serde::de::Error::custom(format!("score {v} outside [0, 1]")))
    }
}

/// |a ∩ b| / |a ∪ b|, 0 when both are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Score {
    let inter = a.intersection(b).count() as u64;
    let union = (a.len() + b.len()) as u64 - inter;
    if union == 0 {
        Score::ZERO
    } else {
        Score::new(inter, union)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub threshold: Score,
    pub max_alternates: usize,
    pub kind_filter: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            threshold: Score::new(1, 4),
            max_alternates: 3,
            kind_filter: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchStatus {
    Auto,
    Overridden,
    NoMatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredClass {
    pub class: String,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub code: String,
    pub label: String,
    pub best: Option<String>,
    pub score: Score,
    pub alternates: Vec<ScoredClass>,
    pub status: MatchStatus,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reserve: bool,
}

impl MatchResult {
    pub fn is_matched(&self) -> bool {
        self.best.is_some()
    }

    fn no_match(tp: &TokenizedPoint, alternates: Vec<ScoredClass>) -> Self {
        MatchResult {
            code: tp.code.clone(),
            label: tp.label.clone(),
            best: None,
            score: Score::ZERO,
            alternates,
            status: MatchStatus::NoMatch,
            reserve: tp.reserve,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchStats {
    pub total: usize,
    pub matched: usize,
    pub nomatch: usize,
    pub match_rate: f64,
}

impl MatchStats {
    pub fn of(results: &[MatchResult]) -> Self {
        let total = results.len();
        let matched = results.iter().filter(|r| r.is_matched()).count();
        MatchStats {
            total,
            matched,
            nomatch: total - matched,
            match_rate: if total == 0 { 0.0 } else { matched as f64 / total as f64 },
        }
    }
}

struct Candidate {
    name: String,
    tokens: BTreeSet<String>,
    kind: ClassKind,
    depth: usize,
}

/// Precomputed candidate table for one taxonomy.
pub struct Matcher<'t> {
    tax: &'t Taxonomy,
    cfg: MatchConfig,
    candidates: Vec<Candidate>,
    location_only: BTreeSet<String>,
    point_only: BTreeSet<String>,
}

impl<'t> Matcher<'t> {
    pub fn new(tax: &'t Taxonomy, cfg: MatchConfig) -> Self {
        let mut candidates = Vec::new();
        let mut point_vocab = BTreeSet::new();
        let mut location_vocab = BTreeSet::new();
        for class in tax.classes() {
            if class.kind == ClassKind::Equipment {
                continue;
            }
            let tokens = tax.class_tokens(&class.name).expect("class from taxonomy");
            let vocab = match class.kind {
                ClassKind::Point => &mut point_vocab,
                _ => &mut location_vocab,
            };
            vocab.extend(tokens.iter().cloned());
            candidates.push(Candidate {
                depth: tax.depth(&class.name).expect("class from taxonomy"),
                name: class.name.clone(),
                tokens,
                kind: class.kind,
            });
        }
        Matcher {
            tax,
            cfg,
            candidates,
            location_only: location_vocab.difference(&point_vocab).cloned().collect(),
            point_only: point_vocab.difference(&location_vocab).cloned().collect(),
        }
    }

    pub fn config(&self) -> &MatchConfig {
        &self.cfg
    }

    pub fn taxonomy(&self) -> &'t Taxonomy {
        self.tax
    }

    /// The scored token set: measurement tokens without numbers.
    pub fn token_set(tp: &TokenizedPoint) -> BTreeSet<String> {
        tp.tokens.iter().filter(|t| !is_numeric(t)).cloned().collect()
    }

    /// Location iff more tokens belong only to location class names than
    /// only to point class names.
    pub fn target_kind(&self, tokens: &BTreeSet<String>) -> ClassKind {
        let loc = tokens.intersection(&self.location_only).count();
        let pt = tokens.intersection(&self.point_only).count();
        if loc > pt {
            ClassKind::Location
        } else {
            ClassKind::Point
        }
    }

    /// Every positive-scoring candidate, best first.
    pub fn ranked(&self, tp: &TokenizedPoint) -> Vec<ScoredClass> {
        let tokens = Self::token_set(tp);
        if tokens.is_empty() {
            return Vec::new();
        }
        let kind = self.cfg.kind_filter.then(|| self.target_kind(&tokens));
        let mut scored: Vec<(&Candidate, Score)> = self
            .candidates
            .iter()
            .filter(|c| kind.is_none_or(|k| c.kind == k))
            .map(|c| (c, jaccard(&tokens, &c.tokens)))
            .filter(|(_, s)| *s > Score::ZERO)
            .collect();
        scored.sort_by(|(a, sa), (b, sb)| {
            sb.cmp(sa)
                .then_with(|| b.depth.cmp(&a.depth))
                .then_with(|| a.name.cmp(&b.name))
        });
        scored
            .into_iter()
            .map(|(c, score)| ScoredClass {
                class: c.name.clone(),
                score,
            })
            .collect()
    }

    pub fn match_point(&self, tp: &TokenizedPoint) -> MatchResult {
        if tp.reserve {
            return MatchResult::no_match(tp, Vec::new());
        }
        let mut ranked = self.ranked(tp);
        match ranked.first() {
            Some(top) if top.score >= self.cfg.threshold => {
                let top = ranked.remove(0);
                ranked.truncate(self.cfg.max_alternates);
                MatchResult {
                    code: tp.code.clone(),
                    label: tp.label.clone(),
                    best: Some(top.class),
                    score: top.score,
                    alternates: ranked,
                    status: MatchStatus::Auto,
                    reserve: false,
                }
            }
            _ => {
                ranked.truncate(self.cfg.max_alternates);
                MatchResult::no_match(tp, ranked)
            }
        }
    }

    /// Result for an operator decision: `Some(class)` assigns it, `None`
    /// excludes the point.
    pub fn overridden(&self, tp: &TokenizedPoint, class: Option<&str>) -> MatchResult {
        let tokens = Self::token_set(tp);
        let score = class
            .and_then(|c| self.tax.class_tokens(c).ok())
            .map_or(Score::ZERO, |ct| jaccard(&tokens, &ct));
        let mut alternates: Vec<ScoredClass> = self
            .ranked(tp)
            .into_iter()
            .filter(|a| Some(a.class.as_str()) != class && (class.is_none() || a.score <= score))
            .collect();
        alternates.truncate(self.cfg.max_alternates);
        MatchResult {
            code: tp.code.clone(),
            label: tp.label.clone(),
            best: class.map(str::to_string),
            score,
            alternates,
            status: MatchStatus::Overridden,
            reserve: tp.reserve,
        }
    }
}

pub fn match_point(tp: &TokenizedPoint, tax: &Taxonomy, cfg: MatchConfig) -> MatchResult {
    Matcher::new(tax, cfg).match_point(tp)
}

pub fn match_corpus(points: &[TokenizedPoint], tax: &Taxonomy, cfg: MatchConfig) -> (Vec<MatchResult>, MatchStats) {
    let matcher = Matcher::new(tax, cfg);
    let results: Vec<MatchResult> = points.par_iter().map(|p| matcher.match_point(p)).collect();
    let stats = MatchStats::of(&results);
    (results, stats)
}

impl PartialOrd for ScoredClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ScoredClass {
    fn cmp(&self, other: &Self) -> Ordering {
        other.score.cmp(&self.score).then_with(|| self.class.cmp(&other.class))
    }
}
