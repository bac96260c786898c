//! In-memory triple store with namespace bindings, a Turtle-subset
//! serializer/parser and triple-pattern queries.
//!
//! The store keeps two nested indexes (subject → predicate → objects and
//! predicate → object → subjects) so a pattern with a bound subject or a
//! bound predicate never scans unrelated triples.

mod turtle;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use turtle::{parse_turtle, serialize_turtle, ParseError, ParseErrorKind};

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const BRICK: &str = "https://brickschema.org/schema/Brick#";
pub const BRICK_REF: &str = "https://brickschema.org/schema/Brick/ref#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RdfError {
    #[error("invalid IRI {0:?}: {1}")]
    InvalidIri(String, &'static str),
    #[error("invalid prefix name {0:?}")]
    InvalidPrefix(String),
    #[error("prefix {prefix:?} already bound to <{existing}>, refusing to rebind to <{requested}>")]
    PrefixConflict {
        prefix: String,
        existing: String,
        requested: String,
    },
}

/// An absolute IRI. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(s: impl AsRef<str>) -> Result<Self, RdfError> {
        let s = s.as_ref();
        validate_iri(s)?;
        Ok(Iri(Arc::from(s)))
    }

    /// Concatenates a namespace and a local name.
    pub fn join(base: &Iri, local: &str) -> Result<Self, RdfError> {
        Iri::new(format!("{}{}", base.as_str(), local))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn rdf_type() -> Self {
        Iri(Arc::from(RDF_TYPE))
    }

    /// Local part after `base`, if this IRI lives under it.
    pub fn strip_base<'a>(&'a self, base: &Iri) -> Option<&'a str> {
        self.as_str().strip_prefix(base.as_str())
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn validate_iri(s: &str) -> Result<(), RdfError> {
    if s.is_empty() {
        return Err(RdfError::InvalidIri(s.into(), "empty"));
    }
    if s.chars().any(|c| {
        c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
    }) {
        return Err(RdfError::InvalidIri(s.into(), "contains a forbidden character"));
    }
    let scheme_end = s
        .find(':')
        .ok_or_else(|| RdfError::InvalidIri(s.into(), "missing scheme"))?;
    let scheme = &s[..scheme_end];
    let mut chars = scheme.chars();
    let scheme_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    if !scheme_ok {
        return Err(RdfError::InvalidIri(s.into(), "malformed scheme"));
    }
    Ok(())
}

/// A plain or typed literal. Language tags are not supported.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<Iri>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Some(datatype),
        }
    }
}

/// Object position of a triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            Term::Literal(_) => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Self {
        Term::Literal(l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }

    pub fn matches(&self, s: Option<&Iri>, p: Option<&Iri>, o: Option<&Term>) -> bool {
        s.is_none_or(|s| *s == self.subject)
            && p.is_none_or(|p| *p == self.predicate)
            && o.is_none_or(|o| *o == self.object)
    }
}

/// A set of triples plus prefix bindings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    namespaces: BTreeMap<String, Iri>,
    spo: BTreeMap<Iri, BTreeMap<Iri, BTreeSet<Term>>>,
    pos: BTreeMap<Iri, BTreeMap<Term, BTreeSet<Iri>>>,
    len: usize,
}

fn valid_prefix_name(prefix: &str) -> bool {
    let mut chars = prefix.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `prefix` to `base`. Rebinding to the same IRI is a no-op.
    pub fn bind_prefix(&mut self, prefix: &str, base: Iri) -> Result<(), RdfError> {
        if !valid_prefix_name(prefix) {
            return Err(RdfError::InvalidPrefix(prefix.to_string()));
        }
        match self.namespaces.get(prefix) {
            Some(existing) if *existing == base => Ok(()),
            Some(existing) => Err(RdfError::PrefixConflict {
                prefix: prefix.to_string(),
                existing: existing.to_string(),
                requested: base.to_string(),
            }),
            None => {
                self.namespaces.insert(prefix.to_string(), base);
                Ok(())
            }
        }
    }

    pub fn namespaces(&self) -> &BTreeMap<String, Iri> {
        &self.namespaces
    }

    pub fn namespace(&self, prefix: &str) -> Option<&Iri> {
        self.namespaces.get(prefix)
    }

    /// Inserts a triple; returns false if it was already present.
    pub fn add(&mut self, t: Triple) -> bool {
        let inserted = self
            .spo
            .entry(t.subject.clone())
            .or_default()
            .entry(t.predicate.clone())
            .or_default()
            .insert(t.object.clone());
        if inserted {
            self.pos
                .entry(t.predicate)
                .or_default()
                .entry(t.object)
                .or_default()
                .insert(t.subject);
            self.len += 1;
        }
        inserted
    }

    pub fn extend<I: IntoIterator<Item = Triple>>(&mut self, triples: I) {
        for t in triples {
            self.add(t);
        }
    }

    pub fn remove(&mut self, t: &Triple) -> bool {
        let Some(preds) = self.spo.get_mut(&t.subject) else {
            return false;
        };
        let Some(objs) = preds.get_mut(&t.predicate) else {
            return false;
        };
        if !objs.remove(&t.object) {
            return false;
        }
        if objs.is_empty() {
            preds.remove(&t.predicate);
        }
        if preds.is_empty() {
            self.spo.remove(&t.subject);
        }
        if let Some(by_obj) = self.pos.get_mut(&t.predicate) {
            if let Some(subjects) = by_obj.get_mut(&t.object) {
                subjects.remove(&t.subject);
                if subjects.is_empty() {
                    by_obj.remove(&t.object);
                }
            }
            if by_obj.is_empty() {
                self.pos.remove(&t.predicate);
            }
        }
        self.len -= 1;
        true
    }

    /// Removes every triple mentioning `node` as subject or object.
    pub fn remove_node(&mut self, node: &Iri) -> usize {
        let as_term = Term::Iri(node.clone());
        let mut doomed = self.query(Some(node), None, None);
        doomed.extend(self.query(None, None, Some(&as_term)));
        doomed.iter().filter(|t| self.remove(t)).count()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.spo
            .get(&t.subject)
            .and_then(|p| p.get(&t.predicate))
            .is_some_and(|o| o.contains(&t.object))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// All triples in (subject, predicate, object) order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().flat_map(|(s, preds)| {
            preds.iter().flat_map(move |(p, objs)| {
                objs.iter()
                    .map(move |o| Triple::new(s.clone(), p.clone(), o.clone()))
            })
        })
    }

    pub fn triples(&self) -> BTreeSet<Triple> {
        self.iter().collect()
    }

    pub fn subjects(&self) -> impl Iterator<Item = &Iri> {
        self.spo.keys()
    }

    pub(crate) fn subject_block(&self, s: &Iri) -> Option<&BTreeMap<Iri, BTreeSet<Term>>> {
        self.spo.get(s)
    }

    /// Objects of `(s, p, ?)`.
    pub fn objects<'a>(&'a self, s: &Iri, p: &Iri) -> impl Iterator<Item = &'a Term> + 'a {
        self.spo
            .get(s)
            .and_then(|preds| preds.get(p))
            .into_iter()
            .flatten()
    }

    /// Subjects of `(?, p, o)`.
    pub fn subjects_with<'a>(&'a self, p: &Iri, o: &Term) -> impl Iterator<Item = &'a Iri> + 'a {
        self.pos
            .get(p)
            .and_then(|objs| objs.get(o))
            .into_iter()
            .flatten()
    }

    /// `rdf:type` objects of `s` that are IRIs.
    pub fn types_of<'a>(&'a self, s: &Iri) -> impl Iterator<Item = &'a Iri> + 'a {
        let rdf_type = Iri::rdf_type();
        self.spo
            .get(s)
            .and_then(move |preds| preds.get(&rdf_type))
            .into_iter()
            .flatten()
            .filter_map(Term::as_iri)
    }

    /// Triples matching every bound position; `None` is a wildcard.
    pub fn query(&self, s: Option<&Iri>, p: Option<&Iri>, o: Option<&Term>) -> Vec<Triple> {
        let mut out = Vec::new();
        match (s, p) {
            (Some(s), _) => {
                let Some(preds) = self.spo.get(s) else {
                    return out;
                };
                let pred_iter: Box<dyn Iterator<Item = (&Iri, &BTreeSet<Term>)>> = match p {
                    Some(p) => Box::new(preds.get_key_value(p).into_iter()),
                    None => Box::new(preds.iter()),
                };
                for (pred, objs) in pred_iter {
                    match o {
                        Some(o) if objs.contains(o) => {
                            out.push(Triple::new(s.clone(), pred.clone(), o.clone()))
                        }
                        Some(_) => {}
                        None => out.extend(
                            objs.iter()
                                .map(|obj| Triple::new(s.clone(), pred.clone(), obj.clone())),
                        ),
                    }
                }
            }
            (None, Some(p)) => {
                let Some(by_obj) = self.pos.get(p) else {
                    return out;
                };
                let obj_iter: Box<dyn Iterator<Item = (&Term, &BTreeSet<Iri>)>> = match o {
                    Some(o) => Box::new(by_obj.get_key_value(o).into_iter()),
                    None => Box::new(by_obj.iter()),
                };
                for (obj, subjects) in obj_iter {
                    out.extend(
                        subjects
                            .iter()
                            .map(|subj| Triple::new(subj.clone(), p.clone(), obj.clone())),
                    );
                }
                out.sort();
            }
            (None, None) => match o {
                Some(o) => {
                    for (pred, by_obj) in &self.pos {
                        if let Some(subjects) = by_obj.get(o) {
                            out.extend(
                                subjects
                                    .iter()
                                    .map(|subj| Triple::new(subj.clone(), pred.clone(), o.clone())),
                            );
                        }
                    }
                    out.sort();
                }
                None => out.extend(self.iter()),
            },
        }
        out
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        Graph::extend(self, iter)
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        g.extend(iter);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ftc(local: &str) -> Iri {
        Iri::new(format!("http://cube.com/ftc103#{local}")).unwrap()
    }

    fn brick(local: &str) -> Iri {
        Iri::new(format!("{BRICK}{local}")).unwrap()
    }

    pub(crate) fn feeds_graph() -> Graph {
        let mut g = Graph::new();
        g.bind_prefix("brick", Iri::new(BRICK).unwrap()).unwrap();
        g.bind_prefix("ftc103", Iri::new("http://cube.com/ftc103#").unwrap())
            .unwrap();
        g.add(Triple::new(ftc("AC_977"), Iri::rdf_type(), brick("AHU")));
        for unit in [
            "CAV_635", "SDF_223", "SDF_445", "SDF_154", "SDF_137", "SDF_488", "SDF_987",
            "SDF_234", "SDF_128", "SDF_444",
        ] {
            g.add(Triple::new(ftc("AC_977"), brick("feeds"), ftc(unit)));
        }
        g
    }

    #[test]
    fn iri_validation() {
        assert!(Iri::new("").is_err());
        assert!(Iri::new("http://x.org/a b").is_err());
        assert!(Iri::new("nocolon").is_err());
        assert!(Iri::new("1http://x").is_err());
        assert!(Iri::new("tag:Off").is_ok());
        assert!(Iri::new("http://cube.com/ftc103#10F_536").is_ok());
    }

    #[test]
    fn bind_prefix_rules() {
        let mut g = Graph::new();
        let brick_ns = Iri::new(BRICK).unwrap();
        g.bind_prefix("brick", brick_ns.clone()).unwrap();
        g.bind_prefix("brick", brick_ns).unwrap();
        assert_eq!(g.namespaces().len(), 1);
        let err = g
            .bind_prefix("brick", Iri::new("http://other.org/brick#").unwrap())
            .unwrap_err();
        assert!(matches!(err, RdfError::PrefixConflict { .. }));
        assert!(g.bind_prefix("1bad", Iri::new("http://x/").unwrap()).is_err());
        assert!(g.bind_prefix("ba-d", Iri::new("http://x/").unwrap()).is_err());
    }

    #[test]
    fn add_is_set_semantics() {
        let mut g = Graph::new();
        let t = Triple::new(ftc("AC_977"), brick("feeds"), ftc("CAV_635"));
        assert!(g.add(t.clone()));
        assert_eq!(g.len(), 1);
        assert!(!g.add(t.clone()));
        assert_eq!(g.len(), 1);
        g.add(Triple::new(ftc("AC_977"), brick("feeds"), ftc("SDF_223")));
        assert_eq!(g.len(), 2);
        assert!(g.contains(&t));
    }

    #[test]
    fn remove_keeps_indexes_consistent() {
        let mut g = feeds_graph();
        let t = Triple::new(ftc("AC_977"), brick("feeds"), ftc("SDF_223"));
        assert!(g.remove(&t));
        assert!(!g.remove(&t));
        assert_eq!(g.len(), 10);
        assert!(g.query(None, Some(&brick("feeds")), Some(&ftc("SDF_223").into())).is_empty());
        assert_eq!(g.remove_node(&ftc("AC_977")), 10);
        assert!(g.is_empty());
        assert_eq!(g.query(None, None, None).len(), 0);
    }

    #[test]
    fn query_feeds() {
        let g = feeds_graph();
        let fed = g.query(Some(&ftc("AC_977")), Some(&brick("feeds")), None);
        assert_eq!(fed.len(), 10);
        assert!(fed.iter().any(|t| t.object == Term::Iri(ftc("CAV_635"))));
        assert_eq!(g.query(None, None, None).len(), g.len());
        assert!(Graph::new().query(None, None, None).is_empty());
        let by_obj = g.query(None, None, Some(&ftc("SDF_444").into()));
        assert_eq!(by_obj.len(), 1);
    }

    #[test]
    fn query_matches_linear_scan() {
        let g = feeds_graph();
        let all: Vec<Triple> = g.iter().collect();
        let subjects = [None, Some(ftc("AC_977")), Some(ftc("SDF_223"))];
        let preds = [None, Some(brick("feeds")), Some(Iri::rdf_type())];
        let objs = [None, Some(Term::Iri(ftc("SDF_223"))), Some(Term::Iri(brick("AHU")))];
        for s in &subjects {
            for p in &preds {
                for o in &objs {
                    let mut expected: Vec<Triple> = all
                        .iter()
                        .filter(|t| t.matches(s.as_ref(), p.as_ref(), o.as_ref()))
                        .cloned()
                        .collect();
                    expected.sort();
                    let mut got = g.query(s.as_ref(), p.as_ref(), o.as_ref());
                    got.sort();
                    assert_eq!(got, expected, "pattern {s:?} {p:?} {o:?}");
                }
            }
        }
    }
}
