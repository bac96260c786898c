//! Turtle subset: `@prefix` directives, prefixed names, `<absolute IRIs>`,
//! `a`, `;` predicate lists, `,` object lists, plain and `^^`-typed string
//! literals, `.` terminators and `#` comments. No blank nodes, collections,
//! numeric shorthand, language tags or `@base`.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Graph, Iri, Literal, RdfError, Term, Triple, RDF_TYPE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UndeclaredPrefix(String),
    UnterminatedStatement,
    MalformedIri(String),
    UnterminatedString,
    InvalidEscape(String),
    Unexpected(String),
    Unsupported(&'static str),
    Prefix(RdfError),
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseErrorKind::UndeclaredPrefix(p) => write!(f, "undeclared prefix {p:?}"),
            ParseErrorKind::UnterminatedStatement => f.write_str("unterminated statement"),
            ParseErrorKind::MalformedIri(i) => write!(f, "malformed IRI {i:?}"),
            ParseErrorKind::UnterminatedString => f.write_str("unterminated string literal"),
            ParseErrorKind::InvalidEscape(e) => write!(f, "invalid escape sequence {e:?}"),
            ParseErrorKind::Unexpected(what) => write!(f, "unexpected {what}"),
            ParseErrorKind::Unsupported(what) => write!(f, "unsupported syntax: {what}"),
            ParseErrorKind::Prefix(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

// ---------------------------------------------------------------------------
// Serialization

fn is_local_name(local: &str) -> bool {
    let mut chars = local.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn render_iri(graph: &Graph, iri: &Iri) -> String {
    // longest matching namespace wins
    let best = graph
        .namespaces()
        .iter()
        .filter_map(|(prefix, base)| {
            iri.strip_base(base)
                .filter(|local| is_local_name(local))
                .map(|local| (base.as_str().len(), prefix, local))
        })
        .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(a.1)));
    match best {
        Some((_, prefix, local)) => format!("{prefix}:{local}"),
        None => format!("<{}>", iri.as_str()),
    }
}

fn escape_string(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

fn render_term(graph: &Graph, term: &Term) -> String {
    match term {
        Term::Iri(i) => render_iri(graph, i),
        Term::Literal(lit) => {
            let mut s = String::with_capacity(lit.lexical.len() + 2);
            s.push('"');
            escape_string(&lit.lexical, &mut s);
            s.push('"');
            if let Some(dt) = &lit.datatype {
                s.push_str("^^");
                s.push_str(&render_iri(graph, dt));
            }
            s
        }
    }
}

/// Deterministic Turtle rendering: prefixes sorted by name, subjects and
/// objects in term order, `rdf:type` first and written as `a`.
pub fn serialize_turtle(graph: &Graph) -> String {
    let mut out = String::new();
    for (prefix, base) in graph.namespaces() {
        let _ = writeln!(out, "@prefix {prefix}: <{}> .", base.as_str());
    }
    let rdf_type = Iri::rdf_type();
    let mut first_block = true;
    for subject in graph.subjects() {
        let Some(block) = graph.subject_block(subject) else {
            continue;
        };
        if first_block {
            if !graph.namespaces().is_empty() {
                out.push('\n');
            }
            first_block = false;
        } else {
            out.push('\n');
        }
        out.push_str(&render_iri(graph, subject));
        let preds = block
            .get_key_value(&rdf_type)
            .into_iter()
            .chain(block.iter().filter(|(p, _)| **p != rdf_type));
        for (i, (pred, objects)) in preds.enumerate() {
            if i > 0 {
                out.push_str(" ;\n    ");
            } else {
                out.push(' ');
            }
            if pred.as_str() == RDF_TYPE {
                out.push('a');
            } else {
                out.push_str(&render_iri(graph, pred));
            }
            for (j, obj) in objects.iter().enumerate() {
                out.push_str(if j == 0 { " " } else { ",\n        " });
                out.push_str(&render_term(graph, obj));
            }
        }
        out.push_str(" .\n");
    }
    out
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    PrefixDirective,
    IriRef(String),
    PName { prefix: String, local: String },
    A,
    Str(String),
    DoubleCaret,
    Semicolon,
    Comma,
    Dot,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::PrefixDirective => "@prefix".into(),
            Tok::IriRef(i) => format!("<{i}>"),
            Tok::PName { prefix, local } => format!("{prefix}:{local}"),
            Tok::A => "'a'".into(),
            Tok::Str(_) => "string literal".into(),
            Tok::DoubleCaret => "'^^'".into(),
            Tok::Semicolon => "';'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn err(pos: Pos, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: pos.line,
            column: pos.column,
            kind,
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<(Tok, Pos)>, ParseError> {
        self.skip_trivia();
        let start = self.pos();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let tok = match c {
            '<' => {
                self.bump();
                let mut iri = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(c) if c.is_whitespace() || c == '<' || c == '"' => {
                            return Err(Self::err(start, ParseErrorKind::MalformedIri(iri)));
                        }
                        Some(c) => iri.push(c),
                        None => return Err(Self::err(start, ParseErrorKind::MalformedIri(iri))),
                    }
                }
                Tok::IriRef(iri)
            }
            '"' => {
                self.bump();
                if self.chars.peek() == Some(&'"') {
                    let mut probe = self.chars.clone();
                    probe.next();
                    if probe.peek() == Some(&'"') {
                        return Err(Self::err(start, ParseErrorKind::Unsupported("long string")));
                    }
                }
                Tok::Str(self.string_body(start)?)
            }
            '^' => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(Self::err(start, ParseErrorKind::Unexpected("'^'".into())));
                }
                Tok::DoubleCaret
            }
            ';' => {
                self.bump();
                Tok::Semicolon
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '.' => {
                self.bump();
                Tok::Dot
            }
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_ascii_alphabetic());
                if word == "prefix" {
                    Tok::PrefixDirective
                } else if word == "base" {
                    return Err(Self::err(start, ParseErrorKind::Unsupported("@base")));
                } else {
                    return Err(Self::err(start, ParseErrorKind::Unexpected(format!("@{word}"))));
                }
            }
            '_' if self.peek_second() == Some(':') => {
                return Err(Self::err(start, ParseErrorKind::Unsupported("blank node")));
            }
            '[' | '(' => {
                return Err(Self::err(start, ParseErrorKind::Unsupported("blank node or collection")));
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == ':' => {
                let prefix = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
                if self.chars.peek() == Some(&':') {
                    self.bump();
                    let local = self.take_local();
                    Tok::PName { prefix, local }
                } else if prefix == "a" {
                    Tok::A
                } else if prefix.chars().all(|c| c.is_ascii_digit() || c == '-') {
                    return Err(Self::err(start, ParseErrorKind::Unsupported("numeric literal")));
                } else {
                    return Err(Self::err(start, ParseErrorKind::Unexpected(format!("bare word {prefix:?}"))));
                }
            }
            other => {
                return Err(Self::err(start, ParseErrorKind::Unexpected(format!("character {other:?}"))));
            }
        };
        Ok(Some((tok, start)))
    }

    fn peek_second(&self) -> Option<char> {
        let mut probe = self.chars.clone();
        probe.next();
        probe.next()
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    /// Local part of a prefixed name. A '.' is only part of the name when
    /// followed by another name character.
    fn take_local(&mut self) -> String {
        let name_char = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '-';
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            let dot_inside = c == '.' && !s.is_empty() && self.peek_second().is_some_and(name_char);
            if !(name_char(c) || dot_inside) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn string_body(&mut self, start: Pos) -> Result<String, ParseError> {
        let mut s = String::new();
        loop {
            let esc_pos = self.pos();
            match self.bump() {
                None | Some('\n') | Some('\r') => {
                    return Err(Self::err(start, ParseErrorKind::UnterminatedString))
                }
                Some('"') => return Ok(s),
                Some('\\') => {
                    let c = self
                        .bump()
                        .ok_or_else(|| Self::err(start, ParseErrorKind::UnterminatedString))?;
                    match c {
                        't' => s.push('\t'),
                        'b' => s.push('\u{8}'),
                        'n' => s.push('\n'),
                        'r' => s.push('\r'),
                        'f' => s.push('\u{c}'),
                        '"' => s.push('"'),
                        '\'' => s.push('\''),
                        '\\' => s.push('\\'),
                        'u' | 'U' => {
                            let n = if c == 'u' { 4 } else { 8 };
                            let hex: String = (0..n).filter_map(|_| self.bump()).collect();
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .filter(|_| hex.len() == n)
                                .and_then(char::from_u32)
                                .ok_or_else(|| {
                                    Self::err(esc_pos, ParseErrorKind::InvalidEscape(format!("\\{c}{hex}")))
                                })?;
                            s.push(ch);
                        }
                        other => {
                            return Err(Self::err(
                                esc_pos,
                                ParseErrorKind::InvalidEscape(format!("\\{other}")),
                            ))
                        }
                    }
                }
                Some(c) => s.push(c),
            }
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Tok, Pos)>,
    graph: Graph,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<Option<&(Tok, Pos)>, ParseError> {
        if self.peeked.is_none() {
            self.peeked = self.lexer.next_token()?;
        }
        Ok(self.peeked.as_ref())
    }

    fn next(&mut self) -> Result<Option<(Tok, Pos)>, ParseError> {
        match self.peeked.take() {
            Some(t) => Ok(Some(t)),
            None => self.lexer.next_token(),
        }
    }

    /// Next token inside a statement; EOF here means the statement never ended.
    fn expect_any(&mut self, stmt_start: Pos) -> Result<(Tok, Pos), ParseError> {
        self.next()?
            .ok_or_else(|| Lexer::err(stmt_start, ParseErrorKind::UnterminatedStatement))
    }

    fn resolve(&self, tok: Tok, pos: Pos) -> Result<Iri, ParseError> {
        match tok {
            Tok::IriRef(s) => {
                Iri::new(&s).map_err(|_| Lexer::err(pos, ParseErrorKind::MalformedIri(s)))
            }
            Tok::PName { prefix, local } => {
                let base = self
                    .graph
                    .namespace(&prefix)
                    .ok_or_else(|| Lexer::err(pos, ParseErrorKind::UndeclaredPrefix(prefix.clone())))?;
                Iri::join(base, &local).map_err(|_| {
                    Lexer::err(pos, ParseErrorKind::MalformedIri(format!("{prefix}:{local}")))
                })
            }
            other => Err(Lexer::err(pos, ParseErrorKind::Unexpected(other.describe()))),
        }
    }

    fn parse(mut self) -> Result<Graph, ParseError> {
        while let Some((tok, pos)) = self.next()? {
            match tok {
                Tok::PrefixDirective => self.prefix_directive(pos)?,
                Tok::Str(_) => {
                    return Err(Lexer::err(pos, ParseErrorKind::Unexpected("literal in subject position".into())))
                }
                tok => {
                    let subject = self.resolve(tok, pos)?;
                    self.predicate_object_list(subject, pos)?;
                }
            }
        }
        Ok(self.graph)
    }

    fn prefix_directive(&mut self, start: Pos) -> Result<(), ParseError> {
        let (tok, pos) = self.expect_any(start)?;
        let prefix = match tok {
            Tok::PName { prefix, local } if local.is_empty() => prefix,
            other => return Err(Lexer::err(pos, ParseErrorKind::Unexpected(other.describe()))),
        };
        let (tok, pos) = self.expect_any(start)?;
        let base = match tok {
            Tok::IriRef(s) => {
                Iri::new(&s).map_err(|_| Lexer::err(pos, ParseErrorKind::MalformedIri(s)))?
            }
            other => return Err(Lexer::err(pos, ParseErrorKind::Unexpected(other.describe()))),
        };
        self.graph
            .bind_prefix(&prefix, base)
            .map_err(|e| Lexer::err(pos, ParseErrorKind::Prefix(e)))?;
        match self.expect_any(start)? {
            (Tok::Dot, _) => Ok(()),
            (other, pos) => Err(Lexer::err(pos, ParseErrorKind::Unexpected(other.describe()))),
        }
    }

    fn predicate_object_list(&mut self, subject: Iri, start: Pos) -> Result<(), ParseError> {
        loop {
            let (tok, pos) = self.expect_any(start)?;
            let predicate = match tok {
                Tok::A => Iri::rdf_type(),
                // trailing ';' before '.'
                Tok::Dot => return Ok(()),
                tok => self.resolve(tok, pos)?,
            };
            loop {
                let object = self.object(start)?;
                self.graph
                    .add(Triple::new(subject.clone(), predicate.clone(), object));
                match self.expect_any(start)? {
                    (Tok::Comma, _) => continue,
                    (Tok::Semicolon, _) => {
                        // allow repeated ';'
                        while matches!(self.peek()?, Some((Tok::Semicolon, _))) {
                            self.next()?;
                        }
                        break;
                    }
                    (Tok::Dot, _) => return Ok(()),
                    (other, pos) => {
                        return Err(Lexer::err(pos, ParseErrorKind::Unexpected(other.describe())))
                    }
                }
            }
        }
    }

    fn object(&mut self, start: Pos) -> Result<Term, ParseError> {
        let (tok, pos) = self.expect_any(start)?;
        match tok {
            Tok::Str(lexical) => {
                if matches!(self.peek()?, Some((Tok::DoubleCaret, _))) {
                    self.next()?;
                    let (tok, pos) = self.expect_any(start)?;
                    let dt = self.resolve(tok, pos)?;
                    Ok(Term::Literal(Literal::typed(lexical, dt)))
                } else {
                    Ok(Term::Literal(Literal::plain(lexical)))
                }
            }
            tok => Ok(Term::Iri(self.resolve(tok, pos)?)),
        }
    }
}

/// Parses the supported Turtle subset into a graph (prefixes included).
pub fn parse_turtle(text: &str) -> Result<Graph, ParseError> {
    Parser {
        lexer: Lexer::new(text),
        peeked: None,
        graph: Graph::new(),
    }
    .parse()
}
