//! Streaming N-Quads / N-Triples reader and writer, plus the annotated
//! output format for fused statements.
//!
//! The reader handles one physical line at a time: comment and blank lines
//! are skipped, triples (lines without a graph term) are placed in a
//! caller-supplied default graph, and malformed lines are reported as
//! issues and skipped unless strict mode is on. Only UTF-8 input is
//! supported; TriG prefixes and syntactic sugar are out of scope.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::model::{Node, Quad, ResolvedQuad, Uri};
use crate::vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A problem found on one physical (1-based) input line.
#[derive(Debug, Clone)]
pub struct ParseIssue {
    pub line: usize,
    pub message: String,
    pub severity: Severity,
}

#[derive(Debug, Error)]
pub enum NquadsError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Strict { line: usize, message: String },
}

/// Result of a fail-soft parse: the quads of all well-formed lines and one
/// issue per malformed line.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub quads: Vec<Quad>,
    pub issues: Vec<ParseIssue>,
}

/// Parses N-Quads or N-Triples from `reader`. Triples without a graph term
/// land in `default_graph`. In strict mode the first malformed line aborts
/// the parse; otherwise it is recorded and skipped.
pub fn parse_quads<R: BufRead>(
    mut reader: R,
    default_graph: &Uri,
    strict: bool,
) -> Result<ParseOutcome, NquadsError> {
    let mut outcome = ParseOutcome::default();
    let mut line = String::new();
    let mut line_number = 0;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        line_number += 1;
        match parse_line(&line, default_graph) {
            Ok(Some(quad)) => outcome.quads.push(quad),
            Ok(None) => {}
            Err(message) => {
                if strict {
                    return Err(NquadsError::Strict {
                        line: line_number,
                        message,
                    });
                }
                outcome.issues.push(ParseIssue {
                    line: line_number,
                    message,
                    severity: Severity::Error,
                });
            }
        }
    }
    Ok(outcome)
}

/// Parses a single statement line; `None` for blank and comment lines.
pub fn parse_line(line: &str, default_graph: &Uri) -> Result<Option<Quad>, String> {
    let mut p = LineParser {
        bytes: line.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() || p.peek() == b'#' {
        return Ok(None);
    }

    let subject = p.parse_term()?;
    if matches!(subject, Node::Literal(_)) {
        return Err("subject must be a URI or blank node".into());
    }
    p.require_ws()?;
    let predicate = match p.parse_term()? {
        Node::Uri(u) => u,
        _ => return Err("predicate must be a URI".into()),
    };
    p.require_ws()?;
    let object = p.parse_term()?;
    p.skip_ws();

    let graph = if !p.at_end() && p.peek() != b'.' {
        let term = p.parse_term()?;
        p.skip_ws();
        match term {
            Node::Uri(u) => u,
            _ => return Err("graph name must be a URI".into()),
        }
    } else {
        default_graph.clone()
    };

    if p.at_end() || p.peek() != b'.' {
        return Err("statement must end with '.'".into());
    }
    p.pos += 1;
    p.skip_ws();
    if !p.at_end() && p.peek() != b'#' {
        return Err("unexpected content after '.'".into());
    }
    Ok(Some(Quad {
        subject,
        predicate,
        object,
        graph,
    }))
}

struct LineParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> LineParser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> u8 {
        self.bytes[self.pos]
    }

    fn skip_ws(&mut self) {
        while !self.at_end() && matches!(self.peek(), b' ' | b'\t' | b'\r' | b'\n') {
            self.pos += 1;
        }
    }

    fn require_ws(&mut self) -> Result<(), String> {
        if self.at_end() || !matches!(self.peek(), b' ' | b'\t') {
            return Err("expected whitespace between terms".into());
        }
        self.skip_ws();
        Ok(())
    }

    fn parse_term(&mut self) -> Result<Node, String> {
        if self.at_end() {
            return Err("unexpected end of line".into());
        }
        match self.peek() {
            b'<' => Ok(Node::Uri(self.parse_iri()?)),
            b'"' => self.parse_literal(),
            b'_' => self.parse_blank(),
            c => Err(format!("unexpected character '{}'", c as char)),
        }
    }

    fn parse_iri(&mut self) -> Result<Uri, String> {
        self.pos += 1; // '<'
        let mut iri = String::new();
        loop {
            if self.at_end() {
                return Err("unterminated IRI".into());
            }
            match self.peek() {
                b'>' => {
                    self.pos += 1;
                    break;
                }
                b'\\' => iri.push(self.parse_uchar()?),
                c if c <= 0x20 => return Err("whitespace or control character in IRI".into()),
                b'<' | b'"' | b'{' | b'}' | b'|' | b'^' | b'`' => {
                    return Err(format!(
                        "character '{}' must be escaped in IRI",
                        self.peek() as char
                    ));
                }
                _ => {
                    let rest = &self.bytes[self.pos..];
                    let ch = next_char(rest)?;
                    iri.push(ch);
                    self.pos += ch.len_utf8();
                }
            }
        }
        if iri.is_empty() {
            return Err("empty IRI".into());
        }
        Ok(Uri::new(iri))
    }

    fn parse_uchar(&mut self) -> Result<char, String> {
        self.pos += 1; // '\\'
        let (kind, len) = match self.bytes.get(self.pos) {
            Some(b'u') => ('u', 4),
            Some(b'U') => ('U', 8),
            _ => return Err("IRIs only allow \\u and \\U escapes".into()),
        };
        self.pos += 1;
        self.parse_hex_escape(kind, len)
    }

    fn parse_hex_escape(&mut self, kind: char, len: usize) -> Result<char, String> {
        if self.pos + len > self.bytes.len() {
            return Err(format!("truncated \\{kind} escape"));
        }
        let hex = std::str::from_utf8(&self.bytes[self.pos..self.pos + len])
            .map_err(|_| "invalid escape".to_string())?;
        let code = u32::from_str_radix(hex, 16).map_err(|_| format!("invalid \\{kind} escape"))?;
        self.pos += len;
        char::from_u32(code).ok_or_else(|| format!("\\{kind} escape is not a valid code point"))
    }

    fn parse_literal(&mut self) -> Result<Node, String> {
        self.pos += 1; // '"'
        let mut lexical = String::new();
        loop {
            if self.at_end() {
                return Err("unterminated string literal".into());
            }
            match self.peek() {
                b'"' => {
                    self.pos += 1;
                    break;
                }
                b'\\' => {
                    self.pos += 1;
                    let c = match self.bytes.get(self.pos) {
                        Some(b't') => '\t',
                        Some(b'b') => '\u{8}',
                        Some(b'n') => '\n',
                        Some(b'r') => '\r',
                        Some(b'f') => '\u{c}',
                        Some(b'"') => '"',
                        Some(b'\'') => '\'',
                        Some(b'\\') => '\\',
                        Some(b'u') => {
                            self.pos += 1;
                            lexical.push(self.parse_hex_escape('u', 4)?);
                            continue;
                        }
                        Some(b'U') => {
                            self.pos += 1;
                            lexical.push(self.parse_hex_escape('U', 8)?);
                            continue;
                        }
                        _ => return Err("invalid string escape".into()),
                    };
                    self.pos += 1;
                    lexical.push(c);
                }
                _ => {
                    let ch = next_char(&self.bytes[self.pos..])?;
                    self.pos += ch.len_utf8();
                    lexical.push(ch);
                }
            }
        }

        if !self.at_end() && self.peek() == b'^' {
            if self.bytes.get(self.pos + 1) != Some(&b'^') {
                return Err("datatype must be introduced by '^^'".into());
            }
            self.pos += 2;
            if self.at_end() || self.peek() != b'<' {
                return Err("datatype must be an IRI".into());
            }
            let datatype = self.parse_iri()?;
            return Ok(Node::typed_literal(lexical, datatype));
        }
        if !self.at_end() && self.peek() == b'@' {
            self.pos += 1;
            let start = self.pos;
            while !self.at_end() && (self.peek().is_ascii_alphanumeric() || self.peek() == b'-') {
                self.pos += 1;
            }
            let tag = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
            if tag.is_empty()
                || !tag.as_bytes()[0].is_ascii_alphabetic()
                || tag.starts_with('-')
                || tag.ends_with('-')
            {
                return Err("invalid language tag".into());
            }
            return Ok(Node::lang_literal(lexical, tag));
        }
        Ok(Node::literal(lexical))
    }

    fn parse_blank(&mut self) -> Result<Node, String> {
        if self.bytes.get(self.pos + 1) != Some(&b':') {
            return Err("blank node must start with '_:'".into());
        }
        self.pos += 2;
        let start = self.pos;
        while !self.at_end() {
            let c = self.peek();
            let is_label_char = c.is_ascii_alphanumeric() || c == b'_' || c == b'-' || c > 0x7F;
            // '.' belongs to the label only when another label char follows
            let is_inner_dot = c == b'.'
                && self.bytes.get(self.pos + 1).is_some_and(|&n| {
                    n.is_ascii_alphanumeric() || n == b'_' || n == b'-' || n > 0x7F
                });
            if is_label_char || is_inner_dot {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err("empty blank node label".into());
        }
        let label = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| "invalid UTF-8 in blank node label".to_string())?;
        Ok(Node::blank(label))
    }
}

fn next_char(bytes: &[u8]) -> Result<char, String> {
    // read_line already guarantees valid UTF-8 and the parser only ever
    // advances by whole characters
    std::str::from_utf8(bytes)
        .ok()
        .and_then(|s| s.chars().next())
        .ok_or_else(|| "invalid UTF-8".to_string())
}

/// Writes quads in canonical N-Quads form, one statement per line.
pub fn serialize_quads<'a, W: Write>(
    quads: impl IntoIterator<Item = &'a Quad>,
    writer: &mut W,
) -> std::io::Result<()> {
    for quad in quads {
        write_term(writer, &quad.subject)?;
        writer.write_all(b" ")?;
        write_uri(writer, &quad.predicate)?;
        writer.write_all(b" ")?;
        write_term(writer, &quad.object)?;
        writer.write_all(b" ")?;
        write_uri(writer, &quad.graph)?;
        writer.write_all(b" .\n")?;
    }
    Ok(())
}

/// Writes `subject link object .` triples; used for the canonical-map
/// export.
pub fn serialize_triples<'a, W: Write>(
    triples: impl IntoIterator<Item = (&'a Uri, &'a Uri, &'a Uri)>,
    writer: &mut W,
) -> std::io::Result<()> {
    for (s, p, o) in triples {
        write_uri(writer, s)?;
        writer.write_all(b" ")?;
        write_uri(writer, p)?;
        writer.write_all(b" ")?;
        write_uri(writer, o)?;
        writer.write_all(b" .\n")?;
    }
    Ok(())
}

/// Target IRIs of the annotated output format.
#[derive(Debug, Clone)]
pub struct AnnotationConfig {
    /// Prefix of minted result graph names; the 1-based output sequence
    /// number is appended.
    pub result_prefix: String,
    pub source_predicate: Uri,
    pub quality_predicate: Uri,
    pub annotation_graph: Uri,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        AnnotationConfig {
            result_prefix: vocab::DEFAULT_RESULT_PREFIX.to_owned(),
            source_predicate: Uri::new(vocab::DEFAULT_SOURCE_PREDICATE),
            quality_predicate: Uri::new(vocab::DEFAULT_QUALITY_PREDICATE),
            annotation_graph: Uri::new(vocab::DEFAULT_ANNOTATION_GRAPH),
        }
    }
}

/// Writes each resolved quad as its data quad in a freshly minted result
/// graph, one source annotation per source graph, and one quality
/// annotation.
pub fn serialize_resolved<'a, W: Write>(
    resolved: impl IntoIterator<Item = &'a ResolvedQuad>,
    writer: &mut W,
    config: &AnnotationConfig,
) -> std::io::Result<()> {
    for (index, r) in resolved.into_iter().enumerate() {
        let minted = Uri::new(format!("{}{}", config.result_prefix, index + 1));
        let data = Quad {
            subject: r.quad.subject.clone(),
            predicate: r.quad.predicate.clone(),
            object: r.quad.object.clone(),
            graph: minted.clone(),
        };
        serialize_quads([&data], writer)?;
        for source in &r.sources {
            let annotation = Quad::new(
                Node::Uri(minted.clone()),
                config.source_predicate.clone(),
                Node::Uri(source.clone()),
                config.annotation_graph.clone(),
            );
            serialize_quads([&annotation], writer)?;
        }
        let quality = Quad::new(
            Node::Uri(minted.clone()),
            config.quality_predicate.clone(),
            Node::typed_literal(format_double(r.quality), vocab::XSD_DOUBLE),
            config.annotation_graph.clone(),
        );
        serialize_quads([&quality], writer)?;
    }
    Ok(())
}

/// Shortest decimal form that round-trips through f64; `1` for 1.0.
pub fn format_double(value: f64) -> String {
    format!("{value}")
}

fn write_term<W: Write>(writer: &mut W, node: &Node) -> std::io::Result<()> {
    match node {
        Node::Uri(u) => write_uri(writer, u),
        Node::Blank(label) => write!(writer, "_:{label}"),
        Node::Literal(lit) => {
            writer.write_all(b"\"")?;
            for c in lit.lexical.chars() {
                match c {
                    '"' => writer.write_all(b"\\\"")?,
                    '\\' => writer.write_all(b"\\\\")?,
                    '\n' => writer.write_all(b"\\n")?,
                    '\r' => writer.write_all(b"\\r")?,
                    '\t' => writer.write_all(b"\\t")?,
                    c if (c as u32) < 0x20 || c == '\u{7f}' => {
                        write!(writer, "\\u{:04X}", c as u32)?
                    }
                    c => write!(writer, "{c}")?,
                }
            }
            writer.write_all(b"\"")?;
            if let Some(dt) = &lit.datatype {
                writer.write_all(b"^^")?;
                write_uri(writer, dt)?;
            } else if let Some(lang) = &lit.language {
                write!(writer, "@{lang}")?;
            }
            Ok(())
        }
    }
}

fn write_uri<W: Write>(writer: &mut W, uri: &Uri) -> std::io::Result<()> {
    writer.write_all(b"<")?;
    for c in uri.as_str().chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                write!(writer, "\\u{:04X}", c as u32)?
            }
            c if (c as u32) <= 0x20 => write!(writer, "\\u{:04X}", c as u32)?,
            c => write!(writer, "{c}")?,
        }
    }
    writer.write_all(b">")
}
