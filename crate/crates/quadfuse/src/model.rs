//! Core RDF value types with a total order used by sorting, deduplication
//! and clustering.
//!
//! Equality everywhere in this crate is *term* equality: two nodes are equal
//! iff they are the same kind and agree byte-for-byte on their components.
//! `"1.0"^^xsd:double` and `"1"^^xsd:double` are therefore different terms;
//! value similarity is the business of the distance measure, not of the
//! model. The order is byte-lexicographic on UTF-8 forms with the kind rank
//! URI < blank < literal, so it is deterministic across platforms.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

/// An absolute IRI. Invariant: non-empty, no whitespace (enforced by the
/// parsers; internal constructors trust their input).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Uri(String);

impl Uri {
    pub fn new(iri: impl Into<String>) -> Self {
        let iri = iri.into();
        debug_assert!(!iri.is_empty() && !iri.chars().any(char::is_whitespace));
        Uri(iri)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Uri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Uri {
    fn from(s: &str) -> Self {
        Uri::new(s)
    }
}

impl From<String> for Uri {
    fn from(s: String) -> Self {
        Uri::new(s)
    }
}

impl AsRef<str> for Uri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// An RDF literal: lexical form plus at most one of datatype IRI or
/// language tag. Language tags are lowercase-normalized on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<Uri>,
    pub language: Option<String>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<Uri>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Some(datatype.into()),
            language: None,
        }
    }

    pub fn tagged(lexical: impl Into<String>, language: &str) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: Some(language.to_ascii_lowercase()),
        }
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        let self_dt = self.datatype.as_ref().map(Uri::as_str).unwrap_or("");
        let other_dt = other.datatype.as_ref().map(Uri::as_str).unwrap_or("");
        let self_lang = self.language.as_deref().unwrap_or("");
        let other_lang = other.language.as_deref().unwrap_or("");
        self.lexical
            .cmp(&other.lexical)
            .then_with(|| self_dt.cmp(other_dt))
            .then_with(|| self_lang.cmp(other_lang))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An RDF node: URI reference, blank node or literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Uri(Uri),
    Blank(String),
    Literal(Literal),
}

impl Node {
    pub fn uri(iri: impl Into<String>) -> Self {
        Node::Uri(Uri::new(iri))
    }

    pub fn blank(label: impl Into<String>) -> Self {
        let label = label.into();
        debug_assert!(!label.is_empty());
        Node::Blank(label)
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Node::Literal(Literal::plain(lexical))
    }

    pub fn typed_literal(lexical: impl Into<String>, datatype: impl Into<Uri>) -> Self {
        Node::Literal(Literal::typed(lexical, datatype))
    }

    pub fn lang_literal(lexical: impl Into<String>, language: &str) -> Self {
        Node::Literal(Literal::tagged(lexical, language))
    }

    pub fn as_uri(&self) -> Option<&Uri> {
        match self {
            Node::Uri(u) => Some(u),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Node::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_uri(&self) -> bool {
        matches!(self, Node::Uri(_))
    }

    /// The text a human would compare or measure: IRI for URIs, label for
    /// blank nodes, lexical form for literals.
    pub fn text(&self) -> &str {
        match self {
            Node::Uri(u) => u.as_str(),
            Node::Blank(b) => b,
            Node::Literal(l) => &l.lexical,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Node::Uri(_) => 0,
            Node::Blank(_) => 1,
            Node::Literal(_) => 2,
        }
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Node::Uri(a), Node::Uri(b)) => a.cmp(b),
            (Node::Blank(a), Node::Blank(b)) => a.cmp(b),
            (Node::Literal(a), Node::Literal(b)) => a.cmp(b),
            _ => self.kind_rank().cmp(&other.kind_rank()),
        }
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact term equality; no value-space coercion.
pub fn term_equals(a: &Node, b: &Node) -> bool {
    a == b
}

/// An RDF statement together with the name of the graph containing it.
/// Subjects are URIs or blank nodes; predicates and graph names are always
/// URIs (blank graph names are rejected at parse time).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quad {
    pub subject: Node,
    pub predicate: Uri,
    pub object: Node,
    pub graph: Uri,
}

impl Quad {
    pub fn new(
        subject: Node,
        predicate: impl Into<Uri>,
        object: Node,
        graph: impl Into<Uri>,
    ) -> Self {
        debug_assert!(!matches!(subject, Node::Literal(_)), "literal subject");
        Quad {
            subject,
            predicate: predicate.into(),
            object,
            graph: graph.into(),
        }
    }
}

/// A fused output statement with the set of graphs it was selected or
/// derived from and its quality score in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedQuad {
    pub quad: Quad,
    pub sources: BTreeSet<Uri>,
    pub quality: f64,
}

impl ResolvedQuad {
    pub fn new(quad: Quad, sources: BTreeSet<Uri>, quality: f64) -> Self {
        debug_assert!(!sources.is_empty(), "resolved quad without sources");
        debug_assert!(
            (0.0..=1.0).contains(&quality),
            "quality out of range: {quality}"
        );
        ResolvedQuad {
            quad,
            sources,
            quality,
        }
    }
}

/// The maximal set of quads sharing one subject and one predicate; the unit
/// of conflict resolution. Quads are held sorted and deduplicated so that
/// every computation over a cluster is independent of construction order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictCluster {
    subject: Node,
    predicate: Uri,
    quads: Vec<Quad>,
}

impl ConflictCluster {
    /// Builds a cluster from a non-empty set of quads sharing one subject
    /// and predicate. Panics on empty input or mixed subjects/predicates;
    /// callers are expected to group first.
    pub fn new(mut quads: Vec<Quad>) -> Self {
        assert!(!quads.is_empty(), "empty conflict cluster");
        quads.sort_unstable();
        quads.dedup();
        let subject = quads[0].subject.clone();
        let predicate = quads[0].predicate.clone();
        assert!(
            quads
                .iter()
                .all(|q| q.subject == subject && q.predicate == predicate),
            "cluster quads must share subject and predicate"
        );
        ConflictCluster {
            subject,
            predicate,
            quads,
        }
    }

    pub fn subject(&self) -> &Node {
        &self.subject
    }

    pub fn predicate(&self) -> &Uri {
        &self.predicate
    }

    /// Quads in canonical (sorted) order, free of duplicates.
    pub fn quads(&self) -> &[Quad] {
        &self.quads
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }

    /// Always false; clusters are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    /// Distinct graph names occurring in the cluster.
    pub fn graphs(&self) -> BTreeSet<Uri> {
        self.quads.iter().map(|q| q.graph.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(s: &str) -> Node {
        Node::literal(s)
    }

    #[test]
    fn node_order_identity() {
        assert_eq!(Node::uri("a").cmp(&Node::uri("a")), Ordering::Equal);
    }

    #[test]
    fn node_order_kind_rank() {
        // URI < blank < literal regardless of content
        assert_eq!(Node::uri("z").cmp(&Node::blank("a")), Ordering::Less);
        assert_eq!(Node::blank("z").cmp(&lit("a")), Ordering::Less);
        assert_eq!(lit("a").cmp(&Node::uri("z")), Ordering::Greater);
    }

    #[test]
    fn node_order_is_byte_lexicographic() {
        // "1" < "9" as bytes, so "10" < "9"
        assert_eq!(lit("10").cmp(&lit("9")), Ordering::Less);
        assert_eq!(Node::uri("a").cmp(&Node::uri("ab")), Ordering::Less);
    }

    #[test]
    fn literal_order_breaks_ties_on_datatype_then_language() {
        let plain = lit("a");
        let typed = Node::typed_literal("a", "urn:t");
        let tagged = Node::lang_literal("a", "en");
        assert_eq!(plain.cmp(&typed), Ordering::Less);
        assert_eq!(plain.cmp(&tagged), Ordering::Less);
        assert_ne!(typed.cmp(&tagged), Ordering::Equal);
    }

    #[test]
    fn term_equality_is_exact() {
        let a = Node::typed_literal("1.0", "http://www.w3.org/2001/XMLSchema#double");
        let b = Node::typed_literal("1", "http://www.w3.org/2001/XMLSchema#double");
        assert!(!term_equals(&a, &b));
        assert!(term_equals(&Node::uri("x"), &Node::uri("x")));
        assert!(!term_equals(&Node::lang_literal("a", "en"), &lit("a")));
    }

    #[test]
    fn term_equals_iff_compare_equal() {
        let nodes = [
            Node::uri("a"),
            Node::uri("b"),
            Node::blank("a"),
            lit("a"),
            Node::typed_literal("a", "urn:t"),
            Node::lang_literal("a", "EN"),
            Node::lang_literal("a", "en"),
        ];
        for x in &nodes {
            for y in &nodes {
                assert_eq!(term_equals(x, y), x.cmp(y) == Ordering::Equal);
            }
        }
    }

    #[test]
    fn language_tags_normalize_to_lowercase() {
        assert!(term_equals(
            &Node::lang_literal("a", "EN"),
            &Node::lang_literal("a", "en")
        ));
    }

    #[test]
    fn quad_order_last_key_is_graph() {
        let a = Quad::new(Node::uri("s"), "p", lit("o"), "g1");
        let b = Quad::new(Node::uri("s"), "p", lit("o"), "g2");
        assert_eq!(a.cmp(&b), Ordering::Less);
        assert_eq!(a.cmp(&a.clone()), Ordering::Equal);
    }

    #[test]
    fn quad_equal_iff_all_components_equal() {
        let a = Quad::new(Node::uri("s"), "p", lit("o"), "g");
        let mut b = a.clone();
        assert_eq!(a, b);
        b.object = lit("o2");
        assert_ne!(a, b);
    }

    #[test]
    fn cluster_sorts_and_dedupes() {
        let q1 = Quad::new(Node::uri("s"), "p", lit("b"), "g1");
        let q2 = Quad::new(Node::uri("s"), "p", lit("a"), "g2");
        let cc = ConflictCluster::new(vec![q1.clone(), q2.clone(), q1.clone()]);
        assert_eq!(cc.quads(), &[q2, q1]);
        assert_eq!(cc.len(), 2);
    }

    #[test]
    #[should_panic(expected = "share subject")]
    fn cluster_rejects_mixed_subjects() {
        let q1 = Quad::new(Node::uri("s1"), "p", lit("a"), "g");
        let q2 = Quad::new(Node::uri("s2"), "p", lit("a"), "g");
        ConflictCluster::new(vec![q1, q2]);
    }
}
