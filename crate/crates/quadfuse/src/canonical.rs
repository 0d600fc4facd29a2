//! Canonical-URI mapping built from same-as links.
//!
//! Identifier and schema conflicts are resolved by collapsing every weakly
//! connected component of the link graph onto a single representative URI.
//! The component partition comes from a forest-based disjoint-set structure
//! with union by rank and path halving, giving amortized near-linear build
//! time over the number of links.

use std::collections::HashMap;

use crate::model::{Node, Quad, Uri};
use crate::vocab;

/// Disjoint-set forest over dense indices.
#[derive(Debug, Default)]
pub struct DisjointSet {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new() -> Self {
        DisjointSet::default()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Adds a fresh singleton and returns its index.
    pub fn push(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.rank.push(0);
        id
    }

    /// Representative of `x`'s set, halving paths on the way up.
    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grandparent = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grandparent;
            x = grandparent;
        }
        x
    }

    /// Joins the sets of `a` and `b`.
    pub fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
    }
}

/// Mapping from URIs to the canonical representative of their same-as
/// component. URIs outside any component map to themselves.
#[derive(Debug, Default, Clone)]
pub struct CanonicalMap {
    map: HashMap<Uri, Uri>,
}

impl CanonicalMap {
    pub fn empty() -> Self {
        CanonicalMap::default()
    }

    /// Canonical URI for `u`; `u` itself when no mapping is defined.
    pub fn canonical_of<'a>(&'a self, u: &'a Uri) -> &'a Uri {
        self.map.get(u).unwrap_or(u)
    }

    /// True when `u` is mapped to a different URI.
    pub fn rewrites(&self, u: &Uri) -> bool {
        self.map.get(u).is_some_and(|c| c != u)
    }

    pub fn mapped_len(&self) -> usize {
        self.map.len()
    }

    /// `(member, canonical)` pairs for every URI whose canonical form
    /// differs from itself, in sorted order.
    pub fn rewritten_pairs(&self) -> Vec<(&Uri, &Uri)> {
        let mut pairs: Vec<_> = self.map.iter().filter(|(u, c)| u != c).collect();
        pairs.sort_unstable();
        pairs
    }
}

/// Default link predicates: `owl:sameAs` plus the equivalence property used
/// for schema mappings.
pub fn default_link_predicates() -> Vec<Uri> {
    vec![
        Uri::new(vocab::OWL_SAME_AS),
        Uri::new(vocab::ODCS_EQUIVALENT),
    ]
}

/// Link pairs pulled out of a quad stream, plus the number of link
/// statements skipped because subject or object was not a URI.
#[derive(Debug, Default)]
pub struct ExtractedLinks {
    pub links: Vec<(Uri, Uri)>,
    pub skipped: usize,
}

/// Collects `(subject, object)` pairs from quads whose predicate is one of
/// `link_predicates` and whose subject and object are both URIs. Link
/// statements with blank or literal endpoints are counted as skipped.
pub fn extract_links(quads: &[Quad], link_predicates: &[Uri]) -> ExtractedLinks {
    let mut out = ExtractedLinks::default();
    for quad in quads {
        if !link_predicates.contains(&quad.predicate) {
            continue;
        }
        match (&quad.subject, &quad.object) {
            (Node::Uri(s), Node::Uri(o)) => out.links.push((s.clone(), o.clone())),
            _ => out.skipped += 1,
        }
    }
    out
}

/// Builds the canonical mapping from undirected links. Two URIs share a
/// canonical URI iff they are connected by a path of links. The
/// representative of a component is the member matching the
/// earliest-listed preferred namespace prefix; ties and components with no
/// match fall back to the byte-lexicographically smallest member.
pub fn build_canonical_mapping<I>(links: I, preferred_namespaces: &[String]) -> CanonicalMap
where
    I: IntoIterator<Item = (Uri, Uri)>,
{
    let mut ids: HashMap<Uri, u32> = HashMap::new();
    let mut uris: Vec<Uri> = Vec::new();
    let mut dsu = DisjointSet::new();
    let mut intern = |u: Uri, uris: &mut Vec<Uri>, dsu: &mut DisjointSet| -> u32 {
        if let Some(&id) = ids.get(&u) {
            return id;
        }
        let id = dsu.push();
        ids.insert(u.clone(), id);
        uris.push(u);
        id
    };

    for (s, o) in links {
        let a = intern(s, &mut uris, &mut dsu);
        let b = intern(o, &mut uris, &mut dsu);
        dsu.union(a, b);
    }

    // Pick the best representative per component in one pass.
    let preference = |u: &Uri| -> usize {
        preferred_namespaces
            .iter()
            .position(|p| u.as_str().starts_with(p.as_str()))
            .unwrap_or(usize::MAX)
    };
    let mut best: HashMap<u32, u32> = HashMap::new();
    for id in 0..uris.len() as u32 {
        let root = dsu.find(id);
        best.entry(root)
            .and_modify(|current| {
                let cur = &uris[*current as usize];
                let cand = &uris[id as usize];
                if (preference(cand), cand) < (preference(cur), cur) {
                    *current = id;
                }
            })
            .or_insert(id);
    }

    let mut map = HashMap::with_capacity(uris.len());
    for id in 0..uris.len() as u32 {
        let root = dsu.find(id);
        let canonical = uris[best[&root] as usize].clone();
        map.insert(uris[id as usize].clone(), canonical);
    }
    CanonicalMap { map }
}
