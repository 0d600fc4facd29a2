//! The conflict-resolution pipeline: canonicalize URIs, sort, deduplicate,
//! cluster, then resolve each cluster with the strategy configured for its
//! predicate.
//!
//! Cluster resolution is side-effect-free, so clusters may be handed to a
//! worker pool; the output is reassembled in cluster order and is therefore
//! byte-identical regardless of worker count.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::canonical::{build_canonical_mapping, CanonicalMap};
use crate::functions::{self, validate_strategy, FunctionError, MetadataIndex, ResolutionContext};
use crate::model::{ConflictCluster, Node, Quad, ResolvedQuad, Uri};
use crate::quality::{
    ScoreLookup, DEFAULT_AGREE_COEFFICIENT, DEFAULT_DATE_DISTANCE_MAX, DEFAULT_SOURCE_SCORE,
};
use crate::vocab;

/// Whether a property legitimately holds several values. Many-valued
/// properties resolve without the conflict factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    SingleValued,
    ManyValued,
}

/// What to do with values a mediating function cannot process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorStrategy {
    /// Propagate them to the output unchanged.
    ReturnAll,
    /// Drop them from the computation.
    Ignore,
}

/// How conflicts of one property (or of everything, as the default) are
/// resolved.
#[derive(Debug, Clone)]
pub struct ResolutionStrategy {
    pub function: String,
    pub cardinality: Cardinality,
    pub on_error: ErrorStrategy,
    pub agree_coefficient: f64,
    pub params: BTreeMap<String, String>,
}

impl Default for ResolutionStrategy {
    fn default() -> Self {
        ResolutionStrategy {
            function: "ALL".to_owned(),
            cardinality: Cardinality::SingleValued,
            on_error: ErrorStrategy::ReturnAll,
            agree_coefficient: DEFAULT_AGREE_COEFFICIENT,
            params: BTreeMap::new(),
        }
    }
}

/// Default strategy plus per-property overrides, keyed by the property URI
/// exactly as the user wrote it (pre-canonicalization).
#[derive(Debug, Clone, Default)]
pub struct ResolutionPolicy {
    pub default_strategy: ResolutionStrategy,
    pub per_property: BTreeMap<Uri, ResolutionStrategy>,
}

/// Rewrites subject, predicate and object URIs to their canonical form.
/// Graph names stay verbatim: they are provenance. Literals and blank nodes
/// are untouched and the input order is preserved.
pub fn resolve_uris(quads: Vec<Quad>, map: &CanonicalMap) -> Vec<Quad> {
    quads
        .into_iter()
        .map(|mut quad| {
            if let Node::Uri(u) = &quad.subject {
                if map.rewrites(u) {
                    quad.subject = Node::Uri(map.canonical_of(u).clone());
                }
            }
            if map.rewrites(&quad.predicate) {
                quad.predicate = map.canonical_of(&quad.predicate).clone();
            }
            if let Node::Uri(u) = &quad.object {
                if map.rewrites(u) {
                    quad.object = Node::Uri(map.canonical_of(u).clone());
                }
            }
            quad
        })
        .collect()
}

/// Sorts by subject, predicate, object, graph and drops exact duplicates.
pub fn sort_and_dedupe(mut quads: Vec<Quad>) -> Vec<Quad> {
    quads.sort_unstable();
    quads.dedup();
    quads
}

/// Groups consecutive quads sharing subject and predicate. Input must be
/// sorted; clusters come out in sort order and cover every input quad.
pub fn cluster_quads(sorted: Vec<Quad>) -> Vec<ConflictCluster> {
    let mut clusters = Vec::new();
    let mut current: Vec<Quad> = Vec::new();
    for quad in sorted {
        if let Some(first) = current.first() {
            if first.subject != quad.subject || first.predicate != quad.predicate {
                clusters.push(ConflictCluster::new(std::mem::take(&mut current)));
            }
        }
        current.push(quad);
    }
    if !current.is_empty() {
        clusters.push(ConflictCluster::new(current));
    }
    clusters
}

/// Strategy for a canonical predicate: the strategy of the smallest
/// configured property URI mapping to it, or the default.
pub fn select_strategy<'a>(
    predicate: &Uri,
    policy: &'a ResolutionPolicy,
    map: &CanonicalMap,
) -> &'a ResolutionStrategy {
    policy
        .per_property
        .iter()
        .find(|(configured, _)| map.canonical_of(configured) == predicate)
        .map(|(_, strategy)| strategy)
        .unwrap_or(&policy.default_strategy)
}

/// Policy with its property keys pre-canonicalized for O(1) dispatch.
struct CompiledPolicy<'a> {
    default: &'a ResolutionStrategy,
    by_canonical: HashMap<&'a Uri, (&'a Uri, &'a ResolutionStrategy)>,
}

impl<'a> CompiledPolicy<'a> {
    fn compile(policy: &'a ResolutionPolicy, map: &'a CanonicalMap) -> Self {
        let mut by_canonical: HashMap<&Uri, (&Uri, &ResolutionStrategy)> = HashMap::new();
        for (configured, strategy) in &policy.per_property {
            let canonical = map.canonical_of(configured);
            // BTreeMap iterates in key order, so the smallest alias wins
            by_canonical
                .entry(canonical)
                .or_insert((configured, strategy));
        }
        CompiledPolicy {
            default: &policy.default_strategy,
            by_canonical,
        }
    }

    fn strategy_for(&self, predicate: &Uri) -> &'a ResolutionStrategy {
        self.by_canonical
            .get(predicate)
            .map(|(_, s)| *s)
            .unwrap_or(self.default)
    }
}

/// Pipeline-level configuration.
#[derive(Debug, Clone)]
pub struct FuseConfig {
    /// Ordered namespace prefixes preferred when picking canonical URIs.
    pub preferred_namespaces: Vec<String>,
    /// Metadata predicate carrying per-graph quality scores.
    pub score_predicate: Uri,
    /// Metadata predicate carrying per-graph timestamps (LATEST).
    pub timestamp_predicate: Uri,
    /// Score assumed for graphs without metadata.
    pub default_source_score: f64,
    /// Normalization span for date distances, in seconds.
    pub date_distance_max_secs: f64,
    /// Worker threads for cluster resolution; 1 = sequential.
    pub workers: usize,
}

impl Default for FuseConfig {
    fn default() -> Self {
        FuseConfig {
            preferred_namespaces: Vec::new(),
            score_predicate: Uri::new(vocab::DEFAULT_SCORE_PREDICATE),
            timestamp_predicate: Uri::new(vocab::DEFAULT_TIMESTAMP_PREDICATE),
            default_source_score: DEFAULT_SOURCE_SCORE,
            date_distance_max_secs: DEFAULT_DATE_DISTANCE_MAX,
            workers: 1,
        }
    }
}

/// Everything a fusion run produces besides the resolved quads.
#[derive(Debug)]
pub struct FuseOutcome {
    pub resolved: Vec<ResolvedQuad>,
    pub canonical: CanonicalMap,
    pub cluster_count: usize,
    /// Warnings from score extraction (clamped or unparseable values).
    pub score_warnings: Vec<String>,
    /// Source-metadata resolutions that fell back to ANY.
    pub metadata_fallbacks: usize,
}

/// Runs the full pipeline over in-memory inputs.
pub fn fuse(
    data: Vec<Quad>,
    metadata: &[Quad],
    links: Vec<(Uri, Uri)>,
    policy: &ResolutionPolicy,
    config: &FuseConfig,
) -> Result<FuseOutcome, FunctionError> {
    // reject unknown functions and missing parameters before touching data
    validate_strategy(&policy.default_strategy)?;
    for strategy in policy.per_property.values() {
        validate_strategy(strategy)?;
    }

    let canonical = build_canonical_mapping(links, &config.preferred_namespaces);
    let data = resolve_uris(data, &canonical);
    let data = sort_and_dedupe(data);
    let clusters = cluster_quads(data);

    let (scores, score_warnings) = ScoreLookup::from_metadata(
        metadata,
        &config.score_predicate,
        config.default_source_score,
    );
    let metadata_index = MetadataIndex::build(metadata);
    let fallbacks = AtomicUsize::new(0);
    let ctx = ResolutionContext {
        scores: &scores,
        metadata: &metadata_index,
        timestamp_predicate: &config.timestamp_predicate,
        date_distance_max_secs: config.date_distance_max_secs,
        metadata_fallbacks: &fallbacks,
    };
    let compiled = CompiledPolicy::compile(policy, &canonical);

    let cluster_count = clusters.len();
    let resolved = resolve_clusters(&clusters, &compiled, &ctx, config.workers)?;

    Ok(FuseOutcome {
        resolved,
        canonical,
        cluster_count,
        score_warnings,
        metadata_fallbacks: fallbacks.load(Ordering::Relaxed),
    })
}

fn resolve_clusters(
    clusters: &[ConflictCluster],
    policy: &CompiledPolicy,
    ctx: &ResolutionContext,
    workers: usize,
) -> Result<Vec<ResolvedQuad>, FunctionError> {
    let resolve_one = |cluster: &ConflictCluster| {
        functions::resolve(cluster, policy.strategy_for(cluster.predicate()), ctx)
    };

    if workers <= 1 || clusters.len() < 2 {
        let mut out = Vec::with_capacity(clusters.len());
        for cluster in clusters {
            out.extend(resolve_one(cluster)?);
        }
        return Ok(out);
    }

    // workers claim batches of cluster indices; per-index outputs are
    // reassembled in order afterwards, keeping the result schedule-free
    const BATCH: usize = 128;
    let next = AtomicUsize::new(0);
    let worker_outputs = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut local: Vec<(usize, Result<Vec<ResolvedQuad>, FunctionError>)> =
                        Vec::new();
                    loop {
                        let start = next.fetch_add(BATCH, Ordering::Relaxed);
                        if start >= clusters.len() {
                            break;
                        }
                        let end = (start + BATCH).min(clusters.len());
                        for (offset, cluster) in clusters[start..end].iter().enumerate() {
                            local.push((start + offset, resolve_one(cluster)));
                        }
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect::<Vec<_>>()
    });

    let mut indexed: Vec<(usize, Result<Vec<ResolvedQuad>, FunctionError>)> =
        worker_outputs.into_iter().flatten().collect();
    indexed.sort_by_key(|(i, _)| *i);
    let mut out = Vec::new();
    for (_, result) in indexed {
        out.extend(result?);
    }
    Ok(out)
}
