//! Registry and implementations of the conflict resolution functions.
//!
//! Deciding functions only ever return objects present in the input
//! cluster; mediating functions may mint new objects (averages, sums,
//! concatenations). Each function carries the quality-assessment settings
//! it runs under: deciding functions use both the conflict and the support
//! factor, averaging functions use only the conflict factor, and purely
//! synthetic ones (concat, sum, count, constant) use neither.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use crate::engine::{Cardinality, ErrorStrategy, ResolutionStrategy};
use crate::model::{ConflictCluster, Node, Quad, ResolvedQuad, Uri};
use crate::nquads::format_double;
use crate::quality::{
    assess_quality, parse_date_time, parse_number, AggregationMode, QualityParams, ScoreLookup,
};
use crate::vocab;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FunctionError {
    #[error("unknown resolution function \"{0}\"")]
    UnknownFunction(String),
    #[error("function {function} requires parameter \"{param}\"")]
    MissingParam { function: String, param: String },
    #[error("function {function}: parameter {param}={value:?} is invalid")]
    InvalidParam {
        function: String,
        param: String,
        value: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    Deciding,
    Mediating,
}

/// Static description of a registered function.
#[derive(Debug, Clone)]
pub struct FunctionDescriptor {
    pub name: &'static str,
    pub kind: FunctionKind,
    pub consider_conflicts: bool,
    pub consider_support: bool,
    pub required_params: &'static [&'static str],
}

const fn deciding(
    name: &'static str,
    required_params: &'static [&'static str],
) -> FunctionDescriptor {
    FunctionDescriptor {
        name,
        kind: FunctionKind::Deciding,
        consider_conflicts: true,
        consider_support: true,
        required_params,
    }
}

const fn mediating(
    name: &'static str,
    consider_conflicts: bool,
    required_params: &'static [&'static str],
) -> FunctionDescriptor {
    FunctionDescriptor {
        name,
        kind: FunctionKind::Mediating,
        consider_conflicts,
        consider_support: false,
        required_params,
    }
}

/// All registered resolution functions.
pub static REGISTRY: &[FunctionDescriptor] = &[
    deciding("ALL", &[]),
    deciding("ANY", &[]),
    deciding("BEST", &[]),
    deciding("TOPN", &["n"]),
    deciding("THRESHOLD", &["threshold"]),
    deciding("BESTSOURCE", &[]),
    deciding("FILTER", &[]), // needs min and/or max, checked in validate_strategy
    deciding("LONGEST", &[]),
    deciding("SHORTEST", &[]),
    deciding("MAX", &[]),
    deciding("MIN", &[]),
    deciding("NONE", &[]),
    deciding("VOTE", &[]),
    deciding("WEIGHTEDVOTE", &[]),
    deciding("MAXSOURCEMETADATA", &["metadataProperty"]),
    deciding("MINSOURCEMETADATA", &["metadataProperty"]),
    deciding("LATEST", &[]),
    deciding("CHOOSESOURCE", &["source"]),
    deciding("CERTAIN", &[]),
    mediating("CONSTANT", false, &["value"]),
    mediating("COUNT", false, &[]),
    mediating("AVG", true, &[]),
    mediating("MEDIAN", true, &[]),
    mediating("SUM", false, &[]),
    mediating("CONCAT", false, &[]),
];

/// Case-insensitive lookup in the registry.
pub fn lookup_function(name: &str) -> Result<&'static FunctionDescriptor, FunctionError> {
    let upper = name.to_ascii_uppercase();
    REGISTRY
        .iter()
        .find(|d| d.name == upper)
        .ok_or_else(|| FunctionError::UnknownFunction(name.to_owned()))
}

/// Checks that the strategy names a registered function and carries every
/// parameter that function needs, in parseable form.
pub fn validate_strategy(strategy: &ResolutionStrategy) -> Result<(), FunctionError> {
    let desc = lookup_function(&strategy.function)?;
    for &param in desc.required_params {
        required_param(strategy, desc.name, param)?;
    }
    match desc.name {
        "TOPN" => {
            let raw = required_param(strategy, desc.name, "n")?;
            match raw.parse::<usize>() {
                Ok(n) if n >= 1 => {}
                _ => return Err(invalid(desc.name, "n", raw)),
            }
        }
        "THRESHOLD" => {
            let raw = required_param(strategy, desc.name, "threshold")?;
            match raw.parse::<f64>() {
                Ok(t) if (0.0..=1.0).contains(&t) => {}
                _ => return Err(invalid(desc.name, "threshold", raw)),
            }
        }
        "FILTER"
            if !strategy.params.contains_key("min") && !strategy.params.contains_key("max") =>
        {
            return Err(FunctionError::MissingParam {
                function: desc.name.to_owned(),
                param: "min or max".to_owned(),
            });
        }
        _ => {}
    }
    Ok(())
}

fn required_param<'a>(
    strategy: &'a ResolutionStrategy,
    function: &str,
    param: &str,
) -> Result<&'a str, FunctionError> {
    strategy
        .params
        .get(param)
        .map(String::as_str)
        .ok_or_else(|| FunctionError::MissingParam {
            function: function.to_owned(),
            param: param.to_owned(),
        })
}

fn invalid(function: &str, param: &str, value: &str) -> FunctionError {
    FunctionError::InvalidParam {
        function: function.to_owned(),
        param: param.to_owned(),
        value: value.to_owned(),
    }
}

/// Accepts parameter IRIs written either bare or in angle brackets.
fn iri_param(raw: &str) -> Uri {
    let trimmed = raw
        .strip_prefix('<')
        .and_then(|s| s.strip_suffix('>'))
        .unwrap_or(raw);
    Uri::new(trimmed)
}

/// Metadata quads indexed for subject + predicate lookup.
#[derive(Debug, Default)]
pub struct MetadataIndex {
    map: HashMap<Uri, HashMap<Uri, Vec<Node>>>,
}

impl MetadataIndex {
    pub fn build(metadata: &[Quad]) -> Self {
        let mut map: HashMap<Uri, HashMap<Uri, Vec<Node>>> = HashMap::new();
        for quad in metadata {
            if let Node::Uri(subject) = &quad.subject {
                map.entry(subject.clone())
                    .or_default()
                    .entry(quad.predicate.clone())
                    .or_default()
                    .push(quad.object.clone());
            }
        }
        MetadataIndex { map }
    }

    pub fn values(&self, subject: &Uri, predicate: &Uri) -> &[Node] {
        self.map
            .get(subject)
            .and_then(|p| p.get(predicate))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Shared, read-only context a resolution function runs in.
pub struct ResolutionContext<'a> {
    pub scores: &'a ScoreLookup,
    pub metadata: &'a MetadataIndex,
    pub timestamp_predicate: &'a Uri,
    pub date_distance_max_secs: f64,
    /// Incremented whenever a source-metadata function falls back to ANY
    /// because no graph carried the requested metadata value.
    pub metadata_fallbacks: &'a AtomicUsize,
}

impl<'a> ResolutionContext<'a> {
    fn quality_params(
        &self,
        desc: &FunctionDescriptor,
        strategy: &ResolutionStrategy,
    ) -> QualityParams {
        QualityParams {
            // MANYVALUED properties legitimately hold several values, so
            // disagreement must not count against them.
            consider_conflicts: desc.consider_conflicts
                && strategy.cardinality == Cardinality::SingleValued,
            consider_support: desc.consider_support,
            agree_coefficient: strategy.agree_coefficient,
            date_distance_max_secs: self.date_distance_max_secs,
        }
    }
}

/// Applies the strategy's resolution function to one conflict cluster.
pub fn resolve(
    cluster: &ConflictCluster,
    strategy: &ResolutionStrategy,
    ctx: &ResolutionContext,
) -> Result<Vec<ResolvedQuad>, FunctionError> {
    let desc = lookup_function(&strategy.function)?;
    let params = ctx.quality_params(desc, strategy);
    match desc.name {
        "ALL" => Ok(score_all(cluster, ctx, &params)
            .map(|s| s.into_resolved(cluster))
            .collect()),
        "BEST" => Ok(rank(cluster, ctx, &params)
            .into_iter()
            .take(1)
            .map(|s| s.into_resolved(cluster))
            .collect()),
        "TOPN" => {
            let n: usize = required_param(strategy, desc.name, "n")?
                .parse()
                .map_err(|_| invalid(desc.name, "n", &strategy.params["n"]))?;
            if n < 1 {
                return Err(invalid(desc.name, "n", &strategy.params["n"]));
            }
            Ok(rank(cluster, ctx, &params)
                .into_iter()
                .take(n)
                .map(|s| s.into_resolved(cluster))
                .collect())
        }
        "THRESHOLD" => {
            let raw = required_param(strategy, desc.name, "threshold")?;
            let threshold: f64 = raw
                .parse()
                .map_err(|_| invalid(desc.name, "threshold", raw))?;
            Ok(rank(cluster, ctx, &params)
                .into_iter()
                .filter(|s| s.quality > threshold)
                .map(|s| s.into_resolved(cluster))
                .collect())
        }
        "ANY" => Ok(score_groups(
            cluster,
            group_values(cluster).into_iter().take(1),
            ctx,
            &params,
        )),
        "NONE" => Ok(Vec::new()),
        "CERTAIN" => {
            let groups = group_values(cluster);
            if groups.len() == 1 {
                Ok(score_groups(cluster, groups.into_iter(), ctx, &params))
            } else {
                Ok(Vec::new())
            }
        }
        "LONGEST" | "SHORTEST" => {
            let longest = desc.name == "LONGEST";
            let groups = group_values(cluster);
            // groups are object-sorted, so the first extremum is also the
            // smallest object among ties
            let best = groups
                .iter()
                .enumerate()
                .reduce(|a, b| {
                    let (la, lb) = (a.1.object.text().len(), b.1.object.text().len());
                    if (longest && lb > la) || (!longest && lb < la) {
                        b
                    } else {
                        a
                    }
                })
                .map(|(i, _)| i)
                .expect("cluster is non-empty");
            Ok(score_groups(
                cluster,
                groups.into_iter().skip(best).take(1),
                ctx,
                &params,
            ))
        }
        "MAX" | "MIN" => {
            let want_max = desc.name == "MAX";
            let groups = group_values(cluster);
            let numeric: Option<Vec<f64>> = groups
                .iter()
                .map(|g| parse_number(g.object.text()))
                .collect();
            let index = match numeric {
                Some(values) => {
                    let mut best = 0;
                    for (i, v) in values.iter().enumerate() {
                        if (want_max && *v > values[best]) || (!want_max && *v < values[best]) {
                            best = i;
                        }
                    }
                    best
                }
                // objects are sorted, so the node-order extremes sit at the ends
                None if want_max => groups.len() - 1,
                None => 0,
            };
            Ok(score_groups(
                cluster,
                groups.into_iter().skip(index).take(1),
                ctx,
                &params,
            ))
        }
        "FILTER" => {
            let min = strategy.params.get("min").map(String::as_str);
            let max = strategy.params.get("max").map(String::as_str);
            if min.is_none() && max.is_none() {
                return Err(FunctionError::MissingParam {
                    function: desc.name.to_owned(),
                    param: "min or max".to_owned(),
                });
            }
            let groups = group_values(cluster);
            let all_numeric = groups
                .iter()
                .all(|g| parse_number(g.object.text()).is_some())
                && min.is_none_or(|m| parse_number(m).is_some())
                && max.is_none_or(|m| parse_number(m).is_some());
            let keep = |g: &ValueGroup| -> bool {
                if all_numeric {
                    let v = parse_number(g.object.text()).unwrap();
                    min.is_none_or(|m| v >= parse_number(m).unwrap())
                        && max.is_none_or(|m| v <= parse_number(m).unwrap())
                } else {
                    let t = g.object.text();
                    min.is_none_or(|m| t >= m) && max.is_none_or(|m| t <= m)
                }
            };
            Ok(score_groups(
                cluster,
                groups.into_iter().filter(keep),
                ctx,
                &params,
            ))
        }
        "BESTSOURCE" => {
            let best_score = cluster
                .quads()
                .iter()
                .map(|q| ctx.scores.score(&q.graph))
                .fold(f64::NEG_INFINITY, f64::max);
            let object = cluster
                .quads()
                .iter()
                .filter(|q| ctx.scores.score(&q.graph) == best_score)
                .map(|q| &q.object)
                .min()
                .expect("cluster is non-empty")
                .clone();
            let groups = group_values(cluster);
            Ok(score_groups(
                cluster,
                groups.into_iter().filter(|g| *g.object == object),
                ctx,
                &params,
            ))
        }
        "CHOOSESOURCE" => {
            let source = iri_param(required_param(strategy, desc.name, "source")?);
            let groups = group_values(cluster);
            Ok(score_groups(
                cluster,
                groups.into_iter().filter(|g| g.graphs.contains(&source)),
                ctx,
                &params,
            ))
        }
        "VOTE" | "WEIGHTEDVOTE" => Ok(resolve_vote(
            cluster,
            ctx,
            &params,
            desc.name == "WEIGHTEDVOTE",
        )),
        "MAXSOURCEMETADATA" | "MINSOURCEMETADATA" | "LATEST" => {
            let want_max = desc.name != "MINSOURCEMETADATA";
            let property = if desc.name == "LATEST" {
                ctx.timestamp_predicate.clone()
            } else {
                iri_param(required_param(strategy, desc.name, "metadataProperty")?)
            };
            Ok(resolve_source_metadata(
                cluster, ctx, &params, &property, want_max,
            ))
        }
        "AVG" | "MEDIAN" | "SUM" => Ok(resolve_numeric_aggregate(
            cluster, strategy, ctx, &params, desc.name,
        )),
        "COUNT" => {
            let count = group_values(cluster).len();
            let object = Node::typed_literal(count.to_string(), vocab::XSD_INTEGER);
            Ok(vec![mediated(
                cluster,
                object,
                cluster.graphs(),
                ctx,
                &params,
            )])
        }
        "CONCAT" => {
            let separator = strategy
                .params
                .get("separator")
                .map(String::as_str)
                .unwrap_or("; ");
            let text = group_values(cluster)
                .iter()
                .map(|g| g.object.text())
                .collect::<Vec<_>>()
                .join(separator);
            Ok(vec![mediated(
                cluster,
                Node::literal(text),
                cluster.graphs(),
                ctx,
                &params,
            )])
        }
        "CONSTANT" => {
            let value = required_param(strategy, desc.name, "value")?;
            Ok(vec![mediated(
                cluster,
                Node::literal(value),
                cluster.graphs(),
                ctx,
                &params,
            )])
        }
        other => unreachable!("registered function {other} has no implementation"),
    }
}

/// A distinct object value with the graphs asserting it.
struct ValueGroup<'a> {
    object: &'a Node,
    graphs: BTreeSet<Uri>,
}

/// Distinct object values in node order. Relies on cluster quads being
/// sorted (object before graph), so agreeing quads are adjacent.
fn group_values(cluster: &ConflictCluster) -> Vec<ValueGroup<'_>> {
    let mut groups: Vec<ValueGroup> = Vec::new();
    for quad in cluster.quads() {
        match groups.last_mut() {
            Some(group) if group.object == &quad.object => {
                group.graphs.insert(quad.graph.clone());
            }
            _ => groups.push(ValueGroup {
                object: &quad.object,
                graphs: BTreeSet::from([quad.graph.clone()]),
            }),
        }
    }
    groups
}

struct Scored<'a> {
    object: &'a Node,
    sources: BTreeSet<Uri>,
    quality: f64,
}

impl Scored<'_> {
    fn into_resolved(self, cluster: &ConflictCluster) -> ResolvedQuad {
        let graph = self
            .sources
            .iter()
            .next()
            .expect("scored value has sources")
            .clone();
        ResolvedQuad::new(
            Quad::new(
                cluster.subject().clone(),
                cluster.predicate().clone(),
                self.object.clone(),
                graph,
            ),
            self.sources,
            self.quality,
        )
    }
}

fn score_group<'a>(
    group: ValueGroup<'a>,
    cluster: &ConflictCluster,
    ctx: &ResolutionContext,
    params: &QualityParams,
) -> Scored<'a> {
    let quality = assess_quality(
        group.object,
        &group.graphs,
        cluster,
        ctx.scores,
        params,
        AggregationMode::Deciding,
    )
    .expect("value group has at least one source");
    Scored {
        object: group.object,
        sources: group.graphs,
        quality,
    }
}

/// Every distinct value scored; the shared core of ALL/BEST/TOPN/THRESHOLD.
fn score_all<'a>(
    cluster: &'a ConflictCluster,
    ctx: &'a ResolutionContext,
    params: &'a QualityParams,
) -> impl Iterator<Item = Scored<'a>> + 'a {
    group_values(cluster)
        .into_iter()
        .map(move |g| score_group(g, cluster, ctx, params))
}

fn score_groups<'a>(
    cluster: &ConflictCluster,
    groups: impl Iterator<Item = ValueGroup<'a>>,
    ctx: &ResolutionContext,
    params: &QualityParams,
) -> Vec<ResolvedQuad> {
    groups
        .map(|g| score_group(g, cluster, ctx, params).into_resolved(cluster))
        .collect()
}

/// Candidates sorted by quality (descending), node order breaking ties.
fn rank<'a>(
    cluster: &'a ConflictCluster,
    ctx: &'a ResolutionContext,
    params: &'a QualityParams,
) -> Vec<Scored<'a>> {
    let mut scored: Vec<Scored> = score_all(cluster, ctx, params).collect();
    scored.sort_by(|a, b| {
        b.quality
            .total_cmp(&a.quality)
            .then_with(|| a.object.cmp(b.object))
    });
    scored
}

fn resolve_vote(
    cluster: &ConflictCluster,
    ctx: &ResolutionContext,
    params: &QualityParams,
    weighted: bool,
) -> Vec<ResolvedQuad> {
    let groups = group_values(cluster);
    let votes: Vec<f64> = groups
        .iter()
        .map(|g| {
            if weighted {
                g.graphs.iter().map(|graph| ctx.scores.score(graph)).sum()
            } else {
                g.graphs.len() as f64
            }
        })
        .collect();
    let top_vote = votes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut tied: Vec<Scored> = groups
        .into_iter()
        .zip(&votes)
        .filter(|(_, v)| **v == top_vote)
        .map(|(g, _)| score_group(g, cluster, ctx, params))
        .collect();
    // higher quality wins the tie; groups are object-sorted so a stable max
    // keeps the smallest object on equal quality
    tied.sort_by(|a, b| {
        b.quality
            .total_cmp(&a.quality)
            .then_with(|| a.object.cmp(b.object))
    });
    tied.into_iter()
        .take(1)
        .map(|s| s.into_resolved(cluster))
        .collect()
}

fn resolve_source_metadata(
    cluster: &ConflictCluster,
    ctx: &ResolutionContext,
    params: &QualityParams,
    property: &Uri,
    want_max: bool,
) -> Vec<ResolvedQuad> {
    // one candidate metadata value per graph: the extremum of what the
    // metadata states for it
    let mut candidates: Vec<(&Uri, String)> = Vec::new();
    let graphs = cluster.graphs();
    for graph in &graphs {
        let values = ctx.metadata.values(graph, property);
        let pick = values.iter().map(|n| n.text().to_owned()).reduce(|a, b| {
            if metadata_less(&a, &b) == want_max {
                b
            } else {
                a
            }
        });
        if let Some(value) = pick {
            candidates.push((graph, value));
        }
    }

    if candidates.is_empty() {
        // no graph carries the metadata: degrade to ANY
        ctx.metadata_fallbacks.fetch_add(1, Ordering::Relaxed);
        return score_groups(
            cluster,
            group_values(cluster).into_iter().take(1),
            ctx,
            params,
        );
    }

    let winner: &Uri = candidates
        .iter()
        .reduce(|a, b| {
            let b_beats_a = metadata_less(&a.1, &b.1) == want_max;
            let equal = !metadata_less(&a.1, &b.1) && !metadata_less(&b.1, &a.1);
            if b_beats_a && !equal {
                b
            } else {
                a // candidates follow graph order, so ties keep the smaller graph
            }
        })
        .map(|(g, _)| *g)
        .expect("candidates are non-empty");

    let groups = group_values(cluster);
    score_groups(
        cluster,
        groups.into_iter().filter(|g| g.graphs.contains(winner)),
        ctx,
        params,
    )
}

/// Orders two metadata values: numerically when both are numbers, as
/// timestamps when both parse as dates, lexically otherwise.
fn metadata_less(a: &str, b: &str) -> bool {
    if let (Some(x), Some(y)) = (parse_number(a), parse_number(b)) {
        return x < y;
    }
    if let (Some(x), Some(y)) = (parse_date_time(a), parse_date_time(b)) {
        return x < y;
    }
    a < b
}

fn mediated(
    cluster: &ConflictCluster,
    object: Node,
    sources: BTreeSet<Uri>,
    ctx: &ResolutionContext,
    params: &QualityParams,
) -> ResolvedQuad {
    let quality = assess_quality(
        &object,
        &sources,
        cluster,
        ctx.scores,
        params,
        AggregationMode::Mediating,
    )
    .expect("aggregate has at least one source");
    let graph = sources
        .iter()
        .next()
        .expect("aggregate has sources")
        .clone();
    ResolvedQuad::new(
        Quad::new(
            cluster.subject().clone(),
            cluster.predicate().clone(),
            object,
            graph,
        ),
        sources,
        quality,
    )
}

fn resolve_numeric_aggregate(
    cluster: &ConflictCluster,
    strategy: &ResolutionStrategy,
    ctx: &ResolutionContext,
    params: &QualityParams,
    name: &str,
) -> Vec<ResolvedQuad> {
    let mut values: Vec<(f64, &Node)> = Vec::new();
    let mut sources: BTreeSet<Uri> = BTreeSet::new();
    for quad in cluster.quads() {
        if let Some(v) = parse_number(quad.object.text()) {
            values.push((v, &quad.object));
            sources.insert(quad.graph.clone());
        }
    }

    let mut output = Vec::new();
    if !values.is_empty() {
        let object = match name {
            "SUM" => {
                let sum: f64 = values.iter().map(|(v, _)| v).sum();
                Node::typed_literal(format_double(sum), vocab::XSD_DOUBLE)
            }
            "AVG" => {
                let sum: f64 = values.iter().map(|(v, _)| v).sum();
                Node::typed_literal(format_double(sum / values.len() as f64), vocab::XSD_DOUBLE)
            }
            "MEDIAN" => {
                values.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
                let mid = values.len() / 2;
                if values.len() % 2 == 1 {
                    values[mid].1.clone()
                } else {
                    let mean = (values[mid - 1].0 + values[mid].0) / 2.0;
                    Node::typed_literal(format_double(mean), vocab::XSD_DOUBLE)
                }
            }
            other => unreachable!("not a numeric aggregate: {other}"),
        };
        output.push(mediated(cluster, object, sources, ctx, params));
    }

    if strategy.on_error == ErrorStrategy::ReturnAll {
        // pass non-conforming values through unchanged, scored like ALL
        let passthrough_params = QualityParams {
            consider_conflicts: strategy.cardinality == Cardinality::SingleValued,
            consider_support: true,
            ..params.clone()
        };
        let groups = group_values(cluster)
            .into_iter()
            .filter(|g| parse_number(g.object.text()).is_none());
        output.extend(score_groups(cluster, groups, ctx, &passthrough_params));
    }
    output
}
