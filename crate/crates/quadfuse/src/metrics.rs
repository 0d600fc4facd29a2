//! Dataset-quality measurement: completeness, conciseness and consistency,
//! computed before and after fusion.
//!
//! "Entities" are subject terms and "attributes" are predicate terms; the
//! unique counts apply the canonical mapping first, so a dataset whose
//! subjects collapse under same-as links is less concise than one that
//! already uses canonical identifiers. Consistency looks at conflict
//! clusters: a cluster with a single distinct object is conflict-free, and
//! clusters of many-valued properties are left out of the ratio entirely.

use std::collections::HashSet;

use crate::canonical::CanonicalMap;
use crate::engine::{cluster_quads, resolve_uris, sort_and_dedupe};
use crate::model::{Quad, Uri};

/// Counting summary of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub total_quads: usize,
    /// Distinct subject terms before canonicalization.
    pub all_subjects: usize,
    /// Distinct subject terms after canonicalization.
    pub unique_subjects: usize,
    pub all_predicates: usize,
    pub unique_predicates: usize,
    pub cluster_count: usize,
    /// Clusters of single-valued predicates holding one distinct object.
    pub conflict_free_clusters: usize,
    /// Clusters excluded from consistency because their predicate is
    /// declared many-valued.
    pub many_valued_clusters: usize,
    /// Mean cluster size over the deduplicated, canonicalized quads.
    pub avg_cluster_size: f64,
}

/// Counts subjects, predicates and conflict clusters of `quads`.
/// `many_valued` lists predicate URIs (as written by the user) whose
/// clusters do not participate in the consistency ratio.
pub fn compute_stats(quads: &[Quad], map: &CanonicalMap, many_valued: &[Uri]) -> DatasetStats {
    let mut all_subjects = HashSet::new();
    let mut unique_subjects = HashSet::new();
    let mut blank_subjects = HashSet::new();
    let mut all_predicates = HashSet::new();
    let mut unique_predicates = HashSet::new();
    for quad in quads {
        all_subjects.insert(&quad.subject);
        all_predicates.insert(&quad.predicate);
        match quad.subject.as_uri() {
            Some(u) => {
                unique_subjects.insert(map.canonical_of(u));
            }
            // blank subjects never canonicalize; they count as themselves
            None => {
                blank_subjects.insert(&quad.subject);
            }
        }
        unique_predicates.insert(map.canonical_of(&quad.predicate));
    }
    let unique_subject_count = unique_subjects.len() + blank_subjects.len();
    let unique_predicate_count = unique_predicates.len();
    let all_subject_count = all_subjects.len();
    let all_predicate_count = all_predicates.len();

    let many_valued_canonical: HashSet<&Uri> =
        many_valued.iter().map(|p| map.canonical_of(p)).collect();

    let canonicalized = sort_and_dedupe(resolve_uris(quads.to_vec(), map));
    let deduped_len = canonicalized.len();
    let clusters = cluster_quads(canonicalized);
    let cluster_count = clusters.len();
    let mut conflict_free = 0;
    let mut many_valued_count = 0;
    for cluster in &clusters {
        if many_valued_canonical.contains(cluster.predicate()) {
            many_valued_count += 1;
            continue;
        }
        // quads are sorted, so distinct objects are adjacent
        let mut distinct = cluster
            .quads()
            .iter()
            .map(|q| &q.object)
            .collect::<Vec<_>>();
        distinct.dedup();
        if distinct.len() == 1 {
            conflict_free += 1;
        }
    }

    DatasetStats {
        total_quads: quads.len(),
        all_subjects: all_subject_count,
        unique_subjects: unique_subject_count,
        all_predicates: all_predicate_count,
        unique_predicates: unique_predicate_count,
        cluster_count,
        conflict_free_clusters: conflict_free,
        many_valued_clusters: many_valued_count,
        avg_cluster_size: if cluster_count == 0 {
            0.0
        } else {
            deduped_len as f64 / cluster_count as f64
        },
    }
}

/// Extensional and intensional completeness of a dataset against the
/// universe (the union of all source datasets). Empty universe counts
/// define the ratio as 1.
pub fn completeness(dataset: &DatasetStats, universe: &DatasetStats) -> (f64, f64) {
    (
        ratio(dataset.unique_subjects, universe.unique_subjects),
        ratio(dataset.unique_predicates, universe.unique_predicates),
    )
}

/// Extensional and intensional conciseness: unique over all entity and
/// attribute representations. An empty dataset is perfectly concise.
pub fn conciseness(stats: &DatasetStats) -> (f64, f64) {
    (
        ratio(stats.unique_subjects, stats.all_subjects),
        ratio(stats.unique_predicates, stats.all_predicates),
    )
}

/// Share of single-valued-property clusters without conflicts; 1 when
/// there are none.
pub fn consistency(stats: &DatasetStats) -> f64 {
    ratio(
        stats.conflict_free_clusters,
        stats.cluster_count - stats.many_valued_clusters,
    )
}

fn ratio(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        1.0
    } else {
        numerator as f64 / denominator as f64
    }
}

/// All five quality metrics of one dataset relative to a universe.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub ext_completeness: f64,
    pub int_completeness: f64,
    pub ext_conciseness: f64,
    pub int_conciseness: f64,
    pub consistency: f64,
}

impl QualityReport {
    pub fn compute(dataset: &DatasetStats, universe: &DatasetStats) -> Self {
        let (ext_completeness, int_completeness) = completeness(dataset, universe);
        let (ext_conciseness, int_conciseness) = conciseness(dataset);
        QualityReport {
            ext_completeness,
            int_completeness,
            ext_conciseness,
            int_conciseness,
            consistency: consistency(dataset),
        }
    }

    /// `(name, value)` pairs in report order.
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("ext_completeness", self.ext_completeness),
            ("int_completeness", self.int_completeness),
            ("ext_conciseness", self.ext_conciseness),
            ("int_conciseness", self.int_conciseness),
            ("consistency", self.consistency),
        ]
    }
}

const METRIC_NAMES: [&str; 5] = [
    "ext_completeness",
    "int_completeness",
    "ext_conciseness",
    "int_conciseness",
    "consistency",
];

/// Renders the report for several labelled datasets as a human-readable
/// table followed by machine-readable `label.metric=value` lines.
pub fn render_report(sections: &[(String, QualityReport)]) -> String {
    let mut out = String::new();
    let name_width = sections
        .iter()
        .map(|(label, _)| label.len())
        .chain(["dataset".len()])
        .max()
        .unwrap_or(8);
    out.push_str(&format!("{:<name_width$}", "dataset"));
    for metric in METRIC_NAMES {
        out.push_str(&format!("  {metric:>17}"));
    }
    out.push('\n');
    for (label, report) in sections {
        out.push_str(&format!("{label:<name_width$}"));
        for (_, value) in report.entries() {
            out.push_str(&format!("  {value:>17.4}"));
        }
        out.push('\n');
    }
    out.push('\n');
    for (label, report) in sections {
        for (metric, value) in report.entries() {
            out.push_str(&format!("{label}.{metric}={value:.4}\n"));
        }
    }
    out
}
