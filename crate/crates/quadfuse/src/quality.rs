//! Quality assessment of fused values.
//!
//! The score of a value combines three factors: the quality of the sources
//! that contributed it, its conflicts with the other values in the cluster,
//! and confirmation by multiple agreeing sources.
//!
//! * Factor 1 seeds the score with an aggregate of source scores: the
//!   maximum for deciding functions, the mean for mediating ones.
//! * Factor 2 multiplies by `1 - Σ s(gᵢ)·d(v,oᵢ) / Σ s(gᵢ)` over all quads
//!   of the cluster: a score-weighted vote where each source counts against
//!   `v` in proportion to how far its value lies from it.
//! * Factor 3 adds `(1-q) · min((Σ support scores - max support score) /
//!   agree_coefficient, 1)`, so a value confirmed by several sources beats
//!   any single source, reaching 1 when `agree_coefficient + max` worth of
//!   score agrees.

use std::cell::Cell;
use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{term_equals, ConflictCluster, Node, Uri};

/// Seconds in a Julian year; the default normalization span for date
/// distances.
pub const DEFAULT_DATE_DISTANCE_MAX: f64 = 31_557_600.0;

/// Default score sum (beyond the best source) needed for full confirmation.
pub const DEFAULT_AGREE_COEFFICIENT: f64 = 4.0;

/// Score assumed for graphs without metadata. 1.0 degrades the algorithm to
/// pure voting when no metadata is supplied.
pub const DEFAULT_SOURCE_SCORE: f64 = 1.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QualityError {
    #[error("cannot aggregate an empty source set")]
    EmptySources,
}

/// How source scores of a value are aggregated into the base quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationMode {
    /// The value was picked from the inputs: take the best source.
    Deciding,
    /// The value was derived from all inputs: take the mean source.
    Mediating,
}

/// Tunables of the assessment algorithm.
#[derive(Debug, Clone)]
pub struct QualityParams {
    pub consider_conflicts: bool,
    pub consider_support: bool,
    pub agree_coefficient: f64,
    pub date_distance_max_secs: f64,
}

impl Default for QualityParams {
    fn default() -> Self {
        QualityParams {
            consider_conflicts: true,
            consider_support: true,
            agree_coefficient: DEFAULT_AGREE_COEFFICIENT,
            date_distance_max_secs: DEFAULT_DATE_DISTANCE_MAX,
        }
    }
}

/// Per-graph quality scores extracted from metadata, with a default for
/// graphs that have none.
#[derive(Debug, Clone)]
pub struct ScoreLookup {
    scores: HashMap<Uri, f64>,
    default_score: f64,
}

impl ScoreLookup {
    pub fn new(default_score: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&default_score));
        ScoreLookup {
            scores: HashMap::new(),
            default_score,
        }
    }

    /// Collects `(graph, scorePredicate, score)` statements from metadata.
    /// Out-of-range values are clamped and unparseable ones skipped; both
    /// produce a warning. A graph stated twice keeps the last value.
    pub fn from_metadata(
        metadata: &[crate::model::Quad],
        score_predicate: &Uri,
        default_score: f64,
    ) -> (Self, Vec<String>) {
        let mut lookup = ScoreLookup::new(default_score);
        let mut warnings = Vec::new();
        for quad in metadata {
            if quad.predicate != *score_predicate {
                continue;
            }
            let Some(graph) = quad.subject.as_uri() else {
                warnings.push(format!(
                    "score statement with non-URI subject: {:?}",
                    quad.subject
                ));
                continue;
            };
            let Some(value) = parse_number(quad.object.text()) else {
                warnings.push(format!(
                    "unparseable score {:?} for graph <{}>",
                    quad.object.text(),
                    graph
                ));
                continue;
            };
            let clamped = value.clamp(0.0, 1.0);
            if clamped != value {
                warnings.push(format!(
                    "score {} for graph <{}> clamped to {}",
                    value, graph, clamped
                ));
            }
            lookup.scores.insert(graph.clone(), clamped);
        }
        (lookup, warnings)
    }

    pub fn insert(&mut self, graph: Uri, score: f64) {
        debug_assert!((0.0..=1.0).contains(&score));
        self.scores.insert(graph, score);
    }

    /// Score of a graph, falling back to the default.
    pub fn score(&self, graph: &Uri) -> f64 {
        self.scores
            .get(graph)
            .copied()
            .unwrap_or(self.default_score)
    }

    pub fn default_score(&self) -> f64 {
        self.default_score
    }
}

/// Aggregates the scores of a non-empty source set; maximum for deciding
/// functions, arithmetic mean for mediating ones.
pub fn aggregate_score(
    sources: &BTreeSet<Uri>,
    lookup: &ScoreLookup,
    mode: AggregationMode,
) -> Result<f64, QualityError> {
    if sources.is_empty() {
        return Err(QualityError::EmptySources);
    }
    let scores = sources.iter().map(|g| lookup.score(g));
    Ok(match mode {
        AggregationMode::Deciding => scores.fold(0.0_f64, f64::max),
        AggregationMode::Mediating => scores.sum::<f64>() / sources.len() as f64,
    })
}

thread_local! {
    static DISTANCE_EVALS: Cell<u64> = const { Cell::new(0) };
}

/// Number of distance evaluations performed by the current thread since the
/// last reset. Used for verifying the cost envelope of resolution functions.
pub fn distance_evals() -> u64 {
    DISTANCE_EVALS.with(Cell::get)
}

pub fn reset_distance_evals() {
    DISTANCE_EVALS.with(|c| c.set(0));
}

/// Distance of two nodes in [0, 1]; symmetric, 0 for identical nodes.
///
/// Dispatches on the content of the nodes: relative difference for numbers
/// (`min(|2(v₁-v₂)/(v₁+v₂)|, 1)`), normalized absolute difference for
/// dates, Levenshtein for string literals, and an equality indicator for
/// everything else.
pub fn distance(a: &Node, b: &Node, params: &QualityParams) -> f64 {
    DISTANCE_EVALS.with(|c| c.set(c.get() + 1));
    if let (Some(v1), Some(v2)) = (parse_number(a.text()), parse_number(b.text())) {
        if v1 == v2 {
            return 0.0;
        }
        let sum = v1 + v2;
        if sum == 0.0 {
            return 1.0;
        }
        return (2.0 * (v1 - v2) / sum).abs().min(1.0);
    }
    if let (Some(t1), Some(t2)) = (parse_date_time(a.text()), parse_date_time(b.text())) {
        return ((t1 - t2).abs() / params.date_distance_max_secs).min(1.0);
    }
    if is_string_literal(a) && is_string_literal(b) {
        return normalized_levenshtein(a.text(), b.text());
    }
    if term_equals(a, b) {
        0.0
    } else {
        1.0
    }
}

fn is_string_literal(n: &Node) -> bool {
    match n.as_literal() {
        Some(lit) => match &lit.datatype {
            None => true,
            Some(dt) => dt.as_str() == crate::vocab::XSD_STRING,
        },
        None => false,
    }
}

/// Assesses the quality of value `v` with source set `sources` against the
/// conflicting statements of `cluster`.
///
/// `sources` must be non-empty and name graphs of the cluster.
pub fn assess_quality(
    v: &Node,
    sources: &BTreeSet<Uri>,
    cluster: &ConflictCluster,
    lookup: &ScoreLookup,
    params: &QualityParams,
    mode: AggregationMode,
) -> Result<f64, QualityError> {
    let mut q = aggregate_score(sources, lookup, mode)?;

    if params.consider_conflicts {
        let mut weighted_distance = 0.0;
        let mut total_weight = 0.0;
        for quad in cluster.quads() {
            let weight = lookup.score(&quad.graph);
            weighted_distance += weight * distance(v, &quad.object, params);
            total_weight += weight;
        }
        let conflict_factor = if total_weight == 0.0 {
            1.0
        } else {
            1.0 - weighted_distance / total_weight
        };
        q *= conflict_factor;
    }

    if params.consider_support {
        // Graphs asserting exactly v. Cluster quads are deduplicated, so
        // each supporting graph appears at most once per value.
        let mut sum = 0.0_f64;
        let mut max = 0.0_f64;
        let mut supported = false;
        for quad in cluster.quads() {
            if term_equals(&quad.object, v) {
                let score = lookup.score(&quad.graph);
                sum += score;
                max = max.max(score);
                supported = true;
            }
        }
        if supported {
            let support_factor = ((sum - max) / params.agree_coefficient).min(1.0);
            q += (1.0 - q) * support_factor;
        }
    }

    Ok(q)
}

/// Levenshtein edit distance divided by the longer length (in chars);
/// 0 when both strings are empty.
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let max_len = a.len().max(b.len());
    if max_len == 0 {
        return 0.0;
    }
    levenshtein(&a, &b) as f64 / max_len as f64
}

fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut prev_diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cost = if ca == cb { 0 } else { 1 };
            let val = (prev_diag + cost).min(row[j] + 1).min(row[j + 1] + 1);
            prev_diag = row[j + 1];
            row[j + 1] = val;
        }
    }
    row[b.len()]
}

/// Parses a plain decimal number: optional sign, decimal point, exponent.
/// Rejects anything else (including `inf`/`nan` spellings and whitespace).
pub fn parse_number(s: &str) -> Option<f64> {
    let bytes = s.as_bytes();
    let mut i = 0;
    if matches!(bytes.first(), Some(b'+') | Some(b'-')) {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let int_len = i - int_start;
    let mut frac_len = 0;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        frac_len = i - frac_start;
    }
    if int_len == 0 && frac_len == 0 {
        return None;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        i += 1;
        if matches!(bytes.get(i), Some(b'+') | Some(b'-')) {
            i += 1;
        }
        let exp_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return None;
        }
    }
    if i != bytes.len() {
        return None;
    }
    s.parse().ok()
}

/// Parses an `xsd:date` or `xsd:dateTime` lexical form into seconds since
/// the Unix epoch (fractional seconds preserved, timezone offsets applied).
pub fn parse_date_time(s: &str) -> Option<f64> {
    let bytes = s.as_bytes();
    let mut i = 0;
    let negative_year = bytes.first() == Some(&b'-');
    if negative_year {
        i += 1;
    }
    let year_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i - year_start < 4 {
        return None;
    }
    let mut year: i64 = s[year_start..i].parse().ok()?;
    if negative_year {
        year = -year;
    }
    let month = parse_two_digits(bytes, &mut i, b'-')?;
    let day = parse_two_digits(bytes, &mut i, b'-')?;
    if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
        return None;
    }

    let mut seconds_of_day = 0.0;
    if i < bytes.len() && bytes[i] == b'T' {
        let hour = parse_two_digits(bytes, &mut i, b'T')?;
        let minute = parse_two_digits(bytes, &mut i, b':')?;
        let second = parse_two_digits(bytes, &mut i, b':')?;
        if hour > 23 || minute > 59 || second > 59 {
            return None;
        }
        let mut fraction = 0.0;
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            let frac_start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i == frac_start {
                return None;
            }
            fraction = format!("0.{}", &s[frac_start..i]).parse().unwrap_or(0.0);
        }
        seconds_of_day = hour as f64 * 3600.0 + minute as f64 * 60.0 + second as f64 + fraction;
    }

    let mut tz_offset_secs = 0.0;
    if i < bytes.len() {
        match bytes[i] {
            b'Z' => i += 1,
            b'+' | b'-' => {
                let marker = bytes[i];
                let sign = if marker == b'-' { -1.0 } else { 1.0 };
                let hour = parse_two_digits(bytes, &mut i, marker)?;
                let minute = parse_two_digits(bytes, &mut i, b':')?;
                if hour > 14 || minute > 59 {
                    return None;
                }
                tz_offset_secs = sign * (hour as f64 * 3600.0 + minute as f64 * 60.0);
            }
            _ => return None,
        }
    }
    if i != bytes.len() {
        return None;
    }

    let days = days_from_civil(year, month, day);
    Some(days as f64 * 86_400.0 + seconds_of_day - tz_offset_secs)
}

fn parse_two_digits(bytes: &[u8], i: &mut usize, separator: u8) -> Option<u32> {
    if bytes.get(*i) != Some(&separator) {
        return None;
    }
    *i += 1;
    if *i + 2 > bytes.len() || !bytes[*i].is_ascii_digit() || !bytes[*i + 1].is_ascii_digit() {
        return None;
    }
    let value = (bytes[*i] - b'0') as u32 * 10 + (bytes[*i + 1] - b'0') as u32;
    *i += 2;
    Some(value)
}

/// Days since 1970-01-01 for a proleptic Gregorian date.
fn days_from_civil(year: i64, month: u32, day: u32) -> i64 {
    let y = if month <= 2 { year - 1 } else { year };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let mp = if month > 2 { month - 3 } else { month + 9 } as i64;
    let doy = (153 * mp + 2) / 5 + day as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}
