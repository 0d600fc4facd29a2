//! End-to-end orchestration behind the CLI: load inputs, fuse, write the
//! annotated output, and optionally export the canonical map and a
//! before/after quality report.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::canonical::{default_link_predicates, extract_links};
use crate::engine::{fuse, Cardinality, FuseConfig, FuseOutcome, ResolutionPolicy};
use crate::functions::FunctionError;
use crate::metrics::{compute_stats, render_report, QualityReport};
use crate::model::{Quad, Uri};
use crate::nquads::{
    parse_quads, serialize_resolved, serialize_triples, AnnotationConfig, NquadsError,
};
use crate::policy::{parse_policy, PolicyError};
use crate::vocab;

/// Everything one invocation needs. Field defaults mirror the CLI flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data_paths: Vec<PathBuf>,
    pub sameas_paths: Vec<PathBuf>,
    pub metadata_paths: Vec<PathBuf>,
    pub policy_path: Option<PathBuf>,
    pub output_path: PathBuf,
    pub canonical_export_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    /// Base IRI for per-file default graphs; `file://<path>` when unset.
    pub default_graph_base: Option<String>,
    pub result_graph_prefix: String,
    pub score_predicate: Uri,
    pub source_predicate: Uri,
    pub quality_predicate: Uri,
    pub timestamp_predicate: Uri,
    pub strict_parse: bool,
    pub workers: usize,
    pub default_source_score: f64,
    pub preferred_namespaces: Vec<String>,
    /// Extra many-valued predicates beyond the policy's MANYVALUED entries.
    pub many_valued: Vec<Uri>,
}

impl RunConfig {
    pub fn new(output_path: impl Into<PathBuf>) -> Self {
        RunConfig {
            data_paths: Vec::new(),
            sameas_paths: Vec::new(),
            metadata_paths: Vec::new(),
            policy_path: None,
            output_path: output_path.into(),
            canonical_export_path: None,
            report_path: None,
            default_graph_base: None,
            result_graph_prefix: vocab::DEFAULT_RESULT_PREFIX.to_owned(),
            score_predicate: Uri::new(vocab::DEFAULT_SCORE_PREDICATE),
            source_predicate: Uri::new(vocab::DEFAULT_SOURCE_PREDICATE),
            quality_predicate: Uri::new(vocab::DEFAULT_QUALITY_PREDICATE),
            timestamp_predicate: Uri::new(vocab::DEFAULT_TIMESTAMP_PREDICATE),
            strict_parse: false,
            workers: 1,
            default_source_score: 1.0,
            preferred_namespaces: Vec::new(),
            many_valued: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Policy {
        path: PathBuf,
        #[source]
        source: PolicyError,
    },
    #[error("{0}")]
    Fusion(#[from] FunctionError),
    #[error("{path}: {source}")]
    StrictParse { path: PathBuf, source: NquadsError },
}

impl AppError {
    /// Process exit code: 2 bad arguments, 3 I/O, 4 policy problems,
    /// 5 strict-parse failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Io { .. } => 3,
            AppError::Policy { .. } | AppError::Fusion(_) => 4,
            AppError::StrictParse { .. } => 5,
        }
    }
}

/// Counters reported on stderr after a run.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub data_quads: usize,
    pub resolved_quads: usize,
    pub clusters: usize,
    pub parse_issues: usize,
    pub skipped_links: usize,
    pub score_warnings: usize,
    pub metadata_fallbacks: usize,
}

/// Runs the whole pipeline per the configuration. Parse warnings and the
/// run summary go to `stderr`; outputs go to the configured files.
pub fn run(config: &RunConfig, stderr: &mut impl Write) -> Result<RunSummary, AppError> {
    if config.workers < 1 {
        return Err(AppError::Usage("--workers must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&config.default_source_score) {
        return Err(AppError::Usage("--default-score must lie in [0, 1]".into()));
    }

    let policy = match &config.policy_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| AppError::Io {
                path: path.clone(),
                source,
            })?;
            parse_policy(&text).map_err(|source| AppError::Policy {
                path: path.clone(),
                source,
            })?
        }
        None => ResolutionPolicy::default(),
    };

    let mut summary = RunSummary::default();

    let link_quads = load_files(&config.sameas_paths, config, &mut summary, stderr)?;
    let extracted = extract_links(&link_quads.quads, &default_link_predicates());
    summary.skipped_links = extracted.skipped;

    let metadata = load_files(&config.metadata_paths, config, &mut summary, stderr)?;
    let data = load_files(&config.data_paths, config, &mut summary, stderr)?;
    summary.data_quads = data.quads.len();

    // the report needs the pre-fusion quads again after fuse() consumed them
    let report_inputs = config
        .report_path
        .as_ref()
        .map(|_| (data.quads.clone(), data.per_file.clone()));

    let fuse_config = FuseConfig {
        preferred_namespaces: config.preferred_namespaces.clone(),
        score_predicate: config.score_predicate.clone(),
        timestamp_predicate: config.timestamp_predicate.clone(),
        default_source_score: config.default_source_score,
        workers: config.workers,
        ..FuseConfig::default()
    };
    let outcome = fuse(
        data.quads,
        &metadata.quads,
        extracted.links,
        &policy,
        &fuse_config,
    )?;
    summary.resolved_quads = outcome.resolved.len();
    summary.clusters = outcome.cluster_count;
    summary.score_warnings = outcome.score_warnings.len();
    summary.metadata_fallbacks = outcome.metadata_fallbacks;
    for warning in &outcome.score_warnings {
        let _ = writeln!(stderr, "warning: {warning}");
    }

    write_output(config, &outcome)?;
    if let Some(path) = &config.canonical_export_path {
        export_canonical(path, &outcome)?;
    }
    if let Some(path) = &config.report_path {
        let (all_quads, per_file) = report_inputs.expect("retained when a report is requested");
        write_report(path, &all_quads, &per_file, &outcome, &policy, config)?;
    }

    let _ = writeln!(
        stderr,
        "fused {} quads in {} clusters into {} resolved quads \
         ({} parse issues, {} skipped links, {} metadata fallbacks)",
        summary.data_quads,
        summary.clusters,
        summary.resolved_quads,
        summary.parse_issues,
        summary.skipped_links,
        summary.metadata_fallbacks,
    );
    Ok(summary)
}

struct LoadedFiles {
    quads: Vec<Quad>,
    /// `(label, range)` of each file's quads within `quads`.
    per_file: Vec<(String, std::ops::Range<usize>)>,
}

fn load_files(
    paths: &[PathBuf],
    config: &RunConfig,
    summary: &mut RunSummary,
    stderr: &mut impl Write,
) -> Result<LoadedFiles, AppError> {
    let mut quads = Vec::new();
    let mut per_file = Vec::new();
    for path in paths {
        let file = File::open(path).map_err(|source| AppError::Io {
            path: path.clone(),
            source,
        })?;
        let default_graph = default_graph_for(path, config);
        let start = quads.len();
        let outcome = parse_quads(BufReader::new(file), &default_graph, config.strict_parse)
            .map_err(|source| match source {
                NquadsError::Io(io) => AppError::Io {
                    path: path.clone(),
                    source: io,
                },
                strict => AppError::StrictParse {
                    path: path.clone(),
                    source: strict,
                },
            })?;
        summary.parse_issues += outcome.issues.len();
        for issue in &outcome.issues {
            let _ = writeln!(
                stderr,
                "{}:{}: {}",
                path.display(),
                issue.line,
                issue.message
            );
        }
        quads.extend(outcome.quads);
        per_file.push((path.display().to_string(), start..quads.len()));
    }
    Ok(LoadedFiles { quads, per_file })
}

/// Default graph for triples of `path`: `<base><file-name>` when a base is
/// configured, the file URI otherwise.
fn default_graph_for(path: &Path, config: &RunConfig) -> Uri {
    match &config.default_graph_base {
        Some(base) => {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy())
                .unwrap_or_default();
            Uri::new(format!("{base}{name}"))
        }
        None => {
            let absolute = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
            let encoded: String = absolute
                .display()
                .to_string()
                .chars()
                .map(|c| {
                    if c.is_whitespace() {
                        "%20".to_owned()
                    } else {
                        c.to_string()
                    }
                })
                .collect();
            Uri::new(format!("file://{encoded}"))
        }
    }
}

fn write_output(config: &RunConfig, outcome: &FuseOutcome) -> Result<(), AppError> {
    let annotation = AnnotationConfig {
        result_prefix: config.result_graph_prefix.clone(),
        source_predicate: config.source_predicate.clone(),
        quality_predicate: config.quality_predicate.clone(),
        annotation_graph: Uri::new(vocab::DEFAULT_ANNOTATION_GRAPH),
    };
    let io_err = |source| AppError::Io {
        path: config.output_path.clone(),
        source,
    };
    let file = File::create(&config.output_path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    serialize_resolved(&outcome.resolved, &mut writer, &annotation).map_err(io_err)?;
    writer.flush().map_err(io_err)
}

fn export_canonical(path: &Path, outcome: &FuseOutcome) -> Result<(), AppError> {
    let io_err = |source| AppError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    let same_as = Uri::new(vocab::OWL_SAME_AS);
    let pairs = outcome.canonical.rewritten_pairs();
    serialize_triples(pairs.iter().map(|(u, c)| (*u, &same_as, *c)), &mut writer)
        .map_err(io_err)?;
    writer.flush().map_err(io_err)
}

/// One section per input file, one for all sources combined, one for the
/// fused output; completeness is measured against the combined sources.
fn write_report(
    path: &Path,
    all_quads: &[Quad],
    per_file: &[(String, std::ops::Range<usize>)],
    outcome: &FuseOutcome,
    policy: &ResolutionPolicy,
    config: &RunConfig,
) -> Result<(), AppError> {
    let mut many_valued: Vec<Uri> = policy
        .per_property
        .iter()
        .filter(|(_, s)| s.cardinality == Cardinality::ManyValued)
        .map(|(p, _)| p.clone())
        .collect();
    many_valued.extend(config.many_valued.iter().cloned());

    let universe = compute_stats(all_quads, &outcome.canonical, &many_valued);
    let mut sections = Vec::new();
    if per_file.len() > 1 {
        for (label, range) in per_file {
            let stats = compute_stats(&all_quads[range.clone()], &outcome.canonical, &many_valued);
            sections.push((label.clone(), QualityReport::compute(&stats, &universe)));
        }
    }
    sections.push((
        "all".to_owned(),
        QualityReport::compute(&universe, &universe),
    ));

    let fused_quads: Vec<Quad> = outcome
        .resolved
        .iter()
        .enumerate()
        .map(|(i, r)| Quad {
            subject: r.quad.subject.clone(),
            predicate: r.quad.predicate.clone(),
            object: r.quad.object.clone(),
            graph: Uri::new(format!("{}{}", config.result_graph_prefix, i + 1)),
        })
        .collect();
    let fused_stats = compute_stats(&fused_quads, &outcome.canonical, &many_valued);
    sections.push((
        "fused".to_owned(),
        QualityReport::compute(&fused_stats, &universe),
    ));

    let io_err = |source| AppError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = File::create(path).map_err(io_err)?;
    file.write_all(render_report(&sections).as_bytes())
        .map_err(io_err)
}
