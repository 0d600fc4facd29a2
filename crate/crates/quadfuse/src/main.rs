use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use quadfuse::app::{run, RunConfig};
use quadfuse::model::Uri;
use quadfuse::vocab;

/// Fuses RDF quads from multiple named graphs into a single clean view,
/// resolving identifier, schema and data conflicts, and annotating every
/// fused statement with its source graphs and a quality score.
#[derive(Debug, Parser)]
#[command(name = "quadfuse", version)]
struct Cli {
    /// Data file (N-Quads or N-Triples); repeatable
    #[arg(long = "data", value_name = "PATH")]
    data: Vec<PathBuf>,

    /// Same-as / equivalence link file; repeatable
    #[arg(long = "sameas", value_name = "PATH")]
    sameas: Vec<PathBuf>,

    /// Metadata file with graph scores and timestamps; repeatable
    #[arg(long = "metadata", value_name = "PATH")]
    metadata: Vec<PathBuf>,

    /// Resolution policy file
    #[arg(long = "policy", value_name = "PATH")]
    policy: Option<PathBuf>,

    /// Annotated N-Quads output file
    #[arg(long = "output", value_name = "PATH")]
    output: PathBuf,

    /// Write `member owl:sameAs canonical` triples here
    #[arg(long = "export-canonical", value_name = "PATH")]
    export_canonical: Option<PathBuf>,

    /// Write a before/after quality report here
    #[arg(long = "report", value_name = "PATH")]
    report: Option<PathBuf>,

    /// Base IRI for per-file default graphs (file URI when unset)
    #[arg(long = "default-graph-base", value_name = "IRI")]
    default_graph_base: Option<String>,

    /// Prefix for minted result graph names
    #[arg(long = "result-graph-prefix", value_name = "IRI", default_value = vocab::DEFAULT_RESULT_PREFIX)]
    result_graph_prefix: String,

    /// Metadata predicate carrying graph quality scores
    #[arg(long = "score-predicate", value_name = "IRI", default_value = vocab::DEFAULT_SCORE_PREDICATE)]
    score_predicate: String,

    /// Score assumed for graphs without metadata
    #[arg(long = "default-score", value_name = "REAL", default_value_t = 1.0)]
    default_score: f64,

    /// Namespace prefix preferred for canonical URIs; repeatable, ordered
    #[arg(long = "prefer-namespace", value_name = "IRI-PREFIX")]
    prefer_namespace: Vec<String>,

    /// Predicate treated as many-valued in the quality report; repeatable
    #[arg(long = "many-valued", value_name = "IRI")]
    many_valued: Vec<String>,

    /// Abort on the first malformed input line
    #[arg(long = "strict")]
    strict: bool,

    /// Worker threads for cluster resolution
    #[arg(long = "workers", value_name = "N", default_value_t = 1)]
    workers: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = RunConfig::new(cli.output);
    config.data_paths = cli.data;
    config.sameas_paths = cli.sameas;
    config.metadata_paths = cli.metadata;
    config.policy_path = cli.policy;
    config.canonical_export_path = cli.export_canonical;
    config.report_path = cli.report;
    config.default_graph_base = cli.default_graph_base;
    config.result_graph_prefix = cli.result_graph_prefix;
    config.score_predicate = Uri::new(cli.score_predicate);
    config.default_source_score = cli.default_score;
    config.preferred_namespaces = cli.prefer_namespace;
    config.many_valued = cli.many_valued.into_iter().map(Uri::new).collect();
    config.strict_parse = cli.strict;
    config.workers = cli.workers;

    match run(&config, &mut std::io::stderr()) {
        Ok(_) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            let mut source = std::error::Error::source(&error);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(error.exit_code() as u8)
        }
    }
}
