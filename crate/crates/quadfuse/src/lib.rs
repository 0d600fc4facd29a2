//! # quadfuse
//!
//! A data-fusion engine for RDF quads. Statements from multiple named
//! graphs are merged into a single clean view: identifier and schema
//! conflicts are collapsed through same-as links onto canonical URIs, data
//! conflicts are resolved per property by a configurable resolution
//! function, and every fused statement is annotated with the graphs it came
//! from and a quality score in [0, 1]. A dataset-quality reporter measures
//! completeness, conciseness and consistency before and after fusion.
//!
//! The typical flow mirrors the `quadfuse` CLI:
//!
//! ```
//! use quadfuse::{engine, canonical, nquads, model::Uri};
//!
//! let data = nquads::parse_quads(
//!     "<urn:s> <urn:p> \"1\" <urn:g1> .\n<urn:s> <urn:p> \"3\" <urn:g2> .".as_bytes(),
//!     &Uri::new("urn:default"),
//!     false,
//! ).unwrap();
//! let links = Vec::new();
//! let policy = engine::ResolutionPolicy::default();
//! let outcome = engine::fuse(
//!     data.quads, &[], links, &policy, &engine::FuseConfig::default(),
//! ).unwrap();
//! assert_eq!(outcome.resolved.len(), 2);
//! ```

pub mod app;
pub mod canonical;
pub mod engine;
pub mod functions;
pub mod metrics;
pub mod model;
pub mod nquads;
pub mod policy;
pub mod quality;
pub mod vocab;

pub use canonical::{build_canonical_mapping, extract_links, CanonicalMap, DisjointSet};
pub use engine::{
    fuse, Cardinality, ErrorStrategy, FuseConfig, FuseOutcome, ResolutionPolicy, ResolutionStrategy,
};
pub use functions::{lookup_function, FunctionDescriptor, FunctionError, FunctionKind};
pub use model::{ConflictCluster, Literal, Node, Quad, ResolvedQuad, Uri};
pub use quality::{
    aggregate_score, assess_quality, distance, AggregationMode, QualityError, QualityParams,
    ScoreLookup,
};
