//! Well-known IRIs and configurable defaults.

/// Identity link predicate for resources.
pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";

/// Equivalence link predicate usable where `owl:sameAs` would be too strong
/// (e.g. mapping two properties onto one target property).
pub const ODCS_EQUIVALENT: &str = "http://opendata.cz/infrastructure/odcleanstore/equivalent";

/// Default predicate carrying per-graph quality scores in metadata.
pub const DEFAULT_SCORE_PREDICATE: &str = "http://opendata.cz/infrastructure/odcleanstore/score";

/// Default predicate carrying per-graph insertion timestamps in metadata.
pub const DEFAULT_TIMESTAMP_PREDICATE: &str = "urn:quadfuse:insertedAt";

/// Default annotation predicate linking a result graph to a source graph.
pub const DEFAULT_SOURCE_PREDICATE: &str = "urn:quadfuse:sourceGraph";

/// Default annotation predicate linking a result graph to its quality score.
pub const DEFAULT_QUALITY_PREDICATE: &str = "urn:quadfuse:quality";

/// Default prefix for minted result graph names.
pub const DEFAULT_RESULT_PREFIX: &str = "urn:quadfuse:result:";

/// Default graph name holding the provenance/quality annotation quads.
pub const DEFAULT_ANNOTATION_GRAPH: &str = "urn:quadfuse:annotation";

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DATE: &str = "http://www.w3.org/2001/XMLSchema#date";
pub const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
