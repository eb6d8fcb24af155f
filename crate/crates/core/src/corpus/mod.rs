//! Entity-centric document model: parsing, serialization and validation.

pub mod dwie;
mod io;
mod model;
mod validate;
mod vocab;

pub use io::{
    check_all, parse_corpus, parse_jsonl, parse_jsonl_as, read_corpus, to_jsonl, write_corpus,
    CorpusFormat,
};
pub use model::{Document, EntityCluster, Link, Mention, RelationTriple, Split};
pub use validate::{span_index, validate_document, Code, Finding, ValidationReport};
pub use vocab::Vocabulary;
