//! Annotated proof corpora: source parsing, manifests, step-skipped
//! incorrect proofs, and premise dictionaries.

mod annotated;
mod dictionary;
mod manifest;
mod skip;

use thiserror::Error;

use crate::proof_model::ModelError;

pub use annotated::{parse_annotated_file, serialize_proof, ParsedTheorem, STATEMENT_PREFIX};
pub use dictionary::{
    build_dictionaries, header_binders, used_names, Descriptions, Dictionaries, MissingDescription,
    PremiseDictionary, PremiseKind, UsedNames, MISSING_DESCRIPTION,
};
pub use manifest::{write_corpus, Corpus, ManifestEntry, PeanoBenchFile};
pub use skip::{deletion_window, generate_incorrect_set, skip_step, SkipReport};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: alignment error: {reason}")]
    Alignment { line: usize, reason: String },
    #[error("line {line}: header error: {reason}")]
    Header { line: usize, reason: String },
    #[error("{0}: one-step proofs cannot lose a step")]
    TooShort(String),
    #[error("{0}: only correct proofs can be step-skipped")]
    NotCorrect(String),
    #[error("io: {0}")]
    Io(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
