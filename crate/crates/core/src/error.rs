use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed PDF: {0}")]
    MalformedPdf(String),

    #[error("encrypted PDF documents are not supported")]
    Encrypted,

    #[error("unsupported stream filter: {0}")]
    UnsupportedFilter(String),

    #[error("object is not a dictionary")]
    NotADictionary,

    #[error("page index {index} out of range (document has {count} pages)")]
    PageIndexOutOfRange { index: usize, count: usize },

    #[error("cannot write PDF: {0}")]
    WriteError(String),

    #[error("a Merkle tree needs at least one leaf")]
    EmptyLeafSet,

    #[error("No hash values found in PDF")]
    HashesNotFound,

    #[error("invalid tamper target: {0}")]
    InvalidTarget(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn malformed(reason: impl Into<String>) -> Self {
        Error::MalformedPdf(reason.into())
    }
}
