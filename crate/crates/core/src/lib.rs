//! Tamper evidence for PDF files.
//!
//! [`protect`] embeds a SHA-256 hash of every page object, a SHA3-256 Merkle
//! tree over each page's content stream (in 256-byte chunks) and two
//! document-level hashes into a copy of the document. [`assess`] recomputes
//! them and reports which pages, and which chunks of their content, changed.

pub mod assess;
pub mod canonical;
mod error;
pub mod hashing;
pub mod pdf;
pub mod protect;
pub mod tamperlab;

pub use assess::{assess, assess_file, AssessmentReport, PageFinding, Verdict};
pub use error::{Error, Result};
pub use hashing::{HashHex, MerkleTree, PageHashes, RootHashes};
pub use pdf::{parse, write, PdfDocument};
pub use protect::{protect, protect_file, ProtectOutcome};
