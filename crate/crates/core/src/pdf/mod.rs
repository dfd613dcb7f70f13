//! Reading and writing the PDF object graph.
//!
//! The reader understands classic xref tables, cross-reference streams,
//! object streams and `/Prev` chains of incremental updates; the resulting
//! [`PdfDocument`] holds the last definition of every object. The writer
//! always emits a full rewrite with a single classic xref table.

mod document;
mod filter;
mod lexer;
mod object;
#[cfg(test)]
pub(crate) mod testutil;
mod writer;
mod xref;

pub use document::{graph_equivalent, parse, PageView, PdfDocument};
pub use filter::{decode_stream, flate_encode};
pub use object::{Dictionary, Name, ObjectId, PdfObject, Stream};
pub(crate) use writer::format_real;
pub use writer::{write, write_incremental};
