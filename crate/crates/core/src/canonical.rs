//! Deterministic byte encoding of PDF objects for hashing.
//!
//! The grammar is independent of key order, object numbering, string syntax
//! (literal or hex) and stream compression:
//!
//! | object     | encoding                                                     |
//! |------------|--------------------------------------------------------------|
//! | null       | `null`                                                       |
//! | boolean    | `true` / `false`                                             |
//! | integer    | decimal ASCII                                                |
//! | real       | shortest decimal, no exponent, no trailing zeros, `0` for 0  |
//! | string     | `(` raw bytes with `\`, `(`, `)` backslash-escaped `)`       |
//! | name       | `/` raw bytes                                                |
//! | array      | `[` elements joined by one space `]`                         |
//! | dictionary | `<<` `/Key value` sorted by key bytes, joined by one space `>>` |
//! | stream     | dictionary (without Length/Filter/DecodeParms), then `stream` and the SHA-256 hex of the decoded payload |
//! | reference  | encoding of the target; `ref:cycle` if already on the resolution path; `null` if dangling |
//!
//! Exclusions apply to the top-level dictionary only.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::hashing::{sha256_hex, PageHashes};
use crate::pdf::{decode_stream, format_real, Dictionary, ObjectId, PdfDocument, PdfObject};

/// Keys dropped from a page dictionary before hashing.
pub const PAGE_EXCLUSIONS: &[&str] = &[
    "hashobject",
    "hashroot",
    "hashleaves",
    "Parent",
    "Annots",
    "B",
    "StructParents",
    "Tabs",
    "Group",
    "LastModified",
    "PieceInfo",
    "Metadata",
    "Contents",
];

/// Keys dropped from the Catalog before hashing. `Pages` is covered by the
/// per-page hash records appended to the root preimage instead.
pub const ROOT_EXCLUSIONS: &[&str] = &[
    "hashroot",
    "hashinfo",
    "Metadata",
    "StructTreeRoot",
    "Outlines",
    "OpenAction",
    "AcroForm",
    "Names",
    "Pages",
];

/// Stream dictionary entries that describe the encoding, not the data.
const STREAM_ENCODING_KEYS: &[&[u8]] = &[b"Length", b"Filter", b"DecodeParms", b"DL"];

pub const NO_INFO: &[u8] = b"noinfo::";
pub const CYCLE_TOKEN: &[u8] = b"ref:cycle";

/// Top-level dictionary keys to omit from serialization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExclusionSet {
    keys: BTreeSet<Vec<u8>>,
}

impl ExclusionSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn page() -> Self {
        PAGE_EXCLUSIONS.iter().copied().collect()
    }

    pub fn root() -> Self {
        ROOT_EXCLUSIONS.iter().copied().collect()
    }

    pub fn insert(&mut self, key: &str) {
        self.keys.insert(key.as_bytes().to_vec());
    }

    pub fn contains(&self, key: &[u8]) -> bool {
        self.keys.contains(key)
    }
}

impl<'a> FromIterator<&'a str> for ExclusionSet {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        Self {
            keys: iter.into_iter().map(|k| k.as_bytes().to_vec()).collect(),
        }
    }
}

struct Encoder<'a> {
    doc: &'a PdfDocument,
    path: Vec<ObjectId>,
    out: Vec<u8>,
}

impl Encoder<'_> {
    fn object(&mut self, obj: &PdfObject) -> Result<()> {
        match obj {
            PdfObject::Null => self.out.extend_from_slice(b"null"),
            PdfObject::Boolean(b) => {
                self.out
                    .extend_from_slice(if *b { b"true" } else { b"false" })
            }
            PdfObject::Integer(i) => self.out.extend_from_slice(i.to_string().as_bytes()),
            PdfObject::Real(r) => self.out.extend_from_slice(format_real(*r).as_bytes()),
            PdfObject::String(s) => {
                self.out.push(b'(');
                for &b in s {
                    if matches!(b, b'\\' | b'(' | b')') {
                        self.out.push(b'\\');
                    }
                    self.out.push(b);
                }
                self.out.push(b')');
            }
            PdfObject::Name(n) => {
                self.out.push(b'/');
                self.out.extend_from_slice(n.as_bytes());
            }
            PdfObject::Array(items) => {
                self.out.push(b'[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        self.out.push(b' ');
                    }
                    self.object(item)?;
                }
                self.out.push(b']');
            }
            PdfObject::Dictionary(d) => self.dict(d, |_| false)?,
            PdfObject::Stream(s) => {
                self.dict(&s.dict, |k| STREAM_ENCODING_KEYS.contains(&k))?;
                let payload = decode_stream(s)?;
                self.out.extend_from_slice(b"stream");
                self.out
                    .extend_from_slice(sha256_hex(&payload).as_str().as_bytes());
            }
            PdfObject::Reference(id) => {
                if self.path.contains(id) {
                    self.out.extend_from_slice(CYCLE_TOKEN);
                    return Ok(());
                }
                let target = self.doc.resolve(obj);
                self.path.push(*id);
                let result = self.object(target);
                self.path.pop();
                result?;
            }
        }
        Ok(())
    }

    fn dict(&mut self, d: &Dictionary, skip: impl Fn(&[u8]) -> bool) -> Result<()> {
        let mut entries: Vec<_> = d.iter().filter(|(k, _)| !skip(k.as_bytes())).collect();
        entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
        self.out.extend_from_slice(b"<<");
        for (i, (k, v)) in entries.into_iter().enumerate() {
            if i > 0 {
                self.out.push(b' ');
            }
            self.out.push(b'/');
            self.out.extend_from_slice(k.as_bytes());
            self.out.push(b' ');
            self.object(v)?;
        }
        self.out.extend_from_slice(b">>");
        Ok(())
    }
}

/// Canonical bytes of a dictionary (or a reference to one) with the given
/// top-level keys left out.
pub fn canonical_serialize(
    doc: &PdfDocument,
    obj: &PdfObject,
    exclude: &ExclusionSet,
) -> Result<Vec<u8>> {
    let mut enc = Encoder {
        doc,
        path: Vec::new(),
        out: Vec::new(),
    };
    if let PdfObject::Reference(id) = obj {
        enc.path.push(*id);
    }
    let PdfObject::Dictionary(dict) = doc.resolve(obj) else {
        return Err(Error::NotADictionary);
    };
    enc.dict(dict, |k| exclude.contains(k))?;
    Ok(enc.out)
}

/// One `page:<object>:<root>:<leaf>,<leaf>,...` record.
pub fn page_record(hashes: &PageHashes) -> String {
    let leaves: Vec<&str> = hashes.leaves.iter().map(|h| h.as_str()).collect();
    format!(
        "page:{}:{}:{}",
        hashes.object.as_str(),
        hashes.root.as_str(),
        leaves.join(",")
    )
}

/// Preimage of the document-level root hash: the Catalog followed by one
/// record per page, in page order.
pub fn serialize_root(doc: &PdfDocument, page_hashes: &[PageHashes]) -> Result<Vec<u8>> {
    let mut out = canonical_serialize(
        doc,
        &PdfObject::Reference(doc.root_ref),
        &ExclusionSet::root(),
    )?;
    for hashes in page_hashes {
        out.extend_from_slice(page_record(hashes).as_bytes());
    }
    Ok(out)
}

/// Preimage of the metadata hash.
pub fn serialize_info(doc: &PdfDocument) -> Result<Vec<u8>> {
    match doc.info_ref {
        Some(id) if doc.info().is_some() => {
            canonical_serialize(doc, &PdfObject::Reference(id), &ExclusionSet::empty())
        }
        _ => Ok(NO_INFO.to_vec()),
    }
}
