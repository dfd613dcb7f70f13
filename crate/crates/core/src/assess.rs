//! Checking a protected document for alterations.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::{
    compute_all_page_hashes, compute_root_hashes, HashHex, PageHashes, RootHashes,
};
use crate::pdf::{parse, Dictionary, PdfDocument, PdfObject};
use crate::protect::{CATALOG_KEYS, KEY_INFO, KEY_LEAVES, KEY_OBJECT, KEY_ROOT, PAGE_KEYS};

pub const MSG_CLEAN: &str = "Hashes are equal, no tampering detected";
pub const MSG_TAMPERED: &str = "Hashes are not equal, alterations detected:";
pub const MSG_ROOT: &str = "Root Hashes are not equal, root object has been altered";
pub const MSG_INFO: &str = "Info Hashes are not equal, metadata has changed";
pub const MSG_NO_HASHES: &str = "No hash values found in PDF";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Clean,
    Tampered,
    Unprotected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageFinding {
    /// 1-based.
    #[serde(rename = "page")]
    pub page_number: usize,
    pub object_mismatch: bool,
    pub content_mismatch: bool,
    /// 0-based indices of 256-byte content chunks whose leaf hashes differ.
    pub altered_chunks: Vec<usize>,
    pub leaf_count_changed: bool,
}

/// The stored and recomputed values an assessment compared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashComparison {
    pub stored_root: RootHashes,
    pub computed_root: RootHashes,
    pub stored_pages: Vec<PageHashes>,
    pub computed_pages: Vec<PageHashes>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub verdict: Verdict,
    pub root_mismatch: bool,
    pub info_mismatch: bool,
    #[serde(rename = "pages")]
    pub page_findings: Vec<PageFinding>,
    pub messages: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hashes: Option<HashComparison>,
}

impl AssessmentReport {
    fn unprotected() -> Self {
        Self {
            verdict: Verdict::Unprotected,
            root_mismatch: false,
            info_mismatch: false,
            page_findings: Vec::new(),
            messages: vec![MSG_NO_HASHES.to_string()],
            hashes: None,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.verdict == Verdict::Clean
    }

    pub fn finding(&self, page_number: usize) -> Option<&PageFinding> {
        self.page_findings
            .iter()
            .find(|f| f.page_number == page_number)
    }
}

fn read_hash(doc: &PdfDocument, value: Option<&PdfObject>) -> Option<HashHex> {
    let bytes = doc.resolve(value?).as_string()?;
    HashHex::parse(std::str::from_utf8(bytes).ok()?)
}

fn read_page_hashes(doc: &PdfDocument, page: &Dictionary) -> Option<PageHashes> {
    let object = read_hash(doc, page.get(KEY_OBJECT))?;
    let root = read_hash(doc, page.get(KEY_ROOT))?;
    let leaves = doc
        .resolve(page.get(KEY_LEAVES)?)
        .as_array()?
        .iter()
        .map(|leaf| read_hash(doc, Some(leaf)))
        .collect::<Option<Vec<_>>>()
        .filter(|l| !l.is_empty())?;
    Some(PageHashes {
        object,
        root,
        leaves,
    })
}

/// Reads the embedded hashes. Missing or malformed values on the Catalog or
/// on any page yield [`Error::HashesNotFound`].
pub fn extract_stored(doc: &PdfDocument) -> Result<(RootHashes, Vec<PageHashes>)> {
    let catalog = doc.catalog();
    let root = RootHashes {
        root: read_hash(doc, catalog.get(KEY_ROOT)).ok_or(Error::HashesNotFound)?,
        info: read_hash(doc, catalog.get(KEY_INFO)).ok_or(Error::HashesNotFound)?,
    };
    let pages = (0..doc.page_count())
        .map(|i| {
            let page = doc.page_dict(i).map_err(|_| Error::HashesNotFound)?;
            read_page_hashes(doc, page).ok_or(Error::HashesNotFound)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((root, pages))
}

/// A copy of `doc` with every embedded hash key removed.
pub fn strip_keys(doc: &PdfDocument) -> PdfDocument {
    let mut out = doc.clone();
    let catalog = out.catalog_mut();
    for key in CATALOG_KEYS {
        catalog.remove(key);
    }
    for index in 0..out.page_count() {
        if let Ok(page) = out.page_dict_mut(index) {
            for key in PAGE_KEYS {
                page.remove(key);
            }
        }
    }
    out
}

/// Indices where two leaf lists differ: mismatches over the common prefix
/// plus every index past it. The flag is set when the lengths differ.
pub fn localize(stored: &[HashHex], computed: &[HashHex]) -> (Vec<usize>, bool) {
    let common = stored.len().min(computed.len());
    let longer = stored.len().max(computed.len());
    let altered = (0..common)
        .filter(|&i| stored[i] != computed[i])
        .chain(common..longer)
        .collect();
    (altered, stored.len() != computed.len())
}

/// Recomputes every hash family and compares it with what was embedded.
///
/// The recomputed root hash uses the *stored* page hash records, so a page
/// edit shows up on that page without also flagging the Catalog.
pub fn assess(doc: &PdfDocument) -> Result<AssessmentReport> {
    let (stored_root, stored_pages) = match extract_stored(doc) {
        Ok(v) => v,
        Err(Error::HashesNotFound) => return Ok(AssessmentReport::unprotected()),
        Err(e) => return Err(e),
    };
    let stripped = strip_keys(doc);
    let computed_pages = compute_all_page_hashes(&stripped)?;
    let computed_root = compute_root_hashes(&stripped, &stored_pages)?;

    let root_mismatch = stored_root.root != computed_root.root;
    let info_mismatch = stored_root.info != computed_root.info;
    let mut page_findings = Vec::new();
    for (i, (stored, computed)) in stored_pages.iter().zip(&computed_pages).enumerate() {
        let (altered_chunks, leaf_count_changed) = localize(&stored.leaves, &computed.leaves);
        let finding = PageFinding {
            page_number: i + 1,
            object_mismatch: stored.object != computed.object,
            content_mismatch: stored.root != computed.root,
            altered_chunks,
            leaf_count_changed,
        };
        if finding.object_mismatch || finding.content_mismatch || !finding.altered_chunks.is_empty()
        {
            page_findings.push(finding);
        }
    }

    let clean = !root_mismatch && !info_mismatch && page_findings.is_empty();
    let mut messages = Vec::new();
    if clean {
        messages.push(MSG_CLEAN.to_string());
    } else {
        messages.push(MSG_TAMPERED.to_string());
        if root_mismatch {
            messages.push(MSG_ROOT.to_string());
        }
        if info_mismatch {
            messages.push(MSG_INFO.to_string());
        }
        for f in &page_findings {
            if f.object_mismatch {
                messages.push(format!(
                    "Object Hashes are not equal for page: {}",
                    f.page_number
                ));
            }
            if f.content_mismatch {
                messages.push(format!(
                    "Root Hashes are not equal for page: {}",
                    f.page_number
                ));
            }
            for k in &f.altered_chunks {
                messages.push(format!(
                    "Changes detected in the {k} th 256 bytes of the content stream"
                ));
            }
        }
    }

    Ok(AssessmentReport {
        verdict: if clean {
            Verdict::Clean
        } else {
            Verdict::Tampered
        },
        root_mismatch,
        info_mismatch,
        page_findings,
        messages,
        hashes: Some(HashComparison {
            stored_root,
            computed_root,
            stored_pages,
            computed_pages,
        }),
    })
}

/// Parses the file (final incremental state) and assesses it.
pub fn assess_file(path: &Path) -> Result<AssessmentReport> {
    let bytes = fs::read(path)?;
    assess(&parse(&bytes)?)
}
