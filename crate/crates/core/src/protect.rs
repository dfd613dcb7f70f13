//! Embedding hash values into a copy of a document.

use std::fs;
use std::path::{Path, PathBuf};

use crate::assess::strip_keys;
use crate::error::{Error, Result};
use crate::hashing::{compute_page_hashes, compute_root_hashes, HashHex, PageHashes, RootHashes};
use crate::pdf::{parse, write, PdfDocument, PdfObject};

pub const KEY_OBJECT: &str = "hashobject";
pub const KEY_ROOT: &str = "hashroot";
pub const KEY_LEAVES: &str = "hashleaves";
pub const KEY_INFO: &str = "hashinfo";

/// Keys written to every page dictionary.
pub const PAGE_KEYS: [&str; 3] = [KEY_OBJECT, KEY_ROOT, KEY_LEAVES];
/// Keys written to the Catalog.
pub const CATALOG_KEYS: [&str; 2] = [KEY_ROOT, KEY_INFO];

/// Hash values embedded by [`protect`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protection {
    pub page_hashes: Vec<PageHashes>,
    pub root_hashes: RootHashes,
}

#[derive(Debug, Clone)]
pub struct ProtectOutcome {
    pub input_path: PathBuf,
    pub output_path: PathBuf,
    pub pages_protected: usize,
    pub page_hashes: Vec<PageHashes>,
    pub root_hashes: RootHashes,
}

fn hex_string(h: &HashHex) -> PdfObject {
    PdfObject::string(h.as_str())
}

/// Returns a protected copy of `doc`. Page hashes are computed and stored
/// first because the root hash covers them. Stale keys from an earlier
/// protection are removed beforehand.
pub fn protect(doc: &PdfDocument) -> Result<(PdfDocument, Protection)> {
    let mut out = strip_keys(doc);
    let mut page_hashes = Vec::with_capacity(out.page_count());
    for index in 0..out.page_count() {
        let hashes = compute_page_hashes(&out, &out.page_view(index)?)?;
        let page = out.page_dict_mut(index)?;
        page.set(KEY_OBJECT, hex_string(&hashes.object));
        page.set(KEY_ROOT, hex_string(&hashes.root));
        page.set(
            KEY_LEAVES,
            PdfObject::Array(hashes.leaves.iter().map(hex_string).collect()),
        );
        page_hashes.push(hashes);
    }

    let root_hashes = compute_root_hashes(&out, &page_hashes)?;
    let catalog = out.catalog_mut();
    catalog.set(KEY_ROOT, hex_string(&root_hashes.root));
    catalog.set(KEY_INFO, hex_string(&root_hashes.info));

    Ok((
        out,
        Protection {
            page_hashes,
            root_hashes,
        },
    ))
}

/// `<dir>/<stem>_hash.pdf` next to the input.
pub fn default_output_path(input: &Path) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    input.with_file_name(format!("{stem}_hash.pdf"))
}

fn same_file(a: &Path, b: &Path) -> bool {
    if a == b {
        return true;
    }
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

/// Reads `input`, protects it and writes the result to `output` (or the
/// default `_hash.pdf` sibling). The input file is never modified.
pub fn protect_file(input: &Path, output: Option<&Path>) -> Result<ProtectOutcome> {
    let output_path = output.map_or_else(|| default_output_path(input), Path::to_path_buf);
    if same_file(input, &output_path) {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::AlreadyExists,
            format!("refusing to overwrite the input file {}", input.display()),
        )));
    }
    let bytes = fs::read(input)?;
    let doc = parse(&bytes)?;
    let (protected, protection) = protect(&doc)?;
    fs::write(&output_path, write(&protected)?)?;
    Ok(ProtectOutcome {
        input_path: input.to_path_buf(),
        output_path,
        pages_protected: protected.page_count(),
        page_hashes: protection.page_hashes,
        root_hashes: protection.root_hashes,
    })
}
