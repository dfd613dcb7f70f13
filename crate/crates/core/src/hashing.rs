//! SHA-256 object hashes and SHA3-256 Merkle trees over content chunks.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use sha3::Sha3_256;

use crate::canonical::{canonical_serialize, serialize_info, serialize_root, ExclusionSet};
use crate::error::{Error, Result};
use crate::pdf::{PageView, PdfDocument, PdfObject};

/// Content streams are split into chunks of this many bytes.
pub const CHUNK_SIZE: usize = 256;

/// A 32-byte digest as 64 lowercase hex characters.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HashHex(String);

impl HashHex {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        HashHex(hex::encode(bytes))
    }

    /// Accepts exactly 64 characters from `[0-9a-f]`.
    pub fn parse(s: &str) -> Option<Self> {
        let valid = s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        valid.then(|| HashHex(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        hex::decode_to_slice(&self.0, &mut out).expect("validated on construction");
        out
    }
}

impl fmt::Display for HashHex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for HashHex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HashHex({})", self.0)
    }
}

impl Serialize for HashHex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for HashHex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        HashHex::parse(&s)
            .ok_or_else(|| serde::de::Error::custom("expected 64 lowercase hex digits"))
    }
}

pub fn sha256(data: &[u8]) -> [u8; 32] {
    Sha256::digest(data).into()
}

pub fn sha3_256(data: &[u8]) -> [u8; 32] {
    Sha3_256::digest(data).into()
}

pub fn sha256_hex(data: &[u8]) -> HashHex {
    HashHex::from_bytes(sha256(data))
}

pub fn sha3_256_hex(data: &[u8]) -> HashHex {
    HashHex::from_bytes(sha3_256(data))
}

/// Splits content into consecutive 256-byte chunks. Empty content yields a
/// single empty chunk.
pub fn chunk_content(content: &[u8]) -> Vec<&[u8]> {
    if content.is_empty() {
        return vec![content];
    }
    content.chunks(CHUNK_SIZE).collect()
}

/// A binary SHA3-256 hash tree. Interior nodes hash the concatenation of
/// their children's raw 32-byte digests; a node without a sibling is paired
/// with itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    pub leaves: Vec<HashHex>,
    /// `levels[0]` is the leaf level, the last level holds only the root.
    pub levels: Vec<Vec<HashHex>>,
    pub root: HashHex,
}

fn parent(left: &[u8; 32], right: &[u8; 32]) -> [u8; 32] {
    let mut h = Sha3_256::new();
    h.update(left);
    h.update(right);
    h.finalize().into()
}

fn merkle_levels(leaves: Vec<[u8; 32]>) -> Vec<Vec<[u8; 32]>> {
    let mut levels = vec![leaves];
    while levels.last().expect("non-empty").len() > 1 {
        let next = levels
            .last()
            .expect("non-empty")
            .chunks(2)
            .map(|pair| parent(&pair[0], pair.get(1).unwrap_or(&pair[0])))
            .collect();
        levels.push(next);
    }
    levels
}

pub fn merkle_build<C: AsRef<[u8]>>(chunks: &[C]) -> Result<MerkleTree> {
    if chunks.is_empty() {
        return Err(Error::EmptyLeafSet);
    }
    let leaves = chunks.iter().map(|c| sha3_256(c.as_ref())).collect();
    let levels: Vec<Vec<HashHex>> = merkle_levels(leaves)
        .into_iter()
        .map(|level| level.into_iter().map(HashHex::from_bytes).collect())
        .collect();
    let root = levels.last().expect("non-empty")[0].clone();
    Ok(MerkleTree {
        leaves: levels[0].clone(),
        levels,
        root,
    })
}

/// Root recomputed from leaf hashes alone.
pub fn merkle_root_from_leaves(leaves: &[HashHex]) -> Result<HashHex> {
    if leaves.is_empty() {
        return Err(Error::EmptyLeafSet);
    }
    let levels = merkle_levels(leaves.iter().map(HashHex::to_bytes).collect());
    Ok(HashHex::from_bytes(levels.last().expect("non-empty")[0]))
}

/// Hashes stored on each page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageHashes {
    /// SHA-256 of the canonical page dictionary.
    pub object: HashHex,
    /// Merkle root over the content chunks.
    pub root: HashHex,
    pub leaves: Vec<HashHex>,
}

/// Hashes stored on the Catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootHashes {
    pub root: HashHex,
    pub info: HashHex,
}

pub fn compute_page_hashes(doc: &PdfDocument, page: &PageView) -> Result<PageHashes> {
    let tree = merkle_build(&chunk_content(&page.content))?;
    let dict = PdfObject::Dictionary(page.effective_dict());
    let preimage = canonical_serialize(doc, &dict, &ExclusionSet::page())?;
    Ok(PageHashes {
        object: sha256_hex(&preimage),
        root: tree.root,
        leaves: tree.leaves,
    })
}

/// Hashes of every page, in page order.
pub fn compute_all_page_hashes(doc: &PdfDocument) -> Result<Vec<PageHashes>> {
    (0..doc.page_count())
        .map(|i| compute_page_hashes(doc, &doc.page_view(i)?))
        .collect()
}

pub fn compute_root_hashes(doc: &PdfDocument, page_hashes: &[PageHashes]) -> Result<RootHashes> {
    Ok(RootHashes {
        root: sha256_hex(&serialize_root(doc, page_hashes)?),
        info: sha256_hex(&serialize_info(doc)?),
    })
}
