//! Helpers shared by the integration test targets.

use sha3::{Digest, Sha3_256};

fn h(data: &[u8]) -> [u8; 32] {
    Sha3_256::digest(data).into()
}

fn width(leaves: usize, level: u32) -> usize {
    (0..level).fold(leaves, |w, _| w.div_ceil(2))
}

/// Node `index` at `level` of the tree over `chunks`, computed top-down.
fn node(chunks: &[Vec<u8>], level: u32, index: usize) -> [u8; 32] {
    if level == 0 {
        return h(&chunks[index]);
    }
    let below = width(chunks.len(), level - 1);
    let left = node(chunks, level - 1, 2 * index);
    let right = if 2 * index + 1 < below {
        node(chunks, level - 1, 2 * index + 1)
    } else {
        left
    };
    h(&[left, right].concat())
}

/// Merkle root by brute-force recursion from the top of the tree.
pub fn merkle_oracle(chunks: &[Vec<u8>]) -> String {
    assert!(!chunks.is_empty());
    let mut level = 0;
    while width(chunks.len(), level) > 1 {
        level += 1;
    }
    hex::encode(node(chunks, level, 0))
}
