// SPDX-License-Identifier: Apache-2.0

//! AST-context fingerprints and per-context operator statistics.
//!
//! The context of a mutated node is the multiset of pivots `(lca, u, v)` over
//! node pairs near it, reduced to kind hashes. Pivots are hashed to 32 bits,
//! summarized by k-MinHash, and the signature is split into LSH bands whose
//! bucket ids key survivability and productivity counters.

mod lsh;
mod minhash;
mod pivots;
mod stats;

use serde::{Deserialize, Serialize};

pub use lsh::{bucket_ids, collision_probability};
pub use minhash::{
    estimate_jaccard, exact_jaccard, fingerprint, ContextFingerprint, Fingerprinter, MinHasher,
};
pub use pivots::{hash_pivot, neighborhood, pivots, Pivot};
pub use stats::{
    read_log, ContextStats, IndexConfig, Outcome, StatsEvent, StatsStore, Verdict, INDEX_FORMAT,
};

use crate::syntax::{NodeId, SyntaxTree};

#[derive(Debug, thiserror::Error)]
pub enum ContextError {
    #[error("incompatible fingerprints: {0}")]
    Incompatible(String),
    #[error("invalid context config: {0}")]
    Config(String),
    #[error("index version mismatch: {0}")]
    Version(String),
    #[error("stats integrity: {0}")]
    Integrity(String),
    #[error("stats io: {0}")]
    Io(String),
}

/// Hashing and banding parameters. Changing any of them invalidates an index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextConfig {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub modulus: u64,
    pub k: usize,
    pub bands: usize,
    pub rows: usize,
    pub radius: usize,
    pub seed: u64,
    /// Weight of productivity against survivability in operator scores.
    pub alpha: f64,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig {
            a: 31,
            b: 37,
            c: 41,
            modulus: 2_147_483_647,
            k: 128,
            bands: 16,
            rows: 8,
            radius: 3,
            seed: 0x5EED_C0DE,
            alpha: 0.5,
        }
    }
}

impl ContextConfig {
    pub fn validate(&self) -> Result<(), ContextError> {
        let bad = |m: String| Err(ContextError::Config(m));
        if self.k == 0 || self.bands * self.rows != self.k {
            return bad(format!(
                "bands {} x rows {} must equal k {}",
                self.bands, self.rows, self.k
            ));
        }
        if self.modulus < 2 || self.modulus > u32::MAX as u64 {
            return bad(format!("modulus {} must fit in 32 bits", self.modulus));
        }
        if self.radius == 0 {
            return bad("radius must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} outside [0, 1]", self.alpha));
        }
        Ok(())
    }
}

/// Fingerprint of the context around `node`.
pub fn node_fingerprint(fp: &Fingerprinter, tree: &SyntaxTree, node: NodeId) -> ContextFingerprint {
    let ps = pivots(tree, node, fp.config().radius);
    fp.fingerprint(&ps, Some(tree.language))
}
