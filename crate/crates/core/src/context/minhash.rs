// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pivots::{hash_pivot, Pivot};
use super::{ContextConfig, ContextError};
use crate::syntax::Language;

/// k-MinHash signature of a pivot multiset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContextFingerprint {
    pub signature: Vec<u32>,
    pub radius: u32,
    /// Seed of the permutation family.
    pub seed: u64,
    /// Kind hashes are per language, so buckets are too.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<Language>,
}

impl ContextFingerprint {
    pub fn k(&self) -> usize {
        self.signature.len()
    }

    /// True for the signature of an empty multiset.
    pub fn is_sentinel(&self) -> bool {
        self.signature.iter().all(|v| *v == u32::MAX)
    }
}

/// A family of k affine permutations `x -> (a*x + b) mod K` over `[0, K)`.
#[derive(Debug, Clone)]
pub struct MinHasher {
    coefficients: Vec<(u64, u64)>,
    modulus: u64,
    seed: u64,
}

impl MinHasher {
    pub fn new(k: usize, seed: u64, modulus: u64) -> MinHasher {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = (0..k)
            .map(|_| (rng.random_range(1..modulus), rng.random_range(0..modulus)))
            .collect();
        MinHasher {
            coefficients,
            modulus,
            seed,
        }
    }

    pub fn k(&self) -> usize {
        self.coefficients.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Signature of a multiset of values below the modulus. Repeated values
    /// are expanded into distinct per-occurrence elements, so the estimator
    /// tracks multiset rather than set similarity.
    pub fn sign(&self, values: &[u32]) -> Vec<u32> {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for v in values {
            *counts.entry(*v).or_default() += 1;
        }
        let mut elements = Vec::with_capacity(values.len());
        for (v, n) in counts {
            elements.push(v as u64 % self.modulus);
            for occurrence in 1..n {
                elements.push(occurrence_element(v, occurrence) % self.modulus);
            }
        }
        self.coefficients
            .iter()
            .map(|(a, b)| {
                elements
                    .iter()
                    .map(|x| ((*a as u128 * *x as u128 + *b as u128) % self.modulus as u128) as u32)
                    .min()
                    .unwrap_or(u32::MAX)
            })
            .collect()
    }
}

/// Stand-in element for the `occurrence`-th repeat of `value`.
fn occurrence_element(value: u32, occurrence: u32) -> u64 {
    // splitmix64 finalizer
    let mut z = ((value as u64) << 32 | occurrence as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fingerprints a pivot multiset under `config`.
pub fn fingerprint(pivots: &[Pivot], config: &ContextConfig) -> ContextFingerprint {
    Fingerprinter::new(config).fingerprint(pivots, None)
}

/// Reusable fingerprinting state for one configuration.
#[derive(Debug, Clone)]
pub struct Fingerprinter {
    config: ContextConfig,
    hasher: MinHasher,
}

impl Fingerprinter {
    pub fn new(config: &ContextConfig) -> Fingerprinter {
        Fingerprinter {
            config: config.clone(),
            hasher: MinHasher::new(config.k, config.seed, config.modulus),
        }
    }

    pub fn config(&self) -> &ContextConfig {
        &self.config
    }

    pub fn fingerprint(&self, pivots: &[Pivot], language: Option<Language>) -> ContextFingerprint {
        let hashes: Vec<u32> = pivots.iter().map(|p| hash_pivot(p, &self.config)).collect();
        ContextFingerprint {
            signature: self.hasher.sign(&hashes),
            radius: self.config.radius as u32,
            seed: self.config.seed,
            language,
        }
    }
}

/// Multiset Jaccard: min multiplicities over max multiplicities. Two empty
/// multisets are identical.
pub fn exact_jaccard<T: Ord + Clone>(a: &[T], b: &[T]) -> f64 {
    let mut counts: BTreeMap<T, (u64, u64)> = BTreeMap::new();
    for x in a {
        counts.entry(x.clone()).or_default().0 += 1;
    }
    for x in b {
        counts.entry(x.clone()).or_default().1 += 1;
    }
    let (inter, union) = counts
        .values()
        .fold((0u64, 0u64), |(i, u), (x, y)| (i + x.min(y), u + x.max(y)));
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Fraction of agreeing signature components.
pub fn estimate_jaccard(
    f1: &ContextFingerprint,
    f2: &ContextFingerprint,
) -> Result<f64, ContextError> {
    if f1.k() != f2.k() || f1.seed != f2.seed {
        return Err(ContextError::Incompatible(format!(
            "k {} vs {}, seed {} vs {}",
            f1.k(),
            f2.k(),
            f1.seed,
            f2.seed
        )));
    }
    if f1.k() == 0 {
        return Ok(1.0);
    }
    let same = f1
        .signature
        .iter()
        .zip(&f2.signature)
        .filter(|(a, b)| a == b)
        .count();
    Ok(same as f64 / f1.k() as f64)
}
