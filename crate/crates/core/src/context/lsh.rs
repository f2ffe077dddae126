// SPDX-License-Identifier: Apache-2.0

use std::hash::Hasher;

use fnv::FnvHasher;

use super::minhash::ContextFingerprint;

/// One bucket id per band of `rows` consecutive signature components.
pub fn bucket_ids(fp: &ContextFingerprint, bands: usize, rows: usize) -> Vec<u64> {
    assert_eq!(bands * rows, fp.k(), "bands * rows must equal k");
    fp.signature
        .chunks(rows)
        .enumerate()
        .map(|(band, slice)| {
            let mut h = FnvHasher::default();
            h.write_u32(band as u32);
            h.write_u32(fp.radius);
            if let Some(lang) = fp.language {
                h.write(lang.tag().as_bytes());
            }
            for v in slice {
                h.write_u32(*v);
            }
            h.finish()
        })
        .collect()
}

/// Probability that a pair with Jaccard `j` shares at least one band.
pub fn collision_probability(j: f64, bands: usize, rows: usize) -> f64 {
    1.0 - (1.0 - j.powi(rows as i32)).powi(bands as i32)
}
