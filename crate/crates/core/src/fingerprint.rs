//! Order-independent state fingerprints.
//!
//! A configuration is a set of spheres, so two Gram matrices that differ by a
//! simultaneous row/column permutation must hash alike. Each row is summarised
//! by a commutative sum of hashed, quantized off-diagonal entries; the state
//! hash is a commutative sum of mixed row summaries. Extending by one column
//! therefore costs O(m), which keeps per-candidate child hashing cheap.

use crate::gram::GramState;
use crate::scalar::Scalar;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn entry_hash(quantized: i64) -> u64 {
    splitmix(quantized as u64 ^ 0x5851_F42D_4C95_7F2D)
}

#[inline]
fn row_mix(sig: u64) -> u64 {
    splitmix(sig ^ 0x2545_F491_4F6C_DD1D)
}

/// Per-row summaries of a state, from which the state hash and the hashes
/// of its one-column extensions are derived.
#[derive(Clone, Debug)]
pub struct RowSignatures {
    sigs: Vec<u64>,
    hash: u64,
}

impl RowSignatures {
    pub fn of<S: Scalar>(state: &GramState<S>) -> Self {
        let m = state.count();
        let mut sigs = vec![0u64; m];
        for (i, sig) in sigs.iter_mut().enumerate() {
            for j in 0..m {
                if i != j {
                    *sig = sig.wrapping_add(entry_hash(state.get(i, j).quantize()));
                }
            }
        }
        let hash = combine(m, sigs.iter().copied());
        Self { sigs, hash }
    }

    pub fn from_quantized(m: usize, entry: impl Fn(usize, usize) -> i64) -> Self {
        let mut sigs = vec![0u64; m];
        for (i, sig) in sigs.iter_mut().enumerate() {
            for j in 0..m {
                if i != j {
                    *sig = sig.wrapping_add(entry_hash(entry(i, j)));
                }
            }
        }
        let hash = combine(m, sigs.iter().copied());
        Self { sigs, hash }
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    /// Hash of the state extended by a column with the given quantized entries.
    pub fn child_hash(&self, column: impl Iterator<Item = i64>) -> u64 {
        let mut total = 0u64;
        let mut new_sig = 0u64;
        let mut count = 0usize;
        for (sig, q) in self.sigs.iter().zip(column) {
            let h = entry_hash(q);
            total = total.wrapping_add(row_mix(sig.wrapping_add(h)));
            new_sig = new_sig.wrapping_add(h);
            count += 1;
        }
        debug_assert_eq!(count, self.sigs.len());
        total = total.wrapping_add(row_mix(new_sig));
        salt(self.sigs.len() + 1, total)
    }
}

fn combine(m: usize, sigs: impl Iterator<Item = u64>) -> u64 {
    let total = sigs.fold(0u64, |acc, s| acc.wrapping_add(row_mix(s)));
    salt(m, total)
}

fn salt(m: usize, total: u64) -> u64 {
    splitmix(total ^ (m as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
