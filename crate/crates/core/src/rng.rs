// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Seeded ChaCha20 streams and bias-free sampling of field elements.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::gf::{FieldElement, PrimeField};

/// Independent stream for `label`, keyed by SHA-256(label || 0x00 || seed).
pub fn stream(label: &[u8], seed: &[u8]) -> ChaCha20Rng {
    let key: [u8; 32] = Sha256::new().chain_update(label).chain_update([0u8]).chain_update(seed).finalize().into();
    ChaCha20Rng::from_seed(key)
}

/// Accepts a 64-bit window `w` iff it falls below the largest multiple of `q`
/// that fits in 2^64, so `w mod q` is uniform.
#[inline]
pub(crate) fn accept_window(w: u64, q: u64) -> Option<u64> {
    let zone = (1u128 << 64) - ((1u128 << 64) % q as u128);
    ((w as u128) < zone).then_some(w % q)
}

/// Uniform element of `field` by rejection sampling.
pub fn uniform_element<R: RngCore>(rng: &mut R, field: PrimeField) -> FieldElement {
    loop {
        if let Some(v) = accept_window(rng.next_u64(), field.modulus()) {
            return field.element(v);
        }
    }
}

/// Uniform float in `[0, 1)` with 53 bits of precision.
pub fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_rejection_zone() {
        // 2^64 mod 3 = 1, so only u64::MAX is rejected
        assert_eq!(accept_window(u64::MAX, 3), None);
        assert_eq!(accept_window(u64::MAX - 1, 3), Some((u64::MAX - 1) % 3));
        // 2^64 mod 2 = 0: nothing is rejected
        assert_eq!(accept_window(u64::MAX, 2), Some(1));
    }

    #[test]
    fn streams_are_labelled() {
        let mut a = stream(b"beta", b"seed");
        let mut b = stream(b"vectors", b"seed");
        let mut c = stream(b"beta", b"seed");
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_eq!(x, c.next_u64());
    }
}
