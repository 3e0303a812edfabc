// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! The backward one-way key chain, the per-session blinders `β_j`, and
//! session-key composition.
//!
//! `K_1 = S^B` and `K_i = H(K_{i-1})`. Session `j` consumes `K_{m-j+1}`, so a
//! member holding a later chain key hashes forward to reach earlier sessions'
//! keys, and nobody can walk the other way.

use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gf::{FieldElement, PrimeField};
use crate::rng;

/// Domain-separation prefix of the hash-based one-way function.
pub const HASH_DOMAIN: u8 = 0x4B;

/// A one-way map GF(q) -> GF(q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OneWayFn {
    /// SHA-256 over `0x4B || x` (8-byte big-endian), reduced mod q by
    /// rejection on the digest's four big-endian 64-bit windows. If every
    /// window is rejected the input is re-hashed with a 4-byte big-endian
    /// round counter appended.
    Sha256 { modulus: u64 },
    /// Explicit lookup table; only meant for tiny fields in tests.
    Table { modulus: u64, table: Vec<u64> },
}

impl OneWayFn {
    pub fn sha256(field: PrimeField) -> Self {
        OneWayFn::Sha256 { modulus: field.modulus() }
    }

    pub fn table(field: PrimeField, table: Vec<u64>) -> Result<Self> {
        let q = field.modulus();
        if table.len() as u64 != q {
            return Err(Error::Config(alloc::format!("table has {} entries, expected {q}", table.len())));
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= q) {
            return Err(Error::Config(alloc::format!("table value {bad} not below {q}")));
        }
        Ok(OneWayFn::Table { modulus: q, table })
    }

    pub fn name(&self) -> &'static str {
        match self {
            OneWayFn::Sha256 { .. } => "standard-hash-mod-q",
            OneWayFn::Table { .. } => "test-table",
        }
    }

    pub fn modulus(&self) -> u64 {
        match self {
            OneWayFn::Sha256 { modulus } | OneWayFn::Table { modulus, .. } => *modulus,
        }
    }

    /// Evaluates the function. Panics if `x` belongs to another field.
    pub fn apply(&self, x: FieldElement) -> FieldElement {
        let q = self.modulus();
        assert_eq!(x.modulus(), q, "one-way function applied across fields");
        let field = x.field();
        match self {
            OneWayFn::Table { table, .. } => field.element(table[x.value() as usize]),
            OneWayFn::Sha256 { .. } => {
                let mut round: u32 = 0;
                loop {
                    let mut h = Sha256::new();
                    h.update([HASH_DOMAIN]);
                    h.update(x.value().to_be_bytes());
                    if round > 0 {
                        h.update(round.to_be_bytes());
                    }
                    let digest: [u8; 32] = h.finalize().into();
                    for w in digest.chunks_exact(8) {
                        let w = u64::from_be_bytes(w.try_into().expect("8-byte window"));
                        if let Some(v) = rng::accept_window(w, q) {
                            return field.element(v);
                        }
                    }
                    round += 1;
                }
            }
        }
    }
}

/// `fn` applied `steps` times.
pub fn advance(key: FieldElement, steps: u32, f: &OneWayFn) -> FieldElement {
    (0..steps).fold(key, |k, _| f.apply(k))
}

/// Chain index used by session `j`: `m - j + 1`.
pub fn chain_index(j: u32, m: u32) -> Result<u32> {
    if j == 0 || j > m {
        return Err(Error::SessionOutOfRange { session: j, m });
    }
    Ok(m - j + 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackwardChain {
    keys: Vec<FieldElement>,
}

impl BackwardChain {
    pub fn build(seed: FieldElement, m: u32, f: &OneWayFn) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("chain length must be at least 1".into()));
        }
        let mut keys = Vec::with_capacity(m as usize);
        keys.push(seed);
        for i in 1..m as usize {
            keys.push(f.apply(keys[i - 1]));
        }
        Ok(BackwardChain { keys })
    }

    pub fn len(&self) -> u32 {
        self.keys.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// `K_i`, 1-based.
    pub fn key(&self, i: u32) -> Result<FieldElement> {
        if i == 0 || i > self.len() {
            return Err(Error::SessionOutOfRange { session: i, m: self.len() });
        }
        Ok(self.keys[i as usize - 1])
    }

    /// `K_{m-j+1}`.
    pub fn key_for_session(&self, j: u32) -> Result<FieldElement> {
        self.key(chain_index(j, self.len())?)
    }

    pub fn keys(&self) -> &[FieldElement] {
        &self.keys
    }
}

/// `β_1, …, β_m` drawn from a seeded ChaCha20 stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaSequence {
    betas: Vec<FieldElement>,
}

pub const BETA_STREAM: &[u8] = b"shkd/beta";

impl BetaSequence {
    pub fn generate(seed: &[u8], m: u32, field: PrimeField) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("need at least one session".into()));
        }
        let mut r = rng::stream(BETA_STREAM, seed);
        let betas = (0..m).map(|_| rng::uniform_element(&mut r, field)).collect();
        Ok(BetaSequence { betas })
    }

    pub fn from_values(betas: Vec<FieldElement>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::Config("need at least one session".into()));
        }
        Ok(BetaSequence { betas })
    }

    pub fn len(&self) -> u32 {
        self.betas.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// `β_j`, 1-based.
    pub fn beta(&self, j: u32) -> Result<FieldElement> {
        if j == 0 || j > self.len() {
            return Err(Error::SessionOutOfRange { session: j, m: self.len() });
        }
        Ok(self.betas[j as usize - 1])
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.betas
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SessionKey {
    pub session: u32,
    pub value: FieldElement,
}

/// `SK = β + K mod q`.
pub fn compose_session_key(beta: FieldElement, chain_key: FieldElement) -> Result<FieldElement> {
    beta.checked_add(chain_key)
}
