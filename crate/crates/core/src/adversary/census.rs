// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Exhaustive secrecy census: for each candidate value `c`, the number of
//! master vectors `v ∈ GF(q)^l` consistent with the observed dots and with
//! `v · Φ(GM) = c`. Counting uses plain integer arithmetic on purpose, so it
//! shares no code with the span solver it is meant to check.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::access::{LinearAccessStructure, UserId};
use crate::error::{Error, Result};
use crate::gf::FieldElement;

/// Largest `q^l` the census will enumerate.
pub const CENSUS_LIMIT: u128 = 10_000_000;

/// Counts indexed by candidate value `0..q`.
pub fn secrecy_census(
    structure: &LinearAccessStructure,
    observed: &BTreeMap<(UserId, usize), FieldElement>,
) -> Result<Vec<u64>> {
    let q = structure.field().modulus();
    let l = structure.dim();
    let size = (q as u128).checked_pow(l as u32).unwrap_or(u128::MAX);
    if size > CENSUS_LIMIT {
        return Err(Error::CensusInfeasible { size });
    }
    let mut constraints: Vec<(&[u64], u64)> = Vec::with_capacity(observed.len());
    for (&(u, r), v) in observed {
        let w = structure.phi(u)?.get(r).ok_or(Error::UnknownUser(u))?;
        constraints.push((w.values(), v.value()));
    }
    let target = structure.gm_vector().values();
    let dot = |v: &[u64], w: &[u64]| v.iter().zip(w).fold(0u64, |acc, (a, b)| (acc + a * b % q) % q);

    let mut counts = vec![0u64; q as usize];
    let mut v = vec![0u64; l];
    'outer: loop {
        if constraints.iter().all(|(w, val)| dot(&v, w) == *val) {
            counts[dot(&v, target) as usize] += 1;
        }
        for digit in v.iter_mut() {
            *digit += 1;
            if *digit < q {
                continue 'outer;
            }
            *digit = 0;
        }
        break;
    }
    Ok(counts)
}

/// All counts equal and nonzero.
pub fn census_is_uniform(counts: &[u64]) -> bool {
    counts.first().is_some_and(|&c| c > 0 && counts.iter().all(|&x| x == c))
}
