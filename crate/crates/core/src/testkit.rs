// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for unit tests.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::access::{LinearAccessStructure, UserId};
use crate::chain::OneWayFn;
use crate::gf::PrimeField;
use crate::protocol::{GmState, LifeCycle, PersonalSecret, SetupParams};
use crate::rng;

pub type Secrets = BTreeMap<UserId, PersonalSecret>;

pub fn square_plus_one(f: PrimeField) -> OneWayFn {
    let q = f.modulus();
    OneWayFn::table(f, (0..q).map(|x| (x * x + 1) % q).collect()).unwrap()
}

/// GF(7), t = 2, m = 3, users U1..U4 at x = 1..4; U1 and U2 hold (1, 3).
pub fn worked_structure() -> LinearAccessStructure {
    let f = PrimeField::new(7).unwrap();
    let xs = (1..=4).map(|i| (UserId(i), f.element(i as u64))).collect();
    LinearAccessStructure::threshold(2, &xs, f).unwrap()
}

pub fn worked_params() -> SetupParams {
    let f = PrimeField::new(7).unwrap();
    SetupParams {
        m: 3,
        chain_seed: f.element(4),
        beta_seed: vec![0],
        vector_seed: vec![0],
        one_way: square_plus_one(f),
        betas: Some([2, 0, 5].iter().map(|&b| f.element(b)).collect()),
        vectors: Some(vec![f.vector(&[3, 2]).unwrap(), f.vector(&[1, 4]).unwrap(), f.vector(&[6, 5]).unwrap()]),
    }
}

pub fn worked_gm() -> (GmState, Secrets) {
    let cycles = [(UserId(1), LifeCycle { start: 1, end: 3 }), (UserId(2), LifeCycle { start: 1, end: 3 })]
        .into_iter()
        .collect();
    GmState::setup(worked_structure(), worked_params(), &cycles).unwrap()
}

/// Threshold instance with users U1..Un at x = i and the production hash.
pub fn threshold_gm(q: u64, t: usize, n: u32, m: u32, cycles: &[(u32, u32, u32)]) -> (GmState, Secrets) {
    let f = PrimeField::new(q).unwrap();
    let xs = (1..=n).map(|i| (UserId(i), f.element(i as u64))).collect();
    let s = LinearAccessStructure::threshold(t, &xs, f).unwrap();
    let params = SetupParams {
        m,
        chain_seed: f.element(12_345),
        beta_seed: vec![7, 7, 7],
        vector_seed: vec![8, 8, 8],
        one_way: OneWayFn::sha256(f),
        betas: None,
        vectors: None,
    };
    let cycles = cycles.iter().map(|&(u, a, b)| (UserId(u), LifeCycle { start: a, end: b })).collect();
    GmState::setup(s, params, &cycles).unwrap()
}

/// Random threshold instance over GF(11), GF(13) or GF(67).
pub fn random_threshold_run(seed: u64) -> (GmState, Secrets) {
    let mut r = rng::stream(b"test/random-run", &seed.to_be_bytes());
    let pick = |r: &mut rand_chacha::ChaCha20Rng, lo: u64, hi: u64| lo + r.next_u64() % (hi - lo + 1);
    let q = [11u64, 13, 67][pick(&mut r, 0, 2) as usize];
    let t = pick(&mut r, 1, 3) as usize;
    let n = pick(&mut r, t as u64 + 3, 10.min(q - 1)) as u32;
    let m = pick(&mut r, 1, 8) as u32;
    let issued = pick(&mut r, 1, n as u64 - 1) as u32;
    let cycles: Vec<(u32, u32, u32)> = (1..=issued)
        .map(|u| {
            let a = pick(&mut r, 1, m as u64) as u32;
            let b = pick(&mut r, a as u64, m as u64) as u32;
            (u, a, b)
        })
        .collect();
    threshold_gm(q, t, n, m, &cycles)
}

/// Broadcasts every session in order, stopping at the first failure.
pub fn broadcast_all(gm: &mut GmState) -> BTreeMap<u32, crate::protocol::BroadcastMessage> {
    let mut out = BTreeMap::new();
    for j in 1..=gm.m() {
        match gm.broadcast(j) {
            Ok(b) => {
                out.insert(j, b);
            }
            Err(_) => break,
        }
        if j < gm.m() {
            gm.advance_session().unwrap();
        }
    }
    out
}

/// Worked structure with U1, U2 on (1, 3), U3 on (1, 1) and U4 on (3, 3).
pub fn worked_collusion_gm() -> (GmState, Secrets) {
    let cycles = [(1, 1, 3), (2, 1, 3), (3, 1, 1), (4, 3, 3)]
        .into_iter()
        .map(|(u, a, b)| (UserId(u), LifeCycle { start: a, end: b }))
        .collect();
    GmState::setup(worked_structure(), worked_params(), &cycles).unwrap()
}
