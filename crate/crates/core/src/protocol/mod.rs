// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Group-manager and member engines, plus the broadcast wire codec.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::access::UserId;
use crate::error::{Error, Result};
use crate::gf::FieldElement;

pub mod gm;
pub mod member;
pub mod wire;

pub use gm::{GmCounters, GmState, SessionRecord, SetupParams};
pub use member::{recover, self_heal, Recovery};
pub use wire::{decode_broadcast, decode_secret, encode_broadcast, encode_secret, WireStats};

/// Sessions `start..=end` a user belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LifeCycle {
    pub start: u32,
    pub end: u32,
}

impl LifeCycle {
    pub fn new(start: u32, end: u32, m: u32) -> Result<Self> {
        if start == 0 || start > end || end > m {
            return Err(Error::Config(alloc::format!("life cycle ({start}, {end}) not within 1..={m}")));
        }
        Ok(LifeCycle { start, end })
    }

    pub fn contains(&self, j: u32) -> bool {
        self.start <= j && j <= self.end
    }

    /// `k_i = t_i - s_i + 1`.
    pub fn len(&self) -> u32 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sessions(&self) -> impl Iterator<Item = u32> {
        self.start..=self.end
    }
}

/// What a member receives over the secure channel: its shares of every
/// session's master vector and the blinders of its cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PersonalSecret {
    pub user: UserId,
    pub cycle: LifeCycle,
    pub dots: BTreeMap<u32, Vec<FieldElement>>,
    pub betas: BTreeMap<u32, FieldElement>,
}

impl PersonalSecret {
    /// Number of field elements held (`2 k_i` for single-vector users).
    pub fn element_count(&self) -> usize {
        self.dots.values().map(Vec::len).sum::<usize>() + self.betas.len()
    }

    pub fn arity(&self) -> usize {
        self.dots.values().next().map_or(0, Vec::len)
    }

    pub(crate) fn check_member(&self, j: u32) -> Result<()> {
        if self.cycle.contains(j) && self.dots.contains_key(&j) && self.betas.contains_key(&j) {
            Ok(())
        } else {
            Err(Error::NotAMember { user: self.user, session: j })
        }
    }
}

/// `B_j`: revealed shares of `W_j ∪ R_j` in ascending id order, then `Z_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BroadcastMessage {
    pub session: u32,
    pub revealed: Vec<(UserId, Vec<FieldElement>)>,
    pub z: FieldElement,
}

impl BroadcastMessage {
    /// `t_j = |W_j ∪ R_j|`.
    pub fn revealed_count(&self) -> usize {
        self.revealed.len()
    }

    pub fn reveals(&self, user: UserId) -> bool {
        self.revealed.binary_search_by_key(&user, |(u, _)| *u).is_ok()
    }

    pub fn element_count(&self) -> usize {
        self.revealed.iter().map(|(_, d)| d.len()).sum::<usize>() + 1
    }
}
