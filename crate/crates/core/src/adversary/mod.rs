// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Attack experiments. A coalition's view is closed under the derivations a
//! polynomial-time adversary can perform, and an exhaustive census checks
//! the information-theoretic layer at small `q`.
//!
//! One-wayness of the chain function and unpredictability of the β stream
//! are encoded by the absence of rules: there is no inversion rule and no
//! rule that produces an unseen β.

use alloc::collections::{BTreeMap, BTreeSet};

use crate::access::UserId;
use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::protocol::{BroadcastMessage, GmState, PersonalSecret};

pub mod census;
pub mod closure;
pub mod suite;

pub use census::{census_is_uniform, secrecy_census, CENSUS_LIMIT};
pub use closure::{Derivation, Engine, Fact, KnowledgeSet, Rule, Rules};
pub use suite::{run_attack_suite, AttackReport, CensusStatus, Property, SuiteOptions, Transcript, Verdict, ViewMode};

/// A labelled field value an adversary may know.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// `v_s · Φ(U)[index]`
    Dot {
        session: u32,
        user: UserId,
        index: u8,
    },
    /// `v_s · Φ(GM)`
    Mask {
        session: u32,
    },
    Z {
        session: u32,
    },
    /// `K_index`; session `s` uses index `m - s + 1`.
    ChainKey {
        index: u32,
    },
    Beta {
        session: u32,
    },
    SessionKey {
        session: u32,
    },
}

impl core::fmt::Display for Atom {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Atom::Dot { session, user, index } => write!(f, "dot[{user}.{index}]@{session}"),
            Atom::Mask { session } => write!(f, "mask@{session}"),
            Atom::Z { session } => write!(f, "Z@{session}"),
            Atom::ChainKey { index } => write!(f, "K{index}"),
            Atom::Beta { session } => write!(f, "beta@{session}"),
            Atom::SessionKey { session } => write!(f, "SK@{session}"),
        }
    }
}

/// Where a given atom came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Secret(UserId),
    Broadcast(u32),
    /// Handed to the adversary by the experiment.
    Grant,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoalitionView {
    pub members: BTreeSet<UserId>,
    pub given: BTreeMap<Atom, (FieldElement, Source)>,
}

impl CoalitionView {
    pub fn new(members: BTreeSet<UserId>) -> Self {
        CoalitionView { members, given: BTreeMap::new() }
    }

    pub fn add_secret(&mut self, secret: &PersonalSecret) {
        let src = Source::Secret(secret.user);
        for (&session, dots) in &secret.dots {
            for (i, &d) in dots.iter().enumerate() {
                self.given.insert(Atom::Dot { session, user: secret.user, index: i as u8 }, (d, src));
            }
        }
        for (&session, &b) in &secret.betas {
            self.given.insert(Atom::Beta { session }, (b, src));
        }
    }

    pub fn add_broadcast(&mut self, msg: &BroadcastMessage) {
        let src = Source::Broadcast(msg.session);
        let session = msg.session;
        for (u, dots) in &msg.revealed {
            for (i, &d) in dots.iter().enumerate() {
                self.given.entry(Atom::Dot { session, user: *u, index: i as u8 }).or_insert((d, src));
            }
        }
        self.given.insert(Atom::Z { session }, (msg.z, src));
    }

    /// Grants `atom` with its true value.
    pub fn grant(&mut self, atom: Atom, truth: &GroundTruth<'_>) -> Result<()> {
        let v = truth.value(atom)?;
        self.given.entry(atom).or_insert((v, Source::Grant));
        Ok(())
    }

    /// Dots of `session` observed directly, without derivation.
    pub fn observed_dots(&self, session: u32) -> BTreeMap<(UserId, usize), FieldElement> {
        self.given
            .iter()
            .filter_map(|(a, (v, _))| match *a {
                Atom::Dot { session: s, user, index } if s == session => Some(((user, index as usize), *v)),
                _ => None,
            })
            .collect()
    }
}

/// True atom values, computed from the manager's secrets.
#[derive(Clone, Copy, Debug)]
pub struct GroundTruth<'a> {
    gm: &'a GmState,
}

impl<'a> GroundTruth<'a> {
    pub fn new(gm: &'a GmState) -> Self {
        GroundTruth { gm }
    }

    pub fn gm(&self) -> &'a GmState {
        self.gm
    }

    pub fn value(&self, atom: Atom) -> Result<FieldElement> {
        let gm = self.gm;
        match atom {
            Atom::Dot { session, user, index } => {
                let shares = gm.structure().share_of(gm.vector(session)?, user)?;
                shares.get(index as usize).copied().ok_or(Error::UnknownUser(user))
            }
            Atom::Mask { session } => gm.vector(session)?.dot(gm.structure().gm_vector()),
            Atom::Z { session } => gm.masked_key(session),
            Atom::ChainKey { index } => gm.chain().key(index),
            Atom::Beta { session } => gm.betas().beta(session),
            Atom::SessionKey { session } => Ok(gm.session_key(session)?.value),
        }
    }
}
