// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Group-manager state: set-up, per-session broadcast, member admission and
//! life-cycle expiry.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::access::{LinearAccessStructure, UserId};
use crate::chain::{compose_session_key, BackwardChain, BetaSequence, OneWayFn, SessionKey};
use crate::error::{Error, Result};
use crate::gf::{FieldElement, FieldVector};
use crate::protocol::{wire, BroadcastMessage, LifeCycle, PersonalSecret};
use crate::rng;

/// Smallest modulus accepted at set-up.
pub const MIN_MODULUS: u64 = 5;

pub const VECTOR_STREAM: &[u8] = b"shkd/vectors";

/// Secrets and knobs fixed at set-up.
#[derive(Clone, Debug)]
pub struct SetupParams {
    pub m: u32,
    /// `S^B`, which is also `K_1`.
    pub chain_seed: FieldElement,
    pub beta_seed: Vec<u8>,
    pub vector_seed: Vec<u8>,
    pub one_way: OneWayFn,
    /// Replaces the generated β sequence.
    pub betas: Option<Vec<FieldElement>>,
    /// Replaces the generated master vectors.
    pub vectors: Option<Vec<FieldVector>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GmCounters {
    pub broadcasts: u64,
    pub bytes_emitted: u64,
    pub element_bits_emitted: u64,
    pub multiplications: u64,
}

/// What the manager remembers about one broadcast.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionRecord {
    pub session: u32,
    pub revoked: BTreeSet<UserId>,
    pub padding: BTreeSet<UserId>,
}

#[derive(Clone, Debug)]
pub struct GmState {
    structure: LinearAccessStructure,
    m: u32,
    vectors: Vec<FieldVector>,
    chain: BackwardChain,
    betas: BetaSequence,
    one_way: OneWayFn,
    ledger: BTreeMap<UserId, LifeCycle>,
    revoked: BTreeSet<UserId>,
    current: u32,
    broadcast_done: bool,
    failed: Option<u32>,
    log: Vec<SessionRecord>,
    counters: GmCounters,
}

impl GmState {
    pub fn setup(
        structure: LinearAccessStructure,
        params: SetupParams,
        initial_cycles: &BTreeMap<UserId, LifeCycle>,
    ) -> Result<(GmState, BTreeMap<UserId, PersonalSecret>)> {
        let field = structure.field();
        let q = field.modulus();
        let m = params.m;
        if q < MIN_MODULUS {
            return Err(Error::Config(format!("modulus {q} below the minimum {MIN_MODULUS}")));
        }
        if m == 0 {
            return Err(Error::Config("need at least one session".into()));
        }
        if params.one_way.modulus() != q || params.chain_seed.modulus() != q {
            return Err(Error::ModulusMismatch { left: q, right: params.one_way.modulus() });
        }
        for (&u, c) in initial_cycles {
            if !structure.contains(u) || u.is_dummy() {
                return Err(Error::UnknownUser(u));
            }
            LifeCycle::new(c.start, c.end, m)?;
        }

        let betas = match params.betas {
            Some(b) => {
                if b.len() != m as usize || b.iter().any(|x| x.modulus() != q) {
                    return Err(Error::Config(format!("expected {m} blinders over GF({q})")));
                }
                BetaSequence::from_values(b)?
            }
            None => BetaSequence::generate(&params.beta_seed, m, field)?,
        };
        let vectors = match params.vectors {
            Some(v) => {
                if v.len() != m as usize || v.iter().any(|x| x.len() != structure.dim() || x.modulus() != q) {
                    return Err(Error::Config(format!(
                        "expected {m} master vectors of length {} over GF({q})",
                        structure.dim()
                    )));
                }
                v
            }
            None => {
                let mut r = rng::stream(VECTOR_STREAM, &params.vector_seed);
                (0..m)
                    .map(|_| {
                        let xs: Vec<FieldElement> =
                            (0..structure.dim()).map(|_| rng::uniform_element(&mut r, field)).collect();
                        FieldVector::from_elements(&xs)
                    })
                    .collect::<Result<_>>()?
            }
        };
        let chain = BackwardChain::build(params.chain_seed, m, &params.one_way)?;

        let mut gm = GmState {
            structure,
            m,
            vectors,
            chain,
            betas,
            one_way: params.one_way,
            ledger: BTreeMap::new(),
            revoked: BTreeSet::new(),
            current: 1,
            broadcast_done: false,
            failed: None,
            log: Vec::new(),
            counters: GmCounters::default(),
        };
        let mut secrets = BTreeMap::new();
        for (&u, &c) in initial_cycles {
            gm.ledger.insert(u, c);
            secrets.insert(u, gm.issue_secret(u)?);
        }
        Ok((gm, secrets))
    }

    /// Rebuilds `user`'s personal secret from the manager's records.
    pub fn issue_secret(&self, user: UserId) -> Result<PersonalSecret> {
        let cycle = *self.ledger.get(&user).ok_or(Error::UnknownUser(user))?;
        let mut dots = BTreeMap::new();
        let mut betas = BTreeMap::new();
        for j in cycle.sessions() {
            dots.insert(j, self.structure.share_of(self.vector(j)?, user)?);
            betas.insert(j, self.betas.beta(j)?);
        }
        Ok(PersonalSecret { user, cycle, dots, betas })
    }

    pub fn structure(&self) -> &LinearAccessStructure {
        &self.structure
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn current_session(&self) -> u32 {
        self.current
    }

    pub fn is_failed(&self) -> bool {
        self.failed.is_some()
    }

    pub fn failed_at(&self) -> Option<u32> {
        self.failed
    }

    pub fn one_way(&self) -> &OneWayFn {
        &self.one_way
    }

    pub fn chain(&self) -> &BackwardChain {
        &self.chain
    }

    pub fn betas(&self) -> &BetaSequence {
        &self.betas
    }

    /// `v_j`.
    pub fn vector(&self, j: u32) -> Result<&FieldVector> {
        if j == 0 || j > self.m {
            return Err(Error::SessionOutOfRange { session: j, m: self.m });
        }
        Ok(&self.vectors[j as usize - 1])
    }

    pub fn ledger(&self) -> &BTreeMap<UserId, LifeCycle> {
        &self.ledger
    }

    pub fn cycle(&self, user: UserId) -> Option<LifeCycle> {
        self.ledger.get(&user).copied()
    }

    pub fn revoked(&self) -> &BTreeSet<UserId> {
        &self.revoked
    }

    pub fn log(&self) -> &[SessionRecord] {
        &self.log
    }

    pub fn record(&self, j: u32) -> Option<&SessionRecord> {
        self.log.iter().find(|r| r.session == j)
    }

    pub fn counters(&self) -> GmCounters {
        self.counters
    }

    /// Issued users whose cycle covers `j`.
    pub fn members_at(&self, j: u32) -> BTreeSet<UserId> {
        self.ledger.iter().filter(|(_, c)| c.contains(j)).map(|(&u, _)| u).collect()
    }

    /// Issued users whose cycle ended before `j`.
    pub fn revoked_at(&self, j: u32) -> BTreeSet<UserId> {
        self.ledger.iter().filter(|(_, c)| c.end < j).map(|(&u, _)| u).collect()
    }

    /// `SK_j`, as only the manager can compute it directly.
    pub fn session_key(&self, j: u32) -> Result<SessionKey> {
        let value = compose_session_key(self.betas.beta(j)?, self.chain.key_for_session(j)?)?;
        Ok(SessionKey { session: j, value })
    }

    /// `Z_j = K_{m-j+1} + v_j · Φ(GM)`.
    pub fn masked_key(&self, j: u32) -> Result<FieldElement> {
        let mask = self.vector(j)?.dot(self.structure.gm_vector())?;
        self.chain.key_for_session(j)?.checked_add(mask)
    }

    /// Builds `B_j` for the current session.
    pub fn broadcast(&mut self, j: u32) -> Result<BroadcastMessage> {
        if let Some(at) = self.failed {
            return Err(Error::SystemFailed { session: at });
        }
        if j != self.current || self.broadcast_done {
            let expected = if self.broadcast_done { self.current + 1 } else { self.current };
            return Err(Error::Sequencing { expected, got: j });
        }
        let active = self.members_at(j);
        let padding = match self.structure.select_padding(&self.revoked, &active) {
            Ok(w) => w,
            Err(Error::RevocationCapacity) => {
                self.failed = Some(j);
                return Err(Error::SystemFailed { session: j });
            }
            Err(e @ Error::PaddingExhausted) => {
                self.failed = Some(j);
                return Err(e);
            }
            Err(e) => return Err(e),
        };
        let revealed_set: BTreeSet<UserId> = padding.union(&self.revoked).copied().collect();
        debug_assert!(self.structure.is_maximal_unauthorized(&revealed_set)?);

        let v = self.vector(j)?;
        let shares = self.structure.shares_for(v, j, revealed_set.iter().copied())?;
        let revealed: Vec<(UserId, Vec<FieldElement>)> = shares.entries.into_iter().collect();
        let msg = BroadcastMessage { session: j, revealed, z: self.masked_key(j)? };

        let dim = self.structure.dim() as u64;
        let stats = wire::broadcast_stats(&msg, self.structure.field())?;
        self.counters.broadcasts += 1;
        self.counters.bytes_emitted += stats.total_bytes as u64;
        self.counters.element_bits_emitted += stats.element_bits;
        self.counters.multiplications += dim * (msg.element_count() as u64);
        self.log.push(SessionRecord { session: j, revoked: self.revoked.clone(), padding });
        self.broadcast_done = true;
        Ok(msg)
    }

    /// Admits a fresh identity for sessions `join..=end`.
    pub fn add_member(&mut self, join: u32, end: u32) -> Result<(UserId, PersonalSecret)> {
        if join < self.current {
            return Err(Error::Sequencing { expected: self.current, got: join });
        }
        let cycle = LifeCycle::new(join, end, self.m)?;
        // a share already published for the join session would leave the
        // newcomer unable to recover it
        let exposed: BTreeSet<UserId> = match self.record(join) {
            Some(r) => r.padding.union(&r.revoked).copied().collect(),
            None => BTreeSet::new(),
        };
        let user = self
            .structure
            .real_users()
            .find(|u| !self.ledger.contains_key(u) && !exposed.contains(u))
            .ok_or(Error::CapacityExhausted)?;
        self.ledger.insert(user, cycle);
        Ok((user, self.issue_secret(user)?))
    }

    /// Moves to session `j + 1` and revokes every cycle that ended at `j`.
    pub fn advance_session(&mut self) -> Result<()> {
        if self.current >= self.m {
            return Err(Error::SessionsExhausted);
        }
        self.current += 1;
        self.broadcast_done = false;
        self.revoked = self.revoked_at(self.current);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::access::StructureKind;
    use crate::protocol::member;
    use crate::testkit;
    use alloc::vec;

    #[test]
    fn worked_setup() {
        let (gm, secrets) = testkit::worked_gm();
        let u1 = &secrets[&UserId(1)];
        assert_eq!(u1.dots[&1], vec![gm.structure().field().element(5)]);
        assert_eq!(u1.betas.values().map(|b| b.value()).collect::<Vec<_>>(), vec![2, 0, 5]);
        assert_eq!(u1.element_count(), 6);
        let sks: Vec<u64> = (1..=3).map(|j| gm.session_key(j).unwrap().value.value()).collect();
        assert_eq!(sks, vec![5, 3, 2]);
    }

    #[test]
    fn single_session_secret() {
        let (mut gm, _) = testkit::worked_gm();
        gm.advance_session().unwrap();
        gm.advance_session().unwrap();
        let (u, s) = gm.add_member(3, 3).unwrap();
        assert_eq!(u, UserId(3));
        assert_eq!(s.dots.len(), 1);
        assert_eq!(s.betas.len(), 1);
    }

    #[test]
    fn worked_broadcast() {
        let (mut gm, _) = testkit::worked_gm();
        let b1 = gm.broadcast(1).unwrap();
        let f = gm.structure().field();
        assert_eq!(b1.revealed, vec![(UserId(3), vec![f.element(2)])]);
        assert_eq!(b1.z, f.element(6));
        assert_eq!(gm.record(1).unwrap().padding, [UserId(3)].into_iter().collect());
    }

    #[test]
    fn sequencing_is_strict() {
        let (mut gm, _) = testkit::worked_gm();
        assert_eq!(gm.broadcast(2), Err(Error::Sequencing { expected: 1, got: 2 }));
        gm.broadcast(1).unwrap();
        assert_eq!(gm.broadcast(1), Err(Error::Sequencing { expected: 2, got: 1 }));
        gm.advance_session().unwrap();
        gm.broadcast(2).unwrap();
        gm.advance_session().unwrap();
        assert_eq!(gm.advance_session(), Err(Error::SessionsExhausted));
    }

    #[test]
    fn expiry_moves_to_revoked() {
        let (mut gm, _) = testkit::threshold_gm(11, 3, 6, 4, &[(1, 1, 2), (2, 1, 4), (3, 2, 4)]);
        assert!(gm.revoked().is_empty());
        gm.advance_session().unwrap();
        assert!(gm.revoked().is_empty());
        gm.advance_session().unwrap();
        assert_eq!(gm.revoked(), &[UserId(1)].into_iter().collect());
        let before = gm.revoked().clone();
        gm.advance_session().unwrap();
        assert_eq!(gm.revoked(), &before);
    }

    #[test]
    fn threshold_revealed_count_is_t_minus_one() {
        for seed in 0..20u64 {
            let (mut gm, secrets) = testkit::random_threshold_run(seed);
            let StructureKind::Threshold { t } = *gm.structure().kind() else { unreachable!() };
            let mut secrets = secrets;
            for j in 1..=gm.m() {
                match gm.broadcast(j) {
                    Ok(b) => {
                        assert_eq!(b.revealed_count(), t - 1);
                        for u in gm.members_at(j) {
                            let r = member::recover(&secrets[&u], &b, gm.structure()).unwrap();
                            assert_eq!(r.key, gm.session_key(j).unwrap());
                        }
                    }
                    Err(Error::SystemFailed { .. }) | Err(Error::PaddingExhausted) => break,
                    Err(e) => panic!("{e}"),
                }
                if j < gm.m() {
                    gm.advance_session().unwrap();
                    if j % 3 == 0 {
                        if let Ok((u, s)) = gm.add_member(j + 1, gm.m()) {
                            secrets.insert(u, s);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn full_revocation_means_no_padding() {
        // t = 3, two expired users already form a maximal unauthorized set
        let (mut gm, _) = testkit::threshold_gm(11, 3, 6, 3, &[(1, 1, 1), (2, 1, 1), (3, 1, 3), (4, 1, 3)]);
        gm.broadcast(1).unwrap();
        gm.advance_session().unwrap();
        gm.broadcast(2).unwrap();
        assert!(gm.record(2).unwrap().padding.is_empty());
        assert_eq!(gm.record(2).unwrap().revoked.len(), 2);
    }

    #[test]
    fn too_many_revocations_fail_the_system() {
        let (mut gm, _) = testkit::threshold_gm(11, 2, 4, 3, &[(1, 1, 1), (2, 1, 1), (3, 1, 3)]);
        gm.broadcast(1).unwrap();
        gm.advance_session().unwrap();
        assert_eq!(gm.broadcast(2), Err(Error::SystemFailed { session: 2 }));
        assert!(gm.is_failed());
        assert_eq!(gm.broadcast(2), Err(Error::SystemFailed { session: 2 }));
    }

    #[test]
    fn add_member_rules() {
        let (mut gm, _) = testkit::worked_gm();
        let b1 = gm.broadcast(1).unwrap();
        // U3's session-1 share is public, so it cannot join at session 1
        let (u4, s4) = gm.add_member(1, 3).unwrap();
        assert_eq!(u4, UserId(4));
        assert_eq!(member::recover(&s4, &b1, gm.structure()).unwrap().key, gm.session_key(1).unwrap());
        assert_eq!(gm.add_member(1, 3).unwrap_err(), Error::CapacityExhausted);
        gm.advance_session().unwrap();
        assert_eq!(gm.add_member(1, 3).unwrap_err(), Error::Sequencing { expected: 2, got: 1 });
        let (u, s) = gm.add_member(2, 3).unwrap();
        assert_eq!(u, UserId(3));
        assert!(b1.reveals(u));
        assert_eq!(s.cycle, LifeCycle { start: 2, end: 3 });
        assert!(!gm.ledger().contains_key(&UserId(5)));
        assert_eq!(gm.add_member(2, 3).unwrap_err(), Error::CapacityExhausted);
    }

    #[test]
    fn setup_rejects_bad_input() {
        let (gm, _) = testkit::worked_gm();
        let s = gm.structure().clone();
        let f = s.field();
        let params = || SetupParams {
            m: 3,
            chain_seed: f.element(4),
            beta_seed: vec![1],
            vector_seed: vec![2],
            one_way: OneWayFn::sha256(f),
            betas: None,
            vectors: None,
        };
        let out_of_range: BTreeMap<_, _> = [(UserId(1), LifeCycle { start: 2, end: 4 })].into_iter().collect();
        assert!(matches!(GmState::setup(s.clone(), params(), &out_of_range), Err(Error::Config(_))));
        let unknown: BTreeMap<_, _> = [(UserId(9), LifeCycle { start: 1, end: 1 })].into_iter().collect();
        assert_eq!(GmState::setup(s.clone(), params(), &unknown).unwrap_err(), Error::UnknownUser(UserId(9)));
        let mut short = params();
        short.betas = Some(vec![f.one()]);
        assert!(GmState::setup(s.clone(), short, &BTreeMap::new()).is_err());
        let mut zero = params();
        zero.m = 0;
        assert!(GmState::setup(s, zero, &BTreeMap::new()).is_err());
    }

    #[test]
    fn generated_vectors_are_reproducible() {
        let (a, _) = testkit::threshold_gm(67, 3, 8, 5, &[(1, 1, 5)]);
        let (b, _) = testkit::threshold_gm(67, 3, 8, 5, &[(1, 1, 5)]);
        for j in 1..=5 {
            assert_eq!(a.vector(j).unwrap(), b.vector(j).unwrap());
            assert_eq!(a.vector(j).unwrap().len(), 3);
        }
        assert_ne!(a.vector(1).unwrap(), a.vector(2).unwrap());
    }

    #[test]
    fn z_matches_definition() {
        let (mut gm, _) = testkit::threshold_gm(67, 3, 8, 5, &[(1, 1, 5), (2, 1, 5)]);
        for j in 1..=5 {
            let b = gm.broadcast(j).unwrap();
            let k = gm.chain().key(5 - j + 1).unwrap();
            let mask = crate::gf::dot(gm.vector(j).unwrap(), gm.structure().gm_vector()).unwrap();
            assert_eq!(b.z, k + mask);
            if j < 5 {
                gm.advance_session().unwrap();
            }
        }
        assert_eq!(gm.counters().broadcasts, 5);
    }
}
