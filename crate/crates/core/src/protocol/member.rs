// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Session-key recovery and self-healing on the member side. Pure functions
//! of a personal secret and broadcast messages.

use alloc::collections::BTreeSet;

use crate::access::{LinearAccessStructure, UserId};
use crate::chain::{advance, compose_session_key, OneWayFn, SessionKey};
use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::protocol::{BroadcastMessage, PersonalSecret};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Recovery {
    pub key: SessionKey,
    pub chain_key: FieldElement,
    /// Field multiplications spent on `Σ Λ · share`, skipping coefficients 0 and 1.
    pub multiplications: u64,
    pub hash_applications: u32,
}

/// Recovers `K_{m-j+1}` from `msg` (session `j`).
fn recover_chain_key(
    secret: &PersonalSecret,
    msg: &BroadcastMessage,
    structure: &LinearAccessStructure,
) -> Result<(FieldElement, u64)> {
    let j = msg.session;
    secret.check_member(j)?;
    let failure = Error::RecoveryFailure { user: secret.user, session: j };
    let mut set: BTreeSet<UserId> = msg.revealed.iter().map(|(u, _)| *u).collect();
    set.insert(secret.user);
    let lambda = match structure.reconstruction_coefficients(&set) {
        Ok(l) => l,
        Err(Error::NotAuthorized | Error::UnknownUser(_)) => return Err(failure),
        Err(e) => return Err(e),
    };
    let own = &secret.dots[&j];
    let field = structure.field();
    let mut mask = field.zero();
    let mut mults = 0u64;
    for (&(u, r), &c) in &lambda {
        let share = if u == secret.user && !msg.reveals(u) {
            own.get(r)
        } else {
            msg.revealed.iter().find(|(w, _)| *w == u).and_then(|(_, d)| d.get(r))
        };
        let share = *share.ok_or_else(|| failure.clone())?;
        if c.is_zero() {
            continue;
        }
        let term = if c == field.one() {
            share
        } else {
            mults += 1;
            c.checked_mul(share)?
        };
        mask = mask.checked_add(term)?;
    }
    Ok((msg.z.checked_sub(mask)?, mults))
}

/// `SK_j` from `B_j`.
pub fn recover(secret: &PersonalSecret, msg: &BroadcastMessage, structure: &LinearAccessStructure) -> Result<Recovery> {
    let (chain_key, multiplications) = recover_chain_key(secret, msg, structure)?;
    let j = msg.session;
    let value = compose_session_key(secret.betas[&j], chain_key)?;
    Ok(Recovery { key: SessionKey { session: j, value }, chain_key, multiplications, hash_applications: 0 })
}

/// `SK_target` from a later broadcast `B_{j2}`: recover `K_{m-j2+1}`, hash it
/// forward `j2 - target` times, add `β_target`.
pub fn self_heal(
    secret: &PersonalSecret,
    later: &BroadcastMessage,
    target: u32,
    structure: &LinearAccessStructure,
    one_way: &OneWayFn,
) -> Result<Recovery> {
    if target > later.session {
        return Err(Error::CannotHealForward { target, from: later.session });
    }
    secret.check_member(target)?;
    let (k_late, multiplications) = recover_chain_key(secret, later, structure)?;
    let steps = later.session - target;
    let chain_key = advance(k_late, steps, one_way);
    let value = compose_session_key(secret.betas[&target], chain_key)?;
    Ok(Recovery { key: SessionKey { session: target, value }, chain_key, multiplications, hash_applications: steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    #[test]
    fn worked_recovery() {
        let (mut gm, secrets) = testkit::worked_gm();
        let b1 = gm.broadcast(1).unwrap();
        let r = recover(&secrets[&UserId(1)], &b1, gm.structure()).unwrap();
        assert_eq!(r.key.value.value(), 5);
        assert_eq!(r.chain_key.value(), 3);
        let r2 = recover(&secrets[&UserId(2)], &b1, gm.structure()).unwrap();
        assert_eq!(r2.key.value.value(), 5);
    }

    #[test]
    fn revealed_user_cannot_recover() {
        let (mut gm, _) = testkit::worked_gm();
        let b1 = gm.broadcast(1).unwrap();
        gm.advance_session().unwrap();
        // U3 issued later; its share at session 1 was padding
        let (u3, _) = gm.add_member(2, 3).unwrap();
        let mut s = gm.issue_secret(u3).unwrap();
        s.cycle.start = 1;
        s.dots.insert(1, b1.revealed[0].1.clone());
        s.betas.insert(1, gm.betas().beta(1).unwrap());
        assert_eq!(recover(&s, &b1, gm.structure()), Err(Error::RecoveryFailure { user: u3, session: 1 }));
    }

    #[test]
    fn outside_cycle_is_not_a_member() {
        let (mut gm, _) = testkit::worked_gm();
        gm.broadcast(1).unwrap();
        gm.advance_session().unwrap();
        let (u3, s3) = gm.add_member(2, 3).unwrap();
        let b2 = gm.broadcast(2).unwrap();
        assert!(recover(&s3, &b2, gm.structure()).is_ok());
        let (mut fresh, _) = testkit::worked_gm();
        let b1 = fresh.broadcast(1).unwrap();
        assert_eq!(recover(&s3, &b1, gm.structure()), Err(Error::NotAMember { user: u3, session: 1 }));
    }

    #[test]
    fn worked_self_heal() {
        let (mut gm, secrets) = testkit::worked_gm();
        gm.broadcast(1).unwrap();
        gm.advance_session().unwrap();
        let b2 = gm.broadcast(2).unwrap();
        let s1 = &secrets[&UserId(1)];
        let healed = self_heal(s1, &b2, 1, gm.structure(), gm.one_way()).unwrap();
        assert_eq!(healed.chain_key.value(), 3);
        assert_eq!(healed.key.value.value(), 5);
        assert_eq!(healed.hash_applications, 1);
        let same = self_heal(s1, &b2, 2, gm.structure(), gm.one_way()).unwrap();
        assert_eq!(same.key, recover(s1, &b2, gm.structure()).unwrap().key);
        assert_eq!(
            self_heal(s1, &b2, 3, gm.structure(), gm.one_way()),
            Err(Error::CannotHealForward { target: 3, from: 2 })
        );
    }

    #[test]
    fn heal_needs_target_blinder() {
        let (mut gm, _) = testkit::worked_gm();
        gm.broadcast(1).unwrap();
        gm.advance_session().unwrap();
        let (u3, s3) = gm.add_member(2, 3).unwrap();
        gm.broadcast(2).unwrap();
        gm.advance_session().unwrap();
        let b3 = gm.broadcast(3).unwrap();
        assert_eq!(
            self_heal(&s3, &b3, 1, gm.structure(), gm.one_way()),
            Err(Error::NotAMember { user: u3, session: 1 })
        );
        assert_eq!(self_heal(&s3, &b3, 2, gm.structure(), gm.one_way()).unwrap().key, gm.session_key(2).unwrap());
    }

    #[test]
    fn random_instances_recover_and_heal() {
        for seed in 0..40u64 {
            let (mut gm, secrets) = testkit::random_threshold_run(seed);
            for j in 1..=gm.m() {
                let Ok(b) = gm.broadcast(j) else { break };
                let t_j = b.revealed_count() as u64;
                for u in gm.members_at(j) {
                    let r = recover(&secrets[&u], &b, gm.structure()).unwrap();
                    assert_eq!(r.key, gm.session_key(j).unwrap());
                    assert!(r.multiplications <= 2 * (t_j * t_j + t_j));
                    for target in secrets[&u].cycle.start..=j {
                        let h = self_heal(&secrets[&u], &b, target, gm.structure(), gm.one_way()).unwrap();
                        assert_eq!(h.key, gm.session_key(target).unwrap());
                    }
                }
                if j < gm.m() {
                    gm.advance_session().unwrap();
                }
            }
        }
    }
}
