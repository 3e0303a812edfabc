// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Deterministic session-by-session simulation over a lossy broadcast
//! channel.
//!
//! Each session the manager admits the joins scheduled for it, broadcasts,
//! and the frame goes through the wire codec. Delivery is sampled per member
//! from that member's own seeded stream. Members then recover directly, heal
//! from the earliest later delivered broadcast inside their cycle, or give
//! up. Every key obtained is checked against the manager's.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use rand_chacha::ChaCha20Rng;
use rand_core::RngCore;

use crate::access::{LinearAccessStructure, UserId};
use crate::chain::OneWayFn;
use crate::error::{Error, Result};
use crate::gf::{self, PrimeField};
use crate::protocol::{self, gm::MIN_MODULUS, BroadcastMessage, GmState, LifeCycle, PersonalSecret, SetupParams};
use crate::rng;

pub const LOSS_STREAM: &[u8] = b"shkd/loss";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureSpec {
    /// Real users and their x-coordinates.
    Threshold {
        t: usize,
        user_xs: BTreeMap<UserId, u64>,
    },
    Multipartite {
        parts: Vec<BTreeSet<UserId>>,
        part_xs: Vec<u64>,
    },
}

impl StructureSpec {
    pub fn real_users(&self) -> BTreeSet<UserId> {
        match self {
            StructureSpec::Threshold { user_xs, .. } => user_xs.keys().copied().collect(),
            StructureSpec::Multipartite { parts, .. } => parts.iter().flatten().copied().collect(),
        }
    }

    fn roster_len(&self) -> usize {
        match self {
            StructureSpec::Threshold { user_xs, .. } => user_xs.len(),
            StructureSpec::Multipartite { parts, .. } => parts.iter().map(BTreeSet::len).sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LossModel {
    None,
    /// Each delivery lost independently with probability `p`.
    Iid {
        p: f64,
    },
    /// Two-state Gilbert channel, starting good. Losses happen in the bad
    /// state; good goes bad with `p_enter`, bad stays bad with `p_stay`.
    Burst {
        p_enter: f64,
        p_stay: f64,
    },
    /// Exactly these (user, session) deliveries are lost.
    Mask {
        drops: BTreeSet<(UserId, u32)>,
    },
}

impl LossModel {
    pub fn name(&self) -> &'static str {
        match self {
            LossModel::None => "none",
            LossModel::Iid { .. } => "iid",
            LossModel::Burst { .. } => "burst",
            LossModel::Mask { .. } => "mask",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        match *self {
            LossModel::Iid { p } if !ok(p) => {
                Err(Error::ScenarioInvalid(format!("loss probability {p} not in [0, 1]")))
            }
            LossModel::Burst { p_enter, p_stay } if !ok(p_enter) || !ok(p_stay) => {
                Err(Error::ScenarioInvalid(format!("burst probabilities ({p_enter}, {p_stay}) not in [0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

/// Per-member channel state.
struct Channel {
    rng: ChaCha20Rng,
    bad: bool,
}

impl Channel {
    fn delivered(&mut self, model: &LossModel, user: UserId, session: u32) -> bool {
        match model {
            LossModel::None => true,
            LossModel::Iid { p } => rng::unit_f64(&mut self.rng) >= *p,
            LossModel::Burst { p_enter, p_stay } => {
                let p = if self.bad { *p_stay } else { *p_enter };
                self.bad = rng::unit_f64(&mut self.rng) < p;
                !self.bad
            }
            LossModel::Mask { drops } => !drops.contains(&(user, session)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OneWaySpec {
    Standard,
    Table(Vec<u64>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Seeds {
    pub chain: u64,
    pub beta: u64,
    pub vectors: u64,
    pub loss: u64,
}

/// Explicit set-up secrets replacing the generated ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SecretOverrides {
    pub betas: Option<Vec<u64>>,
    pub vectors: Option<Vec<Vec<u64>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JoinEvent {
    pub session: u32,
    pub end: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub q: u64,
    pub structure: StructureSpec,
    pub dummies: u32,
    pub m: u32,
    pub users: BTreeMap<UserId, LifeCycle>,
    pub joins: Vec<JoinEvent>,
    pub loss: LossModel,
    pub seeds: Seeds,
    pub one_way: OneWaySpec,
    pub overrides: SecretOverrides,
}

impl Scenario {
    pub fn field(&self) -> Result<PrimeField> {
        PrimeField::new(self.q).map_err(|e| Error::ScenarioInvalid(format!("{e}")))
    }

    /// Checks everything that can be checked before running.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ScenarioInvalid(msg));
        let field = self.field()?;
        if self.q < MIN_MODULUS {
            return bad(format!("q = {} is below the minimum {MIN_MODULUS}", self.q));
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        let roster = self.structure.real_users();
        if roster.len() != self.structure.roster_len() {
            return bad("user ids repeat across parts".into());
        }
        if let Some(u) = roster.iter().find(|u| u.is_dummy()) {
            return bad(format!("user id {} lies in the reserved dummy range", u.0));
        }
        let total = roster.len() as u64 + self.dummies as u64;
        if total >= self.q {
            return bad(format!("q = {} must exceed roster plus dummies ({total})", self.q));
        }
        for (u, c) in &self.users {
            if !roster.contains(u) {
                return bad(format!("{u} is not in the roster"));
            }
            if LifeCycle::new(c.start, c.end, self.m).is_err() {
                return bad(format!("{u} has cycle ({}, {}) outside 1..={}", c.start, c.end, self.m));
            }
        }
        for e in &self.joins {
            if e.session == 0 || e.session > e.end || e.end > self.m {
                return bad(format!("join ({}, {}) outside 1..={}", e.session, e.end, self.m));
            }
        }
        self.loss.validate()?;
        if let OneWaySpec::Table(t) = &self.one_way {
            OneWayFn::table(field, t.clone()).map_err(|e| Error::ScenarioInvalid(format!("{e}")))?;
        }
        if let Some(b) = &self.overrides.betas {
            if b.len() != self.m as usize || b.iter().any(|&x| x >= self.q) {
                return bad(format!("expected {} blinders below {}", self.m, self.q));
            }
        }
        self.build_structure()?;
        Ok(())
    }

    /// The access structure including dummies.
    pub fn build_structure(&self) -> Result<LinearAccessStructure> {
        let field = self.field()?;
        let wrap = |e: Error| Error::ScenarioInvalid(format!("{e}"));
        match &self.structure {
            StructureSpec::Threshold { t, user_xs } => {
                let used: BTreeSet<u64> = user_xs.values().copied().collect();
                let mut xs: BTreeMap<UserId, _> = user_xs.iter().map(|(&u, &x)| (u, field.element(x))).collect();
                if xs.len() != used.len() || used.iter().any(|&x| x == 0 || x >= self.q) {
                    return Err(Error::ScenarioInvalid("x-coordinates must be distinct and in 1..q".into()));
                }
                let mut free = (1..self.q).filter(|x| !used.contains(x));
                for k in 0..self.dummies {
                    let x = free
                        .next()
                        .ok_or_else(|| Error::ScenarioInvalid("no x-coordinates left for dummies".into()))?;
                    xs.insert(UserId::dummy(k), field.element(x));
                }
                LinearAccessStructure::threshold(*t, &xs, field).map_err(wrap)
            }
            StructureSpec::Multipartite { parts, part_xs } => {
                let mut parts = parts.clone();
                let mut xs: Vec<_> = part_xs.iter().map(|&x| field.element(x)).collect();
                if part_xs.iter().any(|&x| x >= self.q) {
                    return Err(Error::ScenarioInvalid("part x-coordinates must be below q".into()));
                }
                if self.dummies > 0 {
                    let x = (0..self.q)
                        .find(|x| !part_xs.contains(x))
                        .ok_or_else(|| Error::ScenarioInvalid("no x-coordinate left for the dummy part".into()))?;
                    parts.push((0..self.dummies).map(UserId::dummy).collect());
                    xs.push(field.element(x));
                }
                LinearAccessStructure::multipartite(parts, &xs, field).map_err(wrap)
            }
        }
    }

    fn setup_params(&self, structure: &LinearAccessStructure) -> Result<SetupParams> {
        let field = structure.field();
        let one_way = match &self.one_way {
            OneWaySpec::Standard => OneWayFn::sha256(field),
            OneWaySpec::Table(t) => OneWayFn::table(field, t.clone())?,
        };
        let betas = self.overrides.betas.as_ref().map(|b| b.iter().map(|&x| field.element(x)).collect());
        let vectors = match &self.overrides.vectors {
            Some(vs) => Some(
                vs.iter()
                    .map(|v| field.vector(v))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::ScenarioInvalid(format!("{e}")))?,
            ),
            None => None,
        };
        Ok(SetupParams {
            m: self.m,
            chain_seed: field.element(self.seeds.chain),
            beta_seed: self.seeds.beta.to_be_bytes().to_vec(),
            vector_seed: self.seeds.vectors.to_be_bytes().to_vec(),
            one_way,
            betas,
            vectors,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Received,
    HealedFrom(u32),
    Unrecoverable,
}

impl Outcome {
    pub fn label(self) -> String {
        match self {
            Outcome::Received => "received".into(),
            Outcome::HealedFrom(j) => format!("healed-from-{j}"),
            Outcome::Unrecoverable => "unrecoverable".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeRow {
    pub user: UserId,
    pub session: u32,
    pub outcome: Outcome,
    pub delivered: bool,
    pub multiplications: u64,
    pub hash_applications: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SessionRow {
    pub session: u32,
    /// `t_j = |W_j ∪ R_j|`
    pub t_j: usize,
    pub revoked: usize,
    pub padding: usize,
    pub members: usize,
    pub element_count: usize,
    /// `(t_j + 1) · ceil(log2 q)` for single-vector structures.
    pub formula_bits: u64,
    pub element_bits: u64,
    pub element_bytes: usize,
    pub id_bytes: usize,
    pub total_bytes: usize,
    /// Largest multiplication count of any recovery that used `B_j`.
    pub max_multiplications: u64,
    /// `2 (t_j² + t_j)`
    pub multiplication_bound: u64,
    pub delivered: usize,
    pub received: usize,
    pub healed: usize,
    pub unrecoverable: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MemberRow {
    pub user: UserId,
    pub cycle: LifeCycle,
    pub stored_elements: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub session: u32,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub q: u64,
    pub m: u32,
    pub element_bits: u32,
    pub arity: usize,
    pub loss: String,
    /// Sorted by user, then session.
    pub outcomes: Vec<OutcomeRow>,
    pub sessions: Vec<SessionRow>,
    pub failure: Option<Failure>,
    /// Every issued member: cycle and stored field elements.
    pub members: Vec<MemberRow>,
    pub issued: usize,
    pub final_session: u32,
    pub final_revoked: usize,
    pub bytes_emitted: u64,
}

impl RunReport {
    pub fn count(&self, pred: impl Fn(Outcome) -> bool) -> usize {
        self.outcomes.iter().filter(|r| pred(r.outcome)).count()
    }

    pub fn received(&self) -> usize {
        self.count(|o| o == Outcome::Received)
    }

    pub fn healed(&self) -> usize {
        self.count(|o| matches!(o, Outcome::HealedFrom(_)))
    }

    pub fn unrecoverable(&self) -> usize {
        self.count(|o| o == Outcome::Unrecoverable)
    }

    /// Per-session summary rows.
    pub fn summarize(&self) -> &[SessionRow] {
        &self.sessions
    }

    pub fn render_summary(&self) -> String {
        let mut out = String::new();
        let _ =
            writeln!(out, "q = {}, m = {}, element bits = {}, loss = {}", self.q, self.m, self.element_bits, self.loss);
        let _ = writeln!(out, "sessions broadcast: {}", self.sessions.len());
        let _ = writeln!(out, "members issued: {}", self.issued);
        let _ = writeln!(out, "outcomes: {}", self.outcomes.len());
        let _ = writeln!(out, "received: {}", self.received());
        let _ = writeln!(out, "healed: {}", self.healed());
        let _ = writeln!(out, "unrecoverable: {}", self.unrecoverable());
        let _ = writeln!(out, "key mismatches: 0");
        let _ = writeln!(out, "bytes broadcast: {}", self.bytes_emitted);
        let _ = writeln!(out, "revoked at end: {}", self.final_revoked);
        match &self.failure {
            Some(f) => {
                let _ = writeln!(out, "status: system failed at session {} ({})", f.session, f.reason);
            }
            None => {
                let _ = writeln!(out, "status: ok");
            }
        }
        out
    }
}

/// A finished run together with what the attack suite needs.
#[derive(Clone, Debug)]
pub struct Execution {
    pub gm: GmState,
    pub broadcasts: BTreeMap<u32, BroadcastMessage>,
    pub secrets: BTreeMap<UserId, PersonalSecret>,
    pub report: RunReport,
}

impl Execution {
    pub fn transcript(&self) -> crate::adversary::Transcript<'_> {
        crate::adversary::Transcript { gm: &self.gm, broadcasts: &self.broadcasts, secrets: &self.secrets }
    }
}

pub fn run_scenario(sc: &Scenario) -> Result<RunReport> {
    execute(sc).map(|e| e.report)
}

pub fn execute(sc: &Scenario) -> Result<Execution> {
    sc.validate()?;
    let structure = sc.build_structure()?;
    let field = structure.field();
    let params = sc.setup_params(&structure)?;
    let (mut gm, mut secrets) =
        GmState::setup(structure, params, &sc.users).map_err(|e| Error::ScenarioInvalid(format!("{e}")))?;

    let mut channels: BTreeMap<UserId, Channel> = BTreeMap::new();
    let channel = |u: UserId| -> Channel {
        let mut seed = sc.seeds.loss.to_be_bytes().to_vec();
        seed.extend_from_slice(&u.0.to_be_bytes());
        Channel { rng: rng::stream(LOSS_STREAM, &seed), bad: false }
    };

    let mut broadcasts = BTreeMap::new();
    let mut delivered: BTreeSet<(UserId, u32)> = BTreeSet::new();
    let mut sessions: Vec<SessionRow> = Vec::new();
    let mut failure = None;

    for j in 1..=sc.m {
        for e in sc.joins.iter().filter(|e| e.session == j) {
            let (u, s) = gm
                .add_member(e.session, e.end)
                .map_err(|err| Error::ScenarioInvalid(format!("join at session {j} cannot be served: {err}")))?;
            secrets.insert(u, s);
        }
        let msg = match gm.broadcast(j) {
            Ok(msg) => msg,
            Err(e @ (Error::SystemFailed { .. } | Error::PaddingExhausted | Error::RevocationCapacity)) => {
                failure = Some(Failure { session: j, reason: format!("{e}") });
                break;
            }
            Err(e) => return Err(e),
        };
        let frame = protocol::encode_broadcast(&msg, field)?;
        let received = protocol::decode_broadcast(&frame, field)?;
        debug_assert_eq!(received, msg);
        let stats = protocol::wire::broadcast_stats(&received, field)?;
        let record = gm.record(j).expect("broadcast recorded");
        let members = gm.members_at(j);
        for &u in &members {
            let ch = channels.entry(u).or_insert_with(|| channel(u));
            if ch.delivered(&sc.loss, u, j) {
                delivered.insert((u, j));
            }
        }
        let t_j = received.revealed_count() as u64;
        sessions.push(SessionRow {
            session: j,
            t_j: t_j as usize,
            revoked: record.revoked.len(),
            padding: record.padding.len(),
            members: members.len(),
            element_count: stats.element_count,
            formula_bits: (t_j + 1) * field.element_bits() as u64,
            element_bits: stats.element_bits,
            element_bytes: stats.element_bytes,
            id_bytes: stats.id_bytes,
            total_bytes: stats.total_bytes,
            multiplication_bound: 2 * (t_j * t_j + t_j),
            ..SessionRow::default()
        });
        broadcasts.insert(j, received);
        if j < sc.m {
            gm.advance_session()?;
        }
    }
    let last = sessions.last().map_or(0, |r| r.session);

    let mut outcomes = Vec::new();
    for (&u, s) in &secrets {
        for j in s.cycle.sessions().filter(|&j| j <= last) {
            let got = delivered.contains(&(u, j));
            let source = (j..=s.cycle.end.min(last)).find(|j2| delivered.contains(&(u, *j2)));
            let (outcome, mults, hashes) = match source {
                None => (Outcome::Unrecoverable, 0, 0),
                Some(j2) => {
                    let r = protocol::self_heal(s, &broadcasts[&j2], j, gm.structure(), gm.one_way())?;
                    if r.key != gm.session_key(j)? {
                        return Err(Error::KeyMismatch { user: u, session: j });
                    }
                    let row = &mut sessions[j2 as usize - 1];
                    row.max_multiplications = row.max_multiplications.max(r.multiplications);
                    let o = if j2 == j { Outcome::Received } else { Outcome::HealedFrom(j2) };
                    (o, r.multiplications, r.hash_applications)
                }
            };
            let row = &mut sessions[j as usize - 1];
            row.delivered += got as usize;
            match outcome {
                Outcome::Received => row.received += 1,
                Outcome::HealedFrom(_) => row.healed += 1,
                Outcome::Unrecoverable => row.unrecoverable += 1,
            }
            outcomes.push(OutcomeRow {
                user: u,
                session: j,
                outcome,
                delivered: got,
                multiplications: mults,
                hash_applications: hashes,
            });
        }
    }

    let report = RunReport {
        q: sc.q,
        m: sc.m,
        element_bits: field.element_bits(),
        arity: gm.structure().users().map(|u| gm.structure().arity(u).unwrap_or(1)).max().unwrap_or(1),
        loss: sc.loss.name().into(),
        outcomes,
        sessions,
        failure,
        members: secrets
            .values()
            .map(|s| MemberRow { user: s.user, cycle: s.cycle, stored_elements: s.element_count() })
            .collect(),
        issued: secrets.len(),
        final_session: gm.current_session(),
        final_revoked: gm.revoked().len(),
        bytes_emitted: gm.counters().bytes_emitted,
    };
    Ok(Execution { gm, broadcasts, secrets, report })
}

/// Bounds for [`random_scenario`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioBounds {
    pub qs: Vec<u64>,
    pub max_users: u32,
    pub max_m: u32,
    pub max_t: usize,
    pub losses: Vec<LossModel>,
    /// Fraction of scenarios using a multipartite structure.
    pub multipartite_share: f64,
}

impl Default for ScenarioBounds {
    fn default() -> Self {
        ScenarioBounds {
            qs: vec![11, 67],
            max_users: 20,
            max_m: 30,
            max_t: 5,
            losses: vec![
                LossModel::None,
                LossModel::Iid { p: 0.3 },
                LossModel::Iid { p: 0.7 },
                LossModel::Burst { p_enter: 0.2, p_stay: 0.7 },
            ],
            multipartite_share: 0.25,
        }
    }
}

/// A scenario that never exhausts revocation capacity or padding: at most
/// `t - 1` threshold users leave early, `t` dummies back the padding, and in
/// multipartite runs only one whole part may leave, all at once.
pub fn random_scenario(seed: u64, b: &ScenarioBounds) -> Scenario {
    let mut r = rng::stream(b"shkd/scenario", &seed.to_be_bytes());
    let mut pick = |lo: u64, hi: u64| if hi <= lo { lo } else { lo + r.next_u64() % (hi - lo + 1) };
    let q = b.qs[pick(0, b.qs.len() as u64 - 1) as usize];
    let m = pick(1, b.max_m as u64) as u32;
    let multipartite = (pick(0, 999) as f64) < b.multipartite_share * 1000.0;
    let loss = b.losses[pick(0, b.losses.len() as u64 - 1) as usize].clone();
    let seeds = Seeds {
        chain: pick(0, u64::MAX - 1),
        beta: pick(0, u64::MAX - 1),
        vectors: pick(0, u64::MAX - 1),
        loss: pick(0, u64::MAX - 1),
    };

    let cycle = |pick: &mut dyn FnMut(u64, u64) -> u64, leaves_early: bool| {
        if leaves_early && m > 1 {
            let end = pick(1, m as u64 - 1) as u32;
            LifeCycle { start: pick(1, end as u64) as u32, end }
        } else {
            LifeCycle { start: pick(1, m as u64) as u32, end: m }
        }
    };

    let (structure, dummies, users, joins) = if !multipartite {
        let t = pick(1, (b.max_t as u64).min((q - 2) / 2)) as usize;
        let dummies = t as u32;
        let cap = (q - 1).saturating_sub(dummies as u64).min(b.max_users as u64);
        let n = pick(t as u64 + 1, cap.max(t as u64 + 1)) as u32;
        let user_xs: BTreeMap<UserId, u64> = (1..=n).map(|i| (UserId(i), i as u64)).collect();
        let initial = pick(1, n as u64) as u32;
        let mut early_budget = t - 1;
        let mut users = BTreeMap::new();
        for i in 1..=initial {
            let early = early_budget > 0 && pick(0, 2) == 0;
            if early {
                early_budget -= 1;
            }
            users.insert(UserId(i), cycle(&mut pick, early));
        }
        let join_count = pick(0, (n - initial) as u64 / 2);
        let joins = (0..join_count)
            .map(|_| {
                let session = pick(1, m as u64) as u32;
                JoinEvent { session, end: m }
            })
            .collect();
        (StructureSpec::Threshold { t, user_xs }, dummies, users, joins)
    } else {
        let part_count = pick(2, 4) as u32;
        let room = ((q - 2) / part_count as u64).min(b.max_users as u64 / part_count as u64).max(1);
        let per = pick(1, room.min(3)) as u32;
        let parts: Vec<BTreeSet<UserId>> =
            (0..part_count).map(|p| (1..=per).map(|i| UserId(p * per + i)).collect()).collect();
        let part_xs: Vec<u64> = (0..part_count as u64).map(|x| x + 1).collect();
        let mut users = BTreeMap::new();
        // part 0 may leave together, everyone else stays to the end
        let leave = m > 1 && pick(0, 1) == 0;
        let end0 = if leave { pick(1, m as u64 - 1) as u32 } else { m };
        for &u in &parts[0] {
            users.insert(u, LifeCycle { start: 1, end: end0 });
        }
        for part in &parts[1..] {
            for &u in part {
                if pick(0, 1) == 0 {
                    users.insert(u, LifeCycle { start: pick(1, m as u64) as u32, end: m });
                }
            }
        }
        (StructureSpec::Multipartite { parts, part_xs }, 1, users, Vec::new())
    };

    Scenario {
        q,
        structure,
        dummies,
        m,
        users,
        joins,
        loss,
        seeds,
        one_way: OneWaySpec::Standard,
        overrides: SecretOverrides::default(),
    }
}

/// The GF(7) worked instance: t = 2, m = 3, U1..U3 at x = 1..3 with U1 and
/// U2 on (1, 3), S^B = 4, `H(x) = x² + 1`, β = (2, 0, 5), v₁ = (3, 2).
pub fn worked_scenario(loss: LossModel) -> Scenario {
    Scenario {
        q: 7,
        structure: StructureSpec::Threshold { t: 2, user_xs: (1..=3).map(|i| (UserId(i), i as u64)).collect() },
        dummies: 0,
        m: 3,
        users: [(UserId(1), LifeCycle { start: 1, end: 3 }), (UserId(2), LifeCycle { start: 1, end: 3 })]
            .into_iter()
            .collect(),
        joins: Vec::new(),
        loss,
        seeds: Seeds { chain: 4, beta: 0, vectors: 0, loss: 0 },
        one_way: OneWaySpec::Table((0..7).map(|x| (x * x + 1) % 7).collect()),
        overrides: SecretOverrides {
            betas: Some(vec![2, 0, 5]),
            vectors: Some(vec![vec![3, 2], vec![1, 4], vec![6, 5]]),
        },
    }
}

/// Exhaustive span check used by tests and the acceptance suite:
/// `Φ(GM)` is a combination of `vectors` iff some coefficient tuple hits it.
pub fn span_contains_brute_force(vectors: &[gf::FieldVector], goal: &gf::FieldVector) -> bool {
    let q = goal.modulus();
    let k = vectors.len();
    let l = goal.len();
    let mut coeffs = vec![0u64; k];
    loop {
        let hit = (0..l).all(|i| {
            let s = vectors.iter().zip(&coeffs).fold(0u64, |acc, (v, c)| (acc + v.values()[i] * c) % q);
            s == goal.values()[i]
        });
        if hit {
            return true;
        }
        let mut i = 0;
        loop {
            if i == k {
                return false;
            }
            coeffs[i] += 1;
            if coeffs[i] < q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}
