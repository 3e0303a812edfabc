// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Forward, backward, collusion and revocation experiments over an executed
//! run.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::census::{census_is_uniform, secrecy_census};
use super::closure::{Engine, KnowledgeSet, Rules};
use super::{Atom, CoalitionView, GroundTruth};
use crate::access::UserId;
use crate::error::{Error, Result};
use crate::protocol::{BroadcastMessage, GmState, PersonalSecret};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Forward,
    Backward,
    Collusion,
    Revocation,
}

impl Property {
    pub const ALL: [Property; 4] = [Property::Forward, Property::Backward, Property::Collusion, Property::Revocation];

    pub fn name(self) -> &'static str {
        match self {
            Property::Forward => "forward",
            Property::Backward => "backward",
            Property::Collusion => "collusion",
            Property::Revocation => "revocation",
        }
    }

    pub fn parse(s: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// How much the experiment hands the coalition beyond its own secrets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViewMode {
    /// Everything the security argument grants: dots of every session, β
    /// and session keys outside the target window, the chain seed for
    /// collusion.
    ProofFaithful,
    /// Only the coalition's issued secrets, the broadcasts and the session
    /// keys outside the target window.
    CycleFaithful,
}

impl ViewMode {
    pub fn name(self) -> &'static str {
        match self {
            ViewMode::ProofFaithful => "proof",
            ViewMode::CycleFaithful => "cycle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CensusStatus {
    Uniform,
    NonUniform,
    /// The coalition's direct observation is itself authorized.
    NotApplicable,
    Infeasible,
}

impl CensusStatus {
    pub fn name(self) -> &'static str {
        match self {
            CensusStatus::Uniform => "uniform",
            CensusStatus::NonUniform => "non-uniform",
            CensusStatus::NotApplicable => "n/a",
            CensusStatus::Infeasible => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub property: Property,
    pub mode: ViewMode,
    /// Session the experiment is anchored at (`j`, or `j1` for collusion).
    pub session: u32,
    /// Last session of the collusion window, otherwise equal to `session`.
    pub window_end: u32,
    pub coalition: BTreeSet<UserId>,
    pub targets: Vec<u32>,
    pub leaked: Vec<u32>,
    pub census: CensusStatus,
    pub privacy_ok: bool,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AttackReport {
    pub verdicts: Vec<Verdict>,
}

impl AttackReport {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn property_passed(&self, p: Property) -> bool {
        self.verdicts.iter().filter(|v| v.property == p).all(|v| v.passed)
    }

    pub fn count(&self, p: Property) -> usize {
        self.verdicts.iter().filter(|v| v.property == p).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for p in Property::ALL {
            let n = self.count(p);
            let failed = self.verdicts.iter().filter(|v| v.property == p && !v.passed).count();
            let _ = writeln!(out, "{:<11} experiments={n:<4} failed={failed}", p.name());
        }
        for v in self.verdicts.iter().filter(|v| !v.passed) {
            let _ = writeln!(
                out,
                "FAIL {} [{}] session {} coalition {}: leaked {:?}, census {}, privacy {}",
                v.property.name(),
                v.mode.name(),
                v.session,
                fmt_set(&v.coalition),
                v.leaked,
                v.census.name(),
                if v.privacy_ok { "ok" } else { "violated" },
            );
            out.push_str(&v.detail);
        }
        out
    }
}

pub fn fmt_set(s: &BTreeSet<UserId>) -> String {
    let parts: Vec<String> = s.iter().map(|u| format!("{u}")).collect();
    format!("{{{}}}", parts.join(" "))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteOptions {
    pub properties: Vec<Property>,
    pub modes: Vec<ViewMode>,
    /// Drops the rule that keeps unseen β values underivable.
    pub remove_beta_blocker: bool,
    /// Run the census when `q^l` is small enough.
    pub census: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            properties: Property::ALL.to_vec(),
            modes: alloc::vec![ViewMode::ProofFaithful, ViewMode::CycleFaithful],
            remove_beta_blocker: false,
            census: true,
        }
    }
}

/// Everything an executed run leaves behind.
#[derive(Clone, Copy, Debug)]
pub struct Transcript<'a> {
    pub gm: &'a GmState,
    pub broadcasts: &'a BTreeMap<u32, BroadcastMessage>,
    pub secrets: &'a BTreeMap<UserId, PersonalSecret>,
}

struct Ctx<'a> {
    t: Transcript<'a>,
    truth: GroundTruth<'a>,
    engine: Engine<'a>,
    last: u32,
    census: bool,
}

struct Experiment {
    property: Property,
    session: u32,
    window_end: u32,
    coalition: BTreeSet<UserId>,
    targets: Vec<u32>,
    census_session: Option<u32>,
    privacy_session: Option<u32>,
}

impl<'a> Ctx<'a> {
    fn base_view(
        &self,
        coalition: &BTreeSet<UserId>,
        mode: ViewMode,
        dot_sessions: impl Iterator<Item = u32> + Clone,
    ) -> Result<CoalitionView> {
        let mut view = CoalitionView::new(coalition.clone());
        for b in self.t.broadcasts.values() {
            view.add_broadcast(b);
        }
        match mode {
            ViewMode::CycleFaithful => {
                for u in coalition {
                    if let Some(s) = self.t.secrets.get(u) {
                        view.add_secret(s);
                    }
                }
            }
            ViewMode::ProofFaithful => {
                let st = self.t.gm.structure();
                for &u in coalition {
                    for s in dot_sessions.clone() {
                        for r in 0..st.arity(u)? {
                            view.grant(Atom::Dot { session: s, user: u, index: r as u8 }, &self.truth)?;
                        }
                    }
                }
            }
        }
        Ok(view)
    }

    fn grant_keys(&self, view: &mut CoalitionView, sessions: impl Iterator<Item = u32>, betas: bool) -> Result<()> {
        for s in sessions {
            if s >= 1 && s <= self.last {
                view.grant(Atom::SessionKey { session: s }, &self.truth)?;
            }
            if betas && s >= 1 && s <= self.t.gm.m() {
                view.grant(Atom::Beta { session: s }, &self.truth)?;
            }
        }
        Ok(())
    }

    fn view_for(&self, e: &Experiment, mode: ViewMode) -> Result<CoalitionView> {
        let proof = mode == ViewMode::ProofFaithful;
        let (m, last) = (self.t.gm.m(), self.last);
        let c = &e.coalition;
        let view = match e.property {
            Property::Forward | Property::Revocation => {
                let j = e.session;
                let mut v = self.base_view(c, mode, 1..=last)?;
                self.grant_keys(&mut v, 1..j, proof)?;
                v
            }
            Property::Backward => {
                let j = e.session;
                let mut v = self.base_view(c, mode, j + 1..=last)?;
                match mode {
                    ViewMode::ProofFaithful => self.grant_keys(&mut v, j + 1..=m, true)?,
                    ViewMode::CycleFaithful => {
                        let covered: BTreeSet<u32> =
                            c.iter().filter_map(|u| self.t.gm.cycle(*u)).flat_map(|cy| cy.sessions()).collect();
                        self.grant_keys(&mut v, covered.into_iter(), false)?;
                    }
                }
                v
            }
            Property::Collusion => {
                let (j1, j2) = (e.session, e.window_end + 1);
                let mut v = self.base_view(c, mode, 1..=last)?;
                self.grant_keys(&mut v, (1..j1).chain(j2..=m), proof)?;
                if proof {
                    v.grant(Atom::ChainKey { index: 1 }, &self.truth)?;
                }
                v
            }
        };
        Ok(view)
    }

    fn census_status(&self, view: &CoalitionView, session: u32) -> Result<CensusStatus> {
        let st = self.t.gm.structure();
        let observed = view.observed_dots(session);
        let users: BTreeSet<UserId> = observed.keys().map(|(u, _)| *u).collect();
        if st.is_authorized(&users)? {
            return Ok(CensusStatus::NotApplicable);
        }
        if !self.census {
            return Ok(CensusStatus::Infeasible);
        }
        match secrecy_census(st, &observed) {
            Ok(counts) if census_is_uniform(&counts) => Ok(CensusStatus::Uniform),
            Ok(_) => Ok(CensusStatus::NonUniform),
            Err(Error::CensusInfeasible { .. }) => Ok(CensusStatus::Infeasible),
            Err(e) => Err(e),
        }
    }

    fn privacy_ok(&self, k: &KnowledgeSet, coalition: &BTreeSet<UserId>, j: u32) -> Result<bool> {
        if k.contains(Atom::Beta { session: j }) {
            return Ok(false);
        }
        let st = self.t.gm.structure();
        for u in self.t.gm.members_at(j) {
            if coalition.contains(&u) {
                continue;
            }
            for r in 0..st.arity(u)? {
                if k.contains(Atom::Dot { session: j, user: u, index: r as u8 }) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn run(&self, e: &Experiment, mode: ViewMode) -> Result<Verdict> {
        let view = self.view_for(e, mode)?;
        let k = self.engine.closure(&view)?;
        k.verify(&self.truth, &self.engine)?;
        let leaked: Vec<u32> =
            e.targets.iter().copied().filter(|&j| k.contains(Atom::SessionKey { session: j })).collect();
        let census = match e.census_session {
            Some(j) => self.census_status(&view, j)?,
            None => CensusStatus::NotApplicable,
        };
        let privacy_ok = match e.privacy_session {
            Some(j) => self.privacy_ok(&k, &e.coalition, j)?,
            None => true,
        };
        let passed = leaked.is_empty() && census != CensusStatus::NonUniform && privacy_ok;
        let detail = match leaked.first() {
            Some(&j) => k.explain(Atom::SessionKey { session: j }),
            None => String::new(),
        };
        Ok(Verdict {
            property: e.property,
            mode,
            session: e.session,
            window_end: e.window_end,
            coalition: e.coalition.clone(),
            targets: e.targets.clone(),
            leaked,
            census,
            privacy_ok,
            passed,
            detail,
        })
    }

    fn experiments(&self, p: Property) -> Result<Vec<Experiment>> {
        let gm = self.t.gm;
        let st = gm.structure();
        let last = self.last;
        let mut out = Vec::new();
        match p {
            Property::Forward => {
                for j in 2..=last {
                    let c = gm.revoked_at(j);
                    if c.is_empty() {
                        continue;
                    }
                    out.push(Experiment {
                        property: p,
                        session: j,
                        window_end: j,
                        targets: (j..=last).collect(),
                        coalition: c,
                        census_session: Some(j),
                        privacy_session: Some(j),
                    });
                }
            }
            Property::Revocation => {
                for j in 1..=last {
                    out.push(Experiment {
                        property: p,
                        session: j,
                        window_end: j,
                        targets: alloc::vec![j],
                        coalition: gm.revoked_at(j),
                        census_session: Some(j),
                        privacy_session: Some(j),
                    });
                }
            }
            Property::Backward => {
                for j in 1..=last {
                    let c: BTreeSet<UserId> =
                        gm.ledger().iter().filter(|(_, cy)| cy.start > j).map(|(u, _)| *u).collect();
                    if c.is_empty() {
                        continue;
                    }
                    out.push(Experiment {
                        property: p,
                        session: j,
                        window_end: j,
                        targets: (1..=j).collect(),
                        coalition: c,
                        census_session: Some(j),
                        privacy_session: None,
                    });
                }
            }
            Property::Collusion => {
                let starts: BTreeSet<u32> = gm.ledger().values().map(|c| c.start).filter(|&s| s >= 2).collect();
                let revocations: BTreeSet<u32> = gm.ledger().values().map(|c| c.end + 1).collect();
                for &j2 in &starts {
                    for &j1 in revocations.iter().filter(|&&j1| j1 < j2 && j1 <= last) {
                        let l1 = gm.revoked_at(j1);
                        if l1.is_empty() {
                            continue;
                        }
                        if st.is_authorized(&l1)? {
                            return Err(Error::ScenarioInvalid(format!(
                                "revoked set {} before session {j1} is authorized",
                                fmt_set(&l1)
                            )));
                        }
                        // every later joiner: β_j is the blocker whatever the
                        // coalition size
                        let mut c = l1.clone();
                        c.extend(gm.ledger().iter().filter(|(_, cy)| cy.start >= j2).map(|(u, _)| *u));
                        let end = (j2 - 1).min(last);
                        out.push(Experiment {
                            property: p,
                            session: j1,
                            window_end: end,
                            targets: (j1..=end).collect(),
                            coalition: c,
                            census_session: Some(j1),
                            privacy_session: None,
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs the requested experiments. Every closure is replayed against the
/// manager's ground truth; an unsound derivation is an error, not a verdict.
pub fn run_attack_suite(t: Transcript<'_>, opts: &SuiteOptions) -> Result<AttackReport> {
    let gm = t.gm;
    let rules =
        if opts.remove_beta_blocker { Rules::without_beta_blocker(gm.betas().clone()) } else { Rules::standard() };
    let last = t.broadcasts.keys().next_back().copied().unwrap_or(0);
    for (j, b) in t.broadcasts {
        if *j != b.session || *j > gm.m() {
            return Err(Error::ScenarioInvalid(format!("broadcast keyed {j} carries session {}", b.session)));
        }
    }
    let ctx = Ctx {
        t,
        truth: GroundTruth::new(gm),
        engine: Engine::new(gm.structure(), gm.one_way(), gm.m(), rules),
        last,
        census: opts.census,
    };
    let mut report = AttackReport::default();
    for &p in &opts.properties {
        for e in ctx.experiments(p)? {
            for &mode in &opts.modes {
                report.verdicts.push(ctx.run(&e, mode)?);
            }
        }
    }
    Ok(report)
}
