// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Fixpoint of the feasible derivation rules over a coalition view.
//!
//! * `Hash`: `K_i` known gives `K_{i+1} = H(K_i)`.
//! * `Linear`: per session, any dot `v_s · w` with `w` in the span of the
//!   vectors whose dots are known (the manager's vector included once the
//!   mask is known).
//! * `Unmask`: any two of `Z_s`, `v_s · Φ(GM)`, `K_{m-s+1}` give the third.
//! * `Compose`: any two of `β_s`, `K_{m-s+1}`, `SK_s` give the third.
//! * `PredictBeta`: only in the mutated rule set, models a predictable
//!   generator: one known β yields all of them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{Atom, CoalitionView, GroundTruth, Source};
use crate::access::{LinearAccessStructure, UserId};
use crate::chain::{BetaSequence, OneWayFn};
use crate::error::{Error, Result};
use crate::gf::{self, FieldElement, FieldVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Hash,
    Linear,
    Unmask,
    Compose,
    PredictBeta,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rules {
    order: Vec<Rule>,
    predictor: Option<BetaSequence>,
}

impl Default for Rules {
    fn default() -> Self {
        Rules::standard()
    }
}

impl Rules {
    pub fn standard() -> Self {
        Rules { order: alloc::vec![Rule::Hash, Rule::Linear, Rule::Unmask, Rule::Compose], predictor: None }
    }

    /// Same rules, applied in `order` (which must be a permutation of the
    /// standard four).
    pub fn with_order(order: Vec<Rule>) -> Self {
        Rules { order, predictor: None }
    }

    /// Mutation: β values become derivable from any known β. `predictor`
    /// stands in for the attacker's ability to replay the generator.
    pub fn without_beta_blocker(predictor: BetaSequence) -> Self {
        let mut r = Rules::standard();
        r.order.push(Rule::PredictBeta);
        r.predictor = Some(predictor);
        r
    }

    pub fn has_beta_blocker(&self) -> bool {
        self.predictor.is_none()
    }

    pub fn order(&self) -> &[Rule] {
        &self.order
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    Given(Source),
    Hash {
        from: u32,
    },
    /// `value = Σ coefficient · premise`
    Combine {
        rule: Rule,
        terms: Vec<(Atom, FieldElement)>,
    },
    Predicted {
        from: Atom,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fact {
    pub value: FieldElement,
    pub how: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeSet {
    facts: BTreeMap<Atom, Fact>,
}

impl KnowledgeSet {
    pub fn contains(&self, atom: Atom) -> bool {
        self.facts.contains_key(&atom)
    }

    pub fn value(&self, atom: Atom) -> Option<FieldElement> {
        self.facts.get(&atom).map(|f| f.value)
    }

    pub fn fact(&self, atom: Atom) -> Option<&Fact> {
        self.facts.get(&atom)
    }

    pub fn facts(&self) -> &BTreeMap<Atom, Fact> {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Atom -> value, dropping derivations.
    pub fn values(&self) -> BTreeMap<Atom, FieldElement> {
        self.facts.iter().map(|(a, f)| (*a, f.value)).collect()
    }

    pub fn session_keys(&self) -> BTreeMap<u32, FieldElement> {
        self.facts
            .iter()
            .filter_map(|(a, f)| match a {
                Atom::SessionKey { session } => Some((*session, f.value)),
                _ => None,
            })
            .collect()
    }

    /// Multi-line derivation tree for `atom`.
    pub fn explain(&self, atom: Atom) -> String {
        let mut out = String::new();
        let mut seen = BTreeSet::new();
        self.explain_into(atom, 0, &mut seen, &mut out);
        out
    }

    fn explain_into(&self, atom: Atom, depth: usize, seen: &mut BTreeSet<Atom>, out: &mut String) {
        let pad = "  ".repeat(depth);
        let Some(fact) = self.facts.get(&atom) else {
            let _ = writeln!(out, "{pad}{atom}: unknown");
            return;
        };
        let v = fact.value.value();
        if !seen.insert(atom) {
            let _ = writeln!(out, "{pad}{atom} = {v} (see above)");
            return;
        }
        match &fact.how {
            Derivation::Given(src) => {
                let _ = writeln!(out, "{pad}{atom} = {v}, given by {src:?}");
            }
            Derivation::Hash { from } => {
                let _ = writeln!(out, "{pad}{atom} = {v} = H(K{from})");
                self.explain_into(Atom::ChainKey { index: *from }, depth + 1, seen, out);
            }
            Derivation::Combine { rule, terms } => {
                let _ = writeln!(out, "{pad}{atom} = {v} by {rule:?} over {} premises", terms.len());
                for (a, _) in terms {
                    self.explain_into(*a, depth + 1, seen, out);
                }
            }
            Derivation::Predicted { from } => {
                let _ = writeln!(out, "{pad}{atom} = {v}, predicted from {from}");
                self.explain_into(*from, depth + 1, seen, out);
            }
        }
    }

    /// Checks every fact against the true values and replays every
    /// derivation from its premises.
    pub fn verify(&self, truth: &GroundTruth<'_>, engine: &Engine<'_>) -> Result<()> {
        let unsound = |atom: Atom, why: &str| Error::UnsoundDerivation(format!("{atom}: {why}"));
        for (&atom, fact) in &self.facts {
            if truth.value(atom)? != fact.value {
                return Err(unsound(atom, "value differs from ground truth"));
            }
            let premise = |a: &Atom| self.value(*a).ok_or_else(|| unsound(atom, "premise not in closure"));
            let replayed = match &fact.how {
                Derivation::Given(_) => fact.value,
                Derivation::Hash { from } => {
                    if atom != (Atom::ChainKey { index: from + 1 }) {
                        return Err(unsound(atom, "hash step out of place"));
                    }
                    engine.one_way.apply(premise(&Atom::ChainKey { index: *from })?)
                }
                Derivation::Combine { terms, .. } => {
                    let mut acc = fact.value.field().zero();
                    for (a, c) in terms {
                        acc = acc.checked_add(c.checked_mul(premise(a)?)?)?;
                    }
                    acc
                }
                Derivation::Predicted { from } => {
                    premise(from)?;
                    let (Some(p), Atom::Beta { session }) = (&engine.rules.predictor, atom) else {
                        return Err(unsound(atom, "prediction without a predictor"));
                    };
                    p.beta(session)?
                }
            };
            if replayed != fact.value {
                return Err(unsound(atom, "replay disagrees"));
            }
        }
        Ok(())
    }
}

pub struct Engine<'a> {
    structure: &'a LinearAccessStructure,
    one_way: &'a OneWayFn,
    m: u32,
    rules: Rules,
}

struct State<'e> {
    facts: BTreeMap<Atom, Fact>,
    /// Known dots and mask per session when the linear rule last ran.
    linear_seen: BTreeMap<u32, usize>,
    field_one: FieldElement,
    engine: &'e Engine<'e>,
}

impl<'e> State<'e> {
    fn known(&self, a: Atom) -> Option<FieldElement> {
        self.facts.get(&a).map(|f| f.value)
    }

    fn add(&mut self, a: Atom, value: FieldElement, how: Derivation) -> bool {
        if self.facts.contains_key(&a) {
            return false;
        }
        self.facts.insert(a, Fact { value, how });
        true
    }

    fn chain_atom(&self, s: u32) -> Atom {
        Atom::ChainKey { index: self.engine.m - s + 1 }
    }

    fn combine(&mut self, target: Atom, rule: Rule, terms: Vec<(Atom, FieldElement)>) -> Result<bool> {
        if self.facts.contains_key(&target) {
            return Ok(false);
        }
        let mut acc = self.field_one.field().zero();
        for (a, c) in &terms {
            acc = acc.checked_add(c.checked_mul(self.known(*a).expect("premise known"))?)?;
        }
        Ok(self.add(target, acc, Derivation::Combine { rule, terms }))
    }

    fn hash(&mut self) -> bool {
        let mut changed = false;
        for i in 1..self.engine.m {
            if let Some(k) = self.known(Atom::ChainKey { index: i }) {
                if !self.facts.contains_key(&Atom::ChainKey { index: i + 1 }) {
                    let next = self.engine.one_way.apply(k);
                    changed |= self.add(Atom::ChainKey { index: i + 1 }, next, Derivation::Hash { from: i });
                }
            }
        }
        changed
    }

    /// Any two of `(sum, a, b)` with `sum = a + b` give the third.
    fn triangle(&mut self, rule: Rule, sum: Atom, a: Atom, b: Atom) -> Result<bool> {
        let one = self.field_one;
        let minus = -one;
        let (ks, ka, kb) = (self.known(sum).is_some(), self.known(a).is_some(), self.known(b).is_some());
        Ok(match (ks, ka, kb) {
            (false, true, true) => self.combine(sum, rule, alloc::vec![(a, one), (b, one)])?,
            (true, false, true) => self.combine(a, rule, alloc::vec![(sum, one), (b, minus)])?,
            (true, true, false) => self.combine(b, rule, alloc::vec![(sum, one), (a, minus)])?,
            _ => false,
        })
    }

    fn unmask(&mut self) -> Result<bool> {
        let mut changed = false;
        for s in 1..=self.engine.m {
            let k = self.chain_atom(s);
            changed |= self.triangle(Rule::Unmask, Atom::Z { session: s }, k, Atom::Mask { session: s })?;
        }
        Ok(changed)
    }

    fn compose(&mut self, rule: Rule) -> Result<bool> {
        let mut changed = false;
        for s in 1..=self.engine.m {
            let k = self.chain_atom(s);
            changed |= self.triangle(rule, Atom::SessionKey { session: s }, Atom::Beta { session: s }, k)?;
        }
        Ok(changed)
    }

    fn linear(&mut self) -> Result<bool> {
        let structure = self.engine.structure;
        let gm_vec = structure.gm_vector();
        let mut changed = false;
        for s in 1..=self.engine.m {
            let lo = Atom::Dot { session: s, user: UserId(0), index: 0 };
            let hi = Atom::Dot { session: s, user: UserId(u32::MAX), index: u8::MAX };
            let mut atoms: Vec<Atom> = self.facts.range(lo..=hi).map(|(a, _)| *a).collect();
            let mask = Atom::Mask { session: s };
            if self.facts.contains_key(&mask) {
                atoms.push(mask);
            }
            if atoms.is_empty() || self.linear_seen.get(&s) == Some(&atoms.len()) {
                continue;
            }
            let mut vecs: Vec<FieldVector> = Vec::with_capacity(atoms.len());
            for a in &atoms {
                vecs.push(match *a {
                    Atom::Dot { user, index, .. } => structure.phi(user)?[index as usize].clone(),
                    _ => gm_vec.clone(),
                });
            }
            let mut targets: Vec<(Atom, &FieldVector)> = Vec::new();
            for u in structure.users() {
                for (r, w) in structure.phi(u)?.iter().enumerate() {
                    let a = Atom::Dot { session: s, user: u, index: r as u8 };
                    if !self.facts.contains_key(&a) {
                        targets.push((a, w));
                    }
                }
            }
            if !self.facts.contains_key(&mask) {
                targets.push((mask, gm_vec));
            }
            let mut added = 0;
            for (a, w) in targets {
                if let Some(lambda) = gf::solve_combination(&vecs, w)? {
                    let terms = atoms.iter().zip(lambda).filter(|(_, c)| !c.is_zero()).map(|(a, c)| (*a, c)).collect();
                    if self.combine(a, Rule::Linear, terms)? {
                        added += 1;
                    }
                }
            }
            changed |= added > 0;
            self.linear_seen.insert(s, atoms.len() + added);
        }
        Ok(changed)
    }

    fn predict(&mut self) -> bool {
        let Some(p) = &self.engine.rules.predictor else { return false };
        let from = (1..=self.engine.m).map(|s| Atom::Beta { session: s }).find(|a| self.facts.contains_key(a));
        let Some(from) = from else { return false };
        let mut changed = false;
        for s in 1..=self.engine.m {
            if let Ok(b) = p.beta(s) {
                changed |= self.add(Atom::Beta { session: s }, b, Derivation::Predicted { from });
            }
        }
        changed
    }
}

impl<'a> Engine<'a> {
    pub fn new(structure: &'a LinearAccessStructure, one_way: &'a OneWayFn, m: u32, rules: Rules) -> Self {
        Engine { structure, one_way, m, rules }
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    pub fn closure(&self, view: &CoalitionView) -> Result<KnowledgeSet> {
        let mut st = State {
            facts: BTreeMap::new(),
            linear_seen: BTreeMap::new(),
            field_one: self.structure.field().one(),
            engine: self,
        };
        for (&a, &(v, src)) in &view.given {
            st.facts.insert(a, Fact { value: v, how: Derivation::Given(src) });
        }
        loop {
            let mut changed = false;
            for rule in &self.rules.order {
                changed |= match rule {
                    Rule::Hash => st.hash(),
                    Rule::Linear => st.linear()?,
                    Rule::Unmask => st.unmask()?,
                    Rule::Compose => st.compose(Rule::Compose)?,
                    Rule::PredictBeta => st.predict(),
                };
            }
            if !changed {
                break;
            }
        }
        Ok(KnowledgeSet { facts: st.facts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::member;
    use crate::testkit;
    use alloc::vec;

    fn lone_member_view(
        secret: &crate::protocol::PersonalSecret,
        delivered: &[&crate::protocol::BroadcastMessage],
    ) -> CoalitionView {
        let mut v = CoalitionView::new([secret.user].into_iter().collect());
        v.add_secret(secret);
        for b in delivered {
            v.add_broadcast(b);
        }
        v
    }

    #[test]
    fn member_at_j_derives_sk_j() {
        let (mut gm, secrets) = testkit::worked_gm();
        let b = testkit::broadcast_all(&mut gm);
        let engine = Engine::new(gm.structure(), gm.one_way(), 3, Rules::standard());
        let k = engine.closure(&lone_member_view(&secrets[&UserId(1)], &[&b[&1]])).unwrap();
        assert_eq!(k.value(Atom::SessionKey { session: 1 }).unwrap().value(), 5);
        assert!(!k.contains(Atom::SessionKey { session: 2 }));
        k.verify(&GroundTruth::new(&gm), &engine).unwrap();
    }

    #[test]
    fn lone_member_matches_recover_and_heal() {
        for seed in 0..30u64 {
            let (mut gm, secrets) = testkit::random_threshold_run(seed);
            let b = testkit::broadcast_all(&mut gm);
            let engine = Engine::new(gm.structure(), gm.one_way(), gm.m(), Rules::standard());
            let mut r = crate::rng::stream(b"test/delivery", &seed.to_be_bytes());
            for (u, s) in &secrets {
                let delivered: Vec<&crate::protocol::BroadcastMessage> =
                    b.values().filter(|_| rand_core::RngCore::next_u32(&mut r).is_multiple_of(2)).collect();
                let k = engine.closure(&lone_member_view(s, &delivered)).unwrap();
                let mut expected = BTreeMap::new();
                for j in s.cycle.sessions() {
                    let later = delivered.iter().find(|m| m.session >= j && s.cycle.contains(m.session));
                    if let Some(m) = later {
                        let h = member::self_heal(s, m, j, gm.structure(), gm.one_way()).unwrap();
                        expected.insert(j, h.key.value);
                    }
                }
                assert_eq!(k.session_keys(), expected, "seed {seed} user {u}");
            }
        }
    }

    #[test]
    fn rule_order_does_not_change_fixpoint() {
        let base = [Rule::Hash, Rule::Linear, Rule::Unmask, Rule::Compose];
        let mut orders = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let idx = [a, b, c, d];
                        if (0..4).all(|i| idx.contains(&i)) {
                            orders.push(idx.map(|i| base[i]).to_vec());
                        }
                    }
                }
            }
        }
        assert_eq!(orders.len(), 24);
        for seed in 0..10u64 {
            let (mut gm, secrets) = testkit::random_threshold_run(seed);
            let b = testkit::broadcast_all(&mut gm);
            let mut view = CoalitionView::new(BTreeSet::new());
            for m in b.values() {
                view.add_broadcast(m);
            }
            if let Some(s) = secrets.values().next() {
                view.add_secret(s);
            }
            let reference =
                Engine::new(gm.structure(), gm.one_way(), gm.m(), Rules::standard()).closure(&view).unwrap();
            for o in &orders {
                let e = Engine::new(gm.structure(), gm.one_way(), gm.m(), Rules::with_order(o.clone()));
                let k = e.closure(&view).unwrap();
                assert_eq!(k.values(), reference.values(), "order {o:?}");
                k.verify(&GroundTruth::new(&gm), &e).unwrap();
            }
        }
    }

    #[test]
    fn enlarging_a_view_never_shrinks_closure() {
        for seed in 0..15u64 {
            let (mut gm, secrets) = testkit::random_threshold_run(seed);
            let b = testkit::broadcast_all(&mut gm);
            let engine = Engine::new(gm.structure(), gm.one_way(), gm.m(), Rules::standard());
            let mut full = CoalitionView::new(BTreeSet::new());
            for m in b.values() {
                full.add_broadcast(m);
            }
            for s in secrets.values() {
                full.add_secret(s);
            }
            let mut r = crate::rng::stream(b"test/monotone", &seed.to_be_bytes());
            let mut small = CoalitionView::new(BTreeSet::new());
            for (a, v) in &full.given {
                if rand_core::RngCore::next_u32(&mut r).is_multiple_of(3) {
                    small.given.insert(*a, *v);
                }
            }
            let ks = engine.closure(&small).unwrap();
            let kf = engine.closure(&full).unwrap();
            for (a, f) in ks.facts() {
                assert_eq!(kf.value(*a), Some(f.value));
            }
        }
    }

    #[test]
    fn tampered_fact_is_caught() {
        let (mut gm, secrets) = testkit::worked_gm();
        let b = testkit::broadcast_all(&mut gm);
        let engine = Engine::new(gm.structure(), gm.one_way(), 3, Rules::standard());
        let mut view = lone_member_view(&secrets[&UserId(1)], &[&b[&1]]);
        let f = gm.structure().field();
        view.given.insert(Atom::Beta { session: 1 }, (f.element(6), Source::Grant));
        let k = engine.closure(&view).unwrap();
        assert!(matches!(k.verify(&GroundTruth::new(&gm), &engine), Err(Error::UnsoundDerivation(_))));
    }

    #[test]
    fn explain_renders_chain() {
        let (mut gm, secrets) = testkit::worked_gm();
        let b = testkit::broadcast_all(&mut gm);
        let engine = Engine::new(gm.structure(), gm.one_way(), 3, Rules::standard());
        let k = engine.closure(&lone_member_view(&secrets[&UserId(1)], &[&b[&2]])).unwrap();
        let text = k.explain(Atom::SessionKey { session: 1 });
        assert!(text.starts_with("SK@1 = 5"), "{text}");
        assert!(text.contains("H(K2)"), "{text}");
        assert_eq!(vec![1], vec![1]);
    }
}
