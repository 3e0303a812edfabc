// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Linear access structures.
//!
//! A structure maps every user (real or dummy) to a list of public vectors and
//! fixes the group manager's vector. A set of users is authorized exactly when
//! the group manager's vector lies in the span of the users' vectors. Each
//! factory also fixes how the padding set of a broadcast is chosen, since
//! computing maximal unauthorized sets for an arbitrary structure is hard.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::gf::{self, FieldElement, FieldVector, PrimeField};

/// First id of the reserved dummy range.
pub const DUMMY_BASE: u32 = 1 << 24;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

impl UserId {
    /// The `k`-th dummy user.
    pub const fn dummy(k: u32) -> UserId {
        UserId(DUMMY_BASE + k)
    }

    pub const fn is_dummy(self) -> bool {
        self.0 >= DUMMY_BASE
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dummy() {
            write!(f, "D{}", self.0 - DUMMY_BASE)
        } else {
            write!(f, "U{}", self.0)
        }
    }
}

impl fmt::Debug for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Bipartite structure over classes `X` and `Y`: authorized
/// iff `|A ∩ X| >= t`, or `|A ∩ X| + |A ∩ Y| >= j + 1` with `|A ∩ Y| >= 1`.
///
/// Only the descriptor is modelled; vectors realizing it must be supplied
/// through [`LinearAccessStructure::generic`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteDescriptor {
    pub x_class: BTreeSet<UserId>,
    pub y_class: BTreeSet<UserId>,
    pub t: usize,
    pub j: usize,
}

impl BipartiteDescriptor {
    pub fn new(x_class: BTreeSet<UserId>, y_class: BTreeSet<UserId>, t: usize, j: usize) -> Result<Self> {
        if j == 0 || j + 1 > t {
            return Err(Error::Config(format!("bipartite needs 1 <= j <= t-1, got t={t} j={j}")));
        }
        if !x_class.is_disjoint(&y_class) {
            return Err(Error::Config("bipartite classes overlap".into()));
        }
        Ok(BipartiteDescriptor { x_class, y_class, t, j })
    }

    pub fn authorizes_point(&self, x: usize, y: usize) -> bool {
        x >= self.t || (x + y > self.j && y >= 1)
    }

    /// Points of the maximal non-authorized subsets:
    /// `(t-1, 0), (j-1, 1), (j-2, 2), ..., (0, j)`.
    pub fn maximal_points(&self) -> Vec<(usize, usize)> {
        let mut pts = alloc::vec![(self.t - 1, 0)];
        pts.extend((1..=self.j).map(|y| (self.j - y, y)));
        pts
    }

    pub fn point_of(&self, set: &BTreeSet<UserId>) -> (usize, usize) {
        (set.intersection(&self.x_class).count(), set.intersection(&self.y_class).count())
    }

    /// Every maximal non-authorized subset, by enumeration over the classes.
    pub fn maximal_unauthorized_sets(&self) -> Vec<BTreeSet<UserId>> {
        let xs: Vec<UserId> = self.x_class.iter().copied().collect();
        let ys: Vec<UserId> = self.y_class.iter().copied().collect();
        let mut out = Vec::new();
        for (px, py) in self.maximal_points() {
            if px > xs.len() || py > ys.len() {
                continue;
            }
            for cx in combinations(&xs, px) {
                for cy in combinations(&ys, py) {
                    out.push(cx.iter().chain(cy.iter()).copied().collect());
                }
            }
        }
        out
    }
}

fn combinations(items: &[UserId], k: usize) -> Vec<Vec<UserId>> {
    if k == 0 {
        return alloc::vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &head) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, head);
            out.push(rest);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureKind {
    Threshold { t: usize },
    Multipartite { parts: Vec<BTreeSet<UserId>> },
    Generic { max_unauthorized: Vec<BTreeSet<UserId>>, bipartite: Option<BipartiteDescriptor> },
}

/// Dot products `v_j · Φ(U)` for a set of users.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareSet {
    pub session: u32,
    pub entries: BTreeMap<UserId, Vec<FieldElement>>,
}

/// Reconstruction coefficients keyed by `(user, vector index)`.
pub type Coefficients = BTreeMap<(UserId, usize), FieldElement>;

/// Share labels and their vectors, in matching order.
type Gathered = (Vec<(UserId, usize)>, Vec<FieldVector>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearAccessStructure {
    field: PrimeField,
    dim: usize,
    phi: BTreeMap<UserId, Vec<FieldVector>>,
    gm_vector: FieldVector,
    kind: StructureKind,
}

impl LinearAccessStructure {
    /// Shamir `(t, n)` threshold: `Φ(U) = (1, x, x², …, x^{t-1})`, `Φ(GM) = (1, 0, …, 0)`.
    pub fn threshold(t: usize, user_xs: &BTreeMap<UserId, FieldElement>, field: PrimeField) -> Result<Self> {
        if t == 0 {
            return Err(Error::Config("threshold must be at least 1".into()));
        }
        if field.modulus() <= user_xs.len() as u64 {
            return Err(Error::Config(format!(
                "q = {} must exceed the number of users {}",
                field.modulus(),
                user_xs.len()
            )));
        }
        let mut seen = BTreeSet::new();
        let mut phi = BTreeMap::new();
        for (&user, &x) in user_xs {
            if x.modulus() != field.modulus() {
                return Err(Error::ModulusMismatch { left: field.modulus(), right: x.modulus() });
            }
            if x.is_zero() {
                return Err(Error::Config(format!("x-coordinate of {user} is zero")));
            }
            if !seen.insert(x.value()) {
                return Err(Error::Config(format!("duplicate x-coordinate {x}")));
            }
            let powers: Vec<FieldElement> = (0..t as u64).map(|k| x.pow(k)).collect();
            phi.insert(user, alloc::vec![FieldVector::from_elements(&powers)?]);
        }
        let mut gm = alloc::vec![0u64; t];
        gm[0] = 1;
        Ok(LinearAccessStructure {
            field,
            dim: t,
            phi,
            gm_vector: field.vector(&gm)?,
            kind: StructureKind::Threshold { t },
        })
    }

    /// Complete multipartite structure: `Φ(U) = (x_i, 1)` for `U` in part `i`,
    /// `Φ(GM) = (1, 0)`.
    pub fn multipartite(parts: Vec<BTreeSet<UserId>>, part_xs: &[FieldElement], field: PrimeField) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::Config("multipartite needs at least two parts".into()));
        }
        if parts.len() != part_xs.len() {
            return Err(Error::Config("one x-coordinate per part is required".into()));
        }
        let mut phi = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (part, &x) in parts.iter().zip(part_xs) {
            if part.is_empty() {
                return Err(Error::Config("empty part".into()));
            }
            if x.modulus() != field.modulus() {
                return Err(Error::ModulusMismatch { left: field.modulus(), right: x.modulus() });
            }
            if !seen.insert(x.value()) {
                return Err(Error::Config(format!("duplicate part x-coordinate {x}")));
            }
            let v = FieldVector::from_elements(&[x, field.one()])?;
            for &u in part {
                if phi.insert(u, alloc::vec![v.clone()]).is_some() {
                    return Err(Error::Config(format!("{u} appears in more than one part")));
                }
            }
        }
        Ok(LinearAccessStructure {
            field,
            dim: 2,
            phi,
            gm_vector: field.vector(&[1, 0])?,
            kind: StructureKind::Multipartite { parts },
        })
    }

    /// Caller-supplied vectors. Every supplied maximal unauthorized set is
    /// checked against span semantics (unauthorized, and adding any other
    /// user authorizes it).
    pub fn generic(
        phi: BTreeMap<UserId, Vec<FieldVector>>,
        gm_vector: FieldVector,
        max_unauthorized: Vec<BTreeSet<UserId>>,
        bipartite: Option<BipartiteDescriptor>,
    ) -> Result<Self> {
        let field = gm_vector.field();
        let dim = gm_vector.len();
        if gm_vector.is_zero() {
            return Err(Error::Config("group manager vector is zero".into()));
        }
        for (u, vs) in &phi {
            if vs.is_empty() {
                return Err(Error::Config(format!("{u} has no vectors")));
            }
            for v in vs {
                if v.modulus() != field.modulus() {
                    return Err(Error::ModulusMismatch { left: field.modulus(), right: v.modulus() });
                }
                if v.len() != dim {
                    return Err(Error::LengthMismatch { left: dim, right: v.len() });
                }
            }
        }
        let mut s = LinearAccessStructure {
            field,
            dim,
            phi,
            gm_vector,
            kind: StructureKind::Generic { max_unauthorized: Vec::new(), bipartite },
        };
        for set in &max_unauthorized {
            if s.is_authorized(set)? {
                return Err(Error::Config(format!("supplied set {set:?} is authorized")));
            }
            if !s.is_maximal_unauthorized(set)? {
                return Err(Error::Config(format!("supplied set {set:?} is not maximal")));
            }
        }
        if let StructureKind::Generic { max_unauthorized: slot, bipartite } = &mut s.kind {
            if let Some(bp) = bipartite {
                if !bp.x_class.union(&bp.y_class).all(|u| s.phi.contains_key(u)) {
                    return Err(Error::Config("bipartite classes mention unknown users".into()));
                }
            }
            *slot = max_unauthorized;
        }
        Ok(s)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &StructureKind {
        &self.kind
    }

    pub fn gm_vector(&self) -> &FieldVector {
        &self.gm_vector
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.phi.keys().copied()
    }

    pub fn real_users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.users().filter(|u| !u.is_dummy())
    }

    pub fn dummies(&self) -> impl Iterator<Item = UserId> + '_ {
        self.users().filter(|u| u.is_dummy())
    }

    pub fn contains(&self, user: UserId) -> bool {
        self.phi.contains_key(&user)
    }

    pub fn user_count(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self, user: UserId) -> Result<&[FieldVector]> {
        self.phi.get(&user).map(Vec::as_slice).ok_or(Error::UnknownUser(user))
    }

    /// Number of vectors assigned to `user`.
    pub fn arity(&self, user: UserId) -> Result<usize> {
        Ok(self.phi(user)?.len())
    }

    fn gather(&self, set: &BTreeSet<UserId>) -> Result<Gathered> {
        let mut keys = Vec::new();
        let mut vecs = Vec::new();
        for &u in set {
            for (r, v) in self.phi(u)?.iter().enumerate() {
                keys.push((u, r));
                vecs.push(v.clone());
            }
        }
        Ok((keys, vecs))
    }

    pub fn is_authorized(&self, set: &BTreeSet<UserId>) -> Result<bool> {
        let (_, vecs) = self.gather(set)?;
        Ok(gf::solve_combination(&vecs, &self.gm_vector)?.is_some())
    }

    /// Unauthorized, and adding any single outside user authorizes it.
    pub fn is_maximal_unauthorized(&self, set: &BTreeSet<UserId>) -> Result<bool> {
        if self.is_authorized(set)? {
            return Ok(false);
        }
        for u in self.users() {
            if !set.contains(&u) {
                let mut bigger = set.clone();
                bigger.insert(u);
                if !self.is_authorized(&bigger)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Λ` with `Σ Λ_{k,r} Φ(U_k)[r] = Φ(GM)`.
    pub fn reconstruction_coefficients(&self, set: &BTreeSet<UserId>) -> Result<Coefficients> {
        let (keys, vecs) = self.gather(set)?;
        let lam = gf::solve_combination(&vecs, &self.gm_vector)?.ok_or(Error::NotAuthorized)?;
        Ok(keys.into_iter().zip(lam).collect())
    }

    /// `v · Φ(U)[r]` for each of `user`'s vectors.
    pub fn share_of(&self, v: &FieldVector, user: UserId) -> Result<Vec<FieldElement>> {
        if v.len() != self.dim {
            return Err(Error::LengthMismatch { left: self.dim, right: v.len() });
        }
        self.phi(user)?.iter().map(|w| v.dot(w)).collect()
    }

    /// Shares of every user, dummies included.
    pub fn compute_shares(&self, v: &FieldVector, session: u32) -> Result<ShareSet> {
        self.shares_for(v, session, self.users())
    }

    pub fn shares_for(
        &self,
        v: &FieldVector,
        session: u32,
        users: impl IntoIterator<Item = UserId>,
    ) -> Result<ShareSet> {
        let mut entries = BTreeMap::new();
        for u in users {
            entries.insert(u, self.share_of(v, u)?);
        }
        Ok(ShareSet { session, entries })
    }

    /// Chooses the padding set `W` so that `W ∪ revoked` is a maximal
    /// unauthorized set of minimal padding size, disjoint from `active`.
    /// Ties break towards the lowest ids, which puts real users ahead of
    /// dummies.
    pub fn select_padding(&self, revoked: &BTreeSet<UserId>, active: &BTreeSet<UserId>) -> Result<BTreeSet<UserId>> {
        if let Some(u) = revoked.intersection(active).next() {
            return Err(Error::Config(format!("{u} is both revoked and active")));
        }
        for &u in revoked.iter().chain(active) {
            if !self.contains(u) {
                return Err(Error::UnknownUser(u));
            }
        }
        if self.is_authorized(revoked)? {
            return Err(Error::RevocationCapacity);
        }
        let free = |u: &UserId| !revoked.contains(u) && !active.contains(u);
        match &self.kind {
            StructureKind::Threshold { t } => {
                let need = t - 1 - revoked.len();
                let w: BTreeSet<UserId> = self.users().filter(free).take(need).collect();
                if w.len() < need {
                    return Err(Error::PaddingExhausted);
                }
                Ok(w)
            }
            StructureKind::Multipartite { parts } => {
                if let Some(first) = revoked.iter().next() {
                    let part = parts.iter().find(|p| p.contains(first)).expect("user in a part");
                    if part.iter().any(|u| active.contains(u)) {
                        return Err(Error::PaddingExhausted);
                    }
                    return Ok(part.difference(revoked).copied().collect());
                }
                parts
                    .iter()
                    .filter(|p| p.iter().all(free))
                    .min_by_key(|p| (p.len(), p.iter().next().copied()))
                    .cloned()
                    .ok_or(Error::PaddingExhausted)
            }
            StructureKind::Generic { max_unauthorized, .. } => {
                if self.is_maximal_unauthorized(revoked)? {
                    return Ok(BTreeSet::new());
                }
                max_unauthorized
                    .iter()
                    .filter(|s| revoked.is_subset(s) && s.is_disjoint(active))
                    .map(|s| s.difference(revoked).copied().collect::<BTreeSet<_>>())
                    .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())))
                    .ok_or(Error::PaddingExhausted)
            }
        }
    }
}
