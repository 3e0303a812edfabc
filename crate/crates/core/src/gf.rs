// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Arithmetic in the prime field GF(q) and the small amount of linear algebra
//! needed by vector-space secret sharing.
//!
//! Elements always hold their canonical representative in `[0, q)` together
//! with the modulus, so mixing elements of different fields is detected.
//! The checked operations return [`Error::ModulusMismatch`]; the operator
//! impls (`+`, `-`, `*`) panic on mismatch.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Largest supported modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 63;

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// A prime field GF(q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if q >= MAX_MODULUS {
            return Err(Error::ModulusOutOfRange(q));
        }
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        Ok(PrimeField { q })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Reduces `value` into the field.
    #[inline]
    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement { value: value % self.q, modulus: self.q }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// Width of one element in bits, i.e. `ceil(log2 q)`.
    pub fn element_bits(&self) -> u32 {
        u64::BITS - (self.q - 1).leading_zeros()
    }

    /// Width of one element on the wire, in whole bytes.
    pub fn element_bytes(&self) -> usize {
        self.element_bits().div_ceil(8) as usize
    }

    /// Builds a vector, reducing every coordinate.
    pub fn vector(&self, values: &[u64]) -> Result<FieldVector> {
        if values.is_empty() {
            return Err(Error::LengthMismatch { left: 0, right: 1 });
        }
        Ok(FieldVector { modulus: self.q, values: values.iter().map(|v| v % self.q).collect() })
    }

    pub fn zero_vector(&self, len: usize) -> Result<FieldVector> {
        self.vector(&alloc::vec![0; len])
    }
}

/// An element of GF(q), stored as its canonical representative.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// The three ring operations exposed by [`fe_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Applies `op` to two elements of the same field.
pub fn fe_arith(a: FieldElement, b: FieldElement, op: ArithOp) -> Result<FieldElement> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
    }
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn field(self) -> PrimeField {
        PrimeField { q: self.modulus }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, rhs: FieldElement) -> Result<()> {
        if self.modulus != rhs.modulus {
            return Err(Error::ModulusMismatch { left: self.modulus, right: rhs.modulus });
        }
        Ok(())
    }

    pub fn checked_add(self, rhs: FieldElement) -> Result<FieldElement> {
        self.same_field(rhs)?;
        // q < 2^63, so the sum cannot overflow
        let s = self.value + rhs.value;
        let value = if s >= self.modulus { s - self.modulus } else { s };
        Ok(FieldElement { value, modulus: self.modulus })
    }

    pub fn checked_sub(self, rhs: FieldElement) -> Result<FieldElement> {
        self.same_field(rhs)?;
        let value =
            if self.value >= rhs.value { self.value - rhs.value } else { self.value + self.modulus - rhs.value };
        Ok(FieldElement { value, modulus: self.modulus })
    }

    pub fn checked_mul(self, rhs: FieldElement) -> Result<FieldElement> {
        self.same_field(rhs)?;
        Ok(FieldElement { value: mul_mod(self.value, rhs.value, self.modulus), modulus: self.modulus })
    }

    pub fn pow(self, exp: u64) -> FieldElement {
        FieldElement { value: pow_mod(self.value, exp, self.modulus), modulus: self.modulus }
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(self) -> Result<FieldElement> {
        if self.value == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(self.modulus - 2))
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        self.checked_add(rhs).expect("field modulus mismatch")
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.checked_sub(rhs).expect("field modulus mismatch")
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.checked_mul(rhs).expect("field modulus mismatch")
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        let value = if self.value == 0 { 0 } else { self.modulus - self.value };
        FieldElement { value, modulus: self.modulus }
    }
}

/// A non-empty l-tuple over GF(q).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldVector {
    modulus: u64,
    values: Vec<u64>,
}

impl fmt::Debug for FieldVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} (mod {})", self.values, self.modulus)
    }
}

impl FieldVector {
    pub fn from_elements(elements: &[FieldElement]) -> Result<FieldVector> {
        let first = elements.first().ok_or(Error::LengthMismatch { left: 0, right: 1 })?;
        for e in elements {
            first.same_field(*e)?;
        }
        Ok(FieldVector { modulus: first.modulus, values: elements.iter().map(|e| e.value).collect() })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn field(&self) -> PrimeField {
        PrimeField { q: self.modulus }
    }

    #[inline]
    pub fn get(&self, i: usize) -> FieldElement {
        FieldElement { value: self.values[i], modulus: self.modulus }
    }

    /// Raw canonical coordinates.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = FieldElement> + '_ {
        self.values.iter().map(move |&value| FieldElement { value, modulus: self.modulus })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    fn compatible(&self, other: &FieldVector) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch { left: self.modulus, right: other.modulus });
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(())
    }

    pub fn dot(&self, other: &FieldVector) -> Result<FieldElement> {
        dot(self, other)
    }

    pub fn checked_add(&self, other: &FieldVector) -> Result<FieldVector> {
        self.compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| (a + b) % self.modulus).collect();
        Ok(FieldVector { modulus: self.modulus, values })
    }

    pub fn scale(&self, c: FieldElement) -> Result<FieldVector> {
        if c.modulus != self.modulus {
            return Err(Error::ModulusMismatch { left: self.modulus, right: c.modulus });
        }
        let values = self.values.iter().map(|&a| mul_mod(a, c.value, self.modulus)).collect();
        Ok(FieldVector { modulus: self.modulus, values })
    }
}

/// Inner product modulo q.
pub fn dot(u: &FieldVector, v: &FieldVector) -> Result<FieldElement> {
    u.compatible(v)?;
    let q = u.modulus as u128;
    let mut acc: u128 = 0;
    for (&a, &b) in u.values.iter().zip(&v.values) {
        acc = (acc + a as u128 * b as u128) % q;
    }
    Ok(FieldElement { value: acc as u64, modulus: u.modulus })
}

/// Finds `Λ` with `Σ Λ_k · targets[k] = goal`, or `None` if `goal` is outside
/// the span of `targets`.
///
/// Gaussian elimination with first-nonzero pivoting; free variables are fixed
/// to zero, so the returned combination is deterministic.
pub fn solve_combination(targets: &[FieldVector], goal: &FieldVector) -> Result<Option<Vec<FieldElement>>> {
    for t in targets {
        goal.compatible(t)?;
    }
    let q = goal.modulus;
    let field = goal.field();
    let rows = goal.len();
    let cols = targets.len();

    // rows x (cols + 1), column k holds targets[k], last column holds goal
    let mut m: Vec<Vec<u64>> = (0..rows)
        .map(|r| {
            let mut row: Vec<u64> = targets.iter().map(|t| t.values[r]).collect();
            row.push(goal.values[r]);
            row
        })
        .collect();

    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let inv = field.element(m[r][c]).inv()?.value;
        for x in m[r].iter_mut() {
            *x = mul_mod(*x, inv, q);
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, &p) in row[c..=cols].iter_mut().zip(&pivot[c..=cols]) {
                    *x = (*x + q - mul_mod(f, p, q)) % q;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }

    if m[r..].iter().any(|row| row[cols] != 0) {
        return Ok(None);
    }

    let mut coeffs = alloc::vec![field.zero(); cols];
    for (row, &c) in pivots.iter().enumerate() {
        coeffs[c] = field.element(m[row][cols]);
    }

    // recombination must reproduce the goal exactly
    let mut acc = alloc::vec![0u64; rows];
    for (t, c) in targets.iter().zip(&coeffs) {
        for (a, &x) in acc.iter_mut().zip(&t.values) {
            *a = (*a + mul_mod(x, c.value, q)) % q;
        }
    }
    assert_eq!(acc, goal.values, "solve_combination produced an invalid combination");

    Ok(Some(coeffs))
}

/// Rank of a list of vectors.
pub fn rank(vectors: &[FieldVector]) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    for v in vectors {
        first.compatible(v)?;
    }
    let q = first.modulus;
    let field = first.field();
    let mut m: Vec<Vec<u64>> = vectors.iter().map(|v| v.values.clone()).collect();
    let cols = first.len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        let inv = field.element(m[r][c]).inv()?.value;
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = mul_mod(row[c], inv, q);
                for (x, &p) in row[c..cols].iter_mut().zip(&pivot[c..cols]) {
                    *x = (*x + q - mul_mod(f, p, q)) % q;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn gf(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(67));
        assert!(!is_prime(68));
        assert!(is_prime((1 << 61) - 1));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert_eq!(PrimeField::new(68), Err(Error::NotPrime(68)));
        assert_eq!(PrimeField::new(1 << 63), Err(Error::ModulusOutOfRange(1 << 63)));
    }

    #[test]
    fn arith_examples() {
        let f = gf(7);
        assert_eq!(fe_arith(f.element(3), f.element(4), ArithOp::Add).unwrap().value(), 0);
        assert_eq!(fe_arith(f.element(5), f.element(3), ArithOp::Mul).unwrap().value(), 1);
        assert_eq!(fe_arith(f.element(2), f.element(5), ArithOp::Sub).unwrap().value(), 4);
        for x in 0..7 {
            assert!((f.zero() * f.element(x)).is_zero());
        }
        let g = gf(11);
        assert_eq!(
            fe_arith(f.element(1), g.element(1), ArithOp::Add),
            Err(Error::ModulusMismatch { left: 7, right: 11 })
        );
    }

    #[test]
    fn inverse_examples() {
        let f = gf(7);
        assert_eq!(f.one().inv().unwrap().value(), 1);
        assert_eq!(f.element(2).inv().unwrap().value(), 4);
        assert_eq!(f.element(5).inv().unwrap().value(), 3);
        assert_eq!(f.zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn inverse_exhaustive_small_primes() {
        for q in (2..=257).filter(|&q| is_prime(q)) {
            let f = gf(q);
            for a in 1..q {
                let a = f.element(a);
                assert_eq!((a * a.inv().unwrap()).value(), 1, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn dot_examples() {
        let f = gf(7);
        let u = f.vector(&[3, 2]).unwrap();
        assert_eq!(dot(&u, &f.vector(&[1, 1]).unwrap()).unwrap().value(), 5);
        assert_eq!(dot(&u, &f.vector(&[1, 2]).unwrap()).unwrap().value(), 0);
        assert!(dot(&u, &f.zero_vector(2).unwrap()).unwrap().is_zero());
        assert_eq!(dot(&u, &f.vector(&[1, 2, 3]).unwrap()), Err(Error::LengthMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn solve_examples() {
        let f = gf(7);
        let goal = f.vector(&[1, 0]).unwrap();
        let targets = [f.vector(&[1, 1]).unwrap(), f.vector(&[1, 3]).unwrap()];
        let lam = solve_combination(&targets, &goal).unwrap().unwrap();
        assert_eq!(lam.iter().map(|e| e.value()).collect::<Vec<_>>(), vec![5, 3]);

        let lam = solve_combination(core::slice::from_ref(&goal), &goal).unwrap().unwrap();
        assert_eq!(lam, vec![f.one()]);

        assert_eq!(solve_combination(&[f.vector(&[1, 1]).unwrap()], &goal).unwrap(), None);
        assert_eq!(solve_combination(&[], &goal).unwrap(), None);
        assert_eq!(solve_combination(&[], &f.zero_vector(2).unwrap()).unwrap(), Some(vec![]));
    }

    /// Enumerates every combination of `targets` and collects the reachable set.
    fn span_by_enumeration(targets: &[FieldVector], q: u64, l: usize) -> Vec<Vec<u64>> {
        let mut reach = vec![vec![0u64; l]];
        for t in targets {
            let mut next = Vec::new();
            for base in &reach {
                for c in 0..q {
                    let v: Vec<u64> = base.iter().zip(t.values()).map(|(&b, &x)| (b + c * x) % q).collect();
                    next.push(v);
                }
            }
            next.sort();
            next.dedup();
            reach = next;
        }
        reach
    }

    #[test]
    fn solve_agrees_with_span_enumeration() {
        // all target lists of up to 3 vectors in GF(q)^l for q <= 7, l <= 2,
        // and a sample for l = 3
        for q in [2u64, 3, 5, 7] {
            let f = gf(q);
            for l in 1..=3usize {
                let all: Vec<FieldVector> = (0..q.pow(l as u32))
                    .map(|mut n| {
                        let mut v = vec![0; l];
                        for x in v.iter_mut() {
                            *x = n % q;
                            n /= q;
                        }
                        f.vector(&v).unwrap()
                    })
                    .collect();
                let step = if l == 3 && q > 3 { 7 } else { 1 };
                for (i, a) in all.iter().enumerate().step_by(step) {
                    for b in all.iter().skip(i).step_by(step * 3) {
                        let targets = [a.clone(), b.clone()];
                        let span = span_by_enumeration(&targets, q, l);
                        for goal in all.iter().step_by(step) {
                            let got = solve_combination(&targets, goal).unwrap();
                            let expect = span.binary_search(&goal.values().to_vec()).is_ok();
                            assert_eq!(got.is_some(), expect, "q={q} {targets:?} {goal:?}");
                            let r_t = rank(&targets).unwrap();
                            let r_g = rank(&[a.clone(), b.clone(), goal.clone()]).unwrap();
                            assert_eq!(expect, r_t == r_g);
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn dot_is_bilinear(u in prop::collection::vec(0u64..67, 4),
                           v in prop::collection::vec(0u64..67, 4),
                           w in prop::collection::vec(0u64..67, 4)) {
            let f = gf(67);
            let (u, v, w) = (f.vector(&u).unwrap(), f.vector(&v).unwrap(), f.vector(&w).unwrap());
            let lhs = dot(&u, &v.checked_add(&w).unwrap()).unwrap();
            let rhs = dot(&u, &v).unwrap() + dot(&u, &w).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn solve_recombines(vals in prop::collection::vec(0u64..11, 9), g in prop::collection::vec(0u64..11, 3)) {
            let f = gf(11);
            let targets: Vec<_> = vals.chunks(3).map(|c| f.vector(c).unwrap()).collect();
            let goal = f.vector(&g).unwrap();
            if let Some(lam) = solve_combination(&targets, &goal).unwrap() {
                let mut acc = f.zero_vector(3).unwrap();
                for (t, c) in targets.iter().zip(lam) {
                    acc = acc.checked_add(&t.scale(c).unwrap()).unwrap();
                }
                prop_assert_eq!(acc, goal);
            }
        }
    }
}
