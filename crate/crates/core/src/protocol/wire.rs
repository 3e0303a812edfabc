// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Byte-exact frames for broadcasts (`SHKD`) and personal secrets (`SHKS`).
//!
//! All integers are big-endian. Field elements take `ceil(bits(q-1) / 8)`
//! bytes each.
//!
//! ```text
//! broadcast: "SHKD" | 0x01 | session u32 | count u16
//!            | count × (user u32 | arity u8 | arity × element) | z
//! secret:    "SHKS" | 0x01 | user u32 | start u32 | end u32 | arity u8
//!            | k × arity × element (dots, by session) | k × element (betas)
//! ```

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::access::UserId;
use crate::error::{DecodeError, Error, Result};
use crate::gf::{FieldElement, PrimeField};
use crate::protocol::{BroadcastMessage, LifeCycle, PersonalSecret};

pub const BROADCAST_MAGIC: &[u8; 4] = b"SHKD";
pub const SECRET_MAGIC: &[u8; 4] = b"SHKS";
pub const VERSION: u8 = 0x01;

const BROADCAST_HEADER: usize = 4 + 1 + 4 + 2;
const ENTRY_HEADER: usize = 4 + 1;

/// Size breakdown of an encoded broadcast.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WireStats {
    pub element_count: usize,
    /// `element_count × ceil(log2 q)`, without byte alignment.
    pub element_bits: u64,
    pub element_bytes: usize,
    /// User ids and arity bytes.
    pub id_bytes: usize,
    pub header_bytes: usize,
    pub total_bytes: usize,
}

pub fn broadcast_stats(msg: &BroadcastMessage, field: PrimeField) -> Result<WireStats> {
    let element_count = msg.element_count();
    let element_bytes = element_count * field.element_bytes();
    let id_bytes = msg.revealed.len() * ENTRY_HEADER;
    Ok(WireStats {
        element_count,
        element_bits: element_count as u64 * field.element_bits() as u64,
        element_bytes,
        id_bytes,
        header_bytes: BROADCAST_HEADER,
        total_bytes: BROADCAST_HEADER + id_bytes + element_bytes,
    })
}

fn put_element(out: &mut Vec<u8>, x: FieldElement, field: PrimeField) -> Result<()> {
    if x.modulus() != field.modulus() {
        return Err(Error::ModulusMismatch { left: field.modulus(), right: x.modulus() });
    }
    let w = field.element_bytes();
    out.extend_from_slice(&x.value().to_be_bytes()[8 - w..]);
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    field: PrimeField,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.buf.len() < n {
            return Err(DecodeError::Truncated);
        }
        let (head, rest) = self.buf.split_at(n);
        self.buf = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, DecodeError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn element(&mut self) -> Result<FieldElement, DecodeError> {
        let w = self.field.element_bytes();
        let mut b = [0u8; 8];
        b[8 - w..].copy_from_slice(self.take(w)?);
        let value = u64::from_be_bytes(b);
        let modulus = self.field.modulus();
        if value >= modulus {
            return Err(DecodeError::ElementOutOfRange { value, modulus });
        }
        Ok(self.field.element(value))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<(), DecodeError> {
        if self.take(4)? != magic {
            return Err(DecodeError::BadMagic);
        }
        match self.u8()? {
            VERSION => Ok(()),
            v => Err(DecodeError::BadVersion(v)),
        }
    }

    fn finish(self) -> Result<(), DecodeError> {
        match self.buf.len() {
            0 => Ok(()),
            n => Err(DecodeError::TrailingBytes(n)),
        }
    }
}

pub fn encode_broadcast(msg: &BroadcastMessage, field: PrimeField) -> Result<Vec<u8>> {
    let count = u16::try_from(msg.revealed.len()).map_err(|_| Error::Encode("more than 65535 revealed entries"))?;
    let mut out = Vec::with_capacity(broadcast_stats(msg, field)?.total_bytes);
    out.extend_from_slice(BROADCAST_MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&msg.session.to_be_bytes());
    out.extend_from_slice(&count.to_be_bytes());
    let mut prev: Option<UserId> = None;
    for (u, dots) in &msg.revealed {
        if prev.is_some_and(|p| p >= *u) {
            return Err(Error::Encode("revealed entries not in ascending id order"));
        }
        prev = Some(*u);
        let arity = u8::try_from(dots.len()).map_err(|_| Error::Encode("more than 255 vectors per user"))?;
        out.extend_from_slice(&u.0.to_be_bytes());
        out.push(arity);
        for &d in dots {
            put_element(&mut out, d, field)?;
        }
    }
    put_element(&mut out, msg.z, field)?;
    Ok(out)
}

pub fn decode_broadcast(bytes: &[u8], field: PrimeField) -> Result<BroadcastMessage> {
    let mut r = Reader { buf: bytes, field };
    r.header(BROADCAST_MAGIC)?;
    let session = r.u32()?;
    let count = r.u16()?;
    let mut revealed = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let u = UserId(r.u32()?);
        if revealed.last().is_some_and(|(p, _): &(UserId, _)| *p >= u) {
            return Err(DecodeError::Malformed("revealed ids not strictly ascending").into());
        }
        let arity = r.u8()?;
        let dots = (0..arity).map(|_| r.element()).collect::<Result<Vec<_>, _>>()?;
        revealed.push((u, dots));
    }
    let z = r.element()?;
    r.finish()?;
    Ok(BroadcastMessage { session, revealed, z })
}

pub fn encode_secret(secret: &PersonalSecret, field: PrimeField) -> Result<Vec<u8>> {
    let arity = secret.arity();
    let arity_u8 = u8::try_from(arity).map_err(|_| Error::Encode("more than 255 vectors per user"))?;
    let sessions: Vec<u32> = secret.cycle.sessions().collect();
    if secret.dots.keys().ne(sessions.iter()) || secret.betas.keys().ne(sessions.iter()) {
        return Err(Error::Encode("secret does not cover exactly its cycle"));
    }
    let mut out = Vec::new();
    out.extend_from_slice(SECRET_MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&secret.user.0.to_be_bytes());
    out.extend_from_slice(&secret.cycle.start.to_be_bytes());
    out.extend_from_slice(&secret.cycle.end.to_be_bytes());
    out.push(arity_u8);
    for dots in secret.dots.values() {
        if dots.len() != arity {
            return Err(Error::Encode("inconsistent arity across sessions"));
        }
        for &d in dots {
            put_element(&mut out, d, field)?;
        }
    }
    for &b in secret.betas.values() {
        put_element(&mut out, b, field)?;
    }
    Ok(out)
}

pub fn decode_secret(bytes: &[u8], field: PrimeField) -> Result<PersonalSecret> {
    let mut r = Reader { buf: bytes, field };
    r.header(SECRET_MAGIC)?;
    let user = UserId(r.u32()?);
    let (start, end) = (r.u32()?, r.u32()?);
    if start == 0 || start > end {
        return Err(DecodeError::Malformed("bad life cycle").into());
    }
    let cycle = LifeCycle { start, end };
    let arity = r.u8()?;
    let mut dots = BTreeMap::new();
    for j in cycle.sessions() {
        dots.insert(j, (0..arity).map(|_| r.element()).collect::<Result<Vec<_>, _>>()?);
    }
    let mut betas = BTreeMap::new();
    for j in cycle.sessions() {
        betas.insert(j, r.element()?);
    }
    r.finish()?;
    Ok(PersonalSecret { user, cycle, dots, betas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn worked_frame_is_pinned() {
        let (mut gm, secrets) = testkit::worked_gm();
        let f = gm.structure().field();
        let b1 = gm.broadcast(1).unwrap();
        let bytes = encode_broadcast(&b1, f).unwrap();
        assert_eq!(bytes, b"SHKD\x01\x00\x00\x00\x01\x00\x01\x00\x00\x00\x03\x01\x02\x06".to_vec());
        let st = broadcast_stats(&b1, f).unwrap();
        assert_eq!(st.element_count, 2);
        assert_eq!(st.element_bytes, 2);
        assert_eq!(st.element_bits, 6);
        assert_eq!(st.total_bytes, bytes.len());
        assert_eq!(decode_broadcast(&bytes, f).unwrap(), b1);

        let s = &secrets[&UserId(1)];
        let sb = encode_secret(s, f).unwrap();
        assert_eq!(sb.len(), 4 + 1 + 12 + 1 + 6);
        assert_eq!(&decode_secret(&sb, f).unwrap(), s);
    }

    #[test]
    fn empty_revealed_list() {
        let f = PrimeField::new(67).unwrap();
        let m = BroadcastMessage { session: 9, revealed: vec![], z: f.element(66) };
        let b = encode_broadcast(&m, f).unwrap();
        assert_eq!(b.len(), BROADCAST_HEADER + 1);
        assert_eq!(decode_broadcast(&b, f).unwrap(), m);
    }

    #[test]
    fn decode_errors() {
        let f = PrimeField::new(7).unwrap();
        let good = b"SHKD\x01\x00\x00\x00\x01\x00\x01\x00\x00\x00\x03\x01\x02\x06".to_vec();
        let mut bad = good.clone();
        bad[0] = b'X';
        assert_eq!(decode_broadcast(&bad, f), Err(DecodeError::BadMagic.into()));
        let mut bad = good.clone();
        bad[4] = 2;
        assert_eq!(decode_broadcast(&bad, f), Err(DecodeError::BadVersion(2).into()));
        assert_eq!(decode_broadcast(&good[..good.len() - 1], f), Err(DecodeError::Truncated.into()));
        let mut bad = good.clone();
        bad.push(0);
        assert_eq!(decode_broadcast(&bad, f), Err(DecodeError::TrailingBytes(1).into()));
        let mut bad = good.clone();
        *bad.last_mut().unwrap() = 7;
        assert_eq!(decode_broadcast(&bad, f), Err(DecodeError::ElementOutOfRange { value: 7, modulus: 7 }.into()));
        assert_eq!(decode_secret(&good, f), Err(DecodeError::BadMagic.into()));
    }

    #[test]
    fn wide_elements() {
        let f = PrimeField::new((1 << 61) - 1).unwrap();
        assert_eq!(f.element_bytes(), 8);
        let m =
            BroadcastMessage { session: 1, revealed: vec![(UserId(5), vec![f.element((1 << 61) - 2)])], z: f.one() };
        assert_eq!(decode_broadcast(&encode_broadcast(&m, f).unwrap(), f).unwrap(), m);
    }

    fn arb_message() -> impl Strategy<Value = (u64, BroadcastMessage)> {
        prop_oneof![Just(7u64), Just(67), Just(257), Just(65_537), Just(1_000_003)].prop_flat_map(|q| {
            let f = PrimeField::new(q).unwrap();
            (
                1u32..1000,
                proptest::collection::btree_map(0u32..5000, proptest::collection::vec(0..q, 1..3), 0..12),
                0..q,
            )
                .prop_map(move |(session, entries, z)| {
                    let revealed = entries
                        .into_iter()
                        .map(|(u, d)| (UserId(u), d.into_iter().map(|v| f.element(v)).collect()))
                        .collect();
                    (q, BroadcastMessage { session, revealed, z: f.element(z) })
                })
        })
    }

    proptest! {
        #[test]
        fn broadcast_round_trip((q, msg) in arb_message()) {
            let f = PrimeField::new(q).unwrap();
            let bytes = encode_broadcast(&msg, f).unwrap();
            let st = broadcast_stats(&msg, f).unwrap();
            prop_assert_eq!(bytes.len(), st.total_bytes);
            prop_assert_eq!(decode_broadcast(&bytes, f).unwrap(), msg);
        }

        #[test]
        fn truncation_never_panics((q, msg) in arb_message(), cut in 0usize..64) {
            let f = PrimeField::new(q).unwrap();
            let bytes = encode_broadcast(&msg, f).unwrap();
            let cut = cut.min(bytes.len());
            if cut > 0 {
                prop_assert!(decode_broadcast(&bytes[..bytes.len() - cut], f).is_err());
            }
        }
    }
}
