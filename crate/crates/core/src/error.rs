// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;

use crate::access::UserId;

/// Errors raised while decoding wire frames.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported version {0:#04x}")]
    BadVersion(u8),
    #[error("frame truncated")]
    Truncated,
    #[error("field element {value} out of range for modulus {modulus}")]
    ElementOutOfRange { value: u64, modulus: u64 },
    #[error("{0} trailing bytes after frame")]
    TrailingBytes(usize),
    #[error("malformed frame: {0}")]
    Malformed(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} outside the supported range")]
    ModulusOutOfRange(u64),

    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("user set is not authorized")]
    NotAuthorized,
    #[error("revoked set is authorized; revocation capacity exceeded")]
    RevocationCapacity,
    #[error("no padding set available")]
    PaddingExhausted,

    #[error("session {session} outside 1..={m}")]
    SessionOutOfRange { session: u32, m: u32 },
    #[error("sequencing error: expected session {expected}, got {got}")]
    Sequencing { expected: u32, got: u32 },
    #[error("system failed at session {session}")]
    SystemFailed { session: u32 },
    #[error("all sessions exhausted; a new set-up is required")]
    SessionsExhausted,
    #[error("no unused identities remain")]
    CapacityExhausted,

    #[error("user {user} is not a member at session {session}")]
    NotAMember { user: UserId, session: u32 },
    #[error("user {user} cannot recover session {session}")]
    RecoveryFailure { user: UserId, session: u32 },
    #[error("cannot heal session {target} from earlier broadcast {from}")]
    CannotHealForward { target: u32, from: u32 },

    #[error("decode error: {0}")]
    Decode(#[from] DecodeError),
    #[error("message too large to encode: {0}")]
    Encode(&'static str),

    #[error("census infeasible: q^l = {size} exceeds limit")]
    CensusInfeasible { size: u128 },
    #[error("unsound derivation: {0}")]
    UnsoundDerivation(String),

    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),
    #[error("key mismatch for user {user} at session {session}")]
    KeyMismatch { user: UserId, session: u32 },

    #[error("arithmetic overflow evaluating {0}")]
    Overflow(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("reconciliation failure: {0}")]
    Reconciliation(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
