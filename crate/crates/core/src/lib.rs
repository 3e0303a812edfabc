// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Self-healing group key distribution over GF(q) with a linear
//! (vector-space) access structure, a backward one-way key chain, and
//! per-session blinders.
//!
//! This crate is `no_std` + `alloc`. File formats and the command line live in
//! the `shkd` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod access;
pub mod adversary;
pub mod bench;
pub mod chain;
pub mod error;
pub mod gf;
pub mod protocol;
pub mod rng;
pub mod sim;

#[cfg(test)]
mod testkit;

pub use error::{DecodeError, Error, Result};
