// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Scenario files, CSV reports and the `shkd` command line on top of
//! `shkd-core`.

pub mod cli;
pub mod config;
pub mod output;

pub use config::{ConfigError, ScenarioConfig};
