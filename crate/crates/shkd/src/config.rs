// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! JSON scenario files. Unknown keys are rejected at every level.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use shkd_core::access::UserId;
use shkd_core::protocol::LifeCycle;
use shkd_core::sim::{JoinEvent, LossModel, OneWaySpec, Scenario, SecretOverrides, Seeds, StructureSpec};
use shkd_core::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub field: FieldSection,
    pub structure: StructureSection,
    pub sessions: SessionsSection,
    #[serde(default)]
    pub users: Vec<UserEntry>,
    #[serde(default)]
    pub joins: Vec<JoinEntry>,
    #[serde(default)]
    pub dummies: DummiesSection,
    #[serde(default)]
    pub loss: LossSection,
    pub seeds: SeedsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_way: Option<OneWaySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overrides: Option<OverridesSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub q: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StructureSection {
    /// `user_xs` maps user id (a decimal string, as JSON keys must be) to
    /// x-coordinate.
    Threshold {
        t: usize,
        user_xs: BTreeMap<String, u64>,
    },
    Multipartite {
        parts: Vec<Vec<u32>>,
        part_xs: Vec<u64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionsSection {
    pub m: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserEntry {
    pub id: u32,
    pub cycle: [u32; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoinEntry {
    pub session: u32,
    pub end: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DummiesSection {
    pub count: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum LossSection {
    #[default]
    None,
    Iid {
        p: f64,
    },
    Burst {
        p_enter: f64,
        p_stay: f64,
    },
    /// `[user, session]` pairs whose delivery is dropped.
    Mask {
        drops: Vec<[u32; 2]>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsSection {
    pub chain: u64,
    pub beta: u64,
    pub vectors: u64,
    pub loss: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OneWaySection {
    Sha256,
    /// `H(x) = table[x]`; a toy function for tiny worked instances.
    Table {
        table: Vec<u64>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverridesSection {
    #[serde(default)]
    pub betas: Option<Vec<u64>>,
    #[serde(default)]
    pub vectors: Option<Vec<Vec<u64>>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("bad override {0:?}: expected seed.<chain|beta|vectors|loss>=N")]
    Override(String),
    #[error(transparent)]
    Invalid(#[from] Error),
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `seed.<name>=N`.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::Override(spec.to_string());
        let (key, value) = spec.split_once('=').ok_or_else(bad)?;
        let value: u64 = value.trim().parse().map_err(|_| bad())?;
        let slot = match key.trim() {
            "seed.chain" | "seeds.chain" => &mut self.seeds.chain,
            "seed.beta" | "seeds.beta" => &mut self.seeds.beta,
            "seed.vectors" | "seeds.vectors" => &mut self.seeds.vectors,
            "seed.loss" | "seeds.loss" => &mut self.seeds.loss,
            _ => return Err(bad()),
        };
        *slot = value;
        Ok(())
    }

    /// The revocation threshold: `t` for threshold structures, otherwise the
    /// number of parts.
    pub fn threshold(&self) -> u64 {
        match &self.structure {
            StructureSection::Threshold { t, .. } => *t as u64,
            StructureSection::Multipartite { parts, .. } => parts.len() as u64,
        }
    }

    pub fn to_scenario(&self) -> Result<Scenario, ConfigError> {
        let structure = match &self.structure {
            StructureSection::Threshold { t, user_xs } => {
                let mut xs = BTreeMap::new();
                for (k, &x) in user_xs {
                    let u: u32 =
                        k.parse().map_err(|_| Error::ScenarioInvalid(format!("user id {k:?} is not an integer")))?;
                    if xs.insert(UserId(u), x).is_some() {
                        return Err(Error::ScenarioInvalid(format!("user {u} listed twice")).into());
                    }
                }
                StructureSpec::Threshold { t: *t, user_xs: xs }
            }
            StructureSection::Multipartite { parts, part_xs } => StructureSpec::Multipartite {
                parts: parts.iter().map(|p| p.iter().copied().map(UserId).collect::<BTreeSet<_>>()).collect(),
                part_xs: part_xs.clone(),
            },
        };
        let mut users = BTreeMap::new();
        for e in &self.users {
            let cycle = LifeCycle { start: e.cycle[0], end: e.cycle[1] };
            if users.insert(UserId(e.id), cycle).is_some() {
                return Err(Error::ScenarioInvalid(format!("user {} listed twice", e.id)).into());
            }
        }
        let loss = match &self.loss {
            LossSection::None => LossModel::None,
            LossSection::Iid { p } => LossModel::Iid { p: *p },
            LossSection::Burst { p_enter, p_stay } => LossModel::Burst { p_enter: *p_enter, p_stay: *p_stay },
            LossSection::Mask { drops } => {
                LossModel::Mask { drops: drops.iter().map(|[u, j]| (UserId(*u), *j)).collect() }
            }
        };
        let one_way = match &self.one_way {
            None | Some(OneWaySection::Sha256) => OneWaySpec::Standard,
            Some(OneWaySection::Table { table }) => OneWaySpec::Table(table.clone()),
        };
        let overrides = self
            .overrides
            .as_ref()
            .map(|o| SecretOverrides { betas: o.betas.clone(), vectors: o.vectors.clone() })
            .unwrap_or_default();
        let sc = Scenario {
            q: self.field.q,
            structure,
            dummies: self.dummies.count,
            m: self.sessions.m,
            users,
            joins: self.joins.iter().map(|j| JoinEvent { session: j.session, end: j.end }).collect(),
            loss,
            seeds: Seeds {
                chain: self.seeds.chain,
                beta: self.seeds.beta,
                vectors: self.seeds.vectors,
                loss: self.seeds.loss,
            },
            one_way,
            overrides,
        };
        sc.validate()?;
        Ok(sc)
    }
}
