// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! Closed-form overhead of six self-healing schemes in session `j`, and a
//! cross-check of simulator counters against this scheme's formulas.
//!
//! `log q` is `⌈log₂ q⌉`. Everything is exact checked `u64` arithmetic.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gf::{is_prime, PrimeField};
use crate::sim::RunReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Staddon2002,
    Liu2003,
    Blundo2004,
    HongKang2005,
    Dutta2008,
    Ours,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Staddon2002,
        Scheme::Liu2003,
        Scheme::Blundo2004,
        Scheme::HongKang2005,
        Scheme::Dutta2008,
        Scheme::Ours,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Staddon2002 => "Staddon2002",
            Scheme::Liu2003 => "Liu2003",
            Scheme::Blundo2004 => "Blundo2004",
            Scheme::HongKang2005 => "HongKang2005",
            Scheme::Dutta2008 => "Dutta2008",
            Scheme::Ours => "Ours",
        }
    }

    pub fn parse(s: &str) -> Result<Scheme> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Storage,
    Communication,
    Computation,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Storage, Metric::Communication, Metric::Computation];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Storage => "storage",
            Metric::Communication => "communication",
            Metric::Computation => "computation",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Metric::Computation => "mults",
            _ => "bits",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchParams {
    pub m: u64,
    pub q: u64,
    pub t: u64,
    pub j: u64,
    /// Sessions in the user's life cycle.
    pub k_i: u64,
    /// Revealed shares in session `j`; equals `t` for threshold structures.
    pub t_j: u64,
}

impl BenchParams {
    /// Comparison parameters m = 100, q = 67, j = 50 at threshold `t`.
    pub fn comparison(t: u64) -> BenchParams {
        BenchParams { m: 100, q: 67, t, j: 50, k_i: 100, t_j: t }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if [self.m, self.q, self.t, self.j, self.k_i, self.t_j].contains(&0) {
            return bad("parameters must be positive".into());
        }
        if !is_prime(self.q) {
            return bad(format!("q = {} is not prime", self.q));
        }
        if self.j > self.m {
            return bad(format!("j = {} exceeds m = {}", self.j, self.m));
        }
        if self.k_i > self.m {
            return bad(format!("k = {} exceeds m = {}", self.k_i, self.m));
        }
        Ok(())
    }

    pub fn log_q(&self) -> u64 {
        log_q(self.q)
    }
}

/// `⌈log₂ q⌉`
pub fn log_q(q: u64) -> u64 {
    match q {
        0 | 1 => 0,
        _ => (64 - (q - 1).leading_zeros()) as u64,
    }
}

pub fn formula(scheme: Scheme, metric: Metric) -> &'static str {
    use Metric::*;
    use Scheme::*;
    match (scheme, metric) {
        (Staddon2002, Storage) => "(m-j+1)^2 log q",
        (Staddon2002, Communication) => "(mt^2+2mt+m+t) log q",
        (Staddon2002, Computation) => "2mt^2+3mt-t",
        (Liu2003, Storage) => "2(m-j+1) log q",
        (Liu2003, Communication) => "[(m+j+1)t+(m+1)] log q",
        (Liu2003, Computation) => "mt+t+2tj+j",
        (Blundo2004, Storage) => "(m-j+1) log q",
        (Blundo2004, Communication) => "(2tj+j) log q",
        (Blundo2004, Computation) => "2j(t^2+t)",
        (HongKang2005, Storage) => "(m-j+1) log q",
        (HongKang2005, Communication) => "(tj+j-t-1) log q",
        (HongKang2005, Computation) => "2tj+j",
        (Dutta2008, Storage) => "(m-j+2) log q",
        (Dutta2008, Communication) | (Ours, Communication) => "(T_j+1) log q",
        (Dutta2008, Computation) | (Ours, Computation) => "2(T_j^2+T_j)",
        (Ours, Storage) => "(k_i+1) log q",
    }
}

/// Checked arithmetic helper: any overflow or underflow becomes an error.
#[derive(Clone, Copy)]
struct N(Option<u64>);

impl N {
    fn v(x: u64) -> N {
        N(Some(x))
    }
    fn add(self, o: N) -> N {
        N(self.0.zip(o.0).and_then(|(a, b)| a.checked_add(b)))
    }
    fn sub(self, o: N) -> N {
        N(self.0.zip(o.0).and_then(|(a, b)| a.checked_sub(b)))
    }
    fn mul(self, o: N) -> N {
        N(self.0.zip(o.0).and_then(|(a, b)| a.checked_mul(b)))
    }
}

pub fn evaluate(scheme: Scheme, metric: Metric, p: &BenchParams) -> Result<u64> {
    use Metric::*;
    use Scheme::*;
    let (m, t, j, k, tj, lq) = (N::v(p.m), N::v(p.t), N::v(p.j), N::v(p.k_i), N::v(p.t_j), N::v(p.log_q()));
    let one = N::v(1);
    let two = N::v(2);
    let sessions_left = m.sub(j).add(one);
    let r = match (scheme, metric) {
        (Staddon2002, Storage) => sessions_left.mul(sessions_left).mul(lq),
        (Staddon2002, Communication) => m.mul(t).mul(t).add(two.mul(m).mul(t)).add(m).add(t).mul(lq),
        (Staddon2002, Computation) => two.mul(m).mul(t).mul(t).add(N::v(3).mul(m).mul(t)).sub(t),
        (Liu2003, Storage) => two.mul(sessions_left).mul(lq),
        (Liu2003, Communication) => m.add(j).add(one).mul(t).add(m.add(one)).mul(lq),
        (Liu2003, Computation) => m.mul(t).add(t).add(two.mul(t).mul(j)).add(j),
        (Blundo2004, Storage) | (HongKang2005, Storage) => sessions_left.mul(lq),
        (Blundo2004, Communication) => two.mul(t).mul(j).add(j).mul(lq),
        (Blundo2004, Computation) => two.mul(j).mul(t.mul(t).add(t)),
        (HongKang2005, Communication) => t.mul(j).add(j).sub(t).sub(one).mul(lq),
        (HongKang2005, Computation) => two.mul(t).mul(j).add(j),
        (Dutta2008, Storage) => m.sub(j).add(two).mul(lq),
        (Dutta2008, Communication) | (Ours, Communication) => tj.add(one).mul(lq),
        (Dutta2008, Computation) | (Ours, Computation) => two.mul(tj.mul(tj).add(tj)),
        (Ours, Storage) => k.add(one).mul(lq),
    };
    r.0.ok_or(Error::Overflow("overhead formula"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OverheadRow {
    pub scheme: Scheme,
    pub storage_bits: u64,
    pub communication_bits: u64,
    pub computation: u64,
    pub params: BenchParams,
}

pub fn overhead_row(scheme: Scheme, params: &BenchParams) -> Result<OverheadRow> {
    params.validate()?;
    Ok(OverheadRow {
        scheme,
        storage_bits: evaluate(scheme, Metric::Storage, params)?,
        communication_bits: evaluate(scheme, Metric::Communication, params)?,
        computation: evaluate(scheme, Metric::Computation, params)?,
        params: *params,
    })
}

pub const CSV_HEADER: [&str; 11] = ["scheme", "metric", "formula", "m", "q", "t", "j", "k_i", "T_j", "unit", "value"];

/// One CSV line in [`CSV_HEADER`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvRow {
    pub scheme: Scheme,
    pub metric: Metric,
    pub params: BenchParams,
    pub value: u64,
}

impl CsvRow {
    pub fn fields(&self) -> [String; 11] {
        let p = &self.params;
        [
            self.scheme.name().into(),
            self.metric.name().into(),
            formula(self.scheme, self.metric).into(),
            format!("{}", p.m),
            format!("{}", p.q),
            format!("{}", p.t),
            format!("{}", p.j),
            format!("{}", p.k_i),
            format!("{}", p.t_j),
            self.metric.unit().into(),
            format!("{}", self.value),
        ]
    }
}

fn rows(params: &BenchParams, metrics: &[Metric]) -> Result<Vec<CsvRow>> {
    params.validate()?;
    let mut out = Vec::new();
    for scheme in Scheme::ALL {
        for &metric in metrics {
            out.push(CsvRow { scheme, metric, params: *params, value: evaluate(scheme, metric, params)? });
        }
    }
    Ok(out)
}

/// All six schemes, all three metrics.
pub fn overhead_rows(params: &BenchParams) -> Result<Vec<CsvRow>> {
    rows(params, &Metric::ALL)
}

/// Communication and computation for every scheme at m = 100, q = 67,
/// j = 50, with `T_j = t`.
pub fn comparison_points(t: u64) -> Result<Vec<CsvRow>> {
    rows(&BenchParams::comparison(t), &[Metric::Communication, Metric::Computation])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionReconciliation {
    pub session: u32,
    pub t_j: usize,
    pub formula_bits: u64,
    pub measured_bits: u64,
    pub multiplication_bound: u64,
    pub measured_multiplications: u64,
}

/// Three storage figures for one member, side by side. They are not expected
/// to agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StorageComparison {
    pub user: String,
    pub k_i: u64,
    /// `(k_i + 1) log q`
    pub k_plus_one_bits: u64,
    /// `(t_i - s_i + t + 2) log q`
    pub k_plus_t_plus_one_bits: u64,
    pub stored_elements: u64,
    pub stored_bits: u64,
}

impl StorageComparison {
    pub fn new(user: String, k_i: u64, t: u64, stored_elements: u64, q: u64) -> Result<StorageComparison> {
        let lq = N::v(log_q(q));
        let k = N::v(k_i);
        let of = Error::Overflow("storage figures");
        Ok(StorageComparison {
            user,
            k_i,
            k_plus_one_bits: k.add(N::v(1)).mul(lq).0.ok_or(of.clone())?,
            // t_i - s_i = k_i - 1
            k_plus_t_plus_one_bits: k.sub(N::v(1)).add(N::v(t)).add(N::v(2)).mul(lq).0.ok_or(of.clone())?,
            stored_elements,
            stored_bits: N::v(stored_elements).mul(lq).0.ok_or(of)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconciliation {
    pub sessions: Vec<SessionReconciliation>,
    pub storage: Vec<StorageComparison>,
}

/// Checks every broadcast session of `report`: payload bits must equal
/// `(t_j + 1)⌈log₂ q⌉` and recovery multiplications must stay within
/// `2(t_j² + t_j)`. `t` is the revocation threshold used for the storage
/// figures.
pub fn reconcile(report: &RunReport, t: u64) -> Result<Reconciliation> {
    let bits = PrimeField::new(report.q)?.element_bits() as u64;
    let mut sessions = Vec::new();
    for s in &report.sessions {
        let t_j = s.t_j as u64;
        let formula_bits =
            t_j.checked_add(1).and_then(|x| x.checked_mul(bits)).ok_or(Error::Overflow("formula bits"))?;
        let bound = evaluate(
            Scheme::Ours,
            Metric::Computation,
            &BenchParams { m: report.m as u64, q: report.q, t, j: s.session as u64, k_i: 1, t_j },
        )
        .unwrap_or(0);
        if formula_bits != s.element_bits {
            return Err(Error::Reconciliation(format!(
                "session {}: {} payload bits measured, formula gives {formula_bits}",
                s.session, s.element_bits
            )));
        }
        if s.max_multiplications > bound {
            return Err(Error::Reconciliation(format!(
                "session {}: {} multiplications exceed the bound {bound}",
                s.session, s.max_multiplications
            )));
        }
        sessions.push(SessionReconciliation {
            session: s.session,
            t_j: s.t_j,
            formula_bits,
            measured_bits: s.element_bits,
            multiplication_bound: bound,
            measured_multiplications: s.max_multiplications,
        });
    }
    let storage = report
        .members
        .iter()
        .map(|mr| {
            StorageComparison::new(
                format!("{}", mr.user),
                mr.cycle.len() as u64,
                t,
                mr.stored_elements as u64,
                report.q,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Reconciliation { sessions, storage })
}
