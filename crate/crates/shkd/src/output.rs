// Copyright (C) shkd developers
// SPDX-License-Identifier: Apache-2.0

//! CSV rendering and atomic file writes.

use std::io::Write;
use std::path::Path;

use shkd_core::adversary::{suite::fmt_set, AttackReport};
use shkd_core::bench::{self, CsvRow, Reconciliation};
use shkd_core::sim::RunReport;

/// Writes via a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn outcomes_csv(report: &RunReport) -> Vec<u8> {
    csv_bytes(
        &["user", "session", "outcome", "delivered", "multiplications", "hash_applications"],
        report.outcomes.iter().map(|o| {
            [
                o.user.to_string(),
                o.session.to_string(),
                o.outcome.label(),
                o.delivered.to_string(),
                o.multiplications.to_string(),
                o.hash_applications.to_string(),
            ]
        }),
    )
}

pub fn sessions_csv(report: &RunReport, rec: &Reconciliation) -> Vec<u8> {
    csv_bytes(
        &[
            "session",
            "t_j",
            "revoked",
            "padding",
            "members",
            "formula_bits",
            "element_bits",
            "total_bytes",
            "max_multiplications",
            "multiplication_bound",
            "delivered",
            "received",
            "healed",
            "unrecoverable",
        ],
        report.sessions.iter().zip(&rec.sessions).map(|(s, r)| {
            [
                s.session.to_string(),
                s.t_j.to_string(),
                s.revoked.to_string(),
                s.padding.to_string(),
                s.members.to_string(),
                r.formula_bits.to_string(),
                r.measured_bits.to_string(),
                s.total_bytes.to_string(),
                r.measured_multiplications.to_string(),
                r.multiplication_bound.to_string(),
                s.delivered.to_string(),
                s.received.to_string(),
                s.healed.to_string(),
                s.unrecoverable.to_string(),
            ]
        }),
    )
}

pub fn storage_csv(rec: &Reconciliation) -> Vec<u8> {
    csv_bytes(
        &["user", "k_i", "k_plus_one_bits", "k_plus_t_plus_one_bits", "stored_elements", "stored_bits"],
        rec.storage.iter().map(|s| {
            [
                s.user.clone(),
                s.k_i.to_string(),
                s.k_plus_one_bits.to_string(),
                s.k_plus_t_plus_one_bits.to_string(),
                s.stored_elements.to_string(),
                s.stored_bits.to_string(),
            ]
        }),
    )
}

pub fn verdicts_csv(report: &AttackReport) -> Vec<u8> {
    let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
    csv_bytes(
        &["property", "mode", "session", "window_end", "coalition", "targets", "leaked", "census", "privacy", "passed"],
        report.verdicts.iter().map(|v| {
            [
                v.property.name().to_string(),
                v.mode.name().to_string(),
                v.session.to_string(),
                v.window_end.to_string(),
                fmt_set(&v.coalition),
                join(&v.targets),
                join(&v.leaked),
                v.census.name().to_string(),
                if v.privacy_ok { "ok" } else { "violated" }.to_string(),
                v.passed.to_string(),
            ]
        }),
    )
}

pub fn bench_csv(rows: &[CsvRow]) -> Vec<u8> {
    csv_bytes(&bench::CSV_HEADER, rows.iter().map(CsvRow::fields))
}
