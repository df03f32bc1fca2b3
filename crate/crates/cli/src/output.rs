use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::Value;
use sica_core::rational::to_f64;
use sica_core::sica::{Provenance, ReorderOutcome, SicaVerdict};
use sica_core::stats::CorrelationReport;
use sica_core::{Rational, Row, SeriesTable};

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

fn rational(r: Option<Rational>) -> String {
    match r {
        Some(r) => format!("{r} ({:.6})", to_f64(r)),
        None => "undefined".into(),
    }
}

pub fn report_text(r: &CorrelationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "slots: {}", r.slots);
    for c in &r.correlations {
        let _ = writeln!(
            out,
            "E{:<8} N_c = {:<6} sum = {:<6} E = {}",
            c.pairing.to_string(),
            c.n_c,
            c.sum,
            rational(c.e)
        );
    }
    let _ = writeln!(out, "S_CHSH: {}", rational(r.s_chsh));
    if !r.equal_nc {
        let _ = writeln!(out, "note: coincidence counts differ across pairings");
    }
    let _ = writeln!(out, "CH J: {}", r.ch.j);
    let _ = writeln!(out, "eta: {}", rational(r.eta));
    if let Some(s) = &r.set_stats {
        let _ = writeln!(
            out,
            "N(alpha&Bs) = {}, N(alpha&Bd) = {}, N(alpha'&Bs) = {}, N(alpha'&Bd) = {}",
            s.n_alpha_bs, s.n_alpha_bd, s.n_alpha_prime_bs, s.n_alpha_prime_bd
        );
        let _ = writeln!(
            out,
            "mu = {}, mu' = {}",
            rational(s.mu),
            rational(s.mu_prime)
        );
    }
    if let Some(b) = &r.coincidence_bound {
        let _ = writeln!(
            out,
            "coincidence bound: {} <= {} {}",
            b.lhs,
            b.rhs,
            if b.holds { "holds" } else { "VIOLATED" }
        );
    }
    if let Some(e) = &r.efficiency_bound {
        let _ = writeln!(out, "S*eta = {}: {:?}", rational(Some(e.s_eta)), e.verdict);
        let _ = writeln!(out, "note: {}", e.note);
    }
    out
}

pub fn verdict_text(v: &SicaVerdict) -> String {
    let mut out = format!(
        "Sica's condition {}\n",
        if v.holds { "holds" } else { "fails" }
    );
    for w in &v.witnesses {
        let cell = |i: usize| match (w.slots[i], w.values[i]) {
            (Some(s), Some(x)) => format!("slot {s}: {x:+}"),
            _ => "missing".into(),
        };
        let _ = writeln!(
            out,
            "  row {} position {}: {} vs {}",
            w.row,
            w.position,
            cell(0),
            cell(1)
        );
    }
    out
}

pub fn reorder_text(o: &ReorderOutcome) -> String {
    let mut out = format!(
        "reordering {}: blocks {:?}, retained {} per block (bound {}{}), discards {:?}, budget {}\n",
        if o.success { "succeeded" } else { "failed" },
        o.block_lengths,
        o.retained,
        o.retained_bound,
        if o.optimal { ", optimal" } else { "" },
        o.discards,
        o.budget
    );
    if let Some(ob) = &o.obstruction {
        let _ = writeln!(out, "{}", ob.summary);
    }
    out
}

/// The table with counterfactual cells in brackets.
pub fn tagged_table_text(table: &SeriesTable, tags: &[Vec<Provenance>; 4]) -> String {
    let mut out = String::new();
    for row in [Row::A, Row::B, Row::APrime, Row::BPrime] {
        let cells: Vec<String> = table
            .row(row)
            .iter()
            .zip(&tags[row.index()])
            .map(|(o, t)| match t {
                Provenance::Factual => format!(" {} ", o.symbol()),
                Provenance::Counterfactual => format!("[{}]", o.symbol()),
            })
            .collect();
        let _ = writeln!(out, "{:<3}{}", row.to_string(), cells.concat());
    }
    out
}
