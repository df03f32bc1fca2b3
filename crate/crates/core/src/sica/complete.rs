//! Completing a block-halves run with counterfactual values.
//!
//! Quarters `Q1..Q4` are the `(α,β')`, `(α,β)`, `(α',β)` and `(α',β')` blocks.
//! The construction reorders `Q1` so its `a` series equals the one in `Q2`,
//! carrying `b'` along, and reorders `Q3` so its `a'` series equals the one
//! in `Q4`, carrying `b` along. The empty boxes are then filled:
//!
//! * `a` in `Q3` and `Q4` is the free choice for `a`;
//! * `a'` in `Q1` and `Q2` is the free choice for `a'`;
//! * `b` in `Q1` copies `b` in `Q3`, and `b` in `Q4` copies `b` in `Q2`;
//! * `b'` in `Q2` copies `b'` in `Q4`, and `b'` in `Q3` copies `b'` in `Q1`.
//!
//! Each row then reads the same under both distant settings.

use rayon::prelude::*;

use super::{CompleteTable, Provenance};
use crate::error::{Error, Result};
use crate::model::{
    block_halves, table_from_run, Layout, Outcome, RecordedRun, Row, SeriesTable, SlotEvent,
    SlotSettings, Station,
};

#[derive(Clone, Debug, Default)]
pub struct CompletionOptions {
    /// Slots each quarter may lose to balance value counts; `None` means
    /// `⌈√(T/4)⌉`.
    pub discard_budget: Option<usize>,
}

/// Source slots of the four quarters after balancing, position by position.
struct Alignment {
    quarters: [Vec<usize>; 4],
    discarded: Vec<usize>,
}

/// Matches each slot of `anchor` with the earliest unused slot of `moved`
/// that shows the same outcome at `station`.
fn match_by(
    run: &RecordedRun,
    moved: &[usize],
    anchor: &[usize],
    station: Station,
) -> Vec<(usize, usize)> {
    let mut used = vec![false; moved.len()];
    let mut pairs = Vec::new();
    for &s in anchor {
        let want = run.events()[s].outcome(station);
        if let Some(i) =
            (0..moved.len()).find(|&i| !used[i] && run.events()[moved[i]].outcome(station) == want)
        {
            used[i] = true;
            pairs.push((moved[i], s));
        }
    }
    pairs
}

fn align(run: &RecordedRun, options: &CompletionOptions) -> Result<Alignment> {
    let t = run.slots();
    let schedule = block_halves(t)?;
    if run.schedule() != schedule {
        return Err(Error::Precondition(
            "the run must follow the block-halves schedule; reorder it first".into(),
        ));
    }
    let n = t / 4;
    let quarter = |k: usize| (k * n..(k + 1) * n).collect::<Vec<_>>();
    let m1 = match_by(run, &quarter(0), &quarter(1), Station::A);
    let m3 = match_by(run, &quarter(2), &quarter(3), Station::A);
    let (d1, d3) = (n - m1.len(), n - m3.len());
    let required = d1.max(d3);
    let budget = options
        .discard_budget
        .unwrap_or_else(|| super::default_discard_budget(t));
    if required > budget || (n > 0 && required == n) {
        return Err(Error::Unbalanced {
            quarter: if d1 >= d3 { "(α,β')" } else { "(α',β)" },
            required,
            budget,
        });
    }
    let m = n - required;
    let (m1, m3) = (&m1[..m], &m3[..m]);
    let quarters = [
        m1.iter().map(|p| p.0).collect::<Vec<_>>(),
        m1.iter().map(|p| p.1).collect(),
        m3.iter().map(|p| p.0).collect(),
        m3.iter().map(|p| p.1).collect(),
    ];
    let mut kept: Vec<usize> = quarters.concat();
    kept.sort_unstable();
    let discarded = (0..t).filter(|s| kept.binary_search(s).is_err()).collect();
    Ok(Alignment {
        quarters,
        discarded,
    })
}

/// Length of each quarter once the run is balanced, which is the length the
/// free choices must have.
pub fn completion_quarter_len(run: &RecordedRun, options: &CompletionOptions) -> Result<usize> {
    Ok(align(run, options)?.quarters[0].len())
}

pub fn build_complete_table(
    run: &RecordedRun,
    free_a: &[bool],
    free_a_prime: &[bool],
) -> Result<CompleteTable> {
    build_complete_table_with(run, free_a, free_a_prime, &CompletionOptions::default())
}

pub fn build_complete_table_with(
    run: &RecordedRun,
    free_a: &[bool],
    free_a_prime: &[bool],
    options: &CompletionOptions,
) -> Result<CompleteTable> {
    let al = align(run, options)?;
    let m = al.quarters[0].len();
    if free_a.len() != m || free_a_prime.len() != m {
        return Err(Error::Precondition(format!(
            "free choices must have {m} bits each, got {} and {}",
            free_a.len(),
            free_a_prime.len()
        )));
    }
    let ev = |q: usize, k: usize| run.events()[al.quarters[q][k]];
    let (a_of, b_of) = (|e: SlotEvent| e.a, |e: SlotEvent| e.b);
    let mut rows: [Vec<Outcome>; 4] = std::array::from_fn(|_| vec![Outcome::Unmeasured; 4 * m]);
    let mut put = |row: Row, q: usize, k: usize, o: Outcome| rows[row.index()][q * m + k] = o;
    for k in 0..m {
        // Factual cells.
        put(Row::A, 0, k, a_of(ev(0, k)));
        put(Row::BPrime, 0, k, b_of(ev(0, k)));
        put(Row::A, 1, k, a_of(ev(1, k)));
        put(Row::B, 1, k, b_of(ev(1, k)));
        put(Row::APrime, 2, k, a_of(ev(2, k)));
        put(Row::B, 2, k, b_of(ev(2, k)));
        put(Row::APrime, 3, k, a_of(ev(3, k)));
        put(Row::BPrime, 3, k, b_of(ev(3, k)));
        // Counterfactual cells.
        put(Row::A, 2, k, Outcome::from_bit(free_a[k]));
        put(Row::A, 3, k, Outcome::from_bit(free_a[k]));
        put(Row::APrime, 0, k, Outcome::from_bit(free_a_prime[k]));
        put(Row::APrime, 1, k, Outcome::from_bit(free_a_prime[k]));
        put(Row::B, 0, k, b_of(ev(2, k)));
        put(Row::B, 3, k, b_of(ev(1, k)));
        put(Row::BPrime, 1, k, b_of(ev(3, k)));
        put(Row::BPrime, 2, k, b_of(ev(0, k)));
    }
    let schedule = block_halves(4 * m)?;
    let provenance = Row::ALL.map(|r| {
        schedule
            .iter()
            .map(|s| {
                if r.is_active(*s) {
                    Provenance::Factual
                } else {
                    Provenance::Counterfactual
                }
            })
            .collect()
    });
    let table = SeriesTable::from_parts(4 * m, rows, Layout::Complete(schedule));
    let mut complete = CompleteTable::new(table, provenance)?;
    complete.discarded = al.discarded;
    Ok(complete)
}

/// Every completion, one per pair of free choices, ordered by `(a, a')`
/// choice with bit strings read most significant first.
pub fn all_completions(
    run: &RecordedRun,
    options: &CompletionOptions,
) -> Result<Vec<CompleteTable>> {
    let m = completion_quarter_len(run, options)?;
    if 2 * m >= 32 {
        return Err(Error::Budget {
            required: 1u128 << (2 * m),
            budget: u32::MAX as u64,
        });
    }
    let bits = |v: u64| {
        (0..m)
            .map(|i| (v >> (m - 1 - i)) & 1 == 1)
            .collect::<Vec<_>>()
    };
    (0..1u64 << (2 * m))
        .into_par_iter()
        .map(|v| build_complete_table_with(run, &bits(v >> m), &bits(v & ((1 << m) - 1)), options))
        .collect()
}

/// The observed cells of a complete table as a run-derived table.
pub fn factual_table(complete: &CompleteTable) -> SeriesTable {
    let t = &complete.table;
    let rows = Row::ALL.map(|r| {
        t.row(r)
            .iter()
            .zip(&complete.provenance[r.index()])
            .map(|(&o, p)| {
                if *p == Provenance::Factual {
                    o
                } else {
                    Outcome::Unmeasured
                }
            })
            .collect()
    });
    SeriesTable::from_parts(t.slots(), rows, Layout::Run(complete.schedule().to_vec()))
}

/// Observes a complete table under another schedule: each slot yields the
/// cells of the settings active there.
pub fn resample(complete: &CompleteTable, schedule: &[SlotSettings]) -> Result<RecordedRun> {
    let t = &complete.table;
    if schedule.len() != t.slots() {
        return Err(Error::Structure(format!(
            "schedule has {} slots, the table {}",
            schedule.len(),
            t.slots()
        )));
    }
    RecordedRun::new(
        schedule
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                SlotEvent::new(
                    s,
                    t.cell(s.active_row(Station::A), i),
                    t.cell(s.active_row(Station::B), i),
                )
            })
            .collect(),
    )
}

/// How to fill the empty boxes of a run.
#[derive(Clone, Debug)]
pub enum FillPolicy {
    /// Every empty box becomes `0`.
    Zeros,
    /// The Sica completion with the given free choices.
    SicaConstruction {
        free_a: Vec<bool>,
        free_a_prime: Vec<bool>,
    },
}

pub fn fill_counterfactual(run: &RecordedRun, policy: &FillPolicy) -> Result<SeriesTable> {
    match policy {
        FillPolicy::Zeros => Ok(table_from_run(run).filled(Outcome::Zero)),
        FillPolicy::SicaConstruction {
            free_a,
            free_a_prime,
        } => Ok(build_complete_table(run, free_a, free_a_prime)?.table),
    }
}
