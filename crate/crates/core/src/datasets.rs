//! The worked example tables.
//!
//! Rows are written with [`Outcome::symbol`] characters, `.` marking an
//! empty box. Tables used as runs are laid out by [`block_halves`].

use crate::model::{
    block_halves, run_from_table, ASetting, BSetting, Layout, Outcome, RecordedRun, SeriesTable,
    SlotSettings,
};
use crate::sica::{CompleteTable, Provenance};

fn table(a: &str, a_prime: &str, b: &str, b_prime: &str) -> SeriesTable {
    SeriesTable::parse(a, a_prime, b, b_prime).expect("built-in table is well formed")
}

fn block_run(a: &str, a_prime: &str, b: &str, b_prime: &str) -> RecordedRun {
    let t = table(a, a_prime, b, b_prime);
    let layout = Layout::Run(block_halves(t.slots()).expect("slot count divisible by 4"));
    run_from_table(&t.with_layout(layout)).expect("built-in run is well formed")
}

/// A constant `(α,β)` run with coincidences `(−,−)`, `(+,−)`, `(+,+)`, singles
/// `(0,+)`, `(−,0)` and one more `A+` single `(+,0)`, so detector `A+` sees
/// three singles and two coincidences.
pub fn fig1_run() -> RecordedRun {
    use Outcome::*;
    let s = SlotSettings::new(ASetting::Alpha, BSetting::Beta);
    RecordedRun::from_parts(
        &[s; 6],
        &[Minus, Plus, Zero, Minus, Plus, Plus],
        &[Minus, Minus, Plus, Zero, Plus, Zero],
    )
    .expect("built-in run is well formed")
}

/// Sixteen fully measured slots at ideal efficiency.
pub fn fig2() -> SeriesTable {
    table(
        "++++++++--------",
        "----++++++++----",
        "--++++++++------",
        "------++++++++--",
    )
}

/// The sixteen slots above with one non-coincident zero per row.
pub fn fig3() -> SeriesTable {
    table(
        "0+++++++--------",
        "----0+++++++----",
        "--++++++++0-----",
        "------++++++++0-",
    )
}

/// The rows of [`fig2`] recorded one after another over 32 block-halves
/// slots.
pub fn fig5_run() -> RecordedRun {
    block_run(
        "++++++++--------................",
        "................----++++++++----",
        "........--++++++++------........",
        "------++................++++++--",
    )
}

/// Eight block-halves slots with `E = −1` for `(α,β')` and `+1` elsewhere.
pub fn fig6_black_run() -> RecordedRun {
    block_run("-+-+....", "....-+-+", "..-+-+..", "+-....-+")
}

/// As [`fig6_black_run`] with `b'` equal to `(−,+)` in the first two slots.
pub fn fig6_red_run() -> RecordedRun {
    block_run("-+-+....", "....-+-+", "..-+-+..", "-+....-+")
}

pub fn fig7() -> SeriesTable {
    table("-+", "-+", "-+", "-+")
}

fn provenance(rows: [&str; 4]) -> [Vec<Provenance>; 4] {
    rows.map(|r| {
        r.chars()
            .map(|c| match c {
                'F' => Provenance::Factual,
                _ => Provenance::Counterfactual,
            })
            .collect()
    })
}

/// The completion of [`fig6_black_run`] with free choices `a = (−,+)` and
/// `a' = (+,−)`.
pub fn fig8() -> CompleteTable {
    let t = table("-+-+-+-+", "+-+--+-+", "-+-+-+-+", "+--++--+").with_layout(Layout::Complete(
        block_halves(8).expect("8 is divisible by 4"),
    ));
    CompleteTable::new(
        t,
        provenance(["FFFFCCCC", "CCCCFFFF", "CCFFFFCC", "FFCCCCFF"]),
    )
    .expect("built-in table is well formed")
}

/// [`fig8`] condensed to four slots.
pub fn fig9() -> (SeriesTable, [Vec<Provenance>; 4]) {
    (
        table("-+-+", "+--+", "-+-+", "+--+"),
        provenance(["FFCC", "CCFF", "CCFF", "FFCC"]),
    )
}
