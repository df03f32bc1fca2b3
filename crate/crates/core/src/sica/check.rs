use serde::Serialize;

use crate::model::{ASetting, BSetting, Layout, Row, SeriesTable, Station};

/// A position where a row's two regimes disagree, or where one regime runs
/// out before the other.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SicaWitness {
    pub row: Row,
    /// Position within the regime series.
    pub position: usize,
    /// Slot of that position under the unprimed and the primed partner
    /// setting; `None` when that regime is shorter.
    pub slots: [Option<usize>; 2],
    /// Wire values at those slots.
    pub values: [Option<i8>; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SicaVerdict {
    pub holds: bool,
    pub witnesses: Vec<SicaWitness>,
}

const WITNESSES_PER_ROW: usize = 8;

/// Regime of the distant station for `row` at `slot`: `0` for β (or α),
/// `1` for β' (or α'). Taken from the schedule when there is one, else from
/// which partner row is measured.
pub fn partner_regime(table: &SeriesTable, row: Row, slot: usize) -> Option<usize> {
    if let Some(s) = table.schedule() {
        let s = s[slot];
        return Some(match row.station() {
            Station::A => usize::from(s.b == BSetting::BetaPrime),
            Station::B => usize::from(s.a == ASetting::AlphaPrime),
        });
    }
    let (first, second) = match row.station() {
        Station::A => (Row::B, Row::BPrime),
        Station::B => (Row::A, Row::APrime),
    };
    match (
        table.cell(first, slot).is_measured(),
        table.cell(second, slot).is_measured(),
    ) {
        (true, false) => Some(0),
        (false, true) => Some(1),
        _ => None,
    }
}

/// Measured slots of `row` split by the distant regime, in slot order.
pub fn regime_slots(table: &SeriesTable, row: Row) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, o) in table.row(row).iter().enumerate() {
        if !o.is_measured() {
            continue;
        }
        if let Some(r) = partner_regime(table, row, i) {
            out[r].push(i);
        }
    }
    out
}

/// Compares, for each row, the measured values under the two distant
/// settings position by position in slot order.
///
/// A plain fully measured table holds one value per cell and satisfies the
/// condition trivially.
pub fn check_sica(table: &SeriesTable) -> SicaVerdict {
    if matches!(table.layout(), Layout::Plain) && table.is_fully_measured() {
        return SicaVerdict {
            holds: true,
            witnesses: Vec::new(),
        };
    }
    let mut witnesses = Vec::new();
    for row in Row::ALL {
        let [s0, s1] = regime_slots(table, row);
        let mut found = 0;
        for k in 0..s0.len().max(s1.len()) {
            let slots = [s0.get(k).copied(), s1.get(k).copied()];
            let values = slots.map(|s| s.and_then(|i| table.cell(row, i).to_wire()));
            if values[0] != values[1] {
                witnesses.push(SicaWitness {
                    row,
                    position: k,
                    slots,
                    values,
                });
                found += 1;
                if found == WITNESSES_PER_ROW {
                    break;
                }
            }
        }
    }
    SicaVerdict {
        holds: witnesses.is_empty(),
        witnesses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::model::table_from_run;

    #[test]
    fn fixed_table_holds() {
        assert!(check_sica(&datasets::fig2()).holds);
        assert!(check_sica(&datasets::fig3()).holds);
    }

    #[test]
    fn sequential_block_run_violates() {
        let v = check_sica(&table_from_run(&datasets::fig5_run()));
        assert!(!v.holds);
        let w = v.witnesses.iter().find(|w| w.row == Row::A).unwrap();
        // a is + under β' (slots 0..8) and − under β (slots 8..16).
        assert_eq!(w.position, 0);
        assert_eq!(w.slots, [Some(8), Some(0)]);
        assert_eq!(w.values, [Some(-1), Some(1)]);
    }

    #[test]
    fn equal_b_rows_hold_for_station_b() {
        let plain = SeriesTable::parse("+-+-", "--++", "+--+", "+--+").unwrap();
        assert!(check_sica(&plain).holds);
        let t = SeriesTable::parse("+-+-", "--++", "+-+-", "-+-+")
            .unwrap()
            .with_layout(Layout::Complete(crate::model::block_halves(4).unwrap()));
        let v = check_sica(&t);
        assert!(!v.holds);
        assert!(v.witnesses.iter().all(|w| w.row.station() == Station::A));
    }

    #[test]
    fn factual_fig6_runs() {
        let black = check_sica(&table_from_run(&datasets::fig6_black_run()));
        assert!(!black.holds);
        assert!(black.witnesses.iter().all(|w| w.row == Row::BPrime));
        assert!(check_sica(&table_from_run(&datasets::fig6_red_run())).holds);
        assert!(check_sica(&datasets::fig8().table).holds);
    }

    #[test]
    fn schedule_inferred_for_plain_table_with_gaps() {
        let plain = SeriesTable::parse("+-..", "..+-", "+..+", ".+-.").unwrap();
        let v = check_sica(&plain);
        // a: β regime slot 0 (+), β' regime slot 1 (-).
        assert!(!v.holds);
        assert_eq!(v.witnesses[0].row, Row::A);
    }
}
