use super::{check_sica, regime_slots, CompleteTable, Provenance};
use crate::error::{Error, Result};
use crate::model::{block_halves, Layout, Row, SeriesTable};

/// For each row, the slots of the regime its first measured cell belongs to.
fn kept_slots(table: &SeriesTable) -> Result<[Vec<usize>; 4]> {
    let verdict = check_sica(table);
    if !verdict.holds {
        return Err(Error::SicaViolated(Box::new(verdict)));
    }
    let kept = Row::ALL.map(|row| {
        let [s0, s1] = regime_slots(table, row);
        match (s0.first(), s1.first()) {
            (Some(x), Some(y)) if y < x => s1,
            (None, Some(_)) => s1,
            _ => s0,
        }
    });
    if kept.iter().any(|k| k.len() != kept[0].len()) {
        return Err(Error::Structure(format!(
            "condensed rows differ in length: {:?}",
            kept.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    Ok(kept)
}

/// A plain fully measured table is read with the block-halves layout.
fn with_schedule(table: &SeriesTable) -> Result<SeriesTable> {
    if matches!(table.layout(), Layout::Plain) && table.is_fully_measured() {
        let s = block_halves(table.slots())?;
        return Ok(table.clone().with_layout(Layout::Complete(s)));
    }
    Ok(table.clone())
}

/// Halves a table that satisfies Sica's condition: every row keeps its
/// values under one distant setting, the one in force at its first measured
/// cell. Refuses tables that violate the condition.
pub fn condense(table: &SeriesTable) -> Result<SeriesTable> {
    let view = with_schedule(table)?;
    let kept = kept_slots(&view)?;
    let rows = Row::ALL.map(|r| kept[r.index()].iter().map(|&i| view.cell(r, i)).collect());
    SeriesTable::new(rows)
}

/// [`condense`] carrying the provenance tags along.
pub fn condense_complete(complete: &CompleteTable) -> Result<(SeriesTable, [Vec<Provenance>; 4])> {
    let kept = kept_slots(&complete.table)?;
    let rows = Row::ALL.map(|r| {
        kept[r.index()]
            .iter()
            .map(|&i| complete.table.cell(r, i))
            .collect()
    });
    let tags = Row::ALL.map(|r| {
        kept[r.index()]
            .iter()
            .map(|&i| complete.provenance[r.index()][i])
            .collect()
    });
    Ok((SeriesTable::new(rows)?, tags))
}
