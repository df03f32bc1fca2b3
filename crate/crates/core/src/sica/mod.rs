//! Sica's condition: each station's series must be the same whichever
//! setting the distant station used.
//!
//! [`check_sica`] tests it, [`reorder_to_sica`] looks for a correlation
//! preserving permutation of a run that makes it hold, [`condense`] removes
//! the resulting redundancy, and [`build_complete_table`] fills the empty
//! boxes of a block-halves run with counterfactual values so that it holds.

mod check;
mod complete;
mod condense;
pub mod lp;
mod reorder;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Layout, Row, SeriesTable};

pub use check::{check_sica, partner_regime, regime_slots, SicaVerdict, SicaWitness};
pub use complete::{
    all_completions, build_complete_table, build_complete_table_with, completion_quarter_len,
    factual_table, fill_counterfactual, resample, CompletionOptions, FillPolicy,
};
pub use condense::{condense, condense_complete};
pub use reorder::{
    default_discard_budget, reorder_to_sica, reorder_to_sica_with, CascadeStep, Obstruction,
    ReorderOptions, ReorderOutcome, ReorderPlan,
};

/// Whether a cell of a complete table was observed or assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "F")]
    Factual,
    #[serde(rename = "C")]
    Counterfactual,
}

/// A fully measured table laid out along a schedule, each cell tagged as
/// observed or assigned. Factual cells are exactly the cells whose setting
/// is active in their slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompleteTable {
    pub table: SeriesTable,
    pub provenance: [Vec<Provenance>; 4],
    /// Slots of the source run left out to balance the quarters.
    pub discarded: Vec<usize>,
}

impl CompleteTable {
    pub fn new(table: SeriesTable, provenance: [Vec<Provenance>; 4]) -> Result<Self> {
        let Layout::Complete(schedule) = table.layout() else {
            return Err(Error::Structure(
                "a complete table needs a complete layout with a schedule".into(),
            ));
        };
        if let Some(v) = crate::model::validate(&table).first() {
            return Err(Error::Structure(v.to_string()));
        }
        for row in Row::ALL {
            let tags = &provenance[row.index()];
            if tags.len() != table.slots() {
                return Err(Error::Structure(format!(
                    "provenance of row {row} has {} tags, expected {}",
                    tags.len(),
                    table.slots()
                )));
            }
            for (i, (tag, s)) in tags.iter().zip(schedule).enumerate() {
                if (*tag == Provenance::Factual) != row.is_active(*s) {
                    return Err(Error::Structure(format!(
                        "row {row}, slot {i}: factual tags must match the active settings"
                    )));
                }
            }
        }
        Ok(CompleteTable {
            table,
            provenance,
            discarded: Vec::new(),
        })
    }

    pub fn schedule(&self) -> &[crate::model::SlotSettings] {
        self.table
            .schedule()
            .expect("complete tables carry a schedule")
    }
}
