//! Outcome series of two-station correlation experiments.
//!
//! The crate computes CHSH and Clauser-Horne statistics straight from series
//! arithmetic, checks whether each station's series is the same under both
//! distant settings (Sica's condition), reorders and condenses runs when that
//! is possible, and completes half-empty tables with counterfactual values.
//! [`oracle`] verifies the bounds by exhaustive enumeration at small sizes and
//! [`simulator`] produces seeded runs for larger ones.

pub mod datasets;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod sica;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    block_halves, run_from_table, table_from_run, validate, ASetting, BSetting, Layout, Outcome,
    Pairing, RecordedRun, Row, Rule, Schedule, SeriesTable, SlotEvent, SlotSettings, Station,
    Violation,
};
pub use rational::Rational;
