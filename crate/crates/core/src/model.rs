//! Outcomes, series tables, recorded runs and setting schedules.
//!
//! A [`SeriesTable`] holds the four aligned series `a`, `a'`, `b`, `b'` over
//! `T` abstract slots. A [`RecordedRun`] is what an experiment actually
//! produces: one active setting per station per slot and the outcome seen by
//! each station. Converting a run to a table leaves every inactive cell
//! [`Outcome::Unmeasured`], which is a different state from
//! [`Outcome::Zero`] (no photon detected).

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
    /// A slot in which no detector of the station fired.
    Zero,
    /// An empty box: the setting was not active, nothing was observed.
    Unmeasured,
}

impl Outcome {
    pub fn sign(self) -> i64 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
            Outcome::Zero | Outcome::Unmeasured => 0,
        }
    }

    pub fn is_measured(self) -> bool {
        self != Outcome::Unmeasured
    }

    /// Plus or Minus.
    pub fn is_detection(self) -> bool {
        matches!(self, Outcome::Plus | Outcome::Minus)
    }

    /// Wire encoding: `1`, `-1`, `0`; `None` for unmeasured cells.
    pub fn to_wire(self) -> Option<i8> {
        match self {
            Outcome::Plus => Some(1),
            Outcome::Minus => Some(-1),
            Outcome::Zero => Some(0),
            Outcome::Unmeasured => None,
        }
    }

    pub fn from_wire(value: i64) -> Option<Outcome> {
        match value {
            1 => Some(Outcome::Plus),
            -1 => Some(Outcome::Minus),
            0 => Some(Outcome::Zero),
            _ => None,
        }
    }

    /// `'+'`, `'-'`, `'0'` or `'.'` for an empty box.
    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
            Outcome::Zero => '0',
            Outcome::Unmeasured => '.',
        }
    }

    pub fn from_symbol(c: char) -> Option<Outcome> {
        match c {
            '+' => Some(Outcome::Plus),
            '-' => Some(Outcome::Minus),
            '0' => Some(Outcome::Zero),
            '.' | '_' => Some(Outcome::Unmeasured),
            _ => None,
        }
    }

    pub fn from_bit(bit: bool) -> Outcome {
        if bit {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Station {
    A,
    B,
}

/// One of the four series. The discriminant is the row index in a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Row {
    A = 0,
    APrime = 1,
    B = 2,
    BPrime = 3,
}

impl Row {
    pub const ALL: [Row; 4] = [Row::A, Row::APrime, Row::B, Row::BPrime];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn station(self) -> Station {
        match self {
            Row::A | Row::APrime => Station::A,
            Row::B | Row::BPrime => Station::B,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Row::A => "a",
            Row::APrime => "a_prime",
            Row::B => "b",
            Row::BPrime => "b_prime",
        }
    }

    /// Whether this row is the one being recorded under `settings`.
    pub fn is_active(self, settings: SlotSettings) -> bool {
        match self {
            Row::A => settings.a == ASetting::Alpha,
            Row::APrime => settings.a == ASetting::AlphaPrime,
            Row::B => settings.b == BSetting::Beta,
            Row::BPrime => settings.b == BSetting::BetaPrime,
        }
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Row::A => "a",
            Row::APrime => "a'",
            Row::B => "b",
            Row::BPrime => "b'",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ASetting {
    Alpha,
    AlphaPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BSetting {
    Beta,
    BetaPrime,
}

/// The settings active in both stations during one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotSettings {
    pub a: ASetting,
    pub b: BSetting,
}

impl SlotSettings {
    pub fn new(a: ASetting, b: BSetting) -> Self {
        SlotSettings { a, b }
    }

    pub fn pairing(self) -> Pairing {
        Pairing::from_settings(self)
    }

    pub fn active_row(self, station: Station) -> Row {
        match (station, self.a, self.b) {
            (Station::A, ASetting::Alpha, _) => Row::A,
            (Station::A, ASetting::AlphaPrime, _) => Row::APrime,
            (Station::B, _, BSetting::Beta) => Row::B,
            (Station::B, _, BSetting::BetaPrime) => Row::BPrime,
        }
    }
}

/// One of the four setting pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    AlphaBeta,
    AlphaBetaPrime,
    AlphaPrimeBeta,
    AlphaPrimeBetaPrime,
}

impl Pairing {
    pub const ALL: [Pairing; 4] = [
        Pairing::AlphaBeta,
        Pairing::AlphaBetaPrime,
        Pairing::AlphaPrimeBeta,
        Pairing::AlphaPrimeBetaPrime,
    ];

    /// The order in which the block-halves schedule visits the pairings:
    /// first quarter (α,β'), then (α,β), (α',β), (α',β').
    pub const BLOCK_ORDER: [Pairing; 4] = [
        Pairing::AlphaBetaPrime,
        Pairing::AlphaBeta,
        Pairing::AlphaPrimeBeta,
        Pairing::AlphaPrimeBetaPrime,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn rows(self) -> (Row, Row) {
        match self {
            Pairing::AlphaBeta => (Row::A, Row::B),
            Pairing::AlphaBetaPrime => (Row::A, Row::BPrime),
            Pairing::AlphaPrimeBeta => (Row::APrime, Row::B),
            Pairing::AlphaPrimeBetaPrime => (Row::APrime, Row::BPrime),
        }
    }

    pub fn settings(self) -> SlotSettings {
        match self {
            Pairing::AlphaBeta => SlotSettings::new(ASetting::Alpha, BSetting::Beta),
            Pairing::AlphaBetaPrime => SlotSettings::new(ASetting::Alpha, BSetting::BetaPrime),
            Pairing::AlphaPrimeBeta => SlotSettings::new(ASetting::AlphaPrime, BSetting::Beta),
            Pairing::AlphaPrimeBetaPrime => {
                SlotSettings::new(ASetting::AlphaPrime, BSetting::BetaPrime)
            }
        }
    }

    pub fn from_settings(settings: SlotSettings) -> Pairing {
        match (settings.a, settings.b) {
            (ASetting::Alpha, BSetting::Beta) => Pairing::AlphaBeta,
            (ASetting::Alpha, BSetting::BetaPrime) => Pairing::AlphaBetaPrime,
            (ASetting::AlphaPrime, BSetting::Beta) => Pairing::AlphaPrimeBeta,
            (ASetting::AlphaPrime, BSetting::BetaPrime) => Pairing::AlphaPrimeBetaPrime,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pairing::AlphaBeta => "alpha_beta",
            Pairing::AlphaBetaPrime => "alpha_beta_prime",
            Pairing::AlphaPrimeBeta => "alpha_prime_beta",
            Pairing::AlphaPrimeBetaPrime => "alpha_prime_beta_prime",
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::AlphaBeta => "(α,β)",
            Pairing::AlphaBetaPrime => "(α,β')",
            Pairing::AlphaPrimeBeta => "(α',β)",
            Pairing::AlphaPrimeBetaPrime => "(α',β')",
        })
    }
}

/// How the cells of a table relate to the settings that produced them.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Layout {
    /// No schedule attached; every filled cell is taken at face value.
    #[default]
    Plain,
    /// Derived from a recorded run: a cell is measured exactly when its
    /// setting was active in that slot.
    Run(Vec<SlotSettings>),
    /// Factual and counterfactual cells laid out along a schedule; every
    /// cell is filled.
    Complete(Vec<SlotSettings>),
}

impl Layout {
    pub fn schedule(&self) -> Option<&[SlotSettings]> {
        match self {
            Layout::Plain => None,
            Layout::Run(s) | Layout::Complete(s) => Some(s),
        }
    }
}

/// The four aligned series over `slots` time slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesTable {
    slots: usize,
    rows: [Vec<Outcome>; 4],
    layout: Layout,
}

impl SeriesTable {
    /// A plain table; all rows must have the same length.
    pub fn new(rows: [Vec<Outcome>; 4]) -> Result<Self> {
        let slots = rows[0].len();
        if let Some(r) = Row::ALL.iter().find(|r| rows[r.index()].len() != slots) {
            return Err(Error::Structure(format!(
                "row {} has {} cells, expected {}",
                r,
                rows[r.index()].len(),
                slots
            )));
        }
        Ok(SeriesTable {
            slots,
            rows,
            layout: Layout::Plain,
        })
    }

    /// Builds a table without checking anything; use [`validate`] to list
    /// what is wrong with it.
    pub fn from_parts(slots: usize, rows: [Vec<Outcome>; 4], layout: Layout) -> Self {
        SeriesTable {
            slots,
            rows,
            layout,
        }
    }

    /// Parses rows written with [`Outcome::symbol`] characters, e.g.
    /// `"++--0."`. Whitespace is ignored.
    pub fn parse(a: &str, a_prime: &str, b: &str, b_prime: &str) -> Result<Self> {
        fn row(s: &str) -> Result<Vec<Outcome>> {
            s.chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| {
                    Outcome::from_symbol(c)
                        .ok_or_else(|| Error::Structure(format!("unknown outcome symbol {c:?}")))
                })
                .collect()
        }
        SeriesTable::new([row(a)?, row(a_prime)?, row(b)?, row(b_prime)?])
    }

    pub fn with_layout(mut self, layout: Layout) -> Self {
        self.layout = layout;
        self
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn row(&self, row: Row) -> &[Outcome] {
        &self.rows[row.index()]
    }

    pub fn rows(&self) -> &[Vec<Outcome>; 4] {
        &self.rows
    }

    pub fn into_rows(self) -> [Vec<Outcome>; 4] {
        self.rows
    }

    pub fn cell(&self, row: Row, slot: usize) -> Outcome {
        self.rows[row.index()][slot]
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn schedule(&self) -> Option<&[SlotSettings]> {
        self.layout.schedule()
    }

    pub fn is_fully_measured(&self) -> bool {
        self.rows.iter().flatten().all(|o| o.is_measured())
    }

    /// Reconstructs the per-slot settings of a run-derived table from which
    /// cells are measured: exactly one A-row and one B-row cell per slot.
    pub fn infer_run_schedule(&self) -> Option<Vec<SlotSettings>> {
        if let Layout::Run(s) = &self.layout {
            return Some(s.clone());
        }
        (0..self.slots)
            .map(|i| {
                let a = match (
                    self.cell(Row::A, i).is_measured(),
                    self.cell(Row::APrime, i).is_measured(),
                ) {
                    (true, false) => ASetting::Alpha,
                    (false, true) => ASetting::AlphaPrime,
                    _ => return None,
                };
                let b = match (
                    self.cell(Row::B, i).is_measured(),
                    self.cell(Row::BPrime, i).is_measured(),
                ) {
                    (true, false) => BSetting::Beta,
                    (false, true) => BSetting::BetaPrime,
                    _ => return None,
                };
                Some(SlotSettings::new(a, b))
            })
            .collect()
    }

    /// Replaces every empty box with `fill`. The result is a plain table.
    pub fn filled(&self, fill: Outcome) -> SeriesTable {
        let rows = self.rows.clone().map(|r| {
            r.into_iter()
                .map(|o| if o.is_measured() { o } else { fill })
                .collect()
        });
        SeriesTable::from_parts(self.slots, rows, Layout::Plain)
    }

    /// Applies `perm` (new position -> old slot) to every row at once.
    pub fn permuted(&self, perm: &[usize]) -> Result<SeriesTable> {
        check_permutation(perm, self.slots)?;
        let rows = self
            .rows
            .clone()
            .map(|r| perm.iter().map(|&i| r[i]).collect());
        let layout = match &self.layout {
            Layout::Plain => Layout::Plain,
            Layout::Run(s) => Layout::Run(perm.iter().map(|&i| s[i]).collect()),
            Layout::Complete(s) => Layout::Complete(perm.iter().map(|&i| s[i]).collect()),
        };
        Ok(SeriesTable::from_parts(self.slots, rows, layout))
    }
}

impl fmt::Display for SeriesTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in [Row::A, Row::B, Row::APrime, Row::BPrime] {
            let cells: String = self.row(row).iter().map(|o| o.symbol()).collect();
            writeln!(f, "{:<3}{}", row.to_string(), cells)?;
        }
        Ok(())
    }
}

fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    let mut seen = vec![false; len];
    if perm.len() != len {
        return Err(Error::Structure(format!(
            "permutation has {} entries, expected {len}",
            perm.len()
        )));
    }
    for &i in perm {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Structure(format!("invalid permutation entry {i}")));
        }
    }
    Ok(())
}

/// What a run recorded in one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotEvent {
    pub settings: SlotSettings,
    pub a: Outcome,
    pub b: Outcome,
}

impl SlotEvent {
    pub fn new(settings: SlotSettings, a: Outcome, b: Outcome) -> Self {
        SlotEvent { settings, a, b }
    }

    pub fn outcome(&self, station: Station) -> Outcome {
        match station {
            Station::A => self.a,
            Station::B => self.b,
        }
    }
}

/// A time-ordered sequence of slot events.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordedRun {
    events: Vec<SlotEvent>,
    metadata: Option<serde_json::Value>,
}

impl RecordedRun {
    pub fn new(events: Vec<SlotEvent>) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            if !e.a.is_measured() || !e.b.is_measured() {
                return Err(Error::Structure(format!(
                    "slot {i}: a recorded outcome must be +1, -1 or 0"
                )));
            }
        }
        Ok(RecordedRun {
            events,
            metadata: None,
        })
    }

    /// Builds a run from a schedule and the outcomes seen at each station.
    pub fn from_parts(schedule: &[SlotSettings], a: &[Outcome], b: &[Outcome]) -> Result<Self> {
        if schedule.len() != a.len() || schedule.len() != b.len() {
            return Err(Error::Structure(
                "schedule and outcome series differ in length".into(),
            ));
        }
        RecordedRun::new(
            schedule
                .iter()
                .zip(a.iter().zip(b))
                .map(|(&s, (&a, &b))| SlotEvent::new(s, a, b))
                .collect(),
        )
    }

    pub fn with_metadata(mut self, metadata: serde_json::Value) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn metadata(&self) -> Option<&serde_json::Value> {
        self.metadata.as_ref()
    }

    pub fn slots(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[SlotEvent] {
        &self.events
    }

    pub fn schedule(&self) -> Vec<SlotSettings> {
        self.events.iter().map(|e| e.settings).collect()
    }

    /// Slots recorded under `pairing`, in time order.
    pub fn slots_of(&self, pairing: Pairing) -> Vec<usize> {
        self.events
            .iter()
            .enumerate()
            .filter(|(_, e)| e.settings.pairing() == pairing)
            .map(|(i, _)| i)
            .collect()
    }

    /// Keeps the listed slots in the given order.
    pub fn select(&self, slots: &[usize]) -> RecordedRun {
        RecordedRun {
            events: slots.iter().map(|&i| self.events[i]).collect(),
            metadata: None,
        }
    }
}

/// Expands the recorded run into a table whose inactive cells are empty.
pub fn table_from_run(run: &RecordedRun) -> SeriesTable {
    let t = run.slots();
    let mut rows: [Vec<Outcome>; 4] = std::array::from_fn(|_| vec![Outcome::Unmeasured; t]);
    for (i, e) in run.events().iter().enumerate() {
        rows[e.settings.active_row(Station::A).index()][i] = e.a;
        rows[e.settings.active_row(Station::B).index()][i] = e.b;
    }
    SeriesTable::from_parts(t, rows, Layout::Run(run.schedule()))
}

/// Inverse of [`table_from_run`]. Tables without an attached schedule are
/// accepted when their measured cells determine one.
pub fn run_from_table(table: &SeriesTable) -> Result<RecordedRun> {
    let violations = validate(table);
    if !violations.is_empty() {
        return Err(Error::Structure(violations[0].to_string()));
    }
    let schedule = match table.layout() {
        Layout::Run(s) => s.clone(),
        Layout::Complete(_) => {
            return Err(Error::Precondition(
                "a complete table has no single recorded run; use resampling".into(),
            ))
        }
        Layout::Plain => table.infer_run_schedule().ok_or_else(|| {
            Error::Precondition(
                "table does not have exactly one measured cell per station and slot".into(),
            )
        })?,
    };
    RecordedRun::new(
        schedule
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                SlotEvent::new(
                    s,
                    table.cell(s.active_row(Station::A), i),
                    table.cell(s.active_row(Station::B), i),
                )
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    RowLength {
        expected: usize,
        found: usize,
    },
    ScheduleLength {
        expected: usize,
        found: usize,
    },
    /// A cell holds an outcome although its setting was not active.
    InactiveMeasured,
    /// A cell is empty although its setting was active.
    ActiveUnmeasured,
    /// A complete table must not have empty boxes.
    CompleteUnmeasured,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub row: Option<Row>,
    pub slot: Option<usize>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(row) = self.row {
            write!(f, "row {row}")?;
        } else {
            f.write_str("table")?;
        }
        if let Some(slot) = self.slot {
            write!(f, ", slot {slot}")?;
        }
        match &self.rule {
            Rule::RowLength { expected, found } => {
                write!(f, ": {found} cells, expected {expected}")
            }
            Rule::ScheduleLength { expected, found } => {
                write!(f, ": schedule has {found} slots, expected {expected}")
            }
            Rule::InactiveMeasured => f.write_str(": outcome recorded under an inactive setting"),
            Rule::ActiveUnmeasured => f.write_str(": no outcome under the active setting"),
            Rule::CompleteUnmeasured => f.write_str(": empty box in a complete table"),
        }
    }
}

/// Lists every structural problem of `table`; empty when it is well formed.
pub fn validate(table: &SeriesTable) -> Vec<Violation> {
    let mut out = Vec::new();
    let t = table.slots();
    for row in Row::ALL {
        let found = table.row(row).len();
        if found != t {
            out.push(Violation {
                row: Some(row),
                slot: None,
                rule: Rule::RowLength { expected: t, found },
            });
        }
    }
    if let Some(s) = table.schedule() {
        if s.len() != t {
            out.push(Violation {
                row: None,
                slot: None,
                rule: Rule::ScheduleLength {
                    expected: t,
                    found: s.len(),
                },
            });
        }
    }
    if !out.is_empty() {
        return out;
    }
    match table.layout() {
        Layout::Plain => {}
        Layout::Run(schedule) => {
            for (i, &s) in schedule.iter().enumerate() {
                for row in Row::ALL {
                    let measured = table.cell(row, i).is_measured();
                    let rule = match (row.is_active(s), measured) {
                        (true, false) => Rule::ActiveUnmeasured,
                        (false, true) => Rule::InactiveMeasured,
                        _ => continue,
                    };
                    out.push(Violation {
                        row: Some(row),
                        slot: Some(i),
                        rule,
                    });
                }
            }
        }
        Layout::Complete(_) => {
            for row in Row::ALL {
                for (i, o) in table.row(row).iter().enumerate() {
                    if !o.is_measured() {
                        out.push(Violation {
                            row: Some(row),
                            slot: Some(i),
                            rule: Rule::CompleteUnmeasured,
                        });
                    }
                }
            }
        }
    }
    out
}

/// How measuring time is distributed among the settings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// A = α for the first half; B = β for the middle half. Requires the
    /// slot count to be a multiple of 4.
    BlockHalves,
    /// Each station picks its setting uniformly at random in every slot.
    RandomPerSlot {
        seed: u64,
    },
    Custom {
        settings: Vec<SlotSettings>,
    },
}

/// Stream offset separating schedule draws from outcome draws that share a
/// seed.
pub(crate) const SCHEDULE_STREAM_BASE: u64 = 1 << 62;

impl Schedule {
    pub fn settings(&self, slots: usize) -> Result<Vec<SlotSettings>> {
        match self {
            Schedule::BlockHalves => block_halves(slots),
            Schedule::RandomPerSlot { seed } => Ok((0..slots)
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    rng.set_stream(SCHEDULE_STREAM_BASE + i as u64);
                    let a = if rng.random::<bool>() {
                        ASetting::AlphaPrime
                    } else {
                        ASetting::Alpha
                    };
                    let b = if rng.random::<bool>() {
                        BSetting::BetaPrime
                    } else {
                        BSetting::Beta
                    };
                    SlotSettings::new(a, b)
                })
                .collect()),
            Schedule::Custom { settings } => {
                if settings.len() != slots {
                    return Err(Error::Structure(format!(
                        "custom schedule has {} slots, expected {slots}",
                        settings.len()
                    )));
                }
                Ok(settings.clone())
            }
        }
    }
}

pub fn block_halves(slots: usize) -> Result<Vec<SlotSettings>> {
    if !slots.is_multiple_of(4) {
        return Err(Error::Precondition(format!(
            "block-halves schedule needs a slot count divisible by 4, got {slots}"
        )));
    }
    let q = slots / 4;
    Ok((0..slots)
        .map(|i| {
            let a = if i < 2 * q {
                ASetting::Alpha
            } else {
                ASetting::AlphaPrime
            };
            let b = if (q..3 * q).contains(&i) {
                BSetting::Beta
            } else {
                BSetting::BetaPrime
            };
            SlotSettings::new(a, b)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(a: ASetting, b: BSetting) -> SlotSettings {
        SlotSettings::new(a, b)
    }

    #[test]
    fn zero_and_unmeasured_stay_distinct() {
        assert_ne!(Outcome::Zero, Outcome::Unmeasured);
        assert!(Outcome::Zero.is_measured());
        assert!(!Outcome::Unmeasured.is_measured());
        assert_eq!(Outcome::Zero.to_wire(), Some(0));
        assert_eq!(Outcome::Unmeasured.to_wire(), None);
    }

    #[test]
    fn block_halves_layout() {
        let s = block_halves(8).unwrap();
        let pairings: Vec<Pairing> = s.iter().map(|s| s.pairing()).collect();
        let expected: Vec<Pairing> = Pairing::BLOCK_ORDER.iter().flat_map(|&p| [p, p]).collect();
        assert_eq!(pairings, expected);
        assert!(block_halves(6).is_err());
    }

    #[test]
    fn constant_schedule_run() {
        let s = settings(ASetting::Alpha, BSetting::Beta);
        let run =
            RecordedRun::from_parts(&[s; 4], &[Outcome::Plus; 4], &[Outcome::Plus; 4]).unwrap();
        let table = table_from_run(&run);
        assert_eq!(table.row(Row::A), &[Outcome::Plus; 4]);
        assert_eq!(table.row(Row::B), &[Outcome::Plus; 4]);
        assert_eq!(table.row(Row::APrime), &[Outcome::Unmeasured; 4]);
        assert_eq!(table.row(Row::BPrime), &[Outcome::Unmeasured; 4]);
        assert!(validate(&table).is_empty());
        assert_eq!(run_from_table(&table).unwrap(), run);
    }

    #[test]
    fn unequal_rows_reported() {
        let rows = [
            vec![Outcome::Plus; 3],
            vec![Outcome::Plus; 3],
            vec![Outcome::Plus; 2],
            vec![Outcome::Plus; 3],
        ];
        assert!(SeriesTable::new(rows.clone()).is_err());
        let v = validate(&SeriesTable::from_parts(3, rows, Layout::Plain));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].row, Some(Row::B));
        assert!(matches!(
            v[0].rule,
            Rule::RowLength {
                expected: 3,
                found: 2
            }
        ));
    }

    #[test]
    fn measured_cell_under_inactive_setting() {
        let s = settings(ASetting::Alpha, BSetting::Beta);
        let run =
            RecordedRun::from_parts(&[s; 2], &[Outcome::Plus; 2], &[Outcome::Minus; 2]).unwrap();
        let mut rows = table_from_run(&run).into_rows();
        rows[Row::APrime.index()][1] = Outcome::Zero;
        let bad = SeriesTable::from_parts(2, rows, Layout::Run(run.schedule()));
        let v = validate(&bad);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].row, Some(Row::APrime));
        assert_eq!(v[0].slot, Some(1));
        assert_eq!(v[0].rule, Rule::InactiveMeasured);
    }

    #[test]
    fn schedule_inferred_from_plain_table() {
        let t = SeriesTable::parse("+.", ".-", "0.", ".+").unwrap();
        let run = run_from_table(&t).unwrap();
        assert_eq!(
            run.schedule(),
            vec![
                settings(ASetting::Alpha, BSetting::Beta),
                settings(ASetting::AlphaPrime, BSetting::BetaPrime)
            ]
        );
        assert_eq!(run.events()[0].b, Outcome::Zero);
    }

    #[test]
    fn random_schedule_is_seeded() {
        let s1 = Schedule::RandomPerSlot { seed: 3 }.settings(64).unwrap();
        let s2 = Schedule::RandomPerSlot { seed: 3 }.settings(64).unwrap();
        let s3 = Schedule::RandomPerSlot { seed: 4 }.settings(64).unwrap();
        assert_eq!(s1, s2);
        assert_ne!(s1, s3);
        for p in Pairing::ALL {
            assert!(s1.iter().any(|s| s.pairing() == p));
        }
    }

    #[test]
    fn permutation_moves_all_rows_together() {
        let t = SeriesTable::parse("+-0", "-+0", "++-", "0--").unwrap();
        let p = t.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p, SeriesTable::parse("0+-", "0-+", "-++", "-0-").unwrap());
        assert!(t.permuted(&[0, 0, 1]).is_err());
    }
}
