//! Seeded runs from a source model.
//!
//! Every slot draws from its own ChaCha8 stream: slot `i` uses stream `i` of
//! the configured seed, so slots can be generated in any order or in
//! parallel with the same result. Schedule draws and instruction shuffles
//! use disjoint stream ranges of the same seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{
    Outcome, Pairing, RecordedRun, Row, Schedule, SeriesTable, SlotEvent, SlotSettings, Station,
};

pub const GENERATOR: &str = "ChaCha8Rng";
const SHUFFLE_STREAM_BASE: u64 = 1 << 61;

/// Analyzer angles in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Angles {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

impl Default for Angles {
    fn default() -> Self {
        Angles {
            alpha: 0.0,
            alpha_prime: 45.0,
            beta: 22.5,
            beta_prime: 67.5,
        }
    }
}

impl Angles {
    fn of(&self, s: SlotSettings) -> (f64, f64) {
        use crate::model::{ASetting, BSetting};
        let a = match s.a {
            ASetting::Alpha => self.alpha,
            ASetting::AlphaPrime => self.alpha_prime,
        };
        let b = match s.b {
            BSetting::Beta => self.beta,
            BSetting::BetaPrime => self.beta_prime,
        };
        (a, b)
    }
}

/// The order in which a local model hands out its instructions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstructionOrder {
    /// The `j`-th slot of a pairing uses instruction `j mod L`.
    #[default]
    Sequential,
    /// Each pass over the `L` instructions follows a fresh seeded
    /// permutation, drawn separately per pairing.
    Shuffled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceModel {
    /// `E(θA, θB) = cos 2(θA − θB)`.
    Quantum,
    /// A fixed table of `(a, a', b, b')` instructions in wire values; a slot
    /// reads the cells of its active settings.
    LocalDeterministic {
        instructions: Vec<[i8; 4]>,
        #[serde(default)]
        order: InstructionOrder,
    },
    /// Correlations per pairing in `(α,β)`, `(α,β')`, `(α',β)`, `(α',β')`
    /// order.
    Custom { correlations: [f64; 4] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub model: SourceModel,
    #[serde(default)]
    pub angles: Angles,
    /// Probability that each station's detection survives.
    #[serde(default = "one")]
    pub eta: f64,
    pub slots: usize,
    pub schedule: Schedule,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl SourceConfig {
    pub fn quantum(slots: usize, schedule: Schedule, seed: u64) -> Self {
        SourceConfig {
            model: SourceModel::Quantum,
            angles: Angles::default(),
            eta: 1.0,
            slots,
            schedule,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Domain(format!(
                "eta = {} is outside [0, 1]",
                self.eta
            )));
        }
        let a = &self.angles;
        if ![a.alpha, a.alpha_prime, a.beta, a.beta_prime]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::Domain("angles must be finite".into()));
        }
        match &self.model {
            SourceModel::Quantum => {}
            SourceModel::Custom { correlations } => {
                if let Some(e) = correlations.iter().find(|e| !(-1.0..=1.0).contains(*e)) {
                    return Err(Error::Domain(format!("correlation {e} is outside [-1, 1]")));
                }
            }
            SourceModel::LocalDeterministic { instructions, .. } => {
                if instructions.is_empty() {
                    return Err(Error::Domain(
                        "a local model needs at least one instruction".into(),
                    ));
                }
                if let Some(v) = instructions
                    .iter()
                    .flatten()
                    .find(|v| Outcome::from_wire(i64::from(**v)).is_none())
                {
                    return Err(Error::Domain(format!(
                        "instruction value {v} is not -1, 0 or 1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Correlation of the model for a pairing, where the model has one.
    pub fn correlation(&self, pairing: Pairing) -> Option<f64> {
        match &self.model {
            SourceModel::Quantum => {
                let (a, b) = self.angles.of(pairing.settings());
                Some((2.0 * (a - b).to_radians()).cos())
            }
            SourceModel::Custom { correlations } => Some(correlations[pairing.index()]),
            SourceModel::LocalDeterministic { .. } => None,
        }
    }

    /// The metadata header recorded with every simulated run.
    pub fn metadata(&self) -> serde_json::Value {
        json!({
            "generator": GENERATOR,
            "stream_rule": "slot i draws from stream i of the seed; schedule draws use stream 2^62 + i; instruction passes use stream 2^61 + 2^32·pairing + pass",
            "seed": self.seed,
            "config": self,
        })
    }
}

fn slot_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn erase(rng: &mut ChaCha8Rng, o: Outcome, eta: f64) -> Outcome {
    if rng.random::<f64>() < eta {
        o
    } else {
        Outcome::Zero
    }
}

/// Instruction index of each slot for a local model.
fn instruction_indices(
    config: &SourceConfig,
    schedule: &[SlotSettings],
    len: usize,
    order: InstructionOrder,
) -> Vec<usize> {
    let mut seen = [0usize; 4];
    let mut perms: [Vec<Vec<usize>>; 4] = Default::default();
    schedule
        .iter()
        .map(|s| {
            let p = s.pairing().index();
            let j = seen[p];
            seen[p] += 1;
            match order {
                InstructionOrder::Sequential => j % len,
                InstructionOrder::Shuffled => {
                    let pass = j / len;
                    while perms[p].len() <= pass {
                        let mut perm: Vec<usize> = (0..len).collect();
                        let stream =
                            SHUFFLE_STREAM_BASE + ((p as u64) << 32) + perms[p].len() as u64;
                        perm.shuffle(&mut slot_rng(config.seed, stream));
                        perms[p].push(perm);
                    }
                    perms[p][pass][j % len]
                }
            }
        })
        .collect()
}

pub fn simulate(config: &SourceConfig) -> Result<RecordedRun> {
    config.validate()?;
    let schedule = config.schedule.settings(config.slots)?;
    let events: Vec<SlotEvent> = match &config.model {
        SourceModel::LocalDeterministic {
            instructions,
            order,
        } => {
            let idx = instruction_indices(config, &schedule, instructions.len(), *order);
            schedule
                .par_iter()
                .zip(idx)
                .enumerate()
                .map(|(i, (&s, k))| {
                    let mut rng = slot_rng(config.seed, i as u64);
                    let cell = |row: Row| {
                        Outcome::from_wire(i64::from(instructions[k][row.index()]))
                            .expect("validated")
                    };
                    let a = erase(&mut rng, cell(s.active_row(Station::A)), config.eta);
                    let b = erase(&mut rng, cell(s.active_row(Station::B)), config.eta);
                    SlotEvent::new(s, a, b)
                })
                .collect()
        }
        _ => {
            let e = Pairing::ALL.map(|p| config.correlation(p).expect("model has correlations"));
            schedule
                .par_iter()
                .enumerate()
                .map(|(i, &s)| {
                    let mut rng = slot_rng(config.seed, i as u64);
                    let a = Outcome::from_bit(rng.random::<bool>());
                    let same = rng.random::<f64>() < (1.0 + e[s.pairing().index()]) / 2.0;
                    let b = if same {
                        a
                    } else {
                        Outcome::from_bit(a == Outcome::Minus)
                    };
                    let a = erase(&mut rng, a, config.eta);
                    let b = erase(&mut rng, b, config.eta);
                    SlotEvent::new(s, a, b)
                })
                .collect()
        }
    };
    Ok(RecordedRun::new(events)?.with_metadata(config.metadata()))
}

/// Exposes the scheduled cells of a fully measured table, slot by slot.
pub fn replay(table: &SeriesTable, schedule: &Schedule) -> Result<RecordedRun> {
    if !table.is_fully_measured() {
        return Err(Error::Precondition(
            "replay needs a fully measured table".into(),
        ));
    }
    let settings = schedule.settings(table.slots())?;
    RecordedRun::new(
        settings
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

/// Records each row's series in order: the `j`-th slot in which a setting
/// is active reads the `j`-th value of that row.
pub fn replay_sequential(table: &SeriesTable, settings: &[SlotSettings]) -> Result<RecordedRun> {
    if !table.is_fully_measured() {
        return Err(Error::Precondition(
            "replay needs a fully measured table".into(),
        ));
    }
    let mut next = [0usize; 4];
    let mut take = |row: Row| -> Result<Outcome> {
        let j = next[row.index()];
        next[row.index()] += 1;
        table.row(row).get(j).copied().ok_or_else(|| {
            Error::Structure(format!(
                "row {row} has {} values but the schedule reads more",
                table.slots()
            ))
        })
    };
    let mut events = Vec::with_capacity(settings.len());
    for &s in settings {
        let a = take(s.active_row(Station::A))?;
        let b = take(s.active_row(Station::B))?;
        events.push(SlotEvent::new(s, a, b));
    }
    RecordedRun::new(events)
}
