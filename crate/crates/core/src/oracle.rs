//! Exhaustive enumeration at small sizes.
//!
//! Tables are enumerated slot by slot. A [`EnumLayout::Plain`] slot holds one
//! value per row and is indexed `((a·k + a')·k + b)·k + b'`; a
//! [`EnumLayout::BlockRun`] slot holds the two observed outcomes `a·k + b`
//! of a block-halves run. Values are ordered `+ < − < 0` and slot 0 is the
//! most significant digit, so enumeration and witness order are
//! lexicographic. The first slots are split across rayon workers and
//! partial results are merged in order, so results do not depend on the
//! number of threads.
//!
//! Nothing here calls into [`crate::stats`] or [`crate::sica`]: every
//! statistic is recomputed from per-slot contributions so the sweeps can be
//! checked against those modules.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{block_halves, Layout, Outcome, RecordedRun, Row, SeriesTable, SlotSettings};
use crate::rational::{exact_opt, Rational};
use crate::sica::{CompleteTable, Provenance};

pub const DEFAULT_BUDGET: u64 = 1 << 26;
const DEFAULT_WITNESSES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alphabet {
    /// `{+, −}`.
    Binary,
    /// `{+, −, 0}`.
    Ternary,
}

impl Alphabet {
    pub fn values(self) -> &'static [Outcome] {
        match self {
            Alphabet::Binary => &[Outcome::Plus, Outcome::Minus],
            Alphabet::Ternary => &[Outcome::Plus, Outcome::Minus, Outcome::Zero],
        }
    }

    fn size(self) -> usize {
        self.values().len()
    }
}

impl FromStr for Alphabet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" | "pm" => Ok(Alphabet::Binary),
            "ternary" | "pmz" => Ok(Alphabet::Ternary),
            _ => Err(Error::Domain(format!(
                "unknown alphabet {s:?}; expected binary or ternary"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumLayout {
    /// Fully measured tables.
    Plain,
    /// Recorded runs under the block-halves schedule, read as tables with
    /// empty boxes.
    BlockRun,
}

impl FromStr for EnumLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(EnumLayout::Plain),
            "block-run" | "block_run" => Ok(EnumLayout::BlockRun),
            _ => Err(Error::Domain(format!(
                "unknown layout {s:?}; expected plain or block-run"
            ))),
        }
    }
}

/// Filters applied to each enumerated table. `η` is the smallest
/// coincidence-over-singles ratio over all pairings and both stations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// Each series is the same under both distant settings. Every plain
    /// fully measured table satisfies it.
    SicaCondition,
    /// All four pairings have the same coincidence count.
    EqualNc,
    EtaAtLeast(Rational),
    EtaAtMost(Rational),
    EtaBelow(Rational),
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::SicaCondition => write!(f, "sica"),
            Constraint::EqualNc => write!(f, "equal-nc"),
            Constraint::EtaAtLeast(q) => write!(f, "eta>={q}"),
            Constraint::EtaAtMost(q) => write!(f, "eta<={q}"),
            Constraint::EtaBelow(q) => write!(f, "eta<{q}"),
        }
    }
}

impl FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let ratio = |t: &str| -> Result<Rational> {
            t.trim()
                .parse::<Rational>()
                .map_err(|e| Error::Domain(format!("bad rational {t:?}: {e}")))
        };
        if s == "sica" {
            Ok(Constraint::SicaCondition)
        } else if s == "equal-nc" {
            Ok(Constraint::EqualNc)
        } else if let Some(q) = s.strip_prefix("eta>=") {
            Ok(Constraint::EtaAtLeast(ratio(q)?))
        } else if let Some(q) = s.strip_prefix("eta<=") {
            Ok(Constraint::EtaAtMost(ratio(q)?))
        } else if let Some(q) = s.strip_prefix("eta<") {
            Ok(Constraint::EtaBelow(ratio(q)?))
        } else {
            Err(Error::Domain(format!(
                "unknown constraint {s:?}; expected sica, equal-nc, eta>=q, eta<=q or eta<q"
            )))
        }
    }
}

impl Serialize for Constraint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnumSpec {
    pub slots: usize,
    pub alphabet: Alphabet,
    pub layout: EnumLayout,
    pub constraints: Vec<Constraint>,
    /// Largest number of tables a sweep may visit.
    pub budget: u64,
    pub max_witnesses: usize,
}

impl EnumSpec {
    pub fn new(slots: usize, alphabet: Alphabet) -> Self {
        EnumSpec {
            slots,
            alphabet,
            layout: EnumLayout::Plain,
            constraints: Vec::new(),
            budget: DEFAULT_BUDGET,
            max_witnesses: DEFAULT_WITNESSES,
        }
    }

    pub fn with_layout(mut self, layout: EnumLayout) -> Self {
        self.layout = layout;
        self
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// `k^{4T}` plain tables or `k^{2T}` runs, before constraints.
    pub fn table_count(&self) -> u128 {
        let k = self.alphabet.size() as u128;
        let cells = match self.layout {
            EnumLayout::Plain => 4 * self.slots,
            EnumLayout::BlockRun => 2 * self.slots,
        };
        (0..cells)
            .try_fold(1u128, |n, _| n.checked_mul(k))
            .unwrap_or(u128::MAX)
    }

    fn check(&self) -> Result<()> {
        let required = self.table_count();
        if required > u128::from(self.budget) {
            return Err(Error::Budget {
                required,
                budget: self.budget,
            });
        }
        if self.layout == EnumLayout::BlockRun && !self.slots.is_multiple_of(4) {
            return Err(Error::Precondition(format!(
                "block runs need a multiple of 4 slots, got {}",
                self.slots
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalResult {
    pub objective: &'static str,
    pub spec: EnumSpec,
    /// `None` when no admitted table has the objective defined.
    #[serde(with = "exact_opt")]
    pub max_value: Option<Rational>,
    /// First maximizers in enumeration order.
    #[serde(serialize_with = "tables_json")]
    pub witnesses: Vec<SeriesTable>,
    pub tables_scanned: u64,
    pub tables_admitted: u64,
    #[serde(with = "exact_opt")]
    pub reference: Option<Rational>,
    /// Admitted tables whose value exceeds `reference`.
    pub above_reference: u64,
}

fn tables_json<S: Serializer>(
    tables: &[SeriesTable],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(tables.iter().map(crate::io::table_to_json))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Objective {
    Chsh,
    ChJ,
    SEta,
    /// `lhs − rhs` of the coincidence-count bound.
    CoincidenceExcess,
}

impl Objective {
    fn name(self) -> &'static str {
        match self {
            Objective::Chsh => "s_chsh",
            Objective::ChJ => "ch_j",
            Objective::SEta => "s_eta",
            Objective::CoincidenceExcess => "coincidence_excess",
        }
    }
}

/// Exact maximum of `S` over the spec.
pub fn max_chsh(spec: &EnumSpec) -> Result<ExtremalResult> {
    sweep(spec, Objective::Chsh, Some(Rational::from_integer(2)))
}

/// Exact maximum of `J` with `+ ↦ 1` and `−, 0 ↦ 0`.
pub fn max_ch_j(spec: &EnumSpec) -> Result<ExtremalResult> {
    sweep(spec, Objective::ChJ, Some(Rational::zero()))
}

/// Exact maximum of `S·η`.
pub fn max_s_eta(spec: &EnumSpec) -> Result<ExtremalResult> {
    sweep(spec, Objective::SEta, Some(Rational::from_integer(2)))
}

/// Largest `lhs − rhs` of the coincidence-count bound over plain tables;
/// `above_reference` counts the violations.
pub fn verify_coincidence_bound(spec: &EnumSpec) -> Result<ExtremalResult> {
    if spec.layout != EnumLayout::Plain {
        return Err(Error::Precondition(
            "the coincidence-count bound is defined on fully measured tables".into(),
        ));
    }
    sweep(spec, Objective::CoincidenceExcess, Some(Rational::zero()))
}

// Per-slot additive contributions.
const NC: usize = 0;
const SUM: usize = 4;
const SINGLES_X: usize = 8;
const SINGLES_Y: usize = 12;
const J: usize = 16;
const ALPHA_BS: usize = 17;
const ALPHA_PRIME_BD: usize = 18;
const NF: usize = 19;

type Features = [i32; NF];

/// Pairings in `(a, a', b, b')` row indices: `(α,β)`, `(α,β')`, `(α',β)`,
/// `(α',β')`.
const PAIRS: [(usize, usize); 4] = [(0, 2), (0, 3), (1, 2), (1, 3)];

fn detection(o: Outcome) -> bool {
    o.is_detection()
}

fn plus(o: Outcome) -> i32 {
    i32::from(o == Outcome::Plus)
}

fn plain_features(cells: [Outcome; 4]) -> Features {
    let mut f = [0; NF];
    for (p, &(x, y)) in PAIRS.iter().enumerate() {
        let (dx, dy) = (detection(cells[x]), detection(cells[y]));
        f[NC + p] = i32::from(dx && dy);
        f[SUM + p] = (cells[x].sign() * cells[y].sign()) as i32;
        f[SINGLES_X + p] = i32::from(dx);
        f[SINGLES_Y + p] = i32::from(dy);
    }
    let [a, ap, b, bp] = cells.map(plus);
    f[J] = a * b + a * bp + ap * b - ap * bp - a - b;
    let both_b = detection(cells[2]) && detection(cells[3]);
    let same = cells[2] == cells[3];
    f[ALPHA_BS] = i32::from(detection(cells[0]) && both_b && same);
    f[ALPHA_PRIME_BD] = i32::from(detection(cells[1]) && both_b && !same);
    f
}

fn run_features(pairing: usize, a: Outcome, b: Outcome) -> Features {
    let mut f = [0; NF];
    f[NC + pairing] = i32::from(detection(a) && detection(b));
    f[SUM + pairing] = (a.sign() * b.sign()) as i32;
    f[SINGLES_X + pairing] = i32::from(detection(a));
    f[SINGLES_Y + pairing] = i32::from(detection(b));
    let (x, y) = PAIRS[pairing];
    let joint = plus(a) * plus(b);
    f[J] = if pairing == 3 { -joint } else { joint };
    if x == 0 {
        f[J] -= plus(a);
    }
    if y == 2 {
        f[J] -= plus(b);
    }
    f
}

/// A nonnegative-denominator fraction compared by cross multiplication.
#[derive(Clone, Copy, Debug)]
struct Value {
    num: i128,
    den: i128,
}

impl Value {
    fn int(n: i128) -> Self {
        Value { num: n, den: 1 }
    }

    fn cmp(self, other: Value) -> std::cmp::Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }

    fn to_rational(self) -> Rational {
        Rational::new(self.num as i64, self.den as i64)
    }

    fn from_rational(r: Rational) -> Self {
        Value {
            num: i128::from(*r.numer()),
            den: i128::from(*r.denom()),
        }
    }
}

fn chsh_value(f: &Features) -> Option<Value> {
    let n: [i128; 4] = std::array::from_fn(|p| i128::from(f[NC + p]));
    let s: [i128; 4] = std::array::from_fn(|p| i128::from(f[SUM + p]));
    if n.contains(&0) {
        return None;
    }
    let first = (s[0] * n[1] - s[1] * n[0]).abs() * n[2] * n[3];
    let second = (s[2] * n[3] + s[3] * n[2]).abs() * n[0] * n[1];
    Some(Value {
        num: first + second,
        den: n[0] * n[1] * n[2] * n[3],
    })
}

fn eta_value(f: &Features) -> Option<Value> {
    let mut best: Option<Value> = None;
    for p in 0..4 {
        for singles in [f[SINGLES_X + p], f[SINGLES_Y + p]] {
            if singles > 0 {
                let v = Value {
                    num: i128::from(f[NC + p]),
                    den: i128::from(singles),
                };
                if best.is_none_or(|b| v.cmp(b).is_lt()) {
                    best = Some(v);
                }
            }
        }
    }
    best
}

struct Sweep<'a> {
    spec: &'a EnumSpec,
    objective: Objective,
    reference: Option<Value>,
    /// Contributions per slot and state.
    features: Vec<Vec<Features>>,
    states: usize,
}

#[derive(Default)]
struct Partial {
    best: Option<Value>,
    witnesses: Vec<Vec<u16>>,
    scanned: u64,
    admitted: u64,
    above: u64,
}

impl Partial {
    fn merge(mut self, other: Partial, cap: usize) -> Partial {
        self.scanned += other.scanned;
        self.admitted += other.admitted;
        self.above += other.above;
        match (self.best, other.best) {
            (_, None) => {}
            (None, Some(_)) => {
                self.best = other.best;
                self.witnesses = other.witnesses;
            }
            (Some(l), Some(r)) => match r.cmp(l) {
                std::cmp::Ordering::Greater => {
                    self.best = other.best;
                    self.witnesses = other.witnesses;
                }
                std::cmp::Ordering::Equal => {
                    let room = cap.saturating_sub(self.witnesses.len());
                    self.witnesses
                        .extend(other.witnesses.into_iter().take(room));
                }
                std::cmp::Ordering::Less => {}
            },
        }
        self
    }
}

impl Sweep<'_> {
    fn decode_plain(&self, state: u16) -> [Outcome; 4] {
        let k = self.spec.alphabet.size();
        let v = self.spec.alphabet.values();
        let s = state as usize;
        [
            v[s / (k * k * k)],
            v[s / (k * k) % k],
            v[s / k % k],
            v[s % k],
        ]
    }

    fn decode_run(&self, state: u16) -> (Outcome, Outcome) {
        let k = self.spec.alphabet.size();
        let v = self.spec.alphabet.values();
        (v[state as usize / k], v[state as usize % k])
    }

    /// The factual series of a block run are the same under both distant
    /// settings: `a` in the first two quarters, `b` in the middle two, `a'`
    /// in the last two and `b'` in the outer two.
    fn run_sica(&self, stack: &[u16]) -> bool {
        let n = self.spec.slots / 4;
        let a = |i: usize| stack[i] as usize / self.spec.alphabet.size();
        let b = |i: usize| stack[i] as usize % self.spec.alphabet.size();
        (0..n).all(|i| {
            a(i) == a(n + i)
                && b(n + i) == b(2 * n + i)
                && a(2 * n + i) == a(3 * n + i)
                && b(i) == b(3 * n + i)
        })
    }

    fn admit(&self, f: &Features, stack: &[u16]) -> bool {
        self.spec.constraints.iter().all(|c| match c {
            Constraint::SicaCondition => match self.spec.layout {
                EnumLayout::Plain => true,
                EnumLayout::BlockRun => self.run_sica(stack),
            },
            Constraint::EqualNc => (1..4).all(|p| f[NC + p] == f[NC]),
            Constraint::EtaAtLeast(q) => {
                eta_value(f).is_some_and(|e| e.cmp(Value::from_rational(*q)).is_ge())
            }
            Constraint::EtaAtMost(q) => {
                eta_value(f).is_some_and(|e| e.cmp(Value::from_rational(*q)).is_le())
            }
            Constraint::EtaBelow(q) => {
                eta_value(f).is_some_and(|e| e.cmp(Value::from_rational(*q)).is_lt())
            }
        })
    }

    fn value(&self, f: &Features) -> Option<Value> {
        match self.objective {
            Objective::Chsh => chsh_value(f),
            Objective::ChJ => Some(Value::int(i128::from(f[J]))),
            Objective::SEta => {
                let (s, e) = (chsh_value(f)?, eta_value(f)?);
                Some(Value {
                    num: s.num * e.num,
                    den: s.den * e.den,
                })
            }
            Objective::CoincidenceExcess => {
                let s: [i64; 4] = std::array::from_fn(|p| i64::from(f[SUM + p]));
                let lhs = (s[0] - s[1]).abs() + (s[2] + s[3]).abs();
                let n_c: i64 = (0..4).map(|p| i64::from(f[NC + p])).sum();
                let rhs = n_c - 2 * i64::from(f[ALPHA_BS]) - 2 * i64::from(f[ALPHA_PRIME_BD]);
                Some(Value::int(i128::from(lhs - rhs)))
            }
        }
    }

    fn leaf(&self, f: &Features, stack: &[u16], out: &mut Partial) {
        out.scanned += 1;
        if !self.admit(f, stack) {
            return;
        }
        out.admitted += 1;
        let Some(v) = self.value(f) else {
            return;
        };
        if self.reference.is_some_and(|r| v.cmp(r).is_gt()) {
            out.above += 1;
        }
        match out.best.map(|b| v.cmp(b)) {
            None | Some(std::cmp::Ordering::Greater) => {
                out.best = Some(v);
                out.witnesses.clear();
                out.witnesses.push(stack.to_vec());
            }
            Some(std::cmp::Ordering::Equal) => {
                if out.witnesses.len() < self.spec.max_witnesses {
                    out.witnesses.push(stack.to_vec());
                }
            }
            Some(std::cmp::Ordering::Less) => {}
        }
    }

    fn descend(&self, f: Features, stack: &mut Vec<u16>, out: &mut Partial) {
        let depth = stack.len();
        if depth == self.spec.slots {
            self.leaf(&f, stack, out);
            return;
        }
        for (s, g) in self.features[depth].iter().enumerate() {
            let mut h = f;
            for i in 0..NF {
                h[i] += g[i];
            }
            stack.push(s as u16);
            self.descend(h, stack, out);
            stack.pop();
        }
    }

    fn table(&self, stack: &[u16]) -> SeriesTable {
        let t = self.spec.slots;
        match self.spec.layout {
            EnumLayout::Plain => {
                let mut rows: [Vec<Outcome>; 4] = Default::default();
                for &s in stack {
                    for (r, o) in rows.iter_mut().zip(self.decode_plain(s)) {
                        r.push(o);
                    }
                }
                SeriesTable::from_parts(t, rows, Layout::Plain)
            }
            EnumLayout::BlockRun => {
                let schedule = block_halves(t).expect("slot count checked");
                let mut rows: [Vec<Outcome>; 4] =
                    std::array::from_fn(|_| vec![Outcome::Unmeasured; t]);
                for (i, (&s, settings)) in stack.iter().zip(&schedule).enumerate() {
                    let (a, b) = self.decode_run(s);
                    rows[settings.active_row(crate::model::Station::A).index()][i] = a;
                    rows[settings.active_row(crate::model::Station::B).index()][i] = b;
                }
                SeriesTable::from_parts(t, rows, Layout::Run(schedule))
            }
        }
    }
}

fn sweep(
    spec: &EnumSpec,
    objective: Objective,
    reference: Option<Rational>,
) -> Result<ExtremalResult> {
    spec.check()?;
    let k = spec.alphabet.size();
    let v = spec.alphabet.values();
    let (states, features): (usize, Vec<Vec<Features>>) = match spec.layout {
        EnumLayout::Plain => {
            let per_slot: Vec<Features> = (0..k.pow(4))
                .map(|s| {
                    plain_features([
                        v[s / (k * k * k)],
                        v[s / (k * k) % k],
                        v[s / k % k],
                        v[s % k],
                    ])
                })
                .collect();
            (k.pow(4), vec![per_slot; spec.slots])
        }
        EnumLayout::BlockRun => {
            let n = spec.slots / 4;
            // Quarters in slot order: (α,β'), (α,β), (α',β), (α',β').
            let quarter_pairing = [1usize, 0, 2, 3];
            let features = (0..spec.slots)
                .map(|i| {
                    let p = quarter_pairing[i / n];
                    (0..k * k)
                        .map(|s| run_features(p, v[s / k], v[s % k]))
                        .collect()
                })
                .collect();
            (k * k, features)
        }
    };
    let sweep = Sweep {
        spec,
        objective,
        reference: reference.map(Value::from_rational),
        features,
        states,
    };
    let prefix_len = spec.slots.min(2);
    let prefixes = sweep.states.pow(prefix_len as u32);
    let cap = spec.max_witnesses;
    let partial = (0..prefixes)
        .into_par_iter()
        .map(|p| {
            let mut stack = Vec::with_capacity(spec.slots);
            let mut f = [0; NF];
            for d in 0..prefix_len {
                let s = p / sweep.states.pow((prefix_len - 1 - d) as u32) % sweep.states;
                for (x, y) in f.iter_mut().zip(&sweep.features[d][s]) {
                    *x += y;
                }
                stack.push(s as u16);
            }
            let mut out = Partial::default();
            sweep.descend(f, &mut stack, &mut out);
            out
        })
        .reduce(Partial::default, |l, r| l.merge(r, cap));
    Ok(ExtremalResult {
        objective: objective.name(),
        spec: spec.clone(),
        max_value: partial.best.map(Value::to_rational),
        witnesses: partial.witnesses.iter().map(|w| sweep.table(w)).collect(),
        tables_scanned: partial.scanned,
        tables_admitted: partial.admitted,
        reference,
        above_reference: partial.above,
    })
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    pub alphabet: Alphabet,
    pub budget: u64,
    pub max_samples: usize,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            alphabet: Alphabet::Binary,
            budget: DEFAULT_BUDGET,
            max_samples: 64,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Census {
    pub slots: usize,
    /// Fillings of the empty boxes that were tried.
    pub fillings: u64,
    /// Fillings that satisfy Sica's condition and keep the factual
    /// correlations.
    pub valid: u64,
    /// First valid tables in enumeration order.
    pub samples: Vec<CompleteTable>,
}

/// Whether each row of a fully measured table reads the same under both
/// settings of the distant station, following `schedule`.
fn schedule_sica(rows: &[Vec<Outcome>; 4], schedule: &[SlotSettings]) -> bool {
    Row::ALL.iter().all(|&row| {
        let mut split: [Vec<Outcome>; 2] = Default::default();
        for (i, s) in schedule.iter().enumerate() {
            let primed = match row.station() {
                crate::model::Station::A => s.b == crate::model::BSetting::BetaPrime,
                crate::model::Station::B => s.a == crate::model::ASetting::AlphaPrime,
            };
            split[usize::from(primed)].push(rows[row.index()][i]);
        }
        split[0] == split[1]
    })
}

/// Coincidence count and product sum per pairing over the observed cells.
fn factual_sums(rows: &[Vec<Outcome>; 4], schedule: &[SlotSettings]) -> [(i64, i64); 4] {
    let mut out = [(0, 0); 4];
    for (i, s) in schedule.iter().enumerate() {
        let p = s.pairing().index();
        let (x, y) = PAIRS[p];
        let (a, b) = (rows[x][i], rows[y][i]);
        out[p].0 += i64::from(detection(a) && detection(b));
        out[p].1 += a.sign() * b.sign();
    }
    out
}

/// Tries every filling of a run's empty boxes and keeps the fully measured
/// tables that satisfy Sica's condition and preserve the factual
/// correlations. Boxes are ordered by slot, then by row, first box most
/// significant.
pub fn census_complete_tables(run: &RecordedRun, options: &CensusOptions) -> Result<Census> {
    let t = run.slots();
    let k = options.alphabet.size() as u64;
    let boxes = 2 * t;
    let fillings = (0..boxes)
        .try_fold(1u64, |n, _| n.checked_mul(k))
        .filter(|&n| n <= options.budget)
        .ok_or(Error::Budget {
            required: (k as u128).checked_pow(boxes as u32).unwrap_or(u128::MAX),
            budget: options.budget,
        })?;
    let schedule = run.schedule();
    let mut base: [Vec<Outcome>; 4] = std::array::from_fn(|_| vec![Outcome::Unmeasured; t]);
    let mut empty = Vec::with_capacity(boxes);
    for (i, e) in run.events().iter().enumerate() {
        for row in Row::ALL {
            if row.is_active(e.settings) {
                base[row.index()][i] = e.outcome(row.station());
            } else {
                empty.push((row.index(), i));
            }
        }
    }
    let observed = {
        let mut out = [(0i64, 0i64); 4];
        for e in run.events() {
            let p = e.settings.pairing().index();
            out[p].0 += i64::from(detection(e.a) && detection(e.b));
            out[p].1 += e.a.sign() * e.b.sign();
        }
        out
    };
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
            .collect::<Vec<_>>()
    });
    let values = options.alphabet.values();
    const CHUNK: u64 = 1 << 12;
    let chunks = fillings.div_ceil(CHUNK);
    let cap = options.max_samples;
    let (valid, samples) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rows = base.clone();
            let mut valid = 0u64;
            let mut samples = Vec::new();
            for v in c * CHUNK..((c + 1) * CHUNK).min(fillings) {
                let mut rest = v;
                for &(r, i) in empty.iter().rev() {
                    rows[r][i] = values[(rest % k) as usize];
                    rest /= k;
                }
                if schedule_sica(&rows, &schedule) && factual_sums(&rows, &schedule) == observed {
                    valid += 1;
                    if samples.len() < cap {
                        samples.push(rows.clone());
                    }
                }
            }
            (valid, samples)
        })
        .reduce(
            || (0, Vec::new()),
            |(n, mut s), (m, r)| {
                let room = cap.saturating_sub(s.len());
                s.extend(r.into_iter().take(room));
                (n + m, s)
            },
        );
    let samples = samples
        .into_iter()
        .map(|rows| {
            let table = SeriesTable::from_parts(t, rows, Layout::Complete(schedule.clone()));
            CompleteTable::new(table, provenance.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Census {
        slots: t,
        fillings,
        valid,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::rational::ratio;
    use crate::{sica, stats};

    fn binary(t: usize) -> EnumSpec {
        EnumSpec::new(t, Alphabet::Binary)
    }

    #[test]
    fn single_slot_binary_reaches_two() {
        let r = max_chsh(&binary(1)).unwrap();
        assert_eq!(r.max_value, Some(ratio(2, 1)));
        assert_eq!(r.tables_scanned, 16);
        assert_eq!(r.above_reference, 0);
        let w = &r.witnesses[0];
        assert!(stats::correlations(w)
            .iter()
            .all(|c| c.e.unwrap().numer().abs() == 1));
        // +,+,+,+ is the first table in enumeration order.
        assert_eq!(w, &SeriesTable::parse("+", "+", "+", "+").unwrap());
    }

    #[test]
    fn two_slot_binary_sweep() {
        let r = max_chsh(&binary(2)).unwrap();
        assert_eq!(r.tables_scanned, 256);
        assert_eq!(r.max_value, Some(ratio(2, 1)));
        assert_eq!(max_ch_j(&binary(2)).unwrap().max_value, Some(ratio(0, 1)));
    }

    #[test]
    fn ch_j_at_three_slots() {
        let r = max_ch_j(&binary(3)).unwrap();
        assert_eq!(r.tables_scanned, 4096);
        assert_eq!(r.max_value, Some(ratio(0, 1)));
        for w in &r.witnesses {
            assert_eq!(stats::ch_j(w).j, 0);
        }
    }

    #[test]
    fn witnesses_agree_with_stats() {
        let spec = EnumSpec::new(2, Alphabet::Ternary);
        let r = max_chsh(&spec).unwrap();
        assert_eq!(r.max_value, Some(ratio(4, 1)));
        for w in &r.witnesses {
            assert_eq!(stats::chsh(w), r.max_value);
        }
        let r = max_s_eta(&spec).unwrap();
        for w in &r.witnesses {
            assert_eq!(
                stats::chsh(w).zip(stats::series_eta(w)).map(|(s, e)| s * e),
                r.max_value
            );
        }
        let r = verify_coincidence_bound(&spec).unwrap();
        assert_eq!(r.above_reference, 0);
        for w in &r.witnesses {
            let b = stats::coincidence_bound(w).unwrap();
            assert_eq!(Some(Rational::from_integer(b.lhs - b.rhs)), r.max_value);
        }
    }

    #[test]
    fn block_runs_with_and_without_the_condition() {
        let spec = binary(4).with_layout(EnumLayout::BlockRun);
        let free = max_chsh(&spec).unwrap();
        assert_eq!(free.tables_scanned, 256);
        assert_eq!(free.max_value, Some(ratio(4, 1)));
        let w = &free.witnesses[0];
        assert!(!sica::check_sica(w).holds);
        assert_eq!(stats::chsh(w), Some(ratio(4, 1)));
        let held = max_chsh(&spec.clone().with_constraint(Constraint::SicaCondition)).unwrap();
        assert_eq!(held.max_value, Some(ratio(2, 1)));
        for w in &held.witnesses {
            assert!(sica::check_sica(w).holds);
        }
    }

    #[test]
    fn block_run_sica_matches_check() {
        let spec = binary(8)
            .with_layout(EnumLayout::BlockRun)
            .with_constraint(Constraint::SicaCondition);
        let r = max_chsh(&spec).unwrap();
        let schedule = block_halves(8).unwrap();
        let holding = (0u32..1 << 16)
            .filter(|v| {
                let bit = |i: u32| Outcome::from_bit(v >> i & 1 == 0);
                let a: Vec<_> = (0..8).map(|i| bit(2 * i)).collect();
                let b: Vec<_> = (0..8).map(|i| bit(2 * i + 1)).collect();
                let run = RecordedRun::from_parts(&schedule, &a, &b).unwrap();
                sica::check_sica(&crate::model::table_from_run(&run)).holds
            })
            .count();
        assert_eq!(r.tables_admitted, holding as u64);
        assert_eq!(holding, 256);
        assert!(r.witnesses.iter().all(|w| sica::check_sica(w).holds));
    }

    #[test]
    fn relaxing_constraints_never_lowers_the_maximum() {
        let base = EnumSpec::new(2, Alphabet::Ternary);
        let constraints = [
            Constraint::SicaCondition,
            Constraint::EqualNc,
            Constraint::EtaAtLeast(ratio(1, 2)),
            Constraint::EtaAtMost(ratio(2, 3)),
            Constraint::EtaBelow(ratio(1, 1)),
        ];
        let free = max_s_eta(&base).unwrap().max_value;
        for c in constraints {
            let one = max_s_eta(&base.clone().with_constraint(c))
                .unwrap()
                .max_value;
            assert!(one <= free, "{c}");
            for d in constraints {
                let two = max_s_eta(&base.clone().with_constraint(c).with_constraint(d))
                    .unwrap()
                    .max_value;
                assert!(two <= one, "{c} {d}");
            }
        }
    }

    #[test]
    fn full_efficiency_stratum() {
        let spec = EnumSpec::new(2, Alphabet::Ternary)
            .with_constraint(Constraint::EtaAtLeast(ratio(1, 1)));
        assert_eq!(max_s_eta(&spec).unwrap().max_value, Some(ratio(2, 1)));
        assert_eq!(max_chsh(&spec).unwrap().max_value, Some(ratio(2, 1)));
    }

    #[test]
    fn budget_is_enforced() {
        let err = max_chsh(&binary(7)).unwrap_err();
        assert!(matches!(err, Error::Budget { required, .. } if required == 1 << 28));
        assert!(max_chsh(&binary(3).with_layout(EnumLayout::BlockRun)).is_err());
    }

    #[test]
    fn constraints_round_trip_as_text() {
        for c in [
            Constraint::SicaCondition,
            Constraint::EqualNc,
            Constraint::EtaAtLeast(ratio(14, 15)),
            Constraint::EtaAtMost(ratio(1, 2)),
            Constraint::EtaBelow(ratio(1, 1)),
        ] {
            assert_eq!(c.to_string().parse::<Constraint>().unwrap(), c);
        }
        assert!("eta=1".parse::<Constraint>().is_err());
    }

    #[test]
    fn census_of_black_run() {
        let c = census_complete_tables(&datasets::fig6_black_run(), &Default::default()).unwrap();
        assert_eq!(c.fillings, 1 << 16);
        assert_eq!(c.valid, 16);
        let built =
            sica::all_completions(&datasets::fig6_black_run(), &Default::default()).unwrap();
        for s in &c.samples {
            assert!(sica::check_sica(&s.table).holds);
            assert!(built.contains(s));
        }
        assert!(c.samples.contains(&datasets::fig8()));
    }

    #[test]
    fn census_of_red_run_contains_the_lift() {
        let c = census_complete_tables(
            &datasets::fig6_red_run(),
            &CensusOptions {
                max_samples: usize::MAX,
                ..Default::default()
            },
        )
        .unwrap();
        let lift = [[Outcome::Minus, Outcome::Plus]; 4].concat();
        assert!(c
            .samples
            .iter()
            .any(|s| s.table.rows().iter().all(|r| *r == lift)));
        assert_eq!(c.valid as usize, c.samples.len());
    }

    #[test]
    fn census_of_empty_run() {
        let run = RecordedRun::new(Vec::new()).unwrap();
        let c = census_complete_tables(&run, &Default::default()).unwrap();
        assert_eq!((c.fillings, c.valid), (1, 1));
    }
}
