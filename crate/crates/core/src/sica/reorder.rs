//! Correlation-preserving reordering.
//!
//! A reordering moves whole slots, so both outcomes recorded in a slot stay
//! together and every per-pairing correlation is unchanged. The target is the
//! block-halves layout with four equal blocks `(α,β')`, `(α,β)`, `(α',β)`,
//! `(α',β')`. Sica's condition then asks that position `k` of every block
//! reads off one instruction `(a, a', b, b')`: the first block shows
//! `(a, b')`, the second `(a, b)`, the third `(a', b)` and the fourth
//! `(a', b')`. Choosing how many copies of each instruction to use is a
//! packing integer program over the value counts of the four blocks, solved
//! exactly by [`super::lp`].

use serde::Serialize;

use super::lp::PackingProblem;
use crate::model::{Outcome, Pairing, RecordedRun, Station};

#[derive(Clone, Debug)]
pub struct ReorderOptions {
    /// Slots each block may lose; `None` means `⌈√(T/4)⌉`.
    pub discard_budget: Option<usize>,
    /// Branch-and-bound node limit.
    pub node_limit: usize,
}

impl Default for ReorderOptions {
    fn default() -> Self {
        ReorderOptions {
            discard_budget: None,
            node_limit: 20_000,
        }
    }
}

pub fn default_discard_budget(slots: usize) -> usize {
    let q = slots / 4;
    let mut r = (q as f64).sqrt() as usize;
    while r * r < q {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= q {
        r -= 1;
    }
    r
}

/// Retained slots of the source run, per block in [`Pairing::BLOCK_ORDER`],
/// in their new order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReorderPlan {
    pub blocks: [Vec<usize>; 4],
    pub discarded_slots: Vec<usize>,
}

impl ReorderPlan {
    /// New position to source slot.
    pub fn permutation(&self) -> Vec<usize> {
        self.blocks.concat()
    }

    pub fn apply(&self, run: &RecordedRun) -> RecordedRun {
        run.select(&self.permutation())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CascadeStep {
    pub pairing: Pairing,
    pub slot: usize,
    pub a: i8,
    pub b: i8,
}

/// Why no reordering works, shown as the chain of forced matches starting
/// from the first `(α,β')` slot: its `a` value must reappear in the `(α,β)`
/// block, which fixes a `b`, which must reappear in the `(α',β)` block, and
/// so on until `b'` comes back to the first block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obstruction {
    pub cascade: Vec<CascadeStep>,
    /// Whether the chain returned to the `b'` value it started from.
    pub closes: bool,
    pub summary: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReorderOutcome {
    pub success: bool,
    pub plan: ReorderPlan,
    /// Block lengths in [`Pairing::BLOCK_ORDER`].
    pub block_lengths: [usize; 4],
    /// Common length of the blocks after reordering.
    pub retained: usize,
    pub discards: [usize; 4],
    pub budget: usize,
    /// Upper bound on `retained` from the relaxation.
    pub retained_bound: usize,
    /// Whether `retained` is proven maximal.
    pub optimal: bool,
    pub obstruction: Option<Obstruction>,
}

fn value_index(o: Outcome) -> usize {
    match o {
        Outcome::Plus => 0,
        Outcome::Minus => 1,
        Outcome::Zero => 2,
        Outcome::Unmeasured => unreachable!("recorded outcomes are measured"),
    }
}

/// Instruction `(a, a', b, b')` as value indices.
type Instruction = [usize; 4];

fn instruction(t: usize) -> Instruction {
    [t / 27, (t / 9) % 3, (t / 3) % 3, t % 3]
}

/// The pair of instruction values block `k` shows.
fn projection(k: usize, t: Instruction) -> (usize, usize) {
    let [a, ap, b, bp] = t;
    match k {
        0 => (a, bp),
        1 => (a, b),
        2 => (ap, b),
        _ => (ap, bp),
    }
}

fn pair_index((x, y): (usize, usize)) -> usize {
    3 * x + y
}

pub fn reorder_to_sica(run: &RecordedRun) -> ReorderOutcome {
    reorder_to_sica_with(run, &ReorderOptions::default())
}

#[allow(clippy::needless_range_loop)]
pub fn reorder_to_sica_with(run: &RecordedRun, options: &ReorderOptions) -> ReorderOutcome {
    let budget = options
        .discard_budget
        .unwrap_or_else(|| default_discard_budget(run.slots()));
    let blocks: [Vec<usize>; 4] = Pairing::BLOCK_ORDER.map(|p| run.slots_of(p));
    let value_of = |slot: usize| {
        let e = run.events()[slot];
        (value_index(e.a), value_index(e.b))
    };
    let mut counts = [[0i64; 9]; 4];
    for (k, block) in blocks.iter().enumerate() {
        for &s in block {
            counts[k][pair_index(value_of(s))] += 1;
        }
    }
    let block_lengths = blocks.clone().map(|b| b.len());

    // Only instructions whose four projections all occur can be used.
    let types: Vec<usize> = (0..81)
        .filter(|&t| (0..4).all(|k| counts[k][pair_index(projection(k, instruction(t)))] > 0))
        .collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for k in 0..4 {
        for v in 0..9 {
            let row: Vec<i64> = types
                .iter()
                .map(|&t| i64::from(pair_index(projection(k, instruction(t))) == v))
                .collect();
            if row.iter().any(|&x| x > 0) {
                a.push(row);
                b.push(counts[k][v]);
            }
        }
    }
    let problem = PackingProblem {
        a,
        b,
        c: vec![1; types.len()],
    };
    let longest = block_lengths.iter().copied().max().unwrap_or(0);
    let target = longest.saturating_sub(budget) as i64;
    let (solution, bound) = if types.is_empty() {
        (None, 0)
    } else {
        let bound = super::lp::relaxation_bound(&problem);
        // Hopeless cases only need a best-effort plan.
        let limit = if bound < target {
            1
        } else {
            options.node_limit
        };
        (Some(problem.solve(limit)), bound)
    };
    let (retained, optimal, copies) = match &solution {
        None => (0, true, vec![]),
        Some(s) => (s.value as usize, s.optimal, s.x.clone()),
    };
    let plan = build_plan(&blocks, &types, &copies, value_of);
    let discards = block_lengths.map(|n| n - retained);
    let success = discards.iter().all(|&d| d <= budget) && (retained > 0 || run.slots() == 0);
    let obstruction = (!success).then(|| cascade(run, &blocks));
    ReorderOutcome {
        success,
        plan,
        block_lengths,
        retained,
        discards,
        budget,
        retained_bound: bound.max(retained as i64) as usize,
        optimal,
        obstruction,
    }
}

/// Keeps the `(α,β)` block in time order and, position by position, takes
/// the earliest unused slot of each other block that shows the required
/// pair.
fn build_plan(
    blocks: &[Vec<usize>; 4],
    types: &[usize],
    copies: &[i64],
    value_of: impl Fn(usize) -> (usize, usize),
) -> ReorderPlan {
    let mut remaining: Vec<i64> = copies.to_vec();
    let mut positions: Vec<Instruction> = Vec::new();
    let mut anchor = Vec::new();
    for &s in &blocks[1] {
        let v = value_of(s);
        let pick = (0..types.len())
            .find(|&j| remaining[j] > 0 && projection(1, instruction(types[j])) == v);
        if let Some(j) = pick {
            remaining[j] -= 1;
            positions.push(instruction(types[j]));
            anchor.push(s);
        }
    }
    let mut out: [Vec<usize>; 4] = Default::default();
    out[1] = anchor;
    for k in [0usize, 2, 3] {
        let mut queues: Vec<std::collections::VecDeque<usize>> = vec![Default::default(); 9];
        for &s in &blocks[k] {
            queues[pair_index(value_of(s))].push_back(s);
        }
        for &t in &positions {
            let s = queues[pair_index(projection(k, t))]
                .pop_front()
                .expect("instruction counts fit every block");
            out[k].push(s);
        }
    }
    let mut kept: Vec<usize> = out.concat();
    kept.sort_unstable();
    let mut discarded_slots: Vec<usize> = blocks
        .concat()
        .into_iter()
        .filter(|s| kept.binary_search(s).is_err())
        .collect();
    discarded_slots.sort_unstable();
    ReorderPlan {
        blocks: out,
        discarded_slots,
    }
}

fn cascade(run: &RecordedRun, blocks: &[Vec<usize>; 4]) -> Obstruction {
    let ev = |s: usize| run.events()[s];
    let mut steps = Vec::new();
    let step = |k: usize, s: usize| {
        let e = ev(s);
        CascadeStep {
            pairing: Pairing::BLOCK_ORDER[k],
            slot: s,
            a: e.a.sign() as i8,
            b: e.b.sign() as i8,
        }
    };
    let Some(&start) = blocks[0].first() else {
        return Obstruction {
            cascade: steps,
            closes: false,
            summary: "the (α,β') block is empty, so no block can be matched to it".into(),
        };
    };
    steps.push(step(0, start));
    // Each link carries one outcome into the next block: a, then b, a', b'.
    let mut carried = ev(start).outcome(Station::A);
    let links = [
        (1usize, Station::A, Station::B),
        (2, Station::B, Station::A),
        (3, Station::A, Station::B),
    ];
    for (k, matched, next) in links {
        match blocks[k]
            .iter()
            .find(|&&s| ev(s).outcome(matched) == carried)
        {
            Some(&s) => {
                steps.push(step(k, s));
                carried = ev(s).outcome(next);
            }
            None => {
                return Obstruction {
                    summary: format!(
                        "no {} slot shows the value {} carried from the previous block",
                        Pairing::BLOCK_ORDER[k],
                        carried.symbol()
                    ),
                    cascade: steps,
                    closes: false,
                };
            }
        }
    }
    let start_b_prime = ev(start).b;
    let closes = carried == start_b_prime;
    let summary = if closes {
        "the chain from the first (α,β') slot closes, but the block value counts cannot all be matched within the discard budget".to_string()
    } else {
        format!(
            "matching a, then b, then a' forces b' = {} in the (α',β') block while the (α,β') block recorded b' = {}",
            carried.symbol(),
            start_b_prime.symbol()
        )
    };
    Obstruction {
        cascade: steps,
        closes,
        summary,
    }
}
