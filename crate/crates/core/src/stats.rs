//! Correlations, CHSH and CH quantities, set cardinalities and the
//! efficiency-dependent bounds, all in exact arithmetic.
//!
//! A slot is a coincidence for a pairing when both of its cells are measured
//! and nonzero. `E = sum / N_c` where `sum` adds the sign products over the
//! coincidences. The sets `α`, `α'`, `β`, `β'` are the slots where the
//! corresponding row is nonzero; `Bs` (`Bd`) are the slots where `b` and `b'`
//! are both nonzero with the same (different) sign.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Outcome, Pairing, Row, SeriesTable};
use crate::rational::{exact, exact_opt, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairingCorrelation {
    pub pairing: Pairing,
    pub n_c: u64,
    pub sum: i64,
    /// `None` when the pairing has no coincidences.
    #[serde(with = "exact_opt")]
    pub e: Option<Rational>,
}

pub fn correlation(table: &SeriesTable, pairing: Pairing) -> PairingCorrelation {
    let (ra, rb) = pairing.rows();
    let (mut n_c, mut sum) = (0u64, 0i64);
    for (x, y) in table.row(ra).iter().zip(table.row(rb)) {
        if x.is_detection() && y.is_detection() {
            n_c += 1;
            sum += x.sign() * y.sign();
        }
    }
    PairingCorrelation {
        pairing,
        n_c,
        sum,
        e: (n_c > 0).then(|| Rational::new(sum, n_c as i64)),
    }
}

/// Correlations in [`Pairing::ALL`] order.
pub fn correlations(table: &SeriesTable) -> [PairingCorrelation; 4] {
    Pairing::ALL.map(|p| correlation(table, p))
}

/// `|E(α,β) − E(α,β')| + |E(α',β) + E(α',β')|`, or `None` if any pairing has
/// no coincidences.
pub fn chsh_from(corr: &[PairingCorrelation; 4]) -> Option<Rational> {
    let [ab, abp, apb, apbp] = corr.map(|c| c.e);
    Some((ab? - abp?).abs() + (apb? + apbp?).abs())
}

pub fn chsh(table: &SeriesTable) -> Option<Rational> {
    chsh_from(&correlations(table))
}

/// Single-sum form: `|Σab − Σab'| + |Σa'b + Σa'b'|` over raw sums. Equals
/// `N_c · S` when the four coincidence counts agree.
pub fn chsh_raw_sum(corr: &[PairingCorrelation; 4]) -> i64 {
    let [ab, abp, apb, apbp] = corr.map(|c| c.sum);
    (ab - abp).abs() + (apb + apbp).abs()
}

/// The Clauser-Horne quantity with `Plus ↦ 1`, `Minus, Zero ↦ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChReport {
    /// `N11(α,β) + N11(α,β') + N11(α',β) − N11(α',β') − S(α) − S(β)`.
    pub j: i64,
    /// Joint `+,+` counts per pairing in [`Pairing::ALL`] order.
    pub joint_plus: [u64; 4],
    pub singles_a: u64,
    pub singles_b: u64,
    /// The per-slot terms `ab + ab' + a'b − a'b' − a − b`; only available
    /// for fully measured tables.
    pub per_slot_terms: Option<Vec<i64>>,
}

fn ch_bit(o: Outcome) -> i64 {
    i64::from(o == Outcome::Plus)
}

pub fn ch_j(table: &SeriesTable) -> ChReport {
    let joint_plus = Pairing::ALL.map(|p| {
        let (ra, rb) = p.rows();
        table
            .row(ra)
            .iter()
            .zip(table.row(rb))
            .filter(|(x, y)| **x == Outcome::Plus && **y == Outcome::Plus)
            .count() as u64
    });
    let singles = |row: Row| {
        table
            .row(row)
            .iter()
            .filter(|o| **o == Outcome::Plus)
            .count() as u64
    };
    let (singles_a, singles_b) = (singles(Row::A), singles(Row::B));
    let [ab, abp, apb, apbp] = joint_plus.map(|n| n as i64);
    let j = ab + abp + apb - apbp - singles_a as i64 - singles_b as i64;
    let per_slot_terms = table.is_fully_measured().then(|| {
        (0..table.slots())
            .map(|i| {
                let [a, ap, b, bp] = Row::ALL.map(|r| ch_bit(table.cell(r, i)));
                a * b + a * bp + ap * b - ap * bp - a - b
            })
            .collect()
    });
    ChReport {
        j,
        joint_plus,
        singles_a,
        singles_b,
        per_slot_terms,
    }
}

/// Coincidences over singles for one detector (`row` showing `sign`)
/// against one partner row. Slots where the partner is unmeasured are
/// ignored. `None` when the detector never fired.
pub fn detector_efficiency(
    table: &SeriesTable,
    row: Row,
    sign: Outcome,
    partner: Row,
) -> Option<Rational> {
    let (mut singles, mut coincidences) = (0i64, 0i64);
    for (x, y) in table.row(row).iter().zip(table.row(partner)) {
        if *x == sign && y.is_measured() {
            singles += 1;
            coincidences += i64::from(y.is_detection());
        }
    }
    (singles > 0).then(|| Rational::new(coincidences, singles))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectorEfficiency {
    pub row: Row,
    /// `1` or `-1`.
    pub sign: i8,
    pub partner: Row,
    #[serde(with = "exact_opt")]
    pub eta: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingEfficiency {
    pub pairing: Pairing,
    /// `N_{pair} / N_{A row}`.
    #[serde(with = "exact_opt")]
    pub eta_a: Option<Rational>,
    /// `N_{pair} / N_{B row}`.
    #[serde(with = "exact_opt")]
    pub eta_b: Option<Rational>,
}

/// Cardinalities of the nonzero-entry sets of a fully measured table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetStats {
    pub slots: usize,
    pub n_alpha: u64,
    pub n_alpha_prime: u64,
    pub n_beta: u64,
    pub n_beta_prime: u64,
    /// `α∩β`, `α∩β'`, `α'∩β`, `α'∩β'`.
    pub n_pairs: [u64; 4],
    pub n_alpha_beta_beta_prime: u64,
    pub n_alpha_prime_beta_beta_prime: u64,
    pub n_bs: u64,
    pub n_bd: u64,
    pub n_alpha_bs: u64,
    pub n_alpha_bd: u64,
    pub n_alpha_prime_bs: u64,
    pub n_alpha_prime_bd: u64,
    /// `N_{α∩Bs} − N_{α∩Bd}`; the long-series simplification assumes it is
    /// small.
    pub asymmetry: i64,
    pub pairing_efficiency: Vec<PairingEfficiency>,
    pub detector_efficiency: Vec<DetectorEfficiency>,
    /// Smallest of all pairing efficiencies on both sides.
    #[serde(with = "exact_opt")]
    pub eta: Option<Rational>,
    /// `N_{α∩β∩β'} / N_c` with `N_c` the mean coincidence count.
    #[serde(with = "exact_opt")]
    pub mu: Option<Rational>,
    #[serde(with = "exact_opt")]
    pub mu_prime: Option<Rational>,
}

fn ratio_opt(num: u64, den: u64) -> Option<Rational> {
    (den > 0).then(|| Rational::new(num as i64, den as i64))
}

pub fn set_stats(table: &SeriesTable) -> Result<SetStats> {
    if !table.is_fully_measured() {
        return Err(Error::Precondition(
            "set statistics need a fully measured table; fill or condense it first".into(),
        ));
    }
    let nz = |r: Row, i: usize| table.cell(r, i).is_detection();
    let count = |f: &dyn Fn(usize) -> bool| (0..table.slots()).filter(|&i| f(i)).count() as u64;
    let bs = |i: usize| {
        nz(Row::B, i) && nz(Row::BPrime, i) && table.cell(Row::B, i) == table.cell(Row::BPrime, i)
    };
    let bd = |i: usize| {
        nz(Row::B, i) && nz(Row::BPrime, i) && table.cell(Row::B, i) != table.cell(Row::BPrime, i)
    };
    let n_row = Row::ALL.map(|r| count(&|i| nz(r, i)));
    let n_pairs = Pairing::ALL.map(|p| {
        let (x, y) = p.rows();
        count(&|i| nz(x, i) && nz(y, i))
    });
    let n_alpha_bs = count(&|i| nz(Row::A, i) && bs(i));
    let n_alpha_bd = count(&|i| nz(Row::A, i) && bd(i));
    let n_alpha_prime_bs = count(&|i| nz(Row::APrime, i) && bs(i));
    let n_alpha_prime_bd = count(&|i| nz(Row::APrime, i) && bd(i));
    let pairing_efficiency: Vec<PairingEfficiency> = Pairing::ALL
        .iter()
        .map(|&p| {
            let (x, y) = p.rows();
            PairingEfficiency {
                pairing: p,
                eta_a: ratio_opt(n_pairs[p.index()], n_row[x.index()]),
                eta_b: ratio_opt(n_pairs[p.index()], n_row[y.index()]),
            }
        })
        .collect();
    let mut detector_efficiency = Vec::new();
    for p in Pairing::ALL {
        let (x, y) = p.rows();
        for (row, partner) in [(x, y), (y, x)] {
            for sign in [Outcome::Plus, Outcome::Minus] {
                detector_efficiency.push(DetectorEfficiency {
                    row,
                    sign: sign.sign() as i8,
                    partner,
                    eta: crate::stats::detector_efficiency(table, row, sign, partner),
                });
            }
        }
    }
    let n_c_total: u64 = n_pairs.iter().sum();
    let mu_of = |n: u64| (n_c_total > 0).then(|| Rational::new(4 * n as i64, n_c_total as i64));
    let n_aa = n_alpha_bs + n_alpha_bd;
    let n_apa = n_alpha_prime_bs + n_alpha_prime_bd;
    Ok(SetStats {
        slots: table.slots(),
        n_alpha: n_row[0],
        n_alpha_prime: n_row[1],
        n_beta: n_row[2],
        n_beta_prime: n_row[3],
        n_pairs,
        n_alpha_beta_beta_prime: n_aa,
        n_alpha_prime_beta_beta_prime: n_apa,
        n_bs: count(&bs),
        n_bd: count(&bd),
        n_alpha_bs,
        n_alpha_bd,
        n_alpha_prime_bs,
        n_alpha_prime_bd,
        asymmetry: n_alpha_bs as i64 - n_alpha_bd as i64,
        eta: series_eta(table),
        pairing_efficiency,
        detector_efficiency,
        mu: mu_of(n_aa),
        mu_prime: mu_of(n_apa),
    })
}

/// Smallest A-side pairing efficiency `N_{pair} / N_{A row}`. The A-row
/// count only includes slots where the pairing's B row is measured, so on a
/// run-derived table each pairing is judged on its own block.
pub fn table_eta(table: &SeriesTable) -> Option<Rational> {
    pairing_etas(table, false)
}

/// Smallest pairing efficiency over both stations: every series'
/// coincidences over its singles.
pub fn series_eta(table: &SeriesTable) -> Option<Rational> {
    pairing_etas(table, true)
}

fn pairing_etas(table: &SeriesTable, both_sides: bool) -> Option<Rational> {
    let mut best: Option<Rational> = None;
    for p in Pairing::ALL {
        let (x, y) = p.rows();
        let sides: &[(Row, Row)] = if both_sides {
            &[(x, y), (y, x)]
        } else {
            &[(x, y)]
        };
        for &(own, partner) in sides {
            let (mut singles, mut pairs) = (0i64, 0i64);
            for (o, q) in table.row(own).iter().zip(table.row(partner)) {
                if o.is_detection() && q.is_measured() {
                    singles += 1;
                    pairs += i64::from(q.is_detection());
                }
            }
            if singles > 0 {
                let eta = Rational::new(pairs, singles);
                best = Some(best.map_or(eta, |b| b.min(eta)));
            }
        }
    }
    best
}

/// The coincidence-count form of the CHSH bound.
///
/// `lhs = |Σab − Σab'| + |Σa'b + Σa'b'|` and
/// `rhs = ΣN_c − 2·N_{α∩β∩β'∩Bs} − 2·N_{α'∩β∩β'∩Bd}`. The bound follows
/// from term-by-term counting and holds for every fully measured table; `lhs`
/// is `N_c · S` when `equal_nc` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoincidenceBound {
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
    pub equal_nc: bool,
    pub n_c: [u64; 4],
}

pub fn coincidence_bound(table: &SeriesTable) -> Result<CoincidenceBound> {
    let stats = set_stats(table)?;
    let corr = correlations(table);
    let lhs = chsh_raw_sum(&corr);
    let n_c = corr.map(|c| c.n_c);
    let rhs = n_c.iter().sum::<u64>() as i64
        - 2 * stats.n_alpha_bs as i64
        - 2 * stats.n_alpha_prime_bd as i64;
    Ok(CoincidenceBound {
        lhs,
        rhs,
        holds: lhs <= rhs,
        equal_nc: n_c.iter().all(|&n| n == n_c[0]),
        n_c,
    })
}

fn check_unit(name: &str, x: Rational) -> Result<()> {
    if x < Rational::zero() || x > Rational::from_integer(1) {
        return Err(Error::Domain(format!("{name} = {x} is outside [0, 1]")));
    }
    Ok(())
}

/// Normalized triple overlap implied by efficiency `eta`: `0` up to one
/// half, `(2η − 1)/η` above.
pub fn mu_from_eta(eta: Rational) -> Result<Rational> {
    check_unit("eta", eta)?;
    if eta <= Rational::new(1, 2) {
        Ok(Rational::zero())
    } else {
        Ok((eta * 2 - 1) / eta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVerdict {
    WithinBound,
    Violates,
    /// `η ≤ 1/2`: only `S ≤ 4` can be claimed.
    NotApplicable,
}

/// `S · η ≤ 2` for `η > 1/2`.
///
/// The bound assumes equal coincidence counts, `μ = μ'` and a negligible
/// `Bs`/`Bd` asymmetry, which are long-series statements. Short tables can
/// exceed it while the exact [`coincidence_bound`] still holds.
pub fn efficiency_bound(s: Rational, eta: Rational) -> Result<BoundVerdict> {
    check_unit("eta", eta)?;
    if s < Rational::zero() || s > Rational::from_integer(4) {
        return Err(Error::Domain(format!("S = {s} is outside [0, 4]")));
    }
    Ok(if eta <= Rational::new(1, 2) {
        BoundVerdict::NotApplicable
    } else if s * eta <= Rational::from_integer(2) {
        BoundVerdict::WithinBound
    } else {
        BoundVerdict::Violates
    })
}

pub const REPORT_SCHEMA: &str = "sica-report/1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfficiencyCheck {
    #[serde(with = "exact")]
    pub eta: Rational,
    #[serde(with = "exact")]
    pub s_eta: Rational,
    pub verdict: BoundVerdict,
    pub note: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub schema: &'static str,
    pub slots: usize,
    pub correlations: [PairingCorrelation; 4],
    /// `None` when some pairing has no coincidences.
    #[serde(with = "exact_opt")]
    pub s_chsh: Option<Rational>,
    pub equal_nc: bool,
    pub ch: ChReport,
    #[serde(with = "exact_opt")]
    pub eta: Option<Rational>,
    /// Present for fully measured tables.
    pub set_stats: Option<SetStats>,
    pub coincidence_bound: Option<CoincidenceBound>,
    pub efficiency_bound: Option<EfficiencyCheck>,
}

const EFFICIENCY_NOTE: &str = "S*eta <= 2 is a long-series statement (equal N_c, mu = mu', \
N(alpha&Bs) close to N(alpha&Bd)); the coincidence bound is the exact one";

pub fn correlation_report(table: &SeriesTable) -> CorrelationReport {
    let corr = correlations(table);
    let s = chsh_from(&corr);
    let eta = series_eta(table);
    let set_stats = set_stats(table).ok();
    let coincidence_bound = coincidence_bound(table).ok();
    let efficiency_bound = match (s, eta) {
        (Some(s), Some(eta)) => efficiency_bound(s, eta)
            .ok()
            .map(|verdict| EfficiencyCheck {
                eta,
                s_eta: s * eta,
                verdict,
                note: EFFICIENCY_NOTE,
            }),
        _ => None,
    };
    CorrelationReport {
        schema: REPORT_SCHEMA,
        slots: table.slots(),
        correlations: corr,
        s_chsh: s,
        equal_nc: corr.iter().all(|c| c.n_c == corr[0].n_c),
        ch: ch_j(table),
        eta,
        set_stats,
        coincidence_bound,
        efficiency_bound,
    }
}
