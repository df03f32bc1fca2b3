//! One PASS/FAIL line per acceptance criterion. Tolerances are pinned below.

use std::time::{Duration, Instant};

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sica_core::oracle::{
    self, census_complete_tables, Alphabet, CensusOptions, Constraint, EnumSpec,
};
use sica_core::rational::{ratio, to_f64};
use sica_core::sica::{
    all_completions, build_complete_table, check_sica, condense, condense_complete, factual_table,
    fill_counterfactual, reorder_to_sica, resample, CompletionOptions, FillPolicy, Provenance,
};
use sica_core::simulator::{simulate, InstructionOrder, SourceConfig, SourceModel};
use sica_core::stats::{
    chsh, coincidence_bound, correlation, correlation_report, correlations, series_eta, set_stats,
    BoundVerdict,
};
use sica_core::{
    block_halves, datasets, table_from_run, ASetting, BSetting, Pairing, Rational, Schedule,
    SlotSettings,
};

const QUANTUM_S: f64 = 2.828;
const QUANTUM_TOL: f64 = 0.02;
const QUANTUM_SLOTS: usize = 100_000;
const QUANTUM_SEEDS: [u64; 3] = [1, 2, 3];
const LOCAL_SEEDS: u64 = 10;
const LOCAL_INSTRUCTIONS: usize = 64;
const ZERO_FILL_SEEDS: u64 = 100;

const LIMIT_FIG: Duration = Duration::from_secs(1);
const LIMIT_CHSH_SWEEP: Duration = Duration::from_secs(300);
const LIMIT_COINCIDENCE_SWEEP: Duration = Duration::from_secs(600);
const LIMIT_CENSUS: Duration = Duration::from_secs(60);
const LIMIT_SIMULATION: Duration = Duration::from_secs(60);
const LIMIT_ZERO_FILL: Duration = Duration::from_secs(10);

type Check = Result<String, String>;

type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn r(n: i64, d: i64) -> Rational {
    ratio(n, d)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn fig2() -> Check {
    let t = datasets::fig2();
    let e = correlations(&t).map(|c| c.e);
    let half = r(1, 2);
    for (p, e) in Pairing::ALL.iter().zip(e) {
        let e = e.ok_or("undefined correlation")?;
        ensure(e.abs() == half, format!("|E{}| = {}", p.name(), e.abs()))?;
    }
    let signed = [half, -half, half, half];
    ensure(e == signed.map(Some), format!("signed correlations {e:?}"))?;
    let s = chsh(&t).ok_or("S undefined")?;
    ensure(s == r(2, 1), format!("S = {s}"))?;
    Ok(format!(
        "E = {} S = {s}",
        e.map(|x| x.unwrap().to_string()).join(" ")
    ))
}

fn fig3() -> Check {
    let t = datasets::fig3();
    let eta = series_eta(&t).ok_or("eta undefined")?;
    ensure(eta == r(14, 15), format!("eta = {eta}"))?;
    let e = correlation(&t, Pairing::AlphaBeta).e;
    ensure(e == Some(r(8, 14)), format!("E(α,β) = {e:?}"))?;
    let s = chsh(&t).ok_or("S undefined")?;
    ensure(s == r(32, 14), format!("S = {s}"))?;
    ensure(s * eta == r(32, 15), format!("S·η = {}", s * eta))?;
    let cb = coincidence_bound(&t).map_err(err)?;
    ensure(
        cb.rhs == 32 && cb.lhs == 32,
        format!("lhs {} rhs {}", cb.lhs, cb.rhs),
    )?;
    let st = set_stats(&t).map_err(err)?;
    ensure(
        st.n_alpha_bs == 6 && st.n_alpha_bd == 7,
        format!("N(α∩Bs) {} N(α∩Bd) {}", st.n_alpha_bs, st.n_alpha_bd),
    )?;
    Ok(format!(
        "η = {eta} S = {s} S·η = {} lhs = rhs = 32",
        s * eta
    ))
}

fn chsh_sweep() -> Check {
    let mut scanned = 0;
    for slots in 1..=6 {
        let spec = EnumSpec::new(slots, Alphabet::Binary);
        let s = oracle::max_chsh(&spec).map_err(err)?;
        let j = oracle::max_ch_j(&spec).map_err(err)?;
        ensure(
            s.max_value == Some(r(2, 1)),
            format!("T={slots}: max S = {:?}", s.max_value),
        )?;
        ensure(
            j.max_value == Some(r(0, 1)),
            format!("T={slots}: max J = {:?}", j.max_value),
        )?;
        ensure(
            s.above_reference == 0 && j.above_reference == 0,
            format!("T={slots}: tables above the bound"),
        )?;
        scanned += s.tables_scanned;
    }
    Ok(format!(
        "binary T=1..6, {scanned} tables: max S = 2, max J = 0"
    ))
}

fn coincidence_sweep() -> Check {
    let mut scanned = 0;
    for slots in [1, 2, 3, 4] {
        let spec = EnumSpec::new(slots, Alphabet::Ternary);
        let res = oracle::verify_coincidence_bound(&spec).map_err(err)?;
        ensure(
            res.above_reference == 0,
            format!("T={slots}: {} violations", res.above_reference),
        )?;
        scanned += res.tables_scanned;
    }
    Ok(format!("ternary T=1..4, {scanned} tables: 0 violations"))
}

fn efficiency_regimes() -> Check {
    let spec = EnumSpec::new(4, Alphabet::Ternary).with_constraint(Constraint::EtaAtLeast(r(1, 1)));
    let ideal = oracle::max_s_eta(&spec).map_err(err)?;
    ensure(
        ideal.max_value == Some(r(2, 1)),
        format!("η = 1: max S·η = {:?}", ideal.max_value),
    )?;
    let spec = EnumSpec::new(4, Alphabet::Ternary).with_constraint(Constraint::EtaBelow(r(1, 1)));
    let lossy = oracle::max_s_eta(&spec).map_err(err)?;
    let best = lossy.max_value.ok_or("no lossy table")?;
    ensure(best > r(2, 1), format!("η < 1: max S·η = {best}"))?;
    let w = lossy.witnesses.first().ok_or("no witness")?;
    let report = correlation_report(w);
    let eff = report
        .efficiency_bound
        .as_ref()
        .ok_or("no efficiency check")?;
    ensure(
        eff.verdict == BoundVerdict::Violates && eff.eta < r(1, 1),
        "witness verdict",
    )?;
    let cb = report.coincidence_bound.ok_or("no coincidence bound")?;
    ensure(cb.holds, "witness breaks the coincidence bound")?;
    let f3 = correlation_report(&datasets::fig3());
    let f3_eff = f3.efficiency_bound.ok_or("fig3 efficiency")?;
    ensure(
        f3_eff.verdict == BoundVerdict::Violates && f3.coincidence_bound.is_some_and(|c| c.holds),
        "fig3 verdicts",
    )?;
    ensure(
        f3_eff.note.contains("long-series"),
        "statistical caveat missing",
    )?;
    Ok(format!(
        "η = 1: max S·η = 2; η < 1 at T=4: max S·η = {best} (witness a={} a'={} b={} b'={})",
        sym(w, 0),
        sym(w, 1),
        sym(w, 2),
        sym(w, 3)
    ))
}

fn sym(t: &sica_core::SeriesTable, i: usize) -> String {
    t.rows()[i].iter().map(|o| o.symbol()).collect()
}

fn pipeline() -> Check {
    let black = datasets::fig6_black_run();
    let bt = table_from_run(&black);
    ensure(
        chsh(&bt) == Some(r(4, 1)),
        format!("black S = {:?}", chsh(&bt)),
    )?;
    ensure(!reorder_to_sica(&black).success, "black run reorders")?;

    let red = datasets::fig6_red_run();
    let out = reorder_to_sica(&red);
    ensure(out.success, "red run does not reorder")?;
    let seven = condense(&table_from_run(&out.plan.apply(&red))).map_err(err)?;
    ensure(
        seven == datasets::fig7(),
        "red run does not condense to fig7",
    )?;
    ensure(chsh(&seven) == Some(r(2, 1)), "fig7 S")?;

    let c = build_complete_table(&black, &[false, true], &[true, false]).map_err(err)?;
    ensure(c == datasets::fig8(), "completion differs from fig8")?;
    ensure(check_sica(&c.table).holds, "fig8 breaks Sica's condition")?;
    let (nine, tags) = condense_complete(&c).map_err(err)?;
    let (want, want_tags) = datasets::fig9();
    ensure(
        nine == want && tags == want_tags,
        "fig8 does not condense to fig9",
    )?;
    ensure(tags[0][..2] == [Provenance::Factual; 2], "fig9 tags")?;

    let mut schedule = block_halves(8).map_err(err)?;
    schedule[..2].fill(SlotSettings::new(ASetting::Alpha, BSetting::Beta));
    schedule[2..4].fill(SlotSettings::new(ASetting::Alpha, BSetting::BetaPrime));
    let resampled = table_from_run(&resample(&c, &schedule).map_err(err)?);
    let e = correlation(&resampled, Pairing::AlphaBetaPrime).e;
    ensure(e == Some(r(1, 1)), format!("resampled E(α,β') = {e:?}"))?;
    let s = chsh(&resampled).ok_or("resampled S undefined")?;
    ensure(s <= r(2, 1), format!("resampled S = {s}"))?;
    Ok(format!(
        "black S = 4 no reorder; red → fig7 S = 2; fig8 → fig9; resampled E(α,β') = 1, S = {s}"
    ))
}

fn counting() -> Check {
    let black = datasets::fig6_black_run();
    let all = all_completions(&black, &CompletionOptions::default()).map_err(err)?;
    let want = 1usize << (black.slots() / 2);
    ensure(all.len() == want, format!("{} completions", all.len()))?;
    let mut tables: Vec<_> = all.iter().map(|c| c.table.clone()).collect();
    tables.sort_by_key(|t| format!("{t}"));
    tables.dedup();
    ensure(tables.len() == want, "completions repeat")?;
    let factual = correlations(&table_from_run(&black));
    for c in &all {
        ensure(
            check_sica(&c.table).holds,
            "completion breaks Sica's condition",
        )?;
        ensure(
            correlations(&factual_table(c)) == factual,
            "completion changes the factual correlations",
        )?;
    }
    let census = census_complete_tables(
        &black,
        &CensusOptions {
            max_samples: 64,
            ..CensusOptions::default()
        },
    )
    .map_err(err)?;
    ensure(
        census.valid == want as u64,
        format!("census finds {}", census.valid),
    )?;
    for c in &census.samples {
        ensure(all.contains(c), "census table outside the construction")?;
    }
    Ok(format!(
        "{want} distinct completions; census {} of {} fillings valid",
        census.valid, census.fillings
    ))
}

fn local_instructions(seed: u64) -> Vec<[i8; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..LOCAL_INSTRUCTIONS)
        .map(|_| [0; 4].map(|_: i8| if rng.random::<bool>() { 1 } else { -1 }))
        .collect()
}

fn simulation() -> Check {
    let mut lines = Vec::new();
    for seed in QUANTUM_SEEDS {
        let cfg = SourceConfig::quantum(QUANTUM_SLOTS, Schedule::RandomPerSlot { seed }, seed);
        let run = simulate(&cfg).map_err(err)?;
        let s = to_f64(chsh(&table_from_run(&run)).ok_or("S undefined")?);
        ensure(
            (s - QUANTUM_S).abs() <= QUANTUM_TOL,
            format!("seed {seed}: S = {s:.4}"),
        )?;
        ensure(!reorder_to_sica(&run).success, "quantum run reorders")?;
        lines.push(format!("{s:.4}"));
    }
    let mut worst = r(0, 1);
    for seed in 0..LOCAL_SEEDS {
        let cfg = SourceConfig {
            model: SourceModel::LocalDeterministic {
                instructions: local_instructions(seed),
                order: InstructionOrder::Shuffled,
            },
            slots: 4 * LOCAL_INSTRUCTIONS,
            schedule: Schedule::BlockHalves,
            seed,
            ..SourceConfig::quantum(0, Schedule::BlockHalves, seed)
        };
        let run = simulate(&cfg).map_err(err)?;
        let out = reorder_to_sica(&run);
        ensure(out.success, format!("local seed {seed} does not reorder"))?;
        let t = condense(&table_from_run(&out.plan.apply(&run))).map_err(err)?;
        let s = chsh(&t).ok_or("S undefined")?;
        ensure(s <= r(2, 1), format!("local seed {seed}: S = {s}"))?;
        worst = worst.max(s);
    }
    Ok(format!(
        "quantum S = {} (±{QUANTUM_TOL}), no reorder; local max S = {worst} over {LOCAL_SEEDS} seeds",
        lines.join(", ")
    ))
}

fn zero_fill() -> Check {
    let half = r(1, 2);
    for seed in 0..ZERO_FILL_SEEDS {
        let slots = 4 * (1 + seed as usize % 16);
        let cfg = SourceConfig::quantum(slots, Schedule::BlockHalves, seed);
        let run = simulate(&cfg).map_err(err)?;
        let t = fill_counterfactual(&run, &FillPolicy::Zeros).map_err(err)?;
        let st = set_stats(&t).map_err(err)?;
        for p in &st.pairing_efficiency {
            for e in [p.eta_a, p.eta_b].into_iter().flatten() {
                ensure(e <= half, format!("seed {seed}: pairing η = {e}"))?;
            }
        }
        let report = correlation_report(&t);
        let verdict = report.efficiency_bound.map(|e| e.verdict);
        ensure(
            verdict == Some(BoundVerdict::NotApplicable),
            format!("seed {seed}: verdict {verdict:?}"),
        )?;
    }
    Ok(format!(
        "{ZERO_FILL_SEEDS} runs: every pairing η <= 1/2, verdict not_applicable"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 fig2 reproduction", fig2, LIMIT_FIG),
        ("2 fig3 reproduction", fig3, LIMIT_FIG),
        (
            "3 exhaustive CHSH and CH bounds",
            chsh_sweep,
            LIMIT_CHSH_SWEEP,
        ),
        (
            "4 exhaustive coincidence bound",
            coincidence_sweep,
            LIMIT_COINCIDENCE_SWEEP,
        ),
        (
            "5 efficiency bound regimes",
            efficiency_regimes,
            LIMIT_CHSH_SWEEP,
        ),
        (
            "6 reorder, condense and completion pipeline",
            pipeline,
            LIMIT_FIG,
        ),
        ("7 completion counting and census", counting, LIMIT_CENSUS),
        ("8 simulation behavior", simulation, LIMIT_SIMULATION),
        ("9 zero-filled runs", zero_fill, LIMIT_ZERO_FILL),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = result.and_then(|detail| {
            if took <= limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {took:.2?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(detail) => println!("PASS {name} [{took:.2?}]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} [{took:.2?}]: {why}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
