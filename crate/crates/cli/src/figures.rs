//! The worked example tables, regenerated through the pipeline.

use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{json, Value};
use sica_core::io::{complete_table_to_json, events_to_string, table_to_json};
use sica_core::sica::{self, check_sica, condense, condense_complete, reorder_to_sica};
use sica_core::simulator::replay_sequential;
use sica_core::stats::correlation_report;
use sica_core::{
    block_halves, datasets, table_from_run, ASetting, BSetting, Pairing, SeriesTable, SlotSettings,
};

use crate::output::{pretty, report_text, tagged_table_text, write_atomic};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Fig2,
    Fig3,
    Fig5,
    Fig6,
    Fig6red,
    Fig7,
    Fig8,
    Fig9,
    All,
}

const ALL: [Which; 8] = [
    Which::Fig2,
    Which::Fig3,
    Which::Fig5,
    Which::Fig6,
    Which::Fig6red,
    Which::Fig7,
    Which::Fig8,
    Which::Fig9,
];

/// One regenerated figure: its artifact, statistics and a text summary.
pub struct Figure {
    pub name: &'static str,
    pub file_name: String,
    pub artifact: String,
    pub stats: Value,
    pub text: String,
}

fn table_figure(name: &'static str, table: &SeriesTable, mut stats: Value) -> Result<Figure> {
    let report = correlation_report(table);
    stats["figure"] = json!(name);
    stats["report"] = serde_json::to_value(&report)?;
    Ok(Figure {
        name,
        file_name: format!("{name}.json"),
        artifact: pretty(&table_to_json(table)),
        stats,
        text: format!("{table}{}", report_text(&report)),
    })
}

fn run_figure(name: &'static str, run: &sica_core::RecordedRun, extra: Value) -> Result<Figure> {
    let table = table_from_run(run);
    let report = correlation_report(&table);
    let verdict = check_sica(&table);
    let mut stats = extra;
    stats["figure"] = json!(name);
    stats["report"] = serde_json::to_value(&report)?;
    stats["sica"] = serde_json::to_value(&verdict)?;
    Ok(Figure {
        name,
        file_name: format!("{name}.jsonl"),
        artifact: events_to_string(run),
        stats,
        text: format!(
            "{table}{}Sica's condition {}\n",
            report_text(&report),
            if verdict.holds { "holds" } else { "fails" }
        ),
    })
}

fn fig8_choices() -> ([bool; 2], [bool; 2]) {
    ([false, true], [true, false])
}

pub fn build(which: Which) -> Result<Figure> {
    match which {
        Which::Fig2 => table_figure("fig2", &datasets::fig2(), json!({})),
        Which::Fig3 => table_figure("fig3", &datasets::fig3(), json!({})),
        Which::Fig5 => {
            let run = replay_sequential(&datasets::fig2(), &block_halves(32)?)?;
            run_figure("fig5", &run, json!({}))
        }
        Which::Fig6 => {
            let run = datasets::fig6_black_run();
            let outcome = reorder_to_sica(&run);
            let mut f = run_figure("fig6", &run, json!({ "reorder": outcome }))?;
            f.text.push_str(&crate::output::reorder_text(&outcome));
            Ok(f)
        }
        Which::Fig6red => {
            let run = datasets::fig6_red_run();
            let outcome = reorder_to_sica(&run);
            let condensed = condense(&table_from_run(&outcome.plan.apply(&run)))?;
            let mut f = run_figure(
                "fig6red",
                &run,
                json!({ "reorder": outcome, "condensed": table_to_json(&condensed) }),
            )?;
            f.text.push_str(&crate::output::reorder_text(&outcome));
            Ok(f)
        }
        Which::Fig7 => {
            let table = condense(&table_from_run(&datasets::fig6_red_run()))?;
            table_figure("fig7", &table, json!({}))
        }
        Which::Fig8 => {
            let (fa, fap) = fig8_choices();
            let c = sica::build_complete_table(&datasets::fig6_black_run(), &fa, &fap)?;
            // Observe (α,β) in the first two slots and (α,β') in the next two.
            let mut schedule = block_halves(8)?;
            schedule[..2].fill(SlotSettings::new(ASetting::Alpha, BSetting::Beta));
            schedule[2..4].fill(SlotSettings::new(ASetting::Alpha, BSetting::BetaPrime));
            let resampled = table_from_run(&sica::resample(&c, &schedule)?);
            let resampled_report = correlation_report(&resampled);
            let report = correlation_report(&c.table);
            let verdict = check_sica(&c.table);
            let e = resampled_report.correlations[Pairing::AlphaBetaPrime.index()].e;
            let stats = json!({
                "figure": "fig8",
                "free_choices": { "a": "1", "a_prime": "2" },
                "report": report,
                "sica": verdict,
                "resample": {
                    "schedule": schedule.iter().map(|s| (s.a, s.b)).collect::<Vec<_>>(),
                    "report": resampled_report,
                },
            });
            Ok(Figure {
                name: "fig8",
                file_name: "fig8.json".into(),
                artifact: pretty(&complete_table_to_json(&c)),
                stats,
                text: format!(
                    "{}{}Sica's condition {}\nresampled E(α,β') = {}, S = {}\n",
                    tagged_table_text(&c.table, &c.provenance),
                    report_text(&report),
                    if verdict.holds { "holds" } else { "fails" },
                    e.map_or("undefined".into(), |e| e.to_string()),
                    resampled_report
                        .s_chsh
                        .map_or("undefined".into(), |s| s.to_string()),
                ),
            })
        }
        Which::Fig9 => {
            let (fa, fap) = fig8_choices();
            let c = sica::build_complete_table(&datasets::fig6_black_run(), &fa, &fap)?;
            let (table, tags) = condense_complete(&c)?;
            let mut f = table_figure(
                "fig9",
                &table,
                json!({
                    "provenance": {
                        "a": tags[0], "a_prime": tags[1], "b": tags[2], "b_prime": tags[3],
                    }
                }),
            )?;
            f.text = format!(
                "{}{}",
                tagged_table_text(&table, &tags),
                report_text(&correlation_report(&table))
            );
            Ok(f)
        }
        Which::All => unreachable!("expanded by the caller"),
    }
}

pub fn run(which: Which, dir: &Path, text: bool) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let list: Vec<Which> = if which == Which::All {
        ALL.to_vec()
    } else {
        vec![which]
    };
    for w in list {
        let f = build(w)?;
        write_atomic(&dir.join(&f.file_name), f.artifact.as_bytes())?;
        write_atomic(
            &dir.join(format!("{}.stats.json", f.name)),
            pretty(&f.stats).as_bytes(),
        )?;
        if text {
            println!("== {}\n{}", f.name, f.text);
        } else {
            println!("{}", dir.join(&f.file_name).display());
        }
    }
    Ok(())
}
