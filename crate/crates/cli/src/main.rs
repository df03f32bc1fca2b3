//! `sica`: analyze, reorder, condense and complete outcome series.
//!
//! Exit status is 0 on success, 2 for bad usage, 3 when the input violates a
//! precondition or the requested operation is impossible, and 1 for I/O and
//! internal failures.

mod figures;
mod output;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sica_core::io::{self, Input};
use sica_core::oracle::{self, Alphabet, CensusOptions, Constraint, EnumLayout, EnumSpec};
use sica_core::sica::{self, CompleteTable, CompletionOptions, FillPolicy, ReorderOptions};
use sica_core::simulator::{self, Angles, SourceConfig, SourceModel};
use sica_core::stats::correlation_report;
use sica_core::{table_from_run, RecordedRun, Schedule, SeriesTable, SlotSettings};

use output::{pretty, write_atomic};

#[derive(Parser)]
#[command(
    name = "sica",
    version,
    about = "Bell statistics on time series of outcomes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Args)]
struct Io {
    /// Events (JSON lines) or table (JSON) file; `-` reads stdin.
    #[arg(long, short, default_value = "-")]
    input: String,
    /// Artifact path; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded run from a source model.
    Simulate(SimulateArgs),
    /// Correlations, CHSH, CH, set statistics and bound verdicts.
    Analyze(Io),
    /// Test Sica's condition.
    SicaCheck(Io),
    /// Reorder a run so that Sica's condition holds.
    SicaReorder {
        #[command(flatten)]
        io: Io,
        /// Slots each block may lose.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Halve a table that satisfies Sica's condition.
    SicaCondense(Io),
    /// Fill the empty boxes of a block-halves run into a complete Sica table.
    SicaComplete {
        #[command(flatten)]
        io: Io,
        /// Free choices for a and a' as hex bit strings, most significant
        /// bit first; the last n bits are used (1 is +, 0 is −).
        #[arg(long, value_name = "HEX,HEX")]
        free_choices: String,
        /// Slots each quarter may lose to balancing.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Fill the empty boxes of a run.
    Fill {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "zeros")]
        policy: Policy,
        #[arg(long, value_name = "HEX,HEX")]
        free_choices: Option<String>,
    },
    /// Exhaustive sweeps at small sizes.
    Oracle(OracleArgs),
    /// Regenerate the worked example tables and their statistics.
    #[command(alias = "paper-figures")]
    Figures {
        #[arg(long, value_enum, default_value = "all")]
        which: figures::Which,
        /// Directory receiving one table file and one statistics file per
        /// figure.
        #[arg(long, default_value = "figures")]
        output_dir: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Policy {
    Zeros,
    Sica,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON source configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `quantum`, `custom:E1,E2,E3,E4` or `local:<instructions.json>`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    /// Angles in degrees as `alpha,alpha',beta,beta'`.
    #[arg(long, value_name = "A,A',B,B'")]
    angles: Option<String>,
    /// `block`, `random` or `file:<path>` with a JSON list of
    /// `[a_setting, b_setting]` pairs.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Instruction order for local models: `sequential` or `shuffled`.
    #[arg(long)]
    order: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Objective {
    Chsh,
    ChJ,
    SEta,
    Coincidence,
    Census,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum, default_value = "chsh")]
    objective: Objective,
    #[arg(long, default_value_t = 2)]
    slots: usize,
    /// `binary` or `ternary`.
    #[arg(long, default_value = "binary")]
    alphabet: String,
    /// `plain` or `block-run`.
    #[arg(long, default_value = "plain")]
    layout: String,
    /// `sica`, `equal-nc`, `eta>=q`, `eta<=q` or `eta<q`; repeatable.
    #[arg(long = "constraint")]
    constraints: Vec<String>,
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = 4)]
    witnesses: usize,
    /// Run to census (objective `census` only).
    #[arg(long, short)]
    input: Option<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

/// Failures of the input rather than of the environment.
#[derive(Debug)]
struct Domain(String);

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Domain {}

fn domain(message: impl Into<String>) -> anyhow::Error {
    Domain(message.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Domain>().is_some() {
        return 3;
    }
    match err.downcast_ref::<sica_core::Error>() {
        Some(e) if e.is_domain() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn read_text(input: &str) -> Result<String> {
    let mut text = String::new();
    if input == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(input).with_context(|| format!("reading {input}"))?;
    }
    Ok(text)
}

fn read(input: &str) -> Result<Input> {
    Ok(io::read_input(&read_text(input)?)?)
}

fn as_table(input: Input) -> SeriesTable {
    match input {
        Input::Run(run) => table_from_run(&run),
        Input::Table(t) => t,
        Input::Complete(c) => c.table,
    }
}

fn as_run(input: Input) -> Result<RecordedRun> {
    match input {
        Input::Run(run) => Ok(run),
        Input::Table(t) => Ok(sica_core::run_from_table(&t)?),
        Input::Complete(_) => Err(domain("expected a run, got a complete table")),
    }
}

/// Writes the artifact to `path`, or prints it when there is none.
fn emit(path: Option<&Path>, artifact: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, artifact.as_bytes()),
        None => {
            print!("{artifact}");
            Ok(())
        }
    }
}

/// Emits a JSON artifact, or its text rendering on stdout when no path is
/// given and text was asked for.
fn emit_json(io: &Io, value: &Value, text: impl FnOnce() -> String) -> Result<()> {
    match (&io.output, io.format) {
        (Some(p), format) => {
            write_atomic(p, pretty(value).as_bytes())?;
            if format == Format::Text {
                print!("{}", text());
            }
            Ok(())
        }
        (None, Format::Json) => emit(None, &pretty(value)),
        (None, Format::Text) => emit(None, &text()),
    }
}

fn hex_bits(hex: &str, n: usize) -> Result<Vec<bool>> {
    let hex = hex.trim().trim_start_matches("0x");
    let mut bits = Vec::with_capacity(4 * hex.len());
    for c in hex.chars() {
        let d = c
            .to_digit(16)
            .ok_or_else(|| domain(format!("{c:?} is not a hex digit")))?;
        bits.extend((0..4).rev().map(|i| d >> i & 1 == 1));
    }
    if bits.len() < n {
        bail!(domain(format!(
            "free choice {hex:?} has {} bits, {n} are needed",
            bits.len()
        )));
    }
    Ok(bits.split_off(bits.len() - n))
}

fn free_choices(spec: &str, n: usize) -> Result<(Vec<bool>, Vec<bool>)> {
    let (a, a_prime) = spec
        .split_once(',')
        .ok_or_else(|| domain("free choices are two hex strings separated by a comma"))?;
    Ok((hex_bits(a, n)?, hex_bits(a_prime, n)?))
}

fn complete(run: &RecordedRun, spec: &str, budget: Option<usize>) -> Result<CompleteTable> {
    let options = CompletionOptions {
        discard_budget: budget,
    };
    let n = sica::completion_quarter_len(run, &options)?;
    let (fa, fap) = free_choices(spec, n)?;
    Ok(sica::build_complete_table_with(run, &fa, &fap, &options)?)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Analyze(io) => {
            let report = correlation_report(&as_table(read(&io.input)?));
            emit_json(&io, &serde_json::to_value(&report)?, || {
                output::report_text(&report)
            })
        }
        Command::SicaCheck(io) => {
            let verdict = sica::check_sica(&as_table(read(&io.input)?));
            emit_json(&io, &serde_json::to_value(&verdict)?, || {
                output::verdict_text(&verdict)
            })
        }
        Command::SicaReorder { io, budget } => {
            let run = as_run(read(&io.input)?)?;
            let outcome = sica::reorder_to_sica_with(
                &run,
                &ReorderOptions {
                    discard_budget: budget,
                    ..Default::default()
                },
            );
            match io.format {
                Format::Json => print!("{}", pretty(&serde_json::to_value(&outcome)?)),
                Format::Text => print!("{}", output::reorder_text(&outcome)),
            }
            if !outcome.success {
                bail!(domain(
                    "the run cannot be reordered to satisfy Sica's condition"
                ));
            }
            if let Some(p) = &io.output {
                write_atomic(
                    p,
                    io::events_to_string(&outcome.plan.apply(&run)).as_bytes(),
                )?;
            }
            Ok(())
        }
        Command::SicaCondense(io) => {
            let (table, tags) = match read(&io.input)? {
                Input::Complete(c) => {
                    let (t, tags) = sica::condense_complete(&c)?;
                    (t, Some(tags))
                }
                other => (sica::condense(&as_table(other))?, None),
            };
            emit_json(&io, &io::table_to_json(&table), || match &tags {
                Some(tags) => output::tagged_table_text(&table, tags),
                None => table.to_string(),
            })
        }
        Command::SicaComplete {
            io,
            free_choices,
            budget,
        } => {
            let run = as_run(read(&io.input)?)?;
            let c = complete(&run, &free_choices, budget)?;
            emit_json(&io, &io::complete_table_to_json(&c), || {
                output::tagged_table_text(&c.table, &c.provenance)
            })
        }
        Command::Fill {
            io,
            policy,
            free_choices,
        } => {
            let run = as_run(read(&io.input)?)?;
            let table = match policy {
                Policy::Zeros => sica::fill_counterfactual(&run, &FillPolicy::Zeros)?,
                Policy::Sica => {
                    let spec =
                        free_choices.ok_or_else(|| domain("--policy sica needs --free-choices"))?;
                    complete(&run, &spec, None)?.table
                }
            };
            emit_json(&io, &io::table_to_json(&table), || table.to_string())
        }
        Command::Oracle(args) => oracle_command(args),
        Command::Figures {
            which,
            output_dir,
            format,
        } => figures::run(which, &output_dir, format == Format::Text),
    }
}

fn parse_angles(s: &str) -> Result<Angles> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| domain(format!("bad angles {s:?}: {e}")))?;
    let [alpha, alpha_prime, beta, beta_prime] = v[..] else {
        bail!(domain(format!("expected four angles, got {}", v.len())));
    };
    Ok(Angles {
        alpha,
        alpha_prime,
        beta,
        beta_prime,
    })
}

fn parse_schedule(s: &str, seed: u64) -> Result<Schedule> {
    match s {
        "block" => Ok(Schedule::BlockHalves),
        "random" => Ok(Schedule::RandomPerSlot { seed }),
        _ => {
            let path = s
                .strip_prefix("file:")
                .ok_or_else(|| domain(format!("unknown schedule {s:?}")))?;
            let text = read_text(path)?;
            let pairs: Vec<(sica_core::ASetting, sica_core::BSetting)> =
                serde_json::from_str(&text).map_err(|e| domain(format!("{path}: {e}")))?;
            Ok(Schedule::Custom {
                settings: pairs
                    .into_iter()
                    .map(|(a, b)| SlotSettings::new(a, b))
                    .collect(),
            })
        }
    }
}

fn parse_model(s: &str) -> Result<SourceModel> {
    if s == "quantum" {
        return Ok(SourceModel::Quantum);
    }
    if let Some(list) = s.strip_prefix("custom:") {
        let v: Vec<f64> = list
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| domain(format!("bad correlations {list:?}: {e}")))?;
        let correlations: [f64; 4] = v
            .try_into()
            .map_err(|_| domain("a custom model needs four correlations"))?;
        return Ok(SourceModel::Custom { correlations });
    }
    if let Some(path) = s.strip_prefix("local:") {
        let instructions: Vec<[i8; 4]> =
            serde_json::from_str(&read_text(path)?).map_err(|e| domain(format!("{path}: {e}")))?;
        return Ok(SourceModel::LocalDeterministic {
            instructions,
            order: Default::default(),
        });
    }
    Err(domain(format!("unknown model {s:?}")))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => serde_json::from_str::<SourceConfig>(&read_text(&p.to_string_lossy())?)
            .map_err(|e| domain(format!("{}: {e}", p.display())))?,
        None => SourceConfig::quantum(0, Schedule::RandomPerSlot { seed: 0 }, 0),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
        if let Schedule::RandomPerSlot { seed: s } = &mut config.schedule {
            *s = seed;
        }
    }
    if let Some(m) = &args.model {
        config.model = parse_model(m)?;
    }
    if let Some(order) = &args.order {
        let SourceModel::LocalDeterministic { order: o, .. } = &mut config.model else {
            bail!(domain("--order applies to local models only"));
        };
        *o = serde_json::from_value(json!(order)).map_err(|e| domain(format!("--order: {e}")))?;
    }
    if let Some(t) = args.slots {
        config.slots = t;
    }
    if let Some(eta) = args.eta {
        config.eta = eta;
    }
    if let Some(a) = &args.angles {
        config.angles = parse_angles(a)?;
    }
    if let Some(s) = &args.schedule {
        config.schedule = parse_schedule(s, config.seed)?;
    }
    let run = simulator::simulate(&config)?;
    emit(args.output.as_deref(), &io::events_to_string(&run))
}

fn oracle_command(args: OracleArgs) -> Result<()> {
    let alphabet: Alphabet = args.alphabet.parse()?;
    if args.objective == Objective::Census {
        let input = args
            .input
            .as_deref()
            .ok_or_else(|| domain("the census needs --input with a run"))?;
        let run = as_run(read(input)?)?;
        let census = oracle::census_complete_tables(
            &run,
            &CensusOptions {
                alphabet,
                budget: args.budget,
                max_samples: args.witnesses,
            },
        )?;
        let value = json!({
            "objective": "census",
            "slots": census.slots,
            "fillings": census.fillings,
            "valid": census.valid,
            "samples": census.samples.iter().map(io::complete_table_to_json).collect::<Vec<_>>(),
        });
        let io = Io {
            input: input.to_string(),
            output: args.output,
            format: args.format,
        };
        return emit_json(&io, &value, || {
            let mut s = format!(
                "{} of {} fillings satisfy Sica's condition and keep the factual correlations\n",
                census.valid, census.fillings
            );
            for c in &census.samples {
                s.push('\n');
                s.push_str(&output::tagged_table_text(&c.table, &c.provenance));
            }
            s
        });
    }
    let mut spec = EnumSpec::new(args.slots, alphabet)
        .with_layout(args.layout.parse::<EnumLayout>()?)
        .with_budget(args.budget);
    spec.max_witnesses = args.witnesses;
    for c in &args.constraints {
        spec = spec.with_constraint(c.parse::<Constraint>()?);
    }
    let started = std::time::Instant::now();
    let result = match args.objective {
        Objective::Chsh => oracle::max_chsh(&spec),
        Objective::ChJ => oracle::max_ch_j(&spec),
        Objective::SEta => oracle::max_s_eta(&spec),
        Objective::Coincidence => oracle::verify_coincidence_bound(&spec),
        Objective::Census => unreachable!("handled above"),
    }?;
    let mut value = serde_json::to_value(&result)?;
    value["wall_time_s"] = json!(started.elapsed().as_secs_f64());
    let io = Io {
        input: String::new(),
        output: args.output,
        format: args.format,
    };
    emit_json(&io, &value, || {
        let mut s = format!(
            "{}: max {} over {} admitted of {} tables; {} above {}\n",
            result.objective,
            result
                .max_value
                .map_or("undefined".to_string(), |v| v.to_string()),
            result.tables_admitted,
            result.tables_scanned,
            result.above_reference,
            result.reference.map_or("-".to_string(), |v| v.to_string()),
        );
        for w in &result.witnesses {
            s.push('\n');
            s.push_str(&w.to_string());
        }
        s
    })
}
