//! File formats.
//!
//! Events are JSON lines, one slot per line:
//!
//! ```text
//! {"slot":0,"a_setting":"alpha","b_setting":"beta","a":-1,"b":-1}
//! ```
//!
//! An optional first line `{"meta": {...}}` carries free-form metadata.
//! Tables are a single JSON object with one array per row; `null` marks an
//! empty box. A table may also carry `"layout"` (`"run"` or `"complete"`)
//! with a `"schedule"` of `[a_setting, b_setting]` pairs, and a complete table
//! adds a `"provenance"` object of `"F"`/`"C"` tags.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{
    ASetting, BSetting, Layout, Outcome, RecordedRun, Row, SeriesTable, SlotEvent, SlotSettings,
};
use crate::sica::{CompleteTable, Provenance};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventLine {
    slot: u64,
    a_setting: ASetting,
    b_setting: BSetting,
    a: i64,
    b: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaLine {
    meta: Value,
}

fn outcome(value: i64, line: usize, field: &str) -> Result<Outcome> {
    Outcome::from_wire(value).ok_or_else(|| Error::Parse {
        line,
        message: format!("{field} must be 1, -1 or 0, got {value}"),
    })
}

/// Reads a JSON-lines event stream. Events may come in any order but their
/// slots must be exactly `0..T`.
pub fn read_events<R: BufRead>(reader: R) -> Result<RecordedRun> {
    let mut metadata = None;
    let mut seen_event = false;
    let mut events: Vec<(u64, SlotEvent)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if !seen_event && metadata.is_none() {
            if let Ok(meta) = serde_json::from_str::<MetaLine>(text) {
                metadata = Some(meta.meta);
                continue;
            }
        }
        seen_event = true;
        let ev: EventLine = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let a = outcome(ev.a, line_no, "a")?;
        let b = outcome(ev.b, line_no, "b")?;
        events.push((
            ev.slot,
            SlotEvent::new(SlotSettings::new(ev.a_setting, ev.b_setting), a, b),
        ));
    }
    events.sort_by_key(|(slot, _)| *slot);
    for (expected, window) in events.iter().enumerate() {
        let slot = window.0;
        if expected > 0 && events[expected - 1].0 == slot {
            return Err(Error::DuplicateSlot(slot));
        }
        if slot != expected as u64 {
            return Err(Error::MissingSlot(expected as u64));
        }
    }
    let run = RecordedRun::new(events.into_iter().map(|(_, e)| e).collect())?;
    Ok(match metadata {
        Some(m) => run.with_metadata(m),
        None => run,
    })
}

/// Writes the run in slot order, preceded by its metadata line if any.
pub fn write_events<W: Write>(run: &RecordedRun, mut writer: W) -> Result<()> {
    if let Some(meta) = run.metadata() {
        serde_json::to_writer(&mut writer, &serde_json::json!({ "meta": meta }))?;
        writer.write_all(b"\n")?;
    }
    for (slot, e) in run.events().iter().enumerate() {
        let line = EventLine {
            slot: slot as u64,
            a_setting: e.settings.a,
            b_setting: e.settings.b,
            a: e.a.sign(),
            b: e.b.sign(),
        };
        serde_json::to_writer(&mut writer, &line)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn events_to_string(run: &RecordedRun) -> String {
    let mut buf = Vec::new();
    write_events(run, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "snake_case")]
enum LayoutTag {
    Run,
    Complete,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    slots: usize,
    a: Vec<Option<i64>>,
    a_prime: Vec<Option<i64>>,
    b: Vec<Option<i64>>,
    b_prime: Vec<Option<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layout: Option<LayoutTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule: Option<Vec<(ASetting, BSetting)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<ProvenanceFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProvenanceFile {
    a: Vec<Provenance>,
    a_prime: Vec<Provenance>,
    b: Vec<Provenance>,
    b_prime: Vec<Provenance>,
}

fn row_cells(cells: &[Option<i64>], row: Row) -> Result<Vec<Outcome>> {
    cells
        .iter()
        .enumerate()
        .map(|(i, c)| match c {
            None => Ok(Outcome::Unmeasured),
            Some(v) => Outcome::from_wire(*v).ok_or_else(|| {
                Error::Structure(format!(
                    "row {row}, slot {i}: cell must be 1, -1, 0 or null"
                ))
            }),
        })
        .collect()
}

fn table_of(file: &TableFile) -> Result<SeriesTable> {
    let rows = [
        row_cells(&file.a, Row::A)?,
        row_cells(&file.a_prime, Row::APrime)?,
        row_cells(&file.b, Row::B)?,
        row_cells(&file.b_prime, Row::BPrime)?,
    ];
    let schedule = file.schedule.as_ref().map(|s| {
        s.iter()
            .map(|&(a, b)| SlotSettings::new(a, b))
            .collect::<Vec<_>>()
    });
    let layout = match (file.layout, schedule) {
        (None, None) => Layout::Plain,
        (Some(LayoutTag::Run), Some(s)) => Layout::Run(s),
        (Some(LayoutTag::Complete), Some(s)) => Layout::Complete(s),
        (Some(_), None) => {
            return Err(Error::Structure("a layout needs a schedule".into()));
        }
        (None, Some(_)) => {
            return Err(Error::Structure("a schedule needs a layout".into()));
        }
    };
    let table = SeriesTable::from_parts(file.slots, rows, layout);
    if let Some(v) = crate::model::validate(&table).first() {
        return Err(Error::Structure(v.to_string()));
    }
    Ok(table)
}

fn file_of(table: &SeriesTable) -> TableFile {
    let cells = |row: Row| {
        table
            .row(row)
            .iter()
            .map(|o| o.to_wire().map(i64::from))
            .collect()
    };
    let (layout, schedule) = match table.layout() {
        Layout::Plain => (None, None),
        Layout::Run(s) => (Some(LayoutTag::Run), Some(s)),
        Layout::Complete(s) => (Some(LayoutTag::Complete), Some(s)),
    };
    TableFile {
        slots: table.slots(),
        a: cells(Row::A),
        a_prime: cells(Row::APrime),
        b: cells(Row::B),
        b_prime: cells(Row::BPrime),
        layout,
        schedule: schedule.map(|s| s.iter().map(|x| (x.a, x.b)).collect()),
        provenance: None,
    }
}

pub fn read_table(text: &str) -> Result<SeriesTable> {
    let file: TableFile = serde_json::from_str(text)?;
    if file.provenance.is_some() {
        return Ok(read_complete_table(text)?.table);
    }
    table_of(&file)
}

pub fn table_to_json(table: &SeriesTable) -> Value {
    serde_json::to_value(file_of(table)).expect("table serializes")
}

pub fn read_complete_table(text: &str) -> Result<CompleteTable> {
    let file: TableFile = serde_json::from_str(text)?;
    let p = file
        .provenance
        .as_ref()
        .ok_or_else(|| Error::Structure("complete table without provenance".into()))?;
    let table = table_of(&file)?;
    let provenance = [
        p.a.clone(),
        p.a_prime.clone(),
        p.b.clone(),
        p.b_prime.clone(),
    ];
    CompleteTable::new(table, provenance)
}

pub fn complete_table_to_json(complete: &CompleteTable) -> Value {
    let mut file = file_of(&complete.table);
    let p = &complete.provenance;
    file.provenance = Some(ProvenanceFile {
        a: p[0].clone(),
        a_prime: p[1].clone(),
        b: p[2].clone(),
        b_prime: p[3].clone(),
    });
    serde_json::to_value(file).expect("table serializes")
}

/// Any of the three input kinds.
#[derive(Clone, Debug)]
pub enum Input {
    Run(RecordedRun),
    Table(SeriesTable),
    Complete(CompleteTable),
}

/// Reads a table object if the text is one, else an event stream.
pub fn read_input(text: &str) -> Result<Input> {
    if let Ok(Value::Object(map)) = serde_json::from_str::<Value>(text) {
        if map.contains_key("slots") && map.contains_key("a") {
            return if map.contains_key("provenance") {
                read_complete_table(text).map(Input::Complete)
            } else {
                read_table(text).map(Input::Table)
            };
        }
    }
    read_events(text.as_bytes()).map(Input::Run)
}
