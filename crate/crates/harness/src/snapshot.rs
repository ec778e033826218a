//! Flat text snapshots of Q-tables.
//!
//! ```text
//! cleanup-qtable v1
//! actions MoveUp MoveDown MoveLeft MoveRight Stay Clean Pick ChooseTeam(0)
//! orchard/a2/w0/p0/t1/s1/h0/c0    Pick    0.4375
//! ```
//!
//! Each data line (shown with spaces above) is a tab-separated `(state key, action, value)` triple.
//! Values are written in shortest round-trip form, so reading a snapshot
//! back yields the identical table.

use std::io::{BufRead, Write};

use cleanup_core::agents::QTable;
use cleanup_core::{Action, Observation};

use crate::error::{HarnessError, Result};

const MAGIC: &str = "cleanup-qtable v1";

pub fn action_name(action: Action) -> String {
    match action {
        Action::ChooseTeam(s) => format!("ChooseTeam({s})"),
        other => format!("{other:?}"),
    }
}

pub fn parse_action(name: &str) -> Option<Action> {
    if let Some(slot) = name.strip_prefix("ChooseTeam(").and_then(|s| s.strip_suffix(')')) {
        return slot.parse().ok().map(Action::ChooseTeam);
    }
    Action::BASIC.into_iter().find(|&a| action_name(a) == name)
}

pub fn write_snapshot(table: &QTable, actions: &[Action], sink: &mut dyn Write) -> std::io::Result<()> {
    writeln!(sink, "{MAGIC}")?;
    let names: Vec<String> = actions.iter().map(|&a| action_name(a)).collect();
    writeln!(sink, "actions {}", names.join(" "))?;
    for (obs, a, v) in table.entries() {
        writeln!(sink, "{obs}\t{}\t{v:?}", names[a])?;
    }
    Ok(())
}

fn bad(line: usize, reason: impl Into<String>) -> HarnessError {
    HarnessError::Format {
        what: "q-table snapshot",
        line,
        reason: reason.into(),
    }
}

/// Reads a snapshot back into its action list and table.
pub fn read_snapshot(reader: impl BufRead) -> Result<(Vec<Action>, QTable)> {
    let mut lines = reader.lines();
    let mut line_no = 0;
    let mut next = || {
        line_no += 1;
        lines.next().map(|l| l.map_err(|e| bad(line_no, e.to_string())))
    };
    match next() {
        Some(Ok(l)) if l == MAGIC => {}
        _ => return Err(bad(1, "not a q-table snapshot")),
    }
    let actions: Vec<Action> = match next() {
        Some(Ok(l)) => l
            .strip_prefix("actions ")
            .ok_or_else(|| bad(2, "expected action list"))?
            .split(' ')
            .map(|n| parse_action(n).ok_or_else(|| bad(2, format!("unknown action {n}"))))
            .collect::<Result<_>>()?,
        _ => return Err(bad(2, "expected action list")),
    };
    let mut table = QTable::new(actions.len());
    let mut n = 2;
    while let Some(line) = next() {
        n += 1;
        let line = line?;
        let mut parts = line.split('\t');
        let (Some(key), Some(action), Some(value), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad(n, "expected three tab-separated fields"));
        };
        let obs: Observation = key.parse().map_err(|_| bad(n, format!("bad state key {key}")))?;
        let a = actions
            .iter()
            .position(|&x| Some(x) == parse_action(action))
            .ok_or_else(|| bad(n, format!("action {action} not in action list")))?;
        let v: f64 = value.parse().map_err(|_| bad(n, format!("bad value {value}")))?;
        table.set(obs, a, v);
    }
    Ok((actions, table))
}
