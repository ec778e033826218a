//! Line-oriented replay files.
//!
//! ```text
//! cleanup-replay v1
//! config_hash 3f2a... seed 1234 width 18 height 10 agents 4
//! step 0
//! ~~W~~~~~~~~~W~~~~~
//! ..................
//! ...1..............
//! ....
//! legend 0:cleaner:team1 1:picker:solo ...
//! step 1
//! ...
//! ```
//!
//! One frame is written for the initial state and one after every step.
//! Cells: `~` clean river, `W` waste, `.` open ground or empty orchard,
//! `A` apple. Agents are drawn over their cell as `0`–`9`, then `a`–`z`,
//! then `@`. The legend exposes identities and is for experimenters only.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use cleanup_core::{CellKind, Env, EpisodeLog, Pos, SOLO};

use crate::error::{HarnessError, Result};

const MAGIC: &str = "cleanup-replay v1";

pub fn agent_glyph(agent: usize) -> char {
    match agent {
        0..=9 => (b'0' + agent as u8) as char,
        10..=35 => (b'a' + (agent - 10) as u8) as char,
        _ => '@',
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayHeader {
    pub config_hash: String,
    pub seed: u64,
    pub width: u16,
    pub height: u16,
    pub agents: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub step: u32,
    pub rows: Vec<String>,
    pub legend: String,
}

impl Frame {
    pub fn count(&self, glyph: char) -> usize {
        self.rows.iter().map(|r| r.chars().filter(|&c| c == glyph).count()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub header: ReplayHeader,
    pub frames: Vec<Frame>,
}

/// Draws the current grid of `env`.
pub fn render_frame(env: &Env) -> Frame {
    let cfg = env.config();
    let mut rows = Vec::with_capacity(cfg.height as usize);
    for row in 0..cfg.height {
        let line: String = (0..cfg.width)
            .map(|col| {
                let pos = Pos::new(row, col);
                if let Some(agent) = env.agent_at(pos) {
                    return agent_glyph(agent);
                }
                match env.cell_kind(pos) {
                    Some(CellKind::River) if env.has_waste(pos) => 'W',
                    Some(CellKind::River) => '~',
                    _ if env.has_apple(pos) => 'A',
                    _ => '.',
                }
            })
            .collect();
        rows.push(line);
    }
    let state = env.state();
    let mut legend = String::from("legend");
    for (i, a) in state.agents().iter().enumerate() {
        let team = match state.teams().slot(i) {
            Ok(SOLO) | Err(_) => "solo".to_string(),
            Ok(s) => format!("team{s}"),
        };
        let _ = write!(legend, " {}:{}:{}", agent_glyph(i), a.identity().label(), team);
    }
    Frame {
        step: state.step(),
        rows,
        legend,
    }
}

fn write_frame(sink: &mut dyn Write, frame: &Frame) -> std::io::Result<()> {
    writeln!(sink, "step {}", frame.step)?;
    for r in &frame.rows {
        writeln!(sink, "{r}")?;
    }
    writeln!(sink, "{}", frame.legend)
}

fn write_header(sink: &mut dyn Write, h: &ReplayHeader) -> std::io::Result<()> {
    writeln!(sink, "{MAGIC}")?;
    writeln!(
        sink,
        "config_hash {} seed {} width {} height {} agents {}",
        h.config_hash, h.seed, h.width, h.height, h.agents
    )
}

/// Re-simulates `log` from its seed and writes every frame.
pub fn write_replay(log: &EpisodeLog, config_hash: &str, sink: &mut dyn Write) -> Result<()> {
    let header = ReplayHeader {
        config_hash: config_hash.to_string(),
        seed: log.seed,
        width: log.config.width,
        height: log.config.height,
        agents: log.config.num_agents,
    };
    let mut io_result = write_header(sink, &header);
    log.replay_with(|env| {
        if io_result.is_ok() {
            io_result = write_frame(sink, &render_frame(env));
        }
    })?;
    io_result.map_err(HarnessError::io("replay sink"))
}

/// Writes an already parsed replay back out.
pub fn write_parsed(replay: &Replay, sink: &mut dyn Write) -> std::io::Result<()> {
    write_header(sink, &replay.header)?;
    for f in &replay.frames {
        write_frame(sink, f)?;
    }
    Ok(())
}

fn bad(line: usize, reason: impl Into<String>) -> HarnessError {
    HarnessError::Format {
        what: "replay",
        line,
        reason: reason.into(),
    }
}

pub fn parse_replay(reader: impl BufRead) -> Result<Replay> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |expect: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((n, Err(e))) => Err(bad(n, e.to_string())),
            None => Err(bad(0, format!("unexpected end of file, expected {expect}"))),
        }
    };
    let (n, magic) = next("header")?;
    if magic != MAGIC {
        return Err(bad(n, "not a replay file"));
    }
    let (n, line) = next("header")?;
    let fields: Vec<&str> = line.split_whitespace().collect();
    let keys = ["config_hash", "seed", "width", "height", "agents"];
    if fields.len() != 10 || fields.iter().step_by(2).zip(keys).any(|(a, b)| *a != b) {
        return Err(bad(n, "malformed header"));
    }
    let num = |i: usize| -> Result<u64> {
        fields[i].parse().map_err(|_| bad(n, format!("bad number {}", fields[i])))
    };
    let header = ReplayHeader {
        config_hash: fields[1].to_string(),
        seed: num(3)?,
        width: num(5)? as u16,
        height: num(7)? as u16,
        agents: num(9)? as usize,
    };
    let mut frames = Vec::new();
    loop {
        let (n, line) = match next("frame") {
            Ok(x) => x,
            Err(HarnessError::Format { line: 0, .. }) => break,
            Err(e) => return Err(e),
        };
        let step = line
            .strip_prefix("step ")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(n, "expected `step N`"))?;
        let mut rows = Vec::with_capacity(header.height as usize);
        for _ in 0..header.height {
            let (n, row) = next("grid row")?;
            if row.chars().count() != header.width as usize {
                return Err(bad(n, "grid row has the wrong width"));
            }
            rows.push(row);
        }
        let (n, legend) = next("legend")?;
        if !legend.starts_with("legend") {
            return Err(bad(n, "expected legend line"));
        }
        frames.push(Frame { step, rows, legend });
    }
    Ok(Replay { header, frames })
}

/// Terminal rendering used by `cleanup replay`.
pub fn pretty_print(replay: &Replay, out: &mut dyn Write) -> std::io::Result<()> {
    let h = &replay.header;
    writeln!(
        out,
        "replay seed={} config={} grid={}x{} agents={} frames={}",
        h.seed,
        h.config_hash,
        h.width,
        h.height,
        h.agents,
        replay.frames.len()
    )?;
    for f in &replay.frames {
        let waste = f.count('W');
        let river = waste + f.count('~');
        let pollution = if river == 0 { 0.0 } else { waste as f64 / river as f64 };
        writeln!(out)?;
        writeln!(out, "── step {:>5}  pollution {:.3}  apples {}", f.step, pollution, f.count('A'))?;
        for r in &f.rows {
            writeln!(out, "  {r}")?;
        }
        writeln!(out, "  {}", f.legend.trim_start_matches("legend").trim())?;
    }
    Ok(())
}
