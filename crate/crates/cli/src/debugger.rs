//! Line-oriented terminal debugger over a recorded trace.

use std::io::{self, BufRead, Write};
use std::sync::Arc;

use jalgo_core::{Direction, Session, Trace, TraceStatus};

const USAGE: &str = "commands: s (step), r (step back), b <line> (toggle breakpoint), \
c (continue), cb (continue back), p (print frame), q (quit)";

fn join_ids<T: std::fmt::Display>(ids: impl IntoIterator<Item = T>) -> String {
    ids.into_iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes the current frame's position and marks the source line about to
/// run with `>` (and breakpoint lines with `*`).
fn render(session: &Session, lines: &[&str], out: &mut dyn Write) -> io::Result<()> {
    let frame = session.frame();
    writeln!(out, "step {}/{}", frame.step, session.last_index())?;
    if frame.line == 0 {
        return writeln!(out, "  (program finished)");
    }
    let text = lines.get(frame.line as usize - 1).copied().unwrap_or("");
    let bp = if session.breakpoints().contains(&frame.line) {
        '*'
    } else {
        ' '
    };
    writeln!(out, ">{bp}{:>4} | {text}", frame.line)
}

fn summary(session: &Session, out: &mut dyn Write) -> io::Result<()> {
    let frame = session.frame();
    let selected = frame
        .selected()
        .map_or("none".to_string(), |id| id.to_string());
    writeln!(
        out,
        "step={} line={} roots=[{}] selected={}",
        frame.step,
        frame.line,
        join_ids(frame.roots()),
        selected
    )
}

pub fn repl(
    source: &str,
    trace: Trace,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> io::Result<()> {
    let normalized = source.replace("\r\n", "\n");
    let lines: Vec<&str> = normalized.lines().collect();
    let trace = Arc::new(trace);
    match (&trace.status, &trace.error) {
        (TraceStatus::RuntimeError, Some(e)) => writeln!(
            out,
            "note: the program stops at line {} with {}: {}",
            e.line, e.code, e.message
        )?,
        (TraceStatus::StepLimit, _) => writeln!(out, "note: the trace stops at the step limit")?,
        _ => {}
    }
    let mut session =
        Session::open(Arc::clone(&trace)).expect("compiled programs emit at least one frame");
    render(&session, &lines, out)?;

    let mut line = String::new();
    loop {
        write!(out, "(jalgo) ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            return Ok(());
        }
        let mut words = line.split_whitespace();
        let Some(cmd) = words.next() else { continue };
        let arg = words.next();
        match (cmd, arg) {
            ("q", None) => return Ok(()),
            ("s", None) => {
                let before = session.cursor();
                if session.step(Direction::Forward) == before {
                    writeln!(out, "(end)")?;
                }
                render(&session, &lines, out)?;
            }
            ("r", None) => {
                let before = session.cursor();
                if session.step(Direction::Back) == before {
                    writeln!(out, "(start)")?;
                }
                render(&session, &lines, out)?;
            }
            ("c", None) => {
                session.resume(Direction::Forward);
                render(&session, &lines, out)?;
            }
            ("cb", None) => {
                session.resume(Direction::Back);
                render(&session, &lines, out)?;
            }
            ("p", None) => summary(&session, out)?,
            ("b", Some(n)) => match n.parse::<u32>().map(|n| session.toggle_breakpoint(n)) {
                Ok(Ok(set)) => {
                    writeln!(out, "breakpoints: [{}]", join_ids(set.iter()))?;
                }
                _ => writeln!(out, "b needs a line number of at least 1\n{USAGE}")?,
            },
            _ => writeln!(out, "unknown command `{}`\n{USAGE}", line.trim())?,
        }
    }
}
