//! Cursor navigation over a recorded trace: single steps in either
//! direction and runs to the next breakpoint. Traces are recorded eagerly,
//! so stepping back is a cursor move, never a re-execution.

use std::collections::BTreeSet;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::interpreter::{Frame, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Back,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" => Ok(Direction::Forward),
            "back" => Ok(Direction::Back),
            other => Err(format!(
                "direction must be `forward` or `back`, got `{other}`"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("trace has no frames")]
    EmptyTrace,
    #[error("breakpoint line must be at least 1, got {0}")]
    InvalidLine(u32),
}

/// Index of the nearest frame strictly past `from` in `direction` whose line
/// is a breakpoint, or the last frame (forward) / frame 0 (back) if there is
/// none. The terminal frame (line 0) never matches.
pub fn next_break(
    frames: &[Frame],
    from: usize,
    direction: Direction,
    breakpoints: &BTreeSet<u32>,
) -> usize {
    let hit = |i: &usize| {
        let line = frames[*i].line;
        line != 0 && breakpoints.contains(&line)
    };
    match direction {
        Direction::Forward => (from + 1..frames.len())
            .find(hit)
            .unwrap_or(frames.len().saturating_sub(1)),
        Direction::Back => (0..from.min(frames.len())).rev().find(hit).unwrap_or(0),
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    trace: Arc<Trace>,
    cursor: usize,
    breakpoints: BTreeSet<u32>,
}

impl Session {
    pub fn open(trace: Arc<Trace>) -> Result<Self, SessionError> {
        if trace.frames.is_empty() {
            return Err(SessionError::EmptyTrace);
        }
        Ok(Self {
            trace,
            cursor: 0,
            breakpoints: BTreeSet::new(),
        })
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn frame(&self) -> &Frame {
        &self.trace.frames[self.cursor]
    }

    pub fn last_index(&self) -> usize {
        self.trace.frames.len() - 1
    }

    pub fn breakpoints(&self) -> &BTreeSet<u32> {
        &self.breakpoints
    }

    /// Moves one frame, clamped to the ends of the trace.
    pub fn step(&mut self, direction: Direction) -> usize {
        self.cursor = match direction {
            Direction::Forward => (self.cursor + 1).min(self.last_index()),
            Direction::Back => self.cursor.saturating_sub(1),
        };
        self.cursor
    }

    pub fn toggle_breakpoint(&mut self, line: u32) -> Result<&BTreeSet<u32>, SessionError> {
        if line < 1 {
            return Err(SessionError::InvalidLine(line));
        }
        if !self.breakpoints.remove(&line) {
            self.breakpoints.insert(line);
        }
        Ok(&self.breakpoints)
    }

    /// Runs to the next breakpoint in `direction` (see [`next_break`]).
    pub fn resume(&mut self, direction: Direction) -> usize {
        self.cursor = next_break(
            &self.trace.frames,
            self.cursor,
            direction,
            &self.breakpoints,
        );
        self.cursor
    }
}
