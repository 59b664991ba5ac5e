//! Implementation of the `jalgo` subcommands, written against generic
//! readers and writers so they can be driven from tests.

pub mod debugger;

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use jalgo_core::{compile, wire, CompileError, Compiled, RunLimits, Trace, TraceStatus};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    CompileErrors = 1,
    RuntimeError = 2,
    Usage = 3,
    Io = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Formats a diagnostic as `<file>:<line>:<col>: <phase>: <message> [<code>]`.
pub fn format_diagnostic(file: &Path, err: &CompileError) -> String {
    format!(
        "{}:{}:{}: {}: {} [{}]",
        file.display(),
        err.line,
        err.column,
        err.phase,
        err.message,
        err.code
    )
}

/// Reads and compiles `file`, reporting problems on `err`.
fn load(file: &Path, err: &mut dyn Write) -> Result<(String, Compiled), ExitStatus> {
    let source = match fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "{}: {e}", file.display());
            return Err(ExitStatus::Io);
        }
    };
    match compile(&source) {
        Ok(compiled) => Ok((source, compiled)),
        Err(errors) => {
            for e in &errors {
                let _ = writeln!(err, "{}", format_diagnostic(file, e));
            }
            Err(ExitStatus::CompileErrors)
        }
    }
}

pub fn check(file: &Path, err: &mut dyn Write) -> ExitStatus {
    match load(file, err) {
        Ok(_) => ExitStatus::Success,
        Err(status) => status,
    }
}

/// Reports how a trace ended; `Success` only for completed runs.
fn report_outcome(
    file: &Path,
    trace: &Trace,
    limits: RunLimits,
    err: &mut dyn Write,
) -> ExitStatus {
    match trace.status {
        TraceStatus::Completed => ExitStatus::Success,
        TraceStatus::RuntimeError => {
            let e = trace
                .error
                .as_ref()
                .expect("runtime_error traces carry an error");
            let _ = writeln!(
                err,
                "{}:{}: runtime error: {} [{}]",
                file.display(),
                e.line,
                e.message,
                e.code
            );
            ExitStatus::RuntimeError
        }
        TraceStatus::StepLimit => {
            let _ = writeln!(
                err,
                "{}: stopped after the step limit of {} frames",
                file.display(),
                limits.max_frames
            );
            ExitStatus::RuntimeError
        }
    }
}

pub fn run(file: &Path, limits: RunLimits, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus {
    let (_, compiled) = match load(file, err) {
        Ok(loaded) => loaded,
        Err(status) => return status,
    };
    let trace = compiled.run(limits);
    for event in &trace.output {
        if let Err(e) = writeln!(out, "{}", event.text) {
            let _ = writeln!(err, "error writing output: {e}");
            return ExitStatus::Io;
        }
    }
    report_outcome(file, &trace, limits, err)
}

/// Writes the canonical trace document, followed by a newline, to `dest`
/// (a file) or to `out`.
pub fn trace(
    file: &Path,
    limits: RunLimits,
    dest: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> ExitStatus {
    let (_, compiled) = match load(file, err) {
        Ok(loaded) => loaded,
        Err(status) => return status,
    };
    let trace = compiled.run(limits);
    let mut doc = wire::trace_document(&trace);
    doc.push('\n');
    let written = match dest {
        Some(path) => fs::write(path, &doc).map_err(|e| (path.display().to_string(), e)),
        None => out
            .write_all(doc.as_bytes())
            .and_then(|()| out.flush())
            .map_err(|e| ("standard output".to_string(), e)),
    };
    if let Err((target, e)) = written {
        let _ = writeln!(err, "error writing {target}: {e}");
        return ExitStatus::Io;
    }
    report_outcome(file, &trace, limits, err)
}

/// Runs the interactive debugger over `input`/`out`.
pub fn debug(
    file: &Path,
    input: &mut dyn io::BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> ExitStatus {
    let (source, compiled) = match load(file, err) {
        Ok(loaded) => loaded,
        Err(status) => return status,
    };
    let trace = compiled.run(RunLimits::default());
    match debugger::repl(&source, trace, input, out) {
        Ok(()) => ExitStatus::Success,
        Err(e) => {
            let _ = writeln!(err, "debugger I/O error: {e}");
            ExitStatus::Io
        }
    }
}
