//! Compile-time diagnostics shared by the lexer, parser and analyzer.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

/// A 1-based position in normalized (LF-only) source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl Pos {
    pub const fn new(line: u32, column: u32) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Lexical,
    Syntax,
    Semantic,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Lexical => "lexical",
            Phase::Syntax => "syntax",
            Phase::Semantic => "semantic",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stable diagnostic codes. The string form (`E-LEX-1`, ...) is part of the
/// public interface and must never be renumbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    /// Character outside the language alphabet.
    UnknownCharacter,
    /// `:` not followed by `=`.
    LoneColon,
    /// Integer literal outside the signed 64-bit range.
    IntegerOverflow,
    UnexpectedToken,
    ChainedComparison,
    MissingEnd,
    NestingTooDeep,
    UnknownFunction,
    ArityMismatch,
    DuplicateFunction,
    DuplicateParameter,
    ReturnInMain,
    BuiltinRedefined,
    AssignToFunction,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::UnknownCharacter => "E-LEX-1",
            ErrorCode::LoneColon => "E-LEX-2",
            ErrorCode::IntegerOverflow => "E-LEX-3",
            ErrorCode::UnexpectedToken => "E-SYN-1",
            ErrorCode::ChainedComparison => "E-SYN-2",
            ErrorCode::MissingEnd => "E-SYN-3",
            ErrorCode::NestingTooDeep => "E-SYN-4",
            ErrorCode::UnknownFunction => "E-SEM-1",
            ErrorCode::ArityMismatch => "E-SEM-2",
            ErrorCode::DuplicateFunction => "E-SEM-3",
            ErrorCode::DuplicateParameter => "E-SEM-4",
            ErrorCode::ReturnInMain => "E-SEM-5",
            ErrorCode::BuiltinRedefined => "E-SEM-6",
            ErrorCode::AssignToFunction => "E-SEM-7",
        }
    }

    pub fn phase(self) -> Phase {
        use ErrorCode::*;
        match self {
            UnknownCharacter | LoneColon | IntegerOverflow => Phase::Lexical,
            UnexpectedToken | ChainedComparison | MissingEnd | NestingTooDeep => Phase::Syntax,
            UnknownFunction | ArityMismatch | DuplicateFunction | DuplicateParameter
            | ReturnInMain | BuiltinRedefined | AssignToFunction => Phase::Semantic,
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ErrorCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// A lexical, syntax or semantic diagnostic.
///
/// Serializes with the field order `phase, code, line, column, message`.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{line}:{column}: {phase}: {message} [{code}]")]
pub struct CompileError {
    pub phase: Phase,
    pub code: ErrorCode,
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl CompileError {
    pub fn new(code: ErrorCode, pos: Pos, message: impl Into<String>) -> Self {
        Self {
            phase: code.phase(),
            code,
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }

    pub fn pos(&self) -> Pos {
        Pos::new(self.line, self.column)
    }
}
