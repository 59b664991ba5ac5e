//! jAlgo: a small imperative language for animating binary-tree algorithms.
//!
//! Source text goes through [`lexer::tokenize`], [`parser::parse`] and
//! [`analyzer::analyze`]; [`interpreter::execute`] then runs the program and
//! records one [`Frame`] per executed statement. A [`Session`] navigates the
//! finished [`Trace`], and [`wire`] holds the canonical JSON encodings.

pub mod analyzer;
pub mod ast;
pub mod error;
pub mod interpreter;
pub mod lexer;
pub mod parser;
pub mod session;
pub mod tree_store;
pub mod wire;

pub use analyzer::{analyze, SymbolTable};
pub use ast::Program;
pub use error::{CompileError, ErrorCode, Phase, Pos};
pub use interpreter::{
    execute, Frame, FrameObserver, OutputEvent, RunLimits, RuntimeError, RuntimeErrorCode, Trace,
    TraceStatus, Value,
};
pub use session::{Direction, Session, SessionError};
pub use tree_store::{ForestSnapshot, NodeEntry, NodeId, NodeStore, Side, TreeError};

/// A program that passed every static check.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub program: Program,
    pub symbols: SymbolTable,
}

impl Compiled {
    pub fn run(&self, limits: RunLimits) -> Trace {
        execute(&self.program, &self.symbols, limits, &mut [])
    }
}

/// Lexes, parses and analyzes `source`, stopping at the first phase that
/// reports errors.
pub fn compile(source: &str) -> Result<Compiled, Vec<CompileError>> {
    let tokens = lexer::tokenize(source)?;
    let program = parser::parse(&tokens)?;
    let symbols = analyze(&program)?;
    Ok(Compiled { program, symbols })
}
