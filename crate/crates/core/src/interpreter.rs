//! Frame-recording tree-walking interpreter.
//!
//! Each statement kind has its own evaluation routine, and every one of
//! them emits a [`Frame`] before doing any work: assignments, call
//! statements and returns once, `if` once before its condition, and `while`
//! once before every evaluation of its condition (the final, failing one
//! included). When the main block finishes a terminal frame with line 0 is
//! emitted. Frames go to the trace recorder first and then to every extra
//! observer, in registration order, before execution resumes.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::analyzer::SymbolTable;
use crate::ast::*;
use crate::tree_store::{ForestSnapshot, NodeEntry, NodeId, NodeStore, Side, TreeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Node(NodeId),
    Nil,
}

impl Value {
    fn type_name(self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Bool(_) => "boolean",
            Value::Node(_) => "node",
            Value::Nil => "nil",
        }
    }
}

/// Formatting used by `print`.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Node(id) => write!(f, "node#{id}"),
            Value::Nil => f.write_str("nil"),
        }
    }
}

/// One animation step.
///
/// Serializes as `{"step","line","roots","selected","nodes"}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub step: usize,
    /// Line about to execute; 0 on the terminal frame.
    pub line: u32,
    pub snapshot: Arc<ForestSnapshot>,
}

impl Frame {
    pub fn roots(&self) -> &[NodeId] {
        &self.snapshot.roots
    }

    pub fn selected(&self) -> Option<NodeId> {
        self.snapshot.selected
    }

    pub fn nodes(&self) -> &[NodeEntry] {
        &self.snapshot.nodes
    }
}

impl Serialize for Frame {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Frame", 5)?;
        s.serialize_field("step", &self.step)?;
        s.serialize_field("line", &self.line)?;
        s.serialize_field("roots", &self.snapshot.roots)?;
        s.serialize_field("selected", &self.snapshot.selected)?;
        s.serialize_field("nodes", &self.snapshot.nodes)?;
        s.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Completed,
    RuntimeError,
    StepLimit,
}

impl TraceStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceStatus::Completed => "completed",
            TraceStatus::RuntimeError => "runtime_error",
            TraceStatus::StepLimit => "step_limit",
        }
    }
}

impl fmt::Display for TraceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuntimeErrorCode {
    /// Read of an unassigned variable.
    Unassigned,
    /// Nil or dead node where a node is required.
    NotANode,
    AlreadyAttached,
    Cycle,
    Type,
    DivisionByZero,
    /// Frame budget exhausted; surfaces as [`TraceStatus::StepLimit`].
    StepLimit,
    NodeLimit,
    Overflow,
    CallDepth,
}

impl RuntimeErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            RuntimeErrorCode::Unassigned => "R-1",
            RuntimeErrorCode::NotANode => "R-2",
            RuntimeErrorCode::AlreadyAttached => "R-3",
            RuntimeErrorCode::Cycle => "R-4",
            RuntimeErrorCode::Type => "R-5",
            RuntimeErrorCode::DivisionByZero => "R-6",
            RuntimeErrorCode::StepLimit => "R-7",
            RuntimeErrorCode::NodeLimit => "R-8",
            RuntimeErrorCode::Overflow => "R-9",
            RuntimeErrorCode::CallDepth => "R-10",
        }
    }
}

impl fmt::Display for RuntimeErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for RuntimeErrorCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// Serializes as `{"code","message","line"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("line {line}: {message} [{code}]")]
pub struct RuntimeError {
    pub code: RuntimeErrorCode,
    pub message: String,
    /// Line of the statement that was executing.
    pub line: u32,
}

/// A `print` event, tagged with the step of the frame preceding it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputEvent {
    pub step: usize,
    pub text: String,
}

/// A complete recorded execution. Serializes as
/// `{"frames","status","error","output"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub frames: Vec<Frame>,
    pub status: TraceStatus,
    pub error: Option<RuntimeError>,
    pub output: Vec<OutputEvent>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn lines(&self) -> impl Iterator<Item = u32> + '_ {
        self.frames.iter().map(|f| f.line)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunLimits {
    pub max_frames: usize,
    pub max_nodes: usize,
    pub max_call_depth: usize,
}

impl RunLimits {
    pub const DEFAULT_MAX_FRAMES: usize = 100_000;
    pub const DEFAULT_MAX_NODES: usize = 10_000;
    pub const DEFAULT_MAX_CALL_DEPTH: usize = 1_000;

    /// Limits with the given frame and node budgets, clamped to at least 1.
    pub fn new(max_frames: usize, max_nodes: usize) -> Self {
        Self {
            max_frames: max_frames.max(1),
            max_nodes: max_nodes.max(1),
            ..Self::default()
        }
    }
}

impl Default for RunLimits {
    fn default() -> Self {
        Self {
            max_frames: Self::DEFAULT_MAX_FRAMES,
            max_nodes: Self::DEFAULT_MAX_NODES,
            max_call_depth: Self::DEFAULT_MAX_CALL_DEPTH,
        }
    }
}

/// Receives every frame as it is emitted.
pub trait FrameObserver {
    fn on_frame(&mut self, frame: &Frame);
}

impl<F: FnMut(&Frame)> FrameObserver for F {
    fn on_frame(&mut self, frame: &Frame) {
        self(frame)
    }
}

/// Runs an analyzed program to completion, error, or the frame limit.
pub fn execute(
    program: &Program,
    table: &SymbolTable,
    limits: RunLimits,
    observers: &mut [&mut dyn FrameObserver],
) -> Trace {
    let functions = program
        .functions
        .iter()
        .map(|f| (f.name.name.as_str(), f))
        .collect();
    debug_assert!(program
        .functions
        .iter()
        .all(|f| table.function(&f.name.name).is_some_and(|i| !i.is_builtin)));

    let mut machine = Machine {
        functions,
        limits,
        store: NodeStore::new(),
        frames: Vec::new(),
        output: Vec::new(),
        observers,
        depth: 0,
    };
    let mut env = Env::new();
    let outcome = machine
        .exec_block(&program.main, &mut env)
        .and_then(|()| machine.emit_frame(0).map_err(Unwind::from));

    let (status, error) = match outcome {
        Ok(()) => (TraceStatus::Completed, None),
        Err(Unwind::Stop(Stop::StepLimit)) => (TraceStatus::StepLimit, None),
        Err(Unwind::Stop(Stop::Error(err))) => (TraceStatus::RuntimeError, Some(err)),
        Err(Unwind::Return(_)) => unreachable!("analyzer rejects `return` in main"),
    };
    Trace {
        frames: machine.frames,
        status,
        error,
        output: machine.output,
    }
}

type Env = HashMap<String, Value>;

// Each user call grows the native stack on demand, so the call depth limit
// (not the caller's thread stack size) bounds recursion.
const STACK_RED_ZONE: usize = 64 * 1024;
const STACK_SEGMENT: usize = 1024 * 1024;

enum Stop {
    Error(RuntimeError),
    StepLimit,
}

enum Unwind {
    Return(Value),
    Stop(Stop),
}

impl From<Stop> for Unwind {
    fn from(stop: Stop) -> Self {
        Unwind::Stop(stop)
    }
}

fn fail<T>(code: RuntimeErrorCode, line: u32, message: impl Into<String>) -> Result<T, Stop> {
    Err(Stop::Error(RuntimeError {
        code,
        message: message.into(),
        line,
    }))
}

struct Machine<'p, 'o, 'a> {
    functions: HashMap<&'p str, &'p FunctionDef>,
    limits: RunLimits,
    store: NodeStore,
    frames: Vec<Frame>,
    output: Vec<OutputEvent>,
    observers: &'o mut [&'a mut dyn FrameObserver],
    depth: usize,
}

impl<'p> Machine<'p, '_, '_> {
    fn emit_frame(&mut self, line: u32) -> Result<(), Stop> {
        if self.frames.len() >= self.limits.max_frames {
            return Err(Stop::StepLimit);
        }
        let frame = Frame {
            step: self.frames.len(),
            line,
            snapshot: self.store.snapshot(),
        };
        self.frames.push(frame);
        let frame = self.frames.last().expect("just pushed");
        for observer in self.observers.iter_mut() {
            observer.on_frame(frame);
        }
        Ok(())
    }

    fn exec_block(&mut self, stmts: &'p [Stmt], env: &mut Env) -> Result<(), Unwind> {
        for stmt in stmts {
            self.exec_stmt(stmt, env)?;
        }
        Ok(())
    }

    fn exec_stmt(&mut self, stmt: &'p Stmt, env: &mut Env) -> Result<(), Unwind> {
        let line = stmt.line();
        match &stmt.kind {
            StmtKind::Assign { target, value } => self.exec_assign(line, target, value, env),
            StmtKind::Call(call) => self.exec_call(line, call, env),
            StmtKind::Return(value) => self.exec_return(line, value.as_ref(), env),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => self.exec_if(line, cond, then_branch, else_branch, env),
            StmtKind::While { cond, body } => self.exec_while(line, cond, body, env),
        }
    }

    fn exec_assign(
        &mut self,
        line: u32,
        target: &Ident,
        value: &'p Expr,
        env: &mut Env,
    ) -> Result<(), Unwind> {
        self.emit_frame(line)?;
        let v = self.eval(value, env, line)?;
        env.insert(target.name.clone(), v);
        Ok(())
    }

    fn exec_call(&mut self, line: u32, call: &'p Call, env: &mut Env) -> Result<(), Unwind> {
        self.emit_frame(line)?;
        self.eval_call(call, env, line)?;
        Ok(())
    }

    fn exec_return(
        &mut self,
        line: u32,
        value: Option<&'p Expr>,
        env: &mut Env,
    ) -> Result<(), Unwind> {
        self.emit_frame(line)?;
        let v = match value {
            Some(expr) => self.eval(expr, env, line)?,
            None => Value::Nil,
        };
        Err(Unwind::Return(v))
    }

    fn exec_if(
        &mut self,
        line: u32,
        cond: &'p Expr,
        then_branch: &'p [Stmt],
        else_branch: &'p [Stmt],
        env: &mut Env,
    ) -> Result<(), Unwind> {
        self.emit_frame(line)?;
        if self.eval_condition(cond, env, line)? {
            self.exec_block(then_branch, env)
        } else {
            self.exec_block(else_branch, env)
        }
    }

    fn exec_while(
        &mut self,
        line: u32,
        cond: &'p Expr,
        body: &'p [Stmt],
        env: &mut Env,
    ) -> Result<(), Unwind> {
        loop {
            self.emit_frame(line)?;
            if !self.eval_condition(cond, env, line)? {
                return Ok(());
            }
            self.exec_block(body, env)?;
        }
    }

    fn eval_condition(&mut self, cond: &'p Expr, env: &mut Env, line: u32) -> Result<bool, Stop> {
        match self.eval(cond, env, line)? {
            Value::Bool(b) => Ok(b),
            other => fail(
                RuntimeErrorCode::Type,
                line,
                format!("condition must be a boolean, got {}", other.type_name()),
            ),
        }
    }

    fn eval(&mut self, expr: &'p Expr, env: &mut Env, line: u32) -> Result<Value, Stop> {
        match &expr.kind {
            ExprKind::Int(n) => Ok(Value::Int(*n)),
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Nil => Ok(Value::Nil),
            ExprKind::Var(name) => match env.get(name) {
                Some(v) => Ok(*v),
                None => fail(
                    RuntimeErrorCode::Unassigned,
                    line,
                    format!("variable `{name}` is read before it is assigned"),
                ),
            },
            ExprKind::Call(call) => self.eval_call(call, env, line),
            ExprKind::Unary(op, operand) => {
                let v = self.eval(operand, env, line)?;
                match (op, v) {
                    (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (UnaryOp::Negate, Value::Int(n)) => match n.checked_neg() {
                        Some(r) => Ok(Value::Int(r)),
                        None => fail(
                            RuntimeErrorCode::Overflow,
                            line,
                            format!("overflow negating {n}"),
                        ),
                    },
                    (UnaryOp::Not, v) => fail(
                        RuntimeErrorCode::Type,
                        line,
                        format!("`not` needs a boolean, got {}", v.type_name()),
                    ),
                    (UnaryOp::Negate, v) => fail(
                        RuntimeErrorCode::Type,
                        line,
                        format!("`-` needs an integer, got {}", v.type_name()),
                    ),
                }
            }
            ExprKind::Binary(BinaryOp::And, lhs, rhs) => {
                if self.eval_bool_operand(BinaryOp::And, lhs, env, line)? {
                    self.eval_bool_operand(BinaryOp::And, rhs, env, line)
                        .map(Value::Bool)
                } else {
                    Ok(Value::Bool(false))
                }
            }
            ExprKind::Binary(BinaryOp::Or, lhs, rhs) => {
                if self.eval_bool_operand(BinaryOp::Or, lhs, env, line)? {
                    Ok(Value::Bool(true))
                } else {
                    self.eval_bool_operand(BinaryOp::Or, rhs, env, line)
                        .map(Value::Bool)
                }
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let l = self.eval(lhs, env, line)?;
                let r = self.eval(rhs, env, line)?;
                binary(*op, l, r, line)
            }
        }
    }

    fn eval_bool_operand(
        &mut self,
        op: BinaryOp,
        expr: &'p Expr,
        env: &mut Env,
        line: u32,
    ) -> Result<bool, Stop> {
        match self.eval(expr, env, line)? {
            Value::Bool(b) => Ok(b),
            v => fail(
                RuntimeErrorCode::Type,
                line,
                format!("`{}` needs booleans, got {}", op.symbol(), v.type_name()),
            ),
        }
    }

    fn eval_call(&mut self, call: &'p Call, env: &mut Env, line: u32) -> Result<Value, Stop> {
        let mut args = Vec::with_capacity(call.args.len());
        for arg in &call.args {
            args.push(self.eval(arg, env, line)?);
        }
        match self.functions.get(call.name.name.as_str()) {
            Some(func) => self.call_user(func, args, line),
            None => self.call_builtin(&call.name.name, &args, line),
        }
    }

    fn call_user(
        &mut self,
        func: &'p FunctionDef,
        args: Vec<Value>,
        line: u32,
    ) -> Result<Value, Stop> {
        if self.depth >= self.limits.max_call_depth {
            return fail(
                RuntimeErrorCode::CallDepth,
                line,
                format!(
                    "call depth exceeds {} while calling `{}`",
                    self.limits.max_call_depth, func.name.name
                ),
            );
        }
        let mut locals: Env = func
            .params
            .iter()
            .map(|p| p.name.clone())
            .zip(args)
            .collect();
        self.depth += 1;
        let result = stacker::maybe_grow(STACK_RED_ZONE, STACK_SEGMENT, || {
            self.exec_block(&func.body, &mut locals)
        });
        self.depth -= 1;
        match result {
            Ok(()) => Ok(Value::Nil),
            Err(Unwind::Return(v)) => Ok(v),
            Err(Unwind::Stop(stop)) => Err(stop),
        }
    }

    fn call_builtin(&mut self, name: &str, args: &[Value], line: u32) -> Result<Value, Stop> {
        let result = match (name, args) {
            ("newNode", &[v]) => {
                let value = expect_int(name, v, line)?;
                if self.store.len() >= self.limits.max_nodes {
                    return fail(
                        RuntimeErrorCode::NodeLimit,
                        line,
                        format!("node count would exceed {}", self.limits.max_nodes),
                    );
                }
                let id = self.store.alloc(value);
                self.select(id, line)?;
                Value::Node(id)
            }
            ("value", &[n]) => {
                let id = self.expect_node(name, n, line)?;
                self.select(id, line)?;
                Value::Int(self.store.value(id).map_err(|e| tree_error(e, line))?)
            }
            ("setValue", &[n, v]) => {
                let id = self.expect_node(name, n, line)?;
                let value = expect_int(name, v, line)?;
                self.store
                    .set_value(id, value)
                    .map_err(|e| tree_error(e, line))?;
                self.select(id, line)?;
                Value::Nil
            }
            ("left" | "right", &[n]) => {
                let id = self.expect_node(name, n, line)?;
                let side = if name == "left" {
                    Side::Left
                } else {
                    Side::Right
                };
                let child = self
                    .store
                    .child(id, side)
                    .map_err(|e| tree_error(e, line))?;
                self.select(id, line)?;
                child.map_or(Value::Nil, Value::Node)
            }
            ("setLeft" | "setRight", &[n, c]) => {
                let id = self.expect_node(name, n, line)?;
                let child = match c {
                    Value::Node(c) => Some(c),
                    Value::Nil => None,
                    other => {
                        return fail(
                            RuntimeErrorCode::Type,
                            line,
                            format!(
                                "`{name}` needs a node or nil child, got {}",
                                other.type_name()
                            ),
                        )
                    }
                };
                let side = if name == "setLeft" {
                    Side::Left
                } else {
                    Side::Right
                };
                self.store
                    .set_child(id, side, child)
                    .map_err(|e| tree_error(e, line))?;
                self.select(id, line)?;
                Value::Nil
            }
            ("select", &[n]) => {
                let target = match n {
                    Value::Node(id) => Some(id),
                    Value::Nil => None,
                    other => {
                        return fail(
                            RuntimeErrorCode::Type,
                            line,
                            format!("`select` needs a node or nil, got {}", other.type_name()),
                        )
                    }
                };
                self.store.select(target).map_err(|e| tree_error(e, line))?;
                Value::Nil
            }
            ("isNil", &[v]) => Value::Bool(v == Value::Nil),
            ("print", &[v]) => {
                // Prints belong to the most recent frame, which always
                // exists because a statement is executing.
                let step = self.frames.len().saturating_sub(1);
                self.output.push(OutputEvent {
                    step,
                    text: v.to_string(),
                });
                Value::Nil
            }
            _ => unreachable!("analyzer resolves every call: `{name}`/{}", args.len()),
        };
        Ok(result)
    }

    fn select(&mut self, id: NodeId, line: u32) -> Result<(), Stop> {
        self.store.select(Some(id)).map_err(|e| tree_error(e, line))
    }

    fn expect_node(&self, builtin: &str, v: Value, line: u32) -> Result<NodeId, Stop> {
        match v {
            Value::Node(id) if self.store.contains(id) => Ok(id),
            Value::Node(id) => fail(
                RuntimeErrorCode::NotANode,
                line,
                format!("`{builtin}` got dead node {id}"),
            ),
            Value::Nil => fail(
                RuntimeErrorCode::NotANode,
                line,
                format!("`{builtin}` needs a node, got nil"),
            ),
            other => fail(
                RuntimeErrorCode::Type,
                line,
                format!("`{builtin}` needs a node, got {}", other.type_name()),
            ),
        }
    }
}

fn expect_int(builtin: &str, v: Value, line: u32) -> Result<i64, Stop> {
    match v {
        Value::Int(n) => Ok(n),
        other => fail(
            RuntimeErrorCode::Type,
            line,
            format!(
                "`{builtin}` needs an integer value, got {}",
                other.type_name()
            ),
        ),
    }
}

fn tree_error(err: TreeError, line: u32) -> Stop {
    let code = match err {
        TreeError::NotLive(_) => RuntimeErrorCode::NotANode,
        TreeError::AlreadyAttached { .. } => RuntimeErrorCode::AlreadyAttached,
        TreeError::Cycle { .. } => RuntimeErrorCode::Cycle,
    };
    Stop::Error(RuntimeError {
        code,
        message: err.to_string(),
        line,
    })
}

fn binary(op: BinaryOp, l: Value, r: Value, line: u32) -> Result<Value, Stop> {
    use BinaryOp::*;
    match (op, l, r) {
        (Eq | Ne, l, r) => {
            let equal = match (l, r) {
                (Value::Int(a), Value::Int(b)) => a == b,
                (Value::Bool(a), Value::Bool(b)) => a == b,
                (Value::Node(_) | Value::Nil, Value::Node(_) | Value::Nil) => l == r,
                _ => {
                    return fail(
                        RuntimeErrorCode::Type,
                        line,
                        format!("cannot compare {} with {}", l.type_name(), r.type_name()),
                    )
                }
            };
            Ok(Value::Bool(equal == (op == Eq)))
        }
        (_, Value::Int(a), Value::Int(b)) => {
            let result = match op {
                Lt => return Ok(Value::Bool(a < b)),
                Le => return Ok(Value::Bool(a <= b)),
                Gt => return Ok(Value::Bool(a > b)),
                Ge => return Ok(Value::Bool(a >= b)),
                Add => a.checked_add(b),
                Sub => a.checked_sub(b),
                Mul => a.checked_mul(b),
                Div | Mod if b == 0 => {
                    return fail(
                        RuntimeErrorCode::DivisionByZero,
                        line,
                        format!("`{}` by zero", op.symbol()),
                    )
                }
                // Truncates toward zero.
                Div => a.checked_div(b),
                // Takes the dividend's sign; MIN mod -1 is 0.
                Mod => Some(a.wrapping_rem(b)),
                And | Or | Eq | Ne => unreachable!("handled above"),
            };
            match result {
                Some(n) => Ok(Value::Int(n)),
                None => fail(
                    RuntimeErrorCode::Overflow,
                    line,
                    format!("integer overflow in {a} {} {b}", op.symbol()),
                ),
            }
        }
        (op, l, r) => fail(
            RuntimeErrorCode::Type,
            line,
            format!(
                "`{}` needs integers, got {} and {}",
                op.symbol(),
                l.type_name(),
                r.type_name()
            ),
        ),
    }
}
