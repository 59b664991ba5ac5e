//! Semantic checks and symbol table construction.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::*;
use crate::error::{CompileError, ErrorCode, Pos};

/// The fixed builtin library, as `(name, arity)`.
pub const BUILTINS: [(&str, usize); 10] = [
    ("newNode", 1),
    ("value", 1),
    ("setValue", 2),
    ("left", 1),
    ("right", 1),
    ("setLeft", 2),
    ("setRight", 2),
    ("select", 1),
    ("isNil", 1),
    ("print", 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionInfo {
    pub arity: usize,
    pub is_builtin: bool,
    /// Definition line; 0 for builtins.
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolTable {
    pub functions: BTreeMap<String, FunctionInfo>,
    /// Identifiers assigned anywhere in the main block.
    pub main_vars: BTreeSet<String>,
    /// Per user function: parameters plus identifiers assigned in its body.
    pub function_vars: BTreeMap<String, BTreeSet<String>>,
}

impl SymbolTable {
    pub fn function(&self, name: &str) -> Option<&FunctionInfo> {
        self.functions.get(name)
    }
}

/// Checks a parsed program and builds its symbol table. All errors are
/// collected and returned sorted by position.
pub fn analyze(program: &Program) -> Result<SymbolTable, Vec<CompileError>> {
    let mut table = SymbolTable::default();
    for (name, arity) in BUILTINS {
        table.functions.insert(
            name.to_string(),
            FunctionInfo {
                arity,
                is_builtin: true,
                line: 0,
            },
        );
    }

    let mut errors = Vec::new();
    for func in &program.functions {
        let name = &func.name.name;
        match table.functions.get(name) {
            Some(info) if info.is_builtin => errors.push(CompileError::new(
                ErrorCode::BuiltinRedefined,
                func.name.pos,
                format!("function `{name}` redefines a builtin"),
            )),
            Some(info) => errors.push(CompileError::new(
                ErrorCode::DuplicateFunction,
                func.name.pos,
                format!("function `{name}` is already defined at line {}", info.line),
            )),
            None => {
                table.functions.insert(
                    name.clone(),
                    FunctionInfo {
                        arity: func.params.len(),
                        is_builtin: false,
                        line: func.line,
                    },
                );
            }
        }
    }

    let mut checker = Checker {
        table: &table,
        errors: &mut errors,
        vars: BTreeSet::new(),
        in_function: false,
    };
    checker.block(&program.main);
    let main_vars = std::mem::take(&mut checker.vars);

    let mut function_vars = BTreeMap::new();
    for func in &program.functions {
        checker.in_function = true;
        for param in &func.params {
            if !checker.vars.insert(param.name.clone()) {
                checker.errors.push(CompileError::new(
                    ErrorCode::DuplicateParameter,
                    param.pos,
                    format!(
                        "parameter `{}` appears more than once in `{}`",
                        param.name, func.name.name
                    ),
                ));
            }
        }
        checker.block(&func.body);
        let vars = std::mem::take(&mut checker.vars);
        // A duplicate definition keeps the first definition's scope.
        function_vars.entry(func.name.name.clone()).or_insert(vars);
    }

    if !errors.is_empty() {
        errors.sort_by_key(CompileError::pos);
        return Err(errors);
    }
    table.main_vars = main_vars;
    table.function_vars = function_vars;
    Ok(table)
}

struct Checker<'a> {
    table: &'a SymbolTable,
    errors: &'a mut Vec<CompileError>,
    vars: BTreeSet<String>,
    in_function: bool,
}

impl Checker<'_> {
    fn error(&mut self, code: ErrorCode, pos: Pos, message: String) {
        self.errors.push(CompileError::new(code, pos, message));
    }

    fn block(&mut self, stmts: &[Stmt]) {
        for stmt in stmts {
            self.stmt(stmt);
        }
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::Assign { target, value } => {
                if self.table.functions.contains_key(&target.name) {
                    self.error(
                        ErrorCode::AssignToFunction,
                        target.pos,
                        format!("cannot assign to `{}`: it names a function", target.name),
                    );
                }
                self.vars.insert(target.name.clone());
                self.expr(value);
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.expr(cond);
                self.block(then_branch);
                self.block(else_branch);
            }
            StmtKind::While { cond, body } => {
                self.expr(cond);
                self.block(body);
            }
            StmtKind::Return(value) => {
                if !self.in_function {
                    self.error(
                        ErrorCode::ReturnInMain,
                        stmt.pos,
                        "`return` outside of a function".to_string(),
                    );
                }
                if let Some(value) = value {
                    self.expr(value);
                }
            }
            StmtKind::Call(call) => self.call(call),
        }
    }

    fn call(&mut self, call: &Call) {
        let name = &call.name.name;
        match self.table.functions.get(name) {
            None => self.error(
                ErrorCode::UnknownFunction,
                call.name.pos,
                format!("unknown function `{name}`"),
            ),
            Some(info) if info.arity != call.args.len() => self.error(
                ErrorCode::ArityMismatch,
                call.name.pos,
                format!(
                    "`{name}` expects {} argument{}, got {}",
                    info.arity,
                    if info.arity == 1 { "" } else { "s" },
                    call.args.len()
                ),
            ),
            Some(_) => {}
        }
        for arg in &call.args {
            self.expr(arg);
        }
    }

    fn expr(&mut self, expr: &Expr) {
        match &expr.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Nil | ExprKind::Var(_) => {}
            ExprKind::Call(call) => self.call(call),
            ExprKind::Unary(_, operand) => self.expr(operand),
            ExprKind::Binary(_, lhs, rhs) => {
                self.expr(lhs);
                self.expr(rhs);
            }
        }
    }
}
