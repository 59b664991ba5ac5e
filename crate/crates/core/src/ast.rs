//! Abstract tree produced by the parser.
//!
//! `Display` on [`Program`] emits canonical source: one statement per line,
//! two-space indentation, and every compound expression fully parenthesized.
//! Re-parsing that text yields a structurally equal program.

use std::fmt;

use crate::error::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub functions: Vec<FunctionDef>,
    pub main: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: Ident,
    pub params: Vec<Ident>,
    pub body: Vec<Stmt>,
    /// Line of the `function` keyword.
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    /// Position of the statement's first token.
    pub pos: Pos,
}

impl Stmt {
    pub fn line(&self) -> u32 {
        self.pos.line
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign {
        target: Ident,
        value: Expr,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Call(Call),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Call {
    pub name: Ident,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Nil,
    Var(String),
    Call(Call),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Negate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "or",
            BinaryOp::And => "and",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Mod => "mod",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for func in &self.functions {
            let params: Vec<&str> = func.params.iter().map(|p| p.name.as_str()).collect();
            writeln!(f, "function {}({})", func.name.name, params.join(", "))?;
            write_block(f, &func.body, 1)?;
            writeln!(f, "end")?;
        }
        writeln!(f, "begin")?;
        write_block(f, &self.main, 1)?;
        writeln!(f, "end")
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, stmts: &[Stmt], depth: usize) -> fmt::Result {
    for stmt in stmts {
        write_stmt(f, stmt, depth)?;
    }
    Ok(())
}

fn write_stmt(f: &mut fmt::Formatter<'_>, stmt: &Stmt, depth: usize) -> fmt::Result {
    let indent = "  ".repeat(depth);
    match &stmt.kind {
        StmtKind::Assign { target, value } => writeln!(f, "{indent}{} := {value}", target.name),
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            writeln!(f, "{indent}if {cond} then")?;
            write_block(f, then_branch, depth + 1)?;
            if !else_branch.is_empty() {
                writeln!(f, "{indent}else")?;
                write_block(f, else_branch, depth + 1)?;
            }
            writeln!(f, "{indent}end")
        }
        StmtKind::While { cond, body } => {
            writeln!(f, "{indent}while {cond} do")?;
            write_block(f, body, depth + 1)?;
            writeln!(f, "{indent}end")
        }
        StmtKind::Return(Some(value)) => writeln!(f, "{indent}return {value}"),
        StmtKind::Return(None) => writeln!(f, "{indent}return"),
        StmtKind::Call(call) => writeln!(f, "{indent}{call}"),
    }
}

impl fmt::Display for Call {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name.name)?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{arg}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Int(n) => write!(f, "{n}"),
            ExprKind::Bool(b) => write!(f, "{b}"),
            ExprKind::Nil => f.write_str("nil"),
            ExprKind::Var(name) => f.write_str(name),
            ExprKind::Call(call) => call.fmt(f),
            ExprKind::Unary(UnaryOp::Not, operand) => write!(f, "(not ({operand}))"),
            ExprKind::Unary(UnaryOp::Negate, operand) => write!(f, "(-({operand}))"),
            ExprKind::Binary(op, lhs, rhs) => write!(f, "({lhs} {} {rhs})", op.symbol()),
        }
    }
}
