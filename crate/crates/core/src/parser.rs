//! Recursive-descent parser building a [`Program`] from tokens.
//!
//! Grammar (`.jalgo` source format):
//!
//! ```text
//! program    = { funcdef } "begin" stmts "end" EOF
//! funcdef    = "function" IDENT "(" [ IDENT { "," IDENT } ] ")" stmts "end"
//! stmts      = { stmt }
//! stmt       = IDENT ":=" expr
//!            | "if" expr "then" stmts [ "else" stmts ] "end"
//!            | "while" expr "do" stmts "end"
//!            | "return" [ expr ]
//!            | IDENT "(" [ expr { "," expr } ] ")"
//! expr       = orexpr ; orexpr = andexpr { "or" andexpr }
//! andexpr    = notexpr { "and" notexpr } ; notexpr = [ "not" ] cmp
//! cmp        = add [ ("="|"<>"|"<"|"<="|">"|">=") add ]
//! add        = mul { ("+"|"-") mul } ; mul = unary { ("*"|"/"|"mod") unary }
//! unary      = [ "-" ] primary
//! primary    = INT | "true" | "false" | "nil" | IDENT
//!            | IDENT "(" [ expr { "," expr } ] ")" | "(" expr ")"
//! ```
//!
//! On a syntax error the parser records it, skips to the next token that
//! can begin a statement or close a block, and keeps going, so one call
//! reports every error it can find.

use crate::ast::*;
use crate::error::{CompileError, ErrorCode, Pos};
use crate::lexer::{Token, TokenKind};

/// Maximum nesting of blocks and parenthesized/unary expressions.
pub const MAX_NESTING: usize = 200;

/// Marker for an error that has already been recorded.
struct Abort;

type PResult<T> = Result<T, Abort>;

/// Parses a token list that ends in `Eof`.
pub fn parse(tokens: &[Token]) -> Result<Program, Vec<CompileError>> {
    assert!(
        tokens.last().is_some_and(|t| t.kind == TokenKind::Eof),
        "token stream must end in Eof"
    );
    let mut parser = Parser {
        tokens,
        cursor: 0,
        depth: 0,
        errors: Vec::new(),
    };
    let program = parser.program();
    match program {
        Some(program) if parser.errors.is_empty() => Ok(program),
        _ => Err(parser.errors),
    }
}

struct Parser<'t> {
    tokens: &'t [Token],
    cursor: usize,
    depth: usize,
    errors: Vec<CompileError>,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.cursor]
    }

    fn peek_kind(&self) -> TokenKind {
        self.peek().kind
    }

    fn peek_second(&self) -> TokenKind {
        self.tokens
            .get(self.cursor + 1)
            .map_or(TokenKind::Eof, |t| t.kind)
    }

    fn advance(&mut self) -> &'t Token {
        let tok = &self.tokens[self.cursor];
        if tok.kind != TokenKind::Eof {
            self.cursor += 1;
        }
        tok
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek_kind() == kind {
            self.advance();
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&mut self, expected: &str) -> PResult<T> {
        let tok = self.peek();
        self.errors.push(CompileError::new(
            ErrorCode::UnexpectedToken,
            tok.pos,
            format!("expected {expected}, found {tok}"),
        ));
        Err(Abort)
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<&'t Token> {
        if self.peek_kind() == kind {
            Ok(self.advance())
        } else {
            self.unexpected(&kind.to_string())
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        let tok = self.expect(TokenKind::Ident)?;
        Ok(Ident {
            name: tok.text.clone(),
            pos: tok.pos,
        })
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            let pos = self.peek().pos;
            self.errors.push(CompileError::new(
                ErrorCode::NestingTooDeep,
                pos,
                format!("nesting deeper than {MAX_NESTING} levels"),
            ));
            return Err(Abort);
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    /// Runs `f` one nesting level deeper.
    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        self.enter()?;
        let result = f(self);
        self.leave();
        result
    }

    fn program(&mut self) -> Option<Program> {
        let mut functions = Vec::new();
        loop {
            match self.peek_kind() {
                TokenKind::Function => match self.funcdef() {
                    Ok(func) => functions.push(func),
                    Err(Abort) => self.skip_to_top_level(),
                },
                TokenKind::Begin => break,
                _ => {
                    let _ = self.unexpected::<()>("`function` or `begin`");
                    self.skip_to_top_level();
                    if self.peek_kind() == TokenKind::Eof {
                        return None;
                    }
                }
            }
        }

        let begin = self.advance();
        let main = self.stmts();
        self.close_block(begin).ok()?;
        if self.peek_kind() != TokenKind::Eof {
            let _ = self.unexpected::<()>("end of input");
            return None;
        }
        Some(Program { functions, main })
    }

    fn skip_to_top_level(&mut self) {
        // Always make progress past the offending token.
        if !matches!(self.peek_kind(), TokenKind::Function | TokenKind::Begin) {
            self.advance();
        }
        while !matches!(
            self.peek_kind(),
            TokenKind::Function | TokenKind::Begin | TokenKind::Eof
        ) {
            self.advance();
        }
    }

    fn funcdef(&mut self) -> PResult<FunctionDef> {
        let keyword = self.expect(TokenKind::Function)?;
        let name = self.ident()?;
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if self.peek_kind() != TokenKind::RParen {
            params.push(self.ident()?);
            while self.eat(TokenKind::Comma) {
                params.push(self.ident()?);
            }
        }
        self.expect(TokenKind::RParen)?;
        let body = self.nested(|p| Ok(p.stmts()))?;
        self.close_block(keyword)?;
        Ok(FunctionDef {
            name,
            params,
            body,
            line: keyword.line(),
        })
    }

    /// Consumes the `end` closing the block opened by `opener`.
    fn close_block(&mut self, opener: &Token) -> PResult<()> {
        match self.peek_kind() {
            TokenKind::End => {
                self.advance();
                Ok(())
            }
            TokenKind::Eof => {
                let pos = self.peek().pos;
                self.errors.push(CompileError::new(
                    ErrorCode::MissingEnd,
                    pos,
                    format!(
                        "missing `end` for `{}` at line {}",
                        opener.text,
                        opener.line()
                    ),
                ));
                Err(Abort)
            }
            _ => self.unexpected("statement or `end`"),
        }
    }

    fn stmts(&mut self) -> Vec<Stmt> {
        let mut stmts = Vec::new();
        loop {
            match self.peek_kind() {
                TokenKind::Ident | TokenKind::If | TokenKind::While | TokenKind::Return => {
                    match self.stmt() {
                        Ok(stmt) => stmts.push(stmt),
                        Err(Abort) => self.skip_to_statement(),
                    }
                }
                _ => return stmts,
            }
        }
    }

    /// Skips to the next token that can start a statement or close a block.
    /// `stmt` always consumes at least one token before failing, so this
    /// cannot stall.
    fn skip_to_statement(&mut self) {
        loop {
            match self.peek_kind() {
                TokenKind::If
                | TokenKind::While
                | TokenKind::Return
                | TokenKind::End
                | TokenKind::Else
                | TokenKind::Function
                | TokenKind::Begin
                | TokenKind::Eof => return,
                TokenKind::Ident if self.peek_second() == TokenKind::Assign => return,
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let first = self.peek();
        let pos = first.pos;
        let kind = match first.kind {
            TokenKind::Ident => match self.peek_second() {
                TokenKind::Assign => {
                    let target = self.ident()?;
                    self.advance();
                    let value = self.expr()?;
                    StmtKind::Assign { target, value }
                }
                TokenKind::LParen => StmtKind::Call(self.call()?),
                _ => {
                    self.advance();
                    return self.unexpected("`:=` or `(`");
                }
            },
            TokenKind::If => {
                let keyword = self.advance();
                let cond = self.expr()?;
                self.expect(TokenKind::Then)?;
                let then_branch = self.nested(|p| Ok(p.stmts()))?;
                let else_branch = if self.eat(TokenKind::Else) {
                    self.nested(|p| Ok(p.stmts()))?
                } else {
                    Vec::new()
                };
                self.close_block(keyword)?;
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            TokenKind::While => {
                let keyword = self.advance();
                let cond = self.expr()?;
                self.expect(TokenKind::Do)?;
                let body = self.nested(|p| Ok(p.stmts()))?;
                self.close_block(keyword)?;
                StmtKind::While { cond, body }
            }
            TokenKind::Return => {
                self.advance();
                if self.peek_kind().starts_expr() {
                    StmtKind::Return(Some(self.expr()?))
                } else {
                    StmtKind::Return(None)
                }
            }
            _ => return self.unexpected("statement"),
        };
        Ok(Stmt { kind, pos })
    }

    fn call(&mut self) -> PResult<Call> {
        let name = self.ident()?;
        self.expect(TokenKind::LParen)?;
        let mut args = Vec::new();
        if self.peek_kind() != TokenKind::RParen {
            args.push(self.expr()?);
            while self.eat(TokenKind::Comma) {
                args.push(self.expr()?);
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(Call { name, args })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.nested(Self::or_expr)
    }

    fn binary_chain(
        &mut self,
        operand: fn(&mut Self) -> PResult<Expr>,
        op_of: fn(TokenKind) -> Option<BinaryOp>,
    ) -> PResult<Expr> {
        let mut lhs = operand(self)?;
        while let Some(op) = op_of(self.peek_kind()) {
            let pos = self.advance().pos;
            let rhs = operand(self)?;
            lhs = binary(op, lhs, rhs, pos);
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        self.binary_chain(Self::and_expr, |k| {
            (k == TokenKind::Or).then_some(BinaryOp::Or)
        })
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        self.binary_chain(Self::not_expr, |k| {
            (k == TokenKind::And).then_some(BinaryOp::And)
        })
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.peek_kind() == TokenKind::Not {
            let pos = self.advance().pos;
            let operand = self.cmp_expr()?;
            Ok(Expr {
                kind: ExprKind::Unary(UnaryOp::Not, Box::new(operand)),
                pos,
            })
        } else {
            self.cmp_expr()
        }
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let Some(op) = comparison_op(self.peek_kind()) else {
            return Ok(lhs);
        };
        let pos = self.advance().pos;
        let rhs = self.add_expr()?;
        let expr = binary(op, lhs, rhs, pos);

        if comparison_op(self.peek_kind()).is_some() {
            let tok = self.peek();
            self.errors.push(CompileError::new(
                ErrorCode::ChainedComparison,
                tok.pos,
                format!("comparison operators do not chain; parenthesize before {tok}"),
            ));
            // Consume the rest of the chain so the error is reported once.
            while comparison_op(self.peek_kind()).is_some() {
                self.advance();
                self.add_expr()?;
            }
        }
        Ok(expr)
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        self.binary_chain(Self::mul_expr, |k| match k {
            TokenKind::Plus => Some(BinaryOp::Add),
            TokenKind::Minus => Some(BinaryOp::Sub),
            _ => None,
        })
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        self.binary_chain(Self::unary_expr, |k| match k {
            TokenKind::Star => Some(BinaryOp::Mul),
            TokenKind::Slash => Some(BinaryOp::Div),
            TokenKind::Mod => Some(BinaryOp::Mod),
            _ => None,
        })
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        if self.peek_kind() == TokenKind::Minus {
            let pos = self.advance().pos;
            let operand = self.primary()?;
            Ok(Expr {
                kind: ExprKind::Unary(UnaryOp::Negate, Box::new(operand)),
                pos,
            })
        } else {
            self.primary()
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.peek();
        let pos = tok.pos;
        let kind = match tok.kind {
            TokenKind::Int => {
                self.advance();
                // The lexer rejects out-of-range literals.
                ExprKind::Int(tok.text.parse().expect("lexer validated integer range"))
            }
            TokenKind::True => {
                self.advance();
                ExprKind::Bool(true)
            }
            TokenKind::False => {
                self.advance();
                ExprKind::Bool(false)
            }
            TokenKind::Nil => {
                self.advance();
                ExprKind::Nil
            }
            TokenKind::Ident if self.peek_second() == TokenKind::LParen => {
                ExprKind::Call(self.call()?)
            }
            TokenKind::Ident => {
                self.advance();
                ExprKind::Var(tok.text.clone())
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                return Ok(inner);
            }
            _ => return self.unexpected("expression"),
        };
        Ok(Expr { kind, pos })
    }
}

fn comparison_op(kind: TokenKind) -> Option<BinaryOp> {
    match kind {
        TokenKind::Eq => Some(BinaryOp::Eq),
        TokenKind::Ne => Some(BinaryOp::Ne),
        TokenKind::Lt => Some(BinaryOp::Lt),
        TokenKind::Le => Some(BinaryOp::Le),
        TokenKind::Gt => Some(BinaryOp::Gt),
        TokenKind::Ge => Some(BinaryOp::Ge),
        _ => None,
    }
}

fn binary(op: BinaryOp, lhs: Expr, rhs: Expr, pos: Pos) -> Expr {
    Expr {
        kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
        pos,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;

    fn parse_src(src: &str) -> Result<Program, Vec<CompileError>> {
        parse(&tokenize(src).expect("lexes"))
    }

    fn codes(src: &str) -> Vec<(&'static str, u32, u32)> {
        parse_src(src)
            .unwrap_err()
            .iter()
            .map(|e| (e.code.as_str(), e.line, e.column))
            .collect()
    }

    #[test]
    fn empty_main() {
        let p = parse_src("begin end").unwrap();
        assert!(p.functions.is_empty());
        assert!(p.main.is_empty());
    }

    #[test]
    fn precedence() {
        let p = parse_src("begin x := 1 + 2 * 3 end").unwrap();
        let StmtKind::Assign { target, value } = &p.main[0].kind else {
            panic!("expected assignment");
        };
        assert_eq!(target.name, "x");
        assert_eq!(value.to_string(), "(1 + (2 * 3))");
    }

    #[test]
    fn boolean_precedence() {
        let p = parse_src("begin x := not a < b and c or d = 1 end").unwrap();
        let StmtKind::Assign { value, .. } = &p.main[0].kind else {
            panic!()
        };
        assert_eq!(value.to_string(), "(((not ((a < b))) and c) or (d = 1))");
    }

    #[test]
    fn left_associative_arithmetic() {
        let p = parse_src("begin x := 10 - 3 - 2 mod 4 / 5 end").unwrap();
        let StmtKind::Assign { value, .. } = &p.main[0].kind else {
            panic!()
        };
        assert_eq!(value.to_string(), "((10 - 3) - ((2 mod 4) / 5))");
    }

    #[test]
    fn if_consumes_only_end() {
        assert_eq!(codes("begin if x then end"), [("E-SYN-3", 1, 20)]);
    }

    #[test]
    fn function_and_call() {
        let p = parse_src("function f(a, b) return a end begin x := f(1, 2) end").unwrap();
        assert_eq!(p.functions.len(), 1);
        assert_eq!(p.functions[0].params.len(), 2);
        assert_eq!(p.main.len(), 1);
    }

    #[test]
    fn chained_comparison() {
        assert_eq!(codes("begin x := a < b < c end"), [("E-SYN-2", 1, 18)]);
    }

    #[test]
    fn bare_return_before_end() {
        let p = parse_src("function f() return end begin f() end").unwrap();
        assert_eq!(p.functions[0].body[0].kind, StmtKind::Return(None));
    }

    #[test]
    fn zero_arg_call_versus_var() {
        let p = parse_src("begin x := f() y := f end").unwrap();
        let StmtKind::Assign { value, .. } = &p.main[0].kind else {
            panic!()
        };
        assert!(matches!(value.kind, ExprKind::Call(_)));
        let StmtKind::Assign { value, .. } = &p.main[1].kind else {
            panic!()
        };
        assert_eq!(value.kind, ExprKind::Var("f".into()));
    }

    #[test]
    fn recovers_and_reports_several_errors() {
        let errs = codes("begin\n x := )\n y := 2\n z := (1\n w(\nend");
        assert_eq!(errs, [("E-SYN-1", 2, 7), ("E-SYN-1", 5, 2)]);
    }

    #[test]
    fn statement_needs_assign_or_call() {
        assert_eq!(codes("begin x end"), [("E-SYN-1", 1, 9)]);
    }

    #[test]
    fn trailing_tokens_after_main() {
        assert_eq!(codes("begin end x"), [("E-SYN-1", 1, 11)]);
    }

    #[test]
    fn missing_begin() {
        assert_eq!(codes("x := 1"), [("E-SYN-1", 1, 1)]);
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let depth = MAX_NESTING + 10;
        let src = format!("begin x := {}1{} end", "(".repeat(depth), ")".repeat(depth));
        let errs = parse_src(&src).unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::NestingTooDeep);
    }

    #[test]
    fn statement_positions() {
        let p = parse_src("begin\n  x := 1\n  while x < 3 do\n    x := x + 1\n  end\nend").unwrap();
        assert_eq!(p.main[0].pos, Pos::new(2, 3));
        assert_eq!(p.main[1].pos, Pos::new(3, 3));
        let StmtKind::While { body, .. } = &p.main[1].kind else {
            panic!()
        };
        assert_eq!(body[0].pos, Pos::new(4, 5));
    }
}
