//! Tokenizer for `.jalgo` source text.

use std::fmt;

use crate::error::{CompileError, ErrorCode, Pos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    // keywords
    Function,
    Begin,
    End,
    If,
    Then,
    Else,
    While,
    Do,
    Return,
    And,
    Or,
    Not,
    True,
    False,
    Nil,
    Mod,

    Ident,
    Int,

    // symbols
    Assign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,

    Eof,
}

const KEYWORDS: [(&str, TokenKind); 16] = [
    ("function", TokenKind::Function),
    ("begin", TokenKind::Begin),
    ("end", TokenKind::End),
    ("if", TokenKind::If),
    ("then", TokenKind::Then),
    ("else", TokenKind::Else),
    ("while", TokenKind::While),
    ("do", TokenKind::Do),
    ("return", TokenKind::Return),
    ("and", TokenKind::And),
    ("or", TokenKind::Or),
    ("not", TokenKind::Not),
    ("true", TokenKind::True),
    ("false", TokenKind::False),
    ("nil", TokenKind::Nil),
    ("mod", TokenKind::Mod),
];

impl TokenKind {
    pub fn keyword(word: &str) -> Option<TokenKind> {
        KEYWORDS
            .iter()
            .find(|(kw, _)| *kw == word)
            .map(|&(_, kind)| kind)
    }

    pub fn is_keyword(self) -> bool {
        KEYWORDS.iter().any(|&(_, kind)| kind == self)
    }

    /// Fixed spelling of keywords and symbols; `None` for identifiers,
    /// integers and end of input.
    pub fn fixed_text(self) -> Option<&'static str> {
        use TokenKind::*;
        if let Some((kw, _)) = KEYWORDS.iter().find(|&&(_, kind)| kind == self) {
            return Some(kw);
        }
        Some(match self {
            Assign => ":=",
            Eq => "=",
            Ne => "<>",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Plus => "+",
            Minus => "-",
            Star => "*",
            Slash => "/",
            LParen => "(",
            RParen => ")",
            Comma => ",",
            _ => return None,
        })
    }

    /// Whether a token of this kind can begin an expression.
    pub fn starts_expr(self) -> bool {
        use TokenKind::*;
        matches!(
            self,
            Int | True | False | Nil | Ident | LParen | Minus | Not
        )
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.fixed_text() {
            Some(text) => write!(f, "`{text}`"),
            None => f.write_str(match self {
                TokenKind::Ident => "identifier",
                TokenKind::Int => "integer",
                _ => "end of input",
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub pos: Pos,
}

impl Token {
    pub fn line(&self) -> u32 {
        self.pos.line
    }

    pub fn column(&self) -> u32 {
        self.pos.column
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Ident | TokenKind::Int => write!(f, "{} `{}`", self.kind, self.text),
            kind => kind.fmt(f),
        }
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn pos(&self) -> Pos {
        Pos::new(self.line, self.column)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, buf: &mut String, pred: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            buf.push(c);
            self.bump();
        }
    }
}

/// Splits `source` into tokens terminated by a single `Eof` token.
///
/// Line breaks may be LF or CRLF; CRLF pairs are folded to LF before
/// positions are counted, and every character (tabs included) is one column.
/// Lexing continues past errors so that all of them are reported together.
pub fn tokenize(source: &str) -> Result<Vec<Token>, Vec<CompileError>> {
    let normalized = source.replace("\r\n", "\n");
    let mut cur = Cursor {
        chars: normalized.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut text = String::new();
            cur.eat_while(&mut text, |c| c.is_ascii_alphanumeric() || c == '_');
            let kind = TokenKind::keyword(&text).unwrap_or(TokenKind::Ident);
            tokens.push(Token { kind, text, pos });
            continue;
        }
        if c.is_ascii_digit() {
            let mut text = String::new();
            cur.eat_while(&mut text, |c| c.is_ascii_digit());
            if text.parse::<i64>().is_err() {
                errors.push(CompileError::new(
                    ErrorCode::IntegerOverflow,
                    pos,
                    format!("integer literal `{text}` does not fit in 64 bits"),
                ));
            }
            tokens.push(Token {
                kind: TokenKind::Int,
                text,
                pos,
            });
            continue;
        }

        cur.bump();
        let kind = match c {
            ':' => {
                if cur.peek() == Some('=') {
                    cur.bump();
                    Some(TokenKind::Assign)
                } else {
                    errors.push(CompileError::new(
                        ErrorCode::LoneColon,
                        pos,
                        "expected `=` after `:`",
                    ));
                    None
                }
            }
            '<' => match cur.peek() {
                Some('=') => {
                    cur.bump();
                    Some(TokenKind::Le)
                }
                Some('>') => {
                    cur.bump();
                    Some(TokenKind::Ne)
                }
                _ => Some(TokenKind::Lt),
            },
            '>' => {
                if cur.peek() == Some('=') {
                    cur.bump();
                    Some(TokenKind::Ge)
                } else {
                    Some(TokenKind::Gt)
                }
            }
            '=' => Some(TokenKind::Eq),
            '+' => Some(TokenKind::Plus),
            '-' => Some(TokenKind::Minus),
            '*' => Some(TokenKind::Star),
            '/' => Some(TokenKind::Slash),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            ',' => Some(TokenKind::Comma),
            other => {
                errors.push(CompileError::new(
                    ErrorCode::UnknownCharacter,
                    pos,
                    format!("unknown character `{}`", other.escape_debug()),
                ));
                None
            }
        };
        if let Some(kind) = kind {
            let text = kind.fixed_text().unwrap_or_default().to_string();
            tokens.push(Token { kind, text, pos });
        }
    }

    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        pos: cur.pos(),
    });

    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    fn positions(src: &str) -> Vec<(u32, u32)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.line(), t.column()))
            .collect()
    }

    #[test]
    fn simple_assignment() {
        let toks = tokenize("x := 1").unwrap();
        assert_eq!(
            toks.iter().map(|t| t.kind).collect::<Vec<_>>(),
            [Ident, Assign, Int, Eof]
        );
        assert_eq!(toks[0].text, "x");
        assert_eq!(toks[2].text, "1");
        assert_eq!(positions("x := 1"), [(1, 1), (1, 3), (1, 6), (1, 7)]);
    }

    #[test]
    fn empty_source_is_just_eof() {
        let toks = tokenize("").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!((toks[0].kind, toks[0].pos), (Eof, Pos::new(1, 1)));
    }

    #[test]
    fn unknown_character() {
        let errs = tokenize("a @ b").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code, ErrorCode::UnknownCharacter);
        assert_eq!(errs[0].pos(), Pos::new(1, 3));
    }

    #[test]
    fn comment_is_dropped() {
        assert_eq!(kinds("x<=y # cmt"), [Ident, Le, Ident, Eof]);
        assert_eq!(kinds("# only a comment\n"), [Eof]);
    }

    #[test]
    fn lone_colon_and_multiple_errors() {
        let errs = tokenize("x : 1\ny @ ~").unwrap_err();
        let codes: Vec<_> = errs
            .iter()
            .map(|e| (e.code.as_str(), e.line, e.column))
            .collect();
        assert_eq!(
            codes,
            [("E-LEX-2", 1, 3), ("E-LEX-1", 2, 3), ("E-LEX-1", 2, 5)]
        );
    }

    #[test]
    fn integer_range() {
        assert!(tokenize("9223372036854775807").is_ok());
        let errs = tokenize("x := 9223372036854775808").unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::IntegerOverflow);
        assert_eq!(errs[0].pos(), Pos::new(1, 6));
    }

    #[test]
    fn maximal_munch() {
        assert_eq!(
            kinds("<= <> < >= > := ="),
            [Le, Ne, Lt, Ge, Gt, Assign, Eq, Eof]
        );
        assert_eq!(kinds("a<=b"), [Ident, Le, Ident, Eof]);
    }

    #[test]
    fn keywords_are_case_sensitive() {
        assert_eq!(
            kinds("begin Begin BEGIN mod"),
            [Begin, Ident, Ident, Mod, Eof]
        );
        assert_eq!(kinds("node_2 x1"), [Ident, Ident, Eof]);
    }

    #[test]
    fn crlf_and_tabs() {
        assert_eq!(positions("a\r\n\tb"), [(1, 1), (2, 2), (2, 3)]);
        assert_eq!(positions("a\n\nb"), [(1, 1), (3, 1), (3, 2)]);
    }

    #[test]
    fn underscore_cannot_start_identifier() {
        let errs = tokenize("_x").unwrap_err();
        assert_eq!(errs[0].code, ErrorCode::UnknownCharacter);
    }

    fn lexeme() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-z][a-z0-9_]{0,6}",
            "[0-9]{1,12}",
            prop::sample::select(vec![
                ":=", "=", "<>", "<", "<=", ">", ">=", "+", "-", "*", "/", "(", ")", ",",
            ])
            .prop_map(str::to_string),
        ]
    }

    proptest! {
        #[test]
        fn render_round_trip(lexemes in prop::collection::vec(lexeme(), 0..40)) {
            let src = lexemes.join(" ");
            let first = tokenize(&src).unwrap();
            let rendered = first
                .iter()
                .filter(|t| t.kind != Eof)
                .map(|t| t.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            let second = tokenize(&rendered).unwrap();
            let strip = |v: &[Token]| v.iter().map(|t| (t.kind, t.text.clone())).collect::<Vec<_>>();
            prop_assert_eq!(strip(&first), strip(&second));
        }

        #[test]
        fn positions_strictly_increase(src in "[a-z0-9 \n\t:=<>+*/(),#-]{0,80}") {
            if let Ok(tokens) = tokenize(&src) {
                for pair in tokens.windows(2) {
                    prop_assert!(pair[0].pos < pair[1].pos);
                    prop_assert!(pair[0].line() >= 1 && pair[0].column() >= 1);
                }
            }
        }
    }
}
