use std::sync::Arc;

use thiserror::Error;

use crate::ast::Location;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnnotKeyword {
    Assert,
    Requires,
    Ensures,
}

impl AnnotKeyword {
    pub fn as_str(self) -> &'static str {
        match self {
            AnnotKeyword::Assert => "assert",
            AnnotKeyword::Requires => "requires",
            AnnotKeyword::Ensures => "ensures",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    KwInt,
    KwFnptr,
    KwIf,
    KwElse,
    KwWhile,
    KwReturn,
    Ident(String),
    IntLit(i64),
    /// `\result`
    ResultKw,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Bang,
    Assign,
    Amp,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    /// `//@ <keyword> <body> ;`; the body excludes the terminating `;`.
    Annot {
        keyword: AnnotKeyword,
        body: Vec<Token>,
    },
}

impl TokenKind {
    pub fn describe(&self) -> String {
        let s = match self {
            TokenKind::KwInt => "'int'",
            TokenKind::KwFnptr => "'fnptr'",
            TokenKind::KwIf => "'if'",
            TokenKind::KwElse => "'else'",
            TokenKind::KwWhile => "'while'",
            TokenKind::KwReturn => "'return'",
            TokenKind::Ident(n) => return format!("identifier '{n}'"),
            TokenKind::IntLit(v) => return format!("integer {v}"),
            TokenKind::ResultKw => "'\\result'",
            TokenKind::Plus => "'+'",
            TokenKind::Minus => "'-'",
            TokenKind::Star => "'*'",
            TokenKind::Slash => "'/'",
            TokenKind::Percent => "'%'",
            TokenKind::Lt => "'<'",
            TokenKind::Le => "'<='",
            TokenKind::Gt => "'>'",
            TokenKind::Ge => "'>='",
            TokenKind::EqEq => "'=='",
            TokenKind::Ne => "'!='",
            TokenKind::AndAnd => "'&&'",
            TokenKind::OrOr => "'||'",
            TokenKind::Bang => "'!'",
            TokenKind::Assign => "'='",
            TokenKind::Amp => "'&'",
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::LBrace => "'{'",
            TokenKind::RBrace => "'}'",
            TokenKind::LBracket => "'['",
            TokenKind::RBracket => "']'",
            TokenKind::Comma => "','",
            TokenKind::Semi => "';'",
            TokenKind::Annot { keyword, .. } => return format!("annotation '{}'", keyword.as_str()),
        };
        s.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub loc: Location,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("{0}: illegal character")]
    IllegalCharacter(Location),
    #[error("{0}: integer literal out of range")]
    LiteralOverflow(Location),
    #[error("{0}: unknown annotation keyword")]
    UnknownAnnotation(Location),
    #[error("{0}: annotation is missing its terminating ';'")]
    UnterminatedAnnotation(Location),
    #[error("{0}: unterminated block comment")]
    UnterminatedComment(Location),
}

impl LexError {
    pub fn location(&self) -> &Location {
        match self {
            LexError::IllegalCharacter(l)
            | LexError::LiteralOverflow(l)
            | LexError::UnknownAnnotation(l)
            | LexError::UnterminatedAnnotation(l)
            | LexError::UnterminatedComment(l) => l,
        }
    }
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
    file: &'a Arc<str>,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn loc(&self) -> Location {
        Location::new(self.file, self.line, self.column)
    }
}

/// Splits MiniC source text into tokens.
///
/// `//@` comments become a single annotation token holding the tokens of
/// the predicate; other `//` and `/* */` comments are dropped.
pub fn tokenize(text: &str, file: &str) -> Result<Vec<Token>, LexError> {
    let file: Arc<str> = Arc::from(file);
    let mut cur = Cursor {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        file: &file,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek_at(1) == Some('/') {
            if cur.peek_at(2) == Some('@') {
                out.push(lex_annotation(&mut cur)?);
            } else {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            continue;
        }
        if c == '/' && cur.peek_at(1) == Some('*') {
            skip_block_comment(&mut cur)?;
            continue;
        }
        out.push(lex_token(&mut cur, false)?);
    }
    Ok(out)
}

fn skip_block_comment(cur: &mut Cursor<'_>) -> Result<(), LexError> {
    let start = cur.loc();
    cur.bump();
    cur.bump();
    loop {
        match cur.peek() {
            None => return Err(LexError::UnterminatedComment(start)),
            Some('*') if cur.peek_at(1) == Some('/') => {
                cur.bump();
                cur.bump();
                return Ok(());
            }
            Some(_) => {
                cur.bump();
            }
        }
    }
}

fn lex_annotation(cur: &mut Cursor<'_>) -> Result<Token, LexError> {
    let start = cur.loc();
    cur.bump();
    cur.bump();
    cur.bump();
    while matches!(cur.peek(), Some(c) if c == ' ' || c == '\t') {
        cur.bump();
    }
    let kw_loc = cur.loc();
    let mut word = String::new();
    while let Some(c) = cur.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
        word.push(c);
        cur.bump();
    }
    let keyword = match word.as_str() {
        "assert" => AnnotKeyword::Assert,
        "requires" => AnnotKeyword::Requires,
        "ensures" => AnnotKeyword::Ensures,
        _ => return Err(LexError::UnknownAnnotation(kw_loc)),
    };
    let mut body = Vec::new();
    loop {
        match cur.peek() {
            None | Some('\n') => return Err(LexError::UnterminatedAnnotation(start)),
            Some(c) if c.is_whitespace() => {
                cur.bump();
            }
            Some(';') => {
                cur.bump();
                break;
            }
            Some(_) => body.push(lex_token(cur, true)?),
        }
    }
    // Only blanks or an ordinary comment may follow on the same line.
    while let Some(c) = cur.peek() {
        match c {
            '\n' => break,
            ' ' | '\t' | '\r' => {
                cur.bump();
            }
            '/' if cur.peek_at(1) == Some('/') => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            }
            _ => return Err(LexError::IllegalCharacter(cur.loc())),
        }
    }
    Ok(Token {
        kind: TokenKind::Annot { keyword, body },
        loc: start,
    })
}

fn lex_token(cur: &mut Cursor<'_>, in_annotation: bool) -> Result<Token, LexError> {
    let loc = cur.loc();
    let c = cur.peek().expect("caller checked for input");
    let two = |cur: &mut Cursor<'_>, kind: TokenKind| {
        cur.bump();
        cur.bump();
        kind
    };
    let one = |cur: &mut Cursor<'_>, kind: TokenKind| {
        cur.bump();
        kind
    };
    let next = cur.peek_at(1);
    let kind = match c {
        '0'..='9' => {
            let mut digits = String::new();
            while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                digits.push(d);
                cur.bump();
            }
            let v = digits
                .parse::<i64>()
                .map_err(|_| LexError::LiteralOverflow(loc.clone()))?;
            TokenKind::IntLit(v)
        }
        c if c.is_ascii_alphabetic() || c == '_' => {
            let mut word = String::new();
            while let Some(d) = cur.peek().filter(|d| d.is_ascii_alphanumeric() || *d == '_') {
                word.push(d);
                cur.bump();
            }
            match word.as_str() {
                "int" => TokenKind::KwInt,
                "fnptr" => TokenKind::KwFnptr,
                "if" => TokenKind::KwIf,
                "else" => TokenKind::KwElse,
                "while" => TokenKind::KwWhile,
                "return" => TokenKind::KwReturn,
                _ => TokenKind::Ident(word),
            }
        }
        '\\' if in_annotation => {
            cur.bump();
            let mut word = String::new();
            while let Some(d) = cur.peek().filter(|d| d.is_ascii_alphanumeric() || *d == '_') {
                word.push(d);
                cur.bump();
            }
            if word != "result" {
                return Err(LexError::IllegalCharacter(loc));
            }
            TokenKind::ResultKw
        }
        '<' if next == Some('=') => two(cur, TokenKind::Le),
        '>' if next == Some('=') => two(cur, TokenKind::Ge),
        '=' if next == Some('=') => two(cur, TokenKind::EqEq),
        '!' if next == Some('=') => two(cur, TokenKind::Ne),
        '&' if next == Some('&') => two(cur, TokenKind::AndAnd),
        '|' if next == Some('|') => two(cur, TokenKind::OrOr),
        '+' => one(cur, TokenKind::Plus),
        '-' => one(cur, TokenKind::Minus),
        '*' => one(cur, TokenKind::Star),
        '/' => one(cur, TokenKind::Slash),
        '%' => one(cur, TokenKind::Percent),
        '<' => one(cur, TokenKind::Lt),
        '>' => one(cur, TokenKind::Gt),
        '!' => one(cur, TokenKind::Bang),
        '=' => one(cur, TokenKind::Assign),
        '&' => one(cur, TokenKind::Amp),
        '(' => one(cur, TokenKind::LParen),
        ')' => one(cur, TokenKind::RParen),
        '{' => one(cur, TokenKind::LBrace),
        '}' => one(cur, TokenKind::RBrace),
        '[' => one(cur, TokenKind::LBracket),
        ']' => one(cur, TokenKind::RBracket),
        ',' => one(cur, TokenKind::Comma),
        ';' => one(cur, TokenKind::Semi),
        _ => return Err(LexError::IllegalCharacter(loc)),
    };
    Ok(Token { kind, loc })
}
