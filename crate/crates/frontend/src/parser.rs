//! Recursive-descent parser.
//!
//! ```text
//! unit     := fundef*
//! fundef   := ("//@ requires" pred ";")? ("//@ ensures" pred ";")?
//!             "int" ident "(" params? ")" block
//! params   := param ("," param)*
//! param    := ("int" | "fnptr") ident
//! block    := "{" item* "}"
//! item     := decl | stmt
//! decl     := "int" ident ("[" INT "]")? ("=" expr)? ";"
//!           | "fnptr" ident ("=" expr)? ";"
//! stmt     := ("//@ assert" pred ";")*
//!             ( ident ("[" expr "]")? "=" expr ";"
//!             | "if" "(" expr ")" stmt ("else" stmt)?
//!             | "while" "(" expr ")" stmt
//!             | "return" expr ";"
//!             | ident "(" args? ")" ";"
//!             | block )
//! ```
//!
//! Binary operators bind, from loosest to tightest: `||`, `&&`,
//! comparisons, `+ -`, `* / %`; unary `-` and `!` bind tightest. All binary
//! levels are left-associative. A declaration with an initializer is turned
//! into an assignment statement so that annotations may precede it.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::ast::*;
use crate::lexer::{AnnotKeyword, Token, TokenKind};
use crate::visit::renumber;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct SyntaxError {
    pub loc: Location,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: syntax error: expected ", self.loc)?;
        match self.expected.as_slice() {
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

/// Parses one token stream into a unit whose node ids start at zero.
pub fn parse(tokens: &[Token]) -> Result<Unit, SyntaxError> {
    let mut unit = parse_unnumbered(tokens)?;
    renumber(&mut unit);
    Ok(unit)
}

/// Parses without assigning node ids; used when several files are merged
/// into one unit before numbering.
pub(crate) fn parse_unnumbered(tokens: &[Token]) -> Result<Unit, SyntaxError> {
    let eof = match tokens.last() {
        Some(t) => Location {
            column: t.loc.column + 1,
            ..t.loc.clone()
        },
        None => return Ok(Unit::default()),
    };
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        eof,
        locals: HashSet::new(),
    };
    let mut functions = Vec::new();
    while !p.at_end() {
        functions.push(p.function()?);
    }
    Ok(Unit { functions })
}

/// Builds either program expressions or annotation terms from the same
/// grammar.
trait Build {
    type Out;
    fn int(&self, v: i64, loc: Location) -> Self::Out;
    fn var(&self, name: String, loc: Location) -> Self::Out;
    fn result(&self, loc: &Location) -> Result<Self::Out, SyntaxError>;
    fn array_read(&self, name: String, index: Self::Out, loc: Location) -> Self::Out;
    fn binop(&self, op: BinOp, l: Self::Out, r: Self::Out, loc: Location) -> Self::Out;
    fn unop(&self, op: UnOp, t: Self::Out, loc: Location) -> Self::Out;
    fn call(&self, name: String, args: Vec<Self::Out>, indirect: bool, loc: Location) -> Self::Out;
    fn addr_of(&self, name: String, loc: Location) -> Self::Out;
}

struct ExprBuilder;

fn mk(kind: ExprKind, loc: Location) -> Expr {
    Expr {
        id: NodeId::UNASSIGNED,
        loc,
        kind,
    }
}

impl Build for ExprBuilder {
    type Out = Expr;
    fn int(&self, v: i64, loc: Location) -> Expr {
        mk(ExprKind::IntLit(v), loc)
    }
    fn var(&self, name: String, loc: Location) -> Expr {
        mk(ExprKind::Var(name), loc)
    }
    fn result(&self, loc: &Location) -> Result<Expr, SyntaxError> {
        Err(SyntaxError {
            loc: loc.clone(),
            expected: vec!["expression".into()],
            found: "'\\result'".into(),
        })
    }
    fn array_read(&self, array: String, index: Expr, loc: Location) -> Expr {
        mk(
            ExprKind::ArrayRead {
                array,
                index: Box::new(index),
            },
            loc,
        )
    }
    fn binop(&self, op: BinOp, lhs: Expr, rhs: Expr, loc: Location) -> Expr {
        mk(
            ExprKind::Binop {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            loc,
        )
    }
    fn unop(&self, op: UnOp, operand: Expr, loc: Location) -> Expr {
        mk(
            ExprKind::Unop {
                op,
                operand: Box::new(operand),
            },
            loc,
        )
    }
    fn call(&self, name: String, args: Vec<Expr>, indirect: bool, loc: Location) -> Expr {
        if indirect {
            mk(ExprKind::IndirectCall { target: name, args }, loc)
        } else {
            mk(ExprKind::Call { callee: name, args }, loc)
        }
    }
    fn addr_of(&self, name: String, loc: Location) -> Expr {
        mk(ExprKind::AddrOfFn(name), loc)
    }
}

struct TermBuilder;

impl Build for TermBuilder {
    type Out = Term;
    fn int(&self, v: i64, _: Location) -> Term {
        Term::Int(v)
    }
    fn var(&self, name: String, _: Location) -> Term {
        Term::Var(name)
    }
    fn result(&self, _: &Location) -> Result<Term, SyntaxError> {
        Ok(Term::Result)
    }
    fn array_read(&self, name: String, index: Term, _: Location) -> Term {
        Term::ArrayRead(name, Box::new(index))
    }
    fn binop(&self, op: BinOp, l: Term, r: Term, _: Location) -> Term {
        Term::binop(op, l, r)
    }
    fn unop(&self, op: UnOp, t: Term, _: Location) -> Term {
        Term::Unop(op, Box::new(t))
    }
    fn call(&self, callee: String, args: Vec<Term>, indirect: bool, _: Location) -> Term {
        Term::Call {
            callee,
            indirect,
            args,
        }
    }
    fn addr_of(&self, name: String, _: Location) -> Term {
        Term::AddrOf(name)
    }
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    eof: Location,
    /// Names declared so far in the current function; a call through one of
    /// them is an indirect call.
    locals: HashSet<String>,
}

impl<'t> Parser<'t> {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&'t TokenKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, n: usize) -> Option<&'t TokenKind> {
        self.toks.get(self.pos + n).map(|t| &t.kind)
    }

    fn loc(&self) -> Location {
        self.toks
            .get(self.pos)
            .map(|t| t.loc.clone())
            .unwrap_or_else(|| self.eof.clone())
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            loc: self.loc(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self
                .peek()
                .map(TokenKind::describe)
                .unwrap_or_else(|| "end of input".to_string()),
        })
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<(), SyntaxError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            self.error(&[&kind.describe()])
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(TokenKind::Ident(n)) => {
                self.pos += 1;
                Ok(n.clone())
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn function(&mut self) -> Result<FunctionDef, SyntaxError> {
        let mut requires = None;
        let mut ensures = None;
        while let Some(TokenKind::Annot { keyword, body }) = self.peek() {
            let loc = self.loc();
            let slot = match keyword {
                AnnotKeyword::Requires if requires.is_none() && ensures.is_none() => &mut requires,
                AnnotKeyword::Ensures if ensures.is_none() => &mut ensures,
                _ => return self.error(&["'int'"]),
            };
            let pred = parse_pred(body, &loc)?;
            *slot = Some((pred, loc));
            self.pos += 1;
        }
        let loc = self.loc();
        self.expect(TokenKind::KwInt)?;
        let name = self.ident()?;
        self.expect(TokenKind::LParen)?;
        self.locals.clear();
        let mut params = Vec::new();
        if !self.eat(&TokenKind::RParen) {
            loop {
                let ploc = self.loc();
                let ty = match self.peek() {
                    Some(TokenKind::KwInt) => Type::Int,
                    Some(TokenKind::KwFnptr) => Type::FnPtr,
                    _ => return self.error(&["'int'", "'fnptr'"]),
                };
                self.pos += 1;
                let pname = self.ident()?;
                self.locals.insert(pname.clone());
                params.push(Param {
                    name: pname,
                    ty,
                    loc: ploc,
                });
                if self.eat(&TokenKind::RParen) {
                    break;
                }
                self.expect(TokenKind::Comma)?;
            }
        }
        let mut locals = Vec::new();
        let body = self.block(&mut locals)?;
        let contract = Contract {
            requires: requires.map(|(pred, loc)| Annotation {
                kind: AnnotationKind::Requires {
                    function: name.clone(),
                },
                pred,
                origin: Origin::Source,
                loc,
            }),
            ensures: ensures.map(|(pred, loc)| Annotation {
                kind: AnnotationKind::Ensures {
                    function: name.clone(),
                },
                pred,
                origin: Origin::Source,
                loc,
            }),
        };
        Ok(FunctionDef {
            id: NodeId::UNASSIGNED,
            name,
            params,
            locals,
            body,
            contract,
            loc,
        })
    }

    /// `{ item* }`
    fn block(&mut self, locals: &mut Vec<Local>) -> Result<Vec<Stmt>, SyntaxError> {
        self.expect(TokenKind::LBrace)?;
        let mut stmts = Vec::new();
        loop {
            let asserts = self.asserts()?;
            match self.peek() {
                Some(TokenKind::RBrace) if asserts.is_empty() => {
                    self.pos += 1;
                    return Ok(stmts);
                }
                Some(TokenKind::KwInt | TokenKind::KwFnptr) => {
                    if let Some(mut s) = self.declaration(locals)? {
                        s.asserts = asserts;
                        stmts.push(s);
                    } else if !asserts.is_empty() {
                        // The declaration had no initializer, so the
                        // annotations have no statement to attach to.
                        return self.error(&["statement"]);
                    }
                }
                None => return self.error(&["statement", "'}'"]),
                _ => {
                    let mut s = self.stmt_body(locals)?;
                    s.asserts = asserts;
                    stmts.push(s);
                }
            }
        }
    }

    fn asserts(&mut self) -> Result<Vec<Annotation>, SyntaxError> {
        let mut out = Vec::new();
        while let Some(TokenKind::Annot { keyword, body }) = self.peek() {
            let loc = self.loc();
            if *keyword != AnnotKeyword::Assert {
                return self.error(&["statement"]);
            }
            out.push(Annotation {
                kind: AnnotationKind::Assert {
                    attach: NodeId::UNASSIGNED,
                },
                pred: parse_pred(body, &loc)?,
                origin: Origin::Source,
                loc,
            });
            self.pos += 1;
        }
        Ok(out)
    }

    fn declaration(&mut self, locals: &mut Vec<Local>) -> Result<Option<Stmt>, SyntaxError> {
        let loc = self.loc();
        let is_int = matches!(self.bump().map(|t| &t.kind), Some(TokenKind::KwInt));
        let name_loc = self.loc();
        let name = self.ident()?;
        let mut ty = if is_int { Type::Int } else { Type::FnPtr };
        if is_int && self.eat(&TokenKind::LBracket) {
            match self.peek() {
                Some(TokenKind::IntLit(n)) if *n > 0 && *n <= u32::MAX as i64 => {
                    ty = Type::IntArray(*n as u32);
                    self.pos += 1;
                }
                _ => return self.error(&["positive array size"]),
            }
            self.expect(TokenKind::RBracket)?;
        }
        self.locals.insert(name.clone());
        locals.push(Local {
            name: name.clone(),
            ty,
            loc,
        });
        if self.eat(&TokenKind::Semi) {
            return Ok(None);
        }
        if matches!(ty, Type::IntArray(_)) {
            return self.error(&["';'"]);
        }
        self.expect(TokenKind::Assign)?;
        let value = self.expr()?;
        self.expect(TokenKind::Semi)?;
        Ok(Some(Stmt {
            id: NodeId::UNASSIGNED,
            loc: name_loc,
            asserts: Vec::new(),
            kind: StmtKind::Assign {
                target: name,
                value,
            },
        }))
    }

    fn stmt(&mut self, locals: &mut Vec<Local>) -> Result<Stmt, SyntaxError> {
        let asserts = self.asserts()?;
        let mut s = self.stmt_body(locals)?;
        s.asserts = asserts;
        Ok(s)
    }

    fn stmt_body(&mut self, locals: &mut Vec<Local>) -> Result<Stmt, SyntaxError> {
        let loc = self.loc();
        let kind = match self.peek() {
            Some(TokenKind::KwIf) => {
                self.pos += 1;
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let then_branch = Box::new(self.stmt(locals)?);
                let else_branch = if self.eat(&TokenKind::KwElse) {
                    Some(Box::new(self.stmt(locals)?))
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            Some(TokenKind::KwWhile) => {
                self.pos += 1;
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                StmtKind::While {
                    cond,
                    body: Box::new(self.stmt(locals)?),
                }
            }
            Some(TokenKind::KwReturn) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(TokenKind::Semi)?;
                StmtKind::Return(e)
            }
            Some(TokenKind::LBrace) => StmtKind::Block(self.block(locals)?),
            Some(TokenKind::Ident(name)) => match self.peek_at(1) {
                Some(TokenKind::Assign) => {
                    self.pos += 2;
                    let value = self.expr()?;
                    self.expect(TokenKind::Semi)?;
                    StmtKind::Assign {
                        target: name.clone(),
                        value,
                    }
                }
                Some(TokenKind::LBracket) => {
                    self.pos += 2;
                    let index = self.expr()?;
                    self.expect(TokenKind::RBracket)?;
                    self.expect(TokenKind::Assign)?;
                    let value = self.expr()?;
                    self.expect(TokenKind::Semi)?;
                    StmtKind::ArrayAssign {
                        array: name.clone(),
                        index,
                        value,
                    }
                }
                Some(TokenKind::LParen) => {
                    let call = self.primary(&ExprBuilder)?;
                    self.expect(TokenKind::Semi)?;
                    StmtKind::ExprStmt(call)
                }
                _ => {
                    self.pos += 1;
                    return self.error(&["'='", "'['", "'('"]);
                }
            },
            _ => return self.error(&["statement"]),
        };
        Ok(Stmt {
            id: NodeId::UNASSIGNED,
            loc,
            asserts: Vec::new(),
            kind,
        })
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.binary(&ExprBuilder, 1)
    }

    fn binop_at(&self, level: u8) -> Option<BinOp> {
        let op = match self.peek()? {
            TokenKind::OrOr => BinOp::Or,
            TokenKind::AndAnd => BinOp::And,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::EqEq => BinOp::Eq,
            TokenKind::Ne => BinOp::Ne,
            TokenKind::Plus => BinOp::Add,
            TokenKind::Minus => BinOp::Sub,
            TokenKind::Star => BinOp::Mul,
            TokenKind::Slash => BinOp::Div,
            TokenKind::Percent => BinOp::Mod,
            _ => return None,
        };
        (op.precedence() == level).then_some(op)
    }

    fn binary<B: Build>(&mut self, b: &B, level: u8) -> Result<B::Out, SyntaxError> {
        if level > 5 {
            return self.unary(b);
        }
        let start = self.loc();
        let mut lhs = self.binary(b, level + 1)?;
        while let Some(op) = self.binop_at(level) {
            self.pos += 1;
            let rhs = self.binary(b, level + 1)?;
            lhs = b.binop(op, lhs, rhs, start.clone());
        }
        Ok(lhs)
    }

    fn unary<B: Build>(&mut self, b: &B) -> Result<B::Out, SyntaxError> {
        let loc = self.loc();
        let op = match self.peek() {
            Some(TokenKind::Minus) => UnOp::Neg,
            Some(TokenKind::Bang) => UnOp::Not,
            _ => return self.primary(b),
        };
        self.pos += 1;
        let operand = self.unary(b)?;
        Ok(b.unop(op, operand, loc))
    }

    fn primary<B: Build>(&mut self, b: &B) -> Result<B::Out, SyntaxError> {
        let loc = self.loc();
        match self.peek() {
            Some(TokenKind::IntLit(v)) => {
                self.pos += 1;
                Ok(b.int(*v, loc))
            }
            Some(TokenKind::ResultKw) => {
                let r = b.result(&loc)?;
                self.pos += 1;
                Ok(r)
            }
            Some(TokenKind::Amp) => {
                self.pos += 1;
                let name = self.ident()?;
                Ok(b.addr_of(name, loc))
            }
            Some(TokenKind::LParen) => {
                self.pos += 1;
                let e = self.binary(b, 1)?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            Some(TokenKind::Ident(name)) => {
                self.pos += 1;
                if self.eat(&TokenKind::LBracket) {
                    let index = self.binary(b, 1)?;
                    self.expect(TokenKind::RBracket)?;
                    Ok(b.array_read(name.clone(), index, loc))
                } else if self.eat(&TokenKind::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&TokenKind::RParen) {
                        loop {
                            args.push(self.binary(b, 1)?);
                            if self.eat(&TokenKind::RParen) {
                                break;
                            }
                            self.expect(TokenKind::Comma)?;
                        }
                    }
                    let indirect = self.locals.contains(name);
                    Ok(b.call(name.clone(), args, indirect, loc))
                } else {
                    Ok(b.var(name.clone(), loc))
                }
            }
            _ => self.error(&["expression"]),
        }
    }
}

fn parse_pred(body: &[Token], annot_loc: &Location) -> Result<Term, SyntaxError> {
    let eof = body
        .last()
        .map(|t| Location {
            column: t.loc.column + 1,
            ..t.loc.clone()
        })
        .unwrap_or_else(|| annot_loc.clone());
    let mut p = Parser {
        toks: body,
        pos: 0,
        eof,
        locals: HashSet::new(),
    };
    let t = p.binary(&TermBuilder, 1)?;
    if !p.at_end() {
        return p.error(&["';'"]);
    }
    Ok(t)
}

/// Parses a standalone predicate, e.g. `"x > 0 && y != 1"`.
pub fn parse_predicate(text: &str) -> Result<Term, crate::FrontendError> {
    let toks = crate::lexer::tokenize(&format!("//@ assert {text};"), "<predicate>")?;
    match toks.as_slice() {
        [Token {
            kind: TokenKind::Annot { body, .. },
            loc,
        }] => Ok(parse_pred(body, loc)?),
        _ => unreachable!("a single annotation token"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;

    fn parse_src(src: &str) -> Result<Unit, SyntaxError> {
        parse(&tokenize(src, "t.mc").unwrap())
    }

    #[test]
    fn minimal_function() {
        let u = parse_src("int main(){ return 0; }").unwrap();
        assert_eq!(u.functions.len(), 1);
        let body = &u.functions[0].body;
        assert_eq!(body.len(), 1);
        match &body[0].kind {
            StmtKind::Return(e) => assert_eq!(e.kind, ExprKind::IntLit(0)),
            k => panic!("unexpected {k:?}"),
        }
    }

    #[test]
    fn precedence_mul_over_add() {
        let u = parse_src("int main(){ int x; x = 1 + 2 * 3; return x; }").unwrap();
        let StmtKind::Assign { value, .. } = &u.functions[0].body[0].kind else {
            panic!()
        };
        assert_eq!(Term::from_expr(value), parse_predicate("1 + (2 * 3)").unwrap());
        assert_eq!(Term::from_expr(value).to_string(), "1 + 2 * 3");
    }

    #[test]
    fn full_precedence_ladder() {
        let t = parse_predicate("-a * b + c < d && e == f || !g").unwrap();
        assert_eq!(t, parse_predicate("((((-a) * b) + c < d) && (e == f)) || (!g)").unwrap());
    }

    #[test]
    fn left_associative() {
        assert_eq!(
            parse_predicate("a - b - c").unwrap(),
            parse_predicate("(a - b) - c").unwrap()
        );
    }

    #[test]
    fn dangling_assert_is_rejected() {
        let err = parse_src("int main(){ int x; x = 1; //@ assert x>0;\n }").unwrap_err();
        assert_eq!(err.expected, vec!["statement".to_string()]);
        assert!(parse_src("int main(){ //@ assert 1 > 0;\n }").is_err());
    }

    #[test]
    fn assert_binds_to_next_statement() {
        let u = parse_src("int main(){ int x; x = 1;\n//@ assert x > 0;\n// note\nreturn x; }").unwrap();
        let ret = &u.functions[0].body[1];
        assert_eq!(ret.asserts.len(), 1);
        assert_eq!(ret.asserts[0].kind, AnnotationKind::Assert { attach: ret.id });
    }

    #[test]
    fn call_kinds() {
        let u = parse_src("int g(){ return 1; } int main(){ fnptr f = &g; f(); g(); return 0; }").unwrap();
        let main = &u.functions[1];
        assert!(matches!(&main.body[1].kind, StmtKind::ExprStmt(e) if matches!(e.kind, ExprKind::IndirectCall { .. })));
        assert!(matches!(&main.body[2].kind, StmtKind::ExprStmt(e) if matches!(e.kind, ExprKind::Call { .. })));
    }

    #[test]
    fn contract_parsing() {
        let u = parse_src("//@ requires x >= 0;\n//@ ensures \\result > x;\nint f(int x){ return x + 1; }").unwrap();
        let c = &u.functions[0].contract;
        assert_eq!(c.requires.as_ref().unwrap().pred.to_string(), "x >= 0");
        assert_eq!(c.ensures.as_ref().unwrap().pred.to_string(), "\\result > x");
        assert!(parse_src("//@ ensures x > 0;\n//@ requires x > 0;\nint f(int x){ return 0; }").is_err());
    }

    #[test]
    fn syntax_error_reports_expected_set() {
        let err = parse_src("int main(){ x 1; }").unwrap_err();
        assert_eq!(err.loc.line, 1);
        assert!(err.expected.contains(&"'='".to_string()));
        let err = parse_src("int main(){ return 0;").unwrap_err();
        assert_eq!(err.found, "end of input");
    }
}
