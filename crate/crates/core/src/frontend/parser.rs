//! Recursive-descent parser for `.mg` files.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::FrontendError;

const MODIFIERS: &[&str] = &["atomic", "thread", "static", "public", "private", "protected", "final"];

pub fn parse_source(file: &str, src: &str) -> Result<SourceFile, FrontendError> {
    let tokens = tokenize(file, src)?;
    let mut p = Parser { file, tokens, pos: 0 };
    p.source_file()
}

struct Parser<'a> {
    file: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        let t = &self.tokens[self.pos];
        Span { line: t.line, col: t.col }
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, FrontendError> {
        let s = self.span();
        Err(FrontendError::Syntax {
            file: self.file.to_string(),
            line: s.line,
            col: s.col,
            msg: msg.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, FrontendError> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), FrontendError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn source_file(&mut self) -> Result<SourceFile, FrontendError> {
        let mut file = SourceFile { classes: Vec::new(), functions: Vec::new(), globals: Vec::new() };
        while *self.peek() != Tok::Eof {
            if self.is_keyword("class") {
                file.classes.push(self.class_decl()?);
            } else {
                match self.member()? {
                    Member::Method(m) => file.functions.push(m),
                    Member::Field(f) => file.globals.push(f),
                }
            }
        }
        Ok(file)
    }

    fn class_decl(&mut self) -> Result<ClassDecl, FrontendError> {
        let span = self.span();
        self.bump();
        let name = self.ident()?;
        let contract = if self.is_keyword("contract") {
            Some(self.contract_annotation()?)
        } else {
            None
        };
        self.expect_punct("{")?;
        let mut class = ClassDecl { name, contract, fields: Vec::new(), methods: Vec::new(), span };
        while !self.eat_punct("}") {
            if *self.peek() == Tok::Eof {
                return self.unexpected("`}`");
            }
            match self.member()? {
                Member::Method(m) => class.methods.push(m),
                Member::Field(f) => class.fields.push(f),
            }
        }
        Ok(class)
    }

    fn contract_annotation(&mut self) -> Result<ContractAnnotation, FrontendError> {
        let span = self.span();
        self.bump();
        self.expect_punct("{")?;
        let mut clauses = Vec::new();
        loop {
            let s = self.span();
            match self.peek().clone() {
                Tok::Str(text) => {
                    self.bump();
                    clauses.push((text, s));
                }
                _ => return self.unexpected("quoted contract clause"),
            }
            if self.eat_punct(";") {
                if self.eat_punct("}") {
                    break;
                }
            } else {
                self.expect_punct("}")?;
                break;
            }
        }
        Ok(ContractAnnotation { clauses, span })
    }

    fn member(&mut self) -> Result<Member, FrontendError> {
        let span = self.span();
        let mut words = Vec::new();
        let (mut is_atomic, mut is_thread) = (false, false);
        while let Tok::Ident(w) = self.peek().clone() {
            self.bump();
            match w.as_str() {
                "atomic" => is_atomic = true,
                "thread" => is_thread = true,
                _ if MODIFIERS.contains(&w.as_str()) => {}
                _ => words.push(w),
            }
        }
        let Some(name) = words.pop() else {
            return self.unexpected("member name");
        };
        if words.len() > 1 {
            return self.error(format!("unexpected identifier `{}`", words[1]));
        }
        let ty = words.pop().filter(|t| t != "var" && t != "void");
        if self.eat_punct("(") {
            let params = self.params()?;
            let body = if self.eat_punct(";") { None } else { Some(self.block()?) };
            return Ok(Member::Method(MethodDecl {
                name,
                is_atomic,
                is_thread_entry: is_thread,
                params,
                body,
                span,
            }));
        }
        if is_atomic || is_thread {
            return self.error("`atomic` and `thread` apply to methods only");
        }
        let init = if self.eat_punct("=") { Some(self.expr()?) } else { None };
        self.expect_punct(";")?;
        Ok(Member::Field(FieldDecl { ty, name, init, span }))
    }

    fn params(&mut self) -> Result<Vec<Param>, FrontendError> {
        let mut params = Vec::new();
        if self.eat_punct(")") {
            return Ok(params);
        }
        loop {
            let first = self.ident()?;
            let param = if let Tok::Ident(_) = self.peek() {
                Param { ty: Some(first), name: self.ident()? }
            } else {
                Param { ty: None, name: first }
            };
            params.push(param);
            if self.eat_punct(")") {
                return Ok(params);
            }
            self.expect_punct(",")?;
        }
    }

    fn block(&mut self) -> Result<Block, FrontendError> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            if *self.peek() == Tok::Eof {
                return self.unexpected("`}`");
            }
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, FrontendError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Punct("{") => StmtKind::Block(self.block()?),
            Tok::Punct(";") => {
                self.bump();
                StmtKind::Empty
            }
            Tok::Ident(k) if k == "if" => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let then = Box::new(self.stmt()?);
                let otherwise = if self.is_keyword("else") {
                    self.bump();
                    Some(Box::new(self.stmt()?))
                } else {
                    None
                };
                StmtKind::If { cond, then, otherwise }
            }
            Tok::Ident(k) if k == "while" => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                StmtKind::While { cond, body: Box::new(self.stmt()?) }
            }
            Tok::Ident(k) if k == "return" => {
                self.bump();
                let value = if self.is_punct(";") { None } else { Some(self.expr()?) };
                self.expect_punct(";")?;
                StmtKind::Return(value)
            }
            Tok::Ident(k) if k == "var" => {
                self.bump();
                let name = self.ident()?;
                let init = if self.eat_punct("=") { Some(self.expr()?) } else { None };
                self.expect_punct(";")?;
                StmtKind::Decl { ty: None, name, init }
            }
            Tok::Ident(ty) if matches!(self.peek_at(1), Tok::Ident(_)) => {
                self.bump();
                let name = self.ident()?;
                let init = if self.eat_punct("=") { Some(self.expr()?) } else { None };
                self.expect_punct(";")?;
                StmtKind::Decl { ty: Some(ty), name, init }
            }
            Tok::Ident(target) if matches!(self.peek_at(1), Tok::Punct("=")) => {
                self.bump();
                self.bump();
                let value = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Assign { target, value }
            }
            _ => {
                let e = self.expr()?;
                if !matches!(e.kind, ExprKind::Call { .. } | ExprKind::PostIncr { .. }) {
                    return Err(FrontendError::Syntax {
                        file: self.file.to_string(),
                        line: span.line,
                        col: span.col,
                        msg: "expression statement must be a call or increment".into(),
                    });
                }
                self.expect_punct(";")?;
                StmtKind::Expr(e)
            }
        };
        Ok(Stmt { kind, span })
    }

    fn expr(&mut self) -> Result<Expr, FrontendError> {
        let span = self.span();
        let cond = self.binary(0)?;
        if self.eat_punct("?") {
            let then = self.expr()?;
            self.expect_punct(":")?;
            let otherwise = self.expr()?;
            return Ok(Expr {
                kind: ExprKind::Ternary {
                    cond: Box::new(cond),
                    then: Box::new(then),
                    otherwise: Box::new(otherwise),
                },
                span,
            });
        }
        Ok(cond)
    }

    fn binary(&mut self, level: usize) -> Result<Expr, FrontendError> {
        const LEVELS: &[&[&str]] = &[
            &["||"],
            &["&&"],
            &["==", "!="],
            &["<", ">", "<=", ">="],
            &["+", "-"],
            &["*", "/", "%"],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let span = self.span();
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Punct(p) if LEVELS[level].contains(p) => *p,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.binary(level + 1)?;
            lhs = Expr {
                kind: ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
                span,
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        let span = self.span();
        for op in ["!", "-"] {
            if self.eat_punct(op) {
                let operand = self.unary()?;
                return Ok(Expr { kind: ExprKind::Unary { op, operand: Box::new(operand) }, span });
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                ExprKind::Int(i)
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                return Ok(e);
            }
            Tok::Ident(k) if k == "new" => {
                self.bump();
                let class = self.ident()?;
                self.expect_punct("(")?;
                self.expect_punct(")")?;
                ExprKind::New { class }
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat_punct("(") {
                    ExprKind::Call { receiver: None, method: name, args: self.args()? }
                } else if self.is_punct(".") {
                    self.bump();
                    let method = self.ident()?;
                    self.expect_punct("(")?;
                    ExprKind::Call { receiver: Some(name), method, args: self.args()? }
                } else if let Tok::Punct(op @ ("++" | "--")) = self.peek().clone() {
                    self.bump();
                    ExprKind::PostIncr { var: name, op }
                } else {
                    ExprKind::Var(name)
                }
            }
            _ => return self.unexpected("expression"),
        };
        Ok(Expr { kind, span })
    }

    fn args(&mut self) -> Result<Vec<Expr>, FrontendError> {
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_punct(")") {
                return Ok(args);
            }
            self.expect_punct(",")?;
        }
    }
}

enum Member {
    Method(MethodDecl),
    Field(FieldDecl),
}
