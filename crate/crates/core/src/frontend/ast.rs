//! Syntax tree for the `.mg` input language.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub classes: Vec<ClassDecl>,
    /// Methods declared outside of any class.
    pub functions: Vec<MethodDecl>,
    /// Variables declared outside of any class.
    pub globals: Vec<FieldDecl>,
}

#[derive(Debug, Clone)]
pub struct ClassDecl {
    pub name: String,
    pub contract: Option<ContractAnnotation>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ContractAnnotation {
    pub clauses: Vec<(String, Span)>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct FieldDecl {
    pub ty: Option<String>,
    pub name: String,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct Param {
    pub ty: Option<String>,
    pub name: String,
}

#[derive(Debug, Clone)]
pub struct MethodDecl {
    pub name: String,
    pub is_atomic: bool,
    pub is_thread_entry: bool,
    pub params: Vec<Param>,
    /// `None` for declarations without a body (`void g();`).
    pub body: Option<Block>,
    pub span: Span,
}

pub type Block = Vec<Stmt>;

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    /// `var x = e;` or `T x = e;`
    Decl { ty: Option<String>, name: String, init: Option<Expr> },
    Assign { target: String, value: Expr },
    Expr(Expr),
    If { cond: Expr, then: Box<Stmt>, otherwise: Option<Box<Stmt>> },
    While { cond: Expr, body: Box<Stmt> },
    Return(Option<Expr>),
    Block(Block),
    Empty,
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Int(i64),
    Var(String),
    /// `recv.method(args)` when `receiver` is set, `method(args)` otherwise.
    Call { receiver: Option<String>, method: String, args: Vec<Expr> },
    New { class: String },
    Unary { op: &'static str, operand: Box<Expr> },
    Binary { op: &'static str, lhs: Box<Expr>, rhs: Box<Expr> },
    Ternary { cond: Box<Expr>, then: Box<Expr>, otherwise: Box<Expr> },
    PostIncr { var: String, op: &'static str },
}

impl Expr {
    /// Calls in evaluation order (arguments before the call that consumes them).
    pub fn calls(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.collect_calls(&mut out);
        out
    }

    fn collect_calls<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match &self.kind {
            ExprKind::Call { args, .. } => {
                for a in args {
                    a.collect_calls(out);
                }
                out.push(self);
            }
            ExprKind::Unary { operand, .. } => operand.collect_calls(out),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.collect_calls(out);
                rhs.collect_calls(out);
            }
            ExprKind::Ternary { cond, then, otherwise } => {
                cond.collect_calls(out);
                then.collect_calls(out);
                otherwise.collect_calls(out);
            }
            ExprKind::Int(_) | ExprKind::Var(_) | ExprKind::New { .. } | ExprKind::PostIncr { .. } => {}
        }
    }

    pub fn allocations(&self) -> Vec<(&str, Span)> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let ExprKind::New { class } = &e.kind {
                out.push((class.as_str(), e.span));
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            ExprKind::Unary { operand, .. } => operand.walk(f),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            ExprKind::Ternary { cond, then, otherwise } => {
                cond.walk(f);
                then.walk(f);
                otherwise.walk(f);
            }
            _ => {}
        }
    }
}

/// Canonical rendering used for unification: parentheses appear only around
/// nested operators, so `(o)+1` and `o + 1` print identically.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn nested(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e.kind {
                ExprKind::Binary { .. } | ExprKind::Ternary { .. } => write!(f, "({e})"),
                _ => write!(f, "{e}"),
            }
        }
        match &self.kind {
            ExprKind::Int(i) => write!(f, "{i}"),
            ExprKind::Var(v) => write!(f, "{v}"),
            ExprKind::Call { receiver, method, args } => {
                if let Some(r) = receiver {
                    write!(f, "{r}.")?;
                }
                write!(f, "{method}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            ExprKind::New { class } => write!(f, "new {class}()"),
            ExprKind::Unary { op, operand } => {
                write!(f, "{op}")?;
                nested(operand, f)
            }
            ExprKind::Binary { op, lhs, rhs } => {
                nested(lhs, f)?;
                write!(f, " {op} ")?;
                nested(rhs, f)
            }
            ExprKind::Ternary { cond, then, otherwise } => {
                nested(cond, f)?;
                write!(f, " ? ")?;
                nested(then, f)?;
                write!(f, " : ")?;
                nested(otherwise, f)
            }
            ExprKind::PostIncr { var, op } => write!(f, "{var}{op}"),
        }
    }
}
