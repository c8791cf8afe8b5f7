//! Mini-language frontend: parsing, name resolution, per-method control-flow
//! graphs, allocation sites, points-to facts and the atomically-executed set.

pub mod ast;
mod atomicity;
mod cfg;
pub mod lexer;
pub mod parser;
pub mod pointsto;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::contracts::{parse_contract, Contract, ContractError};
use ast::{ClassDecl, Expr, ExprKind, MethodDecl, SourceFile, Span, Stmt, StmtKind};
use pointsto::{PtNode, PtSource};

pub use atomicity::{callers, compute_atomically_executed, is_ae_fixpoint};
pub use cfg::{Cfg, CfgNode, ClientCall, ModuleCall, NodeId, NodeKind};
pub use pointsto::{PointsToResult, VarKey};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("{file}:{line}:{col}: syntax error: {msg}")]
    Syntax { file: String, line: u32, col: u32, msg: String },
    #[error("{file}:{line}: unresolved method `{name}`")]
    UnresolvedMethod { file: String, line: u32, name: String },
    #[error("{file}:{line}: method `{name}` is already declared at line {previous}")]
    DuplicateMethod { file: String, line: u32, name: String, previous: u32 },
    #[error("{file}:{line}: module `{module}` has no method `{method}`")]
    UnknownModuleMethod { file: String, line: u32, module: String, method: String },
    #[error("{file}: no thread entry point (declare a `thread` method or `main`)")]
    NoEntryPoints { file: String },
    #[error("{file}:{line}: invalid contract on `{module}`: {source}")]
    Contract {
        file: String,
        line: u32,
        module: String,
        #[source]
        source: ContractError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MethodId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SiteId(pub usize);

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Location {
    pub file: String,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.line)
    }
}

/// A client method with a body. Module methods and bodiless declarations are
/// not represented here.
#[derive(Debug, Clone)]
pub struct Method {
    pub id: MethodId,
    pub name: String,
    /// `None` for top-level functions.
    pub class: Option<String>,
    pub is_atomic: bool,
    pub is_thread_entry: bool,
    pub params: Vec<String>,
    pub cfg: Cfg,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub name: String,
    pub methods: Vec<MethodId>,
    pub span: Span,
}

/// A class carrying a contract annotation.
#[derive(Debug, Clone)]
pub struct Module {
    pub name: String,
    pub methods: BTreeSet<String>,
    pub contract: Contract,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationSite {
    pub id: SiteId,
    pub module: String,
    pub loc: Location,
}

#[derive(Debug, Clone)]
pub struct Program {
    pub file: String,
    /// Client classes, in source order.
    pub classes: Vec<ClassInfo>,
    pub modules: Vec<Module>,
    pub methods: Vec<Method>,
    pub entry_methods: BTreeSet<MethodId>,
    pub sites: Vec<AllocationSite>,
    pub pointsto: PointsToResult,
    pt_constraints: Vec<(PtNode, PtSource)>,
}

impl Program {
    pub fn method(&self, id: MethodId) -> &Method {
        &self.methods[id.0]
    }

    pub fn method_mut(&mut self, id: MethodId) -> &mut Method {
        &mut self.methods[id.0]
    }

    pub fn method_by_name(&self, name: &str) -> Option<&Method> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn module(&self, name: &str) -> Option<&Module> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn class(&self, name: &str) -> Option<&ClassInfo> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn site(&self, id: SiteId) -> &AllocationSite {
        &self.sites[id.0]
    }

    pub fn sites_of(&self, module: &str) -> Vec<SiteId> {
        self.sites.iter().filter(|s| s.module == module).map(|s| s.id).collect()
    }

    /// Methods reachable from `root` through client calls, `root` included.
    pub fn reachable_from(&self, root: MethodId) -> BTreeSet<MethodId> {
        let mut seen = BTreeSet::from([root]);
        let mut stack = vec![root];
        while let Some(m) = stack.pop() {
            for callee in self.method(m).cfg.callees() {
                if seen.insert(callee) {
                    stack.push(callee);
                }
            }
        }
        seen
    }

    /// Re-runs the points-to fixpoint over the program's assignment facts.
    pub fn compute_pointsto(&self) -> PointsToResult {
        pointsto::solve(&self.pt_constraints)
    }
}

/// Thread entry points: every `thread` method plus `main`.
pub fn find_thread_entries(program: &Program) -> Result<BTreeSet<MethodId>, FrontendError> {
    let entries = entry_set(&program.methods);
    if entries.is_empty() {
        return Err(FrontendError::NoEntryPoints { file: program.file.clone() });
    }
    Ok(entries)
}

fn entry_set(methods: &[Method]) -> BTreeSet<MethodId> {
    methods.iter().filter(|m| m.is_thread_entry || m.name == "main").map(|m| m.id).collect()
}

pub fn parse_program(file: &str, source: &str) -> Result<Program, FrontendError> {
    let ast = parser::parse_source(file, source)?;
    Builder::new(file, &ast)?.finish()
}

struct Builder<'a> {
    file: &'a str,
    ast: &'a SourceFile,
    modules: Vec<Module>,
    /// Client methods with a body, in id order, with their enclosing class.
    decls: Vec<(&'a MethodDecl, Option<&'a str>)>,
    by_name: HashMap<&'a str, MethodId>,
    bodiless: BTreeSet<&'a str>,
    /// Declared type of every variable that has one.
    types: HashMap<VarKey, String>,
    /// Locals (params and declarations) per method.
    locals: Vec<BTreeSet<String>>,
    sites: Vec<AllocationSite>,
    site_at: HashMap<Span, SiteId>,
}

impl<'a> Builder<'a> {
    fn new(file: &'a str, ast: &'a SourceFile) -> Result<Self, FrontendError> {
        let mut b = Builder {
            file,
            ast,
            modules: Vec::new(),
            decls: Vec::new(),
            by_name: HashMap::new(),
            bodiless: BTreeSet::new(),
            types: HashMap::new(),
            locals: Vec::new(),
            sites: Vec::new(),
            site_at: HashMap::new(),
        };
        b.collect_modules()?;
        b.collect_methods()?;
        b.collect_types();
        b.collect_sites();
        Ok(b)
    }

    fn client_classes(&self) -> impl Iterator<Item = &'a ClassDecl> {
        self.ast.classes.iter().filter(|c| c.contract.is_none())
    }

    fn is_module(&self, class: &str) -> bool {
        self.modules.iter().any(|m| m.name == class)
    }

    fn collect_modules(&mut self) -> Result<(), FrontendError> {
        for class in &self.ast.classes {
            let Some(ann) = &class.contract else { continue };
            let methods: BTreeSet<String> = class.methods.iter().map(|m| m.name.clone()).collect();
            let texts: Vec<&str> = ann.clauses.iter().map(|(t, _)| t.as_str()).collect();
            let contract = parse_contract(&texts, &methods).map_err(|source| {
                // Point at the offending clause when it can be identified.
                let line = texts
                    .iter()
                    .zip(&ann.clauses)
                    .find(|(t, _)| crate::contracts::parse_clause(t, &methods).is_err())
                    .map_or(ann.span.line, |(_, (_, s))| s.line);
                FrontendError::Contract { file: self.file.to_string(), line, module: class.name.clone(), source }
            })?;
            self.modules.push(Module { name: class.name.clone(), methods, contract, span: class.span });
        }
        Ok(())
    }

    fn collect_methods(&mut self) -> Result<(), FrontendError> {
        let mut all: Vec<(&'a MethodDecl, Option<&'a str>)> = Vec::new();
        for class in self.client_classes() {
            all.extend(class.methods.iter().map(|m| (m, Some(class.name.as_str()))));
        }
        all.extend(self.ast.functions.iter().map(|m| (m, None)));
        all.sort_by_key(|(m, _)| m.span);

        let mut seen: HashMap<&str, u32> = HashMap::new();
        for (m, class) in all {
            if let Some(&previous) = seen.get(m.name.as_str()) {
                return Err(FrontendError::DuplicateMethod {
                    file: self.file.to_string(),
                    line: m.span.line,
                    name: m.name.clone(),
                    previous,
                });
            }
            seen.insert(&m.name, m.span.line);
            if m.body.is_some() {
                self.by_name.insert(&m.name, MethodId(self.decls.len()));
                self.decls.push((m, class));
            } else {
                self.bodiless.insert(&m.name);
            }
        }
        Ok(())
    }

    fn collect_types(&mut self) {
        for g in &self.ast.globals {
            if let Some(t) = &g.ty {
                self.types.insert(VarKey::Global(g.name.clone()), t.clone());
            }
        }
        for class in self.client_classes() {
            for f in &class.fields {
                if let Some(t) = &f.ty {
                    self.types.insert(VarKey::Field(class.name.clone(), f.name.clone()), t.clone());
                }
            }
        }
        for (i, (m, _)) in self.decls.iter().enumerate() {
            let id = MethodId(i);
            let mut locals = BTreeSet::new();
            for p in &m.params {
                locals.insert(p.name.clone());
                if let Some(t) = &p.ty {
                    self.types.insert(VarKey::Local(id, p.name.clone()), t.clone());
                }
            }
            for_each_stmt(m.body.as_deref().unwrap_or_default(), &mut |s| {
                if let StmtKind::Decl { ty, name, .. } = &s.kind {
                    locals.insert(name.clone());
                    if let Some(t) = ty {
                        self.types.insert(VarKey::Local(id, name.clone()), t.clone());
                    }
                }
            });
            self.locals.push(locals);
        }
    }

    fn collect_sites(&mut self) {
        let mut found: Vec<(Span, String)> = Vec::new();
        let mut visit = |e: &Expr| {
            for (class, span) in e.allocations() {
                found.push((span, class.to_string()));
            }
        };
        for g in &self.ast.globals {
            g.init.iter().for_each(&mut visit);
        }
        for class in self.client_classes() {
            class.fields.iter().filter_map(|f| f.init.as_ref()).for_each(&mut visit);
        }
        for (m, _) in &self.decls {
            for_each_expr(m.body.as_deref().unwrap_or_default(), &mut visit);
        }
        // Nested expressions are visited both directly and through their parents.
        found.sort();
        found.dedup();
        for (span, class) in found {
            if !self.is_module(&class) {
                continue;
            }
            let id = SiteId(self.sites.len());
            self.site_at.insert(span, id);
            self.sites.push(AllocationSite {
                id,
                module: class,
                loc: Location { file: self.file.to_string(), line: span.line, col: span.col },
            });
        }
    }

    /// Resolves a variable occurrence: local, field of the enclosing class,
    /// unique field of any client class, and otherwise an implicit global.
    fn resolve_var(&self, method: Option<MethodId>, class: Option<&str>, name: &str) -> VarKey {
        if let Some(id) = method {
            if self.locals[id.0].contains(name) {
                return VarKey::Local(id, name.to_string());
            }
        }
        if let Some(c) = class.and_then(|c| self.client_classes().find(|k| k.name == c)) {
            if c.fields.iter().any(|f| f.name == name) {
                return VarKey::Field(c.name.clone(), name.to_string());
            }
        }
        if self.ast.globals.iter().any(|g| g.name == name) {
            return VarKey::Global(name.to_string());
        }
        let owners: Vec<&ClassDecl> =
            self.client_classes().filter(|c| c.fields.iter().any(|f| f.name == name)).collect();
        if let [only] = owners[..] {
            return VarKey::Field(only.name.clone(), name.to_string());
        }
        VarKey::Global(name.to_string())
    }

    fn sources(&self, method: Option<MethodId>, class: Option<&str>, e: &Expr) -> Vec<PtSource> {
        match &e.kind {
            ExprKind::Var(v) => vec![PtSource::Node(PtNode::Var(self.resolve_var(method, class, v)))],
            ExprKind::New { .. } => self.site_at.get(&e.span).map(|&s| PtSource::Site(s)).into_iter().collect(),
            ExprKind::Ternary { then, otherwise, .. } => {
                let mut v = self.sources(method, class, then);
                v.extend(self.sources(method, class, otherwise));
                v
            }
            ExprKind::Call { receiver, method: callee, .. } => {
                match self.client_callee(method, class, receiver.as_deref(), callee) {
                    Some(id) => vec![PtSource::Node(PtNode::Ret(id))],
                    None => Vec::new(),
                }
            }
            _ => Vec::new(),
        }
    }

    /// The client method targeted by a call, if it is a client call.
    fn client_callee(
        &self,
        method: Option<MethodId>,
        class: Option<&str>,
        receiver: Option<&str>,
        name: &str,
    ) -> Option<MethodId> {
        match receiver {
            None => self.by_name.get(name).copied(),
            Some(r) => {
                let class_name = if self.client_classes().any(|c| c.name == r) {
                    Some(r.to_string())
                } else {
                    let key = self.resolve_var(method, class, r);
                    self.types.get(&key).filter(|t| self.client_classes().any(|c| &c.name == *t)).cloned()
                };
                let id = self.by_name.get(name).copied()?;
                (self.decls[id.0].1 == class_name.as_deref()).then_some(id)
            }
        }
    }

    fn pt_constraints(&self) -> Vec<(PtNode, PtSource)> {
        let mut out = Vec::new();
        for g in &self.ast.globals {
            if let Some(init) = &g.init {
                let dst = PtNode::Var(VarKey::Global(g.name.clone()));
                out.extend(self.sources(None, None, init).into_iter().map(|s| (dst.clone(), s)));
            }
        }
        for class in self.client_classes() {
            for f in &class.fields {
                if let Some(init) = &f.init {
                    let dst = PtNode::Var(VarKey::Field(class.name.clone(), f.name.clone()));
                    out.extend(self.sources(None, Some(&class.name), init).into_iter().map(|s| (dst.clone(), s)));
                }
            }
        }
        for (i, (m, class)) in self.decls.iter().enumerate() {
            let id = MethodId(i);
            let push = |dst: PtNode, e: &Expr, out: &mut Vec<(PtNode, PtSource)>| {
                out.extend(self.sources(Some(id), *class, e).into_iter().map(|s| (dst.clone(), s)));
            };
            for_each_stmt(m.body.as_deref().unwrap_or_default(), &mut |s| match &s.kind {
                StmtKind::Decl { name, init: Some(e), .. } => {
                    push(PtNode::Var(VarKey::Local(id, name.clone())), e, &mut out)
                }
                StmtKind::Assign { target, value } => {
                    push(PtNode::Var(self.resolve_var(Some(id), *class, target)), value, &mut out)
                }
                StmtKind::Return(Some(e)) => push(PtNode::Ret(id), e, &mut out),
                _ => {}
            });
            for_each_expr(m.body.as_deref().unwrap_or_default(), &mut |e| {
                if let ExprKind::Call { receiver, method: callee, args } = &e.kind {
                    if let Some(target) = self.client_callee(Some(id), *class, receiver.as_deref(), callee) {
                        let params = &self.decls[target.0].0.params;
                        for (p, a) in params.iter().zip(args) {
                            push(PtNode::Var(VarKey::Local(target, p.name.clone())), a, &mut out);
                        }
                    }
                }
            });
        }
        out
    }

    fn classify(
        &self,
        id: MethodId,
        class: Option<&str>,
        pts: &PointsToResult,
        call: &Expr,
        result: Option<&str>,
    ) -> Result<NodeKind, FrontendError> {
        let ExprKind::Call { receiver, method, args } = &call.kind else {
            unreachable!("classify is only called on calls")
        };
        let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
        let result = result.map(str::to_string);
        if let Some(callee) = self.client_callee(Some(id), class, receiver.as_deref(), method) {
            return Ok(NodeKind::ClientCall(ClientCall { callee, args, result }));
        }
        let Some(recv) = receiver else {
            if self.bodiless.contains(method.as_str()) {
                return Ok(NodeKind::Other(call.to_string()));
            }
            return Err(FrontendError::UnresolvedMethod {
                file: self.file.to_string(),
                line: call.span.line,
                name: method.clone(),
            });
        };
        let key = self.resolve_var(Some(id), class, recv);
        let may = pts.may(&key).clone();
        let declaring = |m: &&Module| m.methods.contains(method);
        let modules: Vec<String> = match self.types.get(&key) {
            Some(t) if self.is_module(t) => {
                let module = self.modules.iter().find(|m| &m.name == t).unwrap();
                if !module.methods.contains(method) {
                    return Err(FrontendError::UnknownModuleMethod {
                        file: self.file.to_string(),
                        line: call.span.line,
                        module: t.clone(),
                        method: method.clone(),
                    });
                }
                vec![t.clone()]
            }
            _ => {
                let from_sites: BTreeSet<&str> = may.iter().map(|s| self.sites[s.0].module.as_str()).collect();
                let typed: Vec<String> = self
                    .modules
                    .iter()
                    .filter(declaring)
                    .filter(|m| from_sites.contains(m.name.as_str()))
                    .map(|m| m.name.clone())
                    .collect();
                if typed.is_empty() {
                    self.modules.iter().filter(declaring).map(|m| m.name.clone()).collect()
                } else {
                    typed
                }
            }
        };
        if modules.is_empty() {
            return Ok(NodeKind::Other(call.to_string()));
        }
        Ok(NodeKind::ModuleCall(ModuleCall {
            receiver: recv.clone(),
            receiver_var: key,
            modules,
            method: method.clone(),
            args,
            result,
            may,
        }))
    }

    fn finish(self) -> Result<Program, FrontendError> {
        let pt_constraints = self.pt_constraints();
        let pointsto = pointsto::solve(&pt_constraints);
        let mut methods = Vec::with_capacity(self.decls.len());
        for (i, (m, class)) in self.decls.iter().enumerate() {
            let id = MethodId(i);
            let cfg = cfg::build(self.file, m, &mut |call, result| self.classify(id, *class, &pointsto, call, result))?;
            methods.push(Method {
                id,
                name: m.name.clone(),
                class: class.map(str::to_string),
                is_atomic: m.is_atomic,
                is_thread_entry: m.is_thread_entry,
                params: m.params.iter().map(|p| p.name.clone()).collect(),
                cfg,
                span: m.span,
            });
        }
        let mut classes: Vec<ClassInfo> = self
            .client_classes()
            .map(|c| ClassInfo { name: c.name.clone(), methods: Vec::new(), span: c.span })
            .collect();
        for m in &methods {
            if let Some(c) = classes.iter_mut().find(|c| Some(&c.name) == m.class.as_ref()) {
                c.methods.push(m.id);
            }
        }
        Ok(Program {
            file: self.file.to_string(),
            classes,
            modules: self.modules,
            entry_methods: entry_set(&methods),
            methods,
            sites: self.sites,
            pointsto,
            pt_constraints,
        })
    }
}

/// Visits every statement, nested ones included, in source order.
fn for_each_stmt<'a>(block: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in block {
        f(s);
        match &s.kind {
            StmtKind::If { then, otherwise, .. } => {
                for_each_stmt(std::slice::from_ref(then.as_ref()), f);
                if let Some(o) = otherwise {
                    for_each_stmt(std::slice::from_ref(o.as_ref()), f);
                }
            }
            StmtKind::While { body, .. } => for_each_stmt(std::slice::from_ref(body.as_ref()), f),
            StmtKind::Block(b) => for_each_stmt(b, f),
            _ => {}
        }
    }
}

/// Visits every expression reachable from statements, sub-expressions included.
fn for_each_expr<'a>(block: &'a [Stmt], f: &mut impl FnMut(&'a Expr)) {
    fn walk<'a>(e: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
        f(e);
        match &e.kind {
            ExprKind::Call { args, .. } => args.iter().for_each(|a| walk(a, f)),
            ExprKind::Unary { operand, .. } => walk(operand, f),
            ExprKind::Binary { lhs, rhs, .. } => {
                walk(lhs, f);
                walk(rhs, f);
            }
            ExprKind::Ternary { cond, then, otherwise } => {
                walk(cond, f);
                walk(then, f);
                walk(otherwise, f);
            }
            _ => {}
        }
    }
    for_each_stmt(block, &mut |s| match &s.kind {
        StmtKind::Decl { init: Some(e), .. }
        | StmtKind::Assign { value: e, .. }
        | StmtKind::Expr(e)
        | StmtKind::If { cond: e, .. }
        | StmtKind::While { cond: e, .. }
        | StmtKind::Return(Some(e)) => walk(e, f),
        _ => {}
    });
}

/// Used by tests and tools that want a name-keyed view of the AE set.
pub fn ae_names(program: &Program) -> BTreeMap<String, bool> {
    let ae = compute_atomically_executed(program);
    program.methods.iter().map(|m| (m.name.clone(), ae.contains(&m.id))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse_program("t.mg", r#"class M contract{"a b"}{ void a(){} void b(){} } thread main(){ }"#).unwrap();
        assert_eq!(p.modules.len(), 1);
        assert_eq!(p.entry_methods.len(), 1);
        assert_eq!(p.method_by_name("main").unwrap().cfg.nodes.len(), 2);
    }

    #[test]
    fn dangling_and_duplicate_methods() {
        let e = parse_program("t.mg", "void f() { g(); }").unwrap_err();
        assert!(matches!(e, FrontendError::UnresolvedMethod { ref name, .. } if name == "g"));
        let e = parse_program("t.mg", "class A { void f() {} } class B { void f() {} }").unwrap_err();
        assert!(matches!(e, FrontendError::DuplicateMethod { .. }));
        // A bodiless declaration makes the call an opaque statement.
        let p = parse_program("t.mg", "void g(); void f() { g(); }").unwrap();
        assert_eq!(p.methods.len(), 1);
    }

    #[test]
    fn typed_receiver_must_declare_the_method() {
        let src = r#"class M contract{"a"}{ void a(){} } void f(M m) { m.z(); }"#;
        assert!(matches!(parse_program("t.mg", src), Err(FrontendError::UnknownModuleMethod { .. })));
    }

    #[test]
    fn contract_errors_carry_module() {
        let e = parse_program("t.mg", "class M contract{\"a*\"}{ void a(){} }").unwrap_err();
        assert!(e.to_string().contains("`M`"), "{e}");
    }

    #[test]
    fn no_entry_points() {
        let p = parse_program("t.mg", "void f() {}").unwrap();
        assert!(matches!(find_thread_entries(&p), Err(FrontendError::NoEntryPoints { .. })));
    }

    #[test]
    fn receivers_resolve_through_points_to() {
        let src = r#"
            class M contract{"a"}{ void a(){} }
            class N contract{"a"}{ void a(){} }
            void main() { var x = new M(); x.a(); var y = new N(); y.a(); }
        "#;
        let p = parse_program("t.mg", src).unwrap();
        let modules: Vec<Vec<String>> = p.method(MethodId(0))
            .cfg
            .nodes
            .iter()
            .filter_map(|n| match &n.kind {
                NodeKind::ModuleCall(c) => Some(c.modules.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(modules, [vec!["M".to_string()], vec!["N".to_string()]]);
        assert_eq!(p.sites.len(), 2);
        assert_eq!(p.sites[1].id.to_string(), "s2");
    }
}
