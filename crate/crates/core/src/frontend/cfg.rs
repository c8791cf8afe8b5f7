//! Control-flow graph construction from method bodies.
//!
//! Every call becomes its own node (arguments before the call consuming them);
//! a statement without calls becomes one `Other` node. Conditions are opaque:
//! the last node of a condition branches to both outcomes.

use std::collections::BTreeSet;

use super::ast::{Expr, MethodDecl, Stmt, StmtKind};
use super::{FrontendError, Location, MethodId, SiteId, VarKey};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleCall {
    pub receiver: String,
    pub receiver_var: VarKey,
    /// Modules the receiver may denote that declare `method`.
    pub modules: Vec<String>,
    pub method: String,
    /// Canonical text of each argument expression.
    pub args: Vec<String>,
    pub result: Option<String>,
    /// Allocation sites the receiver may point to.
    pub may: BTreeSet<SiteId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientCall {
    pub callee: MethodId,
    pub args: Vec<String>,
    pub result: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Entry,
    ModuleCall(ModuleCall),
    ClientCall(ClientCall),
    Return,
    /// Any node that neither calls nor enters/leaves; the label is for dumps.
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub loc: Location,
}

/// Node 0 is the entry; exactly one node is the return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    pub nodes: Vec<CfgNode>,
    pub succ: Vec<Vec<NodeId>>,
}

impl Cfg {
    pub const ENTRY: NodeId = 0;

    pub fn succ(&self, n: NodeId) -> &[NodeId] {
        &self.succ[n]
    }

    pub fn return_node(&self) -> NodeId {
        self.nodes.iter().position(|n| n.kind == NodeKind::Return).expect("every cfg has a return node")
    }

    pub fn callees(&self) -> impl Iterator<Item = MethodId> + '_ {
        self.nodes.iter().filter_map(|n| match &n.kind {
            NodeKind::ClientCall(c) => Some(c.callee),
            _ => None,
        })
    }
}

type Classify<'c> = dyn FnMut(&Expr, Option<&str>) -> Result<NodeKind, FrontendError> + 'c;

pub(super) fn build(file: &str, method: &MethodDecl, classify: &mut Classify<'_>) -> Result<Cfg, FrontendError> {
    let mut b = Builder { file, classify, kinds: Vec::new(), succ: Vec::new(), returns: Vec::new() };
    let entry = b.node(NodeKind::Entry, method.span, &[]);
    let exits = b.block(method.body.as_deref().unwrap_or_default(), vec![entry])?;
    let mut preds = exits;
    preds.append(&mut b.returns);
    b.node(NodeKind::Return, method.span, &preds);
    Ok(b.finish())
}

struct Builder<'f, 'c> {
    file: &'f str,
    classify: &'f mut Classify<'c>,
    kinds: Vec<(NodeKind, super::Span)>,
    succ: Vec<Vec<NodeId>>,
    /// Nodes that end in a `return` statement.
    returns: Vec<NodeId>,
}

impl Builder<'_, '_> {
    fn node(&mut self, kind: NodeKind, span: super::Span, preds: &[NodeId]) -> NodeId {
        let id = self.kinds.len();
        self.kinds.push((kind, span));
        self.succ.push(Vec::new());
        self.link(preds, id);
        id
    }

    fn link(&mut self, preds: &[NodeId], to: NodeId) {
        for &p in preds {
            if !self.succ[p].contains(&to) {
                self.succ[p].push(to);
            }
        }
    }

    /// Emits the call nodes of `e` (or one `Other` node labelled `label` when it
    /// has none) and returns the first and last node.
    fn expr(
        &mut self,
        e: &Expr,
        result: Option<&str>,
        label: String,
        span: super::Span,
        preds: &[NodeId],
    ) -> Result<(NodeId, NodeId), FrontendError> {
        let calls = e.calls();
        if calls.is_empty() {
            let n = self.node(NodeKind::Other(label), span, preds);
            return Ok((n, n));
        }
        let outermost = std::ptr::eq(*calls.last().unwrap(), e);
        let mut prev: Vec<NodeId> = preds.to_vec();
        let mut first = None;
        for (i, call) in calls.iter().enumerate() {
            let res = if outermost && i + 1 == calls.len() { result } else { None };
            let kind = (self.classify)(call, res)?;
            let n = self.node(kind, call.span, &prev);
            first.get_or_insert(n);
            prev = vec![n];
        }
        Ok((first.unwrap(), prev[0]))
    }

    fn block(&mut self, stmts: &[Stmt], mut preds: Vec<NodeId>) -> Result<Vec<NodeId>, FrontendError> {
        for s in stmts {
            preds = self.stmt(s, preds)?;
        }
        Ok(preds)
    }

    fn stmt(&mut self, s: &Stmt, preds: Vec<NodeId>) -> Result<Vec<NodeId>, FrontendError> {
        match &s.kind {
            StmtKind::Empty => Ok(preds),
            StmtKind::Block(b) => self.block(b, preds),
            StmtKind::Decl { name, init, .. } => match init {
                Some(e) => {
                    let (_, last) = self.expr(e, Some(name), format!("{name} = {e}"), s.span, &preds)?;
                    Ok(vec![last])
                }
                None => Ok(vec![self.node(NodeKind::Other(format!("decl {name}")), s.span, &preds)]),
            },
            StmtKind::Assign { target, value } => {
                let (_, last) = self.expr(value, Some(target), format!("{target} = {value}"), s.span, &preds)?;
                Ok(vec![last])
            }
            StmtKind::Expr(e) => {
                let (_, last) = self.expr(e, None, e.to_string(), s.span, &preds)?;
                Ok(vec![last])
            }
            StmtKind::Return(value) => {
                let exits = match value {
                    Some(e) if !e.calls().is_empty() => {
                        vec![self.expr(e, None, String::new(), s.span, &preds)?.1]
                    }
                    _ => preds,
                };
                self.returns.extend(exits);
                Ok(Vec::new())
            }
            StmtKind::If { cond, then, otherwise } => {
                let (_, branch) = self.expr(cond, None, cond.to_string(), s.span, &preds)?;
                let mut exits = self.stmt(then, vec![branch])?;
                match otherwise {
                    Some(o) => exits.extend(self.stmt(o, vec![branch])?),
                    None => exits.push(branch),
                }
                Ok(exits)
            }
            StmtKind::While { cond, body } => {
                let (head, branch) = self.expr(cond, None, cond.to_string(), s.span, &preds)?;
                let body_exits = self.stmt(body, vec![branch])?;
                self.link(&body_exits, head);
                Ok(vec![branch])
            }
        }
    }

    /// Drops nodes unreachable from the entry and renumbers the rest in
    /// creation order.
    fn finish(self) -> Cfg {
        let n = self.kinds.len();
        let mut reachable = vec![false; n];
        let mut stack = vec![0];
        reachable[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &self.succ[x] {
                if !reachable[y] {
                    reachable[y] = true;
                    stack.push(y);
                }
            }
        }
        let mut renum = vec![usize::MAX; n];
        let mut next = 0;
        for (i, r) in reachable.iter().enumerate() {
            if *r {
                renum[i] = next;
                next += 1;
            }
        }
        let mut nodes = Vec::with_capacity(next);
        let mut succ = Vec::with_capacity(next);
        for (i, (kind, span)) in self.kinds.into_iter().enumerate() {
            if !reachable[i] {
                continue;
            }
            nodes.push(CfgNode {
                id: renum[i],
                kind,
                loc: Location { file: self.file.to_string(), line: span.line, col: span.col },
            });
            succ.push(self.succ[i].iter().map(|&s| renum[s]).collect());
        }
        Cfg { nodes, succ }
    }
}
