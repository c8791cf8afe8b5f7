//! Grammar extraction from control-flow graphs.
//!
//! Each CFG node becomes a nonterminal `<method>.<index>` and each client
//! method a nonterminal `@<method>`. Entry nodes hang off their method
//! symbol, module calls emit their terminal, client calls emit the callee's
//! method symbol, return nodes derive ε, and every other node passes through.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::{CallSite, Grammar, GrammarBuilder, NtId, NtKind, Origin, Production, Symbol};
use crate::frontend::{MethodId, ModuleCall, NodeKind, Program, SiteId};

/// The module instance a points-to grammar is built for. `External` stands
/// for the instance(s) reached through receivers with no known allocation
/// site, e.g. a module handed to the program from outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SiteRef {
    Alloc(SiteId),
    External,
}

impl fmt::Display for SiteRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SiteRef::Alloc(s) => write!(f, "{s}"),
            SiteRef::External => write!(f, "external"),
        }
    }
}

/// Receivers without an allocation site all denote the external instance.
fn may_sites(call: &ModuleCall) -> BTreeSet<SiteRef> {
    if call.may.is_empty() {
        BTreeSet::from([SiteRef::External])
    } else {
        call.may.iter().map(|&s| SiteRef::Alloc(s)).collect()
    }
}

/// What a module call contributes for the instance under analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Emit {
    Terminal,
    Skip,
    Both,
}

#[derive(Debug, Clone, Copy)]
struct Config<'a> {
    module: &'a str,
    site: Option<SiteRef>,
    /// In class scope, calls leaving this class (`None`: the top-level
    /// functions) are opaque.
    class: Option<Option<&'a str>>,
}

impl Config<'_> {
    fn emit(&self, call: &ModuleCall) -> Emit {
        if !call.modules.iter().any(|m| m == self.module) {
            return Emit::Skip;
        }
        let Some(site) = self.site else { return Emit::Terminal };
        let may = may_sites(call);
        match (may.contains(&site), may.len()) {
            (true, 1) => Emit::Terminal,
            (true, _) => Emit::Both,
            (false, _) => Emit::Skip,
        }
    }
}

/// Grammar of the module usage of the thread started by `entry`.
pub fn build_behavior_grammar(program: &Program, module: &str, entry: MethodId) -> Grammar {
    build_from_entry(program, Config { module, site: None, class: None }, entry)
}

/// Like [`build_behavior_grammar`], restricted to one module instance: calls
/// whose receiver must denote `site` emit their terminal, calls that may
/// denote it emit the terminal or nothing, and all others emit nothing.
pub fn build_behavior_grammar_pointsto(program: &Program, module: &str, entry: MethodId, site: SiteRef) -> Grammar {
    build_from_entry(program, Config { module, site: Some(site), class: None }, entry)
}

/// One grammar for all methods of `class` (the top-level functions when
/// `None`), with a synthetic start symbol deriving each method symbol. Calls
/// to methods outside the class are treated as ordinary statements.
pub fn build_class_scope_grammar(program: &Program, module: &str, class: Option<&str>, site: Option<SiteRef>) -> Grammar {
    let cfg = Config { module, site, class: Some(class) };
    let roots: Vec<MethodId> =
        program.methods.iter().filter(|m| m.class.as_deref() == class).map(|m| m.id).collect();
    let mut b = GrammarBuilder::with_terminals(terminals(program, module).iter());
    let start = b.nt(&format!("<{}>", class.unwrap_or("top-level")), None, NtKind::Synthetic);
    for &m in &roots {
        let sym = method_symbol(&mut b, program, m);
        b.push(Production { head: start, body: vec![Symbol::N(sym)], origin: Origin::Synthetic, sites: Vec::new() });
    }
    let mut done = BTreeSet::new();
    for &m in &roots {
        add_reachable(&mut b, program, cfg, m, &mut done);
    }
    b.finish(start)
}

/// Allocation sites of `module` that code reachable from `roots` may use,
/// plus the external instance when some receiver has no known site. With
/// `class_scope`, only methods sharing the class of the roots count.
pub fn sites_used_by(program: &Program, module: &str, roots: &[MethodId], class_scope: bool) -> BTreeSet<SiteRef> {
    let class = roots.first().filter(|_| class_scope).map(|&r| program.method(r).class.as_deref());
    let mut out = BTreeSet::new();
    let mut methods = BTreeSet::new();
    for &r in roots {
        for m in program.reachable_from(r) {
            methods.insert(m);
        }
    }
    for m in methods {
        let method = program.method(m);
        if class.is_some_and(|c| method.class.as_deref() != c) {
            continue;
        }
        for n in &method.cfg.nodes {
            if let NodeKind::ModuleCall(c) = &n.kind {
                if c.modules.iter().any(|x| x == module) {
                    out.extend(may_sites(c).into_iter().filter(|s| match s {
                        SiteRef::Alloc(id) => program.site(*id).module == module,
                        SiteRef::External => true,
                    }));
                }
            }
        }
    }
    out
}

fn terminals(program: &Program, module: &str) -> Vec<String> {
    program.module(module).map(|m| m.methods.iter().cloned().collect()).unwrap_or_default()
}

fn method_symbol(b: &mut GrammarBuilder, program: &Program, m: MethodId) -> NtId {
    b.nt(&format!("@{}", program.method(m).name), Some(m), NtKind::Method)
}

fn build_from_entry(program: &Program, cfg: Config<'_>, entry: MethodId) -> Grammar {
    let mut b = GrammarBuilder::with_terminals(terminals(program, cfg.module).iter());
    let start = method_symbol(&mut b, program, entry);
    let mut done = BTreeSet::new();
    add_reachable(&mut b, program, cfg, entry, &mut done);
    b.finish(start)
}

fn add_reachable(
    b: &mut GrammarBuilder,
    program: &Program,
    cfg: Config<'_>,
    root: MethodId,
    done: &mut BTreeSet<MethodId>,
) {
    let mut stack = vec![root];
    while let Some(m) = stack.pop() {
        if !done.insert(m) {
            continue;
        }
        for callee in add_method(b, program, cfg, m) {
            if !done.contains(&callee) {
                stack.push(callee);
            }
        }
    }
}

/// Emits the productions of one method and returns the client methods it calls.
fn add_method(b: &mut GrammarBuilder, program: &Program, cfg: Config<'_>, m: MethodId) -> Vec<MethodId> {
    let method = program.method(m);
    let graph = &method.cfg;
    let node_sym =
        |b: &mut GrammarBuilder, n: usize| b.nt(&format!("{}.{}", method.name, n), Some(m), NtKind::Node);
    let mut callees = Vec::new();
    for node in &graph.nodes {
        let alpha = node_sym(b, node.id);
        let origin = Origin::Node(m, node.id);
        let succs: Vec<NtId> = graph.succ(node.id).iter().map(|&s| node_sym(b, s)).collect();
        let pass = |b: &mut GrammarBuilder, prefix: Vec<Symbol>, sites: Vec<Arc<CallSite>>| {
            for &beta in &succs {
                let mut body = prefix.clone();
                body.push(Symbol::N(beta));
                b.push(Production { head: alpha, body, origin, sites: sites.clone() });
            }
        };
        match &node.kind {
            NodeKind::Entry => {
                let sym = method_symbol(b, program, m);
                b.push(Production { head: sym, body: vec![Symbol::N(alpha)], origin: Origin::Method(m), sites: Vec::new() });
                pass(b, Vec::new(), Vec::new());
            }
            NodeKind::ModuleCall(call) => {
                let emit = cfg.emit(call);
                if matches!(emit, Emit::Terminal | Emit::Both) {
                    let t = b.term(&call.method);
                    let site = Arc::new(CallSite {
                        method: m,
                        node: node.id,
                        loc: node.loc.clone(),
                        receiver: call.receiver.clone(),
                        callee: call.method.clone(),
                        args: call.args.clone(),
                        result: call.result.clone(),
                    });
                    pass(b, vec![Symbol::T(t)], vec![site]);
                }
                if matches!(emit, Emit::Skip | Emit::Both) {
                    pass(b, Vec::new(), Vec::new());
                }
            }
            NodeKind::ClientCall(call) => {
                let callee = program.method(call.callee);
                if cfg.class.is_some_and(|c| callee.class.as_deref() != c) {
                    pass(b, Vec::new(), Vec::new());
                } else {
                    let sym = method_symbol(b, program, call.callee);
                    pass(b, vec![Symbol::N(sym)], Vec::new());
                    callees.push(call.callee);
                }
            }
            NodeKind::Return => {
                b.push(Production { head: alpha, body: Vec::new(), origin, sites: Vec::new() });
            }
            NodeKind::Other(_) => pass(b, Vec::new(), Vec::new()),
        }
    }
    callees
}
