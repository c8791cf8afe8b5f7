//! Behavior grammars: context-free grammars over module method names that
//! capture how a thread (or class) may use a module.

mod build;
mod simplify;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::frontend::{Location, MethodId, NodeId};

pub use build::{
    build_behavior_grammar, build_behavior_grammar_pointsto, build_class_scope_grammar, sites_used_by, SiteRef,
};
pub use simplify::simplify_grammar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NtId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    T(TermId),
    N(NtId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NtKind {
    /// Stands for a whole client method (`@f`).
    Method,
    /// Stands for one CFG node (`f.3`).
    Node,
    /// Start symbols introduced by class scope or simplification, and symbols
    /// read from dumps.
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nonterminal {
    pub name: String,
    /// The client method whose body this symbol belongs to.
    pub owner: Option<MethodId>,
    pub kind: NtKind,
}

/// The module call behind one terminal occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CallSite {
    /// Client method containing the call.
    pub method: MethodId,
    pub node: NodeId,
    pub loc: Location,
    pub receiver: String,
    pub callee: String,
    pub args: Vec<String>,
    pub result: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    Node(MethodId, NodeId),
    Method(MethodId),
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Production {
    pub head: NtId,
    pub body: Vec<Symbol>,
    pub origin: Origin,
    /// One entry per terminal of `body`, in order. Empty for grammars read
    /// from dumps, which carry no call sites.
    pub sites: Vec<Arc<CallSite>>,
}

impl Production {
    pub fn is_epsilon(&self) -> bool {
        self.body.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub nonterminals: Vec<Nonterminal>,
    pub terminals: Vec<String>,
    pub productions: Vec<Production>,
    pub start: NtId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DumpError {
    #[error("line {0}: expected `Start: <symbol>` header")]
    MissingStart(usize),
    #[error("line {line}: expected `Head -> body`, found `{text}`")]
    BadLine { line: usize, text: String },
    #[error("start symbol `{0}` has no productions")]
    StartWithoutProductions(String),
}

impl Grammar {
    pub fn nt(&self, id: NtId) -> &Nonterminal {
        &self.nonterminals[id.0 as usize]
    }

    pub fn nt_name(&self, id: NtId) -> &str {
        &self.nonterminals[id.0 as usize].name
    }

    pub fn term_name(&self, id: TermId) -> &str {
        &self.terminals[id.0 as usize]
    }

    pub fn term_id(&self, name: &str) -> Option<TermId> {
        self.terminals.iter().position(|t| t == name).map(|i| TermId(i as u32))
    }

    pub fn nt_id(&self, name: &str) -> Option<NtId> {
        self.nonterminals.iter().position(|n| n.name == name).map(|i| NtId(i as u32))
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        match s {
            Symbol::T(t) => self.term_name(t),
            Symbol::N(n) => self.nt_name(n),
        }
    }

    pub fn productions_of(&self, head: NtId) -> impl Iterator<Item = (usize, &Production)> {
        self.productions.iter().enumerate().filter(move |(_, p)| p.head == head)
    }

    /// Production indices grouped by head.
    pub fn by_head(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nonterminals.len()];
        for (i, p) in self.productions.iter().enumerate() {
            out[p.head.0 as usize].push(i);
        }
        out
    }

    pub fn render_body(&self, body: &[Symbol]) -> String {
        if body.is_empty() {
            return "epsilon".to_string();
        }
        body.iter().map(|&s| self.symbol_name(s)).collect::<Vec<_>>().join(" ")
    }

    /// Text dump: a `Start:` header and one `Head -> body` line per production.
    pub fn dump(&self) -> String {
        let mut out = format!("Start: {}\n", self.nt_name(self.start));
        for p in &self.productions {
            out.push_str(&format!("{} -> {}\n", self.nt_name(p.head), self.render_body(&p.body)));
        }
        out
    }

    /// Reads a dump. A symbol is a nonterminal iff it heads some production.
    pub fn parse_dump(text: &str) -> Result<Grammar, DumpError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let start = match lines.next() {
            Some((_, l)) if l.trim_start().starts_with("Start:") => l.trim()["Start:".len()..].trim().to_string(),
            Some((i, _)) => return Err(DumpError::MissingStart(i + 1)),
            None => return Err(DumpError::MissingStart(1)),
        };
        let mut rules: Vec<(String, Vec<String>)> = Vec::new();
        for (i, line) in lines {
            let Some((head, body)) = line.split_once("->") else {
                return Err(DumpError::BadLine { line: i + 1, text: line.to_string() });
            };
            let head = head.trim();
            if head.is_empty() || head.contains(char::is_whitespace) {
                return Err(DumpError::BadLine { line: i + 1, text: line.to_string() });
            }
            let body: Vec<String> =
                body.split_whitespace().filter(|s| *s != "epsilon" && *s != "ε").map(str::to_string).collect();
            rules.push((head.to_string(), body));
        }
        let mut g = GrammarBuilder::default();
        let heads: BTreeSet<&str> = rules.iter().map(|(h, _)| h.as_str()).collect();
        if !heads.contains(start.as_str()) {
            return Err(DumpError::StartWithoutProductions(start));
        }
        let start_id = g.nt(&start, None, NtKind::Synthetic);
        for (head, body) in &rules {
            let h = g.nt(head, None, NtKind::Synthetic);
            let body = body
                .iter()
                .map(|s| {
                    if heads.contains(s.as_str()) {
                        Symbol::N(g.nt(s, None, NtKind::Synthetic))
                    } else {
                        Symbol::T(g.term(s))
                    }
                })
                .collect();
            g.push(Production { head: h, body, origin: Origin::Synthetic, sites: Vec::new() });
        }
        Ok(g.finish(start_id))
    }

    /// All terminal words of length ≤ `max_len` derivable from the start symbol.
    pub fn bounded_language(&self, max_len: usize) -> BTreeSet<Vec<String>> {
        let sets = self.bounded_sets(max_len);
        sets[self.start.0 as usize]
            .iter()
            .map(|w| w.iter().map(|&t| self.term_name(t).to_string()).collect())
            .collect()
    }

    /// Per nonterminal, the derivable words of length ≤ `max_len` (least fixpoint).
    pub fn bounded_sets(&self, max_len: usize) -> Vec<BTreeSet<Vec<TermId>>> {
        let mut sets: Vec<BTreeSet<Vec<TermId>>> = vec![BTreeSet::new(); self.nonterminals.len()];
        loop {
            let mut changed = false;
            for p in &self.productions {
                let mut acc: BTreeSet<Vec<TermId>> = BTreeSet::from([Vec::new()]);
                for &s in &p.body {
                    let options: Vec<Vec<TermId>> = match s {
                        Symbol::T(t) => vec![vec![t]],
                        Symbol::N(n) => sets[n.0 as usize].iter().cloned().collect(),
                    };
                    let mut next = BTreeSet::new();
                    for prefix in &acc {
                        for o in &options {
                            if prefix.len() + o.len() <= max_len {
                                let mut w = prefix.clone();
                                w.extend(o);
                                next.insert(w);
                            }
                        }
                    }
                    acc = next;
                    if acc.is_empty() {
                        break;
                    }
                }
                let target = &mut sets[p.head.0 as usize];
                for w in acc {
                    changed |= target.insert(w);
                }
            }
            if !changed {
                return sets;
            }
        }
    }

    /// Nonterminals reachable from the start symbol.
    pub fn reachable(&self) -> BTreeSet<NtId> {
        let by_head = self.by_head();
        let mut seen = BTreeSet::from([self.start]);
        let mut stack = vec![self.start];
        while let Some(n) = stack.pop() {
            for &pi in &by_head[n.0 as usize] {
                for &s in &self.productions[pi].body {
                    if let Symbol::N(m) = s {
                        if seen.insert(m) {
                            stack.push(m);
                        }
                    }
                }
            }
        }
        seen
    }

    /// Terminal positions of every production must carry a site when any do.
    pub fn is_traceable(&self) -> bool {
        self.productions.iter().all(|p| {
            let terms = p.body.iter().filter(|s| matches!(s, Symbol::T(_))).count();
            p.sites.len() == terms && p.sites.iter().zip(p.body.iter().filter(|s| matches!(s, Symbol::T(_)))).all(
                |(site, s)| matches!(s, Symbol::T(t) if self.term_name(*t) == site.callee),
            )
        })
    }

    pub fn stats(&self) -> GrammarStats {
        GrammarStats { nonterminals: self.nonterminals.len(), productions: self.productions.len() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrammarStats {
    pub nonterminals: usize,
    pub productions: usize,
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Incremental construction with interning and set semantics for productions.
#[derive(Debug, Default)]
pub(crate) struct GrammarBuilder {
    nonterminals: Vec<Nonterminal>,
    nt_index: HashMap<String, NtId>,
    terminals: Vec<String>,
    term_index: HashMap<String, TermId>,
    productions: Vec<Production>,
    seen: std::collections::HashSet<(NtId, Vec<Symbol>, Vec<Arc<CallSite>>)>,
}

impl GrammarBuilder {
    pub(crate) fn with_terminals<'a>(terms: impl IntoIterator<Item = &'a String>) -> Self {
        let mut b = GrammarBuilder::default();
        for t in terms {
            b.term(t);
        }
        b
    }

    pub(crate) fn nt(&mut self, name: &str, owner: Option<MethodId>, kind: NtKind) -> NtId {
        if let Some(&id) = self.nt_index.get(name) {
            return id;
        }
        let id = NtId(self.nonterminals.len() as u32);
        self.nonterminals.push(Nonterminal { name: name.to_string(), owner, kind });
        self.nt_index.insert(name.to_string(), id);
        id
    }

    pub(crate) fn term(&mut self, name: &str) -> TermId {
        if let Some(&id) = self.term_index.get(name) {
            return id;
        }
        let id = TermId(self.terminals.len() as u32);
        self.terminals.push(name.to_string());
        self.term_index.insert(name.to_string(), id);
        id
    }

    pub(crate) fn push(&mut self, p: Production) {
        if self.seen.insert((p.head, p.body.clone(), p.sites.clone())) {
            self.productions.push(p);
        }
    }

    pub(crate) fn finish(self, start: NtId) -> Grammar {
        Grammar { nonterminals: self.nonterminals, terminals: self.terminals, productions: self.productions, start }
    }
}

/// Checks whether two grammars have identical production sets up to a
/// bijective renaming of nonterminals (terminals must match by name), and
/// returns the renaming found.
pub fn find_renaming(a: &Grammar, b: &Grammar) -> Option<BTreeMap<String, String>> {
    if a.productions.len() != b.productions.len() || a.nonterminals.len() != b.nonterminals.len() {
        return None;
    }
    // Express `a`'s terminals in `b`'s ids; unknown terminals cannot match.
    let mut a_prods: Vec<(NtId, Vec<Symbol>)> = Vec::with_capacity(a.productions.len());
    for p in &a.productions {
        let mut body = Vec::with_capacity(p.body.len());
        for &s in &p.body {
            body.push(match s {
                Symbol::T(t) => Symbol::T(b.term_id(a.term_name(t))?),
                n => n,
            });
        }
        a_prods.push((p.head, body));
    }
    let b_set: BTreeSet<(NtId, Vec<Symbol>)> = b.productions.iter().map(|p| (p.head, p.body.clone())).collect();
    let b_counts: Vec<usize> = b.by_head().iter().map(Vec::len).collect();
    let a_counts: Vec<usize> = a.by_head().iter().map(Vec::len).collect();

    let mut order: Vec<NtId> = vec![a.start];
    for (h, body) in &a_prods {
        for s in std::iter::once(Symbol::N(*h)).chain(body.iter().copied()) {
            if let Symbol::N(n) = s {
                if !order.contains(&n) {
                    order.push(n);
                }
            }
        }
    }

    struct Search<'g> {
        a_prods: &'g [(NtId, Vec<Symbol>)],
        b_set: &'g BTreeSet<(NtId, Vec<Symbol>)>,
        a_counts: &'g [usize],
        b_counts: &'g [usize],
        order: &'g [NtId],
        map: Vec<Option<NtId>>,
        used: Vec<bool>,
    }

    impl Search<'_> {
        /// Every production of `a` whose symbols are all mapped must exist in `b`.
        fn consistent(&self) -> bool {
            self.a_prods.iter().all(|(h, body)| {
                let Some(bh) = self.map[h.0 as usize] else { return true };
                let mut mapped = Vec::with_capacity(body.len());
                for &s in body {
                    match s {
                        Symbol::N(n) => match self.map[n.0 as usize] {
                            Some(m) => mapped.push(Symbol::N(m)),
                            None => return true,
                        },
                        t => mapped.push(t),
                    }
                }
                self.b_set.contains(&(bh, mapped))
            })
        }

        fn run(&mut self, i: usize) -> bool {
            if !self.consistent() {
                return false;
            }
            let Some(&n) = self.order.get(i) else { return true };
            if self.map[n.0 as usize].is_some() {
                return self.run(i + 1);
            }
            for cand in 0..self.b_counts.len() {
                if self.used[cand] || self.b_counts[cand] != self.a_counts[n.0 as usize] {
                    continue;
                }
                self.map[n.0 as usize] = Some(NtId(cand as u32));
                self.used[cand] = true;
                if self.run(i + 1) {
                    return true;
                }
                self.map[n.0 as usize] = None;
                self.used[cand] = false;
            }
            false
        }
    }

    let mut search = Search {
        a_prods: &a_prods,
        b_set: &b_set,
        a_counts: &a_counts,
        b_counts: &b_counts,
        order: &order,
        map: vec![None; a.nonterminals.len()],
        used: vec![false; b.nonterminals.len()],
    };
    if a_counts[a.start.0 as usize] != b_counts[b.start.0 as usize] {
        return None;
    }
    search.map[a.start.0 as usize] = Some(b.start);
    search.used[b.start.0 as usize] = true;
    if !search.run(0) || search.map.iter().any(Option::is_none) {
        return None;
    }
    Some(
        search
            .map
            .iter()
            .enumerate()
            .map(|(i, m)| (a.nonterminals[i].name.clone(), b.nt_name(m.unwrap()).to_string()))
            .collect(),
    )
}
