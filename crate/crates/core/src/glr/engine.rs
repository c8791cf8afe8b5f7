//! Depth-first generalized LR parsing of subwords.
//!
//! Every branch owns a linear stack. The word may start anywhere in a
//! sentential form, so the bottom of the stack is unknown: the first terminal
//! is shifted into every state that can receive it, and a reduction that pops
//! past the bottom fills the missing left context with stubs and continues in
//! every state reachable by a goto on its head. Once the word is consumed,
//! partially recognized productions are completed with right-hand stubs.

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use super::table::ParseTable;
use super::tree::{Label, ParseTree, TreeNode};
use crate::frontend::MethodId;
use crate::grammar::{Grammar, NtId, Symbol, TermId};

pub const DEFAULT_BRANCH_LIMIT: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlrError {
    #[error("parser exceeded {0} branches")]
    BranchLimit(u64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub branches: u64,
    pub trees: u64,
}

/// A subtree rooted at the lowest common ancestor of a word occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcaTree {
    pub tree: ParseTree,
    pub lca: NtId,
    pub method: Option<MethodId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Goal {
    /// Stop each branch at the first node covering the whole word.
    Lca,
    /// Build trees all the way up to the start symbol.
    Full,
    /// Full-word membership with a known stack bottom.
    Accept,
}

#[derive(Clone)]
struct Entry {
    state: usize,
    node: ParseTree,
}

#[derive(Clone)]
struct Branch {
    stack: Vec<Entry>,
    pos: usize,
    /// (head, stack height) of each reduction since the last shift.
    records: Vec<(NtId, usize)>,
}

struct Engine<'a> {
    g: &'a Grammar,
    t: &'a ParseTable,
    word: &'a [TermId],
    goal: Goal,
    limit: u64,
    /// Stack entries below this index are not part of the word.
    floor: usize,
    stats: ParseStats,
    seen: HashSet<ParseTree>,
    results: Vec<ParseTree>,
    accepted: bool,
}

/// All pruned parse trees, rooted at the start symbol, that derive `word` as
/// a contiguous subword of a sentential form.
pub fn parse_subword(g: &Grammar, t: &ParseTable, word: &[TermId]) -> Result<(Vec<ParseTree>, ParseStats), GlrError> {
    let mut e = Engine::new(g, t, word, Goal::Full, DEFAULT_BRANCH_LIMIT);
    e.run()?;
    Ok((e.results, e.stats))
}

/// Like [`parse_subword`] but every branch stops at the lowest common
/// ancestor of the word, which is all an atomicity check needs.
pub fn parse_until_lca(g: &Grammar, t: &ParseTable, word: &[TermId]) -> Result<(Vec<LcaTree>, ParseStats), GlrError> {
    parse_until_lca_with_limit(g, t, word, DEFAULT_BRANCH_LIMIT)
}

pub fn parse_until_lca_with_limit(
    g: &Grammar,
    t: &ParseTable,
    word: &[TermId],
    limit: u64,
) -> Result<(Vec<LcaTree>, ParseStats), GlrError> {
    let mut e = Engine::new(g, t, word, Goal::Lca, limit);
    e.run()?;
    let out = e
        .results
        .into_iter()
        .map(|tree| {
            let lca = tree.nt().expect("lca roots are nonterminals");
            LcaTree { method: g.nt(lca).owner, lca, tree }
        })
        .collect();
    Ok((out, e.stats))
}

/// Whether `g` derives exactly `word`.
pub fn accepts(g: &Grammar, t: &ParseTable, word: &[TermId]) -> Result<bool, GlrError> {
    let mut e = Engine::new(g, t, word, Goal::Accept, DEFAULT_BRANCH_LIMIT);
    e.run()?;
    Ok(e.accepted)
}

/// Maps terminal names to ids; `None` if some name is not a terminal of `g`.
pub fn word_ids(g: &Grammar, word: &[impl AsRef<str>]) -> Option<Vec<TermId>> {
    word.iter().map(|w| g.term_id(w.as_ref())).collect()
}

impl<'a> Engine<'a> {
    fn new(g: &'a Grammar, t: &'a ParseTable, word: &'a [TermId], goal: Goal, limit: u64) -> Self {
        Engine {
            g,
            t,
            word,
            goal,
            limit,
            floor: usize::from(goal == Goal::Accept),
            stats: ParseStats::default(),
            seen: HashSet::new(),
            results: Vec::new(),
            accepted: false,
        }
    }

    fn run(&mut self) -> Result<(), GlrError> {
        let mut work: Vec<Branch> = Vec::new();
        if self.goal == Goal::Accept {
            let bottom = Entry { state: 0, node: TreeNode::stub(Symbol::N(self.g.start)) };
            work.push(Branch { stack: vec![bottom], pos: 0, records: Vec::new() });
        } else {
            let Some(&w0) = self.word.first() else { return Ok(()) };
            for &s in self.t.shift_targets.get(w0.0 as usize).into_iter().flatten().rev() {
                work.push(Branch { stack: vec![Entry { state: s, node: TreeNode::leaf(w0, 0) }], pos: 1, records: Vec::new() });
            }
        }
        let mut next = Vec::new();
        while let Some(b) = work.pop() {
            self.stats.branches += 1;
            if self.stats.branches > self.limit {
                return Err(GlrError::BranchLimit(self.limit));
            }
            self.step(&b, &mut next);
            if self.accepted {
                break;
            }
            work.extend(next.drain(..).rev());
        }
        self.stats.trees = self.results.len() as u64;
        Ok(())
    }

    fn step(&mut self, b: &Branch, out: &mut Vec<Branch>) {
        let n = self.word.len();
        let state = &self.t.states[b.stack.last().expect("stacks are never empty").state];
        if b.pos < n {
            let term = self.word[b.pos];
            if let Some(&s) = state.shifts.get(&term) {
                let mut nb = b.clone();
                nb.stack.push(Entry { state: s, node: TreeNode::leaf(term, b.pos) });
                nb.pos += 1;
                nb.records.clear();
                out.push(nb);
            }
        }
        for &p in &state.reduces {
            let len = self.g.productions[p].body.len();
            // Empty reductions after the word add nothing a stub would not.
            if len == 0 && b.pos == n && self.goal != Goal::Accept {
                continue;
            }
            self.reduce(b, p, len, out);
        }
        if b.pos == n && self.goal != Goal::Accept {
            for it in &state.partial {
                if it.prod as usize != self.t.augmented {
                    self.reduce(b, it.prod as usize, it.dot as usize, out);
                }
            }
        }
    }

    /// Reduces production `p` using the top `dot` symbols of the body; the
    /// rest of the body (if any) becomes right-hand stubs.
    fn reduce(&mut self, b: &Branch, p: usize, dot: usize, out: &mut Vec<Branch>) {
        let prod = &self.g.productions[p];
        let rhs = &prod.body;
        let height = b.stack.len() - self.floor;
        let take = dot.min(height);
        let missing = dot - take;
        let rest = b.stack.len() - take;
        let popped = &b.stack[rest..];

        let mut children = Vec::with_capacity(rhs.len());
        let mut term_ord = 0;
        for (j, &sym) in rhs.iter().enumerate() {
            let child = if j < missing || j >= dot {
                TreeNode::stub(sym)
            } else {
                let node = popped[j - missing].node.clone();
                match (&node.label, prod.sites.get(term_ord)) {
                    (Label::Leaf { term, pos, site: None }, Some(site)) => Arc::new(TreeNode {
                        label: Label::Leaf { term: *term, pos: *pos, site: Some(site.clone()) },
                        children: Vec::new(),
                        cover: 1,
                    }),
                    _ => node,
                }
            };
            if matches!(sym, Symbol::T(_)) {
                term_ord += 1;
            }
            children.push(child);
        }
        let node = TreeNode::node(prod.head, p, children);
        if repeats_label(&node) {
            return;
        }

        let n = self.word.len();
        match self.goal {
            Goal::Lca if node.cover == n => {
                self.record(node);
                return;
            }
            Goal::Full if b.pos == n && prod.head == self.g.start && rest == self.floor => {
                self.record(node);
                return;
            }
            Goal::Accept if b.pos == n && prod.head == self.g.start && rest == self.floor => {
                self.accepted = true;
                return;
            }
            _ => {}
        }

        // Records above the new top belong to nodes now inside `node`; a later
        // node at those heights is a sibling, not a repetition.
        let depth = rest - self.floor + 1;
        let mut records: Vec<(NtId, usize)> = b.records.iter().copied().filter(|&(_, d)| d <= depth).collect();
        if records.contains(&(prod.head, depth)) {
            return;
        }
        records.push((prod.head, depth));
        let targets: Vec<usize> = if rest > 0 {
            self.t.goto(b.stack[rest - 1].state, prod.head).into_iter().collect()
        } else {
            self.t.goto_targets[prod.head.0 as usize].clone()
        };
        for s in targets {
            if node.cover == 0 && zero_cover_states(&b.stack[..rest]).any(|z| z == s) {
                continue;
            }
            let mut stack = b.stack[..rest].to_vec();
            stack.push(Entry { state: s, node: node.clone() });
            out.push(Branch { stack, pos: b.pos, records: records.clone() });
        }
    }

    fn record(&mut self, tree: ParseTree) {
        debug_assert!(!tree.has_unproductive_repetition(), "pruning let a repeating tree through");
        if self.seen.insert(tree.clone()) {
            self.results.push(tree);
        }
    }
}

/// States of the entries at the top of the stack that cover no terminal.
fn zero_cover_states(stack: &[Entry]) -> impl Iterator<Item = usize> + '_ {
    stack.iter().rev().take_while(|e| e.node.cover == 0).map(|e| e.state)
}

/// True if `node`'s label recurs below it along subtrees of equal coverage.
fn repeats_label(node: &TreeNode) -> bool {
    let Some(nt) = node.nt() else { return false };
    let mut todo: Vec<&TreeNode> = node.children.iter().filter(|c| c.cover == node.cover).map(|c| &**c).collect();
    while let Some(cur) = todo.pop() {
        if cur.nt() == Some(nt) {
            return true;
        }
        todo.extend(cur.children.iter().filter(|c| c.cover == node.cover).map(|c| &**c));
    }
    false
}
