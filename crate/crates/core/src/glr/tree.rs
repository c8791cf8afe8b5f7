//! Parse trees for subwords: nonterminal nodes, word terminals and
//! unexpanded context symbols on either side of the word.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::grammar::{CallSite, Grammar, NtId, Symbol, TermId};

pub type ParseTree = Arc<TreeNode>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Nt { nt: NtId, prod: usize },
    /// Terminal number `pos` of the parsed word.
    Leaf { term: TermId, pos: usize, site: Option<Arc<CallSite>> },
    /// A symbol of a production body lying outside the word.
    Stub(Symbol),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeNode {
    pub label: Label,
    pub children: Vec<ParseTree>,
    /// Number of word terminals below this node.
    pub cover: usize,
}

impl TreeNode {
    pub fn leaf(term: TermId, pos: usize) -> ParseTree {
        Arc::new(TreeNode { label: Label::Leaf { term, pos, site: None }, children: Vec::new(), cover: 1 })
    }

    pub fn stub(sym: Symbol) -> ParseTree {
        Arc::new(TreeNode { label: Label::Stub(sym), children: Vec::new(), cover: 0 })
    }

    pub fn node(nt: NtId, prod: usize, children: Vec<ParseTree>) -> ParseTree {
        let cover = children.iter().map(|c| c.cover).sum();
        Arc::new(TreeNode { label: Label::Nt { nt, prod }, children, cover })
    }

    pub fn nt(&self) -> Option<NtId> {
        match self.label {
            Label::Nt { nt, .. } => Some(nt),
            _ => None,
        }
    }

    /// Word terminals in word order.
    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a TreeNode>) {
        if let Label::Leaf { .. } = self.label {
            out.push(self);
        }
        for c in &self.children {
            c.collect_leaves(out);
        }
    }

    pub fn sites(&self) -> Vec<Option<Arc<CallSite>>> {
        self.leaves()
            .into_iter()
            .map(|l| match &l.label {
                Label::Leaf { site, .. } => site.clone(),
                _ => None,
            })
            .collect()
    }

    /// The deepest nonterminal node whose subtree holds every word terminal.
    pub fn lowest_common_ancestor(&self) -> &TreeNode {
        let total = self.cover;
        let mut cur = self;
        while let Some(next) = cur.children.iter().find(|c| c.cover == total && c.nt().is_some()) {
            cur = next;
        }
        cur
    }

    /// True when some nonterminal occurs twice on a root-to-leaf path with no
    /// word terminal added in between.
    pub fn has_unproductive_repetition(&self) -> bool {
        fn below(node: &TreeNode, nt: NtId, cover: usize) -> bool {
            node.children.iter().filter(|c| c.cover == cover).any(|c| c.nt() == Some(nt) || below(c, nt, cover))
        }
        if let Some(nt) = self.nt() {
            if below(self, nt, self.cover) {
                return true;
            }
        }
        self.children.iter().any(|c| c.has_unproductive_repetition())
    }

    pub fn render(&self, g: &Grammar) -> String {
        let mut out = String::new();
        self.render_into(g, 0, &mut out);
        out
    }

    fn render_into(&self, g: &Grammar, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match &self.label {
            Label::Nt { nt, .. } => {
                let _ = writeln!(out, "{pad}{}", g.nt_name(*nt));
            }
            Label::Leaf { term, site: Some(s), .. } => {
                let _ = writeln!(out, "{pad}{} @ {}", g.term_name(*term), s.loc);
            }
            Label::Leaf { term, site: None, .. } => {
                let _ = writeln!(out, "{pad}{}", g.term_name(*term));
            }
            Label::Stub(sym) => {
                let _ = writeln!(out, "{pad}[{}]", g.symbol_name(*sym));
            }
        }
        for c in &self.children {
            c.render_into(g, depth + 1, out);
        }
    }
}
