//! Canonical LR(0) item-set automaton with nondeterministic action sets.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::grammar::{Grammar, NtId, Symbol, TermId};

/// `prod == grammar.productions.len()` denotes the augmented `S' -> S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item {
    pub prod: u32,
    pub dot: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LrState {
    pub kernel: Vec<Item>,
    pub items: Vec<Item>,
    pub shifts: BTreeMap<TermId, usize>,
    pub gotos: BTreeMap<NtId, usize>,
    /// Productions with a completed item in this state.
    pub reduces: Vec<usize>,
    /// Kernel items with the dot strictly inside the body.
    pub partial: Vec<Item>,
    pub accepting: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Shift(usize),
    Reduce(usize),
    Accept,
}

#[derive(Debug, Clone)]
pub struct ParseTable {
    pub states: Vec<LrState>,
    pub augmented: usize,
    /// Per terminal, every state reached by shifting it.
    pub shift_targets: Vec<Vec<usize>>,
    /// Per nonterminal, every state reached by a goto on it.
    pub goto_targets: Vec<Vec<usize>>,
}

pub(crate) fn body<'g>(g: &'g Grammar, aug: &'g [Symbol; 1], prod: usize) -> &'g [Symbol] {
    if prod == g.productions.len() {
        aug
    } else {
        &g.productions[prod].body
    }
}

pub fn build_parse_table(g: &Grammar) -> ParseTable {
    let aug_body = [Symbol::N(g.start)];
    let augmented = g.productions.len();
    let by_head = g.by_head();
    let sym_after = |it: &Item| body(g, &aug_body, it.prod as usize).get(it.dot as usize).copied();

    let closure = |kernel: &[Item]| -> Vec<Item> {
        let mut items: Vec<Item> = kernel.to_vec();
        let mut added = vec![false; g.nonterminals.len()];
        let mut i = 0;
        while i < items.len() {
            if let Some(Symbol::N(n)) = sym_after(&items[i]) {
                if !added[n.0 as usize] {
                    added[n.0 as usize] = true;
                    for &p in &by_head[n.0 as usize] {
                        items.push(Item { prod: p as u32, dot: 0 });
                    }
                }
            }
            i += 1;
        }
        items
    };

    let start_kernel = vec![Item { prod: augmented as u32, dot: 0 }];
    let mut index: HashMap<Vec<Item>, usize> = HashMap::from([(start_kernel.clone(), 0)]);
    let mut kernels = vec![start_kernel];
    let mut states: Vec<LrState> = Vec::new();
    let mut next = 0;
    while next < kernels.len() {
        let kernel = kernels[next].clone();
        let items = closure(&kernel);
        let mut moves: BTreeMap<Symbol, Vec<Item>> = BTreeMap::new();
        let mut reduces = Vec::new();
        let mut accepting = false;
        for it in &items {
            match sym_after(it) {
                Some(s) => moves.entry(s).or_default().push(Item { prod: it.prod, dot: it.dot + 1 }),
                None if it.prod as usize == augmented => accepting = true,
                None => reduces.push(it.prod as usize),
            }
        }
        let mut shifts = BTreeMap::new();
        let mut gotos = BTreeMap::new();
        for (sym, mut k) in moves {
            k.sort();
            k.dedup();
            let target = *index.entry(k.clone()).or_insert_with(|| {
                kernels.push(k);
                kernels.len() - 1
            });
            match sym {
                Symbol::T(t) => {
                    shifts.insert(t, target);
                }
                Symbol::N(n) => {
                    gotos.insert(n, target);
                }
            }
        }
        let partial = kernel
            .iter()
            .copied()
            .filter(|it| it.dot > 0 && (it.dot as usize) < body(g, &aug_body, it.prod as usize).len())
            .collect();
        states.push(LrState { kernel, items, shifts, gotos, reduces, partial, accepting });
        next += 1;
    }

    let mut shift_targets = vec![Vec::new(); g.terminals.len()];
    let mut goto_targets = vec![Vec::new(); g.nonterminals.len()];
    for st in &states {
        for (t, &s) in &st.shifts {
            shift_targets[t.0 as usize].push(s);
        }
        for (n, &s) in &st.gotos {
            goto_targets[n.0 as usize].push(s);
        }
    }
    for v in shift_targets.iter_mut().chain(goto_targets.iter_mut()) {
        v.sort_unstable();
        v.dedup();
    }
    ParseTable { states, augmented, shift_targets, goto_targets }
}

impl ParseTable {
    /// All actions on `term` in `state`; LR(0) reductions ignore the lookahead.
    pub fn actions(&self, state: usize, term: TermId) -> Vec<Action> {
        let st = &self.states[state];
        let mut out: Vec<Action> = st.shifts.get(&term).map(|&s| Action::Shift(s)).into_iter().collect();
        out.extend(st.reduces.iter().map(|&p| Action::Reduce(p)));
        out
    }

    pub fn goto(&self, state: usize, nt: NtId) -> Option<usize> {
        self.states[state].gotos.get(&nt).copied()
    }

    /// States holding more than one reduction, or a shift and a reduction.
    pub fn conflict_states(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&i| {
                let s = &self.states[i];
                s.reduces.len() > 1 || (!s.reduces.is_empty() && !s.shifts.is_empty())
            })
            .collect()
    }

    pub fn render_item(&self, g: &Grammar, it: Item) -> String {
        let aug = [Symbol::N(g.start)];
        let b = body(g, &aug, it.prod as usize);
        let head = if it.prod as usize == self.augmented {
            format!("{}'", g.nt_name(g.start))
        } else {
            g.nt_name(g.productions[it.prod as usize].head).to_string()
        };
        let mut s = format!("{head} ->");
        for (i, sym) in b.iter().enumerate() {
            if i == it.dot as usize {
                s.push_str(" .");
            }
            s.push(' ');
            s.push_str(g.symbol_name(*sym));
        }
        if it.dot as usize == b.len() {
            s.push_str(" .");
        }
        s
    }

    pub fn dump(&self, g: &Grammar) -> String {
        let mut out = String::new();
        for (i, st) in self.states.iter().enumerate() {
            let _ = writeln!(out, "State {i}:");
            for &it in &st.items {
                let _ = writeln!(out, "  {}", self.render_item(g, it));
            }
            for (t, s) in &st.shifts {
                let _ = writeln!(out, "  on {} shift {s}", g.term_name(*t));
            }
            for (n, s) in &st.gotos {
                let _ = writeln!(out, "  on {} goto {s}", g.nt_name(*n));
            }
            for &p in &st.reduces {
                let prod = &g.productions[p];
                let _ = writeln!(out, "  reduce {} -> {}", g.nt_name(prod.head), g.render_body(&prod.body));
            }
            if st.accepting {
                let _ = writeln!(out, "  accept");
            }
        }
        out
    }
}
