//! Brute-force reference for subword LCAs, independent of the LR machinery.
//!
//! For a word w of length n, span sets are least fixpoints over positions:
//! `exact[X]` holds (i, j) with X =>* w[i..j], `suffix[X]` holds (i, j) with
//! X =>* γ w[i..j], and `prefix[X]` holds (i, j) with X =>* w[i..j] δ, for
//! arbitrary sentential forms γ, δ. A production is an LCA for w when w
//! splits across at least two of its body symbols.

use std::collections::{BTreeMap, BTreeSet};

use atomguard_core::frontend::{MethodId, Program};
use atomguard_core::grammar::{Grammar, NtId, Symbol, TermId};

type Spans = BTreeSet<(usize, usize)>;

struct Fix<'a> {
    g: &'a Grammar,
    w: &'a [TermId],
    exact: Vec<Spans>,
    suffix: Vec<Spans>,
    prefix: Vec<Spans>,
}

impl Fix<'_> {
    fn term_spans(&self, t: TermId) -> Spans {
        (0..self.w.len()).filter(|&k| self.w[k] == t).map(|k| (k, k + 1)).collect()
    }

    fn sym(&self, s: Symbol, table: &[Spans]) -> Spans {
        match s {
            Symbol::T(t) => self.term_spans(t),
            Symbol::N(n) => table[n.0 as usize].clone(),
        }
    }

    /// End positions reachable from `from` deriving `syms` exactly.
    fn ends(&self, syms: &[Symbol], from: usize) -> BTreeSet<usize> {
        let mut cur = BTreeSet::from([from]);
        for &s in syms {
            let spans = self.sym(s, &self.exact);
            cur = spans.iter().filter(|(i, _)| cur.contains(i)).map(|&(_, j)| j).collect();
            if cur.is_empty() {
                break;
            }
        }
        cur
    }

    fn solve(&mut self) {
        let n = self.w.len();
        loop {
            let mut changed = false;
            for p in &self.g.productions {
                let h = p.head.0 as usize;
                let mut add_exact = Vec::new();
                let mut add_suffix = Vec::new();
                let mut add_prefix = Vec::new();
                for i in 0..=n {
                    add_exact.extend(self.ends(&p.body, i).into_iter().map(|j| (i, j)));
                }
                for (k, &s) in p.body.iter().enumerate() {
                    for (i, m) in self.sym(s, &self.suffix) {
                        if i < m {
                            add_suffix.extend(self.ends(&p.body[k + 1..], m).into_iter().map(|j| (i, j)));
                        }
                    }
                    let pre = self.sym(s, &self.prefix);
                    for i in 0..=n {
                        for m in self.ends(&p.body[..k], i) {
                            add_prefix.extend(pre.iter().filter(|&&(a, b)| a == m && a < b).map(|&(_, j)| (i, j)));
                        }
                    }
                }
                for x in add_exact {
                    changed |= self.exact[h].insert(x);
                }
                for x in add_suffix {
                    changed |= self.suffix[h].insert(x);
                }
                for x in add_prefix {
                    changed |= self.prefix[h].insert(x);
                }
            }
            if !changed {
                return;
            }
        }
    }
}

/// Nonterminals reachable from the start that can be the lowest common
/// ancestor of an occurrence of `w` as a subword of a sentential form.
pub fn lca_nonterminals(g: &Grammar, w: &[TermId]) -> BTreeSet<NtId> {
    let n = w.len();
    let reachable = g.reachable();
    let mut out = BTreeSet::new();
    if n == 0 {
        return out;
    }
    if n == 1 {
        for p in &g.productions {
            if p.body.contains(&Symbol::T(w[0])) && reachable.contains(&p.head) {
                out.insert(p.head);
            }
        }
        return out;
    }
    let size = g.nonterminals.len();
    let mut fix = Fix { g, w, exact: vec![Spans::new(); size], suffix: vec![Spans::new(); size], prefix: vec![Spans::new(); size] };
    fix.solve();
    for p in &g.productions {
        if !reachable.contains(&p.head) || out.contains(&p.head) {
            continue;
        }
        'split: for (a, &left) in p.body.iter().enumerate() {
            for (_, m1) in fix.sym(left, &fix.suffix).into_iter().filter(|&(i, m)| i == 0 && m < n) {
                for b in a + 1..p.body.len() {
                    let right = fix.sym(p.body[b], &fix.prefix);
                    for m2 in fix.ends(&p.body[a + 1..b], m1) {
                        if m2 < n && right.contains(&(m2, n)) {
                            out.insert(p.head);
                            break 'split;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Atomically-executed methods, recomputed from scratch: start from every
/// method that is atomic or has a caller and is not an entry, then drop
/// non-atomic methods with a caller outside the set until stable.
pub fn atomically_executed(program: &Program) -> BTreeSet<MethodId> {
    let mut callers: BTreeMap<MethodId, BTreeSet<MethodId>> = BTreeMap::new();
    for m in &program.methods {
        for c in m.cfg.callees() {
            callers.entry(c).or_default().insert(m.id);
        }
    }
    let no_callers = BTreeSet::new();
    let of = |id: MethodId| callers.get(&id).unwrap_or(&no_callers);
    let mut set: BTreeSet<MethodId> = program
        .methods
        .iter()
        .filter(|m| m.is_atomic || (!program.entry_methods.contains(&m.id) && !of(m.id).is_empty()))
        .map(|m| m.id)
        .collect();
    while let Some(bad) = set
        .iter()
        .copied()
        .find(|&id| !program.method(id).is_atomic && of(id).iter().any(|c| !set.contains(c)))
    {
        set.remove(&bad);
    }
    set
}

/// (LCA method name, atomically executed) for every oracle LCA.
pub fn verdicts(program: &Program, g: &Grammar, w: &[TermId], ae: &BTreeSet<MethodId>) -> BTreeSet<(String, bool)> {
    lca_nonterminals(g, w)
        .into_iter()
        .map(|nt| match g.nt(nt).owner {
            Some(m) => (program.method(m).name.clone(), ae.contains(&m)),
            None => (g.nt_name(nt).to_string(), false),
        })
        .collect()
}
