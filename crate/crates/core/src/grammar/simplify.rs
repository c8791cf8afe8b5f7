//! Size reduction by inlining nonterminals that have a single production.
//!
//! `A -> β B δ` with `B -> α` as B's only production becomes `A -> β α δ`.
//! The start symbol, method symbols (their ownership locates the lowest
//! common ancestor) and self-referential symbols are never inlined.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use super::{CallSite, Grammar, NtId, NtKind, Nonterminal, Origin, Production, Symbol};

pub fn simplify_grammar(g: &Grammar) -> Grammar {
    let mut nonterminals = g.nonterminals.clone();
    let mut productions = g.productions.clone();
    let mut start = g.start;

    // A start symbol that is referenced from a body gets a fresh start above
    // it, so that the language generated at the top is preserved verbatim.
    if productions.iter().any(|p| p.body.contains(&Symbol::N(start))) {
        let mut name = format!("{}'", g.nt_name(start));
        while nonterminals.iter().any(|n| n.name == name) {
            name.push('\'');
        }
        let fresh = NtId(nonterminals.len() as u32);
        nonterminals.push(Nonterminal { name, owner: None, kind: NtKind::Synthetic });
        productions.insert(
            0,
            Production { head: fresh, body: vec![Symbol::N(start)], origin: Origin::Synthetic, sites: Vec::new() },
        );
        start = fresh;
    }

    loop {
        let mut counts = vec![0usize; nonterminals.len()];
        for p in &productions {
            counts[p.head.0 as usize] += 1;
        }
        let candidate = productions.iter().position(|p| {
            p.head != start
                && nonterminals[p.head.0 as usize].kind != NtKind::Method
                && counts[p.head.0 as usize] == 1
                && !p.body.contains(&Symbol::N(p.head))
        });
        let Some(idx) = candidate else { break };
        let rule = productions.remove(idx);
        for p in productions.iter_mut() {
            if p.body.contains(&Symbol::N(rule.head)) {
                inline(p, &rule);
            }
        }
        normalize(&mut productions);
    }

    compact(nonterminals, productions, start, g.terminals.clone())
}

fn inline(p: &mut Production, rule: &Production) {
    let mut body = Vec::with_capacity(p.body.len() + rule.body.len());
    let mut sites: Vec<Arc<CallSite>> = Vec::with_capacity(p.sites.len() + rule.sites.len());
    let mut own_sites = p.sites.iter();
    for &s in &p.body {
        match s {
            Symbol::N(n) if n == rule.head => {
                body.extend_from_slice(&rule.body);
                sites.extend(rule.sites.iter().cloned());
            }
            Symbol::T(_) => {
                body.push(s);
                sites.extend(own_sites.next().cloned());
            }
            Symbol::N(_) => body.push(s),
        }
    }
    p.body = body;
    p.sites = sites;
}

/// Removes `A -> A` and duplicate productions, keeping first occurrences.
fn normalize(productions: &mut Vec<Production>) {
    let mut seen = HashSet::new();
    productions.retain(|p| {
        p.body != [Symbol::N(p.head)] && seen.insert((p.head, p.body.clone(), p.sites.clone()))
    });
}

/// Drops symbols unreachable from the start and renumbers the rest.
fn compact(nonterminals: Vec<Nonterminal>, productions: Vec<Production>, start: NtId, terminals: Vec<String>) -> Grammar {
    let tmp = Grammar { nonterminals, terminals, productions, start };
    let reachable: BTreeSet<NtId> = tmp.reachable();
    let mut renum = vec![None; tmp.nonterminals.len()];
    let mut nonterminals = Vec::with_capacity(reachable.len());
    for (i, n) in tmp.nonterminals.iter().enumerate() {
        if reachable.contains(&NtId(i as u32)) {
            renum[i] = Some(NtId(nonterminals.len() as u32));
            nonterminals.push(n.clone());
        }
    }
    let map = |s: Symbol| match s {
        Symbol::N(n) => Symbol::N(renum[n.0 as usize].expect("body symbols of reachable heads are reachable")),
        t => t,
    };
    let productions = tmp
        .productions
        .iter()
        .filter(|p| renum[p.head.0 as usize].is_some())
        .map(|p| Production {
            head: renum[p.head.0 as usize].unwrap(),
            body: p.body.iter().copied().map(map).collect(),
            origin: p.origin,
            sites: p.sites.clone(),
        })
        .collect();
    Grammar { nonterminals, terminals: tmp.terminals, productions, start: renum[start.0 as usize].unwrap() }
}
