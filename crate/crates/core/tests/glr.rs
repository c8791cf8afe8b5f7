mod support;

use std::collections::BTreeSet;

use atomguard_core::glr::{accepts, build_parse_table, parse_subword, parse_until_lca, word_ids};
use atomguard_core::grammar::build_behavior_grammar;
use atomguard_core::{simplify_grammar, Grammar};

use support::load_sample;

/// The simplified grammar of the atomic-entry sample: L = a b* c.
fn atomic_entry_grammar() -> Grammar {
    let program = load_sample("atomic_entry.mg");
    let run = program.method_by_name("run").unwrap().id;
    simplify_grammar(&build_behavior_grammar(&program, "M", run))
}

/// Recursive-descent membership for a b* c.
fn in_a_bstar_c(w: &[&str]) -> bool {
    match w {
        ["a", rest @ .., "c"] => rest.iter().all(|&s| s == "b"),
        _ => false,
    }
}

fn all_words(alphabet: &[&'static str], max_len: usize) -> Vec<Vec<&'static str>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<&str>| {
                alphabet.iter().map(move |&s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[test]
fn full_word_membership_matches_reference_recognizer() {
    let g = atomic_entry_grammar();
    let t = build_parse_table(&g);
    for w in all_words(&["a", "b", "c"], 5) {
        let ids = word_ids(&g, &w).unwrap();
        assert_eq!(accepts(&g, &t, &ids).unwrap(), in_a_bstar_c(&w), "{w:?}");
    }
}

#[test]
fn subword_parsing_recognizes_exactly_the_factors() {
    let g = atomic_entry_grammar();
    let t = build_parse_table(&g);
    // Factors of a b* c: every non-empty w with some u, v making u w v a member.
    let factor = |w: &[&str]| {
        let s: String = w.concat();
        let core = s.trim_start_matches('a').trim_end_matches('c');
        s.matches('a').count() <= 1
            && s.matches('c').count() <= 1
            && (!s.contains('a') || s.starts_with('a'))
            && (!s.contains('c') || s.ends_with('c'))
            && core.chars().all(|c| c == 'b')
    };
    for w in all_words(&["a", "b", "c"], 4).into_iter().filter(|w| !w.is_empty()) {
        let ids = word_ids(&g, &w).unwrap();
        let (trees, _) = parse_subword(&g, &t, &ids).unwrap();
        assert_eq!(!trees.is_empty(), factor(&w), "{w:?}");
    }
}

#[test]
fn loop_word_has_one_tree_with_lca_at_entry() {
    let g = atomic_entry_grammar();
    let t = build_parse_table(&g);
    let ids = word_ids(&g, &["a", "b", "b", "c"]).unwrap();
    let (trees, _) = parse_until_lca(&g, &t, &ids).unwrap();
    assert_eq!(trees.len(), 1);
    assert_eq!(g.nt_name(trees[0].lca), "@run");
    assert!(!trees[0].tree.has_unproductive_repetition());
}

#[test]
fn ambiguous_branch_table_has_a_conflict_and_two_trees() {
    let program = load_sample("ambiguous_branch.mg");
    let run = program.method_by_name("run").unwrap().id;
    let g = simplify_grammar(&build_behavior_grammar(&program, "M", run));
    let t = build_parse_table(&g);
    assert!(!t.conflict_states().is_empty());
    let ids = word_ids(&g, &["a", "b"]).unwrap();
    let (trees, _) = parse_until_lca(&g, &t, &ids).unwrap();
    assert_eq!(trees.len(), 2);
    let owners: BTreeSet<&str> =
        trees.iter().map(|lt| program.method(lt.method.unwrap()).name.as_str()).collect();
    assert_eq!(owners, BTreeSet::from(["f", "run"]));
}

#[test]
fn straight_line_subword_has_one_tree() {
    let program = load_sample("straight_line.mg");
    let entry = atomguard_core::frontend::find_thread_entries(&program).unwrap().into_iter().next().unwrap();
    let g = simplify_grammar(&build_behavior_grammar(&program, &program.modules[0].name, entry));
    let t = build_parse_table(&g);
    let ids = word_ids(&g, &["b", "c"]).unwrap();
    let (trees, _) = parse_until_lca(&g, &t, &ids).unwrap();
    assert_eq!(trees.len(), 1);
    let leaves: Vec<usize> = trees[0].tree.leaves().iter().filter_map(|l| match l.label {
        atomguard_core::glr::Label::Leaf { pos, .. } => Some(pos),
        _ => None,
    }).collect();
    assert_eq!(leaves, vec![0, 1]);
}

#[test]
fn unknown_terminal_has_no_ids() {
    let g = atomic_entry_grammar();
    assert!(word_ids(&g, &["a", "zz"]).is_none());
}
