mod support;

use std::collections::BTreeSet;

use atomguard_core::frontend::{compute_atomically_executed, find_thread_entries, is_ae_fixpoint};
use atomguard_core::grammar::build_behavior_grammar;
use atomguard_core::{parse_program, render_json, simplify_grammar, verify, Program, Verification, VerifyOptions};
use proptest::prelude::*;

use support::gen::{random_program, GenConfig};
use support::oracle;

fn program(seed: u64, cfg: GenConfig) -> Program {
    parse_program("random.mg", &random_program(seed, cfg)).expect("generated program parses")
}

type Key = (String, Vec<String>, Vec<(String, u32)>, String);

fn keys(v: &Verification) -> BTreeSet<Key> {
    v.violations
        .iter()
        .map(|x| {
            let calls = x.calls.iter().map(|c| (c.file.clone(), c.line)).collect();
            (x.thread.clone(), x.word.methods().iter().map(|s| s.to_string()).collect(), calls, x.lca.clone())
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ae_is_the_defining_fixpoint(seed in any::<u64>()) {
        let p = program(seed, GenConfig::default());
        let ae = compute_atomically_executed(&p);
        prop_assert!(is_ae_fixpoint(&p, &ae));
        prop_assert_eq!(&ae, &oracle::atomically_executed(&p));
        for m in &p.methods {
            if m.is_atomic {
                prop_assert!(ae.contains(&m.id));
            } else if p.entry_methods.contains(&m.id) {
                prop_assert!(!ae.contains(&m.id));
            }
        }
    }

    #[test]
    fn marking_a_method_atomic_only_grows_ae(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let p = program(seed, GenConfig::default());
        let before = compute_atomically_executed(&p);
        let mut q = p.clone();
        let id = p.methods[pick.index(p.methods.len())].id;
        q.method_mut(id).is_atomic = true;
        let after = compute_atomically_executed(&q);
        prop_assert!(before.is_subset(&after));
        prop_assert!(after.contains(&id));
    }

    #[test]
    fn simplification_preserves_bounded_language(seed in any::<u64>()) {
        let p = program(seed, GenConfig::default());
        for entry in find_thread_entries(&p).unwrap() {
            let g = build_behavior_grammar(&p, "M", entry);
            let s = simplify_grammar(&g);
            prop_assert_eq!(g.bounded_language(6), s.bounded_language(6));
            prop_assert_eq!(simplify_grammar(&s).dump(), s.dump());
            prop_assert!(s.is_traceable());
        }
    }

    /// With a single module instance, splitting by instance changes nothing.
    #[test]
    fn points_to_agrees_with_merged_analysis_on_one_instance(seed in any::<u64>()) {
        let mut p = program(seed, GenConfig::default());
        p.modules[0].contract = atomguard_core::contracts::parse_contract_text(
            "\"a b\"; \"b a c\"; \"c c\";",
            &p.modules[0].methods,
        ).unwrap();
        let on = verify(&p, &VerifyOptions::default()).unwrap();
        let off = verify(&p, &VerifyOptions { points_to: false, ..VerifyOptions::default() }).unwrap();
        prop_assert_eq!(keys(&on), keys(&off));
    }

    #[test]
    fn verification_is_deterministic_and_fixable(seed in any::<u64>()) {
        let mut p = program(seed, GenConfig::default());
        p.modules[0].contract = atomguard_core::contracts::parse_contract_text(
            "\"a b\"; \"c a\";",
            &p.modules[0].methods,
        ).unwrap();
        let opts = VerifyOptions::default();
        let v = verify(&p, &opts).unwrap();
        prop_assert_eq!(render_json(&v), render_json(&verify(&p, &opts).unwrap()));
        for x in &v.violations {
            let mut q = p.clone();
            q.method_mut(x.lca_method.unwrap()).is_atomic = true;
            let after = keys(&verify(&q, &opts).unwrap());
            let key = keys(&Verification { violations: vec![x.clone()], ..Verification::default() });
            prop_assert!(after.is_disjoint(&key));
        }
    }
}
