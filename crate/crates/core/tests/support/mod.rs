//! Test-only helpers shared by the property suite and the acceptance target:
//! a random program generator, a brute-force LCA oracle and reference
//! grammars in dump form.
#![allow(dead_code)]

pub mod gen;
pub mod oracle;

/// Reference productions of the recursive-calls sample, including the entry
/// production of g (`G -> H`).
pub const RECURSIVE_CALLS_GRAMMAR: &str = "\
Start: FF
FF -> A
GG -> G
G -> H
A -> B
B -> a C
C -> D
C -> E
D -> GG E
E -> b F
F -> epsilon
H -> c I
I -> J
I -> M
J -> GG K
K -> d L
L -> FF M
M -> epsilon
";

pub const LOOP_AND_BRANCH_GRAMMAR: &str = "\
Start: FF
FF -> A
A -> B
B -> a C
B -> a G
C -> D
C -> E
D -> b F
E -> c F
F -> B
G -> d H
H -> epsilon
";

pub const STATIC_FIELD_RAW: &str = "\
Start: A
A -> B
D -> E F
E -> X
F -> G
G -> H
B -> C
C -> D
L -> M
L -> N
M -> O
N -> R
O -> a P
H -> I
I -> K
I -> J
J -> L
K -> T U
BF -> BG
U -> V W
BG -> b BH
T -> BA
BH -> T BI
W -> epsilon
BI -> epsilon
V -> BD
BB -> c BC
Q -> S
BC -> epsilon
P -> Q
BD -> BE
S -> H
BE -> a BF
R -> b Q
Y -> Z
X -> Y
Z -> epsilon
BA -> BB
";

pub const STATIC_FIELD_OPTIMIZED: &str = "\
Start: A'
A' -> A
A -> I
L -> b I
L -> a I
I -> L
I -> T V
T -> c
V -> a b T
";

pub fn sample_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs/samples").join(name)
}

pub fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs/corpus")
}

pub fn load_sample(name: &str) -> atomguard_core::Program {
    let path = sample_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    atomguard_core::parse_program(name, &text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Outcome of comparing the parser against the oracle on random programs.
#[derive(Debug, Default)]
pub struct OracleReport {
    pub programs: usize,
    pub cases: usize,
    /// Cases where the oracle found at least one LCA.
    pub nonempty: usize,
    pub trees: usize,
    /// Returned trees containing a nonterminal repeated without new input.
    pub repeating_trees: usize,
    pub mismatches: Vec<String>,
}

/// For each seed: a random program, every thread grammar, and words that are
/// alternately random and cut from the grammar's bounded language.
/// The parser runs on the raw grammar (LCA nonterminals must match the
/// oracle exactly) and on the simplified grammar (LCA methods and verdicts
/// must match).
pub fn run_oracle_cases(seeds: std::ops::Range<u64>, words_per_grammar: usize) -> OracleReport {
    use atomguard_core::frontend::find_thread_entries;
    use atomguard_core::glr::{build_parse_table, parse_until_lca, word_ids};
    use atomguard_core::grammar::build_behavior_grammar;
    use rand::SeedableRng;
    use std::collections::BTreeSet;

    let mut report = OracleReport::default();
    for seed in seeds {
        let src = gen::random_program(seed, gen::GenConfig::default());
        let program = atomguard_core::parse_program("random.mg", &src).expect("generated program parses");
        report.programs += 1;
        let ae = oracle::atomically_executed(&program);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for entry in find_thread_entries(&program).expect("f0 is a thread") {
            let raw = build_behavior_grammar(&program, "M", entry);
            let simple = atomguard_core::simplify_grammar(&raw);
            let raw_table = build_parse_table(&raw);
            let simple_table = build_parse_table(&simple);
            let language: Vec<Vec<String>> = raw.bounded_language(6).into_iter().filter(|w| !w.is_empty()).collect();
            for k in 0..words_per_grammar {
                let word = if k % 2 == 1 && !language.is_empty() {
                    gen::random_subword(&mut rng, &language, 4)
                } else {
                    gen::random_word(&mut rng, 4)
                };
                let (Some(raw_ids), Some(simple_ids)) = (word_ids(&raw, &word), word_ids(&simple, &word)) else {
                    continue;
                };
                report.cases += 1;
                let expected_nts = oracle::lca_nonterminals(&raw, &raw_ids);
                let expected = oracle::verdicts(&program, &raw, &raw_ids, &ae);
                if !expected.is_empty() {
                    report.nonempty += 1;
                }

                let (raw_trees, _) = parse_until_lca(&raw, &raw_table, &raw_ids).expect("within branch limit");
                let (simple_trees, _) =
                    parse_until_lca(&simple, &simple_table, &simple_ids).expect("within branch limit");
                for t in raw_trees.iter().chain(&simple_trees) {
                    report.trees += 1;
                    if t.tree.has_unproductive_repetition() {
                        report.repeating_trees += 1;
                    }
                }
                let got_nts: BTreeSet<_> = raw_trees.iter().map(|t| t.lca).collect();
                let got: BTreeSet<(String, bool)> = simple_trees
                    .iter()
                    .map(|t| match t.method {
                        Some(m) => (program.method(m).name.clone(), ae.contains(&m)),
                        None => (simple.nt_name(t.lca).to_string(), false),
                    })
                    .collect();
                if got_nts != expected_nts || got != expected {
                    let names = |s: &BTreeSet<_>| s.iter().map(|&n| raw.nt_name(n).to_string()).collect::<Vec<_>>();
                    report.mismatches.push(format!(
                        "seed {seed}, thread {}, word {:?}: parser {:?} / {:?}, oracle {:?} / {:?}\n{src}",
                        program.method(entry).name,
                        word,
                        names(&got_nts),
                        got,
                        names(&expected_nts),
                        expected
                    ));
                }
            }
        }
    }
    report
}
