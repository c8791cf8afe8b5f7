//! Random mini-programs over one module `M` with methods `a`, `b`, `c`.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MODULE_METHODS: [&str; 3] = ["a", "b", "c"];

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_methods: usize,
    /// Branches plus loops per method.
    pub max_compound: usize,
    pub max_depth: usize,
    /// Receivers: one external module (`m`) or two allocated instances.
    pub two_instances: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_methods: 5, max_compound: 3, max_depth: 2, two_instances: false }
    }
}

struct Gen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
    methods: usize,
    compound_left: usize,
    receivers: Vec<&'static str>,
}

/// Source text of a random program; `f0` is always a thread entry.
pub fn random_program(seed: u64, cfg: GenConfig) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let methods = rng.random_range(1..=cfg.max_methods);
    let receivers = if cfg.two_instances { vec!["x", "y"] } else { vec!["m"] };
    let mut g = Gen { rng, cfg, methods, compound_left: 0, receivers };

    let mut src = String::from("class M contract { \"a b\"; } {\n    boolean a() {}\n    boolean b() {}\n    boolean c() {}\n}\n\n");
    if cfg.two_instances {
        src.push_str("M x = new M();\nM y = new M();\n\n");
    }
    for i in 0..methods {
        let mut mods = Vec::new();
        if g.rng.random_bool(if i == 0 { 0.2 } else { 0.3 }) {
            mods.push("atomic");
        }
        if i == 0 || g.rng.random_bool(0.1) {
            mods.push("thread");
        }
        g.compound_left = g.rng.random_range(0..=cfg.max_compound);
        let body = g.block(1);
        let prefix: String = mods.iter().map(|m| format!("{m} ")).collect();
        src.push_str(&format!("{prefix}void f{i}() {{\n{body}}}\n\n"));
    }
    src
}

impl Gen {
    fn block(&mut self, depth: usize) -> String {
        let n = self.rng.random_range(1..=3);
        (0..n).map(|_| self.stmt(depth)).collect()
    }

    fn module_call(&mut self) -> String {
        let r = *self.receivers.choose(&mut self.rng).unwrap();
        let m = *MODULE_METHODS.choose(&mut self.rng).unwrap();
        format!("{r}.{m}()")
    }

    fn cond(&mut self) -> String {
        if self.rng.random_bool(0.3) {
            self.module_call()
        } else {
            "cond".to_string()
        }
    }

    fn stmt(&mut self, depth: usize) -> String {
        let pad = "    ".repeat(depth);
        let compound = depth <= self.cfg.max_depth && self.compound_left > 0 && self.rng.random_bool(0.35);
        if compound {
            self.compound_left -= 1;
            let c = self.cond();
            let then = self.block(depth + 1);
            return if self.rng.random_bool(0.5) {
                format!("{pad}while ({c}) {{\n{then}{pad}}}\n")
            } else if self.rng.random_bool(0.5) {
                let other = self.block(depth + 1);
                format!("{pad}if ({c}) {{\n{then}{pad}}} else {{\n{other}{pad}}}\n")
            } else {
                format!("{pad}if ({c}) {{\n{then}{pad}}}\n")
            };
        }
        match self.rng.random_range(0..10) {
            0..=5 => format!("{pad}{};\n", self.module_call()),
            6..=8 => format!("{pad}f{}();\n", self.rng.random_range(0..self.methods)),
            _ => format!("{pad}count++;\n"),
        }
    }
}

/// Random words over the module alphabet of length 1..=`max_len`.
pub fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<String> {
    let n = rng.random_range(1..=max_len);
    (0..n).map(|_| MODULE_METHODS.choose(rng).unwrap().to_string()).collect()
}

/// A random contiguous piece (at most `max_len` long) of one of `words`.
pub fn random_subword(rng: &mut ChaCha8Rng, words: &[Vec<String>], max_len: usize) -> Vec<String> {
    let w = words.choose(rng).unwrap();
    let len = rng.random_range(1..=w.len().min(max_len));
    let start = rng.random_range(0..=w.len() - len);
    w[start..start + len].to_vec()
}
