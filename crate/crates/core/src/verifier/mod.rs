//! Contract verification: for every thread (or class) and module instance,
//! parse each contract word as a subword of the behavior grammar and require
//! the lowest common ancestor of every occurrence to be atomically executed.

mod report;
mod unify;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::contracts::{expand_clause, CallSequence, ContractError, DEFAULT_MAX_CLAUSE_LEN};
use crate::frontend::{compute_atomically_executed, find_thread_entries, FrontendError, MethodId, Module, Program};
use crate::glr::{build_parse_table, parse_until_lca_with_limit, word_ids, GlrError, ParseTable, DEFAULT_BRANCH_LIMIT};
use crate::grammar::{
    build_behavior_grammar, build_behavior_grammar_pointsto, build_class_scope_grammar, simplify_grammar,
    sites_used_by, CallSite, Grammar, SiteRef,
};

pub use crate::frontend::PointsToResult;
pub use report::{render_json, render_text};
pub use unify::check_unification;

pub fn compute_pointsto(program: &Program) -> PointsToResult {
    program.compute_pointsto()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    WholeProgram,
    ClassScope,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub mode: Mode,
    pub points_to: bool,
    pub max_clause_len: usize,
    pub branch_limit: u64,
    pub simplify: bool,
    /// Keep grammars, tables and rendered trees for diagnostic dumps.
    pub keep_artifacts: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mode: Mode::WholeProgram,
            points_to: true,
            max_clause_len: DEFAULT_MAX_CLAUSE_LEN,
            branch_limit: DEFAULT_BRANCH_LIMIT,
            simplify: true,
            keep_artifacts: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
}

/// A failure confined to one work item; other items still run.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ItemError {
    #[error("module `{module}`, clause \"{clause}\": {source}")]
    Clause {
        module: String,
        clause: String,
        #[source]
        source: ContractError,
    },
    #[error("module `{module}`, {scope}, word `{word}`: {source}")]
    Parse {
        module: String,
        scope: String,
        word: String,
        #[source]
        source: GlrError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CallLocation {
    pub file: String,
    pub line: u32,
    /// Client method containing the call.
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub module: String,
    pub clause_index: usize,
    /// Canonical text of the violated clause.
    pub clause: String,
    pub word: CallSequence,
    /// Thread entry method, or class name in class-scope mode.
    pub thread: String,
    pub site: Option<String>,
    pub calls: Vec<CallLocation>,
    pub lca: String,
    pub lca_method: Option<MethodId>,
    pub suggestion: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VerifyStats {
    pub grammars: u64,
    pub trees: u64,
    pub branches: u64,
}

/// Intermediate results of one grammar, kept for dumps.
#[derive(Debug, Clone)]
pub struct GrammarArtifact {
    pub module: String,
    pub scope: String,
    pub site: Option<String>,
    pub grammar: Grammar,
    pub simplified: Grammar,
    pub table: ParseTable,
    /// (word, rendered tree) for every tree the parser returned.
    pub trees: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default)]
pub struct Verification {
    pub violations: Vec<Violation>,
    pub stats: VerifyStats,
    pub errors: Vec<ItemError>,
    pub artifacts: Vec<GrammarArtifact>,
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies every module contract of `program`.
pub fn verify(program: &Program, opts: &VerifyOptions) -> Result<Verification, VerifyError> {
    let mut out = Verification::default();
    for module in &program.modules {
        verify_module_into(program, module, opts, &mut out)?;
    }
    finish(&mut out);
    Ok(out)
}

/// Verifies the contract of a single module.
pub fn verify_module(program: &Program, module: &str, opts: &VerifyOptions) -> Result<Verification, VerifyError> {
    let mut out = Verification::default();
    if let Some(m) = program.module(module) {
        verify_module_into(program, m, opts, &mut out)?;
    }
    finish(&mut out);
    Ok(out)
}

struct Scope {
    label: String,
    name: String,
    roots: Vec<MethodId>,
    /// Set in class-scope mode; the inner `None` stands for top-level functions.
    class: Option<Option<String>>,
}

fn verify_module_into(
    program: &Program,
    module: &Module,
    opts: &VerifyOptions,
    out: &mut Verification,
) -> Result<(), VerifyError> {
    if module.contract.clauses.is_empty() {
        return Ok(());
    }
    let mut words = Vec::new();
    for (idx, clause) in module.contract.clauses.iter().enumerate() {
        match expand_clause(clause, opts.max_clause_len) {
            Ok(ws) => words.extend(ws.into_iter().map(|w| (idx, clause.to_string(), w))),
            Err(source) => out.errors.push(ItemError::Clause {
                module: module.name.clone(),
                clause: clause.text.clone(),
                source,
            }),
        }
    }

    let scopes: Vec<Scope> = match opts.mode {
        Mode::WholeProgram => find_thread_entries(program)?
            .into_iter()
            .map(|e| {
                let name = program.method(e).name.clone();
                Scope { label: format!("thread {name}"), name, roots: vec![e], class: None }
            })
            .collect(),
        Mode::ClassScope => {
            let mut classes: Vec<Option<&str>> = program.classes.iter().map(|c| Some(c.name.as_str())).collect();
            classes.push(None);
            classes
                .into_iter()
                .filter_map(|c| {
                    let roots: Vec<MethodId> =
                        program.methods.iter().filter(|m| m.class.as_deref() == c).map(|m| m.id).collect();
                    let name = c.unwrap_or("<top-level>").to_string();
                    (!roots.is_empty()).then(|| Scope {
                        label: format!("class {name}"),
                        name,
                        roots,
                        class: Some(c.map(str::to_string)),
                    })
                })
                .collect()
        }
    };

    let ae = compute_atomically_executed(program);
    for scope in &scopes {
        let sites: Vec<Option<SiteRef>> = if opts.points_to {
            sites_used_by(program, &module.name, &scope.roots, scope.class.is_some()).into_iter().map(Some).collect()
        } else {
            vec![None]
        };
        for site in sites {
            let grammar = match (&scope.class, site) {
                (Some(c), _) => build_class_scope_grammar(program, &module.name, c.as_deref(), site),
                (None, Some(s)) => build_behavior_grammar_pointsto(program, &module.name, scope.roots[0], s),
                (None, None) => build_behavior_grammar(program, &module.name, scope.roots[0]),
            };
            let item = Item { program, module, scope, site, ae: &ae, opts };
            item.run(grammar, &words, out);
        }
    }
    Ok(())
}

struct Item<'a> {
    program: &'a Program,
    module: &'a Module,
    scope: &'a Scope,
    site: Option<SiteRef>,
    ae: &'a BTreeSet<MethodId>,
    opts: &'a VerifyOptions,
}

impl Item<'_> {
    fn run(&self, grammar: Grammar, words: &[(usize, String, CallSequence)], out: &mut Verification) {
        let simplified = if self.opts.simplify { simplify_grammar(&grammar) } else { grammar.clone() };
        let table = build_parse_table(&simplified);
        out.stats.grammars += 1;
        let mut rendered = Vec::new();
        for (clause_index, clause, word) in words {
            let Some(ids) = word_ids(&simplified, &word.methods()) else { continue };
            let result = parse_until_lca_with_limit(&simplified, &table, &ids, self.opts.branch_limit);
            let (trees, stats) = match result {
                Ok(r) => r,
                Err(source) => {
                    out.errors.push(ItemError::Parse {
                        module: self.module.name.clone(),
                        scope: self.scope.label.clone(),
                        word: word.to_string(),
                        source,
                    });
                    continue;
                }
            };
            out.stats.trees += stats.trees;
            out.stats.branches += stats.branches;
            for lt in trees {
                if self.opts.keep_artifacts {
                    rendered.push((word.to_string(), lt.tree.render(&simplified)));
                }
                let sites: Vec<&CallSite> = lt.tree.leaves().iter().filter_map(|l| leaf_site(l)).collect();
                if !check_unification(&sites, &word.atoms) {
                    continue;
                }
                if lt.method.is_some_and(|m| self.ae.contains(&m)) {
                    continue;
                }
                let lca = match lt.method {
                    Some(m) => self.program.method(m).name.clone(),
                    None => simplified.nt_name(lt.lca).to_string(),
                };
                let calls = sites
                    .iter()
                    .map(|s| CallLocation {
                        file: s.loc.file.clone(),
                        line: s.loc.line,
                        method: self.program.method(s.method).name.clone(),
                    })
                    .collect();
                out.violations.push(Violation {
                    module: self.module.name.clone(),
                    clause_index: *clause_index,
                    clause: clause.clone(),
                    word: word.clone(),
                    thread: self.scope.name.clone(),
                    site: self.site.map(|s| s.to_string()),
                    calls,
                    suggestion: format!("make {lca} atomic"),
                    lca,
                    lca_method: lt.method,
                });
            }
        }
        if self.opts.keep_artifacts {
            out.artifacts.push(GrammarArtifact {
                module: self.module.name.clone(),
                scope: self.scope.label.clone(),
                site: self.site.map(|s| s.to_string()),
                grammar,
                simplified,
                table,
                trees: rendered,
            });
        }
    }
}

fn leaf_site(leaf: &crate::glr::TreeNode) -> Option<&CallSite> {
    match &leaf.label {
        crate::glr::Label::Leaf { site: Some(s), .. } => Some(s),
        _ => None,
    }
}

/// Sorts violations and drops repeats of the same occurrence.
fn finish(out: &mut Verification) {
    out.violations.sort_by(|a, b| {
        (&a.module, &a.thread, a.clause_index, &a.word, &a.calls, &a.lca, &a.site)
            .cmp(&(&b.module, &b.thread, b.clause_index, &b.word, &b.calls, &b.lca, &b.site))
    });
    let mut seen = BTreeSet::new();
    out.violations.retain(|v| seen.insert((v.module.clone(), v.thread.clone(), v.word.clone(), v.lca.clone(), v.calls.clone())));
}
