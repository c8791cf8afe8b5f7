use std::fmt::Write as _;

use serde::Serialize;

use super::{CallLocation, Verification, VerifyStats};

#[derive(Serialize)]
struct JsonReport<'a> {
    violations: Vec<JsonViolation<'a>>,
    stats: VerifyStats,
}

#[derive(Serialize)]
struct JsonViolation<'a> {
    clause: &'a str,
    word: Vec<String>,
    thread: &'a str,
    site: Option<&'a str>,
    calls: &'a [CallLocation],
    lca: &'a str,
    suggestion: &'a str,
}

pub fn render_json(v: &Verification) -> String {
    let report = JsonReport {
        violations: v
            .violations
            .iter()
            .map(|x| JsonViolation {
                clause: &x.clause,
                word: x.word.atoms.iter().map(|a| a.to_string()).collect(),
                thread: &x.thread,
                site: x.site.as_deref(),
                calls: &x.calls,
                lca: &x.lca,
                suggestion: &x.suggestion,
            })
            .collect(),
        stats: v.stats,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Human-readable report, grouped by thread and clause.
pub fn render_text(v: &Verification, color: bool) -> String {
    let paint = |code: &str, s: &str| if color { format!("\x1b[{code}m{s}\x1b[0m") } else { s.to_string() };
    if v.violations.is_empty() {
        return format!("{}\n", paint("32", "OK: contract respected"));
    }
    let mut out = String::new();
    let mut last_thread: Option<(&str, &str)> = None;
    let mut last_clause: Option<usize> = None;
    for x in &v.violations {
        if last_thread != Some((&x.module, &x.thread)) {
            let _ = writeln!(out, "module {} / {}", x.module, x.thread);
            last_thread = Some((&x.module, &x.thread));
            last_clause = None;
        }
        if last_clause != Some(x.clause_index) {
            let _ = writeln!(out, "  clause \"{}\"", x.clause);
            last_clause = Some(x.clause_index);
        }
        let site = x.site.as_deref().map(|s| format!(" [instance {s}]")).unwrap_or_default();
        let _ = writeln!(out, "    {} word `{}`{site}", paint("31", "violation:"), x.word);
        for (atom, call) in x.word.atoms.iter().zip(&x.calls) {
            let _ = writeln!(out, "      {}:{}  {} (in {})", call.file, call.line, atom.method, call.method);
        }
        let _ = writeln!(out, "      not atomically executed: {}", x.lca);
        let _ = writeln!(out, "      suggestion: {}", x.suggestion);
    }
    let _ = writeln!(out, "{}", paint("31", &format!("FAIL: {} violation(s)", v.violations.len())));
    out
}
