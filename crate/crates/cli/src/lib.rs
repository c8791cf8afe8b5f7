//! The `atomguard` command line: checks `.mg` programs against the contracts
//! of the modules they use, and runs paired bad/fixed corpora.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use atomguard_core::verifier::{Verification, VerifyStats};
use atomguard_core::{parse_program, render_json, render_text, verify, Mode, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "atomguard", version, about = "Check client programs against module contracts for concurrency")]
struct Cli {
    /// One grammar per class instead of one per thread; calls leaving the class are ignored.
    #[arg(long, global = true)]
    class_scope: bool,
    /// Treat all instances of a module as one.
    #[arg(long, global = true)]
    no_points_to: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print each behavior grammar, before and after simplification.
    #[arg(long, global = true)]
    dump_grammar: bool,
    /// Print every parse tree found for a contract word.
    #[arg(long, global = true)]
    dump_trees: bool,
    /// Print the LR(0) automaton of each simplified grammar.
    #[arg(long, global = true)]
    dump_table: bool,
    /// Longest contract word accepted after expansion.
    #[arg(long, global = true, default_value_t = atomguard_core::contracts::DEFAULT_MAX_CLAUSE_LEN,
          value_parser = positive)]
    max_clause_len: usize,
    #[command(subcommand)]
    command: Command,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verify programs; exits 1 if any contract is violated.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run every `<name>.bad.mg` / `<name>.fixed.mg` pair in a directory.
    Corpus { dir: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Runs the command line with the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check { files } => check(&cli, files, out, err),
        Command::Corpus { dir } => corpus(&cli, dir, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn options(cli: &Cli) -> VerifyOptions {
    VerifyOptions {
        mode: if cli.class_scope { Mode::ClassScope } else { Mode::WholeProgram },
        points_to: !cli.no_points_to,
        max_clause_len: cli.max_clause_len,
        keep_artifacts: cli.dump_grammar || cli.dump_trees || cli.dump_table,
        ..VerifyOptions::default()
    }
}

fn color_enabled() -> bool {
    std::env::var("ATOMGUARD_COLOR").is_ok_and(|v| v == "1")
}

/// Parses and verifies one file.
pub fn check_file(path: &Path, opts: &VerifyOptions) -> Result<Verification> {
    let source = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let name = path.display().to_string();
    let program = parse_program(&name, &source)?;
    Ok(verify(&program, opts)?)
}

fn check(cli: &Cli, files: &[PathBuf], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let opts = options(cli);
    let mut all = Verification::default();
    for f in files {
        let v = check_file(f, &opts)?;
        all.violations.extend(v.violations);
        all.errors.extend(v.errors);
        all.artifacts.extend(v.artifacts);
        add_stats(&mut all.stats, v.stats);
    }

    let dumps = render_dumps(cli, &all);
    if !dumps.is_empty() {
        match cli.format {
            Format::Text => out.write_all(dumps.as_bytes())?,
            Format::Json => err.write_all(dumps.as_bytes())?,
        }
    }
    for e in &all.errors {
        writeln!(err, "warning: {e}")?;
    }
    let report = match cli.format {
        Format::Text => render_text(&all, color_enabled()),
        Format::Json => render_json(&all),
    };
    out.write_all(report.as_bytes())?;
    Ok(if !all.violations.is_empty() {
        EXIT_VIOLATIONS
    } else if !all.errors.is_empty() {
        EXIT_ERROR
    } else {
        EXIT_OK
    })
}

fn add_stats(total: &mut VerifyStats, s: VerifyStats) {
    total.grammars += s.grammars;
    total.trees += s.trees;
    total.branches += s.branches;
}

fn render_dumps(cli: &Cli, v: &Verification) -> String {
    let mut s = String::new();
    for a in &v.artifacts {
        let site = a.site.as_deref().map(|x| format!(", instance {x}")).unwrap_or_default();
        let title = format!("module {}, {}{site}", a.module, a.scope);
        if cli.dump_grammar {
            let _ = writeln!(s, "== grammar: {title} ==\n{}", a.grammar.dump());
            let _ = writeln!(s, "== simplified grammar: {title} ==\n{}", a.simplified.dump());
        }
        if cli.dump_table {
            let _ = writeln!(s, "== parse table: {title} ==\n{}", a.table.dump(&a.simplified));
        }
        if cli.dump_trees {
            let _ = writeln!(s, "== parse trees: {title} ==");
            for (word, tree) in &a.trees {
                let _ = writeln!(s, "-- {word}\n{tree}");
            }
        }
    }
    s
}

/// One bad/fixed pair of a corpus directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPair {
    pub name: String,
    pub bad: PathBuf,
    pub fixed: PathBuf,
    /// From the `// expect-violations: N` header of the bad file.
    pub expected: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOutcome {
    pub name: String,
    pub expected: Option<usize>,
    pub bad: usize,
    pub fixed: usize,
}

impl PairOutcome {
    pub fn passed(&self) -> bool {
        let bad_ok = match self.expected {
            Some(n) => self.bad == n,
            None => self.bad >= 1,
        };
        bad_ok && self.fixed == 0
    }
}

pub fn discover_corpus(dir: &Path) -> Result<Vec<CorpusPair>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))?;
    let mut pairs = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let Some(file) = path.file_name().and_then(|f| f.to_str()) else { continue };
        let Some(name) = file.strip_suffix(".bad.mg") else { continue };
        let fixed = dir.join(format!("{name}.fixed.mg"));
        if !fixed.is_file() {
            bail!("{} has no matching {}", path.display(), fixed.display());
        }
        let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        pairs.push(CorpusPair { name: name.to_string(), expected: expected_violations(&text), bad: path, fixed });
    }
    pairs.sort_by(|a, b| a.name.cmp(&b.name));
    if pairs.is_empty() {
        bail!("no `<name>.bad.mg` files in {}", dir.display());
    }
    Ok(pairs)
}

fn expected_violations(source: &str) -> Option<usize> {
    source
        .lines()
        .filter_map(|l| l.trim().strip_prefix("//"))
        .find_map(|l| l.trim().strip_prefix("expect-violations:"))
        .and_then(|n| n.trim().parse().ok())
}

pub fn run_pair(pair: &CorpusPair, opts: &VerifyOptions) -> Result<PairOutcome> {
    let bad = check_file(&pair.bad, opts)?;
    let fixed = check_file(&pair.fixed, opts)?;
    Ok(PairOutcome {
        name: pair.name.clone(),
        expected: pair.expected,
        bad: bad.violations.len(),
        fixed: fixed.violations.len(),
    })
}

fn corpus(cli: &Cli, dir: &Path, out: &mut dyn Write) -> Result<i32> {
    let opts = options(cli);
    let pairs = discover_corpus(dir)?;
    let width = pairs.iter().map(|p| p.name.len()).max().unwrap_or(4).max(4);
    writeln!(out, "{:width$}  {:>8}  {:>5}  result", "pair", "bad", "fixed")?;
    let mut failed = Vec::new();
    for pair in &pairs {
        let o = run_pair(pair, &opts)?;
        let bad = match o.expected {
            Some(n) => format!("{}/{n}", o.bad),
            None => o.bad.to_string(),
        };
        let verdict = if o.passed() { "ok" } else { "FAIL" };
        writeln!(out, "{:width$}  {bad:>8}  {:>5}  {verdict}", o.name, o.fixed)?;
        if !o.passed() {
            failed.push(o.name);
        }
    }
    writeln!(out, "{}/{} pairs passed", pairs.len() - failed.len(), pairs.len())?;
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        writeln!(out, "failing: {}", failed.join(", "))?;
        Ok(EXIT_VIOLATIONS)
    }
}
