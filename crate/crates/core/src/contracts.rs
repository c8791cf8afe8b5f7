//! Contract clauses: star-free expressions over a module's public methods,
//! optionally carrying parameter patterns, and their expansion into the
//! finite set of call sequences they denote.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_MAX_CLAUSE_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("contract syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("`{0}` is not a method of the module")]
    UnknownMethod(String),
    #[error("repetition operator `{op}` at offset {offset} is not allowed in a contract clause")]
    StarNotAllowed { op: char, offset: usize },
    #[error("variable `{0}` must start with an uppercase letter")]
    LowercaseVariable(String),
    #[error("clause word of length {len} exceeds the maximum of {max}")]
    ClauseTooLong { len: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Pattern {
    Var(String),
    Wildcard,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Var(v) => write!(f, "{v}"),
            Pattern::Wildcard => write!(f, "_"),
        }
    }
}

/// One method call in a clause. `args == None` leaves the arguments unconstrained.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CallAtom {
    pub method: String,
    pub result: Option<Pattern>,
    pub args: Option<Vec<Pattern>>,
}

impl CallAtom {
    pub fn plain(method: impl Into<String>) -> Self {
        CallAtom { method: method.into(), result: None, args: None }
    }

    pub fn is_constrained(&self) -> bool {
        let binds = |p: &Pattern| matches!(p, Pattern::Var(_));
        self.result.as_ref().is_some_and(binds) || self.args.as_ref().is_some_and(|a| a.iter().any(binds))
    }
}

impl fmt::Display for CallAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = &self.result {
            write!(f, "{r}=")?;
        }
        write!(f, "{}", self.method)?;
        if let Some(args) = &self.args {
            let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Atom(CallAtom),
    Alt(Vec<Seq>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seq(pub Vec<Item>);

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match item {
                Item::Atom(a) => write!(f, "{a}")?,
                Item::Alt(alts) => {
                    write!(f, "(")?;
                    for (j, s) in alts.iter().enumerate() {
                        if j > 0 {
                            write!(f, " | ")?;
                        }
                        write!(f, "{s}")?;
                    }
                    write!(f, ")")?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    /// Source text as written in the annotation.
    pub text: String,
    pub expr: Seq,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub clauses: Vec<Clause>,
    pub module_methods: BTreeSet<String>,
}

impl fmt::Display for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "contract {{ ")?;
        for c in &self.clauses {
            write!(f, "\"{c}\"; ")?;
        }
        write!(f, "}}")
    }
}

/// A concrete word of a clause.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CallSequence {
    pub atoms: Vec<CallAtom>,
}

impl CallSequence {
    pub fn methods(&self) -> Vec<&str> {
        self.atoms.iter().map(|a| a.method.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn has_constraints(&self) -> bool {
        self.atoms.iter().any(CallAtom::is_constrained)
    }
}

impl fmt::Display for CallSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.atoms.iter().map(|a| a.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Parses the clause strings of a `contract { ... }` annotation.
pub fn parse_contract<S: AsRef<str>>(
    clauses: &[S],
    module_methods: &BTreeSet<String>,
) -> Result<Contract, ContractError> {
    let clauses = clauses
        .iter()
        .map(|text| parse_clause(text.as_ref(), module_methods))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Contract { clauses, module_methods: module_methods.clone() })
}

/// Parses the body of an annotation, i.e. `"a b"; "c (d | e)";`.
pub fn parse_contract_text(text: &str, module_methods: &BTreeSet<String>) -> Result<Contract, ContractError> {
    let mut clauses = Vec::new();
    let mut chars = text.char_indices().peekable();
    let mut expect_clause = true;
    while let Some((i, c)) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '"' if expect_clause => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, ch)) => s.push(ch),
                        None => return Err(syntax(i, "unterminated clause string")),
                    }
                }
                clauses.push(s);
                expect_clause = false;
            }
            ';' if !expect_clause => expect_clause = true,
            _ => return Err(syntax(i, format!("unexpected `{c}` in contract body"))),
        }
    }
    if clauses.is_empty() {
        return Err(syntax(0, "contract has no clauses"));
    }
    parse_contract(&clauses, module_methods)
}

pub fn parse_clause(text: &str, module_methods: &BTreeSet<String>) -> Result<Clause, ContractError> {
    let tokens = lex_clause(text)?;
    let mut p = ClauseParser { tokens, pos: 0 };
    let expr = p.seq()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(syntax(t.offset, format!("unexpected `{}`", t.kind.text())));
    }
    check_alphabet(&expr, module_methods)?;
    Ok(Clause { text: text.to_string(), expr })
}

/// Parses a single `[V=]name[(arg,...)]` atom.
pub fn parse_atom(text: &str) -> Result<CallAtom, ContractError> {
    let tokens = lex_clause(text)?;
    let mut p = ClauseParser { tokens, pos: 0 };
    let atom = p.atom()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(syntax(t.offset, format!("unexpected `{}` after atom", t.kind.text())));
    }
    Ok(atom)
}

fn check_alphabet(seq: &Seq, methods: &BTreeSet<String>) -> Result<(), ContractError> {
    for item in &seq.0 {
        match item {
            Item::Atom(a) if !methods.contains(&a.method) => {
                return Err(ContractError::UnknownMethod(a.method.clone()))
            }
            Item::Atom(_) => {}
            Item::Alt(alts) => alts.iter().try_for_each(|s| check_alphabet(s, methods))?,
        }
    }
    Ok(())
}

/// Enumerates the words of a clause in left-to-right order, without duplicates.
pub fn expand_clause(clause: &Clause, max_len: usize) -> Result<Vec<CallSequence>, ContractError> {
    let words = expand_seq(&clause.expr);
    let mut out: Vec<CallSequence> = Vec::with_capacity(words.len());
    for atoms in words {
        if atoms.len() > max_len {
            return Err(ContractError::ClauseTooLong { len: atoms.len(), max: max_len });
        }
        let w = CallSequence { atoms };
        if !out.contains(&w) {
            out.push(w);
        }
    }
    Ok(out)
}

fn expand_seq(seq: &Seq) -> Vec<Vec<CallAtom>> {
    let mut acc: Vec<Vec<CallAtom>> = vec![Vec::new()];
    for item in &seq.0 {
        let options: Vec<Vec<CallAtom>> = match item {
            Item::Atom(a) => vec![vec![a.clone()]],
            Item::Alt(alts) => alts.iter().flat_map(expand_seq).collect(),
        };
        acc = acc
            .iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut w = prefix.clone();
                    w.extend(o.iter().cloned());
                    w
                })
            })
            .collect();
    }
    acc
}

/// A pair of clauses whose words chain through a shared method: some word of
/// `first` ends with `method` and some word of `second` starts with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseOverlap {
    pub first: usize,
    pub second: usize,
    pub method: String,
}

pub fn overlapping_clauses(contract: &Contract, max_len: usize) -> Vec<ClauseOverlap> {
    let expanded: Vec<Vec<CallSequence>> = contract
        .clauses
        .iter()
        .map(|c| expand_clause(c, max_len).unwrap_or_default())
        .collect();
    let mut out = Vec::new();
    for (i, wi) in expanded.iter().enumerate() {
        let ends: BTreeSet<&str> = wi.iter().filter_map(|w| w.atoms.last()).map(|a| a.method.as_str()).collect();
        for (j, wj) in expanded.iter().enumerate() {
            if i == j {
                continue;
            }
            let starts: BTreeSet<&str> =
                wj.iter().filter_map(|w| w.atoms.first()).map(|a| a.method.as_str()).collect();
            for m in ends.intersection(&starts) {
                out.push(ClauseOverlap { first: i, second: j, method: m.to_string() });
            }
        }
    }
    out
}

fn syntax(offset: usize, msg: impl Into<String>) -> ContractError {
    ContractError::Syntax { offset, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Name(String),
    Wildcard,
    Open { call: bool },
    Close,
    Bar,
    Eq,
    Comma,
}

impl TokKind {
    fn text(&self) -> String {
        match self {
            TokKind::Name(n) => n.clone(),
            TokKind::Wildcard => "_".into(),
            TokKind::Open { .. } => "(".into(),
            TokKind::Close => ")".into(),
            TokKind::Bar => "|".into(),
            TokKind::Eq => "=".into(),
            TokKind::Comma => ",".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct ClauseTok {
    kind: TokKind,
    offset: usize,
}

fn lex_clause(text: &str) -> Result<Vec<ClauseTok>, ContractError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out: Vec<ClauseTok> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (offset, c) = chars[i];
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '*' | '+' => return Err(ContractError::StarNotAllowed { op: c, offset }),
            '(' => {
                // An argument list hugs its method name; a group does not.
                let call = i > 0
                    && matches!(out.last(), Some(ClauseTok { kind: TokKind::Name(_), .. }))
                    && !chars[i - 1].1.is_whitespace();
                out.push(ClauseTok { kind: TokKind::Open { call }, offset });
            }
            ')' => out.push(ClauseTok { kind: TokKind::Close, offset }),
            '|' => out.push(ClauseTok { kind: TokKind::Bar, offset }),
            '=' => out.push(ClauseTok { kind: TokKind::Eq, offset }),
            ',' => out.push(ClauseTok { kind: TokKind::Comma, offset }),
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|(_, c)| c).collect();
                let kind = if word == "_" { TokKind::Wildcard } else { TokKind::Name(word) };
                out.push(ClauseTok { kind, offset });
                continue;
            }
            _ => return Err(syntax(offset, format!("unexpected character `{c}`"))),
        }
        i += 1;
    }
    Ok(out)
}

struct ClauseParser {
    tokens: Vec<ClauseTok>,
    pos: usize,
}

impl ClauseParser {
    fn peek(&self) -> Option<&TokKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or_else(|| self.tokens.last().map_or(0, |t| t.offset + 1), |t| t.offset)
    }

    fn seq(&mut self) -> Result<Seq, ContractError> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None | Some(TokKind::Close) | Some(TokKind::Bar) => break,
                Some(TokKind::Open { call: false }) => {
                    self.pos += 1;
                    let mut alts = vec![self.seq()?];
                    while self.peek() == Some(&TokKind::Bar) {
                        self.pos += 1;
                        alts.push(self.seq()?);
                    }
                    if self.peek() != Some(&TokKind::Close) {
                        return Err(syntax(self.offset(), "expected `)`"));
                    }
                    self.pos += 1;
                    if alts.len() == 1 {
                        items.extend(alts.pop().unwrap().0);
                    } else {
                        items.push(Item::Alt(alts));
                    }
                }
                Some(_) => items.push(Item::Atom(self.atom()?)),
            }
        }
        if items.is_empty() {
            return Err(syntax(self.offset(), "empty sequence"));
        }
        Ok(Seq(items))
    }

    fn atom(&mut self) -> Result<CallAtom, ContractError> {
        let offset = self.offset();
        let first = match self.peek().cloned() {
            Some(TokKind::Name(n)) => Pattern::Var(n),
            Some(TokKind::Wildcard) => Pattern::Wildcard,
            Some(k) => return Err(syntax(offset, format!("expected method name, found `{}`", k.text()))),
            None => return Err(syntax(offset, "expected method name")),
        };
        self.pos += 1;
        let (result, method) = if self.peek() == Some(&TokKind::Eq) {
            self.pos += 1;
            let result = variable(first)?;
            match self.peek().cloned() {
                Some(TokKind::Name(n)) => {
                    self.pos += 1;
                    (Some(result), n)
                }
                _ => return Err(syntax(self.offset(), "expected method name after `=`")),
            }
        } else {
            match first {
                Pattern::Var(n) => (None, n),
                Pattern::Wildcard => return Err(syntax(offset, "`_` is not a method name")),
            }
        };
        let args = if self.peek() == Some(&TokKind::Open { call: true }) {
            self.pos += 1;
            let mut args = Vec::new();
            if self.peek() == Some(&TokKind::Close) {
                self.pos += 1;
            } else {
                loop {
                    let a = match self.peek().cloned() {
                        Some(TokKind::Name(n)) => Pattern::Var(n),
                        Some(TokKind::Wildcard) => Pattern::Wildcard,
                        _ => return Err(syntax(self.offset(), "expected variable or `_`")),
                    };
                    self.pos += 1;
                    args.push(variable(a)?);
                    match self.peek() {
                        Some(TokKind::Comma) => self.pos += 1,
                        Some(TokKind::Close) => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(syntax(self.offset(), "expected `,` or `)`")),
                    }
                }
            }
            Some(args)
        } else {
            None
        };
        Ok(CallAtom { method, result, args })
    }
}

fn variable(p: Pattern) -> Result<Pattern, ContractError> {
    match &p {
        Pattern::Var(v) if !v.starts_with(|c: char| c.is_uppercase()) => Err(ContractError::LowercaseVariable(v.clone())),
        _ => Ok(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn methods(ms: &[&str]) -> BTreeSet<String> {
        ms.iter().map(|s| s.to_string()).collect()
    }

    fn list() -> BTreeSet<String> {
        methods(&["add", "contains", "indexOf", "get", "set", "remove", "size"])
    }

    fn words(text: &str, alphabet: &BTreeSet<String>) -> Vec<String> {
        let c = parse_clause(text, alphabet).unwrap();
        expand_clause(&c, DEFAULT_MAX_CLAUSE_LEN).unwrap().iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn concatenation_of_two_atoms() {
        let c = parse_clause("contains indexOf", &list()).unwrap();
        assert_eq!(c.expr.0.len(), 2);
        assert_eq!(words("contains indexOf", &list()), ["contains indexOf"]);
    }

    #[test]
    fn atom_followed_by_alternative() {
        let c = parse_clause("indexOf (remove | set | get)", &list()).unwrap();
        match &c.expr.0[..] {
            [Item::Atom(a), Item::Alt(alts)] => {
                assert_eq!(a.method, "indexOf");
                assert_eq!(alts.len(), 3);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(words("size (remove | set | get)", &list()), ["size remove", "size set", "size get"]);
    }

    #[test]
    fn cross_product_of_alternatives() {
        let ab = methods(&["a", "b", "c", "d"]);
        assert_eq!(words("(a|b)(c|d)", &ab), ["a c", "a d", "b c", "b d"]);
    }

    #[test]
    fn star_is_rejected() {
        let e = parse_clause("a*", &methods(&["a"])).unwrap_err();
        assert!(matches!(e, ContractError::StarNotAllowed { op: '*', offset: 1 }));
    }

    #[test]
    fn unknown_method_is_rejected() {
        assert_eq!(parse_clause("a z", &methods(&["a"])).unwrap_err(), ContractError::UnknownMethod("z".into()));
    }

    #[test]
    fn parameterized_atoms() {
        let a = parse_atom("Y=indexOf(X)").unwrap();
        assert_eq!(a.result, Some(Pattern::Var("Y".into())));
        assert_eq!(a.args, Some(vec![Pattern::Var("X".into())]));
        let a = parse_atom("set(Y,_)").unwrap();
        assert_eq!(a.result, None);
        assert_eq!(a.args, Some(vec![Pattern::Var("Y".into()), Pattern::Wildcard]));
        let a = parse_atom("size").unwrap();
        assert_eq!(a, CallAtom::plain("size"));
        assert!(!a.is_constrained());
        assert_eq!(parse_atom("y=indexOf(X)").unwrap_err(), ContractError::LowercaseVariable("y".into()));
        assert_eq!(parse_atom("set(x)").unwrap_err(), ContractError::LowercaseVariable("x".into()));
        assert!(matches!(parse_atom("set(X"), Err(ContractError::Syntax { .. })));
    }

    #[test]
    fn group_versus_argument_list() {
        let c = parse_clause("X=indexOf(_) (remove(X) | set(X,_))", &list()).unwrap();
        let ws = expand_clause(&c, 16).unwrap();
        assert_eq!(ws.len(), 2);
        assert_eq!(ws[1].to_string(), "X=indexOf(_) set(X,_)");
    }

    #[test]
    fn too_long_words_are_rejected() {
        let c = parse_clause("a a a", &methods(&["a"])).unwrap();
        assert_eq!(expand_clause(&c, 2).unwrap_err(), ContractError::ClauseTooLong { len: 3, max: 2 });
    }

    #[test]
    fn annotation_body() {
        let c = parse_contract_text(r#""a b"; "c (d | e)";"#, &methods(&["a", "b", "c", "d", "e"])).unwrap();
        assert_eq!(c.clauses.len(), 2);
        assert!(parse_contract_text(r#""a" "b""#, &methods(&["a", "b"])).is_err());
    }

    #[test]
    fn overlaps_between_clauses() {
        let c = parse_contract(&["contains indexOf", "indexOf (remove | set | get)"], &list()).unwrap();
        let o = overlapping_clauses(&c, 16);
        assert_eq!(o, vec![ClauseOverlap { first: 0, second: 1, method: "indexOf".into() }]);
    }
}
