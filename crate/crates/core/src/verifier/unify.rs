use std::collections::HashMap;

use crate::contracts::{CallAtom, Pattern};
use crate::grammar::CallSite;

/// Whether the clause variables of `atoms` can be bound consistently to the
/// argument and result terms of the matched calls. Terms are compared by
/// their canonical printed form.
pub fn check_unification<'a>(sites: &[&'a CallSite], atoms: &'a [CallAtom]) -> bool {
    if sites.len() != atoms.len() {
        return false;
    }
    let mut env: HashMap<&'a str, &'a str> = HashMap::new();
    for (site, atom) in sites.iter().zip(atoms) {
        if let Some(pats) = &atom.args {
            if pats.len() != site.args.len() {
                return false;
            }
            for (p, term) in pats.iter().zip(&site.args) {
                if !unify(p, Some(term), &mut env) {
                    return false;
                }
            }
        }
        if let Some(p) = &atom.result {
            if !unify(p, site.result.as_deref(), &mut env) {
                return false;
            }
        }
    }
    true
}

fn unify<'a>(p: &'a Pattern, term: Option<&'a str>, env: &mut HashMap<&'a str, &'a str>) -> bool {
    match (p, term) {
        (Pattern::Wildcard, _) => true,
        (Pattern::Var(_), None) => false,
        (Pattern::Var(v), Some(t)) => *env.entry(v.as_str()).or_insert(t) == t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::parse_atom;
    use crate::frontend::{Location, MethodId};

    fn site(callee: &str, args: &[&str], result: Option<&str>) -> CallSite {
        CallSite {
            method: MethodId(0),
            node: 1,
            loc: Location { file: "t.mg".into(), line: 1, col: 1 },
            receiver: "v".into(),
            callee: callee.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
            result: result.map(str::to_string),
        }
    }

    fn atoms(text: &[&str]) -> Vec<CallAtom> {
        text.iter().map(|t| parse_atom(t).unwrap()).collect()
    }

    #[test]
    fn shared_variables_must_bind_identical_terms() {
        let calls = [site("contains", &["o"], None), site("indexOf", &["o"], Some("i")), site("set", &["i", "n"], None)];
        let refs: Vec<&CallSite> = calls.iter().collect();
        assert!(check_unification(&refs, &atoms(&["contains(X)", "Y=indexOf(X)", "set(Y,_)"])));

        let calls = [site("contains", &["o"], None), site("indexOf", &["o + 1"], Some("i"))];
        let refs: Vec<&CallSite> = calls.iter().collect();
        assert!(!check_unification(&refs, &atoms(&["contains(X)", "_=indexOf(X)"])));
    }

    #[test]
    fn wildcards_and_arity() {
        let calls = [site("set", &["i", "n"], None)];
        let refs: Vec<&CallSite> = calls.iter().collect();
        assert!(check_unification(&refs, &atoms(&["set(_,_)"])));
        assert!(check_unification(&refs, &atoms(&["set"])));
        assert!(!check_unification(&refs, &atoms(&["set(_)"])));
        assert!(!check_unification(&refs, &atoms(&["X=set"])));
    }
}
