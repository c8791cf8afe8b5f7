//! The atomically-executed method set: atomic methods, plus methods whose
//! every caller is itself atomically executed (greatest fixpoint).

use std::collections::{BTreeMap, BTreeSet};

use super::{MethodId, Program};

/// Caller methods of each method (one entry per distinct caller).
pub fn callers(program: &Program) -> BTreeMap<MethodId, BTreeSet<MethodId>> {
    let mut out: BTreeMap<MethodId, BTreeSet<MethodId>> =
        program.methods.iter().map(|m| (m.id, BTreeSet::new())).collect();
    for m in &program.methods {
        for callee in m.cfg.callees() {
            out.entry(callee).or_default().insert(m.id);
        }
    }
    out
}

pub fn compute_atomically_executed(program: &Program) -> BTreeSet<MethodId> {
    let callers = callers(program);
    let is_entry = |id: MethodId| program.entry_methods.contains(&id);
    let mut ae: BTreeSet<MethodId> = program
        .methods
        .iter()
        .filter(|m| m.is_atomic || (!is_entry(m.id) && !callers[&m.id].is_empty()))
        .map(|m| m.id)
        .collect();
    loop {
        let drop: Vec<MethodId> = ae
            .iter()
            .copied()
            .filter(|&id| !program.method(id).is_atomic && callers[&id].iter().any(|c| !ae.contains(c)))
            .collect();
        if drop.is_empty() {
            return ae;
        }
        for id in drop {
            ae.remove(&id);
        }
    }
}

/// Whether `set` satisfies the defining equations of the AE set.
pub fn is_ae_fixpoint(program: &Program, set: &BTreeSet<MethodId>) -> bool {
    let callers = callers(program);
    program.methods.iter().all(|m| {
        let expected = m.is_atomic
            || (!program.entry_methods.contains(&m.id)
                && !callers[&m.id].is_empty()
                && callers[&m.id].iter().all(|c| set.contains(c)));
        expected == set.contains(&m.id)
    })
}
