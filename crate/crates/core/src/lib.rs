//! Verification of client programs against module contracts for concurrency.

pub mod contracts;
pub mod frontend;
pub mod glr;
pub mod grammar;
pub mod verifier;

pub use contracts::{CallAtom, CallSequence, Clause, Contract, ContractError};
pub use frontend::{parse_program, FrontendError, Location, MethodId, Program, SiteId};
pub use glr::{ParseTable, ParseTree};
pub use grammar::{simplify_grammar, Grammar, SiteRef};
pub use verifier::{render_json, render_text, verify, Mode, Verification, VerifyError, VerifyOptions, Violation};
