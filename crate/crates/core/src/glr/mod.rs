//! LR(0) tables and generalized subword parsing over behavior grammars.

mod engine;
mod table;
mod tree;

pub use engine::{
    accepts, parse_subword, parse_until_lca, parse_until_lca_with_limit, word_ids, GlrError, LcaTree, ParseStats,
    DEFAULT_BRANCH_LIMIT,
};
pub use table::{build_parse_table, Action, Item, LrState, ParseTable};
pub use tree::{Label, ParseTree, TreeNode};
