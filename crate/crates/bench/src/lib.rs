//! Shared fixtures for the benchmarks.

use sbt_core::blocks::{assemble, Assembling, BlockKind, BlockSpec};
use sbt_core::sat::{normalize, parse_dimacs, reduce, ReductionOutput};

pub const SIX_CLAUSES: &str =
    "p cnf 4 6\n1 2 -3 0\n1 -2 0\n-1 2 -4 0\n-1 3 4 0\n3 -4 0\n-2 -3 4 0\n";

/// Two mutually feeding blocks: the smallest collapsible assembling.
pub fn toy_assembling() -> Assembling {
    assemble(vec![
        BlockSpec::new(BlockKind::Var, vec!["Y"], vec!["X1", "X2"]),
        BlockSpec::new(BlockKind::Or, vec!["X1", "X2"], vec!["Y"]),
    ])
    .unwrap()
}

pub fn six_clause_reduction() -> ReductionOutput {
    let formula = parse_dimacs(SIX_CLAUSES).unwrap();
    reduce(&normalize(&formula).unwrap()).unwrap()
}
