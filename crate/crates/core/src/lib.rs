//! Exact machinery for sorting permutations by transpositions: breakpoints,
//! 3-breakpoint moves, 3DT-instances and their collapse searches, gadget
//! blocks, the CNF-to-3DT compiler and the equivalent-permutation emitter.

pub mod blocks;
pub mod emit;
pub mod perm;
pub mod sat;
pub mod search;
pub mod tdt;

pub use perm::{BreakpointSet, PermError, Permutation, Transposition};
pub use tdt::{TdtError, TdtInstance, Triple};
