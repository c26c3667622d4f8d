//! Coalition manipulation of the Borda voting rule.
//!
//! A coalition of `n` manipulators, knowing the non-manipulators' tally,
//! wants candidate `d` to win (ties go to `d`). This crate provides:
//!
//! * [`election`]: Borda tallies, gaps and the win check;
//! * [`heuristics`]: REVERSE, LARGEST FIT and AVERAGE FIT;
//! * [`matrices`]: manipulation matrices and the conversion of relaxed
//!   matrices into ballots;
//! * [`exact`]: the minimum coalition size by exhaustive search, and a
//!   Permutation Sum solver;
//! * [`hardness`]: the reduction from Permutation Sum and the permutation
//!   matrix encoding of two-manipulator problems;
//! * [`generators`]: uniform and urn-model electorates;
//! * [`harness`]: the experiment driver and its CSV output;
//! * [`formats`]: the plain-text file formats used by the CLI.

pub mod election;
pub mod error;
pub mod exact;
pub mod formats;
pub mod generators;
pub mod hardness;
pub mod harness;
pub mod heuristics;
pub mod matrices;

pub use election::{apply_votes, check_win, gaps, tally, GapVector, ManipulationProblem, ScoreVector, Vote};
pub use error::{Error, Result};
pub use heuristics::{HeuristicResult, TieBreakPolicy};
pub use matrices::{ManipulationMatrix, RelaxedMatrix};
