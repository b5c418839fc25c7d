//! Assembly index computation for strings, with and without templates.
//!
//! An assembly plan builds a target string bottom-up: single letters are
//! free, and each step either concatenates two previously built objects or
//! instantiates wildcards of a previously built template with a previously
//! built filler.  Every intermediate object must itself occur in the target:
//! literals as substrings, templates by matching a substring with every
//! wildcard standing for at least one symbol.  The assembly index of a
//! target is the minimum number of non-monomer steps over all such plans.
//!
//! The crate provides:
//!
//! * [`universe`] — target strings, assembly objects, template matching,
//!   wildcard instantiation, occurrence counting.
//! * [`plan`] — assembly plans, step semantics, and the verifier.
//! * [`certificate`] — the text format for plans (parse / serialize).
//! * [`solver`] — exact search for the canonical and templated index,
//!   a brute-force cross-checking oracle, and greedy upper bounds.
//! * [`heuristics`] — template mining, gain scoring, and the greedy
//!   macro-template heuristic.
//! * [`report`] — JSON-facing report types.

pub mod builder;
pub mod certificate;
pub mod heuristics;
pub mod plan;
pub mod report;
pub mod solver;
pub mod universe;

pub use plan::{AssemblyPlan, PlanMode, PlanStep, VerificationReport};
pub use solver::{SearchConfig, SearchResult};
pub use universe::{AssemblyObject, TargetString};
