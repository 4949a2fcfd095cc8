//! A Horn-clause engine that enumerates proof trees, a pipeline that turns
//! verified programs into reasoning datasets, and checkpoint averaging.

pub mod checkpoint;
pub mod engine;
pub mod format;
pub mod ops;
pub mod parser;
pub mod pipeline;
pub mod proof;
pub mod term;

pub use engine::{solve_all, Answer, EngineError, LimitHit, Solutions, SolveLimits};
pub use format::{format_program, format_term};
pub use parser::{parse_program, parse_query, parse_term, ParseError};
pub use proof::{check_proof, parse_tree, prove_trajectories, serialize_tree, ProofTree, TrajectorySet, Verdict};
pub use term::{Clause, PredKey, Program, Query, Term};
