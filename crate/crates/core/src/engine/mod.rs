//! SLD resolution over parsed programs.

pub mod arith;
pub mod bindings;
pub mod builtins;
mod machine;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use arith::{eval_arith, ArithError, Number};
pub use bindings::{unify, Bindings};
pub(crate) use machine::Machine;

use crate::term::{PredKey, Program, Query, Term};

/// Search bounds. All three counts must be at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveLimits {
    pub max_solutions: usize,
    /// Nesting bound on user clause resolution; deeper branches are pruned.
    pub max_depth: u32,
    /// Total goal calls before the search halts.
    pub max_steps: u64,
    pub occurs_check: bool,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits { max_solutions: 64, max_depth: 256, max_steps: 1_000_000, occurs_check: true }
    }
}

impl SolveLimits {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_solutions == 0 {
            return Err(EngineError::InvalidLimits("max_solutions must be at least 1".into()));
        }
        if self.max_depth == 0 {
            return Err(EngineError::InvalidLimits("max_depth must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(EngineError::InvalidLimits("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which bound cut the search short.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitHit {
    Depth,
    Steps,
}

impl fmt::Display for LimitHit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitHit::Depth => f.write_str("depth limit reached"),
            LimitHit::Steps => f.write_str("step limit reached"),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown predicate {0}")]
    UnknownPredicate(PredKey),
    #[error("instantiation error: {0}")]
    Instantiation(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("not callable: {0}")]
    NotCallable(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("invalid limits: {0}")]
    InvalidLimits(String),
}

/// One solution: the named query variables and their values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub bindings: Vec<(Arc<str>, Term)>,
}

impl Answer {
    pub fn get(&self, name: &str) -> Option<&Term> {
        self.bindings.iter().find(|(n, _)| &**n == name).map(|(_, t)| t)
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bindings.is_empty() {
            return f.write_str("true");
        }
        for (i, (name, value)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name} = {value}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solutions {
    pub answers: Vec<Answer>,
    /// Set when a depth or step bound may have hidden further answers.
    pub limit: Option<LimitHit>,
}

pub(crate) fn answer_of(query: &Query, env: &Bindings) -> Answer {
    let bindings = query
        .var_names
        .iter()
        .enumerate()
        .filter(|(_, name)| !name.starts_with('_'))
        .map(|(id, name)| (name.clone(), env.resolve(&Term::var(name.clone(), id))))
        .collect();
    Answer { bindings }
}

/// Enumerates answers to `query` in depth-first, clause order.
pub fn solve_all(program: &Program, query: &Query, limits: &SolveLimits) -> Result<Solutions, EngineError> {
    limits.validate()?;
    let mut machine = Machine::new(program, query, *limits, false);
    let mut answers = Vec::new();
    while answers.len() < limits.max_solutions && machine.next_solution()? {
        answers.push(answer_of(query, machine.bindings()));
    }
    Ok(Solutions { answers, limit: machine.limit_hit() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_query};

    fn solve(src: &str, q: &str) -> Vec<String> {
        let p = parse_program(src).unwrap();
        let q = parse_query(q).unwrap();
        solve_all(&p, &q, &SolveLimits::default()).unwrap().answers.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn facts_in_clause_order() {
        assert_eq!(solve("p(a). p(b). p(c).", "p(X)"), ["X = a", "X = b", "X = c"]);
    }

    #[test]
    fn conjunction_and_rules() {
        let src = "parent(tom, bob). parent(bob, ann). parent(bob, pat).
                   grand(X, Z) :- parent(X, Y), parent(Y, Z).";
        assert_eq!(solve(src, "grand(tom, W)"), ["W = ann", "W = pat"]);
    }

    #[test]
    fn arithmetic_and_comparison() {
        assert_eq!(solve("", "X is 2 + 3 * 4, X > 10"), ["X = 14"]);
        assert!(solve("", "X is 2 + 3, X > 10").is_empty());
        assert_eq!(solve("", "1 =:= 1.0"), ["true"]);
    }

    #[test]
    fn control_constructs() {
        assert_eq!(solve("p(1). p(2).", "(p(X) -> Y = yes ; Y = no)"), ["X = 1, Y = yes"]);
        assert_eq!(solve("", "(fail -> Y = yes ; Y = no)"), ["Y = no"]);
        assert_eq!(solve("p(1).", "\\+ p(2)"), ["true"]);
        assert!(solve("p(1).", "\\+ p(1)").is_empty());
        assert_eq!(solve("", "(X = 1 ; X = 2)"), ["X = 1", "X = 2"]);
    }

    #[test]
    fn list_library() {
        assert_eq!(solve("", "member(X, [a, b])"), ["X = a", "X = b"]);
        assert_eq!(solve("", "append(X, [c], [a, b, c])"), ["X = [a, b]"]);
        assert_eq!(solve("", "length([a, b, c], N)"), ["N = 3"]);
        assert_eq!(solve("", "sum_list([1, 2.5, 3], S)"), ["S = 6.5"]);
        assert_eq!(solve("double(X, Y) :- Y is 2 * X.", "maplist(double, [1, 2], L)"), ["L = [2, 4]"]);
    }

    #[test]
    fn length_generates() {
        assert_eq!(solve("", "length(L, 2)"), ["L = [_G1, _G2]"]);
    }

    #[test]
    fn unknown_predicate_is_an_error() {
        let p = parse_program("p :- q.").unwrap();
        let err = solve_all(&p, &parse_query("p").unwrap(), &SolveLimits::default()).unwrap_err();
        assert_eq!(err, EngineError::UnknownPredicate(PredKey::new("q", 0)));
    }

    #[test]
    fn depth_limit_prunes_left_recursion() {
        let p = parse_program("n(z). n(s(X)) :- n(X).").unwrap();
        let limits = SolveLimits { max_depth: 5, ..SolveLimits::default() };
        let sols = solve_all(&p, &parse_query("n(X)").unwrap(), &limits).unwrap();
        assert_eq!(sols.answers.len(), 5);
        assert_eq!(sols.limit, Some(LimitHit::Depth));
    }

    #[test]
    fn step_limit_halts() {
        let p = parse_program("loop :- loop.").unwrap();
        let limits = SolveLimits { max_depth: u32::MAX, max_steps: 1000, ..SolveLimits::default() };
        let sols = solve_all(&p, &parse_query("loop").unwrap(), &limits).unwrap();
        assert!(sols.answers.is_empty());
        assert_eq!(sols.limit, Some(LimitHit::Steps));
    }

    #[test]
    fn max_solutions_is_not_a_limit_hit() {
        let p = parse_program("p(1). p(2). p(3).").unwrap();
        let limits = SolveLimits { max_solutions: 2, ..SolveLimits::default() };
        let sols = solve_all(&p, &parse_query("p(X)").unwrap(), &limits).unwrap();
        assert_eq!(sols.answers.len(), 2);
        assert_eq!(sols.limit, None);
    }

    #[test]
    fn zero_limits_rejected() {
        let limits = SolveLimits { max_steps: 0, ..SolveLimits::default() };
        let err = solve_all(&Program::new(vec![]), &parse_query("true").unwrap(), &limits);
        assert!(matches!(err, Err(EngineError::InvalidLimits(_))));
    }

    #[test]
    fn occurs_check_flag() {
        assert!(solve("", "X = f(X)").is_empty());
        let limits = SolveLimits { occurs_check: false, ..SolveLimits::default() };
        let sols = solve_all(&Program::new(vec![]), &parse_query("X = f(X)").unwrap(), &limits).unwrap();
        assert_eq!(sols.answers.len(), 1);
        assert_eq!(sols.answers[0].to_string(), "X = f(_G0)");
    }

    #[test]
    fn user_program_may_override_library() {
        assert_eq!(solve("member(x, _).", "member(X, [a])"), ["X = x"]);
    }
}
