//! Proof trees: enumeration, the `=>(Body, Conclusion)` text format, and an
//! independent checker.

mod check;
mod text;

use std::collections::HashSet;

use serde_json::{json, Value};

pub use check::{check_proof, Verdict};
pub use text::{parse_tree, serialize_tree, TreeParseError};

use crate::engine::{answer_of, Answer, EngineError, Machine, SolveLimits};
use crate::term::{Program, Query, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProofTree {
    /// A goal resolved against a program clause; children prove the body
    /// goals in order. Facts have no children.
    Derived { conclusion: Term, children: Vec<ProofTree> },
    /// A goal discharged by a builtin, a control construct or a library
    /// predicate.
    Builtin { goal: Term },
}

impl ProofTree {
    pub fn derived(conclusion: Term, children: Vec<ProofTree>) -> Self {
        ProofTree::Derived { conclusion, children }
    }

    pub fn builtin(goal: Term) -> Self {
        ProofTree::Builtin { goal }
    }

    pub fn conclusion(&self) -> &Term {
        match self {
            ProofTree::Derived { conclusion, .. } => conclusion,
            ProofTree::Builtin { goal } => goal,
        }
    }

    pub fn children(&self) -> &[ProofTree] {
        match self {
            ProofTree::Derived { children, .. } => children,
            ProofTree::Builtin { .. } => &[],
        }
    }

    pub fn is_builtin(&self) -> bool {
        matches!(self, ProofTree::Builtin { .. })
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(ProofTree::node_count).sum::<usize>()
    }

    /// Pre-order walk over every node.
    pub fn nodes(&self) -> Vec<&ProofTree> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children().iter().rev());
        }
        out
    }

    /// The node at `path` (child indices from the root).
    pub fn at(&self, path: &[usize]) -> Option<&ProofTree> {
        path.iter().try_fold(self, |n, &i| n.children().get(i))
    }

    /// Conclusions of every derived node, pre-order.
    pub fn derived_conclusions(&self) -> Vec<&Term> {
        self.nodes().into_iter().filter(|n| !n.is_builtin()).map(ProofTree::conclusion).collect()
    }

    pub fn to_json(&self) -> Value {
        match self {
            ProofTree::Derived { conclusion, children } => json!({
                "kind": "derived",
                "conclusion": conclusion.to_string(),
                "children": children.iter().map(ProofTree::to_json).collect::<Vec<_>>(),
            }),
            ProofTree::Builtin { goal } => json!({
                "kind": "builtin",
                "conclusion": goal.to_string(),
                "children": [],
            }),
        }
    }
}

impl std::fmt::Display for ProofTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&serialize_tree(self))
    }
}

/// Distinct proofs of one query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectorySet {
    pub query: Term,
    pub trees: Vec<ProofTree>,
    /// True when the enumeration finished, so `trees` holds every proof.
    pub exhausted: bool,
}

/// Enumerates distinct proof trees depth-first, up to `limits.max_solutions`.
pub fn prove_trajectories(
    program: &Program,
    query: &Query,
    limits: &SolveLimits,
) -> Result<TrajectorySet, EngineError> {
    prove_trajectories_where(program, query, limits, |_, _| true)
}

/// Like [`prove_trajectories`] but keeps only proofs accepted by `keep`.
/// `exhausted` still means no further accepted proof exists.
pub fn prove_trajectories_where<F>(
    program: &Program,
    query: &Query,
    limits: &SolveLimits,
    mut keep: F,
) -> Result<TrajectorySet, EngineError>
where
    F: FnMut(&Answer, &ProofTree) -> bool,
{
    limits.validate()?;
    let cap = limits.max_solutions;
    let mut machine = Machine::new(program, query, *limits, true);
    let mut seen = HashSet::new();
    let mut trees = Vec::new();
    let mut exhausted = true;
    while machine.next_solution()? {
        let tree = machine.proof();
        if !seen.insert(serialize_tree(&tree)) {
            continue;
        }
        if !keep(&answer_of(query, machine.bindings()), &tree) {
            continue;
        }
        if trees.len() == cap {
            // one more distinct proof exists
            exhausted = false;
            break;
        }
        trees.push(tree);
    }
    if machine.limit_hit().is_some() {
        exhausted = false;
    }
    Ok(TrajectorySet { query: query.as_term(), trees, exhausted })
}

/// Replaces builtin leaves whose goal is a user predicate of `program`
/// with the first derived proof of that goal, when one exists.
pub fn expand_opaque(program: &Program, tree: &ProofTree, limits: &SolveLimits) -> ProofTree {
    match tree {
        ProofTree::Derived { conclusion, children } => ProofTree::Derived {
            conclusion: conclusion.clone(),
            children: children.iter().map(|c| expand_opaque(program, c, limits)).collect(),
        },
        ProofTree::Builtin { goal } => {
            let user = crate::term::PredKey::of(goal).is_some_and(|k| program.defines(&k));
            if !user {
                return tree.clone();
            }
            let query = check::query_of(goal);
            let one = SolveLimits { max_solutions: 1, ..*limits };
            match prove_trajectories(program, &query, &one) {
                Ok(set) => match set.trees.into_iter().next() {
                    Some(t) if t.conclusion() == goal => t,
                    _ => tree.clone(),
                },
                Err(_) => tree.clone(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_query};

    fn trees(src: &str, q: &str) -> TrajectorySet {
        let p = parse_program(src).unwrap();
        prove_trajectories(&p, &parse_query(q).unwrap(), &SolveLimits::default()).unwrap()
    }

    #[test]
    fn chain_of_facts() {
        let set = trees("p :- q. q.", "p");
        assert_eq!(set.trees.len(), 1);
        assert!(set.exhausted);
        let expect = ProofTree::derived(Term::atom("p"), vec![ProofTree::derived(Term::atom("q"), vec![])]);
        assert_eq!(set.trees[0], expect);
    }

    #[test]
    fn two_derivations() {
        let set = trees("p :- q. q :- a. q :- b. a. b.", "p");
        assert_eq!(set.trees.len(), 2);
        assert_ne!(set.trees[0], set.trees[1]);
    }

    #[test]
    fn builtin_leaves_are_instantiated() {
        let set = trees("w(18.0). e(X) :- w(W), X is 8 * W.", "e(X)");
        assert_eq!(
            set.trees[0].to_string(),
            "=>(,(=>(builtin(true), w(18.0)), =>(builtin(is(144.0, *(8, 18.0))), is(144.0, *(8, 18.0)))), e(144.0))"
        );
    }

    #[test]
    fn control_constructs_are_single_leaves() {
        let set = trees("p(X) :- (X = 1 -> true ; fail), \\+ X = 2.", "p(1)");
        let children = set.trees[0].children();
        assert_eq!(children.len(), 2);
        assert!(children.iter().all(ProofTree::is_builtin));
    }

    #[test]
    fn duplicate_proofs_collapse() {
        let set = trees("p :- (true ; true).", "p");
        assert_eq!(set.trees.len(), 1);
        assert!(set.exhausted);
    }

    #[test]
    fn cap_with_lookahead() {
        let src = "p(1). p(2). p(3).";
        let p = parse_program(src).unwrap();
        let q = parse_query("p(X)").unwrap();
        let at = |cap| {
            let limits = SolveLimits { max_solutions: cap, ..SolveLimits::default() };
            prove_trajectories(&p, &q, &limits).unwrap()
        };
        assert!(!at(2).exhausted);
        assert!(at(3).exhausted);
        assert_eq!(at(3).trees.len(), 3);
    }

    #[test]
    fn multi_goal_query_root() {
        let set = trees("a. b.", "a, b");
        assert_eq!(set.trees[0].to_string(), "=>(,(=>(builtin(true), a), =>(builtin(true), b)), ,(a, b))");
    }

    #[test]
    fn json_rendering() {
        let set = trees("p :- q. q.", "p");
        let v = set.trees[0].to_json();
        assert_eq!(v["kind"], "derived");
        assert_eq!(v["children"][0]["conclusion"], "q");
    }
}
