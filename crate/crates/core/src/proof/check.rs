//! Proof checking by local re-derivation. Each node is checked on its own
//! against the program; nothing is shared with the search that built it.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::ProofTree;
use crate::engine::{eval_arith, solve_all, Bindings, SolveLimits};
use crate::term::{Clause, PredKey, Program, Query, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// `path` holds child indices from the root to the first bad node
    /// found in post-order.
    Invalid {
        path: Vec<usize>,
        node: String,
        reason: String,
    },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => f.write_str("valid"),
            Verdict::Invalid { path, node, reason } => {
                let path: Vec<String> = path.iter().map(usize::to_string).collect();
                write!(f, "invalid at [{}] {node}: {reason}", path.join(", "))
            }
        }
    }
}

pub fn check_proof(program: &Program, tree: &ProofTree) -> Verdict {
    let mut path = Vec::new();
    match check_node(program, tree, &mut path) {
        Ok(()) => Verdict::Valid,
        Err((path, reason)) => {
            let node = tree.at(&path).map(|n| n.conclusion().to_string()).unwrap_or_default();
            Verdict::Invalid { path, node, reason }
        }
    }
}

type Failure = (Vec<usize>, String);

fn check_node(program: &Program, tree: &ProofTree, path: &mut Vec<usize>) -> Result<(), Failure> {
    for (i, child) in tree.children().iter().enumerate() {
        path.push(i);
        check_node(program, child, path)?;
        path.pop();
    }
    let outcome = match tree {
        ProofTree::Derived { conclusion, children } => check_derived(program, conclusion, children),
        ProofTree::Builtin { goal } => check_leaf(program, goal),
    };
    outcome.map_err(|reason| (path.clone(), reason))
}

/// A substitution where tree variables are rigid: they only match
/// themselves, so a node must be an instance of the clause it cites.
struct Subst {
    map: HashMap<usize, Term>,
    rigid_below: usize,
}

impl Subst {
    fn new(rigid_below: usize) -> Self {
        Subst { map: HashMap::new(), rigid_below }
    }

    fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.map.get(&v.id) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    fn apply(&self, t: &Term) -> Term {
        let w = self.walk(t);
        match w {
            Term::Compound(c) if !w.is_ground() => {
                Term::compound(c.functor().clone(), c.args().iter().map(|a| self.apply(a)).collect())
            }
            other => other.clone(),
        }
    }

    fn occurs(&self, id: usize, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(v) => v.id == id,
            Term::Compound(c) => c.args().iter().any(|a| self.occurs(id, a)),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x.id == y.id => true,
            (Term::Var(x), other) | (other, Term::Var(x)) if x.id >= self.rigid_below => {
                if self.occurs(x.id, other) {
                    return false;
                }
                self.map.insert(x.id, other.clone());
                true
            }
            (Term::Compound(x), Term::Compound(y)) => {
                x.functor() == y.functor()
                    && x.arity() == y.arity()
                    && x.args().iter().zip(y.args()).all(|(p, q)| self.unify(p, q))
            }
            _ => a == b,
        }
    }
}

fn max_var(terms: &[&Term]) -> usize {
    let mut top = 0;
    for t in terms {
        t.for_each_var(&mut |v| top = top.max(v.id + 1));
    }
    top
}

fn rename(t: &Term, base: usize) -> Term {
    t.map_vars(&mut |v| Term::Var(Var::new(v.name.clone(), base + v.id)))
}

fn licenses(clause: &Clause, conclusion: &Term, children: &[ProofTree], base: usize) -> bool {
    let mut s = Subst::new(base);
    if !s.unify(&rename(&clause.head, base), conclusion) {
        return false;
    }
    let mut body = Vec::new();
    for g in &clause.body {
        let g = s.apply(&rename(g, base));
        body.extend(g.conjuncts().into_iter().cloned());
    }
    body.len() == children.len() && body.iter().zip(children).all(|(g, c)| s.unify(g, c.conclusion()))
}

fn check_derived(program: &Program, conclusion: &Term, children: &[ProofTree]) -> Result<(), String> {
    let mut terms = vec![conclusion];
    terms.extend(children.iter().map(ProofTree::conclusion));
    let base = max_var(&terms);

    if conclusion.args_of(",", 2).is_some() {
        let goals = conclusion.conjuncts();
        let mut s = Subst::new(base);
        let ok = goals.len() == children.len() && goals.iter().zip(children).all(|(g, c)| s.unify(g, c.conclusion()));
        return if ok { Ok(()) } else { Err("children do not match the conjunction".into()) };
    }

    let key = PredKey::of(conclusion).ok_or_else(|| "conclusion is not callable".to_string())?;
    if !program.defines(&key) {
        return Err(format!("no clauses for {key}"));
    }
    if program.clauses_for(&key).any(|c| licenses(c, conclusion, children, base)) {
        Ok(())
    } else {
        Err("no clause licenses this node".into())
    }
}

fn check_leaf(program: &Program, goal: &Term) -> Result<(), String> {
    let eval = |t: &Term| eval_arith(t, &Bindings::new()).map_err(|e| e.to_string());
    let (name, arity) = match goal {
        Term::Atom(a) => (&**a, 0),
        Term::Compound(c) => (&**c.functor(), c.arity()),
        _ => return Err("leaf is not a goal".into()),
    };
    let args = goal.as_compound().map(|c| c.args()).unwrap_or(&[]);
    let holds = match (name, arity) {
        ("true", 0) => true,
        ("fail" | "false", 0) => false,
        ("is", 2) => eval(&args[1])?.into_term() == args[0],
        ("=", 2) => args[0] == args[1],
        ("\\=", 2) => !Subst::new(0).unify(&args[0], &args[1]),
        (op @ ("=:=" | "=\\=" | "<" | ">" | "=<" | ">="), 2) => {
            let ord = eval(&args[0])?.compare(&eval(&args[1])?);
            match op {
                "=:=" => ord == Ordering::Equal,
                "=\\=" => ord != Ordering::Equal,
                "<" => ord == Ordering::Less,
                ">" => ord == Ordering::Greater,
                "=<" => ord != Ordering::Greater,
                _ => ord != Ordering::Less,
            }
        }
        _ => {
            let limits = SolveLimits { max_solutions: 1, ..SolveLimits::default() };
            let sols = solve_all(program, &query_of(goal), &limits).map_err(|e| e.to_string())?;
            !sols.answers.is_empty()
        }
    };
    if holds {
        Ok(())
    } else {
        Err("builtin goal does not hold".into())
    }
}

/// A query for `goal` with its variables renumbered from zero.
pub(crate) fn query_of(goal: &Term) -> Query {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut names: Vec<Arc<str>> = Vec::new();
    let renamed = goal.map_vars(&mut |v| {
        let id = *ids.entry(v.id).or_insert_with(|| {
            names.push(Arc::from("_"));
            names.len() - 1
        });
        Term::Var(Var::new(v.name.clone(), id))
    });
    Query::new(vec![renamed], names)
}
