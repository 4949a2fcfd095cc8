//! Terms, clauses and programs.
//!
//! A [`Term`] is the single value type of the engine. Lists are ordinary
//! compounds with functor `.` and arity 2, terminated by the atom `[]`.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;

/// Name of the list constructor.
pub const LIST_CONS: &str = ".";
/// The empty list atom.
pub const LIST_NIL: &str = "[]";

/// A logic variable.
///
/// Identity is the numeric `id`; the name is carried for printing only.
/// Ids are allocated per clause (or per query) in order of first
/// occurrence, so parsing the same text twice yields identical variables.
#[derive(Clone, Debug)]
pub struct Var {
    pub name: Arc<str>,
    pub id: usize,
}

impl Var {
    pub fn new(name: impl Into<Arc<str>>, id: usize) -> Self {
        Var { name: name.into(), id }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for Var {}
impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

#[derive(Debug)]
pub struct Compound {
    functor: Arc<str>,
    args: Box<[Term]>,
    ground: bool,
}

impl Compound {
    pub fn functor(&self) -> &Arc<str> {
        &self.functor
    }

    pub fn args(&self) -> &[Term] {
        &self.args
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

fn detach_unique(args: &mut [Term], stack: &mut Vec<Arc<Compound>>) {
    for a in args.iter_mut() {
        if matches!(a, Term::Compound(c) if Arc::strong_count(c) == 1) {
            if let Term::Compound(c) = std::mem::replace(a, Term::Float(0.0)) {
                stack.push(c);
            }
        }
    }
}

// Long lists are deep right spines; dropping them recursively overflows.
impl Drop for Compound {
    fn drop(&mut self) {
        let mut stack = Vec::new();
        detach_unique(&mut self.args, &mut stack);
        while let Some(arc) = stack.pop() {
            if let Ok(mut c) = Arc::try_unwrap(arc) {
                detach_unique(&mut c.args, &mut stack);
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Term {
    Atom(Arc<str>),
    Var(Var),
    Int(BigInt),
    Float(f64),
    Compound(Arc<Compound>),
}

impl Term {
    pub fn atom(name: impl Into<Arc<str>>) -> Term {
        Term::Atom(name.into())
    }

    pub fn var(name: impl Into<Arc<str>>, id: usize) -> Term {
        Term::Var(Var::new(name, id))
    }

    pub fn int(v: impl Into<BigInt>) -> Term {
        Term::Int(v.into())
    }

    /// Builds `functor(args...)`. An empty argument list yields the atom,
    /// so zero-arity compounds never exist.
    pub fn compound(functor: impl Into<Arc<str>>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        if args.is_empty() {
            return Term::Atom(functor);
        }
        let ground = args.iter().all(Term::is_ground);
        Term::Compound(Arc::new(Compound { functor, args: args.into_boxed_slice(), ground }))
    }

    pub fn nil() -> Term {
        Term::atom(LIST_NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::compound(LIST_CONS, vec![head, tail])
    }

    /// Builds a proper list, or a partial list when `tail` is given.
    pub fn list(items: Vec<Term>, tail: Option<Term>) -> Term {
        items.into_iter().rev().fold(tail.unwrap_or_else(Term::nil), |acc, item| Term::cons(item, acc))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Compound(c) => c.ground,
            _ => true,
        }
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Term::Atom(_) | Term::Compound(_))
    }

    pub fn is_number(&self) -> bool {
        matches!(self, Term::Int(_) | Term::Float(_))
    }

    pub fn is_atom(&self, name: &str) -> bool {
        matches!(self, Term::Atom(a) if &**a == name)
    }

    /// Name and arity of a callable term.
    pub fn indicator(&self) -> Option<(&Arc<str>, usize)> {
        match self {
            Term::Atom(a) => Some((a, 0)),
            Term::Compound(c) => Some((&c.functor, c.args.len())),
            _ => None,
        }
    }

    pub fn as_compound(&self) -> Option<&Compound> {
        match self {
            Term::Compound(c) => Some(c),
            _ => None,
        }
    }

    /// Arguments when `self` is `name/arity`.
    pub fn args_of(&self, name: &str, arity: usize) -> Option<&[Term]> {
        match self {
            Term::Compound(c) if &*c.functor == name && c.args.len() == arity => Some(&c.args),
            _ => None,
        }
    }

    /// Splits a list into its elements and final tail (`[]` for proper lists).
    pub fn list_parts(&self) -> (Vec<&Term>, &Term) {
        let mut items = Vec::new();
        let mut cur = self;
        while let Some([h, t]) = cur.args_of(LIST_CONS, 2) {
            items.push(h);
            cur = t;
        }
        (items, cur)
    }

    /// Elements of a proper list.
    pub fn as_list(&self) -> Option<Vec<&Term>> {
        let (items, tail) = self.list_parts();
        tail.is_atom(LIST_NIL).then_some(items)
    }

    /// Visits every variable, left to right, including repeats.
    pub fn for_each_var<F: FnMut(&Var)>(&self, f: &mut F) {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(c) if !c.ground => c.args.iter().for_each(|a| a.for_each_var(f)),
            _ => {}
        }
    }

    /// Rebuilds the term with every variable replaced by `f(var)`.
    /// Ground subterms are shared, not copied.
    pub fn map_vars<F: FnMut(&Var) -> Term>(&self, f: &mut F) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(c) if !c.ground => {
                let args = c.args.iter().map(|a| a.map_vars(f)).collect();
                Term::compound(c.functor.clone(), args)
            }
            other => other.clone(),
        }
    }

    /// Flattens a right-nested `','/2` chain into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Some([a, b]) = cur.args_of(",", 2) {
            out.extend(a.conjuncts());
            cur = b;
        }
        out.push(cur);
        out
    }

    /// Folds goals into a right-nested conjunction; `true` when empty.
    pub fn conjunction(mut goals: Vec<Term>) -> Term {
        let Some(last) = goals.pop() else {
            return Term::atom("true");
        };
        goals.into_iter().rev().fold(last, |acc, g| Term::compound(",", vec![g, acc]))
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        let mut stack = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            let same = match (a, b) {
                (Term::Atom(a), Term::Atom(b)) => a == b,
                (Term::Var(a), Term::Var(b)) => a == b,
                (Term::Int(a), Term::Int(b)) => a == b,
                (Term::Float(a), Term::Float(b)) => a.to_bits() == b.to_bits(),
                (Term::Compound(a), Term::Compound(b)) => {
                    if !Arc::ptr_eq(a, b) {
                        if a.functor != b.functor || a.args.len() != b.args.len() {
                            return false;
                        }
                        stack.extend(a.args.iter().zip(b.args.iter()));
                    }
                    true
                }
                _ => false,
            };
            if !same {
                return false;
            }
        }
        true
    }
}
impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Term::Atom(a) => a.hash(state),
            Term::Var(v) => v.hash(state),
            Term::Int(i) => i.hash(state),
            Term::Float(f) => f.to_bits().hash(state),
            Term::Compound(c) => {
                c.functor.hash(state);
                c.args.hash(state);
            }
        }
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Self {
        Term::atom(s)
    }
}

impl From<i64> for Term {
    fn from(v: i64) -> Self {
        Term::Int(v.into())
    }
}

impl From<f64> for Term {
    fn from(v: f64) -> Self {
        Term::Float(v)
    }
}

/// Canonical functional text, the form used inside proof trees.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::format::format_term(self))
    }
}

/// Functor name and arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub name: Arc<str>,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: impl Into<Arc<str>>, arity: usize) -> Self {
        PredKey { name: name.into(), arity }
    }

    pub fn of(term: &Term) -> Option<PredKey> {
        term.indicator().map(|(n, a)| PredKey::new(n.clone(), a))
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A Horn clause. Facts have an empty body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Term,
    pub body: Vec<Term>,
    /// Variable names indexed by variable id; `_` entries are anonymous.
    pub var_names: Vec<Arc<str>>,
}

impl Clause {
    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn key(&self) -> PredKey {
        PredKey::of(&self.head).expect("clause head is callable")
    }
}

/// An ordered clause database with a functor/arity index.
#[derive(Clone, Debug, Default)]
pub struct Program {
    clauses: Vec<Clause>,
    index: HashMap<PredKey, Vec<usize>>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Self {
        let mut index: HashMap<PredKey, Vec<usize>> = HashMap::new();
        for (i, c) in clauses.iter().enumerate() {
            index.entry(c.key()).or_default().push(i);
        }
        Program { clauses, index }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    /// Source positions of the clauses for `key`, in source order.
    pub fn positions(&self, key: &PredKey) -> &[usize] {
        self.index.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn clauses_for<'a>(&'a self, key: &PredKey) -> impl Iterator<Item = &'a Clause> + 'a {
        self.positions(key).iter().map(move |&i| &self.clauses[i])
    }

    pub fn defines(&self, key: &PredKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn clause(&self, pos: usize) -> &Clause {
        &self.clauses[pos]
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.clauses == other.clauses
    }
}

/// A parsed query: goals sharing one variable scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub goals: Vec<Term>,
    pub var_names: Vec<Arc<str>>,
}

impl Query {
    pub fn new(goals: Vec<Term>, var_names: Vec<Arc<str>>) -> Self {
        Query { goals, var_names }
    }

    /// A single-goal query over a term whose variable ids are `0..n`.
    pub fn from_goal(goal: Term) -> Self {
        let mut names: Vec<Arc<str>> = Vec::new();
        goal.for_each_var(&mut |v| {
            if v.id >= names.len() {
                names.resize(v.id + 1, Arc::from("_"));
            }
            names[v.id] = v.name.clone();
        });
        Query { goals: vec![goal], var_names: names }
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    /// The goals as one term (a conjunction when there are several).
    pub fn as_term(&self) -> Term {
        Term::conjunction(self.goals.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_compound_is_atom() {
        assert_eq!(Term::compound("foo", vec![]), Term::atom("foo"));
    }

    #[test]
    fn groundness_is_cached_on_construction() {
        let g = Term::compound("f", vec![Term::atom("a"), Term::int(1)]);
        assert!(g.is_ground());
        let ng = Term::compound("f", vec![g.clone(), Term::var("X", 0)]);
        assert!(!ng.is_ground());
        assert!(Term::compound("h", vec![g]).is_ground());
    }

    #[test]
    fn list_roundtrip_parts() {
        let l = Term::list(vec![1.into(), 2.into()], None);
        let items = l.as_list().unwrap();
        assert_eq!(items, vec![&Term::from(1), &Term::from(2)]);
        let partial = Term::list(vec![1.into()], Some(Term::var("T", 0)));
        assert!(partial.as_list().is_none());
    }

    #[test]
    fn floats_compare_bitwise() {
        assert_ne!(Term::Float(0.0), Term::Float(-0.0));
        assert_eq!(Term::Float(1.5), Term::Float(1.5));
        assert_ne!(Term::Float(2.0), Term::int(2));
    }

    #[test]
    fn conjunction_flattening() {
        let c = Term::conjunction(vec!["a".into(), "b".into(), "c".into()]);
        let parts: Vec<_> = c.conjuncts().into_iter().cloned().collect();
        assert_eq!(parts, vec![Term::atom("a"), Term::atom("b"), Term::atom("c")]);
        assert_eq!(Term::conjunction(vec![]), Term::atom("true"));
    }

    #[test]
    fn index_preserves_source_order() {
        let cl = |h: &str, a: i64| Clause { head: Term::compound(h, vec![a.into()]), body: vec![], var_names: vec![] };
        let p = Program::new(vec![cl("p", 1), cl("q", 1), cl("p", 2), cl("p", 3)]);
        let key = PredKey::new("p", 1);
        assert_eq!(p.positions(&key), &[0, 2, 3]);
        assert!(!p.defines(&PredKey::new("r", 1)));
    }
}
