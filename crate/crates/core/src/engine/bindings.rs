//! Variable bindings with a trail for undo on backtracking.

use std::sync::Arc;

use crate::term::{Term, Var, LIST_CONS};

/// A substitution from variable ids to terms.
///
/// Bindings are only ever added through [`Bindings::unify`], which checks
/// occurrences (unless disabled), so binding chains never loop back on
/// themselves.
#[derive(Clone, Debug)]
pub struct Bindings {
    cells: Vec<Option<Term>>,
    trail: Vec<usize>,
    occurs_check: bool,
}

impl Default for Bindings {
    fn default() -> Self {
        Self::new()
    }
}

/// Restore point for [`Bindings::undo_to`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mark {
    trail: usize,
    cells: usize,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings { cells: Vec::new(), trail: Vec::new(), occurs_check: true }
    }

    pub fn with_occurs_check(mut self, on: bool) -> Self {
        self.occurs_check = on;
        self
    }

    /// Reserves `n` fresh variable ids and returns the first.
    pub fn alloc(&mut self, n: usize) -> usize {
        let base = self.cells.len();
        self.cells.resize(base + n, None);
        base
    }

    pub fn fresh_var(&mut self) -> Term {
        let id = self.alloc(1);
        Term::var("_", id)
    }

    pub fn mark(&self) -> Mark {
        Mark { trail: self.trail.len(), cells: self.cells.len() }
    }

    /// Forgets every binding and allocation made since `mark`.
    pub fn undo_to(&mut self, mark: Mark) {
        for id in self.trail.drain(mark.trail..) {
            if let Some(c) = self.cells.get_mut(id) {
                *c = None;
            }
        }
        self.cells.truncate(mark.cells);
    }

    pub fn lookup(&self, id: usize) -> Option<&Term> {
        self.cells.get(id).and_then(Option::as_ref)
    }

    /// Follows variable bindings until reaching a non-variable or an
    /// unbound variable.
    pub fn deref<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.lookup(v.id) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    /// Applies the substitution completely. Unbound variables come back
    /// named `_G<id>` so distinct ones print distinctly.
    ///
    /// Without the occurs check bindings may be cyclic; a cycle is cut at
    /// the variable that closes it, which is left unresolved.
    pub fn resolve(&self, t: &Term) -> Term {
        if self.occurs_check {
            self.resolve_acyclic(t)
        } else {
            self.resolve_guarded(t, &mut Vec::new())
        }
    }

    fn unbound_name(v: &Var) -> Term {
        Term::Var(Var::new(Arc::<str>::from(format!("_G{}", v.id)), v.id))
    }

    fn resolve_guarded(&self, t: &Term, path: &mut Vec<usize>) -> Term {
        let depth = path.len();
        let mut cur = t;
        let out = loop {
            match cur {
                Term::Var(v) if path.contains(&v.id) => break Self::unbound_name(v),
                Term::Var(v) => match self.lookup(v.id) {
                    Some(next) => {
                        path.push(v.id);
                        cur = next;
                    }
                    None => break Self::unbound_name(v),
                },
                Term::Compound(c) if !cur.is_ground() => {
                    let args = c.args().iter().map(|a| self.resolve_guarded(a, path)).collect();
                    break Term::compound(c.functor().clone(), args);
                }
                other => break other.clone(),
            }
        };
        path.truncate(depth);
        out
    }

    fn resolve_acyclic(&self, t: &Term) -> Term {
        let t = self.deref(t);
        match t {
            Term::Var(v) => Self::unbound_name(v),
            Term::Compound(_) if !t.is_ground() => {
                // walk list spines iteratively; long lists are common
                let mut spine = Vec::new();
                let mut cur = t;
                while let Some([h, tail]) = cur.args_of(LIST_CONS, 2) {
                    spine.push(self.resolve_acyclic(h));
                    cur = self.deref(tail);
                }
                let end = match cur {
                    Term::Compound(c) if !cur.is_ground() => {
                        let args = c.args().iter().map(|a| self.resolve_acyclic(a)).collect();
                        Term::compound(c.functor().clone(), args)
                    }
                    Term::Var(_) => self.resolve_acyclic(cur),
                    _ => cur.clone(),
                };
                Term::list(spine, Some(end))
            }
            _ => t.clone(),
        }
    }

    fn bind(&mut self, id: usize, value: Term) {
        if id >= self.cells.len() {
            self.cells.resize(id + 1, None);
        }
        self.cells[id] = Some(value);
        self.trail.push(id);
    }

    fn occurs(&self, id: usize, t: &Term) -> bool {
        let mut stack = vec![t];
        while let Some(t) = stack.pop() {
            match self.deref(t) {
                Term::Var(v) if v.id == id => return true,
                Term::Compound(c) => stack.extend(c.args().iter().filter(|a| !a.is_ground())),
                _ => {}
            }
        }
        false
    }

    /// Unifies two terms, extending the bindings. On failure the bindings
    /// are left exactly as they were.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let mark = self.mark();
        if self.unify_inner(a, b) {
            true
        } else {
            self.undo_to(mark);
            false
        }
    }

    fn unify_inner(&mut self, a: &Term, b: &Term) -> bool {
        let mut stack = vec![(a.clone(), b.clone())];
        while let Some((a, b)) = stack.pop() {
            let a = self.deref(&a).clone();
            let b = self.deref(&b).clone();
            match (&a, &b) {
                (Term::Var(x), Term::Var(y)) if x.id == y.id => {}
                (Term::Var(x), Term::Var(y)) => {
                    // younger variable points at the older one
                    if x.id > y.id {
                        self.bind(x.id, b.clone());
                    } else {
                        self.bind(y.id, a.clone());
                    }
                }
                (Term::Var(x), other) | (other, Term::Var(x)) => {
                    if self.occurs_check && !other.is_ground() && self.occurs(x.id, other) {
                        return false;
                    }
                    self.bind(x.id, other.clone());
                }
                (Term::Compound(x), Term::Compound(y)) => {
                    if std::sync::Arc::ptr_eq(x, y) && a.is_ground() {
                        continue;
                    }
                    if x.functor() != y.functor() || x.arity() != y.arity() {
                        return false;
                    }
                    stack.extend(x.args().iter().cloned().zip(y.args().iter().cloned()).rev());
                }
                _ => {
                    if a != b {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Functional unification: returns the extended bindings, leaving `env`
/// untouched, or `None` when the terms do not unify.
pub fn unify(a: &Term, b: &Term, env: &Bindings) -> Option<Bindings> {
    let mut next = env.clone();
    next.unify(a, b).then_some(next)
}
