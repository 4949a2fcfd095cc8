//! Depth-first SLD resolution with chronological backtracking.
//!
//! Continuations and the proof event log are persistent cons lists, so a
//! choicepoint captures both by cloning one pointer.

use std::cmp::Ordering;
use std::rc::Rc;

use super::arith::{eval_arith, Number};
use super::bindings::{Bindings, Mark};
use super::builtins::{is_native_library, LIBRARY};
use super::{EngineError, LimitHit, SolveLimits};
use crate::proof::ProofTree;
use crate::term::{PredKey, Program, Query, Term, Var};

enum Goal {
    Call {
        term: Term,
        depth: u32,
        record: bool,
    },
    /// Closes the derived node opened when the clause was selected.
    Exit,
    /// Drops choicepoints above the given height (if-then-else commit).
    Commit(usize),
    /// The goal under `\+` succeeded: drop its choicepoints and fail.
    NotProvable(usize),
}

struct GoalCell {
    goal: Goal,
    next: Goals,
}

type Goals = Option<Rc<GoalCell>>;

impl Drop for GoalCell {
    fn drop(&mut self) {
        let mut next = self.next.take();
        while let Some(rc) = next {
            match Rc::try_unwrap(rc) {
                Ok(mut cell) => next = cell.next.take(),
                Err(_) => break,
            }
        }
    }
}

fn push(goal: Goal, next: Goals) -> Goals {
    Some(Rc::new(GoalCell { goal, next }))
}

fn call(term: Term, depth: u32, record: bool) -> Goal {
    Goal::Call { term, depth, record }
}

enum Event {
    Enter(Term),
    Exit,
    Leaf(Term),
}

struct EventCell {
    event: Event,
    prev: Events,
}

type Events = Option<Rc<EventCell>>;

impl Drop for EventCell {
    fn drop(&mut self) {
        let mut prev = self.prev.take();
        while let Some(rc) = prev {
            match Rc::try_unwrap(rc) {
                Ok(mut cell) => prev = cell.prev.take(),
                Err(_) => break,
            }
        }
    }
}

enum Alt<'p> {
    /// Resume with the choicepoint's goals.
    Resume,
    /// Try the remaining clauses for `goal`; the choicepoint's goals are
    /// the continuation after the call.
    Clauses { goal: Term, db: &'p Program, positions: &'p [usize], next: usize, depth: u32, record: bool },
}

struct Choice<'p> {
    mark: Mark,
    events: Events,
    goals: Goals,
    alt: Alt<'p>,
}

pub(crate) struct Machine<'p> {
    program: &'p Program,
    limits: SolveLimits,
    bindings: Bindings,
    query: Query,
    goals: Goals,
    events: Events,
    choices: Vec<Choice<'p>>,
    steps: u64,
    depth_pruned: bool,
    steps_exhausted: bool,
    halted: bool,
    backtrack_pending: bool,
}

fn rename(t: &Term, base: usize) -> Term {
    t.map_vars(&mut |v| Term::Var(Var { name: v.name.clone(), id: base + v.id }))
}

/// Cheap first-argument prefilter; `false` means the head cannot unify.
fn could_match(goal_arg: Option<&Term>, head: &Term) -> bool {
    let (Some(g), Some(h)) = (goal_arg, head.as_compound().and_then(|c| c.args().first())) else {
        return true;
    };
    match (g, h) {
        (Term::Var(_), _) | (_, Term::Var(_)) => true,
        (Term::Compound(a), Term::Compound(b)) => a.functor() == b.functor() && a.arity() == b.arity(),
        (Term::Compound(_), _) | (_, Term::Compound(_)) => false,
        (a, b) => a == b,
    }
}

fn add_args(goal: &Term, extra: &[Term]) -> Result<Term, EngineError> {
    match goal {
        Term::Atom(name) => Ok(Term::compound(name.clone(), extra.to_vec())),
        Term::Compound(c) => {
            let mut args = c.args().to_vec();
            args.extend_from_slice(extra);
            Ok(Term::compound(c.functor().clone(), args))
        }
        Term::Var(_) => Err(EngineError::Instantiation(format!("call/{}", extra.len() + 1))),
        other => Err(EngineError::NotCallable(other.to_string())),
    }
}

impl<'p> Machine<'p> {
    pub fn new(program: &'p Program, query: &Query, limits: SolveLimits, record: bool) -> Self {
        let mut bindings = Bindings::new().with_occurs_check(limits.occurs_check);
        bindings.alloc(query.num_vars());
        let goals = query.goals.iter().rev().fold(None, |acc, g| push(call(g.clone(), 1, record), acc));
        Machine {
            program,
            limits,
            bindings,
            query: query.clone(),
            goals,
            events: None,
            choices: Vec::new(),
            steps: 0,
            depth_pruned: false,
            steps_exhausted: false,
            halted: false,
            backtrack_pending: false,
        }
    }

    pub fn bindings(&self) -> &Bindings {
        &self.bindings
    }

    pub fn limit_hit(&self) -> Option<LimitHit> {
        if self.steps_exhausted {
            Some(LimitHit::Steps)
        } else if self.depth_pruned {
            Some(LimitHit::Depth)
        } else {
            None
        }
    }

    /// Runs to the next solution. `Ok(false)` means the search space is
    /// exhausted or the step budget ran out (see [`Machine::limit_hit`]).
    pub fn next_solution(&mut self) -> Result<bool, EngineError> {
        if self.halted {
            return Ok(false);
        }
        if self.backtrack_pending {
            self.backtrack_pending = false;
            if !self.backtrack() {
                self.halted = true;
                return Ok(false);
            }
        }
        loop {
            let Some(cell) = self.goals.clone() else {
                self.backtrack_pending = true;
                return Ok(true);
            };
            self.goals = cell.next.clone();
            let ok = match &cell.goal {
                Goal::Exit => {
                    self.push_event(Event::Exit);
                    true
                }
                Goal::Commit(height) => {
                    self.choices.truncate(*height);
                    true
                }
                Goal::NotProvable(height) => {
                    self.choices.truncate(*height);
                    false
                }
                Goal::Call { term, depth, record } => {
                    self.steps += 1;
                    if self.steps > self.limits.max_steps {
                        self.steps_exhausted = true;
                        self.halted = true;
                        return Ok(false);
                    }
                    match self.call(term, *depth, *record) {
                        Ok(ok) => ok,
                        Err(e) => {
                            self.halted = true;
                            return Err(e);
                        }
                    }
                }
            };
            if !ok && !self.backtrack() {
                self.halted = true;
                return Ok(false);
            }
        }
    }

    fn push_event(&mut self, event: Event) {
        self.events = Some(Rc::new(EventCell { event, prev: self.events.take() }));
    }

    fn leaf(&mut self, record: bool, goal: &Term) {
        if record {
            self.push_event(Event::Leaf(goal.clone()));
        }
    }

    fn push_resume(&mut self, goals: Goals) {
        self.choices.push(Choice { mark: self.bindings.mark(), events: self.events.clone(), goals, alt: Alt::Resume });
    }

    fn backtrack(&mut self) -> bool {
        loop {
            let Some(cp) = self.choices.last() else {
                return false;
            };
            self.bindings.undo_to(cp.mark);
            self.events = cp.events.clone();
            match cp.alt {
                Alt::Resume => {
                    self.goals = cp.goals.clone();
                    self.choices.pop();
                    return true;
                }
                Alt::Clauses { .. } => {
                    if self.retry_clauses() {
                        return true;
                    }
                }
            }
        }
    }

    fn call(&mut self, term: &Term, depth: u32, record: bool) -> Result<bool, EngineError> {
        let goal = self.bindings.deref(term).clone();
        let (name, arity) = match &goal {
            Term::Var(_) => return Err(EngineError::Instantiation("goal is an unbound variable".into())),
            Term::Int(_) | Term::Float(_) => return Err(EngineError::NotCallable(goal.to_string())),
            Term::Atom(a) => (a.clone(), 0),
            Term::Compound(c) => (c.functor().clone(), c.arity()),
        };
        let args: Vec<Term> = goal.as_compound().map(|c| c.args().to_vec()).unwrap_or_default();
        let cont = self.goals.clone();
        match (&*name, arity) {
            ("true", 0) => {
                self.leaf(record, &goal);
                Ok(true)
            }
            ("fail" | "false", 0) => Ok(false),
            (",", 2) => {
                let goals = push(call(args[1].clone(), depth, record), cont);
                self.goals = push(call(args[0].clone(), depth, record), goals);
                Ok(true)
            }
            (";", 2) => {
                self.leaf(record, &goal);
                let lhs = self.bindings.deref(&args[0]).clone();
                let height = self.choices.len();
                self.push_resume(push(call(args[1].clone(), depth, false), cont.clone()));
                if let Some([cond, then]) = lhs.args_of("->", 2) {
                    let rest = push(Goal::Commit(height), push(call(then.clone(), depth, false), cont));
                    self.goals = push(call(cond.clone(), depth, false), rest);
                } else {
                    self.goals = push(call(lhs, depth, false), cont);
                }
                Ok(true)
            }
            ("->", 2) => {
                self.leaf(record, &goal);
                let height = self.choices.len();
                let rest = push(Goal::Commit(height), push(call(args[1].clone(), depth, false), cont));
                self.goals = push(call(args[0].clone(), depth, false), rest);
                Ok(true)
            }
            ("\\+", 1) => {
                self.leaf(record, &goal);
                let height = self.choices.len();
                self.push_resume(cont);
                self.goals = push(call(args[0].clone(), depth, false), push(Goal::NotProvable(height), None));
                Ok(true)
            }
            ("call", n) if n >= 1 => {
                self.leaf(record, &goal);
                let target = self.bindings.deref(&args[0]).clone();
                let inner = add_args(&target, &args[1..])?;
                self.goals = push(call(inner, depth, false), cont);
                Ok(true)
            }
            ("=", 2) => {
                let ok = self.bindings.unify(&args[0], &args[1]);
                if ok {
                    self.leaf(record, &goal);
                }
                Ok(ok)
            }
            ("\\=", 2) => {
                let mark = self.bindings.mark();
                let unifiable = self.bindings.unify(&args[0], &args[1]);
                self.bindings.undo_to(mark);
                if !unifiable {
                    self.leaf(record, &goal);
                }
                Ok(!unifiable)
            }
            ("is", 2) => {
                let value = eval_arith(&args[1], &self.bindings)?.into_term();
                let ok = self.bindings.unify(&args[0], &value);
                if ok {
                    self.leaf(record, &goal);
                }
                Ok(ok)
            }
            (op @ ("=:=" | "=\\=" | "<" | ">" | "=<" | ">="), 2) => {
                let a = eval_arith(&args[0], &self.bindings)?;
                let b = eval_arith(&args[1], &self.bindings)?;
                let ord = a.compare(&b);
                let ok = match op {
                    "=:=" => ord == Ordering::Equal,
                    "=\\=" => ord != Ordering::Equal,
                    "<" => ord == Ordering::Less,
                    ">" => ord == Ordering::Greater,
                    "=<" => ord != Ordering::Greater,
                    _ => ord != Ordering::Less,
                };
                if ok {
                    self.leaf(record, &goal);
                }
                Ok(ok)
            }
            _ => {
                let key = PredKey::new(name, arity);
                if self.program.defines(&key) {
                    Ok(self.resolve_clauses(goal, self.program, depth, record))
                } else if is_native_library(&key) {
                    let ok = self.native(&key, &args)?;
                    if ok {
                        self.leaf(record, &goal);
                    }
                    Ok(ok)
                } else if LIBRARY.defines(&key) {
                    self.leaf(record, &goal);
                    Ok(self.resolve_clauses(goal, &LIBRARY, depth, false))
                } else {
                    Err(EngineError::UnknownPredicate(key))
                }
            }
        }
    }

    fn resolve_clauses(&mut self, goal: Term, db: &'p Program, depth: u32, record: bool) -> bool {
        let user = std::ptr::eq(db, self.program);
        if user && depth > self.limits.max_depth {
            self.depth_pruned = true;
            return false;
        }
        let key = PredKey::of(&goal).expect("callable goal");
        let positions = db.positions(&key);
        let arg = goal.as_compound().map(|c| self.bindings.deref(&c.args()[0]).clone());
        let Some(first) = positions.iter().position(|&p| could_match(arg.as_ref(), &db.clause(p).head)) else {
            return false;
        };
        self.choices.push(Choice {
            mark: self.bindings.mark(),
            events: self.events.clone(),
            goals: self.goals.clone(),
            alt: Alt::Clauses { goal, db, positions, next: first, depth, record },
        });
        self.retry_clauses()
    }

    /// Tries the next candidate clause of the topmost choicepoint. The
    /// machine state must already be restored to that choicepoint.
    fn retry_clauses(&mut self) -> bool {
        loop {
            let cp = self.choices.last_mut().expect("clause choicepoint");
            let Alt::Clauses { goal, db, positions, next, depth, record } = &mut cp.alt else {
                unreachable!("retry_clauses on a resume choicepoint");
            };
            let (goal, db, positions, index, depth, record) = (goal.clone(), *db, *positions, *next, *depth, *record);
            let (mark, cont) = (cp.mark, cp.goals.clone());

            let arg = goal.as_compound().map(|c| self.bindings.deref(&c.args()[0]).clone());
            let following = positions[index + 1..]
                .iter()
                .position(|&p| could_match(arg.as_ref(), &db.clause(p).head))
                .map(|off| index + 1 + off);
            match following {
                Some(n) => {
                    if let Some(Choice { alt: Alt::Clauses { next, .. }, .. }) = self.choices.last_mut() {
                        *next = n;
                    }
                }
                None => {
                    self.choices.pop();
                }
            }

            let clause = db.clause(positions[index]);
            let base = self.bindings.alloc(clause.num_vars());
            let head = rename(&clause.head, base);
            if self.bindings.unify(&goal, &head) {
                let mut goals = cont;
                if record {
                    self.push_event(Event::Enter(goal));
                    if clause.body.is_empty() {
                        self.push_event(Event::Exit);
                    } else {
                        goals = push(Goal::Exit, goals);
                    }
                }
                let user = std::ptr::eq(db, self.program);
                let body_depth = if user { depth + 1 } else { depth };
                for g in clause.body.iter().rev() {
                    goals = push(call(rename(g, base), body_depth, record), goals);
                }
                self.goals = goals;
                return true;
            }
            self.bindings.undo_to(mark);
            if following.is_none() {
                return false;
            }
        }
    }

    fn native(&mut self, key: &PredKey, args: &[Term]) -> Result<bool, EngineError> {
        match (&*key.name, key.arity) {
            ("length", 2) => {
                let mut count: usize = 0;
                let mut cur = self.bindings.deref(&args[0]).clone();
                while let Some([_, tail]) = cur.args_of(crate::term::LIST_CONS, 2) {
                    count += 1;
                    cur = self.bindings.deref(tail).clone();
                }
                match &cur {
                    t if t.is_atom(crate::term::LIST_NIL) => {
                        Ok(self.bindings.unify(&args[1], &Term::int(count as i64)))
                    }
                    Term::Var(_) => {
                        let n = match self.bindings.deref(&args[1]) {
                            Term::Int(n) => n.clone(),
                            Term::Var(_) => {
                                return Err(EngineError::Instantiation(
                                    "length/2 needs a proper list or a length".into(),
                                ))
                            }
                            other => return Err(EngineError::Type(format!("length/2: not an integer: {other}"))),
                        };
                        let Ok(n) = usize::try_from(n) else {
                            return Ok(false);
                        };
                        if n < count {
                            return Ok(false);
                        }
                        let fresh = (count..n).map(|_| self.bindings.fresh_var()).collect();
                        Ok(self.bindings.unify(&cur, &Term::list(fresh, None)))
                    }
                    _ => Ok(false),
                }
            }
            ("sum_list", 2) => {
                let mut sum = Number::Int(0.into());
                let mut cur = self.bindings.deref(&args[0]).clone();
                while let Some([head, tail]) = cur.args_of(crate::term::LIST_CONS, 2) {
                    let x = eval_arith(head, &self.bindings)?;
                    sum = match (sum, x) {
                        (Number::Int(a), Number::Int(b)) => Number::Int(a + b),
                        (a, b) => Number::Float(a.to_f64() + b.to_f64()),
                    };
                    cur = self.bindings.deref(tail).clone();
                }
                match &cur {
                    t if t.is_atom(crate::term::LIST_NIL) => Ok(self.bindings.unify(&args[1], &sum.into_term())),
                    Term::Var(_) => Err(EngineError::Instantiation("sum_list/2 needs a proper list".into())),
                    other => Err(EngineError::Type(format!("sum_list/2: not a list: {other}"))),
                }
            }
            _ => unreachable!("not a native predicate: {key}"),
        }
    }

    /// The proof of the current solution.
    pub fn proof(&self) -> ProofTree {
        let mut log = Vec::new();
        let mut cur = &self.events;
        while let Some(cell) = cur {
            log.push(&cell.event);
            cur = &cell.prev;
        }
        let mut stack: Vec<(Option<&Term>, Vec<ProofTree>)> = vec![(None, Vec::new())];
        for ev in log.into_iter().rev() {
            match ev {
                Event::Enter(t) => stack.push((Some(t), Vec::new())),
                Event::Exit => {
                    let (t, children) = stack.pop().expect("balanced proof events");
                    let conclusion = self.bindings.resolve(t.expect("enter before exit"));
                    stack.last_mut().expect("root frame").1.push(ProofTree::Derived { conclusion, children });
                }
                Event::Leaf(t) => {
                    let goal = self.bindings.resolve(t);
                    stack.last_mut().expect("root frame").1.push(ProofTree::Builtin { goal });
                }
            }
        }
        let (_, mut roots) = stack.pop().expect("root frame");
        debug_assert!(stack.is_empty());
        if roots.len() == 1 {
            roots.pop().expect("one root")
        } else {
            ProofTree::Derived { conclusion: self.bindings.resolve(&self.query.as_term()), children: roots }
        }
    }
}
