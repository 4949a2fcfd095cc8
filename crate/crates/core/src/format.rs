//! Text rendering of terms and programs.
//!
//! Two styles exist: the canonical functional form (`*(8, 18.0)`) used by
//! proof trees and answers, and an operator-aware form (`8 * 18.0`) used to
//! pretty-print programs so that they parse back to the same clauses.

use std::borrow::Cow;
use std::fmt::Write;

use crate::ops::{self, ARG_PRIORITY, MAX_PRIORITY};
use crate::term::{Clause, Program, Term, Var, LIST_CONS};

pub(crate) const SYMBOL_CHARS: &str = "+-*/\\^<>=~:.?@#&$";

pub(crate) fn is_symbol_char(c: char) -> bool {
    SYMBOL_CHARS.contains(c)
}

pub(crate) fn is_alnum(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Canonical text of a term: functional notation throughout, lists as
/// `[a, b, c]`.
pub fn format_term(t: &Term) -> String {
    let mut out = String::new();
    write_canonical(&mut out, t);
    out
}

/// Renders a float so that it always has a decimal point and parses back to
/// the same bits.
pub fn format_float(v: f64) -> String {
    let s = format!("{v:?}");
    match s.find('e') {
        Some(pos) if !s[..pos].contains('.') => format!("{}.0{}", &s[..pos], &s[pos..]),
        _ => s,
    }
}

/// Quotes an atom when it would not read back as the same atom.
pub fn format_atom(name: &str) -> Cow<'_, str> {
    if atom_needs_quotes(name) {
        Cow::Owned(quote_atom(name))
    } else {
        Cow::Borrowed(name)
    }
}

fn atom_needs_quotes(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return true;
    };
    if first.is_ascii_lowercase() {
        return !name.chars().all(is_alnum);
    }
    if matches!(name, "[]" | "!" | ";") {
        return false;
    }
    if name.chars().all(is_symbol_char) {
        return name == "." || name.contains("/*");
    }
    true
}

/// An atom in functor position; `[]` needs quotes there.
fn format_functor(name: &str) -> Cow<'_, str> {
    if name == "[]" {
        Cow::Owned(quote_atom(name))
    } else {
        format_atom(name)
    }
}

fn quote_atom(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 2);
    out.push('\'');
    for c in name.chars() {
        match c {
            '\'' => out.push_str("\\'"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

fn var_text(v: &Var, keep_anonymous: bool) -> Cow<'_, str> {
    if &*v.name == "_" && !keep_anonymous {
        Cow::Owned(format!("_G{}", v.id))
    } else {
        Cow::Borrowed(&v.name)
    }
}

fn write_canonical(out: &mut String, t: &Term) {
    match t {
        Term::Atom(a) => out.push_str(&format_atom(a)),
        Term::Var(v) => out.push_str(&var_text(v, false)),
        Term::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Term::Float(f) => out.push_str(&format_float(*f)),
        Term::Compound(c) => {
            if &**c.functor() == LIST_CONS && c.arity() == 2 {
                write_list(out, t, &mut |o, x| write_canonical(o, x));
                return;
            }
            // `,` reads back as a functor only when directly followed by `(`.
            if &**c.functor() == "," {
                out.push(',');
            } else {
                out.push_str(&format_functor(c.functor()));
            }
            out.push('(');
            for (i, a) in c.args().iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_canonical(out, a);
            }
            out.push(')');
        }
    }
}

fn write_list(out: &mut String, t: &Term, item: &mut dyn FnMut(&mut String, &Term)) {
    let (items, tail) = t.list_parts();
    out.push('[');
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        item(out, x);
    }
    if !tail.is_atom("[]") {
        out.push('|');
        item(out, tail);
    }
    out.push(']');
}

/// Operator-aware rendering at the given context priority.
pub fn format_operators(t: &Term) -> String {
    let mut out = String::new();
    write_ops(&mut out, t, MAX_PRIORITY);
    out
}

fn write_ops(out: &mut String, t: &Term, max: u16) {
    match t {
        Term::Atom(a) if ops::is_op(a) => {
            out.push('(');
            out.push_str(&format_atom(a));
            out.push(')');
        }
        Term::Var(v) => out.push_str(&var_text(v, true)),
        Term::Compound(c) => {
            let name = &**c.functor();
            if name == LIST_CONS && c.arity() == 2 {
                write_list(out, t, &mut |o, x| write_ops(o, x, ARG_PRIORITY));
                return;
            }
            if let (Some(op), [l, r]) = (ops::infix(name), c.args()) {
                let (lmax, rmax) = op.arg_limits();
                let paren = op.priority > max;
                if paren {
                    out.push('(');
                }
                write_ops(out, l, lmax);
                if name == "," {
                    out.push_str(", ");
                } else {
                    let _ = write!(out, " {} ", format_atom(name));
                }
                write_ops(out, r, rmax);
                if paren {
                    out.push(')');
                }
                return;
            }
            if let (Some(op), [arg]) = (ops::prefix(name), c.args()) {
                if !arg.is_number() && name != ":-" {
                    let (_, amax) = op.arg_limits();
                    let paren = op.priority > max;
                    if paren {
                        out.push('(');
                    }
                    out.push_str(name);
                    out.push(' ');
                    write_ops(out, arg, amax);
                    if paren {
                        out.push(')');
                    }
                    return;
                }
            }
            if name == "," {
                out.push_str("','");
            } else {
                out.push_str(&format_functor(name));
            }
            out.push('(');
            for (i, a) in c.args().iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_ops(out, a, ARG_PRIORITY);
            }
            out.push(')');
        }
        other => write_canonical(out, other),
    }
}

/// Pretty-prints a clause, one body goal per line.
pub fn format_clause(c: &Clause) -> String {
    let mut out = String::new();
    write_ops(&mut out, &c.head, ARG_PRIORITY);
    if !c.body.is_empty() {
        out.push_str(" :-");
        for (i, g) in c.body.iter().enumerate() {
            out.push_str(if i == 0 { "\n    " } else { ",\n    " });
            write_ops(&mut out, g, ARG_PRIORITY);
        }
    }
    out.push('.');
    out
}

pub fn format_program(p: &Program) -> String {
    let mut out = String::new();
    for c in p.clauses() {
        out.push_str(&format_clause(c));
        out.push('\n');
    }
    out
}
