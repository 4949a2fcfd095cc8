//! Built-in predicate tables and the list library.

use once_cell::sync::Lazy;

use crate::parser::parse_program;
use crate::term::{PredKey, Program};

/// Control constructs and core builtins. These cannot be redefined.
const PROTECTED: &[(&str, usize)] = &[
    ("true", 0),
    ("fail", 0),
    ("false", 0),
    (",", 2),
    (";", 2),
    ("->", 2),
    ("\\+", 1),
    ("=", 2),
    ("\\=", 2),
    ("is", 2),
    ("=:=", 2),
    ("=\\=", 2),
    ("<", 2),
    (">", 2),
    ("=<", 2),
    (">=", 2),
    ("call", 1),
    ("call", 2),
    ("call", 3),
    ("call", 4),
    ("call", 5),
    ("call", 6),
    ("call", 7),
    ("call", 8),
];

/// List utilities implemented natively. A program may shadow them.
pub(crate) const NATIVE_LIBRARY: &[(&str, usize)] = &[("length", 2), ("sum_list", 2)];

const LIBRARY_SOURCE: &str = r#"
member(X, [X|_]).
member(X, [_|T]) :- member(X, T).

append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).

maplist(_, [], []).
maplist(G, [X|Xs], [Y|Ys]) :- call(G, X, Y), maplist(G, Xs, Ys).
"#;

/// Clause-defined library predicates (`member/2`, `append/3`, `maplist/3`).
pub(crate) static LIBRARY: Lazy<Program> = Lazy::new(|| parse_program(LIBRARY_SOURCE).expect("library source parses"));

pub fn is_protected(key: &PredKey) -> bool {
    PROTECTED.iter().any(|&(n, a)| *key.name == *n && key.arity == a)
}

pub(crate) fn is_native_library(key: &PredKey) -> bool {
    NATIVE_LIBRARY.iter().any(|&(n, a)| *key.name == *n && key.arity == a)
}

/// Whether `key` names any builtin or library predicate.
pub fn is_builtin(key: &PredKey) -> bool {
    is_protected(key) || is_native_library(key) || LIBRARY.defines(key)
}
