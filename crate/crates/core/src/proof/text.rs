use thiserror::Error;

use super::ProofTree;
use crate::format::format_term;
use crate::parser::{parse_term, ParseError};
use crate::term::Term;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TreeParseError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("malformed proof node: {0}")]
    Malformed(String),
}

fn node_term(tree: &ProofTree) -> Term {
    match tree {
        ProofTree::Builtin { goal } => {
            Term::compound("=>", vec![Term::compound("builtin", vec![goal.clone()]), goal.clone()])
        }
        ProofTree::Derived { conclusion, children } => {
            let body = match children.split_last() {
                None => Term::compound("builtin", vec![Term::atom("true")]),
                Some((last, init)) => {
                    init.iter().rev().fold(node_term(last), |acc, c| Term::compound(",", vec![node_term(c), acc]))
                }
            };
            Term::compound("=>", vec![body, conclusion.clone()])
        }
    }
}

/// Canonical text of a proof tree.
pub fn serialize_tree(tree: &ProofTree) -> String {
    format_term(&node_term(tree))
}

/// Reads a proof tree, accepting the variant spellings `=>(true, Fact)` and
/// collapsed bodies `builtin(,(g(G1), g(G2)))`.
pub fn parse_tree(source: &str) -> Result<ProofTree, TreeParseError> {
    let t = parse_term(source.trim())?;
    node(&t)
}

fn is_true(t: &Term) -> bool {
    t.is_atom("true")
}

fn node(t: &Term) -> Result<ProofTree, TreeParseError> {
    let Some([body, conclusion]) = t.args_of("=>", 2) else {
        return Err(TreeParseError::Malformed(format_term(t)));
    };
    if conclusion.is_number() || matches!(conclusion, Term::Var(_)) {
        return Err(TreeParseError::Malformed(format!("conclusion is not a goal: {}", format_term(t))));
    }
    let bare = body.args_of("builtin", 1).map(|a| &a[0]);
    if is_true(body) || bare.is_some_and(is_true) {
        return Ok(if is_true(conclusion) {
            ProofTree::builtin(conclusion.clone())
        } else {
            ProofTree::derived(conclusion.clone(), Vec::new())
        });
    }
    if bare == Some(conclusion) {
        return Ok(ProofTree::builtin(conclusion.clone()));
    }
    let mut children = Vec::new();
    items(body, &mut children)?;
    Ok(ProofTree::derived(conclusion.clone(), children))
}

fn items(body: &Term, out: &mut Vec<ProofTree>) -> Result<(), TreeParseError> {
    if let Some([a, b]) = body.args_of(",", 2) {
        items(a, out)?;
        return items(b, out);
    }
    if body.args_of("=>", 2).is_some() {
        out.push(node(body)?);
        return Ok(());
    }
    if let Some([inner]) = body.args_of("builtin", 1) {
        for part in inner.conjuncts() {
            match part.args_of("g", 1) {
                Some([goal]) => out.push(ProofTree::builtin(goal.clone())),
                _ if is_true(part) => {}
                _ => out.push(ProofTree::builtin(part.clone())),
            }
        }
        return Ok(());
    }
    if is_true(body) {
        return Ok(());
    }
    Err(TreeParseError::Malformed(format!("unexpected body item {}", format_term(body))))
}
