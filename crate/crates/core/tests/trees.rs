use proptest::prelude::*;
use tlp::{parse_term, parse_tree, serialize_tree, ProofTree, Term};

fn number() -> impl Strategy<Value = Term> {
    prop_oneof![
        any::<i64>().prop_map(Term::int),
        (-1.0e12f64..1.0e12).prop_map(Term::Float),
        prop::num::f64::NORMAL.prop_map(Term::Float),
    ]
}

fn name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["a", "wage", "total_earning", "New York", "it's", "[]", "+", "-", "*", "is", "mia"])
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![name().prop_map(Term::atom), number()];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (name(), prop::collection::vec(inner.clone(), 1..4)).prop_map(|(f, args)| Term::compound(f, args)),
            prop::collection::vec(inner, 0..4).prop_map(|items| Term::list(items, None)),
        ]
    })
}

/// Callable conclusion that is not a control construct.
fn conclusion() -> impl Strategy<Value = Term> {
    let functor = prop::sample::select(vec!["p", "solve", "overtime_hours", "is", "<", "member"]);
    prop_oneof![
        functor.clone().prop_map(Term::atom),
        (functor, prop::collection::vec(term(), 1..3)).prop_map(|(f, args)| Term::compound(f, args)),
    ]
}

fn tree() -> impl Strategy<Value = ProofTree> {
    let leaf = prop_oneof![
        conclusion().prop_map(ProofTree::builtin),
        conclusion().prop_map(|c| ProofTree::derived(c, vec![])),
    ];
    leaf.prop_recursive(4, 32, 4, |inner| {
        (conclusion(), prop::collection::vec(inner, 1..4)).prop_map(|(c, kids)| ProofTree::derived(c, kids))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn terms_round_trip(t in term()) {
        let text = t.to_string();
        prop_assert_eq!(parse_term(&text).unwrap(), t, "{}", text);
    }

    #[test]
    fn trees_round_trip(t in tree()) {
        let text = serialize_tree(&t);
        let back = parse_tree(&text).unwrap();
        prop_assert_eq!(&back, &t, "{}", text);
        prop_assert_eq!(serialize_tree(&back), text);
    }
}

#[test]
fn folding_shapes() {
    let leaf = |s: &str| ProofTree::builtin(parse_term(s).unwrap());
    let fact = |s: &str| ProofTree::derived(parse_term(s).unwrap(), vec![]);
    let c = parse_term("c").unwrap();
    assert_eq!(serialize_tree(&ProofTree::derived(c.clone(), vec![])), "=>(builtin(true), c)");
    assert_eq!(serialize_tree(&ProofTree::derived(c.clone(), vec![fact("a")])), "=>(=>(builtin(true), a), c)");
    let three = ProofTree::derived(c, vec![fact("a"), leaf("1 < 2"), fact("b")]);
    assert_eq!(
        serialize_tree(&three),
        "=>(,(=>(builtin(true), a), ,(=>(builtin(<(1, 2)), <(1, 2)), =>(builtin(true), b))), c)"
    );
}

#[test]
fn collapsed_bodies_expand() {
    let t = parse_tree("=>(builtin(,(g(w(18.0)), g(is(27.0, *(1.5, 18.0))))), o(27.0))").unwrap();
    let kids: Vec<String> = t.children().iter().map(|k| k.conclusion().to_string()).collect();
    assert_eq!(kids, ["w(18.0)", "is(27.0, *(1.5, 18.0))"]);
    assert!(t.children().iter().all(ProofTree::is_builtin));
    assert_eq!(parse_tree("=>(true, q)").unwrap(), ProofTree::derived(parse_term("q").unwrap(), vec![]));
    assert!(parse_tree("=>(builtin(true), 3)").is_err());
    assert!(parse_tree("foo(").is_err());
}
