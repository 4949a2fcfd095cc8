#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tlp::pipeline::client::sha256_hex;
use tlp::pipeline::prompts::{ChatRequest, Message, Role};
use tlp::pipeline::{build_codegen_prompt, build_translation_prompt, exemplars, ProblemRecord, Task, EXEMPLARS};
use tlp::{parse_program, parse_query, prove_trajectories, serialize_tree, SolveLimits, Term};

pub const CODEGEN_SNAPSHOT: &str = include_str!("../data/codegen_snapshot.txt");
pub const TRANSLATION_SNAPSHOT: &str = include_str!("../data/translation_snapshot.txt");

pub const TINA: &str = include_str!("../../src/pipeline/exemplars/tina.pl");
pub const JANICE: &str = include_str!("../../src/pipeline/exemplars/janice.pl");
pub const JESSE: &str = include_str!("../../src/pipeline/exemplars/jesse.pl");
pub const TINA_TREE: &str = include_str!("../../src/pipeline/exemplars/tina_tree.txt");
pub const JANICE_TREE: &str = include_str!("../../src/pipeline/exemplars/janice_tree.txt");
pub const JESSE_TREE: &str = include_str!("../../src/pipeline/exemplars/jesse_tree.txt");

// ---------------------------------------------------------------- datalog

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Arg {
    Const(usize),
    Var(usize),
}

#[derive(Clone, Debug)]
pub struct Atom {
    pub pred: usize,
    pub args: Vec<Arg>,
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Atom>,
}

/// A function-free, non-recursive program in which every head variable
/// occurs in the body.
#[derive(Clone, Debug)]
pub struct Datalog {
    pub arities: Vec<usize>,
    pub consts: usize,
    pub rules: Vec<Rule>,
}

pub const MAX_PREDS: usize = 6;
pub const MAX_CLAUSES: usize = 12;
pub const MAX_CONSTS: usize = 4;
const MAX_VARS: usize = 3;

fn ground_atom(rng: &mut ChaCha8Rng, pred: usize, arity: usize, consts: usize) -> Atom {
    Atom { pred, args: (0..arity).map(|_| Arg::Const(rng.gen_range(0..consts))).collect() }
}

impl Datalog {
    pub fn random(seed: u64) -> Datalog {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let preds = rng.gen_range(1..=MAX_PREDS);
        let consts = rng.gen_range(1..=MAX_CONSTS);
        let arities: Vec<usize> = (0..preds).map(|_| rng.gen_range(0..=2)).collect();
        let mut rules: Vec<Rule> =
            (0..preds).map(|p| Rule { head: ground_atom(&mut rng, p, arities[p], consts), body: vec![] }).collect();
        let extra = rng.gen_range(0..=MAX_CLAUSES - preds);
        for _ in 0..extra {
            let pred = rng.gen_range(0..preds);
            if pred == 0 || rng.gen_bool(0.3) {
                rules.push(Rule { head: ground_atom(&mut rng, pred, arities[pred], consts), body: vec![] });
                continue;
            }
            let body: Vec<Atom> = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let q = rng.gen_range(0..pred);
                    let args = (0..arities[q])
                        .map(|_| {
                            if rng.gen_bool(0.75) {
                                Arg::Var(rng.gen_range(0..MAX_VARS))
                            } else {
                                Arg::Const(rng.gen_range(0..consts))
                            }
                        })
                        .collect();
                    Atom { pred: q, args }
                })
                .collect();
            let bound: Vec<usize> = body
                .iter()
                .flat_map(|a| a.args.iter())
                .filter_map(|a| match a {
                    Arg::Var(v) => Some(*v),
                    Arg::Const(_) => None,
                })
                .collect();
            let args = (0..arities[pred])
                .map(|_| {
                    if !bound.is_empty() && rng.gen_bool(0.8) {
                        Arg::Var(bound[rng.gen_range(0..bound.len())])
                    } else {
                        Arg::Const(rng.gen_range(0..consts))
                    }
                })
                .collect();
            rules.push(Rule { head: Atom { pred, args }, body });
        }
        // Shuffle so facts and rules interleave.
        for i in (1..rules.len()).rev() {
            rules.swap(i, rng.gen_range(0..=i));
        }
        Datalog { arities, consts, rules }
    }

    pub fn source(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            out.push_str(&atom_text(&r.head));
            if !r.body.is_empty() {
                out.push_str(" :- ");
                out.push_str(&r.body.iter().map(atom_text).collect::<Vec<_>>().join(", "));
            }
            out.push_str(".\n");
        }
        out
    }

    /// Query text `pN(Y0, ...)` with fresh variables.
    pub fn query(&self, pred: usize) -> String {
        let vars: Vec<String> = (0..self.arities[pred]).map(|i| format!("Y{i}")).collect();
        if vars.is_empty() {
            format!("p{pred}")
        } else {
            format!("p{pred}({})", vars.join(", "))
        }
    }

    /// Least model by naive iteration to a fixpoint.
    pub fn fixpoint(&self) -> HashSet<(usize, Vec<usize>)> {
        let mut model: HashSet<(usize, Vec<usize>)> = HashSet::new();
        loop {
            let mut grew = false;
            for r in &self.rules {
                let vars = r
                    .body
                    .iter()
                    .flat_map(|a| a.args.iter())
                    .filter_map(|a| if let Arg::Var(v) = a { Some(*v + 1) } else { None })
                    .max()
                    .unwrap_or(0);
                let combos = self.consts.pow(vars as u32);
                for mut code in 0..combos {
                    let mut env = vec![0; vars];
                    for slot in env.iter_mut() {
                        *slot = code % self.consts;
                        code /= self.consts;
                    }
                    let inst = |a: &Atom| -> (usize, Vec<usize>) {
                        let args = a
                            .args
                            .iter()
                            .map(|x| match x {
                                Arg::Const(c) => *c,
                                Arg::Var(v) => env[*v],
                            })
                            .collect();
                        (a.pred, args)
                    };
                    if r.body.iter().all(|b| model.contains(&inst(b))) && model.insert(inst(&r.head)) {
                        grew = true;
                    }
                }
            }
            if !grew {
                return model;
            }
        }
    }

    pub fn oracle_answers(&self, pred: usize) -> BTreeSet<Vec<usize>> {
        self.fixpoint().into_iter().filter(|(p, _)| *p == pred).map(|(_, a)| a).collect()
    }
}

pub fn atom_text(a: &Atom) -> String {
    if a.args.is_empty() {
        return format!("p{}", a.pred);
    }
    let args: Vec<String> = a
        .args
        .iter()
        .map(|x| match x {
            Arg::Const(c) => format!("c{c}"),
            Arg::Var(v) => format!("X{v}"),
        })
        .collect();
    format!("p{}({})", a.pred, args.join(", "))
}

/// Constant index of an answer binding `cN`.
pub fn const_index(t: &Term) -> usize {
    match t {
        Term::Atom(name) => name.strip_prefix('c').and_then(|n| n.parse().ok()).expect("constant"),
        other => panic!("not a constant: {other}"),
    }
}

// ---------------------------------------------------------------- proofs

/// A program whose query `p` has exactly `k` distinct proofs.
pub fn k_proof_program(k: usize) -> String {
    let mut src = String::from("p :- q.\n");
    for i in 0..k {
        writeln!(src, "q :- a{i}.").unwrap();
        writeln!(src, "a{i}.").unwrap();
    }
    src
}

// ---------------------------------------------------------------- prompts

/// Chat-template rendering of a conversation.
pub fn render_chat(messages: &[Message]) -> String {
    let turns: Vec<String> = messages
        .iter()
        .map(|m| {
            let role = serde_json::to_value(m.role).unwrap();
            format!("<|start_header_id|>{}<|end_header_id|>\n{}\n", role.as_str().unwrap(), m.content)
        })
        .collect();
    format!("<|begin_of_text|>{}", turns.join("<|eot_id|>"))
}

pub fn first_difference(a: &str, b: &str) -> String {
    let at = a.bytes().zip(b.bytes()).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
    let from = at.saturating_sub(60);
    format!(
        "at byte {at}:\n ours: {:?}\n want: {:?}",
        &a[from..(at + 60).min(a.len())],
        &b[from..(at + 60).min(b.len())]
    )
}

pub fn codegen_rendering() -> String {
    let jesse = EXEMPLARS[2];
    let mut req = build_codegen_prompt(Task::Arithmetic, jesse.problem, exemplars(2));
    let reply = format!(
        "Sure! I am happy to help you write Prolog code to solve this arithmetic reasoning problem. Here is the Prolog code:\n```prolog\n{}\n```",
        jesse.program.trim_end()
    );
    req.messages.push(Message::new(Role::Assistant, reply));
    render_chat(&req.messages)
}

pub fn translation_rendering() -> String {
    let jesse = EXEMPLARS[2];
    let mut req = build_translation_prompt(jesse.problem, jesse.program, jesse.tree, exemplars(2));
    let reply = format!(
        "Sure! I am happy to help you convert the Prolog-style reasoning tree into a natural language reasoning chain. Here is the reasoning chain:\n{}",
        jesse.reasoning
    );
    req.messages.push(Message::new(Role::Assistant, reply));
    render_chat(&req.messages)
}

// ---------------------------------------------------------------- mock pipeline

pub fn codegen_reply(code: &str) -> String {
    format!("Sure! Here is the Prolog code:\n```prolog\n{}\n```\n", code.trim_end())
}

pub fn put_fixture(dir: &Path, req: &ChatRequest, reply: &str) {
    let digest = sha256_hex(req.final_user_content());
    std::fs::write(dir.join(format!("{digest}.txt")), reply).unwrap();
}

pub struct MockCase {
    pub problem: ProblemRecord,
    pub program: String,
    /// Proofs of `solve(X)` the program admits.
    pub proofs: usize,
}

/// `solve(X)` with `n` proofs, each binding X to `2 + 5`.
pub fn n_way_program(n: usize) -> String {
    let mut src = String::from("/* Context */\n");
    for i in 1..=n {
        writeln!(src, "route({i}).").unwrap();
    }
    src.push_str("/* Query */\nsolve(X) :- route(R), R > 0, X is 2 + 5.\n");
    src
}

pub fn mock_cases(counts: &[usize]) -> Vec<MockCase> {
    counts
        .iter()
        .enumerate()
        .map(|(i, &n)| MockCase {
            problem: ProblemRecord {
                id: format!("q{}", i + 1),
                question: format!(
                    "Traveller {} has {n} routes home and each costs 2 + 5 coins. What does the trip cost?",
                    i + 1
                ),
                answer: "7".into(),
                task: Task::Arithmetic,
            },
            program: n_way_program(n),
            proofs: n,
        })
        .collect()
}

/// Writes codegen and translation fixtures for every case. Translation
/// replies are derived from the tree text itself.
pub fn write_fixtures(dir: &Path, cases: &[MockCase], shots: usize, cap: usize) {
    let q = parse_query("solve(X)").unwrap();
    for case in cases {
        let req = build_codegen_prompt(case.problem.task, &case.problem.question, exemplars(shots));
        put_fixture(dir, &req, &codegen_reply(&case.program));
        let p = parse_program(&case.program).unwrap();
        let limits = SolveLimits { max_solutions: cap, ..SolveLimits::default() };
        let set = prove_trajectories(&p, &q, &limits).unwrap();
        for tree in &set.trees {
            let text = serialize_tree(tree);
            let req = build_translation_prompt(&case.problem.question, &case.program, &text, exemplars(shots));
            let reply = format!(
                "Sure! I am happy to help. Here is the reasoning chain:\nFollowing {} the cost is 7.",
                sha256_hex(&text)
            );
            put_fixture(dir, &req, &reply);
        }
    }
}

pub fn write_problems(path: &Path, problems: &[ProblemRecord]) {
    let lines: Vec<String> = problems.iter().map(|p| serde_json::to_string(p).unwrap()).collect();
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}
