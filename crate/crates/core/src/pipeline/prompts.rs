//! Few-shot chat prompts for program generation and tree translation.

use serde::{Deserialize, Serialize};

use super::Task;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Message { role, content: content.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
}

pub const DEFAULT_TEMPERATURE: f64 = 0.6;
pub const DEFAULT_TOP_P: f64 = 0.9;
pub const DEFAULT_MAX_TOKENS: u32 = 1024;

impl ChatRequest {
    pub fn new(messages: Vec<Message>) -> Self {
        ChatRequest { messages, temperature: DEFAULT_TEMPERATURE, top_p: DEFAULT_TOP_P, max_tokens: DEFAULT_MAX_TOKENS }
    }

    /// Content of the last user turn; mock fixtures are keyed on it.
    pub fn final_user_content(&self) -> &str {
        self.messages.iter().rev().find(|m| m.role == Role::User).map(|m| m.content.as_str()).unwrap_or("")
    }
}

/// A worked example: problem, program, its proof tree and the narrative.
#[derive(Clone, Copy, Debug)]
pub struct Exemplar {
    pub problem: &'static str,
    pub program: &'static str,
    pub tree: &'static str,
    pub reasoning: &'static str,
}

macro_rules! exemplar {
    ($name:literal) => {
        Exemplar {
            problem: include_str!(concat!("exemplars/", $name, "_problem.txt")),
            program: include_str!(concat!("exemplars/", $name, ".pl")),
            tree: include_str!(concat!("exemplars/", $name, "_tree.txt")),
            reasoning: include_str!(concat!("exemplars/", $name, "_cot.txt")),
        }
    };
}

/// The built-in shots, in prompt order.
pub const EXEMPLARS: [Exemplar; 3] = [exemplar!("tina"), exemplar!("janice"), exemplar!("jesse")];

pub fn exemplars(shots: usize) -> &'static [Exemplar] {
    &EXEMPLARS[..shots.min(EXEMPLARS.len())]
}

const CODEGEN_SYSTEM: &str = "You are a helpful assistant who **produces Prolog code** to solve problems.";
const TRANSLATE_SYSTEM: &str = "You are a helpful and smart assistant that helps people solve problems.";
const FOLLOW_UP: &str = "Excellent work! Here is another problem for you to solve. \
Please apply the same approach you used for the previous one(s) to tackle this new one. ";

fn trim_code(code: &str) -> &str {
    code.trim_end_matches(['\n', '\r'])
}

fn codegen_opening(task: Task, problem: &str) -> String {
    format!(
        "\n\nCould you please help me write Prolog code to solve the following {} problem? \
You should use consistent variable names for coreferent entities or attributes throughout the code. \
Start by coding the given context after the \"/* Context */\" comment. \
Then code the query that represents the question after the \"/* Query */\" comment. \
\n\n\n\nHere is the problem:\n\n{problem}",
        task.problem_kind()
    )
}

fn codegen_reply(task: Task, code: &str) -> String {
    format!(
        "Sure! I am happy to help you write Prolog code to solve this {} problem. \
Here is the Prolog code:\n```prolog\n{}\n```",
        task.problem_kind(),
        trim_code(code)
    )
}

pub fn build_codegen_prompt(task: Task, problem: &str, shots: &[Exemplar]) -> ChatRequest {
    let mut messages = vec![Message::new(Role::System, CODEGEN_SYSTEM)];
    let problems = shots.iter().map(|s| s.problem).chain(std::iter::once(problem));
    for (i, p) in problems.enumerate() {
        let content = if i == 0 { codegen_opening(task, p) } else { format!("{FOLLOW_UP}\nProblem:\n{p}") };
        messages.push(Message::new(Role::User, content));
        if let Some(shot) = shots.get(i) {
            messages.push(Message::new(Role::Assistant, codegen_reply(task, shot.program)));
        }
    }
    ChatRequest::new(messages)
}

fn translate_opening(problem: &str, code: &str, tree: &str) -> String {
    format!(
        "\n\nI need assistance in translating a reasoning tree generated by a Prolog engine into a natural language description. \
To facilitate this, I am providing the original problem, the relevant Prolog code, and the reasoning tree itself. \
Please review these carefully and provide a fluent and accurate narrative of the reasoning process. Thanks for your help!\
\n\n**Instructions Start**\n\n\
Translate the provided reasoning tree into a clear and logical natural language explanation.\
\n\nMany thanks for your help! I am looking forward to your response!\
\n\n**Instructions End**\n\n\n\n\
Here is the problem:\n\n{problem}\nHere is the prolog_code:\n\n{}\nHere is the prolog reasoning tree:\n\n{}",
        trim_code(code),
        tree.trim()
    )
}

const TRANSLATE_PREAMBLE: &str = "Sure! I am happy to help you convert the Prolog-style reasoning tree \
into a natural language reasoning chain. Here is the reasoning chain:";

pub fn build_translation_prompt(problem: &str, code: &str, tree: &str, shots: &[Exemplar]) -> ChatRequest {
    let mut messages = vec![Message::new(Role::System, TRANSLATE_SYSTEM)];
    let items = shots.iter().map(|s| (s.problem, s.program, s.tree)).chain(std::iter::once((problem, code, tree)));
    for (i, (p, c, t)) in items.enumerate() {
        let content = if i == 0 {
            translate_opening(p, c, t)
        } else {
            format!(
                "{FOLLOW_UP}\nProblem:\n{p}\n\nProlog code:\n{}\n\nProlog reasoning tree:\n{}",
                trim_code(c),
                t.trim()
            )
        };
        messages.push(Message::new(Role::User, content));
        if let Some(shot) = shots.get(i) {
            messages.push(Message::new(Role::Assistant, format!("{TRANSLATE_PREAMBLE}\n{}", shot.reasoning)));
        }
    }
    ChatRequest::new(messages)
}

/// The narrative part of a translation reply.
pub fn extract_reasoning(response: &str) -> Option<String> {
    let marker = "Here is the reasoning chain:";
    let body = match response.find(marker) {
        Some(at) => &response[at + marker.len()..],
        None => response,
    };
    let body = body.trim();
    (!body.is_empty()).then(|| body.to_string())
}
