//! Dataset generation: problems → programs → verified programs → proof
//! trees → translated reasoning records. Every stage reads and writes JSONL.

pub mod client;
pub mod prompts;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{solve_all, EngineError, SolveLimits};
use crate::format::format_term;
use crate::parser::{parse_program, parse_query, parse_term};
use crate::proof::{check_proof, prove_trajectories_where, serialize_tree, TrajectorySet};
use crate::term::{PredKey, Program, Term};

pub use client::{Backend, ChatResponse, ClientError, LlmClient, RetryPolicy};
pub use prompts::{build_codegen_prompt, build_translation_prompt, exemplars, ChatRequest, Exemplar, EXEMPLARS};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const ABSOLUTE_FLOOR: f64 = 1e-9;
pub const DEFAULT_WORKERS: usize = 4;
pub const QUERY: &str = "solve(X)";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Arithmetic,
    Logic,
}

impl Task {
    pub fn default_cap(self) -> usize {
        match self {
            Task::Arithmetic => 10,
            Task::Logic => 5,
        }
    }

    pub(crate) fn problem_kind(self) -> &'static str {
        match self {
            Task::Arithmetic => "arithmetic reasoning",
            Task::Logic => "logical reasoning",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub id: String,
    pub question: String,
    /// Gold answer.
    pub answer: String,
    pub task: Task,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgramStatus {
    Ok,
    LlmError,
    NoProgram,
    ParseError,
    MissingQuery,
    Verified,
    Mismatch,
    EngineError,
}

impl ProgramStatus {
    pub fn is_generation_failure(self) -> bool {
        matches!(
            self,
            ProgramStatus::LlmError
                | ProgramStatus::NoProgram
                | ProgramStatus::ParseError
                | ProgramStatus::MissingQuery
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProgramMeta {
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_digest: Option<String>,
    /// Computed answer, set by verification.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramRecord {
    pub id: String,
    pub prolog: String,
    pub status: ProgramStatus,
    pub meta: ProgramMeta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreesRecord {
    pub id: String,
    /// The verified answer, canonical text.
    pub answer: String,
    pub n: usize,
    pub trees: Vec<String>,
    pub exhausted: bool,
    pub prolog: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub question: String,
    pub reasoning: String,
    pub answer: String,
    pub trajectory_index: usize,
    pub num_trajectories: usize,
    pub proof_tree: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub problems_in: usize,
    pub generation_failures: usize,
    pub verified: usize,
    pub verification_mismatches: usize,
    pub engine_errors: usize,
    pub trees_enumerated: usize,
    pub translation_failures: usize,
    pub records_out: usize,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Record { path: PathBuf, line: usize, message: String },
    #[error("duplicate problem id {0}")]
    DuplicateId(String),
    #[error("no ```prolog block in response")]
    NoProgramBlock,
    #[error("{trees} trajectories but {translations} translations")]
    LengthMismatch { trees: usize, translations: usize },
    #[error("{0}")]
    Config(String),
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let io = |source| PipelineError::Io { path: path.to_path_buf(), source };
    let file = fs::File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| PipelineError::Record {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), PipelineError> {
    let io = |source| PipelineError::Io { path: path.to_path_buf(), source };
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).expect("records serialize");
        buf.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(io)?;
    file.write_all(&buf).map_err(io)?;
    file.sync_all().map_err(io)
}

pub fn read_problems(path: &Path) -> Result<Vec<ProblemRecord>, PipelineError> {
    let problems: Vec<ProblemRecord> = read_jsonl(path)?;
    let mut seen = HashSet::new();
    for (i, p) in problems.iter().enumerate() {
        if !seen.insert(p.id.as_str()) {
            return Err(PipelineError::DuplicateId(p.id.clone()));
        }
        if p.answer.trim().is_empty() {
            return Err(PipelineError::Record {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("problem {} has an empty gold answer", p.id),
            });
        }
    }
    Ok(problems)
}

/// Body of the first ```prolog fence, trimmed.
pub fn extract_program(response: &str) -> Result<String, PipelineError> {
    let fence = "```prolog";
    let start = response.find(fence).ok_or(PipelineError::NoProgramBlock)? + fence.len();
    let rest = &response[start..];
    let end = rest.find("```").ok_or(PipelineError::NoProgramBlock)?;
    Ok(rest[..end].trim().to_string())
}

fn query_key() -> PredKey {
    PredKey::new("solve", 1)
}

#[derive(Clone, Debug, PartialEq)]
pub enum VerifyOutcome {
    Verified(Term),
    Mismatch(Term),
    EngineError(String),
}

fn number_of(t: &Term) -> Option<f64> {
    use num_traits::ToPrimitive;
    match t {
        Term::Int(i) => i.to_f64(),
        Term::Float(f) => Some(*f),
        _ => None,
    }
}

/// Numeric golds match within `tol` relative error (never tighter than an
/// absolute 1e-9); anything else must match as canonical text.
pub fn answer_matches(answer: &Term, gold: &str, tol: f64) -> bool {
    let gold = gold.trim();
    if let Ok(g) = gold.parse::<f64>() {
        return match number_of(answer) {
            Some(a) => (a - g).abs() <= (tol * g.abs()).max(ABSOLUTE_FLOOR),
            None => false,
        };
    }
    let canonical = parse_term(gold).map(|t| format_term(&t)).unwrap_or_else(|_| gold.to_string());
    format_term(answer) == canonical
}

/// Runs `solve(X)` and compares the first answer with the gold answer.
pub fn verify_program(source: &str, gold: &str, tol: f64) -> VerifyOutcome {
    let program = match parse_program(source) {
        Ok(p) => p,
        Err(e) => return VerifyOutcome::EngineError(format!("parse: {e}")),
    };
    if !program.defines(&query_key()) {
        return VerifyOutcome::EngineError("program does not define solve/1".into());
    }
    let query = parse_query(QUERY).expect("query parses");
    let limits = SolveLimits { max_solutions: 1, ..SolveLimits::default() };
    let sols = match solve_all(&program, &query, &limits) {
        Ok(s) => s,
        Err(e) => return VerifyOutcome::EngineError(e.to_string()),
    };
    let Some(first) = sols.answers.first() else {
        return VerifyOutcome::EngineError(match sols.limit {
            Some(hit) => format!("no solution ({hit})"),
            None => "no solution".into(),
        });
    };
    let answer = first.get("X").cloned().expect("query variable is bound in the answer");
    if answer_matches(&answer, gold, tol) {
        VerifyOutcome::Verified(answer)
    } else {
        VerifyOutcome::Mismatch(answer)
    }
}

/// Up to `cap` distinct proofs of `solve(X)` whose answer is `answer`.
pub fn enumerate_capped(program: &Program, answer: &Term, cap: usize) -> Result<TrajectorySet, EngineError> {
    if cap == 0 {
        return Err(EngineError::InvalidLimits("cap must be at least 1".into()));
    }
    let query = parse_query(QUERY).expect("query parses");
    let limits = SolveLimits { max_solutions: cap, ..SolveLimits::default() };
    prove_trajectories_where(program, &query, &limits, |ans, tree| {
        ans.get("X") == Some(answer) && check_proof(program, tree).is_valid()
    })
}

/// One record per successful translation, numbered 1..m in tree order.
/// Failed translations (`None`) are dropped.
pub fn assemble_dataset(
    problem: &ProblemRecord,
    trees: &[String],
    translations: &[Option<String>],
) -> Result<Vec<DatasetRecord>, PipelineError> {
    if trees.len() != translations.len() {
        return Err(PipelineError::LengthMismatch { trees: trees.len(), translations: translations.len() });
    }
    let kept: Vec<(&String, &String)> =
        trees.iter().zip(translations).filter_map(|(t, r)| r.as_ref().map(|r| (t, r))).collect();
    let n = kept.len();
    Ok(kept
        .into_iter()
        .enumerate()
        .map(|(i, (tree, reasoning))| DatasetRecord {
            id: problem.id.clone(),
            question: problem.question.clone(),
            reasoning: reasoning.clone(),
            answer: problem.answer.clone(),
            trajectory_index: i + 1,
            num_trajectories: n,
            proof_tree: tree.clone(),
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub shots: usize,
    /// Overrides the per-task cap.
    pub cap: Option<usize>,
    pub tol: f64,
    pub workers: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { shots: EXEMPLARS.len(), cap: None, tol: DEFAULT_TOLERANCE, workers: DEFAULT_WORKERS }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.workers == 0 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        if self.cap == Some(0) {
            return Err(PipelineError::Config("cap must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(PipelineError::Config("tolerance must be non-negative".into()));
        }
        Ok(())
    }

    fn cap_for(&self, task: Task) -> usize {
        self.cap.unwrap_or(task.default_cap())
    }
}

/// Maps `f` over `items` on a pool of `workers` threads, keeping order.
fn parallel_map<T, R, F>(workers: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("worker pool starts");
    pool.install(|| items.par_iter().map(&f).collect())
}

fn index_problems(problems: &[ProblemRecord]) -> HashMap<&str, &ProblemRecord> {
    problems.iter().map(|p| (p.id.as_str(), p)).collect()
}

pub fn codegen_stage(problems: &[ProblemRecord], client: &LlmClient, cfg: &GenConfig) -> Vec<ProgramRecord> {
    let shots = exemplars(cfg.shots);
    parallel_map(cfg.workers, problems, |p| {
        let req = build_codegen_prompt(p.task, &p.question, shots);
        let mut meta = ProgramMeta {
            model: client.model().to_string(),
            temperature: req.temperature,
            top_p: req.top_p,
            ..ProgramMeta::default()
        };
        let record = |prolog: String, status, meta| ProgramRecord { id: p.id.clone(), prolog, status, meta };
        let response = match client.complete(&req) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("{}: {e}", p.id);
                meta.error = Some(e.to_string());
                return record(String::new(), ProgramStatus::LlmError, meta);
            }
        };
        meta.response_digest = Some(client::sha256_hex(&response.content));
        let source = match extract_program(&response.content) {
            Ok(s) => s,
            Err(e) => {
                meta.error = Some(e.to_string());
                return record(String::new(), ProgramStatus::NoProgram, meta);
            }
        };
        let status = match parse_program(&source) {
            Err(e) => {
                meta.error = Some(e.to_string());
                ProgramStatus::ParseError
            }
            Ok(prog) if !prog.defines(&query_key()) => {
                meta.error = Some("program does not define solve/1".into());
                ProgramStatus::MissingQuery
            }
            Ok(_) => ProgramStatus::Ok,
        };
        record(source, status, meta)
    })
}

pub fn verify_stage(problems: &[ProblemRecord], programs: &[ProgramRecord], cfg: &GenConfig) -> Vec<ProgramRecord> {
    let index = index_problems(problems);
    parallel_map(cfg.workers, programs, |rec| {
        let mut rec = rec.clone();
        if rec.status != ProgramStatus::Ok {
            return rec;
        }
        let Some(problem) = index.get(rec.id.as_str()) else {
            rec.status = ProgramStatus::EngineError;
            rec.meta.error = Some("no problem with this id".into());
            return rec;
        };
        match verify_program(&rec.prolog, &problem.answer, cfg.tol) {
            VerifyOutcome::Verified(a) => {
                rec.status = ProgramStatus::Verified;
                rec.meta.answer = Some(format_term(&a));
            }
            VerifyOutcome::Mismatch(a) => {
                rec.status = ProgramStatus::Mismatch;
                rec.meta.answer = Some(format_term(&a));
            }
            VerifyOutcome::EngineError(e) => {
                rec.status = ProgramStatus::EngineError;
                rec.meta.error = Some(e);
            }
        }
        rec
    })
}

/// Enumerates trees for every verified program. Programs whose enumeration
/// fails are logged and skipped.
pub fn trajectories_stage(problems: &[ProblemRecord], verified: &[ProgramRecord], cfg: &GenConfig) -> Vec<TreesRecord> {
    let index = index_problems(problems);
    let results = parallel_map(cfg.workers, verified, |rec| {
        if rec.status != ProgramStatus::Verified {
            return None;
        }
        let problem = index.get(rec.id.as_str())?;
        let run = || -> Result<TreesRecord, String> {
            let program = parse_program(&rec.prolog).map_err(|e| e.to_string())?;
            let answer_text = rec.meta.answer.as_deref().ok_or("verified record lacks an answer")?;
            let answer = parse_term(answer_text).map_err(|e| e.to_string())?;
            let set = enumerate_capped(&program, &answer, cfg.cap_for(problem.task)).map_err(|e| e.to_string())?;
            let trees: Vec<String> = set.trees.iter().map(serialize_tree).collect();
            Ok(TreesRecord {
                id: rec.id.clone(),
                answer: answer_text.to_string(),
                n: trees.len(),
                trees,
                exhausted: set.exhausted,
                prolog: rec.prolog.clone(),
            })
        };
        match run() {
            Ok(t) => Some(t),
            Err(e) => {
                log::warn!("{}: trajectory enumeration failed: {e}", rec.id);
                None
            }
        }
    });
    results.into_iter().flatten().collect()
}

/// Translates every tree and assembles dataset records. Returns the
/// records and the number of failed translations.
pub fn translate_stage(
    problems: &[ProblemRecord],
    trees: &[TreesRecord],
    client: &LlmClient,
    cfg: &GenConfig,
) -> (Vec<DatasetRecord>, usize) {
    let index = index_problems(problems);
    let shots = exemplars(cfg.shots);
    let per_problem = parallel_map(cfg.workers, trees, |rec| {
        let Some(problem) = index.get(rec.id.as_str()) else {
            return (Vec::new(), rec.trees.len());
        };
        let translations: Vec<Option<String>> = rec
            .trees
            .iter()
            .map(|tree| {
                let req = build_translation_prompt(&problem.question, &rec.prolog, tree, shots);
                match client.complete(&req) {
                    Ok(resp) => prompts::extract_reasoning(&resp.content),
                    Err(e) => {
                        log::warn!("{}: translation failed: {e}", rec.id);
                        None
                    }
                }
            })
            .collect();
        let failures = translations.iter().filter(|t| t.is_none()).count();
        let records = assemble_dataset(problem, &rec.trees, &translations).expect("one translation per tree");
        (records, failures)
    });
    let failures = per_problem.iter().map(|(_, f)| f).sum();
    (per_problem.into_iter().flat_map(|(r, _)| r).collect(), failures)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PipelineOutput {
    pub programs: Vec<ProgramRecord>,
    pub verified: Vec<ProgramRecord>,
    pub trees: Vec<TreesRecord>,
    pub dataset: Vec<DatasetRecord>,
    pub report: RunReport,
}

pub fn run_pipeline(problems: &[ProblemRecord], client: &LlmClient, cfg: &GenConfig) -> PipelineOutput {
    let programs = codegen_stage(problems, client, cfg);
    let verified = verify_stage(problems, &programs, cfg);
    let trees = trajectories_stage(problems, &verified, cfg);
    let (dataset, translation_failures) = translate_stage(problems, &trees, client, cfg);
    let count = |s: ProgramStatus| verified.iter().filter(|r| r.status == s).count();
    let report = RunReport {
        problems_in: problems.len(),
        generation_failures: programs.iter().filter(|r| r.status.is_generation_failure()).count(),
        verified: count(ProgramStatus::Verified),
        verification_mismatches: count(ProgramStatus::Mismatch),
        engine_errors: count(ProgramStatus::EngineError),
        trees_enumerated: trees.iter().map(|t| t.n).sum(),
        translation_failures,
        records_out: dataset.len(),
    };
    PipelineOutput { programs, verified, trees, dataset, report }
}

/// Writes every stage file of a run next to `dataset_path`.
pub fn write_outputs(out: &PipelineOutput, dataset_path: &Path) -> Result<(), PipelineError> {
    let dir = dataset_path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    write_jsonl(&dir.join("programs.jsonl"), &out.programs)?;
    write_jsonl(&dir.join("verified.jsonl"), &out.verified)?;
    write_jsonl(&dir.join("trees.jsonl"), &out.trees)?;
    write_jsonl(dataset_path, &out.dataset)?;
    let report = serde_json::to_string_pretty(&out.report).expect("report serializes") + "\n";
    let path = dir.join("report.json");
    fs::write(&path, report).map_err(|source| PipelineError::Io { path, source })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINA_REPLY: &str = "Sure! Here is the Prolog code:\n```prolog\n/* Context */\nwage(18.00).\n```\nDone.";

    #[test]
    fn program_extraction() {
        let code = extract_program(TINA_REPLY).unwrap();
        assert!(code.starts_with("/* Context */"));
        assert!(code.contains("wage(18.00)."));
        assert!(matches!(extract_program("no code here"), Err(PipelineError::NoProgramBlock)));
        let two = "```prolog\na.\n```\n```prolog\nb.\n```";
        assert_eq!(extract_program(two).unwrap(), "a.");
    }

    #[test]
    fn verification_verdicts() {
        let tina = EXEMPLARS[0].program;
        assert_eq!(verify_program(tina, "990", DEFAULT_TOLERANCE), VerifyOutcome::Verified(Term::Float(990.0)));
        assert!(matches!(verify_program(tina, "991", DEFAULT_TOLERANCE), VerifyOutcome::Mismatch(_)));
        assert!(matches!(verify_program("p(1).", "1", DEFAULT_TOLERANCE), VerifyOutcome::EngineError(_)));
        assert!(matches!(verify_program("solve(X) :- fail.", "1", DEFAULT_TOLERANCE), VerifyOutcome::EngineError(_)));
        assert!(matches!(verify_program("solve(X) :- q(X).", "1", DEFAULT_TOLERANCE), VerifyOutcome::EngineError(_)));
    }

    #[test]
    fn tolerance() {
        assert!(answer_matches(&Term::Float(990.0000001), "990", 1e-6));
        assert!(!answer_matches(&Term::Float(990.01), "990", 1e-6));
        assert!(answer_matches(&Term::Float(1e-10), "0", 0.0));
        assert!(!answer_matches(&Term::Float(1e-8), "0", 1e-6));
        assert!(answer_matches(&Term::atom("true"), "true", 1e-6));
        assert!(!answer_matches(&Term::atom("yes"), "42", 1e-6));
    }

    #[test]
    fn capped_enumeration() {
        let src = "solve(X) :- k(K), X = 4, K > 0. k(1). k(2). k(3).";
        let p = parse_program(src).unwrap();
        let four = Term::int(4);
        let set = enumerate_capped(&p, &four, 10).unwrap();
        assert_eq!((set.trees.len(), set.exhausted), (3, true));
        let set = enumerate_capped(&p, &four, 2).unwrap();
        assert_eq!((set.trees.len(), set.exhausted), (2, false));
        assert!(enumerate_capped(&p, &Term::int(5), 10).unwrap().trees.is_empty());
    }

    #[test]
    fn assembly_numbering() {
        let p = ProblemRecord { id: "a".into(), question: "q".into(), answer: "1".into(), task: Task::Logic };
        let trees = vec!["t1".to_string(), "t2".into(), "t3".into()];
        let recs = assemble_dataset(&p, &trees, &[Some("r1".into()), Some("r2".into()), Some("r3".into())]).unwrap();
        let idx: Vec<_> = recs.iter().map(|r| (r.trajectory_index, r.num_trajectories)).collect();
        assert_eq!(idx, [(1, 3), (2, 3), (3, 3)]);
        let recs = assemble_dataset(&p, &trees, &[Some("r1".into()), None, Some("r3".into())]).unwrap();
        assert_eq!(recs[1].proof_tree, "t3");
        assert_eq!(recs[1].trajectory_index, 2);
        assert!(assemble_dataset(&p, &[], &[]).unwrap().is_empty());
        assert!(assemble_dataset(&p, &trees, &[]).is_err());
    }

    #[test]
    fn scaling_law() {
        let per_problem = vec![10usize; 2000];
        let p = ProblemRecord { id: "x".into(), question: "q".into(), answer: "1".into(), task: Task::Arithmetic };
        let total: usize = per_problem
            .iter()
            .map(|&n| {
                let trees = vec![String::new(); n.min(Task::Arithmetic.default_cap())];
                let tr = vec![Some(String::new()); trees.len()];
                assemble_dataset(&p, &trees, &tr).unwrap().len()
            })
            .sum();
        assert_eq!(total, 20_000);
    }

    #[test]
    fn record_schema_field_order() {
        let r = DatasetRecord {
            id: "1".into(),
            question: "q".into(),
            reasoning: "r".into(),
            answer: "a".into(),
            trajectory_index: 1,
            num_trajectories: 1,
            proof_tree: "t".into(),
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"id":"1","question":"q","reasoning":"r","answer":"a","trajectory_index":1,"num_trajectories":1,"proof_tree":"t"}"#
        );
    }
}
