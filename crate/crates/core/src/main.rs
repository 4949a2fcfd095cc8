use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tlp::checkpoint::{average_checkpoints, Checkpoint, DEFAULT_ALPHA};
use tlp::pipeline::{self, client, GenConfig, LlmClient, ProblemRecord};
use tlp::{
    check_proof, parse_program, parse_query, parse_tree, prove_trajectories, serialize_tree, solve_all, Program,
    SolveLimits,
};

#[derive(Parser)]
#[command(name = "tlp", version, about = "Horn-clause proofs, reasoning datasets and checkpoint averaging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every answer to a query.
    Solve {
        file: PathBuf,
        #[arg(short, long)]
        query: String,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Print the distinct proof trees of a query.
    Trace {
        file: PathBuf,
        #[arg(short, long)]
        query: String,
        #[arg(long, default_value_t = 64)]
        max_proofs: usize,
        #[arg(long, value_enum, default_value_t = Format::Tree)]
        format: Format,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Check a proof tree against a program.
    Check {
        file: PathBuf,
        #[arg(long)]
        tree: PathBuf,
    },
    /// Run dataset generation stages.
    Gen(GenArgs),
    /// Average two checkpoints.
    Avg {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        tuned: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = 64)]
    max_solutions: usize,
    #[arg(long, default_value_t = 256)]
    max_depth: u32,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    /// Allow cyclic bindings.
    #[arg(long)]
    no_occurs_check: bool,
}

impl LimitArgs {
    fn limits(&self) -> SolveLimits {
        SolveLimits {
            max_solutions: self.max_solutions,
            max_depth: self.max_depth,
            max_steps: self.max_steps,
            occurs_check: !self.no_occurs_check,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tree,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Stage {
    Codegen,
    Verify,
    Trajectories,
    Translate,
    All,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    stage: Stage,
    #[arg(long)]
    problems: PathBuf,
    /// Output file; for `all`, the dataset file, with the other stage
    /// files written beside it.
    #[arg(long)]
    out: PathBuf,
    /// Previous stage's output (verify, trajectories, translate).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, env = client::ENDPOINT_VAR, conflicts_with = "mock")]
    endpoint: Option<String>,
    #[arg(long)]
    mock: Option<PathBuf>,
    #[arg(long, default_value = client::DEFAULT_MODEL)]
    model: String,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, default_value_t = pipeline::EXEMPLARS.len())]
    shots: usize,
    #[arg(long, default_value_t = pipeline::DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long, default_value_t = pipeline::DEFAULT_WORKERS)]
    workers: usize,
}

enum Failure {
    Usage(String),
    Domain(String),
}

type Outcome = Result<(), Failure>;

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    let src = fs::read_to_string(path).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    parse_program(&src).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn checked(limits: SolveLimits) -> Result<SolveLimits, Failure> {
    limits.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(limits)
}

fn solve(file: &Path, query: &str, limits: SolveLimits) -> Outcome {
    let limits = checked(limits)?;
    let program = load_program(file)?;
    let query = parse_query(query).map_err(|e| domain(format!("query: {e}")))?;
    let sols = solve_all(&program, &query, &limits).map_err(domain)?;
    if let Some(hit) = sols.limit {
        eprintln!("warning: {hit}; answers may be incomplete");
    }
    if sols.answers.is_empty() {
        println!("false");
        return Err(Failure::Domain("no solutions".into()));
    }
    for a in &sols.answers {
        println!("{a}");
    }
    Ok(())
}

fn trace(file: &Path, query: &str, max_proofs: usize, format: Format, limits: SolveLimits) -> Outcome {
    let limits = checked(SolveLimits { max_solutions: max_proofs, ..limits })?;
    let program = load_program(file)?;
    let query = parse_query(query).map_err(|e| domain(format!("query: {e}")))?;
    let set = prove_trajectories(&program, &query, &limits).map_err(domain)?;
    match format {
        Format::Tree => {
            for t in &set.trees {
                println!("{}", serialize_tree(t));
            }
        }
        Format::Json => {
            let doc = serde_json::json!({
                "query": set.query.to_string(),
                "exhausted": set.exhausted,
                "trees": set.trees.iter().map(|t| t.to_json()).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
    }
    eprintln!("{} proof(s){}", set.trees.len(), if set.exhausted { "" } else { ", enumeration incomplete" });
    if set.trees.is_empty() {
        return Err(Failure::Domain("no proofs".into()));
    }
    Ok(())
}

fn check(file: &Path, tree: &Path) -> Outcome {
    let program = load_program(file)?;
    let text = fs::read_to_string(tree).map_err(|e| domain(format!("{}: {e}", tree.display())))?;
    let tree = parse_tree(&text).map_err(|e| domain(format!("tree: {e}")))?;
    let verdict = check_proof(&program, &tree);
    println!("{verdict}");
    if verdict.is_valid() {
        Ok(())
    } else {
        Err(Failure::Domain("invalid proof".into()))
    }
}

fn client_for(args: &GenArgs) -> Result<LlmClient, Failure> {
    let client = match (&args.mock, &args.endpoint) {
        (Some(dir), _) => LlmClient::mock(dir),
        (None, Some(url)) => LlmClient::http(url),
        (None, None) => {
            return Err(Failure::Usage(format!(
                "this stage calls a model: pass --endpoint URL (or set {}) or --mock DIR",
                client::ENDPOINT_VAR
            )))
        }
    };
    Ok(client.with_model(&args.model))
}

fn input_of(args: &GenArgs) -> Result<&Path, Failure> {
    args.input.as_deref().ok_or_else(|| Failure::Usage("this stage needs --input FILE".into()))
}

fn gen(args: &GenArgs) -> Outcome {
    let cfg = GenConfig { shots: args.shots, cap: args.cap, tol: args.tol, workers: args.workers };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let problems: Vec<ProblemRecord> = pipeline::read_problems(&args.problems).map_err(domain)?;
    let written = match args.stage {
        Stage::Codegen => {
            let recs = pipeline::codegen_stage(&problems, &client_for(args)?, &cfg);
            pipeline::write_jsonl(&args.out, &recs).map(|_| recs.len())
        }
        Stage::Verify => {
            let programs = pipeline::read_jsonl(input_of(args)?).map_err(domain)?;
            let recs = pipeline::verify_stage(&problems, &programs, &cfg);
            pipeline::write_jsonl(&args.out, &recs).map(|_| recs.len())
        }
        Stage::Trajectories => {
            let verified = pipeline::read_jsonl(input_of(args)?).map_err(domain)?;
            let recs = pipeline::trajectories_stage(&problems, &verified, &cfg);
            pipeline::write_jsonl(&args.out, &recs).map(|_| recs.len())
        }
        Stage::Translate => {
            let trees = pipeline::read_jsonl(input_of(args)?).map_err(domain)?;
            let (recs, failures) = pipeline::translate_stage(&problems, &trees, &client_for(args)?, &cfg);
            if failures > 0 {
                eprintln!("{failures} translation(s) failed");
            }
            pipeline::write_jsonl(&args.out, &recs).map(|_| recs.len())
        }
        Stage::All => {
            let out = pipeline::run_pipeline(&problems, &client_for(args)?, &cfg);
            pipeline::write_outputs(&out, &args.out).map_err(domain)?;
            println!("{}", serde_json::to_string_pretty(&out.report).expect("json"));
            return Ok(());
        }
    };
    let n = written.map_err(domain)?;
    println!("{}", serde_json::json!({ "records": n, "out": args.out.display().to_string() }));
    Ok(())
}

fn avg(base: &Path, tuned: &Path, alpha: f64, out: &Path) -> Outcome {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Failure::Usage(format!("--alpha must lie in [0, 1], got {alpha}")));
    }
    let base = Checkpoint::open(base).map_err(domain)?;
    let tuned = Checkpoint::open(tuned).map_err(domain)?;
    let result = average_checkpoints(&base, &tuned, alpha, out).map_err(domain)?;
    println!(
        "{}",
        serde_json::json!({ "tensors": result.manifest.len(), "alpha": alpha, "out": out.display().to_string() })
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve { file, query, limits } => solve(file, query, limits.limits()),
        Command::Trace { file, query, max_proofs, format, limits } => {
            trace(file, query, *max_proofs, *format, limits.limits())
        }
        Command::Check { file, tree } => check(file, tree),
        Command::Gen(args) => gen(args),
        Command::Avg { base, tuned, alpha, out } => avg(base, tuned, *alpha, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
