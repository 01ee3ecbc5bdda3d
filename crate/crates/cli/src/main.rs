use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use actr_chr::ast::Model;
use actr_chr::bisim::bisim_check;
use actr_chr::chr::print_program;
use actr_chr::engine::{
    explore, set_normal_form, state_hash, ArchitectureConfig, Dedup, FailRequest, Label,
    Normalized, Program,
};
use actr_chr::translate::chr_of_program;
use actr_chr::{parse_model, print_model, validate};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Run, explore, translate and check ACT-R production systems.
#[derive(Parser, Debug)]
#[command(name = "actr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a model.
    Parse(Common),
    /// Print the model with every rule in set normal form.
    Normalize(Common),
    /// Follow one seeded random path through the transition system.
    Run(Common),
    /// Enumerate every state reachable within the depth bound.
    Explore(Common),
    /// Translate the model into a CHR program.
    Translate(Common),
    /// Check the model against its translation up to the depth bound.
    Check(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Model file (.actr).
    input: PathBuf,
    #[arg(long, default_value_t = 16)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = DedupArg::Canonical)]
    dedup: DedupArg,
    #[arg(long = "fail-request", value_enum, default_value_t = FailArg::Nil)]
    fail_request: FailArg,
    /// Output format; `jsonl` applies to `check` only.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; `-` is standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DedupArg {
    Exact,
    Canonical,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FailArg {
    Nil,
    Stuck,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Dot,
    Trace,
    Text,
    Jsonl,
}

/// A failure already reported on standard error.
struct Reported;

type Outcome = std::result::Result<(), Reported>;

type Handler = fn(&Common, Model) -> Result<Outcome>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Reported)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<std::result::Result<Model, Reported>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let name = path.display().to_string();
    let model = match parse_model(&text) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{}", e.render(&name));
            return Ok(Err(Reported));
        }
    };
    let diags = validate(&model);
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("{name}:{}: {d}", d.span);
        }
        return Ok(Err(Reported));
    }
    Ok(Ok(model))
}

fn program(model: &Model, args: &Common) -> Program {
    let mode = match args.fail_request {
        FailArg::Nil => FailRequest::Nil,
        FailArg::Stuck => FailRequest::Stuck,
    };
    let config = ArchitectureConfig::default().with_fail_request(mode);
    Program::with_config(model, config).expect("validated model")
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))
        }
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<Outcome> {
    let (args, run): (&Common, Handler) = match &command {
        Command::Parse(a) => (a, cmd_parse),
        Command::Normalize(a) => (a, cmd_normalize),
        Command::Run(a) => (a, cmd_run),
        Command::Explore(a) => (a, cmd_explore),
        Command::Translate(a) => (a, cmd_translate),
        Command::Check(a) => (a, cmd_check),
    };
    match load(&args.input)? {
        Ok(model) => run(args, model),
        Err(r) => Ok(Err(r)),
    }
}

fn cmd_parse(args: &Common, model: Model) -> Result<Outcome> {
    let text = format!(
        "{}: ok ({} types, {} chunks, {} buffers, {} rules)\n",
        args.input.display(),
        model.types.iter().count() - 1,
        model.chunks.len(),
        model.buffers.len(),
        model.rules.len()
    );
    emit(args.out.as_deref(), &text)?;
    Ok(Ok(()))
}

fn cmd_normalize(args: &Common, mut model: Model) -> Result<Outcome> {
    let mut rules = Vec::new();
    for r in &model.rules {
        match set_normal_form(r, &model.types) {
            Normalized::Rule(n) => rules.push(n),
            Normalized::Dropped => {
                eprintln!("note: rule `{}` can never match and is dropped", r.name)
            }
        }
    }
    model.rules = rules;
    emit(args.out.as_deref(), &print_model(&model))?;
    Ok(Ok(()))
}

fn cmd_run(args: &Common, model: Model) -> Result<Outcome> {
    let program = program(&model, args);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut state = model.initial_state().expect("validated model");
    let mut labels: Vec<Label> = Vec::new();
    let mut out = format!("step 0: start -> {}\n", state_hash(&state));
    for step in 1..=args.depth {
        let mut succ = program.successors(&state)?;
        if succ.is_empty() {
            break;
        }
        let (label, next) = succ.swap_remove(rng.random_range(0..succ.len()));
        out.push_str(&format!("step {step}: {label} -> {}\n", state_hash(&next)));
        labels.push(label);
        state = next;
    }
    let trace: Vec<String> = labels.iter().map(Label::to_string).collect();
    out.push_str(&format!("trace: {}\n", trace.join("; ")));
    if args.format != Some(Format::Trace) {
        out.push_str("final state:\n");
        for line in state.to_string().lines() {
            out.push_str(&format!("  {line}\n"));
        }
    }
    emit(args.out.as_deref(), &out)?;
    Ok(Ok(()))
}

fn cmd_explore(args: &Common, model: Model) -> Result<Outcome> {
    let program = program(&model, args);
    let dedup = match args.dedup {
        DedupArg::Exact => Dedup::Exact,
        DedupArg::Canonical => Dedup::Canonical,
    };
    let graph = explore(
        &program,
        &model.initial_state().expect("validated model"),
        args.depth,
        dedup,
    )?;
    let text = match args.format {
        Some(Format::Dot) => graph.to_dot(),
        Some(Format::Trace) => graph.to_trace(),
        _ => graph.to_text(),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(Ok(()))
}

fn cmd_translate(args: &Common, model: Model) -> Result<Outcome> {
    let program = program(&model, args);
    let rules = chr_of_program(&program)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.input.with_extension("chr"));
    emit(Some(&out), &print_program(&rules))?;
    Ok(Ok(()))
}

fn cmd_check(args: &Common, model: Model) -> Result<Outcome> {
    let program = program(&model, args);
    let report = bisim_check(
        &program,
        &model.initial_state().expect("validated model"),
        args.depth,
    );
    let text = match args.format {
        Some(Format::Jsonl) => report.to_json_lines(),
        _ => report.to_text(),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(if report.passed() {
        Ok(())
    } else {
        Err(Reported)
    })
}
