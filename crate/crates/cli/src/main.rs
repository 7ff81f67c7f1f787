use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde_json::json;

use rahit::chc::{parse_program, Program};
use rahit::derivations::and_tree_rooted;
use rahit::driver::{verify_with, Engine, Options, Outcome, Step, Verdict};

const EXIT_SAFE: u8 = 0;
const EXIT_UNSAFE: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rahit",
    version,
    about = "Safety verification of constrained Horn clauses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether `false` is derivable from the clauses in FILE.
    Verify {
        file: PathBuf,
        /// Refinement engine.
        #[arg(long, default_value = "rahit", value_parser = parse_engine)]
        engine: Engine,
        /// Maximum number of refinements before giving up.
        #[arg(long, default_value_t = 20)]
        max_iter: usize,
        /// Wall-clock limit in seconds; 0 disables it.
        #[arg(long, default_value_t = 300)]
        timeout: u64,
        /// Updates of a predicate before its entry is widened.
        #[arg(long, default_value_t = 3)]
        widen_delay: usize,
        /// Read strict inequalities over integers: `x > y` becomes `x >= y + 1`.
        #[arg(long)]
        strict_to_nonstrict: bool,
        /// Write verdict and statistics as JSON to this file.
        #[arg(long, value_name = "PATH")]
        stats_json: Option<PathBuf>,
        /// Write each iteration's program, model and automata here.
        #[arg(long, value_name = "PATH")]
        dump_dir: Option<PathBuf>,
    },
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Verify {
            file,
            engine,
            max_iter,
            timeout,
            widen_delay,
            strict_to_nonstrict,
            stats_json,
            dump_dir,
        } => {
            let program = match load(&file, strict_to_nonstrict) {
                Ok(p) => p,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(EXIT_INPUT);
                }
            };
            let options = Options {
                engine,
                max_iter,
                widen_delay,
                timeout: (timeout > 0).then(|| Duration::from_secs(timeout)),
            };
            run(
                &program,
                &options,
                stats_json.as_deref(),
                dump_dir.as_deref(),
            )
        }
    }
}

fn load(file: &Path, strict_to_nonstrict: bool) -> Result<Program, String> {
    let text = fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let program = parse_program(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    Ok(if strict_to_nonstrict {
        program.strict_to_nonstrict()
    } else {
        program
    })
}

fn run(
    program: &Program,
    options: &Options,
    stats_json: Option<&Path>,
    dump_dir: Option<&Path>,
) -> ExitCode {
    if let Some(dir) = dump_dir {
        if let Err(e) = fs::create_dir_all(dir) {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let mut dump_errors = Vec::new();
    let outcome = verify_with(program, options, |i, current, step| {
        if let Some(dir) = dump_dir {
            if let Err(e) = dump(dir, i, current, step) {
                dump_errors.push(e.to_string());
            }
        }
    });
    for e in dump_errors {
        eprintln!("warning: could not write dump: {e}");
    }

    println!("{}", outcome.verdict.label());
    match &outcome.verdict {
        Verdict::Safe => {}
        Verdict::Unsafe { trace, witness } => {
            println!("trace: {trace}");
            if let Ok(tree) = and_tree_rooted(program, trace) {
                let values: Vec<String> = witness
                    .concretize(&tree.formula())
                    .iter()
                    .map(|(v, x)| format!("{v}={x}"))
                    .collect();
                println!("witness: {}", values.join(", "));
            }
        }
        Verdict::Unknown(reason) => println!("reason: {reason}"),
    }
    println!("engine: {}", options.engine);
    print!("{}", outcome.stats);

    if let Some(path) = stats_json {
        if let Err(e) = fs::write(path, stats_document(&outcome).to_string()) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT);
        }
    }
    ExitCode::from(match outcome.verdict {
        Verdict::Safe => EXIT_SAFE,
        Verdict::Unsafe { .. } => EXIT_UNSAFE,
        Verdict::Unknown(_) => EXIT_UNKNOWN,
    })
}

fn stats_document(outcome: &Outcome) -> serde_json::Value {
    let mut doc = json!({
        "verdict": outcome.verdict.label(),
        "iterations": outcome.stats.iterations,
        "times_ms": outcome.stats.times_ms,
        "automata": outcome.stats.per_iteration,
    });
    match &outcome.verdict {
        Verdict::Unsafe { trace, .. } => doc["trace"] = json!(trace.to_string()),
        Verdict::Unknown(reason) => doc["reason"] = json!(reason.to_string()),
        Verdict::Safe => {}
    }
    doc
}

fn dump(dir: &Path, i: usize, current: &Program, step: &Step) -> std::io::Result<()> {
    let file = |suffix: &str| dir.join(format!("iter{i}.{suffix}"));
    fs::write(file("chc"), current.to_string())?;
    let model = match step {
        Step::Safe { model } | Step::Unsafe { model, .. } | Step::Refined { model, .. } => model,
    };
    fs::write(file("model"), model.to_string())?;
    if let Step::Refined {
        remover,
        difference,
        refined,
        ..
    } = step
    {
        fs::write(file("remover.fta"), remover.to_string())?;
        fs::write(file("difference.fta"), difference.to_string())?;
        fs::write(file("refined.chc"), refined.program.to_string())?;
        fs::write(file("refined.map"), refined.side_map())?;
    }
    Ok(())
}
