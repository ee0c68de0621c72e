use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cwc::acceptance::{self, Options};
use cwc::model::load_scenario;
use cwc::runner::{load_sweep, run_scenario, run_sweep, write_csv};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "cwc", version, about = "Run, sweep and verify computing-with-the-cloud scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario file.
    Run {
        scenario: PathBuf,
        /// Write metrics.csv, result.json and trace.jsonl here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the per-round trace as JSON lines.
        #[arg(long)]
        trace: bool,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Execute every point of a sweep file and emit one CSV row per point.
    Sweep {
        sweep: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Only the small-graph flow oracle.
        #[arg(long)]
        fast: bool,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Also write verify.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Test hook: break the operator's associativity.
        #[arg(long, hide = true)]
        corrupt_operator: bool,
    },
}

/// A failure with its exit code: 2 for bad input documents, 1 otherwise.
struct Failure {
    code: u8,
    body: Value,
}

impl From<cwc::Error> for Failure {
    fn from(e: cwc::Error) -> Self {
        let code = match e.kind() {
            "scenario" | "json" | "invalid_graph" | "unknown_operator" => 2,
            _ => 1,
        };
        let mut body = json!({"error": e.kind(), "message": e.to_string()});
        if let cwc::Error::Scenario { path, .. } = &e {
            body["path"] = json!(path);
        }
        Failure { code, body }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        cwc::Error::Io(e).into()
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        body: json!({"error": "io", "message": format!("{}: {e}", path.display())}),
    })
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(())
}

fn run(scenario: &Path, out: Option<&Path>, trace: bool, seed: Option<u64>) -> Result<(), Failure> {
    let mut sc = load_scenario(&read(scenario)?)?;
    if let Some(seed) = seed {
        sc.seed = seed;
    }
    let id = scenario.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    let output = run_scenario(&sc, id, trace)?;
    let mut csv = Vec::new();
    write_csv(std::slice::from_ref(&output.row), &mut csv)?;
    let result = json!({
        "scenario_id": id,
        "algorithm": output.algorithm,
        "result": output.result,
    });
    let mut lines = String::new();
    for ev in output.trace.iter().flatten() {
        lines.push_str(&ev.to_string());
        lines.push('\n');
    }
    match out {
        Some(dir) => {
            write_file(dir, "metrics.csv", &csv)?;
            write_file(dir, "result.json", serde_json::to_string_pretty(&result).unwrap().as_bytes())?;
            if trace {
                write_file(dir, "trace.jsonl", lines.as_bytes())?;
            }
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(&csv)?;
            if trace {
                // Trace lines go to stderr so stdout stays a clean CSV.
                io::stderr().lock().write_all(lines.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn sweep(path: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<(), Failure> {
    let mut spec = load_sweep(&read(path)?)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let rows = run_sweep(&spec)?;
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv)?;
    match out {
        Some(dir) => write_file(dir, "sweep.csv", &csv)?,
        None => io::stdout().lock().write_all(&csv)?,
    }
    Ok(())
}

fn verify(opts: Options, out: Option<&Path>) -> Result<bool, Failure> {
    let outcomes = acceptance::run(&opts);
    let mut stdout = io::stdout().lock();
    for o in &outcomes {
        writeln!(stdout, "{o}")?;
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    writeln!(stdout, "{passed}/{} criteria passed", outcomes.len())?;
    if let Some(dir) = out {
        let doc = serde_json::to_string_pretty(&outcomes).unwrap();
        write_file(dir, "verify.json", doc.as_bytes())?;
    }
    Ok(passed == outcomes.len())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run {
            scenario,
            out,
            trace,
            seed,
        } => run(scenario, out.as_deref(), *trace, *seed).map(|_| true),
        Command::Sweep { sweep: path, out, seed } => sweep(path, out.as_deref(), *seed).map(|_| true),
        Command::Verify {
            fast,
            seed,
            out,
            corrupt_operator,
        } => verify(
            Options {
                fast: *fast,
                fault: *corrupt_operator,
                seed: *seed,
            },
            out.as_deref(),
        ),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("{}", f.body);
            ExitCode::from(f.code)
        }
    }
}
