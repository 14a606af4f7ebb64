mod config;
mod error;
mod selftest;

use clap::{Args, Parser, Subcommand};
use config::{CliConfig, OutputFormat};
use error::CliError;
use fpengine::engine::Engine;
use fpengine::fpcore::rom_generate;
use fpengine::isa::{parse_program, Program};
use fpengine::stats::{Outcome, RunReport};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fpengine", version, about = "Cycle-level out-of-order FP engine model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trace.
    Run(RunArgs),
    /// Run every `.trace` file in a directory.
    Batch(BatchArgs),
    /// Compare the arithmetic datapaths against the reference.
    Selftest {
        /// Random operand sets per rounding mode.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print the reciprocal seed table.
    RomDump {
        #[arg(long, default_value = "text")]
        format: OutputFormat,
    },
}

/// Settings shared by `run` and `batch`. Each overrides the config file.
#[derive(Args)]
struct EngineArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Engine variant: v1 or v2.
    #[arg(long)]
    engine: Option<String>,
    /// Block Mapping Table: on or off.
    #[arg(long)]
    bmt: Option<String>,
    /// Register file model: reference, xor or lvt.
    #[arg(long)]
    regfile: Option<String>,
    /// Initial rounding mode: RN, RZ, RP or RM.
    #[arg(long)]
    rounding: Option<String>,
    /// Flush subnormal results to zero: on or off.
    #[arg(long)]
    flush: Option<String>,
    /// Unit latency, e.g. `--latency div=20`. Repeatable.
    #[arg(long, value_name = "UNIT=CYCLES")]
    latency: Vec<String>,
    #[arg(long)]
    broadcast_lead: Option<String>,
    #[arg(long)]
    load_broadcast_lead: Option<String>,
    /// Cycle budget.
    #[arg(long)]
    max_cycles: Option<String>,
    /// Output format: text or csv.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Compare stores against the trace's EXPECT footer.
    #[arg(long)]
    golden: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Per-cycle JSON-lines log.
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct BatchArgs {
    /// Directory of traces.
    #[arg(long)]
    dir: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    engine: EngineArgs,
}

impl EngineArgs {
    fn resolve(&self) -> Result<CliConfig, CliError> {
        let mut config = CliConfig::default();
        if let Some(path) = &self.config {
            config.load(path)?;
        }
        let here = Path::new("");
        let flags = [
            ("engine", &self.engine),
            ("bmt", &self.bmt),
            ("regfile", &self.regfile),
            ("rounding", &self.rounding),
            ("flush", &self.flush),
            ("broadcast_lead", &self.broadcast_lead),
            ("load_broadcast_lead", &self.load_broadcast_lead),
            ("max_cycles", &self.max_cycles),
            ("format", &self.format),
            ("seed", &self.seed),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v, here).map_err(|e| CliError::Config(format!("--{}: {e}", key.replace('_', "-"))))?;
            }
        }
        for spec in &self.latency {
            let (unit, cycles) = spec
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--latency: expected UNIT=CYCLES, got `{spec}`")))?;
            config
                .set(&format!("latency.{}", unit.trim()), cycles.trim(), here)
                .map_err(|e| CliError::Config(format!("--latency: {e}")))?;
        }
        Ok(config)
    }
}

fn load_trace(path: &Path) -> Result<Program, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    parse_program(&text).map_err(|source| CliError::Trace { path: path.into(), source })
}

struct RunOutput {
    report: RunReport,
    /// Golden comparison failure, when requested.
    golden: Option<String>,
}

fn simulate(config: &CliConfig, path: &Path, golden: bool) -> Result<RunOutput, CliError> {
    let program = load_trace(path)?;
    if golden && program.expected.is_empty() {
        return Err(CliError::Config(format!("{}: --golden needs EXPECT lines in the trace", path.display())));
    }
    let engine_err = |source| CliError::Engine { path: path.into(), source };
    let report = Engine::new(config.engine_config(), &program).and_then(|mut e| e.run()).map_err(engine_err)?;
    if let Some(log) = &config.log {
        let mut text = String::new();
        for rec in &report.cycle_log {
            let _ = writeln!(text, "{}", rec.to_json_line());
        }
        std::fs::write(log, text).map_err(|source| CliError::Io { path: log.clone(), source })?;
    }
    let golden = if golden {
        report.check_expected(&program).err().map(|bad| {
            let show =
                |c: Option<fpengine::stats::Capture>| c.map_or("none".into(), |c| format!("{} {}", c.reg, c.value));
            bad.iter()
                .map(|m| {
                    format!(
                        "{}: store[{}] expected {}, got {}",
                        path.display(),
                        m.index,
                        show(m.expected),
                        show(m.actual)
                    )
                })
                .collect::<Vec<_>>()
                .join("\n")
        })
    } else {
        None
    };
    Ok(RunOutput { report, golden })
}

/// A trap still produces a report; it surfaces afterwards as an error.
fn outcome_error(path: &Path, report: &RunReport) -> Option<CliError> {
    match &report.outcome {
        Outcome::Completed => None,
        Outcome::Trapped { inst, cycle, cause } => {
            Some(CliError::Trapped { path: path.into(), inst: *inst, cycle: *cycle, cause: cause.clone() })
        }
    }
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let mut config = args.engine.resolve()?;
    if let Some(t) = args.trace {
        config.trace = Some(t);
    }
    if let Some(l) = args.log {
        config.log = Some(l);
    }
    let path = config.trace.clone().ok_or_else(|| CliError::Config("no trace given (--trace or `trace =`)".into()))?;
    let out = simulate(&config, &path, args.engine.golden)?;
    match config.format {
        OutputFormat::Text => print!("{}", out.report.to_text()),
        OutputFormat::Csv => println!("{}\n{}", RunReport::csv_header(), out.report.to_csv_row()),
    }
    if let Some(e) = outcome_error(&path, &out.report) {
        return Err(e);
    }
    match out.golden {
        Some(msg) => Err(CliError::Golden(msg)),
        None => Ok(()),
    }
}

fn trace_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |source| CliError::Io { path: dir.into(), source };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "trace") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Runs every trace; output keeps file order whatever the worker count.
/// The exit status is the most severe of the individual runs.
fn batch(args: BatchArgs) -> Result<(), CliError> {
    let config = args.engine.resolve()?;
    if config.log.is_some() {
        return Err(CliError::Config("a per-cycle log applies to single runs only".into()));
    }
    let files = trace_files(&args.dir)?;
    let jobs = args.jobs.clamp(1, files.len().max(1));
    let mut results: Vec<Option<Result<RunOutput, CliError>>> = files.iter().map(|_| None).collect();
    std::thread::scope(|scope| {
        for (w, chunk) in results.chunks_mut(files.len().div_ceil(jobs).max(1)).enumerate() {
            let start = w * files.len().div_ceil(jobs).max(1);
            let (files, config, golden) = (&files, &config, args.engine.golden);
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(simulate(config, &files[start + i], golden));
                }
            });
        }
    });

    let mut out = String::new();
    if config.format == OutputFormat::Csv {
        let _ = writeln!(out, "trace,{},golden", RunReport::csv_header());
    }
    let mut worst: Option<CliError> = None;
    for (path, result) in files.iter().zip(results) {
        let name = path.file_name().unwrap_or_default().to_string_lossy();
        let err = match result.expect("every trace ran") {
            Ok(run) => {
                let golden = match (&run.golden, args.engine.golden) {
                    (_, false) => "",
                    (None, true) => "ok",
                    (Some(_), true) => "mismatch",
                };
                match config.format {
                    OutputFormat::Text => {
                        let _ = writeln!(out, "== {name} ==\n{}", run.report.to_text());
                    }
                    OutputFormat::Csv => {
                        let _ = writeln!(out, "{name},{},{golden}", run.report.to_csv_row());
                    }
                }
                outcome_error(path, &run.report).or(run.golden.map(CliError::Golden))
            }
            Err(e) => Some(e),
        };
        if let Some(e) = err {
            eprintln!("error: {e}");
            if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                worst = Some(e);
            }
        }
    }
    print!("{out}");
    worst.map_or(Ok(()), Err)
}

fn rom_dump(format: OutputFormat) {
    let mut out = String::new();
    if format == OutputFormat::Csv {
        out.push_str("index,value\n");
    }
    for (i, v) in rom_generate().iter().enumerate() {
        match format {
            OutputFormat::Text => {
                let _ = writeln!(out, "{i:3} 0x{v:04X}");
            }
            OutputFormat::Csv => {
                let _ = writeln!(out, "{i},0x{v:04X}");
            }
        }
    }
    print!("{out}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Batch reports each failure as it goes.
    let reported = matches!(cli.command, Command::Batch(_));
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Batch(args) => batch(args),
        Command::Selftest { samples, seed } => {
            let report = selftest::run(samples, seed);
            print!("{}", report.text);
            if report.failures == 0 {
                Ok(())
            } else {
                Err(CliError::SelfCheck(report.failures))
            }
        }
        Command::RomDump { format } => {
            rom_dump(format);
            Ok(())
        }
    };
    let _ = std::io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !reported {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
