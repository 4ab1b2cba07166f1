//! `dspc`: build, run and benchmark DSP DSL programs.

mod inputs;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dspc_core::bench::{bench_source, BenchConfig};
use dspc_core::corpus::{find_app, Annotations};
use dspc_core::frontend::{ast_to_text, tokenize};
use dspc_core::graph::graph_to_text;
use dspc_core::lowering::{program_to_text, ExecCounters};
use dspc_core::pipeline::{self, compile, PipelineError};
use dspc_core::rewrite::{all_patterns, parse_pattern_list, PatternSet};

use inputs::{Binding, Bindings};

const EXIT_USAGE: u8 = 1;
const EXIT_BENCH: u8 = 5;

#[derive(Parser)]
#[command(
    name = "dspc",
    version,
    about = "Compiler for the DSP signal-processing DSL"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline up to a stage and print its dump.
    Build(Options),
    /// Execute the program through the loop IR and print its outputs.
    Run(Options),
    /// Compare --opt=none against --opt=dsp on identical seeded inputs.
    Bench(Options),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Tokens,
    Ast,
    Dsp,
    DspOpt,
    Loop,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Opt {
    None,
    Dsp,
}

#[derive(Args)]
struct Options {
    /// A .dsp file, or the name of a bundled app (e.g. EnergyOfSignal).
    source: String,
    #[arg(long, value_enum, default_value = "dsp")]
    emit: Emit,
    #[arg(long, value_enum, default_value = "dsp")]
    opt: Opt,
    /// Comma-separated pattern labels or names, e.g. `1,2,C3a`.
    #[arg(long, value_name = "LIST")]
    patterns: Option<String>,
    /// Bind an input to a JSON array of numbers.
    #[arg(long = "input", value_name = "NAME=FILE")]
    inputs: Vec<String>,
    /// Bind an input to N samples of seeded noise.
    #[arg(long = "synth", value_name = "NAME=N[,SEED]")]
    synths: Vec<String>,
    /// Base seed for inputs synthesized without an explicit seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Append the execution counters as JSON.
    #[arg(long)]
    counters: bool,
    /// Also write the result as JSON to this file.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Print only element `i` of each output.
    #[arg(long, value_name = "I")]
    print_index: Option<usize>,
    /// Wall-time repetitions for bench.
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
}

enum Failure {
    Usage(String),
    Pipeline(PipelineError),
    Bench,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::Pipeline(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

struct Source {
    name: String,
    text: String,
}

fn load_source(key: &str) -> Result<Source, Failure> {
    let path = Path::new(key);
    if path.exists() {
        let text =
            fs::read_to_string(path).map_err(|e| usage(format!("cannot read {key}: {e}")))?;
        let name = path
            .file_stem()
            .map_or(key.to_string(), |s| s.to_string_lossy().into_owned());
        return Ok(Source { name, text });
    }
    match find_app(key) {
        Some(app) => Ok(Source {
            name: app.name.to_string(),
            text: app.source.to_string(),
        }),
        None => Err(usage(format!("no such file or bundled app: {key}"))),
    }
}

impl Options {
    fn patterns(&self) -> Result<Option<PatternSet>, Failure> {
        let list = match &self.patterns {
            Some(list) => Some(parse_pattern_list(list).map_err(|e| usage(e.to_string()))?),
            None => None,
        };
        match (self.opt, list) {
            (Opt::None, Some(_)) => Err(usage("--patterns needs --opt=dsp")),
            (Opt::None, None) => Ok(None),
            (Opt::Dsp, list) => Ok(Some(list.unwrap_or_else(all_patterns))),
        }
    }

    fn bindings(&self, source: &str) -> Result<Bindings, Failure> {
        let ann = Annotations::parse(source).map_err(usage)?;
        let mut b = Bindings::new(self.seed, &ann);
        for spec in &self.synths {
            b.add_synth(spec).map_err(usage)?;
        }
        for spec in &self.inputs {
            b.add_file(spec).map_err(usage)?;
        }
        Ok(b)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct BuildJson<'a> {
    emit: &'a str,
    text: &'a str,
}

fn cmd_build(opts: &Options) -> Result<(), Failure> {
    if opts.emit == Emit::DspOpt && opts.opt == Opt::None {
        return Err(usage("--emit=dsp-opt needs --opt=dsp"));
    }
    let patterns = opts.patterns()?;
    let src = load_source(&opts.source)?;
    let (stage, text) = match opts.emit {
        Emit::Tokens => {
            let tokens = tokenize(&src.text).map_err(PipelineError::from)?;
            let lines: String = tokens
                .iter()
                .map(|t| format!("{} {} {}\n", t.span, t.kind, t.text))
                .collect();
            ("tokens", lines)
        }
        Emit::Ast => ("ast", ast_to_text(&pipeline::parse(&src.text)?)),
        Emit::Dsp => {
            let ast = pipeline::parse(&src.text)?;
            let graph = pipeline::build(&ast, None)?;
            let bindings = opts.bindings(&src.text)?;
            // Shapes are shown when every input has a length.
            let graph = match bindings.lengths_for(&graph) {
                Ok(lengths) => pipeline::build(&ast, Some(&lengths))?,
                Err(_) => graph,
            };
            ("dsp", graph_to_text(&graph))
        }
        Emit::DspOpt | Emit::Loop => {
            let ast = pipeline::parse(&src.text)?;
            let graph = pipeline::build(&ast, None)?;
            let lengths = opts
                .bindings(&src.text)?
                .lengths_for(&graph)
                .map_err(usage)?;
            let c = compile(&src.text, &lengths, patterns.as_ref())?;
            if opts.emit == Emit::DspOpt {
                ("dsp-opt", graph_to_text(&c.optimized))
            } else {
                ("loop", program_to_text(&c.program))
            }
        }
    };
    print!("{text}");
    if let Some(path) = &opts.json {
        write_json(
            path,
            &BuildJson {
                emit: stage,
                text: &text,
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RunJson {
    source: String,
    opt: &'static str,
    fired: Vec<String>,
    outputs: Vec<Vec<f64>>,
    counters: ExecCounters,
}

fn cmd_run(opts: &Options) -> Result<(), Failure> {
    let patterns = opts.patterns()?;
    let src = load_source(&opts.source)?;
    let graph = pipeline::build(&pipeline::parse(&src.text)?, None)?;
    let bindings = opts.bindings(&src.text)?;
    let lengths = bindings.lengths_for(&graph).map_err(usage)?;
    let c = compile(&src.text, &lengths, patterns.as_ref())?;
    let tensors = bindings.tensors(&c.graph).map_err(usage)?;
    let exec = c.run(&tensors)?;

    let outputs: Vec<Vec<f64>> = exec.outputs.iter().map(|t| t.values().to_vec()).collect();
    for out in &outputs {
        match opts.print_index {
            Some(i) => match out.get(i) {
                Some(v) => println!("[{i}] = {}", serde_json::to_string(v).expect("finite")),
                None => {
                    return Err(usage(format!(
                        "--print-index {i} is past an output of length {}",
                        out.len()
                    )))
                }
            },
            None => println!("{}", serde_json::to_string(out).expect("finite")),
        }
    }
    if opts.counters {
        println!(
            "{}",
            serde_json::to_string(&exec.counters).expect("counters serialize")
        );
    }
    if let Some(path) = &opts.json {
        let fired = c
            .stats
            .as_ref()
            .map(|s| s.fired().iter().map(|p| p.label().to_string()).collect())
            .unwrap_or_default();
        let report = RunJson {
            source: src.name,
            opt: if patterns.is_some() { "dsp" } else { "none" },
            fired,
            outputs,
            counters: exec.counters,
        };
        write_json(path, &report)?;
    }
    Ok(())
}

fn cmd_bench(opts: &Options) -> Result<(), Failure> {
    let src = load_source(&opts.source)?;
    let mut config = BenchConfig {
        seed: opts.seed,
        repetitions: opts.repetitions.max(1),
        ..BenchConfig::default()
    };
    if let Some(p) = opts.patterns()? {
        config.patterns = p;
    }
    if !opts.inputs.is_empty() {
        return Err(usage("bench synthesizes its inputs; use --synth"));
    }
    for spec in &opts.synths {
        match inputs::parse_synth(spec).map_err(usage)? {
            Binding::Synth { name, len, seed } => {
                config.lengths.insert(name, len);
                if let Some(s) = seed {
                    config.seed = s;
                }
            }
            Binding::File { .. } => unreachable!(),
        }
    }
    let report = bench_source(&src.text, &src.name, &config)?;
    print!("{}", report.to_table());
    if opts.counters {
        println!(
            "{}",
            serde_json::to_string(&report.none).expect("counters serialize")
        );
        println!(
            "{}",
            serde_json::to_string(&report.dsp).expect("counters serialize")
        );
    }
    if let Some(path) = &opts.json {
        write_json(path, &report)?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Bench)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Build(o) => cmd_build(o),
        Command::Run(o) => cmd_run(o),
        Command::Bench(o) => cmd_bench(o),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Pipeline(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Bench) => {
            eprintln!("error: bench assertions failed");
            ExitCode::from(EXIT_BENCH)
        }
    }
}
