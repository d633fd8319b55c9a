//! Command-line interface: single runs, multi-seed benchmarks, and one-shot
//! genome compilation.
//!
//! Exit codes: `0` success (for `run`/`bench`, a generalizing solution was
//! found), `1` usage or I/O error, `2` the search finished without a
//! solution. Reports are JSON; canonical forms omit wall-clock time so the
//! same seed produces byte-identical output at any worker count
//! (`DAGSMITH_WORKERS` sizes the thread pool).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::bench::{all_problems, find_problem, Problem};
use crate::codegen::emit;
use crate::evolve::{run_evolution, RunConfig, RunReport};
use crate::push::{compile, parse_genome, plushy_to_push};

#[derive(Parser, Debug)]
#[command(
    name = "dagsmith",
    version,
    about = "Evolves type-safe programs for benchmark problems and prints them as source"
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve one problem with one seed and report the outcome.
    Run {
        /// Problem name, as shown by `list`.
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        opts: EvolveOpts,
        /// Directory for the report JSON (and source file when solved).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evolve one problem across consecutive seeds and aggregate the reports.
    Bench {
        #[arg(long)]
        problem: String,
        /// Number of runs; seeds are seed-base, seed-base+1, ...
        #[arg(long)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        #[command(flatten)]
        opts: EvolveOpts,
        /// Directory for the aggregate JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a genome file against a problem and print the program.
    Compile {
        #[arg(long)]
        problem: String,
        /// Genome text, one gene per line.
        #[arg(long)]
        genome: PathBuf,
    },
    /// List the available problems and their signatures.
    List,
}

/// Evolution overrides shared by `run` and `bench`; unset fields keep the
/// defaults in [`RunConfig`].
#[derive(Args, Debug)]
struct EvolveOpts {
    /// Population size.
    #[arg(long)]
    pop: Option<usize>,
    /// Generation limit.
    #[arg(long)]
    gens: Option<usize>,
    /// UMAD addition rate in (0, 1).
    #[arg(long)]
    umad_rate: Option<f64>,
    /// Training cases per run.
    #[arg(long)]
    cases: Option<usize>,
    /// Held-out test cases per run.
    #[arg(long)]
    test_cases: Option<usize>,
    /// Post-run simplification attempts.
    #[arg(long)]
    simplify_steps: Option<usize>,
    /// Per-case error for failed compiles and runtime errors.
    #[arg(long)]
    penalty: Option<f64>,
    /// Evaluation budget in DAG-node visits per case.
    #[arg(long)]
    node_budget: Option<u64>,
}

impl EvolveOpts {
    fn apply(&self, seed: u64) -> RunConfig {
        let mut c = RunConfig { seed, ..RunConfig::default() };
        if let Some(v) = self.pop {
            c.population_size = v;
        }
        if let Some(v) = self.gens {
            c.max_generations = v;
        }
        if let Some(v) = self.umad_rate {
            c.umad_rate = v;
        }
        if let Some(v) = self.cases {
            c.training_cases = v;
        }
        if let Some(v) = self.test_cases {
            c.test_cases = v;
        }
        if let Some(v) = self.simplify_steps {
            c.simplification_steps = v;
        }
        if let Some(v) = self.penalty {
            c.penalty = v;
        }
        if let Some(v) = self.node_budget {
            c.node_budget = v;
        }
        c
    }
}

/// Parses `std::env::args` and executes. Returned code is the process exit
/// status; `main` is a one-line wrapper so integration tests can drive the
/// real binary.
pub fn run_cli() -> ExitCode {
    init_workers();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match cli.cmd {
        Command::Run { problem, seed, opts, out } => cmd_run(&problem, seed, &opts, out),
        Command::Bench { problem, runs, seed_base, opts, out } => {
            cmd_bench(&problem, runs, seed_base, &opts, out)
        }
        Command::Compile { problem, genome } => cmd_compile(&problem, &genome),
        Command::List => cmd_list(),
    }
}

/// `DAGSMITH_WORKERS` pins the rayon pool size; unset keeps rayon's default.
fn init_workers() {
    if let Some(n) = std::env::var("DAGSMITH_WORKERS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn lookup(problem: &str) -> Result<Problem, ExitCode> {
    find_problem(problem).ok_or_else(|| {
        eprintln!("unknown problem `{problem}`; `dagsmith list` shows the choices");
        ExitCode::from(1)
    })
}

fn cmd_run(problem: &str, seed: u64, opts: &EvolveOpts, out: Option<PathBuf>) -> ExitCode {
    let p = match lookup(problem) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let cfg = opts.apply(seed);
    if let Err(e) = cfg.validate() {
        eprintln!("bad configuration: {e}");
        return ExitCode::from(1);
    }
    let report = run_evolution(&p, &cfg);
    print_run_line(&report);
    if let Some(src) = &report.source {
        print!("{src}");
    }
    if let Some(dir) = out {
        if let Err(e) = write_run_files(&dir, &report) {
            eprintln!("write failed: {e}");
            return ExitCode::from(1);
        }
    }
    if report.generalizes {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn print_run_line(r: &RunReport) {
    println!(
        "{} seed={} solved={} generalizes={} generations={} best={} len={}",
        r.problem,
        r.seed,
        r.solved,
        r.generalizes,
        r.generations,
        r.best_total_error,
        r.genome_length.map_or_else(|| "-".into(), |l| l.to_string()),
    );
}

fn write_run_files(dir: &PathBuf, report: &RunReport) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let stem = format!("{}_{}", report.problem, report.seed);
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
    if let Some(src) = &report.source {
        fs::write(dir.join(format!("{stem}.src")), src)?;
    }
    Ok(())
}

fn cmd_bench(
    problem: &str,
    runs: usize,
    seed_base: u64,
    opts: &EvolveOpts,
    out: Option<PathBuf>,
) -> ExitCode {
    let p = match lookup(problem) {
        Ok(p) => p,
        Err(code) => return code,
    };
    if runs == 0 {
        eprintln!("--runs must be positive");
        return ExitCode::from(1);
    }
    let cfg = opts.apply(seed_base);
    if let Err(e) = cfg.validate() {
        eprintln!("bad configuration: {e}");
        return ExitCode::from(1);
    }
    let reports: Vec<RunReport> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let cfg = RunConfig { seed: seed_base + i as u64, ..cfg.clone() };
            run_evolution(&p, &cfg)
        })
        .collect();
    for r in &reports {
        print_run_line(r);
    }
    let solved = reports.iter().filter(|r| r.solved).count();
    let generalized = reports.iter().filter(|r| r.generalizes).count();
    println!("solved {solved}/{runs}, generalized {generalized}/{runs}");
    let aggregate = serde_json::json!({
        "problem": p.name,
        "runs": runs,
        "seed_base": seed_base,
        "solved": solved,
        "generalized": generalized,
        "reports": reports.iter().map(RunReport::canonical).collect::<Vec<_>>(),
    });
    if let Some(dir) = out {
        let write = fs::create_dir_all(&dir).and_then(|()| {
            let path = dir.join(format!("bench_{}.json", p.name));
            let json = serde_json::to_string_pretty(&aggregate).expect("aggregate serializes");
            fs::write(path, json + "\n")
        });
        if let Err(e) = write {
            eprintln!("write failed: {e}");
            return ExitCode::from(1);
        }
    }
    if generalized > 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_compile(problem: &str, genome_path: &PathBuf) -> ExitCode {
    let p = match lookup(problem) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let text = match fs::read_to_string(genome_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", genome_path.display());
            return ExitCode::from(1);
        }
    };
    let reg = p.registry();
    let genome = match parse_genome(&text, &reg) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("genome parse failed: {e}");
            return ExitCode::from(1);
        }
    };
    match compile(&plushy_to_push(&genome), &p.return_type, &reg) {
        Ok(dag) => {
            print!("{}", dag.dump());
            let params: Vec<String> = p.inputs.iter().map(|(n, _)| n.clone()).collect();
            print!("{}", emit(&dag, p.fn_name, &params).text());
            ExitCode::SUCCESS
        }
        Err(_) => {
            // An inexpressible genome is a valid outcome, not an error.
            println!("COMPILE-FAILURE");
            ExitCode::SUCCESS
        }
    }
}

fn cmd_list() -> ExitCode {
    for p in all_problems() {
        let args: Vec<String> = p
            .inputs
            .iter()
            .map(|(n, ty)| format!("{n}: {ty}"))
            .collect();
        println!("{:<28} {}({}) -> {}", p.name, p.fn_name, args.join(", "), p.return_type);
    }
    ExitCode::SUCCESS
}
