use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ogb_core::policies::{PolicyKind, Tuning};
use ogb_core::trace::{gen_adversarial, gen_uniform, gen_zipf};
use ogb_core::Trace;
use ogb_sim::analyze;
use ogb_sim::format::{parse_count, parse_tuning};
use ogb_sim::simulate::{self, path_with, write_outputs, Capacity, SimSpec};
use ogb_sim::sweep::{run_sweep, Grid};
use ogb_sim::traceio::{read_trace_file, write_trace};

#[derive(Parser)]
#[command(name = "ogb", version, about = "Online gradient caching: traces, simulation and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trace in the canonical text format.
    Gen {
        #[command(flatten)]
        gen: GenParams,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one policy and write <out>.summary.json, <out>.series.csv and <out>.occupancy.csv.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = parse_policy, default_value = "ogb")]
        policy: PolicyKind,
        #[command(flatten)]
        run: RunParams,
        /// Seed of the trace generator and of the run's random streams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write <out>.lifetime.csv and <out>.reuse.csv for a trace.
    Analyze {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a grid of configurations in parallel and merge them into <out>.sweep.csv.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_parser = parse_policy, value_delimiter = ',', default_value = "ogb")]
        policy: Vec<PolicyKind>,
        /// Absolute cache sizes; overrides --c-frac.
        #[arg(long, value_delimiter = ',')]
        c: Vec<f64>,
        #[arg(long = "c-frac", value_delimiter = ',', default_value = "0.05")]
        c_frac: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        batch: Vec<u64>,
        #[arg(long, value_parser = parse_tuning, value_delimiter = ',', default_value = "auto")]
        eta: Vec<Tuning>,
        #[arg(long, value_parser = parse_tuning, value_delimiter = ',', default_value = "auto")]
        zeta: Vec<Tuning>,
        /// Runs per configuration, each with its own derived seed.
        #[arg(long, default_value_t = 1)]
        replicates: u32,
        #[arg(long, value_parser = parse_count, default_value = "1e5")]
        window: usize,
        /// Master seed: seeds the trace generator and, mixed with the cell index, every cell.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Adversarial,
    Zipf,
    Uniform,
}

#[derive(Args)]
struct GenParams {
    #[arg(long = "gen", value_enum)]
    kind: GenKind,
    /// Catalog size.
    #[arg(long, value_parser = parse_count)]
    n: usize,
    /// Rounds of the adversarial trace.
    #[arg(long, value_parser = parse_count)]
    rounds: Option<usize>,
    /// Requests of the Zipf and uniform traces.
    #[arg(long, value_parser = parse_count)]
    t: Option<usize>,
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
}

impl GenParams {
    fn generate(&self, seed: u64) -> Result<(Trace, String)> {
        let need = |v: Option<usize>, flag: &str| v.with_context(|| format!("--{flag} is required for this generator"));
        Ok(match self.kind {
            GenKind::Adversarial => {
                let rounds = need(self.rounds, "rounds")?;
                (gen_adversarial(self.n, rounds, seed)?, format!("gen:adversarial:n={}:rounds={rounds}:seed={seed}", self.n))
            }
            GenKind::Zipf => {
                let t = need(self.t, "t")?;
                let desc = format!("gen:zipf:n={}:t={t}:alpha={}:seed={seed}", self.n, self.alpha);
                (gen_zipf(self.n, t, self.alpha, seed)?, desc)
            }
            GenKind::Uniform => {
                let t = need(self.t, "t")?;
                (gen_uniform(self.n, t, seed)?, format!("gen:uniform:n={}:t={t}:seed={seed}", self.n))
            }
        })
    }
}

/// A trace file, or generator parameters.
#[derive(Args)]
struct Source {
    #[arg(long, conflicts_with_all = ["gen", "n", "rounds", "t", "alpha"], required_unless_present = "gen")]
    trace: Option<PathBuf>,
    #[arg(long = "gen", value_enum)]
    gen: Option<GenKind>,
    #[arg(long, value_parser = parse_count, requires = "gen")]
    n: Option<usize>,
    #[arg(long, value_parser = parse_count)]
    rounds: Option<usize>,
    #[arg(long, value_parser = parse_count)]
    t: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
}

impl Source {
    fn load(&self, seed: u64) -> Result<(Trace, String)> {
        if let Some(path) = &self.trace {
            return Ok((read_trace_file(path)?, format!("file:{}", path.display())));
        }
        let (Some(kind), Some(n)) = (self.gen, self.n) else {
            bail!("give --trace, or --gen with --n");
        };
        let params = GenParams { kind, n, rounds: self.rounds, t: self.t, alpha: self.alpha.unwrap_or(0.8) };
        // Same ids and catalog as writing the trace out and reading it back.
        let (trace, desc) = params.generate(seed)?;
        Ok((trace.canonical(), desc))
    }
}

#[derive(Args)]
struct RunParams {
    /// Cache size in items; overrides --c-frac.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long = "c-frac", default_value_t = 0.05)]
    c_frac: f64,
    #[arg(long, default_value_t = 1)]
    batch: u64,
    /// Step size: auto, auto*k or a number.
    #[arg(long, value_parser = parse_tuning, default_value = "auto")]
    eta: Tuning,
    /// FTPL noise: auto, auto*k or a number.
    #[arg(long, value_parser = parse_tuning, default_value = "auto")]
    zeta: Tuning,
    #[arg(long, value_parser = parse_count, default_value = "1e5")]
    window: usize,
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    PolicyKind::parse(s).ok_or_else(|| {
        let names: Vec<&str> = PolicyKind::ALL.iter().map(|k| k.as_str()).collect();
        format!("unknown policy '{s}' (expected one of {})", names.join(", "))
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { gen, seed, out } => {
            let (trace, _) = gen.generate(seed)?;
            match out {
                Some(path) => {
                    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
                    write_trace(&trace, file)?;
                }
                None => write_trace(&trace, io::stdout().lock())?,
            }
        }
        Command::Simulate { source, policy, run, seed, out } => {
            let (trace, desc) = source.load(seed)?;
            let spec = SimSpec {
                policy,
                capacity: run.c.map_or(Capacity::Fraction(run.c_frac), Capacity::Items),
                batch: run.batch,
                eta: run.eta,
                zeta: run.zeta,
                window: run.window,
                seed,
            };
            let result = simulate::simulate(&trace, &desc, &spec)?;
            write_outputs(&out, &result)?;
            let mut stdout = io::stdout().lock();
            simulate::write_summary(&result.summary, &mut stdout)?;
        }
        Command::Analyze { source, seed, out } => {
            let (trace, _) = source.load(seed)?;
            analyze::write_report(&trace, &out)?;
        }
        Command::Sweep { source, policy, c, c_frac, batch, eta, zeta, replicates, window, seed, jobs, out } => {
            let (trace, desc) = source.load(seed)?;
            let capacities = if c.is_empty() {
                c_frac.into_iter().map(Capacity::Fraction).collect()
            } else {
                c.into_iter().map(Capacity::Items).collect()
            };
            let grid = Grid { policies: policy, capacities, batches: batch, etas: eta, zetas: zeta, replicates, window };
            let cells = grid.cells(seed);
            if cells.is_empty() {
                bail!("the grid is empty");
            }
            let outcomes = run_sweep(&trace, &desc, &cells, &out, jobs)?;
            let failed: Vec<_> = outcomes.iter().filter_map(|o| o.result.as_ref().err().map(|e| (o.cell.index, e))).collect();
            let mut stderr = io::stderr().lock();
            for (index, err) in &failed {
                writeln!(stderr, "cell {index} failed: {err}")?;
            }
            writeln!(
                stderr,
                "{} of {} cells succeeded; results in {}",
                outcomes.len() - failed.len(),
                outcomes.len(),
                path_with(&out, ".sweep.csv").display()
            )?;
            if !failed.is_empty() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
