use std::io;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use semstr::harness::{self, exit, BugArgs, CtsArgs, CtsMode, Globals, LocalArgs, SolveArgs};

#[derive(Parser)]
#[command(name = "sas", version, about = "Stable sets of assignments and complete test sets")]
struct Cli {
    /// Seed for mutants, random tests and sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Maximum members of a single stable set.
    #[arg(long, global = true)]
    ssa_cap: Option<usize>,
    /// Wall-clock limit per solve, in seconds.
    #[arg(long, global = true)]
    time_cap: Option<f64>,
    /// Worker threads for test evaluation and per-bug runs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Also write the report records as CSV to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a DIMACS formula; `c keep` lists the keep set.
    /// Exit 10 SAT, 20 UNSAT, 30 on caps.
    Solve {
        cnf: PathBuf,
        /// Seed decision order and centers with --seed.
        #[arg(long)]
        randomize: bool,
        #[arg(long)]
        h_out: Option<PathBuf>,
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Verify a certificate against a DIMACS clause set. Exit 0 valid, 1 invalid.
    CheckCert { h: PathBuf, cert: PathBuf },
    /// Complete test set for a circuit whose output should be constant 0.
    Cts {
        /// Native circuit, .aag file, or gen:INPUTS:GATES:FANIN:SEED.
        circuit: String,
        /// Projection signals: `inputs`, `all` or a name list.
        #[arg(long, conflicts_with = "partition")]
        project: Option<String>,
        /// Piecewise blocks: `even:K`, `singletons` or `x1,x2|x3`.
        #[arg(long)]
        partition: Option<String>,
        /// Tests drawn in piecewise mode.
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Seeded mutants: CTS tests versus random tests.
    Bugs {
        circuit: String,
        #[arg(long, default_value_t = 10)]
        bugs: usize,
        #[arg(long, default_value_t = 1)]
        strategy: u8,
        #[arg(long)]
        partition: Option<String>,
        /// Tests per method; defaults to the CTS size.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 1)]
        random_repeats: usize,
    },
    /// Corner cases: AND the output with fresh inputs and count hits.
    Corners {
        circuit: String,
        #[arg(long, default_value_t = 6)]
        and_extra: usize,
        #[arg(long, default_value_t = 10_000)]
        random_budget: usize,
    },
    /// Check a clause over the outputs under input constraints.
    LocalProp {
        circuit: String,
        /// One clause of output names, `-` negates.
        clause: PathBuf,
        /// Constraint clauses over the inputs.
        invariant: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Uniform random tests. Exit 40 if one drives the output to 1.
    Random {
        circuit: String,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
    },
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().context("configuring the thread pool")?;
    }
    let time_cap = match cli.time_cap {
        Some(s) => Some(Duration::try_from_secs_f64(s).context("--time-cap")?),
        None => None,
    };
    let g = Globals { seed: cli.seed, ssa_cap: cli.ssa_cap, time_cap, report: cli.report };
    let out = &mut io::stdout().lock();
    let code = match cli.cmd {
        Cmd::Solve { cnf, randomize, h_out, cert_out } => {
            harness::cmd_solve(&g, &SolveArgs { cnf, randomize, h_out, cert_out }, out)?
        }
        Cmd::CheckCert { h, cert } => harness::cmd_check_cert(&g, &h, &cert, out)?,
        Cmd::Cts { circuit, project, partition, budget, out_dir } => {
            let mode = match partition {
                Some(spec) => CtsMode::Partition { spec, budget },
                None => CtsMode::Project(project.unwrap_or_else(|| "inputs".into())),
            };
            harness::cmd_cts(&g, &CtsArgs { circuit, mode, out_dir }, out)?
        }
        Cmd::Bugs { circuit, bugs, strategy, partition, budget, random_repeats } => {
            harness::cmd_bugs(&g, &BugArgs { circuit, bugs, strategy, partition, budget, random_repeats }, out)?
        }
        Cmd::Corners { circuit, and_extra, random_budget } => {
            harness::cmd_corners(&g, &circuit, and_extra, random_budget, out)?
        }
        Cmd::LocalProp { circuit, clause, invariant, out_dir } => {
            harness::cmd_local_property(&g, &LocalArgs { circuit, clause, invariant, out_dir }, out)?
        }
        Cmd::Random { circuit, budget } => harness::cmd_random(&g, &circuit, budget, out)?,
    };
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::ERROR as u8)
        }
    }
}
