use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use msvi::bench::{self, ProblemSource, RunConfig, SolverSettings};
use msvi::problem_file::{save_generator, save_problem};
use msvi::{Algorithm, Error, GeneratorSpec};

const EXIT_CONFIG: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "msvi", about = "Multistage stochastic VI solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem with one algorithm.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, default_value = "pc-admm")]
        algo: AlgoArg,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output directory for trace and summary CSV files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run both algorithms over a family of seeded instances.
    Bench {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a problem file.
    Gen {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Store the generator reference instead of the expanded instance.
        #[arg(long)]
        reference_only: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    PcAdmm,
    Pha,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    RandomAffine,
    RandomWalk,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem file; overrides the generator flags.
    #[arg(long)]
    problem: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "random-affine")]
    family: Family,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 5)]
    n0: usize,
    #[arg(long, default_value_t = 5)]
    n1: usize,
    /// Periods of the random-walk family.
    #[arg(long, default_value_t = 3)]
    stages: usize,
    /// Coin flips per period of the random-walk family.
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ProblemArgs {
    fn generator(&self) -> GeneratorSpec {
        match self.family {
            Family::RandomAffine => GeneratorSpec::RandomAffine {
                m: self.m,
                n0: self.n0,
                n1: self.n1,
                seed: self.seed,
            },
            Family::RandomWalk => GeneratorSpec::RandomWalk {
                stages: self.stages,
                ell: self.ell,
            },
        }
    }

    fn source(&self) -> ProblemSource {
        match &self.problem {
            Some(path) => ProblemSource::File(path.clone()),
            None => ProblemSource::Generator(self.generator()),
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0.61)]
    alpha: f64,
    #[arg(long, default_value_t = 1.1)]
    beta_scale: f64,
    /// Check descent, feasibility and contraction inequalities every iteration.
    #[arg(long)]
    assert_theory: bool,
}

impl SolverArgs {
    fn settings(&self) -> SolverSettings {
        SolverSettings {
            eps: self.eps,
            max_iter: self.max_iter,
            alpha: self.alpha,
            beta_scale: self.beta_scale,
            assert_theory: self.assert_theory,
            inner_tol: None,
        }
    }
}

fn run_bench(config: RunConfig) -> Result<ExitCode, Error> {
    let summary = bench::run(&config)?;
    print!("{}", summary.summary_csv());
    for row in summary.trials.iter().filter(|r| !r.converged) {
        eprintln!(
            "trial {} ({}) failed: {}",
            row.trial,
            row.algo,
            row.failure.as_deref().unwrap_or("not converged")
        );
    }
    Ok(if summary.all_converged() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NONCONVERGED)
    })
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Solve { problem, algo, solver, out } => {
            let algo = match algo {
                AlgoArg::PcAdmm => Algorithm::PcAdmm,
                AlgoArg::Pha => Algorithm::Pha,
            };
            run_bench(RunConfig {
                source: problem.source(),
                algorithms: vec![algo],
                settings: solver.settings(),
                trials: 1,
                out_dir: out,
            })
        }
        Command::Bench { problem, solver, trials, out } => run_bench(RunConfig {
            source: problem.source(),
            algorithms: vec![Algorithm::PcAdmm, Algorithm::Pha],
            settings: solver.settings(),
            trials,
            out_dir: out,
        }),
        Command::Gen { problem, reference_only, out } => {
            let spec = problem.generator();
            if reference_only {
                save_generator(&spec, &out)?;
            } else {
                save_problem(&spec.generate()?, &out)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
