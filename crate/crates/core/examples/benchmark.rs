//! Repeated trials of both solvers with CSV output, the same protocol the
//! `msvi bench` command runs.

use msvi::bench::{self, ProblemSource, RunConfig, SolverSettings};
use msvi::{Algorithm, GeneratorSpec};

fn main() -> msvi::Result<()> {
    let out = std::env::temp_dir().join("msvi-bench");
    let config = RunConfig {
        source: ProblemSource::Generator(GeneratorSpec::RandomAffine {
            m: 10,
            n0: 5,
            n1: 5,
            seed: 0,
        }),
        algorithms: vec![Algorithm::PcAdmm, Algorithm::Pha],
        settings: SolverSettings {
            eps: 1e-5,
            ..SolverSettings::default()
        },
        trials: 10,
        out_dir: Some(out.clone()),
    };
    let summary = bench::run(&config)?;
    print!("{}", summary.summary_csv());
    println!("all converged: {}", summary.all_converged());
    println!("traces in {}", out.display());
    Ok(())
}
