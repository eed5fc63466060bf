//! Write an instance to JSON, read it back, and solve the copy.

use msvi::bench::{run_solver, SolverSettings};
use msvi::problem_file::{problem_to_json, save_generator};
use msvi::{gen_random_affine, load_problem, save_problem, Algorithm, GeneratorSpec};

fn main() -> msvi::Result<()> {
    let dir = std::env::temp_dir().join("msvi-problem-files");
    std::fs::create_dir_all(&dir)?;

    let inst = gen_random_affine(3, 1, 2, 7)?;
    let explicit = dir.join("affine.json");
    save_problem(&inst, &explicit)?;
    let loaded = load_problem(&explicit)?;
    println!("round trip exact: {}", loaded == inst);
    println!("{} bytes, starts {}", problem_to_json(&inst)?.len(), &problem_to_json(&inst)?[..60]);

    let spec = GeneratorSpec::RandomWalk { stages: 2, ell: 2 };
    let reference = dir.join("walk.json");
    save_generator(&spec, &reference)?;
    println!("{}", std::fs::read_to_string(&reference)?.trim());
    let walk = load_problem(&reference)?;

    let report = run_solver(&walk, Algorithm::Pha, &SolverSettings::default())?;
    println!("walk via file: {:?} in {} iterations", report.status, report.iterations);
    Ok(())
}
