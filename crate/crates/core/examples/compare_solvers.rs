//! Progressive hedging against the prediction-correction ADMM on the same
//! instances: iterations, wall time and the distance between the solutions.

use msvi::bench::{run_solver, SolverSettings};
use msvi::{gen_random_affine, l2_distance, Algorithm};

fn main() -> msvi::Result<()> {
    for eps in [1e-3, 1e-5] {
        let settings = SolverSettings {
            eps,
            ..SolverSettings::default()
        };
        println!("eps = {eps:e}");
        for seed in 0..5 {
            let inst = gen_random_affine(10, 5, 5, seed)?;
            let admm = run_solver(&inst, Algorithm::PcAdmm, &settings)?;
            let pha = run_solver(&inst, Algorithm::Pha, &settings)?;
            println!(
                "  seed {seed}: pc_admm {:>5} it {:>7.3} ms | pha {:>4} it ({:>6} inner) {:>7.3} ms | gap {:.1e}",
                admm.iterations,
                admm.solve_time.as_secs_f64() * 1e3,
                pha.iterations,
                pha.inner_iterations,
                pha.solve_time.as_secs_f64() * 1e3,
                l2_distance(&admm.certificate.x, &pha.certificate.x)?
            );
        }
    }
    Ok(())
}
