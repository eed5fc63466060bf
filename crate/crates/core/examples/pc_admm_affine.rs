//! Solve a random two-stage affine problem with the prediction-correction
//! ADMM, checking the descent and contraction inequalities every iteration.

use msvi::bench::{reference_solution, SolverSettings};
use msvi::{gen_random_affine, pc_admm, PcAdmmParams};

fn main() -> msvi::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let inst = gen_random_affine(10, 5, 5, seed)?;
    let problem = inst.msvi();
    let lipschitz = inst.operator_lipschitz();
    println!("m = {}, n = {}, L_F = {lipschitz:.4}", inst.atom_count(), inst.dim());

    let reference = reference_solution(&inst, &SolverSettings::default())?;
    let params = PcAdmmParams {
        eps: 1e-6,
        assert_theory: true,
        reference: Some(reference),
        ..PcAdmmParams::for_lipschitz(lipschitz, PcAdmmParams::DEFAULT_BETA_SCALE)
    };
    println!("alpha = {}, beta = {:.4}, r = {:.4}", params.alpha, params.beta, params.r);
    let start = pc_admm::default_start(&problem)?;
    let report = pc_admm::solve(&problem, &params, &start)?;
    for rec in report.trace.iter().filter(|r| r.iter % 250 == 1) {
        println!("iter {:>5}  Err {:.3e}  |d|_G {:.3e}", rec.iter, rec.err, rec.d_gnorm);
    }
    println!(
        "{:?} after {} iterations, Err = {:.3e}, {:.2} ms",
        report.status,
        report.iterations,
        report.final_err,
        report.solve_time.as_secs_f64() * 1e3
    );
    println!("first-stage decision: {:?}", &report.certificate.y.row(0)[..5]);
    Ok(())
}
