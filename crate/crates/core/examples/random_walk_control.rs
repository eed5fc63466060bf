//! Discretized stochastic control driven by a coin-flip random walk. The
//! all-ones control is optimal; the solver should find it.

use msvi::problems::{random_walk_atoms, random_walk_cost};
use msvi::{gen_random_walk_socp, l2_distance, pc_admm, PcAdmmParams};

fn main() -> msvi::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>());
    let stages = args.next().and_then(Result::ok).unwrap_or(3);
    let ell = args.next().and_then(Result::ok).unwrap_or(2);

    let inst = gen_random_walk_socp(stages, ell)?;
    println!(
        "{stages} periods, {ell} flips each: {} atoms, {} information cells at the last stage",
        inst.atom_count(),
        inst.filtration.stages().last().map_or(0, |p| p.cells().len())
    );
    let problem = inst.msvi();
    let params = PcAdmmParams {
        eps: 1e-8,
        ..PcAdmmParams::for_lipschitz(inst.operator_lipschitz(), PcAdmmParams::DEFAULT_BETA_SCALE)
    };
    let start = pc_admm::default_start(&problem)?;
    let report = pc_admm::solve(&problem, &params, &start)?;
    let known = inst.known_solution.as_ref().expect("walk instances carry the optimal control");
    let atoms = random_walk_atoms(stages, ell)?;
    println!("iterations: {}", report.iterations);
    println!("||u - 1||   = {:.3e}", l2_distance(&report.certificate.x, known)?);
    println!("cost at u   = {:.3e}", random_walk_cost(&atoms, &report.certificate.y));
    println!("cost at 0   = {:.3e}", random_walk_cost(&atoms, &inst.filtration.zeros()));
    Ok(())
}
