//! A nonlinear monotone operator supplied as a closure: the gradient of
//! `sum_j w (e^{x_j} - x_j) - 0.3 x_j` with a weight `w` per atom.

use std::sync::Arc;

use msvi::{
    pc_admm, ConvexSet, Filtration, MonotoneOperator, Msvi, PcAdmmParams, PointwiseMap, PointwiseSet, SampleSpace,
    SetProduct,
};

fn main() -> msvi::Result<()> {
    let m = 4;
    let space = Arc::new(SampleSpace::uniform(m)?);
    let filt = Filtration::two_stage(Arc::clone(&space), 1, 1)?;
    let sets = PointwiseSet::uniform(
        Arc::clone(&space),
        SetProduct::new(vec![
            ConvexSet::cube(1, -1.0, 1.0)?,
            ConvexSet::halfspace(vec![1.0], 0.25)?,
        ])?,
    )?;
    // gradient w_j (e^{x_j} - 1); Lipschitz on the box x <= 1 is at most max w * e
    let weights = [1.0, 2.0, 0.5, 1.5];
    let op = PointwiseMap::new(Arc::clone(&space), 2, 2.0 * std::f64::consts::E, move |atom, x, out| {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = weights[atom] * (xi.exp() - 1.0) - 0.3;
        }
    })?;
    let problem = Msvi::new(&op, &sets, &filt)?;
    let params = PcAdmmParams {
        eps: 1e-9,
        ..PcAdmmParams::for_lipschitz(op.lipschitz(), PcAdmmParams::DEFAULT_BETA_SCALE)
    };
    let report = pc_admm::solve(&problem, &params, &pc_admm::default_start(&problem)?)?;
    println!("{:?} after {} iterations", report.status, report.iterations);
    for (i, row) in report.certificate.y.rows().enumerate() {
        println!("atom {i}: x0 = {:+.6}, x1 = {:+.6}", row[0], row[1]);
    }
    Ok(())
}
