//! Conditional expectations and the projections onto the nonanticipative
//! subspace and its complement for a three-period tree.

use std::sync::Arc;

use msvi::{conditional_expectation, l2_inner, Filtration, RandomVector, SampleSpace};

fn main() -> msvi::Result<()> {
    let space = Arc::new(SampleSpace::new(vec![0.1, 0.2, 0.3, 0.4])?);
    // the first coin is seen after period 0, the second after period 1
    let first = vec!['H', 'H', 'T', 'T'];
    let second = vec!['H', 'T', 'H', 'T'];
    let filt = Filtration::from_signals(Arc::clone(&space), &[first, second], vec![1, 1, 1])?;
    for (t, stage) in filt.stages().iter().enumerate() {
        println!("stage {t}: cells {:?}", stage.cells());
    }

    let x = RandomVector::from_rows(
        Arc::clone(&space),
        &[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![3.0, 6.0, 9.0], vec![4.0, 8.0, 12.0]],
        filt.stage_dims().to_vec(),
    )?;
    let coarse = conditional_expectation(&x, &filt.stages()[1])?;
    println!("E[x | first coin] = {:?}", coarse.to_rows());

    let pn = filt.project_nonanticipativity(&x)?;
    let pm = filt.project_complement(&x)?;
    println!("P_N x = {:?}", pn.to_rows());
    println!("P_M x = {:?}", pm.to_rows());
    println!("<P_N x, P_M x> = {:.2e}", l2_inner(&pn, &pm)?);
    println!("distance of x to N = {:.4}", filt.nonanticipativity_gap(&x)?);
    Ok(())
}
