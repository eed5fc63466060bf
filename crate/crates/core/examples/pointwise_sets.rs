//! Closed-form projections onto boxes, balls and halfspaces, applied atom
//! by atom to a random vector.

use std::sync::Arc;

use msvi::{project_point, ConvexSet, PointwiseSet, RandomVector, SampleSpace, SetProduct};

fn main() -> msvi::Result<()> {
    let cube = ConvexSet::cube(2, -1.0, 1.0)?;
    let ball = ConvexSet::ball(vec![0.0, 0.0], 1.0)?;
    let half = ConvexSet::halfspace(vec![1.0, 1.0], 1.0)?;
    let point = [3.0, 0.5];
    for (name, set) in [("cube", &cube), ("ball", &ball), ("halfspace", &half)] {
        println!("{name:>9}: {:?} -> {:?}", point, project_point(set, &point)?);
    }

    // a different set on each atom, as a product of a ball and a bounded scalar
    let space = Arc::new(SampleSpace::uniform(3)?);
    let products = (0..3)
        .map(|i| {
            SetProduct::new(vec![
                ConvexSet::ball(vec![i as f64, 0.0], 0.5)?,
                ConvexSet::cube(1, 0.0, 1.0)?,
            ])
        })
        .collect::<msvi::Result<Vec<_>>>()?;
    let sets = PointwiseSet::per_atom(Arc::clone(&space), products)?;
    let x = RandomVector::constant(space, &[1.0, 1.0, 2.0], vec![3])?;
    println!("infeasibility before: {:.4}", sets.infeasibility(&x)?);
    let px = sets.project_random_vector(&x)?;
    for (i, row) in px.rows().enumerate() {
        println!("atom {i}: {row:?}");
    }
    println!("infeasibility after: {:.1e}", sets.infeasibility(&px)?);
    Ok(())
}
