#![allow(dead_code)]

use std::sync::Arc;

use msvi::{Filtration, RandomVector, SampleSpace};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn random_space<R: Rng>(rng: &mut R, m: usize) -> Arc<SampleSpace> {
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    Arc::new(SampleSpace::new(w.iter().map(|x| x / total).collect()).unwrap())
}

/// Random refining filtration: each later stage splits cells by a random label.
pub fn random_filtration<R: Rng>(rng: &mut R, space: Arc<SampleSpace>, max_stages: usize, max_dim: usize) -> Filtration {
    let m = space.atom_count();
    let stages = rng.gen_range(1..=max_stages);
    let signals: Vec<Vec<u8>> = (1..stages)
        .map(|_| {
            let k = rng.gen_range(1..=3u8);
            (0..m).map(|_| rng.gen_range(0..k)).collect()
        })
        .collect();
    let dims = (0..stages).map(|_| rng.gen_range(1..=max_dim)).collect();
    Filtration::from_signals(space, &signals, dims).unwrap()
}

pub fn random_vector<R: Rng>(rng: &mut R, filt: &Filtration, scale: f64) -> RandomVector {
    let m = filt.space().atom_count();
    let values = (0..m * filt.dim()).map(|_| rng.gen_range(-scale..scale)).collect();
    RandomVector::from_flat(Arc::clone(filt.space()), values, filt.stage_dims().to_vec()).unwrap()
}

/// Weighted least-squares projection onto the span of the indicator basis of
/// the nonanticipative subspace, solved by Householder QR.
pub fn brute_force_projection(filt: &Filtration, x: &RandomVector) -> Vec<f64> {
    let m = filt.space().atom_count();
    let n = filt.dim();
    let p = filt.space().probabilities();
    let mut columns: Vec<DVector<f64>> = Vec::new();
    let mut offset = 0;
    for (stage, part) in filt.stages().iter().enumerate() {
        let width = filt.stage_dims()[stage];
        for cell in part.cells() {
            for j in 0..width {
                let mut col = DVector::zeros(m * n);
                for &atom in cell {
                    col[atom * n + offset + j] = 1.0;
                }
                columns.push(col);
            }
        }
        offset += width;
    }
    let basis = DMatrix::from_columns(&columns);
    let sqrt_w = DVector::from_iterator(m * n, (0..m * n).map(|k| p[k / n].sqrt()));
    let a = DMatrix::from_fn(m * n, basis.ncols(), |r, c| sqrt_w[r] * basis[(r, c)]);
    let rhs = DVector::from_iterator(m * n, (0..m * n).map(|k| sqrt_w[k] * x.values()[k]));
    let qr = a.qr();
    let qtb = qr.q().transpose() * rhs;
    let coeffs = qr.r().solve_upper_triangular(&qtb).unwrap();
    (&basis * coeffs).iter().copied().collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
