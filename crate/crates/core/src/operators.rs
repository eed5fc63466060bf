//! Monotone maps on random vectors, evaluated atom by atom, and the
//! stopping residual used by both solvers.

use std::fmt;
use std::sync::Arc;

use crate::convex_sets::PointwiseSet;
use crate::error::{Error, Result};
use crate::linalg;
use crate::prob_space::{same_space, RandomVector, SampleSpace};

/// Tolerance on the smallest eigenvalue of `sym(M_i)`, relative to `max(1, ||sym(M_i)||)`.
pub const PSD_TOL: f64 = 1e-10;

/// A pointwise monotone, Lipschitz map `F(x)(w) = F_w(x(w))`.
pub trait MonotoneOperator: Send + Sync {
    fn space(&self) -> &Arc<SampleSpace>;

    fn dim(&self) -> usize;

    /// `out = F_atom(x)`.
    fn apply_atom(&self, atom: usize, x: &[f64], out: &mut [f64]);

    /// Global Lipschitz constant `L_F` in the L² norm.
    fn lipschitz(&self) -> f64;

    fn atom_lipschitz(&self, _atom: usize) -> f64 {
        self.lipschitz()
    }

    /// Whether `F_atom` is the gradient of a convex quadratic (symmetric
    /// linear part). Inner solvers may take longer steps when it is.
    fn atom_symmetric(&self, _atom: usize) -> bool {
        false
    }

    fn evaluate(&self, x: &RandomVector) -> Result<RandomVector> {
        let mut out = x.clone();
        self.evaluate_into(x, &mut out)?;
        Ok(out)
    }

    /// Evaluate into a preallocated vector of the same shape as `x`.
    fn evaluate_into(&self, x: &RandomVector, out: &mut RandomVector) -> Result<()> {
        if !same_space(self.space(), x.space()) || x.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "operator of dimension {} applied to random vector of dimension {}",
                self.dim(),
                x.dim()
            )));
        }
        x.check_compatible(out)?;
        let n = self.dim();
        for (atom, (xr, or)) in x
            .values()
            .chunks_exact(n)
            .zip(out.values_mut().chunks_exact_mut(n))
            .enumerate()
        {
            self.apply_atom(atom, xr, or);
        }
        Ok(())
    }
}

/// `F(x)(w_i) = M_i x(w_i) + b_i` with every `sym(M_i)` positive semidefinite.
#[derive(Clone)]
pub struct AffineOperator {
    space: Arc<SampleSpace>,
    dim: usize,
    matrices: Vec<f64>,
    offsets: Vec<f64>,
    atom_lipschitz: Vec<f64>,
    symmetric: Vec<bool>,
    lipschitz: f64,
}

impl AffineOperator {
    /// `matrices` holds `m` row-major `n x n` blocks back to back; `offsets`
    /// holds `m` vectors of length `n`.
    pub fn from_flat(space: Arc<SampleSpace>, dim: usize, matrices: Vec<f64>, offsets: Vec<f64>) -> Result<Self> {
        let m = space.atom_count();
        if dim == 0 {
            return Err(Error::Shape("operator dimension must be positive".into()));
        }
        if matrices.len() != m * dim * dim {
            return Err(Error::Shape(format!(
                "expected {m} matrices of size {dim}x{dim}, got {} entries",
                matrices.len()
            )));
        }
        if offsets.len() != m * dim {
            return Err(Error::Shape(format!(
                "expected {m} offsets of length {dim}, got {} entries",
                offsets.len()
            )));
        }
        if matrices.iter().chain(&offsets).any(|v| !v.is_finite()) {
            return Err(Error::Validation("operator data must be finite".into()));
        }
        let mut atom_lipschitz = Vec::with_capacity(m);
        let mut symmetric = Vec::with_capacity(m);
        for (i, mat) in matrices.chunks_exact(dim * dim).enumerate() {
            let sym = linalg::symmetric_part(mat, dim);
            let eig = linalg::symmetric_eigenvalues(&sym, dim);
            let top = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
            if min < -PSD_TOL * top.max(1.0) {
                return Err(Error::Validation(format!(
                    "matrix of atom {i} is not monotone: sym(M) has eigenvalue {min:e}"
                )));
            }
            let is_sym = linalg::is_symmetric(mat, dim);
            // ||M||_2; equals the top eigenvalue of sym(M) when M is symmetric PSD
            let lip = if is_sym {
                linalg::largest_eigenvalue_psd(&sym, dim)
            } else {
                linalg::largest_eigenvalue_psd(&linalg::gram(mat, dim), dim).sqrt()
            };
            atom_lipschitz.push(lip.max(0.0));
            symmetric.push(is_sym);
        }
        let lipschitz = atom_lipschitz.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            space,
            dim,
            matrices,
            offsets,
            atom_lipschitz,
            symmetric,
            lipschitz,
        })
    }

    /// One `n x n` matrix (as rows) and one offset per atom.
    pub fn from_rows(space: Arc<SampleSpace>, matrices: &[Vec<Vec<f64>>], offsets: &[Vec<f64>]) -> Result<Self> {
        let dim = offsets.first().map_or(0, Vec::len);
        if matrices.len() != offsets.len() {
            return Err(Error::Shape(format!(
                "{} matrices but {} offsets",
                matrices.len(),
                offsets.len()
            )));
        }
        let mut flat_m = Vec::with_capacity(matrices.len() * dim * dim);
        for (i, mat) in matrices.iter().enumerate() {
            if mat.len() != dim || mat.iter().any(|r| r.len() != dim) {
                return Err(Error::Shape(format!("matrix of atom {i} is not {dim}x{dim}")));
            }
            mat.iter().for_each(|r| flat_m.extend_from_slice(r));
        }
        let mut flat_b = Vec::with_capacity(offsets.len() * dim);
        for (i, b) in offsets.iter().enumerate() {
            if b.len() != dim {
                return Err(Error::Shape(format!("offset of atom {i} has length {}", b.len())));
            }
            flat_b.extend_from_slice(b);
        }
        Self::from_flat(space, dim, flat_m, flat_b)
    }

    pub fn matrix(&self, atom: usize) -> &[f64] {
        let s = self.dim * self.dim;
        &self.matrices[atom * s..(atom + 1) * s]
    }

    pub fn offset(&self, atom: usize) -> &[f64] {
        &self.offsets[atom * self.dim..(atom + 1) * self.dim]
    }

    pub fn matrix_rows(&self, atom: usize) -> Vec<Vec<f64>> {
        self.matrix(atom).chunks_exact(self.dim).map(<[f64]>::to_vec).collect()
    }
}

impl PartialEq for AffineOperator {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space
            && self.dim == other.dim
            && self.matrices == other.matrices
            && self.offsets == other.offsets
    }
}

impl fmt::Debug for AffineOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AffineOperator")
            .field("atoms", &self.space.atom_count())
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl MonotoneOperator for AffineOperator {
    fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_atom(&self, atom: usize, x: &[f64], out: &mut [f64]) {
        linalg::mat_vec(self.matrix(atom), self.dim, x, out);
        for (o, b) in out.iter_mut().zip(self.offset(atom)) {
            *o += b;
        }
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn atom_lipschitz(&self, atom: usize) -> f64 {
        self.atom_lipschitz[atom]
    }

    fn atom_symmetric(&self, atom: usize) -> bool {
        self.symmetric[atom]
    }
}

/// `L_F = max_i ||M_i||`, which for symmetric PSD blocks is the largest
/// eigenvalue of `M_i`.
pub fn lipschitz_estimate(op: &AffineOperator) -> f64 {
    op.lipschitz
}

type AtomFn = dyn Fn(usize, &[f64], &mut [f64]) + Send + Sync;

/// A user-supplied pointwise map with a declared Lipschitz constant.
/// Monotonicity is the caller's responsibility.
pub struct PointwiseMap {
    space: Arc<SampleSpace>,
    dim: usize,
    lipschitz: f64,
    f: Box<AtomFn>,
}

impl PointwiseMap {
    pub fn new<F>(space: Arc<SampleSpace>, dim: usize, lipschitz: f64, f: F) -> Result<Self>
    where
        F: Fn(usize, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::Validation(format!("Lipschitz constant {lipschitz} must be nonnegative")));
        }
        Ok(Self {
            space,
            dim,
            lipschitz,
            f: Box::new(f),
        })
    }
}

impl MonotoneOperator for PointwiseMap {
    fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_atom(&self, atom: usize, x: &[f64], out: &mut [f64]) {
        (self.f)(atom, x, out)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Stopping functional
/// `max_i |x_i - Π_{C_i}(x_i - F(x)_i + λ_i)| + sum_i p_i |x_i - y_i|²`.
pub fn msvi_residual(
    op: &dyn MonotoneOperator,
    sets: &PointwiseSet,
    x: &RandomVector,
    y: &RandomVector,
    lam: &RandomVector,
) -> Result<f64> {
    let fx = op.evaluate(x)?;
    residual_with_image(&fx, sets, x, y, lam)
}

/// [`msvi_residual`] given a precomputed `F(x)`.
pub fn residual_with_image(
    fx: &RandomVector,
    sets: &PointwiseSet,
    x: &RandomVector,
    y: &RandomVector,
    lam: &RandomVector,
) -> Result<f64> {
    x.check_compatible(y)?;
    x.check_compatible(lam)?;
    x.check_compatible(fx)?;
    if sets.dim() != x.dim() {
        return Err(Error::Shape(format!(
            "set dimension {} does not match {}",
            sets.dim(),
            x.dim()
        )));
    }
    let n = x.dim();
    let p = x.space().probabilities();
    let mut buf = vec![0.0; n];
    let mut natural = 0.0f64;
    let mut gap = 0.0;
    for atom in 0..x.atom_count() {
        let (xr, yr, lr, fr) = (x.row(atom), y.row(atom), lam.row(atom), fx.row(atom));
        for j in 0..n {
            buf[j] = xr[j] - fr[j] + lr[j];
        }
        sets.product(atom).project_in_place(&mut buf);
        let r: f64 = xr.iter().zip(&buf).map(|(a, b)| (a - b) * (a - b)).sum();
        natural = natural.max(r.sqrt());
        gap += p[atom] * xr.iter().zip(yr).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(natural + gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_sets::{ConvexSet, SetProduct};

    fn one_atom() -> Arc<SampleSpace> {
        Arc::new(SampleSpace::new(vec![1.0]).unwrap())
    }

    #[test]
    fn evaluate_examples() {
        let s = Arc::new(SampleSpace::uniform(2).unwrap());
        let id = AffineOperator::from_rows(
            Arc::clone(&s),
            &vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 2],
            &vec![vec![0.0, 0.0]; 2],
        )
        .unwrap();
        let x = RandomVector::from_flat(Arc::clone(&s), vec![1.0, 2.0, 3.0, 4.0], vec![2]).unwrap();
        assert_eq!(id.evaluate(&x).unwrap(), x);

        let op = AffineOperator::from_rows(one_atom(), &[vec![vec![2.0]]], &[vec![1.0]]).unwrap();
        let x = RandomVector::from_flat(one_atom(), vec![3.0], vec![1]).unwrap();
        assert_eq!(op.evaluate(&x).unwrap().values(), &[7.0]);

        let op = AffineOperator::from_rows(
            Arc::clone(&s),
            &vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 2],
            &[vec![0.5, -1.0], vec![2.0, 3.0]],
        )
        .unwrap();
        let zero = RandomVector::zeros(s, vec![2]).unwrap();
        assert_eq!(op.evaluate(&zero).unwrap().values(), &[0.5, -1.0, 2.0, 3.0]);
    }

    #[test]
    fn evaluate_shape_error() {
        let op = AffineOperator::from_rows(one_atom(), &[vec![vec![2.0]]], &[vec![1.0]]).unwrap();
        let x = RandomVector::zeros(one_atom(), vec![2]).unwrap();
        assert!(matches!(op.evaluate(&x), Err(Error::Shape(_))));
    }

    #[test]
    fn rejects_non_monotone() {
        let err = AffineOperator::from_rows(one_atom(), &[vec![vec![-1.0]]], &[vec![0.0]]);
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn accepts_skew_monotone() {
        let op = AffineOperator::from_rows(
            one_atom(),
            &[vec![vec![0.0, 1.0], vec![-1.0, 0.0]]],
            &[vec![0.0, 0.0]],
        )
        .unwrap();
        // rotation has sym part zero but operator norm one
        assert!((op.lipschitz() - 1.0).abs() < 1e-9);
        assert!(!op.atom_symmetric(0));
    }

    #[test]
    fn lipschitz_examples() {
        let s = Arc::new(SampleSpace::uniform(2).unwrap());
        let zero = AffineOperator::from_rows(Arc::clone(&s), &vec![vec![vec![0.0; 2]; 2]; 2], &vec![vec![0.0; 2]; 2]).unwrap();
        assert_eq!(lipschitz_estimate(&zero), 0.0);
        let diag = AffineOperator::from_rows(
            s,
            &[
                vec![vec![1.0, 0.0], vec![0.0, 3.0]],
                vec![vec![2.0, 0.0], vec![0.0, 2.0]],
            ],
            &vec![vec![0.0; 2]; 2],
        )
        .unwrap();
        assert!((lipschitz_estimate(&diag) - 3.0).abs() < 1e-9);
    }

    fn unit_box() -> PointwiseSet {
        PointwiseSet::uniform(one_atom(), SetProduct::new(vec![ConvexSet::cube(1, -1.0, 1.0).unwrap()]).unwrap()).unwrap()
    }

    #[test]
    fn residual_examples() {
        let id = AffineOperator::from_rows(one_atom(), &[vec![vec![1.0]]], &[vec![0.0]]).unwrap();
        let sets = unit_box();
        let half = RandomVector::from_flat(one_atom(), vec![0.5], vec![1]).unwrap();
        let zero = RandomVector::zeros(one_atom(), vec![1]).unwrap();
        let err = msvi_residual(&id, &sets, &half, &half, &zero).unwrap();
        assert!((err - 0.5).abs() < 1e-15);

        // λ = F(x) at an interior point certifies stationarity
        let lam = id.evaluate(&half).unwrap();
        assert_eq!(msvi_residual(&id, &sets, &half, &half, &lam).unwrap(), 0.0);
        assert_eq!(msvi_residual(&id, &sets, &zero, &zero, &zero).unwrap(), 0.0);
    }

    #[test]
    fn residual_counts_weighted_gap() {
        let s = Arc::new(SampleSpace::new(vec![0.25, 0.75]).unwrap());
        let zero_op = AffineOperator::from_rows(Arc::clone(&s), &vec![vec![vec![0.0]]; 2], &vec![vec![0.0]; 2]).unwrap();
        let sets = PointwiseSet::uniform(Arc::clone(&s), SetProduct::new(vec![ConvexSet::WholeSpace { dim: 1 }]).unwrap()).unwrap();
        let x = RandomVector::from_flat(Arc::clone(&s), vec![0.0, 0.0], vec![1]).unwrap();
        let y = RandomVector::from_flat(Arc::clone(&s), vec![2.0, 1.0], vec![1]).unwrap();
        let lam = RandomVector::zeros(s, vec![1]).unwrap();
        let err = msvi_residual(&zero_op, &sets, &x, &y, &lam).unwrap();
        assert!((err - (0.25 * 4.0 + 0.75)).abs() < 1e-15);
    }

    #[test]
    fn pointwise_map_evaluates_callback() {
        let f = PointwiseMap::new(one_atom(), 1, 3.0, |_, x, out| out[0] = 3.0 * x[0]).unwrap();
        let x = RandomVector::from_flat(one_atom(), vec![2.0], vec![1]).unwrap();
        assert_eq!(f.evaluate(&x).unwrap().values(), &[6.0]);
        assert!(PointwiseMap::new(one_atom(), 1, -1.0, |_, _, _| {}).is_err());
    }
}
