//! Progressive hedging: the implicit scheme that solves a strongly monotone
//! VI at every atom, averages onto `N`, and accumulates the complement part
//! into the multiplier.
//!
//! ```text
//! -F(û)(w) - v(w) - β(û(w) - u(w)) ∈ N_{C(w)}(û(w))   for every atom
//! u⁺ = Π_N(û)
//! v⁺ = v + β Π_M(û)
//! ```

use std::time::Instant;

use crate::convex_sets::SetProduct;
use crate::error::{Error, Result};
use crate::operators::{residual_with_image, MonotoneOperator};
use crate::pc_admm::Triplet;
use crate::prob_space::{l2_norm, RandomVector};
use crate::problems::Msvi;
use crate::report::{Algorithm, IterationRecord, SolverReport, Status};

#[derive(Debug, Clone)]
pub struct PhaParams {
    pub beta: f64,
    pub eps: f64,
    pub inner_tol: f64,
    pub max_iter: usize,
    pub max_inner_iter: usize,
}

impl PhaParams {
    /// `β = beta_scale · L_F` (or `beta_scale` for a zero operator) and
    /// `inner_tol = eps / 10`.
    pub fn for_lipschitz(lipschitz: f64, beta_scale: f64, eps: f64) -> Self {
        let beta = if lipschitz > 0.0 { beta_scale * lipschitz } else { beta_scale };
        Self {
            beta,
            eps,
            inner_tol: eps / 10.0,
            max_iter: 100_000,
            max_inner_iter: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Validation(format!("beta = {} must be positive", self.beta)));
        }
        if !(self.eps > 0.0 && self.inner_tol > 0.0 && self.inner_tol < self.eps) {
            return Err(Error::Validation(format!(
                "need 0 < inner_tol ({}) < eps ({})",
                self.inner_tol, self.eps
            )));
        }
        if self.max_iter == 0 || self.max_inner_iter == 0 {
            return Err(Error::Validation("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

/// A single atom's data for the implicit subproblem.
pub struct AtomVi<'a> {
    /// `out = F_w(x)`.
    pub map: &'a dyn Fn(&[f64], &mut [f64]),
    pub lipschitz: f64,
    /// Symmetric linear part: allows the step `1/(β + L)`.
    pub symmetric: bool,
    pub set: &'a SetProduct,
}

/// Outcome of a pointwise solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseSolution {
    pub point: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Step of the projected fixed-point iteration on a map with strong
/// monotonicity modulus `β` and Lipschitz constant `β + L`.
fn inner_step(beta: f64, lipschitz: f64, symmetric: bool) -> f64 {
    let total = beta + lipschitz;
    if symmetric {
        1.0 / total
    } else {
        beta / (total * total)
    }
}

/// Solve `-F_w(û) - v - β(û - u) ∈ N_C(û)` by
/// `û ← Π_C(û - τ(F_w(û) + v + β(û - u)))`, starting from `warm`, until the
/// fixed-point residual is at most `inner_tol`.
pub fn solve_pointwise_vi(
    atom: &AtomVi<'_>,
    u: &[f64],
    v: &[f64],
    warm: &[f64],
    beta: f64,
    inner_tol: f64,
    max_inner_iter: usize,
) -> std::result::Result<PointwiseSolution, PointwiseSolution> {
    let n = u.len();
    let tau = inner_step(beta, atom.lipschitz, atom.symmetric);
    let mut point = warm.to_vec();
    let mut image = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=max_inner_iter {
        (atom.map)(&point, &mut image);
        for j in 0..n {
            next[j] = point[j] - tau * (image[j] + v[j] + beta * (point[j] - u[j]));
        }
        atom.set.project_in_place(&mut next);
        residual = point
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut point, &mut next);
        if residual <= inner_tol {
            return Ok(PointwiseSolution {
                point,
                iterations: it,
                residual,
            });
        }
    }
    Err(PointwiseSolution {
        point,
        iterations: max_inner_iter,
        residual,
    })
}

/// `u⁰ = Π_N(Π_C(0))`, `v⁰ = 0`.
pub fn default_start(problem: &Msvi<'_>) -> Result<(RandomVector, RandomVector)> {
    let zero = problem.filtration.zeros();
    let u = problem
        .filtration
        .project_nonanticipativity(&problem.sets.project_random_vector(&zero)?)?;
    Ok((u, zero))
}

/// Run progressive hedging from `(u⁰, v⁰)`; `v⁰` must lie in `M`.
///
/// The stopping residual is evaluated on `(x, y, λ) = (û, u⁺, -v⁺)`.
pub fn solve(problem: &Msvi<'_>, params: &PhaParams, u0: &RandomVector, v0: &RandomVector) -> Result<SolverReport> {
    params.validate()?;
    let op: &dyn MonotoneOperator = problem.operator;
    let filt = problem.filtration;
    u0.check_compatible(v0)?;
    if u0.blocks() != filt.stage_dims() || v0.blocks() != filt.stage_dims() {
        return Err(Error::Shape("start does not match the stage structure".into()));
    }
    let v_in_n = filt.project_nonanticipativity(v0)?.max_abs();
    if v_in_n > 1e-10 * v0.max_abs().max(1.0) {
        return Err(Error::Validation(format!(
            "initial multiplier must lie in M (|Π_N(v⁰)| = {v_in_n:e})"
        )));
    }

    let beta = params.beta;
    let n = problem.dim();
    let m = problem.space().atom_count();
    let clock = Instant::now();

    let mut u = u0.clone();
    let mut v = v0.clone();
    let mut lam = v.scaled(-1.0);
    let mut fx = op.evaluate(&u)?;
    let mut err = residual_with_image(&fx, problem.sets, &u, &u, &lam)?;
    let mut u_hat = u.clone();
    let mut trace = Vec::new();
    let mut inner_total = 0;
    let mut iterations = 0;

    while err >= params.eps && iterations < params.max_iter {
        iterations += 1;
        for atom in 0..m {
            let map = |x: &[f64], out: &mut [f64]| op.apply_atom(atom, x, out);
            let data = AtomVi {
                map: &map,
                lipschitz: op.atom_lipschitz(atom),
                symmetric: op.atom_symmetric(atom),
                set: problem.sets.product(atom),
            };
            let warm = u_hat.row(atom).to_vec();
            match solve_pointwise_vi(&data, u.row(atom), v.row(atom), &warm, beta, params.inner_tol, params.max_inner_iter) {
                Ok(sol) => {
                    inner_total += sol.iterations;
                    u_hat.row_mut(atom).copy_from_slice(&sol.point);
                }
                Err(sol) => {
                    return Err(Error::InnerNonConvergence {
                        atom,
                        iterations: sol.iterations,
                        residual: sol.residual,
                    })
                }
            }
        }

        let u_next = filt.project_nonanticipativity(&u_hat)?;
        let mut v_next = v.clone();
        for ((vn, uh), un) in v_next.values_mut().iter_mut().zip(u_hat.values()).zip(u_next.values()) {
            *vn += beta * (uh - un);
        }
        let du = u_next.sub(&u)?;
        let dv = v_next.sub(&v)?;
        let step = (beta * l2_norm(&du).powi(2) + l2_norm(&dv).powi(2) / beta).sqrt();
        u = u_next;
        v = v_next;
        for (l, vv) in lam.values_mut().iter_mut().zip(v.values()) {
            *l = -vv;
        }

        op.evaluate_into(&u_hat, &mut fx)?;
        err = residual_with_image(&fx, problem.sets, &u_hat, &u, &lam)?;
        trace.push(IterationRecord {
            iter: iterations,
            err,
            d_gnorm: step,
            phi: None,
            elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
        });
    }

    let status = if err < params.eps { Status::Converged } else { Status::MaxIterations };
    let x = if iterations == 0 { u.clone() } else { u_hat };
    debug_assert_eq!(x.dim(), n);
    Ok(SolverReport {
        algorithm: Algorithm::Pha,
        status,
        iterations,
        final_err: err,
        trace,
        certificate: Triplet::new(x, u, lam)?,
        solve_time: clock.elapsed(),
        inner_iterations: inner_total,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::convex_sets::{ConvexSet, PointwiseSet};
    use crate::filtration::Filtration;
    use crate::operators::AffineOperator;
    use crate::prob_space::SampleSpace;

    fn scalar_solve(slope: f64, set: ConvexSet, u: f64) -> f64 {
        let map = move |x: &[f64], out: &mut [f64]| out[0] = slope * x[0];
        let set = SetProduct::new(vec![set]).unwrap();
        let atom = AtomVi {
            map: &map,
            lipschitz: slope,
            symmetric: true,
            set: &set,
        };
        solve_pointwise_vi(&atom, &[u], &[0.0], &[0.0], 1.0, 1e-14, 10_000).unwrap().point[0]
    }

    #[test]
    fn pointwise_examples() {
        let unit = || ConvexSet::cube(1, -1.0, 1.0).unwrap();
        assert_eq!(scalar_solve(1.0, unit(), 0.0), 0.0);
        assert!((scalar_solve(0.0, unit(), 2.0) - 1.0).abs() < 1e-13);
        assert!((scalar_solve(1.0, ConvexSet::WholeSpace { dim: 1 }, 1.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn pointwise_nonconvergence_is_reported() {
        let map = |x: &[f64], out: &mut [f64]| out[0] = x[0];
        let set = SetProduct::new(vec![ConvexSet::WholeSpace { dim: 1 }]).unwrap();
        let atom = AtomVi {
            map: &map,
            lipschitz: 1.0,
            symmetric: false,
            set: &set,
        };
        let res = solve_pointwise_vi(&atom, &[1.0], &[0.0], &[0.0], 1.0, 1e-16, 2);
        assert!(res.is_err());
    }

    #[test]
    fn nonsymmetric_inner_solve_converges() {
        // rotation plus a small identity: monotone, not symmetric
        let map = |x: &[f64], out: &mut [f64]| {
            out[0] = 0.1 * x[0] + 2.0 * x[1];
            out[1] = -2.0 * x[0] + 0.1 * x[1];
        };
        let set = SetProduct::new(vec![ConvexSet::WholeSpace { dim: 2 }]).unwrap();
        let atom = AtomVi {
            map: &map,
            lipschitz: (0.01f64 + 4.0).sqrt(),
            symmetric: false,
            set: &set,
        };
        let sol = solve_pointwise_vi(&atom, &[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0], 1.0, 1e-12, 100_000).unwrap();
        // (M + I) û = u
        let (a, b, c, d) = (1.1, 2.0, -2.0, 1.1);
        let det = a * d - b * c;
        let expected = [(d - b) / det, (a - c) / det];
        assert!((sol.point[0] - expected[0]).abs() < 1e-10);
        assert!((sol.point[1] - expected[1]).abs() < 1e-10);
    }

    #[test]
    fn identity_whole_space_goes_to_zero() {
        let s = Arc::new(SampleSpace::new(vec![0.3, 0.7]).unwrap());
        let op = AffineOperator::from_rows(
            Arc::clone(&s),
            &vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]; 2],
            &vec![vec![0.0; 2]; 2],
        )
        .unwrap();
        let sets = PointwiseSet::uniform(Arc::clone(&s), SetProduct::new(vec![ConvexSet::WholeSpace { dim: 2 }]).unwrap()).unwrap();
        let f = Filtration::two_stage(Arc::clone(&s), 1, 1).unwrap();
        let msvi = Msvi::new(&op, &sets, &f).unwrap();
        let u0 = RandomVector::from_rows(Arc::clone(&s), &[vec![1.0, 2.0], vec![1.0, -3.0]], vec![1, 1]).unwrap();
        let v0 = f.zeros();
        let params = PhaParams::for_lipschitz(1.0, 1.1, 1e-10);
        let report = solve(&msvi, &params, &u0, &v0).unwrap();
        assert!(report.converged());
        assert!(report.certificate.x.max_abs() < 1e-9);
    }

    #[test]
    fn rejects_multiplier_outside_complement() {
        let s = Arc::new(SampleSpace::uniform(2).unwrap());
        let op = AffineOperator::from_rows(Arc::clone(&s), &vec![vec![vec![1.0]]; 2], &vec![vec![0.0]; 2]).unwrap();
        let sets = PointwiseSet::uniform(Arc::clone(&s), SetProduct::new(vec![ConvexSet::WholeSpace { dim: 1 }]).unwrap()).unwrap();
        let f = Filtration::new(Arc::clone(&s), vec![crate::Partition::trivial(2)], vec![1]).unwrap();
        let msvi = Msvi::new(&op, &sets, &f).unwrap();
        let u0 = f.zeros();
        let v0 = RandomVector::from_flat(s, vec![1.0, 1.0], vec![1]).unwrap();
        let params = PhaParams::for_lipschitz(1.0, 1.1, 1e-6);
        assert!(matches!(solve(&msvi, &params, &u0, &v0), Err(Error::Validation(_))));
    }

    #[test]
    fn inner_tolerance_must_undercut_eps() {
        let mut p = PhaParams::for_lipschitz(1.0, 1.1, 1e-3);
        assert!(p.validate().is_ok());
        p.inner_tol = 1e-3;
        assert!(p.validate().is_err());
    }
}
