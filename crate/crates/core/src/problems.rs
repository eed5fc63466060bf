//! Problem instances and reproducible generators for the two experiment
//! families: random monotone affine two-stage problems, and the random-walk
//! discretization of a linear-quadratic stochastic control problem.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex_sets::{ConvexSet, PointwiseSet, SetProduct};
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::linalg;
use crate::operators::{msvi_residual, AffineOperator, MonotoneOperator};
use crate::prob_space::{same_space, RandomVector, SampleSpace};

/// Largest `N * ell` accepted by [`gen_random_walk_socp`]; the tree is
/// enumerated exactly, so the atom count is `2^(N * ell)`.
pub const MAX_WALK_STEPS: usize = 22;

/// Tolerance for a known solution to count as a member of `C ∩ N`.
const KNOWN_SOLUTION_TOL: f64 = 1e-9;

/// Borrowed view of `MSVI(F, C ∩ N)`: find `x* ∈ C ∩ N` with
/// `<F(x*), x - x*> >= 0` for all `x ∈ C ∩ N`.
#[derive(Clone, Copy)]
pub struct Msvi<'a> {
    pub operator: &'a dyn MonotoneOperator,
    pub sets: &'a PointwiseSet,
    pub filtration: &'a Filtration,
}

impl<'a> Msvi<'a> {
    pub fn new(operator: &'a dyn MonotoneOperator, sets: &'a PointwiseSet, filtration: &'a Filtration) -> Result<Self> {
        let space = filtration.space();
        if !same_space(space, operator.space()) || !same_space(space, sets.space()) {
            return Err(Error::Shape("operator, sets and filtration must share one sample space".into()));
        }
        let n = filtration.dim();
        if operator.dim() != n || sets.dim() != n {
            return Err(Error::Shape(format!(
                "operator dimension {}, set dimension {} and stage dimension {n} disagree",
                operator.dim(),
                sets.dim()
            )));
        }
        Ok(Self {
            operator,
            sets,
            filtration,
        })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        self.filtration.space()
    }

    pub fn dim(&self) -> usize {
        self.filtration.dim()
    }

    pub fn residual(&self, x: &RandomVector, y: &RandomVector, lam: &RandomVector) -> Result<f64> {
        msvi_residual(self.operator, self.sets, x, y, lam)
    }
}

/// A self-contained, serializable MSVI with an affine operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub space: Arc<SampleSpace>,
    pub filtration: Filtration,
    pub sets: PointwiseSet,
    pub operator: AffineOperator,
    pub known_solution: Option<RandomVector>,
    pub seed: Option<u64>,
}

impl ProblemInstance {
    pub fn new(
        filtration: Filtration,
        sets: PointwiseSet,
        operator: AffineOperator,
        known_solution: Option<RandomVector>,
        seed: Option<u64>,
    ) -> Result<Self> {
        let space = Arc::clone(filtration.space());
        Msvi::new(&operator, &sets, &filtration)?;
        if let Some(sol) = &known_solution {
            if !same_space(&space, sol.space()) || sol.blocks() != filtration.stage_dims() {
                return Err(Error::Shape("known solution does not match the problem shape".into()));
            }
            let c_gap = sets.infeasibility(sol)?;
            let n_gap = filtration.nonanticipativity_gap(sol)?;
            if c_gap > KNOWN_SOLUTION_TOL || n_gap > KNOWN_SOLUTION_TOL {
                return Err(Error::Validation(format!(
                    "known solution is not in C ∩ N (distance to C {c_gap:e}, to N {n_gap:e})"
                )));
            }
        }
        Ok(Self {
            space,
            filtration,
            sets,
            operator,
            known_solution,
            seed,
        })
    }

    pub fn msvi(&self) -> Msvi<'_> {
        Msvi {
            operator: &self.operator,
            sets: &self.sets,
            filtration: &self.filtration,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.space.atom_count()
    }

    pub fn dim(&self) -> usize {
        self.filtration.dim()
    }

    pub fn operator_lipschitz(&self) -> f64 {
        self.operator.lipschitz()
    }
}

/// A named generator with its parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    RandomAffine { m: usize, n0: usize, n1: usize, seed: u64 },
    RandomWalk { stages: usize, ell: usize },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<ProblemInstance> {
        match *self {
            GeneratorSpec::RandomAffine { m, n0, n1, seed } => gen_random_affine(m, n0, n1, seed),
            GeneratorSpec::RandomWalk { stages, ell } => gen_random_walk_socp(stages, ell),
        }
    }

    /// The same family advanced by `offset` seeds; seedless families are unchanged.
    pub fn with_seed_offset(&self, offset: u64) -> Self {
        match *self {
            GeneratorSpec::RandomAffine { m, n0, n1, seed } => GeneratorSpec::RandomAffine {
                m,
                n0,
                n1,
                seed: seed.wrapping_add(offset),
            },
            ref other => other.clone(),
        }
    }
}

/// Random monotone affine two-stage instance.
///
/// Draw order from `ChaCha8Rng::seed_from_u64(seed)`: `m` probability
/// weights, then for each atom the `n x n` entries of `A_i` row by row
/// followed by the `n` entries of `b_i`, all uniform on `[-1, 1)` except the
/// weights (uniform on `[0, 1)`). `M_i = A_iᵀ A_i`, `C(w) = [-1, 1]^n`, the
/// first stage is deterministic and the second fully observed.
pub fn gen_random_affine(m: usize, n0: usize, n1: usize, seed: u64) -> Result<ProblemInstance> {
    if m == 0 || n0 == 0 || n1 == 0 {
        return Err(Error::Config(format!(
            "random affine family needs m, n0, n1 >= 1 (got {m}, {n0}, {n1})"
        )));
    }
    let n = n0 + n1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let floor = 1.0 / (10.0 * m as f64);
    // a tenth of the mass is spread uniformly so every p_i >= 1/(10m)
    let mut probabilities: Vec<f64> = weights
        .iter()
        .map(|w| if total > 0.0 { floor + 0.9 * w / total } else { 1.0 / m as f64 })
        .collect();
    let sum: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= sum);
    let space = Arc::new(SampleSpace::new(probabilities)?);

    let mut matrices = Vec::with_capacity(m * n * n);
    let mut offsets = Vec::with_capacity(m * n);
    for _ in 0..m {
        let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        matrices.extend(linalg::gram(&a, n));
        offsets.extend((0..n).map(|_| rng.gen_range(-1.0..1.0)));
    }
    let operator = AffineOperator::from_flat(Arc::clone(&space), n, matrices, offsets)?;
    let filtration = Filtration::two_stage(Arc::clone(&space), n0, n1)?;
    let sets = PointwiseSet::uniform(
        Arc::clone(&space),
        SetProduct::new(vec![ConvexSet::cube(n0, -1.0, 1.0)?, ConvexSet::cube(n1, -1.0, 1.0)?])?,
    )?;
    ProblemInstance::new(filtration, sets, operator, None, Some(seed))
}

/// Per-atom quantities of the random-walk control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkAtom {
    /// Walk increments `S_{(i+1)ell} - S_{i ell}` for each period.
    pub increments: Vec<i64>,
    /// Sensitivities `Z_i` of the terminal state to the period-`i` control.
    pub z: Vec<f64>,
    /// `zeta = sum_i Z_i`.
    pub zeta: f64,
}

/// Enumerate the `2^(N ell)` coin-flip paths and compute, for each, the walk
/// increments, `Z_i = (1 + Δ)^(N-1-i) (-Δ + ΔY_i)` with `Δ = 1/N`,
/// `ΔY_i = increment_i / sqrt(N ell)`, and `zeta`.
///
/// Atom `a` flips `+1` at step `j` iff bit `N ell - 1 - j` of `a` is set, so
/// atoms sharing a path prefix are contiguous.
pub fn random_walk_atoms(stages: usize, ell: usize) -> Result<Vec<WalkAtom>> {
    if stages == 0 || ell == 0 {
        return Err(Error::Config(format!(
            "random walk family needs N, ell >= 1 (got {stages}, {ell})"
        )));
    }
    let steps = stages * ell;
    if steps > MAX_WALK_STEPS {
        return Err(Error::Config(format!(
            "N * ell = {steps} exceeds the exact-enumeration cap {MAX_WALK_STEPS}"
        )));
    }
    let delta = 1.0 / stages as f64;
    let psi = 1.0 + delta;
    let scale = (steps as f64).sqrt();
    let atoms = 1usize << steps;
    let mut out = Vec::with_capacity(atoms);
    for a in 0..atoms {
        let flip = |j: usize| if (a >> (steps - 1 - j)) & 1 == 1 { 1i64 } else { -1 };
        let increments: Vec<i64> = (0..stages)
            .map(|i| (i * ell..(i + 1) * ell).map(flip).sum())
            .collect();
        let z: Vec<f64> = increments
            .iter()
            .enumerate()
            .map(|(i, &inc)| {
                let lambda = -delta + inc as f64 / scale;
                psi.powi((stages - 1 - i) as i32) * lambda
            })
            .collect();
        let zeta = z.iter().sum();
        out.push(WalkAtom { increments, z, zeta });
    }
    Ok(out)
}

/// Random-walk stochastic control instance with `N = stages` periods and
/// `ell` coin flips per period, on the exact binary tree.
///
/// Controls live in `[0, 1]^N`, period `i` observes the increments of
/// periods `0..i`, and `F(u)(w) = z zᵀ u - zeta z`, the gradient of
/// `½ E|sum_i Z_i u_i - zeta|²`. The all-ones control makes the cost vanish
/// and is attached as the known solution.
pub fn gen_random_walk_socp(stages: usize, ell: usize) -> Result<ProblemInstance> {
    let atoms = random_walk_atoms(stages, ell)?;
    let m = atoms.len();
    let space = Arc::new(SampleSpace::uniform(m)?);
    let n = stages;

    let mut matrices = Vec::with_capacity(m * n * n);
    let mut offsets = Vec::with_capacity(m * n);
    for atom in &atoms {
        for i in 0..n {
            for j in 0..n {
                matrices.push(atom.z[i] * atom.z[j]);
            }
        }
        offsets.extend(atom.z.iter().map(|zi| -atom.zeta * zi));
    }
    let operator = AffineOperator::from_flat(Arc::clone(&space), n, matrices, offsets)?;

    let signals: Vec<Vec<i64>> = (0..stages.saturating_sub(1))
        .map(|i| atoms.iter().map(|a| a.increments[i]).collect())
        .collect();
    let filtration = Filtration::from_signals(Arc::clone(&space), &signals, vec![1; n])?;
    let sets = PointwiseSet::uniform(
        Arc::clone(&space),
        SetProduct::new((0..n).map(|_| ConvexSet::cube(1, 0.0, 1.0)).collect::<Result<_>>()?)?,
    )?;
    let known = RandomVector::constant(Arc::clone(&space), &vec![1.0; n], vec![1; n])?;
    ProblemInstance::new(filtration, sets, operator, Some(known), None)
}

/// `½ E|sum_i Z_i u_i - zeta|²` for the random-walk family.
pub fn random_walk_cost(atoms: &[WalkAtom], u: &RandomVector) -> f64 {
    let p = u.space().probabilities();
    atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let s: f64 = a.z.iter().zip(u.row(i)).map(|(z, v)| z * v).sum::<f64>() - a.zeta;
            0.5 * p[i] * s * s
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_affine_is_deterministic() {
        let a = gen_random_affine(6, 2, 3, 11).unwrap();
        let b = gen_random_affine(6, 2, 3, 11).unwrap();
        assert_eq!(a, b);
        let c = gen_random_affine(6, 2, 3, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_affine_probability_floor() {
        let m = 25;
        let p = gen_random_affine(m, 1, 1, 3).unwrap();
        let floor = 1.0 / (10.0 * m as f64);
        assert!(p.space.probabilities().iter().all(|&q| q >= floor - 1e-15));
        assert_eq!(p.filtration.stage_dims(), &[1, 1]);
    }

    #[test]
    fn random_affine_rejects_empty_sizes() {
        assert!(matches!(gen_random_affine(0, 1, 1, 0), Err(Error::Config(_))));
        assert!(gen_random_affine(3, 0, 1, 0).is_err());
    }

    #[test]
    fn walk_single_period_single_flip() {
        let atoms = random_walk_atoms(1, 1).unwrap();
        assert_eq!(atoms.len(), 2);
        // Δ = 1, ΔY = ∓1, Λ = -1 + ΔY
        assert_eq!(atoms[0].z, vec![-2.0]);
        assert_eq!(atoms[1].z, vec![0.0]);
        let inst = gen_random_walk_socp(1, 1).unwrap();
        let ones = inst.known_solution.clone().unwrap();
        let zero = RandomVector::zeros(Arc::clone(&inst.space), vec![1]).unwrap();
        let err = inst.msvi().residual(&ones, &ones, &zero).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn walk_all_ones_has_zero_cost() {
        let atoms = random_walk_atoms(3, 2).unwrap();
        let inst = gen_random_walk_socp(3, 2).unwrap();
        assert_eq!(inst.atom_count(), 64);
        assert!(random_walk_cost(&atoms, inst.known_solution.as_ref().unwrap()) < 1e-28);
    }

    #[test]
    fn walk_filtration_groups_by_increment_prefix() {
        let inst = gen_random_walk_socp(3, 2).unwrap();
        let stages = inst.filtration.stages();
        assert_eq!(stages.len(), 3);
        // period increments take values in {-2, 0, 2}
        assert_eq!(stages[1].cells().len(), 3);
        assert_eq!(stages[2].cells().len(), 9);
    }

    #[test]
    fn walk_size_cap() {
        assert!(matches!(gen_random_walk_socp(12, 2), Err(Error::Config(_))));
        assert!(gen_random_walk_socp(0, 2).is_err());
    }

    #[test]
    fn walk_lipschitz_is_max_squared_sensitivity() {
        let atoms = random_walk_atoms(3, 2).unwrap();
        let inst = gen_random_walk_socp(3, 2).unwrap();
        let expected = atoms
            .iter()
            .map(|a| a.z.iter().map(|z| z * z).sum::<f64>())
            .fold(0.0, f64::max);
        assert!((inst.operator.lipschitz() - expected).abs() <= 1e-9 * expected);
    }
}
