//! Pointwise constraint sets `C(w) = C_0(w) x ... x C_{N-1}(w)`.
//!
//! Membership in the integral constraint set is equivalent to almost-sure
//! pointwise membership, so the metric projection onto it is computed atom
//! by atom with closed-form finite-dimensional projections.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob_space::{same_space, RandomVector, SampleSpace};

/// A closed convex set with a closed-form projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexSet {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// `{ v : <normal, v> <= offset }`
    Halfspace { normal: Vec<f64>, offset: f64 },
    WholeSpace { dim: usize },
}

impl ConvexSet {
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        let set = ConvexSet::Box {
            lower: vec![lower; dim],
            upper: vec![upper; dim],
        };
        set.validate()?;
        Ok(set)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let set = ConvexSet::Ball { center, radius };
        set.validate()?;
        Ok(set)
    }

    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let set = ConvexSet::Halfspace { normal, offset };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            ConvexSet::Box { lower, upper } => {
                if lower.len() != upper.len() || lower.is_empty() {
                    return Err(Error::Validation(format!(
                        "box bounds have lengths {} and {}",
                        lower.len(),
                        upper.len()
                    )));
                }
                if !finite(lower) || !finite(upper) {
                    return Err(Error::Validation("box bounds must be finite".into()));
                }
                if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
                    return Err(Error::Validation(format!(
                        "box lower bound {} exceeds upper bound {} in coordinate {i}",
                        lower[i], upper[i]
                    )));
                }
            }
            ConvexSet::Ball { center, radius } => {
                if center.is_empty() || !finite(center) {
                    return Err(Error::Validation("ball center must be a finite nonempty vector".into()));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Validation(format!("ball radius {radius} must be positive")));
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                if normal.is_empty() || !finite(normal) || !offset.is_finite() {
                    return Err(Error::Validation("halfspace data must be finite".into()));
                }
                if normal.iter().all(|&a| a == 0.0) {
                    return Err(Error::Validation("halfspace normal must be nonzero".into()));
                }
            }
            ConvexSet::WholeSpace { dim } => {
                if *dim == 0 {
                    return Err(Error::Validation("whole space needs positive dimension".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Box { lower, .. } => lower.len(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Halfspace { normal, .. } => normal.len(),
            ConvexSet::WholeSpace { dim } => *dim,
        }
    }

    /// Overwrite `v` with its nearest point in the set. `v.len()` must equal `dim()`.
    pub fn project_in_place(&self, v: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        match self {
            ConvexSet::Box { lower, upper } => {
                for ((x, lo), hi) in v.iter_mut().zip(lower).zip(upper) {
                    *x = x.max(*lo).min(*hi);
                }
            }
            ConvexSet::Ball { center, radius } => {
                let dist = v
                    .iter()
                    .zip(center)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum::<f64>()
                    .sqrt();
                if dist > *radius {
                    let scale = radius / dist;
                    for (x, c) in v.iter_mut().zip(center) {
                        *x = c + scale * (*x - c);
                    }
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                let excess = normal.iter().zip(v.iter()).map(|(a, x)| a * x).sum::<f64>() - offset;
                if excess > 0.0 {
                    let nn: f64 = normal.iter().map(|a| a * a).sum();
                    let t = excess / nn;
                    for (x, a) in v.iter_mut().zip(normal) {
                        *x -= t * a;
                    }
                }
            }
            ConvexSet::WholeSpace { .. } => {}
        }
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        let mut p = v.to_vec();
        self.project_in_place(&mut p);
        p.iter().zip(v).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Metric projection of a single point.
pub fn project_point(set: &ConvexSet, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != set.dim() {
        return Err(Error::Shape(format!(
            "point has dimension {}, set has {}",
            v.len(),
            set.dim()
        )));
    }
    let mut out = v.to_vec();
    set.project_in_place(&mut out);
    Ok(out)
}

/// Cartesian product of sets, laid out left to right over the coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SetProduct(pub Vec<ConvexSet>);

impl SetProduct {
    pub fn new(factors: Vec<ConvexSet>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Validation("set product needs at least one factor".into()));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(Self(factors))
    }

    pub fn dim(&self) -> usize {
        self.0.iter().map(ConvexSet::dim).sum()
    }

    pub fn factors(&self) -> &[ConvexSet] {
        &self.0
    }

    pub fn project_in_place(&self, v: &mut [f64]) {
        let mut start = 0;
        for f in &self.0 {
            let d = f.dim();
            f.project_in_place(&mut v[start..start + d]);
            start += d;
        }
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        let mut p = v.to_vec();
        self.project_in_place(&mut p);
        p.iter().zip(v).all(|(a, b)| (a - b).abs() <= tol)
    }
}

#[derive(Debug, Clone)]
enum Layout {
    Uniform(SetProduct),
    PerAtom(Vec<SetProduct>),
}

/// One set product per atom.
#[derive(Debug, Clone)]
pub struct PointwiseSet {
    space: Arc<SampleSpace>,
    layout: Layout,
    dim: usize,
}

impl PointwiseSet {
    pub fn uniform(space: Arc<SampleSpace>, product: SetProduct) -> Result<Self> {
        let product = SetProduct::new(product.0)?;
        let dim = product.dim();
        Ok(Self {
            space,
            layout: Layout::Uniform(product),
            dim,
        })
    }

    pub fn per_atom(space: Arc<SampleSpace>, products: Vec<SetProduct>) -> Result<Self> {
        if products.len() != space.atom_count() {
            return Err(Error::Shape(format!(
                "{} set products for {} atoms",
                products.len(),
                space.atom_count()
            )));
        }
        let products = products
            .into_iter()
            .map(|p| SetProduct::new(p.0))
            .collect::<Result<Vec<_>>>()?;
        let dim = products[0].dim();
        if let Some(i) = products.iter().position(|p| p.dim() != dim) {
            return Err(Error::Shape(format!(
                "atom {i} has set dimension {}, atom 0 has {dim}",
                products[i].dim()
            )));
        }
        Ok(Self {
            space,
            layout: Layout::PerAtom(products),
            dim,
        })
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn product(&self, atom: usize) -> &SetProduct {
        match &self.layout {
            Layout::Uniform(p) => p,
            Layout::PerAtom(ps) => &ps[atom],
        }
    }

    fn check(&self, x: &RandomVector) -> Result<()> {
        if !same_space(&self.space, x.space()) || x.dim() != self.dim {
            return Err(Error::Shape(format!(
                "random vector of dimension {} does not match pointwise set of dimension {}",
                x.dim(),
                self.dim
            )));
        }
        Ok(())
    }

    /// `Π_C(x)`, computed atom by atom.
    pub fn project_random_vector(&self, x: &RandomVector) -> Result<RandomVector> {
        self.check(x)?;
        let mut out = x.clone();
        self.project_rows_in_place(out.values_mut());
        Ok(out)
    }

    pub(crate) fn project_rows_in_place(&self, values: &mut [f64]) {
        for (atom, row) in values.chunks_exact_mut(self.dim).enumerate() {
            self.product(atom).project_in_place(row);
        }
    }

    /// Largest pointwise distance from `x` to `C`, measured entrywise.
    pub fn infeasibility(&self, x: &RandomVector) -> Result<f64> {
        let p = self.project_random_vector(x)?;
        Ok(p.values()
            .iter()
            .zip(x.values())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

impl PartialEq for PointwiseSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.space == other.space
            && (0..self.space.atom_count()).all(|i| self.product(i) == other.product(i))
    }
}
