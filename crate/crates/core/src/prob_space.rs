//! Finite probability spaces, square-integrable random vectors and
//! conditional expectation with respect to partition-generated sigma-fields.
//!
//! On a finite sample space every random vector is a dense `m x n` matrix
//! whose row `i` is the value taken at atom `i`. The L² inner product is the
//! probability-weighted sum of row inner products, and conditioning on the
//! sigma-field generated by a partition replaces each row by the weighted
//! average over its cell.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance on `sum(p) == 1`.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;
/// Smallest admissible atom probability.
pub const MIN_PROBABILITY: f64 = 1e-15;

/// A finite probability space `{w_1, ..., w_m}` with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpace {
    probabilities: Vec<f64>,
}

impl SampleSpace {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::Validation("sample space needs at least one atom".into()));
        }
        for (i, &p) in probabilities.iter().enumerate() {
            if !p.is_finite() || p < MIN_PROBABILITY {
                return Err(Error::Validation(format!(
                    "probability of atom {i} is {p}, must be at least {MIN_PROBABILITY}"
                )));
            }
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::Validation(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { probabilities })
    }

    /// Equally likely atoms.
    pub fn uniform(atom_count: usize) -> Result<Self> {
        if atom_count == 0 {
            return Err(Error::Validation("sample space needs at least one atom".into()));
        }
        Self::new(vec![1.0 / atom_count as f64; atom_count])
    }

    pub fn atom_count(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, atom: usize) -> f64 {
        self.probabilities[atom]
    }
}

/// Two handles denote the same space if they point at the same allocation or
/// carry identical weights.
pub(crate) fn same_space(a: &Arc<SampleSpace>, b: &Arc<SampleSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A map from atoms to `R^n`, stored row-major, with stage block structure
/// `(n_0, ..., n_{N-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVector {
    space: Arc<SampleSpace>,
    values: Vec<f64>,
    dim: usize,
    blocks: Vec<usize>,
}

impl RandomVector {
    pub fn zeros(space: Arc<SampleSpace>, blocks: Vec<usize>) -> Result<Self> {
        let dim = check_blocks(&blocks)?;
        let values = vec![0.0; space.atom_count() * dim];
        Ok(Self {
            space,
            values,
            dim,
            blocks,
        })
    }

    /// Build from a flat row-major buffer of length `m * sum(blocks)`.
    pub fn from_flat(space: Arc<SampleSpace>, values: Vec<f64>, blocks: Vec<usize>) -> Result<Self> {
        let dim = check_blocks(&blocks)?;
        if values.len() != space.atom_count() * dim {
            return Err(Error::Shape(format!(
                "expected {} values ({} atoms x {dim}), got {}",
                space.atom_count() * dim,
                space.atom_count(),
                values.len()
            )));
        }
        Ok(Self {
            space,
            values,
            dim,
            blocks,
        })
    }

    /// Build from one row per atom.
    pub fn from_rows(space: Arc<SampleSpace>, rows: &[Vec<f64>], blocks: Vec<usize>) -> Result<Self> {
        if rows.len() != space.atom_count() {
            return Err(Error::Shape(format!(
                "expected {} rows, got {}",
                space.atom_count(),
                rows.len()
            )));
        }
        let dim = check_blocks(&blocks)?;
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            space,
            values,
            dim,
            blocks,
        })
    }

    /// Every atom takes the same value `row`.
    pub fn constant(space: Arc<SampleSpace>, row: &[f64], blocks: Vec<usize>) -> Result<Self> {
        let rows = vec![row.to_vec(); space.atom_count()];
        Self::from_rows(space, &rows, blocks)
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn atom_count(&self) -> usize {
        self.space.atom_count()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, atom: usize) -> &[f64] {
        &self.values[atom * self.dim..(atom + 1) * self.dim]
    }

    pub fn row_mut(&mut self, atom: usize) -> &mut [f64] {
        &mut self.values[atom * self.dim..(atom + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim.max(1))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Column range `[start, end)` of stage block `stage`.
    pub fn block_range(&self, stage: usize) -> std::ops::Range<usize> {
        let start: usize = self.blocks[..stage].iter().sum();
        start..start + self.blocks[stage]
    }

    /// Same space, dimension and block structure.
    pub fn check_compatible(&self, other: &RandomVector) -> Result<()> {
        if !same_space(&self.space, &other.space) {
            return Err(Error::Shape("random vectors live on different sample spaces".into()));
        }
        if self.dim != other.dim {
            return Err(Error::Shape(format!(
                "dimension {} does not match {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    /// `self + alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &RandomVector) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// `a * self + b * other` as a new vector.
    pub fn combine(&self, a: f64, other: &RandomVector, b: f64) -> Result<RandomVector> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(self.with_values(values))
    }

    pub fn sub(&self, other: &RandomVector) -> Result<RandomVector> {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &RandomVector) -> Result<RandomVector> {
        self.combine(1.0, other, 1.0)
    }

    pub fn scaled(&self, alpha: f64) -> RandomVector {
        self.with_values(self.values.iter().map(|v| alpha * v).collect())
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> RandomVector {
        debug_assert_eq!(values.len(), self.values.len());
        RandomVector {
            space: Arc::clone(&self.space),
            values,
            dim: self.dim,
            blocks: self.blocks.clone(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_blocks(blocks: &[usize]) -> Result<usize> {
    if blocks.is_empty() || blocks.contains(&0) {
        return Err(Error::Shape(format!(
            "stage blocks must be a nonempty list of positive sizes, got {blocks:?}"
        )));
    }
    Ok(blocks.iter().sum())
}

/// A partition of `{0, ..., m-1}` into disjoint nonempty cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

impl Partition {
    pub fn new(cells: Vec<Vec<usize>>, atom_count: usize) -> Result<Self> {
        let mut cell_of = vec![usize::MAX; atom_count];
        for (c, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::Structure(format!("partition cell {c} is empty")));
            }
            for &atom in cell {
                if atom >= atom_count {
                    return Err(Error::Structure(format!(
                        "atom {atom} out of range for {atom_count} atoms"
                    )));
                }
                if cell_of[atom] != usize::MAX {
                    return Err(Error::Structure(format!(
                        "atom {atom} appears in cells {} and {c}",
                        cell_of[atom]
                    )));
                }
                cell_of[atom] = c;
            }
        }
        if let Some(missing) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::Structure(format!(
                "partition does not cover atom {missing}"
            )));
        }
        Ok(Self { cells, cell_of })
    }

    /// `{{0, ..., m-1}}`: the trivial sigma-field.
    pub fn trivial(atom_count: usize) -> Self {
        Self {
            cells: vec![(0..atom_count).collect()],
            cell_of: vec![0; atom_count],
        }
    }

    /// `{{0}, ..., {m-1}}`: the power set.
    pub fn finest(atom_count: usize) -> Self {
        Self {
            cells: (0..atom_count).map(|i| vec![i]).collect(),
            cell_of: (0..atom_count).collect(),
        }
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn atom_count(&self) -> usize {
        self.cell_of.len()
    }

    pub fn cell_of(&self, atom: usize) -> usize {
        self.cell_of[atom]
    }

    /// True when every cell of `self` sits inside a single cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.atom_count() == coarser.atom_count()
            && self.cells.iter().all(|cell| {
                let target = coarser.cell_of(cell[0]);
                cell.iter().all(|&a| coarser.cell_of(a) == target)
            })
    }
}

/// `<a, b>_{L²} = sum_i p_i <a(w_i), b(w_i)>`.
pub fn l2_inner(a: &RandomVector, b: &RandomVector) -> Result<f64> {
    a.check_compatible(b)?;
    Ok(weighted_inner(a.space.probabilities(), &a.values, &b.values, a.dim))
}

pub(crate) fn weighted_inner(p: &[f64], a: &[f64], b: &[f64], dim: usize) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    p.iter()
        .zip(a.chunks_exact(dim).zip(b.chunks_exact(dim)))
        .map(|(&w, (ra, rb))| w * ra.iter().zip(rb).map(|(x, y)| x * y).sum::<f64>())
        .sum()
}

pub fn l2_norm(a: &RandomVector) -> f64 {
    weighted_inner(a.space.probabilities(), &a.values, &a.values, a.dim).sqrt()
}

/// `l2_norm(a - b)` without allocating.
pub fn l2_distance(a: &RandomVector, b: &RandomVector) -> Result<f64> {
    a.check_compatible(b)?;
    let dim = a.dim;
    let total: f64 = a
        .space
        .probabilities()
        .iter()
        .zip(a.values.chunks_exact(dim).zip(b.values.chunks_exact(dim)))
        .map(|(&w, (ra, rb))| w * ra.iter().zip(rb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
        .sum();
    Ok(total.sqrt())
}

/// `E[a | sigma(g)]`: each row replaced by the probability-weighted average of
/// its cell.
pub fn conditional_expectation(a: &RandomVector, g: &Partition) -> Result<RandomVector> {
    let mut out = a.clone();
    let cols = 0..a.dim;
    condition_columns(a.space.probabilities(), &a.values, &mut out.values, a.dim, cols, g)?;
    Ok(out)
}

/// Conditional expectation of the columns in `cols` only, reading from `src`
/// and writing into `dst` (both row-major with row length `dim`).
pub(crate) fn condition_columns(
    p: &[f64],
    src: &[f64],
    dst: &mut [f64],
    dim: usize,
    cols: std::ops::Range<usize>,
    g: &Partition,
) -> Result<()> {
    if g.atom_count() != p.len() {
        return Err(Error::Structure(format!(
            "partition covers {} atoms, space has {}",
            g.atom_count(),
            p.len()
        )));
    }
    let width = cols.len();
    let mut avg = vec![0.0; width];
    for cell in g.cells() {
        if cell.len() == 1 {
            let i = cell[0];
            dst[i * dim + cols.start..i * dim + cols.end]
                .copy_from_slice(&src[i * dim + cols.start..i * dim + cols.end]);
            continue;
        }
        avg.iter_mut().for_each(|v| *v = 0.0);
        let mut mass = 0.0;
        for &i in cell {
            mass += p[i];
            let row = &src[i * dim + cols.start..i * dim + cols.end];
            for (acc, v) in avg.iter_mut().zip(row) {
                *acc += p[i] * v;
            }
        }
        for acc in avg.iter_mut() {
            *acc /= mass;
        }
        for &i in cell {
            dst[i * dim + cols.start..i * dim + cols.end].copy_from_slice(&avg);
        }
    }
    Ok(())
}
