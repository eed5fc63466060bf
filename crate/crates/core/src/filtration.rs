//! Stage structure and the nonanticipativity subspace.
//!
//! A filtration is an increasing chain of partitions `F_0 ⊂ ... ⊂ F_{N-1}`
//! with `F_0` trivial. A random vector is nonanticipative when its stage-`i`
//! block is constant on every cell of `F_i`; projecting onto that subspace is
//! a blockwise conditional expectation.

use std::collections::HashMap;
use std::hash::Hash;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::prob_space::{condition_columns, same_space, Partition, RandomVector, SampleSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    space: Arc<SampleSpace>,
    stages: Vec<Partition>,
    stage_dims: Vec<usize>,
}

impl Filtration {
    /// Validates eagerly: `stages[0]` trivial, each stage refining the last,
    /// one positive dimension per stage.
    pub fn new(space: Arc<SampleSpace>, stages: Vec<Partition>, stage_dims: Vec<usize>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::Structure("filtration needs at least one stage".into()));
        }
        if stages.len() != stage_dims.len() {
            return Err(Error::Structure(format!(
                "{} stages but {} stage dimensions",
                stages.len(),
                stage_dims.len()
            )));
        }
        if stage_dims.contains(&0) {
            return Err(Error::Structure("stage dimensions must be positive".into()));
        }
        let m = space.atom_count();
        for (i, stage) in stages.iter().enumerate() {
            if stage.atom_count() != m {
                return Err(Error::Structure(format!(
                    "stage {i} partitions {} atoms, space has {m}",
                    stage.atom_count()
                )));
            }
        }
        if stages[0].cells().len() != 1 {
            return Err(Error::Structure(
                "stage 0 must be the trivial partition".into(),
            ));
        }
        for i in 1..stages.len() {
            if !stages[i].refines(&stages[i - 1]) {
                return Err(Error::Structure(format!(
                    "stage {i} does not refine stage {}",
                    i - 1
                )));
            }
        }
        Ok(Self {
            space,
            stages,
            stage_dims,
        })
    }

    /// Stage `i` is generated by the observed signals `signals[0..i]`: atoms
    /// share a cell iff their signal prefixes agree. `signals[j][atom]` is the
    /// value of the `(j+1)`-th signal at `atom`; at least `N-1` signals are
    /// required for `N = stage_dims.len()` stages.
    pub fn from_signals<K: Eq + Hash + Clone>(
        space: Arc<SampleSpace>,
        signals: &[Vec<K>],
        stage_dims: Vec<usize>,
    ) -> Result<Self> {
        let m = space.atom_count();
        let n_stages = stage_dims.len();
        if n_stages == 0 {
            return Err(Error::Structure("filtration needs at least one stage".into()));
        }
        if signals.len() + 1 < n_stages {
            return Err(Error::Structure(format!(
                "{n_stages} stages need {} signals, got {}",
                n_stages - 1,
                signals.len()
            )));
        }
        if let Some(bad) = signals.iter().position(|s| s.len() != m) {
            return Err(Error::Structure(format!(
                "signal {bad} does not have one value per atom"
            )));
        }
        let mut stages = vec![Partition::trivial(m)];
        // cell label per atom, refined one signal at a time
        let mut label = vec![0usize; m];
        for signal in signals.iter().take(n_stages - 1) {
            let mut index: HashMap<(usize, K), usize> = HashMap::new();
            let mut cells: Vec<Vec<usize>> = Vec::new();
            for atom in 0..m {
                let key = (label[atom], signal[atom].clone());
                let next = cells.len();
                let c = *index.entry(key).or_insert(next);
                if c == next {
                    cells.push(Vec::new());
                }
                cells[c].push(atom);
                label[atom] = c;
            }
            stages.push(Partition::new(cells, m)?);
        }
        Self::new(space, stages, stage_dims)
    }

    /// Two stages: deterministic first block, fully observed second block.
    pub fn two_stage(space: Arc<SampleSpace>, n0: usize, n1: usize) -> Result<Self> {
        let m = space.atom_count();
        Self::new(space, vec![Partition::trivial(m), Partition::finest(m)], vec![n0, n1])
    }

    pub fn space(&self) -> &Arc<SampleSpace> {
        &self.space
    }

    pub fn stages(&self) -> &[Partition] {
        &self.stages
    }

    pub fn stage_dims(&self) -> &[usize] {
        &self.stage_dims
    }

    pub fn dim(&self) -> usize {
        self.stage_dims.iter().sum()
    }

    fn check(&self, x: &RandomVector) -> Result<()> {
        if !same_space(&self.space, x.space()) {
            return Err(Error::Shape("random vector and filtration live on different spaces".into()));
        }
        if x.blocks() != self.stage_dims.as_slice() {
            return Err(Error::Shape(format!(
                "blocks {:?} do not match stage dimensions {:?}",
                x.blocks(),
                self.stage_dims
            )));
        }
        Ok(())
    }

    /// Zero random vector with this filtration's block structure.
    pub fn zeros(&self) -> RandomVector {
        RandomVector::zeros(Arc::clone(&self.space), self.stage_dims.clone())
            .expect("stage dims validated at construction")
    }

    /// Orthogonal projection onto the nonanticipativity subspace N.
    pub fn project_nonanticipativity(&self, x: &RandomVector) -> Result<RandomVector> {
        self.check(x)?;
        let mut out = x.clone();
        self.project_into(x.values(), out.values_mut())?;
        Ok(out)
    }

    pub(crate) fn project_into(&self, src: &[f64], dst: &mut [f64]) -> Result<()> {
        let p = self.space.probabilities();
        let dim = self.dim();
        let mut start = 0;
        for (stage, &width) in self.stages.iter().zip(&self.stage_dims) {
            condition_columns(p, src, dst, dim, start..start + width, stage)?;
            start += width;
        }
        Ok(())
    }

    /// Orthogonal projection onto the complement M = N^⊥, i.e. `x - Π_N(x)`.
    pub fn project_complement(&self, x: &RandomVector) -> Result<RandomVector> {
        let n = self.project_nonanticipativity(x)?;
        x.sub(&n)
    }

    /// Largest entrywise gap `|x - Π_N(x)|`.
    pub fn nonanticipativity_gap(&self, x: &RandomVector) -> Result<f64> {
        let n = self.project_nonanticipativity(x)?;
        Ok(x
            .values()
            .iter()
            .zip(n.values())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}
