//! JSON problem files.
//!
//! A file is either an explicit instance
//!
//! ```json
//! {
//!   "probabilities": [0.5, 0.5],
//!   "stages": [[[0, 1]], [[0], [1]]],
//!   "stage_dims": [1, 1],
//!   "sets": [[{"kind": "box", "lower": [-1, -1], "upper": [1, 1]}], ...],
//!   "operator": {"matrices": [[[1, 0], [0, 1]], ...], "offsets": [[0, 0], ...]},
//!   "known_solution": null,
//!   "seed": 7
//! }
//! ```
//!
//! with one set product per atom, or a generator reference
//! `{"generator": {"family": "random_affine", "m": 10, "n0": 5, "n1": 5, "seed": 7}}`.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convex_sets::{ConvexSet, PointwiseSet, SetProduct};
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::operators::AffineOperator;
use crate::prob_space::{Partition, RandomVector, SampleSpace};
use crate::problems::{GeneratorSpec, ProblemInstance};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorData {
    matrices: Vec<Vec<Vec<f64>>>,
    offsets: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemData {
    probabilities: Vec<f64>,
    stages: Vec<Vec<Vec<usize>>>,
    stage_dims: Vec<usize>,
    sets: Vec<Vec<ConvexSet>>,
    operator: OperatorData,
    #[serde(default)]
    known_solution: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorData {
    generator: GeneratorSpec,
}

fn to_data(instance: &ProblemInstance) -> ProblemData {
    let m = instance.atom_count();
    ProblemData {
        probabilities: instance.space.probabilities().to_vec(),
        stages: instance
            .filtration
            .stages()
            .iter()
            .map(|p| p.cells().to_vec())
            .collect(),
        stage_dims: instance.filtration.stage_dims().to_vec(),
        sets: (0..m).map(|i| instance.sets.product(i).factors().to_vec()).collect(),
        operator: OperatorData {
            matrices: (0..m).map(|i| instance.operator.matrix_rows(i)).collect(),
            offsets: (0..m).map(|i| instance.operator.offset(i).to_vec()).collect(),
        },
        known_solution: instance.known_solution.as_ref().map(RandomVector::to_rows),
        seed: instance.seed,
    }
}

fn as_validation(err: Error) -> Error {
    match err {
        Error::Structure(msg) | Error::Shape(msg) => Error::Validation(msg),
        other => other,
    }
}

fn from_data(data: ProblemData) -> Result<ProblemInstance> {
    let space = Arc::new(SampleSpace::new(data.probabilities)?);
    let m = space.atom_count();
    let stages = data
        .stages
        .into_iter()
        .map(|cells| Partition::new(cells, m))
        .collect::<Result<Vec<_>>>()
        .map_err(as_validation)?;
    let filtration = Filtration::new(Arc::clone(&space), stages, data.stage_dims.clone()).map_err(as_validation)?;
    let products = data
        .sets
        .into_iter()
        .map(SetProduct::new)
        .collect::<Result<Vec<_>>>()?;
    let sets = PointwiseSet::per_atom(Arc::clone(&space), products).map_err(as_validation)?;
    let operator = AffineOperator::from_rows(Arc::clone(&space), &data.operator.matrices, &data.operator.offsets)
        .map_err(as_validation)?;
    let known = data
        .known_solution
        .map(|rows| RandomVector::from_rows(Arc::clone(&space), &rows, data.stage_dims.clone()))
        .transpose()
        .map_err(as_validation)?;
    ProblemInstance::new(filtration, sets, operator, known, data.seed).map_err(as_validation)
}

pub fn problem_to_json(instance: &ProblemInstance) -> Result<String> {
    serde_json::to_string(&to_data(instance)).map_err(|e| Error::Parse(e.to_string()))
}

pub fn problem_from_json(text: &str) -> Result<ProblemInstance> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if value.get("generator").is_some() {
        let spec: GeneratorData = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        return spec.generator.generate();
    }
    let data: ProblemData = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    from_data(data)
}

pub fn save_problem(instance: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    let mut text = problem_to_json(instance)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let text = fs::read_to_string(path)?;
    problem_from_json(&text)
}

/// Write a generator reference instead of the expanded instance.
pub fn save_generator(spec: &GeneratorSpec, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string(&GeneratorData { generator: spec.clone() })
        .map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
