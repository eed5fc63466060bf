use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::error::Error;
use crate::pc_admm::Triplet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    PcAdmm,
    Pha,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::PcAdmm => "pc_admm",
            Algorithm::Pha => "pha",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pc_admm" => Ok(Algorithm::PcAdmm),
            "pha" => Ok(Algorithm::Pha),
            other => Err(Error::Config(format!(
                "unknown algorithm `{other}` (expected pc_admm or pha)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration index.
    pub iter: usize,
    /// Stopping residual after the update.
    pub err: f64,
    /// G-norm of the correction direction (PC-ADMM) or of the step in the
    /// `(u, v)` metric (PHA).
    pub d_gnorm: f64,
    /// Descent quantity of the correction step; PC-ADMM only.
    pub phi: Option<f64>,
    /// Wall time since the solve started.
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SolverReport {
    pub algorithm: Algorithm,
    pub status: Status,
    pub iterations: usize,
    pub final_err: f64,
    pub trace: Vec<IterationRecord>,
    /// Final `(x, y, λ)`. For PHA this is `(û, u, -v)`.
    pub certificate: Triplet,
    pub solve_time: Duration,
    /// Total pointwise inner iterations (PHA); zero for PC-ADMM.
    pub inner_iterations: usize,
}

impl SolverReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}
