//! Benchmark harness: run either solver over repeated trials and write
//! per-iteration traces and per-algorithm summaries as CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pc_admm::{self, PcAdmmParams};
use crate::pha::{self, PhaParams};
use crate::prob_space::l2_distance;
use crate::problem_file::load_problem;
use crate::problems::{GeneratorSpec, ProblemInstance};
use crate::report::{Algorithm, SolverReport};

pub const TRACE_HEADER: &str = "iter,err,d_gnorm,phi,elapsed_ms";
pub const SUMMARY_HEADER: &str = "algo,m,n,eps,avg_iter,avg_time_ms";
pub const TRIALS_HEADER: &str = "algo,trial,seed,iterations,converged,final_err,time_ms,known_dist,failure";

/// Accuracy of the reference solution used for contraction checks.
pub const REFERENCE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    /// Trial `k` uses the generator with its seed advanced by `k`.
    Generator(GeneratorSpec),
    /// Every trial solves the same file.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub eps: f64,
    pub max_iter: usize,
    pub alpha: f64,
    pub beta_scale: f64,
    pub assert_theory: bool,
    /// PHA inner tolerance; `eps / 10` when unset.
    pub inner_tol: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            eps: 1e-5,
            max_iter: 100_000,
            alpha: PcAdmmParams::DEFAULT_ALPHA,
            beta_scale: PcAdmmParams::DEFAULT_BETA_SCALE,
            assert_theory: false,
            inner_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: ProblemSource,
    pub algorithms: Vec<Algorithm>,
    pub settings: SolverSettings,
    pub trials: usize,
    /// Directory receiving `summary.csv`, `trials.csv` and one trace per
    /// (algorithm, trial). Nothing is written when unset.
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithm selected".into()));
        }
        if !(self.settings.eps > 0.0) || self.settings.max_iter == 0 {
            return Err(Error::Config("eps and max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub algo: Algorithm,
    pub trial: usize,
    pub seed: Option<u64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_err: f64,
    pub time_ms: f64,
    /// `||x - x_known||_{L²}` when the instance carries a known solution.
    pub known_dist: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoSummary {
    pub algo: Algorithm,
    pub m: usize,
    pub n: usize,
    pub eps: f64,
    pub avg_iter: f64,
    pub avg_time_ms: f64,
    pub avg_known_dist: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub algorithms: Vec<AlgoSummary>,
    pub trials: Vec<TrialRow>,
}

impl BenchSummary {
    pub fn all_converged(&self) -> bool {
        self.trials.iter().all(|t| t.converged)
    }

    pub fn get(&self, algo: Algorithm) -> Option<&AlgoSummary> {
        self.algorithms.iter().find(|a| a.algo == algo)
    }

    pub fn summary_csv(&self) -> String {
        let with_known = self.algorithms.iter().any(|a| a.avg_known_dist.is_some());
        let mut out = String::from(SUMMARY_HEADER);
        if with_known {
            out.push_str(",avg_known_dist");
        }
        out.push('\n');
        for a in &self.algorithms {
            let _ = write!(out, "{},{},{},{},{},{:.3}", a.algo, a.m, a.n, a.eps, a.avg_iter, a.avg_time_ms);
            if with_known {
                out.push(',');
                if let Some(d) = a.avg_known_dist {
                    let _ = write!(out, "{d}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn trials_csv(&self) -> String {
        let mut out = format!("{TRIALS_HEADER}\n");
        for t in &self.trials {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.3},{},{}",
                t.algo,
                t.trial,
                t.seed.map(|s| s.to_string()).unwrap_or_default(),
                t.iterations,
                t.converged,
                t.final_err,
                t.time_ms,
                t.known_dist.map(|d| d.to_string()).unwrap_or_default(),
                t.failure.as_deref().unwrap_or("").replace(',', ";"),
            );
        }
        out
    }
}

/// Per-iteration trace as CSV with header [`TRACE_HEADER`].
pub fn trace_csv(report: &SolverReport) -> String {
    let mut out = format!("{TRACE_HEADER}\n");
    for r in &report.trace {
        let phi = r.phi.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{:.3}", r.iter, r.err, r.d_gnorm, phi, r.elapsed_ms);
    }
    out
}

/// Solve `instance` with one algorithm using the CLI-level settings.
pub fn run_solver(instance: &ProblemInstance, algo: Algorithm, settings: &SolverSettings) -> Result<SolverReport> {
    let problem = instance.msvi();
    let lipschitz = instance.operator_lipschitz();
    match algo {
        Algorithm::PcAdmm => {
            let mut params = PcAdmmParams {
                alpha: settings.alpha,
                eps: settings.eps,
                max_iter: settings.max_iter,
                assert_theory: settings.assert_theory,
                ..PcAdmmParams::for_lipschitz(lipschitz, settings.beta_scale)
            };
            let start = pc_admm::default_start(&problem)?;
            if settings.assert_theory {
                params.reference = Some(reference_solution(instance, settings)?);
            }
            pc_admm::solve(&problem, &params, &start)
        }
        Algorithm::Pha => {
            let mut params = PhaParams {
                max_iter: settings.max_iter,
                ..PhaParams::for_lipschitz(lipschitz, settings.beta_scale, settings.eps)
            };
            if let Some(tol) = settings.inner_tol {
                params.inner_tol = tol;
            }
            let (u0, v0) = pha::default_start(&problem)?;
            pha::solve(&problem, &params, &u0, &v0)
        }
    }
}

/// High-accuracy PC-ADMM solution (`Err < REFERENCE_EPS`) for contraction checks.
pub fn reference_solution(instance: &ProblemInstance, settings: &SolverSettings) -> Result<pc_admm::Triplet> {
    let problem = instance.msvi();
    let params = PcAdmmParams {
        alpha: settings.alpha,
        eps: REFERENCE_EPS,
        max_iter: settings.max_iter.max(1_000_000),
        ..PcAdmmParams::for_lipschitz(instance.operator_lipschitz(), settings.beta_scale)
    };
    let start = pc_admm::default_start(&problem)?;
    let report = pc_admm::solve(&problem, &params, &start)?;
    if !report.converged() {
        return Err(Error::Validation(format!(
            "reference solve stalled at residual {:e}",
            report.final_err
        )));
    }
    Ok(report.certificate)
}

fn instance_for(source: &ProblemSource, trial: usize) -> Result<ProblemInstance> {
    match source {
        ProblemSource::Generator(spec) => spec.with_seed_offset(trial as u64).generate(),
        ProblemSource::File(path) => load_problem(path).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read {}: {io}", path.display())),
            other => other,
        }),
    }
}

/// Execute every (trial, algorithm) pair, then write artifacts when an
/// output directory is configured. Solver failures are recorded in the
/// summary rather than returned as errors.
pub fn run(config: &RunConfig) -> Result<BenchSummary> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    let mut shape = (0, 0);
    for trial in 0..config.trials {
        let instance = instance_for(&config.source, trial)?;
        shape = (instance.atom_count(), instance.dim());
        for &algo in &config.algorithms {
            let row = match run_solver(&instance, algo, &config.settings) {
                Ok(report) => {
                    let known_dist = instance
                        .known_solution
                        .as_ref()
                        .map(|k| l2_distance(&report.certificate.x, k))
                        .transpose()?;
                    traces.push((algo, trial, trace_csv(&report)));
                    TrialRow {
                        algo,
                        trial,
                        seed: instance.seed,
                        iterations: report.iterations,
                        converged: report.converged(),
                        final_err: report.final_err,
                        time_ms: report.solve_time.as_secs_f64() * 1e3,
                        known_dist,
                        failure: (!report.converged()).then(|| "iteration limit".to_string()),
                    }
                }
                Err(e @ (Error::TheoryViolation { .. } | Error::InnerNonConvergence { .. })) => TrialRow {
                    algo,
                    trial,
                    seed: instance.seed,
                    iterations: 0,
                    converged: false,
                    final_err: f64::NAN,
                    time_ms: 0.0,
                    known_dist: None,
                    failure: Some(e.to_string()),
                },
                Err(e) => return Err(e),
            };
            rows.push(row);
        }
    }

    let algorithms = config
        .algorithms
        .iter()
        .map(|&algo| {
            let mine: Vec<&TrialRow> = rows.iter().filter(|r| r.algo == algo).collect();
            let count = mine.len() as f64;
            let known: Vec<f64> = mine.iter().filter_map(|r| r.known_dist).collect();
            AlgoSummary {
                algo,
                m: shape.0,
                n: shape.1,
                eps: config.settings.eps,
                avg_iter: mine.iter().map(|r| r.iterations as f64).sum::<f64>() / count,
                avg_time_ms: mine.iter().map(|r| r.time_ms).sum::<f64>() / count,
                avg_known_dist: (!known.is_empty()).then(|| known.iter().sum::<f64>() / known.len() as f64),
            }
        })
        .collect();
    let summary = BenchSummary {
        algorithms,
        trials: rows,
    };

    if let Some(dir) = &config.out_dir {
        write_artifacts(dir, &summary, &traces)?;
    }
    Ok(summary)
}

fn write_artifacts(dir: &Path, summary: &BenchSummary, traces: &[(Algorithm, usize, String)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (algo, trial, csv) in traces {
        fs::write(dir.join(trace_file_name(*algo, *trial)), csv)?;
    }
    fs::write(dir.join("summary.csv"), summary.summary_csv())?;
    fs::write(dir.join("trials.csv"), summary.trials_csv())?;
    Ok(())
}

pub fn trace_file_name(algo: Algorithm, trial: usize) -> String {
    format!("trace_{algo}_{trial:03}.csv")
}

/// Drop the named column from a CSV document (used to compare traces
/// without wall-clock data).
pub fn strip_column(csv: &str, column: &str) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else {
        return String::new();
    };
    let idx = header.split(',').position(|c| c == column);
    let keep = |line: &str| -> String {
        line.split(',')
            .enumerate()
            .filter(|(i, _)| Some(*i) != idx)
            .map(|(_, c)| c)
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = keep(header);
    out.push('\n');
    for line in lines {
        out.push_str(&keep(line));
        out.push('\n');
    }
    out
}
