//! Explicit prediction-correction ADMM.
//!
//! Each iteration predicts a trial triplet with three explicit steps (a
//! pointwise projection onto `C`, a conditional-expectation projection onto
//! `N`, and a multiplier update), then corrects along
//! `d = θ - θ̃ - G⁻¹ζ` with step `α`. With `r > 1 + L_F/β` the descent
//! quantity satisfies `φ >= ½||d||²_G` and the iterates are Fejér monotone
//! in the G-norm with respect to any solution; both facts can be checked at
//! runtime with [`PcAdmmParams::assert_theory`].

use std::time::Instant;

use crate::error::{Error, Result};
use crate::operators::{residual_with_image, MonotoneOperator};
use crate::prob_space::{l2_inner, l2_norm, weighted_inner, RandomVector};
use crate::problems::Msvi;
use crate::report::{Algorithm, IterationRecord, SolverReport, Status};

/// Slack on `φ >= ½||d||²_G`.
pub const DESCENT_SLACK: f64 = 1e-10;
/// Slack on the G-norm contraction against a reference solution.
pub const CONTRACTION_SLACK: f64 = 1e-8;
/// Pointwise tolerance for `x̃ ∈ C` and `ỹ ∈ N`, relative to `max(1, |ỹ|_∞)`.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// The state `θ = (x, y, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplet {
    pub x: RandomVector,
    pub y: RandomVector,
    pub lam: RandomVector,
}

impl Triplet {
    pub fn new(x: RandomVector, y: RandomVector, lam: RandomVector) -> Result<Self> {
        x.check_compatible(&y)?;
        x.check_compatible(&lam)?;
        if x.blocks() != y.blocks() || x.blocks() != lam.blocks() {
            return Err(Error::Shape("triplet components have different block structures".into()));
        }
        Ok(Self { x, y, lam })
    }

    pub fn sub(&self, other: &Triplet) -> Result<Triplet> {
        Ok(Triplet {
            x: self.x.sub(&other.x)?,
            y: self.y.sub(&other.y)?,
            lam: self.lam.sub(&other.lam)?,
        })
    }

    fn check(&self, other: &Triplet) -> Result<()> {
        self.x.check_compatible(&other.x)?;
        self.y.check_compatible(&other.y)?;
        self.lam.check_compatible(&other.lam)
    }
}

/// `G(θ) = (βr x, β y, λ/β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GMetric {
    pub beta: f64,
    pub r: f64,
}

impl GMetric {
    pub fn new(beta: f64, r: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0 && r.is_finite() && r > 0.0) {
            return Err(Error::Validation(format!("G-metric needs beta, r > 0 (got {beta}, {r})")));
        }
        Ok(Self { beta, r })
    }

    /// `r > 1 + L_F/β` is what makes the correction a descent direction.
    pub fn check_lipschitz(&self, lipschitz: f64) -> Result<()> {
        let bound = 1.0 + lipschitz / self.beta;
        if self.r <= bound {
            return Err(Error::Validation(format!(
                "r = {} must exceed 1 + L_F/beta = {bound}",
                self.r
            )));
        }
        Ok(())
    }

    fn weighted_sq(&self, x: f64, y: f64, lam: f64) -> f64 {
        self.beta * self.r * x + self.beta * y + lam / self.beta
    }
}

/// `||θ||_G = sqrt(βr||x||² + β||y||² + ||λ||²/β)`.
pub fn g_norm(theta: &Triplet, g: &GMetric) -> f64 {
    let sq = |v: &RandomVector| l2_norm(v).powi(2);
    g.weighted_sq(sq(&theta.x), sq(&theta.y), sq(&theta.lam)).sqrt()
}

/// `||a - b||_G`.
pub fn g_distance(a: &Triplet, b: &Triplet, g: &GMetric) -> Result<f64> {
    Ok(g_norm(&a.sub(b)?, g))
}

#[derive(Debug, Clone)]
pub struct PcAdmmParams {
    pub alpha: f64,
    pub beta: f64,
    pub r: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub assert_theory: bool,
    /// High-accuracy solution used for the contraction check when
    /// `assert_theory` is on.
    pub reference: Option<Triplet>,
}

impl PcAdmmParams {
    pub const DEFAULT_ALPHA: f64 = 0.61;
    pub const DEFAULT_BETA_SCALE: f64 = 1.1;
    pub const DEFAULT_R_MARGIN: f64 = 1.1;

    /// `α = 0.61`, `β = beta_scale · L_F`, `r = 1.1 + L_F/β`. A zero operator
    /// gets `β = beta_scale`.
    pub fn for_lipschitz(lipschitz: f64, beta_scale: f64) -> Self {
        let beta = if lipschitz > 0.0 { beta_scale * lipschitz } else { beta_scale };
        Self {
            alpha: Self::DEFAULT_ALPHA,
            beta,
            r: Self::DEFAULT_R_MARGIN + lipschitz / beta,
            eps: 1e-5,
            max_iter: 100_000,
            assert_theory: false,
            reference: None,
        }
    }

    pub fn metric(&self) -> Result<GMetric> {
        GMetric::new(self.beta, self.r)
    }

    pub fn validate(&self, lipschitz: f64) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Validation(format!("alpha = {} must lie in (0, 1)", self.alpha)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Validation(format!("eps = {} must be positive", self.eps)));
        }
        if self.max_iter == 0 {
            return Err(Error::Validation("max_iter must be positive".into()));
        }
        self.metric()?.check_lipschitz(lipschitz)
    }
}

/// `x⁰ = Π_C(0)`, `y⁰ = Π_N(x⁰)`, `λ⁰ = 0`.
pub fn default_start(problem: &Msvi<'_>) -> Result<Triplet> {
    let zero = problem.filtration.zeros();
    let x = problem.sets.project_random_vector(&zero)?;
    let y = problem.filtration.project_nonanticipativity(&x)?;
    Triplet::new(x, y, zero)
}

/// Prediction step. `x̃ = Π_C(x - [F(x) - λ + β(x - y)]/(βr))`,
/// `ỹ = Π_N(y - [λ - β(x̃ - y)]/β)`, `λ̃ = λ - β(x̃ - ỹ)`.
pub fn predict(theta: &Triplet, problem: &Msvi<'_>, g: &GMetric) -> Result<Triplet> {
    let fx = problem.operator.evaluate(&theta.x)?;
    predict_with_image(theta, &fx, problem, g)
}

fn predict_with_image(theta: &Triplet, fx: &RandomVector, problem: &Msvi<'_>, g: &GMetric) -> Result<Triplet> {
    let mut x_t = theta.x.clone();
    let mut y_t = theta.y.clone();
    let mut l_t = theta.lam.clone();
    let mut scratch = vec![0.0; theta.x.values().len()];
    predict_kernel(theta, fx, problem, g, &mut x_t, &mut y_t, &mut l_t, &mut scratch)?;
    Ok(Triplet {
        x: x_t,
        y: y_t,
        lam: l_t,
    })
}

#[allow(clippy::too_many_arguments)]
fn predict_kernel(
    theta: &Triplet,
    fx: &RandomVector,
    problem: &Msvi<'_>,
    g: &GMetric,
    x_t: &mut RandomVector,
    y_t: &mut RandomVector,
    l_t: &mut RandomVector,
    scratch: &mut [f64],
) -> Result<()> {
    theta.x.check_compatible(fx)?;
    let (beta, r) = (g.beta, g.r);
    let (x, y, lam) = (theta.x.values(), theta.y.values(), theta.lam.values());

    let xv = x_t.values_mut();
    for i in 0..xv.len() {
        xv[i] = x[i] - (fx.values()[i] - lam[i] + beta * (x[i] - y[i])) / (beta * r);
    }
    problem.sets.project_rows_in_place(xv);

    let xt = x_t.values();
    for i in 0..scratch.len() {
        scratch[i] = y[i] - (lam[i] - beta * (xt[i] - y[i])) / beta;
    }
    problem.filtration.project_into(scratch, y_t.values_mut())?;

    let yt = y_t.values();
    let lv = l_t.values_mut();
    for i in 0..lv.len() {
        lv[i] = lam[i] - beta * (xt[i] - yt[i]);
    }
    Ok(())
}

/// `d = θ - θ̃ - G⁻¹ζ` with `ζ = (F(x) - F(x̃) + β(x - x̃), 0, 0)`.
pub fn correction_direction(
    theta: &Triplet,
    theta_tilde: &Triplet,
    op: &dyn MonotoneOperator,
    g: &GMetric,
) -> Result<Triplet> {
    theta.check(theta_tilde)?;
    let fx = op.evaluate(&theta.x)?;
    let fxt = op.evaluate(&theta_tilde.x)?;
    let mut d = theta.sub(theta_tilde)?;
    direction_x(&theta.x, &theta_tilde.x, &fx, &fxt, g, d.x.values_mut());
    Ok(d)
}

fn direction_x(x: &RandomVector, x_t: &RandomVector, fx: &RandomVector, fxt: &RandomVector, g: &GMetric, out: &mut [f64]) {
    let (x, xt, fx, fxt) = (x.values(), x_t.values(), fx.values(), fxt.values());
    let br = g.beta * g.r;
    for i in 0..out.len() {
        let zeta = fx[i] - fxt[i] + g.beta * (x[i] - xt[i]);
        out[i] = x[i] - xt[i] - zeta / br;
    }
}

/// `φ = <λ - λ̃, ỹ - y> + <θ - θ̃, G d>`.
pub fn phi(theta: &Triplet, theta_tilde: &Triplet, d: &Triplet, g: &GMetric) -> Result<f64> {
    let diff = theta.sub(theta_tilde)?;
    diff.check(d)?;
    let coupling = -l2_inner(&diff.lam, &diff.y)?;
    let gd = g.weighted_sq(
        l2_inner(&diff.x, &d.x)?,
        l2_inner(&diff.y, &d.y)?,
        l2_inner(&diff.lam, &d.lam)?,
    );
    Ok(coupling + gd)
}

/// Run the method from `start` until the stopping residual drops below
/// `params.eps` or `params.max_iter` iterations have been taken.
///
/// Exhausting the iteration budget is reported through
/// [`Status::MaxIterations`]. With `assert_theory` on, a violated
/// descent, feasibility or contraction inequality aborts with
/// [`Error::TheoryViolation`].
pub fn solve(problem: &Msvi<'_>, params: &PcAdmmParams, start: &Triplet) -> Result<SolverReport> {
    let op = problem.operator;
    params.validate(op.lipschitz())?;
    let g = params.metric()?;
    if start.x.blocks() != problem.filtration.stage_dims() {
        return Err(Error::Shape("start does not match the stage structure".into()));
    }
    start.check(start)?;
    let c_gap = problem.sets.infeasibility(&start.x)?;
    let n_gap = problem.filtration.nonanticipativity_gap(&start.y)?;
    if c_gap > 1e-9 || n_gap > 1e-9 {
        return Err(Error::Validation(format!(
            "start must satisfy x ∈ C and y ∈ N (gaps {c_gap:e}, {n_gap:e})"
        )));
    }
    if let Some(reference) = &params.reference {
        start.check(reference)?;
    }

    let p = problem.space().probabilities().to_vec();
    let dim = problem.dim();
    let len = start.x.values().len();
    let alpha = params.alpha;
    let clock = Instant::now();

    let mut theta = start.clone();
    let mut fx = op.evaluate(&theta.x)?;
    let mut err = residual_with_image(&fx, problem.sets, &theta.x, &theta.y, &theta.lam)?;
    let mut tilde = theta.clone();
    let mut fxt = fx.clone();
    let mut dx = vec![0.0; len];
    let mut scratch = vec![0.0; len];
    let mut trace = Vec::new();
    let mut ref_dist_sq = params
        .reference
        .as_ref()
        .filter(|_| params.assert_theory)
        .map(|r| g_distance(&theta, r, &g).map(|d| d * d))
        .transpose()?;

    let mut iterations = 0;
    while err >= params.eps && iterations < params.max_iter {
        iterations += 1;
        predict_kernel(&theta, &fx, problem, &g, &mut tilde.x, &mut tilde.y, &mut tilde.lam, &mut scratch)?;
        op.evaluate_into(&tilde.x, &mut fxt)?;
        direction_x(&theta.x, &tilde.x, &fx, &fxt, &g, &mut dx);

        let (x, y, lam) = (theta.x.values(), theta.y.values(), theta.lam.values());
        let (xt, yt, lt) = (tilde.x.values(), tilde.y.values(), tilde.lam.values());
        // with d_y = y - ỹ and d_λ = λ - λ̃
        let sq_x = weighted_inner(&p, &dx, &dx, dim);
        let mut sq_y = 0.0;
        let mut sq_l = 0.0;
        let mut dot_xd = 0.0;
        let mut coupling = 0.0;
        for (atom, &w) in p.iter().enumerate() {
            let range = atom * dim..(atom + 1) * dim;
            let (mut sy, mut sl, mut sxd, mut c) = (0.0, 0.0, 0.0, 0.0);
            for i in range {
                let dy = y[i] - yt[i];
                let dl = lam[i] - lt[i];
                sy += dy * dy;
                sl += dl * dl;
                sxd += (x[i] - xt[i]) * dx[i];
                c -= dl * dy;
            }
            sq_y += w * sy;
            sq_l += w * sl;
            dot_xd += w * sxd;
            coupling += w * c;
        }
        let d_sq = g.weighted_sq(sq_x, sq_y, sq_l);
        let phi_k = coupling + g.weighted_sq(dot_xd, sq_y, sq_l);

        if params.assert_theory {
            check_descent(iterations, phi_k, d_sq)?;
            check_prediction_feasible(iterations, problem, &tilde)?;
        }

        {
            let xv = theta.x.values_mut();
            for i in 0..len {
                xv[i] -= alpha * dx[i];
            }
        }
        {
            let yv = theta.y.values_mut();
            for i in 0..len {
                yv[i] -= alpha * (yv[i] - yt[i]);
            }
        }
        {
            let lv = theta.lam.values_mut();
            for i in 0..len {
                lv[i] -= alpha * (lv[i] - lt[i]);
            }
        }

        if let (Some(reference), Some(prev)) = (params.reference.as_ref(), ref_dist_sq) {
            let next = g_distance(&theta, reference, &g)?.powi(2);
            let bound = prev - alpha * (1.0 - alpha) * d_sq + CONTRACTION_SLACK;
            if next > bound {
                return Err(Error::TheoryViolation {
                    inequality: "||θ⁺ - θ*||²_G <= ||θ - θ*||²_G - α(1-α)||d||²_G",
                    iteration: iterations,
                    lhs: bound,
                    rhs: next,
                });
            }
            ref_dist_sq = Some(next);
        }

        op.evaluate_into(&theta.x, &mut fx)?;
        err = residual_with_image(&fx, problem.sets, &theta.x, &theta.y, &theta.lam)?;
        trace.push(IterationRecord {
            iter: iterations,
            err,
            d_gnorm: d_sq.sqrt(),
            phi: Some(phi_k),
            elapsed_ms: clock.elapsed().as_secs_f64() * 1e3,
        });
    }

    let status = if err < params.eps { Status::Converged } else { Status::MaxIterations };
    Ok(SolverReport {
        algorithm: Algorithm::PcAdmm,
        status,
        iterations,
        final_err: err,
        trace,
        certificate: theta,
        solve_time: clock.elapsed(),
        inner_iterations: 0,
    })
}

fn check_descent(iteration: usize, phi: f64, d_sq: f64) -> Result<()> {
    if phi < 0.5 * d_sq - DESCENT_SLACK {
        return Err(Error::TheoryViolation {
            inequality: "φ >= ½||d||²_G",
            iteration,
            lhs: phi,
            rhs: 0.5 * d_sq,
        });
    }
    Ok(())
}

fn check_prediction_feasible(iteration: usize, problem: &Msvi<'_>, tilde: &Triplet) -> Result<()> {
    let c_gap = problem.sets.infeasibility(&tilde.x)?;
    if c_gap > FEASIBILITY_TOL * tilde.x.max_abs().max(1.0) {
        return Err(Error::TheoryViolation {
            inequality: "x̃ ∈ C",
            iteration,
            lhs: 0.0,
            rhs: c_gap,
        });
    }
    let n_gap = problem.filtration.nonanticipativity_gap(&tilde.y)?;
    if n_gap > FEASIBILITY_TOL * tilde.y.max_abs().max(1.0) {
        return Err(Error::TheoryViolation {
            inequality: "ỹ ∈ N",
            iteration,
            lhs: 0.0,
            rhs: n_gap,
        });
    }
    Ok(())
}
