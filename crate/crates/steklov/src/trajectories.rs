//! The trajectory algorithms: follow the minimizer curve of a regularized
//! surface from a convexifying `t0` down to `t = 0`.
//!
//! * [`run_steklov`] — the general method. Step 1 picks `t0` and solves
//!   `f(x0 + t0) = f(x0 - t0)`; Step 2 integrates
//!   `dx/dt = -(f'(x+t) + f'(x-t)) / (f'(x+t) - f'(x-t))`; Step 3 reports
//!   `x(0)`.
//! * [`run_steklov_quartic`] — the closed-form specialization for monic
//!   quartics: depress, start at `t0 = sqrt(-a2/2)`, `x0 = -cbrt(a1/4)`,
//!   integrate `dx/dt = -4tx / (6x^2 + 2t^2 + a2)` and map back.
//! * [`run_quadratic`] — the baseline using `phi(x,t) = f(x) + (t/2) x^2`,
//!   integrating `dx/dt = -x / (f''(x) + t)`. Expected to fail often; kept
//!   for comparison.
//!
//! [`classify`] grades a run against oracle ground truth.

use crate::ivp::{IvpOptions, IvpProblem, IvpStatus, Trajectory};
use crate::oracle::OracleResult;
use crate::polyalg::Polynomial;
use crate::regularize::{
    self, ConvexifyOpts, ObjectiveFunction, RegularizerKind, StartPoint, quartic_quasiconvexity,
    quartic_start, solve_x0,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("this method needs a monic quartic polynomial: {0}")]
    NotMonicQuartic(#[from] crate::polyalg::PolyError),
    #[error("explicit t0 mode needs a positive t0 in the run configuration")]
    MissingExplicitT0,
    #[error("quasi-convexify mode is only available for monic quartic objectives")]
    QuasiConvexifyUnavailable,
    #[error("the quadratic method needs a second derivative")]
    MissingSecondDerivative,
    #[error("could not construct a convexifying t0: {0}")]
    ConvexifyFailed(#[from] regularize::RegularizeError),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(#[from] crate::ivp::IvpError),
}

/// How Step 1 obtains `t0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum T0Mode {
    /// Construct a convexifying `t0` (closed form for quartics, the
    /// constructive search otherwise).
    #[default]
    Convexify,
    /// Use the quasi-convexity threshold plus a small margin; quartics only.
    QuasiConvexify,
    /// Take `t0` from the configuration.
    Explicit,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub t0: Option<f64>,
    pub t0_mode: T0Mode,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub record_trajectory: bool,
    /// Bracket for convexifying non-polynomial objectives.
    pub convexify_bracket: Option<(f64, f64)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t0: None,
            t0_mode: T0Mode::Convexify,
            rtol: 1e-8,
            atol: 1e-12,
            max_steps: 1_000_000,
            record_trajectory: true,
            convexify_bracket: None,
        }
    }
}

impl RunConfig {
    pub fn explicit_t0(t0: f64) -> Self {
        RunConfig {
            t0: Some(t0),
            t0_mode: T0Mode::Explicit,
            ..RunConfig::default()
        }
    }

    fn ivp_options(&self) -> IvpOptions {
        IvpOptions {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            min_step: None,
            denom_floor: None,
            record: self.record_trajectory,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Steklov,
    SteklovQuartic,
    Quadratic,
}

/// Terminal state of a run; the trajectory statuses plus a Step-1 failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    ReachedZero,
    SingularDenominator,
    StepBudgetExhausted,
    StepUnderflow,
    StartFailed,
}

impl From<IvpStatus> for RunStatus {
    fn from(s: IvpStatus) -> Self {
        match s {
            IvpStatus::ReachedZero => RunStatus::ReachedZero,
            IvpStatus::SingularDenominator => RunStatus::SingularDenominator,
            IvpStatus::StepBudgetExhausted => RunStatus::StepBudgetExhausted,
            IvpStatus::StepUnderflow => RunStatus::StepUnderflow,
        }
    }
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::ReachedZero => "reached-zero",
            RunStatus::SingularDenominator => "singular-denominator",
            RunStatus::StepBudgetExhausted => "step-budget-exhausted",
            RunStatus::StepUnderflow => "step-underflow",
            RunStatus::StartFailed => "start-failed",
        }
    }
}

/// Outcome of one algorithm run. On failure `x_final` is the last trajectory
/// point — a diagnostic, never a minimizer claim.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub method: Method,
    /// Absent when Step 1 failed or was skipped (convex shortcut).
    pub start: Option<StartPoint>,
    pub trajectory: Trajectory,
    pub x_final: f64,
    pub f_final: f64,
    pub status: RunStatus,
    /// The symmetric twin minimizer in the `a1 = 0` quartic case.
    pub alt_minimizer: Option<f64>,
    pub warnings: Vec<String>,
}

impl RunResult {
    fn from_start_failure(method: Method, err: &regularize::RegularizeError) -> RunResult {
        RunResult {
            method,
            start: None,
            trajectory: Trajectory {
                samples: Vec::new(),
                status: IvpStatus::StepUnderflow,
                steps_taken: 0,
                final_denominator: f64::NAN,
            },
            x_final: f64::NAN,
            f_final: f64::NAN,
            status: RunStatus::StartFailed,
            alt_minimizer: None,
            warnings: vec![format!("start point failed: {err}")],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    GlobalSuccess,
    LocalOnly,
    DidNotConverge,
}

/// A graded run: the value gap and distance to the oracle's global
/// minimizers.
#[derive(Debug, Clone, Copy)]
pub struct Classification {
    pub verdict: Verdict,
    pub gap: f64,
    pub distance: f64,
}

fn resolve_t0(obj: &ObjectiveFunction, cfg: &RunConfig) -> Result<f64, TrajectoryError> {
    match cfg.t0_mode {
        T0Mode::Explicit => cfg
            .t0
            .filter(|t| *t > 0.0)
            .ok_or(TrajectoryError::MissingExplicitT0),
        T0Mode::QuasiConvexify => {
            let q = obj
                .poly()
                .ok_or(TrajectoryError::QuasiConvexifyUnavailable)?
                .depress_quartic()
                .map_err(|_| TrajectoryError::QuasiConvexifyUnavailable)?;
            let (_, threshold) = quartic_quasiconvexity(&q);
            Ok(threshold + 1e-6)
        }
        T0Mode::Convexify => {
            if let Some(q) = obj.poly().and_then(|p| p.depress_quartic().ok())
                && let Ok(s) = quartic_start(&q)
            {
                return Ok(s.t0);
            }
            let opts = ConvexifyOpts {
                bracket: cfg.convexify_bracket,
            };
            Ok(regularize::convexification_t0(obj, &opts)?)
        }
    }
}

/// The general Steklov trajectory method (convexify, start, integrate).
pub fn run_steklov(obj: &ObjectiveFunction, cfg: &RunConfig) -> Result<RunResult, TrajectoryError> {
    let t0 = resolve_t0(obj, cfg)?;
    let start = match solve_x0(obj, t0, RegularizerKind::Steklov) {
        Ok(s) => s,
        Err(e) => return Ok(RunResult::from_start_failure(Method::Steklov, &e)),
    };
    let mut warnings = start.warnings.clone();

    // Full field -mu_tx / mu_xx. On the valley the mu_x correction is zero
    // and the slope reduces to -(f'(x+t) + f'(x-t)) / (f'(x+t) - f'(x-t));
    // keeping it makes mu_x a conserved quantity of the flow, so drift off
    // the valley is transported, not amplified, as t -> 0. mu_xx is the
    // reported singularity gauge: the raw derivative difference decays like
    // 2t toward the landing, which would trip a floor anchored at the start
    // scale (the quartic ODE's denominator uses the same normalization).
    let series_poly = obj.poly().cloned();
    let rhs = move |t: f64, x: f64| {
        if let Some(p) = &series_poly {
            // Centered translate f(x + u) = sum c_k u^k turns the field into
            // series with the leading cancellations done symbolically:
            // mu_tx = 2 c3 t + 4 c5 t^3 + ..., mu_xx = 2 c2 + 4 c4 t^2 + ...
            // Regular at t = 0 and free of the differencing noise that
            // otherwise dominates t^2-sized numerators of large polynomials.
            let c = p.taylor_coeffs(x);
            let t2 = t * t;
            let mut odd = 0.0;
            let mut even = 0.0;
            for k in (2..c.len()).rev() {
                if k % 2 == 0 {
                    even = even * t2 + k as f64 * c[k];
                } else {
                    odd = odd * t2 + (k - 1) as f64 * c[k];
                }
            }
            return (-t * odd / even, even);
        }
        if t == 0.0 {
            // The raw denominator vanishes at t = 0; along a valley the
            // slope limit is 0.
            return (0.0, 0.0);
        }
        let dp = obj.df(x + t);
        let dm = obj.df(x - t);
        let two_mu_x = (obj.f(x + t) - obj.f(x - t)) / t;
        let mu_xx = (dp - dm) / (2.0 * t);
        (-(dp + dm - two_mu_x) / (dp - dm), mu_xx)
    };
    let problem = IvpProblem::new(rhs, t0, 0.0, start.x0, cfg.ivp_options())?;
    let trajectory = problem.integrate();

    let x_final = trajectory.final_x();
    let f_final = obj.f(x_final);
    let status = RunStatus::from(trajectory.status);
    if status != RunStatus::ReachedZero {
        warnings.push(format!("integration stopped early: {}", status.as_str()));
    }
    Ok(RunResult {
        method: Method::Steklov,
        start: Some(start),
        trajectory,
        x_final,
        f_final,
        status,
        alt_minimizer: None,
        warnings,
    })
}

/// The closed-form Steklov method for monic quartics. Convex and
/// quasi-convex inputs are resolved directly (no trajectory needed); the
/// symmetric `a1 = 0` case reports both minimizers.
pub fn run_steklov_quartic(p: &Polynomial, cfg: &RunConfig) -> Result<RunResult, TrajectoryError> {
    let q = p.depress_quartic()?;
    let obj = ObjectiveFunction::from_poly("quartic", p.clone());

    if q.a1 == 0.0 && q.a2 < 0.0 {
        // Two global minimizers at +-sqrt(-a2/2) in depressed coordinates.
        let half = (-q.a2 / 2.0).sqrt();
        let (lo, hi) = (q.to_original(-half), q.to_original(half));
        return Ok(shortcut_result(
            Method::SteklovQuartic,
            &obj,
            hi,
            Some(lo),
            "symmetric quartic (a1 = 0): both minimizers reported directly",
        ));
    }
    if q.a2 >= 0.0 || quartic_quasiconvexity(&q).0 {
        // Convex or quasi-convex: the unique minimizer comes straight from
        // the derivative's root ordering.
        let truth = crate::oracle::poly_global_min(p).expect("monic quartic is coercive");
        let x = truth.minimizers[0];
        return Ok(shortcut_result(
            Method::SteklovQuartic,
            &obj,
            x,
            None,
            "convex or quasi-convex quartic: solved directly",
        ));
    }

    let start = match cfg.t0_mode {
        T0Mode::Convexify => match quartic_start(&q) {
            Ok(mut s) => {
                s.x0 = q.to_original(s.x0);
                s
            }
            Err(e) => {
                return Ok(RunResult::from_start_failure(Method::SteklovQuartic, &e));
            }
        },
        _ => {
            let t0 = resolve_t0(&obj, cfg)?;
            match solve_x0(&obj, t0, RegularizerKind::Steklov) {
                Ok(s) => s,
                Err(e) => {
                    return Ok(RunResult::from_start_failure(Method::SteklovQuartic, &e));
                }
            }
        }
    };
    let mut warnings = start.warnings.clone();

    let a2 = q.a2;
    let rhs = move |t: f64, x: f64| {
        let denom = 6.0 * x * x + 2.0 * t * t + a2;
        (-4.0 * t * x / denom, denom)
    };
    let x0_dep = q.to_depressed(start.x0);
    let problem = IvpProblem::new(rhs, start.t0, 0.0, x0_dep, cfg.ivp_options())?;
    let mut trajectory = problem.integrate();
    // Trajectory samples map back to the original coordinates.
    for s in &mut trajectory.samples {
        s.1 = q.to_original(s.1);
    }

    let x_final = trajectory.final_x();
    let f_final = obj.f(x_final);
    let status = RunStatus::from(trajectory.status);
    if status != RunStatus::ReachedZero {
        warnings.push(format!("integration stopped early: {}", status.as_str()));
    }
    Ok(RunResult {
        method: Method::SteklovQuartic,
        start: Some(start),
        trajectory,
        x_final,
        f_final,
        status,
        alt_minimizer: None,
        warnings,
    })
}

/// The quadratic-regularization baseline.
pub fn run_quadratic(
    obj: &ObjectiveFunction,
    cfg: &RunConfig,
) -> Result<RunResult, TrajectoryError> {
    if !obj.has_d2f() {
        return Err(TrajectoryError::MissingSecondDerivative);
    }
    let t0 = match cfg.t0_mode {
        T0Mode::Explicit => cfg
            .t0
            .filter(|t| *t > 0.0)
            .ok_or(TrajectoryError::MissingExplicitT0)?,
        T0Mode::QuasiConvexify => return Err(TrajectoryError::QuasiConvexifyUnavailable),
        T0Mode::Convexify => match regularize::quad_t0(obj) {
            Ok(t0) => t0,
            Err(e) => return Ok(RunResult::from_start_failure(Method::Quadratic, &e)),
        },
    };
    let start = match solve_x0(obj, t0, RegularizerKind::Quadratic) {
        Ok(s) => s,
        Err(e) => return Ok(RunResult::from_start_failure(Method::Quadratic, &e)),
    };
    let mut warnings = start.warnings.clone();

    let rhs = |t: f64, x: f64| {
        let denom = obj.d2f(x).expect("checked above") + t;
        (-x / denom, denom)
    };
    let problem = IvpProblem::new(rhs, t0, 0.0, start.x0, cfg.ivp_options())?;
    let trajectory = problem.integrate();

    let x_final = trajectory.final_x();
    let f_final = obj.f(x_final);
    let status = RunStatus::from(trajectory.status);
    if status != RunStatus::ReachedZero {
        warnings.push(format!("integration stopped early: {}", status.as_str()));
    }
    Ok(RunResult {
        method: Method::Quadratic,
        start: Some(start),
        trajectory,
        x_final,
        f_final,
        status,
        alt_minimizer: None,
        warnings,
    })
}

fn shortcut_result(
    method: Method,
    obj: &ObjectiveFunction,
    x: f64,
    alt: Option<f64>,
    note: &str,
) -> RunResult {
    RunResult {
        method,
        start: None,
        trajectory: Trajectory {
            samples: vec![(0.0, x)],
            status: IvpStatus::ReachedZero,
            steps_taken: 0,
            final_denominator: f64::NAN,
        },
        x_final: x,
        f_final: obj.f(x),
        status: RunStatus::ReachedZero,
        alt_minimizer: alt,
        warnings: vec![note.to_string()],
    }
}

/// Grades a run against ground truth: `DidNotConverge` when the trajectory
/// never reached `t = 0`; otherwise `GlobalSuccess` when the value gap is
/// within `1e-6 * (1 + |f*|)` or the distance within `1e-3 * (1 + |x*|)`;
/// `LocalOnly` otherwise.
pub fn classify(result: &RunResult, truth: &OracleResult) -> Classification {
    assert!(
        !truth.minimizers.is_empty(),
        "oracle truth must contain a global minimizer"
    );
    let gap = result.f_final - truth.min_value;
    let distance = truth.distance_to(result.x_final);
    if result.status != RunStatus::ReachedZero {
        return Classification {
            verdict: Verdict::DidNotConverge,
            gap,
            distance,
        };
    }
    let x_star = truth.minimizers[0];
    let value_ok = gap.abs() <= 1e-6 * (1.0 + truth.min_value.abs());
    let location_ok = distance <= 1e-3 * (1.0 + x_star.abs());
    Classification {
        verdict: if value_ok || location_ok {
            Verdict::GlobalSuccess
        } else {
            Verdict::LocalOnly
        },
        gap,
        distance,
    }
}
