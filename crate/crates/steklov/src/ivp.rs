//! Adaptive initial-value integrator for the scalar trajectory ODEs, run
//! with decreasing `t` from `t_start` down to `t_end` (normally 0).
//!
//! The stepper is TR-BDF2: a trapezoidal half-stage followed by a BDF2
//! stage, both solved by scalar Newton iteration with a numerically
//! differenced Jacobian. The method is L-stable, so stiff segments are
//! handled without step-size collapse. Local error is estimated by the
//! embedded third-order weights, filtered through `1/(1 - d*h*J)` so the
//! estimate stays meaningful on stiff steps.
//!
//! The right-hand side reports `(dx/dt, denom)` where `denom` is the raw
//! denominator of the trajectory ODE. The integrator polices it: a step is
//! rejected when the denominator changes sign across it, and the run stops
//! with [`IvpStatus::SingularDenominator`] when `|denom|` falls under the
//! floor or the rejection cascade corners a crossing. All failure modes are
//! in-band statuses, not errors.

use thiserror::Error;

const GAMMA: f64 = 2.0 - std::f64::consts::SQRT_2;
const D: f64 = 1.0 - std::f64::consts::SQRT_2 / 2.0; // gamma/2
const W: f64 = std::f64::consts::SQRT_2 / 4.0;
// Embedded 3rd-order error weights minus the 2nd-order propagation weights.
const E1: f64 = (1.0 - std::f64::consts::SQRT_2) / 3.0;
const E2: f64 = 1.0 / 3.0;
const E3: f64 = (std::f64::consts::SQRT_2 - 2.0) / 3.0;
// Internal tightening of the per-step tolerance.
const THETA: f64 = 0.25;

#[derive(Debug, Error, PartialEq)]
pub enum IvpError {
    #[error("t_end must be strictly below t_start (got {t_start} down to {t_end})")]
    InvalidTimeSpan { t_start: f64, t_end: f64 },
    #[error("tolerances must be positive and finite (rtol {rtol}, atol {atol})")]
    InvalidTolerance { rtol: f64, atol: f64 },
    #[error("max_steps must be at least 1")]
    ZeroMaxSteps,
    #[error("start state must be finite")]
    NonFiniteStart,
}

/// Tuning knobs with the defaults used throughout the crate.
#[derive(Debug, Clone)]
pub struct IvpOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Smallest usable |step|; defaults to `1e-14 * t_start`.
    pub min_step: Option<f64>,
    /// Singularity floor for |denom|; defaults to `1e-10 * |denom at start|`.
    pub denom_floor: Option<f64>,
    /// Record every accepted step (otherwise only the endpoints).
    pub record: bool,
}

impl Default for IvpOptions {
    fn default() -> Self {
        IvpOptions {
            rtol: 1e-8,
            atol: 1e-12,
            max_steps: 1_000_000,
            min_step: None,
            denom_floor: None,
            record: true,
        }
    }
}

/// A scalar trajectory IVP, integrated backward from `t_start` to `t_end`.
#[derive(Debug, Clone)]
pub struct IvpProblem<F>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    rhs: F,
    t_start: f64,
    t_end: f64,
    x_start: f64,
    opts: IvpOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IvpStatus {
    /// `t` reached `t_end`; the final step is shortened to land exactly.
    ReachedZero,
    /// The ODE denominator hit the floor or crossed zero.
    SingularDenominator,
    /// The step budget ran out before `t_end`.
    StepBudgetExhausted,
    /// Error control demanded a step below the minimum.
    StepUnderflow,
}

/// Time-ordered samples of a run, strictly decreasing in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, f64)>,
    pub status: IvpStatus,
    /// Accepted steps.
    pub steps_taken: usize,
    pub final_denominator: f64,
}

impl Trajectory {
    pub fn final_t(&self) -> f64 {
        self.samples.last().map(|s| s.0).unwrap_or(f64::NAN)
    }

    pub fn final_x(&self) -> f64 {
        self.samples.last().map(|s| s.1).unwrap_or(f64::NAN)
    }
}

enum StageOutcome {
    Converged { x: f64, k: f64, jac: f64 },
    Failed { denom_event: bool },
}

impl<F> IvpProblem<F>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    pub fn new(
        rhs: F,
        t_start: f64,
        t_end: f64,
        x_start: f64,
        opts: IvpOptions,
    ) -> Result<Self, IvpError> {
        if !(t_end < t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(IvpError::InvalidTimeSpan { t_start, t_end });
        }
        if !(opts.rtol > 0.0) || !(opts.atol > 0.0) || !opts.rtol.is_finite() {
            return Err(IvpError::InvalidTolerance {
                rtol: opts.rtol,
                atol: opts.atol,
            });
        }
        if opts.max_steps == 0 {
            return Err(IvpError::ZeroMaxSteps);
        }
        if !x_start.is_finite() {
            return Err(IvpError::NonFiniteStart);
        }
        Ok(IvpProblem {
            rhs,
            t_start,
            t_end,
            x_start,
            opts,
        })
    }

    fn eval(&self, t: f64, x: f64, floor: f64, denom_event: &mut bool) -> (f64, f64) {
        let (dx, denom) = (self.rhs)(t, x);
        if t != self.t_end && (!dx.is_finite() || denom.abs() < floor) {
            *denom_event = true;
        }
        (dx, denom)
    }

    /// Newton-solves `z = x + h*(explicit + d*f(t_stage, z))` for one DIRK
    /// stage, starting from `guess`.
    #[allow(clippy::too_many_arguments)]
    fn stage(
        &self,
        t_stage: f64,
        x_base: f64,
        explicit: f64,
        h: f64,
        guess: f64,
        scale: f64,
        floor: f64,
    ) -> StageOutcome {
        let mut z = guess;
        let mut denom_event = false;
        let mut jac;
        for _ in 0..12 {
            let (fz, _) = self.eval(t_stage, z, floor, &mut denom_event);
            if denom_event || !fz.is_finite() {
                return StageOutcome::Failed { denom_event };
            }
            let residual = z - x_base - h * (explicit + D * fz);
            let delta_j = 1e-7 * (1.0 + z.abs());
            let (fz2, _) = self.eval(t_stage, z + delta_j, floor, &mut denom_event);
            if denom_event || !fz2.is_finite() {
                return StageOutcome::Failed { denom_event };
            }
            jac = (fz2 - fz) / delta_j;
            let slope = 1.0 - h * D * jac;
            if slope == 0.0 {
                return StageOutcome::Failed { denom_event: false };
            }
            let step = residual / slope;
            z -= step;
            if !z.is_finite() {
                return StageOutcome::Failed { denom_event: false };
            }
            if step.abs() <= 0.01 * scale {
                let (fz, _) = self.eval(t_stage, z, floor, &mut denom_event);
                if denom_event || !fz.is_finite() {
                    return StageOutcome::Failed { denom_event };
                }
                return StageOutcome::Converged { x: z, k: fz, jac };
            }
        }
        StageOutcome::Failed { denom_event: false }
    }

    /// Runs the integration. Failure modes come back as statuses on the
    /// trajectory; this never panics on numerical trouble.
    pub fn integrate(&self) -> Trajectory {
        let mut samples = Vec::new();
        samples.push((self.t_start, self.x_start));

        let mut denom_event = false;
        let (mut k1, denom0) = (self.rhs)(self.t_start, self.x_start);
        let floor = self
            .opts
            .denom_floor
            .unwrap_or(1e-10 * denom0.abs())
            .max(f64::MIN_POSITIVE);
        let min_step = self
            .opts
            .min_step
            .unwrap_or(1e-14 * self.t_start.abs())
            .max(f64::MIN_POSITIVE);

        if denom0 == 0.0 || !denom0.is_finite() || !k1.is_finite() {
            return Trajectory {
                samples,
                status: IvpStatus::SingularDenominator,
                steps_taken: 0,
                final_denominator: denom0,
            };
        }

        let mut t = self.t_start;
        let mut x = self.x_start;
        let mut denom_cur = denom0;
        let span = self.t_start - self.t_end;

        // First step: small fraction of the span, shrunk when the slope is
        // steep relative to the state scale.
        let mut h = -(span * 1e-4).min(if k1.abs() > 0.0 {
            0.01 * (1.0 + x.abs()) / k1.abs()
        } else {
            f64::INFINITY
        });
        h = h.max(-span);

        let mut accepted = 0usize;
        let mut attempts = 0usize;
        let mut last_reject = false;

        loop {
            if attempts >= self.opts.max_steps {
                return self.finish(samples, IvpStatus::StepBudgetExhausted, accepted, denom_cur);
            }
            attempts += 1;

            if h.abs() < min_step {
                let status = if denom_event {
                    IvpStatus::SingularDenominator
                } else {
                    IvpStatus::StepUnderflow
                };
                return self.finish(samples, status, accepted, denom_cur);
            }

            // Land exactly on t_end once the step would cross it.
            let landing = t + h <= self.t_end;
            let (h_eff, t_new) = if landing {
                (self.t_end - t, self.t_end)
            } else {
                (h, t + h)
            };
            let t_mid = t + GAMMA * h_eff;

            // Accept against a fraction of the user tolerance so the
            // accumulated endpoint error stays within a few rtol.
            let scale = THETA * (self.opts.rtol * x.abs() + self.opts.atol);
            let mut fail_denom = false;
            let mut result: Option<(f64, f64, f64, f64)> = None; // (x_new, est, jac, err)

            match self.stage(
                t_mid,
                x,
                D * k1,
                h_eff,
                x + GAMMA * h_eff * k1,
                scale,
                floor,
            ) {
                StageOutcome::Failed { denom_event: de } => fail_denom = de,
                StageOutcome::Converged {
                    x: _,
                    k: k2,
                    jac: _,
                } => {
                    let explicit = W * k1 + W * k2;
                    let guess = x + h_eff * (explicit + D * k2);
                    match self.stage(t_new, x, explicit, h_eff, guess, scale, floor) {
                        StageOutcome::Failed { denom_event: de } => fail_denom = de,
                        StageOutcome::Converged {
                            x: x_new,
                            k: k3,
                            jac,
                        } => {
                            let est_raw = h_eff * (E1 * k1 + E2 * k2 + E3 * k3);
                            let filter = 1.0 - D * h_eff * jac;
                            let est = est_raw / filter;
                            if est.is_finite() {
                                let sc = THETA
                                    * (self.opts.rtol * x.abs().max(x_new.abs()) + self.opts.atol);
                                let err = est.abs() / sc;
                                result = Some((x_new, est, jac, err));
                            }
                        }
                    }
                }
            }

            let Some((x_new, est, jac, err)) = result else {
                denom_event = denom_event || fail_denom;
                h *= 0.5;
                last_reject = true;
                continue;
            };

            if err > 1.0 {
                let factor = (0.9 * err.powf(-1.0 / 3.0)).clamp(0.1, 0.5);
                h = h_eff * factor;
                last_reject = true;
                continue;
            }

            // On non-stiff steps propagate the locally extrapolated value
            // (est is the third-order correction); on stiff ones keep the
            // damped TR-BDF2 solution.
            let x_prop = if (h_eff * D * jac).abs() <= 0.5 {
                x_new + est
            } else {
                x_new
            };

            // The final hop must be short in x as well: local-error control
            // alone can accept a landing step whose |dx| dwarfs the
            // tolerance. Shrink and land from a smaller t instead.
            if landing && (x_prop - x).abs() > 10.0 * (self.opts.rtol * (1.0 + x_prop.abs())) {
                h = h_eff * 0.25;
                last_reject = true;
                continue;
            }

            // Accepted by error control; now police the denominator. A sign
            // change across the step means a singularity sits inside, even on
            // the landing step (a denominator legitimately vanishing at t_end
            // arrives at zero without flipping sign).
            let (k_next, denom_new) = (self.rhs)(t_new, x_prop);
            if denom_new != 0.0 && (denom_new < 0.0) != (denom_cur < 0.0) {
                denom_event = true;
                h = h_eff * 0.5;
                last_reject = true;
                continue;
            }
            if !landing && (denom_new.abs() < floor || !k_next.is_finite()) {
                samples.push((t_new, x_prop));
                return self.finish(
                    samples,
                    IvpStatus::SingularDenominator,
                    accepted + 1,
                    denom_new,
                );
            }

            t = t_new;
            x = x_prop;
            k1 = k_next;
            denom_cur = denom_new;
            accepted += 1;
            denom_event = false;
            if self.opts.record || samples.len() == 1 {
                samples.push((t, x));
            } else {
                *samples.last_mut().unwrap() = (t, x);
            }

            if landing {
                return Trajectory {
                    samples,
                    status: IvpStatus::ReachedZero,
                    steps_taken: accepted,
                    final_denominator: denom_cur,
                };
            }

            let mut factor = if err > 0.0 {
                (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            if last_reject {
                factor = factor.min(1.0);
            }
            last_reject = false;
            h = h_eff * factor;
        }
    }

    fn finish(
        &self,
        mut samples: Vec<(f64, f64)>,
        status: IvpStatus,
        steps: usize,
        denom: f64,
    ) -> Trajectory {
        if samples.is_empty() {
            samples.push((self.t_start, self.x_start));
        }
        Trajectory {
            samples,
            status,
            steps_taken: steps,
            final_denominator: denom,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> IvpOptions {
        IvpOptions::default()
    }

    #[test]
    fn constant_rhs_reaches_zero_exactly() {
        let p = IvpProblem::new(|_t, _x| (0.0, 1.0), 3.0, 0.0, 1.25, opts()).unwrap();
        let traj = p.integrate();
        assert_eq!(traj.status, IvpStatus::ReachedZero);
        assert_eq!(traj.final_t(), 0.0);
        assert_eq!(traj.final_x(), 1.25);
        assert_eq!(traj.samples[0], (3.0, 1.25));
    }

    #[test]
    fn quartic_valley_ode_lands_on_global_minimizer() {
        // Depressed 6.1 quartic: a2 = -42, a1 = -80; start at the closed-form
        // point; the valley ends at x = 5 (7 in original coordinates).
        let a2 = -42.0;
        let rhs = move |t: f64, x: f64| {
            let denom = 6.0 * x * x + 2.0 * t * t + a2;
            (-4.0 * t * x / denom, denom)
        };
        let p = IvpProblem::new(rhs, 21f64.sqrt(), 0.0, 20f64.cbrt(), opts()).unwrap();
        let traj = p.integrate();
        assert_eq!(traj.status, IvpStatus::ReachedZero);
        assert!(
            (traj.final_x() - 5.0).abs() < 1e-4,
            "landed at {}",
            traj.final_x()
        );
    }

    #[test]
    fn denominator_crossing_is_detected() {
        // denom(t) = t - 1 crosses zero at t = 1 = t_start / 2.
        let p = IvpProblem::new(|t, _x| (0.1, t - 1.0), 2.0, 0.0, 0.0, opts()).unwrap();
        let traj = p.integrate();
        assert_eq!(traj.status, IvpStatus::SingularDenominator);
        let t_final = traj.final_t();
        assert!(
            (t_final - 1.0).abs() < 1e-6,
            "stopped at t = {t_final}, expected near the crossing at 1"
        );
    }

    #[test]
    fn exponential_accuracy_within_ten_rtol() {
        // dx/dt = -x run backward from t=1 with x(1) = 1: x(0) = e.
        let p = IvpProblem::new(|_t, x| (-x, 1.0), 1.0, 0.0, 1.0, opts()).unwrap();
        let traj = p.integrate();
        assert_eq!(traj.status, IvpStatus::ReachedZero);
        let exact = std::f64::consts::E;
        let err = (traj.final_x() - exact).abs();
        assert!(
            err <= 10.0 * 1e-8 * exact,
            "err = {err:e} over budget {:e}",
            10.0 * 1e-8 * exact
        );
    }

    #[test]
    fn identical_problems_integrate_identically() {
        let make = || {
            IvpProblem::new(
                |t: f64, x: f64| ((x * x).sin() - t * x * 0.1, 1.0 + t),
                4.0,
                0.0,
                0.7,
                opts(),
            )
            .unwrap()
        };
        let a = make().integrate();
        let b = make().integrate();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.steps_taken, b.steps_taken);
        assert_eq!(a.final_denominator.to_bits(), b.final_denominator.to_bits());
    }

    #[test]
    fn tightening_rtol_is_self_consistent() {
        let run = |rtol: f64| {
            let mut o = opts();
            o.rtol = rtol;
            IvpProblem::new(|_t, x| (-x, 1.0), 1.0, 0.0, 1.0, o)
                .unwrap()
                .integrate()
                .final_x()
        };
        let coarse = run(1e-8);
        let fine = run(1e-10);
        assert!((coarse - fine).abs() <= 10.0 * 1e-8 * coarse.abs());
    }

    #[test]
    fn step_budget_is_enforced() {
        let mut o = opts();
        o.max_steps = 5;
        let p = IvpProblem::new(|_t, x| (-x, 1.0), 1.0, 0.0, 1.0, o).unwrap();
        let traj = p.integrate();
        assert_eq!(traj.status, IvpStatus::StepBudgetExhausted);
        assert!(traj.final_t() > 0.0);
    }

    #[test]
    fn invalid_problems_are_rejected_at_construction() {
        assert!(matches!(
            IvpProblem::new(|_t, _x| (0.0, 1.0), 0.0, 1.0, 0.0, opts()),
            Err(IvpError::InvalidTimeSpan { .. })
        ));
        let mut o = opts();
        o.rtol = -1.0;
        assert!(matches!(
            IvpProblem::new(|_t, _x| (0.0, 1.0), 1.0, 0.0, 0.0, o),
            Err(IvpError::InvalidTolerance { .. })
        ));
        let mut o = opts();
        o.max_steps = 0;
        assert!(matches!(
            IvpProblem::new(|_t, _x| (0.0, 1.0), 1.0, 0.0, 0.0, o),
            Err(IvpError::ZeroMaxSteps)
        ));
        assert!(matches!(
            IvpProblem::new(|_t, _x| (0.0, 1.0), 1.0, 0.0, f64::NAN, opts()),
            Err(IvpError::NonFiniteStart)
        ));
    }

    #[test]
    fn starting_on_a_singularity_fails_fast() {
        let p = IvpProblem::new(|_t, _x| (1.0, 0.0), 1.0, 0.0, 0.0, opts()).unwrap();
        let traj = p.integrate();
        assert_eq!(traj.status, IvpStatus::SingularDenominator);
        assert_eq!(traj.steps_taken, 0);
    }

    #[test]
    fn endpoint_only_recording_keeps_first_and_last() {
        let mut o = opts();
        o.record = false;
        let p = IvpProblem::new(|_t, x| (-x, 1.0), 1.0, 0.0, 1.0, o).unwrap();
        let traj = p.integrate();
        assert_eq!(traj.status, IvpStatus::ReachedZero);
        assert_eq!(traj.samples.len(), 2);
        assert_eq!(traj.samples[0], (1.0, 1.0));
        assert_eq!(traj.final_t(), 0.0);
    }
}
