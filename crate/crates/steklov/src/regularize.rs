//! The Steklov and quadratic regularization functions, their partial
//! derivatives, closed forms for quartics, convexification thresholds and the
//! start-point solver shared by the trajectory algorithms.
//!
//! For a continuous `f`, the Steklov function is
//! `mu(x, t) = (1/2t) * integral of f over [x-t, x+t]`; its partials come in
//! quadrature-free closed form:
//!
//! ```text
//! mu_x  = (f(x+t) - f(x-t)) / 2t
//! mu_xx = (f'(x+t) - f'(x-t)) / 2t
//! mu_tx = (1/t) * ((f'(x+t) + f'(x-t)) / 2 - mu_x)
//! ```
//!
//! The quadratic regularization is `phi(x, t) = f(x) + (t/2) x^2` with
//! `phi_x = f'(x) + t x`, `phi_xx = f''(x) + t`, `phi_tx = x`.

use crate::polyalg::{DepressedQuartic, Polynomial, RootFindOpts};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RegularizeError {
    #[error("the Steklov window size t must be positive, got {0}")]
    NonpositiveT(f64),
    #[error("closed-form start point requires a2 < 0 and a1 != 0 (got a2 = {a2}, a1 = {a1})")]
    PreconditionViolated { a2: f64, a1: f64 },
    #[error("convexification verification did not pass after growing t0 {attempts} times")]
    ConvexificationFailed { attempts: usize },
    #[error("a non-polynomial objective needs a user-supplied bracket")]
    MissingBracket,
    #[error("the objective provides no second derivative")]
    MissingSecondDerivative,
    #[error("the curvature of this objective is unbounded below")]
    UnboundedCurvature,
    #[error(
        "no sign change of the start-point equation within |x| <= {0:e}; the objective may not be coercive"
    )]
    NoBracket(f64),
}

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Evaluation bundle for an objective: `f`, `f'` and optionally `f''`, with
/// an optional dense-polynomial backing used for exact Steklov values.
#[derive(Clone)]
pub struct ObjectiveFunction {
    f: Evaluator,
    df: Evaluator,
    d2f: Option<Evaluator>,
    poly: Option<Polynomial>,
    label: String,
}

impl fmt::Debug for ObjectiveFunction {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("ObjectiveFunction")
            .field("label", &self.label)
            .field("poly", &self.poly)
            .field("has_d2f", &self.d2f.is_some())
            .finish()
    }
}

impl ObjectiveFunction {
    pub fn from_poly(label: impl Into<String>, p: Polynomial) -> Self {
        let dp = p.differentiate();
        let d2p = dp.differentiate();
        let (pf, pdf, pd2f) = (p.clone(), dp, d2p);
        ObjectiveFunction {
            f: Arc::new(move |x| pf.eval(x)),
            df: Arc::new(move |x| pdf.eval(x)),
            d2f: Some(Arc::new(move |x| pd2f.eval(x))),
            poly: Some(p),
            label: label.into(),
        }
    }

    /// A generic smooth objective given by `f` and `f'`. The trajectory ODE
    /// needs only these two.
    pub fn from_fns<F, G>(label: impl Into<String>, f: F, df: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ObjectiveFunction {
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: None,
            poly: None,
            label: label.into(),
        }
    }

    pub fn with_d2f<H>(mut self, d2f: H) -> Self
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.d2f = Some(Arc::new(d2f));
        self
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn df(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    pub fn d2f(&self, x: f64) -> Option<f64> {
        self.d2f.as_ref().map(|d| d(x))
    }

    pub fn has_d2f(&self) -> bool {
        self.d2f.is_some()
    }

    pub fn poly(&self) -> Option<&Polynomial> {
        self.poly.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Which regularization a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularizerKind {
    Steklov,
    Quadratic,
}

/// How a start point was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    ClosedFormQuartic,
    ConvexSearch,
    UserSupplied,
}

/// The Step-1 output: a convexifying `t0` and the minimizer `x0` of the
/// regularized function at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StartPoint {
    pub t0: f64,
    pub x0: f64,
    /// `|mu_x(x0, t0)|` or `|phi_x(x0, t0)|`, whichever applies.
    pub residual: f64,
    pub mode: StartMode,
    /// Non-fatal diagnostics, e.g. a non-monotone Step-1 equation.
    pub warnings: Vec<String>,
}

/// The Steklov value `mu(x, t)`. Polynomial-backed objectives use the exact
/// antiderivative; generic objectives fall back to adaptive quadrature with a
/// relative tolerance of `1e-10`.
pub fn steklov_value(obj: &ObjectiveFunction, x: f64, t: f64) -> Result<f64, RegularizeError> {
    if !(t > 0.0) {
        return Err(RegularizeError::NonpositiveT(t));
    }
    if let Some(p) = obj.poly() {
        // Integrate the window-centered translate f(x + u) = sum c_k u^k:
        // only its even terms survive the symmetric window, so
        // mu = sum_{k even} c_k t^k / (k + 1), with no cancellation at
        // small t (unlike differencing the antiderivative of f itself).
        let c = p.taylor_coeffs(x);
        let t2 = t * t;
        let mut mu = 0.0;
        for k in (0..c.len()).rev() {
            if k % 2 == 0 {
                mu = mu * t2 + c[k] / (k + 1) as f64;
            }
        }
        Ok(mu)
    } else {
        let integral = quad::integrate(|u| obj.f(u), x - t, x + t, 1e-10);
        Ok(integral / (2.0 * t))
    }
}

/// The three Steklov partials `(mu_x, mu_xx, mu_tx)` by the closed formulas;
/// no quadrature and no finite differences.
pub fn steklov_partials(
    obj: &ObjectiveFunction,
    x: f64,
    t: f64,
) -> Result<(f64, f64, f64), RegularizeError> {
    if !(t > 0.0) {
        return Err(RegularizeError::NonpositiveT(t));
    }
    let (fp, fm) = (obj.f(x + t), obj.f(x - t));
    let (dp, dm) = (obj.df(x + t), obj.df(x - t));
    let mu_x = (fp - fm) / (2.0 * t);
    let mu_xx = (dp - dm) / (2.0 * t);
    let mu_tx = (0.5 * (dp + dm) - mu_x) / t;
    Ok((mu_x, mu_xx, mu_tx))
}

/// Exact Steklov value of a depressed monic quartic, valid for every real
/// `t` including 0:
///
/// ```text
/// mu(x, t) = f(x) + (t^2/6) f''(x) + t^4/5
///          = x^4 + (a2 + 2t^2) x^2 + a1 x + a0 + t^2 a2 / 3 + t^4 / 5
/// ```
pub fn quartic_mu_closed(q: &DepressedQuartic, x: f64, t: f64) -> f64 {
    let t2 = t * t;
    let x2 = x * x;
    x2 * x2 + (q.a2 + 2.0 * t2) * x2 + q.a1 * x + q.a0 + t2 * q.a2 / 3.0 + t2 * t2 / 5.0
}

/// Closed-form partials `(mu_x, mu_xx, mu_tx)` of the depressed-quartic
/// Steklov function, valid for every real `t` including 0.
pub fn quartic_mu_partials(q: &DepressedQuartic, x: f64, t: f64) -> (f64, f64, f64) {
    let c = q.a2 + 2.0 * t * t;
    let mu_x = 4.0 * x * x * x + 2.0 * c * x + q.a1;
    let mu_xx = 12.0 * x * x + 2.0 * c;
    let mu_tx = 8.0 * t * x;
    (mu_x, mu_xx, mu_tx)
}

/// The closed-form start point for a depressed quartic with `a2 < 0` and
/// `a1 != 0`: `t0 = sqrt(-a2/2)` convexifies `mu(., t0)` and its unique
/// minimizer is `x0 = -cbrt(a1/4)`.
pub fn quartic_start(q: &DepressedQuartic) -> Result<StartPoint, RegularizeError> {
    if !(q.a2 < 0.0) || q.a1 == 0.0 {
        return Err(RegularizeError::PreconditionViolated { a2: q.a2, a1: q.a1 });
    }
    let t0 = (-q.a2 / 2.0).sqrt();
    let x0 = -(q.a1 / 4.0).cbrt();
    let residual = (4.0 * x0 * x0 * x0 + q.a1).abs();
    Ok(StartPoint {
        t0,
        x0,
        residual,
        mode: StartMode::ClosedFormQuartic,
        warnings: Vec::new(),
    })
}

/// The unique simultaneous solution of `mu_x = mu_xx = 0`, where trajectory
/// branches merge: `x_hat = cbrt(a1)/2`,
/// `t_hat = sqrt(-(3 a1^(2/3) + 2 a2)) / 2`. Returns `None` when
/// `a2 > -3 a1^(2/3) / 2` (no flat point exists).
///
/// `a1^(2/3)` means `cbrt(a1^2)` (always nonnegative); `cbrt` is the real,
/// sign-preserving cube root.
pub fn quartic_flat_point(q: &DepressedQuartic) -> Option<(f64, f64)> {
    let a1_23 = (q.a1 * q.a1).cbrt();
    let radicand = -(3.0 * a1_23 + 2.0 * q.a2);
    if radicand < 0.0 {
        return None;
    }
    let x_hat = q.a1.cbrt() / 2.0;
    let t_hat = 0.5 * radicand.sqrt();
    Some((x_hat, t_hat))
}

/// Quasi-convexity of the depressed quartic itself (discriminant test on its
/// derivative) and the smallest `t` at which `mu(., t)` is quasi-convex.
pub fn quartic_quasiconvexity(q: &DepressedQuartic) -> (bool, f64) {
    let discriminant = -16.0 * (8.0 * q.a2.powi(3) + 27.0 * q.a1 * q.a1);
    let a1_23 = (q.a1 * q.a1).cbrt();
    let t_threshold = 0.5 * (-(3.0 * a1_23 + 2.0 * q.a2)).max(0.0).sqrt();
    (discriminant <= 0.0, t_threshold)
}

/// Options for [`convexification_t0`].
#[derive(Debug, Clone, Default)]
pub struct ConvexifyOpts {
    /// Interval containing the non-monotone region of `f'`; required for
    /// non-polynomial objectives.
    pub bracket: Option<(f64, f64)>,
}

/// A `t0` with `mu_xx(x, t0) > 0` on a verification grid, built
/// constructively: bound the wiggle region of `f'`, locate the outer points
/// where `f'` re-crosses its interior extrema, take their distance, then
/// grow by 1.5x (at most 20 times) until a 10^4-point grid check passes.
pub fn convexification_t0(
    obj: &ObjectiveFunction,
    opts: &ConvexifyOpts,
) -> Result<f64, RegularizeError> {
    let region = match (obj.poly(), opts.bracket) {
        (_, Some((lo, hi))) if lo < hi => (lo, hi),
        (Some(p), _) => {
            if p.degree() < 2 || !p.degree().is_multiple_of(2) || p.leading() <= 0.0 {
                return Err(RegularizeError::UnboundedCurvature);
            }
            let d2 = p.differentiate().differentiate();
            let r = if d2.degree() == 0 {
                1.0
            } else {
                d2.real_roots(&RootFindOpts::default())
                    .map(|s| s.radius)
                    .unwrap_or(1.0)
            };
            (-r, r)
        }
        _ => return Err(RegularizeError::MissingBracket),
    };

    let alpha = grid_extremum(obj, region, true);
    let beta = grid_extremum(obj, region, false);
    let a_tilde = outer_crossing(obj, alpha, region.0, -1.0)?;
    let b_tilde = outer_crossing(obj, beta, region.1, 1.0)?;
    let mut t0 = (b_tilde - a_tilde).max(f64::MIN_POSITIVE);

    const GRID: usize = 10_000;
    for _ in 0..20 {
        let lo = region.0 - t0;
        let hi = region.1 + t0;
        let ok = (0..=GRID).all(|i| {
            let x = lo + (hi - lo) * i as f64 / GRID as f64;
            (obj.df(x + t0) - obj.df(x - t0)) > 0.0
        });
        if ok {
            return Ok(t0);
        }
        t0 *= 1.5;
    }
    Err(RegularizeError::ConvexificationFailed { attempts: 20 })
}

/// Min (or max) of `f'` over an interval: coarse grid plus golden-section
/// refinement around the best cell.
fn grid_extremum(obj: &ObjectiveFunction, (lo, hi): (f64, f64), minimize: bool) -> f64 {
    const N: usize = 4096;
    let sign = if minimize { 1.0 } else { -1.0 };
    let g = |x: f64| sign * obj.df(x);
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..=N {
        let x = lo + (hi - lo) * i as f64 / N as f64;
        let v = g(x);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let h = (hi - lo) / N as f64;
    let a = (lo + h * best_i.saturating_sub(1) as f64).max(lo);
    let b = (lo + h * (best_i + 1) as f64).min(hi);
    let (_, v) = golden_min(&g, a, b, 1e-12 * (1.0 + hi - lo));
    sign * v.min(best_v)
}

fn golden_min(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    while (b - a).abs() > tol {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, g(x))
}

/// The point beyond `from` (leftward for `direction = -1`, rightward for
/// `+1`) where `f'` crosses `level`, by bisection on an expanding bracket.
/// Under the convexification hypotheses `f'` is monotone out there, so the
/// first bracketed crossing is the one wanted.
fn outer_crossing(
    obj: &ObjectiveFunction,
    level: f64,
    from: f64,
    direction: f64,
) -> Result<f64, RegularizeError> {
    let h = |x: f64| obj.df(x) - level;
    let mut near = from;
    let mut v_near = h(near);
    if v_near == 0.0 {
        return Ok(near);
    }
    let mut step = 1.0;
    const LIMIT: f64 = 1e12;
    let mut far;
    loop {
        far = near + direction * step;
        let v_far = h(far);
        if v_far == 0.0 {
            return Ok(far);
        }
        if (v_near < 0.0) != (v_far < 0.0) {
            break;
        }
        near = far;
        v_near = v_far;
        step *= 2.0;
        if far.abs() > LIMIT {
            return Err(RegularizeError::NoBracket(LIMIT));
        }
    }
    let (mut a, mut b) = (near.min(far), near.max(far));
    let mut va = h(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || (b - a) <= 1e-12 * (1.0 + mid.abs()) {
            break;
        }
        let vm = h(mid);
        if vm == 0.0 {
            return Ok(mid);
        }
        if (va < 0.0) != (vm < 0.0) {
            b = mid;
        } else {
            a = mid;
            va = vm;
        }
    }
    Ok(0.5 * (a + b))
}

/// Quadratic-regularization values `(phi, phi_x, phi_xx, phi_tx)`.
/// `phi_xx` needs `f''`.
pub fn quad_partials(
    obj: &ObjectiveFunction,
    x: f64,
    t: f64,
) -> Result<(f64, f64, f64, f64), RegularizeError> {
    let d2 = obj.d2f(x).ok_or(RegularizeError::MissingSecondDerivative)?;
    let phi = obj.f(x) + 0.5 * t * x * x;
    let phi_x = obj.df(x) + t * x;
    let phi_xx = d2 + t;
    Ok((phi, phi_x, phi_xx, x))
}

/// A `t0` making `phi(., t0)` convex: `max(0, -min f'')` plus a small
/// margin. The minimum of `f''` is located through the real roots of `f'''`.
/// Requires a polynomial objective of even degree with positive leading
/// coefficient (so the infimum is attained and finite).
pub fn quad_t0(obj: &ObjectiveFunction) -> Result<f64, RegularizeError> {
    let p = obj.poly().ok_or(RegularizeError::MissingBracket)?;
    if p.degree() < 2 || !p.degree().is_multiple_of(2) || p.leading() <= 0.0 {
        return Err(RegularizeError::UnboundedCurvature);
    }
    let d2 = p.differentiate().differentiate();
    let min_curv = if d2.degree() == 0 {
        d2.eval(0.0)
    } else {
        // f'' has even degree and positive leading coefficient; its minimum
        // sits at a critical point.
        let crit = d2
            .differentiate()
            .real_roots(&RootFindOpts::default())
            .map(|s| s.roots)
            .unwrap_or_default();
        crit.iter()
            .map(|&x| d2.eval(x))
            .fold(f64::INFINITY, f64::min)
    };
    let t0 = (-min_curv).max(0.0);
    Ok(t0 + 1e-6 * (1.0 + min_curv.abs()))
}

/// Solves Step 1 for an explicit `t0`: the root of
/// `g(x) = f(x + t0) - f(x - t0)` (Steklov) or `g(x) = phi_x(x, t0)`
/// (quadratic). Doubles a bracket around 0 until a sign change, bisects,
/// then polishes with up to five Newton steps.
///
/// A non-monotone `g` (multiple sign changes; `t0` too small for
/// convexification) is not fatal: the smallest root is returned and a
/// warning recorded on the start point.
pub fn solve_x0(
    obj: &ObjectiveFunction,
    t0: f64,
    kind: RegularizerKind,
) -> Result<StartPoint, RegularizeError> {
    if !(t0 > 0.0) {
        return Err(RegularizeError::NonpositiveT(t0));
    }
    if kind == RegularizerKind::Quadratic && !obj.has_d2f() {
        return Err(RegularizeError::MissingSecondDerivative);
    }
    let g: Box<dyn Fn(f64) -> f64 + '_> = match kind {
        RegularizerKind::Steklov => Box::new(move |x: f64| obj.f(x + t0) - obj.f(x - t0)),
        RegularizerKind::Quadratic => Box::new(move |x: f64| obj.df(x) + t0 * x),
    };
    let dg: Box<dyn Fn(f64) -> f64 + '_> = match kind {
        RegularizerKind::Steklov => Box::new(move |x: f64| obj.df(x + t0) - obj.df(x - t0)),
        RegularizerKind::Quadratic => {
            Box::new(move |x: f64| obj.d2f(x).expect("checked above") + t0)
        }
    };

    let mut warnings = Vec::new();
    const LIMIT: f64 = 1e12;

    let g0 = g(0.0);
    let (mut lo, mut hi) = if g0 == 0.0 {
        (0.0, 0.0)
    } else {
        // Expand until the coercivity signature g(-r) < 0 < g(r) holds, not
        // merely until the endpoint signs differ: a too-small window can
        // show one interior crossing and hide the rest.
        let mut r = 1.0;
        loop {
            let (glo, ghi) = (g(-r), g(r));
            if glo == 0.0 {
                break (-r, -r);
            }
            if ghi == 0.0 {
                break (r, r);
            }
            if glo < 0.0 && ghi > 0.0 {
                break (-r, r);
            }
            r *= 2.0;
            if r > LIMIT {
                return Err(RegularizeError::NoBracket(LIMIT));
            }
        }
    };

    if lo < hi {
        // Scan for extra sign changes; a convex regularization gives exactly
        // one. Keep the leftmost crossing either way.
        const SCAN: usize = 256;
        let mut crossings: Vec<(f64, f64)> = Vec::new();
        let mut x_prev = lo;
        let mut v_prev = g(lo);
        for i in 1..=SCAN {
            let x = lo + (hi - lo) * i as f64 / SCAN as f64;
            let v = g(x);
            if v == 0.0 {
                crossings.push((x, x));
            } else if v_prev != 0.0 && (v_prev < 0.0) != (v < 0.0) {
                crossings.push((x_prev, x));
            }
            x_prev = x;
            v_prev = v;
        }
        if crossings.len() > 1 {
            warnings.push(format!(
                "start-point equation has {} sign changes at t0 = {t0}; t0 may be too small to convexify; using the smallest root",
                crossings.len()
            ));
        }
        if let Some(&(a, b)) = crossings.first() {
            lo = a;
            hi = b;
        }
        // Bisect to a 1e-14-wide interval (or to adjacent floats).
        let mut glo = g(lo);
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = g(mid);
            if gm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (glo < 0.0) != (gm < 0.0) {
                hi = mid;
            } else {
                lo = mid;
                glo = gm;
            }
        }
    }

    let mut x0 = 0.5 * (lo + hi);
    let mut best = g(x0).abs();
    for _ in 0..5 {
        let d = dg(x0);
        if d == 0.0 {
            break;
        }
        let candidate = x0 - g(x0) / d;
        if !candidate.is_finite() {
            break;
        }
        let v = g(candidate).abs();
        if v < best {
            x0 = candidate;
            best = v;
        } else {
            break;
        }
    }

    let residual = match kind {
        RegularizerKind::Steklov => (g(x0) / (2.0 * t0)).abs(),
        RegularizerKind::Quadratic => g(x0).abs(),
    };
    Ok(StartPoint {
        t0,
        x0,
        residual,
        mode: StartMode::ConvexSearch,
        warnings,
    })
}

/// Adaptive Simpson quadrature: interval bisection with the error estimated
/// by comparing the one-panel and two-panel rules.
mod quad {
    pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = simpson(a, b, fa, fm, fb);
        // The target is relative; seed the absolute budget from a coarse
        // estimate of the integral's size, with a small floor.
        let scale = whole.abs().max((b - a).abs() * fm.abs()).max(1e-300);
        let eps = rel_tol * scale;
        recurse(&f, a, b, fa, fm, fb, whole, eps, 52)
    }

    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let err = left + right - whole;
        if depth == 0 || err.abs() <= 15.0 * eps {
            return left + right + err / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
}
