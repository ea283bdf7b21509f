//! Dense univariate polynomial arithmetic: evaluation, calculus, affine
//! composition, depressed-quartic reduction and real-root isolation.
//!
//! Coefficients are stored in ascending degree order (`coeffs[k]` multiplies
//! `x^k`); the leading coefficient is nonzero unless the polynomial is
//! identically zero. All arithmetic is plain `f64`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PolyError {
    #[error("polynomial is identically zero")]
    DegenerateInput,
    #[error("affine composition requires a nonzero scale")]
    ZeroScale,
    #[error("expected a monic quartic, got degree {degree} with leading coefficient {leading}")]
    NotMonicQuartic { degree: usize, leading: f64 },
}

/// A dense real univariate polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending-degree coefficients. Trailing zero
    /// coefficients are trimmed; the zero polynomial is kept as `[0.0]`.
    ///
    /// Panics if any coefficient is not finite.
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(
            coeffs.iter().all(|c| c.is_finite()),
            "polynomial coefficients must be finite"
        );
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    /// Builds a polynomial from descending-degree coefficients (the order a
    /// polynomial is usually written and typed on a command line).
    pub fn from_descending(coeffs: &[f64]) -> Self {
        let mut asc: Vec<f64> = coeffs.to_vec();
        asc.reverse();
        Polynomial::new(asc)
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index of the last nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Evaluates by nested multiplication (Horner). Exact for degree 0.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0f64;
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul_add(x, c);
        }
        acc
    }

    /// First derivative; the degree drops by one (or to the zero polynomial).
    pub fn differentiate(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Polynomial::new(coeffs)
    }

    /// The antiderivative `P` with `P' = p` and `P(0) = 0`.
    pub fn antiderivative(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / (k + 1) as f64);
        }
        Polynomial::new(coeffs)
    }

    /// Coefficients of the window-centered translate: returns `c` with
    /// `p(x + u) = sum_k c[k] u^k`, i.e. `c[k] = p^(k)(x) / k!`, by repeated
    /// synthetic division. Splitting the translate into odd and even parts
    /// gives cancellation-free centered differences of `p` around `x`.
    pub fn taylor_coeffs(&self, x: f64) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        let n = c.len() - 1;
        for i in 0..n {
            for j in (i..n).rev() {
                c[j] = x.mul_add(c[j + 1], c[j]);
            }
        }
        c
    }

    /// The product `p(x) * (x - root)`.
    pub fn mul_linear_factor(&self, root: f64) -> Polynomial {
        let mut coeffs = vec![0.0; self.coeffs.len() + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i + 1] += c;
            coeffs[i] = (-root).mul_add(c, coeffs[i]);
        }
        Polynomial::new(coeffs)
    }

    /// The expanded polynomial `q` with `q(x) = p(scale * x - offset)`,
    /// computed by exact coefficient accumulation (a Horner loop in
    /// polynomial arithmetic), not by sampling.
    pub fn compose_affine(&self, scale: f64, offset: f64) -> Result<Polynomial, PolyError> {
        if scale == 0.0 || !scale.is_finite() || !offset.is_finite() {
            return Err(PolyError::ZeroScale);
        }
        // acc <- acc * (scale*x - offset) + c_k, from the leading coefficient down.
        let mut acc = vec![*self.coeffs.last().unwrap()];
        for &c in self.coeffs.iter().rev().skip(1) {
            let mut next = vec![0.0; acc.len() + 1];
            for (i, &a) in acc.iter().enumerate() {
                next[i + 1] = scale.mul_add(a, next[i + 1]);
                next[i] = (-offset).mul_add(a, next[i]);
            }
            next[0] += c;
            acc = next;
        }
        Ok(Polynomial::new(acc))
    }

    /// Reduces a monic quartic to depressed form. The recorded shift `s`
    /// satisfies `p(x) = f(x + s)` with `f` the depressed quartic, so a
    /// depressed-coordinate minimizer maps back as `x = x_dep - s`.
    pub fn depress_quartic(&self) -> Result<DepressedQuartic, PolyError> {
        let lead = self.leading();
        if self.degree() != 4 || (lead - 1.0).abs() > 4.0 * f64::EPSILON {
            return Err(PolyError::NotMonicQuartic {
                degree: self.degree(),
                leading: lead,
            });
        }
        let shift = self.coeffs[3] / 4.0;
        // f(z) = p(z - shift); the cubic term cancels exactly up to rounding.
        let f = self.compose_affine(1.0, shift).expect("scale is 1");
        let c = f.coeffs();
        let scale: f64 = self.coeffs.iter().map(|v| v.abs()).fold(1.0, f64::max);
        debug_assert!(c.len() == 5 || c[3].abs() <= 64.0 * f64::EPSILON * scale);
        let cubic_residue = if c.len() > 3 { c[3] } else { 0.0 };
        assert!(
            cubic_residue.abs() <= 1e-9 * scale,
            "depression left a cubic residue {cubic_residue}"
        );
        Ok(DepressedQuartic {
            a2: c[2],
            a1: c[1],
            a0: c[0],
            shift,
        })
    }

    /// All real roots of the polynomial. See [`RootFindOpts`] for the knobs.
    ///
    /// Roots are isolated by sign-change scanning over the root-bound
    /// interval, with the panel count doubled until the sign-change count
    /// stabilizes across two refinements, then refined by bisection and a
    /// short Newton polish. Even-multiplicity roots (no sign change) are
    /// recovered from the critical points of the polynomial; near-multiple
    /// roots closer than the cluster tolerance are merged and reported once.
    pub fn real_roots(&self, opts: &RootFindOpts) -> Result<RootSet, PolyError> {
        if self.is_zero() {
            return Err(PolyError::DegenerateInput);
        }
        if self.degree() == 0 {
            return Ok(RootSet {
                roots: Vec::new(),
                radius: 0.0,
            });
        }
        let radius = self.root_bound();
        let mut roots = self.scan_roots(radius, opts);

        // Sign-change scanning only sees odd-multiplicity roots. If some are
        // still missing, look for even-multiplicity ones among the critical
        // points (grazing the axis means p and p' vanish together).
        if roots.len() < self.degree()
            && self.degree() >= 2
            && let Ok(crit) = self.differentiate().real_roots(opts)
        {
            for &c in &crit.roots {
                if self.eval(c).abs() <= opts.residual_tol * self.residual_scale(c)
                    && !roots
                        .iter()
                        .any(|&r| (r - c).abs() <= opts.cluster_rel_tol * (1.0 + c.abs()))
                {
                    roots.push(c);
                }
            }
        }

        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let roots = self.merge_clusters(roots, opts);
        Ok(RootSet { roots, radius })
    }

    /// Magnitude bound for all roots: the smaller of the Cauchy bound
    /// `1 + max |c_k / c_n|` and the Fujiwara bound.
    fn root_bound(&self) -> f64 {
        let n = self.degree();
        let lead = self.leading().abs();
        let cauchy = 1.0
            + self.coeffs[..n]
                .iter()
                .map(|c| c.abs() / lead)
                .fold(0.0, f64::max);
        let mut fujiwara: f64 = 0.0;
        for k in 1..=n {
            let ratio = self.coeffs[n - k].abs() / lead;
            let ratio = if k == n { ratio / 2.0 } else { ratio };
            fujiwara = fujiwara.max(ratio.powf(1.0 / k as f64));
        }
        cauchy.min(2.0 * fujiwara).max(f64::MIN_POSITIVE)
    }

    fn residual_scale(&self, x: f64) -> f64 {
        let cmax = self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
        1.0 + cmax * x.abs().powi(self.degree() as i32)
    }

    /// Sign-change isolation over `[-radius, radius]` with panel doubling
    /// until the count of sign changes stabilizes across two refinements.
    fn scan_roots(&self, radius: f64, opts: &RootFindOpts) -> Vec<f64> {
        let mut panels = opts.initial_panels;
        let mut counts: Vec<usize> = Vec::new();
        let (brackets, mut roots) = loop {
            let (brackets, exact) = self.scan_once(radius, panels);
            counts.push(brackets.len() + exact.len());
            let n = counts.len();
            let stable = n >= 3 && counts[n - 1] == counts[n - 2] && counts[n - 2] == counts[n - 3];
            if stable || panels >= opts.max_panels {
                break (brackets, exact);
            }
            panels *= 2;
        };
        for (a, b) in brackets {
            roots.push(self.refine_root(a, b, opts));
        }
        roots
    }

    fn scan_once(&self, radius: f64, panels: usize) -> (Vec<(f64, f64)>, Vec<f64>) {
        let mut brackets = Vec::new();
        let mut exact = Vec::new();
        let step = 2.0 * radius / panels as f64;
        let mut x_prev = -radius;
        let mut v_prev = self.eval(x_prev);
        if v_prev == 0.0 {
            exact.push(x_prev);
        }
        for i in 1..=panels {
            let x = if i == panels {
                radius
            } else {
                -radius + step * i as f64
            };
            let v = self.eval(x);
            if v == 0.0 {
                exact.push(x);
            } else if v_prev != 0.0 && (v_prev < 0.0) != (v < 0.0) {
                brackets.push((x_prev, x));
            }
            x_prev = x;
            v_prev = v;
        }
        (brackets, exact)
    }

    /// Bisection to a width of `bisect_rel_tol * (1 + |root|)`, then at most
    /// two guarded Newton steps to push the residual down.
    fn refine_root(&self, mut a: f64, mut b: f64, opts: &RootFindOpts) -> f64 {
        let mut fa = self.eval(a);
        let mut mid = 0.5 * (a + b);
        for _ in 0..200 {
            mid = 0.5 * (a + b);
            if (b - a).abs() <= opts.bisect_rel_tol * (1.0 + mid.abs()) || mid == a || mid == b {
                break;
            }
            let fm = self.eval(mid);
            if fm == 0.0 {
                return mid;
            }
            if (fa < 0.0) != (fm < 0.0) {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        let deriv = self.differentiate();
        let mut x = mid;
        let mut fx = self.eval(x).abs();
        for _ in 0..2 {
            let d = deriv.eval(x);
            if d == 0.0 {
                break;
            }
            let candidate = x - self.eval(x) / d;
            if candidate.is_finite() && candidate >= a && candidate <= b {
                let fc = self.eval(candidate).abs();
                if fc < fx {
                    x = candidate;
                    fx = fc;
                    continue;
                }
            }
            break;
        }
        x
    }

    /// Merges sorted roots closer than the cluster tolerance, keeping the
    /// member with the smallest residual. Double roots of a derivative would
    /// otherwise be reported unreliably.
    fn merge_clusters(&self, roots: Vec<f64>, opts: &RootFindOpts) -> Vec<f64> {
        let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
        for r in roots {
            match merged.last() {
                Some(&prev) if (r - prev).abs() <= opts.cluster_rel_tol * (1.0 + r.abs()) => {
                    if self.eval(r).abs() < self.eval(prev).abs() {
                        *merged.last_mut().unwrap() = r;
                    }
                }
                _ => merged.push(r),
            }
        }
        merged
    }
}

/// A monic quartic with the cubic term removed: `x^4 + a2 x^2 + a1 x + a0`.
///
/// `shift` is the value `s` with `p(x) = f(x + s)` for the original
/// polynomial `p`, i.e. `s = b3 / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepressedQuartic {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub shift: f64,
}

impl DepressedQuartic {
    pub fn new(a2: f64, a1: f64, a0: f64) -> Self {
        DepressedQuartic {
            a2,
            a1,
            a0,
            shift: 0.0,
        }
    }

    /// The depressed polynomial itself (shift discarded).
    pub fn as_polynomial(&self) -> Polynomial {
        Polynomial::new(vec![self.a0, self.a1, self.a2, 0.0, 1.0])
    }

    /// Maps a depressed-coordinate point back to the original coordinates.
    pub fn to_original(&self, x_depressed: f64) -> f64 {
        x_depressed - self.shift
    }

    /// Maps an original-coordinate point into depressed coordinates.
    pub fn to_depressed(&self, x_original: f64) -> f64 {
        x_original + self.shift
    }
}

/// Knobs for [`Polynomial::real_roots`].
#[derive(Debug, Clone)]
pub struct RootFindOpts {
    /// A reported root `r` must satisfy
    /// `|p(r)| <= residual_tol * (1 + max|c| * |r|^degree)`.
    pub residual_tol: f64,
    /// Roots closer than `cluster_rel_tol * (1 + |root|)` are merged.
    pub cluster_rel_tol: f64,
    /// Bisection stops at an interval width of
    /// `bisect_rel_tol * (1 + |root|)`.
    pub bisect_rel_tol: f64,
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for RootFindOpts {
    fn default() -> Self {
        RootFindOpts {
            residual_tol: 1e-8,
            cluster_rel_tol: 1e-7,
            bisect_rel_tol: 1e-12,
            initial_panels: 4096,
            max_panels: 1 << 20,
        }
    }
}

/// Sorted real roots together with the search bound that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<f64>,
    pub radius: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected}, got {actual} (tol {tol})"
        );
    }

    fn p4() -> Polynomial {
        // x^4 - 8x^3 - 18x^2 + 56x
        Polynomial::from_descending(&[1.0, -8.0, -18.0, 56.0, 0.0])
    }

    fn p6() -> Polynomial {
        Polynomial::from_descending(&[1.0, -66.0 / 5.0, -9.0 / 2.0, 422.0, -474.0, -2160.0, 0.0])
    }

    #[test]
    fn eval_quartic_fixture() {
        assert_eq!(p4().eval(7.0), -833.0);
        assert_eq!(p4().eval(0.0), 0.0);
    }

    #[test]
    fn eval_degree6_fixture() {
        assert_close(p6().eval(9.0), -27726.3, 1e-9);
    }

    #[test]
    fn differentiate_drops_degree() {
        let d = p4().differentiate();
        assert_eq!(d.coeffs(), &[56.0, -36.0, -24.0, 4.0]);
        assert_eq!(d.eval(1.0), 0.0);

        let c = Polynomial::new(vec![5.0]);
        assert!(c.differentiate().is_zero());

        // f = x^4 + a2 x^2 has f'' = 12x^2 + 2 a2.
        let a2 = -3.25;
        let f = Polynomial::new(vec![0.0, 0.0, a2, 0.0, 1.0]);
        let f2 = f.differentiate().differentiate();
        assert_eq!(f2.coeffs(), &[2.0 * a2, 0.0, 12.0]);
    }

    #[test]
    fn antiderivative_examples() {
        assert!(Polynomial::zero().antiderivative().is_zero());
        let cubic = Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(cubic.antiderivative().coeffs(), &[0.0, 0.0, 0.0, 0.0, 0.25]);

        // (1/2) * (P(1) - P(-1)) for P = x^5/5 equals 1/5 = mu(0,1) for x^4.
        let quartic = Polynomial::new(vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        let anti = quartic.antiderivative();
        assert_close(0.5 * (anti.eval(1.0) - anti.eval(-1.0)), 0.2, 1e-15);
    }

    #[test]
    fn compose_affine_examples() {
        // Shift of the quartic fixture into depressed form: p(z + 2).
        let shifted = p4().compose_affine(1.0, -2.0).unwrap();
        let expect = [-8.0, -80.0, -42.0, 0.0, 1.0];
        for (c, e) in shifted.coeffs().iter().zip(expect) {
            assert_close(*c, e, 1e-12);
        }
        assert_eq!(shifted.degree(), 4);

        let identity = p4().compose_affine(1.0, 0.0).unwrap();
        assert_eq!(identity, p4());

        // (2x - 1)^2 = 4x^2 - 4x + 1.
        let sq = Polynomial::new(vec![0.0, 0.0, 1.0]);
        let q = sq.compose_affine(2.0, 1.0).unwrap();
        assert_eq!(q.coeffs(), &[1.0, -4.0, 4.0]);
    }

    #[test]
    fn compose_affine_rejects_zero_scale() {
        assert_eq!(p4().compose_affine(0.0, 1.0), Err(PolyError::ZeroScale));
    }

    #[test]
    fn depress_quartic_fixture() {
        let q = p4().depress_quartic().unwrap();
        assert_close(q.a2, -42.0, 1e-12);
        assert_close(q.a1, -80.0, 1e-12);
        assert_close(q.a0, -8.0, 1e-12);
        // x = z + 2: shift = -2, minimizers map back as x = z - shift.
        assert_eq!(q.shift, -2.0);
        assert_eq!(q.to_original(5.0), 7.0);
    }

    #[test]
    fn depress_pure_quartic_and_symmetric() {
        let pure = Polynomial::new(vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        let q = pure.depress_quartic().unwrap();
        assert_eq!((q.a2, q.a1, q.a0, q.shift), (0.0, 0.0, 0.0, 0.0));

        let fig1b = Polynomial::from_descending(&[1.0, 0.0, -0.98, 0.0, 1.0]);
        let q = fig1b.depress_quartic().unwrap();
        assert_eq!((q.a2, q.a1, q.a0, q.shift), (-0.98, 0.0, 1.0, 0.0));
    }

    #[test]
    fn depress_rejects_non_monic_or_non_quartic() {
        let cubic = Polynomial::from_descending(&[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            cubic.depress_quartic(),
            Err(PolyError::NotMonicQuartic { degree: 3, .. })
        ));
        let scaled = Polynomial::from_descending(&[2.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            scaled.depress_quartic(),
            Err(PolyError::NotMonicQuartic { degree: 4, .. })
        ));
    }

    #[test]
    fn taylor_coeffs_match_affine_composition() {
        let p = p6();
        for &x in &[-2.5, 0.0, 1.0, 9.0] {
            let taylor = p.taylor_coeffs(x);
            let shifted = p.compose_affine(1.0, -x).unwrap();
            assert_eq!(taylor.len(), p.coeffs().len());
            let scale = taylor.iter().fold(1.0f64, |m, c| m.max(c.abs()));
            for (a, b) in taylor.iter().zip(shifted.coeffs()) {
                assert!((a - b).abs() <= 64.0 * f64::EPSILON * scale, "{a} vs {b}");
            }
            assert_eq!(taylor[0], p.eval(x));
        }
    }

    #[test]
    fn depress_round_trips_through_affine_composition() {
        let p = p4();
        let q = p.depress_quartic().unwrap();
        let rebuilt = q.as_polynomial().compose_affine(1.0, -q.shift).unwrap();
        let scale = p.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        for (a, b) in rebuilt.coeffs().iter().zip(p.coeffs()) {
            assert!(
                (a - b).abs() <= 8.0 * f64::EPSILON * scale.max(b.abs()),
                "{a} vs {b}"
            );
        }
    }

    #[test]
    fn real_roots_of_fixture_derivatives() {
        let opts = RootFindOpts::default();
        let roots = p4().differentiate().real_roots(&opts).unwrap().roots;
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-2.0, 1.0, 7.0]) {
            assert_close(*r, e, 1e-9);
        }

        let roots = p6().differentiate().real_roots(&opts).unwrap().roots;
        assert_eq!(roots.len(), 5);
        for (r, e) in roots.iter().zip([-4.0, -1.0, 2.0, 5.0, 9.0]) {
            assert_close(*r, e, 1e-9);
        }
    }

    #[test]
    fn real_roots_none_and_degenerate() {
        let opts = RootFindOpts::default();
        let none = Polynomial::from_descending(&[1.0, 0.0, 1.0]);
        assert!(none.real_roots(&opts).unwrap().roots.is_empty());
        assert_eq!(
            Polynomial::zero().real_roots(&opts),
            Err(PolyError::DegenerateInput)
        );
    }

    #[test]
    fn real_roots_even_multiplicity() {
        // (x - 1)^2 (x + 3) has a double root that never crosses the axis.
        let p = Polynomial::from_descending(&[1.0, 1.0, -5.0, 3.0]);
        let roots = p.real_roots(&RootFindOpts::default()).unwrap().roots;
        assert_eq!(roots.len(), 2);
        assert_close(roots[0], -3.0, 1e-9);
        assert_close(roots[1], 1.0, 1e-7);
    }

    #[test]
    fn real_roots_residual_invariant() {
        let opts = RootFindOpts::default();
        for p in [p4().differentiate(), p6().differentiate()] {
            let set = p.real_roots(&opts).unwrap();
            let cmax = p.coeffs().iter().map(|c| c.abs()).fold(0.0, f64::max);
            for r in set.roots {
                let scale = 1.0 + cmax * r.abs().powi(p.degree() as i32);
                assert!(p.eval(r).abs() <= 1e-8 * scale);
            }
        }
    }
}
