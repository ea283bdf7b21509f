//! Independent brute-force ground truth: global minimizers of coercive
//! polynomials by critical-point enumeration, and of generic functions by
//! grid search with golden-section refinement. A testing device for the
//! trajectory methods, not a product feature.

use crate::polyalg::{Polynomial, RootFindOpts};
use crate::regularize::ObjectiveFunction;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("global minimization needs an even degree >= 2 and a positive leading coefficient")]
    NotCoercive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Min,
    Max,
    Inflection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub x: f64,
    pub value: f64,
    pub kind: CriticalKind,
}

/// Ground truth for one objective: every global minimizer (up to tolerance),
/// the minimum value, and the classified critical points.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub minimizers: Vec<f64>,
    pub min_value: f64,
    pub critical_points: Vec<CriticalPoint>,
    pub search_radius: f64,
}

impl OracleResult {
    /// Distance from `x` to the nearest global minimizer.
    pub fn distance_to(&self, x: f64) -> f64 {
        self.minimizers
            .iter()
            .map(|m| (x - m).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// All global minimizers of a coercive polynomial: enumerate the real roots
/// of `p'`, evaluate, classify by the sign of `p''`, and report the argmin
/// set (ties within `1e-9 * (1 + |min|)` are all listed).
pub fn poly_global_min(p: &Polynomial) -> Result<OracleResult, OracleError> {
    if p.degree() < 2 || !p.degree().is_multiple_of(2) || p.leading() <= 0.0 {
        return Err(OracleError::NotCoercive);
    }
    let opts = RootFindOpts::default();
    let dp = p.differentiate();
    let d2p = dp.differentiate();
    let roots = dp
        .real_roots(&opts)
        .expect("derivative of degree >= 2 polynomial is nonzero");

    let d2_cmax = d2p.coeffs().iter().map(|c| c.abs()).fold(0.0, f64::max);
    let mut critical_points = Vec::with_capacity(roots.roots.len());
    for &x in &roots.roots {
        let value = p.eval(x);
        let curv = d2p.eval(x);
        let curv_scale = 1e-9 * (1.0 + d2_cmax * x.abs().powi(d2p.degree() as i32));
        let kind = if curv > curv_scale {
            CriticalKind::Min
        } else if curv < -curv_scale {
            CriticalKind::Max
        } else {
            CriticalKind::Inflection
        };
        critical_points.push(CriticalPoint { x, value, kind });
    }

    let min_value = critical_points
        .iter()
        .map(|c| c.value)
        .fold(f64::INFINITY, f64::min);
    let tie_tol = 1e-9 * (1.0 + min_value.abs());
    let minimizers: Vec<f64> = critical_points
        .iter()
        .filter(|c| c.value <= min_value + tie_tol)
        .map(|c| c.x)
        .collect();

    Ok(OracleResult {
        minimizers,
        min_value,
        critical_points,
        search_radius: roots.radius,
    })
}

/// Global minimum of a generic objective over `[lo, hi]`: evaluate on an
/// equispaced grid, keep the best few local basins, refine each by
/// golden-section search.
pub fn grid_global_min(obj: &ObjectiveFunction, lo: f64, hi: f64, panels: usize) -> OracleResult {
    assert!(lo < hi && panels >= 2, "need lo < hi and at least 2 panels");
    const BASINS: usize = 5;

    let n = panels;
    let at = |i: usize| lo + (hi - lo) * i as f64 / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| obj.f(at(i))).collect();

    // Basin candidates: interior grid minima plus the boundary points.
    let mut candidates: Vec<usize> = (1..n)
        .filter(|&i| values[i] <= values[i - 1] && values[i] <= values[i + 1])
        .collect();
    candidates.push(0);
    candidates.push(n);
    candidates.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    candidates.truncate(BASINS);

    let tol = 1e-10 * (hi - lo);
    let mut refined: Vec<CriticalPoint> = Vec::with_capacity(candidates.len());
    for &i in &candidates {
        let a = at(i.saturating_sub(1)).max(lo);
        let b = at((i + 1).min(n)).min(hi);
        let (x, value) = golden_section(&|x| obj.f(x), a, b, tol);
        refined.push(CriticalPoint {
            x,
            value,
            kind: CriticalKind::Min,
        });
    }

    let min_value = refined
        .iter()
        .map(|c| c.value)
        .fold(f64::INFINITY, f64::min);
    let tie_tol = 1e-9 * (1.0 + min_value.abs());
    let mut minimizers: Vec<f64> = refined
        .iter()
        .filter(|c| c.value <= min_value + tie_tol)
        .map(|c| c.x)
        .collect();
    minimizers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    minimizers.dedup_by(|a, b| (*a - *b).abs() <= 1e-7 * (1.0 + a.abs()));

    OracleResult {
        minimizers,
        min_value,
        critical_points: refined,
        search_radius: lo.abs().max(hi.abs()),
    }
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn quartic_fixture_ground_truth() {
        let p = Polynomial::from_descending(&[1.0, -8.0, -18.0, 56.0, 0.0]);
        let r = poly_global_min(&p).unwrap();
        assert_eq!(r.minimizers.len(), 1);
        assert!((r.minimizers[0] - 7.0).abs() < 1e-9);
        assert!((r.min_value - -833.0).abs() < 1e-9);
        let kinds: Vec<(f64, f64, CriticalKind)> = r
            .critical_points
            .iter()
            .map(|c| (c.x, c.value, c.kind))
            .collect();
        assert_eq!(kinds.len(), 3);
        assert!((kinds[0].0 - -2.0).abs() < 1e-9 && (kinds[0].1 - -104.0).abs() < 1e-9);
        assert_eq!(kinds[0].2, CriticalKind::Min);
        assert!((kinds[1].0 - 1.0).abs() < 1e-9 && (kinds[1].1 - 31.0).abs() < 1e-9);
        assert_eq!(kinds[1].2, CriticalKind::Max);
        assert_eq!(kinds[2].2, CriticalKind::Min);
    }

    #[test]
    fn symmetric_quartic_reports_both_minimizers() {
        let p = Polynomial::from_descending(&[1.0, 0.0, -0.98, 0.0, 1.0]);
        let r = poly_global_min(&p).unwrap();
        assert_eq!(r.minimizers.len(), 2);
        assert!((r.minimizers[0] - -0.7).abs() < 1e-9);
        assert!((r.minimizers[1] - 0.7).abs() < 1e-9);
    }

    #[test]
    fn degree20_fixture_value_is_exact_for_the_transcription() {
        let obj = fixtures::p20_sec63();
        let r = poly_global_min(obj.poly().unwrap()).unwrap();
        // Transcribed list: global minimum near -11.8756.
        assert_eq!(r.minimizers.len(), 1);
        assert!((r.minimizers[0] - -11.8756).abs() < 1e-3);
        assert!((r.min_value - -3.4716054e20).abs() < 1e-4 * 3.47e20);
    }

    #[test]
    fn rejects_non_coercive_input() {
        let odd = Polynomial::from_descending(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(poly_global_min(&odd), Err(OracleError::NotCoercive));
        let down = Polynomial::from_descending(&[-1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(poly_global_min(&down), Err(OracleError::NotCoercive));
    }

    #[test]
    fn grid_oracle_examples() {
        let r = grid_global_min(&fixtures::quad_sine(), -20.0, 20.0, 100_000);
        assert_eq!(r.minimizers.len(), 1);
        assert!(
            (r.minimizers[0] - -0.5167).abs() < 1e-3,
            "got {}",
            r.minimizers[0]
        );

        let parabola =
            ObjectiveFunction::from_poly("shifted", Polynomial::from_descending(&[1.0, -6.0, 9.0]));
        let r = grid_global_min(&parabola, 0.0, 10.0, 1000);
        assert!((r.minimizers[0] - 3.0).abs() < 1e-7);

        let cos = ObjectiveFunction::from_fns("cos", |x: f64| x.cos(), |x: f64| -x.sin());
        let r = grid_global_min(&cos, 0.0, 2.0 * std::f64::consts::PI, 1000);
        assert!((r.minimizers[0] - std::f64::consts::PI).abs() < 1e-7);
    }

    #[test]
    fn poly_and_grid_oracles_agree_on_the_quartic() {
        let obj = fixtures::p4_sec61();
        let a = poly_global_min(obj.poly().unwrap()).unwrap();
        let b = grid_global_min(&obj, -10.0, 10.0, 100_000);
        assert!((a.minimizers[0] - b.minimizers[0]).abs() < 1e-5);
        assert!((a.min_value - b.min_value).abs() < 1e-7 * (1.0 + a.min_value.abs()));
    }
}
