//! Random-polynomial generation and the failure-rate experiment, with
//! seeded determinism.
//!
//! A degree-n instance is built from its critical points: n-1 locations are
//! drawn uniformly from the extremum range, the derivative is expanded as
//! `n * prod (x - r_i)` and integrated with zero constant term, giving a
//! monic polynomial whose critical points are exactly the draws.
//!
//! Each instance owns a ChaCha8 stream keyed by `(degree, index)`, so
//! parallel and serial execution draw identical polynomials and the report
//! is reproducible byte for byte from `(degrees, samples, method, t0, seed)`.

use crate::oracle::poly_global_min;
use crate::polyalg::Polynomial;
use crate::regularize::ObjectiveFunction;
use crate::trajectories::{self, Classification, RunConfig, T0Mode, Verdict};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;

/// Identifier of the draw scheme, recorded in every report.
pub const GENERATOR_ID: &str = "chacha8-stream-by-degree-and-index-v1";

/// How a degree-n instance is sampled.
#[derive(Debug, Clone)]
pub struct GenSpec {
    /// Even degree >= 4.
    pub degree: usize,
    /// Critical-point locations are uniform over this interval.
    pub extremum_range: (f64, f64),
    pub seed: u64,
}

impl GenSpec {
    pub fn new(degree: usize, seed: u64) -> Self {
        assert!(
            degree >= 4 && degree.is_multiple_of(2),
            "degree must be even and >= 4"
        );
        GenSpec {
            degree,
            extremum_range: (-5.0, 5.0),
            seed,
        }
    }
}

/// The draws and the polynomial they induce.
#[derive(Debug, Clone)]
pub struct GeneratedPoly {
    pub poly: Polynomial,
    pub draws: Vec<f64>,
}

/// Generates instance `index` of a spec: monic, degree `spec.degree`,
/// critical points exactly at the draws, constant term zero.
pub fn gen_poly(spec: &GenSpec, index: u64) -> GeneratedPoly {
    let (lo, hi) = spec.extremum_range;
    assert!(lo < hi, "extremum range must be nonempty");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(((spec.degree as u64) << 32) | index);
    let draws: Vec<f64> = (0..spec.degree - 1)
        .map(|_| rng.random_range(lo..hi))
        .collect();

    let n = spec.degree as f64;
    let mut deriv = Polynomial::new(vec![n]);
    for &r in &draws {
        deriv = deriv.mul_linear_factor(r);
    }
    GeneratedPoly {
        poly: deriv.antiderivative(),
        draws,
    }
}

/// Which trajectory method(s) a table run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMethod {
    Steklov,
    Quadratic,
    Both,
}

impl BenchMethod {
    fn singles(self) -> Vec<SingleMethod> {
        match self {
            BenchMethod::Steklov => vec![SingleMethod::Steklov],
            BenchMethod::Quadratic => vec![SingleMethod::Quadratic],
            BenchMethod::Both => vec![SingleMethod::Steklov, SingleMethod::Quadratic],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SingleMethod {
    Steklov,
    Quadratic,
}

impl SingleMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SingleMethod::Steklov => "steklov",
            SingleMethod::Quadratic => "quadratic",
        }
    }

    /// The window sizes the failure-rate table fixes per degree.
    pub fn default_t0(self, degree: usize) -> f64 {
        match self {
            SingleMethod::Steklov => {
                if degree == 4 {
                    6.0
                } else {
                    7.0
                }
            }
            SingleMethod::Quadratic => match degree {
                4 => 1e3,
                6 => 1e4,
                8 => 1e5,
                10 | 12 | 14 => 1e8,
                20 => 1e10,
                _ => 1e8,
            },
        }
    }
}

/// One (method, degree) row of the failure table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: SingleMethod,
    pub degree: usize,
    pub t0: f64,
    pub samples: usize,
    pub n_global: usize,
    pub n_local: usize,
    pub n_noconverge: usize,
    pub failure_rate: f64,
}

/// Classification tolerances, echoed into the report for reproducibility.
#[derive(Debug, Clone, Serialize)]
pub struct ReportTolerances {
    pub value_gap_rel: f64,
    pub location_rel: f64,
    pub rtol: f64,
    pub atol: f64,
}

/// The failure-rate experiment output with full reproducibility metadata.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub schema: u32,
    pub seed: u64,
    pub method: BenchMethod,
    pub generator: &'static str,
    pub extremum_range: (f64, f64),
    pub tolerances: ReportTolerances,
    pub rows: Vec<BenchRow>,
    pub wall_time_s: f64,
}

impl BenchReport {
    /// CSV rendering: `method,degree,t0,samples,n_global,n_local,n_noconverge,failure_rate`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("method,degree,t0,samples,n_global,n_local,n_noconverge,failure_rate\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.method.as_str(),
                r.degree,
                r.t0,
                r.samples,
                r.n_global,
                r.n_local,
                r.n_noconverge,
                r.failure_rate
            ));
        }
        out
    }
}

/// Settings for [`run_failure_table`].
#[derive(Debug, Clone)]
pub struct TableConfig {
    pub degrees: Vec<usize>,
    pub samples: usize,
    pub method: BenchMethod,
    /// Per-degree `t0` overrides; absent degrees use the defaults.
    pub t0_map: BTreeMap<usize, f64>,
    pub seed: u64,
    pub extremum_range: (f64, f64),
    pub parallel: bool,
}

impl TableConfig {
    pub fn new(degrees: Vec<usize>, samples: usize, method: BenchMethod, seed: u64) -> Self {
        TableConfig {
            degrees,
            samples,
            method,
            t0_map: BTreeMap::new(),
            seed,
            extremum_range: (-5.0, 5.0),
            parallel: true,
        }
    }
}

fn classify_instance(method: SingleMethod, generated: &GeneratedPoly, t0: f64) -> Classification {
    let cfg = RunConfig {
        t0: Some(t0),
        t0_mode: T0Mode::Explicit,
        record_trajectory: false,
        ..RunConfig::default()
    };
    let truth = poly_global_min(&generated.poly).expect("generated polynomials are coercive");
    let result = match method {
        SingleMethod::Steklov => {
            let obj = ObjectiveFunction::from_poly("bench", generated.poly.clone());
            trajectories::run_steklov(&obj, &cfg)
        }
        SingleMethod::Quadratic => {
            let obj = ObjectiveFunction::from_poly("bench", generated.poly.clone());
            trajectories::run_quadratic(&obj, &cfg)
        }
    };
    match result {
        Ok(run) => trajectories::classify(&run, &truth),
        // Configuration-level errors cannot happen with explicit t0 > 0 and
        // polynomial objectives; count defensively as non-convergence.
        Err(_) => Classification {
            verdict: Verdict::DidNotConverge,
            gap: f64::NAN,
            distance: f64::NAN,
        },
    }
}

/// Runs the failure-rate table: for each degree, `samples` random
/// polynomials per method, graded against the polynomial oracle. The same
/// seed produces the same polynomial sequence for both methods.
pub fn run_failure_table(cfg: &TableConfig) -> BenchReport {
    let start = Instant::now();
    let mut rows = Vec::new();
    for &degree in &cfg.degrees {
        let spec = GenSpec {
            degree,
            extremum_range: cfg.extremum_range,
            seed: cfg.seed,
        };
        for method in cfg.method.singles() {
            let t0 = cfg
                .t0_map
                .get(&degree)
                .copied()
                .unwrap_or_else(|| method.default_t0(degree));
            let verdicts: Vec<Verdict> = if cfg.parallel {
                (0..cfg.samples as u64)
                    .into_par_iter()
                    .map(|i| classify_instance(method, &gen_poly(&spec, i), t0).verdict)
                    .collect()
            } else {
                (0..cfg.samples as u64)
                    .map(|i| classify_instance(method, &gen_poly(&spec, i), t0).verdict)
                    .collect()
            };
            let n_global = verdicts
                .iter()
                .filter(|v| **v == Verdict::GlobalSuccess)
                .count();
            let n_local = verdicts
                .iter()
                .filter(|v| **v == Verdict::LocalOnly)
                .count();
            let n_noconverge = verdicts
                .iter()
                .filter(|v| **v == Verdict::DidNotConverge)
                .count();
            rows.push(BenchRow {
                method,
                degree,
                t0,
                samples: cfg.samples,
                n_global,
                n_local,
                n_noconverge,
                failure_rate: (n_local + n_noconverge) as f64 / cfg.samples as f64,
            });
        }
    }
    BenchReport {
        schema: 1,
        seed: cfg.seed,
        method: cfg.method,
        generator: GENERATOR_ID,
        extremum_range: cfg.extremum_range,
        tolerances: ReportTolerances {
            value_gap_rel: 1e-6,
            location_rel: 1e-3,
            rtol: 1e-8,
            atol: 1e-12,
        },
        rows,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}
