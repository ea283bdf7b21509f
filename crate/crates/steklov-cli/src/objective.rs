//! Resolving the command-line objective specification: either a descending
//! coefficient list or a named builtin.

use steklov::fixtures;
use steklov::polyalg::Polynomial;
use steklov::regularize::ObjectiveFunction;

pub enum SpecError {
    Usage(String),
}

impl SpecError {
    pub fn message(&self) -> &str {
        match self {
            SpecError::Usage(m) => m,
        }
    }
}

fn usage<T>(message: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError::Usage(message.into()))
}

/// Parses `--poly` input: comma-separated coefficients in descending degree
/// order, the convention polynomials are written in.
pub fn parse_poly(text: &str) -> Result<Polynomial, SpecError> {
    let mut coeffs = Vec::new();
    for part in text.split(',') {
        match part.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => coeffs.push(v),
            _ => return usage(format!("invalid coefficient {part:?} in --poly")),
        }
    }
    if coeffs.is_empty() || coeffs.iter().all(|c| *c == 0.0) {
        return usage("--poly needs at least one nonzero coefficient");
    }
    Ok(Polynomial::from_descending(&coeffs))
}

/// Resolves `--poly`/`--builtin` into an objective.
pub fn resolve(poly: Option<&str>, builtin: Option<&str>) -> Result<ObjectiveFunction, SpecError> {
    match (poly, builtin) {
        (Some(p), None) => {
            let poly = parse_poly(p)?;
            Ok(ObjectiveFunction::from_poly("poly", poly))
        }
        (None, Some(name)) => match fixtures::by_name(name) {
            Some(obj) => Ok(obj),
            None => usage(format!(
                "unknown builtin {name:?}; available: {}",
                fixtures::NAMES.join(", ")
            )),
        },
        _ => usage("exactly one of --poly or --builtin is required"),
    }
}

/// Trajectory methods need an even-degree monic polynomial; said with a
/// clear message before any numerics run.
pub fn validate_for_trajectory(obj: &ObjectiveFunction, method: &str) -> Result<(), SpecError> {
    let Some(p) = obj.poly() else {
        if method == "steklov-quartic" {
            return usage("--method steklov-quartic needs a polynomial objective");
        }
        return Ok(());
    };
    if p.degree() % 2 != 0 || p.degree() < 2 {
        return usage(format!(
            "trajectory methods need an even-degree polynomial (degree {} given)",
            p.degree()
        ));
    }
    if (p.leading() - 1.0).abs() > 4.0 * f64::EPSILON {
        return usage(format!(
            "trajectory methods need a monic polynomial (leading coefficient {} given)",
            p.leading()
        ));
    }
    if method == "steklov-quartic" && p.degree() != 4 {
        return usage(format!(
            "--method steklov-quartic needs a quartic (degree {} given)",
            p.degree()
        ));
    }
    Ok(())
}
