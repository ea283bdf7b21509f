//! Built-in example objectives, available from the CLI by name.

use crate::polyalg::Polynomial;
use crate::regularize::ObjectiveFunction;

/// Names of all built-in objectives, in registry order.
pub const NAMES: [&str; 5] = [
    "p4_sec61",
    "p6_sec62",
    "p10_sec63",
    "p20_sec63",
    "quad_sine",
];

/// Looks up a built-in objective by registry name.
pub fn by_name(name: &str) -> Option<ObjectiveFunction> {
    match name {
        "p4_sec61" => Some(p4_sec61()),
        "p6_sec62" => Some(p6_sec62()),
        "p10_sec63" => Some(p10_sec63()),
        "p20_sec63" => Some(p20_sec63()),
        "quad_sine" => Some(quad_sine()),
        _ => None,
    }
}

/// `x^4 - 8x^3 - 18x^2 + 56x`: local minima at -2 and 7 (global), local
/// maximum at 1.
pub fn p4_sec61() -> ObjectiveFunction {
    ObjectiveFunction::from_poly(
        "p4_sec61",
        Polynomial::from_descending(&[1.0, -8.0, -18.0, 56.0, 0.0]),
    )
}

/// `x^6 - 66x^5/5 - 9x^4/2 + 422x^3 - 474x^2 - 2160x`: local minima at -4,
/// 2 and 9 (global), local maxima at -1 and 5.
pub fn p6_sec62() -> ObjectiveFunction {
    ObjectiveFunction::from_poly(
        "p6_sec62",
        Polynomial::from_descending(&[1.0, -66.0 / 5.0, -9.0 / 2.0, 422.0, -474.0, -2160.0, 0.0]),
    )
}

/// Monic degree-10 polynomial, transcribed coefficient list. Its real
/// critical points sit near {-12.056, -2.708, -1.000, 1.000, 2.600} and the
/// global minimum is f(-12.0557) ~ -5.1317e9.
pub fn p10_sec63() -> ObjectiveFunction {
    ObjectiveFunction::from_poly(
        "p10_sec63",
        Polynomial::from_descending(&[
            1.0,
            260.0 / 9.0,
            1035.0 / 4.0,
            -120.0,
            -9415.0,
            32172.0,
            175765.0 / 2.0,
            -1369360.0 / 3.0,
            -148560.0,
            1209600.0,
            0.0,
        ]),
    )
}

/// Monic degree-20 polynomial, transcribed coefficient list. Its real
/// critical points sit near {-11.876, -2.00, -1.00, 0.00, 2.00} and the
/// global minimum is f(-11.8756) ~ -3.47e20.
pub fn p20_sec63() -> ObjectiveFunction {
    ObjectiveFunction::from_poly(
        "p20_sec63",
        Polynomial::from_descending(&[
            1.0,
            680.0 / 19.0,
            3935.0 / 9.0,
            -15755.0 / 17.0,
            -196105.0 / 8.0,
            2230697.0 / 12.0,
            20765145.0 / 112.0,
            -1351162585.0 / 208.0,
            10221013715.0 / 768.0,
            6382409515.0 / 64.0,
            -12625444643.0 / 32.0,
            -200463718805.0 / 288.0,
            2498521767895.0 / 512.0,
            465297612345.0 / 448.0,
            -2045419187205.0 / 64.0,
            198942566751.0 / 16.0,
            3627285358725.0 / 32.0,
            -56515087125.0,
            -201131555625.0,
            0.0,
            0.0,
        ]),
    )
}

/// `0.06 x^2 + sin 3x`: coercive and highly multimodal, with global
/// minimizer near -0.5167. Not polynomial-backed, so Steklov values go
/// through quadrature while the partials stay closed-form.
pub fn quad_sine() -> ObjectiveFunction {
    ObjectiveFunction::from_fns(
        "quad_sine",
        |x| 0.06 * x * x + (3.0 * x).sin(),
        |x| 0.12 * x + 3.0 * (3.0 * x).cos(),
    )
    .with_d2f(|x| 0.12 - 9.0 * (3.0 * x).sin())
}
