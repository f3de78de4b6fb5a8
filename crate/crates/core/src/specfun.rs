//! Real special functions: log-Gamma, Euler Beta, Kummer ₁F₁ and Whittaker M.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

/// Truncation control for power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_terms: 5000,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || max_terms == 0 {
            return Err(Error::InvalidInput(format!(
                "series control needs rel_tol > 0 and max_terms >= 1, got ({rel_tol}, {max_terms})"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

/// Largest |z| accepted by the Kummer series.
pub const KUMMER_Z_LIMIT: f64 = 200.0;

// Lanczos approximation, g = 10.900511, eleven terms (Godfrey's coefficients).
const LANCZOS_G: f64 = 10.900511;
const LANCZOS_COEF: [f64; 11] = [
    2.485_740_891_387_535_655_46e-5,
    1.051_423_785_817_219_742_10,
    -3.456_870_972_220_162_354_69,
    4.512_277_094_668_948_237_00,
    -2.982_852_253_235_766_557_21,
    1.056_397_115_771_267_130_77,
    -1.954_287_731_916_458_695_83e-1,
    1.709_705_434_044_412_243_07e-2,
    -5.719_261_174_043_057_812_83e-4,
    4.633_994_733_599_056_367_08e-6,
    -2.719_949_084_886_077_039_10e-9,
];
// ln(2 * sqrt(e / pi))
const LN_2_SQRT_E_OVER_PI: f64 =
    0.620_782_237_635_245_222_345_518_445_781_647_212_251_852_647_902_6;

/// Natural logarithm of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "ln_gamma",
            format!("x = {x} must be positive"),
        ));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx).
        return PI.ln() - (PI * x).sin().ln() - ln_gamma_unchecked(1.0 - x);
    }
    let sum = LANCZOS_COEF
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_COEF[0], |acc, (i, c)| {
            acc + c / (x + i as f64 - 1.0)
        });
    sum.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_G) / E).ln()
}

/// Euler Beta function B(p, q) = Γ(p)Γ(q)/Γ(p+q).
pub fn beta(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) || !(q > 0.0) {
        return Err(Error::domain(
            "beta",
            format!("(p, q) = ({p}, {q}) must both be positive"),
        ));
    }
    Ok((ln_gamma(p)? + ln_gamma(q)? - ln_gamma(p + q)?).exp())
}

/// ¼·B(¼, ¼), the value of the dimensionless Born potential at the origin.
pub fn quarter_beta_quarter() -> f64 {
    0.25 * beta(0.25, 0.25).expect("positive arguments")
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Kummer's confluent hypergeometric function ₁F₁(α; γ; z) by its power series.
///
/// Terms follow the recurrence `t_{n+1} = t_n (α+n) z / ((γ+n)(n+1))`. The sum
/// stops when a geometric bound on the remaining tail drops below `rel_tol`
/// relative to the partial sum, or when the series terminates exactly.
pub fn kummer_m(alpha: f64, gamma: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    if is_nonpositive_integer(gamma) {
        return Err(Error::domain(
            "kummer_m",
            format!("gamma = {gamma} is a non-positive integer"),
        ));
    }
    if !alpha.is_finite() || !gamma.is_finite() || !z.is_finite() {
        return Err(Error::domain("kummer_m", "non-finite argument"));
    }
    if z.abs() > KUMMER_Z_LIMIT {
        return Err(Error::Range {
            function: "kummer_m",
            value: z,
            limit: KUMMER_Z_LIMIT,
        });
    }

    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        let ratio = (alpha + nf) * z / ((gamma + nf) * (nf + 1.0));
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        // Once every later factor has a fixed sign and the ratio bound is
        // below one, the remaining tail is dominated by a geometric series.
        let next = nf + 1.0;
        if alpha + next > 0.0 && gamma + next > 0.0 {
            let bound = z.abs() / (next + 1.0) * ((alpha + next) / (gamma + next)).max(1.0);
            if bound < 1.0 && term.abs() * bound / (1.0 - bound) <= ctl.rel_tol * sum.abs() {
                return Ok(sum);
            }
        }
    }
    Err(Error::NonConvergence {
        what: "kummer_m series",
        iterations: ctl.max_terms,
    })
}

/// Whittaker function M_{a,ν}(z) = e^{-z/2} z^{ν+1/2} ₁F₁(ν − a + 1/2; 1 + 2ν; z).
pub fn whittaker_m(a: f64, nu: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(
            "whittaker_m",
            format!("z = {z} must be positive"),
        ));
    }
    let b = 1.0 + 2.0 * nu;
    if is_nonpositive_integer(b) {
        return Err(Error::domain(
            "whittaker_m",
            format!("1 + 2nu = {b} is a non-positive integer"),
        ));
    }
    let f = kummer_m((nu + 0.5) - a, b, z, ctl)?;
    Ok((-0.5 * z + (nu + 0.5) * z.ln()).exp() * f)
}
