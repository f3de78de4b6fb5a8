//! Whittaker-function quantization of the Morse surrogate.
//!
//! With `x = κ(ρ − b)` the s-wave radial equation for the surrogate becomes a
//! Morse problem whose decaying solution is `u ∝ z^{-1/2} M_{a,ν}(z)` with
//! `z = 2a·e^{−x}`. The hard wall at `ρ = 0` (that is `x = κ|b|` for `b < 0`)
//! requires `X = 2a·e^{−κ|b|}` to be the first positive zero of `M_{a,ν}`.
//! Fixing ν pins the energy `E = −ν²/2`; solving for `a` then fixes
//! `|A| = a²/2`, the Born product `αβ = κ²a²/(2|G|)` and `ε/α²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morse_fit::MorseParams;
use crate::roots::brent_fallible;
use crate::specfun::{quarter_beta_quarter, whittaker_m, SeriesControl, KUMMER_Z_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub morse: MorseParams,
    pub quarter_beta: f64,
    pub alpha: f64,
}

impl ModelConstants {
    pub fn new(morse: MorseParams) -> Self {
        Self {
            morse,
            quarter_beta: quarter_beta_quarter(),
            alpha: crate::ALPHA,
        }
    }
}

impl Default for ModelConstants {
    fn default() -> Self {
        Self::new(MorseParams::REFERENCE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSolution {
    pub nu: f64,
    pub a: f64,
    /// First zero of M_{a,ν}, equal to the boundary point 2a·e^{−κ|b|}.
    pub x: f64,
    pub a_abs: f64,
    pub e: f64,
    pub alpha_beta: f64,
    pub eps_over_alpha2: f64,
}

/// Scan step for locating the first zero of M in z.
pub const ROOT_SCAN_STEP: f64 = 0.05;
const ROOT_X_TOL: f64 = 1e-10;
const A_SCAN_START: f64 = 0.1;
const A_SCAN_STEP: f64 = 0.1;
pub const A_MAX: f64 = 50.0;

fn boundary_point(a: f64, morse: &MorseParams) -> f64 {
    2.0 * a * (-morse.kappa * morse.b.abs()).exp()
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(
            name,
            format!("argument {v} must be positive"),
        ))
    }
}

/// M_{a,ν} evaluated at the wall, 2a·e^{−κ|b|}.
pub fn quantization_residual(a: f64, nu: f64, morse: &MorseParams) -> Result<f64> {
    positive("quantization_residual", a)?;
    positive("quantization_residual", nu)?;
    whittaker_m(a, nu, boundary_point(a, morse), &SeriesControl::default())
}

/// First sign change of z ↦ M_{a,ν}(z) on (0, z_max], as a bracket, or `None`.
fn first_sign_change(a: f64, nu: f64, z_max: f64) -> Result<Option<(f64, f64)>> {
    let ctl = SeriesControl::default();
    let mut z_prev = 0.0;
    let mut k = 1usize;
    loop {
        let z = (k as f64 * ROOT_SCAN_STEP).min(z_max);
        let v = whittaker_m(a, nu, z, &ctl)?;
        if v == 0.0 {
            return Ok(Some((z, z)));
        }
        // M > 0 just above z = 0, so the first negative sample closes a bracket.
        if v < 0.0 {
            return Ok(Some((z_prev, z)));
        }
        if z >= z_max {
            return Ok(None);
        }
        z_prev = z;
        k += 1;
    }
}

fn refine_root(a: f64, nu: f64, lo: f64, hi: f64) -> Result<f64> {
    if lo == hi {
        return Ok(lo);
    }
    let ctl = SeriesControl::default();
    // lo can be 0 where M vanishes identically; move just inside.
    let lo = if lo == 0.0 { hi * 1e-6 } else { lo };
    brent_fallible(|z| whittaker_m(a, nu, z, &ctl), lo, hi, ROOT_X_TOL, 200)
}

/// Smallest z > 0 with M_{a,ν}(z) = 0.
pub fn first_root(a: f64, nu: f64) -> Result<f64> {
    positive("first_root", a)?;
    positive("first_root", nu)?;
    match first_sign_change(a, nu, KUMMER_Z_LIMIT)? {
        Some((lo, hi)) => refine_root(a, nu, lo, hi),
        None => Err(Error::NoRoot {
            what: "WhittakerM",
            limit: KUMMER_Z_LIMIT,
        }),
    }
}

/// Whether M_{a,ν} changes sign inside (0, X) with X the wall point.
fn has_interior_node(a: f64, nu: f64, morse: &MorseParams) -> Result<bool> {
    let x = boundary_point(a, morse);
    Ok(first_sign_change(a, nu, x)?.is_some_and(|(_, hi)| hi < x))
}

/// Smallest a > 0 for which the wall sits exactly on the first zero of M_{a,ν}.
pub fn solve_a(nu: f64, morse: &MorseParams) -> Result<f64> {
    positive("solve_a", nu)?;
    morse.validate()?;
    let no_solution = || Error::NoSolution { nu, a_max: A_MAX };

    // Nodeless at a, and the residual at the wall stays positive there.
    let nodeless = |a: f64| -> Result<bool> {
        Ok(!has_interior_node(a, nu, morse)? && quantization_residual(a, nu, morse)? > 0.0)
    };

    let mut lo = A_SCAN_START;
    if !nodeless(lo)? {
        return Err(no_solution());
    }
    let mut step = A_SCAN_STEP;
    loop {
        let hi = (lo + step).min(A_MAX);
        if nodeless(hi)? {
            if hi >= A_MAX {
                return Err(no_solution());
            }
            lo = hi;
            continue;
        }
        // The wall crossed the first zero somewhere in (lo, hi].
        let r_hi = quantization_residual(hi, nu, morse)?;
        if r_hi < 0.0 && !has_interior_node(hi, nu, morse)? {
            let a = brent_fallible(|a| quantization_residual(a, nu, morse), lo, hi, 1e-13, 200)?;
            return Ok(a);
        }
        if r_hi == 0.0 {
            return Ok(hi);
        }
        // Two zeros passed in one step; shrink the step.
        step *= 0.1;
        if step < 1e-12 {
            return Err(no_solution());
        }
    }
}

/// Closed-form observables for given (ν, a).
///
/// `αβ = κ²a²/(2|G|)` and, with `E = −ν²/2`,
/// `ε/α² = −[κ²ν²/2 + αβ(V₀ + ¼B(¼,¼) − |G|)]/(αβ)²`.
pub fn observables(nu: f64, a: f64, c: &ModelConstants) -> AnalyticSolution {
    let m = &c.morse;
    let g_abs = m.g.abs();
    let k2 = m.kappa * m.kappa;
    let alpha_beta = k2 * a * a / (2.0 * g_abs);
    let e = -0.5 * nu * nu;
    let eps_over_alpha2 = -(0.5 * k2 * nu * nu + alpha_beta * (m.v0 + c.quarter_beta - g_abs))
        / (alpha_beta * alpha_beta);
    AnalyticSolution {
        nu,
        a,
        x: boundary_point(a, m),
        a_abs: 0.5 * a * a,
        e,
        alpha_beta,
        eps_over_alpha2,
    }
}

/// Quantize at a given ν.
pub fn solve(nu: f64, c: &ModelConstants) -> Result<AnalyticSolution> {
    let a = solve_a(nu, &c.morse)?;
    Ok(observables(nu, a, c))
}

pub const NU_BRACKET: (f64, f64) = (2.0, 4.0);
pub const NU_LIMITS: (f64, f64) = (0.5, 10.0);

/// Find ν whose ground state has ε/α² = `target_eps`.
pub fn calibrate_nu(target_eps: f64, c: &ModelConstants) -> Result<AnalyticSolution> {
    if !target_eps.is_finite() {
        return Err(Error::InvalidInput(format!(
            "target {target_eps} is not finite"
        )));
    }
    let f = |nu: f64| -> Result<f64> { Ok(solve(nu, c)?.eps_over_alpha2 - target_eps) };
    let bracketing = || Error::Bracketing {
        target: target_eps,
        nu_min: NU_LIMITS.0,
        nu_max: NU_LIMITS.1,
    };

    let (mut lo, mut hi) = NU_BRACKET;
    let (mut f_lo, mut f_hi) = (f(lo)?, f(hi)?);
    let (mut can_lower, mut can_raise) = (true, true);
    while f_lo.signum() == f_hi.signum() {
        can_lower &= lo > NU_LIMITS.0;
        can_raise &= hi < NU_LIMITS.1;
        if !can_lower && !can_raise {
            return Err(bracketing());
        }
        if can_lower {
            let trial = (lo - 0.5).max(NU_LIMITS.0);
            match f(trial) {
                Ok(v) => (lo, f_lo) = (trial, v),
                Err(Error::NoSolution { .. }) => can_lower = false,
                Err(e) => return Err(e),
            }
        }
        if can_raise {
            let trial = (hi + 1.0).min(NU_LIMITS.1);
            match f(trial) {
                Ok(v) => (hi, f_hi) = (trial, v),
                Err(Error::NoSolution { .. }) => can_raise = false,
                Err(e) => return Err(e),
            }
        }
    }
    let nu = brent_fallible(f, lo, hi, 1e-12, 200)?;
    solve(nu, c)
}

/// Sign changes of M_{a,ν} over `samples` equally spaced interior points of (0, z_max).
pub fn count_sign_changes(a: f64, nu: f64, z_max: f64, samples: usize) -> Result<usize> {
    let ctl = SeriesControl::default();
    let mut prev: Option<f64> = None;
    let mut count = 0;
    for k in 1..=samples {
        let z = z_max * k as f64 / (samples + 1) as f64;
        let v = whittaker_m(a, nu, z, &ctl)?;
        if let Some(p) = prev {
            if p.signum() != v.signum() {
                count += 1;
            }
        }
        prev = Some(v);
    }
    Ok(count)
}
