//! Born's electrostatic potential, the BIC screening function Z(ρ) and the
//! potential shape W(ρ) = −Z(ρ)/ρ.
//!
//! Z is the sum of `ρ²·I(ρ)` and `¼B(¼,¼)·ρ`, where `I(ρ)` is a negative
//! definite integral over `y ∈ [0, √2/4)` whose integrand diverges like
//! `(√2/4 − y)^{-1/2}` at the upper end. For large ρ the two pieces are each
//! about `1.854·ρ` and cancel to O(1), so the quadrature runs at a relative
//! tolerance of 1e-12 and ρ is capped at 1e6.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morse_fit::{morse_w, MorseParams};
use crate::quadrature::{integrate, QuadSpec};
use crate::specfun::quarter_beta_quarter;
use crate::spline::CubicSpline;

/// Upper end of the screening integral, √2/4.
pub const Y_SINGULAR: f64 =
    0.353_553_390_593_273_762_200_422_181_052_424_519_642_417_968_844_237_018_294_169;

/// Largest ρ for which Z keeps its absolute accuracy budget.
pub const RHO_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UnitsNote {
    pub alpha: f64,
    pub conventions: String,
}

impl Default for UnitsNote {
    fn default() -> Self {
        Self {
            alpha: crate::ALPHA,
            conventions:
                "hbar = m_e = c = 1; lengths in electron Compton wavelengths; rho = r/beta"
                    .to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    ExactBic,
    MorseSurrogate,
}

/// Sampled potential shape W on a strictly increasing ρ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialTable {
    pub rho_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: PotentialKind,
}

impl PotentialTable {
    pub fn new(rho_grid: Vec<f64>, values: Vec<f64>, kind: PotentialKind) -> Result<Self> {
        if rho_grid.len() < 2 || rho_grid.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "potential table needs >= 2 rows of equal length, got {} grid / {} values",
                rho_grid.len(),
                values.len()
            )));
        }
        if rho_grid[0] < 0.0 || rho_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "potential grid must be non-negative and strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "potential values must be finite".into(),
            ));
        }
        Ok(Self {
            rho_grid,
            values,
            kind,
        })
    }

    pub fn len(&self) -> usize {
        self.rho_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho_grid.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.rho_grid
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn spline(&self) -> Result<CubicSpline> {
        CubicSpline::natural(self.rho_grid.clone(), self.values.clone())
    }
}

/// Integrand of the screening integral I(ρ).
///
/// The first radical `1 + 4y² − 4y√(1+y²)` is evaluated as
/// `(1 − 8y²)/(1 + 4y² + 4y√(1+y²))` so it stays accurate next to its zero.
pub fn z_integrand(y: f64, rho: f64) -> Result<f64> {
    if !(0.0..Y_SINGULAR).contains(&y) {
        return Err(Error::domain(
            "z_integrand",
            format!("y = {y} outside [0, sqrt(2)/4)"),
        ));
    }
    let s = (1.0 + y * y).sqrt();
    let numerator = 2.0 * y * s - 2.0 * y * y - 1.0;
    let gap = 8.0 * (Y_SINGULAR - y) * (Y_SINGULAR + y);
    let radical = gap / (1.0 + 4.0 * y * y + 4.0 * y * s);
    let y2r2 = y * y * rho * rho;
    Ok(numerator / (radical.sqrt() * s * (1.0 + y2r2 * y2r2).sqrt()))
}

fn check_rho(function: &'static str, rho: f64) -> Result<()> {
    if !(rho >= 0.0) {
        return Err(Error::domain(
            function,
            format!("rho = {rho} must be non-negative"),
        ));
    }
    if rho > RHO_LIMIT {
        return Err(Error::Range {
            function,
            value: rho,
            limit: RHO_LIMIT,
        });
    }
    Ok(())
}

/// The screening integral I(ρ), so that Z(ρ) = ρ²·I(ρ) + ¼B(¼,¼)·ρ.
pub fn screening_integral(rho: f64) -> Result<f64> {
    check_rho("screening_integral", rho)?;
    let f = |y: f64| z_integrand(y, rho).unwrap_or(f64::NAN);
    // The integrand has a shoulder at y ~ 1/ρ for large ρ.
    let split = if rho > 0.0 {
        (1.0 / rho).min(0.5 * Y_SINGULAR)
    } else {
        0.5 * Y_SINGULAR
    };
    let head = integrate(f, &QuadSpec::new(0.0, split))?;
    let tail = integrate(f, &QuadSpec::new(split, Y_SINGULAR).singular_upper())?;
    Ok(head.value + tail.value)
}

/// Screening function Z(ρ).
pub fn z_of_rho(rho: f64) -> Result<f64> {
    check_rho("z_of_rho", rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    Ok(rho * rho * screening_integral(rho)? + quarter_beta_quarter() * rho)
}

/// Potential shape W(ρ) = −Z(ρ)/ρ, with its finite limit −¼B(¼,¼) at ρ = 0.
pub fn w_of_rho(rho: f64) -> Result<f64> {
    check_rho("w_of_rho", rho)?;
    if rho == 0.0 {
        return Ok(-quarter_beta_quarter());
    }
    Ok(-z_of_rho(rho)? / rho)
}

/// Dimensionless Born potential ∫_r^∞ ds/√(1+s⁴).
pub fn born_phi(r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(
            "born_phi",
            format!("r = {r} must be non-negative"),
        ));
    }
    let res = integrate(
        |s: f64| 1.0 / (1.0 + s * s * s * s).sqrt(),
        &QuadSpec::semi_infinite(r),
    )?;
    Ok(res.value)
}

type CacheKey = (u64, u64, usize);

fn exact_cache() -> &'static Mutex<HashMap<CacheKey, Arc<PotentialTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<PotentialTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Uniform grid from `rho_min` to `rho_max` inclusive.
pub fn uniform_grid(rho_min: f64, rho_max: f64, n: usize) -> Vec<f64> {
    let step = (rho_max - rho_min) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                rho_max
            } else {
                rho_min + i as f64 * step
            }
        })
        .collect()
}

/// Tabulate W on `n` uniform points over `[rho_min, rho_max]`.
///
/// Exact tables are memoized per grid; grid points are evaluated in parallel
/// and returned in grid order.
pub fn tabulate(
    kind: PotentialKind,
    rho_min: f64,
    rho_max: f64,
    n: usize,
    morse: Option<&MorseParams>,
) -> Result<PotentialTable> {
    if !(rho_min >= 0.0) || !(rho_max > rho_min) || n < 2 {
        return Err(Error::InvalidInput(format!(
            "tabulation needs 0 <= rho_min < rho_max and n >= 2, got [{rho_min}, {rho_max}] n={n}"
        )));
    }
    check_rho("tabulate", rho_max)?;
    let grid = uniform_grid(rho_min, rho_max, n);
    match kind {
        PotentialKind::MorseSurrogate => {
            let p = morse.ok_or(Error::MissingMorseParams)?;
            let values = grid.iter().map(|&r| morse_w(p, r)).collect();
            PotentialTable::new(grid, values, kind)
        }
        PotentialKind::ExactBic => {
            let key = (rho_min.to_bits(), rho_max.to_bits(), n);
            if let Some(hit) = exact_cache().lock().expect("cache lock").get(&key) {
                return Ok((**hit).clone());
            }
            let values = grid
                .par_iter()
                .map(|&r| w_of_rho(r))
                .collect::<Result<Vec<_>>>()?;
            let table = PotentialTable::new(grid, values, kind)?;
            exact_cache()
                .lock()
                .expect("cache lock")
                .insert(key, Arc::new(table.clone()));
            Ok(table)
        }
    }
}

/// Number of knots and outer radius of the shared exact-potential spline.
pub const BIC_SPLINE_POINTS: usize = 2000;
pub const BIC_SPLINE_RHO_MAX: f64 = 40.0;

/// Cubic spline of the exact W on [0, 40] with 2000 knots, built once.
pub fn bic_spline() -> Result<Arc<CubicSpline>> {
    static SPLINE: OnceLock<Arc<CubicSpline>> = OnceLock::new();
    if let Some(s) = SPLINE.get() {
        return Ok(s.clone());
    }
    let table = tabulate(
        PotentialKind::ExactBic,
        0.0,
        BIC_SPLINE_RHO_MAX,
        BIC_SPLINE_POINTS,
        None,
    )?;
    let spline = Arc::new(table.spline()?);
    Ok(SPLINE.get_or_init(|| spline).clone())
}
