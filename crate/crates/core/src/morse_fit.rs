//! Morse-type surrogate for the BIC potential shape and its four-parameter fit.
//!
//! The surrogate is `W_s(ρ) = −[G(1 − e^{−κ(ρ−b)})² + V₀ + ¼B(¼,¼)]`. The fit
//! runs a damped Gauss-Newton (Levenberg-Marquardt) loop with a
//! forward-difference Jacobian. The default objective is the minimax
//! (Chebyshev) error: the least-squares solution seeds a nonlinear Remez
//! exchange, with Lawson's iteratively reweighted least squares as the
//! fallback when no alternating reference exists. Plain uniform least squares
//! is also available.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::bic_potential::{tabulate, PotentialKind, PotentialTable};
use crate::error::{Error, Result};
use crate::specfun::quarter_beta_quarter;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorseParams {
    /// Well-depth parameter; negative for an attractive fit.
    pub g: f64,
    pub v0: f64,
    pub kappa: f64,
    pub b: f64,
}

impl MorseParams {
    /// Published surrogate parameters.
    pub const REFERENCE: MorseParams = MorseParams {
        g: -1.8300,
        v0: 0.09805,
        kappa: 0.58520,
        b: -0.45720,
    };

    /// Starting point used when nothing better is known.
    pub const DEFAULT_INIT: MorseParams = MorseParams {
        g: -2.0,
        v0: 0.0,
        kappa: 0.5,
        b: -0.5,
    };

    pub fn new(g: f64, v0: f64, kappa: f64, b: f64) -> Result<Self> {
        let p = Self { g, v0, kappa, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.g, self.v0, self.kappa, self.b]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "non-finite Morse parameters {self:?}"
            )));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidInput(format!(
                "Morse kappa must be positive, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.g, self.v0, self.kappa.ln(), self.b)
    }

    fn from_vector(v: &Vector4<f64>) -> Self {
        Self {
            g: v[0],
            v0: v[1],
            kappa: v[2].exp(),
            b: v[3],
        }
    }
}

/// Surrogate potential shape W_s(ρ).
pub fn morse_w(p: &MorseParams, rho: f64) -> f64 {
    morse_w_with(p, rho, quarter_beta_quarter())
}

fn morse_w_with(p: &MorseParams, rho: f64, quarter_beta: f64) -> f64 {
    let s = 1.0 - (-p.kappa * (rho - p.b)).exp();
    -(p.g * s * s + p.v0 + quarter_beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitObjective {
    /// Uniformly weighted sum of squared residuals.
    LeastSquares,
    /// Maximum absolute residual.
    Minimax,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_samples: usize,
    pub max_iters: usize,
    pub step_tol: f64,
    pub init: MorseParams,
    pub objective: FitObjective,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            rho_min: 0.0,
            rho_max: 10.0,
            n_samples: 200,
            max_iters: 200,
            step_tol: 1e-10,
            init: MorseParams::DEFAULT_INIT,
            objective: FitObjective::Minimax,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rho_min >= 0.0) || !(self.rho_max > self.rho_min) {
            return Err(Error::InvalidInput(format!(
                "fit window [{}, {}] must satisfy 0 <= rho_min < rho_max",
                self.rho_min, self.rho_max
            )));
        }
        if self.n_samples < 8 || self.max_iters == 0 || !(self.step_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "fit needs n_samples >= 8, max_iters >= 1, step_tol > 0; got {}, {}, {}",
                self.n_samples, self.max_iters, self.step_tol
            )));
        }
        if ![self.init.g, self.init.v0, self.init.kappa, self.init.b]
            .iter()
            .all(|v| v.is_finite())
            || self.init.kappa == 0.0
        {
            return Err(Error::InvalidInput(format!(
                "unusable initial parameters {:?}",
                self.init
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: MorseParams,
    pub rms_residual: f64,
    pub max_abs_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective: FitObjective,
}

/// Result of one damped least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vector4<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial value.
    pub cost_history: Vec<f64>,
}

const JACOBIAN_REL_STEP: f64 = 1e-6;
const MAX_DAMPING: f64 = 1e20;

fn half_sq_norm(r: &DVector<f64>) -> f64 {
    0.5 * r.norm_squared()
}

/// Levenberg-Marquardt on a four-parameter residual function.
pub fn levenberg_marquardt<F>(
    residuals: F,
    init: Vector4<f64>,
    max_iters: usize,
    step_tol: f64,
) -> Result<LmOutcome>
where
    F: Fn(&Vector4<f64>) -> DVector<f64>,
{
    let mut x = init;
    let mut r = residuals(&x);
    let m = r.len();
    let mut cost = half_sq_norm(&r);
    let mut history = vec![cost];
    let mut damping = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        let mut jac = DMatrix::<f64>::zeros(m, 4);
        for j in 0..4 {
            let h = JACOBIAN_REL_STEP * x[j].abs().max(1e-3);
            let mut xp = x;
            xp[j] += h;
            let rp = residuals(&xp);
            jac.set_column(j, &((rp - &r) / h));
        }
        let jtj: Matrix4<f64> = (jac.transpose() * &jac).fixed_view::<4, 4>(0, 0).into();
        let grad: Vector4<f64> = (jac.transpose() * &r).fixed_rows::<4>(0).into();
        if (0..4).any(|j| !(jtj[(j, j)] > 0.0)) {
            return Err(Error::SingularJacobian(format!(
                "parameter column {} has no influence on the residuals",
                (0..4).find(|&j| !(jtj[(j, j)] > 0.0)).unwrap_or(0)
            )));
        }

        let mut accepted = false;
        while damping < MAX_DAMPING {
            let mut a = jtj;
            for j in 0..4 {
                a[(j, j)] += damping * jtj[(j, j)];
            }
            let step = match a.cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => {
                    damping *= 10.0;
                    continue;
                }
            };
            let trial = x + step;
            let rt = residuals(&trial);
            let ct = half_sq_norm(&rt);
            if ct.is_finite() && ct < cost {
                let small = step.norm() <= step_tol * (x.norm() + step_tol);
                x = trial;
                r = rt;
                cost = ct;
                history.push(cost);
                damping = (damping * 0.1).max(1e-12);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            // No descent direction left at working precision.
            converged = true;
        }
        if converged {
            break;
        }
    }

    Ok(LmOutcome {
        params: x,
        cost,
        iterations,
        converged,
        cost_history: history,
    })
}

fn residual_stats(p: &MorseParams, rho: &[f64], w: &[f64], qb: f64) -> (f64, f64) {
    let (mut ss, mut max) = (0.0_f64, 0.0_f64);
    for (&x, &y) in rho.iter().zip(w) {
        let d = morse_w_with(p, x, qb) - y;
        ss += d * d;
        max = max.max(d.abs());
    }
    ((ss / rho.len() as f64).sqrt(), max)
}

const LAWSON_MAX_PASSES: usize = 2000;
const LAWSON_REL_CHANGE: f64 = 1e-9;

/// Fit the surrogate to the rows of `table` that fall inside the config window.
pub fn fit(table: &PotentialTable, cfg: &FitConfig) -> Result<FitReport> {
    cfg.validate()?;
    let (rho, w): (Vec<f64>, Vec<f64>) = table
        .rows()
        .filter(|(r, _)| *r >= cfg.rho_min && *r <= cfg.rho_max)
        .unzip();
    if rho.len() < 8 {
        return Err(Error::InvalidInput(format!(
            "only {} table rows inside the fit window [{}, {}]",
            rho.len(),
            cfg.rho_min,
            cfg.rho_max
        )));
    }
    let qb = quarter_beta_quarter();
    let mut init = cfg.init;
    init.kappa = init.kappa.abs();
    let x0 = init.to_vector();

    let weighted = |weights: &[f64]| {
        let rho = &rho;
        let w = &w;
        let weights = weights.to_vec();
        move |x: &Vector4<f64>| {
            let p = MorseParams::from_vector(x);
            DVector::from_iterator(
                rho.len(),
                rho.iter()
                    .zip(w)
                    .zip(&weights)
                    .map(|((&r, &y), &s)| s.sqrt() * (morse_w_with(&p, r, qb) - y)),
            )
        }
    };

    let n = rho.len();
    let (x, iterations, converged) = match cfg.objective {
        FitObjective::LeastSquares => {
            let out =
                levenberg_marquardt(weighted(&vec![1.0; n]), x0, cfg.max_iters, cfg.step_tol)?;
            (out.params, out.iterations, out.converged)
        }
        FitObjective::Minimax => {
            let start =
                levenberg_marquardt(weighted(&vec![1.0; n]), x0, cfg.max_iters, cfg.step_tol)?;
            match remez_exchange(&rho, &w, qb, start.params) {
                Some((x, exchanges)) => (x, start.iterations + exchanges, start.converged),
                None => {
                    let (x, passes, ok) = lawson(&rho, &w, qb, start.params, cfg, &weighted)?;
                    (x, start.iterations + passes, ok)
                }
            }
        }
    };

    let params = MorseParams::from_vector(&x);
    if !(params.kappa > 1e-12) || !params.kappa.is_finite() {
        return Err(Error::SingularJacobian(format!(
            "kappa degenerated to {}",
            params.kappa
        )));
    }
    let (rms_residual, max_abs_residual) = residual_stats(&params, &rho, &w, qb);
    Ok(FitReport {
        params,
        rms_residual,
        max_abs_residual,
        iterations,
        converged,
        objective: cfg.objective,
    })
}

fn abs_residuals(rho: &[f64], w: &[f64], qb: f64, x: &Vector4<f64>) -> Vec<f64> {
    let p = MorseParams::from_vector(x);
    rho.iter()
        .zip(w)
        .map(|(&r, &y)| (morse_w_with(&p, r, qb) - y).abs())
        .collect()
}

/// Lawson's reweighting: `w_i <- w_i |r_i|`, renormalized, until the maximum
/// residual settles.
fn lawson<F, G>(
    rho: &[f64],
    w: &[f64],
    qb: f64,
    start: Vector4<f64>,
    cfg: &FitConfig,
    weighted: &F,
) -> Result<(Vector4<f64>, usize, bool)>
where
    F: Fn(&[f64]) -> G,
    G: Fn(&Vector4<f64>) -> DVector<f64>,
{
    let n = rho.len();
    let mut weights = vec![1.0 / n as f64; n];
    let mut x = start;
    let mut prev_max = f64::INFINITY;
    for pass in 1..=LAWSON_MAX_PASSES {
        let out = levenberg_marquardt(weighted(&weights), x, cfg.max_iters, cfg.step_tol)?;
        let inner_ok = out.converged;
        x = out.params;
        let abs_res = abs_residuals(rho, w, qb, &x);
        let max = abs_res.iter().cloned().fold(0.0, f64::max);
        if max <= 1e-13 || (prev_max - max).abs() <= LAWSON_REL_CHANGE * max {
            return Ok((x, pass, inner_ok));
        }
        prev_max = max;
        for (wt, res) in weights.iter_mut().zip(&abs_res) {
            *wt *= res;
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Ok((x, pass, inner_ok));
        }
        weights.iter_mut().for_each(|wt| *wt /= total);
    }
    Ok((x, LAWSON_MAX_PASSES, false))
}

const REMEZ_MAX_EXCHANGES: usize = 50;
const REMEZ_LEVEL_TOL: f64 = 1e-10;

/// Alternating extrema of a residual vector: the largest-magnitude index of
/// every run of constant sign.
fn alternation_points(d: &[f64]) -> Vec<usize> {
    let mut points: Vec<usize> = Vec::new();
    for (i, &v) in d.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        match points.last_mut() {
            Some(last) if d[*last].signum() == v.signum() => {
                if v.abs() > d[*last].abs() {
                    *last = i;
                }
            }
            _ => points.push(i),
        }
    }
    points
}

/// Choose `count` consecutive alternation points, trimming the smaller end
/// until the set fits, so that the global extremum stays in the reference.
fn pick_reference(d: &[f64], count: usize) -> Option<Vec<usize>> {
    let mut pts = alternation_points(d);
    if pts.len() < count {
        return None;
    }
    let global = pts
        .iter()
        .copied()
        .max_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()))?;
    while pts.len() > count {
        let first = pts[0];
        let last = pts[pts.len() - 1];
        let drop_first = if first == global {
            false
        } else if last == global {
            true
        } else {
            d[first].abs() <= d[last].abs()
        };
        if drop_first {
            pts.remove(0);
        } else {
            pts.pop();
        }
    }
    Some(pts)
}

/// Nonlinear Remez exchange for the Chebyshev fit.
///
/// On a reference of five alternating points it solves `r(ρ_j) = s_j·t` for
/// the four parameters and the level `t` by damped Newton, then exchanges the
/// reference for the new residual extrema. Stops once the largest residual on
/// the grid equals the level. Returns `None` when no alternating reference
/// exists or Newton stalls, so the caller can fall back to reweighting.
fn remez_exchange(
    rho: &[f64],
    w: &[f64],
    qb: f64,
    start: Vector4<f64>,
) -> Option<(Vector4<f64>, usize)> {
    let signed = |x: &Vector4<f64>| -> Vec<f64> {
        let p = MorseParams::from_vector(x);
        rho.iter()
            .zip(w)
            .map(|(&r, &y)| morse_w_with(&p, r, qb) - y)
            .collect()
    };
    let mut x = start;
    for exchange in 1..=REMEZ_MAX_EXCHANGES {
        let d = signed(&x);
        let reference = pick_reference(&d, 5)?;
        let sign0 = d[reference[0]].signum();
        let signs: Vec<f64> = (0..5)
            .map(|j| if j % 2 == 0 { sign0 } else { -sign0 })
            .collect();

        // Unknowns: the four parameters and the level t.
        let mut z = nalgebra::Vector5::new(x[0], x[1], x[2], x[3], d[reference[0]].abs());
        let system = |z: &nalgebra::Vector5<f64>| -> nalgebra::Vector5<f64> {
            let p = MorseParams::from_vector(&Vector4::new(z[0], z[1], z[2], z[3]));
            nalgebra::Vector5::from_fn(|j, _| {
                let k = reference[j];
                morse_w_with(&p, rho[k], qb) - w[k] - signs[j] * z[4]
            })
        };
        let mut f = system(&z);
        for _ in 0..50 {
            let mut jac = nalgebra::Matrix5::<f64>::zeros();
            for c in 0..5 {
                let h = JACOBIAN_REL_STEP * z[c].abs().max(1e-3);
                let mut zp = z;
                zp[c] += h;
                jac.set_column(c, &((system(&zp) - f) / h));
            }
            let step = jac.lu().solve(&(-f))?;
            let mut scale = 1.0;
            let mut accepted = false;
            while scale > 1e-6 {
                let trial = z + step * scale;
                let ft = system(&trial);
                if ft.norm() < f.norm() || ft.norm() < 1e-15 {
                    z = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted || f.norm() < 1e-14 || step.norm() * scale < 1e-14 {
                break;
            }
        }
        if f.norm() > 1e-10 || !z.iter().all(|v| v.is_finite()) {
            return None;
        }
        x = Vector4::new(z[0], z[1], z[2], z[3]);
        let level = z[4].abs();
        let max = signed(&x).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if max - level <= REMEZ_LEVEL_TOL * level.max(1e-300) {
            return Some((x, exchange));
        }
    }
    None
}

/// Tabulate the exact potential over the config window and fit it.
pub fn fit_bic(cfg: &FitConfig) -> Result<(PotentialTable, FitReport)> {
    cfg.validate()?;
    let table = tabulate(
        PotentialKind::ExactBic,
        cfg.rho_min,
        cfg.rho_max,
        cfg.n_samples,
        None,
    )?;
    let report = fit(&table, cfg)?;
    Ok((table, report))
}

/// Max and RMS of `W_s − W` for given parameters on a table.
pub fn residuals_on(table: &PotentialTable, p: &MorseParams) -> (f64, f64) {
    let qb = quarter_beta_quarter();
    let (rms, max) = residual_stats(p, &table.rho_grid, &table.values, qb);
    (max, rms)
}
