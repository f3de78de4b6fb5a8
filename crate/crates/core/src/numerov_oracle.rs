//! Numerov shooting for the s-wave radial problem
//!
//! `−½u″ + αβ·W(ρ)·u = λu`, `u(0) = 0`, `u(ρ_max) = 0`, with `λ = (ε/α²)(αβ)²`.
//!
//! This path never touches Whittaker functions, so it serves as an
//! independent check on the analytic quantization.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bic_potential::bic_spline;
use crate::error::{Error, Result};
use crate::morse_fit::{morse_w, MorseParams};
use crate::roots::brent;
use crate::spline::CubicSpline;

pub const DEFAULT_RHO_MAX: f64 = 40.0;
pub const DEFAULT_STEP: f64 = 1e-3;
const RENORM_THRESHOLD: f64 = 1e100;
const LAMBDA_TOL: f64 = 1e-10;

pub struct RadialProblem<P> {
    pub potential: P,
    pub alpha_beta: f64,
    pub rho_max: f64,
    pub h: f64,
}

impl<P: Fn(f64) -> f64> RadialProblem<P> {
    pub fn new(potential: P, alpha_beta: f64) -> Result<Self> {
        Self::with_grid(potential, alpha_beta, DEFAULT_RHO_MAX, DEFAULT_STEP)
    }

    pub fn with_grid(potential: P, alpha_beta: f64, rho_max: f64, h: f64) -> Result<Self> {
        if !(alpha_beta > 0.0) || !alpha_beta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "alpha*beta = {alpha_beta} must be positive"
            )));
        }
        if !(rho_max >= 20.0) || !rho_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "rho_max = {rho_max} must be >= 20"
            )));
        }
        if !(h > 0.0 && h <= 1e-2) {
            return Err(Error::InvalidInput(format!(
                "step h = {h} must lie in (0, 1e-2]"
            )));
        }
        Ok(Self {
            potential,
            alpha_beta,
            rho_max,
            h,
        })
    }

    fn steps(&self) -> usize {
        (self.rho_max / self.h).round() as usize
    }

    /// αβ·W on the grid ρ_i = i·h, i = 0..=N.
    fn scaled_potential(&self) -> Result<Vec<f64>> {
        let n = self.steps();
        let mut v = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let rho = i as f64 * self.h;
            let w = (self.potential)(rho);
            // The value at the origin multiplies u(0) = 0 and may be singular.
            if i > 0 && !w.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "potential is not finite at rho = {rho}"
                )));
            }
            v.push(self.alpha_beta * w);
        }
        Ok(v)
    }
}

pub type PotentialFn = fn(f64) -> f64;

pub fn coulomb(alpha_beta: f64) -> Result<RadialProblem<PotentialFn>> {
    fn w(rho: f64) -> f64 {
        -1.0 / rho
    }
    RadialProblem::new(w as PotentialFn, alpha_beta)
}

pub fn morse(params: MorseParams, alpha_beta: f64) -> Result<RadialProblem<impl Fn(f64) -> f64>> {
    params.validate()?;
    RadialProblem::new(move |rho| morse_w(&params, rho), alpha_beta)
}

/// Exact BIC potential through the shared cubic spline of W on [0, 40].
pub fn exact_bic(alpha_beta: f64) -> Result<RadialProblem<impl Fn(f64) -> f64>> {
    let spline: Arc<CubicSpline> = bic_spline()?;
    RadialProblem::new(move |rho| spline.eval(rho), alpha_beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    pub endpoint_value: f64,
    pub node_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub lambda: f64,
    pub eps_over_alpha2: f64,
    pub node_count: usize,
    pub iterations: usize,
    pub grid_points: usize,
}

fn propagate(v: &[f64], h: f64, lambda: f64) -> Shot {
    let c = h * h / 12.0;
    let g = |i: usize| 2.0 * (v[i] - lambda);
    let n = v.len() - 1;
    let (mut u_prev, mut u) = (0.0_f64, h);
    let mut g_prev = 0.0; // unused while u_prev == 0
    let mut g_cur = g(1);
    let mut nodes = 0;
    for i in 1..n {
        let g_next = g(i + 1);
        let back = if u_prev == 0.0 {
            0.0
        } else {
            (1.0 - c * g_prev) * u_prev
        };
        let u_next = (2.0 * (1.0 + 5.0 * c * g_cur) * u - back) / (1.0 - c * g_next);
        if u_next.signum() != u.signum() && u_next != 0.0 {
            nodes += 1;
        }
        u_prev = u;
        u = u_next;
        if u.abs() > RENORM_THRESHOLD {
            let s = u.abs();
            u /= s;
            u_prev /= s;
        }
        g_prev = g_cur;
        g_cur = g_next;
    }
    Shot {
        endpoint_value: u,
        node_count: nodes,
    }
}

/// Propagate from u(0) = 0, u(h) = h out to ρ_max for a trial λ < 0.
pub fn shoot<P: Fn(f64) -> f64>(p: &RadialProblem<P>, lambda: f64) -> Result<Shot> {
    if !(lambda < 0.0) {
        return Err(Error::domain(
            "shoot",
            format!("lambda = {lambda} must be negative"),
        ));
    }
    let v = p.scaled_potential()?;
    Ok(propagate(&v, p.h, lambda))
}

/// Bound state with exactly `nodes` interior nodes.
pub fn bound_state<P: Fn(f64) -> f64>(p: &RadialProblem<P>, nodes: usize) -> Result<OracleResult> {
    let v = p.scaled_potential()?;
    let v_min = v[1..].iter().cloned().fold(f64::INFINITY, f64::min);
    let no_state = || Error::NoBoundState {
        nodes,
        lambda_min: v_min,
    };
    let crossings = |lambda: f64| propagate(&v, p.h, lambda).node_count;

    let mut lo = v_min;
    let mut hi = 0.0;
    if crossings(lo) > nodes || crossings(hi) <= nodes {
        return Err(no_state());
    }
    let mut iterations = 0;
    while hi - lo > 1e-6 * lo.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        if crossings(mid) > nodes {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Within the final bracket the endpoint value changes sign exactly once.
    let end = |lambda: f64| {
        iterations += 1;
        propagate(&v, p.h, lambda).endpoint_value
    };
    let lambda = match brent(end, lo, hi, LAMBDA_TOL * 1e-3, 200) {
        Ok(l) => l,
        Err(Error::NotBracketed { .. }) => {
            // Node appeared strictly inside the grid; keep bisecting on counts.
            while hi - lo > LAMBDA_TOL {
                let mid = 0.5 * (lo + hi);
                iterations += 1;
                if crossings(mid) > nodes {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        }
        Err(e) => return Err(e),
    };
    let node_count = crossings(lo);
    let ab2 = p.alpha_beta * p.alpha_beta;
    Ok(OracleResult {
        lambda,
        eps_over_alpha2: lambda / ab2,
        node_count,
        iterations,
        grid_points: v.len(),
    })
}

/// Nodeless ground state.
pub fn ground_state<P: Fn(f64) -> f64>(p: &RadialProblem<P>) -> Result<OracleResult> {
    bound_state(p, 0)
}
