//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is printed on every run.

use std::time::Instant;

use bi_hydrogen::analytic_solver::{calibrate_nu, count_sign_changes, solve};
use bi_hydrogen::bic_potential::{born_phi, tabulate, w_of_rho, z_of_rho, PotentialKind};
use bi_hydrogen::morse_fit::{fit, morse_w, residuals_on, FitConfig, MorseParams};
use bi_hydrogen::numerov_oracle::{self, ground_state, RadialProblem};
use bi_hydrogen::quadrature::{integrate, QuadSpec};
use bi_hydrogen::specfun::{kummer_m, quarter_beta_quarter, whittaker_m, SeriesControl};
use bi_hydrogen::ModelConstants;

const NU: f64 = 2.89873;
const A: f64 = 4.414_424;
const X: f64 = 6.756_270_935;
const ALPHA_BETA: f64 = 1.823_373_498;
const EPS: f64 = -0.499_733_119_5;
const EMPIRICAL_EPS: f64 = -0.49973;
const BIC_ALPHA_BETA: f64 = 1.83297;
/// Arbitrary-precision value of ¼B(¼,¼).
const QUARTER_BETA_ORACLE: f64 = 1.854_074_677_301_372;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn near(name: &str, got: f64, want: f64, tol: f64) -> Check {
    let line = format!("{name} = {got:.10} (want {want} +/- {tol:.2e})");
    if (got - want).abs() <= tol {
        Ok(line)
    } else {
        Err(line)
    }
}

fn all(checks: Vec<Check>) -> Check {
    let ok = checks.iter().all(|c| c.is_ok());
    let text = checks
        .into_iter()
        .map(|c| c.unwrap_or_else(|e| format!("!! {e}")))
        .collect::<Vec<_>>()
        .join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn lib<T>(r: bi_hydrogen::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("[{}] {e}", e.code()))
}

/// Golden-section maximum of a unimodal function on [lo, hi].
fn golden_max(
    f: impl Fn(f64) -> Result<f64, String>,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64, String> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while hi - lo > 1e-9 {
        if fc > fd {
            hi = d;
            (d, fd) = (c, fc);
            c = hi - g * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            (c, fc) = (d, fd);
            d = lo + g * (hi - lo);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn criterion_1() -> Check {
    let z = |r: f64| lib(z_of_rho(r));
    // Coarse scan on (0, 10] locates the bracket for the refinement.
    let coarse = (1..=100)
        .map(|k| 0.1 * k as f64)
        .map(|r| Ok((r, z(r)?)))
        .collect::<Result<Vec<_>, String>>()?;
    let (peak, _) =
        coarse.iter().cloned().fold(
            (0.0, f64::MIN),
            |best, p| if p.1 > best.1 { p } else { best },
        );
    let argmax = golden_max(z, peak - 0.1, peak + 0.1)?;
    let z0 = z(0.0)?;
    all(vec![
        near("Z(0.654988)", z(0.654_988)?, 1.0, 1e-3),
        near("argmax Z", argmax, 2.139_634, 1e-3),
        near("Z(1000)", z(1000.0)?, 1.0, 1e-2),
        if z0 == 0.0 {
            Ok("Z(0) = 0 exactly".into())
        } else {
            Err(format!("Z(0) = {z0}"))
        },
    ])
}

fn criterion_2() -> Check {
    let qb = quarter_beta_quarter();
    all(vec![
        near("qB", qb, QUARTER_BETA_ORACLE, 1e-9),
        near("-W(0)", -lib(w_of_rho(0.0))?, qb, 1e-8),
        near("phi(0)", lib(born_phi(0.0))?, qb, 1e-8),
    ])
}

fn criterion_3() -> Check {
    let table = lib(tabulate(PotentialKind::ExactBic, 0.0, 10.0, 200, None))?;
    let (threshold, _) = residuals_on(&table, &MorseParams::REFERENCE);
    let p = MorseParams::REFERENCE;
    // Published values perturbed by 5% to decouple fit quality from the basin.
    let cfg = FitConfig {
        init: MorseParams {
            g: p.g * 1.05,
            v0: p.v0 * 0.95,
            kappa: p.kappa * 1.05,
            b: p.b * 0.95,
        },
        ..FitConfig::default()
    };
    let mut checks = Vec::new();
    for (label, cfg) in [
        ("perturbed init", cfg),
        ("default init", FitConfig::default()),
    ] {
        let r = lib(fit(&table, &cfg))?;
        let f = r.params;
        for (name, got, want) in [
            ("G", f.g, p.g),
            ("V0", f.v0, p.v0),
            ("kappa", f.kappa, p.kappa),
            ("b", f.b, p.b),
        ] {
            checks.push(near(
                &format!("{label} {name}"),
                got,
                want,
                0.05 * want.abs(),
            ));
        }
        let line = format!(
            "{label} max|Ws-W| = {:.6} <= {threshold:.6}",
            r.max_abs_residual
        );
        checks.push(if r.converged && r.max_abs_residual <= threshold {
            Ok(line)
        } else {
            Err(line)
        });
    }
    all(checks)
}

fn criterion_4() -> Check {
    let s = lib(solve(NU, &ModelConstants::default()))?;
    all(vec![
        near("a", s.a, A, 1e-3),
        near("X", s.x, X, 2e-3),
        near("alpha*beta", s.alpha_beta, ALPHA_BETA, 1e-3),
        near("eps/alpha^2", s.eps_over_alpha2, EPS, 1e-4),
    ])
}

fn criterion_5() -> Check {
    let s = lib(calibrate_nu(EMPIRICAL_EPS, &ModelConstants::default()))?;
    near("nu", s.nu, NU, 1e-3)
}

fn criterion_6() -> Check {
    let analytic = lib(solve(NU, &ModelConstants::default()))?;
    let morse = lib(ground_state(&lib(numerov_oracle::morse(
        MorseParams::REFERENCE,
        ALPHA_BETA,
    ))?))?;
    let coulomb = lib(ground_state(&lib(numerov_oracle::coulomb(1.0))?))?;
    let bic = lib(ground_state(&lib(numerov_oracle::exact_bic(
        BIC_ALPHA_BETA,
    ))?))?;
    all(vec![
        near(
            "Numerov Morse - analytic",
            morse.eps_over_alpha2 - analytic.eps_over_alpha2,
            0.0,
            1e-3,
        ),
        near("Numerov Coulomb", coulomb.eps_over_alpha2, -0.5, 1e-5),
        near("Numerov exact BIC", bic.eps_over_alpha2, -0.5, 5e-4),
    ])
}

fn criterion_7() -> Check {
    let ctl = SeriesControl::default();
    let mut checks = Vec::new();

    // a = ν + ½ collapses M to its prefactor.
    let mut worst = 0.0_f64;
    for &(nu, z) in &[(0.3, 0.7), (1.2, 3.5), (2.89873, 6.0), (4.0, 15.0)] {
        let m = lib(whittaker_m(nu + 0.5, nu, z, &ctl))?;
        let closed = (-0.5 * z).exp() * z.powf(nu + 0.5);
        worst = worst.max(((m - closed) / closed).abs());
    }
    checks.push(near("reduction identity rel err", worst, 0.0, 1e-12));

    // ₁F₁(−2; γ; z) = 1 − 2z/γ + z²/(γ(γ+1)).
    let mut worst = 0.0_f64;
    for &(gamma, z) in &[(1.5, 0.4), (3.0, 2.0), (6.8, 7.5), (2.2, 12.0)] {
        let m = lib(kummer_m(-2.0, gamma, z, &ctl))?;
        let poly = 1.0 - 2.0 * z / gamma + z * z / (gamma * (gamma + 1.0));
        worst = worst.max((m - poly).abs() / poly.abs().max(1.0));
    }
    checks.push(near("polynomial identity err", worst, 0.0, 1e-12));

    let q = lib(integrate(
        |x: f64| 1.0 / (1.0 - x).sqrt(),
        &QuadSpec::new(0.0, 1.0).singular_upper(),
    ))?;
    checks.push(near("int (1-x)^-1/2", q.value, 2.0, 1e-10));

    let lam = |h: f64| -> Result<f64, String> {
        let p = lib(RadialProblem::with_grid(
            |r| morse_w(&MorseParams::REFERENCE, r),
            ALPHA_BETA,
            40.0,
            h,
        ))?;
        Ok(lib(ground_state(&p))?.lambda)
    };
    let (l1, l2, l3) = (lam(1e-2)?, lam(5e-3)?, lam(2.5e-3)?);
    let ratio = (l1 - l2) / (l2 - l3);
    let line = format!("Numerov halving ratio = {ratio:.3} in [12, 20]");
    checks.push(if (12.0..=20.0).contains(&ratio) {
        Ok(line)
    } else {
        Err(line)
    });

    let s = lib(solve(NU, &ModelConstants::default()))?;
    let changes = lib(count_sign_changes(s.a, s.nu, s.x, 1000))?;
    let line = format!("sign changes of M on (0, X) over 1000 samples = {changes}");
    checks.push(if changes == 0 { Ok(line) } else { Err(line) });
    all(checks)
}

fn criterion_8() -> Check {
    let c = ModelConstants::default();
    let m = c.morse;
    let ab = m.kappa * m.kappa * A * A / (2.0 * m.g.abs());
    let shift = ab * (m.v0 + c.quarter_beta - m.g.abs());
    // Printed form: the kinetic and potential pieces enter with opposite signs.
    let printed = (0.5 * m.kappa * m.kappa * NU * NU - shift) / (ab * ab);
    let inverted = lib(solve(NU, &c))?.eps_over_alpha2;
    let printed_line = format!("printed form = {printed:.10} differs from {EPS}");
    all(vec![
        if (printed - EPS).abs() > 1e-2 {
            Ok(printed_line)
        } else {
            Err(printed_line)
        },
        near("inversion", inverted, EPS, 1e-4),
    ])
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("Z-function landmarks", criterion_1),
        ("quarter beta constant", criterion_2),
        ("Morse fit", criterion_3),
        ("analytic chain", criterion_4),
        ("calibration", criterion_5),
        ("oracle cross-validation", criterion_6),
        ("property suites", criterion_7),
        ("sign-consistency regression", criterion_8),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {} ({name}, {secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {} ({name}, {secs:.2}s): {detail}", i + 1);
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
