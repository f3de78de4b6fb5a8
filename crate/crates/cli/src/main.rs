//! `bihydro`: tables, fits, quantized solutions and cross-checks for the
//! Born-Infeld hydrogen ground state.

mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use bi_hydrogen::analytic_solver::{calibrate_nu, solve};
use bi_hydrogen::bic_potential::{tabulate, PotentialKind};
use bi_hydrogen::morse_fit::{fit_bic, morse_w, FitConfig, FitObjective, MorseParams};
use bi_hydrogen::numerov_oracle::{
    self, ground_state, RadialProblem, DEFAULT_RHO_MAX, DEFAULT_STEP,
};
use bi_hydrogen::{ModelConstants, OracleResult};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use format::{csv_document, emit, json_document, Cell};

/// Reference values for the comparison table.
const REF_NU: f64 = 2.89873;
const REF_ALPHA_BETA: f64 = 1.823_373_498;
const REF_EPS: f64 = -0.499_733_119_5;
const REF_BIC_ALPHA_BETA: f64 = 1.83297;
const REF_BIC_EPS: f64 = -0.50000;
const EMPIRICAL_EPS: f64 = -0.49973;
const TOL_EPS: f64 = 1e-4;
const TOL_ALPHA_BETA: f64 = 1e-3;
const TOL_BIC_EPS: f64 = 5e-4;
const TOL_NU: f64 = 1e-3;

#[derive(Parser)]
#[command(
    name = "bihydro",
    version,
    about = "Born-Infeld hydrogen ground-state toolkit"
)]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the screening function Z and potential W = -Z/rho.
    Potential(GridArgs),
    /// Fit the Morse surrogate to the exact potential.
    Fit(FitArgs),
    /// Quantize the surrogate at a given nu.
    Solve(SolveArgs),
    /// Find nu reproducing a target eps/alpha^2.
    Calibrate(CalibrateArgs),
    /// Numerov ground state for a chosen potential.
    Oracle(OracleArgs),
    /// Three-row comparison against reference values with pass flags.
    Table1,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rho_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    rho_max: f64,
    #[arg(long, default_value_t = 1001)]
    points: usize,
}

#[derive(Args)]
struct MorseArgs {
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    v0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
}

impl MorseArgs {
    fn over(&self, base: MorseParams) -> bi_hydrogen::Result<MorseParams> {
        MorseParams::new(
            self.g.unwrap_or(base.g),
            self.v0.unwrap_or(base.v0),
            self.kappa.unwrap_or(base.kappa),
            self.b.unwrap_or(base.b),
        )
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Minimax,
    LeastSquares,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rho_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    rho_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Minimax)]
    objective: ObjectiveArg,
    /// Start from the published parameters instead of the generic guess.
    #[arg(long)]
    init_from_paper: bool,
    /// Overrides for individual starting values.
    #[command(flatten)]
    init: MorseArgs,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value_t = REF_NU)]
    nu: f64,
    #[command(flatten)]
    morse: MorseArgs,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = EMPIRICAL_EPS, allow_negative_numbers = true)]
    target: f64,
    #[command(flatten)]
    morse: MorseArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PotentialArg {
    Bic,
    Morse,
    Coulomb,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum, default_value_t = PotentialArg::Bic)]
    potential: PotentialArg,
    #[arg(long, default_value_t = REF_BIC_ALPHA_BETA, allow_negative_numbers = true)]
    alpha_beta: f64,
    /// Outer radius of the shooting grid.
    #[arg(long, default_value_t = DEFAULT_RHO_MAX)]
    radius: f64,
    /// Numerov step.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
    #[command(flatten)]
    morse: MorseArgs,
}

#[derive(Debug)]
enum Failure {
    Lib(bi_hydrogen::Error),
    Io(String),
    Format(String),
    NotConverged(String),
    TableFailed(usize),
}

impl Failure {
    fn code(&self) -> &'static str {
        match self {
            Failure::Lib(e) => e.code(),
            Failure::Io(_) => "IO",
            Failure::Format(_) => "FORMAT",
            Failure::NotConverged(_) => "NON_CONVERGENCE",
            Failure::TableFailed(_) => "TABLE1_FAILED",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Io(m) | Failure::Format(m) | Failure::NotConverged(m) => m.clone(),
            Failure::TableFailed(n) => format!("{n} table row(s) outside tolerance"),
        }
    }
}

impl From<bi_hydrogen::Error> for Failure {
    fn from(e: bi_hydrogen::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Format(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Format(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Prints a one-line JSON error on stderr.
fn report(code: &str, message: &str) {
    let line = serde_json::json!({ "error": { "code": code, "message": message } });
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            report("USAGE", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(f.code(), &f.message());
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Potential(a) => run_potential(a, cli.format.unwrap_or(Format::Csv), out),
        Command::Fit(a) => run_fit(a, cli.format.unwrap_or(Format::Json), out),
        Command::Solve(a) => {
            let c = ModelConstants::new(a.morse.over(MorseParams::REFERENCE)?);
            let s = solve(a.nu, &c)?;
            write_solution("solve", &s, cli.format.unwrap_or(Format::Json), out)
        }
        Command::Calibrate(a) => {
            let c = ModelConstants::new(a.morse.over(MorseParams::REFERENCE)?);
            let s = calibrate_nu(a.target, &c)?;
            write_solution("calibrate", &s, cli.format.unwrap_or(Format::Json), out)
        }
        Command::Oracle(a) => run_oracle(a, cli.format.unwrap_or(Format::Json), out),
        Command::Table1 => run_table1(cli.format.unwrap_or(Format::Csv), out),
    }
}

#[derive(Serialize)]
struct PotentialRow {
    rho: f64,
    #[serde(rename = "Z")]
    z: f64,
    #[serde(rename = "W")]
    w: f64,
}

fn run_potential(a: &GridArgs, fmt: Format, out: Option<&std::path::Path>) -> Outcome {
    let table = tabulate(
        PotentialKind::ExactBic,
        a.rho_min,
        a.rho_max,
        a.points,
        None,
    )?;
    let rows: Vec<PotentialRow> = table
        .rows()
        .map(|(rho, w)| PotentialRow {
            rho,
            z: -rho * w,
            w,
        })
        .collect();
    let text = match fmt {
        Format::Json => json_document("potential", &rows)?,
        Format::Csv => csv_document(
            &["rho", "Z", "W"],
            &rows
                .iter()
                .map(|r| vec![Cell::Num(r.rho), Cell::Num(r.z), Cell::Num(r.w)])
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(emit(&text, out)?)
}

fn run_fit(a: &FitArgs, fmt: Format, out: Option<&std::path::Path>) -> Outcome {
    let base = if a.init_from_paper {
        MorseParams::REFERENCE
    } else {
        MorseParams::DEFAULT_INIT
    };
    let cfg = FitConfig {
        rho_min: a.rho_min,
        rho_max: a.rho_max,
        n_samples: a.points,
        max_iters: a.max_iters,
        init: a.init.over(base)?,
        objective: match a.objective {
            ObjectiveArg::Minimax => FitObjective::Minimax,
            ObjectiveArg::LeastSquares => FitObjective::LeastSquares,
        },
        ..FitConfig::default()
    };
    let (table, report) = fit_bic(&cfg)?;
    if !report.converged {
        return Err(Failure::NotConverged(format!(
            "fit stopped after {} iterations without meeting the step tolerance",
            report.iterations
        )));
    }
    let text = match fmt {
        Format::Json => json_document("fit", &report)?,
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = table
                .rows()
                .map(|(rho, w)| {
                    let ws = morse_w(&report.params, rho);
                    vec![
                        Cell::Num(rho),
                        Cell::Num(w),
                        Cell::Num(ws),
                        Cell::Num(ws - w),
                    ]
                })
                .collect();
            csv_document(&["rho", "W_exact", "W_morse", "residual"], &rows)?
        }
    };
    Ok(emit(&text, out)?)
}

fn write_solution(
    command: &str,
    s: &bi_hydrogen::AnalyticSolution,
    fmt: Format,
    out: Option<&std::path::Path>,
) -> Outcome {
    let text = match fmt {
        Format::Json => json_document(command, s)?,
        Format::Csv => csv_document(
            &[
                "nu",
                "a",
                "x",
                "a_abs",
                "e",
                "alpha_beta",
                "eps_over_alpha2",
            ],
            &[vec![
                Cell::Num(s.nu),
                Cell::Num(s.a),
                Cell::Num(s.x),
                Cell::Num(s.a_abs),
                Cell::Num(s.e),
                Cell::Num(s.alpha_beta),
                Cell::Num(s.eps_over_alpha2),
            ]],
        )?,
    };
    Ok(emit(&text, out)?)
}

fn oracle_result(a: &OracleArgs) -> bi_hydrogen::Result<OracleResult> {
    match a.potential {
        PotentialArg::Coulomb => {
            let p = RadialProblem::with_grid(|r: f64| -1.0 / r, a.alpha_beta, a.radius, a.step)?;
            ground_state(&p)
        }
        PotentialArg::Morse => {
            let m = a.morse.over(MorseParams::REFERENCE)?;
            let p =
                RadialProblem::with_grid(move |r| morse_w(&m, r), a.alpha_beta, a.radius, a.step)?;
            ground_state(&p)
        }
        PotentialArg::Bic => {
            let spline = bi_hydrogen::bic_potential::bic_spline()?;
            let (_, r_max) = spline.domain();
            if a.radius > r_max {
                return Err(bi_hydrogen::Error::InvalidInput(format!(
                    "radius {} exceeds the tabulated range {r_max}",
                    a.radius
                )));
            }
            let p =
                RadialProblem::with_grid(move |r| spline.eval(r), a.alpha_beta, a.radius, a.step)?;
            ground_state(&p)
        }
    }
}

fn run_oracle(a: &OracleArgs, fmt: Format, out: Option<&std::path::Path>) -> Outcome {
    let r = oracle_result(a)?;
    let text = match fmt {
        Format::Json => json_document("oracle", &r)?,
        Format::Csv => csv_document(
            &[
                "lambda",
                "eps_over_alpha2",
                "node_count",
                "iterations",
                "grid_points",
            ],
            &[vec![
                Cell::Num(r.lambda),
                Cell::Num(r.eps_over_alpha2),
                Cell::Int(r.node_count),
                Cell::Int(r.iterations),
                Cell::Int(r.grid_points),
            ]],
        )?,
    };
    Ok(emit(&text, out)?)
}

#[derive(Serialize)]
struct TableRow {
    row: &'static str,
    nu: Option<f64>,
    alpha_beta: f64,
    eps_over_alpha2: f64,
    ref_nu: Option<f64>,
    ref_alpha_beta: Option<f64>,
    ref_eps_over_alpha2: f64,
    pass: bool,
}

fn within(x: f64, reference: f64, tol: f64) -> bool {
    (x - reference).abs() <= tol
}

fn table1_rows() -> bi_hydrogen::Result<Vec<TableRow>> {
    let c = ModelConstants::default();

    let analytic = solve(REF_NU, &c)?;
    let row1 = TableRow {
        row: "morse_analytic",
        nu: Some(analytic.nu),
        alpha_beta: analytic.alpha_beta,
        eps_over_alpha2: analytic.eps_over_alpha2,
        ref_nu: None,
        ref_alpha_beta: Some(REF_ALPHA_BETA),
        ref_eps_over_alpha2: REF_EPS,
        pass: within(analytic.alpha_beta, REF_ALPHA_BETA, TOL_ALPHA_BETA)
            && within(analytic.eps_over_alpha2, REF_EPS, TOL_EPS),
    };

    let bic = ground_state(&numerov_oracle::exact_bic(REF_BIC_ALPHA_BETA)?)?;
    let row2 = TableRow {
        row: "numerov_exact_bic",
        nu: None,
        alpha_beta: REF_BIC_ALPHA_BETA,
        eps_over_alpha2: bic.eps_over_alpha2,
        ref_nu: None,
        ref_alpha_beta: Some(REF_BIC_ALPHA_BETA),
        ref_eps_over_alpha2: REF_BIC_EPS,
        pass: bic.node_count == 0 && within(bic.eps_over_alpha2, REF_BIC_EPS, TOL_BIC_EPS),
    };

    let calibrated = calibrate_nu(EMPIRICAL_EPS, &c)?;
    let row3 = TableRow {
        row: "empirical",
        nu: Some(calibrated.nu),
        alpha_beta: calibrated.alpha_beta,
        eps_over_alpha2: calibrated.eps_over_alpha2,
        ref_nu: Some(REF_NU),
        ref_alpha_beta: None,
        ref_eps_over_alpha2: EMPIRICAL_EPS,
        pass: within(calibrated.nu, REF_NU, TOL_NU)
            && within(calibrated.eps_over_alpha2, EMPIRICAL_EPS, TOL_EPS),
    };
    Ok(vec![row1, row2, row3])
}

fn run_table1(fmt: Format, out: Option<&std::path::Path>) -> Outcome {
    let rows = table1_rows()?;
    let text = match fmt {
        Format::Json => json_document("table1", &rows)?,
        Format::Csv => {
            let opt = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Num);
            let body: Vec<Vec<Cell>> = rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Text(r.row.to_string()),
                        opt(r.nu),
                        Cell::Num(r.alpha_beta),
                        Cell::Num(r.eps_over_alpha2),
                        opt(r.ref_nu),
                        opt(r.ref_alpha_beta),
                        Cell::Num(r.ref_eps_over_alpha2),
                        Cell::Bool(r.pass),
                    ]
                })
                .collect();
            csv_document(
                &[
                    "row",
                    "nu",
                    "alpha_beta",
                    "eps_over_alpha2",
                    "ref_nu",
                    "ref_alpha_beta",
                    "ref_eps_over_alpha2",
                    "pass",
                ],
                &body,
            )?
        }
    };
    emit(&text, out)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(Failure::TableFailed(failed));
    }
    Ok(())
}
