//! `isoineq`: catalog inspection, constraint sweeps, backwards-heat
//! reconstruction, semigroup checks and the verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or domain
//! error, 3 expected violation (non-elliptic surface), 4 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use isoineq::eds::{
    default_ellipticity_grid, default_heat_method, ellipticity_check, heat_solution_for,
    reconstruct_grid, reconstruction_case, BoundaryData, HeatSolution, DEFAULT_HORIZON,
};
use isoineq::grid::{Axis, Grid2, GridOverride};
use isoineq::io::{
    interpolation_table, monotonicity_table, reconstruction_table, reports_table, sweep_table,
    write_json, Field, Table,
};
use isoineq::semigroup::{
    catalog_function, interpolation_check, monotonicity_check, TestFunction, TEST_FUNCTIONS,
};
use isoineq::suite::{run_suite, SuiteConfig, SEMIGROUP_TIMES};
use isoineq::surface::{
    default_sweep_grid, make_catalog_surface, nsd_grid_sweep, MSurface, CATALOG,
};
use isoineq::verifier::{
    erti_sweep, phi_entropy_bound, verify_arccos, verify_b_theorem_even, verify_beckner,
    verify_beckner_divided, verify_bobkov, verify_houdre_kagan, verify_log_sobolev, verify_master,
    verify_poincare, verify_three_halves, CheckOptions, DiagonalQuadratic, MeasureSpec,
};
use isoineq::{Error, Result};

/// Share of reconstruction nodes allowed to fail before the run counts as
/// a numerical failure.
const NODE_FAILURE_LIMIT: f64 = 1e-3;

#[derive(Parser, Debug)]
#[command(
    name = "isoineq",
    version,
    about = "Maximum-principle surfaces and Gaussian functional inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// List catalog surfaces, boundaries and test functions.
    Catalog,
    /// Sweep the constraint matrix of a surface over a grid.
    CheckMatrix,
    /// Rebuild a surface from its boundary values through the heat equation.
    Reconstruct,
    /// Certify ellipticity of a heat solution on its region.
    Ellipticity,
    /// Check one inequality for one test function.
    Verify,
    /// Check the semigroup interpolation inequality.
    Interpolate,
    /// Trace G(t) along the semigroup.
    Monotonicity,
    /// Run every acceptance check.
    Suite,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
enum Inequality {
    Master,
    PhiEntropy,
    LogSobolev,
    Poincare,
    Bobkov,
    Beckner,
    BecknerDivided,
    ThreeHalves,
    Arccos,
    BTheoremEven,
    HoudreKagan,
    Erti,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
struct RunConfig {
    #[arg(long, global = true)]
    surface: Option<String>,
    #[arg(long, global = true)]
    boundary: Option<String>,
    /// Test function name.
    #[arg(long = "f", global = true)]
    f: Option<String>,
    /// Beckner exponent, or the power-boundary exponent.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Houdré–Kagan depth.
    #[arg(long, global = true, default_value_t = 1)]
    d: usize,
    /// Size m of the condition matrix for `--inequality erti`.
    #[arg(long, global = true, default_value_t = 3)]
    m: usize,
    #[arg(long, global = true, default_value_t = 1)]
    n: usize,
    #[arg(long, global = true, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, global = true, default_value_t = 64)]
    order: usize,
    /// `NXxNY` to change counts, or `x0:x1:nx,y0:y1:ny[:log|interior]`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Horizon in t of the heat solution.
    #[arg(long = "t-max", global = true)]
    t_max: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Print degeneracy residual statistics.
    #[arg(long = "report-residual", global = true)]
    report_residual: bool,
    #[arg(long, global = true, value_enum)]
    inequality: Option<Inequality>,
}

impl RunConfig {
    fn need<'a>(&self, value: &'a Option<String>, flag: &str) -> Result<&'a str> {
        value
            .as_deref()
            .ok_or_else(|| Error::Domain(format!("this command needs --{flag}")))
    }

    fn surface(&self) -> Result<MSurface> {
        make_catalog_surface(self.need(&self.surface, "surface")?, self.p)
    }

    fn test_function(&self) -> Result<TestFunction> {
        catalog_function(self.need(&self.f, "f")?, self.n)
    }

    fn spec(&self) -> Result<MeasureSpec> {
        MeasureSpec::new(self.n, self.sigma)
    }

    fn grid(&self, default: Option<Grid2>) -> Result<Grid2> {
        let over = self.grid.as_deref().map(GridOverride::parse).transpose()?;
        match (over, default) {
            (Some(o), Some(d)) => Ok(o.apply(d)),
            (Some(GridOverride::Explicit(g)), None) => Ok(g),
            (_, None) => Err(Error::Domain(
                "no default grid here, give --grid x0:x1:nx,y0:y1:ny".into(),
            )),
            (None, Some(d)) => Ok(d),
        }
    }

    fn check_options(&self) -> Result<CheckOptions> {
        if self.order == 0 {
            return Err(Error::Domain("--order must be positive".into()));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::Domain("--tol must be nonnegative".into()));
        }
        Ok(CheckOptions {
            order: self.order,
            tol: self.tol,
        })
    }

    fn format(&self) -> Format {
        self.format.unwrap_or_else(|| match &self.out {
            Some(p) if p.extension().is_some_and(|e| e == "csv") => Format::Csv,
            _ => Format::Json,
        })
    }
}

/// Data a command can emit, in either format.
struct Output<'a, T: Serialize> {
    json: &'a T,
    table: Result<Table>,
}

fn emit<T: Serialize>(config: &RunConfig, out: Output<'_, T>) -> Result<()> {
    let format = config.format();
    match (&config.out, config.format) {
        (Some(path), _) => write(path, format, out),
        (None, Some(_)) => {
            match format {
                Format::Json => println!("{}", isoineq::io::to_json(out.json)?),
                Format::Csv => print!("{}", out.table?.to_csv()?),
            }
            Ok(())
        }
        (None, None) => Ok(()),
    }
}

fn write<T: Serialize>(path: &Path, format: Format, out: Output<'_, T>) -> Result<()> {
    match format {
        Format::Json => write_json(path, out.json),
        Format::Csv => out.table?.write_csv(path),
    }
}

fn status(ok: bool) -> u8 {
    if ok {
        0
    } else {
        1
    }
}

fn catalog(config: &RunConfig) -> Result<u8> {
    let mut table = Table::new(["name", "formula", "domain", "inequality", "elliptic"]);
    for e in CATALOG {
        table.push(vec![
            e.name.into(),
            e.formula.into(),
            e.domain.into(),
            e.inequality.into(),
            e.elliptic.into(),
        ])?;
    }
    if config.out.is_none() && config.format.is_none() {
        for e in CATALOG {
            let flag = if e.elliptic { "" } else { "  [non-elliptic]" };
            println!("{:<13} M(x, y) = {}{flag}", e.name, e.formula);
            println!("{:<13} {}; {}", "", e.domain, e.inequality);
        }
        println!();
        println!("boundaries: gross, nash, bobkov, three_halves, arccos, power (--p r)");
        println!("test functions: {}", TEST_FUNCTIONS.join(", "));
    }
    emit(
        config,
        Output {
            json: &CATALOG,
            table: Ok(table),
        },
    )?;
    Ok(0)
}

fn check_matrix(config: &RunConfig) -> Result<u8> {
    let m = config.surface()?;
    let grid = config.grid(Some(default_sweep_grid(&m)))?;
    let r = nsd_grid_sweep(&m, &grid, config.tol)?;
    println!(
        "{}: {} nodes, {} violations, {} skipped",
        r.surface,
        r.rows.len(),
        r.violations.len(),
        r.skipped.len()
    );
    if config.report_residual {
        println!(
            "max relative residual {:e}; residual > {:e} at {:.1}% of y > 0 nodes",
            r.max_relative_residual(),
            config.tol,
            100.0 * r.fraction_positive(config.tol)
        );
    }
    for v in r.violations.iter().take(10) {
        println!(
            "  violation at ({}, {}): eigenvalues {:?}",
            v.x, v.y, v.eigenvalues
        );
    }
    if r.violations.len() > 10 {
        println!("  ... {} more", r.violations.len() - 10);
    }
    for (x, y, why) in r.skipped.iter().take(5) {
        println!("  skipped ({x}, {y}): {why}");
    }
    emit(
        config,
        Output {
            json: &r,
            table: sweep_table(&r),
        },
    )?;
    if !m.is_elliptic() {
        println!("{} is known not to satisfy the constraint", r.surface);
        return Ok(3);
    }
    Ok(status(r.passed()))
}

/// Heat solution, catalog surface to compare against, default grid.
type HeatSetup = (HeatSolution, Option<MSurface>, Option<Grid2>);

fn boundary_heat(config: &RunConfig) -> Result<HeatSetup> {
    let name = config.need(&config.boundary, "boundary")?;
    if name == "power" {
        let boundary = BoundaryData::by_name(name, config.p)?;
        let method = default_heat_method(&boundary);
        let heat = heat_solution_for(&boundary, &method, config.t_max.unwrap_or(DEFAULT_HORIZON))?;
        return Ok((heat, None, None));
    }
    let case = reconstruction_case(name, config.t_max)?;
    Ok((case.heat, case.surface, Some(case.grid)))
}

fn reconstruct(config: &RunConfig) -> Result<u8> {
    let (heat, surface, default) = boundary_heat(config)?;
    let grid = config.grid(default)?;
    let r = reconstruct_grid(&heat, &grid, surface.as_ref())?;
    println!(
        "{}: {} nodes, {} failed, max iterations {}, max deviation {}",
        r.heat,
        r.total(),
        r.failed.len(),
        r.max_iterations(),
        r.max_deviation().map_or("n/a".into(), |d| format!("{d:e}"))
    );
    println!(
        "finite differences: max gradient error {:e}, {} NSD violations, max relative degeneracy {:e}",
        r.max_gradient_error(),
        r.nsd_violations(),
        r.max_relative_degeneracy()
    );
    for f in r.failed.iter().take(5) {
        println!("  failed at ({}, {}): {}", f.x, f.y, f.reason);
    }
    emit(
        config,
        Output {
            json: &r,
            table: reconstruction_table(&r),
        },
    )?;
    if r.failure_fraction() > NODE_FAILURE_LIMIT {
        return Ok(4);
    }
    Ok(status(r.passed()))
}

fn ellipticity(config: &RunConfig) -> Result<u8> {
    let (heat, _, _) = boundary_heat(config)?;
    let grid = config.grid(Some(default_ellipticity_grid(&heat)))?;
    let r = ellipticity_check(&heat, &grid)?;
    println!(
        "{}: {} nodes, min certificate {:e}, max u_t {:e}, max heat residual {:e}",
        heat.name(),
        r.nodes,
        r.min_certificate,
        r.max_ut,
        r.max_pde_residual
    );
    let mut table = Table::new([
        "nodes",
        "min_certificate",
        "max_ut",
        "max_pde_residual",
        "min_det_hessian",
        "max_det_hessian",
        "pass",
    ]);
    table.push(vec![
        r.nodes.into(),
        r.min_certificate.into(),
        r.max_ut.into(),
        r.max_pde_residual.into(),
        r.min_det_hessian.into(),
        r.max_det_hessian.into(),
        r.pass.into(),
    ])?;
    emit(
        config,
        Output {
            json: &r,
            table: Ok(table),
        },
    )?;
    Ok(status(r.pass))
}

fn verify(config: &RunConfig) -> Result<u8> {
    let inequality = match config.inequality {
        Some(i) => i,
        None if config.surface.is_some() => Inequality::Master,
        None => {
            return Err(Error::Domain(
                "verify needs --inequality or --surface".into(),
            ))
        }
    };
    if inequality == Inequality::Erti {
        let b = DiagonalQuadratic::houdre_kagan(config.m);
        let s = erti_sweep(&b, config.m, 1000, config.seed)?;
        println!(
            "condition matrix m = {}, seed {}: {} points, max |form| {:e}, max |scaled form| {:e}, {} with B_mm >= 0",
            s.m, s.seed, s.points, s.max_abs_form, s.max_abs_scaled_form, s.precondition_failures
        );
        let mut table = Table::new([
            "m",
            "seed",
            "points",
            "max_abs_form",
            "max_abs_scaled_form",
            "pass",
        ]);
        table.push(vec![
            s.m.into(),
            Field::Int(s.seed as i64),
            s.points.into(),
            s.max_abs_form.into(),
            s.max_abs_scaled_form.into(),
            s.pass.into(),
        ])?;
        emit(
            config,
            Output {
                json: &s,
                table: Ok(table),
            },
        )?;
        return Ok(status(s.pass));
    }
    let f = config.test_function()?;
    let spec = config.spec()?;
    let opts = config.check_options()?;
    let p = || {
        config
            .p
            .ok_or_else(|| Error::Domain("this inequality needs --p".into()))
    };
    let r = match inequality {
        Inequality::Master => verify_master(&config.surface()?, &f, &spec, &opts),
        Inequality::PhiEntropy => phi_entropy_bound(&config.surface()?, &f, &spec, &opts),
        Inequality::LogSobolev => verify_log_sobolev(&f, &spec, &opts),
        Inequality::Poincare => verify_poincare(&f, &spec, &opts),
        Inequality::Bobkov => verify_bobkov(&f, &spec, &opts),
        Inequality::Beckner => verify_beckner(&f, p()?, &spec, &opts),
        Inequality::BecknerDivided => verify_beckner_divided(&f, p()?, &spec, &opts),
        Inequality::ThreeHalves => verify_three_halves(&f, &spec, &opts),
        Inequality::Arccos => verify_arccos(&f, &spec, &opts),
        Inequality::BTheoremEven => verify_b_theorem_even(&f, &spec, &opts),
        Inequality::HoudreKagan => verify_houdre_kagan(&f, config.d, &spec, &opts),
        Inequality::Erti => unreachable!("handled above"),
    }?;
    println!(
        "{}: lhs {:.17e}, rhs {:.17e}, margin {:e}, order {}: {}",
        r.case,
        r.lhs,
        r.rhs,
        r.margin,
        r.order,
        if r.pass { "pass" } else { "FAIL" }
    );
    for note in &r.notes {
        println!("  {note}");
    }
    let reports = [r];
    emit(
        config,
        Output {
            json: &reports[0],
            table: reports_table(&reports),
        },
    )?;
    Ok(status(reports[0].pass))
}

/// `--grid x0:x1:nx,t0:t1:nt` for the semigroup commands, default
/// `x in [-3, 3]` at the standard times.
fn semigroup_axes(config: &RunConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    match config
        .grid
        .as_deref()
        .map(GridOverride::parse)
        .transpose()?
    {
        Some(GridOverride::Explicit(g)) => Ok((g.x.points(), g.y.points())),
        Some(GridOverride::Counts(nx, _)) => Ok((
            Axis::linear(-3.0, 3.0, nx).points(),
            SEMIGROUP_TIMES.to_vec(),
        )),
        None => Ok((
            Axis::linear(-3.0, 3.0, 13).points(),
            SEMIGROUP_TIMES.to_vec(),
        )),
    }
}

fn interpolate(config: &RunConfig) -> Result<u8> {
    let m = config.surface()?;
    let f = config.test_function()?;
    let (xs, ts) = semigroup_axes(config)?;
    let r = interpolation_check(&m, &f, &ts, &xs, config.check_options()?.order)?;
    println!(
        "{} / {}: {} points, max violation {:e}: {}",
        r.surface,
        r.test_function,
        r.points.len(),
        r.max_violation,
        if r.pass { "pass" } else { "FAIL" }
    );
    emit(
        config,
        Output {
            json: &r,
            table: interpolation_table(&r),
        },
    )?;
    Ok(status(r.pass))
}

fn monotonicity(config: &RunConfig) -> Result<u8> {
    let m = config.surface()?;
    let f = config.test_function()?;
    let (_, ts) = semigroup_axes(config)?;
    let r = monotonicity_check(&m, &f, &ts, config.check_options()?.order)?;
    for p in &r.trace {
        println!("  t = {:<6} G = {:.17e}", p.t, p.g);
    }
    println!(
        "{} / {}: min step {:e}, G(t_max) - M(int f, 0) = {:e}: {}",
        r.surface,
        r.test_function,
        r.min_step,
        r.final_gap,
        if r.pass { "pass" } else { "FAIL" }
    );
    emit(
        config,
        Output {
            json: &r,
            table: monotonicity_table(&r),
        },
    )?;
    Ok(status(r.pass))
}

fn suite(config: &RunConfig) -> Result<u8> {
    let opts = config.check_options()?;
    let report = run_suite(&SuiteConfig {
        order: opts.order,
        tol: opts.tol,
        seed: config.seed,
    })?;
    for c in &report.criteria {
        println!(
            "criterion {}: {} {}",
            c.id,
            if c.pass { "PASS" } else { "FAIL" },
            c.title
        );
        if !c.pass {
            for line in &c.details {
                println!("    {line}");
            }
        }
    }
    let v = &report.verification.summary;
    println!(
        "criteria: {}/{} passed; verification cases: {} total, {} passed, {} failed",
        report.summary.passed, report.summary.total, v.total, v.passed, v.failed
    );
    for e in &report.verification.errors {
        println!("  error in {}: {}", e.case, e.error);
    }
    emit(
        config,
        Output {
            json: &report,
            table: reports_table(&report.verification.reports),
        },
    )?;
    Ok(status(report.passed()))
}

fn run(cli: &Cli) -> Result<u8> {
    let config = &cli.config;
    match cli.command {
        Command::Catalog => catalog(config),
        Command::CheckMatrix => check_matrix(config),
        Command::Reconstruct => reconstruct(config),
        Command::Ellipticity => ellipticity(config),
        Command::Verify => verify(config),
        Command::Interpolate => interpolate(config),
        Command::Monotonicity => monotonicity(config),
        Command::Suite => suite(config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
