//! Command-line harness behind the `tddirk` binary.
//!
//! Subcommands: `list`, `verify`, `derive`, `stability`, `phase`,
//! `converge`, `bench`, `make-reference`. Run `tddirk help` for the flag
//! reference. Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 runtime error (nonconvergence, missing reference, I/O).
//!
//! All file outputs are written atomically (temp file + rename) and all data
//! columns are deterministic; wall-time columns are the only exception.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::{
    estimate_phase_expansion, phase_targets, stability_region, StabilityWindow, DEFAULT_WINDOW,
};
use crate::error::{Error, Result};
use crate::families;
use crate::plot::{
    log_log_chart_svg, stability_contour_svg, stability_grid_csv, stability_grid_ppm,
    write_atomic, Series,
};
use crate::problems::{
    advection_source, adr2d, compute_reference, harmonic_oscillator, read_reference,
    reference_file_name, write_reference, BenchmarkProblem, Grid1D, Grid2D,
};
use crate::stepper::{integrate, integrate_observed, IntegrationConfig};
use crate::tableau::{
    classify_order, order_condition_residuals, row_assumption_residuals, tableau_to_json,
    ButcherTableau, SchemeRegistry,
};

/// One benchmark measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scheme: String,
    pub problem: String,
    pub h: f64,
    /// Max-norm global error at the final time; NaN when the stage
    /// iteration did not converge.
    pub error: f64,
    pub wall_time: f64,
    pub total_fp_iterations: u64,
}

/// Errors of one scheme across a ladder of step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scheme: String,
    /// `(h, error)` sorted by decreasing `h`.
    pub pairs: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` vs `log h`; `None` with fewer
    /// than two usable points.
    pub fitted_slope: Option<f64>,
}

const USAGE: &str = "\
tddirk - two-derivative DIRK integrators with optimized phase errors

USAGE: tddirk <COMMAND> [ARGS] [FLAGS]

COMMANDS:
  list                         registered schemes with order and phase data
  verify <SCHEME>              order-condition residual report
  derive [NAME]                run the scheme derivations, print tableau JSON
                               (NAME: otddirk4s2a|otddirk4s2b|tddirk5s2|otddirk5s3|all)
  stability <SCHEME>           rasterize |R(z)|; needs --csv/--ppm/--svg
  phase <SCHEME>               fit dispersion/dissipation orders and constants
  converge <SCHEME> <PROBLEM>  error vs step size study with fitted slope
  bench <PROBLEM>              accuracy/efficiency records for several schemes
  make-reference <PROBLEM>     compute and cache a PDE reference solution
  help                         this text

PROBLEMS: harmonic | advection | adr

GLOBAL FLAGS:
  --tableau FILE       load an extra scheme from tableau JSON (repeatable)
  --tol X              residual tolerance for verify (default 1e-12)
  --seed N             accepted for reproducibility bookkeeping; all data
                       output is deterministic regardless
  --csv PATH           write machine-readable output
  --svg PATH           write an SVG plot

SELECTED COMMAND FLAGS:
  verify:    --claimed-order N (override the scheme's claimed order)
  stability: --window RE_MIN,RE_MAX,IM_MIN,IM_MAX (default -6,0.3,-6,6)
             --nx N --ny N (default 600x1200)  --ppm PATH
  converge:  --h-list H1,H2,...   (fractions like 1/4 accepted)
             --t-end X  --ref-dir DIR  --n N (advection grid)  --points P (adr grid)
             --amplitude A  --eps X --alpha X --gamma X
  bench:     --schemes A,B,...  (default: the four built-ins)
             --h H | --h-list ...  --n-list 50,100,200 (advection)
             --repeats K (timing repeats, default 3)  --error-over-trajectory
  make-reference: --h-ref X  --t-end X  --ref-dir DIR  + problem flags
";

/// Entry point used by the binary; returns the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    match run_inner(args) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `tddirk help` for usage");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            3
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownScheme { .. }
            | Error::InvalidConfig(_)
            | Error::ParameterDomain(_)
            | Error::OrderOutOfRange(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Minimal flag parser: `--name value` pairs (value flags listed in
/// `VALUE_FLAGS`), bare `--name` booleans, everything else positional.
struct Args {
    positionals: Vec<String>,
    values: BTreeMap<String, Vec<String>>,
    switches: Vec<String>,
}

const VALUE_FLAGS: [&str; 22] = [
    "--csv",
    "--svg",
    "--ppm",
    "--tol",
    "--seed",
    "--tableau",
    "--claimed-order",
    "--window",
    "--nx",
    "--ny",
    "--h",
    "--h-list",
    "--n",
    "--n-list",
    "--t-end",
    "--h-ref",
    "--ref-dir",
    "--amplitude",
    "--points",
    "--eps",
    "--alpha",
    "--gamma",
];
const EXTRA_VALUE_FLAGS: [&str; 2] = ["--schemes", "--repeats"];
const SWITCH_FLAGS: [&str; 1] = ["--error-over-trajectory"];

impl Args {
    fn parse(raw: &[String]) -> CliResult<Args> {
        let mut positionals = Vec::new();
        let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut switches = Vec::new();
        let mut it = raw.iter();
        while let Some(arg) = it.next() {
            if let Some(name) = arg.strip_prefix("--").map(|_| arg.as_str()) {
                if VALUE_FLAGS.contains(&name) || EXTRA_VALUE_FLAGS.contains(&name) {
                    let value = it
                        .next()
                        .ok_or_else(|| usage(format!("flag {name} needs a value")))?;
                    values.entry(name.to_string()).or_default().push(value.clone());
                } else if SWITCH_FLAGS.contains(&name) {
                    switches.push(name.to_string());
                } else {
                    return Err(usage(format!("unknown flag {name}")));
                }
            } else {
                positionals.push(arg.clone());
            }
        }
        Ok(Args {
            positionals,
            values,
            switches,
        })
    }

    fn value(&self, name: &str) -> Option<&str> {
        self.values.get(name).and_then(|v| v.last()).map(|s| s.as_str())
    }

    fn all(&self, name: &str) -> Vec<&str> {
        self.values
            .get(name)
            .map(|v| v.iter().map(|s| s.as_str()).collect())
            .unwrap_or_default()
    }

    fn switch(&self, name: &str) -> bool {
        self.switches.iter().any(|s| s == name)
    }

    fn number(&self, name: &str) -> CliResult<Option<f64>> {
        match self.value(name) {
            None => Ok(None),
            Some(text) => parse_number(text)
                .map(Some)
                .map_err(|e| usage(format!("{name}: {e}"))),
        }
    }

    fn integer(&self, name: &str) -> CliResult<Option<u32>> {
        match self.value(name) {
            None => Ok(None),
            Some(text) => text
                .parse::<u32>()
                .map(Some)
                .map_err(|_| usage(format!("{name}: expected an integer, got `{text}`"))),
        }
    }
}

/// Parses a decimal number or a fraction like `1/32`.
fn parse_number(text: &str) -> std::result::Result<f64, String> {
    if let Some((num, den)) = text.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in `{text}`"))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in `{text}`"))?;
        if d == 0.0 {
            return Err(format!("zero denominator in `{text}`"));
        }
        Ok(n / d)
    } else {
        text.trim()
            .parse()
            .map_err(|_| format!("expected a number, got `{text}`"))
    }
}

fn parse_number_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|p| parse_number(p.trim())).collect()
}

fn run_inner(raw: Vec<String>) -> CliResult<i32> {
    if raw.is_empty() {
        println!("{USAGE}");
        return Ok(2);
    }
    let command = raw[0].clone();
    let args = Args::parse(&raw[1..])?;

    let mut registry = SchemeRegistry::with_builtins();
    for file in args.all("--tableau") {
        registry
            .load_json_file(Path::new(file))
            .map_err(CliError::Runtime)?;
    }
    // --seed is accepted for interface stability; every data column the CLI
    // emits is already deterministic.
    let _ = args.integer("--seed")?;

    match command.as_str() {
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(0)
        }
        "list" => cmd_list(&registry),
        "verify" => cmd_verify(&registry, &args),
        "derive" => cmd_derive(&args),
        "stability" => cmd_stability(&registry, &args),
        "phase" => cmd_phase(&registry, &args),
        "converge" => cmd_converge(&registry, &args),
        "bench" => cmd_bench(&registry, &args),
        "make-reference" => cmd_make_reference(&args),
        other => Err(usage(format!("unknown command `{other}`"))),
    }
}

fn scheme_arg<'r>(registry: &'r SchemeRegistry, args: &Args) -> CliResult<&'r ButcherTableau> {
    let name = args
        .positionals
        .first()
        .ok_or_else(|| usage("missing scheme name"))?;
    Ok(registry.get(name)?)
}

fn cmd_list(registry: &SchemeRegistry) -> CliResult<i32> {
    println!(
        "{:<14} {:>6} {:>5}  {:>22}  {:>22}",
        "NAME", "STAGES", "ORDER", "DISPERSION", "DISSIPATION"
    );
    for t in registry.iter() {
        let phase = phase_targets(t.name());
        let (disp, diss) = match phase {
            Some(p) => (
                format!("{} ({:.6e})", p.dispersion_order, p.dispersion_constant),
                format!("{} ({:.6e})", p.dissipation_order, p.dissipation_constant),
            ),
            None => ("-".to_string(), "-".to_string()),
        };
        println!(
            "{:<14} {:>6} {:>5}  {:>22}  {:>22}",
            t.name(),
            t.stages(),
            t.claimed_order(),
            disp,
            diss
        );
    }
    Ok(0)
}

fn cmd_verify(registry: &SchemeRegistry, args: &Args) -> CliResult<i32> {
    let base = scheme_arg(registry, args)?;
    let tol = args.number("--tol")?.unwrap_or(1e-12);
    if !(tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    let scheme = match args.integer("--claimed-order")? {
        Some(order) if order >= 1 => base.with_claimed_order(order),
        Some(_) => return Err(usage("--claimed-order must be at least 1")),
        None => base.clone(),
    };

    let rows = row_assumption_residuals(&scheme);
    let conditions = order_condition_residuals(&scheme, 6)?;
    let order = classify_order(&scheme, tol);

    let mut csv = String::from("condition,residual\n");
    println!(
        "{} (claimed order {}, tol {tol:e})",
        scheme.name(),
        scheme.claimed_order()
    );
    let mut max_residual: f64 = 0.0;
    for r in rows.iter().chain(conditions.iter()) {
        println!("  {:<8} {:+.3e}", r.condition_id.to_string(), r.value);
        let _ = writeln!(csv, "{},{:e}", r.condition_id, r.value);
        max_residual = max_residual.max(r.value.abs());
    }
    println!("  classified order: {order}");
    println!("  max |residual|:   {max_residual:.3e}");

    if let Some(path) = args.value("--csv") {
        write_atomic(Path::new(path), csv.as_bytes()).map_err(CliError::Runtime)?;
    }
    if order >= scheme.claimed_order() {
        println!("  VERIFY PASS");
        Ok(0)
    } else {
        println!(
            "  VERIFY FAIL: classified order {order} < claimed {}",
            scheme.claimed_order()
        );
        Ok(1)
    }
}

fn cmd_derive(args: &Args) -> CliResult<i32> {
    let which = args
        .positionals
        .first()
        .map(|s| s.to_ascii_lowercase())
        .unwrap_or_else(|| "all".to_string());

    let mut derived: Vec<ButcherTableau> = Vec::new();
    let add_4s2a = |out: &mut Vec<ButcherTableau>| -> Result<()> {
        let [p, _] = families::solve_property_i();
        let t = families::tddirk4s2(&p)?;
        out.push(rename(t, "OTDDIRK4s2a"));
        Ok(())
    };
    let add_4s2b = |out: &mut Vec<ButcherTableau>| -> Result<()> {
        let t = families::tddirk4s2(&families::solve_property_ii())?;
        out.push(rename(t, "OTDDIRK4s2b"));
        Ok(())
    };
    let add_5s2 = |out: &mut Vec<ButcherTableau>| -> Result<()> {
        out.push(families::tddirk5s2());
        Ok(())
    };
    let add_5s3 = |out: &mut Vec<ButcherTableau>| -> Result<()> {
        let [c2, _] = families::solve_optimal_c2();
        let t = families::tddirk5s3_family(&families::FamilyParams3s5::new(c2)?)?;
        out.push(rename(t, "OTDDIRK5s3"));
        Ok(())
    };

    let result = match which.as_str() {
        "otddirk4s2a" => add_4s2a(&mut derived),
        "otddirk4s2b" => add_4s2b(&mut derived),
        "tddirk5s2" => add_5s2(&mut derived),
        "otddirk5s3" => add_5s3(&mut derived),
        "all" => add_4s2a(&mut derived)
            .and_then(|_| add_4s2b(&mut derived))
            .and_then(|_| add_5s2(&mut derived))
            .and_then(|_| add_5s3(&mut derived)),
        other => return Err(usage(format!("unknown derivation `{other}`"))),
    };
    result.map_err(CliError::Runtime)?;

    if derived.len() == 1 {
        println!("{}", tableau_to_json(&derived[0]));
    } else {
        let docs: Vec<String> = derived.iter().map(tableau_to_json).collect();
        println!("[\n{}\n]", docs.join(",\n"));
    }
    Ok(0)
}

fn rename(t: ButcherTableau, name: &str) -> ButcherTableau {
    ButcherTableau::new(
        name,
        (0..t.stages())
            .map(|i| (0..t.stages()).map(|j| t.a(i, j)).collect())
            .collect(),
        t.b().to_vec(),
        t.c().to_vec(),
        t.claimed_order(),
    )
    .expect("renaming preserves validity")
}

fn cmd_stability(registry: &SchemeRegistry, args: &Args) -> CliResult<i32> {
    let scheme = scheme_arg(registry, args)?;
    let window = match args.value("--window") {
        None => DEFAULT_WINDOW,
        Some(text) => {
            let parts = parse_number_list(text).map_err(|e| usage(format!("--window: {e}")))?;
            if parts.len() != 4 {
                return Err(usage("--window needs RE_MIN,RE_MAX,IM_MIN,IM_MAX"));
            }
            StabilityWindow {
                re_min: parts[0],
                re_max: parts[1],
                im_min: parts[2],
                im_max: parts[3],
            }
        }
    };
    let nx = args.integer("--nx")?.unwrap_or(600) as usize;
    let ny = args.integer("--ny")?.unwrap_or(1200) as usize;
    let csv = args.value("--csv");
    let ppm = args.value("--ppm");
    let svg = args.value("--svg");
    if csv.is_none() && ppm.is_none() && svg.is_none() {
        return Err(usage("stability needs at least one of --csv, --ppm, --svg"));
    }

    let grid = stability_region(scheme, window, nx, ny).map_err(CliError::Runtime)?;
    if let Some(path) = csv {
        write_atomic(Path::new(path), stability_grid_csv(&grid).as_bytes())
            .map_err(CliError::Runtime)?;
        println!("wrote {path}");
    }
    if let Some(path) = ppm {
        write_atomic(Path::new(path), &stability_grid_ppm(&grid)).map_err(CliError::Runtime)?;
        println!("wrote {path}");
    }
    if let Some(path) = svg {
        let doc = stability_contour_svg(&grid, scheme.name());
        write_atomic(Path::new(path), doc.as_bytes()).map_err(CliError::Runtime)?;
        println!("wrote {path}");
    }
    Ok(0)
}

fn cmd_phase(registry: &SchemeRegistry, args: &Args) -> CliResult<i32> {
    let scheme = scheme_arg(registry, args)?;
    let est = estimate_phase_expansion(scheme).map_err(CliError::Runtime)?;
    let target = phase_targets(scheme.name());

    println!("{}", scheme.name());
    println!(
        "  dispersion: order {:<2} constant {:+.6e}",
        est.dispersion_order, est.dispersion_constant
    );
    println!(
        "  dissipation: order {:<2} constant {:+.6e}",
        est.dissipation_order, est.dissipation_constant
    );
    println!("  fit residual: {:.3e}", est.fit_residual);

    let mut pass = true;
    if let Some(t) = target {
        let rel_d =
            (est.dispersion_constant.abs() - t.dispersion_constant).abs() / t.dispersion_constant;
        let rel_a = (est.dissipation_constant.abs() - t.dissipation_constant).abs()
            / t.dissipation_constant;
        let ok_d = est.dispersion_order == t.dispersion_order && rel_d <= 0.01;
        let ok_a = est.dissipation_order == t.dissipation_order && rel_a <= 0.01;
        pass = ok_d && ok_a;
        println!(
            "  target dispersion: order {} constant {:.6e}  [{}]",
            t.dispersion_order,
            t.dispersion_constant,
            if ok_d { "PASS" } else { "FAIL" }
        );
        println!(
            "  target dissipation: order {} constant {:.6e}  [{}]",
            t.dissipation_order,
            t.dissipation_constant,
            if ok_a { "PASS" } else { "FAIL" }
        );
    }

    if let Some(path) = args.value("--csv") {
        let mut csv = String::from(
            "scheme,dispersion_order,dispersion_constant,dissipation_order,\
             dissipation_constant,fit_residual,pass\n",
        );
        let _ = writeln!(
            csv,
            "{},{},{:e},{},{:e},{:e},{}",
            scheme.name(),
            est.dispersion_order,
            est.dispersion_constant,
            est.dissipation_order,
            est.dissipation_constant,
            est.fit_residual,
            if target.is_some() {
                pass.to_string()
            } else {
                "n/a".to_string()
            }
        );
        write_atomic(Path::new(path), csv.as_bytes()).map_err(CliError::Runtime)?;
    }
    Ok(if pass { 0 } else { 1 })
}

/// Problem selection shared by `converge`, `bench` and `make-reference`.
struct ProblemSetup {
    problem: BenchmarkProblem,
    grid_tag: String,
    default_t_end: f64,
    default_h: Vec<f64>,
    /// `h_ref` used when none is given: finest default study step / 100.
    default_h_ref: f64,
}

fn build_problem(name: &str, args: &Args) -> CliResult<ProblemSetup> {
    match name {
        "harmonic" => Ok(ProblemSetup {
            problem: harmonic_oscillator(),
            grid_tag: "none".to_string(),
            default_t_end: 100.0,
            default_h: vec![0.25, 0.125, 0.0625, 0.03125],
            default_h_ref: 0.03125 / 100.0,
        }),
        "advection" => {
            let n = args.integer("--n")?.unwrap_or(100);
            let amplitude = args.number("--amplitude")?.unwrap_or(0.5);
            let grid = Grid1D::advection_benchmark(n)?;
            Ok(ProblemSetup {
                problem: advection_source(grid, amplitude)?,
                grid_tag: format!("N{n}"),
                default_t_end: 1.4,
                // The headline study uses the single step h = 0.02.
                default_h: vec![0.02],
                default_h_ref: 0.02 / 100.0,
            })
        }
        "adr" => {
            let points = args.integer("--points")?.unwrap_or(101) as usize;
            let eps = args.number("--eps")?.unwrap_or(0.01);
            let alpha = args.number("--alpha")?.unwrap_or(-10.0);
            let gamma = args.number("--gamma")?.unwrap_or(100.0);
            let grid = Grid2D::unit_square(points)?;
            Ok(ProblemSetup {
                problem: adr2d(grid, eps, alpha, gamma)?,
                grid_tag: format!("p{points}"),
                default_t_end: 0.08,
                default_h: vec![0.002, 0.001, 0.0005, 0.00025],
                default_h_ref: 0.00025 / 100.0,
            })
        }
        other => Err(usage(format!(
            "unknown problem `{other}` (expected harmonic | advection | adr)"
        ))),
    }
}

fn reference_path(ref_dir: &str, setup: &ProblemSetup, t_end: f64, h_ref: f64) -> PathBuf {
    Path::new(ref_dir).join(reference_file_name(
        &setup.problem.name,
        &setup.grid_tag,
        t_end,
        h_ref,
    ))
}

/// Loads the cached reference state for a PDE problem or errors with the
/// exact `make-reference` invocation that would create it.
fn load_reference(
    args: &Args,
    setup: &ProblemSetup,
    problem_name: &str,
    t_end: f64,
    h_ref: f64,
) -> CliResult<Vec<f64>> {
    let ref_dir = args.value("--ref-dir").unwrap_or("references");
    let path = reference_path(ref_dir, setup, t_end, h_ref);
    if !path.exists() {
        let mut hint = format!(
            "tddirk make-reference {problem_name} --t-end {t_end} --h-ref {h_ref:e} --ref-dir {ref_dir}"
        );
        if problem_name == "advection" {
            let _ = write!(hint, " --n {}", setup.grid_tag.trim_start_matches('N'));
        }
        if problem_name == "adr" {
            let _ = write!(hint, " --points {}", setup.grid_tag.trim_start_matches('p'));
        }
        return Err(CliError::Runtime(Error::MissingReference {
            path: path.display().to_string(),
            hint,
        }));
    }
    let reference = read_reference(&path).map_err(CliError::Runtime)?;
    if (reference.t_end - t_end).abs() > 1e-12 {
        return Err(CliError::Runtime(Error::Malformed {
            path: path.display().to_string(),
            reason: format!(
                "reference was computed for t_end = {}, requested {t_end}",
                reference.t_end
            ),
        }));
    }
    Ok(reference.y)
}

/// How the global error of a run is measured.
enum ErrorBaseline<'a> {
    /// Against the exact solution at the final time.
    Exact,
    /// Against a cached reference state at the final time.
    FinalState(&'a [f64]),
    /// Against the exact solution at every step (max over the trajectory).
    ExactTrajectory,
    /// Against reference states recorded at every coarse step time.
    Trajectory(&'a [Vec<f64>]),
}

fn max_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Shared error measurement used by `converge` and `bench`, so both report
/// bit-identical errors for identical inputs.
fn measure_error(
    scheme: &ButcherTableau,
    setup: &ProblemSetup,
    h: f64,
    t_end: f64,
    baseline: &ErrorBaseline,
) -> Result<(f64, u64)> {
    let cfg = IntegrationConfig::new(h, 0.0, t_end);
    let sys = &setup.problem.system;
    match baseline {
        ErrorBaseline::Exact => {
            let run = integrate(scheme, sys, &setup.problem.y0, &cfg)?;
            let mut exact = vec![0.0; sys.dim()];
            if !sys.eval_exact(t_end, &mut exact) {
                return Err(Error::InvalidConfig(
                    "problem has no exact solution attached".to_string(),
                ));
            }
            Ok((max_norm_diff(&run.y_final, &exact), run.total_fp_iterations))
        }
        ErrorBaseline::FinalState(reference) => {
            let run = integrate(scheme, sys, &setup.problem.y0, &cfg)?;
            Ok((max_norm_diff(&run.y_final, reference), run.total_fp_iterations))
        }
        ErrorBaseline::ExactTrajectory => {
            let mut exact = vec![0.0; sys.dim()];
            let mut worst: f64 = 0.0;
            let run = integrate_observed(scheme, sys, &setup.problem.y0, &cfg, |t, y| {
                sys.eval_exact(t, &mut exact);
                worst = worst.max(max_norm_diff(y, &exact));
            })?;
            Ok((worst, run.total_fp_iterations))
        }
        ErrorBaseline::Trajectory(states) => {
            let mut worst: f64 = 0.0;
            let mut index = 0usize;
            let run = integrate_observed(scheme, sys, &setup.problem.y0, &cfg, |_, y| {
                if index < states.len() {
                    worst = worst.max(max_norm_diff(y, &states[index]));
                }
                index += 1;
            })?;
            Ok((worst, run.total_fp_iterations))
        }
    }
}

/// Reference trajectory at the coarse step times `k h`, computed on the fly
/// (the file cache stores final states only).
fn reference_trajectory(
    setup: &ProblemSetup,
    h: f64,
    t_end: f64,
    h_ref: f64,
) -> Result<Vec<Vec<f64>>> {
    let scheme = crate::tableau::get_scheme("OTDDIRK5s3").expect("built-in");
    let ratio = h / h_ref;
    let stride = ratio.round() as usize;
    if stride == 0 || (ratio - stride as f64).abs() > 1e-9 * ratio {
        return Err(Error::InvalidConfig(format!(
            "h_ref must divide h evenly for trajectory comparisons (h/h_ref = {ratio})"
        )));
    }
    let cfg = IntegrationConfig::new(h_ref, 0.0, t_end);
    let mut states = Vec::new();
    let mut counter = 0usize;
    integrate_observed(&scheme, &setup.problem.system, &setup.problem.y0, &cfg, |_, y| {
        counter += 1;
        if counter.is_multiple_of(stride) {
            states.push(y.to_vec());
        }
    })?;
    Ok(states)
}

fn fit_slope(pairs: &[(f64, f64)]) -> Option<f64> {
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|&&(h, e)| h > 0.0 && e > 0.0 && e.is_finite())
        .map(|&(h, e)| (h.ln(), e.ln()))
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|p| p.0).sum();
    let sy: f64 = usable.iter().map(|p| p.1).sum();
    let sxx: f64 = usable.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = usable.iter().map(|p| p.0 * p.1).sum();
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

fn cmd_converge(registry: &SchemeRegistry, args: &Args) -> CliResult<i32> {
    let scheme = scheme_arg(registry, args)?.clone();
    let problem_name = args
        .positionals
        .get(1)
        .ok_or_else(|| usage("converge needs <SCHEME> <PROBLEM>"))?
        .clone();
    let setup = build_problem(&problem_name, args)?;
    let t_end = args.number("--t-end")?.unwrap_or(setup.default_t_end);
    let mut h_list = match args.value("--h-list") {
        Some(text) => parse_number_list(text).map_err(|e| usage(format!("--h-list: {e}")))?,
        None => setup.default_h.clone(),
    };
    h_list.sort_by(|a, b| b.partial_cmp(a).expect("finite steps"));
    if h_list.is_empty() {
        return Err(usage("--h-list must contain at least one step size"));
    }

    let has_exact = setup.problem.system.has_exact();
    let reference_state;
    let baseline = if has_exact {
        ErrorBaseline::Exact
    } else {
        let h_ref = args
            .number("--h-ref")?
            .unwrap_or(h_list.last().copied().expect("nonempty") / 100.0);
        reference_state = load_reference(args, &setup, &problem_name, t_end, h_ref)?;
        ErrorBaseline::FinalState(&reference_state)
    };

    let mut pairs = Vec::new();
    for &h in &h_list {
        let (error, _) =
            measure_error(&scheme, &setup, h, t_end, &baseline).map_err(CliError::Runtime)?;
        pairs.push((h, error));
    }
    // Points at the round-off floor are excluded from the slope fit.
    let above_floor: Vec<(f64, f64)> = pairs.iter().filter(|&&(_, e)| e > 1e-12).copied().collect();
    let report = ConvergenceReport {
        scheme: scheme.name().to_string(),
        pairs,
        fitted_slope: fit_slope(&above_floor),
    };

    println!("{} on {} up to t = {t_end}", report.scheme, problem_name);
    println!("{:>12} {:>14}", "h", "max error");
    for &(h, e) in &report.pairs {
        println!("{h:>12.6} {e:>14.6e}");
    }
    match report.fitted_slope {
        Some(s) => println!("fitted slope: {s:.3}"),
        None => println!("fitted slope: n/a"),
    }

    if let Some(path) = args.value("--csv") {
        let mut csv = String::from("scheme,problem,h,error\n");
        for &(h, e) in &report.pairs {
            let _ = writeln!(csv, "{},{},{:e},{:e}", report.scheme, problem_name, h, e);
        }
        match report.fitted_slope {
            Some(s) => {
                let _ = writeln!(csv, "# fitted_slope,{s:e}");
            }
            None => {
                let _ = writeln!(csv, "# fitted_slope,n/a");
            }
        }
        write_atomic(Path::new(path), csv.as_bytes()).map_err(CliError::Runtime)?;
    }
    if let Some(path) = args.value("--svg") {
        let svg = log_log_chart_svg(
            &format!("{} on {}", report.scheme, problem_name),
            "h",
            "max error",
            &[Series {
                label: report.scheme.clone(),
                points: report.pairs.clone(),
            }],
        );
        write_atomic(Path::new(path), svg.as_bytes()).map_err(CliError::Runtime)?;
    }
    Ok(0)
}

fn cmd_bench(registry: &SchemeRegistry, args: &Args) -> CliResult<i32> {
    let problem_name = args
        .positionals
        .first()
        .ok_or_else(|| usage("bench needs <PROBLEM>"))?
        .clone();
    let scheme_names: Vec<String> = match args.value("--schemes") {
        None => crate::tableau::BUILTIN_SCHEMES
            .iter()
            .map(|s| s.to_string())
            .collect(),
        Some(text) if text.trim().is_empty() => Vec::new(),
        Some(text) => text.split(',').map(|s| s.trim().to_string()).collect(),
    };
    let mut schemes = Vec::new();
    for name in &scheme_names {
        schemes.push(registry.get(name)?.clone());
    }
    let repeats = args.integer("--repeats")?.unwrap_or(3).max(1) as usize;
    let over_trajectory = args.switch("--error-over-trajectory");

    let mut records: Vec<RunRecord> = Vec::new();
    if problem_name == "advection" {
        // Fixed step, sweep of grid resolutions.
        let h = args.number("--h")?.unwrap_or(0.02);
        let n_list: Vec<u32> = match args.value("--n-list") {
            None => vec![50, 100, 200],
            Some(text) => parse_number_list(text)
                .map_err(|e| usage(format!("--n-list: {e}")))?
                .into_iter()
                .map(|v| v as u32)
                .collect(),
        };
        for &n in &n_list {
            let per_n = args_with_n(args, n);
            let setup = build_problem("advection", &per_n)?;
            let t_end = args.number("--t-end")?.unwrap_or(setup.default_t_end);
            let h_ref = args.number("--h-ref")?.unwrap_or(h / 100.0);
            run_bench_rows(
                args,
                &mut records,
                &schemes,
                &setup,
                &problem_name,
                &[h],
                t_end,
                h_ref,
                repeats,
                over_trajectory,
                &format!("advection-N{n}"),
            )?;
        }
    } else {
        let setup = build_problem(&problem_name, args)?;
        let t_end = args.number("--t-end")?.unwrap_or(setup.default_t_end);
        let h_list = match args.value("--h-list") {
            Some(text) => parse_number_list(text).map_err(|e| usage(format!("--h-list: {e}")))?,
            None => match args.number("--h")? {
                Some(h) => vec![h],
                None => setup.default_h.clone(),
            },
        };
        let h_ref = args
            .number("--h-ref")?
            .unwrap_or(h_list.iter().cloned().fold(f64::INFINITY, f64::min) / 100.0);
        run_bench_rows(
            args,
            &mut records,
            &schemes,
            &setup,
            &problem_name,
            &h_list,
            t_end,
            h_ref,
            repeats,
            over_trajectory,
            &problem_name.clone(),
        )?;
    }

    println!(
        "{:<14} {:<16} {:>10} {:>14} {:>10} {:>8}",
        "SCHEME", "PROBLEM", "h", "max error", "time [s]", "fp iters"
    );
    for r in &records {
        println!(
            "{:<14} {:<16} {:>10.6} {:>14.6e} {:>10.4} {:>8}",
            r.scheme, r.problem, r.h, r.error, r.wall_time, r.total_fp_iterations
        );
    }

    if let Some(path) = args.value("--csv") {
        let mut csv =
            String::from("scheme,problem,h,error,wall_time_s,total_fp_iterations\n");
        for r in &records {
            let _ = writeln!(
                csv,
                "{},{},{:e},{:e},{:e},{}",
                r.scheme, r.problem, r.h, r.error, r.wall_time, r.total_fp_iterations
            );
        }
        write_atomic(Path::new(path), csv.as_bytes()).map_err(CliError::Runtime)?;
    }
    Ok(0)
}

/// Clone of the parsed args with `--n` overridden; used to rebuild the
/// advection problem per grid resolution.
fn args_with_n(args: &Args, n: u32) -> Args {
    let mut values = args.values.clone();
    values.insert("--n".to_string(), vec![n.to_string()]);
    Args {
        positionals: args.positionals.clone(),
        values,
        switches: args.switches.clone(),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_bench_rows(
    args: &Args,
    records: &mut Vec<RunRecord>,
    schemes: &[ButcherTableau],
    setup: &ProblemSetup,
    problem_name: &str,
    h_list: &[f64],
    t_end: f64,
    h_ref: f64,
    repeats: usize,
    over_trajectory: bool,
    label: &str,
) -> CliResult<()> {
    let has_exact = setup.problem.system.has_exact();
    let mut cached_final: Option<Vec<f64>> = None;
    if !has_exact && !over_trajectory && !schemes.is_empty() {
        cached_final = Some(load_reference(args, setup, problem_name, t_end, h_ref)?);
    }

    for &h in h_list {
        let trajectory: Option<Vec<Vec<f64>>> = if over_trajectory && !has_exact {
            Some(reference_trajectory(setup, h, t_end, h_ref).map_err(CliError::Runtime)?)
        } else {
            None
        };
        let baseline = if has_exact {
            if over_trajectory {
                ErrorBaseline::ExactTrajectory
            } else {
                ErrorBaseline::Exact
            }
        } else if let Some(states) = &trajectory {
            ErrorBaseline::Trajectory(states)
        } else {
            ErrorBaseline::FinalState(cached_final.as_ref().expect("loaded above"))
        };

        for scheme in schemes {
            // Nonconvergence is an expected outcome at aggressive steps;
            // record NaN instead of aborting the table.
            let mut timings = Vec::with_capacity(repeats);
            let mut measured: Option<(f64, u64)> = None;
            let mut failed = false;
            for _ in 0..repeats {
                let start = Instant::now();
                match measure_error(scheme, setup, h, t_end, &baseline) {
                    Ok(res) => {
                        timings.push(start.elapsed().as_secs_f64());
                        measured.get_or_insert(res);
                    }
                    Err(Error::StepFailed { .. }) | Err(Error::NonConvergence { .. }) => {
                        failed = true;
                        break;
                    }
                    Err(e) => return Err(CliError::Runtime(e)),
                }
            }
            let record = if failed {
                RunRecord {
                    scheme: scheme.name().to_string(),
                    problem: label.to_string(),
                    h,
                    error: f64::NAN,
                    wall_time: f64::NAN,
                    total_fp_iterations: 0,
                }
            } else {
                timings.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
                let (error, iters) = measured.expect("at least one repeat succeeded");
                RunRecord {
                    scheme: scheme.name().to_string(),
                    problem: label.to_string(),
                    h,
                    error,
                    wall_time: timings[timings.len() / 2],
                    total_fp_iterations: iters,
                }
            };
            records.push(record);
        }
    }
    Ok(())
}

fn cmd_make_reference(args: &Args) -> CliResult<i32> {
    let problem_name = args
        .positionals
        .first()
        .ok_or_else(|| usage("make-reference needs <PROBLEM>"))?
        .clone();
    if problem_name == "harmonic" {
        return Err(usage(
            "harmonic has an exact solution; no reference file is needed",
        ));
    }
    let setup = build_problem(&problem_name, args)?;
    let t_end = args.number("--t-end")?.unwrap_or(setup.default_t_end);
    let h_ref = args.number("--h-ref")?.unwrap_or(setup.default_h_ref);
    let ref_dir = args.value("--ref-dir").unwrap_or("references");
    let path = reference_path(ref_dir, &setup, t_end, h_ref);

    println!(
        "computing reference: {} ({}) to t = {t_end} at h_ref = {h_ref:e}",
        setup.problem.name, setup.grid_tag
    );
    let reference = compute_reference(&setup.problem, &setup.grid_tag, t_end, h_ref)
        .map_err(CliError::Runtime)?;
    write_reference(&path, &reference).map_err(CliError::Runtime)?;
    println!("wrote {}", path.display());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_parsing_accepts_fractions() {
        assert_eq!(parse_number("1/4").unwrap(), 0.25);
        assert_eq!(parse_number("0.02").unwrap(), 0.02);
        assert_eq!(parse_number("2e-4").unwrap(), 2e-4);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("abc").is_err());
        assert_eq!(
            parse_number_list("1/4, 1/8,0.0625").unwrap(),
            vec![0.25, 0.125, 0.0625]
        );
        assert_eq!(parse_number_list("").unwrap(), Vec::<f64>::new());
    }

    #[test]
    fn slope_fit_ignores_degenerate_input() {
        assert_eq!(fit_slope(&[(0.25, 1e-3)]), None);
        let slope = fit_slope(&[(0.25, 1e-3), (0.125, 1e-3 / 16.0)]).unwrap();
        assert!((slope - 4.0).abs() < 1e-12);
        assert_eq!(fit_slope(&[(0.25, f64::NAN), (0.125, 1e-4)]), None);
    }

    #[test]
    fn args_parser_distinguishes_flags_and_positionals() {
        let raw: Vec<String> = ["verifyX", "--tol", "1e-10", "pos2", "--error-over-trajectory"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let args = Args::parse(&raw).unwrap();
        assert_eq!(args.positionals, vec!["verifyX", "pos2"]);
        assert_eq!(args.value("--tol"), Some("1e-10"));
        assert!(args.switch("--error-over-trajectory"));
        let bad: Vec<String> = vec!["--nope".to_string()];
        assert!(Args::parse(&bad).is_err());
    }

    #[test]
    fn run_reports_usage_errors_with_exit_two() {
        assert_eq!(run(vec!["frobnicate".to_string()]), 2);
        assert_eq!(
            run(vec!["verify".to_string(), "NoSuchScheme".to_string()]),
            2
        );
    }
}
