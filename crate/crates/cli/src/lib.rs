//! Command implementations behind the `aj` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use aj_core::annihilator::{self, all_operators, calibrate_qstar, interior_samples};
use aj_core::diagram::{parse_gauss, parse_pd, Diagram};
use aj_core::gluing::{identity_report, CornerTable, GluingSystem, Prime};
use aj_core::recursion::{
    aj_check, control_polynomial, guess_escalating, jones_values, specialize_q1, Bounds, QPoly,
};
use aj_core::solver::{sample_curve, unit_circle_grid, SolveOptions, Solver};
use aj_core::{library, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "aj", version, about = "Colored Jones state sums, gluing equations and AJ checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// PD code, inline or as a file path.
    #[arg(long)]
    pub pd: Option<String>,
    /// Gauss code, inline or as a file path.
    #[arg(long)]
    pub gauss: Option<String>,
    /// Built-in diagram (unknot, 3_1, 4_1, 5_2, 6_1, 6_2, 7_4, 8_19, 8_20).
    #[arg(long)]
    pub knot: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Table of J(n) for n = 0..=N.
    Jones {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Gluing equations and identity checks.
    Gluing {
        #[command(flatten)]
        input: Input,
        /// Flip one corner factor (to exercise failure paths).
        #[arg(long, hide = true)]
        corrupt_corner: bool,
    },
    /// Compare the q = 1 shift ratios with the gluing equations.
    Match {
        #[command(flatten)]
        input: Input,
        /// Skip the symbolic comparison and q* calibration.
        #[arg(long)]
        numeric_only: bool,
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        corrupt_corner: bool,
    },
    /// Guess a recursion, specialize at q = 1 and test it on gluing solutions.
    Aj {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Maximal order in E.
        #[arg(long, default_value_t = 4)]
        de: usize,
        /// Maximal degree in Q = q^n.
        #[arg(long, default_value_t = 8)]
        dq: usize,
        /// Maximal q-degree parameter (q-exponents 0..=2*dqq).
        #[arg(long, default_value_t = 10)]
        dqq: usize,
        /// Number of meridian values on the unit circle.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        jobs: Option<usize>,
        /// Minimum number of gluing solutions to test.
        #[arg(long, default_value_t = 20)]
        min_solutions: usize,
    },
    /// Solve the loop equations over a grid of meridians on the unit circle.
    Solve {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 40)]
        grid: usize,
        #[arg(long, default_value_t = 40)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

/// Outcome of a command: exit status and the rendered report.
pub struct Outcome {
    pub code: i32,
    pub output: String,
    /// The output is an error report (goes to stderr).
    pub error: bool,
}

pub const AJ_TOL: f64 = 1e-6;
pub const CONTROL_MIN: f64 = 1e-2;

fn read_arg(s: &str) -> Result<String, Error> {
    let p = Path::new(s);
    if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| Error::BadInput(format!("{}: {}", s, e)))
    } else {
        Ok(s.to_string())
    }
}

pub fn load_diagram(input: &Input) -> Result<(String, Diagram), Error> {
    if let Some(k) = &input.knot {
        return Ok((k.clone(), library::diagram(k)?));
    }
    if let Some(p) = &input.pd {
        return Ok(("pd".into(), parse_pd(&read_arg(p)?)?));
    }
    if let Some(g) = &input.gauss {
        return Ok(("gauss".into(), parse_gauss(&read_arg(g)?)?));
    }
    Err(Error::BadInput("no diagram given".into()))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MalformedCode(_)
        | Error::NotAKnot { .. }
        | Error::NonPlanar { .. }
        | Error::NoBasePoint
        | Error::BadInput(_)
        | Error::InsufficientData { .. } => 2,
        _ => 1,
    }
}

fn jobs_or_default(j: Option<usize>) -> usize {
    j.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn corrupted_table() -> CornerTable {
    let mut t = CornerTable::standard();
    let r = &mut t.rules[0][1];
    r.w = if r.w == Prime::One { Prime::Two } else { Prime::One };
    t
}

struct Report {
    pass: bool,
    json: Value,
    text: String,
}

pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Jones { input, n, jobs } => cmd_jones(input, *n, jobs_or_default(*jobs)),
        Command::Gluing { input, corrupt_corner } => cmd_gluing(input, *corrupt_corner),
        Command::Match {
            input,
            numeric_only,
            points,
            seed,
            corrupt_corner,
        } => cmd_match(input, *numeric_only, *points, *seed, *corrupt_corner),
        Command::Aj {
            input,
            n,
            de,
            dq,
            dqq,
            grid,
            seed,
            tol,
            jobs,
            min_solutions,
        } => cmd_aj(
            input,
            *n,
            Bounds { de: *de, d_big_q: *dq, dq: *dqq },
            *grid,
            SolveOptions { tol: *tol, seed: *seed, ..Default::default() },
            jobs_or_default(*jobs),
            *min_solutions,
        ),
        Command::Solve {
            input,
            grid,
            starts,
            seed,
            tol,
        } => cmd_solve(input, *grid, SolveOptions { n_starts: *starts, tol: *tol, seed: *seed, ..Default::default() }),
    };
    match result {
        Ok(r) => Outcome {
            code: if r.pass { 0 } else { 1 },
            error: false,
            output: match cli.format {
                Format::Json => serde_json::to_string_pretty(&r.json).unwrap() + "\n",
                Format::Text => r.text,
            },
        },
        Err(e) => {
            let mut extra = json!({});
            let mut msg = format!("error: {}\n", e);
            if let Error::InsufficientData { need, .. } = &e {
                extra = json!({ "suggested_minimum": need });
                let _ = writeln!(msg, "suggested minimum: {}", need);
            }
            Outcome {
                code: exit_code(&e),
                error: true,
                output: match cli.format {
                    Format::Json => serde_json::to_string_pretty(&json!({ "error": e.to_string(), "detail": extra })).unwrap() + "\n",
                    Format::Text => msg,
                },
            }
        }
    }
}

fn cmd_jones(input: &Input, n: usize, jobs: usize) -> Result<Report, Error> {
    let (name, d) = load_diagram(input)?;
    let vals = jones_values(&d, n, jobs)?;
    let mut text = String::new();
    let mut rows = vec![];
    for (i, v) in vals.iter().enumerate() {
        let lp = aj_core::recursion::from_qpoly(v);
        let _ = writeln!(text, "{}\t{}", i, lp.to_q_string());
        rows.push(json!({ "n": i, "J": lp.to_q_string(), "terms": lp.to_triples() }));
    }
    Ok(Report {
        pass: true,
        json: json!({ "diagram": name, "crossings": d.num_crossings(), "values": rows }),
        text,
    })
}

fn cmd_gluing(input: &Input, corrupt: bool) -> Result<Report, Error> {
    let (name, d) = load_diagram(input)?;
    let sys = GluingSystem::build(&d)?;
    let table = if corrupt { corrupted_table() } else { CornerTable::standard() };
    let checks = identity_report(&d, &table);
    let pass = checks.iter().all(|c| c.pass);
    let mut text = String::new();
    let _ = writeln!(text, "L0 = {}", sys.loop_zero);
    for (c, l) in sys.loops.iter().enumerate() {
        let _ = writeln!(text, "L[{}] = {}", c, l);
    }
    let _ = writeln!(text, "w_lambda = {}", sys.w_lambda);
    let _ = writeln!(text, "s = {}", sys.sqrt_s);
    for c in &checks {
        let _ = writeln!(text, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(Report {
        pass,
        json: json!({
            "diagram": name,
            "equations": sys.to_json(),
            "checks": checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
            "pass": pass,
        }),
        text,
    })
}

fn cmd_match(input: &Input, numeric_only: bool, points: usize, seed: u64, corrupt: bool) -> Result<Report, Error> {
    let (name, d) = load_diagram(input)?;
    let table = if corrupt { corrupted_table() } else { CornerTable::standard() };
    let rep = annihilator::verify_match_with(&d, &table, points, seed)?;
    let mut text = String::new();
    let mut calib = vec![];
    let mut calib_ok = true;
    if !numeric_only {
        for mut op in all_operators(&d) {
            let samples = interior_samples(&d, op.kind, 6, 3);
            match calibrate_qstar(&d, &mut op, &samples) {
                Ok(c) => {
                    let _ = writeln!(text, "q* {}: v^{} ({} samples)", c.kind, c.v_exponent, c.samples);
                    calib.push(json!(c));
                }
                Err(e) => {
                    calib_ok = false;
                    let _ = writeln!(text, "q* {}: {}", op.kind, e);
                    calib.push(json!({ "kind": op.kind.to_string(), "error": e.to_string() }));
                }
            }
        }
    }
    let check = rep.check(!numeric_only);
    for g in &rep.generators {
        let _ = writeln!(
            text,
            "{} {}: symbolic {} residual {:.2e}",
            if (numeric_only || g.symbolic) && g.numeric_residual < annihilator::NUMERIC_TOL { "PASS" } else { "FAIL" },
            g.generator,
            g.symbolic,
            g.numeric_residual
        );
    }
    if let Err(e) = &check {
        let _ = writeln!(text, "{}", e);
    }
    let pass = check.is_ok() && calib_ok;
    let _ = writeln!(text, "{}", if pass { "PASS" } else { "FAIL" });
    Ok(Report {
        pass,
        json: json!({
            "diagram": name,
            "mode": if numeric_only { "numeric" } else { "symbolic+numeric" },
            "report": rep,
            "calibration": calib,
            "pass": pass,
        }),
        text,
    })
}

/// Gluing solutions over a unit-circle grid until `min` are collected.
pub fn collect_solutions(d: &Diagram, grid: usize, opts: SolveOptions, min: usize) -> Result<Vec<aj_core::solver::GluingSolution>, Error> {
    let solver = Solver::new(d)?;
    let mut out = vec![];
    let mut size = grid.max(1);
    let mut round = 0u64;
    while out.len() < min && round < 4 {
        for mu in unit_circle_grid(size) {
            let o = SolveOptions { seed: opts.seed.wrapping_add(round), ..opts };
            match solver.solve_at(mu, o) {
                Ok(s) => out.extend(s),
                Err(Error::NoConvergence) => log::warn!("no solution at w_mu = {}", mu),
                Err(e) => return Err(e),
            }
        }
        size *= 2;
        round += 1;
    }
    Ok(out)
}

fn cmd_aj(
    input: &Input,
    n: usize,
    max: Bounds,
    grid: usize,
    opts: SolveOptions,
    jobs: usize,
    min_solutions: usize,
) -> Result<Report, Error> {
    let (name, d) = load_diagram(input)?;
    let need = max.de + 3 + aj_core::recursion::MARGIN;
    if n + 1 < need {
        return Err(Error::InsufficientData { have: n + 1, need });
    }
    let values = jones_values(&d, n, jobs)?;
    aj_pipeline(&name, &d, &values, max, grid, opts, min_solutions)
}

fn aj_pipeline(
    name: &str,
    d: &Diagram,
    values: &[QPoly],
    max: Bounds,
    grid: usize,
    opts: SolveOptions,
    min_solutions: usize,
) -> Result<Report, Error> {
    let Some((op, guess)) = guess_escalating(values, max)? else {
        return Ok(Report {
            pass: false,
            json: json!({ "diagram": name, "operator": null, "pass": false }),
            text: "no annihilating operator within degree bounds\nFAIL\n".into(),
        });
    };
    let poly = specialize_q1(&op)?;
    let sols = collect_solutions(d, grid, opts, min_solutions)?;
    let rep = aj_check(&poly, &sols);
    let control = aj_check(&control_polynomial(&poly, opts.seed), &sols);
    let control_min = control.points.iter().map(|p| p.residual).fold(f64::INFINITY, f64::min);
    let control_max = control.max_residual;
    let pass = sols.len() >= min_solutions && rep.max_residual < AJ_TOL && control_max > CONTROL_MIN;
    let mut text = String::new();
    let _ = writeln!(text, "annihilating operator within degree bounds {:?} (order {})", guess.bounds, op.order());
    let _ = writeln!(text, "operator: {}", op);
    let _ = writeln!(text, "q = 1: {}", poly);
    let _ = writeln!(text, "solutions: {}", sols.len());
    let _ = writeln!(text, "max residual: {:.3e}", rep.max_residual);
    let _ = writeln!(text, "control residual: max {:.3e}, min {:.3e}", control_max, control_min);
    let _ = writeln!(text, "{}", if pass { "PASS" } else { "FAIL" });
    Ok(Report {
        pass,
        json: json!({
            "diagram": name,
            "values": values.len(),
            "guess": guess,
            "operator": op.to_json(),
            "q1": poly.to_json(),
            "solutions": sols.len(),
            "aj": rep,
            "control": { "max_residual": control_max, "min_residual": control_min },
            "pass": pass,
        }),
        text,
    })
}

/// The pipeline on precomputed values (used by tests to avoid recomputing
/// the state sums).
pub fn aj_from_values(name: &str, d: &Diagram, values: &[QPoly], max: Bounds, grid: usize, opts: SolveOptions, min_solutions: usize) -> Result<(bool, Value), Error> {
    aj_pipeline(name, d, values, max, grid, opts, min_solutions).map(|r| (r.pass, r.json))
}

fn cmd_solve(input: &Input, grid: usize, opts: SolveOptions) -> Result<Report, Error> {
    let (name, d) = load_diagram(input)?;
    let g = unit_circle_grid(grid);
    let pts = sample_curve(&d, &g, opts)?;
    let mut text = String::from("w_mu_re,w_mu_im,w_lambda_re,w_lambda_im,residual,branch\n");
    for p in &pts {
        let _ = writeln!(
            text,
            "{:.12},{:.12},{:.12},{:.12},{:.3e},{}",
            p.w_mu.re, p.w_mu.im, p.w_lambda.re, p.w_lambda.im, p.residual, p.branch
        );
    }
    let covered = g
        .iter()
        .filter(|mu| pts.iter().any(|p| (p.w_mu - **mu).norm() < 1e-6))
        .count();
    Ok(Report {
        pass: covered > 0,
        json: json!({
            "diagram": name,
            "grid": g.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
            "covered": covered,
            "points": pts.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        }),
        text,
    })
}
