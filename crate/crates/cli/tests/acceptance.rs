//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::io::Write;
use std::time::{Duration, Instant};

use aj_cli::{aj_from_values, run, Cli};
use aj_core::annihilator::{all_operators, calibrate_qstar, interior_samples, verify_match, NUMERIC_TOL};
use aj_core::diagram::{add_kink, Kink};
use aj_core::gluing::*;
use aj_core::qlaurent::{one_minus_q, LaurentPoly, PolyTerm};
use aj_core::recursion::{jones_values, Bounds};
use aj_core::solver::{unit_circle_grid, SolveOptions, Solver};
use aj_core::state_sum::{colored_jones, jones_from_colored, kauffman_jones};
use aj_core::{library, Error};
use clap::Parser;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn report(id: usize, title: &str, budget: Duration, f: impl FnOnce() -> Result<Outcome, Error>) -> bool {
    let t = Instant::now();
    let out = f().unwrap_or_else(|e| ok(false, format!("error: {}", e)));
    let el = t.elapsed();
    let pass = out.pass && el <= budget;
    let line = format!(
        "{} [{:>2}] {} ({:.1}s / {:.0}s) {}\n",
        if pass { "PASS" } else { "FAIL" },
        id,
        title,
        el.as_secs_f64(),
        budget.as_secs_f64(),
        out.detail
    );
    // bypass the test harness capture so the lines always show up
    let _ = std::io::stderr().write_all(line.as_bytes());
    pass
}

fn c1() -> Result<Outcome, Error> {
    let cli = Cli::try_parse_from(["aj", "jones", "--knot", "unknot", "--n", "20", "--format", "json"]).unwrap();
    let out = run(&cli);
    if out.code != 0 {
        return Ok(ok(false, out.output));
    }
    let v: serde_json::Value = serde_json::from_str(&out.output).unwrap();
    let rows = v["values"].as_array().unwrap();
    let mut bad = vec![];
    for n in 0..=20i64 {
        let want = one_minus_q(n + 1).div_exact(&one_minus_q(1)).unwrap();
        let terms: Vec<PolyTerm> = serde_json::from_value(rows[n as usize]["terms"].clone()).unwrap();
        if LaurentPoly::from_triples(&terms).as_ref() != Some(&want) {
            bad.push(n);
        }
    }
    Ok(ok(bad.is_empty() && rows.len() == 21, format!("mismatches at {:?}", bad)))
}

fn c2() -> Result<Outcome, Error> {
    let mut bad = vec![];
    for (name, d) in library::all() {
        let t = Instant::now();
        let j = colored_jones(&d, 0)?;
        if !j.is_one() || t.elapsed() > secs(1) {
            bad.push(name);
        }
    }
    Ok(ok(bad.is_empty(), format!("{} diagrams, failures {:?}", library::all().len(), bad)))
}

fn c3() -> Result<Outcome, Error> {
    let mut bad = vec![];
    let names = ["3_1", "4_1", "5_2", "6_1", "6_2"];
    for name in names {
        let d = library::diagram(name)?;
        if jones_from_colored(&colored_jones(&d, 1)?).as_ref() != Some(&kauffman_jones(&d)) {
            bad.push(name);
        }
    }
    Ok(ok(bad.is_empty(), format!("{:?}, failures {:?}", names, bad)))
}

fn c4() -> Result<Outcome, Error> {
    let d = library::diagram("3_1")?;
    let mut tried = 0;
    let mut bad = vec![];
    for k in Kink::ALL {
        let e = add_kink(&d, 2, k)?;
        if e.require_base().is_err() {
            continue;
        }
        tried += 1;
        for n in 0..=4 {
            if colored_jones(&e, n)? != colored_jones(&d, n)? {
                bad.push((k, n));
            }
        }
    }
    Ok(ok(tried > 0 && bad.is_empty(), format!("{} kink types, failures {:?}", tried, bad)))
}

fn c5() -> Result<Outcome, Error> {
    let mut detail = vec![];
    let mut pass = true;
    for name in ["3_1", "4_1"] {
        let d = library::diagram(name)?;
        for mut op in all_operators(&d) {
            let samples = interior_samples(&d, op.kind, 6, 3);
            let cal = calibrate_qstar(&d, &mut op, &samples);
            let good = samples.len() >= 10 && matches!(&cal, Ok(c) if c.samples >= 10);
            pass &= good;
            if !good {
                detail.push(format!("{} {}: {} samples {:?}", name, op.kind, samples.len(), cal.err()));
            }
        }
    }
    Ok(ok(pass, detail.join("; ")))
}

fn c6() -> Result<Outcome, Error> {
    let mut worst: f64 = 0.0;
    let mut bad = vec![];
    for (name, d) in library::all() {
        if d.num_crossings() == 0 || d.num_crossings() > 8 {
            continue;
        }
        let r = verify_match(&d, 25, 11)?;
        worst = worst.max(r.max_residual);
        let symbolic = !matches!(name, "3_1" | "4_1") || r.symbolic_pass;
        if !symbolic || r.max_residual >= NUMERIC_TOL {
            bad.push(name);
        }
    }
    Ok(ok(bad.is_empty(), format!("max residual {:.1e}, failures {:?}", worst, bad)))
}

fn knots() -> Vec<(&'static str, aj_core::diagram::Diagram)> {
    library::all().into_iter().filter(|(_, d)| d.num_crossings() > 0).collect()
}

fn c7() -> Result<Outcome, Error> {
    let mut bad = vec![];
    for (name, d) in knots() {
        let s = sqrt_s(&d)?;
        let lhs = s
            .pow(2)?
            .mul(&holonomy_longitude(&d).w_lambda)
            .mul(&loop_equation_closed_form(&d, None));
        let spans = label_spans(&d).iter().all(|x| x % 2 == 1);
        if !(s.is_integral() && lhs.is_one() && spans) {
            bad.push(name);
        }
    }
    Ok(ok(bad.is_empty(), format!("failures {:?}", bad)))
}

fn c8() -> Result<Outcome, Error> {
    let bad: Vec<_> = knots()
        .into_iter()
        .filter(|(_, d)| !basis_unimodularity(d).unimodular)
        .map(|(n, _)| n)
        .collect();
    Ok(ok(bad.is_empty(), format!("failures {:?}", bad)))
}

fn c9() -> Result<Outcome, Error> {
    let mut bad = vec![];
    let mut count = 0;
    for (name, d) in knots() {
        for c in (0..d.num_crossings()).map(Some).chain([None]) {
            count += 1;
            if loop_equation_by_winding(&d, c) != loop_equation_closed_form(&d, c) {
                bad.push((name, c));
            }
        }
    }
    Ok(ok(bad.is_empty(), format!("{} loop equations, failures {:?}", count, bad)))
}

fn aj_instance(name: &str, n: usize, budget: Duration) -> Result<Outcome, Error> {
    let t = Instant::now();
    let d = library::diagram(name)?;
    let jobs = std::thread::available_parallelism().map(|x| x.get()).unwrap_or(1);
    let values = jones_values(&d, n, jobs)?;
    let data = t.elapsed();
    let max = Bounds { de: 4, d_big_q: 8, dq: 12 };
    let (pass, v) = aj_from_values(name, &d, &values, max, 8, SolveOptions::default(), 20)?;
    let el = t.elapsed();
    Ok(ok(
        pass && el <= budget,
        format!(
            "{} n<={}: data {:.0}s total {:.0}s, bounds {}, {} solutions, residual {:.1e}, control {:.1e}",
            name,
            n,
            data.as_secs_f64(),
            el.as_secs_f64(),
            v["guess"]["bounds"],
            v["solutions"],
            v["aj"]["max_residual"].as_f64().unwrap_or(f64::NAN),
            v["control"]["max_residual"].as_f64().unwrap_or(f64::NAN),
        ),
    ))
}

fn c10() -> Result<Outcome, Error> {
    let a = aj_instance("3_1", 30, secs(120))?;
    let b = aj_instance("4_1", 20, secs(900))?;
    Ok(ok(a.pass && b.pass, format!("{}; {}", a.detail, b.detail)))
}

fn c11() -> Result<Outcome, Error> {
    let d = library::diagram("4_1")?;
    let s = Solver::new(&d)?;
    let opts = SolveOptions { seed: 0, ..Default::default() };
    let sweep = || -> Result<(usize, Vec<String>), Error> {
        let mut good = 0;
        let mut dump = vec![];
        for mu in unit_circle_grid(40) {
            let sols = match s.solve_at(mu, opts) {
                Ok(x) => x,
                Err(Error::NoConvergence) => vec![],
                Err(e) => return Err(e),
            };
            if sols.iter().any(|x| x.max_residual() < 1e-10 && x.s_identity < 1e-8) {
                good += 1;
            }
            dump.extend(sols.iter().map(|x| x.to_json().to_string()));
        }
        Ok((good, dump))
    };
    let (good, a) = sweep()?;
    let (_, b) = sweep()?;
    Ok(ok(good >= 36 && a == b, format!("{}/40 points solved, deterministic {}", good, a == b)))
}

#[test]
fn acceptance() {
    let results = [
        report(1, "unknot closed form", secs(1), c1),
        report(2, "J(0) = 1", secs(10), c2),
        report(3, "n = 1 agrees with the bracket", secs(10), c3),
        report(4, "Reidemeister I invariance", secs(30), c4),
        report(5, "shift ratios and q* calibration", secs(60), c5),
        report(6, "matching of annihilator images", secs(120), c6),
        report(7, "square root of s", secs(10), c7),
        report(8, "winding basis unimodular", secs(1), c8),
        report(9, "loop equations two ways", secs(30), c9),
        report(10, "AJ instance check", secs(1020), c10),
        report(11, "solver contract", secs(60), c11),
    ];
    let failed: Vec<usize> = (1..=11).filter(|i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {:?}", failed);
}
