//! Guessing and checking linear q-difference operators for colored Jones
//! sequences, their `q = 1` specialization and the comparison with points
//! of the gluing variety.

use std::collections::BTreeMap;
use std::fmt;

use log::{debug, info, warn};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::fp::{self, Field};
use crate::qlaurent::LaurentPoly;
use crate::solver::GluingSolution;
use crate::state_sum::{self, coloring_from, summand_with, Layout};

/// Integer Laurent polynomial in `q`.
pub type QPoly = BTreeMap<i64, BigInt>;

fn add_into(acc: &mut QPoly, e: i64, c: BigInt) {
    if c.is_zero() {
        return;
    }
    let z = {
        let slot = acc.entry(e).or_insert_with(BigInt::zero);
        *slot += c;
        slot.is_zero()
    };
    if z {
        acc.remove(&e);
    }
}

/// `J` as an integer polynomial in `q`; fails on odd `v`-powers or
/// fractional coefficients.
pub fn to_qpoly(p: &LaurentPoly) -> Result<QPoly> {
    let mut out = QPoly::new();
    for (e, c) in p.terms() {
        if e % 2 != 0 || !c.is_integer() {
            return Err(Error::IntegralityViolation(p.to_string()));
        }
        out.insert(e / 2, c.to_integer());
    }
    Ok(out)
}

pub fn from_qpoly(p: &QPoly) -> LaurentPoly {
    let mut out = LaurentPoly::zero();
    for (e, c) in p {
        out.add_term(2 * e, BigRational::from_integer(c.clone()));
    }
    out
}

/// Polynomial in `q` and `Q = q^n`, keyed by `(q-exp, Q-exp)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BiPoly {
    pub terms: BTreeMap<(i64, i64), BigInt>,
}

impl BiPoly {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, qe: i64, qn: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let z = {
            let slot = self.terms.entry((qe, qn)).or_insert_with(BigInt::zero);
            *slot += c;
            slot.is_zero()
        };
        if z {
            self.terms.remove(&(qe, qn));
        }
    }

    /// Value at `Q = q^n`.
    pub fn at_n(&self, n: i64) -> QPoly {
        let mut out = QPoly::new();
        for ((a, b), c) in &self.terms {
            add_into(&mut out, a + n * b, c.clone());
        }
        out
    }

    /// Coefficients of `Q^b` at `q = 1`.
    pub fn at_q1(&self) -> BTreeMap<i64, BigInt> {
        let mut out = BTreeMap::new();
        for ((_, b), c) in &self.terms {
            add_into(&mut out, *b, c.clone());
        }
        out
    }

    /// Exact division by `1 - q`, if possible.
    fn div_one_minus_q(&self) -> Option<BiPoly> {
        let mut by_qn: BTreeMap<i64, QPoly> = BTreeMap::new();
        for ((a, b), c) in &self.terms {
            by_qn.entry(*b).or_default().insert(*a, c.clone());
        }
        let mut out = BiPoly::default();
        for (b, p) in by_qn {
            // p = (1 - q) r: r_a = sum_{i <= a} p_i
            let lo = *p.keys().next().unwrap();
            let hi = *p.keys().next_back().unwrap();
            let mut run = BigInt::zero();
            for a in lo..hi {
                run += p.get(&a).cloned().unwrap_or_default();
                out.add_term(a, b, run.clone());
            }
            run += p.get(&hi).cloned().unwrap_or_default();
            if !run.is_zero() {
                return None;
            }
        }
        Some(out)
    }

    pub fn eval_complex(&self, q: Complex64, big_q: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|((a, b), c)| q.powi(*a as i32) * big_q.powi(*b as i32) * c.to_f64().unwrap_or(f64::NAN))
            .sum()
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, b), c)| {
                let mut s = c.to_string();
                if *a != 0 {
                    s += &format!("*q^{}", a);
                }
                if *b != 0 {
                    s += &format!("*Q^{}", b);
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `sum_j c_j(q, Q) E^j`, acting by `(E J)(n) = J(n + 1)`, `Q J(n) = q^n J(n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionOperator {
    pub coeffs: Vec<BiPoly>,
}

impl RecursionOperator {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `sum_j c_j(q, q^n) J(n + j)`; needs `values[n + order]`.
    pub fn apply_at(&self, values: &[QPoly], n: usize) -> QPoly {
        let mut acc = QPoly::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            let cn = c.at_n(n as i64);
            for (a, x) in &cn {
                for (e, y) in &values[n + j] {
                    add_into(&mut acc, a + e, x * y);
                }
            }
        }
        acc
    }

    /// Integer content, monomial content and powers of `1 - q` removed;
    /// leading coefficient positive.
    pub fn normalized(&self) -> RecursionOperator {
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
            coeffs.pop();
        }
        if coeffs.iter().all(|c| c.is_zero()) {
            return RecursionOperator { coeffs };
        }
        loop {
            if coeffs.iter().any(|c| c.at_q1().values().any(|x| !x.is_zero())) {
                break;
            }
            match coeffs.iter().map(|c| c.div_one_minus_q()).collect::<Option<Vec<_>>>() {
                Some(d) => coeffs = d,
                None => break,
            }
        }
        let all = coeffs.iter().flat_map(|c| c.terms.iter());
        let (mut ma, mut mb) = (i64::MAX, i64::MAX);
        let mut g = BigInt::zero();
        for ((a, b), c) in all {
            ma = ma.min(*a);
            mb = mb.min(*b);
            g = g.gcd(c);
        }
        let lead_sign = coeffs
            .last()
            .and_then(|c| c.terms.values().next_back())
            .map(|c| c.is_negative())
            .unwrap_or(false);
        if lead_sign {
            g = -g;
        }
        let coeffs = coeffs
            .iter()
            .map(|c| BiPoly {
                terms: c.terms.iter().map(|((a, b), x)| ((a - ma, b - mb), x / &g)).collect(),
            })
            .collect();
        RecursionOperator { coeffs }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order(),
            "coefficients": self.coeffs.iter().map(|c| {
                c.terms.iter().map(|((a, b), x)| json!([a, b, int_json(x)])).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Option<RecursionOperator> {
        let cs = v.get("coefficients")?.as_array()?;
        let mut coeffs = vec![];
        for c in cs {
            let mut p = BiPoly::default();
            for t in c.as_array()? {
                let t = t.as_array()?;
                p.add_term(t.first()?.as_i64()?, t.get(1)?.as_i64()?, int_from_json(t.get(2)?)?);
            }
            coeffs.push(p);
        }
        let op = RecursionOperator { coeffs };
        match v.get("order").and_then(|o| o.as_u64()) {
            Some(o) if o as usize != op.order() => None,
            _ => Some(op),
        }
    }
}

impl fmt::Display for RecursionOperator {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        for (j, c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})*E^{}", c, j)?;
        }
        Ok(())
    }
}

pub(crate) fn int_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(i) => json!(i),
        None => json!(x.to_string()),
    }
}

pub(crate) fn int_from_json(v: &Value) -> Option<BigInt> {
    if let Some(i) = v.as_i64() {
        return Some(BigInt::from(i));
    }
    v.as_str()?.parse().ok()
}

/// Degree bounds: order in `E`, degree in `Q`, and `q`-degrees `0..=2 d_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub de: usize,
    pub d_big_q: usize,
    pub dq: usize,
}

impl Bounds {
    pub fn unknowns(&self) -> usize {
        (self.de + 1) * (self.d_big_q + 1) * (2 * self.dq + 1)
    }

    pub fn total(&self) -> usize {
        self.de + self.d_big_q + self.dq
    }

    fn column(&self, j: usize, b: usize, a: usize) -> usize {
        (j * (self.d_big_q + 1) + b) * (2 * self.dq + 1) + a
    }
}

/// Values held out from the fit and used only for verification.
pub const MARGIN: usize = 5;

/// Fails unless the fit window has enough distinct `n` and enough scalar
/// equations for `b`.
pub fn check_data(values: &[QPoly], b: Bounds) -> Result<()> {
    let need_n = b.de + b.d_big_q + 2 + MARGIN;
    if values.len() < need_n {
        return Err(Error::InsufficientData { have: values.len(), need: need_n });
    }
    let fit = values.len() - MARGIN;
    let eqs: usize = (0..fit - b.de).map(|n| equation_span(values, b, n)).sum();
    if eqs < b.unknowns() + 10 {
        return Err(Error::InsufficientData { have: eqs, need: b.unknowns() + 10 });
    }
    Ok(())
}

/// Number of `q`-coefficients of the `n`-th equation.
fn equation_span(values: &[QPoly], b: Bounds, n: usize) -> usize {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for j in 0..=b.de {
        if let (Some((l, _)), Some((h, _))) = (values[n + j].first_key_value(), values[n + j].last_key_value()) {
            lo = lo.min(*l);
            hi = hi.max(*h);
        }
    }
    if lo > hi {
        return 0;
    }
    (hi - lo) as usize + 2 * b.dq + n * b.d_big_q + 1
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(f: &Field, m: &mut [Vec<u64>], cols: usize) -> Vec<usize> {
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(i) = (r..m.len()).find(|i| m[*i][c] != 0) else {
            continue;
        };
        m.swap(r, i);
        let inv = f.inv(m[r][c]);
        for x in m[r][c..].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let (head, tail) = m.split_at_mut(r);
        let (row, rest) = tail.split_first_mut().unwrap();
        for other in head.iter_mut().chain(rest.iter_mut()) {
            let t = other[c];
            if t == 0 {
                continue;
            }
            for k in c..cols {
                if row[k] != 0 {
                    other[k] = f.sub(other[k], f.mul(t, row[k]));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn eval_mod(f: &Field, p: &QPoly, x: u64) -> u64 {
    let Some((&lo, _)) = p.first_key_value() else {
        return 0;
    };
    let mut acc = 0u64;
    let mut xe = f.pow_i(x, lo);
    let mut e = lo;
    for (k, c) in p {
        xe = f.mul(xe, f.pow(x, (k - e) as u64));
        e = *k;
        acc = f.add(acc, f.mul(f.from_bigint(c), xe));
    }
    acc
}

/// Canonical nullspace vector modulo `p`: the one supported on the fewest
/// leading columns. `None` when the nullspace is trivial.
fn modular_solution(values: &[QPoly], b: Bounds, p: u64, seed: u64) -> Option<(usize, usize, Vec<u64>)> {
    let f = Field::new(p);
    let cols = b.unknowns();
    let fit = values.len() - MARGIN;
    let ns: Vec<usize> = (0..fit - b.de).collect();
    let target = cols + 20;
    let mut quota: Vec<usize> = ns.iter().map(|n| equation_span(values, b, *n)).collect();
    let mut plan = vec![0usize; ns.len()];
    let mut planned = 0;
    while planned < target {
        let mut progress = false;
        for i in 0..ns.len() {
            if quota[i] > 0 && planned < target {
                quota[i] -= 1;
                plan[i] += 1;
                planned += 1;
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p);
    let mut m = Vec::with_capacity(planned);
    for (i, n) in ns.iter().enumerate() {
        for _ in 0..plan[i] {
            let x = rng.gen_range(2..p - 1);
            let jx: Vec<u64> = (0..=b.de).map(|j| eval_mod(&f, &values[n + j], x)).collect();
            let xn = f.pow(x, *n as u64);
            let mut row = vec![0u64; cols];
            let mut qb = 1u64;
            for bb in 0..=b.d_big_q {
                let mut qa = qb;
                for a in 0..=2 * b.dq {
                    for (j, y) in jx.iter().enumerate() {
                        row[b.column(j, bb, a)] = f.mul(qa, *y);
                    }
                    qa = f.mul(qa, x);
                }
                qb = f.mul(qb, xn);
            }
            m.push(row);
        }
    }
    let pivots = rref(&f, &mut m, cols);
    let nullity = cols - pivots.len();
    if nullity == 0 {
        return None;
    }
    let free = (0..cols).find(|c| !pivots.contains(c)).unwrap();
    let mut v = vec![0u64; cols];
    v[free] = 1;
    for (r, pc) in pivots.iter().enumerate() {
        if *pc < free {
            v[*pc] = f.neg(m[r][free]);
        }
    }
    Some((nullity, free, v))
}

fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let mut a = a % m;
    if a.is_negative() {
        a += m;
    }
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), a);
    let (mut s0, mut s1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let qt = &r0 / &r1;
        let r2 = &r0 - &qt * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let s2 = &s0 - &qt * &s1;
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || s1.abs() > bound || !r1.gcd(&s1).is_one() {
        return None;
    }
    if s1.is_negative() {
        Some((-r1, -s1))
    } else {
        Some((r1, s1))
    }
}

fn operator_from_vector(v: &[BigInt], b: Bounds) -> RecursionOperator {
    let mut coeffs = vec![BiPoly::default(); b.de + 1];
    for (j, c) in coeffs.iter_mut().enumerate() {
        for bb in 0..=b.d_big_q {
            for a in 0..=2 * b.dq {
                c.add_term(a as i64, bb as i64, v[b.column(j, bb, a)].clone());
            }
        }
    }
    RecursionOperator { coeffs }.normalized()
}

/// Whether `op` annihilates every applicable value.
pub fn verify_recursion(op: &RecursionOperator, values: &[QPoly]) -> bool {
    let d = op.order();
    if values.len() <= d || op.coeffs.iter().all(|c| c.is_zero()) {
        return false;
    }
    (0..values.len() - d).all(|n| op.apply_at(values, n).is_empty())
}

#[derive(Clone, Debug, Serialize)]
pub struct GuessReport {
    pub bounds: Bounds,
    pub nullity: usize,
    pub primes: usize,
    pub fit_values: usize,
    pub held_out: usize,
}

/// Annihilating operator within the given bounds, fitted on all but the
/// last `MARGIN` values and verified on all of them.
pub fn guess_recursion(values: &[QPoly], b: Bounds) -> Result<Option<(RecursionOperator, GuessReport)>> {
    if values.iter().all(|v| v.is_empty()) {
        return Ok(None);
    }
    check_data(values, b)?;
    let seed = 0x5eed;
    let mut residues: Vec<Vec<u64>> = vec![];
    let mut moduli: Vec<u64> = vec![];
    let mut shape: Option<(usize, usize)> = None;
    let mut last: Option<Vec<BigInt>> = None;
    for p in fp::primes().take(40) {
        let Some((nullity, free, v)) = modular_solution(values, b, p, seed) else {
            if shape.is_none() {
                return Ok(None);
            }
            warn!("prime {} lost the nullspace; skipped", p);
            continue;
        };
        match shape {
            None => shape = Some((nullity, free)),
            Some(s) if s != (nullity, free) => {
                warn!("prime {} gives nullspace shape {:?} vs {:?}; skipped", p, (nullity, free), s);
                continue;
            }
            _ => {}
        }
        residues.push(v);
        moduli.push(p);
        let m: BigInt = moduli.iter().map(|p| BigInt::from(*p)).product();
        let cols = b.unknowns();
        let mut rat = Vec::with_capacity(cols);
        let mut ok = true;
        for c in 0..cols {
            let rs: Vec<u64> = residues.iter().map(|r| r[c]).collect();
            match rational_reconstruct(&fp::crt(&rs, &moduli), &m) {
                Some(x) => rat.push(x),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let den = rat.iter().fold(BigInt::one(), |acc, (_, d)| acc.lcm(d));
        let ints: Vec<BigInt> = rat.iter().map(|(n, d)| n * (&den / d)).collect();
        if last.as_ref() == Some(&ints) {
            let op = operator_from_vector(&ints, b);
            if !verify_recursion(&op, values) {
                warn!("candidate at {:?} fails exact verification", b);
                return Ok(None);
            }
            let (nullity, _) = shape.unwrap();
            return Ok(Some((
                op,
                GuessReport {
                    bounds: b,
                    nullity,
                    primes: moduli.len(),
                    fit_values: values.len() - MARGIN,
                    held_out: MARGIN,
                },
            )));
        }
        last = Some(ints);
    }
    Err(Error::NoConvergence)
}

/// Escalates `(d_E, d_Q, d_q)` by total degree from `(1, 1, 1)` up to the
/// componentwise maximum `max`, returning the first verified operator.
pub fn guess_escalating(values: &[QPoly], max: Bounds) -> Result<Option<(RecursionOperator, GuessReport)>> {
    let mut any_checked = false;
    let mut last_err = None;
    for total in 3..=max.total() {
        for de in 1..=max.de {
            for d_big_q in 1..=max.d_big_q {
                if de + d_big_q >= total {
                    continue;
                }
                let dq = total - de - d_big_q;
                if dq > max.dq {
                    continue;
                }
                let b = Bounds { de, d_big_q, dq };
                match guess_recursion(values, b) {
                    Ok(Some(r)) => {
                        info!("operator found at {:?}", b);
                        return Ok(Some(r));
                    }
                    Ok(None) => {
                        debug!("no operator at {:?}", b);
                        any_checked = true;
                    }
                    Err(e @ Error::InsufficientData { .. }) => last_err = Some(e),
                    Err(e) => return Err(e),
                }
            }
        }
    }
    match (any_checked, last_err) {
        (false, Some(e)) => Err(e),
        _ => Ok(None),
    }
}

/// `J(0..=n_max)` as integer `q`-polynomials, computed on up to `jobs`
/// threads.
pub fn jones_values(d: &Diagram, n_max: usize, jobs: usize) -> Result<Vec<QPoly>> {
    let jobs = jobs.max(1);
    let mut out: Vec<Option<Result<QPoly>>> = (0..=n_max).map(|_| None).collect();
    // largest n first so the long jobs start early
    let order: Vec<usize> = (0..=n_max).rev().collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results = std::sync::Mutex::new(&mut out);
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                let Some(&n) = order.get(i) else { break };
                let r = state_sum::colored_jones(d, n as i64).and_then(|p| to_qpoly(&p));
                results.lock().unwrap()[n] = Some(r);
            });
        }
    });
    out.into_iter().map(|r| r.unwrap()).collect()
}

/// Polynomial in `Q` and `E`, keyed by `(Q-exp, E-exp)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QEPoly {
    pub terms: BTreeMap<(i64, i64), BigInt>,
}

impl QEPoly {
    pub fn eval(&self, big_q: Complex64, e: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|((a, j), c)| big_q.powi(*a as i32) * e.powi(*j as i32) * c.to_f64().unwrap_or(f64::NAN))
            .sum()
    }

    /// `sum |c| |Q^a E^j|`, the scale used to normalize residuals.
    pub fn magnitude(&self, big_q: Complex64, e: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|((a, j), c)| (big_q.powi(*a as i32) * e.powi(*j as i32)).norm() * c.to_f64().unwrap_or(f64::NAN).abs())
            .sum()
    }

    pub fn e_degree(&self) -> i64 {
        self.terms.keys().map(|(_, j)| *j).max().unwrap_or(0)
    }

    /// Exact division by `E - 1`.
    pub fn div_e_minus_one(&self) -> Option<QEPoly> {
        let mut by_q: BTreeMap<i64, BTreeMap<i64, BigInt>> = BTreeMap::new();
        for ((a, j), c) in &self.terms {
            by_q.entry(*a).or_default().insert(*j, c.clone());
        }
        let mut out = QEPoly::default();
        for (a, p) in by_q {
            let hi = *p.keys().next_back().unwrap();
            let lo = *p.keys().next().unwrap();
            // p = (E - 1) r: r_{j-1} = sum_{i >= j} p_i
            let mut run = BigInt::zero();
            for j in (lo + 1..=hi).rev() {
                run += p.get(&j).cloned().unwrap_or_default();
                if !run.is_zero() {
                    out.terms.insert((a, j - 1), run.clone());
                }
            }
            run += p.get(&lo).cloned().unwrap_or_default();
            if !run.is_zero() {
                return None;
            }
        }
        Some(out)
    }

    pub fn to_json(&self) -> Value {
        json!(self
            .terms
            .iter()
            .map(|((a, j), c)| json!([a, j, int_json(c)]))
            .collect::<Vec<_>>())
    }
}

impl fmt::Display for QEPoly {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((a, j), c)| format!("{}*Q^{}*E^{}", c, a, j))
            .collect();
        write!(f, "{}", if parts.is_empty() { "0".into() } else { parts.join(" + ") })
    }
}

/// `sum_j c_j(1, Q) E^j` with integer and `Q`-monomial content removed.
pub fn specialize_q1(op: &RecursionOperator) -> Result<QEPoly> {
    let op = op.normalized();
    let mut p = QEPoly::default();
    for (j, c) in op.coeffs.iter().enumerate() {
        for (a, x) in c.at_q1() {
            p.terms.insert((a, j as i64), x);
        }
    }
    if p.terms.is_empty() {
        return Err(Error::PoleAtOne);
    }
    let ma = p.terms.keys().map(|(a, _)| *a).min().unwrap();
    let g = p.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c));
    Ok(QEPoly {
        terms: p.terms.into_iter().map(|((a, j), c)| ((a - ma, j), c / &g)).collect(),
    })
}

/// Random integer polynomial on the same monomial support.
pub fn control_polynomial(like: &QEPoly, seed: u64) -> QEPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    QEPoly {
        terms: like
            .terms
            .keys()
            .map(|k| {
                let mut c = 0;
                while c == 0 {
                    c = rng.gen_range(-9i64..=9);
                }
                (*k, BigInt::from(c))
            })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AjPoint {
    pub w_mu: [f64; 2],
    pub residual: f64,
    /// `+1` if `E = s`, `-1` if `E = -s`.
    pub branch: i8,
}

#[derive(Clone, Debug, Serialize)]
pub struct AjReport {
    pub max_residual: f64,
    pub points: Vec<AjPoint>,
}

/// Evaluates `poly(w_mu, +-s)` at each solution; per solution the better
/// branch counts, normalized by the coefficient magnitude.
pub fn aj_check(poly: &QEPoly, solutions: &[GluingSolution]) -> AjReport {
    let mut points = vec![];
    for sol in solutions {
        let mut best = (f64::INFINITY, 1i8);
        for br in [1i8, -1] {
            let e = sol.s_value * br as f64;
            let r = poly.eval(sol.w_mu, e).norm() / poly.magnitude(sol.w_mu, e).max(f64::MIN_POSITIVE);
            if r < best.0 {
                best = (r, br);
            }
        }
        points.push(AjPoint {
            w_mu: [sol.w_mu.re, sol.w_mu.im],
            residual: best.0,
            branch: best.1,
        });
    }
    AjReport {
        max_residual: points.iter().map(|p| p.residual).fold(0.0, f64::max),
        points,
    }
}

/// A monomial term `c q^a Q^b prod Q_i^{k_i} E^e prod E_i^{e_i}` of an
/// operator acting on the summand `F(n, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertTerm {
    pub coeff: BigInt,
    pub q: i64,
    pub big_q: i64,
    pub qk: Vec<i64>,
    pub e: i64,
    pub ek: Vec<i64>,
}

/// `P = P~(E, Q) + sum_i (E_i - 1) R_i`; index `i = 0` is `k_0`, `i = c + 1`
/// is crossing `c`.
#[derive(Clone, Debug)]
pub struct CertificateOperator {
    pub ptilde: RecursionOperator,
    pub r: Vec<Vec<CertTerm>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    /// `P F = 0` at every sampled lattice point.
    pub annihilates_summand: bool,
    /// `sum_k P F(n, k) = P~ J(n)` at the sampled `n`.
    pub telescopes: bool,
    /// `P~` annihilates the supplied `J` values.
    pub phi_annihilates: bool,
    /// `P~ != 0`.
    pub good: bool,
}

impl CertificateReport {
    pub fn valid(&self) -> bool {
        self.annihilates_summand && self.phi_annihilates
    }
}

/// `v^n` times the summand, so that `J(n) = sum_k F(n, k)`.
fn summand_f(d: &Diagram, layout: &Layout, n: i64, k: &[i64]) -> LaurentPoly {
    if n < 0 {
        return LaurentPoly::zero();
    }
    let col = coloring_from(d, k[0], &k[1..]);
    summand_with(layout, n, &col).shift(n)
}

fn apply_terms(d: &Diagram, layout: &Layout, terms: &[CertTerm], n: i64, k: &[i64]) -> LaurentPoly {
    let mut acc = LaurentPoly::zero();
    for t in terms {
        let mut kk = k.to_vec();
        for (i, e) in t.ek.iter().enumerate() {
            kk[i] += e;
        }
        let f = summand_f(d, layout, n + t.e, &kk);
        if f.is_zero() {
            continue;
        }
        let mut qe = t.q + t.big_q * n;
        for (i, e) in t.qk.iter().enumerate() {
            qe += e * k[i];
        }
        acc += &f.shift(2 * qe).scale(&BigRational::from_integer(t.coeff.clone()));
    }
    acc
}

fn ptilde_terms(op: &RecursionOperator, dim: usize) -> Vec<CertTerm> {
    let mut out = vec![];
    for (j, c) in op.coeffs.iter().enumerate() {
        for ((a, b), x) in &c.terms {
            out.push(CertTerm {
                coeff: x.clone(),
                q: *a,
                big_q: *b,
                qk: vec![0; dim],
                e: j as i64,
                ek: vec![0; dim],
            });
        }
    }
    out
}

/// `P F` at one lattice point.
pub fn apply_certificate(d: &Diagram, layout: &Layout, cert: &CertificateOperator, n: i64, k: &[i64]) -> LaurentPoly {
    let dim = k.len();
    let mut acc = apply_terms(d, layout, &ptilde_terms(&cert.ptilde, dim), n, k);
    for (i, ri) in cert.r.iter().enumerate() {
        if ri.is_empty() {
            continue;
        }
        let mut up = k.to_vec();
        up[i] += 1;
        acc += &(&apply_terms(d, layout, ri, n, &up) - &apply_terms(d, layout, ri, n, k));
    }
    acc
}

/// Checks a certificate on the sampled `n`: pointwise on a box around the
/// support, then the telescoped sum, then `P~` on `values`.
pub fn verify_certificate(cert: &CertificateOperator, d: &Diagram, ns: &[i64], values: &[QPoly]) -> CertificateReport {
    let layout = Layout::new(d);
    let dim = d.num_crossings() + 1;
    let reach: i64 = cert
        .r
        .iter()
        .flatten()
        .flat_map(|t| t.ek.iter().map(|e| e.abs()).chain([t.e.abs()]))
        .max()
        .unwrap_or(0)
        + 1;
    let mut pointwise = true;
    let mut telescopes = true;
    let vals_lp: Vec<LaurentPoly> = values.iter().map(from_qpoly).collect();
    for &n in ns {
        let hi = n + cert.ptilde.order() as i64 + reach;
        let lo = -reach;
        let mut total = LaurentPoly::zero();
        let mut k = vec![lo; dim];
        loop {
            let x = apply_certificate(d, &layout, cert, n, &k);
            if !x.is_zero() {
                pointwise = false;
                total += &x;
            }
            // odometer over the box
            let mut i = 0;
            while i < dim {
                k[i] += 1;
                if k[i] <= hi {
                    break;
                }
                k[i] = lo;
                i += 1;
            }
            if i == dim {
                break;
            }
        }
        let order = cert.ptilde.order();
        if (n as usize) + order < vals_lp.len() {
            let expect = from_qpoly(&cert.ptilde.apply_at(values, n as usize));
            if total != expect {
                telescopes = false;
            }
        }
    }
    let phi_annihilates = values.len() > cert.ptilde.order()
        && (0..values.len() - cert.ptilde.order()).all(|n| cert.ptilde.apply_at(values, n).is_empty());
    CertificateReport {
        annihilates_summand: pointwise,
        telescopes,
        phi_annihilates,
        good: cert.ptilde.coeffs.iter().any(|c| !c.is_zero()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unknot_values(n: usize) -> Vec<QPoly> {
        (0..=n as i64).map(|i| to_qpoly(&state_sum::unknot_jones(i)).unwrap()).collect()
    }

    #[test]
    fn reconstruct_small_fraction() {
        let m = BigInt::from(1_000_003i64);
        // 3/7 mod m
        let inv7 = BigInt::from(7).modpow(&(&m - 2), &m);
        let a = (BigInt::from(3) * inv7) % &m;
        assert_eq!(rational_reconstruct(&a, &m), Some((BigInt::from(3), BigInt::from(7))));
    }

    #[test]
    fn unknot_operator() {
        let v = unknot_values(20);
        let (op, _) = guess_escalating(&v, Bounds { de: 2, d_big_q: 2, dq: 2 }).unwrap().unwrap();
        // (1 - qQ) E - (1 - q^2 Q), up to sign
        let mut c1 = BiPoly::default();
        c1.add_term(0, 0, BigInt::from(1));
        c1.add_term(1, 1, BigInt::from(-1));
        let mut c0 = BiPoly::default();
        c0.add_term(0, 0, BigInt::from(-1));
        c0.add_term(2, 1, BigInt::from(1));
        let expect = RecursionOperator { coeffs: vec![c0, c1] };
        assert_eq!(op, expect.normalized());
        assert!(verify_recursion(&op, &unknot_values(40)));
    }

    #[test]
    fn zero_input_is_rejected() {
        let v = vec![QPoly::new(); 20];
        assert!(guess_recursion(&v, Bounds { de: 1, d_big_q: 1, dq: 1 }).unwrap().is_none());
    }

    #[test]
    fn one_minus_q_content_is_removed() {
        let mut c = BiPoly::default();
        c.add_term(0, 0, BigInt::from(1));
        c.add_term(1, 0, BigInt::from(-1));
        let op = RecursionOperator { coeffs: vec![c.clone(), c] };
        let n = op.normalized();
        assert_eq!(n.coeffs[0].terms.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let v = unknot_values(20);
        let (op, _) = guess_recursion(&v, Bounds { de: 1, d_big_q: 1, dq: 1 }).unwrap().unwrap();
        assert_eq!(RecursionOperator::from_json(&op.to_json()), Some(op));
    }
}
