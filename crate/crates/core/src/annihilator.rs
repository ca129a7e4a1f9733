//! Shift ratios of the state-sum summand, their `q = 1` limits and the
//! comparison with the gluing equations.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagram::{Diagram, Role};
use crate::error::{Error, Result};
use crate::gluing::{self, CornerTable, Prime};
use crate::shape::{FactoredRational as FR, Monomial, Var};
use crate::state_sum::{coloring_from, enumerate_colorings, summand_with, Layout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OpKind {
    /// `n -> n + 1`.
    E,
    /// `k_0 -> k_0 + 1`.
    E0,
    /// `k_c -> k_c + 1`.
    Ec(usize),
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            OpKind::E => write!(f, "E"),
            OpKind::E0 => write!(f, "E0"),
            OpKind::Ec(c) => write!(f, "E[{}]", c),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RatioOperator {
    pub kind: OpKind,
    /// Ratio up to a constant power of `q`.
    pub formula: FR,
    /// Calibrated `q^{m/2}`, once known.
    pub qstar: Option<Monomial>,
}

fn var(v: Var) -> Monomial {
    Monomial::var(v)
}

fn q() -> Monomial {
    var(Var::Q)
}

fn qn() -> Monomial {
    var(Var::Qn)
}

fn inv(m: &Monomial) -> Monomial {
    m.inv().expect("nonzero monomial")
}

fn om(m: &Monomial) -> FR {
    FR::binomial(m)
}

fn ratio(num: FR, den: FR) -> FR {
    num.div(&den).expect("nonzero binomials")
}

fn half(m: &Monomial, e2: i64) -> FR {
    FR::from_monomial(m.pow2(e2).expect("unit-coefficient monomial"))
}

/// `Q_a, Q_a', Q_b, Q_b'` per crossing: the arc monomials of the gluing
/// side with `w0 -> Q0`, `w_c -> Q_c`.
pub fn color_monomials(d: &Diagram) -> Vec<[Monomial; 4]> {
    let to_q = |m: &Monomial| {
        Monomial::from_exps(
            m.coeff.clone(),
            m.exps.iter().map(|(v, e)| {
                (
                    match v {
                        Var::W0 => Var::Qk0,
                        Var::Wc(c) => Var::Qc(*c),
                        other => *other,
                    },
                    *e,
                )
            }),
        )
    };
    gluing::crossing_arcs(d)
        .iter()
        .map(|a| [to_q(&a[0]), to_q(&a[1]), to_q(&a[2]), to_q(&a[3])])
        .collect()
}

pub fn ratio_e(d: &Diagram) -> RatioOperator {
    let cols = color_monomials(d);
    let mut f = FR::one();
    for (c, x) in d.crossings.iter().enumerate() {
        let [a, ap, b, _] = &cols[c];
        let eps = x.sign as i64;
        f = f
            .mul(&half(&a.mul(b), eps))
            .mul(&half(&var(Var::Qc(c as u32)), -1))
            .mul(&ratio(om(&q().mul(&qn()).mul(&inv(a))), om(&q().mul(&qn()).mul(&inv(ap)))));
    }
    RatioOperator { kind: OpKind::E, formula: f, qstar: None }
}

pub fn ratio_e0(d: &Diagram) -> RatioOperator {
    let cols = color_monomials(d);
    let mut f = FR::one();
    for (c, x) in d.crossings.iter().enumerate() {
        let [a, ap, b, bp] = &cols[c];
        let eps = x.sign as i64;
        f = f
            .mul(&FR::from_monomial(qn().mul(&inv(&a.mul(b))).pow(eps)))
            .mul(&ratio(
                om(&qn().mul(&inv(ap))).mul(&om(&q().mul(b))),
                om(&qn().mul(&inv(a))).mul(&om(&q().mul(bp))),
            ));
    }
    RatioOperator { kind: OpKind::E0, formula: f, qstar: None }
}

pub fn ratio_ec(d: &Diagram, c: usize) -> RatioOperator {
    let cols = color_monomials(d);
    let x = &d.crossings[c];
    let [a, ap, b, bp] = &cols[c];
    let qc = var(Var::Qc(c as u32));
    let over = x.j_is_over();
    let pos = x.sign > 0;
    let fc = if over {
        let lead = if pos {
            half(&a.mul(bp), -1)
        } else {
            half(&ap.mul(b), 1).mul(&FR::from_monomial(inv(&qn()).neg()))
        };
        lead.mul(&ratio(
            om(&q().mul(b)).mul(&om(&qn().mul(&inv(ap)))),
            om(&q().mul(&qc)),
        ))
    } else {
        let lead = if pos {
            half(&ap.mul(b), 1).mul(&FR::from_monomial(inv(&qn())))
        } else {
            half(&a.mul(bp), -1).neg()
        };
        lead.mul(&ratio(
            om(bp).mul(&om(&q().mul(&qn()).mul(&inv(a)))),
            om(&q().mul(&qc)),
        ))
    };
    let sgn = if over { 1 } else { -1 };
    let (j, jp) = x.labels();
    let mut f = fc;
    for l in (j + 1)..jp {
        let p = d.pass(l);
        let e = d.crossings[p.crossing].sign as i64;
        let [a, ap, b, bp] = &cols[p.crossing];
        let term = if p.over {
            let m = half(&qn().mul(&inv(&b.mul(bp))), sgn * e);
            m.mul(&if over {
                ratio(om(&qn().mul(&inv(ap))), om(&qn().mul(&inv(a))))
            } else {
                ratio(om(&q().mul(&qn()).mul(&inv(a))), om(&q().mul(&qn()).mul(&inv(ap))))
            })
        } else {
            let m = half(&qn().mul(&inv(&a.mul(ap))), sgn * e);
            m.mul(&if over {
                ratio(om(&q().mul(b)), om(&q().mul(bp)))
            } else {
                ratio(om(bp), om(b))
            })
        };
        f = f.mul(&term);
    }
    RatioOperator { kind: OpKind::Ec(c), formula: f, qstar: None }
}

pub fn all_operators(d: &Diagram) -> Vec<RatioOperator> {
    let mut v = vec![ratio_e(d), ratio_e0(d)];
    v.extend((0..d.num_crossings()).map(|c| ratio_ec(d, c)));
    v
}

/// A lattice point `(n, k_0, k_c)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sample {
    pub n: i64,
    pub k0: i64,
    pub kc: Vec<i64>,
}

/// Crossing whose underpass carries label 1. Its range `[1, j']`
/// contains the base arc, so its generator is `E_0^{-1} E_c`.
pub fn base_crossing(d: &Diagram) -> Option<usize> {
    d.crossings.iter().position(|x| x.labels().0 == 1)
}

fn shifted(d: &Diagram, s: &Sample, kind: OpKind) -> Sample {
    let mut t = s.clone();
    match kind {
        OpKind::E => t.n += 1,
        OpKind::E0 => t.k0 += 1,
        OpKind::Ec(c) => {
            t.kc[c] += 1;
            if base_crossing(d) == Some(c) {
                t.k0 -= 1;
            }
        }
    }
    t
}

/// Outcome of one cross-multiplied ratio check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RatioCheck {
    /// Both sides vanish.
    Trivial,
    /// Sides agree up to `v^m`.
    Shift(i64),
    Mismatch,
}

/// Compares `w(shifted) * den` with `num * w` at one sample, where
/// `formula = num / den` is specialized at the sample.
pub fn check_sample(d: &Diagram, layout: &Layout, op: &RatioOperator, s: &Sample) -> RatioCheck {
    check_against(d, layout, op, s, &shifted(d, s, op.kind))
}

/// As `check_sample`, with an explicit shifted point.
pub fn check_against(d: &Diagram, layout: &Layout, op: &RatioOperator, s: &Sample, t: &Sample) -> RatioCheck {
    let w = |t: &Sample| summand_with(layout, t.n, &coloring_from(d, t.k0, &t.kc));
    let (num, den) = op.formula.laurent_parts(&|v| match v {
        Var::Q => 1,
        Var::Qn => s.n,
        Var::Qk0 => s.k0,
        Var::Qc(c) => s.kc[c as usize],
        _ => 0,
    });
    let lhs = &w(t) * &den;
    let rhs = &num * &w(s);
    match (lhs.is_zero(), rhs.is_zero()) {
        (true, true) => RatioCheck::Trivial,
        (false, false) => {
            let m = lhs.min_exp().unwrap() - rhs.min_exp().unwrap();
            if lhs == rhs.shift(m) {
                RatioCheck::Shift(m)
            } else {
                RatioCheck::Mismatch
            }
        }
        _ => RatioCheck::Mismatch,
    }
}

/// Lattice points where the summand and its `kind`-shift are both
/// nonzero, spread over `n = 2..=n_max`.
pub fn interior_samples(d: &Diagram, kind: OpKind, n_max: i64, per_n: usize) -> Vec<Sample> {
    let layout = Layout::new(d);
    let mut out = vec![];
    for n in 2..=n_max {
        let all: Vec<_> = enumerate_colorings(d, n).collect();
        let mut picked = 0;
        let step = (all.len() / (4 * per_n)).max(1);
        for k in all.iter().step_by(step) {
            if picked >= per_n {
                break;
            }
            let s = Sample { n, k0: k.k0, kc: k.kc.clone() };
            let ok = [s.clone(), shifted(d, &s, kind)]
                .iter()
                .all(|t| !summand_with(&layout, t.n, &coloring_from(d, t.k0, &t.kc)).is_zero());
            if ok {
                out.push(s);
                picked += 1;
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub kind: String,
    /// Exponent `m` of `q^* = v^m`.
    pub v_exponent: i64,
    pub samples: usize,
    pub trivial: usize,
}

/// Finds the unique `q^*` for `op` across `samples`.
pub fn calibrate_qstar(d: &Diagram, op: &mut RatioOperator, samples: &[Sample]) -> Result<Calibration> {
    let layout = Layout::new(d);
    let mut m: Option<i64> = None;
    let mut used = 0;
    let mut trivial = 0;
    for s in samples {
        match check_sample(d, &layout, op, s) {
            RatioCheck::Trivial => trivial += 1,
            RatioCheck::Mismatch => {
                return Err(Error::InconsistentQStar(format!("{} not a monomial multiple at {:?}", op.kind, s)))
            }
            RatioCheck::Shift(x) => {
                if m.is_some_and(|y| y != x) {
                    return Err(Error::InconsistentQStar(format!(
                        "{}: v^{} vs v^{} at {:?}",
                        op.kind,
                        m.unwrap(),
                        x,
                        s
                    )));
                }
                m = Some(x);
                used += 1;
            }
        }
    }
    if used < 2 {
        return Err(Error::InsufficientData { have: used, need: 2 });
    }
    let m = m.unwrap();
    op.qstar = Some(Monomial::var_pow2(Var::Q, m));
    Ok(Calibration {
        kind: op.kind.to_string(),
        v_exponent: m,
        samples: used,
        trivial,
    })
}

/// Sets `q = 1`.
pub fn ev_q1(x: &FR) -> Result<FR> {
    x.substitute(&|v| if v == Var::Q { Some(Monomial::one()) } else { None })
        .map_err(|e| match e {
            Error::PoleHit => Error::PoleAtOne,
            e => e,
        })
}

/// `Q -> w_mu`, `Q0 -> w0`, `Q_c -> w_c`.
pub fn psi(x: &FR) -> Result<FR> {
    if x.vars().contains(&Var::Q) {
        return Err(Error::ResidualQ);
    }
    Ok(x.rename(&|v| match v {
        Var::Qn => Var::Wmu,
        Var::Qk0 => Var::W0,
        Var::Qc(c) => Var::Wc(c),
        other => other,
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorVerdict {
    pub generator: String,
    pub symbolic: bool,
    pub numeric_residual: f64,
    pub image: String,
    pub target: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatchReport {
    pub generators: Vec<GeneratorVerdict>,
    pub max_residual: f64,
    pub symbolic_pass: bool,
    pub numeric_pass: bool,
}

impl MatchReport {
    pub fn check(&self, symbolic: bool) -> Result<()> {
        for g in &self.generators {
            let bad = (symbolic && !g.symbolic) || !(g.numeric_residual < NUMERIC_TOL);
            if bad {
                return Err(Error::MatchFailure {
                    generator: g.generator.clone(),
                    detail: format!("image {} vs target {} (residual {:e})", g.image, g.target, g.numeric_residual),
                });
            }
        }
        Ok(())
    }
}

pub const NUMERIC_TOL: f64 = 1e-9;

/// Direct numeric evaluation of the gluing side from corner factors.
pub struct NumericGluing<'a> {
    d: &'a Diagram,
    table: &'a CornerTable,
}

fn zp(z: Complex64, p: Prime) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    match p {
        Prime::One => one / (one - z),
        Prime::Two => one - one / z,
    }
}

impl<'a> NumericGluing<'a> {
    pub fn new(d: &'a Diagram, table: &'a CornerTable) -> Self {
        NumericGluing { d, table }
    }

    fn arcs(&self, pt: &dyn Fn(Var) -> Complex64) -> Vec<[Complex64; 4]> {
        gluing::crossing_arcs(self.d)
            .iter()
            .map(|a| {
                let e = |m: &Monomial| m.eval_complex(pt);
                [e(&a[0]), e(&a[1]), e(&a[2]), e(&a[3])]
            })
            .collect()
    }

    fn region(&self, f: usize, pt: &dyn Fn(Var) -> Complex64, arcs: &[[Complex64; 4]]) -> Complex64 {
        let mu = pt(Var::Wmu);
        let mut acc = Complex64::new(1.0, 0.0);
        for &(c, p) in &self.d.faces[f].corners {
            let x = &self.d.crossings[c];
            let [a, ap, b, bp] = arcs[c];
            let w = pt(Var::Wc(c as u32));
            let z = |r: Role| match r {
                Role::Ui => a / mu,
                Role::Li => 1.0 / b,
                Role::Uo => mu / ap,
                Role::Lo => bp,
            };
            let (r1, r2) = (x.role(p), x.role(p + 1));
            let (u, l) = if matches!(r1, Role::Ui | Role::Uo) { (r1, r2) } else { (r2, r1) };
            let idx = match (u, l) {
                (Role::Uo, Role::Lo) => 0,
                (Role::Uo, Role::Li) => 1,
                (Role::Ui, Role::Li) => 2,
                _ => 3,
            };
            let rule = self.table.rules[if x.sign > 0 { 0 } else { 1 }][idx];
            acc *= zp(w, rule.w) * zp(z(u), rule.u) * zp(z(l), rule.l);
        }
        acc
    }

    /// `L_c` (or `L_0` for `None`) as a product of region values.
    pub fn loop_value(&self, c: Option<usize>, pt: &dyn Fn(Var) -> Complex64) -> Complex64 {
        let arcs = self.arcs(pt);
        let wind = self.d.loop_of_crossing(c).winding;
        let mut acc = Complex64::new(1.0, 0.0);
        for (f, w) in wind.iter().enumerate() {
            if *w != 0 {
                acc *= self.region(f, pt, &arcs).powi(*w as i32);
            }
        }
        acc
    }

    /// Zero-winding longitude from the arc form.
    pub fn w_lambda(&self, pt: &dyn Fn(Var) -> Complex64) -> Complex64 {
        let arcs = self.arcs(pt);
        let mu = pt(Var::Wmu);
        let one = Complex64::new(1.0, 0.0);
        let mut acc = mu.powi(-self.d.writhe() as i32);
        for (c, [a, ap, b, bp]) in arcs.iter().enumerate() {
            acc *= pt(Var::Wc(c as u32)) * (one - mu / ap) / (one - mu / a) * (one - bp) / (one - b);
        }
        acc
    }
}

fn random_point(rng: &mut ChaCha8Rng, c: usize) -> impl Fn(Var) -> Complex64 {
    let mut draw = || {
        let r: f64 = rng.gen_range(0.5..2.0);
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(r, t)
    };
    let mu = draw();
    let w0 = draw();
    let ws: Vec<Complex64> = (0..c).map(|_| draw()).collect();
    move |v| match v {
        Var::Wmu => mu,
        Var::W0 => w0,
        Var::Wc(i) => ws[i as usize],
        _ => Complex64::new(f64::NAN, 0.0),
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Image of each generator under `psi . ev_q1`, compared with `s`, `L_0`
/// and `L_c^{+-1}` built from the corner table.
pub fn verify_match(d: &Diagram, points: usize, seed: u64) -> Result<MatchReport> {
    verify_match_with(d, &CornerTable::standard(), points, seed)
}

pub fn verify_match_with(d: &Diagram, table: &CornerTable, points: usize, seed: u64) -> Result<MatchReport> {
    d.require_base()?;
    let s = gluing::sqrt_s(d)?;
    let num = NumericGluing::new(d, table);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<_> = (0..points).map(|_| random_point(&mut rng, d.num_crossings())).collect();
    let mut gens = vec![];
    for op in all_operators(d) {
        let image = psi(&ev_q1(&op.formula)?)?;
        let (target, inverted) = match op.kind {
            OpKind::E => (s.clone(), false),
            OpKind::E0 => (gluing::loop_equation_by_winding_with(d, None, table), false),
            OpKind::Ec(c) => {
                let l = gluing::loop_equation_by_winding_with(d, Some(c), table);
                if d.crossings[c].j_is_over() {
                    (l, false)
                } else {
                    (l.inv()?, true)
                }
            }
        };
        let mut worst: f64 = 0.0;
        for pt in &pts {
            let lhs = image.eval_complex_principal(pt).unwrap_or(Complex64::new(f64::NAN, 0.0));
            let rhs = match op.kind {
                OpKind::E => {
                    // s is pinned by s^2 = 1/(w_lambda L_0) up to sign
                    let sv = s.eval_complex(pt)?;
                    let sq = 1.0 / (num.w_lambda(pt) * num.loop_value(None, pt));
                    worst = worst.max(rel(sv * sv, sq));
                    sv
                }
                OpKind::E0 => num.loop_value(None, pt),
                OpKind::Ec(c) => {
                    let l = num.loop_value(Some(c), pt);
                    if inverted {
                        1.0 / l
                    } else {
                        l
                    }
                }
            };
            let r = rel(lhs, rhs);
            worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
        }
        gens.push(GeneratorVerdict {
            generator: op.kind.to_string(),
            symbolic: image == target,
            numeric_residual: worst,
            image: image.to_string(),
            target: target.to_string(),
        });
    }
    let max_residual = gens.iter().map(|g| g.numeric_residual).fold(0.0, f64::max);
    Ok(MatchReport {
        symbolic_pass: gens.iter().all(|g| g.symbolic),
        numeric_pass: max_residual < NUMERIC_TOL,
        generators: gens,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::from_braid;

    #[test]
    fn ev_examples() {
        let x = FR::from_monomial(Monomial::var_pow2(Var::Q, 5)).mul(&om(&q().mul(&qn())));
        assert_eq!(ev_q1(&x).unwrap(), om(&qn()));
        let p = om(&q()).inv().unwrap();
        assert_eq!(ev_q1(&p), Err(Error::PoleAtOne));
        assert_eq!(psi(&p), Err(Error::ResidualQ));
    }

    #[test]
    fn psi_maps_arc_colors() {
        let d = from_braid(&[1, 1, 1]).unwrap();
        let qa = &color_monomials(&d)[0][0];
        let za = &gluing::crossing_arcs(&d)[0][0];
        let x = psi(&om(&qn().mul(&inv(qa)))).unwrap();
        assert_eq!(x, om(&Monomial::var(Var::Wmu).mul(&inv(za))));
    }

    #[test]
    fn trefoil_ratios_calibrate() {
        let d = from_braid(&[1, 1, 1]).unwrap();
        for mut op in all_operators(&d) {
            let samples = interior_samples(&d, op.kind, 5, 4);
            assert!(samples.len() >= 10, "{}: {}", op.kind, samples.len());
            let cal = calibrate_qstar(&d, &mut op, &samples).unwrap();
            assert_eq!(cal.samples, samples.len());
        }
    }

    #[test]
    fn trefoil_match() {
        let d = from_braid(&[1, 1, 1]).unwrap();
        let r = verify_match(&d, 10, 1).unwrap();
        r.check(true).unwrap();
    }
}
