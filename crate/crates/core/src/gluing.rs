//! Gluing equations of the octahedral decomposition of a knot diagram,
//! reduced to the variables `w_mu`, `w0` and one `w_c` per crossing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::diagram::{Diagram, Role};
use crate::error::{Error, Result};
use crate::shape::{shape_triple, FactoredRational as FR, Monomial, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Prime {
    One,
    Two,
}

/// Corner factor `w^(p) z_u^(p) z_l^(p)` for one kind of corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CornerRule {
    pub w: Prime,
    pub u: Prime,
    pub l: Prime,
}

/// Corner factors indexed by `[sign][corner]` with sign `0` positive and
/// corners `(uo,lo), (uo,li), (ui,li), (ui,lo)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CornerTable {
    pub rules: [[CornerRule; 4]; 2],
}

const fn rule(w: Prime, u: Prime, l: Prime) -> CornerRule {
    CornerRule { w, u, l }
}

impl CornerTable {
    pub fn standard() -> Self {
        use Prime::*;
        CornerTable {
            rules: [
                [rule(One, Two, Two), rule(Two, One, One), rule(One, Two, Two), rule(Two, One, One)],
                [rule(Two, One, One), rule(One, Two, Two), rule(Two, One, One), rule(One, Two, Two)],
            ],
        }
    }

    fn index(u: Role, l: Role) -> usize {
        match (u, l) {
            (Role::Uo, Role::Lo) => 0,
            (Role::Uo, Role::Li) => 1,
            (Role::Ui, Role::Li) => 2,
            (Role::Ui, Role::Lo) => 3,
            _ => unreachable!("corner between an upper and a lower ray"),
        }
    }
}

impl Default for CornerTable {
    fn default() -> Self {
        Self::standard()
    }
}

/// The five shapes of a crossing.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingShapes {
    pub w: Monomial,
    pub z_ui: Monomial,
    pub z_uo: Monomial,
    pub z_li: Monomial,
    pub z_lo: Monomial,
}

impl CrossingShapes {
    pub fn get(&self, r: Role) -> &Monomial {
        match r {
            Role::Ui => &self.z_ui,
            Role::Uo => &self.z_uo,
            Role::Li => &self.z_li,
            Role::Lo => &self.z_lo,
        }
    }
}

fn prime(m: &Monomial, p: Prime) -> FR {
    let (_, z1, z2) = shape_triple(m);
    match p {
        Prime::One => z1,
        Prime::Two => z2,
    }
}

fn mono(m: &Monomial) -> FR {
    FR::from_monomial(m.clone())
}

fn inv(m: &Monomial) -> Monomial {
    m.inv().expect("arc parameters are nonzero")
}

/// `1 - m`.
fn one_minus(m: &Monomial) -> FR {
    FR::binomial(m)
}

fn wc(c: usize) -> Monomial {
    Monomial::var(Var::Wc(c as u32))
}

fn wmu() -> Monomial {
    Monomial::var(Var::Wmu)
}

/// Arc parameters: `z[l-1]` belongs to arc `[l, l+1]`.
pub fn arc_parameters(d: &Diagram) -> Vec<Monomial> {
    let m = d.num_edges();
    let mut z = Vec::with_capacity(m);
    if m == 0 {
        return z;
    }
    z.push(Monomial::var(Var::W0));
    for l in 2..=m {
        let p = d.pass(l);
        let w = wc(p.crossing);
        let prev = &z[l - 2];
        z.push(if p.over { prev.mul(&w) } else { prev.mul(&inv(&w)) });
    }
    z
}

/// Arc parameters of the four rays `(a, a', b, b')` at each crossing.
pub fn crossing_arcs(d: &Diagram) -> Vec<[Monomial; 4]> {
    let z = arc_parameters(d);
    let mut edge_arc = vec![0usize; d.num_edges()];
    for (i, e) in d.arc_edges.iter().enumerate() {
        edge_arc[*e] = i;
    }
    d.crossings
        .iter()
        .map(|c| {
            [
                z[edge_arc[c.incoming_over]].clone(),
                z[edge_arc[c.outgoing_over]].clone(),
                z[edge_arc[c.incoming_under]].clone(),
                z[edge_arc[c.outgoing_under]].clone(),
            ]
        })
        .collect()
}

pub fn build_shapes(d: &Diagram) -> Vec<CrossingShapes> {
    crossing_arcs(d)
        .into_iter()
        .enumerate()
        .map(|(c, [a, ap, b, bp])| CrossingShapes {
            w: wc(c),
            z_ui: a.mul(&inv(&wmu())),
            z_li: inv(&b),
            z_uo: wmu().mul(&inv(&ap)),
            z_lo: bp,
        })
        .collect()
}

/// `w z_ui z_uo` and `w z_li z_lo` per crossing.
pub fn triangle_products(d: &Diagram) -> Vec<(Monomial, Monomial)> {
    build_shapes(d)
        .iter()
        .map(|s| (s.w.mul(&s.z_ui).mul(&s.z_uo), s.w.mul(&s.z_li).mul(&s.z_lo)))
        .collect()
}

fn corner_factor(d: &Diagram, shapes: &[CrossingShapes], table: &CornerTable, c: usize, p: usize) -> FR {
    let x = &d.crossings[c];
    let (r1, r2) = (x.role(p), x.role(p + 1));
    let (u, l) = match (r1, r2) {
        (Role::Ui | Role::Uo, _) => (r1, r2),
        _ => (r2, r1),
    };
    let sign = if x.sign > 0 { 0 } else { 1 };
    let rule = table.rules[sign][CornerTable::index(u, l)];
    let s = &shapes[c];
    prime(&s.w, rule.w)
        .mul(&prime(s.get(u), rule.u))
        .mul(&prime(s.get(l), rule.l))
}

/// Product of the four corner factors at each crossing.
pub fn corner_products(d: &Diagram, table: &CornerTable) -> Vec<FR> {
    let shapes = build_shapes(d);
    (0..d.num_crossings())
        .map(|c| {
            (0..4).fold(FR::one(), |acc, p| acc.mul(&corner_factor(d, &shapes, table, c, p)))
        })
        .collect()
}

pub fn big_region_equation(d: &Diagram, face: usize) -> FR {
    big_region_equation_with(d, face, &CornerTable::standard())
}

pub fn big_region_equation_with(d: &Diagram, face: usize, table: &CornerTable) -> FR {
    let shapes = build_shapes(d);
    d.faces[face]
        .corners
        .iter()
        .fold(FR::one(), |acc, &(c, p)| acc.mul(&corner_factor(d, &shapes, table, c, p)))
}

/// `prod_i r_i^{w(gamma, p_i)}`; `c = None` is the whole knot.
pub fn loop_equation_by_winding(d: &Diagram, c: Option<usize>) -> FR {
    loop_equation_by_winding_with(d, c, &CornerTable::standard())
}

pub fn loop_equation_by_winding_with(d: &Diagram, c: Option<usize>, table: &CornerTable) -> FR {
    let winding = d.loop_of_crossing(c).winding;
    let mut acc = FR::one();
    for (f, w) in winding.iter().enumerate() {
        if *w != 0 {
            let r = big_region_equation_with(d, f, table);
            acc = acc.mul(&r.pow(*w).expect("region factors are nonzero"));
        }
    }
    acc
}

/// Which closed form of the loop equation to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LoopForm {
    /// Monomials `z_b^{u-}/z_b'^{u+}` and the crossing factor `K_c`.
    Plain,
    /// Symmetrized half-power monomials and `K_c'`.
    Symmetric,
}

/// `(1 - w_mu/z_a') / (1 - w_mu/z_a)` and `(1 - z_b) / (1 - z_b')`.
fn over_ratio(a: &Monomial, ap: &Monomial) -> FR {
    one_minus(&wmu().mul(&inv(ap)))
        .div(&one_minus(&wmu().mul(&inv(a))))
        .expect("nonzero")
}

fn under_ratio(b: &Monomial, bp: &Monomial) -> FR {
    one_minus(b).div(&one_minus(bp)).expect("nonzero")
}

fn half(m: &Monomial, e2: i64) -> FR {
    FR::from_monomial(m.pow2(e2).expect("arc monomials have unit coefficient"))
}

pub fn loop_equation_closed_form(d: &Diagram, c: Option<usize>) -> FR {
    loop_equation_closed_form_as(d, c, LoopForm::Plain)
}

pub fn loop_equation_closed_form_as(d: &Diagram, c: Option<usize>, form: LoopForm) -> FR {
    let arcs = crossing_arcs(d);
    let Some(c) = c else {
        return loop_zero(d, &arcs);
    };
    let x = &d.crossings[c];
    let [a, ap, b, bp] = &arcs[c];
    let eps = x.sign as i64;
    let w = wc(c);
    let j_over = x.j_is_over();
    let kc = match (j_over, eps > 0) {
        (true, true) => {
            let m = match form {
                LoopForm::Plain => mono(&inv(bp)),
                LoopForm::Symmetric => half(&a.mul(bp), -1),
            };
            m.mul(&one_minus(&wmu().mul(&inv(ap))))
                .mul(&one_minus(b))
                .div(&one_minus(&w))
        }
        (true, false) => {
            let m = match form {
                LoopForm::Plain => mono(ap),
                LoopForm::Symmetric => half(&ap.mul(b), 1),
            };
            m.mul(&mono(&inv(&wmu()).neg()))
                .mul(&one_minus(&wmu().mul(&inv(ap))))
                .mul(&one_minus(b))
                .div(&one_minus(&w))
        }
        (false, true) => {
            let m = match form {
                LoopForm::Plain => mono(&inv(ap)),
                LoopForm::Symmetric => half(&ap.mul(b), -1),
            };
            m.mul(&mono(&wmu()))
                .mul(&one_minus(&w))
                .div(&one_minus(&wmu().mul(&inv(a))).mul(&one_minus(bp)))
        }
        (false, false) => {
            let m = match form {
                LoopForm::Plain => mono(bp),
                LoopForm::Symmetric => half(&a.mul(bp), 1),
            };
            m.neg()
                .mul(&one_minus(&w))
                .div(&one_minus(&wmu().mul(&inv(a))).mul(&one_minus(bp)))
        }
    }
    .expect("nonzero");
    let (j, jp) = x.labels();
    let mut acc = kc;
    for l in (j + 1)..jp {
        let p = d.pass(l);
        let y = &d.crossings[p.crossing];
        let e = y.sign as i64;
        let [a, ap, b, bp] = &arcs[p.crossing];
        let (um, up) = ((1 - e) / 2, (1 + e) / 2);
        let term = if p.over {
            let m = match form {
                LoopForm::Plain => mono(&b.pow(um).mul(&bp.pow(-up))),
                LoopForm::Symmetric => half(&wmu().mul(&inv(&b.mul(bp))), e),
            };
            m.mul(&over_ratio(a, ap))
        } else {
            let m = match form {
                LoopForm::Plain => mono(&wmu().pow(e).mul(&a.pow(um)).mul(&ap.pow(-up))),
                LoopForm::Symmetric => half(&wmu().mul(&inv(&a.mul(ap))), e),
            };
            m.mul(&under_ratio(b, bp))
        };
        acc = acc.mul(&term);
    }
    acc
}

fn loop_zero(d: &Diagram, arcs: &[[Monomial; 4]]) -> FR {
    let mut acc = FR::one();
    for (c, x) in d.crossings.iter().enumerate() {
        let [a, ap, b, bp] = &arcs[c];
        let m = wmu().mul(&inv(&a.mul(b))).pow(x.sign as i64);
        acc = acc
            .mul(&mono(&m))
            .mul(&over_ratio(a, ap))
            .mul(&under_ratio(b, bp));
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct Longitude {
    /// `w_lambda` with zero winding number.
    pub w_lambda: FR,
    /// Blackboard-framed holonomy from the shingle segments.
    pub blackboard: FR,
    /// `blackboard == w_lambda * w_mu^{wr}`.
    pub agree: bool,
}

pub fn holonomy_longitude(d: &Diagram) -> Longitude {
    let arcs = crossing_arcs(d);
    let shapes = build_shapes(d);
    let wr = d.writhe();
    let mut w_lambda = mono(&wmu().pow(-wr));
    let mut blackboard = FR::one();
    for c in 0..d.num_crossings() {
        let [a, ap, b, bp] = &arcs[c];
        w_lambda = w_lambda
            .mul(&mono(&wc(c)))
            .mul(&over_ratio(a, ap))
            .mul(&under_ratio(b, bp).inv().expect("nonzero"));
        let s = &shapes[c];
        let num = prime(&s.z_uo, Prime::Two).mul(&prime(&s.z_ui, Prime::One));
        let den = prime(&s.z_lo, Prime::One).mul(&prime(&s.z_li, Prime::Two));
        blackboard = blackboard.mul(&num.div(&den).expect("nonzero"));
    }
    let agree = blackboard == w_lambda.mul(&mono(&wmu().pow(wr)));
    Longitude { w_lambda, blackboard, agree }
}

/// The square root `s` of `1 / (w_lambda L_0)`.
pub fn sqrt_s(d: &Diagram) -> Result<FR> {
    let arcs = crossing_arcs(d);
    let mut s = FR::one();
    for (c, x) in d.crossings.iter().enumerate() {
        let [a, ap, b, _] = &arcs[c];
        let r = over_ratio(a, ap).inv().expect("nonzero");
        s = s
            .mul(&r)
            .mul(&half(&wc(c), -1))
            .mul(&half(&a.mul(b), x.sign as i64));
    }
    if !s.is_integral() {
        return Err(Error::NonIntegralExponent(s.to_string()));
    }
    Ok(s)
}

/// `j' - j` per crossing.
pub fn label_spans(d: &Diagram) -> Vec<usize> {
    d.crossings
        .iter()
        .map(|c| {
            let (j, jp) = c.labels();
            jp - j
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisReport {
    /// Rows `K, gamma_0, gamma_1, ...`; columns the bounded faces.
    pub matrix: Vec<Vec<i64>>,
    pub faces: Vec<usize>,
    pub rank: usize,
    pub determinant: String,
    pub unimodular: bool,
}

/// Exact rank and determinant by fraction-free elimination on rationals.
fn rank_det(m: &[Vec<i64>]) -> (usize, BigRational) {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(BigInt::from(*x))).collect())
        .collect();
    let mut det = BigRational::one();
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            det = BigRational::zero();
            continue;
        };
        if piv != rank {
            a.swap(piv, rank);
            det = -det;
        }
        det *= &a[rank][col];
        for r in (rank + 1)..rows {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[rank][col];
            for k in col..cols {
                let t = &f * &a[rank][k];
                a[r][k] -= t;
            }
        }
        rank += 1;
    }
    if rank < rows.min(cols) || rows != cols {
        det = BigRational::zero();
    }
    (rank, det)
}

pub fn basis_unimodularity(d: &Diagram) -> BasisReport {
    let faces: Vec<usize> = (0..d.faces.len()).filter(|f| *f != d.outer_face).collect();
    let loops: Vec<Option<usize>> = std::iter::once(None)
        .chain((0..d.num_crossings()).map(Some))
        .collect();
    let matrix: Vec<Vec<i64>> = loops
        .iter()
        .map(|c| {
            let w = d.loop_of_crossing(*c).winding;
            faces.iter().map(|f| w[*f]).collect()
        })
        .collect();
    let (rank, det) = rank_det(&matrix);
    let unimodular = det.abs().is_one();
    BasisReport {
        matrix,
        faces,
        rank,
        determinant: det.to_string(),
        unimodular,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShingleEntry {
    /// `true` for an overarc (upper shingle).
    pub upper: bool,
    pub start: usize,
    pub end: usize,
    /// Crossings passed in between.
    pub through: Vec<usize>,
    /// The raw region product equals 1.
    pub raw: bool,
    /// Both reduced forms hold.
    pub reduced: bool,
}

/// Checks the shingle equations of every overarc and underarc.
pub fn shingle_check(d: &Diagram) -> Vec<ShingleEntry> {
    let shapes = build_shapes(d);
    let m = d.num_edges();
    let mut out = vec![];
    for upper in [true, false] {
        // an overarc starts after an underpass and ends at the next one
        for l in 1..=m {
            if d.pass(l).over == upper {
                continue;
            }
            let start = d.pass(l).crossing;
            let mut through = vec![];
            let mut k = l % m + 1;
            while d.pass(k).over == upper {
                through.push(d.pass(k).crossing);
                k = k % m + 1;
            }
            let end = d.pass(k).crossing;
            let (s1, sn) = (&shapes[start], &shapes[end]);
            let pw = through.iter().fold(Monomial::one(), |acc, c| acc.mul(&wc(*c)));
            let raw_prod = if upper {
                let mut acc = mono(&s1.z_lo).mul(&mono(&sn.z_li));
                for c in &through {
                    let s = &shapes[*c];
                    for (z, p) in [(&s.z_ui, Prime::One), (&s.z_uo, Prime::Two), (&s.z_uo, Prime::One), (&s.z_ui, Prime::Two)] {
                        acc = acc.mul(&prime(z, p));
                    }
                }
                acc
            } else {
                let mut acc = mono(&s1.z_uo).mul(&mono(&sn.z_ui));
                for c in &through {
                    let s = &shapes[*c];
                    for (z, p) in [(&s.z_li, Prime::Two), (&s.z_lo, Prime::One), (&s.z_lo, Prime::Two), (&s.z_li, Prime::One)] {
                        acc = acc.mul(&prime(z, p));
                    }
                }
                acc
            };
            let reduced = if upper {
                sn.z_lo == s1.z_lo.mul(&inv(&sn.w)).mul(&pw)
                    && sn.z_li == s1.z_li.mul(&s1.w).mul(&inv(&pw))
            } else {
                sn.z_ui == s1.z_ui.mul(&s1.w).mul(&inv(&pw))
                    && sn.z_uo == s1.z_uo.mul(&inv(&sn.w)).mul(&pw)
            };
            out.push(ShingleEntry {
                upper,
                start,
                end,
                through,
                raw: raw_prod.is_one(),
                reduced,
            });
        }
    }
    out
}

/// All symbolic objects of the reduced gluing system.
#[derive(Clone, Debug)]
pub struct GluingSystem {
    pub big_region: Vec<FR>,
    pub loops: Vec<FR>,
    pub loop_zero: FR,
    pub w_lambda: FR,
    pub sqrt_s: FR,
}

impl GluingSystem {
    pub fn build(d: &Diagram) -> Result<Self> {
        d.require_base()?;
        Ok(GluingSystem {
            big_region: (0..d.faces.len()).map(|f| big_region_equation(d, f)).collect(),
            loops: (0..d.num_crossings())
                .map(|c| loop_equation_closed_form(d, Some(c)))
                .collect(),
            loop_zero: loop_equation_closed_form(d, None),
            w_lambda: holonomy_longitude(d).w_lambda,
            sqrt_s: sqrt_s(d)?,
        })
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut v = vec![Var::Wmu, Var::W0];
        v.extend((0..self.loops.len()).map(|c| Var::Wc(c as u32)));
        v
    }

    pub fn to_json(&self) -> Value {
        json!({
            "variables": self.variables().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "L0": self.loop_zero.to_json(),
            "L": self.loops.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
            "w_lambda": self.w_lambda.to_json(),
            "s": self.sqrt_s.to_json(),
            "text": {
                "L0": self.loop_zero.to_string(),
                "L": self.loops.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "w_lambda": self.w_lambda.to_string(),
                "s": self.sqrt_s.to_string(),
            },
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Runs every identity check of the gluing construction.
pub fn identity_report(d: &Diagram, table: &CornerTable) -> Vec<Check> {
    let mut out = vec![];
    let mut push = |name: &str, pass: bool, detail: String| {
        out.push(Check { name: name.into(), pass, detail })
    };
    if let Err(e) = d.require_base() {
        push("base point", false, e.to_string());
        return out;
    }
    let tri = triangle_products(d);
    push(
        "triangle relations",
        tri.iter().all(|(u, l)| u.is_one() && l.is_one()),
        format!("{} crossings", tri.len()),
    );
    let cp = corner_products(d, table);
    push(
        "corner products",
        cp.iter().all(|x| x.is_one()),
        cp.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
    );
    let sh = shingle_check(d);
    push(
        "shingle equations",
        sh.iter().all(|s| s.raw && s.reduced),
        format!("{} shingles", sh.len()),
    );
    let mut bad = vec![];
    for c in (0..d.num_crossings()).map(Some).chain([None]) {
        let by_winding = loop_equation_by_winding_with(d, c, table);
        let plain = loop_equation_closed_form_as(d, c, LoopForm::Plain);
        let sym = loop_equation_closed_form_as(d, c, LoopForm::Symmetric);
        if by_winding != plain || plain != sym {
            bad.push(match c {
                Some(c) => format!("L[{}]", c),
                None => "L0".into(),
            });
        }
    }
    push("loop equations", bad.is_empty(), bad.join(", "));
    let lemma = (0..d.num_crossings()).all(|c| d.check_writhe_linking_lemma(c).holds);
    push("writhe/linking lemma", lemma, String::new());
    let lon = holonomy_longitude(d);
    push("longitude forms", lon.agree, lon.w_lambda.to_string());
    let spans = label_spans(d);
    push(
        "odd label spans",
        spans.iter().all(|s| s % 2 == 1),
        format!("{:?}", spans),
    );
    match sqrt_s(d) {
        Ok(s) => {
            let l0 = loop_equation_by_winding_with(d, None, table);
            let prod = s.mul(&s).mul(&lon.w_lambda).mul(&l0);
            push("square root", prod.is_one(), prod.to_string());
        }
        Err(e) => push("square root", false, e.to_string()),
    }
    let basis = basis_unimodularity(d);
    push("basis unimodular", basis.unimodular, basis.determinant.clone());
    out
}
