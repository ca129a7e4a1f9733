//! R-matrix state sum for the colored Jones polynomial, plus a Kauffman
//! bracket oracle for `n = 1`.
//!
//! Normalization: `J(n) = v^n * sum_k w(n, k)` with `v = q^{1/2}`, so that
//! `J(0) = 1` and the unknot gives `(1 - q^{n+1}) / (1 - q)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::diagram::Diagram;
use crate::error::{Error, Result};
use crate::fp::{self, Field};
use crate::qlaurent::{one_minus_q, qbinomial, LaurentPoly};

/// Sign `s` in the extremum weight `v^{s (n - 2r)}` of a counterclockwise
/// full turn of an arc colored `r`.
pub const EXTREMUM_SIGN: i64 = -1;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Coloring {
    pub k0: i64,
    /// Shift `k_c` per crossing.
    pub kc: Vec<i64>,
    /// Color of arc `[l, l+1]` at index `l - 1`.
    pub arc_colors: Vec<i64>,
}

/// The colors `(a, a', b, b')` around a crossing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalColors {
    pub a: i64,
    pub ap: i64,
    pub b: i64,
    pub bp: i64,
}

impl LocalColors {
    pub fn k(&self) -> i64 {
        self.ap - self.a
    }
}

/// Per-diagram data used by the summand: arc index of each edge and the
/// arc indices around each crossing.
#[derive(Clone, Debug)]
pub struct Layout {
    pub n_arcs: usize,
    /// `(a, a', b, b')` arc indices per crossing.
    pub local: Vec<[usize; 4]>,
    pub signs: Vec<i64>,
    /// Full turns per arc index.
    pub turns: Vec<i64>,
    /// For each label `l` (index `l-1`): crossing and whether over.
    pub passes: Vec<(usize, bool)>,
}

impl Layout {
    pub fn new(d: &Diagram) -> Self {
        let m = d.num_edges();
        let mut edge_arc = vec![0usize; m];
        for (i, e) in d.arc_edges.iter().enumerate() {
            edge_arc[*e] = i;
        }
        let local = d
            .crossings
            .iter()
            .map(|c| {
                [
                    edge_arc[c.incoming_over],
                    edge_arc[c.outgoing_over],
                    edge_arc[c.incoming_under],
                    edge_arc[c.outgoing_under],
                ]
            })
            .collect();
        let turns = (0..m).map(|i| d.turns[d.arc_edges[i]]).collect();
        Layout {
            n_arcs: m,
            local,
            signs: d.crossings.iter().map(|c| c.sign as i64).collect(),
            turns,
            passes: d.passes.iter().map(|p| (p.crossing, p.over)).collect(),
        }
    }

    pub fn colors(&self, arc_colors: &[i64], c: usize) -> LocalColors {
        let [a, ap, b, bp] = self.local[c];
        LocalColors {
            a: arc_colors[a],
            ap: arc_colors[ap],
            b: arc_colors[b],
            bp: arc_colors[bp],
        }
    }

    /// Arc colors from `(k0, k_c)`; any integers allowed.
    pub fn arc_colors(&self, k0: i64, kc: &[i64]) -> Vec<i64> {
        let mut col = vec![0; self.n_arcs];
        col[0] = k0;
        for l in 1..self.n_arcs {
            let (c, over) = self.passes[l];
            col[l] = col[l - 1] + if over { kc[c] } else { -kc[c] };
        }
        col
    }
}

/// Lazy enumeration of admissible colorings (all arc colors in `[0, n]`,
/// all `k_c >= 0`), pruning at every pass.
pub struct ColoringIter {
    layout: Layout,
    n: i64,
    /// Whether the pass at label index `t` is the first visit of its crossing
    /// during the sweep `t = 1 .. 2c-1`.
    first: Vec<bool>,
    kc: Vec<i64>,
    col: Vec<i64>,
    /// Current value and upper bound of the choice made at each level.
    stack: Vec<(i64, i64)>,
    started: bool,
    done: bool,
}

impl ColoringIter {
    fn new(d: &Diagram, n: i64) -> Self {
        let layout = Layout::new(d);
        let m = layout.n_arcs;
        let mut seen = vec![false; d.num_crossings()];
        let mut first = vec![false; m];
        for t in 1..m {
            let (c, _) = layout.passes[t];
            if !seen[c] {
                seen[c] = true;
                first[t] = true;
            }
        }
        ColoringIter {
            kc: vec![0; d.num_crossings()],
            col: vec![0; m],
            layout,
            n,
            first,
            stack: vec![],
            started: false,
            done: n < 0,
        }
    }

    /// Range of choices at level `t` given the current prefix; for forced
    /// levels the range is a single value or empty.
    fn range(&self, t: usize) -> (i64, i64) {
        if t == 0 {
            return (0, self.n);
        }
        let (c, over) = self.layout.passes[t];
        let prev = self.col[t - 1];
        if self.first[t] {
            if over {
                (0, self.n - prev)
            } else {
                (0, prev)
            }
        } else {
            let v = prev + if over { self.kc[c] } else { -self.kc[c] };
            if (0..=self.n).contains(&v) {
                (v, v)
            } else {
                (1, 0)
            }
        }
    }

    fn apply(&mut self, t: usize, x: i64) {
        if t == 0 {
            self.col[0] = x;
            return;
        }
        let (c, over) = self.layout.passes[t];
        if self.first[t] {
            self.kc[c] = x;
            self.col[t] = self.col[t - 1] + if over { x } else { -x };
        } else {
            self.col[t] = x;
        }
    }

    fn descend(&mut self) -> bool {
        let m = self.layout.n_arcs;
        while self.stack.len() < m {
            let t = self.stack.len();
            let (lo, hi) = self.range(t);
            if lo > hi {
                return false;
            }
            self.stack.push((lo, hi));
            self.apply(t, lo);
        }
        true
    }

    fn advance(&mut self) -> bool {
        while let Some((x, hi)) = self.stack.pop() {
            if x < hi {
                let t = self.stack.len();
                self.stack.push((x + 1, hi));
                self.apply(t, x + 1);
                if self.descend() {
                    return true;
                }
            }
        }
        false
    }
}

impl Iterator for ColoringIter {
    type Item = Coloring;
    fn next(&mut self) -> Option<Coloring> {
        if self.done {
            return None;
        }
        let ok = if !self.started {
            self.started = true;
            self.descend() || self.advance()
        } else {
            self.advance()
        };
        if !ok {
            self.done = true;
            return None;
        }
        Some(Coloring {
            k0: self.col[0],
            kc: self.kc.clone(),
            arc_colors: self.col.clone(),
        })
    }
}

pub fn enumerate_colorings(d: &Diagram, n: i64) -> ColoringIter {
    ColoringIter::new(d, n)
}

/// Builds a coloring from `(k0, k_c)` without admissibility checks.
pub fn coloring_from(d: &Diagram, k0: i64, kc: &[i64]) -> Coloring {
    let layout = Layout::new(d);
    Coloring {
        k0,
        kc: kc.to_vec(),
        arc_colors: layout.arc_colors(k0, kc),
    }
}

/// Exponent of `v` in the crossing monomial, and the sign.
pub fn crossing_monomial(sign: i64, n: i64, lc: LocalColors) -> (i64, bool) {
    let LocalColors { a, ap, b, bp } = lc;
    let k = ap - a;
    if sign > 0 {
        (n + n * a + n * bp - ap * bp - a * b, false)
    } else {
        (-n - n * ap - n * b + ap * b + a * bp - k, k.rem_euclid(2) == 1)
    }
}

/// `(q)_{n-a} / (q)_{n-a'}` under the extended conventions, for `a' >= a`.
fn over_factor(n: i64, a: i64, ap: i64) -> LaurentPoly {
    if n - ap < 0 || n - a < 0 || ap < a {
        return LaurentPoly::zero();
    }
    let mut p = LaurentPoly::one();
    for i in (n - ap + 1)..=(n - a) {
        p = &p * &one_minus_q(i);
    }
    p
}

/// Full weight of a crossing with sign `sign` and local colors.
pub fn crossing_weight_colors(sign: i64, n: i64, lc: LocalColors) -> LaurentPoly {
    let k = lc.k();
    if k != lc.b - lc.bp {
        return LaurentPoly::zero();
    }
    let big = &over_factor(n, lc.a, lc.ap) * &qbinomial(lc.b, k);
    if big.is_zero() {
        return big;
    }
    let (e, neg) = crossing_monomial(sign, n, lc);
    let m = big.shift(e);
    if neg {
        -m
    } else {
        m
    }
}

pub fn crossing_weight(d: &Diagram, c: usize, coloring: &Coloring, n: i64) -> LaurentPoly {
    let layout = Layout::new(d);
    crossing_weight_colors(
        d.crossings[c].sign as i64,
        n,
        layout.colors(&coloring.arc_colors, c),
    )
}

/// Exponent of `v` contributed by extrema.
pub fn extremum_exponent(layout: &Layout, n: i64, arc_colors: &[i64]) -> i64 {
    (0..layout.n_arcs)
        .map(|l| EXTREMUM_SIGN * layout.turns[l] * (n - 2 * arc_colors[l]))
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummandValue {
    pub value: LaurentPoly,
    pub n: i64,
    pub coloring: Coloring,
}

pub fn summand_with(layout: &Layout, n: i64, coloring: &Coloring) -> LaurentPoly {
    let mut acc = LaurentPoly::v_pow(extremum_exponent(layout, n, &coloring.arc_colors));
    for c in 0..layout.local.len() {
        let w = crossing_weight_colors(layout.signs[c], n, layout.colors(&coloring.arc_colors, c));
        if w.is_zero() {
            return w;
        }
        acc = &acc * &w;
    }
    acc
}

pub fn summand(d: &Diagram, n: i64, coloring: &Coloring) -> SummandValue {
    let layout = Layout::new(d);
    SummandValue {
        value: summand_with(&layout, n, coloring),
        n,
        coloring: coloring.clone(),
    }
}

/// `(1 - q^{n+1}) / (1 - q)`.
pub fn unknot_jones(n: i64) -> LaurentPoly {
    LaurentPoly::from_q_terms((0..=n).map(|i| (i, 1)))
}

fn check_integral(p: &LaurentPoly) -> Result<()> {
    if !p.is_integral() {
        return Err(Error::IntegralityViolation(p.to_string()));
    }
    Ok(())
}

/// Exact state sum over every admissible coloring with rational arithmetic.
pub fn colored_jones_exact(d: &Diagram, n: i64) -> Result<LaurentPoly> {
    if n < 0 {
        return Err(Error::BadInput("n must be >= 0".into()));
    }
    if d.num_crossings() == 0 {
        return Ok(unknot_jones(n));
    }
    let layout = Layout::new(d);
    let mut acc = LaurentPoly::zero();
    for k in enumerate_colorings(d, n) {
        acc += &summand_with(&layout, n, &k);
    }
    let j = acc.shift(n);
    check_integral(&j)?;
    Ok(j)
}

/// Compiled state sum: per coloring a sign, a `v`-exponent and two table
/// indices per crossing (pochhammer ratio and q-binomial).
struct Compiled {
    n: usize,
    neg: Vec<bool>,
    vexp: Vec<i64>,
    /// `2c` indices per term, interleaved `ratio, binom`.
    idx: Vec<u32>,
    c: usize,
    lo: i64,
    hi: i64,
}

fn compile_terms(d: &Diagram, n: i64) -> Compiled {
    let layout = Layout::new(d);
    let c = layout.local.len();
    let w = (n + 1) as u32;
    let mut out = Compiled {
        n: n as usize,
        neg: vec![],
        vexp: vec![],
        idx: vec![],
        c,
        lo: i64::MAX,
        hi: i64::MIN,
    };
    let tri = |x: i64| x * (x + 1) / 2;
    for k in enumerate_colorings(d, n) {
        let mut vexp = extremum_exponent(&layout, n, &k.arc_colors);
        let mut neg = false;
        let mut deg = 0i64;
        for x in 0..c {
            let lc = layout.colors(&k.arc_colors, x);
            let (e, s) = crossing_monomial(layout.signs[x], n, lc);
            vexp += e;
            neg ^= s;
            let kk = lc.k();
            out.idx.push((n - lc.a) as u32 * w + (n - lc.ap) as u32);
            out.idx.push(lc.b as u32 * w + kk as u32);
            deg += tri(n - lc.a) - tri(n - lc.ap) + kk * (lc.b - kk);
        }
        out.lo = out.lo.min(vexp);
        out.hi = out.hi.max(vexp + 2 * deg);
        out.neg.push(neg);
        out.vexp.push(vexp);
    }
    out
}

const CHUNK: usize = 64;

impl Compiled {
    /// `sum_k w(n, k) * v^{-e0}` at each `v` modulo `f.p`.
    fn eval(&self, f: &Field, vs: &[u64], e0: i64) -> Vec<u64> {
        let mut out = Vec::with_capacity(vs.len());
        for chunk in vs.chunks(CHUNK) {
            out.extend(self.eval_chunk(f, chunk, e0));
        }
        out
    }

    fn eval_chunk(&self, f: &Field, vs: &[u64], e0: i64) -> Vec<u64> {
        let m = vs.len();
        let n = self.n;
        let w = n + 1;
        // ratio[(x, y)] = (q)_x / (q)_y, binom[(b, k)] = [b choose k]
        let mut ratio = vec![0u64; w * w * m];
        let mut binom = vec![0u64; w * w * m];
        for (i, &v) in vs.iter().enumerate() {
            let q = f.mul(v, v);
            let mut fact = vec![1u64; w];
            let mut qi = 1;
            for j in 1..w {
                qi = f.mul(qi, q);
                fact[j] = f.mul(fact[j - 1], f.sub(1, qi));
            }
            let ifact: Vec<u64> = fact.iter().map(|x| f.inv(*x)).collect();
            for x in 0..w {
                for y in 0..w {
                    ratio[(x * w + y) * m + i] = f.mul(fact[x], ifact[y]);
                    if y <= x {
                        binom[(x * w + y) * m + i] = f.mul(fact[x], f.mul(ifact[y], ifact[x - y]));
                    }
                }
            }
        }
        let span = (self.hi - self.lo + 1) as usize;
        let mut vp = vec![0u64; span * m];
        for (i, &v) in vs.iter().enumerate() {
            let mut x = f.pow_i(v, self.lo - e0);
            for e in 0..span {
                vp[e * m + i] = x;
                x = f.mul(x, v);
            }
        }
        let mut acc = vec![0u64; m];
        let mut tmp = vec![0u64; m];
        for t in 0..self.vexp.len() {
            let e = (self.vexp[t] - self.lo) as usize;
            tmp.copy_from_slice(&vp[e * m..(e + 1) * m]);
            for x in 0..self.c {
                let r = self.idx[2 * self.c * t + 2 * x] as usize * m;
                let b = self.idx[2 * self.c * t + 2 * x + 1] as usize * m;
                for i in 0..m {
                    tmp[i] = f.mul(tmp[i], f.mul(ratio[r + i], binom[b + i]));
                }
            }
            if self.neg[t] {
                for i in 0..m {
                    acc[i] = f.sub(acc[i], tmp[i]);
                }
            } else {
                for i in 0..m {
                    acc[i] = f.add(acc[i], tmp[i]);
                }
            }
        }
        acc
    }
}

/// Colored Jones polynomial by evaluation/interpolation modulo primes with
/// Chinese remaindering; self-checks at an extra point and at `-v`.
pub fn colored_jones(d: &Diagram, n: i64) -> Result<LaurentPoly> {
    if n < 0 {
        return Err(Error::BadInput("n must be >= 0".into()));
    }
    if d.num_crossings() == 0 {
        return Ok(unknot_jones(n));
    }
    let comp = compile_terms(d, n);
    if comp.vexp.is_empty() {
        return Ok(LaurentPoly::zero());
    }
    // sum * v^{-e0} = P(q), deg P <= dq
    let e0 = comp.lo - (comp.lo - n).rem_euclid(2);
    let dq = ((comp.hi - e0) / 2) as usize;
    let npts = dq + 1;
    let mut residues: Vec<Vec<u64>> = vec![];
    let mut moduli: Vec<u64> = vec![];
    let mut prev: Option<Vec<BigInt>> = None;
    for p in fp::primes().take(8) {
        let f = Field::new(p);
        let mut vs = vec![];
        let mut qs = vec![];
        let mut g = 3u64;
        while vs.len() < npts + 1 {
            g = f.mul(g, 5);
            let q = f.mul(g, g);
            // avoid low-order roots of unity (they kill factorials)
            let mut ok = q != 0;
            let mut qi = 1;
            for _ in 1..=(n + 1) {
                qi = f.mul(qi, q);
                if qi == 1 {
                    ok = false;
                    break;
                }
            }
            if !ok || qs.contains(&q) {
                continue;
            }
            vs.push(g);
            qs.push(q);
        }
        vs.push(f.neg(vs[0]));
        let ys = comp.eval(&f, &vs, e0);
        if ys[npts + 1] != ys[0] {
            return Err(Error::IntegralityViolation(
                "odd powers of q^(1/2) in the state sum".into(),
            ));
        }
        let coeffs = f.interpolate(&qs[..npts], &ys[..npts]);
        if f.eval_poly(&coeffs, qs[npts]) != ys[npts] {
            return Err(Error::IntegralityViolation("degree bound violated".into()));
        }
        residues.push(coeffs);
        moduli.push(p);
        let cur: Vec<BigInt> = (0..npts)
            .map(|i| {
                let r: Vec<u64> = residues.iter().map(|c| c[i]).collect();
                fp::crt(&r, &moduli)
            })
            .collect();
        let small = cur
            .iter()
            .all(|c| c.abs().to_f64().unwrap_or(f64::MAX) < 2f64.powi(40));
        let stable = prev.as_ref() == Some(&cur);
        if small || stable {
            let mut j = LaurentPoly::zero();
            for (i, c) in cur.into_iter().enumerate() {
                j.add_term(e0 + 2 * i as i64 + n, BigRational::from_integer(c));
            }
            return Ok(j);
        }
        prev = Some(cur);
    }
    Err(Error::IntegralityViolation("coefficients did not stabilize".into()))
}

/// Jones polynomial from the Kauffman bracket, normalized as the relation
/// `J(1, q^{-1}) / J_unknot(1, q^{-1})` predicts (that is, `A = q^{1/4}`).
pub fn kauffman_jones(d: &Diagram) -> LaurentPoly {
    let nc = d.num_crossings();
    if nc == 0 {
        return LaurentPoly::one();
    }
    let ne = d.num_edges();
    // bracket as a Laurent polynomial in A
    let mut bracket = LaurentPoly::zero();
    let delta = LaurentPoly::from_int_terms([(2, -1), (-2, -1)]);
    let mut dpow = vec![LaurentPoly::one()];
    for i in 1..=(nc + 1) {
        dpow.push(&dpow[i - 1] * &delta);
    }
    for state in 0u64..(1u64 << nc) {
        let mut uf: Vec<usize> = (0..ne).collect();
        fn find(uf: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while uf[r] != r {
                r = uf[r];
            }
            let mut y = x;
            while uf[y] != r {
                let nx = uf[y];
                uf[y] = r;
                y = nx;
            }
            r
        }
        let mut a_count = 0i64;
        for (i, c) in d.crossings.iter().enumerate() {
            let [x0, x1, x2, x3] = c.slots;
            let pairs = if state >> i & 1 == 0 {
                a_count += 1;
                [(x0, x1), (x2, x3)]
            } else {
                a_count -= 1;
                [(x0, x3), (x1, x2)]
            };
            for (x, y) in pairs {
                let (rx, ry) = (find(&mut uf, x), find(&mut uf, y));
                uf[rx] = ry;
            }
        }
        let loops = (0..ne).filter(|x| find(&mut uf, *x) == *x).count();
        bracket += &dpow[loops - 1].shift(a_count);
    }
    let w = d.writhe();
    // (-A^3)^{-w}
    let pre = LaurentPoly::monomial(
        BigRational::from_integer(if w.rem_euclid(2) == 0 { BigInt::one() } else { -BigInt::one() }),
        -3 * w,
    );
    let v_a = &pre * &bracket;
    // A = q^{1/4} = v^{1/2}
    let mut out = LaurentPoly::zero();
    for (e, c) in v_a.terms() {
        assert!(e % 4 == 0, "Jones polynomial of a knot has integral exponents");
        out.add_term(e / 2, c.clone());
    }
    out
}

/// `J(1, q^{-1}) / J_unknot(1, q^{-1})`, or `None` if not a polynomial.
pub fn jones_from_colored(j1: &LaurentPoly) -> Option<LaurentPoly> {
    j1.invert_variable().div_exact(&unknot_jones(1).invert_variable())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{add_kink, from_braid, parse_pd, Kink};

    fn q(terms: &[(i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_q_terms(terms.iter().copied())
    }

    #[test]
    fn unknot_closed_form() {
        assert_eq!(unknot_jones(3), q(&[(0, 1), (1, 1), (2, 1), (3, 1)]));
        assert!(colored_jones(&Diagram::unknot(), 0).unwrap().is_one());
    }

    #[test]
    fn trivial_monomial_weight() {
        let lc = LocalColors { a: 1, ap: 1, b: 2, bp: 2 };
        let w = crossing_weight_colors(1, 3, lc);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn negative_crossing_sign() {
        let lc = LocalColors { a: 0, ap: 1, b: 1, bp: 0 };
        let w = crossing_weight_colors(-1, 2, lc);
        // (1 - q^2) * [1 choose 1] with sign (-1)^1
        let lead = w.terms().next().unwrap().1.clone();
        assert!(lead.is_negative());
    }

    #[test]
    fn positive_crossing_by_hand() {
        // n=2, a=0, a'=1, b=1, b'=0: w_> = (1-q^2) * 1
        let lc = LocalColors { a: 0, ap: 1, b: 1, bp: 0 };
        let w = crossing_weight_colors(1, 2, lc);
        let (e, _) = crossing_monomial(1, 2, lc);
        assert_eq!(w, q(&[(0, 1), (2, -1)]).shift(e));
    }

    #[test]
    fn colorings_match_brute_force() {
        for (word, n) in [(vec![1, 1, 1], 1i64), (vec![1, -2, 1, -2], 2)] {
            let d = from_braid(&word).unwrap();
            let layout = Layout::new(&d);
            let nc = d.num_crossings();
            let mut brute = 0;
            let total = (n + 1).pow(nc as u32 + 1);
            for code in 0..total {
                let mut x = code;
                let k0 = x % (n + 1);
                x /= n + 1;
                let kc: Vec<i64> = (0..nc).map(|_| {
                    let v = x % (n + 1);
                    x /= n + 1;
                    v
                }).collect();
                let col = layout.arc_colors(k0, &kc);
                if col.iter().all(|c| (0..=n).contains(c)) {
                    brute += 1;
                }
            }
            assert_eq!(enumerate_colorings(&d, n).count(), brute);
        }
    }

    #[test]
    fn fast_matches_exact() {
        let d = from_braid(&[1, -2, 1, -2]).unwrap();
        for n in 0..=3 {
            assert_eq!(colored_jones(&d, n).unwrap(), colored_jones_exact(&d, n).unwrap());
        }
    }

    #[test]
    fn right_trefoil_n1() {
        let d = from_braid(&[1, 1, 1]).unwrap();
        let j = colored_jones(&d, 1).unwrap();
        let expect = &q(&[(0, 1), (1, 1)]) * &q(&[(1, 1), (3, 1), (4, -1)]);
        assert_eq!(j, expect);
    }

    #[test]
    fn kink_invariance_small() {
        let d = from_braid(&[1, 1, 1]).unwrap();
        let base: Vec<_> = (0..=2).map(|n| colored_jones(&d, n).unwrap()).collect();
        for k in Kink::ALL {
            let e = add_kink(&d, 2, k).unwrap();
            for n in 0..=2 {
                assert_eq!(colored_jones(&e, n).unwrap(), base[n as usize], "{:?} n={}", k, n);
            }
        }
    }

    #[test]
    fn kauffman_matches_n1() {
        let d = parse_pd("X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)").unwrap();
        let j = colored_jones(&d, 1).unwrap();
        assert_eq!(jones_from_colored(&j).unwrap(), kauffman_jones(&d));
    }
}
