//! Exact Laurent polynomials in `v = q^{1/2}` over the rationals, plus
//! quantum factorials with the vanishing conventions for negative index.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Sparse Laurent polynomial; keys are exponents of `v` (half-powers of `q`).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::v_pow(0)
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: BigRational, v_exp: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(v_exp, c);
        }
        LaurentPoly { terms }
    }

    /// `v^e`.
    pub fn v_pow(e: i64) -> Self {
        Self::monomial(BigRational::one(), e)
    }

    /// `q^e = v^{2e}`.
    pub fn q_pow(e: i64) -> Self {
        Self::v_pow(2 * e)
    }

    /// Builds from `(v-exponent, integer coefficient)` pairs.
    pub fn from_int_terms<I: IntoIterator<Item = (i64, i64)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in it {
            p.add_term(e, rat(c));
        }
        p
    }

    /// Builds from `(q-exponent, integer coefficient)` pairs.
    pub fn from_q_terms<I: IntoIterator<Item = (i64, i64)>>(it: I) -> Self {
        Self::from_int_terms(it.into_iter().map(|(e, c)| (2 * e, c)))
    }

    pub fn add_term(&mut self, e: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i64) -> BigRational {
        self.terms.get(&e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Multiplies by `v^e`.
    pub fn shift(&self, e: i64) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(k, c)| (k + e, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(k, x)| (*k, x * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes `v -> v^{-1}` (equivalently `q -> q^{-1}`).
    pub fn invert_variable(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(k, c)| (-k, c.clone())).collect(),
        }
    }

    /// True iff every exponent is an integer power of `q` and every
    /// coefficient an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.iter().all(|(e, c)| e % 2 == 0 && c.is_integer())
    }

    pub fn eval_complex(&self, v: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| v.powi(*e as i32) * c.to_f64().unwrap_or(f64::NAN))
            .sum()
    }

    pub fn eval_rational(&self, v: &BigRational) -> BigRational {
        let mut s = BigRational::zero();
        for (e, c) in &self.terms {
            let p = if *e >= 0 {
                num_traits::pow(v.clone(), *e as usize)
            } else {
                num_traits::pow(v.recip(), (-*e) as usize)
            };
            s += c * p;
        }
        s
    }

    /// Exact division; `None` when `other` does not divide `self`.
    pub fn div_exact(&self, other: &LaurentPoly) -> Option<LaurentPoly> {
        if other.is_zero() {
            return None;
        }
        let mut rem = self.clone();
        let mut quo = LaurentPoly::zero();
        let (dlo, dlc) = other.terms.iter().next().map(|(e, c)| (*e, c.clone()))?;
        let dspan = other.max_exp()? - dlo;
        while let Some(lo) = rem.min_exp() {
            let rspan = rem.max_exp()? - lo;
            if rspan < dspan {
                return None;
            }
            let c = rem.coeff(lo) / &dlc;
            let t = LaurentPoly::monomial(c, lo - dlo);
            rem = &rem - &(&t * other);
            quo = &quo + &t;
        }
        Some(quo)
    }

    /// Renders in powers of `q`, ascending, e.g. `q^-1 - 1 + q^2`.
    pub fn to_q_string(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let var = if *e == 0 {
                String::new()
            } else if e % 2 == 0 {
                if *e == 2 {
                    "q".into()
                } else {
                    format!("q^{}", e / 2)
                }
            } else {
                format!("q^({}/2)", e)
            };
            if var.is_empty() {
                out.push_str(&a.to_string());
            } else if a.is_one() {
                out.push_str(&var);
            } else {
                out.push_str(&format!("{}*{}", a, var));
            }
        }
        out
    }

    pub fn to_triples(&self) -> Vec<PolyTerm> {
        self.terms
            .iter()
            .map(|(e, c)| PolyTerm {
                exp: *e,
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect()
    }

    pub fn from_triples(ts: &[PolyTerm]) -> Option<Self> {
        let mut p = Self::zero();
        for t in ts {
            let n: BigInt = t.num.parse().ok()?;
            let d: BigInt = t.den.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            p.add_term(t.exp, BigRational::new(n, d));
        }
        Some(p)
    }
}

/// JSON term: exponent of `v = q^{1/2}` with a rational coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub exp: i64,
    pub num: String,
    pub den: String,
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_triples().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ts = Vec::<PolyTerm>::deserialize(d)?;
        LaurentPoly::from_triples(&ts).ok_or_else(|| serde::de::Error::custom("bad term"))
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_q_string())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({})", self.to_q_string())
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c.clone());
        }
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl std::iter::Sum for LaurentPoly {
    fn sum<I: Iterator<Item = LaurentPoly>>(iter: I) -> Self {
        let mut acc = LaurentPoly::zero();
        for p in iter {
            acc += &p;
        }
        acc
    }
}

/// `1 - q^i`.
pub fn one_minus_q(i: i64) -> LaurentPoly {
    &LaurentPoly::one() - &LaurentPoly::q_pow(i)
}

/// `(q)_n` under the extended convention, together with the reciprocal.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedQFactorial {
    pub n: i64,
    /// `(q)_n`, which is `0` for `n < 0`.
    pub value: LaurentPoly,
    /// `1/(q)_n` is the formal zero for `n < 0`.
    pub reciprocal_is_zero: bool,
}

pub fn qfact(n: i64) -> ExtendedQFactorial {
    if n < 0 {
        return ExtendedQFactorial {
            n,
            value: LaurentPoly::zero(),
            reciprocal_is_zero: true,
        };
    }
    let mut acc = LaurentPoly::one();
    for i in 1..=n {
        acc = &acc * &one_minus_q(i);
    }
    ExtendedQFactorial {
        n,
        value: acc,
        reciprocal_is_zero: false,
    }
}

/// Gaussian binomial `(q)_b / ((q)_{b-k} (q)_k)`, zero outside `0 <= k <= b`.
pub fn qbinomial(b: i64, k: i64) -> LaurentPoly {
    if k < 0 || k > b {
        return LaurentPoly::zero();
    }
    let k = k.min(b - k);
    // row-by-row q-Pascal: [m, j] = [m-1, j-1] + q^j [m-1, j]
    let mut row: Vec<LaurentPoly> = vec![LaurentPoly::one()];
    for m in 1..=b {
        let top = (m.min(k)) as usize;
        let mut next = Vec::with_capacity(top + 1);
        for j in 0..=top {
            let left = if j >= 1 { row.get(j - 1).cloned() } else { None };
            let right = row.get(j).map(|p| p.shift(2 * j as i64));
            let v = match (left, right) {
                (Some(a), Some(b)) => &a + &b,
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => LaurentPoly::zero(),
            };
            next.push(v);
        }
        row = next;
    }
    row.pop().unwrap_or_default()
}

/// `1/(q)_n` represented as either the formal zero or `1/value`.
#[derive(Clone, Debug)]
enum Recip {
    Zero,
    Inv(LaurentPoly),
}

fn recip(n: i64) -> Recip {
    let f = qfact(n);
    if f.reciprocal_is_zero {
        Recip::Zero
    } else {
        Recip::Inv(f.value)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnihilatorCheck {
    pub n: i64,
    pub factorial_identity: bool,
    pub reciprocal_identity: bool,
}

/// Checks the two first-order annihilator identities of `(q)_n` and
/// `1/(q)_n` over a window of `n` including negatives.
pub fn annihilator_checks_range(lo: i64, hi: i64) -> Vec<AnnihilatorCheck> {
    (lo..=hi)
        .map(|n| {
            let c = one_minus_q(n + 1);
            let f0 = qfact(n).value;
            let f1 = qfact(n + 1).value;
            let inner = &f1 - &(&c * &f0);
            let factorial_identity = (&c * &inner).is_zero();
            // (1 - q^{n+1}) / (q)_{n+1} - 1/(q)_n, with common denominators
            let reciprocal_identity = match (recip(n + 1), recip(n)) {
                (Recip::Zero, Recip::Zero) => true,
                (Recip::Zero, Recip::Inv(_)) => false,
                (Recip::Inv(_), Recip::Zero) => c.is_zero(),
                (Recip::Inv(p1), Recip::Inv(p0)) => (&(&c * &p0) - &p1).is_zero(),
            };
            AnnihilatorCheck {
                n,
                factorial_identity,
                reciprocal_identity,
            }
        })
        .collect()
}

pub fn annihilator_checks() -> Vec<AnnihilatorCheck> {
    annihilator_checks_range(-5, 20)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(terms: &[(i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_q_terms(terms.iter().copied())
    }

    #[test]
    fn qfact_small() {
        assert_eq!(qfact(2).value, q(&[(0, 1), (1, -1), (2, -1), (3, 1)]));
        assert!(qfact(0).value.is_one());
        let f = qfact(-3);
        assert!(f.value.is_zero() && f.reciprocal_is_zero);
    }

    #[test]
    fn qbinomial_small() {
        assert_eq!(qbinomial(2, 1), q(&[(0, 1), (1, 1)]));
        assert!(qbinomial(5, 0).is_one());
        assert!(qbinomial(1, 3).is_zero());
        assert!(qbinomial(3, -1).is_zero());
        // [4,2] = 1 + q + 2q^2 + q^3 + q^4
        assert_eq!(qbinomial(4, 2), q(&[(0, 1), (1, 1), (2, 2), (3, 1), (4, 1)]));
    }

    #[test]
    fn qbinomial_matches_factorial_quotient() {
        for b in 0..8 {
            for k in 0..=b {
                let num = qfact(b).value;
                let den = &qfact(b - k).value * &qfact(k).value;
                assert_eq!(num.div_exact(&den).unwrap(), qbinomial(b, k));
            }
        }
    }

    #[test]
    fn annihilators_hold() {
        for c in annihilator_checks() {
            assert!(c.factorial_identity && c.reciprocal_identity, "n={}", c.n);
        }
    }

    #[test]
    fn rendering() {
        assert_eq!(q(&[(-1, 1), (0, -1), (2, 1)]).to_string(), "q^-1 - 1 + q^2");
        assert_eq!(LaurentPoly::zero().to_string(), "0");
        assert_eq!(LaurentPoly::v_pow(1).to_string(), "q^(1/2)");
    }

    #[test]
    fn json_roundtrip() {
        let p = q(&[(-2, 3), (5, -7)]).scale(&BigRational::new(1.into(), 3.into()));
        let s = serde_json::to_string(&p).unwrap();
        let back: LaurentPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn division() {
        let a = q(&[(0, 1), (1, 1)]);
        let b = q(&[(0, 1), (2, -1)]);
        assert_eq!((&a * &b).div_exact(&a).unwrap(), b);
        assert!(b.div_exact(&q(&[(0, 1), (1, 2)])).is_none());
    }
}
