//! Factored rational functions `c * m0 * prod (1 - m_i)^{e_i}` over named
//! variables, with exponents in `Z/2` stored doubled.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::qlaurent::LaurentPoly;

/// Variables. `Qn` is `q^n`, `Qk0` is `q^{k_0}`, `Qc(c)` is `q^{k_c}`;
/// `W0` and `Wc(c)` are the gluing variables and `X(i)` a generic one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Q,
    Qn,
    Qk0,
    Qc(u32),
    Wmu,
    W0,
    Wc(u32),
    X(u32),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Var::Q => write!(f, "q"),
            Var::Qn => write!(f, "Q"),
            Var::Qk0 => write!(f, "Q0"),
            Var::Qc(c) => write!(f, "Q[{}]", c),
            Var::Wmu => write!(f, "wmu"),
            Var::W0 => write!(f, "w0"),
            Var::Wc(c) => write!(f, "w[{}]", c),
            Var::X(i) => write!(f, "x{}", i),
        }
    }
}

impl Var {
    pub fn parse(s: &str) -> Option<Var> {
        let idx = |p: &str| -> Option<u32> { s.strip_prefix(p)?.strip_suffix(']')?.parse().ok() };
        Some(match s {
            "q" => Var::Q,
            "Q" => Var::Qn,
            "Q0" => Var::Qk0,
            "wmu" => Var::Wmu,
            "w0" => Var::W0,
            _ => {
                if let Some(c) = idx("Q[") {
                    Var::Qc(c)
                } else if let Some(c) = idx("w[") {
                    Var::Wc(c)
                } else {
                    Var::X(s.strip_prefix('x')?.parse().ok()?)
                }
            }
        })
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn rat_pow(c: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        num_traits::pow(c.clone(), e as usize)
    } else {
        num_traits::pow(c.recip(), (-e) as usize)
    }
}

fn rat_sqrt(c: &BigRational) -> Option<BigRational> {
    if c.is_negative() {
        return None;
    }
    let n = c.numer().sqrt();
    let d = c.denom().sqrt();
    if &(&n * &n) == c.numer() && &(&d * &d) == c.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// `c * prod x^{e/2}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    /// Doubled exponents, zeros dropped.
    pub exps: BTreeMap<Var, i64>,
    pub coeff: BigRational,
}

impl Monomial {
    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Monomial { exps: BTreeMap::new(), coeff: c }
    }

    pub fn var(v: Var) -> Self {
        Self::var_pow2(v, 2)
    }

    /// `v^{e2/2}`.
    pub fn var_pow2(v: Var, e2: i64) -> Self {
        let mut m = Self::one();
        if e2 != 0 {
            m.exps.insert(v, e2);
        }
        m
    }

    pub fn from_exps<I: IntoIterator<Item = (Var, i64)>>(c: BigRational, it: I) -> Self {
        let mut m = Self::constant(c);
        for (v, e) in it {
            m.add_exp2(v, e);
        }
        m
    }

    fn add_exp2(&mut self, v: Var, e2: i64) {
        let x = self.exps.entry(v).or_insert(0);
        *x += e2;
        if *x == 0 {
            self.exps.remove(&v);
        }
    }

    pub fn exp2(&self, v: Var) -> i64 {
        self.exps.get(&v).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty() && self.coeff.is_one()
    }

    pub fn is_integral(&self) -> bool {
        self.exps.values().all(|e| e % 2 == 0)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut m = self.clone();
        m.coeff *= &o.coeff;
        for (v, e) in &o.exps {
            m.add_exp2(*v, *e);
        }
        m
    }

    pub fn inv(&self) -> Result<Monomial> {
        if self.coeff.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(-1))
    }

    /// Integer power; a zero coefficient with negative power panics, use `inv`
    /// first when that can happen.
    pub fn pow(&self, e: i64) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .filter(|_| e != 0)
                .map(|(v, x)| (*v, x * e))
                .collect(),
            coeff: rat_pow(&self.coeff, e),
        }
    }

    /// `self^{e2/2}`, when representable.
    pub fn pow2(&self, e2: i64) -> Option<Monomial> {
        if e2 % 2 == 0 {
            if self.coeff.is_zero() && e2 < 0 {
                return None;
            }
            return Some(self.pow(e2 / 2));
        }
        let mut exps = BTreeMap::new();
        for (v, x) in &self.exps {
            let y = x * e2;
            if y % 2 != 0 {
                return None;
            }
            exps.insert(*v, y / 2);
        }
        let r = rat_sqrt(&self.coeff)?;
        if r.is_zero() && e2 < 0 {
            return None;
        }
        Some(Monomial { exps, coeff: rat_pow(&r, e2) })
    }

    pub fn neg(&self) -> Monomial {
        Monomial { exps: self.exps.clone(), coeff: -self.coeff.clone() }
    }

    /// Principal-branch evaluation.
    pub fn eval_complex(&self, point: &dyn Fn(Var) -> Complex64) -> Complex64 {
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        self.exps.iter().fold(Complex64::new(c, 0.0), |acc, (v, e)| {
            let x = point(*v);
            if e % 2 == 0 {
                acc * x.powi((*e / 2) as i32)
            } else {
                acc * x.sqrt().powi(*e as i32)
            }
        })
    }

    fn fmt_vars(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let mut first = true;
        for (v, e) in &self.exps {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 2 {
                write!(f, "{}", v)?;
            } else if e % 2 == 0 {
                write!(f, "{}^{}", v, e / 2)?;
            } else {
                write!(f, "{}^({}/2)", v, e)?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "coeff": self.coeff.to_string(),
            "exps": self.exps.iter().map(|(v, e)| json!([v.to_string(), e])).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Option<Monomial> {
        let coeff: BigRational = v.get("coeff")?.as_str()?.parse().ok()?;
        let mut m = Monomial::constant(coeff);
        for e in v.get("exps")?.as_array()? {
            let var = Var::parse(e.get(0)?.as_str()?)?;
            m.add_exp2(var, e.get(1)?.as_i64()?);
        }
        Some(m)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "{}", self.coeff);
        }
        if self.coeff == -BigRational::one() {
            write!(f, "-")?;
        } else if !self.coeff.is_one() {
            write!(f, "{}*", self.coeff)?;
        }
        self.fmt_vars(f)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// `lead * prod (1 - m)^e`; the zero element has a zero lead and no factors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FactoredRational {
    pub lead: Monomial,
    pub factors: BTreeMap<Monomial, i64>,
}

impl FactoredRational {
    pub fn one() -> Self {
        Self::from_monomial(Monomial::one())
    }

    pub fn zero() -> Self {
        Self::from_monomial(Monomial::constant(BigRational::zero()))
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_monomial(Monomial::constant(c))
    }

    pub fn int(c: i64) -> Self {
        Self::constant(rat(c))
    }

    pub fn var(v: Var) -> Self {
        Self::from_monomial(Monomial::var(v))
    }

    pub fn from_monomial(m: Monomial) -> Self {
        FactoredRational { lead: m, factors: BTreeMap::new() }
    }

    /// `1 - m`.
    pub fn binomial(m: &Monomial) -> Self {
        let mut x = Self::one();
        x.push_factor(m.clone(), 1).expect("positive power never hits a pole");
        x
    }

    pub fn is_zero(&self) -> bool {
        self.lead.coeff.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.lead.is_one() && self.factors.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.factors.is_empty()
    }

    fn push_factor(&mut self, m: Monomial, e: i64) -> Result<()> {
        if e == 0 || self.is_zero() {
            return Ok(());
        }
        if m.is_constant() {
            let val = BigRational::one() - &m.coeff;
            if val.is_zero() {
                if e < 0 {
                    return Err(Error::PoleHit);
                }
                *self = Self::zero();
                return Ok(());
            }
            self.lead.coeff *= rat_pow(&val, e);
            return Ok(());
        }
        let (_, first) = m.exps.iter().next().unwrap();
        let m = if *first < 0 {
            // 1 - m = (-m) (1 - 1/m)
            self.lead = self.lead.mul(&m.neg().pow(e));
            m.inv()?
        } else {
            m
        };
        let x = self.factors.entry(m.clone()).or_insert(0);
        *x += e;
        if *x == 0 {
            self.factors.remove(&m);
        }
        Ok(())
    }

    pub fn mul(&self, o: &FactoredRational) -> FactoredRational {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut r = self.clone();
        r.lead = r.lead.mul(&o.lead);
        for (m, e) in &o.factors {
            let x = r.factors.entry(m.clone()).or_insert(0);
            *x += e;
            if *x == 0 {
                r.factors.remove(m);
            }
        }
        r
    }

    pub fn mul_monomial(&self, m: &Monomial) -> FactoredRational {
        self.mul(&Self::from_monomial(m.clone()))
    }

    pub fn inv(&self) -> Result<FactoredRational> {
        if self.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(FactoredRational {
            lead: self.lead.inv()?,
            factors: self.factors.iter().map(|(m, e)| (m.clone(), -e)).collect(),
        })
    }

    pub fn div(&self, o: &FactoredRational) -> Result<FactoredRational> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<FactoredRational> {
        if e == 0 {
            return Ok(Self::one());
        }
        if self.is_zero() {
            return if e > 0 { Ok(Self::zero()) } else { Err(Error::ZeroInverse) };
        }
        Ok(FactoredRational {
            lead: self.lead.pow(e),
            factors: self.factors.iter().map(|(m, x)| (m.clone(), x * e)).collect(),
        })
    }

    /// `self^{e2/2}`; fails unless every factor multiplicity becomes an
    /// integer and the lead has a rational root.
    pub fn pow2(&self, e2: i64) -> Result<FactoredRational> {
        if e2 % 2 == 0 {
            return self.pow(e2 / 2);
        }
        let bad = || Error::NonIntegralExponent(format!("({})^({}/2)", self, e2));
        let lead = self.lead.pow2(e2).ok_or_else(bad)?;
        let mut factors = BTreeMap::new();
        for (m, x) in &self.factors {
            let y = x * e2;
            if y % 2 != 0 {
                return Err(bad());
            }
            factors.insert(m.clone(), y / 2);
        }
        Ok(FactoredRational { lead, factors })
    }

    pub fn neg(&self) -> FactoredRational {
        let mut r = self.clone();
        r.lead = r.lead.neg();
        r
    }

    pub fn is_integral(&self) -> bool {
        self.lead.is_integral() && self.factors.keys().all(|m| m.is_integral())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut s: BTreeSet<Var> = self.lead.exps.keys().copied().collect();
        for m in self.factors.keys() {
            s.extend(m.exps.keys().copied());
        }
        s
    }

    /// Replaces bound variables by monomials.
    pub fn substitute(&self, bind: &dyn Fn(Var) -> Option<Monomial>) -> Result<FactoredRational> {
        let sub = |m: &Monomial| -> Result<Monomial> {
            let mut out = Monomial::constant(m.coeff.clone());
            for (v, e) in &m.exps {
                match bind(*v) {
                    Some(img) => {
                        if img.coeff.is_zero() {
                            return Err(Error::ZeroBinding(v.to_string()));
                        }
                        let p = img
                            .pow2(*e)
                            .ok_or_else(|| Error::NonIntegralExponent(format!("({})^({}/2)", img, e)))?;
                        out = out.mul(&p);
                    }
                    None => out.add_exp2(*v, *e),
                }
            }
            Ok(out)
        };
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let mut r = Self::from_monomial(sub(&self.lead)?);
        for (m, e) in &self.factors {
            r.push_factor(sub(m)?, *e)?;
        }
        Ok(r)
    }

    pub fn rename(&self, f: &dyn Fn(Var) -> Var) -> FactoredRational {
        self.substitute(&|v| Some(Monomial::var(f(v))))
            .expect("renaming is always defined")
    }

    /// Evaluation; half-integer exponents are rejected.
    pub fn eval_complex(&self, point: &dyn Fn(Var) -> Complex64) -> Result<Complex64> {
        if !self.is_integral() {
            return Err(Error::BranchAmbiguity);
        }
        self.eval_complex_principal(point)
    }

    /// Evaluation with principal square roots.
    pub fn eval_complex_principal(&self, point: &dyn Fn(Var) -> Complex64) -> Result<Complex64> {
        let mut acc = self.lead.eval_complex(point);
        for (m, e) in &self.factors {
            let x = Complex64::new(1.0, 0.0) - m.eval_complex(point);
            if x == Complex64::new(0.0, 0.0) && *e < 0 {
                return Err(Error::PoleHit);
            }
            acc *= x.powi(*e as i32);
        }
        Ok(acc)
    }

    pub fn eval_rational(&self, point: &dyn Fn(Var) -> BigRational) -> Result<BigRational> {
        if !self.is_integral() {
            return Err(Error::BranchAmbiguity);
        }
        let mono = |m: &Monomial| -> Result<BigRational> {
            let mut acc = m.coeff.clone();
            for (v, e) in &m.exps {
                let x = point(*v);
                if x.is_zero() && *e < 0 {
                    return Err(Error::PoleHit);
                }
                acc *= rat_pow(&x, e / 2);
            }
            Ok(acc)
        };
        let mut acc = mono(&self.lead)?;
        for (m, e) in &self.factors {
            let x = BigRational::one() - mono(m)?;
            if x.is_zero() && *e < 0 {
                return Err(Error::PoleHit);
            }
            acc *= rat_pow(&x, *e);
        }
        Ok(acc)
    }

    /// Specializes every variable to a power of `q` (given as its `q`-exponent)
    /// and returns `(numerator, denominator)` as Laurent polynomials in
    /// `v = q^{1/2}` without cancelling anything; zero factors stay visible.
    pub fn laurent_parts(&self, qexp: &dyn Fn(Var) -> i64) -> (LaurentPoly, LaurentPoly) {
        let vexp = |m: &Monomial| -> i64 { m.exps.iter().map(|(v, e)| qexp(*v) * e).sum() };
        let mut num = LaurentPoly::monomial(self.lead.coeff.clone(), vexp(&self.lead));
        let mut den = LaurentPoly::one();
        for (m, e) in &self.factors {
            let mut f = LaurentPoly::one();
            f.add_term(vexp(m), -m.coeff.clone());
            for _ in 0..e.abs() {
                if *e > 0 {
                    num = &num * &f;
                } else {
                    den = &den * &f;
                }
            }
        }
        (num, den)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lead": self.lead.to_json(),
            "factors": self
                .factors
                .iter()
                .map(|(m, e)| json!({"m": m.to_json(), "e": e}))
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Option<FactoredRational> {
        let mut r = Self::from_monomial(Monomial::from_json(v.get("lead")?)?);
        for f in v.get("factors")?.as_array()? {
            r.push_factor(Monomial::from_json(f.get("m")?)?, f.get("e")?.as_i64()?)
                .ok()?;
        }
        Some(r)
    }
}

impl fmt::Display for FactoredRational {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.lead)?;
        for (m, e) in &self.factors {
            write!(f, " * (1 - {})", m)?;
            if *e != 1 {
                write!(f, "^{}", e)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FactoredRational {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl std::ops::Mul for &FactoredRational {
    type Output = FactoredRational;
    fn mul(self, o: &FactoredRational) -> FactoredRational {
        FactoredRational::mul(self, o)
    }
}

/// `(z, 1/(1-z), 1 - 1/z)`.
pub fn shape_triple(z: &Monomial) -> (FactoredRational, FactoredRational, FactoredRational) {
    let zf = FactoredRational::from_monomial(z.clone());
    let one_minus = FactoredRational::binomial(z);
    let zp = one_minus.inv().expect("z is not 1");
    // 1 - 1/z = -z^{-1} (1 - z)
    let zpp = one_minus.mul(&FactoredRational::from_monomial(z.inv().expect("z is not 0").neg()));
    (zf, zp, zpp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u32) -> Monomial {
        Monomial::var(Var::X(i))
    }

    #[test]
    fn triple_product() {
        let (a, b, c) = shape_triple(&x(0));
        assert_eq!(a.mul(&b).mul(&c), FactoredRational::int(-1));
        let z = x(0).mul(&x(1).inv().unwrap());
        let (a, b, c) = shape_triple(&z);
        assert_eq!(a.mul(&b).mul(&c), FactoredRational::int(-1));
    }

    #[test]
    fn orientation_is_canonical() {
        let m = x(0).mul(&x(1).inv().unwrap());
        let a = FactoredRational::binomial(&m);
        let b = FactoredRational::binomial(&m.inv().unwrap()).mul_monomial(&m.neg());
        assert_eq!(a, b);
    }

    #[test]
    fn constant_factors_fold() {
        let two = Monomial::constant(rat(2));
        assert_eq!(FactoredRational::binomial(&two), FactoredRational::int(-1));
        assert!(FactoredRational::binomial(&Monomial::one()).is_zero());
        assert_eq!(FactoredRational::zero().inv(), Err(Error::ZeroInverse));
    }

    #[test]
    fn half_powers() {
        let h = FactoredRational::from_monomial(Monomial::var_pow2(Var::Wmu, 1));
        assert!(!h.is_integral());
        assert!(h.mul(&h).is_integral());
        let sq = FactoredRational::binomial(&x(0)).pow(2).unwrap();
        assert_eq!(sq.pow2(1).unwrap(), FactoredRational::binomial(&x(0)));
        assert!(FactoredRational::binomial(&x(0)).pow2(1).is_err());
    }

    #[test]
    fn eval_examples() {
        let c = FactoredRational::constant(BigRational::new(7.into(), 2.into()));
        assert_eq!(c.eval_complex(&|_| Complex64::new(0.3, 0.1)).unwrap(), Complex64::new(3.5, 0.0));
        let p = FactoredRational::binomial(&x(0)).inv().unwrap();
        assert_eq!(p.eval_complex(&|_| Complex64::new(2.0, 0.0)).unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(p.eval_complex(&|_| Complex64::new(1.0, 0.0)), Err(Error::PoleHit));
        let h = FactoredRational::from_monomial(Monomial::var_pow2(Var::X(0), 1));
        assert_eq!(h.eval_complex(&|_| Complex64::new(4.0, 0.0)), Err(Error::BranchAmbiguity));
    }

    #[test]
    fn substitution() {
        // (1 - Q/Q_a) with Q -> wmu, Q_a -> z
        let e = FactoredRational::binomial(&Monomial::var(Var::Qn).mul(&Monomial::var(Var::X(3)).inv().unwrap()));
        let s = e
            .substitute(&|v| match v {
                Var::Qn => Some(Monomial::var(Var::Wmu)),
                _ => None,
            })
            .unwrap();
        let want = FactoredRational::binomial(&Monomial::var(Var::Wmu).mul(&x(3).inv().unwrap()));
        assert_eq!(s, want);
        assert_eq!(e.substitute(&|_| None).unwrap(), e);
        let zero = e.substitute(&|v| if v == Var::Qn { Some(Monomial::constant(rat(0))) } else { None });
        assert_eq!(zero, Err(Error::ZeroBinding("Q".into())));
        // q -> 1 in 1/(1-q) is a pole
        let p = FactoredRational::binomial(&Monomial::var(Var::Q)).inv().unwrap();
        assert_eq!(p.substitute(&|_| Some(Monomial::one())), Err(Error::PoleHit));
    }

    #[test]
    fn json_roundtrip() {
        let m = x(0).mul(&Monomial::var_pow2(Var::Wc(2), -1));
        let e = FactoredRational::binomial(&m)
            .pow(-2)
            .unwrap()
            .mul_monomial(&Monomial::from_exps(rat(-3), [(Var::Wmu, 1)]));
        assert_eq!(FactoredRational::from_json(&e.to_json()).unwrap(), e);
        assert_eq!(e.to_string(), "-3*wmu^(1/2)*w[2]*x0^-2 * (1 - w[2]^(1/2)*x0^-1)^-2");
    }

    #[test]
    fn laurent_parts_keep_zeros() {
        // (1 - q Q^{-1}) at Q = q
        let e = FactoredRational::binomial(&Monomial::from_exps(rat(1), [(Var::Q, 2), (Var::Qn, -2)]))
            .inv()
            .unwrap();
        let (n, d) = e.laurent_parts(&|_| 1);
        assert!(d.is_zero());
        assert!(!n.is_zero());
    }
}
