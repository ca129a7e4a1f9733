//! Arithmetic modulo word-size primes, used for evaluation/interpolation
//! of state sums and for modular linear algebra.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Mersenne prime `2^61 - 1`, with a fast reduction.
pub const M61: u64 = (1 << 61) - 1;

#[derive(Clone, Copy, Debug)]
pub struct Field {
    pub p: u64,
}

impl Field {
    pub const fn new(p: u64) -> Self {
        Field { p }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let t = a as u128 * b as u128;
        if self.p == M61 {
            let s = (t as u64 & M61) + (t >> 61) as u64;
            if s >= M61 {
                s - M61
            } else {
                s
            }
        } else {
            (t % self.p as u128) as u64
        }
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero mod p");
        self.pow(a, self.p - 2)
    }

    /// Signed power.
    pub fn pow_i(&self, a: u64, e: i64) -> u64 {
        if e >= 0 {
            self.pow(a, e as u64)
        } else {
            self.pow(self.inv(a), (-e) as u64)
        }
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        let r = x.rem_euclid(self.p as i64);
        r as u64
    }

    pub fn from_bigint(&self, x: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        let mut r = x % &p;
        if r < BigInt::zero() {
            r += &p;
        }
        u64::try_from(r).unwrap()
    }

    /// Symmetric representative in `(-p/2, p/2]`.
    pub fn to_signed(&self, a: u64) -> i128 {
        if a > self.p / 2 {
            a as i128 - self.p as i128
        } else {
            a as i128
        }
    }

    /// Coefficients (ascending) of the polynomial of degree `< xs.len()`
    /// through the given points (Newton divided differences).
    pub fn interpolate(&self, xs: &[u64], ys: &[u64]) -> Vec<u64> {
        let m = xs.len();
        let mut c = ys.to_vec();
        for j in 1..m {
            for i in (j..m).rev() {
                let num = self.sub(c[i], c[i - 1]);
                let den = self.sub(xs[i], xs[i - j]);
                c[i] = self.mul(num, self.inv(den));
            }
        }
        // expand Newton form
        let mut poly = vec![0u64; m];
        for k in (0..m).rev() {
            // poly = poly * (x - xs[k]) + c[k]
            let mut next = vec![0u64; m];
            for i in 0..m {
                if poly[i] == 0 {
                    continue;
                }
                if i + 1 < m {
                    next[i + 1] = self.add(next[i + 1], poly[i]);
                }
                next[i] = self.sub(next[i], self.mul(poly[i], xs[k]));
            }
            next[0] = self.add(next[0], c[k]);
            poly = next;
        }
        poly
    }

    pub fn eval_poly(&self, coeffs: &[u64], x: u64) -> u64 {
        coeffs.iter().rev().fold(0, |acc, c| self.add(self.mul(acc, x), *c))
    }
}

/// `2^61 - 1` followed by the primes just below `2^62`.
pub fn primes() -> impl Iterator<Item = u64> {
    std::iter::once(M61).chain((0u64..).map(|i| (1u64 << 62) - 1 - 2 * i).filter(|n| is_prime(*n)))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let f = Field::new(n);
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Chinese remaindering of residues into the symmetric range.
pub fn crt(residues: &[u64], moduli: &[u64]) -> BigInt {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (r, p) in residues.iter().zip(moduli) {
        let f = Field::new(*p);
        let xm = f.from_bigint(&x);
        let mm = f.from_bigint(&m);
        let t = f.mul(f.sub(*r, xm), f.inv(mm));
        x += &m * BigInt::from(t);
        m *= BigInt::from(*p);
    }
    let half: BigInt = &m / 2;
    if x > half {
        x -= &m;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_recovers() {
        let f = Field::new(primes().next().unwrap());
        let coeffs = [5u64, 0, f.from_i64(-3), 7];
        let xs: Vec<u64> = (2..6).collect();
        let ys: Vec<u64> = xs.iter().map(|x| f.eval_poly(&coeffs, *x)).collect();
        assert_eq!(f.interpolate(&xs, &ys), coeffs.to_vec());
    }

    #[test]
    fn crt_signed() {
        let ps: Vec<u64> = primes().take(2).collect();
        let x = BigInt::from(-123456789012345678901234i128);
        let rs: Vec<u64> = ps.iter().map(|p| Field::new(*p).from_bigint(&x)).collect();
        assert_eq!(crt(&rs, &ps), x);
    }
}
