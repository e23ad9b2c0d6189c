//! Dense univariate polynomials over the rationals.
//!
//! Coefficients are stored in ascending order of degree with no trailing
//! zeros, so the zero polynomial is the empty vector.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

/// Binary operation selector for [`poly_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

pub fn poly_arith(a: &Poly, b: &Poly, op: PolyOp) -> Poly {
    match op {
        PolyOp::Add => a + b,
        PolyOp::Sub => a - b,
        PolyOp::Mul => a * b,
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// The indeterminate `p`.
    pub fn var() -> Self {
        Poly::from_coeffs(vec![Rational::zero(), Rational::one()])
    }

    /// `1 - p`.
    pub fn one_minus_var() -> Self {
        Poly::from_ints(&[1, -1])
    }

    pub fn monomial(c: Rational, degree: usize) -> Self {
        let mut v = vec![Rational::zero(); degree + 1];
        v[degree] = c;
        Poly::from_coeffs(v)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    /// Ascending integer coefficients.
    pub fn from_ints(c: &[i64]) -> Self {
        Poly::from_coeffs(c.iter().map(|&x| Rational::from_integer(x.into())).collect())
    }

    pub fn from_bigints(c: &[BigInt]) -> Self {
        Poly::from_coeffs(c.iter().cloned().map(Rational::from_integer).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Exact evaluation at the binary value of `x`, rounded once at the end.
    pub fn eval_f64(&self, x: f64) -> f64 {
        match Rational::from_float(x) {
            Some(r) => super::to_f64(&self.eval(&r)),
            None => f64::NAN,
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `self(inner(p))`.
    pub fn compose(&self, inner: &Poly) -> Poly {
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, c| &(&acc * inner) + &Poly::constant(c.clone()))
    }

    /// Euclidean division; errors when `d` is zero.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dl = d.leading().ok_or(Error::ZeroDivisor)?.clone();
        let dn = d.coeffs.len();
        let mut r = self.coeffs.clone();
        if r.len() < dn {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut q = vec![Rational::zero(); r.len() - dn + 1];
        for i in (0..q.len()).rev() {
            let c = &r[i + dn - 1] / &dl;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[i + j] -= &c * dc;
                }
            }
            q[i] = c;
        }
        r.truncate(dn - 1);
        Ok((Poly::from_coeffs(q), Poly::from_coeffs(r)))
    }

    /// Monic greatest common divisor (zero iff both inputs are zero).
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y).expect("nonzero divisor");
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    /// Least common denominator of the coefficients.
    pub fn denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Integer coefficients of `self * lcm(denominators)`.
    pub fn clear_denominators(&self) -> (Vec<BigInt>, BigInt) {
        let l = self.denominator_lcm();
        let ints = self
            .coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        (ints, l)
    }

    /// Renders with `var` as the indeterminate, highest degree first.
    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (d, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match d {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{d}"),
            };
            if mono.is_empty() {
                out.push_str(&a.to_string());
            } else if a.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{a}*{mono}"));
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("p"))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::from_coeffs(v)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, o: Poly) -> Poly {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn zero_is_empty() {
        assert!(Poly::from_ints(&[0, 0]).is_zero());
        assert_eq!(Poly::zero().degree(), None);
        assert_eq!(Poly::from_ints(&[1, 2, 0]).degree(), Some(1));
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = Poly::from_ints(&[3, 0, -2, 5, 1]);
        let b = Poly::from_ints(&[1, 2, 3]);
        let (q, rem) = a.div_rem(&b).unwrap();
        assert_eq!(&(&q * &b) + &rem, a);
        assert!(rem.degree() < b.degree());
        assert_eq!(a.div_rem(&Poly::zero()), Err(Error::ZeroDivisor));
    }

    #[test]
    fn gcd_finds_common_factor() {
        let f = Poly::from_ints(&[1, 1]);
        let a = &f * &Poly::from_ints(&[2, 0, 1]);
        let b = &f * &Poly::from_ints(&[-3, 1]);
        assert_eq!(Poly::gcd(&a, &b), f);
    }

    #[test]
    fn compose_substitutes() {
        // (1 + p^2) at p -> 1 - p
        let a = Poly::from_ints(&[1, 0, 1]);
        let c = a.compose(&Poly::one_minus_var());
        assert_eq!(c, Poly::from_ints(&[2, -2, 1]));
        assert_eq!(c.eval(&r(1, 3)), a.eval(&r(2, 3)));
    }

    #[test]
    fn display() {
        assert_eq!(Poly::from_ints(&[1, -1, 3]).to_string(), "3*p^2 - p + 1");
        assert_eq!(Poly::from_ints(&[0, 0, -1]).to_string(), "-p^2");
        assert_eq!(Poly::zero().to_string(), "0");
    }
}
