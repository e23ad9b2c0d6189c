//! Integer-coefficient polynomials used as the working ring of the
//! fraction-free eliminator.

use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Poly, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntPoly(Vec<BigInt>);

impl IntPoly {
    pub fn new(mut c: Vec<BigInt>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        IntPoly(c)
    }

    pub fn constant(c: BigInt) -> Self {
        IntPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    /// Quotient of a division known to be exact. Panics otherwise, since
    /// that would mean the elimination invariant was broken.
    pub fn exact_div(&self, d: &IntPoly) -> IntPoly {
        let dn = d.0.len();
        assert!(dn > 0, "division by zero polynomial");
        if self.is_zero() {
            return IntPoly::default();
        }
        if dn == 1 {
            let c = &d.0[0];
            return IntPoly(
                self.0
                    .iter()
                    .map(|a| {
                        let (q, r) = a.div_rem(c);
                        debug_assert!(r.is_zero(), "inexact scalar division");
                        q
                    })
                    .collect(),
            );
        }
        let lead = &d.0[dn - 1];
        let mut r = self.0.clone();
        assert!(r.len() >= dn, "inexact polynomial division");
        let mut q = vec![BigInt::zero(); r.len() - dn + 1];
        for i in (0..q.len()).rev() {
            let top = &r[i + dn - 1];
            if top.is_zero() {
                continue;
            }
            let (c, rem) = top.div_rem(lead);
            assert!(rem.is_zero(), "inexact polynomial division");
            for (j, dc) in d.0.iter().enumerate() {
                r[i + j] -= &c * dc;
            }
            q[i] = c;
        }
        debug_assert!(r.iter().all(Zero::is_zero), "nonzero remainder");
        IntPoly::new(q)
    }

    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn to_poly(&self) -> Poly {
        Poly::from_bigints(&self.0)
    }

    /// Integer polynomial proportional to `p`, with the positive scale factor.
    pub fn from_poly(p: &Poly) -> (IntPoly, BigInt) {
        let (c, l) = p.clear_denominators();
        (IntPoly::new(c), l)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + Rational::from_integer(c.clone()))
    }

    pub fn is_negative_leading(&self) -> bool {
        self.0.last().is_some_and(Signed::is_negative)
    }

    pub fn one() -> Self {
        IntPoly(vec![BigInt::one()])
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, o: &IntPoly) -> IntPoly {
        let (a, b) = if self.0.len() >= o.0.len() { (self, o) } else { (o, self) };
        let mut v = a.0.clone();
        for (x, y) in v.iter_mut().zip(&b.0) {
            *x += y;
        }
        IntPoly::new(v)
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, o: &IntPoly) -> IntPoly {
        let n = self.0.len().max(o.0.len());
        let mut v = self.0.clone();
        v.resize(n, BigInt::zero());
        for (x, y) in v.iter_mut().zip(&o.0) {
            *x -= y;
        }
        IntPoly::new(v)
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, o: &IntPoly) -> IntPoly {
        if self.is_zero() || o.is_zero() {
            return IntPoly::default();
        }
        let mut v = vec![BigInt::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                if !b.is_zero() {
                    v[i + j] += a * b;
                }
            }
        }
        IntPoly::new(v)
    }
}
