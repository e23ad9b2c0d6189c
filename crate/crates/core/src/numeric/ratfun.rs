//! Rational functions in one variable, kept in lowest terms with a monic
//! denominator so that structural equality is mathematical equality.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Poly, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        if num.is_zero() {
            return Ok(RatFun::zero());
        }
        let g = Poly::gcd(&num, &den);
        let (n, _) = num.div_rem(&g)?;
        let (d, _) = den.div_rem(&g)?;
        let l = d.leading().expect("nonzero").recip();
        Ok(RatFun {
            num: n.scale(&l),
            den: d.scale(&l),
        })
    }

    pub fn zero() -> Self {
        RatFun {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RatFun::from_poly(Poly::one())
    }

    pub fn constant(c: Rational) -> Self {
        RatFun::from_poly(Poly::constant(c))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFun {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(Error::PoleAtPoint);
        }
        Ok(self.num.eval(x) / d)
    }

    pub fn eval_f64(&self, x: f64) -> Result<f64> {
        let r = Rational::from_float(x)
            .ok_or_else(|| Error::InvalidArgument(format!("non-finite point {x}")))?;
        Ok(super::to_f64(&self.eval(&r)?))
    }

    /// `self(inner(p))`, e.g. the change of variable `p -> 1 - p`.
    pub fn substitute(&self, inner: &Poly) -> Result<RatFun> {
        RatFun::new(self.num.compose(inner), self.den.compose(inner))
    }

    pub fn recip(&self) -> Result<RatFun> {
        RatFun::new(self.den.clone(), self.num.clone())
    }

    /// Integer numerator and denominator, coprime as a pair of coefficient
    /// lists, with positive leading denominator coefficient.
    pub fn integer_form(&self) -> (Vec<BigInt>, Vec<BigInt>) {
        let l = self.num.denominator_lcm().lcm(&self.den.denominator_lcm());
        let lr = Rational::from_integer(l);
        let to_int = |p: &Poly| -> Vec<BigInt> {
            p.coeffs().iter().map(|c| (c * &lr).to_integer()).collect()
        };
        let mut n = to_int(&self.num);
        let mut d = to_int(&self.den);
        let g = n
            .iter()
            .chain(d.iter())
            .fold(BigInt::zero(), |g, c| g.gcd(c));
        if !g.is_zero() && !g.is_one() {
            n.iter_mut().for_each(|c| *c /= &g);
            d.iter_mut().for_each(|c| *c /= &g);
        }
        if d.last().is_some_and(Signed::is_negative) {
            n.iter_mut().for_each(|c| *c = -&*c);
            d.iter_mut().for_each(|c| *c = -&*c);
        }
        (n, d)
    }

    /// Canonical text form in the indeterminate `var`, e.g. `(p + 1) / 2`.
    pub fn to_string_in(&self, var: &str) -> String {
        let (n, d) = self.integer_form();
        let ns = Poly::from_bigints(&n).to_string_in(var);
        let dp = Poly::from_bigints(&d);
        if dp == Poly::one() {
            return ns;
        }
        let wrap = |s: String, terms: usize| if terms > 1 { format!("({s})") } else { s };
        let nterms = n.iter().filter(|c| !c.is_zero()).count();
        let dwrap = if d.len() > 1 { 2 } else { 1 };
        format!("{} / {}", wrap(ns, nterms), wrap(dp.to_string_in(var), dwrap))
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("p"))
    }
}

impl Add for &RatFun {
    type Output = RatFun;
    fn add(self, o: &RatFun) -> RatFun {
        if self.den == o.den {
            return RatFun::new(&self.num + &o.num, self.den.clone()).expect("nonzero den");
        }
        RatFun::new(
            &(&self.num * &o.den) + &(&o.num * &self.den),
            &self.den * &o.den,
        )
        .expect("nonzero den")
    }
}

impl Sub for &RatFun {
    type Output = RatFun;
    fn sub(self, o: &RatFun) -> RatFun {
        self + &(-o)
    }
}

impl Mul for &RatFun {
    type Output = RatFun;
    fn mul(self, o: &RatFun) -> RatFun {
        RatFun::new(&self.num * &o.num, &self.den * &o.den).expect("nonzero den")
    }
}

impl Div for &RatFun {
    type Output = Result<RatFun>;
    fn div(self, o: &RatFun) -> Result<RatFun> {
        if o.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        RatFun::new(&self.num * &o.den, &self.den * &o.num)
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(n: &[i64], d: &[i64]) -> RatFun {
        RatFun::new(Poly::from_ints(n), Poly::from_ints(d)).unwrap()
    }

    #[test]
    fn reduces_to_lowest_terms() {
        // (p^2 - 1) / (2p - 2) = (p + 1) / 2
        let a = rf(&[-1, 0, 1], &[-2, 2]);
        assert_eq!(a, rf(&[1, 1], &[2]));
        assert_eq!(a.to_string(), "(p + 1) / 2");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(
            RatFun::new(Poly::one(), Poly::zero()),
            Err(Error::ZeroDivisor)
        );
    }

    #[test]
    fn pole_detected() {
        let a = rf(&[1], &[-1, 2]);
        assert_eq!(
            a.eval(&Rational::new(1.into(), 2.into())),
            Err(Error::PoleAtPoint)
        );
    }

    #[test]
    fn field_ops() {
        let a = rf(&[1, 1], &[1, -1]);
        let b = rf(&[2], &[1, 0, 1]);
        let s = &(&a + &b) - &b;
        assert_eq!(s, a);
        let q = (&(&a * &b) / &b).unwrap();
        assert_eq!(q, a);
        assert_eq!(rf(&[3, 0, -6], &[9]).to_string(), "(-2*p^2 + 1) / 3");
        assert_eq!(rf(&[0, 4], &[2]).to_string(), "2*p");
        assert_eq!(rf(&[1], &[0, -3]).to_string(), "-1 / (3*p)");
    }
}
