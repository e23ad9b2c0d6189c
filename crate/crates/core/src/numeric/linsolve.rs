//! Exact linear solves by fraction-free Gauss-Jordan elimination.
//!
//! Every intermediate entry is a minor of the input matrix, so each update
//! `(a_kk a_ij - a_ik a_kj) / previous_pivot` divides exactly and the working
//! ring never leaves the integers (or integer polynomials).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{IntPoly, Poly, RatFun, Rational};
use crate::error::{Error, Result};

/// Minimal ring interface needed by the eliminator.
pub trait ExactRing: Clone {
    fn is_zero(&self) -> bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    /// Division that is known to be exact.
    fn exact_div(&self, d: &Self) -> Self;
}

impl ExactRing for BigInt {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn exact_div(&self, d: &Self) -> Self {
        let (q, r) = self.div_rem(d);
        debug_assert!(Zero::is_zero(&r));
        q
    }
}

impl ExactRing for IntPoly {
    fn is_zero(&self) -> bool {
        IntPoly::is_zero(self)
    }
    fn zero() -> Self {
        IntPoly::default()
    }
    fn one() -> Self {
        IntPoly::one()
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn exact_div(&self, d: &Self) -> Self {
        IntPoly::exact_div(self, d)
    }
}

/// Solves the augmented system `m = [A | b]` (n rows, n + 1 columns).
///
/// Returns numerators `x_i * det` and the common denominator `det`
/// (the determinant of `A` up to sign).
pub fn bareiss_solve<R: ExactRing>(mut m: Vec<Vec<R>>) -> Result<(Vec<R>, R)> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n + 1) {
        return Err(Error::InvalidArgument("matrix must be n x (n + 1)".into()));
    }
    let mut prev = R::one();
    for k in 0..n {
        let piv = (k..n)
            .find(|&r| !m[r][k].is_zero())
            .ok_or(Error::Singular { column: k })?;
        m.swap(k, piv);
        let pivot_row = m[k].clone();
        let akk = &pivot_row[k];
        for (i, row) in m.iter_mut().enumerate() {
            if i == k {
                continue;
            }
            let aik = row[k].clone();
            for j in 0..=n {
                if j == k {
                    continue;
                }
                let updated = if aik.is_zero() || pivot_row[j].is_zero() {
                    if row[j].is_zero() {
                        continue;
                    }
                    akk.mul(&row[j])
                } else {
                    akk.mul(&row[j]).sub(&aik.mul(&pivot_row[j]))
                };
                row[j] = if updated.is_zero() {
                    updated
                } else {
                    updated.exact_div(&prev)
                };
            }
            row[k] = R::zero();
        }
        prev = akk.clone();
    }
    let xs = m.into_iter().map(|mut row| row.pop().expect("n+1 columns")).collect();
    Ok((xs, prev))
}

fn check_square<T>(a: &[Vec<T>], b: &[T]) -> Result<()> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "expected a square {n} x {n} system with {n} right-hand sides"
        )));
    }
    Ok(())
}

/// Exact solve over the rationals.
pub fn solve_linear_rational(a: &[Vec<Rational>], b: &[Rational]) -> Result<Vec<Rational>> {
    check_square(a, b)?;
    let rows = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let l = row
                .iter()
                .chain(std::iter::once(bi))
                .fold(<BigInt as One>::one(), |acc, c| acc.lcm(c.denom()));
            let lr = Rational::from_integer(l);
            row.iter()
                .chain(std::iter::once(bi))
                .map(|c| (c * &lr).to_integer())
                .collect()
        })
        .collect();
    let (xs, det) = bareiss_solve::<BigInt>(rows)?;
    Ok(xs
        .into_iter()
        .map(|x| Rational::new(x, det.clone()))
        .collect())
}

/// Integer-polynomial rows proportional to the given polynomial rows.
pub(crate) fn int_rows(rows: &[Vec<Poly>]) -> Vec<Vec<IntPoly>> {
    rows.iter()
        .map(|row| {
            let l = row
                .iter()
                .fold(<BigInt as One>::one(), |acc, p| acc.lcm(&p.denominator_lcm()));
            let lr = Rational::from_integer(l);
            row.iter()
                .map(|p| IntPoly::from_poly(&p.scale(&lr)).0)
                .collect()
        })
        .collect()
}

/// Exact solve with polynomial coefficients; the solution is rational.
pub fn solve_linear_poly(a: &[Vec<Poly>], b: &[Poly]) -> Result<Vec<RatFun>> {
    check_square(a, b)?;
    let rows: Vec<Vec<Poly>> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| r.iter().cloned().chain(std::iter::once(bi.clone())).collect())
        .collect();
    let (xs, det) = bareiss_solve(int_rows(&rows))?;
    let d = det.to_poly();
    xs.iter()
        .map(|x| RatFun::new(x.to_poly(), d.clone()))
        .collect()
}

/// Exact solve with rational-function coefficients.
pub fn solve_linear_ratfun(a: &[Vec<RatFun>], b: &[RatFun]) -> Result<Vec<RatFun>> {
    check_square(a, b)?;
    let mut pa = Vec::with_capacity(a.len());
    let mut pb = Vec::with_capacity(a.len());
    for (row, bi) in a.iter().zip(b) {
        // Multiply the row through by the lcm of its denominators.
        let l = row
            .iter()
            .chain(std::iter::once(bi))
            .fold(Poly::one(), |acc, f| {
                let g = Poly::gcd(&acc, f.den());
                let (q, _) = f.den().div_rem(&g).expect("nonzero gcd");
                &acc * &q
            });
        let clear = |f: &RatFun| {
            let (q, _) = l.div_rem(f.den()).expect("nonzero den");
            f.num() * &q
        };
        pa.push(row.iter().map(clear).collect::<Vec<_>>());
        pb.push(clear(bi));
    }
    solve_linear_poly(&pa, &pb)
}
