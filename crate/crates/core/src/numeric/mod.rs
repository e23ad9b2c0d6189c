//! Exact arithmetic, rational functions, linear solves and series helpers.

mod intpoly;
mod linsolve;
mod poly;
mod ratfun;
mod series;

pub use intpoly::IntPoly;
pub use linsolve::{
    bareiss_solve, solve_linear_poly, solve_linear_ratfun, solve_linear_rational, ExactRing,
};
pub use poly::{poly_arith, Poly, PolyOp};
pub use ratfun::RatFun;
pub use series::{euler_gamma, sum_series, SeriesResult};

pub(crate) use linsolve::int_rows;

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Nearest double to an exact rational.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational value of a finite double.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
