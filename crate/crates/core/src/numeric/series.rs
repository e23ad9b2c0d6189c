//! Truncated series and products with explicit remainder bounds.

use crate::error::{invalid, Error, Result};

/// A truncated sum or product with a rigorous bound on what was dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// Sums `term(1) + term(2) + ...` until `tail(K)`, a bound on the remainder
/// after `K` terms, drops to `tol`.
pub fn sum_series<T, B>(term: T, tail: B, tol: f64, max_terms: usize) -> Result<SeriesResult>
where
    T: Fn(usize) -> f64,
    B: Fn(usize) -> f64,
{
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut best = f64::INFINITY;
    for k in 1..=max_terms {
        // Neumaier summation keeps long sums accurate to a few ulps.
        let t = term(k);
        let s = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
        let b = tail(k);
        best = best.min(b);
        if b <= tol {
            return Ok(SeriesResult {
                value: sum + comp,
                tail_bound: b,
                terms_used: k,
            });
        }
    }
    Err(Error::NoConvergence {
        terms: max_terms,
        best_bound: best,
    })
}

/// `prod_{k >= 1} (1 - q^k)` for `0 <= q < 1`.
///
/// After `K` factors the log of the dropped product lies in
/// `[-q^{K+1} / (1-q)^2, 0]`, which bounds the absolute error by
/// `value * q^{K+1} / (1-q)^2`.
pub fn euler_gamma(q: f64, tol: f64) -> Result<SeriesResult> {
    if !(0.0..1.0).contains(&q) {
        return invalid(format!("q must lie in [0, 1), got {q}"));
    }
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    if q == 0.0 {
        return Ok(SeriesResult {
            value: 1.0,
            tail_bound: 0.0,
            terms_used: 1,
        });
    }
    let scale = 1.0 / ((1.0 - q) * (1.0 - q));
    let mut prod = 1.0;
    let mut qk = 1.0;
    let max_terms = 100_000_000;
    for k in 1..=max_terms {
        qk *= q;
        prod *= 1.0 - qk;
        let bound = prod * qk * q * scale;
        if bound <= tol || qk == 0.0 {
            return Ok(SeriesResult {
                value: prod,
                tail_bound: bound,
                terms_used: k,
            });
        }
    }
    Err(Error::NoConvergence {
        terms: max_terms,
        best_bound: prod * qk * scale,
    })
}
