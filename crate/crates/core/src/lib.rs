//! Last-passage percolation on the complete directed acyclic graph.
//!
//! Edge `(i, j)`, `i < j`, carries an i.i.d. weight drawn from a measure
//! `nu`; the time constant `C(nu)` is the linear growth rate of the heaviest
//! path from vertex 0 to vertex n. The crate computes `C` by simulation,
//! by a renovating max-growth recursion, by a series over triangular words
//! and, for two-atom measures, exactly as a rational function of the top
//! atom probability.

pub mod analysis;
pub mod error;
pub mod lpp;
pub mod measure;
pub mod mgs;
pub mod numeric;
pub mod rng;
pub mod selftest;
pub mod twoatom;
pub mod words;

pub use error::{Error, Result};
pub use measure::{Measure, TopSplit, XReal};
pub use numeric::{Poly, RatFun, Rational, SeriesResult};

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub replicas: usize,
}

impl Estimate {
    /// Sample mean and standard error of the mean.
    pub fn from_samples(xs: &[f64]) -> Option<Estimate> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std_err = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Estimate {
            mean,
            std_err,
            replicas: n,
        })
    }
}
