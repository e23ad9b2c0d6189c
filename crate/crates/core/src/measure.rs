//! Finitely supported probability measures on `[-inf, +inf)`.
//!
//! Probabilities are exact rationals. Sampling uses an inverse CDF over
//! 64-bit uniforms with thresholds `ceil(F_i * 2^64)` computed exactly, so
//! two measures driven by the same bits are coupled monotonically whenever
//! one is stochastically below the other.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::{to_f64, Rational};

/// A real number or `-inf`. Never NaN, never `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XReal(f64);

impl XReal {
    pub const NEG_INFINITY: XReal = XReal(f64::NEG_INFINITY);
    pub const ZERO: XReal = XReal(0.0);

    pub fn new(v: f64) -> Result<Self> {
        if v.is_nan() || v == f64::INFINITY {
            return Err(Error::InvalidArgument(format!("{v} is not in [-inf, inf)")));
        }
        Ok(XReal(v))
    }

    /// Panics on NaN or `+inf`.
    pub fn finite(v: f64) -> Self {
        assert!(v.is_finite(), "expected a finite value, got {v}");
        XReal(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_neg_infinity(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl Eq for XReal {}

impl PartialOrd for XReal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for XReal {
    fn cmp(&self, o: &Self) -> Ordering {
        // Identify 0.0 and -0.0; no NaN can be present.
        self.0.partial_cmp(&o.0).expect("no NaN")
    }
}

impl Add for XReal {
    type Output = XReal;
    fn add(self, o: XReal) -> XReal {
        XReal(self.0 + o.0)
    }
}

impl fmt::Display for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_neg_infinity() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for XReal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("-inf") {
            return Ok(XReal::NEG_INFINITY);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("bad atom value {t:?}")))?;
        if !v.is_finite() {
            return Err(Error::Parse(format!("atom value {t:?} is not finite or -inf")));
        }
        Ok(XReal(v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub value: XReal,
    pub prob: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measure {
    atoms: Vec<Atom>,
    /// `ceil(F_i * 2^64)` for each atom, the last forced to `2^64`.
    thresholds: Vec<u128>,
}

/// Decomposition `nu = p delta_top + (1 - p) nu_below`.
#[derive(Clone, Debug, PartialEq)]
pub struct TopSplit {
    pub p: Rational,
    pub top: f64,
    /// Conditional law below the top; `None` when `p = 1`.
    pub below: Option<Measure>,
}

impl TopSplit {
    pub fn p_f64(&self) -> f64 {
        to_f64(&self.p)
    }
}

const TWO64: u128 = 1u128 << 64;

fn threshold(cum: &Rational) -> u128 {
    let scaled = cum * Rational::from_integer(BigInt::from(TWO64));
    scaled.ceil().to_integer().to_u128().unwrap_or(TWO64).min(TWO64)
}

/// Builds a measure from `(value, probability)` pairs.
///
/// Atoms are sorted and equal values merged; the probabilities must be
/// positive and sum to exactly one.
pub fn make_measure(atoms: Vec<(XReal, Rational)>) -> Result<Measure> {
    if atoms.is_empty() {
        return Err(Error::InvalidMeasure("no atoms".into()));
    }
    if let Some((v, p)) = atoms.iter().find(|(_, p)| !p.is_positive()) {
        return Err(Error::InvalidMeasure(format!(
            "atom at {v} has non-positive probability {p}"
        )));
    }
    let total: Rational = atoms.iter().map(|(_, p)| p.clone()).sum();
    if !total.is_one() {
        return Err(Error::InvalidMeasure(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    let mut sorted = atoms;
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<Atom> = Vec::with_capacity(sorted.len());
    for (value, prob) in sorted {
        match merged.last_mut() {
            Some(last) if last.value == value => last.prob += prob,
            _ => merged.push(Atom { value, prob }),
        }
    }
    Ok(Measure::from_atoms(merged))
}

impl Measure {
    fn from_atoms(atoms: Vec<Atom>) -> Measure {
        let mut cum = Rational::zero();
        let mut thresholds: Vec<u128> = atoms
            .iter()
            .map(|a| {
                cum += &a.prob;
                threshold(&cum)
            })
            .collect();
        *thresholds.last_mut().expect("nonempty") = TWO64;
        Measure { atoms, thresholds }
    }

    pub fn dirac(v: XReal) -> Measure {
        Measure::from_atoms(vec![Atom {
            value: v,
            prob: Rational::one(),
        }])
    }

    /// `(1 - p) delta_m + p delta_top` (merged when `m == top`).
    pub fn two_atom(m: f64, top: f64, p: Rational) -> Result<Measure> {
        if p.is_one() {
            return Ok(Measure::dirac(XReal::new(top)?));
        }
        make_measure(vec![
            (XReal::new(m)?, Rational::one() - &p),
            (XReal::new(top)?, p),
        ])
    }

    /// Atoms in increasing order of value.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn essential_sup(&self) -> XReal {
        self.atoms.last().expect("nonempty").value
    }

    /// Errors when the support is `{-inf}`, since the top atom must be finite.
    pub fn split_top(&self) -> Result<TopSplit> {
        let top = self.atoms.last().expect("nonempty");
        if !top.value.is_finite() {
            return Err(Error::InvalidMeasure(
                "essential supremum is -inf".into(),
            ));
        }
        let p = top.prob.clone();
        let below = if self.atoms.len() == 1 {
            None
        } else {
            let rest = Rational::one() - &p;
            Some(Measure::from_atoms(
                self.atoms[..self.atoms.len() - 1]
                    .iter()
                    .map(|a| Atom {
                        value: a.value,
                        prob: &a.prob / &rest,
                    })
                    .collect(),
            ))
        };
        Ok(TopSplit {
            p,
            top: top.value.value(),
            below,
        })
    }

    /// Inverse of [`Measure::split_top`].
    pub fn reassemble(split: &TopSplit) -> Result<Measure> {
        let mut atoms = vec![(XReal::new(split.top)?, split.p.clone())];
        if let Some(b) = &split.below {
            let rest = Rational::one() - &split.p;
            atoms.extend(b.atoms.iter().map(|a| (a.value, &a.prob * &rest)));
        }
        make_measure(atoms)
    }

    /// Index of the atom selected by 64 uniform bits.
    #[inline]
    pub fn index_for_bits(&self, u: u64) -> usize {
        let u = u as u128;
        self.thresholds
            .iter()
            .position(|&t| u < t)
            .expect("last threshold is 2^64")
    }

    #[inline]
    pub fn sample_bits(&self, u: u64) -> XReal {
        self.atoms[self.index_for_bits(u)].value
    }

    /// Sample from a uniform in `[0, 1)`.
    pub fn sample_unit(&self, u: f64) -> XReal {
        self.sample_bits(unit_to_bits(u))
    }

    pub fn sample<R: rand_core::RngCore>(&self, rng: &mut R) -> XReal {
        self.sample_bits(rng.next_u64())
    }

    /// Values in atom order, for hot loops.
    pub fn values(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.value.value()).collect()
    }

    /// `thresholds[i]` as `u64` boundaries; the last one is implicit.
    pub(crate) fn thresholds(&self) -> &[u128] {
        &self.thresholds
    }

    pub fn cdf(&self, x: XReal) -> Rational {
        self.atoms
            .iter()
            .take_while(|a| a.value <= x)
            .map(|a| a.prob.clone())
            .sum()
    }

    /// Multiply every atom by `c > 0`.
    pub fn rescale(&self, c: f64) -> Result<Measure> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive and finite, got {c}"
            )));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok((XReal::new(a.value.value() * c)?, a.prob.clone())))
            .collect::<Result<Vec<_>>>()?;
        make_measure(atoms)
    }

    pub fn mean_f64(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.value.value() * to_f64(&a.prob))
            .sum()
    }
}

/// `u * 2^64`, saturated to the `u64` range.
pub fn unit_to_bits(u: f64) -> u64 {
    if !(u > 0.0) {
        0
    } else if u >= 1.0 {
        u64::MAX
    } else {
        (u * 18_446_744_073_709_551_616.0) as u64
    }
}

/// `a <= b` in the usual stochastic order: `F_a(x) >= F_b(x)` for all `x`.
pub fn stochastically_leq(a: &Measure, b: &Measure) -> bool {
    a.atoms
        .iter()
        .chain(b.atoms.iter())
        .all(|at| a.cdf(at.value) >= b.cdf(at.value))
}

fn parse_prob(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("bad probability {t:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    // Decimal literal, read exactly.
    let (int, frac) = t.split_once('.').unwrap_or((t, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{}{}", if int.is_empty() { "0" } else { int }, frac)
        .parse()
        .map_err(|_| bad())?;
    Ok(Rational::new(digits, BigInt::from(10u32).pow(frac.len() as u32)))
}

/// Grammar: `value:prob,value:prob,...` with `value` a float or `-inf` and
/// `prob` a fraction `a/b` or a decimal. A single atom may omit `:prob`.
impl FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        if parts.is_empty() {
            return Err(Error::Parse("empty measure".into()));
        }
        let mut atoms = Vec::with_capacity(parts.len());
        for part in &parts {
            match part.split_once(':') {
                Some((v, p)) => atoms.push((v.parse()?, parse_prob(p)?)),
                None if parts.len() == 1 => atoms.push((part.parse()?, Rational::one())),
                None => return Err(Error::Parse(format!("atom {part:?} lacks a probability"))),
            }
        }
        make_measure(atoms)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self
            .atoms
            .iter()
            .map(|a| format!("{}:{}", a.value, a.prob))
            .collect();
        f.write_str(&s.join(","))
    }
}
