//! Triangular words and the series expansion of the time constant.
//!
//! A word `alpha` is triangular when `alpha_i <= i` for every `i`, and
//! minimal triangular when in addition no proper nonempty suffix is
//! triangular. For `nu = p delta_M + (1 - p) mu` the time constant is
//!
//! ```text
//! C = sum_beta p^|beta| (1 - p)^H(beta) E_mu[ s_end(beta, x) ]
//! ```
//!
//! over minimal triangular words `beta`, where `H` is the height and the
//! expectation is over i.i.d. `mu` sub-top weights.

use std::collections::HashMap;
use std::fmt;

use rand_core::RngCore;

use crate::error::{invalid, Error, Result};
use crate::lpp::Sampler;
use crate::measure::{Measure, TopSplit, XReal};
use crate::mgs::Config;
use crate::numeric::{to_f64, SeriesResult};
use crate::rng::{Domain, StreamKey};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn new(letters: Vec<u32>) -> Result<Word> {
        if letters.contains(&0) {
            return invalid("letters must be positive");
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_triangular(&self) -> bool {
        is_triangular(&self.0)
    }

    pub fn is_minimal_triangular(&self) -> bool {
        is_triangular(&self.0) && (1..self.0.len()).all(|s| !is_triangular(&self.0[s..]))
    }

    /// `sum (alpha_i - 1)`.
    pub fn height(&self) -> u64 {
        self.0.iter().map(|&a| a as u64 - 1).sum()
    }

    /// `(1, ..., 1, k + 1, k, ..., 2)` with `k` leading ones.
    pub fn staircase(k: u32) -> Word {
        let mut v = vec![1; k as usize];
        v.extend((2..=k + 1).rev());
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", s.join(","))
    }
}

fn is_triangular(a: &[u32]) -> bool {
    a.iter().enumerate().all(|(i, &x)| x as usize <= i + 1)
}

/// Stream of minimal triangular words with `|beta| <= max_len` and
/// `H(beta) <= max_height`, in length-then-lex order.
///
/// Along the current prefix the iterator keeps the stack of suffix starts
/// `s >= 2` whose suffix is still triangular. Appending letter `a` at
/// position `t` removes every start `s > t + 1 - a` (always a top segment
/// of the stack) and pushes `t` when `a = 1`; the word is minimal exactly
/// when the stack is empty.
pub struct MinimalTriangularWords {
    max_len: usize,
    max_height: u64,
    target: usize,
    word: Vec<u32>,
    next_letter: Vec<u32>,
    heights: Vec<u64>,
    alive: Vec<Vec<u32>>,
}

pub fn enumerate_minimal_triangular(max_len: usize, max_height: u64) -> MinimalTriangularWords {
    MinimalTriangularWords {
        max_len,
        max_height,
        target: 1,
        word: Vec::new(),
        next_letter: vec![1; max_len + 2],
        heights: vec![0],
        alive: vec![Vec::new()],
    }
}

impl Iterator for MinimalTriangularWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        loop {
            if self.target > self.max_len {
                return None;
            }
            let t = self.word.len();
            if t == self.target {
                let w = Word(self.word.clone());
                self.pop();
                return Some(w);
            }
            let pos = t + 1;
            let a = self.next_letter[pos];
            let h = self.heights[t] + a as u64 - 1;
            if a as usize > pos || h > self.max_height {
                self.next_letter[pos] = 1;
                if t == 0 {
                    self.target += 1;
                } else {
                    self.pop();
                }
                continue;
            }
            self.next_letter[pos] = a + 1;
            let limit = (pos + 1 - a as usize) as u32;
            let mut alive: Vec<u32> = self.alive[t]
                .iter()
                .copied()
                .take_while(|&s| s <= limit)
                .collect();
            if a == 1 && pos >= 2 {
                alive.push(pos as u32);
            }
            if let Some(&top) = alive.last() {
                let remaining = self.target - pos;
                // Cheapest way to kill `top` is a letter at position pos + 1.
                let extra = (pos + 2) as u64 - top as u64;
                if remaining == 0 || h + extra > self.max_height {
                    continue;
                }
            }
            self.word.push(a);
            self.heights.truncate(pos);
            self.heights.push(h);
            self.alive.truncate(pos);
            self.alive.push(alive);
        }
    }
}

impl MinimalTriangularWords {
    fn pop(&mut self) {
        self.word.pop();
        let t = self.word.len();
        self.heights.truncate(t + 1);
        self.alive.truncate(t + 1);
    }
}

/// Sub-top weights `x^{(i)}_j` for `j < beta_i`, one row per letter.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment(pub Vec<Vec<XReal>>);

impl Assignment {
    pub fn empty_for(beta: &Word) -> Assignment {
        Assignment(beta.0.iter().map(|&b| vec![XReal::NEG_INFINITY; b as usize - 1]).collect())
    }
}

fn check_assignment(m: f64, beta: &Word, x: &Assignment) -> Result<()> {
    if !beta.is_triangular() {
        return invalid(format!("{beta} is not triangular"));
    }
    if x.0.len() != beta.len()
        || x.0.iter().zip(&beta.0).any(|(row, &b)| row.len() != b as usize - 1)
    {
        return invalid(format!("assignment shape does not match {beta}"));
    }
    if x.0.iter().flatten().any(|v| v.value() >= m) {
        return invalid("every sub-top weight must lie below the top atom");
    }
    Ok(())
}

/// Front displacement at the last letter of `beta` when step `i` gives
/// weight `M` to the particle of rank `beta_i`, the assigned weights to the
/// particles above it and `-inf` to those below.
pub fn s_end(m: f64, beta: &Word, x: &Assignment) -> Result<f64> {
    s_end_from(&Config::delta(XReal::ZERO), m, beta, x)
}

/// As [`s_end`] but started from an arbitrary nonempty configuration.
pub fn s_end_from(start: &Config, m: f64, beta: &Word, x: &Assignment) -> Result<f64> {
    check_assignment(m, beta, x)?;
    if start.is_empty() || !start.front().is_finite() {
        return invalid("start configuration needs a finite front");
    }
    Ok(s_end_unchecked(start, m, beta, x))
}

fn s_end_unchecked(start: &Config, m: f64, beta: &Word, x: &Assignment) -> f64 {
    let mut cfg = start.clone();
    let mut prev_front = cfg.front().value();
    let mut last = 0.0;
    for (row, &b) in x.0.iter().zip(&beta.0) {
        let before = cfg.front().value();
        cfg.advance_top(b as usize, m, |j| row[j - 1].value());
        let after = cfg.front().value();
        prev_front = before;
        last = after;
    }
    last - prev_front
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrationMode {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTerm {
    pub word: Word,
    /// `(|beta|, H(beta))`: the term carries `p^|beta| (1 - p)^H`.
    pub weight_poly: (usize, u64),
    pub integral: f64,
    pub mode: IntegrationMode,
    pub integral_err: f64,
}

/// Assignment evaluations allowed per word in exact mode.
pub const EXACT_CAP: u64 = 1_000_000;

fn word_stream(beta: &Word) -> u64 {
    // FNV-1a over the letters.
    beta.0.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &a| {
        (h ^ a as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// `E_mu[s_end(beta, x)]` for i.i.d. `mu` sub-top weights.
pub fn word_integral(
    m: f64,
    beta: &Word,
    mu: Option<&Measure>,
    mode: IntegrationMode,
    mc_samples: usize,
    seed: u64,
) -> Result<SeriesTerm> {
    if !beta.is_triangular() {
        return invalid(format!("{beta} is not triangular"));
    }
    let h = beta.height();
    let term = |integral, mode, integral_err| SeriesTerm {
        word: beta.clone(),
        weight_poly: (beta.len(), h),
        integral,
        mode,
        integral_err,
    };
    let start = Config::delta(XReal::ZERO);
    if h == 0 {
        let x = Assignment::empty_for(beta);
        return Ok(term(s_end_unchecked(&start, m, beta, &x), IntegrationMode::Exact, 0.0));
    }
    let mu = mu.ok_or_else(|| {
        Error::InvalidArgument("a sub-top law is needed for words of positive height".into())
    })?;
    if mu.essential_sup().value() >= m {
        return invalid("every atom of the sub-top law must lie below the top atom");
    }
    let atoms = mu.atoms();
    let mut x = Assignment::empty_for(beta);
    match mode {
        IntegrationMode::Exact => {
            let count = (atoms.len() as u64).checked_pow(h as u32).filter(|&c| c <= EXACT_CAP);
            let Some(count) = count else {
                return Err(Error::CapExceeded {
                    what: "exact assignments (use sampled mode)",
                    cap: EXACT_CAP,
                    requested: (atoms.len() as f64).powf(h as f64).min(u64::MAX as f64) as u64,
                });
            };
            let probs: Vec<f64> = atoms.iter().map(|a| to_f64(&a.prob)).collect();
            let slots: Vec<(usize, usize)> = x
                .0
                .iter()
                .enumerate()
                .flat_map(|(i, row)| (0..row.len()).map(move |j| (i, j)))
                .collect();
            let mut digits = vec![0usize; slots.len()];
            let mut total = 0.0;
            for _ in 0..count {
                let mut w = 1.0;
                for (&(i, j), &d) in slots.iter().zip(&digits) {
                    x.0[i][j] = atoms[d].value;
                    w *= probs[d];
                }
                total += w * s_end_unchecked(&start, m, beta, &x);
                for d in digits.iter_mut() {
                    *d += 1;
                    if *d < atoms.len() {
                        break;
                    }
                    *d = 0;
                }
            }
            Ok(term(total, IntegrationMode::Exact, 0.0))
        }
        IntegrationMode::Sampled => {
            if mc_samples < 2 {
                return invalid("sampled mode needs at least two samples");
            }
            let s = Sampler::new(mu);
            let mut rng = StreamKey::new(seed, Domain::Word, word_stream(beta)).stream(0);
            let vals: Vec<f64> = (0..mc_samples)
                .map(|_| {
                    for row in x.0.iter_mut() {
                        for v in row.iter_mut() {
                            *v = XReal::new(s.value(rng.next_u64())).expect("valid atom");
                        }
                    }
                    s_end_unchecked(&start, m, beta, &x)
                })
                .collect();
            let e = crate::Estimate::from_samples(&vals).expect("nonempty");
            Ok(term(e.mean, IntegrationMode::Sampled, 3.0 * e.std_err))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesDetail {
    pub result: SeriesResult,
    /// Partial sum over words of length at most `l`, for `l = 1..=L`.
    pub partial_sums: Vec<f64>,
    /// Total probability `sum p^|beta| (1 - p)^H` of the enumerated words.
    pub enumerated_mass: f64,
}

pub fn series_c(
    split: &TopSplit,
    p_eval: f64,
    max_len: usize,
    max_height: u64,
    mode: IntegrationMode,
    seed: u64,
) -> Result<SeriesResult> {
    Ok(series_c_detailed(split, p_eval, max_len, max_height, mode, 10_000, seed)?.result)
}

/// Truncated series for `C(p_eval delta_M + (1 - p_eval) mu)` with
/// `mu = split.below`.
///
/// The minimal triangular words carry total probability one, so the
/// dropped part is at most `M` times the probability not enumerated; the
/// reported bound is that, plus the Monte Carlo error of sampled words.
pub fn series_c_detailed(
    split: &TopSplit,
    p_eval: f64,
    max_len: usize,
    max_height: u64,
    mode: IntegrationMode,
    mc_samples: usize,
    seed: u64,
) -> Result<SeriesDetail> {
    if !(p_eval > 0.0 && p_eval <= 1.0) {
        return invalid(format!("p must lie in (0, 1], got {p_eval}"));
    }
    if max_len == 0 {
        return invalid("maximum word length must be positive");
    }
    let m = split.top;
    let q = 1.0 - p_eval;
    let mut partial = vec![0.0; max_len];
    let mut sum = 0.0;
    let mut mass = 0.0;
    let mut err = 0.0;
    let mut terms = 0usize;
    for beta in enumerate_minimal_triangular(max_len, max_height) {
        let (len, h) = (beta.len(), beta.height());
        let weight = p_eval.powi(len as i32) * q.powi(h as i32);
        if weight == 0.0 {
            continue;
        }
        let t = word_integral(m, &beta, split.below.as_ref(), mode, mc_samples, seed)?;
        sum += weight * t.integral;
        err += weight * t.integral_err;
        mass += weight;
        partial[len - 1] += weight * t.integral;
        terms += 1;
    }
    for l in 1..max_len {
        partial[l] += partial[l - 1];
    }
    let rounding = terms as f64 * 4.0 * f64::EPSILON;
    let tail_bound = m.abs() * ((1.0 - mass).max(0.0) + rounding) + err;
    Ok(SeriesDetail {
        result: SeriesResult {
            value: sum,
            tail_bound,
            terms_used: terms,
        },
        partial_sums: partial,
        enumerated_mass: mass,
    })
}

/// Longest length accepted by [`word_mass_by_length`].
pub const MASS_MAX_LEN: usize = 30;

/// `mass[l - 1] = sum p^|beta| (1 - p)^H(beta)` over minimal triangular
/// words of length `l`, for `l = 1..=max_len`.
///
/// Runs the enumeration's alive-suffix recursion on distributions: two
/// prefixes of equal length with the same set of live suffix starts have
/// the same continuations, so only `2^(l-1)` states are needed at length
/// `l` regardless of height.
pub fn word_mass_by_length(p: f64, max_len: usize) -> Result<Vec<f64>> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("p must lie in (0, 1], got {p}"));
    }
    if max_len > MASS_MAX_LEN {
        return Err(Error::CapExceeded {
            what: "word length for the mass recursion",
            cap: MASS_MAX_LEN as u64,
            requested: max_len as u64,
        });
    }
    let q = 1.0 - p;
    // Bit `s` set: the suffix starting at position `s` is still triangular.
    let mut states: HashMap<u32, f64> = HashMap::from([(0, 1.0)]);
    let mut mass = Vec::with_capacity(max_len);
    for t in 0..max_len {
        let pos = t + 1;
        let mut next: HashMap<u32, f64> = HashMap::with_capacity(states.len() * 2);
        for (&alive, &w) in &states {
            let mut weight = w * p;
            for a in 1..=pos {
                let limit = pos + 1 - a;
                let mut keep = alive & ((1u32 << (limit + 1)) - 1);
                if a == 1 && pos >= 2 {
                    keep |= 1 << pos;
                }
                *next.entry(keep).or_insert(0.0) += weight;
                weight *= q;
                if weight == 0.0 {
                    break;
                }
            }
        }
        mass.push(next.get(&0).copied().unwrap_or(0.0));
        states = next;
    }
    Ok(mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[u32]) -> Word {
        Word(v.to_vec())
    }

    fn xr(v: f64) -> XReal {
        XReal::new(v).unwrap()
    }

    #[test]
    fn mass_recursion_matches_enumeration() {
        for p in [0.3, 0.5, 0.8] {
            let mass = word_mass_by_length(p, 8).unwrap();
            let mut direct = vec![0.0; 8];
            for b in enumerate_minimal_triangular(8, u64::MAX) {
                direct[b.len() - 1] += p.powi(b.len() as i32) * (1.0 - p).powi(b.height() as i32);
            }
            for (a, b) in mass.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-14, "{a} vs {b}");
            }
        }
        assert_eq!(word_mass_by_length(1.0, 5).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(word_mass_by_length(0.5, MASS_MAX_LEN + 1).is_err());
    }

    #[test]
    fn predicates() {
        assert!(w(&[1, 2, 2, 4]).is_triangular());
        assert!(!w(&[2]).is_triangular());
        assert!(w(&[1, 1, 1]).is_triangular());
        assert!(w(&[]).is_triangular());
        assert!(w(&[1]).is_minimal_triangular());
        assert!(!w(&[1, 1]).is_minimal_triangular());
        assert!(w(&[1, 1, 3, 2]).is_minimal_triangular());
        assert_eq!(Word::staircase(2), w(&[1, 1, 3, 2]));
        assert_eq!(w(&[1, 2, 2, 4]).height(), 5);
        assert_eq!(Word::staircase(4).height(), 10);
        assert!(Word::new(vec![1, 0]).is_err());
    }

    #[test]
    fn small_enumerations() {
        let l1: Vec<Word> = enumerate_minimal_triangular(1, 100).collect();
        assert_eq!(l1, vec![w(&[1])]);
        let l2: Vec<Word> = enumerate_minimal_triangular(2, 100).collect();
        assert_eq!(l2, vec![w(&[1]), w(&[1, 2])]);
        let l3: Vec<Word> = enumerate_minimal_triangular(3, 100).filter(|b| b.len() == 3).collect();
        assert_eq!(l3, vec![w(&[1, 1, 3]), w(&[1, 2, 2]), w(&[1, 2, 3])]);
    }

    #[test]
    fn figure_example() {
        let beta = w(&[1, 2, 2, 4]);
        let x = Assignment(vec![
            vec![],
            vec![xr(0.5)],
            vec![xr(-0.2)],
            vec![xr(-1.5), xr(0.5), xr(0.0)],
        ]);
        assert_eq!(s_end(1.0, &beta, &x).unwrap(), 0.0);
        assert_eq!(s_end(3.0, &w(&[1]), &Assignment(vec![vec![]])).unwrap(), 3.0);
        let x2 = Assignment(vec![vec![], vec![xr(0.25)]]);
        assert_eq!(s_end(1.0, &w(&[1, 2]), &x2).unwrap(), 0.25);
    }

    #[test]
    fn s_end_rejects_bad_input() {
        assert!(s_end(1.0, &w(&[2]), &Assignment(vec![vec![xr(0.0)]])).is_err());
        let x = Assignment(vec![vec![], vec![xr(1.0)]]);
        assert!(s_end(1.0, &w(&[1, 2]), &x).is_err());
        let short = Assignment(vec![vec![]]);
        assert!(s_end(1.0, &w(&[1, 2]), &short).is_err());
    }

    #[test]
    fn integrals() {
        let d: Measure = "0.3".parse().unwrap();
        let t = word_integral(1.0, &w(&[1, 2]), Some(&d), IntegrationMode::Exact, 0, 0).unwrap();
        assert!((t.integral - 0.3).abs() < 1e-15);
        let two: Measure = "0:1/2,0.6:1/2".parse().unwrap();
        let t = word_integral(1.0, &w(&[1, 2]), Some(&two), IntegrationMode::Exact, 0, 0).unwrap();
        assert!((t.integral - 0.3).abs() < 1e-15);
        let t = word_integral(2.0, &w(&[1]), None, IntegrationMode::Exact, 0, 0).unwrap();
        assert_eq!((t.integral, t.weight_poly), (2.0, (1, 0)));
        let many: Measure = "0:1/4,0.1:1/4,0.2:1/4,0.3:1/4".parse().unwrap();
        assert!(matches!(
            word_integral(1.0, &Word::staircase(5), Some(&many), IntegrationMode::Exact, 0, 0),
            Err(Error::CapExceeded { .. })
        ));
        assert!(word_integral(1.0, &w(&[1, 2]), Some(&d), IntegrationMode::Sampled, 100, 0).is_ok());
    }

    #[test]
    fn series_at_p_one_is_exact() {
        let split = Measure::dirac(xr(1.0)).split_top().unwrap();
        let r = series_c(&split, 1.0, 6, 30, IntegrationMode::Exact, 0).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.tail_bound < 1e-12);
    }
}
