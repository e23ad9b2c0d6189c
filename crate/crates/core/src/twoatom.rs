//! Exact time constants for two-atom weights.
//!
//! For `nu = (1 - p) delta_{1/k} + p delta_1`, measured in units of `1/k`
//! the weights are `1` and `k`. Seen from the front, only particles less
//! than `k` units below it can ever matter, so the configuration lives in
//! the finite set of subsets of `{1, ..., k-1}` (occupied offsets below the
//! front). The front advances by `D` per step and
//! `C = (1/k) sum_S pi_S E[D | S]` for the stationary law `pi`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::numeric::{
    bareiss_solve, int_rows, rational_from_f64, to_f64, IntPoly, Poly, RatFun, Rational,
    solve_linear_rational,
};

pub const MAX_K: usize = 14;

/// Occupied offsets below the front: bit `i - 1` marks a particle at `-i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EkState(pub u32);

impl EkState {
    /// Offsets `0 = q_1 < q_2 < ...` (distances below the front), front first.
    pub fn offsets(self) -> Vec<u32> {
        let mut v = vec![0];
        let mut b = self.0;
        while b != 0 {
            let i = b.trailing_zeros();
            v.push(i + 1);
            b &= b - 1;
        }
        v
    }
}

/// Jump law of the front from state `s`: `(D, index of p^a (1-p)^b)`.
fn jumps(k: u32, s: EkState) -> Vec<(u32, u32, u32)> {
    // (D, a, b): probability p^a (1 - p)^b.
    let offs = s.offsets();
    let mut out: Vec<(u32, u32, u32)> = offs
        .iter()
        .enumerate()
        .map(|(j, &o)| (k - o, 1, j as u32))
        .collect();
    out.push((1, 0, offs.len() as u32));
    out
}

fn next_state(k: u32, s: EkState, d: u32) -> EkState {
    let mut bits = 0u32;
    for o in s.offsets() {
        let i = o + d;
        if i < k {
            bits |= 1 << (i - 1);
        }
    }
    EkState(bits)
}

/// Sparse transition structure with polynomial entries in `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolicChain {
    pub k: usize,
    pub states: Vec<EkState>,
    /// `trans[s]` lists `(t, P(s -> t))` for the nonzero entries.
    pub trans: Vec<Vec<(usize, Poly)>>,
    pub drift: Vec<Poly>,
}

impl SymbolicChain {
    pub fn entry(&self, from: usize, to: usize) -> Poly {
        self.trans[from]
            .iter()
            .find(|(t, _)| *t == to)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Poly::zero)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Transition matrix with `p` replaced by an exact value.
    fn eval_rows(&self, p: &Rational) -> Vec<Vec<(usize, Rational)>> {
        self.trans
            .iter()
            .map(|row| row.iter().map(|(t, f)| (*t, f.eval(p))).collect())
            .collect()
    }
}

fn check_k(k: usize) -> Result<()> {
    if !(1..=MAX_K).contains(&k) {
        return invalid(format!("k must lie in 1..={MAX_K}, got {k}"));
    }
    if k > 10 {
        log::warn!("k = {k}: the chain has {} states; this will be slow", 1usize << (k - 1));
    }
    Ok(())
}

pub fn build_chain(k: usize) -> Result<SymbolicChain> {
    check_k(k)?;
    let kk = k as u32;
    let n = 1usize << (k - 1);
    let one_minus = Poly::one_minus_var();
    let mut qpow = vec![Poly::one()];
    for i in 1..=k {
        qpow.push(&qpow[i - 1] * &one_minus);
    }
    let p = Poly::var();
    let states: Vec<EkState> = (0..n as u32).map(EkState).collect();
    let mut trans = Vec::with_capacity(n);
    let mut drift = Vec::with_capacity(n);
    for &s in &states {
        let mut row: BTreeMap<usize, Poly> = BTreeMap::new();
        let mut dr = Poly::zero();
        for (d, a, b) in jumps(kk, s) {
            let prob = if a == 1 { &p * &qpow[b as usize] } else { qpow[b as usize].clone() };
            let t = next_state(kk, s, d).0 as usize;
            let e = row.entry(t).or_insert_with(Poly::zero);
            *e = &*e + &prob;
            dr = &dr + &prob.scale(&Rational::from_integer(d.into()));
        }
        trans.push(row.into_iter().filter(|(_, f)| !f.is_zero()).collect());
        drift.push(dr);
    }
    Ok(SymbolicChain {
        k,
        states,
        trans,
        drift,
    })
}

/// Rows of `[P^T - I | 0]` with the last row replaced by `[1 ... 1 | 1]`.
fn stationary_rows(chain: &SymbolicChain) -> Vec<Vec<Poly>> {
    let n = chain.len();
    let mut rows = vec![vec![Poly::zero(); n + 1]; n];
    for (s, row) in chain.trans.iter().enumerate() {
        for (t, f) in row {
            rows[*t][s] = &rows[*t][s] + f;
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = &row[i] - &Poly::one();
    }
    rows[n - 1] = vec![Poly::one(); n + 1];
    rows
}

/// Numerators and common denominator of the stationary vector.
fn stationary_parts(chain: &SymbolicChain) -> Result<(Vec<IntPoly>, IntPoly)> {
    bareiss_solve(int_rows(&stationary_rows(chain)))
}

pub fn stationary_symbolic(chain: &SymbolicChain) -> Result<Vec<RatFun>> {
    let (xs, det) = stationary_parts(chain)?;
    let d = det.to_poly();
    xs.iter().map(|x| RatFun::new(x.to_poly(), d.clone())).collect()
}

fn cache() -> &'static Mutex<HashMap<usize, RatFun>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, RatFun>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `C((1 - p) delta_{1/k} + p delta_1)` as a rational function of `p`.
pub fn exact_c_inverse_k(k: usize) -> Result<RatFun> {
    check_k(k)?;
    if let Some(c) = cache().lock().expect("cache lock").get(&k) {
        return Ok(c.clone());
    }
    let chain = build_chain(k)?;
    let (xs, det) = stationary_parts(&chain)?;
    let mut num = Poly::zero();
    for (x, d) in xs.iter().zip(&chain.drift) {
        if !x.is_zero() {
            num = &num + &(&x.to_poly() * d);
        }
    }
    let den = det.to_poly().scale(&Rational::from_integer(k.into()));
    let c = RatFun::new(num, den)?;
    cache().lock().expect("cache lock").insert(k, c.clone());
    Ok(c)
}

/// The same value at one exact point, by a rational linear solve.
pub fn exact_c_inverse_k_at(k: usize, p: &Rational) -> Result<Rational> {
    check_k(k)?;
    if *p < Rational::zero() || *p > Rational::one() {
        return invalid(format!("p must lie in [0, 1], got {p}"));
    }
    let chain = build_chain(k)?;
    let n = chain.len();
    let rows = chain.eval_rows(p);
    let mut a = vec![vec![Rational::zero(); n]; n];
    for (s, row) in rows.iter().enumerate() {
        for (t, v) in row {
            a[*t][s] += v;
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= Rational::one();
    }
    a[n - 1] = vec![Rational::one(); n];
    let mut b = vec![Rational::zero(); n];
    b[n - 1] = Rational::one();
    let pi = solve_linear_rational(&a, &b)?;
    let total: Rational = pi
        .iter()
        .zip(&chain.drift)
        .map(|(x, d)| x * d.eval(p))
        .sum();
    Ok(total / Rational::from_integer(k.into()))
}

/// `C` on `[1/(k+1), 1/k]` is `f + m g` for the top weight normalized to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct FGPair {
    pub k: usize,
    pub f: RatFun,
    pub g: RatFun,
}

/// `f = (k+1) C_{1/(k+1)} - k C_{1/k}`, `g = k (k+1) (C_{1/k} - C_{1/(k+1)})`.
pub fn fg_pair(k: usize) -> Result<FGPair> {
    if k + 1 > MAX_K || k == 0 {
        return invalid(format!("k must lie in 1..{MAX_K}, got {k}"));
    }
    let ck = exact_c_inverse_k(k)?;
    let ck1 = exact_c_inverse_k(k + 1)?;
    let int = |v: usize| RatFun::constant(Rational::from_integer(v.into()));
    let f = &(&int(k + 1) * &ck1) - &(&int(k) * &ck);
    let g = &int(k * (k + 1)) * &(&ck - &ck1);
    Ok(FGPair { k, f, g })
}

/// `C((1 - p) delta_m + p delta_top)` exactly, for `0 < m <= top`.
pub fn eval_two_atom_exact(m: &Rational, top: &Rational, p: &Rational) -> Result<Rational> {
    if !(*m > Rational::zero() && m <= top) {
        return invalid("need 0 < m <= M");
    }
    if *p < Rational::zero() || *p > Rational::one() {
        return invalid(format!("p must lie in [0, 1], got {p}"));
    }
    let r = m / top;
    if r == Rational::one() || p.is_one() {
        return Ok(top.clone());
    }
    let inv = r.recip();
    let k_big = inv.floor().to_integer();
    let k: usize = k_big
        .clone()
        .try_into()
        .ok()
        .filter(|&k: &usize| k < MAX_K)
        .ok_or(Error::CapExceeded {
            what: "knot index 1/(m/M)",
            cap: (MAX_K - 1) as u64,
            requested: num_traits::ToPrimitive::to_u64(&k_big).unwrap_or(u64::MAX),
        })?;
    if inv == Rational::from_integer(k.into()) {
        return Ok(exact_c_inverse_k_at(k, p)? * top);
    }
    let ck = exact_c_inverse_k_at(k, p)?;
    let ck1 = exact_c_inverse_k_at(k + 1, p)?;
    let kr = Rational::from_integer(k.into());
    let k1 = Rational::from_integer((k + 1).into());
    let f = &k1 * &ck1 - &kr * &ck;
    let g = &kr * &k1 * (&ck - &ck1);
    Ok((f + r * g) * top)
}

/// Floating-point front end to [`eval_two_atom_exact`]: the inputs are
/// read as exact binary rationals and the result is rounded once.
pub fn eval_two_atom(m: f64, top: f64, p: f64) -> Result<f64> {
    let conv = |x: f64| {
        rational_from_f64(x).ok_or_else(|| Error::InvalidArgument(format!("{x} is not finite")))
    };
    Ok(to_f64(&eval_two_atom_exact(&conv(m)?, &conv(top)?, &conv(p)?)?))
}
