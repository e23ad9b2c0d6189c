//! Closed forms and diagnostics: the weights-`{0, M}` formula, the
//! coalescence root `r_p`, a lower bound on the radius of analyticity, and
//! estimation through skeleton points.

use rand_core::RngCore;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::lpp::{last_passage_values, WeightTable};
use crate::measure::Measure;
use crate::numeric::{euler_gamma, rational_from_f64, sum_series, SeriesResult};
use crate::rng::{unit, Domain, RandomAccess, StreamKey};
use crate::Estimate;

/// `C((1 - p) delta_0 + p delta_M) = M / sum_{n >= 1} (1 - p)^{n(n-1)/2}`.
///
/// The reported tail bound is on `C`; it is `M t / S^2` where `t` bounds
/// the dropped part of the sum `S`.
pub fn dutta_c(p: f64, m: f64, tol: f64) -> Result<SeriesResult> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("p must lie in (0, 1], got {p} (see dutta_c_or_zero)"));
    }
    if !(m > 0.0 && m.is_finite()) {
        return invalid(format!("M must be positive, got {m}"));
    }
    if p == 1.0 {
        return Ok(SeriesResult {
            value: m,
            tail_bound: 0.0,
            terms_used: 1,
        });
    }
    let q = 1.0 - p;
    let tri = |n: usize| (n * (n - 1) / 2) as f64;
    // After K terms the rest is at most sum_{n >= K} q^{n(n-1)/2}
    // <= q^{K(K-1)/2} / (1 - q^K).
    let tail = |k: usize| q.powf(tri(k)) / (1.0 - q.powi(k as i32));
    let s = sum_series(|n| q.powf(tri(n)), tail, tol / m, 1_000_000)?;
    Ok(SeriesResult {
        value: m / s.value,
        tail_bound: m * s.tail_bound / (s.value * s.value),
        terms_used: s.terms_used,
    })
}

/// As [`dutta_c`], but returns `C = 0` at `p = 0`, where every weight is
/// zero.
pub fn dutta_c_or_zero(p: f64, m: f64, tol: f64) -> Result<SeriesResult> {
    if p == 0.0 {
        return Ok(SeriesResult {
            value: 0.0,
            tail_bound: 0.0,
            terms_used: 0,
        });
    }
    dutta_c(p, m, tol)
}

/// Output of [`dutta_chain_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct DuttaCheck {
    /// Frequency of `Y_n = 1`, with a batch-means standard error.
    pub estimate: Estimate,
    /// `occupation[j - 1]` counts visits to state `j`, recorded every
    /// [`DUTTA_THIN`] steps so that the records are nearly independent.
    pub occupation: Vec<u64>,
}

pub const DUTTA_THIN: usize = 16;

/// Simulates the chain `Y -> Y + 1` with probability `(1 - p)^Y`, else
/// `Y -> 1`, from `Y_0 = 1`.
pub fn dutta_chain_check(p: f64, steps: usize, seed: u64) -> Result<DuttaCheck> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("p must lie in (0, 1], got {p}"));
    }
    const BATCHES: usize = 50;
    if steps < BATCHES {
        return invalid(format!("need at least {BATCHES} steps"));
    }
    let q = 1.0 - p;
    let mut rng = StreamKey::new(seed, Domain::Dutta, 0).stream(0);
    let batch = steps / BATCHES;
    let mut batch_means = Vec::with_capacity(BATCHES);
    let mut occupation = Vec::new();
    let mut y = 1usize;
    for b in 0..BATCHES {
        let mut ones = 0usize;
        for s in 0..batch {
            y = if unit(rng.next_u64()) < q.powi(y as i32) { y + 1 } else { 1 };
            ones += usize::from(y == 1);
            if (b * batch + s) % DUTTA_THIN == 0 {
                if occupation.len() < y {
                    occupation.resize(y, 0);
                }
                occupation[y - 1] += 1;
            }
        }
        batch_means.push(ones as f64 / batch as f64);
    }
    let mut estimate = Estimate::from_samples(&batch_means).expect("nonempty");
    estimate.replicas = batch * BATCHES;
    Ok(DuttaCheck {
        estimate,
        occupation,
    })
}

/// `F(r) = sum_{k >= 0} (qr)^{k+1} prod_{n <= k} (1 - q^n) - 1` with a
/// bound on the truncation error.
///
/// Past index `k` the products lie in `[P_k (1 - d), P_k]` with
/// `d = q^{k+1} / (1 - q)`, so the remainder is the geometric sum
/// `P_k x^{k+2} / (1 - x)` up to a relative error `d`.
fn zubkov_f(q: f64, r: f64, tol: f64) -> Result<(f64, f64)> {
    let x = q * r;
    if !(x < 1.0) {
        return invalid("q r must be below 1");
    }
    let mut sum = 0.0;
    let mut prod = 1.0;
    let mut xp = x;
    let mut qn = 1.0;
    for _ in 0..10_000_000usize {
        sum += xp * prod;
        let geometric = prod * xp * x / (1.0 - x);
        if geometric <= tol {
            return Ok((sum - 1.0, geometric));
        }
        let d = qn * q / (1.0 - q);
        if geometric * d <= tol {
            return Ok((sum + geometric * (1.0 - 0.5 * d) - 1.0, 0.5 * geometric * d));
        }
        qn *= q;
        prod *= 1.0 - qn;
        xp *= x;
    }
    Err(Error::NoConvergence {
        terms: 10_000_000,
        best_bound: prod * xp / (1.0 - x),
    })
}

/// The unique root in `(1, 1/(1-p))` of `F`, or `1` when `|F(1)| <= tol`.
pub fn zubkov_rp(p: f64, tol: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("p must lie in (0, 1), got {p}"));
    }
    let q = 1.0 - p;
    let series_tol = (tol * 1e-3).max(1e-17);
    let (f1, _) = zubkov_f(q, 1.0, series_tol)?;
    if f1 > tol {
        return Err(Error::InvalidArgument(format!("F(1) = {f1} is positive")));
    }
    // F(1) = -gamma_q, which for tiny p is already within tolerance of 0.
    if f1.abs() <= tol {
        return Ok(1.0);
    }
    let gamma = euler_gamma(q, 1e-15)?.value;
    let edge = 1.0 / q;
    let mut hi = (1.0 / (q * (1.0 + gamma))).min(edge);
    let mut found = false;
    for _ in 0..200 {
        if hi < edge {
            if let Ok((f, _)) = zubkov_f(q, hi, series_tol) {
                if f > 0.0 {
                    found = true;
                    break;
                }
            }
        }
        hi = 0.5 * (hi + edge);
    }
    if !found {
        return Err(Error::NoConvergence {
            terms: 200,
            best_bound: edge - hi,
        });
    }
    let mut lo = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (f, _) = zubkov_f(q, mid, series_tol)?;
        if f.abs() <= tol && hi - lo <= 1e-15 * hi {
            return Ok(mid);
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusBound {
    pub q0: f64,
    pub epsilon_star: f64,
    pub bound: f64,
}

fn radius_at(q0: f64, eps: f64) -> Result<f64> {
    let s = 1.0 - q0;
    let r = zubkov_rp(eps * s, 1e-13)?;
    Ok(s * (1.0 - eps).min((r - 1.0) / (r + 1.0)))
}

/// Maximizes `(1 - q0) min(1 - eps, (r - 1)/(r + 1))`, `r = r_{eps (1 - q0)}`,
/// over `eps` on a grid that is refined around the best point.
pub fn radius_lower_bound(q0: f64, grid_size: usize) -> Result<RadiusBound> {
    if !(0.0..1.0).contains(&q0) {
        return invalid(format!("q0 must lie in [0, 1), got {q0}"));
    }
    if grid_size < 3 {
        return invalid("grid needs at least three points");
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best = (0.5, f64::NEG_INFINITY);
    loop {
        let step = (hi - lo) / (grid_size + 1) as f64;
        let pts: Vec<f64> = (1..=grid_size).map(|i| lo + step * i as f64).collect();
        for &e in &pts {
            if e <= 0.0 || e >= 1.0 {
                continue;
            }
            let b = radius_at(q0, e)?;
            if b > best.1 {
                best = (e, b);
            }
        }
        if step <= 1e-7 {
            break;
        }
        lo = (best.0 - step).max(0.0);
        hi = (best.0 + step).min(1.0);
    }
    Ok(RadiusBound {
        q0,
        epsilon_star: best.0,
        bound: best.1,
    })
}

/// Skeleton flags of a window.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonWindow {
    pub weights: WeightTable,
    pub margin: usize,
    /// Every earlier vertex reaches `v` along top edges.
    pub left: Vec<bool>,
    /// `v` reaches every later vertex along top edges.
    pub right: Vec<bool>,
    /// Vertices in `[margin, n - 1 - margin]` with both flags.
    pub skeleton_indices: Vec<usize>,
}

/// Left and right flags for a window of `n` vertices. With
/// `a(w) = max{u < w : (u, w) top}` and `b(u) = min{w > u : (u, w) top}`,
/// `v` is right-flagged iff `a(w) >= v` for all `w > v`, and left-flagged
/// iff `b(u) <= v` for all `u < v`.
fn skeleton_flags(n: usize, mut is_top: impl FnMut(usize, usize) -> bool) -> (Vec<bool>, Vec<bool>) {
    let a: Vec<Option<usize>> = (0..n).map(|w| (0..w).rev().find(|&u| is_top(u, w))).collect();
    let b: Vec<Option<usize>> = (0..n).map(|u| (u + 1..n).find(|&w| is_top(u, w))).collect();
    let mut right = vec![false; n];
    let mut min_a: Option<usize> = None; // None encodes +inf (no constraint yet)
    let mut blocked = false;
    for v in (0..n).rev() {
        right[v] = !blocked && min_a.is_none_or(|m| m >= v);
        match a[v] {
            None => blocked = true,
            Some(x) => min_a = Some(min_a.map_or(x, |m| m.min(x))),
        }
    }
    let mut left = vec![false; n];
    let mut max_b: Option<usize> = None;
    let mut blocked = false;
    for v in 0..n {
        left[v] = !blocked && max_b.is_none_or(|m| m <= v);
        match b[v] {
            None => blocked = true,
            Some(x) => max_b = Some(max_b.map_or(x, |m| m.max(x))),
        }
    }
    (left, right)
}

pub fn skeleton_points(w: &WeightTable, top_value: f64, margin: usize) -> Result<SkeletonWindow> {
    if margin == 0 {
        return invalid("margin must be at least 1");
    }
    let n = w.n();
    let (left, right) = skeleton_flags(n, |i, j| w.get(i, j).value() == top_value);
    let skeleton_indices = (margin..n.saturating_sub(margin))
        .filter(|&v| left[v] && right[v])
        .collect();
    Ok(SkeletonWindow {
        weights: w.clone(),
        margin,
        left,
        right,
        skeleton_indices,
    })
}

const SKELETON_GROWTH: u32 = 6;

/// One replica: heaviest-path weight between the first two skeleton
/// points right of the window center, or `None` when none are found.
fn skeleton_block(
    nu: &Measure,
    top_index: usize,
    top: f64,
    window: usize,
    key: &StreamKey,
) -> Option<f64> {
    let mut ra = RandomAccess::new(key);
    let mut is_top = |i: usize, j: usize| nu.index_for_bits(ra.word(j as u64, i as u64)) == top_index;
    let center = window / 2;
    let margin = (window / 4).max(1);
    let mut n = window;
    for _ in 0..=SKELETON_GROWTH {
        let (left, right) = skeleton_flags(n, &mut is_top);
        let mut it = (center + 1..n - margin).filter(|&v| left[v] && right[v]);
        if let (Some(g1), Some(g2)) = (it.next(), it.next()) {
            let sub = WeightTable::from_fn(g2 - g1 + 1, |i, j| {
                let v = nu.sample_bits(ra.word((g1 + j) as u64, (g1 + i) as u64));
                debug_assert!(v.value() <= top);
                v
            });
            return Some(last_passage_values(&sub)[g2 - g1].value());
        }
        n *= 2;
    }
    None
}

/// `C((1 - p) delta_m + p delta_1) = gamma_{1-p}^2 E[W_{Gamma_1, Gamma_2}]`.
pub fn estimate_c_skeleton(
    m: f64,
    p: f64,
    window: usize,
    replicas: usize,
    seed: u64,
) -> Result<Estimate> {
    if !(m > 0.0 && m <= 1.0) {
        return invalid(format!("need 0 < m <= 1, got {m}"));
    }
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("p must lie in (0, 1), got {p}"));
    }
    if window < 8 || replicas == 0 {
        return invalid("window must be at least 8 and replicas positive");
    }
    let pr = rational_from_f64(p).expect("finite");
    let nu = Measure::two_atom(m, 1.0, pr)?;
    let top_index = nu.len() - 1;
    // With m = 1 every edge is a top edge.
    let p_eff = if nu.len() == 1 { 1.0 } else { p };
    let gamma = euler_gamma(1.0 - p_eff, 1e-15)?.value;
    let g2 = gamma * gamma;
    let blocks: Vec<Option<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let key = StreamKey::new(seed, Domain::Skeleton, r);
            skeleton_block(&nu, top_index, 1.0, window, &key)
        })
        .collect();
    let kept: Vec<f64> = blocks.into_iter().flatten().map(|w| g2 * w).collect();
    if kept.len() < replicas {
        log::warn!("{} of {replicas} skeleton replicas discarded", replicas - kept.len());
    }
    Estimate::from_samples(&kept)
        .ok_or_else(|| Error::InsufficientData("no replica found two skeleton points".into()))
}

/// Default window for [`estimate_c_skeleton`].
pub fn default_skeleton_window(p: f64) -> usize {
    // Four margins; one margin makes a spurious flag from truncation
    // negligible since the coalescence time has a geometric tail.
    let per = (40.0 / p).ceil() as usize;
    (4 * per).max(64)
}
