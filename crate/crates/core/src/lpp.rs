//! Edge weights on the complete DAG and the last-passage recursion.
//!
//! Edge `(i, j)` of replica `r` is drawn from word `i` of stream `j` under
//! the key `(seed, Edge, r)`, so tables of different sizes agree on their
//! common prefix and two measures sampled with the same seed are coupled.

use std::cmp::Ordering;

use rand_core::RngCore;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::measure::{Measure, XReal};
use crate::rng::{Domain, StreamKey};
use crate::Estimate;

/// Weights `w(i, j)` for `0 <= i < j < n`, packed by column.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    n: usize,
    w: Vec<XReal>,
}

#[inline]
fn slot(i: usize, j: usize) -> usize {
    j * (j - 1) / 2 + i
}

impl WeightTable {
    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> XReal) -> Self {
        let mut w = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for j in 1..n {
            for i in 0..j {
                w.push(f(i, j));
            }
        }
        WeightTable { n, w }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> XReal {
        debug_assert!(i < j && j < self.n);
        self.w[slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: XReal) {
        assert!(i < j && j < self.n, "edge ({i}, {j}) out of range");
        self.w[slot(i, j)] = v;
    }

    /// Weights restricted to the vertices `lo..=hi`, relabelled from 0.
    pub fn sub_table(&self, lo: usize, hi: usize) -> WeightTable {
        WeightTable::from_fn(hi - lo + 1, |i, j| self.get(lo + i, lo + j))
    }
}

/// Fast inverse-CDF sampler sharing thresholds with [`Measure`].
#[derive(Clone, Debug)]
pub(crate) struct Sampler {
    values: Vec<f64>,
    thresholds: Vec<u128>,
}

impl Sampler {
    pub(crate) fn new(nu: &Measure) -> Self {
        Sampler {
            values: nu.values(),
            thresholds: nu.thresholds().to_vec(),
        }
    }

    #[inline]
    pub(crate) fn index(&self, u: u64) -> usize {
        let u = u as u128;
        let last = self.thresholds.len() - 1;
        self.thresholds[..last]
            .iter()
            .position(|&t| u < t)
            .unwrap_or(last)
    }

    #[inline]
    pub(crate) fn value(&self, u: u64) -> f64 {
        self.values[self.index(u)]
    }
}

pub fn simulate_weights(nu: &Measure, n: usize, seed: u64) -> WeightTable {
    simulate_weights_replica(nu, n, seed, 0)
}

pub fn simulate_weights_replica(nu: &Measure, n: usize, seed: u64, replica: u64) -> WeightTable {
    let s = Sampler::new(nu);
    let key = StreamKey::new(seed, Domain::Edge, replica);
    let mut w = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 1..n {
        let mut rng = key.stream(j as u64);
        for _ in 0..j {
            w.push(XReal::new(s.value(rng.next_u64())).expect("atoms are valid"));
        }
    }
    WeightTable { n, w }
}

/// `W_0 = 0`, `W_j = max_{i<j} (W_i + w(i, j))`.
pub fn last_passage_values(w: &WeightTable) -> Vec<XReal> {
    let mut out = Vec::with_capacity(w.n);
    if w.n == 0 {
        return out;
    }
    out.push(XReal::ZERO);
    for j in 1..w.n {
        let best = (0..j)
            .map(|i| out[i] + w.get(i, j))
            .max()
            .expect("j >= 1");
        out.push(best);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub weight: XReal,
    /// Vertices from 0 to `n - 1`; empty when no finite path exists.
    pub path: Vec<usize>,
    pub n_top: usize,
    pub n_other: usize,
}

/// Heaviest path from vertex 0 to the last vertex. Among heaviest paths,
/// prefers the most edges of weight `top_value`, then the lexicographically
/// smallest vertex sequence.
pub fn heaviest_path(w: &WeightTable, top_value: f64) -> Result<PathResult> {
    if w.n < 2 {
        return invalid("need at least two vertices");
    }
    #[derive(Clone)]
    struct Best {
        weight: XReal,
        n_top: usize,
        path: Vec<usize>,
    }
    let mut best: Vec<Best> = Vec::with_capacity(w.n);
    best.push(Best {
        weight: XReal::ZERO,
        n_top: 0,
        path: vec![0],
    });
    for j in 1..w.n {
        let mut cur: Option<Best> = None;
        for i in 0..j {
            let b = &best[i];
            if b.weight.is_neg_infinity() {
                continue;
            }
            let e = w.get(i, j);
            let weight = b.weight + e;
            if weight.is_neg_infinity() {
                continue;
            }
            let n_top = b.n_top + usize::from(e.value() == top_value);
            let take = match &cur {
                None => true,
                Some(c) => match weight.cmp(&c.weight) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => match n_top.cmp(&c.n_top) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => {
                            let mut path = b.path.clone();
                            path.push(j);
                            path < c.path
                        }
                    },
                },
            };
            if take {
                let mut path = b.path.clone();
                path.push(j);
                cur = Some(Best {
                    weight,
                    n_top,
                    path,
                });
            }
        }
        best.push(cur.unwrap_or(Best {
            weight: XReal::NEG_INFINITY,
            n_top: 0,
            path: Vec::new(),
        }));
    }
    let last = best.pop().expect("n >= 2");
    let edges = last.path.len().saturating_sub(1);
    Ok(PathResult {
        weight: last.weight,
        n_other: edges - last.n_top,
        n_top: last.n_top,
        path: last.path,
    })
}

/// `W_n` for one replica without materializing the table.
fn replica_endpoint(s: &Sampler, n: usize, key: &StreamKey) -> f64 {
    let mut wv = Vec::with_capacity(n + 1);
    wv.push(0.0f64);
    for j in 1..=n {
        let mut rng = key.stream(j as u64);
        let mut best = f64::NEG_INFINITY;
        for &wi in &wv {
            let c = wi + s.value(rng.next_u64());
            if c > best {
                best = c;
            }
        }
        wv.push(best);
    }
    wv[n]
}

fn check_dp_args(nu: &Measure, n: usize, replicas: usize) -> Result<()> {
    if n == 0 || replicas == 0 {
        return invalid("n and the replica count must be positive");
    }
    nu.split_top()?;
    Ok(())
}

/// Monte Carlo estimate of `C(nu)` as the mean of `W_n / n` over replicas.
///
/// Replicas whose endpoint is unreachable (`W_n = -inf`) are dropped; the
/// returned `replicas` counts the ones that were kept.
pub fn estimate_c_dp(nu: &Measure, n: usize, replicas: usize, seed: u64) -> Result<Estimate> {
    check_dp_args(nu, n, replicas)?;
    let s = Sampler::new(nu);
    let vals: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| replica_endpoint(&s, n, &StreamKey::new(seed, Domain::Edge, r)) / n as f64)
        .collect();
    let finite: Vec<f64> = vals.into_iter().filter(|v| v.is_finite()).collect();
    Estimate::from_samples(&finite)
        .ok_or_else(|| Error::InsufficientData("every replica had W_n = -inf".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoupledEstimate {
    pub first: Estimate,
    pub second: Estimate,
    /// Mean of the per-replica difference `second - first`.
    pub gap: Estimate,
    /// Whether `W_n(first) <= W_n(second)` held in every replica.
    pub ordered: bool,
}

/// Estimates for two measures driven by identical uniforms.
pub fn coupled_estimate(
    nu1: &Measure,
    nu2: &Measure,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<CoupledEstimate> {
    check_dp_args(nu1, n, replicas)?;
    check_dp_args(nu2, n, replicas)?;
    let (s1, s2) = (Sampler::new(nu1), Sampler::new(nu2));
    let pairs: Vec<(f64, f64)> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let key = StreamKey::new(seed, Domain::Edge, r);
            (
                replica_endpoint(&s1, n, &key) / n as f64,
                replica_endpoint(&s2, n, &key) / n as f64,
            )
        })
        .collect();
    if pairs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(Error::InsufficientData(
            "coupled estimate needs finite endpoints in every replica".into(),
        ));
    }
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let d: Vec<f64> = pairs.iter().map(|p| p.1 - p.0).collect();
    Ok(CoupledEstimate {
        first: Estimate::from_samples(&a).expect("nonempty"),
        second: Estimate::from_samples(&b).expect("nonempty"),
        gap: Estimate::from_samples(&d).expect("nonempty"),
        ordered: pairs.iter().all(|(x, y)| x <= y),
    })
}
