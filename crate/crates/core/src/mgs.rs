//! Max-growth system on finite configurations of particles.
//!
//! A configuration is a finite multiset of positions. One step with input
//! vector `x` adds a particle at `max_i (lambda_i + x_i)`, where the
//! `lambda_i` are the current positions in decreasing order. Started from
//! `delta_0` and fed the weights into vertex `n` sorted by the last-passage
//! values of the earlier vertices, it reproduces the sequence `W_n`.

use rand_core::RngCore;

use crate::error::{invalid, Error, Result};
use crate::lpp::{last_passage_values, Sampler, WeightTable};
use crate::measure::{TopSplit, XReal};
use crate::numeric::euler_gamma;
use crate::rng::{unit, Domain, StreamKey};
use crate::Estimate;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    /// Decreasing.
    positions: Vec<XReal>,
    /// Particles more than `window` below the front are dropped.
    window: f64,
}

impl Config {
    pub fn delta(x: XReal) -> Self {
        Config::new(vec![x], f64::INFINITY)
    }

    pub fn new(mut positions: Vec<XReal>, window: f64) -> Self {
        positions.sort_by(|a, b| b.cmp(a));
        let mut c = Config { positions, window };
        c.prune();
        c
    }

    pub fn with_window(mut self, window: f64) -> Self {
        self.window = window;
        self.prune();
        self
    }

    pub fn positions(&self) -> &[XReal] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn front(&self) -> XReal {
        self.positions.first().copied().unwrap_or(XReal::NEG_INFINITY)
    }

    fn prune(&mut self) {
        if self.window.is_finite() {
            let floor = self.front().value() - self.window;
            while self.positions.last().is_some_and(|p| p.value() < floor) {
                self.positions.pop();
            }
        }
    }

    fn insert(&mut self, m: XReal) {
        let at = self.positions.partition_point(|&p| p >= m);
        self.positions.insert(at, m);
        self.prune();
    }

    /// In-place step; `x` must have an entry for every particle.
    pub fn advance(&mut self, x: &[XReal]) -> Result<XReal> {
        if x.len() < self.positions.len() {
            return invalid(format!(
                "input has {} entries for {} particles",
                x.len(),
                self.positions.len()
            ));
        }
        let m = self
            .positions
            .iter()
            .zip(x)
            .map(|(&l, &xi)| l + xi)
            .max()
            .unwrap_or(XReal::NEG_INFINITY);
        self.insert(m);
        Ok(m)
    }

    /// Step driven by a top index: entries before `xi` (1-based) come from
    /// `sub_top`, entry `xi` is `top`, later entries are irrelevant because
    /// every weight is at most `top`.
    pub fn advance_top(&mut self, xi: usize, top: f64, mut sub_top: impl FnMut(usize) -> f64) -> f64 {
        let mut m = f64::NEG_INFINITY;
        let len = self.positions.len();
        for (i, l) in self.positions.iter().take(xi.min(len + 1).saturating_sub(1)).enumerate() {
            let c = l.value() + sub_top(i + 1);
            if c > m {
                m = c;
            }
        }
        if xi <= len {
            let c = self.positions[xi - 1].value() + top;
            if c > m {
                m = c;
            }
        }
        self.insert(XReal::new(m).expect("no NaN from finite weights"));
        m
    }
}

pub fn mgs_step(config: &Config, x: &[XReal]) -> Result<Config> {
    let mut c = config.clone();
    c.advance(x)?;
    Ok(c)
}

/// Runs the system from `delta_0` with the weights of `w` and checks that
/// the configuration after step `n` is the multiset `{W_0, ..., W_n}`.
pub fn coupling_check(w: &WeightTable) -> bool {
    let lp = last_passage_values(w);
    let mut cfg = Config::delta(XReal::ZERO);
    for n in 1..w.n() {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| lp[b].cmp(&lp[a]).then(a.cmp(&b)));
        let x: Vec<XReal> = order.iter().map(|&v| w.get(v, n)).collect();
        let m = cfg.advance(&x).expect("one entry per particle");
        if m != lp[n] {
            return false;
        }
        let mut want: Vec<XReal> = lp[..=n].to_vec();
        want.sort_by(|a, b| b.cmp(a));
        if cfg.positions != want {
            return false;
        }
    }
    true
}

/// The sequence `xi_1, xi_2, ...` of top indices (stored from index 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XiSeq(pub Vec<u32>);

impl XiSeq {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `xi_n` for `n >= 1`.
    pub fn get(&self, n: usize) -> u32 {
        self.0[n - 1]
    }
}

/// Lazily defined inputs of the system: step `n` uses stream `n`, word 0
/// for the top index and word `i` for the `i`-th sub-top weight.
#[derive(Clone, Debug)]
pub(crate) struct MgsDriver {
    key: StreamKey,
    ln_q: f64,
    top: f64,
    below: Option<Sampler>,
}

impl MgsDriver {
    pub(crate) fn new(split: &TopSplit, seed: u64) -> Self {
        let p = split.p_f64();
        MgsDriver {
            key: StreamKey::new(seed, Domain::Mgs, 0),
            ln_q: (1.0 - p).ln(),
            top: split.top,
            below: split.below.as_ref().map(Sampler::new),
        }
    }

    pub(crate) fn xi(&self, n: u64) -> u32 {
        geometric(self.key.word(n, 0), self.ln_q)
    }

    /// Top index and a generator for the sub-top weights at step `n`.
    pub(crate) fn step_inputs(&self, n: u64) -> (u32, StepDraws<'_>) {
        let mut rng = self.key.stream(n);
        let xi = geometric(rng.next_u64(), self.ln_q);
        (xi, StepDraws { rng, driver: self })
    }
}

pub(crate) struct StepDraws<'a> {
    rng: rand_chacha::ChaCha8Rng,
    driver: &'a MgsDriver,
}

impl StepDraws<'_> {
    pub(crate) fn next(&mut self) -> f64 {
        let u = self.rng.next_u64();
        match &self.driver.below {
            Some(s) => s.value(u),
            None => self.driver.top,
        }
    }
}

/// `1 + floor(ln U / ln q)` with `U` in `(0, 1]`: geometric on `{1, 2, ...}`
/// with success probability `1 - q`.
fn geometric(bits: u64, ln_q: f64) -> u32 {
    if ln_q == f64::NEG_INFINITY {
        return 1;
    }
    let u = 1.0 - unit(bits);
    let k = (u.ln() / ln_q).floor();
    if k >= (u32::MAX - 1) as f64 {
        u32::MAX
    } else {
        1 + k as u32
    }
}

pub fn xi_from_weights(split: &TopSplit, steps: usize, seed: u64) -> XiSeq {
    let d = MgsDriver::new(split, seed);
    XiSeq((1..=steps as u64).map(|n| d.xi(n)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenovationReport {
    /// 1-based renovation steps.
    pub times: Vec<usize>,
    pub confirm_window: usize,
    /// Renovations per checkable step.
    pub density: f64,
    /// Number of steps at which the full window could be checked.
    pub checked: usize,
}

/// Steps `n` with `xi_{n+i-1} <= i` for `i = 1..=b`. Only steps whose whole
/// window lies inside the sequence are candidates.
pub fn renovation_times(xi: &XiSeq, b: usize) -> Result<RenovationReport> {
    if b == 0 {
        return invalid("confirmation window must be positive");
    }
    let len = xi.len();
    if len < b {
        return Err(Error::InsufficientData(format!(
            "sequence of length {len} is shorter than the window {b}"
        )));
    }
    let checked = len - b + 1;
    let times: Vec<usize> = (1..=checked)
        .filter(|&n| (1..=b).all(|i| xi.get(n + i - 1) as usize <= i))
        .collect();
    Ok(RenovationReport {
        density: times.len() as f64 / checked as f64,
        times,
        confirm_window: b,
        checked,
    })
}

/// Window long enough that a candidate passing it fails later with
/// probability below `eps`.
pub fn default_confirm_window(p: f64, eps: f64) -> usize {
    if p >= 1.0 {
        return 1;
    }
    let q = 1.0 - p;
    ((1.0 / eps).ln() / (1.0 / q).ln()).ceil() as usize + 5
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegenParams {
    pub blocks: usize,
    pub confirm_window: usize,
    /// Pruning distance below the front, in absolute units.
    pub window: f64,
    pub max_steps: usize,
}

impl RegenParams {
    pub fn new(split: &TopSplit, blocks: usize) -> Self {
        RegenParams {
            blocks,
            confirm_window: default_confirm_window(split.p_f64(), 1e-10),
            window: 50.0 * split.top.abs().max(1e-300),
            max_steps: 1 << 31,
        }
    }
}

/// `C = gamma_{1-p} * E[front increment over one renovation block]`.
pub fn regenerative_estimate(
    split: &TopSplit,
    blocks: usize,
    confirm_window: usize,
    seed: u64,
) -> Result<Estimate> {
    let params = RegenParams {
        confirm_window,
        ..RegenParams::new(split, blocks)
    };
    regenerative_estimate_with(split, &params, seed)
}

pub fn regenerative_estimate_with(split: &TopSplit, params: &RegenParams, seed: u64) -> Result<Estimate> {
    if params.blocks == 0 {
        return invalid("need at least one block");
    }
    if !(split.top > 0.0) {
        return invalid("the top atom must be positive");
    }
    let p = split.p_f64();
    let gamma = euler_gamma(1.0 - p, 1e-14)?.value;
    let driver = MgsDriver::new(split, seed);
    let b = params.confirm_window;

    // Extend the top-index sequence until K + 1 renovations are confirmed.
    let mut horizon = ((params.blocks as f64 + 2.0) / gamma * 1.2) as usize + b + 100;
    let times = loop {
        let xi = XiSeq((1..=horizon as u64).map(|n| driver.xi(n)).collect());
        let rep = renovation_times(&xi, b)?;
        if rep.times.len() > params.blocks {
            break rep.times;
        }
        if horizon >= params.max_steps {
            return Err(Error::InsufficientData(format!(
                "only {} renovation times within {} steps",
                rep.times.len(),
                horizon
            )));
        }
        horizon = (horizon * 2).min(params.max_steps);
    };

    let mut cfg = Config::delta(XReal::ZERO).with_window(params.window);
    let mut fronts = Vec::with_capacity(params.blocks + 1);
    let mut next = 0;
    let last = times[params.blocks];
    for n in 1..=last {
        if n == times[next] {
            fronts.push(cfg.front().value());
            next += 1;
            if next > params.blocks {
                break;
            }
        }
        let (xi, mut draws) = driver.step_inputs(n as u64);
        cfg.advance_top(xi as usize, split.top, |_| draws.next());
    }
    let incs: Vec<f64> = fronts.windows(2).map(|w| gamma * (w[1] - w[0])).collect();
    let mut e = Estimate::from_samples(&incs).expect("at least one block");
    e.replicas = incs.len();
    Ok(e)
}

/// Empirical law of the backward coalescence time.
#[derive(Clone, Debug, PartialEq)]
pub struct TPastDistribution {
    pub samples: usize,
    /// `counts[t]` is the number of samples with `T = t`.
    pub counts: Vec<u64>,
}

impl TPastDistribution {
    pub fn tail(&self, l: usize) -> f64 {
        let above: u64 = self.counts.iter().skip(l + 1).sum();
        above as f64 / self.samples as f64
    }

    pub fn mean(&self) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(t, &c)| t as f64 * c as f64)
            .sum::<f64>()
            / self.samples as f64
    }
}

/// Samples `T` from the chain `M_0 = 0`, `M_n ~ Binomial(M_{n-1} + 1, q)`,
/// `T = min{n >= 1 : M_n = 0}`.
pub fn t_past_sample(p: f64, samples: usize, seed: u64) -> Result<TPastDistribution> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("p must lie in (0, 1], got {p}"));
    }
    if samples == 0 {
        return invalid("need at least one sample");
    }
    let q = 1.0 - p;
    let key = StreamKey::new(seed, Domain::TPast, 0);
    let cap = 10_000_000usize;
    let mut counts = vec![0u64; 2];
    for s in 0..samples as u64 {
        let mut rng = key.stream(s);
        let mut m = 0u64;
        let mut t = 0usize;
        loop {
            t += 1;
            m = (0..=m).filter(|_| unit(rng.next_u64()) < q).count() as u64;
            if m == 0 {
                break;
            }
            if t >= cap {
                return Err(Error::CapExceeded {
                    what: "coalescence time",
                    cap: cap as u64,
                    requested: t as u64,
                });
            }
        }
        if counts.len() <= t {
            counts.resize(t + 1, 0);
        }
        counts[t] += 1;
    }
    Ok(TPastDistribution { samples, counts })
}
