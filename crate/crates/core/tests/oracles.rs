//! Checks against independent computations written here from scratch.

use lpp_core::analysis::{dutta_c, radius_lower_bound, zubkov_rp};
use lpp_core::lpp::{estimate_c_dp, last_passage_values, simulate_weights_replica, WeightTable};
use lpp_core::mgs::t_past_sample;
use lpp_core::numeric::{euler_gamma, rat, to_f64};
use lpp_core::twoatom::{build_chain, exact_c_inverse_k, exact_c_inverse_k_at};
use lpp_core::words::{series_c_detailed, word_mass_by_length, IntegrationMode};
use lpp_core::{Measure, Rational};
use num_traits::{One, Zero};

/// Maximum over all vertex subsets between the endpoints.
fn brute_force_lpp(w: &WeightTable) -> f64 {
    let n = w.n();
    let inner = n - 2;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << inner) {
        let mut path = vec![0];
        path.extend((0..inner).filter(|b| mask >> b & 1 == 1).map(|b| b + 1));
        path.push(n - 1);
        let s: f64 = path.windows(2).map(|e| w.get(e[0], e[1]).value()).sum();
        best = best.max(s);
    }
    best
}

#[test]
fn dp_matches_path_enumeration() {
    let nus: Vec<Measure> = ["-inf:1/3,0:1/3,1:1/3", "0.25:1/2,1:1/2", "-1:1/4,0.5:1/4,2:1/2"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let mut cases = 0;
    for r in 0..100u64 {
        let nu = &nus[r as usize % nus.len()];
        let n = 3 + (r as usize % 6);
        let w = simulate_weights_replica(nu, n, 5, r);
        let lp = last_passage_values(&w);
        assert_eq!(lp[n - 1].value(), brute_force_lpp(&w), "replica {r}");
        cases += 1;
    }
    assert_eq!(cases, 100);
}

/// `P(T = l)` for the chain `M_0 = 0`, `M_n ~ Bin(M_{n-1} + 1, q)`,
/// `T = min{n >= 1 : M_n = 0}`, by forward propagation of the law.
fn t_past_law(p: f64, max_len: usize) -> Vec<f64> {
    let q = 1.0 - p;
    let mut law = vec![1.0]; // law of M on the event T > n
    let mut out = Vec::new();
    for _ in 0..max_len {
        let mut next = vec![0.0; law.len() + 1];
        for (m, &w) in law.iter().enumerate() {
            let trials = m + 1;
            let mut binom = 1.0;
            for j in 0..=trials {
                next[j] += w * binom * q.powi(j as i32) * p.powi((trials - j) as i32);
                binom = binom * (trials - j) as f64 / (j + 1) as f64;
            }
        }
        out.push(next[0]);
        next[0] = 0.0;
        while next.len() > 1 && next.last().is_some_and(|&w| w < 1e-40) {
            next.pop();
        }
        law = next;
    }
    out
}

#[test]
fn word_mass_is_the_coalescence_law() {
    for p in [0.3, 0.5, 0.9] {
        let mass = word_mass_by_length(p, 20).unwrap();
        let law = t_past_law(p, 20);
        for (l, (a, b)) in mass.iter().zip(&law).enumerate() {
            assert!((a - b).abs() < 1e-13, "p={p} l={}: {a} vs {b}", l + 1);
        }
        // Total mass one: the remainder past the enumerated length is the
        // chain's survival probability, which decays geometrically.
        let enumerated: f64 = mass.iter().sum();
        let survival: f64 = {
            let mut law = t_past_law(p, 4000);
            law.drain(..20);
            law.iter().sum()
        };
        assert!((enumerated + survival - 1.0).abs() < 1e-9, "p={p}");
    }
}

#[test]
fn word_mass_remainder_matches_sampled_coalescence() {
    let mass = word_mass_by_length(0.5, 14).unwrap();
    let t = t_past_sample(0.5, 200_000, 3).unwrap();
    let mut acc = 0.0;
    for (l, m) in mass.iter().enumerate() {
        acc += m;
        let rem = 1.0 - acc;
        let emp = t.tail(l + 1);
        let sd = (rem * (1.0 - rem) / t.samples as f64).sqrt();
        assert!((rem - emp).abs() <= 3.0 * sd + 1e-12, "L={}: {rem} vs {emp}", l + 1);
    }
}

#[test]
fn missing_mass_decays_at_the_zubkov_rate() {
    let mass = word_mass_by_length(0.5, 22).unwrap();
    let mut rem = Vec::new();
    let mut acc = 0.0;
    for m in &mass {
        acc += m;
        rem.push(1.0 - acc);
    }
    let ratio = rem[21] / rem[20];
    let r = zubkov_rp(0.5, 1e-13).unwrap();
    assert!((ratio - 1.0 / r).abs() < 2e-3, "{ratio} vs {}", 1.0 / r);
}

/// Direct product, no tail estimate.
fn gamma_direct(q: f64) -> f64 {
    let mut g = 1.0;
    let mut qk = q;
    while qk > 1e-19 {
        g *= 1.0 - qk;
        qk *= q;
    }
    g
}

#[test]
fn euler_function_values() {
    for q in [0.0, 0.1, 0.5, 0.9] {
        let g = euler_gamma(q, 1e-15).unwrap();
        assert!((g.value - gamma_direct(q)).abs() <= 1e-13, "q={q}");
    }
    assert!((euler_gamma(0.5, 1e-15).unwrap().value - 0.288_788_095_086_602_4).abs() < 1e-14);
}

#[test]
fn dutta_partial_sums() {
    let s: f64 = (1..60).map(|n| 0.5f64.powi(n * (n - 1) / 2)).sum();
    let r = dutta_c(0.5, 1.0, 1e-13).unwrap();
    assert!((r.value - 1.0 / s).abs() < 1e-12);
    assert!(r.tail_bound <= 1e-13);
    assert!((r.value - 0.609_150).abs() < 1e-6);
    assert_eq!(dutta_c(1.0, 2.0, 1e-9).unwrap().value, 2.0);
}

/// `F(r)` summed until the terms are far below double precision.
fn zubkov_f_direct(p: f64, r: f64) -> f64 {
    let q = 1.0 - p;
    let x = q * r;
    let (mut sum, mut prod, mut xp, mut qn) = (0.0, 1.0, x, 1.0);
    for _ in 0..1_000_000 {
        let t = xp * prod;
        sum += t;
        if t < 1e-22 && xp < 1e-22 {
            break;
        }
        qn *= q;
        prod *= 1.0 - qn;
        xp *= x;
    }
    sum - 1.0
}

#[test]
fn zubkov_root_solves_its_equation() {
    let mut prev = 1.0;
    for i in 1..=9 {
        let p = i as f64 / 10.0;
        let tol = 1e-12;
        let r = zubkov_rp(p, tol).unwrap();
        let q = 1.0 - p;
        assert!(r > 1.0 && r < 1.0 / q, "p={p}: r={r}");
        assert!(zubkov_f_direct(p, r).abs() <= 2.0 * tol, "p={p}");
        assert!(r >= prev, "r_p decreased at p={p}");
        prev = r;
    }
    assert!(zubkov_f_direct(0.5, 1.0) < 0.0);
}

#[test]
fn radius_bound_scales_with_one_minus_q0() {
    let b0 = radius_lower_bound(0.0, 200).unwrap();
    assert!(b0.bound >= 0.298167 - 1e-4 && b0.bound <= 0.30);
    assert!(b0.bound > (2f64.sqrt() - 1.0) / 2.0);
    let half = radius_lower_bound(0.5, 100).unwrap();
    assert!(half.bound > 0.0 && half.bound <= 0.5 * 0.30);
    // r_p - 1 falls below double precision once p is near 0.05, so the
    // bound collapses to zero there.
    let b = radius_lower_bound(0.99, 100).unwrap();
    assert!(b.bound >= 0.0 && b.bound <= 0.01 * 0.31);
}

/// Stationary law by plain Gauss-Jordan on `pi (P - I) = 0`, `sum pi = 1`.
fn stationary_by_elimination(k: usize, p: &Rational) -> Rational {
    let chain = build_chain(k).unwrap();
    let n = chain.len();
    let mut a = vec![vec![Rational::zero(); n + 1]; n];
    for s in 0..n {
        for t in 0..n {
            a[t][s] = chain.entry(s, t).eval(p);
        }
        a[s][s] -= Rational::one();
    }
    a[n - 1] = vec![Rational::one(); n + 1];
    for c in 0..n {
        let piv = (c..n).find(|&r| !a[r][c].is_zero()).unwrap();
        a.swap(c, piv);
        let inv = Rational::one() / &a[c][c];
        for v in a[c].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..=n {
                    let t = &f * &a[c][j];
                    a[r][j] -= t;
                }
            }
        }
    }
    let drift: Rational = (0..n).map(|s| &a[s][n] * chain.drift[s].eval(p)).sum();
    drift / Rational::from_integer(k.into())
}

#[test]
fn two_atom_stationary_solve() {
    for k in 1..=5 {
        let sym = exact_c_inverse_k(k).unwrap();
        for (a, b) in [(1, 3), (1, 2), (4, 5)] {
            let p = rat(a, b);
            let direct = stationary_by_elimination(k, &p);
            assert_eq!(sym.eval(&p).unwrap(), direct, "k={k} p={p}");
            assert_eq!(exact_c_inverse_k_at(k, &p).unwrap(), direct, "k={k} p={p}");
        }
    }
}

#[test]
fn two_atom_transition_rows_sum_to_one() {
    for k in 1..=6 {
        let chain = build_chain(k).unwrap();
        for (s, row) in chain.trans.iter().enumerate() {
            let total = row.iter().fold(lpp_core::Poly::zero(), |acc, (_, p)| &acc + p);
            assert_eq!(total, lpp_core::Poly::one(), "k={k} state {s}");
        }
    }
}

#[test]
fn two_atom_increasing_in_p() {
    for k in 1..=5 {
        let c = exact_c_inverse_k(k).unwrap();
        let vals: Vec<Rational> = (0..=20).map(|i| c.eval(&rat(i, 20)).unwrap()).collect();
        for w in vals.windows(2) {
            if k == 1 {
                assert!(w[1] >= w[0]);
            } else {
                assert!(w[1] > w[0], "k={k}");
            }
        }
    }
}

#[test]
fn rescaled_measure_rescales_the_estimate() {
    let nu: Measure = "-inf:1/4,0.25:1/4,1:1/2".parse().unwrap();
    let base = estimate_c_dp(&nu, 300, 6, 8).unwrap();
    for c in [0.25, 2.0, 8.0] {
        let e = estimate_c_dp(&nu.rescale(c).unwrap(), 300, 6, 8).unwrap();
        assert_eq!(e.mean, c * base.mean);
        assert_eq!(e.std_err, c * base.std_err);
    }
}

#[test]
fn series_is_monotone_in_length() {
    let split = "0.5:3/10,1:7/10".parse::<Measure>().unwrap().split_top().unwrap();
    let d = series_c_detailed(&split, 0.7, 8, u64::MAX, IntegrationMode::Exact, 0, 0).unwrap();
    for w in d.partial_sums.windows(2) {
        assert!(w[1] >= w[0]);
    }
    let exact = to_f64(&lpp_core::twoatom::eval_two_atom_exact(&rat(1, 2), &Rational::one(), &rat(7, 10)).unwrap());
    assert!((d.result.value - exact).abs() <= d.result.tail_bound);
    assert!(d.result.value <= exact);
}

#[test]
fn series_for_bernoulli_weights() {
    // Sub-top weight -inf: only words of height 0 contribute.
    let split = "-inf:1/10,1:9/10".parse::<Measure>().unwrap().split_top().unwrap();
    let d = series_c_detailed(&split, 0.9, 8, u64::MAX, IntegrationMode::Exact, 0, 0).unwrap();
    let dp = estimate_c_dp(&Measure::reassemble(&split).unwrap(), 1500, 40, 4).unwrap();
    assert!((d.result.value - dp.mean).abs() <= d.result.tail_bound + 3.0 * dp.std_err + 2.0 / 1500.0);
}
