use lpp_core::analysis::{
    default_skeleton_window, dutta_c, dutta_chain_check, estimate_c_skeleton, skeleton_points, DUTTA_THIN,
};
use lpp_core::lpp::{coupled_estimate, heaviest_path, simulate_weights_replica, WeightTable};
use lpp_core::mgs::{regenerative_estimate, renovation_times, Config, XiSeq};
use lpp_core::numeric::euler_gamma;
use lpp_core::twoatom::eval_two_atom;
use lpp_core::{Measure, XReal};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn dutta_chain_agrees_with_closed_form() {
    for p in [0.3, 0.5, 0.8] {
        let c = dutta_c(p, 1.0, 1e-12).unwrap().value;
        let e = dutta_chain_check(p, 1_000_000, 7).unwrap().estimate;
        assert!((e.mean - c).abs() <= 3.0 * e.std_err, "p={p}: {} ± {} vs {c}", e.mean, e.std_err);
    }
    assert_eq!(dutta_chain_check(1.0, 1000, 1).unwrap().estimate.mean, 1.0);
}

#[test]
fn dutta_occupation_chi_square() {
    let p: f64 = 0.5;
    let check = dutta_chain_check(p, 2_000_000, 9).unwrap();
    let records: u64 = check.occupation.iter().sum();
    assert_eq!(records as usize, 2_000_000usize.div_ceil(DUTTA_THIN));
    let weights: Vec<f64> = (1..=40).map(|j: i32| (1.0 - p).powi(j * (j - 1) / 2)).collect();
    let total: f64 = weights.iter().sum();
    // Pool the tail into the last cell with expectation at least 5.
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o_tail, mut e_tail) = (0.0, 0.0);
    for (j, w) in weights.iter().enumerate() {
        let e = records as f64 * w / total;
        let o = check.occupation.get(j).copied().unwrap_or(0) as f64;
        if e >= 5.0 {
            obs.push(o);
            exp.push(e);
        } else {
            o_tail += o;
            e_tail += e;
        }
    }
    o_tail += check.occupation.iter().skip(weights.len()).sum::<u64>() as f64;
    obs.push(o_tail);
    exp.push(e_tail.max(1e-300));
    let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (obs.len() - 1) as f64;
    let pval = 1.0 - ChiSquared::new(dof).unwrap().cdf(stat);
    assert!(pval > 1e-3, "chi-square {stat} on {dof} dof, p-value {pval}");
}

fn reversed(w: &WeightTable) -> WeightTable {
    let n = w.n();
    WeightTable::from_fn(n, |i, j| w.get(n - 1 - j, n - 1 - i))
}

#[test]
fn skeleton_flags_reverse() {
    let nu: Measure = "0.4:1/2,1:1/2".parse().unwrap();
    for r in 0..30 {
        let w = simulate_weights_replica(&nu, 60, 3, r);
        let a = skeleton_points(&w, 1.0, 5).unwrap();
        let b = skeleton_points(&reversed(&w), 1.0, 5).unwrap();
        let mut right_rev = a.right.clone();
        right_rev.reverse();
        assert_eq!(b.left, right_rev);
        let mut left_rev = a.left.clone();
        left_rev.reverse();
        assert_eq!(b.right, left_rev);
    }
}

#[test]
fn skeleton_trivial_cases() {
    let all_top = WeightTable::from_fn(20, |_, _| XReal::finite(1.0));
    let s = skeleton_points(&all_top, 1.0, 3).unwrap();
    assert_eq!(s.skeleton_indices, (3..17).collect::<Vec<_>>());
    let none = WeightTable::from_fn(20, |_, _| XReal::finite(0.5));
    assert!(skeleton_points(&none, 1.0, 3).unwrap().skeleton_indices.is_empty());
    let e = estimate_c_skeleton(1.0, 0.5, 64, 10, 1).unwrap();
    assert_eq!(e.mean, 1.0);
}

#[test]
fn skeleton_density_is_gamma_squared() {
    let nu: Measure = "0.4:1/2,1:1/2".parse().unwrap();
    let g = euler_gamma(0.5, 1e-15).unwrap().value;
    // One count per independent table keeps the variance estimate honest.
    let counts: Vec<f64> = (0..400u64)
        .map(|r| {
            let w = simulate_weights_replica(&nu, 260, 17, r);
            skeleton_points(&w, 1.0, 80).unwrap().skeleton_indices.len() as f64 / 100.0
        })
        .collect();
    let e = lpp_core::Estimate::from_samples(&counts).unwrap();
    assert!((e.mean - g * g).abs() <= 3.0 * e.std_err, "{} ± {} vs {}", e.mean, e.std_err, g * g);
}

#[test]
fn skeleton_estimate_matches_exact() {
    let p = 0.5;
    let e = estimate_c_skeleton(0.4, p, default_skeleton_window(p), 4000, 5).unwrap();
    let exact = eval_two_atom(0.4, 1.0, p).unwrap();
    assert!((e.mean - exact).abs() <= 3.0 * e.std_err, "{} ± {} vs {exact}", e.mean, e.std_err);
}

#[test]
fn path_counts_constant_between_knots() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..200 {
        let n = 4 + (rng.next_u32() % 10) as usize;
        let labels: Vec<bool> = (0..n * n).map(|_| rng.next_u32() % 2 == 0).collect();
        let counts: Vec<(usize, usize)> = [0.35, 0.40, 0.45]
            .iter()
            .map(|&m| {
                let w = WeightTable::from_fn(n, |i, j| XReal::finite(if labels[i * n + j] { 1.0 } else { m }));
                let r = heaviest_path(&w, 1.0).unwrap();
                (r.n_top, r.n_other)
            })
            .collect();
        assert!(counts.windows(2).all(|c| c[0] == c[1]), "{counts:?}");
    }
}

#[test]
fn coupled_runs_are_ordered_and_strictly_separated() {
    let lo: Measure = "-1:1/2,1:1/2".parse().unwrap();
    let hi: Measure = "0:1/2,1:1/2".parse().unwrap();
    let c = coupled_estimate(&lo, &hi, 400, 40, 2).unwrap();
    assert!(c.ordered);
    assert!(c.gap.mean > 3.0 * c.gap.std_err);
    let a: Measure = "-inf:1/4,0:1/4,1:1/2".parse().unwrap();
    let b: Measure = "0:1/4,0.5:1/4,1:1/2".parse().unwrap();
    assert!(coupled_estimate(&a, &b, 300, 20, 3).unwrap().ordered);
}

/// Front trajectories of two starts driven by the same top indices and
/// sub-top weights; also the unpruned run for the first start.
fn paired_fronts(xi: &[u32], seed: u64, window: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start_a = Config::new(vec![XReal::ZERO], f64::INFINITY);
    let start_b = Config::new(
        vec![XReal::finite(3.5), XReal::finite(1.0), XReal::finite(0.25)],
        f64::INFINITY,
    );
    let mut runs = [start_a.clone().with_window(window), start_b.with_window(window), start_a];
    let mut fronts: [Vec<f64>; 3] = Default::default();
    for &x in xi {
        let draws: Vec<f64> = (0..x).map(|_| if rng.next_u32() % 2 == 0 { 0.5 } else { 0.0 }).collect();
        for (cfg, f) in runs.iter_mut().zip(fronts.iter_mut()) {
            f.push(cfg.front().value());
            cfg.advance_top(x as usize, 1.0, |j| draws[j - 1]);
        }
    }
    let [a, b, c] = fronts;
    (a, b, c)
}

fn geometric_xi(p: f64, len: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let mut k = 1;
            while (rng.next_u64() as f64 / 2f64.powi(64)) >= p {
                k += 1;
            }
            k
        })
        .collect()
}

#[test]
fn front_difference_constant_after_renovation() {
    for seed in 0..20 {
        let xi = geometric_xi(0.5, 400, seed);
        let rep = renovation_times(&XiSeq(xi.clone()), 40).unwrap();
        let Some(&t) = rep.times.first() else { continue };
        let (a, b, unpruned) = paired_fronts(&xi, seed, 50.0);
        // fronts[n - 1] is the front before step n.
        let d0 = a[t - 1] - b[t - 1];
        for n in t..a.len() {
            assert_eq!(a[n] - b[n], d0, "seed {seed} step {n}");
        }
        assert_eq!(a, unpruned, "pruning changed the trajectory");
    }
}

#[test]
fn regenerative_estimate_for_two_atoms() {
    let split = "0.4:1/2,1:1/2".parse::<Measure>().unwrap().split_top().unwrap();
    let e = regenerative_estimate(&split, 100_000, 40, 4).unwrap();
    let exact = eval_two_atom(0.4, 1.0, 0.5).unwrap();
    assert!((e.mean - exact).abs() <= 3.0 * e.std_err, "{} ± {} vs {exact}", e.mean, e.std_err);
}
