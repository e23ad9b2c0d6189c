use lpp_core::lpp::{heaviest_path, last_passage_values, WeightTable};
use lpp_core::measure::{make_measure, stochastically_leq, unit_to_bits};
use lpp_core::mgs::{coupling_check, renovation_times, Config, XiSeq};
use lpp_core::numeric::{euler_gamma, rat, solve_linear_ratfun};
use lpp_core::words::{enumerate_minimal_triangular, s_end, s_end_from, Assignment, Word};
use lpp_core::{Measure, Poly, RatFun, Rational, XReal};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn poly_strategy(max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(-5i64..=5, 1..=max_deg + 1).prop_map(|c| Poly::from_ints(&c))
}

/// Values on a dyadic grid so that sums are exact.
fn value_strategy() -> impl Strategy<Value = XReal> {
    prop_oneof![
        1 => Just(XReal::NEG_INFINITY),
        6 => (-8i32..=8).prop_map(|v| XReal::finite(v as f64 / 4.0)),
    ]
}

fn measure_strategy() -> impl Strategy<Value = Measure> {
    prop::collection::vec((value_strategy(), 1i64..=6), 1..=4).prop_filter_map("needs finite top", |atoms| {
        let total: i64 = atoms.iter().map(|a| a.1).sum();
        let m = make_measure(atoms.into_iter().map(|(v, w)| (v, rat(w, total))).collect()).ok()?;
        m.essential_sup().is_finite().then_some(m)
    })
}

fn table_strategy(max_n: usize) -> impl Strategy<Value = WeightTable> {
    (2..=max_n).prop_flat_map(|n| {
        prop::collection::vec(value_strategy(), n * (n - 1) / 2).prop_map(move |vals| {
            let mut it = vals.into_iter();
            WeightTable::from_fn(n, |_, _| it.next().expect("enough values"))
        })
    })
}

fn minimal_words() -> Vec<Word> {
    enumerate_minimal_triangular(7, 14).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_divided_by_factor(a in poly_strategy(5), b in poly_strategy(4)) {
        prop_assume!(!b.is_zero());
        let (q, r) = (&a * &b).div_rem(&b).unwrap();
        prop_assert_eq!(q, a.clone());
        prop_assert!(r.is_zero());
        let ab = RatFun::from_poly(&a * &b);
        let back = (&ab / &RatFun::from_poly(b)).unwrap();
        prop_assert_eq!(back, RatFun::from_poly(a));
    }

    #[test]
    fn ratfun_solve_matches_pointwise_elimination(
        entries in prop::collection::vec(poly_strategy(2), 9),
        rhs in prop::collection::vec(poly_strategy(2), 3),
        points in prop::collection::vec(1i64..40, 5),
    ) {
        // Diagonal shift keeps the system regular on (0, 1).
        let shift = Poly::from_ints(&[40]);
        let a: Vec<Vec<RatFun>> = (0..3)
            .map(|i| (0..3).map(|j| {
                let e = &entries[3 * i + j];
                RatFun::from_poly(if i == j { e + &shift } else { e.clone() })
            }).collect())
            .collect();
        let b: Vec<RatFun> = rhs.into_iter().map(RatFun::from_poly).collect();
        let x = solve_linear_ratfun(&a, &b).unwrap();
        for k in points {
            let p = rat(k, 41);
            let av: Vec<Vec<Rational>> =
                a.iter().map(|row| row.iter().map(|e| e.eval(&p).unwrap()).collect()).collect();
            let bv: Vec<Rational> = b.iter().map(|e| e.eval(&p).unwrap()).collect();
            let expect = gauss(av, bv);
            let got: Vec<Rational> = x.iter().map(|e| e.eval(&p).unwrap()).collect();
            prop_assert_eq!(got, expect);
        }
    }

    #[test]
    fn split_then_reassemble(nu in measure_strategy()) {
        let split = nu.split_top().unwrap();
        prop_assert_eq!(Measure::reassemble(&split).unwrap(), nu);
    }

    #[test]
    fn inverse_cdf_respects_order(a in measure_strategy(), b in measure_strategy(), u in any::<u64>()) {
        if stochastically_leq(&a, &b) {
            prop_assert!(a.sample_bits(u) <= b.sample_bits(u));
        }
        if stochastically_leq(&b, &a) {
            prop_assert!(b.sample_bits(u) <= a.sample_bits(u));
        }
    }

    #[test]
    fn unit_sampling_agrees_with_bits(nu in measure_strategy(), u in 0.0f64..1.0) {
        prop_assert_eq!(nu.sample_unit(u), nu.sample_bits(unit_to_bits(u)));
    }

    #[test]
    fn dyadic_rescale_round_trip(nu in measure_strategy(), e in -6i32..=6) {
        let a = 2f64.powi(e);
        prop_assert_eq!(nu.rescale(a).unwrap().rescale(1.0 / a).unwrap(), nu);
    }

    #[test]
    fn superadditivity(w in table_strategy(12)) {
        let lp = last_passage_values(&w);
        let n = w.n();
        for k in 1..n.saturating_sub(1) {
            let tail = last_passage_values(&w.sub_table(k, n - 1));
            prop_assert!(lp[n - 1] >= lp[k] + tail[n - 1 - k]);
        }
    }

    #[test]
    fn heaviest_path_is_consistent(w in table_strategy(12)) {
        let lp = last_passage_values(&w);
        let top = w.n() as f64; // never attained: nothing counts as top
        let r = heaviest_path(&w, top).unwrap();
        prop_assert_eq!(r.weight, lp[w.n() - 1]);
        if r.weight.is_finite() {
            let sum = r.path.windows(2).fold(XReal::ZERO, |s, e| s + w.get(e[0], e[1]));
            prop_assert_eq!(sum, r.weight);
            prop_assert_eq!(r.path.first(), Some(&0));
            prop_assert_eq!(r.path.last(), Some(&(w.n() - 1)));
            prop_assert_eq!(r.n_top + r.n_other, r.path.len() - 1);
        }
    }

    #[test]
    fn mgs_matches_dp(w in table_strategy(14)) {
        prop_assert!(coupling_check(&w));
    }

    #[test]
    fn s_end_range_and_start_independence(
        idx in any::<prop::sample::Index>(),
        m_code in 1u32..=8,
        xs in prop::collection::vec(0u32..9, 64),
        starts in prop::collection::vec(prop::collection::vec(-32i32..32, 1..6), 5),
    ) {
        let words = minimal_words();
        let beta = &words[idx.index(words.len())];
        let m = m_code as f64 / 4.0;
        let mut x = Assignment::empty_for(beta);
        let mut it = xs.iter().cycle();
        for v in x.0.iter_mut().flatten() {
            let c = *it.next().unwrap();
            *v = if c == 0 { XReal::NEG_INFINITY } else { XReal::finite(m - c as f64 / 8.0) };
        }
        let s = s_end(m, beta, &x).unwrap();
        prop_assert!((0.0..=m).contains(&s), "s_end {} outside [0, {}]", s, m);
        for start in starts {
            let cfg = Config::new(start.iter().map(|&v| XReal::finite(v as f64 / 8.0)).collect(), f64::INFINITY);
            prop_assert_eq!(s_end_from(&cfg, m, beta, &x).unwrap(), s);
        }
    }

    #[test]
    fn triangular_steps_forget_the_start(
        xi in prop::collection::vec(1u32..=6, 1..30),
        subs in prop::collection::vec(0u32..8, 200),
        a in prop::collection::vec(-32i32..32, 1..6),
        b in prop::collection::vec(-32i32..32, 1..6),
    ) {
        // Make the word triangular: letter i is at most i.
        let word: Vec<u32> = xi.iter().enumerate().map(|(i, &v)| v.min(i as u32 + 1)).collect();
        let top = 1.0;
        let cfg = |v: &[i32]| Config::new(v.iter().map(|&x| XReal::finite(x as f64 / 8.0)).collect(), f64::INFINITY);
        let (mut ca, mut cb) = (cfg(&a), cfg(&b));
        let mut k = 0;
        for &letter in &word {
            let draws: Vec<f64> = (0..letter).map(|_| { k += 1; subs[k % subs.len()] as f64 / 8.0 - 0.125 }).collect();
            let (fa, fb) = (ca.front().value(), cb.front().value());
            ca.advance_top(letter as usize, top, |j| draws[j - 1]);
            cb.advance_top(letter as usize, top, |j| draws[j - 1]);
            let (da, db) = (ca.front().value() - fa, cb.front().value() - fb);
            prop_assert_eq!(da, db);
            prop_assert!((0.0..=top).contains(&da));
        }
    }

    #[test]
    fn renovation_definition(xi in prop::collection::vec(1u32..=5, 1..60), b in 1usize..6) {
        prop_assume!(xi.len() >= b);
        let seq = XiSeq(xi.clone());
        let rep = renovation_times(&seq, b).unwrap();
        let expect: Vec<usize> = (1..=xi.len() + 1 - b)
            .filter(|&n| (1..=b).all(|i| xi[n + i - 2] as usize <= i))
            .collect();
        prop_assert_eq!(rep.times, expect);
    }

    #[test]
    fn euler_gamma_in_unit_interval(q in 0.0f64..0.99) {
        let g = euler_gamma(q, 1e-14).unwrap().value;
        prop_assert!(g > 0.0 && g <= 1.0);
        let h = euler_gamma((q + 0.005).min(0.995), 1e-14).unwrap().value;
        prop_assert!(h < g);
    }
}

/// Plain Gauss-Jordan elimination over the rationals.
fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).find(|&r| !a[r][c].is_zero()).expect("regular system");
        a.swap(c, piv);
        b.swap(c, piv);
        let inv = Rational::one() / &a[c][c];
        for j in 0..n {
            a[c][j] = &a[c][j] * &inv;
        }
        b[c] = &b[c] * &inv;
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..n {
                    let t = &f * &a[c][j];
                    a[r][j] -= t;
                }
                let t = &f * &b[c];
                b[r] -= t;
            }
        }
    }
    b
}
