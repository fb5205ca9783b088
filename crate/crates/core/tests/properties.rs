use ftselect::approx_kselect::{next_beta, padding};
use ftselect::bounds::theorems::{class_counts, kl_div};
use ftselect::bounds::{hyper_pmf, hyper_tail, HyperSpec};
use ftselect::oracle::classify;
use ftselect::primitives::q_of;
use ftselect::{
    Constants, ExactSelectSchedule, GroundTruth, MedianScheduleF64, RankClass, Rational, Scalar, SelectScheduleF64,
};
use proptest::prelude::*;

fn constants() -> impl Strategy<Value = Constants> {
    prop_oneof![Just(Constants::Paper), (1e-4f64..=1.0).prop_map(Constants::Scaled)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn median_schedule_shape(n in 1u64..10_000_000, eps in 0.001f64..0.45, c in constants()) {
        let s = MedianScheduleF64::new(n, eps, c).unwrap();
        s.check().unwrap();
        let last = s.rounds();
        prop_assert!(s.levels[last].eps >= 1.0 / 6.0);
        for (i, level) in s.levels.iter().enumerate() {
            let e = eps * 1.25f64.powi(i as i32);
            prop_assert!((level.eps - e).abs() <= 1e-12 * e);
            if i < last {
                prop_assert!(level.eps < 1.0 / 6.0);
            }
            if i > 0 {
                let size = 2000.0 * i as f64 * 0.64f64.powi(i as i32) * c.factor() / (eps * eps);
                prop_assert!((level.size as f64 - size.ceil().max(1.0)).abs() <= 1.0, "level {i}: {} vs {size}", level.size);
            }
        }
    }

    #[test]
    fn select_schedule_tracks_recurrence(n in 1000u64..5_000_000, beta in 0.002f64..0.124, ratio in 0.05f64..0.49, p in 0.0f64..0.45) {
        let k = ((beta * n as f64) as u64).max(1);
        let eps = ratio * k as f64 / n as f64;
        let q = q_of(p);
        let s = SelectScheduleF64::new(n, k, eps, q, Constants::Paper).unwrap();
        s.check().unwrap();
        let (mut b, mut e) = (k as f64 / n as f64, eps);
        for level in &s.levels[1..] {
            b = (2.0 * b - b * b - e * e) - 2.0 * q * (b - b * b - e * e);
            e *= 1.5;
            prop_assert!((level.beta - b).abs() <= 1e-12);
            prop_assert!((level.eps - e).abs() <= 1e-12 * e);
        }
        prop_assert!(s.last().beta >= 0.125 || s.rounds() == 0);
    }

    #[test]
    fn exact_select_schedule_invariants(num in 1i64..124, den_eps in 3i64..400, qi in 0i64..50) {
        let beta = Rational::from_ratio(num, 1000);
        let eps = Rational::from_ratio(num, 1000 * den_eps);
        let q = Rational::from_ratio(qi, 1000);
        let s = ExactSelectSchedule::new(1000, num as u64, eps.clone(), q.clone(), Constants::Paper).unwrap();
        s.check().unwrap();
        let two = Rational::from_ratio(2, 1);
        for (i, level) in s.levels.iter().enumerate() {
            prop_assert!(level.beta > two.clone() * level.eps.clone());
            let mut cap = beta.clone();
            for _ in 0..i {
                cap *= two.clone();
            }
            prop_assert!(level.beta <= cap);
        }
        if s.rounds() > 0 {
            prop_assert_eq!(&s.levels[1].beta, &next_beta(&beta, &eps, &q));
        }
    }

    #[test]
    fn kl_is_nonnegative(a in 0.001f64..0.999, b in 0.001f64..0.999) {
        let d = kl_div(a, b).unwrap();
        prop_assert!(d >= -1e-15);
        // Pinsker: D ≥ 2(a−b)².
        prop_assert!(d + 1e-12 >= 2.0 * (a - b) * (a - b));
    }

    #[test]
    fn hyper_pmf_and_tail_consistent(population in 1u64..300, kf in 0.0f64..=1.0, mf in 0.0f64..=1.0) {
        let successes = (kf * population as f64) as u64;
        let draws = (mf * population as f64) as u64;
        let mut total = 0.0;
        for l in 0..=draws {
            let spec = HyperSpec::new(population, successes, draws, l).unwrap();
            let here = hyper_tail(&spec);
            let next = hyper_tail(&spec.with_threshold(l + 1));
            let mass = hyper_pmf(&spec);
            prop_assert!((here - next - mass).abs() <= 1e-9 * here.max(1e-300) + 1e-300);
            total += mass;
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn class_counts_match_classify(n in 1u64..3000, kf in 0.0f64..=1.0, eps in 0.0001f64..0.49) {
        let k = ((kf * n as f64) as u64).clamp(1, n);
        let (small, large) = class_counts(n, k, eps);
        let mut seen = [0u64; 3];
        for r in 1..=n {
            seen[match classify(r, n, k, eps) {
                RankClass::Small => 0,
                RankClass::Relevant => 1,
                RankClass::Large => 2,
            }] += 1;
        }
        prop_assert_eq!(seen[0], small);
        prop_assert_eq!(seen[2], large);
    }

    #[test]
    fn padding_centres_target(n_l in 2u64..1_000_000, beta in 0.125f64..0.5, eps in 0.0001f64..0.3) {
        let pad = padding(n_l, beta, eps);
        prop_assert!(2 * pad.target <= n_l);
        prop_assert_eq!(2 * pad.target + pad.dummies, n_l);
        prop_assert!(pad.median_eps > 0.0 && pad.median_eps < 0.5);
    }

    #[test]
    fn ground_truth_is_a_permutation(n in 1u64..2000, kf in 0.0f64..=1.0, seed: u64) {
        let k = ((kf * n as f64) as u64).clamp(1, n);
        let t = GroundTruth::new(n, k, 0.1, seed).unwrap();
        let mut ranks: Vec<u64> = t.population().iter().map(|&e| t.rank(e).unwrap()).collect();
        ranks.sort_unstable();
        let expected: Vec<u64> = (1..=t.working_n()).collect();
        prop_assert_eq!(ranks, expected);
        prop_assert!(2 * t.working_k() <= t.working_n());
        for e in t.population() {
            let r = t.rank(e).unwrap();
            if r <= n {
                let w = t.working_rank(e).unwrap();
                prop_assert_eq!(w, if t.is_mirrored() { n + 1 - r } else { r });
            }
        }
    }
}

#[test]
fn exact_and_float_median_schedules_agree() {
    for eps in [0.01, 0.05, 0.1, 0.15, 0.2] {
        let f = MedianScheduleF64::new(100_000, eps, Constants::Paper).unwrap();
        let x = ftselect::ExactMedianSchedule::new(100_000, eps.to_rational(), Constants::Paper).unwrap();
        assert_eq!(f.rounds(), x.rounds());
        for (a, b) in f.levels.iter().zip(&x.levels) {
            assert_eq!(a.size, b.size);
        }
    }
}
