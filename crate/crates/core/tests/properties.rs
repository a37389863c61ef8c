//! Randomized invariants.

use proptest::prelude::*;

use shuffle_amp::accountant::{compose_rdp, rdp_to_adp, RdpCurve};
use shuffle_amp::bounds::{eps_upper_numeric, ExtremalAck, Variant, DEFAULT_TOL};
use shuffle_amp::clone_dists::{build_pair_3sym, build_pair_4sym, CloneParams, CountDist, DEFAULT_TRUNC};
use shuffle_amp::decompose::{extremal_params, verify_ldp, RandomizerMatrix};
use shuffle_amp::divergence::{hockey_stick, renyi, DeltaCurve};
use shuffle_amp::numkit::{ln_binom_pmf, log_add, LogProb, LogSumExp};
use shuffle_amp::oracle::{exact_shuffled_krr, Caps};

fn three_sym(eps0: f64, n: u64, frac: f64) -> (CountDist, CountDist) {
    let p = frac / (eps0.exp() + 1.0);
    build_pair_3sym(CloneParams::new(eps0, n, p, 0.0).unwrap(), DEFAULT_TRUNC).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn log_add_commutes_and_matches_linear(a in -700.0f64..0.0, b in -700.0f64..0.0) {
        let (x, y) = (LogProb::new(a).unwrap(), LogProb::new(b).unwrap());
        prop_assert_eq!(log_add(x, y), log_add(y, x));
        let linear = a.exp() + b.exp();
        if linear > 1e-300 {
            let v = log_add(x, y).value();
            prop_assert!((v - linear.ln()).abs() <= 1e-14 * v.abs().max(1.0));
        }
    }

    #[test]
    fn binomial_pmf_normalizes(n in 1u64..3000, p in 0.001f64..0.999) {
        let total: LogSumExp = (0..=n).map(|k| ln_binom_pmf(k, n, p).unwrap().value()).collect();
        prop_assert!(total.value().abs() < 1e-12);
    }

    #[test]
    fn clone_pair_mirror_and_mass(eps0 in 0.1f64..6.0, n in 1u64..3000, frac in 0.05f64..1.0) {
        let (p, q) = three_sym(eps0, n, frac);
        for (c, lp) in p.atoms() {
            prop_assert_eq!(lp, q.mass(&[c[1], c[0], c[2]]));
        }
        let retained = p.retained_mass().prob();
        prop_assert!(retained <= 1.0 + 1e-12);
        prop_assert!(1.0 - retained <= p.dropped_tail().prob() + 1e-12);
    }

    #[test]
    fn four_symbol_mirror(eps0 in 0.1f64..5.0, n in 1u64..500, k in 3u64..12) {
        let (p, q) = build_pair_4sym(CloneParams::krr(eps0, k, n).unwrap(), DEFAULT_TRUNC).unwrap();
        for (c, lp) in p.atoms() {
            prop_assert_eq!(lp, q.mass(&[c[1], c[0], c[2]]));
        }
    }

    #[test]
    fn hockey_stick_shape(eps0 in 0.2f64..5.0, n in 1u64..2000, frac in 0.1f64..1.0, e1 in 0.0f64..5.0, e2 in 0.0f64..5.0) {
        let (p, q) = three_sym(eps0, n, frac);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = hockey_stick(&p, &q, lo).unwrap();
        let b = hockey_stick(&p, &q, hi).unwrap();
        prop_assert!(a.lower <= a.upper && (0.0..=1.0).contains(&a.lower) && a.upper <= 1.0);
        prop_assert!(b.lower <= a.upper + 1e-15);
        // mirror pairs are symmetric bit for bit
        prop_assert_eq!(a.clone(), hockey_stick(&q, &p, lo).unwrap());
        let curve = DeltaCurve::new(&p, &q).unwrap();
        prop_assert!((curve.delta(lo).upper - a.upper).abs() <= 1e-12);
    }

    #[test]
    fn renyi_monotone_and_bounded(eps0 in 0.2f64..4.0, n in 1u64..2000, a1 in 1.05f64..20.0, a2 in 1.05f64..20.0) {
        let (p, q) = three_sym(eps0, n, 1.0);
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let x = renyi(&p, &q, lo).unwrap();
        let y = renyi(&p, &q, hi).unwrap();
        prop_assert!(x.lower <= y.upper + 1e-12);
        prop_assert!(y.upper <= eps0 + 1e-12);
        prop_assert!(x.lower >= -1e-15);
    }

    #[test]
    fn numeric_bound_below_local(eps0 in 0.1f64..6.0, n in 2u64..3000) {
        let v = Variant::GeneralExtremal(ExtremalAck::assume_extremal_class());
        let b = eps_upper_numeric(eps0, n, 1e-6, v, DEFAULT_TRUNC, DEFAULT_TOL).unwrap();
        prop_assert!(b.point.eps <= eps0);
        prop_assert!(b.infeasible || b.delta_at_eps.upper <= 1e-6);
    }

    #[test]
    fn compose_commutes_and_conversion_is_monotone(
        a in proptest::collection::vec(0.0f64..1.0, 6),
        b in proptest::collection::vec(0.0f64..1.0, 6),
        d1 in 1e-9f64..0.5,
        d2 in 1e-9f64..0.5,
    ) {
        let grid = vec![1.5, 2.0, 4.0, 8.0, 16.0, 32.0];
        let ca = RdpCurve::new(grid.clone(), a, "a").unwrap();
        let cb = RdpCurve::new(grid.clone(), b, "b").unwrap();
        let ab = compose_rdp(&[ca.clone(), cb.clone()]).unwrap();
        let ba = compose_rdp(&[cb, ca.clone()]).unwrap();
        prop_assert_eq!(ab.eps(), ba.eps());
        let (small, large) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(rdp_to_adp(&ab, large).unwrap().point.eps <= rdp_to_adp(&ab, small).unwrap().point.eps);
        // a coarser grid can only do worse
        let coarse = RdpCurve::new(vec![2.0, 8.0], vec![ca.eps()[1], ca.eps()[3]], "c").unwrap();
        prop_assert!(rdp_to_adp(&ca, small).unwrap().point.eps <= rdp_to_adp(&coarse, small).unwrap().point.eps);
    }

    #[test]
    fn random_ldp_matrices_decompose(
        raw in proptest::collection::vec(proptest::collection::vec(1.0f64..3.0, 4), 3),
    ) {
        // rows of positive weights normalized to distributions
        let probs: Vec<Vec<f64>> = raw
            .iter()
            .map(|r| {
                let t: f64 = r.iter().sum();
                r.iter().map(|v| v / t).collect()
            })
            .collect();
        let labels = |n: usize, c: char| (0..n).map(|i| format!("{c}{i}")).collect::<Vec<_>>();
        let m = RandomizerMatrix::new(labels(3, 'x'), labels(4, 's'), probs).unwrap();
        let eps0 = verify_ldp(&m);
        prop_assume!(eps0 > 1e-3);
        let d = extremal_params(&m, 0, 1, eps0).unwrap();
        prop_assert!(d.p <= 1.0 / (eps0.exp() + 1.0) + 1e-12);
        prop_assert!(d.q >= 0.0 && d.q <= 1.0 - 2.0 * d.p + 1e-12);
        prop_assert!(d.residual <= 1e-9, "residual {}", d.residual);
    }

    #[test]
    fn oracle_ignores_order(perm_seed in 0usize..24) {
        use num::{BigInt, BigRational};
        let e = BigRational::from_integer(BigInt::from(3));
        let data = [0usize, 1, 2, 2];
        let mut shuffled = data;
        // one of the 24 orderings
        let mut s = perm_seed;
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, s % (i + 1));
            s /= i + 1;
        }
        let a = exact_shuffled_krr(&e, 3, &data, Caps::default()).unwrap();
        let b = exact_shuffled_krr(&e, 3, &shuffled, Caps::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}
