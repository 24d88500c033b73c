use std::collections::HashMap;

use hofa_core::additive::*;
use hofa_core::gowers::FnZN;
use hofa_core::ratmod::{dist_circle, frac_q, int, rat, ExactRational};
use num_complex::Complex64;
use num_traits::One;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bohr_scan(s: &[ExactRational], rho: &ExactRational, n: u64) -> Vec<i64> {
    (0..n as i64).filter(|&x| s.iter().all(|a| dist_circle(&(a * int(x))) < *rho)).collect()
}

/// The regularity inequality on the grid, from plain membership scans.
fn regular_by_scan(s: &[ExactRational], r: &ExactRational, n: u64, grid: &[ExactRational]) -> bool {
    let size = |t: &ExactRational| int(bohr_scan(s, t, n).len() as i64);
    let b = size(r);
    let c = int(100 * s.len() as i64);
    grid.iter().all(|eps| {
        let lo = &b * (ExactRational::one() - &c * eps);
        let hi = &b * (ExactRational::one() + &c * eps);
        let grown = size(&(r * (ExactRational::one() + eps)));
        let shrunk = size(&(r * (ExactRational::one() - eps)));
        grown >= lo && grown <= hi && shrunk >= lo
    })
}

#[test]
fn bohr_set_of_one_seventh() {
    let b = bohr_build(&[rat(1, 7)], &(rat(1, 7) + rat(1, 1000)), 7).unwrap();
    assert_eq!(b.members, vec![0, 1, 6]);
    let b = bohr_build(&[rat(1, 7)], &rat(1, 7), 7).unwrap();
    assert_eq!(b.members, vec![0]);
    let all = bohr_build(&[rat(2, 7), rat(3, 7)], &rat(3, 5), 7).unwrap();
    assert_eq!(all.len(), 7);
    assert!(all.contains(-1));
}

#[test]
fn regular_radius_single_frequency() {
    let cfg = RegularityConfig::default();
    let s = [rat(3, 101)];
    let grid = epsilon_grid(1, cfg.grid_points);
    for rho in [rat(1, 5), rat(10, 101), rat(7, 101)] {
        let r = find_regular_radius(&s, &rho, 101, &cfg).unwrap();
        assert!(r >= &rho / int(2) && r <= rho, "{r} outside [{}, {rho}]", &rho / int(2));
        assert!(regular_by_scan(&s, &r, 101, &grid), "rho = {rho}");
        assert!(is_regular(&s, &r, 101, &cfg));
    }
    // sitting on a jump, rho itself is not regular
    assert!(!regular_by_scan(&s, &rat(10, 101), 101, &grid));
}

#[test]
fn energy_trivial_values() {
    let all: Vec<usize> = (0..13).collect();
    assert_eq!(energy(&all, &all, 13), int(1));
    assert_eq!(energy(&[4], &[9], 13), rat(1, 13 * 13 * 13));
}

#[test]
fn quadruples_with_constant_functions() {
    let n = 11;
    let hs: Vec<usize> = (0..n).collect();
    let chi: HashMap<usize, FnZN> = hs.iter().map(|&h| (h, FnZN::constant(n, Complex64::new(1.0, 0.0)))).collect();
    let one = FnZN::constant(n, Complex64::new(1.0, 0.0));
    let r = additive_quadruple_count(&hs, &chi, &int(1), Some((&one, &one)), n, &QuadrupleConfig::default()).unwrap();
    assert_eq!((r.total_quadruples, r.count), (1331, 1331));
    assert_eq!(r.threshold_pass, Some(true));
    let r = additive_quadruple_count(&[], &HashMap::new(), &int(1), None, n, &QuadrupleConfig::default()).unwrap();
    assert_eq!((r.total_quadruples, r.count, r.threshold_pass), (0, 0, None));
}

#[test]
fn planted_quadruples_meet_the_bound() {
    for (n, seed) in [(31, 1), (61, 2)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = planted_chi_family(&mut rng, n, 0.5, 0.0);
        let r = additive_quadruple_count(&p.h_set, &p.chi, &int(1), Some((&p.f1, &p.f2)), n, &QuadrupleConfig::default())
            .unwrap();
        let hs = &p.h_set;
        let in_h = |h: usize| hs.binary_search(&h).is_ok();
        let mut total = 0u64;
        for &a in hs {
            for &b in hs {
                for &c in hs {
                    total += in_h((a + b + n - c) % n) as u64;
                }
            }
        }
        assert_eq!(r.total_quadruples, total);
        // planted characters correlate perfectly, so every quadruple counts
        assert_eq!(r.count, total);
        assert!((r.measured_delta.unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(r.threshold_pass, Some(true));
    }
}

#[test]
fn freiman_square_has_a_witness() {
    let sq: Vec<(i64, ExactRational)> = (0..4).map(|x| (x, int(x * x))).collect();
    let r = freiman_check(&sq, 2, 1009, FreimanTarget::Rationals, 1 << 20).unwrap();
    assert!(!r.holds);
    let (u, v) = r.witness.unwrap();
    assert_eq!(u.iter().sum::<i64>(), v.iter().sum::<i64>());
    let f = |w: &[i64]| w.iter().map(|x| x * x).sum::<i64>();
    assert_ne!(f(&u), f(&v));
}

#[test]
fn freiman_linear_and_bracket_linear() {
    let n = 101;
    let lin: Vec<(i64, ExactRational)> = (0..7).map(|x| (x, rat(5 * x, 3))).collect();
    for k in 1..=4 {
        assert!(freiman_check(&lin, k, n, FreimanTarget::Mod1, 1 << 20).unwrap().holds);
    }
    // a {alpha x} on B({alpha}, 1/20): eight fractional parts never wrap
    let alpha = rat(3, 101);
    let b = bohr_build(std::slice::from_ref(&alpha), &rat(1, 20), n as u64).unwrap();
    assert_eq!(b.len(), 11);
    let f: Vec<(i64, ExactRational)> = b.members.iter().map(|&x| (x, rat(7, 2) * frac_q(&(&alpha * int(x))))).collect();
    let r = freiman_check(&f, 8, n as u64, FreimanTarget::Rationals, 1 << 20).unwrap();
    assert!(r.holds);
    assert_eq!(r.checked, 43758);
    // on the whole group the same map wraps around
    let g: Vec<(i64, ExactRational)> = (0..n as i64).map(|x| (x, frac_q(&(&alpha * int(x))))).collect();
    assert!(!freiman_check(&g, 2, n as u64, FreimanTarget::Rationals, 1 << 20).unwrap().holds);
}

#[test]
fn bracket_linear_fit_recovers_coefficients() {
    let freqs = [rat(3, 31), rat(7, 31)];
    let pts: Vec<(i64, ExactRational)> = (0..31)
        .map(|x| (x, rat(2, 1) * frac_q(&(&freqs[0] * int(x))) - rat(1, 3) * frac_q(&(&freqs[1] * int(x)))))
        .collect();
    let (c, res) = fit_bracket_linear(&pts, &freqs).unwrap();
    assert_eq!(c, vec![int(2), rat(-1, 3)]);
    assert_eq!(res, int(0));
}

fn subset(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(0..n, 0..=n.min(64)).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bohr_membership_is_exact(num in prop::collection::vec(0i64..53, 0..3), p in 1i64..60, q in 2i64..60) {
        let s: Vec<ExactRational> = num.iter().map(|&a| rat(a, 53)).collect();
        let rho = rat(p, q);
        let b = bohr_build(&s, &rho, 53).unwrap();
        prop_assert_eq!(&b.members, &bohr_scan(&s, &rho, 53));
        prop_assert!(b.contains(0));
    }

    #[test]
    fn regular_radius_passes_post_hoc(a in 1i64..101, p in 1i64..20) {
        let cfg = RegularityConfig::default();
        let s = [rat(a, 101)];
        let rho = rat(p, 40);
        if let Ok(r) = find_regular_radius(&s, &rho, 101, &cfg) {
            prop_assert!(r >= &rho / int(2) && r <= rho);
            prop_assert!(regular_by_scan(&s, &r, 101, &epsilon_grid(1, cfg.grid_points)));
        }
    }

    #[test]
    fn energy_two_ways(a in subset(61), b in subset(61)) {
        prop_assert_eq!(energy(&a, &a, 61), energy_direct(&a, &a, 61));
        prop_assert_eq!(energy(&a, &b, 61), energy_direct(&a, &b, 61));
    }

    #[test]
    fn energy_cauchy_schwarz(sets in prop::collection::vec(subset(101), 4)) {
        prop_assert!(energy_cs_holds([&sets[0], &sets[1], &sets[2], &sets[3]], 101));
    }
}
