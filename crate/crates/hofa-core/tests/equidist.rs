use hofa_core::equidist::*;
use hofa_core::nilmani::{ElemNilmanifold, PolySeq};
use hofa_core::ratmod::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nearest(x: &ExactRational) -> ExactRational {
    let f = x.floor();
    if x - &f > rat(1, 2) {
        f + int(1)
    } else {
        f
    }
}

/// `|E_n e(-sum alpha_i n [beta_i n] + P(n))|` by direct summation.
fn mean_oracle(g: &PolySeq, n: u64) -> f64 {
    let s: Complex64 = (0..n as i64)
        .map(|x| {
            let xq = int(x);
            let br: ExactRational = g.alpha.iter().zip(&g.beta).map(|(a, b)| a * &xq * nearest(&(b * &xq))).sum();
            let ph = g.p.eval(&xq) - br;
            let t = ph.clone() - ph.floor();
            Complex64::from_polar(1.0, std::f64::consts::TAU * to_f64(&t))
        })
        .sum();
    s.norm() / n as f64
}

fn omega(u: &[i64], v: &[i64], d: usize) -> i64 {
    (0..d).map(|i| u[i] * v[d + i] - u[d + i] * v[i]).sum()
}

/// The certificate conditions, plus isotropy read off the `w`s, which span the eta kernel.
fn certificate_holds(g: &PolySeq, w: &[Vec<i64>], eta: &[Vec<i64>]) -> bool {
    let d = g.d();
    let psi = g.psi();
    let dot = |v: &[i64]| -> ExactRational { v.iter().zip(&psi).map(|(a, b)| int(*a) * b).sum() };
    let om = |v: &[i64]| -> ExactRational { (0..d).map(|i| int(v[i]) * &psi[d + i] - int(v[d + i]) * &psi[i]).sum() };
    w.len() + eta.len() == 2 * d
        && w.iter().all(|x| eta.iter().all(|e| x.iter().zip(e).map(|(a, b)| a * b).sum::<i64>() == 0))
        && eta.iter().all(|e| dot(e).is_integer())
        && w.iter().all(|x| om(x).is_integer())
        && w.iter().all(|x| w.iter().all(|y| omega(x, y, d) == 0))
}

#[test]
fn trivial_and_linear_means() {
    let m = ElemNilmanifold::elementary(2);
    assert!((mean_correlation(&m, &PolySeq::identity(2), 101).unwrap() - 1.0).abs() < 1e-12);
    let lin = PolySeq::new(vec![int(0); 2], vec![int(0); 2], ExactPolynomial::new(vec![int(0), rat(3, 101)])).unwrap();
    assert!(mean_correlation(&m, &lin, 101).unwrap() < 1e-12);
    let half = PolySeq::new(vec![rat(1, 2)], vec![rat(1, 3)], ExactPolynomial::zero()).unwrap();
    let res = mean_correlation(&ElemNilmanifold::elementary(1), &half, 101);
    assert!(matches!(res, Err(EquidistError::NonPeriodic(_))), "{res:?}");
}

#[test]
fn zero_horizontal_part_gives_full_eta_basis() {
    let m = ElemNilmanifold::elementary(2);
    let g = PolySeq::new(vec![int(0); 2], vec![int(0); 2], ExactPolynomial::new(vec![int(1), int(3), int(-2)])).unwrap();
    let r = run_dichotomy(&m, &g, 101, 0.5, &EquidistConfig::default()).unwrap();
    let Branch::Certificate { w, eta } = &r.branch else { panic!("expected a certificate") };
    assert!(w.is_empty() && eta.len() == 4);
    assert!(certificate_holds(&g, w, eta));
    let rep = verify_dichotomy(&m, &g, &r);
    assert!(rep.pass && rep.isotropic);
}

#[test]
fn small_modulus_takes_the_small_n_branch() {
    let m = ElemNilmanifold::elementary(1);
    let r = run_dichotomy(&m, &PolySeq::identity(1), 31, 0.5, &EquidistConfig::default()).unwrap();
    assert!(matches!(r.branch, Branch::SmallN { .. }));
    assert!(!verify_dichotomy(&m, &PolySeq::identity(1), &r).pass);
}

#[test]
fn non_isotropic_kernel_is_rejected() {
    let m = ElemNilmanifold::elementary(1);
    let g = PolySeq::identity(1);
    let bad = DichotomyResult { n: 101, branch: Branch::Certificate { w: vec![vec![1, 0], vec![0, 1]], eta: vec![] }, diagnostics: None };
    assert_eq!(omega(&[1, 0], &[0, 1], 1), 1);
    let rep = verify_dichotomy(&m, &g, &bad);
    assert!(!rep.isotropic && !rep.pass);
    let full = DichotomyResult { n: 101, branch: Branch::Certificate { w: vec![], eta: vec![vec![1, 0], vec![0, 1]] }, diagnostics: None };
    assert!(verify_dichotomy(&m, &g, &full).pass);
}

#[test]
fn generic_instances_fail_the_hypothesis() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let (m, g) = random_generic(&mut rng, 2, 211);
        let mean = mean_correlation(&m, &g, 211).unwrap();
        assert!((mean - mean_oracle(&g, 211)).abs() < 1e-9);
        if mean < 0.1 {
            assert!(matches!(run_dichotomy(&m, &g, 211, 0.1, &EquidistConfig::default()), Err(EquidistError::HypothesisUnmet { .. })));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn planted_isotropic_instances_certify(seed in 0u64..1000, d in 1usize..3, ni in 0usize..2) {
        let n = [101u64, 211][ni];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_planted_isotropic(&mut rng, d, n, 0.1);
        prop_assert!((p.mean - mean_oracle(&p.g, n)).abs() < 1e-9);
        prop_assert!(p.mean >= 0.1);
        let r = run_dichotomy(&p.m, &p.g, n, 0.1, &EquidistConfig::default()).unwrap();
        let Branch::Certificate { w, eta } = &r.branch else { panic!("expected a certificate") };
        prop_assert!(certificate_holds(&p.g, w, eta));
        let rep = verify_dichotomy(&p.m, &p.g, &r);
        prop_assert!(rep.pass && rep.isotropic, "{:?}", rep.violations);
    }

    #[test]
    fn window_reduction_identity(a in prop::collection::vec(-300i64..300, 2), b in prop::collection::vec(-300i64..300, 2)) {
        let g = PolySeq::new(a.iter().map(|&x| rat(x, 31)).collect(), b.iter().map(|&x| rat(x, 31)).collect(), ExactPolynomial::zero()).unwrap();
        prop_assert!(window_reduction_holds(&g, 31));
        let r = window_reduce(&g);
        prop_assert!(r.alpha.iter().chain(&r.beta).all(|x| *x > rat(-1, 2) && *x <= rat(1, 2)));
        let m = ElemNilmanifold::elementary(2);
        for x in 0..31 {
            prop_assert_eq!(hofa_core::nilmani::nilsequence_phase(&m, &g, x), hofa_core::nilmani::nilsequence_phase(&m, &r, x));
        }
    }
}
