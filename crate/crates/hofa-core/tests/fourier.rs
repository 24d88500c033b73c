use hofa_core::brackets::{BracketTerm, Phase};
use hofa_core::fourier::*;
use hofa_core::gowers::FnZN;
use hofa_core::ratmod::{rat, ExactRational};
use num_complex::Complex64;
use num_traits::Zero;
use proptest::prelude::*;

const DELTA: f64 = 0.05;

fn val(x: &ExactRational) -> f64 {
    x.numer().to_string().parse::<f64>().unwrap() / x.denom().to_string().parse::<f64>().unwrap()
}

/// `{x}` in `(-1/2, 1/2]` from `f64` arithmetic on an exact fraction.
fn fr(x: &ExactRational) -> f64 {
    let v = val(x);
    let r = v - v.round();
    if r <= -0.5 {
        r + 1.0
    } else {
        r
    }
}

fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * x)
}

/// Mean absolute error over `[N] x [H]`, evaluating the expansion term by term.
fn measured(exp: &FourierExpansion, target: impl Fn(i64, i64) -> Complex64) -> f64 {
    let mut acc = 0.0;
    for n in 0..exp.n as i64 {
        for h in 0..exp.h as i64 {
            let approx: Complex64 = exp
                .terms
                .iter()
                .map(|t| t.coeff * e(fr(&(&t.freq_n * rat(n, 1))) + fr(&(&t.freq_h * rat(h, 1)))))
                .sum();
            acc += (target(n, h) - approx).norm();
        }
    }
    acc / (exp.n * exp.h) as f64
}

fn cfg() -> FourierConfig {
    FourierConfig::default()
}

#[test]
fn one_variable_frac_product() {
    let (a, b) = (rat(1, 31), rat(2, 31));
    let terms = [BracketTerm::FracProd { a: rat(1, 1), p1: Phase::linear(a.clone()), p2: Phase::linear(b.clone()) }];
    let exp = expand_frac_product(&terms, 31, DELTA, &cfg()).unwrap();
    let err = measured(&exp, |n, _| e(fr(&(&a * rat(n, 1))) * fr(&(&b * rat(n, 1)))));
    assert!(err <= DELTA, "{err}");
    assert!((err - exp.measured_l1_error).abs() < 1e-9);
    assert!(exp.frequencies_periodic());
    assert!(exp.coeff_l1() <= exp.l1_bound + 1e-9);
}

#[test]
fn zero_coefficient_is_constant_one() {
    let terms = [BracketTerm::FracProd { a: rat(0, 1), p1: Phase::linear(rat(3, 31)), p2: Phase::linear(rat(5, 31)) }];
    let exp = expand_frac_product(&terms, 31, DELTA, &cfg()).unwrap();
    assert_eq!(exp.terms.len(), 1);
    assert!((exp.terms[0].coeff - 1.0).norm() < 1e-12 && exp.terms[0].freq_n.is_zero());
    let exp = expand_trivial(&[rat(0, 1), rat(0, 1)], &[rat(1, 31), rat(4, 31)], 31, DELTA, &cfg()).unwrap();
    assert_eq!(exp.terms.len(), 1);
}

#[test]
fn separable_bilinear_reduces_to_one_variable() {
    // {alpha h}{0 n} vanishes identically
    let t = BilinearTerm { a: rat(1, 1), p1: Phase2::in_h(rat(4, 31)), p2: Phase2::in_n(rat(0, 1)) };
    let exp = expand_bilinear(&[t], 31, 31, DELTA, &cfg()).unwrap();
    assert_eq!(exp.terms.len(), 1);
    assert!(exp.measured_l1_error < 1e-12);
}

#[test]
fn bilinear_instance() {
    let t1 = BilinearTerm { a: rat(1, 1), p1: Phase2::in_n(rat(5, 31)), p2: Phase2::in_h(rat(12, 31)) };
    let t2 = BilinearTerm { a: rat(-2, 1), p1: Phase2::new(rat(3, 31), rat(1, 31), rat(0, 1)), p2: Phase2::in_h(rat(7, 31)) };
    let terms = [t1, t2];
    let exp = expand_bilinear(&terms, 31, 31, DELTA, &cfg()).unwrap();
    let target = |n: i64, h: i64| {
        e(terms.iter().map(|t| val(&t.a) * fr(&t.p1.frac_at(n, h)) * fr(&t.p2.frac_at(n, h))).sum())
    };
    let err = measured(&exp, target);
    assert!(err <= DELTA, "{err}");
    assert!(exp.frequencies_periodic());
}

#[test]
fn trivial_expansion_instance() {
    let (a, al) = ([rat(7, 31), rat(-40, 31)], [rat(3, 31), rat(11, 31)]);
    let exp = expand_trivial(&a, &al, 31, DELTA, &cfg()).unwrap();
    let target = |n: i64, _| e(a.iter().zip(&al).map(|(x, y)| val(x) * fr(&(y * rat(n, 1)))).sum());
    let err = measured(&exp, target);
    assert!(err <= DELTA, "{err}");
    assert!(exp.frequencies_periodic());
}

#[test]
fn integer_coefficients_give_one_character() {
    let exp = expand_trivial(&[rat(2, 1), rat(-1, 1)], &[rat(3, 31), rat(5, 31)], 31, DELTA, &cfg()).unwrap();
    assert_eq!(exp.terms.len(), 1);
    assert_eq!(exp.terms[0].freq_n, rat(1, 31));
    assert!(exp.measured_l1_error < 1e-12);
}

#[test]
fn box_product_with_frozen_argument_matches_trivial() {
    // e({alpha n}{c}) = e({c}{alpha n})
    let alpha = rat(6, 31);
    let c = rat(9, 31);
    let bx = expand_box_product(&[(Phase2::in_n(alpha.clone()), Phase2::constant(c.clone()))], 31, 1, DELTA, &cfg()).unwrap();
    let tr = expand_trivial(std::slice::from_ref(&c), std::slice::from_ref(&alpha), 31, DELTA, &cfg()).unwrap();
    let gap: f64 = (0..31).map(|n| (bx.eval(n, 0) - tr.eval(n, 0)).norm()).sum::<f64>() / 31.0;
    assert!(gap <= 2.0 * DELTA, "{gap}");
    assert!(bx.measured_l1_error <= DELTA);
    assert!(bx.max_coeff <= 1.0 + 1e-12);
    assert!(bx.coeffs.iter().all(|&(a, b, _)| (2.0 * a).fract() == 0.0 && (2.0 * b).fract() == 0.0));
}

#[test]
fn box_product_small_instance() {
    let f = [
        (Phase2::in_n(rat(3, 13)), Phase2::in_h(rat(5, 13))),
        (Phase2::new(rat(1, 13), rat(2, 13), rat(0, 1)), Phase2::in_n(rat(4, 13))),
    ];
    let bx = expand_box_product(&f, 13, 13, DELTA, &cfg()).unwrap();
    let mut err = 0.0;
    for n in 0..13 {
        for m in 0..13 {
            let exact = e(f.iter().map(|(p, q)| fr(&p.frac_at(n, m)) * fr(&q.frac_at(n, m))).sum());
            err += (exact - bx.eval(n, m)).norm();
        }
    }
    let err = err / 169.0;
    assert!(err <= DELTA, "{err}");
    assert!((err - bx.measured_l1_error).abs() < 1e-9);
    let empty = expand_box_product(&[], 13, 1, DELTA, &cfg()).unwrap();
    assert!((empty.eval(5, 0) - 1.0).norm() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn frac_product_error_within_delta(a in -3i64..=3, x in 1i64..31, y in 1i64..31) {
        prop_assume!(a != 0);
        let (al, be) = (rat(x, 31), rat(y, 31));
        let terms = [BracketTerm::FracProd { a: rat(a, 1), p1: Phase::linear(al.clone()), p2: Phase::linear(be.clone()) }];
        let exp = expand_frac_product(&terms, 31, DELTA, &cfg()).unwrap();
        let err = measured(&exp, |n, _| e(a as f64 * fr(&(&al * rat(n, 1))) * fr(&(&be * rat(n, 1)))));
        prop_assert!(err <= DELTA);
        prop_assert!(exp.frequencies_periodic());
    }

    #[test]
    fn dft_expansion_is_exact(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)) {
        let f = FnZN::new(vals.into_iter().map(|(a, b)| Complex64::new(a, b)).collect());
        let exp = dft_expansion(&f);
        for n in 0..f.n as i64 {
            prop_assert!((exp.eval(n, 0) - f.values[n as usize]).norm() < 1e-10);
        }
    }
}
