use hofa_core::additive::bohr_build;
use hofa_core::brackets::*;
use hofa_core::ratmod::*;
use num_traits::Zero;
use proptest::prelude::*;

/// `[x]` as the integer nearest to `x`, halves rounded down.
fn nearest(x: &ExactRational) -> ExactRational {
    let f = x.floor();
    if x - &f > rat(1, 2) {
        f + int(1)
    } else {
        f
    }
}

fn fr(x: &ExactRational) -> ExactRational {
    x - nearest(x)
}

/// `x` reduced into `[0, 1)`.
fn mod1(x: &ExactRational) -> ExactRational {
    x - x.floor()
}

fn nbracket(alpha: &ExactRational, beta: &ExactRational, n: i64) -> ExactRational {
    alpha * int(n) * nearest(&(beta * int(n)))
}

fn over(n: i64) -> impl Strategy<Value = ExactRational> {
    (-3 * n..3 * n).prop_map(move |a| rat(a, n))
}

#[test]
fn nbracket_step_by_step() {
    // [6/5] = 1, so -(1/5)(3)(1) = -3/5 = 2/5 mod 1
    assert_eq!(nearest(&rat(6, 5)), int(1));
    let e = elementary_quadratic(&[rat(1, 5)], &[rat(2, 5)], &ExactPolynomial::zero(), SignReading::GlobalMinus);
    assert_eq!(e.eval_mod1(3).value(), &rat(2, 5));
    assert_eq!(mod1(&-nbracket(&rat(1, 5), &rat(2, 5), 3)), rat(2, 5));
    let sq = BracketExpr::free(vec![BracketTerm::poly(ExactPolynomial::new(vec![int(3), int(-2), int(5)]))]);
    assert!((0..20).all(|n| sq.eval_mod1(n).is_zero()));
}

#[test]
fn sign_readings_differ_beyond_one_bracket() {
    let (a, b) = ([rat(1, 7), rat(3, 7)], [rat(2, 7), rat(5, 7)]);
    let p = ExactPolynomial::zero();
    let g = elementary_quadratic(&a, &b, &p, SignReading::GlobalMinus);
    let f = elementary_quadratic(&a, &b, &p, SignReading::FirstTermOnly);
    for n in 0..14 {
        let s1 = nbracket(&a[0], &b[0], n);
        let s2 = nbracket(&a[1], &b[1], n);
        assert_eq!(mod1(g.eval_mod1(n).value()), mod1(&(-&s1 - &s2)));
        assert_eq!(mod1(f.eval_mod1(n).value()), mod1(&(-&s1 + &s2)));
    }
    assert!((0..14).any(|n| g.eval_mod1(n) != f.eval_mod1(n)));
    // a single bracket reads the same either way
    let g1 = elementary_quadratic(&a[..1], &b[..1], &p, SignReading::GlobalMinus);
    let f1 = elementary_quadratic(&a[..1], &b[..1], &p, SignReading::FirstTermOnly);
    assert!((0..14).all(|n| g1.eval_mod1(n) == f1.eval_mod1(n)));
}

#[test]
fn periodicity_against_the_shift_loop() {
    let shift_loop = |e: &BracketExpr, n: i64| (0..n).all(|k| mod1(&(e.eval_exact(k + n) - e.eval_exact(k))).is_zero());
    let p0 = ExactPolynomial::zero();
    // alpha = 1/7, beta = 2/7: shifting by 7 adds 2n/7, so not periodic
    let e = elementary_quadratic(&[rat(1, 7)], &[rat(2, 7)], &p0, SignReading::GlobalMinus);
    assert!(!shift_loop(&e, 7));
    assert!(!is_periodic_phase(&e, 7));
    // P(n) = n^2/49 cancels the drift; only P_2 - alpha beta/2 has denominator 2N
    let p = ExactPolynomial::new(vec![int(0), int(0), rat(1, 49)]);
    let fixed = elementary_quadratic(&[rat(1, 7)], &[rat(2, 7)], &p, SignReading::GlobalMinus);
    assert!(shift_loop(&fixed, 7) && is_periodic_phase(&fixed, 7));
    let rep = periodicity_report(&fixed, 7);
    assert!(rep.degenerate);
    let d = rep.denominators.unwrap();
    assert!(d.phases_denominator_n && d.reduced_quadratic_denominator_2n);
    assert!(!d.quadratic_denominator_2n);
    let half = elementary_quadratic(&[rat(1, 2)], &[rat(1, 7)], &p0, SignReading::GlobalMinus);
    assert!(!shift_loop(&half, 7) && !is_periodic_phase(&half, 7));
    assert!(is_periodic_phase(&BracketExpr::default(), 7));
}

#[test]
fn vdc_identity_small_case() {
    let (a, b) = (rat(1, 7), rat(3, 7));
    let v = vdc_expand(&a, &b, 2);
    for n in 0..7 {
        let direct = mod1(&(nbracket(&a, &b, n + 2) - nbracket(&a, &b, n)));
        assert_eq!(mod1(v.eval_mod1(n).value()), direct, "n = {n}");
    }
    for t in &v.lower {
        assert!(t.is_lower_order(), "{t:?}");
    }
    let zero_beta = vdc_expand(&a, &int(0), 5);
    assert!(zero_beta.top.terms.is_empty() && zero_beta.lower.is_empty());
}

#[test]
fn displayed_swap_congruence_fails_and_the_corrected_one_holds() {
    let (a, b) = (rat(1, 7), rat(3, 7));
    assert!((0..7).any(|n| !swap_residue_variant(&a, &b, n).is_zero()));
    assert!((0..7).all(|n| swap_residue(&a, &b, n).is_zero()));
}

#[test]
fn trilinear_form_example() {
    let t = TrilinearT {
        d: 1,
        alpha: vec![rat(1, 5)],
        beta: vec![rat(6, 5)],
        gamma: vec![rat(2, 5)],
        alpha_p: vec![int(0)],
        beta_p: vec![int(0)],
    };
    // {1/5} (6/5)/6 {2/5} twice
    let oracle = fr(&rat(1, 5)) * rat(6, 5) / int(6) * fr(&rat(2, 5)) * int(2);
    assert_eq!(oracle, rat(4, 125));
    assert_eq!(t.eval(1, 1, 1).value(), &oracle);
    assert!(TrilinearT::zero(3).eval(4, -2, 9).is_zero());
}

#[test]
fn trilinear_on_small_bohr_sets() {
    let n = 31u64;
    let t = TrilinearT {
        d: 2,
        alpha: vec![rat(1, 31), rat(-1, 31)],
        beta: vec![rat(5, 7), rat(-2, 3)],
        gamma: vec![rat(-1, 31), rat(1, 31)],
        alpha_p: vec![rat(1, 2), rat(4, 5)],
        beta_p: vec![rat(1, 31), rat(-1, 31)],
    };
    assert!(is_locally_trilinear(&t, &[0], n));
    assert!(is_locally_trilinear(&TrilinearT::zero(2), &(0..12).collect::<Vec<_>>(), n));
    let mut s: Vec<ExactRational> = t.alpha.iter().chain(&t.gamma).chain(&t.beta_p).cloned().collect();
    s.push(rat(1, 31));
    let b = bohr_build(&s, &rat(1, 10), n).unwrap();
    assert_eq!(b.members, vec![0, 1, 2, 3, 28, 29, 30]);
    assert_eq!(local_trilinearity_check(&t, &b.members, n, 1 << 20, 0), Ok(()));
    // on the whole group additivity breaks
    assert!(local_trilinearity_check(&t, &(0..31).collect::<Vec<_>>(), n, 1 << 20, 0).is_err());
}

#[test]
fn json_round_trip_is_bit_exact() {
    let e = BracketExpr::new(
        vec![
            BracketTerm::NBracket { a: int(-1), alpha: rat(1, 31), beta: rat(-7, 31) },
            BracketTerm::FracLin { a: rat(3, 62), p: Phase::new(rat(5, 31), rat(1, 31)) },
            BracketTerm::Deg3 { a: int(2), variant: Deg3Variant::NFracFrac, beta: rat(1, 31), gamma: rat(9, 31) },
        ],
        Some(31),
    )
    .unwrap();
    let s = e.to_json();
    assert_eq!(BracketExpr::from_json(&s).unwrap().to_json(), s);
    let bad = BracketExpr::new(vec![BracketTerm::FracLin { a: rat(2, 3), p: Phase::linear(rat(1, 31)) }], Some(31));
    assert!(matches!(bad, Err(BracketError::Denominator { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn vdc_identity(a in over(31), b in over(31), h in -40i64..40) {
        let v = vdc_expand(&a, &b, h);
        prop_assert!(v.lower.iter().all(|t| t.is_lower_order()));
        for n in 0..31 {
            let direct = mod1(&(nbracket(&a, &b, n + h) - nbracket(&a, &b, n)));
            prop_assert_eq!(mod1(v.eval_mod1(n).value()), direct.clone());
            prop_assert_eq!(mod1(bracket_difference(&a, &b, h, n).value()), direct);
        }
    }

    #[test]
    fn concat_is_additive(a in prop::collection::vec((over(31), over(31)), 0..4), b in prop::collection::vec((over(31), over(31)), 0..4), n in -60i64..60) {
        let mk = |v: &[(ExactRational, ExactRational)]| BracketExpr::free(
            v.iter().map(|(x, y)| BracketTerm::NBracket { a: int(1), alpha: x.clone(), beta: y.clone() }).collect());
        let (e1, e2) = (mk(&a), mk(&b));
        prop_assert_eq!(e1.concat(&e2).eval_mod1(n), e1.eval_mod1(n) + e2.eval_mod1(n));
    }

    #[test]
    fn swap_and_window_identities(a in over(31), b in over(31), n in -100i64..100) {
        prop_assert!(swap_residue(&a, &b, n).is_zero());
        prop_assert!(window_reduction_residue(&a, &b, n).is_zero());
    }

    #[test]
    fn trilinear_symmetric_in_y_z(d in 1usize..3, seeds in prop::collection::vec(over(31), 15), x in -50i64..50, y in -50i64..50, z in -50i64..50) {
        let t = TrilinearT {
            d,
            alpha: seeds[0..d].to_vec(),
            beta: seeds[3..3 + d].to_vec(),
            gamma: seeds[6..6 + d].to_vec(),
            alpha_p: seeds[9..9 + d].to_vec(),
            beta_p: seeds[12..12 + d].to_vec(),
        };
        prop_assert_eq!(t.eval(x, y, z), t.eval(x, z, y));
    }
}
