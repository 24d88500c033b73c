use hofa_core::brackets::{elementary_quadratic, SignReading};
use hofa_core::nilmani::*;
use hofa_core::ratmod::*;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

type Mat = Vec<Vec<ExactRational>>;

/// `[[1, t^T C, z], [0, I, t], [0, 0, 1]]`, size `2d + 2`.
fn to_matrix(m: &ElemNilmanifold, g: &GroupElement) -> Mat {
    let t = g.horizontal();
    let k = t.len();
    let mut a = vec![vec![ExactRational::zero(); k + 2]; k + 2];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = ExactRational::one();
    }
    for j in 0..k {
        a[0][j + 1] = (0..k).map(|i| &t[i] * int(m.c[i][j])).sum();
        a[j + 1][k + 1] = t[j].clone();
    }
    a[0][k + 1] = g.z.clone();
    a
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
}

fn in_window(x: &ExactRational) -> bool {
    *x > rat(-1, 2) && *x <= rat(1, 2)
}

fn q() -> impl Strategy<Value = ExactRational> {
    (-40i64..40, 1i64..13).prop_map(|(a, b)| rat(a, b))
}

fn element(d: usize) -> impl Strategy<Value = GroupElement> {
    (prop::collection::vec(q(), 2 * d), q()).prop_map(move |(t, z)| GroupElement::from_horizontal(d, &t, z))
}

fn triple(d: usize) -> impl Strategy<Value = (GroupElement, GroupElement, GroupElement)> {
    (element(d), element(d), element(d))
}

fn manifold(d: usize) -> impl Strategy<Value = ElemNilmanifold> {
    prop::collection::vec(-3i64..=3, 4 * d * d).prop_map(move |v| {
        let dim = 2 * d;
        let c = (0..dim).map(|i| (0..dim).map(|j| if j > i { v[i * dim + j] } else { 0 }).collect()).collect();
        ElemNilmanifold::with_constants(d, c, 1, 3).unwrap()
    })
}

#[test]
fn half_times_third() {
    let m = ElemNilmanifold::elementary(3);
    let mut g = GroupElement::identity(3);
    g.x[0] = rat(1, 2);
    let mut h = GroupElement::identity(3);
    h.y[0] = rat(1, 3);
    let prod = mat_mul(&to_matrix(&m, &g), &to_matrix(&m, &h));
    assert_eq!(prod[0][7], rat(1, 6));
    assert_eq!(m.mul(&g, &h).unwrap().z, rat(1, 6));
}

#[test]
fn projection_against_lattice_cosets() {
    let m = ElemNilmanifold::elementary(1);
    let g = GroupElement { x: vec![rat(3, 4)], y: vec![rat(5, 3)], z: int(2) };
    // all g * gamma with gamma integral and small that land in the window
    let mut reps = Vec::new();
    for a in -4..=4 {
        for b in -4..=4 {
            for c in -4..=4 {
                let gamma = GroupElement { x: vec![int(a)], y: vec![int(b)], z: int(c) };
                let r = m.mul(&g, &gamma).unwrap();
                if r.horizontal().iter().chain(std::iter::once(&r.z)).all(in_window) {
                    reps.push(r);
                }
            }
        }
    }
    assert_eq!(reps.len(), 1);
    let p = m.project_fundamental(&g);
    assert_eq!(p, reps[0]);
    assert_eq!(p, GroupElement { x: vec![rat(-1, 4)], y: vec![rat(-1, 3)], z: rat(1, 2) });
    let int_g = GroupElement { x: vec![int(3)], y: vec![int(-2)], z: int(7) };
    assert_eq!(m.project_fundamental(&int_g), GroupElement::identity(1));
}

#[test]
fn omega_pairs_matched_coordinates() {
    let m = ElemNilmanifold::elementary(3);
    for i in 0..3 {
        assert_eq!(m.omega(&unit_vec(6, i), &unit_vec(6, i + 3)).unwrap(), int(1));
    }
    assert_eq!(m.omega(&unit_vec(6, 0), &unit_vec(6, 4)).unwrap(), int(0));
    assert!(m.omega(&unit_vec(6, 0), &unit_vec(4, 0)).is_err());
}

#[test]
fn nilsequence_example_and_identity() {
    let m = ElemNilmanifold::elementary(1);
    let g = PolySeq::new(vec![rat(1, 5)], vec![rat(2, 5)], ExactPolynomial::zero()).unwrap();
    assert_eq!(nilsequence_phase(&m, &g, 3).value(), &rat(2, 5));
    let w = eval_nilsequence(&m, &g, 3);
    let ang = std::f64::consts::TAU * 0.4;
    assert!((w.re - ang.cos()).abs() < 1e-12 && (w.im - ang.sin()).abs() < 1e-12);
    let id = PolySeq::identity(2);
    let m2 = ElemNilmanifold::elementary(2);
    assert!((0..10).all(|n| nilsequence_phase(&m2, &id, n).is_zero()));
}

#[test]
fn factorization_with_one_character() {
    let n = 31u64;
    let m = ElemNilmanifold::elementary(2);
    let g = PolySeq::new(
        vec![rat(3, 31), rat(5, 31)],
        vec![rat(7, 31), rat(-2, 31)],
        ExactPolynomial::new(vec![rat(1, 3), rat(1, 31), rat(9, 62)]),
    )
    .unwrap();
    // eta = (1,0,0,0) does not kill alpha_1 = 3/31 ...
    assert!(factorize_i(&m, &g, &[vec![1, 0, 0, 0]], n).is_err());
    // ... but it kills alpha_1 = 3
    let mut g = g;
    g.alpha[0] = int(3);
    let f = factorize_i(&m, &g, &[vec![1, 0, 0, 0]], n).unwrap();
    assert_eq!(f.gamma.alpha[0], int(3));
    assert_eq!(f.g1.alpha[0], int(0));
    assert_eq!(f.q, BigInt::one());
    for k in 0..n as i64 {
        let rec = m.mul(&m.mul(&f.epsilon, &f.g1.at(k)).unwrap(), &f.gamma.at(k)).unwrap();
        assert_eq!(rec, g.at(k), "n = {k}");
    }
    let none = factorize_i(&m, &g, &[], n).unwrap();
    assert_eq!(none.gamma, PolySeq::identity(2));
    assert_eq!(none.epsilon, g.at(0));
}

#[test]
fn change_basis_pointwise() {
    let n = 31i64;
    let m = ElemNilmanifold::elementary(1);
    let g = PolySeq::new(vec![rat(3, 31)], vec![rat(11, 31)], ExactPolynomial::new(vec![int(0), rat(1, 31), rat(5, 62)])).unwrap();
    for a in [vec![vec![1, 0], vec![0, 1]], vec![vec![2, 0], vec![0, 2]], vec![vec![1, 1], vec![0, 1]]] {
        let bc = change_basis(&m, &g, &a).unwrap();
        for k in 0..n {
            let lhs = nilsequence_phase(&m, &g, 2 * k);
            let rhs = nilsequence_phase(&bc.manifold, &bc.seq, k) + frac(&bc.lower_phase(k));
            assert_eq!(lhs, rhs, "A = {a:?}, n = {k}");
        }
        assert!(bc.lower.iter().all(|t| t.is_lower_order()));
    }
    let zero = change_basis(&m, &PolySeq::identity(1), &[vec![2, 0], vec![0, 2]]).unwrap();
    assert_eq!(zero.seq, PolySeq::identity(1));
    assert!(zero.lower.is_empty());
    assert!(matches!(change_basis(&m, &g, &[vec![1, 2], vec![2, 4]]), Err(NilError::Singular)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_axioms((g, h, k) in triple(2), m in manifold(2)) {
        let id = GroupElement::identity(2);
        prop_assert_eq!(m.mul(&m.mul(&g, &h).unwrap(), &k).unwrap(), m.mul(&g, &m.mul(&h, &k).unwrap()).unwrap());
        prop_assert_eq!(m.mul(&id, &g).unwrap(), g.clone());
        prop_assert_eq!(m.mul(&g, &id).unwrap(), g.clone());
        prop_assert_eq!(m.mul(&g, &m.inv(&g).unwrap()).unwrap(), id.clone());
        prop_assert_eq!(m.mul(&m.inv(&g).unwrap(), &g).unwrap(), id);
    }

    #[test]
    fn mul_matches_matrices((g, h, _) in triple(2), m in manifold(2)) {
        let prod = m.mul(&g, &h).unwrap();
        prop_assert_eq!(to_matrix(&m, &prod), mat_mul(&to_matrix(&m, &g), &to_matrix(&m, &h)));
    }

    #[test]
    fn projection_is_a_coset_representative(g in element(2)) {
        let m = ElemNilmanifold::elementary(2);
        let p = m.project_fundamental(&g);
        prop_assert!(p.horizontal().iter().chain(std::iter::once(&p.z)).all(in_window));
        prop_assert_eq!(m.project_fundamental(&p), p.clone());
        let gamma = lattice_part(&m, &g);
        prop_assert!(gamma.is_lattice());
        prop_assert_eq!(m.mul(&p, &gamma).unwrap(), g);
    }

    #[test]
    fn commutator_is_omega((g, h, _) in triple(3)) {
        let m = ElemNilmanifold::elementary(3);
        let c = m.commutator(&g, &h).unwrap();
        prop_assert!(c.horizontal().iter().all(|a| a.is_zero()));
        prop_assert_eq!(c.z, m.omega(&g.horizontal(), &h.horizontal()).unwrap());
    }

    #[test]
    fn omega_is_alternating(u in prop::collection::vec(q(), 4), v in prop::collection::vec(q(), 4), w in prop::collection::vec(q(), 4), s in q()) {
        let m = ElemNilmanifold::elementary(2);
        let om = |a: &[ExactRational], b: &[ExactRational]| m.omega(a, b).unwrap();
        prop_assert!(om(&u, &u).is_zero());
        prop_assert_eq!(om(&u, &v), -om(&v, &u));
        let sv: Vec<ExactRational> = v.iter().zip(&w).map(|(a, b)| &s * a + b).collect();
        prop_assert_eq!(om(&u, &sv), &s * om(&u, &v) + om(&u, &w));
    }

    #[test]
    fn nilsequence_matches_bracket_quadratic(
        d in 1usize..4,
        nums in prop::collection::vec(-60i64..60, 6),
        p in (-100i64..100, -100i64..100),
        n in -80i64..80,
    ) {
        let alpha: Vec<ExactRational> = nums[..d].iter().map(|&a| rat(a, 31)).collect();
        let beta: Vec<ExactRational> = nums[3..3 + d].iter().map(|&b| rat(b, 31)).collect();
        let poly = ExactPolynomial::new(vec![int(0), rat(p.0, 31), rat(p.1, 62)]);
        let g = PolySeq::new(alpha.clone(), beta.clone(), poly.clone()).unwrap();
        let m = ElemNilmanifold::elementary(d);
        let e = elementary_quadratic(&alpha, &beta, &poly, SignReading::GlobalMinus);
        prop_assert_eq!(nilsequence_phase(&m, &g, n), e.eval_mod1(n));
        prop_assert_eq!(bracket_expr(&m, &g).eval_mod1(n), e.eval_mod1(n));
    }
}
