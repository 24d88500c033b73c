//! The equidistribution dichotomy for periodic elementary bracket quadratics,
//! run as an algorithm with an exact certificate at the end.

use num_complex::Complex64;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brackets::{is_periodic_phase, window_reduction_residue};
use crate::gowers::{dft, FnZN};
use crate::linalg;
use crate::nilmani::{bracket_expr, nilsequence_phase, ElemNilmanifold, NilError, PolySeq};
use crate::ratmod::{
    c_infty_norm, frac_q, has_denominator, int, int_part, is_prime, rat, ExactPolynomial, ExactRational,
    RationalMod1,
};
use crate::rbpl::{self, RbplConfig, RbplInstance, RbplOutcome, RbplStep};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquidistError {
    #[error("sequence is not {0}-periodic")]
    NonPeriodic(u64),
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("only the elementary structure constants are supported")]
    Unsupported,
    #[error("mean correlation {mean} is below delta = {delta}")]
    HypothesisUnmet { mean: f64, delta: f64 },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Nil(#[from] NilError),
    #[error(transparent)]
    Rbpl(#[from] rbpl::RbplError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquidistConfig {
    /// `N <= small_n` takes the small-N branch.
    pub small_n: u64,
    /// Good `h` satisfy `c(h) >= good_fraction * delta^2`.
    pub good_fraction: f64,
    pub rbpl: RbplConfig,
    /// Sup-norm bound for relations added while completing to an isotropic kernel.
    pub completion_height: i64,
}

impl Default for EquidistConfig {
    fn default() -> Self {
        EquidistConfig { small_n: 100, good_fraction: 0.5, rbpl: RbplConfig::default(), completion_height: 8 }
    }
}

fn check_input(m: &ElemNilmanifold, g: &PolySeq, n: u64) -> Result<(), EquidistError> {
    if !is_prime(n) {
        return Err(EquidistError::NotPrime(n));
    }
    if m.c != ElemNilmanifold::elementary(m.d).c || g.d() != m.d {
        return Err(EquidistError::Unsupported);
    }
    if !is_periodic_phase(&bracket_expr(m, g), n) {
        return Err(EquidistError::NonPeriodic(n));
    }
    Ok(())
}

fn phases(m: &ElemNilmanifold, g: &PolySeq, len: i64) -> Vec<RationalMod1> {
    (0..len).into_par_iter().map(|x| nilsequence_phase(m, g, x)).collect()
}

/// `|E_{n in [N]} F(g(n) Gamma)|`.
pub fn mean_correlation(m: &ElemNilmanifold, g: &PolySeq, n: u64) -> Result<f64, EquidistError> {
    check_input(m, g, n)?;
    let s: Complex64 = phases(m, g, n as i64).iter().map(|p| p.to_unit()).sum();
    Ok(s.norm() / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HRow {
    pub h: i64,
    pub correlation: f64,
    pub good: bool,
    /// `N T(h) mod N`, where `T(h)` is the coefficient of `n` in the derivative's top term.
    pub slope: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mean: f64,
    pub good_density: f64,
    /// Size of the class of good `h` sharing one slope.
    pub class_size: usize,
    pub per_h: Vec<HRow>,
    pub base_r: usize,
    pub base_eta: Vec<Vec<i64>>,
    pub completion: Vec<Vec<i64>>,
    pub rbpl_steps: Vec<RbplStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Branch {
    SmallN { reason: String },
    Certificate { w: Vec<Vec<i64>>, eta: Vec<Vec<i64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyResult {
    pub n: u64,
    pub branch: Branch,
    pub diagnostics: Option<Diagnostics>,
}

impl DichotomyResult {
    pub fn r(&self) -> Option<usize> {
        match &self.branch {
            Branch::Certificate { w, .. } => Some(w.len()),
            Branch::SmallN { .. } => None,
        }
    }
}

/// Replaces `alpha_i, beta_i` by their centred fractional parts, moving the
/// difference into the quadratic coefficient of `P`.
pub fn window_reduce(g: &PolySeq) -> PolySeq {
    let alpha: Vec<ExactRational> = g.alpha.iter().map(frac_q).collect();
    let beta: Vec<ExactRational> = g.beta.iter().map(frac_q).collect();
    let shift: ExactRational = alpha
        .iter()
        .zip(&g.beta)
        .map(|(fa, b)| fa * ExactRational::from_integer(int_part(b)))
        .sum();
    let p = g.p.sub(&ExactPolynomial::monomial(shift, 2));
    PolySeq { alpha, beta, p }
}

/// `a = (-beta, alpha)`, so that `a . y = omega(psi, y)`.
pub fn commutator_vector(g: &PolySeq) -> Vec<ExactRational> {
    g.beta.iter().map(|b| -b).chain(g.alpha.iter().cloned()).collect()
}

/// `gamma = 2 P_2 - alpha . beta`, the coefficient of `n h` in the derivative.
pub fn nh_coefficient(g: &PolySeq) -> ExactRational {
    let ab: ExactRational = g.alpha.iter().zip(&g.beta).map(|(a, b)| a * b).sum();
    int(2) * g.p.coeff(2) - ab
}

/// `T(h) = k (gamma h + omega(psi, {psi h}))`.
pub fn top_slope(m: &ElemNilmanifold, g: &PolySeq, h: i64) -> ExactRational {
    let psi = g.psi();
    let a = commutator_vector(g);
    let t = nh_coefficient(g) * int(h) + rbpl::bracket_dot(&a, &psi, h);
    int(m.k) * t
}

fn omega_int_rat(w: &[i64], psi: &[ExactRational], d: usize) -> ExactRational {
    // omega((x, y), (z, w')) = x . w' - y . z
    (0..d).map(|i| int(w[i]) * &psi[d + i] - int(w[d + i]) * &psi[i]).sum()
}

fn omega_q(u: &[ExactRational], v: &[ExactRational], d: usize) -> ExactRational {
    (0..d).map(|i| &u[i] * &v[d + i] - &u[d + i] * &v[i]).sum()
}

fn linear_c_infty(coeff: &ExactRational, n: u64) -> ExactRational {
    c_infty_norm(&ExactPolynomial::new(vec![ExactRational::zero(), coeff.clone()]), n)
}

pub fn run_dichotomy(
    m: &ElemNilmanifold,
    g: &PolySeq,
    n: u64,
    delta: f64,
    cfg: &EquidistConfig,
) -> Result<DichotomyResult, EquidistError> {
    check_input(m, g, n)?;
    let mean = mean_correlation(m, g, n)?;
    if mean < delta {
        return Err(EquidistError::HypothesisUnmet { mean, delta });
    }
    if n <= cfg.small_n {
        return Ok(DichotomyResult {
            n,
            branch: Branch::SmallN { reason: format!("N = {n} <= {}", cfg.small_n) },
            diagnostics: None,
        });
    }
    let d = m.d;
    let g0 = g;
    let g = window_reduce(g0);
    let nn = n as i64;
    if (0..nn).any(|x| nilsequence_phase(m, &g, x) != nilsequence_phase(m, g0, x)) {
        return Err(EquidistError::Invariant("window reduction changed the phase".into()));
    }
    let ph: Vec<Complex64> = phases(m, &g, 2 * nn).iter().map(|p| p.to_unit()).collect();
    // van der Corput: E_h |E_n f(n+h) conj f(n)| >= |E f|^2
    let corr: Vec<f64> = (0..nn)
        .into_par_iter()
        .map(|h| {
            let s: Complex64 = (0..nn as usize).map(|x| ph[x + h as usize] * ph[x].conj()).sum();
            s.norm() / n as f64
        })
        .collect();
    let thr = cfg.good_fraction * delta * delta;
    let mut per_h = Vec::with_capacity(n as usize);
    let mut classes: std::collections::BTreeMap<ExactRational, Vec<i64>> = Default::default();
    for h in 0..nn {
        let t = frac_q(&top_slope(m, &g, h));
        if !has_denominator(&t, n) {
            return Err(EquidistError::Invariant(format!("slope at h = {h} lacks denominator N")));
        }
        let slope = (&t * int(nn)).to_integer();
        let slope = i64::try_from(slope).expect("small").rem_euclid(nn);
        let good = corr[h as usize] >= thr;
        if good {
            classes.entry(t).or_default().push(h);
        }
        per_h.push(HRow { h, correlation: corr[h as usize], good, slope });
    }
    let good_count = per_h.iter().filter(|r| r.good).count();
    let (t_star, hs) = classes
        .into_iter()
        .max_by(|x, y| x.1.len().cmp(&y.1.len()).then_with(|| y.1[0].cmp(&x.1[0])))
        .expect("h = 0 is always good");
    // ||beta' + (a, 1) . {(psi, gamma) h}|| = 0 on the class
    let psi = g.psi();
    let km = int(m.k);
    let mut a1: Vec<ExactRational> = commutator_vector(&g).iter().map(|x| x * &km).collect();
    a1.push(int(1));
    let mut al1 = psi.clone();
    al1.push(frac_q(&(nh_coefficient(&g) * &km)));
    let inst = RbplInstance::new(n, a1, al1.clone(), -t_star, int(0), hs.clone())?;
    let outcome = rbpl::solve(&inst, &cfg.rbpl)?;
    let (cert, steps) = match outcome {
        RbplOutcome::Certificate { cert, steps } => (cert, steps),
        RbplOutcome::Degenerate(rep) => {
            return Ok(DichotomyResult { n, branch: Branch::SmallN { reason: rep.reason }, diagnostics: None })
        }
    };
    let ka: Vec<ExactRational> = commutator_vector(&g).iter().map(|x| x * &km).collect();
    let base = rbpl::extend_affine(&cert, &ka, &psi, &al1[2 * d])?;
    let (w, eta, added) = complete_isotropic(&psi, &base.eta, d, n, cfg.completion_height)?;
    let result = DichotomyResult {
        n,
        branch: Branch::Certificate { w, eta },
        diagnostics: Some(Diagnostics {
            mean,
            good_density: good_count as f64 / n as f64,
            class_size: hs.len(),
            per_h,
            base_r: base.w.len(),
            base_eta: base.eta.clone(),
            completion: added,
            rbpl_steps: steps,
        }),
    };
    let rep = verify_dichotomy(m, &g, &result);
    if !rep.pass {
        return Err(EquidistError::Invariant(rep.violations.join("; ")));
    }
    Ok(result)
}

/// Completes the `eta` family. First every exact relation `eta . psi = 0`
/// of height at most `height` is added while independent; then, if the
/// common kernel is still not `omega`-isotropic, relations `eta . psi = 0 mod 1`
/// are added until it is. The `w`s span the final kernel with
/// `omega(w, psi) = 0 mod 1`.
fn complete_isotropic(
    psi: &[ExactRational],
    base_eta: &[Vec<i64>],
    d: usize,
    n: u64,
    height: i64,
) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>, Vec<Vec<i64>>), EquidistError> {
    let dim = 2 * d;
    let mut eta: Vec<Vec<i64>> = base_eta.to_vec();
    let mut added = Vec::new();
    let pool = relations_in_box(psi, dim, height);
    let mut push_independent = |v: &Vec<i64>, eta: &mut Vec<Vec<i64>>| {
        let mut t = eta.clone();
        t.push(v.clone());
        if linalg::rank_int(&t) == t.len() {
            *eta = t;
            added.push(v.clone());
            true
        } else {
            false
        }
    };
    // exact relations span a space of dimension dim - rank(psi)
    let full = dim - usize::from(psi.iter().any(|x| !x.is_zero()));
    for (v, _) in pool.iter().filter(|(_, exact)| *exact) {
        if linalg::rank_int(&eta) >= full {
            break;
        }
        push_independent(v, &mut eta);
    }
    let mut rest = pool.iter().filter(|(_, exact)| !exact).map(|(v, _)| v);
    loop {
        let kernel = kernel_basis(&eta, dim);
        if is_isotropic(&kernel, d) {
            let ws = kernel
                .iter()
                .map(|v| {
                    let w = linalg::primitive_int(v).expect("small kernel vector");
                    if frac_q(&omega_int_rat(&w, psi, d)).is_zero() {
                        w
                    } else {
                        w.iter().map(|x| x * n as i64).collect()
                    }
                })
                .collect();
            return Ok((ws, eta, added));
        }
        loop {
            match rest.next() {
                Some(v) => {
                    if push_independent(v, &mut eta) {
                        break;
                    }
                }
                None => {
                    return Err(EquidistError::Invariant(format!(
                        "no isotropic completion with relations of height <= {height}"
                    )))
                }
            }
        }
    }
}

fn kernel_basis(eta: &[Vec<i64>], dim: usize) -> Vec<Vec<ExactRational>> {
    if eta.is_empty() {
        (0..dim).map(|i| (0..dim).map(|j| int((i == j) as i64)).collect()).collect()
    } else {
        linalg::kernel(&linalg::to_q_mat(eta), dim)
    }
}

fn is_isotropic(kernel: &[Vec<ExactRational>], d: usize) -> bool {
    kernel
        .iter()
        .enumerate()
        .all(|(i, u)| kernel[i + 1..].iter().all(|v| omega_q(u, v, d).is_zero()))
}

/// Relations `eta . psi = 0 mod 1` in the box of the given height, sorted by
/// height, then norm, then lex; the flag marks exact relations.
fn relations_in_box(psi: &[ExactRational], dim: usize, height: i64) -> Vec<(Vec<i64>, bool)> {
    // psi = num / den over a common denominator, so the test is integer only
    let den = psi.iter().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    let num: Option<Vec<i64>> = psi
        .iter()
        .map(|x| (x * ExactRational::from_integer(den.clone())).to_integer().to_i64())
        .collect();
    let (Some(num), Some(den)) = (num, den.to_i64()) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut cur = vec![0i64; dim];
    type Out = Vec<(Vec<i64>, bool)>;
    fn rec(i: usize, acc: i128, h: i64, cur: &mut Vec<i64>, num: &[i64], den: i64, out: &mut Out) {
        if i == cur.len() {
            let first = cur.iter().find(|&&x| x != 0);
            if first.is_some_and(|&x| x > 0) && acc.rem_euclid(den as i128) == 0 {
                out.push((cur.clone(), acc == 0));
            }
            return;
        }
        for x in -h..=h {
            cur[i] = x;
            rec(i + 1, acc + x as i128 * num[i] as i128, h, cur, num, den, out);
        }
    }
    rec(0, 0, height, &mut cur, &num, den, &mut out);
    out.sort_by(|(x, _), (y, _)| {
        let hx = x.iter().map(|t| t.abs()).max();
        let hy = y.iter().map(|t| t.abs()).max();
        let nx: i64 = x.iter().map(|t| t * t).sum();
        let ny: i64 = y.iter().map(|t| t * t).sum();
        hx.cmp(&hy).then(nx.cmp(&ny)).then_with(|| x.cmp(y))
    });
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub pass: bool,
    pub violations: Vec<String>,
    pub isotropic: bool,
}

pub fn verify_dichotomy(m: &ElemNilmanifold, g: &PolySeq, result: &DichotomyResult) -> DichotomyReport {
    let Branch::Certificate { w, eta } = &result.branch else {
        return DichotomyReport { pass: false, violations: vec!["not a certificate".into()], isotropic: false };
    };
    let d = m.d;
    let dim = 2 * d;
    let n = result.n;
    let psi = g.psi();
    let mut v = Vec::new();
    if w.iter().chain(eta).any(|x| x.len() != dim) {
        return DichotomyReport { pass: false, violations: vec!["vector of wrong length".into()], isotropic: false };
    }
    if w.len() + eta.len() != dim {
        v.push(format!("r + #eta = {} != 2d = {dim}", w.len() + eta.len()));
    }
    let mut all = w.clone();
    all.extend(eta.iter().cloned());
    if linalg::rank_int(&all) != all.len() {
        v.push("vectors not linearly independent".into());
    }
    for (i, wi) in w.iter().enumerate() {
        for (j, ej) in eta.iter().enumerate() {
            if linalg::dot_i64(wi, ej) != 0 {
                v.push(format!("<w_{i}, eta_{j}> != 0"));
            }
        }
        let c = linear_c_infty(&omega_int_rat(wi, &psi, d), n);
        if !c.is_zero() {
            v.push(format!("||omega(w_{i}, psi)||_C = {c}"));
        }
    }
    for (j, ej) in eta.iter().enumerate() {
        let c = linear_c_infty(&linalg::dot_int(ej, &psi), n);
        if !c.is_zero() {
            v.push(format!("||eta_{j} . psi||_C = {c}"));
        }
    }
    let isotropic = is_isotropic(&kernel_basis(eta, dim), d);
    if !isotropic {
        v.push("eta kernel is not omega-isotropic".into());
    }
    DichotomyReport { pass: v.is_empty(), violations: v, isotropic }
}

/// Exhaustive check of the window reduction on `[0, N)` for every `(alpha_i, beta_i)`.
pub fn window_reduction_holds(g: &PolySeq, n: u64) -> bool {
    g.alpha.iter().zip(&g.beta).all(|(a, b)| (0..n as i64).all(|x| window_reduction_residue(a, b, x).is_zero()))
}

/// A periodic elementary bracket quadratic planted on the isotropic line `R v`.
#[derive(Clone, Debug)]
pub struct PlantedDichotomy {
    pub m: ElemNilmanifold,
    pub g: PolySeq,
    pub v: Vec<i64>,
    pub mean: f64,
}

/// `P = sum alpha_i beta_i n^2 / 2 + (-sum a_i b_i / 2 - m N / 2 + j) n / N`,
/// with `alpha = a/N`, `beta = b/N`, is `N`-periodic.
pub fn periodic_quadratic(a: &[i64], b: &[i64], n: u64, m2: i64, j: i64) -> ExactPolynomial {
    let nn = n as i64;
    let ab: i64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let p2 = rat(ab, 2 * nn * nn) + rat(m2, 2 * nn);
    let p1 = (rat(-ab, 2) - rat(m2 * nn, 2) + int(j)) / int(nn);
    ExactPolynomial::new(vec![ExactRational::zero(), p1, p2])
}

pub fn random_planted_isotropic<R: Rng>(rng: &mut R, d: usize, n: u64, delta: f64) -> PlantedDichotomy {
    let m = ElemNilmanifold::elementary(d);
    let nn = n as i64;
    loop {
        let v: Vec<i64> = (0..2 * d).map(|_| rng.gen_range(-2..=2)).collect();
        if v.iter().all(|&x| x == 0) {
            continue;
        }
        let (a, b) = v.split_at(d);
        let base = PolySeq::new(
            a.iter().map(|&x| rat(x, nn)).collect(),
            b.iter().map(|&x| rat(x, nn)).collect(),
            periodic_quadratic(a, b, n, 0, 0),
        )
        .expect("degree 2");
        // the linear coefficient j/N picks a Fourier coefficient of the j = 0 sequence
        let f = FnZN::from_fn(n as usize, |x| nilsequence_phase(&m, &base, x as i64).to_unit());
        let fhat = dft(&f);
        let (best, mag) = (0..n as usize)
            .map(|xi| (xi, fhat.values[xi].norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag < delta {
            continue;
        }
        // E_x f(x) e(j x / N) = fhat(-j)
        let j = (nn - best as i64) % nn;
        let g = PolySeq::new(base.alpha.clone(), base.beta.clone(), periodic_quadratic(a, b, n, 0, j)).expect("degree 2");
        let mean = mean_correlation(&m, &g, n).expect("periodic by construction");
        return PlantedDichotomy { m, g, v, mean };
    }
}

/// A random periodic elementary bracket quadratic.
pub fn random_generic<R: Rng>(rng: &mut R, d: usize, n: u64) -> (ElemNilmanifold, PolySeq) {
    let nn = n as i64;
    let a: Vec<i64> = (0..d).map(|_| rng.gen_range(0..nn)).collect();
    let b: Vec<i64> = (0..d).map(|_| rng.gen_range(0..nn)).collect();
    let p = periodic_quadratic(&a, &b, n, rng.gen_range(0..nn), rng.gen_range(0..nn));
    let g = PolySeq::new(a.iter().map(|&x| rat(x, nn)).collect(), b.iter().map(|&x| rat(x, nn)).collect(), p)
        .expect("degree 2");
    (ElemNilmanifold::elementary(d), g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_means() {
        let m = ElemNilmanifold::elementary(1);
        let g = PolySeq::identity(1);
        assert!((mean_correlation(&m, &g, 31).unwrap() - 1.0).abs() < 1e-12);
        let g = PolySeq::new(vec![int(0)], vec![int(0)], ExactPolynomial::new(vec![int(0), rat(1, 31)])).unwrap();
        assert!(mean_correlation(&m, &g, 31).unwrap() < 1e-12);
    }

    #[test]
    fn zero_horizontal_gives_full_eta() {
        let m = ElemNilmanifold::elementary(2);
        let g = PolySeq::new(vec![int(0); 2], vec![int(0); 2], ExactPolynomial::new(vec![int(3), int(1), int(2)])).unwrap();
        let r = run_dichotomy(&m, &g, 101, 0.5, &EquidistConfig::default()).unwrap();
        assert_eq!(r.r(), Some(0));
        assert!(verify_dichotomy(&m, &g, &r).pass);
    }

    #[test]
    fn injected_omega_breaks_isotropy() {
        let m = ElemNilmanifold::elementary(1);
        let g = PolySeq::identity(1);
        let bad = DichotomyResult {
            n: 101,
            branch: Branch::Certificate { w: vec![vec![1, 0], vec![0, 1]], eta: vec![] },
            diagnostics: None,
        };
        let rep = verify_dichotomy(&m, &g, &bad);
        assert!(!rep.isotropic && !rep.pass);
    }

    #[test]
    fn periodic_quadratic_is_periodic() {
        let n = 31;
        let (m, g) = random_generic(&mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3), 2, n);
        assert!(is_periodic_phase(&bracket_expr(&m, &g), n));
    }
}
