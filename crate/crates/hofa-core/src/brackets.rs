//! Bracket polynomials of degree at most three, evaluated exactly mod 1.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratmod::{
    big, denominator_divides, frac, frac_q, int, int_part, ExactPolynomial, ExactRational,
    RationalMod1,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BracketError {
    #[error("{what} = {value} does not have denominator dividing {modulus}")]
    Denominator {
        what: String,
        value: String,
        modulus: String,
    },
    #[error("term is outside the lower-order catalogue: {0}")]
    Uncatalogued(String),
}

/// Affine phase `slope * n + offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phase {
    #[serde(with = "crate::ratmod::serde_q")]
    pub slope: ExactRational,
    #[serde(with = "crate::ratmod::serde_q")]
    pub offset: ExactRational,
}

impl Phase {
    pub fn new(slope: ExactRational, offset: ExactRational) -> Self {
        Phase { slope, offset }
    }

    pub fn linear(slope: ExactRational) -> Self {
        Phase { slope, offset: ExactRational::zero() }
    }

    pub fn eval(&self, n: &ExactRational) -> ExactRational {
        &self.slope * n + &self.offset
    }

    /// True when `{slope*n + offset}` vanishes for every integer `n`.
    pub fn is_trivial(&self) -> bool {
        self.slope.is_integer() && self.offset.is_integer()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Deg3Variant {
    /// `a n {beta n}{gamma n}`
    NFracFrac,
    /// `a n^2 {beta n}`
    N2Frac,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum BracketTerm {
    Poly { p: ExactPolynomial },
    /// `a * (alpha n) * [beta n]`
    NBracket {
        #[serde(with = "crate::ratmod::serde_q")]
        a: ExactRational,
        #[serde(with = "crate::ratmod::serde_q")]
        alpha: ExactRational,
        #[serde(with = "crate::ratmod::serde_q")]
        beta: ExactRational,
    },
    /// `a {p1(n)} {p2(n)}`
    FracProd {
        #[serde(with = "crate::ratmod::serde_q")]
        a: ExactRational,
        p1: Phase,
        p2: Phase,
    },
    /// `a {p(n)}`
    FracLin {
        #[serde(with = "crate::ratmod::serde_q")]
        a: ExactRational,
        p: Phase,
    },
    Deg3 {
        #[serde(with = "crate::ratmod::serde_q")]
        a: ExactRational,
        variant: Deg3Variant,
        #[serde(with = "crate::ratmod::serde_q")]
        beta: ExactRational,
        #[serde(with = "crate::ratmod::serde_q")]
        gamma: ExactRational,
    },
}

impl BracketTerm {
    pub fn poly(p: ExactPolynomial) -> Self {
        BracketTerm::Poly { p }
    }

    /// Exact real value of the term at `n` (not reduced).
    pub fn eval(&self, n: i64) -> ExactRational {
        let nq = int(n);
        match self {
            BracketTerm::Poly { p } => p.eval(&nq),
            BracketTerm::NBracket { a, alpha, beta } => {
                a * alpha * &nq * big(&int_part(&(beta * &nq)))
            }
            BracketTerm::FracProd { a, p1, p2 } => {
                a * frac_q(&p1.eval(&nq)) * frac_q(&p2.eval(&nq))
            }
            BracketTerm::FracLin { a, p } => a * frac_q(&p.eval(&nq)),
            BracketTerm::Deg3 { a, variant, beta, gamma } => match variant {
                Deg3Variant::NFracFrac => {
                    a * &nq * frac_q(&(beta * &nq)) * frac_q(&(gamma * &nq))
                }
                Deg3Variant::N2Frac => a * &nq * &nq * frac_q(&(beta * &nq)),
            },
        }
    }

    /// Terms that contribute nothing at any integer `n`.
    pub fn is_trivially_zero(&self) -> bool {
        match self {
            BracketTerm::Poly { p } => p.is_zero(),
            BracketTerm::NBracket { a, alpha, beta } => a.is_zero() || alpha.is_zero() || beta.is_zero(),
            BracketTerm::FracProd { a, p1, p2 } => a.is_zero() || p1.is_trivial() || p2.is_trivial(),
            BracketTerm::FracLin { a, p } => a.is_zero() || p.is_trivial(),
            BracketTerm::Deg3 { a, variant, beta, gamma } => {
                a.is_zero()
                    || beta.is_integer()
                    || (*variant == Deg3Variant::NFracFrac && gamma.is_integer())
            }
        }
    }

    /// Membership in the lower-order catalogue: products of at most two
    /// fractional parts of affine phases, single fractional parts, and
    /// polynomials of degree at most one.
    pub fn is_lower_order(&self) -> bool {
        match self {
            BracketTerm::Poly { p } => p.degree() <= 1,
            BracketTerm::FracProd { .. } | BracketTerm::FracLin { .. } => true,
            BracketTerm::NBracket { .. } | BracketTerm::Deg3 { .. } => false,
        }
    }
}

/// A bracket phase `sum of terms`, optionally tied to a modulus `N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct BracketExpr {
    pub terms: Vec<BracketTerm>,
    pub modulus: Option<u64>,
}

fn check_den(what: &str, x: &ExactRational, m: &BigInt) -> Result<(), BracketError> {
    if denominator_divides(x, m) {
        Ok(())
    } else {
        Err(BracketError::Denominator {
            what: what.to_string(),
            value: x.to_string(),
            modulus: m.to_string(),
        })
    }
}

impl BracketExpr {
    /// Builds an expression, checking denominators when a modulus is given:
    /// phases must have denominator `N`, coefficients `2N`, and the degree-`i`
    /// polynomial coefficient `2N^i`.
    pub fn new(terms: Vec<BracketTerm>, modulus: Option<u64>) -> Result<Self, BracketError> {
        if let Some(n) = modulus {
            let nb = BigInt::from(n);
            let two_n = &nb * 2;
            for t in &terms {
                match t {
                    BracketTerm::Poly { p } => {
                        let mut m = BigInt::from(2);
                        for (i, c) in p.coeffs().iter().enumerate().skip(1) {
                            m *= &nb;
                            check_den(&format!("coefficient of n^{i}"), c, &m)?;
                        }
                    }
                    BracketTerm::NBracket { a, alpha, beta } => {
                        check_den("bracket coefficient", a, &two_n)?;
                        check_den("alpha", alpha, &nb)?;
                        check_den("beta", beta, &nb)?;
                    }
                    BracketTerm::FracProd { a, p1, p2 } => {
                        check_den("coefficient", a, &two_n)?;
                        for p in [p1, p2] {
                            check_den("phase slope", &p.slope, &nb)?;
                            check_den("phase offset", &p.offset, &nb)?;
                        }
                    }
                    BracketTerm::FracLin { a, p } => {
                        check_den("coefficient", a, &two_n)?;
                        check_den("phase slope", &p.slope, &nb)?;
                        check_den("phase offset", &p.offset, &nb)?;
                    }
                    BracketTerm::Deg3 { a, beta, gamma, .. } => {
                        check_den("coefficient", a, &two_n)?;
                        check_den("beta", beta, &nb)?;
                        check_den("gamma", gamma, &nb)?;
                    }
                }
            }
        }
        Ok(BracketExpr { terms, modulus })
    }

    /// Expression without a modulus; no checks.
    pub fn free(terms: Vec<BracketTerm>) -> Self {
        BracketExpr { terms, modulus: None }
    }

    pub fn concat(&self, other: &BracketExpr) -> BracketExpr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        BracketExpr { terms, modulus: self.modulus.or(other.modulus) }
    }

    pub fn eval_exact(&self, n: i64) -> ExactRational {
        self.terms.iter().map(|t| t.eval(n)).sum()
    }

    pub fn eval_mod1(&self, n: i64) -> RationalMod1 {
        frac(&self.eval_exact(n))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bracket expressions always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Which sign convention to read `e(-a_1 n[b_1 n] + ... + a_d n[b_d n] + P(n))` with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignReading {
    /// Minus in front of the whole bracket sum; matches `F = e(-x.[y] + z)`.
    GlobalMinus,
    /// Minus on the first bracket only.
    FirstTermOnly,
}

/// The elementary bracket quadratic `-(sum_i alpha_i n [beta_i n]) + P(n)`.
pub fn elementary_quadratic(
    alpha: &[ExactRational],
    beta: &[ExactRational],
    p: &ExactPolynomial,
    reading: SignReading,
) -> BracketExpr {
    let mut terms: Vec<BracketTerm> = alpha
        .iter()
        .zip(beta)
        .enumerate()
        .map(|(i, (a, b))| {
            let sign = match reading {
                SignReading::FirstTermOnly if i > 0 => int(1),
                _ => int(-1),
            };
            BracketTerm::NBracket { a: sign, alpha: a.clone(), beta: b.clone() }
        })
        .collect();
    terms.push(BracketTerm::poly(p.clone()));
    BracketExpr::free(terms)
}

/// Denominator facts about a periodic elementary bracket quadratic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticDenominators {
    /// Every alpha_i and beta_i has denominator dividing N.
    pub phases_denominator_n: bool,
    /// The n^2 coefficient of P has denominator dividing 2N.
    pub quadratic_denominator_2n: bool,
    /// `P_2 + sum_i a_i alpha_i beta_i / 2` has denominator dividing 2N, where
    /// `a_i` is the coefficient of the i-th bracket.
    pub reduced_quadratic_denominator_2n: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicityReport {
    pub periodic: bool,
    /// `N <= 100`, below the regime where the denominator conclusions are claimed.
    pub degenerate: bool,
    /// Present when the expression is periodic and consists only of `n[.]`
    /// brackets and a polynomial of degree at most two.
    pub denominators: Option<QuadraticDenominators>,
}

/// True iff `e(n + N) = e(n)` mod 1 for every `n` in `[0, N)`.
pub fn is_periodic_phase(e: &BracketExpr, n: u64) -> bool {
    let n = n as i64;
    (0..n).all(|k| e.eval_mod1(k + n) == e.eval_mod1(k))
}

pub fn periodicity_report(e: &BracketExpr, n: u64) -> PeriodicityReport {
    let periodic = is_periodic_phase(e, n);
    let elementary = e.terms.iter().all(|t| match t {
        BracketTerm::NBracket { .. } => true,
        BracketTerm::Poly { p } => p.degree() <= 2,
        _ => false,
    });
    let denominators = (periodic && elementary).then(|| {
        let nb = BigInt::from(n);
        let two_n = &nb * 2;
        let mut phases = true;
        let mut p2 = ExactRational::zero();
        let mut corr = ExactRational::zero();
        for t in &e.terms {
            match t {
                BracketTerm::NBracket { a, alpha, beta } => {
                    phases &= denominator_divides(alpha, &nb) && denominator_divides(beta, &nb);
                    corr += a * alpha * beta / int(2);
                }
                BracketTerm::Poly { p } => p2 += p.coeff(2),
                _ => unreachable!(),
            }
        }
        QuadraticDenominators {
            phases_denominator_n: phases,
            quadratic_denominator_2n: denominator_divides(&p2, &two_n),
            reduced_quadratic_denominator_2n: denominator_divides(&(&p2 + corr), &two_n),
        }
    });
    PeriodicityReport { periodic, degenerate: n <= 100, denominators }
}

/// Result of van der Corput differencing `alpha(n+h)[beta(n+h)] - alpha n[beta n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VdcExpansion {
    pub top: BracketExpr,
    pub lower: Vec<BracketTerm>,
}

impl VdcExpansion {
    pub fn eval_mod1(&self, n: i64) -> RationalMod1 {
        let lower: ExactRational = self.lower.iter().map(|t| t.eval(n)).sum();
        frac(&(self.top.eval_exact(n) + lower))
    }
}

/// Splits the differenced bracket into a linear top part and catalogued
/// lower-order terms, congruent mod 1 at every integer `n`.
///
/// Writing `s = alpha h`, `t = beta h`:
/// `n(alpha beta h + beta{s} - alpha{t}) + s[t] - {s}{beta n}
///  + {beta n}{alpha n + s} + {t}{alpha n + s} - {alpha n + s}{beta n + t}`.
pub fn vdc_expand(alpha: &ExactRational, beta: &ExactRational, h: i64) -> VdcExpansion {
    if h == 0 {
        return VdcExpansion { top: BracketExpr::default(), lower: Vec::new() };
    }
    let hq = int(h);
    let s = alpha * &hq;
    let t = beta * &hq;
    let fs = frac_q(&s);
    let ft = frac_q(&t);
    let slope = alpha * beta * &hq + beta * &fs - alpha * &ft;
    let top_poly = ExactPolynomial::new(vec![ExactRational::zero(), slope]);
    let top = BracketExpr::free(
        Some(BracketTerm::poly(top_poly)).into_iter().filter(|t| !t.is_trivially_zero()).collect(),
    );
    let an_s = Phase::new(alpha.clone(), s.clone());
    let bn = Phase::linear(beta.clone());
    let bn_t = Phase::new(beta.clone(), t.clone());
    let lower = vec![
        BracketTerm::poly(ExactPolynomial::constant(&s * big(&int_part(&t)))),
        BracketTerm::FracLin { a: -fs.clone(), p: bn.clone() },
        BracketTerm::FracProd { a: ExactRational::one(), p1: bn, p2: an_s.clone() },
        BracketTerm::FracLin { a: ft, p: an_s.clone() },
        BracketTerm::FracProd { a: int(-1), p1: an_s, p2: bn_t },
    ];
    let lower = lower.into_iter().filter(|t| !t.is_trivially_zero()).collect();
    VdcExpansion { top, lower }
}

/// `alpha(n+h)[beta(n+h)] - alpha n [beta n]` computed directly.
pub fn bracket_difference(alpha: &ExactRational, beta: &ExactRational, h: i64, n: i64) -> RationalMod1 {
    let t = BracketTerm::NBracket { a: ExactRational::one(), alpha: alpha.clone(), beta: beta.clone() };
    frac(&(t.eval(n + h) - t.eval(n)))
}

/// `alpha n[beta n] - beta n[alpha n] - (2 alpha n[beta n] - alpha beta n^2 + {alpha n}{beta n})`,
/// which is an integer for every `n`.
pub fn swap_residue(alpha: &ExactRational, beta: &ExactRational, n: i64) -> RationalMod1 {
    let nq = int(n);
    let an = alpha * &nq;
    let bn = beta * &nq;
    let ab = &an * big(&int_part(&bn));
    let ba = &bn * big(&int_part(&an));
    let rhs = int(2) * &ab - &an * &bn + frac_q(&an) * frac_q(&bn);
    frac(&(ab - ba - rhs))
}

/// Same residue against the variant `alpha beta n^2 + 2 alpha n[beta n]`.
pub fn swap_residue_variant(alpha: &ExactRational, beta: &ExactRational, n: i64) -> RationalMod1 {
    let nq = int(n);
    let an = alpha * &nq;
    let bn = beta * &nq;
    let ab = &an * big(&int_part(&bn));
    let ba = &bn * big(&int_part(&an));
    let rhs = &an * &bn + int(2) * &ab;
    frac(&(ab - ba - rhs))
}

/// `alpha n[beta n] - ({alpha} n[{beta} n] + {alpha}[beta] n^2)`; always zero mod 1.
pub fn window_reduction_residue(alpha: &ExactRational, beta: &ExactRational, n: i64) -> RationalMod1 {
    let nq = int(n);
    let fa = frac_q(alpha);
    let fb = frac_q(beta);
    let lhs = alpha * &nq * big(&int_part(&(beta * &nq)));
    let rhs = &fa * &nq * big(&int_part(&(&fb * &nq))) + &fa * big(&int_part(beta)) * &nq * &nq;
    frac(&(lhs - rhs))
}

/// The form `T(x,y,z) = sum_j {a_j x}(b_j/6) y {c_j z} + {a_j x}(b_j/6) z {c_j y}
/// + sum_j (a'_j/3){b'_j x} y z`, with `x, y, z` read as integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrilinearT {
    pub d: usize,
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub alpha: Vec<ExactRational>,
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub beta: Vec<ExactRational>,
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub gamma: Vec<ExactRational>,
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub alpha_p: Vec<ExactRational>,
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub beta_p: Vec<ExactRational>,
}

impl TrilinearT {
    pub fn zero(d: usize) -> Self {
        let z = vec![ExactRational::zero(); d];
        TrilinearT {
            d,
            alpha: z.clone(),
            beta: z.clone(),
            gamma: z.clone(),
            alpha_p: z.clone(),
            beta_p: z,
        }
    }

    pub fn eval_exact(&self, x: i64, y: i64, z: i64) -> ExactRational {
        let (xq, yq, zq) = (int(x), int(y), int(z));
        let six = int(6);
        let three = int(3);
        let mut acc = ExactRational::zero();
        for j in 0..self.d {
            let fx = frac_q(&(&self.alpha[j] * &xq));
            let b = &self.beta[j] / &six;
            acc += &fx * &b * &yq * frac_q(&(&self.gamma[j] * &zq));
            acc += &fx * &b * &zq * frac_q(&(&self.gamma[j] * &yq));
            acc += &self.alpha_p[j] / &three * frac_q(&(&self.beta_p[j] * &xq)) * &yq * &zq;
        }
        acc
    }

    pub fn eval(&self, x: i64, y: i64, z: i64) -> RationalMod1 {
        frac(&self.eval_exact(x, y, z))
    }
}

/// A failed additivity check: `slot` is 0, 1 or 2 and `(u, v)` are the two
/// summands placed in that slot with `others` in the remaining slots.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("T is not additive in slot {slot} at u={u}, v={v}, others={others:?}")]
pub struct TrilinearityViolation {
    pub slot: usize,
    pub u: i64,
    pub v: i64,
    pub others: (i64, i64),
}

/// Centered representative of `x` mod `n`.
pub fn centered(x: i64, n: u64) -> i64 {
    let n = n as i64;
    let r = x.rem_euclid(n);
    if 2 * r > n {
        r - n
    } else {
        r
    }
}

/// Checks additivity of `T` in each slot over the set `b` of residues mod `n`.
///
/// Arguments are read through their centered representatives. The check is
/// exhaustive when `|B|^4 <= max_cases`, otherwise `max_cases` random cases
/// drawn with `seed` are tested.
pub fn local_trilinearity_check(
    t: &TrilinearT,
    b: &[i64],
    n: u64,
    max_cases: usize,
    seed: u64,
) -> Result<(), TrilinearityViolation> {
    let reps: Vec<i64> = b.iter().map(|&x| centered(x, n)).collect();
    let members: std::collections::HashSet<i64> = reps.iter().copied().collect();
    let check = |u: i64, v: i64, p: i64, q: i64| -> Result<(), TrilinearityViolation> {
        let s = u + v;
        if !members.contains(&centered(s, n)) {
            return Ok(());
        }
        let s = centered(s, n);
        let args = |w: i64, slot: usize| match slot {
            0 => (w, p, q),
            1 => (p, w, q),
            _ => (p, q, w),
        };
        for slot in 0..3 {
            let e = |w| {
                let (x, y, z) = args(w, slot);
                t.eval(x, y, z)
            };
            if e(s) != &e(u) + &e(v) {
                return Err(TrilinearityViolation { slot, u, v, others: (p, q) });
            }
        }
        Ok(())
    };
    let m = reps.len();
    if (m as f64).powi(4) <= max_cases as f64 {
        for &u in &reps {
            for &v in &reps {
                for &p in &reps {
                    for &q in &reps {
                        check(u, v, p, q)?;
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..max_cases {
            let mut pick = || reps[rng.gen_range(0..m)];
            let (u, v, p, q) = (pick(), pick(), pick(), pick());
            check(u, v, p, q)?;
        }
    }
    Ok(())
}

pub fn is_locally_trilinear(t: &TrilinearT, b: &[i64], n: u64) -> bool {
    local_trilinearity_check(t, b, n, 1 << 20, 0).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmod::rat;

    #[test]
    fn nbracket_example() {
        let e = BracketExpr::free(vec![BracketTerm::NBracket {
            a: int(-1),
            alpha: rat(1, 5),
            beta: rat(2, 5),
        }]);
        // -(3/5)[6/5] = -3/5
        assert_eq!(e.eval_mod1(3).value(), &rat(2, 5));
        assert!(BracketExpr::default().eval_mod1(17).is_zero());
    }

    #[test]
    fn modulus_checks() {
        let bad = BracketExpr::new(
            vec![BracketTerm::NBracket { a: int(-1), alpha: rat(1, 2), beta: rat(1, 7) }],
            Some(7),
        );
        assert!(matches!(bad, Err(BracketError::Denominator { .. })));
        let ok = BracketExpr::new(
            vec![BracketTerm::poly(ExactPolynomial::new(vec![int(0), rat(1, 14), rat(1, 98)]))],
            Some(7),
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn periodicity_examples() {
        assert!(is_periodic_phase(&BracketExpr::default(), 7));
        let half = BracketExpr::free(vec![BracketTerm::FracLin { a: int(1), p: Phase::linear(rat(1, 2)) }]);
        assert!(!is_periodic_phase(&half, 7));
        let lin = BracketExpr::free(vec![BracketTerm::poly(ExactPolynomial::new(vec![int(0), rat(1, 2)]))]);
        assert!(!is_periodic_phase(&lin, 7));
    }

    #[test]
    fn json_round_trip() {
        let e = BracketExpr::new(
            vec![
                BracketTerm::NBracket { a: int(-1), alpha: rat(1, 5), beta: rat(2, 5) },
                BracketTerm::FracProd {
                    a: rat(1, 2),
                    p1: Phase::new(rat(1, 5), rat(2, 5)),
                    p2: Phase::linear(rat(3, 5)),
                },
                BracketTerm::Deg3 { a: int(1), variant: Deg3Variant::N2Frac, beta: rat(1, 5), gamma: int(0) },
                BracketTerm::poly(ExactPolynomial::new(vec![int(1), rat(1, 10)])),
            ],
            Some(5),
        )
        .unwrap();
        let s = e.to_json();
        let back = BracketExpr::from_json(&s).unwrap();
        assert_eq!(back, e);
        assert_eq!(back.to_json(), s);
    }

    #[test]
    fn trilinear_example() {
        let t = TrilinearT {
            d: 1,
            alpha: vec![rat(1, 5)],
            beta: vec![rat(6, 5)],
            gamma: vec![rat(2, 5)],
            alpha_p: vec![int(0)],
            beta_p: vec![int(0)],
        };
        assert_eq!(t.eval(1, 1, 1).value(), &rat(4, 125));
    }

    #[test]
    fn vdc_trivial_cases() {
        let v = vdc_expand(&rat(1, 7), &rat(3, 7), 0);
        assert!(v.top.terms.is_empty() && v.lower.is_empty());
        let v = vdc_expand(&rat(1, 7), &int(0), 3);
        assert!(v.top.terms.is_empty() && v.lower.is_empty());
    }
}
