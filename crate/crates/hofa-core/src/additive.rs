//! Bohr sets, additive energies, additive-quadruple statistics and Freiman
//! homomorphism checks on `Z/NZ`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gowers::{e_frac, FnZN};
use crate::linalg;
use crate::ratmod::{big, dist_circle, frac, has_denominator, int, rat, to_f64, ExactRational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdditiveError {
    #[error("frequency {0} does not have denominator dividing N")]
    Frequency(String),
    #[error("radius must be positive")]
    Radius,
    #[error("no regular radius on the grid; best candidate {best} fails at eps = {eps}")]
    NotFound { best: String, eps: String },
    #[error("modulus {n} exceeds the cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("enumeration of {count} tuples exceeds the cap {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("function for h = {0} is missing or has the wrong modulus")]
    MissingFunction(usize),
}

/// `B(S, rho) = {x in Z/NZ : ||alpha x|| < rho for all alpha in S}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BohrSet {
    pub n: u64,
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub s: Vec<ExactRational>,
    #[serde(with = "crate::ratmod::serde_q")]
    pub rho: ExactRational,
    pub members: Vec<i64>,
}

impl BohrSet {
    pub fn contains(&self, x: i64) -> bool {
        self.members.binary_search(&x.rem_euclid(self.n as i64)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn check_freqs(s: &[ExactRational], n: u64) -> Result<(), AdditiveError> {
    match s.iter().find(|a| !has_denominator(a, n)) {
        Some(a) => Err(AdditiveError::Frequency(a.to_string())),
        None => Ok(()),
    }
}

/// `max_{alpha in S} ||alpha x||`, times `N` (an integer).
fn bohr_norm_num(s: &[ExactRational], x: i64, n: u64) -> i64 {
    s.iter()
        .map(|a| {
            let d = dist_circle(&(a * int(x))) * int(n as i64);
            i64::try_from(d.to_integer()).expect("small")
        })
        .max()
        .unwrap_or(0)
}

pub fn bohr_build(s: &[ExactRational], rho: &ExactRational, n: u64) -> Result<BohrSet, AdditiveError> {
    check_freqs(s, n)?;
    if *rho <= ExactRational::zero() {
        return Err(AdditiveError::Radius);
    }
    let members = (0..n as i64)
        .filter(|&x| s.iter().all(|a| dist_circle(&(a * int(x))) < *rho))
        .collect();
    Ok(BohrSet { n, s: s.to_vec(), rho: rho.clone(), members })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularityConfig {
    /// Number of geometric grid points `eps_k = (2/3)^k / (100|S|)`.
    pub grid_points: usize,
    /// Also require `|B(rho(1 - eps))| >= (1 - 100|S| eps)|B(rho)|`.
    pub check_shrink: bool,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        RegularityConfig { grid_points: 32, check_shrink: true }
    }
}

/// Bohr-set sizes as a function of the radius.
struct RadiusProfile {
    n: u64,
    /// sorted values `N * max_alpha ||alpha x||`
    levels: Vec<i64>,
}

impl RadiusProfile {
    fn new(s: &[ExactRational], n: u64) -> Self {
        let mut levels: Vec<i64> = (0..n as i64).map(|x| bohr_norm_num(s, x, n)).collect();
        levels.sort_unstable();
        RadiusProfile { n, levels }
    }

    /// `|B(S, r)|`
    fn size(&self, r: &ExactRational) -> usize {
        let scaled = r * int(self.n as i64);
        self.levels.partition_point(|&l| int(l) < scaled)
    }
}

pub fn epsilon_grid(s_len: usize, points: usize) -> Vec<ExactRational> {
    let base = rat(1, 100 * s_len.max(1) as i64);
    let mut out = Vec::with_capacity(points);
    let mut e = base;
    for _ in 0..points {
        out.push(e.clone());
        e = e * rat(2, 3);
    }
    out
}

/// First grid `eps` at which `B(S, r)` fails regularity, if any.
fn regularity_failure(
    prof: &RadiusProfile,
    s_len: usize,
    r: &ExactRational,
    grid: &[ExactRational],
    cfg: &RegularityConfig,
) -> Option<ExactRational> {
    let b = int(prof.size(r) as i64);
    let c = int(100 * s_len as i64);
    for eps in grid {
        let grown = int(prof.size(&(r * (ExactRational::one() + eps))) as i64);
        let lo = &b * (ExactRational::one() - &c * eps);
        let hi = &b * (ExactRational::one() + &c * eps);
        if grown < lo || grown > hi {
            return Some(eps.clone());
        }
        if cfg.check_shrink {
            let shrunk = int(prof.size(&(r * (ExactRational::one() - eps))) as i64);
            if shrunk < lo {
                return Some(eps.clone());
            }
        }
    }
    None
}

/// Checks the regularity inequality for `B(S, r)` on the grid.
pub fn is_regular(s: &[ExactRational], r: &ExactRational, n: u64, cfg: &RegularityConfig) -> bool {
    if s.is_empty() {
        return true;
    }
    let prof = RadiusProfile::new(s, n);
    regularity_failure(&prof, s.len(), r, &epsilon_grid(s.len(), cfg.grid_points), cfg).is_none()
}

/// Some `rho'` in `[rho/2, rho]` with `B(S, rho')` regular on the grid.
///
/// Sizes only change at radii `k/N`, so the candidates are `rho` and the
/// midpoints between consecutive jump points in range, scanned downward.
pub fn find_regular_radius(
    s: &[ExactRational],
    rho: &ExactRational,
    n: u64,
    cfg: &RegularityConfig,
) -> Result<ExactRational, AdditiveError> {
    check_freqs(s, n)?;
    if *rho <= ExactRational::zero() {
        return Err(AdditiveError::Radius);
    }
    if s.is_empty() {
        return Ok(rho.clone());
    }
    let prof = RadiusProfile::new(s, n);
    let grid = epsilon_grid(s.len(), cfg.grid_points);
    let lo = rho / int(2);
    let nq = int(n as i64);
    let mut jumps: Vec<ExactRational> = Vec::new();
    let mut k = (rho * &nq).floor().to_integer();
    loop {
        let j = big(&k) / &nq;
        if j < lo {
            break;
        }
        if j <= *rho {
            jumps.push(j);
        }
        k -= 1;
    }
    let mut candidates = vec![rho.clone()];
    let mut prev = rho.clone();
    for j in jumps.iter().chain(std::iter::once(&lo)) {
        if *j < prev {
            candidates.push((&prev + j) / int(2));
            prev = j.clone();
        }
    }
    let mut best: Option<(ExactRational, ExactRational)> = None;
    for c in candidates {
        match regularity_failure(&prof, s.len(), &c, &grid, cfg) {
            None => return Ok(c),
            Some(eps) => {
                if best.as_ref().is_none_or(|(_, e)| eps < *e) {
                    best = Some((c, eps));
                }
            }
        }
    }
    let (best, eps) = best.expect("at least one candidate");
    Err(AdditiveError::NotFound { best: best.to_string(), eps: eps.to_string() })
}

fn indicator(set: &[usize], n: usize) -> Vec<u64> {
    let mut v = vec![0u64; n];
    for &a in set {
        v[a % n] = 1;
    }
    v
}

/// `E(A, B) = #{(a, a', b, b') : a + b = a' + b'} / N^3`.
pub fn energy(a: &[usize], b: &[usize], n: usize) -> ExactRational {
    let ia = indicator(a, n);
    let ib = indicator(b, n);
    let mut r = vec![0u64; n];
    for x in 0..n {
        if ia[x] == 0 {
            continue;
        }
        for y in 0..n {
            r[(x + y) % n] += ib[y];
        }
    }
    let total: u128 = r.iter().map(|&c| c as u128 * c as u128).sum();
    count_over_cube(total, n)
}

/// Same quantity by the defining quadruple loop.
pub fn energy_direct(a: &[usize], b: &[usize], n: usize) -> ExactRational {
    let mut total: u128 = 0;
    for &x in a {
        for &xp in a {
            for &y in b {
                for &yp in b {
                    if (x + y) % n == (xp + yp) % n {
                        total += 1;
                    }
                }
            }
        }
    }
    count_over_cube(total, n)
}

fn count_over_cube(c: u128, n: usize) -> ExactRational {
    ExactRational::new(BigInt::from(c), BigInt::from(n).pow(3))
}

/// Raw count `sum_z |A1 & (A3 + z)| |A2 & (A4 + z)|`.
pub fn energy4_count(a1: &[usize], a2: &[usize], a3: &[usize], a4: &[usize], n: usize) -> u128 {
    let (i1, i2, i3, i4) = (indicator(a1, n), indicator(a2, n), indicator(a3, n), indicator(a4, n));
    (0..n)
        .map(|z| {
            let c1: u128 = (0..n).map(|x| (i1[x] * i3[(x + n - z) % n]) as u128).sum();
            let c2: u128 = (0..n).map(|x| (i2[x] * i4[(x + n - z) % n]) as u128).sum();
            c1 * c2
        })
        .sum()
}

pub fn energy4(a1: &[usize], a2: &[usize], a3: &[usize], a4: &[usize], n: usize) -> ExactRational {
    count_over_cube(energy4_count(a1, a2, a3, a4, n), n)
}

/// Exact check of `E(A1, A2, A3, A4) <= prod_i E(A_i)^{1/4}` via fourth powers.
pub fn energy_cs_holds(sets: [&[usize]; 4], n: usize) -> bool {
    let lhs = BigInt::from(energy4_count(sets[0], sets[1], sets[2], sets[3], n)).pow(4);
    let rhs: BigInt = sets
        .iter()
        .map(|a| BigInt::from(energy4_count(a, a, a, a, n)))
        .product();
    lhs <= rhs
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadrupleConfig {
    /// Constant `c` in the inner threshold `c * eta^4 * delta^2`.
    pub inner_constant: f64,
    pub max_n: usize,
}

impl Default for QuadrupleConfig {
    fn default() -> Self {
        QuadrupleConfig { inner_constant: 1.0, max_n: 128 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleReport {
    pub n: usize,
    #[serde(with = "crate::ratmod::serde_q")]
    pub eta: ExactRational,
    #[serde(with = "crate::ratmod::serde_q")]
    pub delta: ExactRational,
    /// Additive quadruples in `H^4`.
    pub total_quadruples: u64,
    /// Those with correlation at least `c eta^4 delta^2`.
    pub count: u64,
    #[serde(with = "crate::ratmod::serde_q")]
    pub bound: ExactRational,
    /// Minimum over `h` of `|E_n f1(n) f2(n+h) chi_h(n)|`, when witnesses are given.
    pub measured_delta: Option<f64>,
    pub hypothesis_verified: Option<bool>,
    /// `count >= eta^8 delta^4 N^3 / 2`, reported only when the hypothesis is verified.
    pub threshold_pass: Option<bool>,
    /// Quadruples with correlation at least `eta^2 delta^4 / sqrt 2`.
    pub proof_count: u64,
    #[serde(with = "crate::ratmod::serde_q")]
    pub proof_bound: ExactRational,
}

/// Counts additive quadruples `h1 + h2 = h3 + h4` in `H` whose correlation
/// `|E_n chi_h1(n) chi_h2(n + h1 - h4) conj(chi_h3(n) chi_h4(n + h1 - h4))|`
/// is large, and compares with `eta^8 delta^4 N^3 / 2`.
pub fn additive_quadruple_count(
    h_set: &[usize],
    chi: &HashMap<usize, FnZN>,
    delta: &ExactRational,
    witnesses: Option<(&FnZN, &FnZN)>,
    n: usize,
    cfg: &QuadrupleConfig,
) -> Result<QuadrupleReport, AdditiveError> {
    if n > cfg.max_n {
        return Err(AdditiveError::TooLarge { n, cap: cfg.max_n });
    }
    let mut hs: Vec<usize> = h_set.iter().map(|h| h % n).collect();
    hs.sort_unstable();
    hs.dedup();
    for &h in &hs {
        if chi.get(&h).is_none_or(|f| f.n != n) {
            return Err(AdditiveError::MissingFunction(h));
        }
    }
    let eta = rat(hs.len() as i64, n as i64);
    let (etaf, deltaf) = (to_f64(&eta), to_f64(delta));
    let inner = cfg.inner_constant * etaf.powi(4) * deltaf.powi(2);
    let proof_inner = etaf.powi(2) * deltaf.powi(4) / 2f64.sqrt();
    let in_h = {
        let mut v = vec![false; n];
        hs.iter().for_each(|&h| v[h] = true);
        v
    };
    let rows: Vec<(u64, u64, u64)> = hs
        .par_iter()
        .map(|&h1| {
            let c1 = &chi[&h1];
            let (mut tot, mut cnt, mut pcnt) = (0u64, 0u64, 0u64);
            for &h2 in &hs {
                let c2 = &chi[&h2];
                for &h3 in &hs {
                    let h4 = (h1 + h2 + n - h3) % n;
                    if !in_h[h4] {
                        continue;
                    }
                    tot += 1;
                    let (c3, c4) = (&chi[&h3], &chi[&h4]);
                    let s = (h1 + n - h4) as i64;
                    let corr: Complex64 = (0..n as i64)
                        .map(|x| c1.at(x) * c2.at(x + s) * (c3.at(x) * c4.at(x + s)).conj())
                        .sum::<Complex64>()
                        / n as f64;
                    let m = corr.norm();
                    if m >= inner - 1e-12 {
                        cnt += 1;
                    }
                    if m >= proof_inner - 1e-12 {
                        pcnt += 1;
                    }
                }
            }
            (tot, cnt, pcnt)
        })
        .collect();
    let (total, count, proof_count) = rows.iter().fold((0, 0, 0), |a, r| (a.0 + r.0, a.1 + r.1, a.2 + r.2));
    let n3 = int(n as i64).pow(3);
    let bound = eta.pow(8) * delta.pow(4) * &n3 / int(2);
    let proof_bound = eta.pow(4) * delta.pow(8) * &n3 / int(2);
    let measured_delta = witnesses.map(|(f1, f2)| {
        hs.iter()
            .map(|&h| {
                let c = &chi[&h];
                ((0..n as i64).map(|x| f1.at(x) * f2.at(x + h as i64) * c.at(x)).sum::<Complex64>() / n as f64)
                    .norm()
            })
            .fold(f64::INFINITY, f64::min)
    });
    let hypothesis_verified = measured_delta.map(|m| {
        m + 1e-12 >= deltaf && f1_f2_bounded(witnesses) && hs.iter().all(|h| chi[h].is_one_bounded())
    });
    let threshold_pass = hypothesis_verified.map(|ok| ok && int(count as i64) >= bound);
    Ok(QuadrupleReport {
        n,
        eta,
        delta: delta.clone(),
        total_quadruples: total,
        count,
        bound,
        measured_delta,
        hypothesis_verified,
        threshold_pass,
        proof_count,
        proof_bound,
    })
}

fn f1_f2_bounded(w: Option<(&FnZN, &FnZN)>) -> bool {
    w.is_some_and(|(a, b)| a.is_one_bounded() && b.is_one_bounded())
}

/// `chi_h(n) = e((a h n + b_h) / N) u_h(n)` on a random `H`, with witnesses
/// `f1 = e(-c n^2 / N)`, `f2 = e(c n^2 / N)`, `2c = -a mod N`.
#[derive(Clone, Debug)]
pub struct PlantedChi {
    pub n: usize,
    pub a: i64,
    pub h_set: Vec<usize>,
    pub chi: HashMap<usize, FnZN>,
    pub f1: FnZN,
    pub f2: FnZN,
}

/// `density` is the chance that each `h` lands in `H`; `noise` bounds the
/// random phase `u_h(n) = e(t)`, `|t| <= noise`. Needs `N` odd.
pub fn planted_chi_family<R: Rng>(rng: &mut R, n: usize, density: f64, noise: f64) -> PlantedChi {
    assert!(n % 2 == 1, "planted family needs odd N");
    let nn = n as i64;
    let a = rng.gen_range(1..nn);
    let c = (-a * (nn + 1) / 2).rem_euclid(nn);
    let mut h_set: Vec<usize> = (0..n).filter(|_| rng.gen_bool(density)).collect();
    if h_set.is_empty() {
        h_set.push(0);
    }
    let chi = h_set
        .iter()
        .map(|&h| {
            let b = rng.gen_range(0..nn);
            let f = FnZN::new(
                (0..nn)
                    .map(|x| {
                        let t = if noise > 0.0 { rng.gen_range(-noise..=noise) } else { 0.0 };
                        e_frac(a * h as i64 * x + b, nn) * Complex64::from_polar(1.0, std::f64::consts::TAU * t)
                    })
                    .collect(),
            );
            (h, f)
        })
        .collect();
    let f1 = FnZN::from_fn(n, |x| e_frac(-c * (x * x) as i64, nn));
    let f2 = FnZN::from_fn(n, |x| e_frac(c * (x * x) as i64, nn));
    PlantedChi { n, a, h_set, chi, f1, f2 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreimanTarget {
    /// Values compared exactly.
    Rationals,
    /// Values compared modulo 1.
    Mod1,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreimanResult {
    pub holds: bool,
    pub checked: u64,
    /// Two `k`-multisets with equal sums mod `N` and different value sums.
    pub witness: Option<(Vec<i64>, Vec<i64>)>,
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Checks that `sum f(x_i) = sum f(y_i)` whenever two `k`-multisets from the
/// domain of `f` have equal sums mod `N`.
pub fn freiman_check(
    f: &[(i64, ExactRational)],
    k: usize,
    n: u64,
    target: FreimanTarget,
    cap: u128,
) -> Result<FreimanResult, AdditiveError> {
    let m = f.len();
    let count = if m == 0 { 0 } else { binomial((m + k - 1) as u128, k as u128) };
    if count > cap {
        return Err(AdditiveError::CapExceeded { count, cap });
    }
    let norm = |v: ExactRational| match target {
        FreimanTarget::Rationals => v,
        FreimanTarget::Mod1 => frac(&v).into_inner(),
    };
    let mut seen: HashMap<i64, (Vec<usize>, ExactRational)> = HashMap::new();
    let mut idx = vec![0usize; k];
    let mut checked = 0u64;
    if m == 0 {
        return Ok(FreimanResult { holds: true, checked, witness: None });
    }
    loop {
        let sum = idx.iter().map(|&i| f[i].0).sum::<i64>().rem_euclid(n as i64);
        let val = norm(idx.iter().map(|&i| f[i].1.clone()).sum());
        checked += 1;
        match seen.get(&sum) {
            Some((prev, pv)) if *pv != val => {
                let pts = |v: &[usize]| v.iter().map(|&i| f[i].0).collect::<Vec<_>>();
                return Ok(FreimanResult { holds: false, checked, witness: Some((pts(prev), pts(&idx))) });
            }
            Some(_) => {}
            None => {
                seen.insert(sum, (idx.clone(), val));
            }
        }
        // next non-decreasing index tuple
        let Some(p) = (0..k).rev().find(|&p| idx[p] + 1 < m) else {
            break;
        };
        let v = idx[p] + 1;
        idx[p..].iter_mut().for_each(|x| *x = v);
    }
    Ok(FreimanResult { holds: true, checked, witness: None })
}

/// Least-squares fit of `values` by `sum_i c_i {alpha_i x}` over the points.
/// Returns the coefficients and the residual sum of squares (exact).
pub fn fit_bracket_linear(
    points: &[(i64, ExactRational)],
    freqs: &[ExactRational],
) -> Option<(Vec<ExactRational>, ExactRational)> {
    let rows: Vec<Vec<ExactRational>> = points
        .iter()
        .map(|(x, _)| freqs.iter().map(|a| frac(&(a * int(*x))).into_inner()).collect())
        .collect();
    let y: Vec<ExactRational> = points.iter().map(|(_, v)| v.clone()).collect();
    let at = linalg::transpose(&rows);
    let ata = linalg::mat_mul(&at, &rows);
    let aty = linalg::mat_vec(&at, &y);
    let c = linalg::solve(&ata, &aty)?;
    let resid: ExactRational = rows
        .iter()
        .zip(&y)
        .map(|(r, v)| {
            let e = linalg::dot(r, &c) - v;
            &e * &e
        })
        .sum();
    Some((c, resid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bohr_examples() {
        let all = bohr_build(&[], &rat(1, 5), 7).unwrap();
        assert_eq!(all.members, (0..7).collect::<Vec<_>>());
        let big_r = bohr_build(&[rat(1, 7)], &rat(3, 5), 7).unwrap();
        assert_eq!(big_r.len(), 7);
        // ||x/7|| < 1/7 + 1/100 holds for x = 0, 1, 6
        let b = bohr_build(&[rat(1, 7)], &(rat(1, 7) + rat(1, 100)), 7).unwrap();
        assert_eq!(b.members, vec![0, 1, 6]);
        assert!(bohr_build(&[rat(1, 2)], &rat(1, 5), 7).is_err());
    }

    #[test]
    fn energy_examples() {
        let n = 11;
        let all: Vec<usize> = (0..n).collect();
        assert_eq!(energy(&all, &all, n), int(1));
        assert_eq!(energy(&[3], &[5], n), rat(1, 1331));
        let a = [1, 2, 5, 7];
        assert_eq!(energy(&a, &a, n), energy_direct(&a, &a, n));
        assert_eq!(energy4(&a, &a, &a, &a, n), energy(&a, &a, n));
    }

    #[test]
    fn freiman_examples() {
        let sq: Vec<(i64, ExactRational)> = (0..4).map(|x| (x, int(x * x))).collect();
        let r = freiman_check(&sq, 2, 1_000_003, FreimanTarget::Rationals, 1 << 20).unwrap();
        assert!(!r.holds);
        let (u, v) = r.witness.unwrap();
        assert_eq!(u.iter().sum::<i64>(), v.iter().sum::<i64>());
        let lin: Vec<(i64, ExactRational)> = (0..6).map(|x| (x, int(3 * x))).collect();
        for k in 1..5 {
            assert!(freiman_check(&lin, k, 101, FreimanTarget::Rationals, 1 << 20).unwrap().holds);
        }
        assert!(freiman_check(&lin, 30, 101, FreimanTarget::Rationals, 10).is_err());
    }

    #[test]
    fn empty_s_is_regular_at_rho() {
        let r = find_regular_radius(&[], &rat(1, 5), 101, &RegularityConfig::default()).unwrap();
        assert_eq!(r, rat(1, 5));
    }
}
