//! Certificates for `||beta + a . {alpha h}|| <= K/N` on many `h`.
//!
//! The solver is the tube-vector iteration: find an integer `eta` close to
//! the direction of the current `a` with `eta . alpha = 0 mod 1`, substitute
//! `h = q k`, and fold the integer-valued remainder into `beta` by keeping the
//! largest class of `k`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, QVec};
use crate::ratmod::{dist_circle, frac_q, has_denominator, int, is_prime, rat, to_f64, ExactRational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RbplError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("tube volume below 2^d; enlarge width or length")]
    VolumeCondition,
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("accumulated {0} lower-order terms, above the cap {1}")]
    TermCap(usize, usize),
    #[error("invalid certificate: {0}")]
    Certificate(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbplInstance {
    pub n: u64,
    pub d: usize,
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub a: Vec<ExactRational>,
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub alpha: Vec<ExactRational>,
    #[serde(with = "crate::ratmod::serde_q")]
    pub beta: ExactRational,
    #[serde(with = "crate::ratmod::serde_q")]
    pub k: ExactRational,
    pub h: Vec<i64>,
}

/// `sum_i a_i {alpha_i h}`
pub fn bracket_dot(a: &[ExactRational], alpha: &[ExactRational], h: i64) -> ExactRational {
    a.iter().zip(alpha).map(|(ai, al)| ai * frac_q(&(al * int(h)))).sum()
}

impl RbplInstance {
    pub fn new(
        n: u64,
        a: Vec<ExactRational>,
        alpha: Vec<ExactRational>,
        beta: ExactRational,
        k: ExactRational,
        h: Vec<i64>,
    ) -> Result<Self, RbplError> {
        if !is_prime(n) {
            return Err(RbplError::NotPrime(n));
        }
        if a.len() != alpha.len() {
            return Err(RbplError::Instance("a and alpha differ in length".into()));
        }
        if let Some(x) = alpha.iter().find(|x| !has_denominator(x, n)) {
            return Err(RbplError::Instance(format!("alpha entry {x} lacks denominator {n}")));
        }
        let mut h: Vec<i64> = h.iter().map(|x| x.rem_euclid(n as i64)).collect();
        h.sort_unstable();
        h.dedup();
        let bound = &k / int(n as i64);
        for &x in &h {
            if dist_circle(&(&beta + bracket_dot(&a, &alpha, x))) > bound {
                return Err(RbplError::Instance(format!("hypothesis fails at h = {x}")));
            }
        }
        Ok(RbplInstance { n, d: a.len(), a, alpha, beta, k, h })
    }

    /// All `h` in `[N]` satisfying the hypothesis.
    pub fn good_set(n: u64, a: &[ExactRational], alpha: &[ExactRational], beta: &ExactRational, k: &ExactRational) -> Vec<i64> {
        let bound = k / int(n as i64);
        (0..n as i64)
            .filter(|&x| dist_circle(&(beta + bracket_dot(a, alpha, x))) <= bound)
            .collect()
    }

    pub fn delta(&self) -> ExactRational {
        rat(self.h.len() as i64, self.n as i64)
    }

    /// `max(1, ceil |a|_inf)`
    pub fn m_bound(&self) -> ExactRational {
        let m = self.a.iter().map(|x| x.abs()).max().unwrap_or_else(ExactRational::zero);
        let m = m.ceil();
        if m < ExactRational::one() {
            ExactRational::one()
        } else {
            m
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WCondition {
    /// `|w . a| <= bound`
    Abs(#[serde(with = "crate::ratmod::serde_q")] ExactRational),
    /// `||w . a||_{R/Z} = 0`
    Mod1,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub d: usize,
    pub w: Vec<Vec<i64>>,
    pub eta: Vec<Vec<i64>>,
    pub condition: WCondition,
    /// `|w_i . a|`, or `||w_i . a||` under `Mod1`
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub w_values: Vec<ExactRational>,
    /// `||eta_j . alpha||`
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub eta_values: Vec<ExactRational>,
}

impl Certificate {
    pub fn r(&self) -> usize {
        self.w.len()
    }

    pub fn height(&self) -> i64 {
        self.w.iter().chain(&self.eta).flatten().map(|x| x.abs()).max().unwrap_or(0)
    }

    fn build(d: usize, w: Vec<Vec<i64>>, eta: Vec<Vec<i64>>, condition: WCondition, a: &[ExactRational], alpha: &[ExactRational]) -> Self {
        let w_values = w
            .iter()
            .map(|v| {
                let x = linalg::dot_int(v, a);
                match condition {
                    WCondition::Abs(_) => x.abs(),
                    WCondition::Mod1 => dist_circle(&x),
                }
            })
            .collect();
        let eta_values = eta.iter().map(|v| dist_circle(&linalg::dot_int(v, alpha))).collect();
        Certificate { d, w, eta, condition, w_values, eta_values }
    }

    /// The common kernel of the `eta`s, as a basis.
    pub fn eta_kernel(&self) -> Vec<QVec> {
        linalg::kernel(&linalg::to_q_mat(&self.eta), self.d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub violations: Vec<String>,
    pub max_height: i64,
}

/// Exact recheck of a certificate against `a` and `alpha`.
pub fn verify(a: &[ExactRational], alpha: &[ExactRational], cert: &Certificate) -> VerifyReport {
    let d = a.len();
    let mut v = Vec::new();
    if cert.d != d || alpha.len() != d {
        v.push(format!("dimension mismatch: certificate {} vs instance {}", cert.d, d));
    }
    if cert.w.iter().chain(&cert.eta).any(|x| x.len() != d) {
        v.push("vector of wrong length".into());
        return VerifyReport { pass: false, violations: v, max_height: cert.height() };
    }
    if cert.w.len() + cert.eta.len() != d {
        v.push(format!("r + #eta = {} != d = {}", cert.w.len() + cert.eta.len(), d));
    }
    if linalg::rank_int(&cert.w) != cert.w.len() {
        v.push("w vectors dependent".into());
    }
    if linalg::rank_int(&cert.eta) != cert.eta.len() {
        v.push("eta vectors dependent".into());
    }
    for (i, w) in cert.w.iter().enumerate() {
        for (j, e) in cert.eta.iter().enumerate() {
            if linalg::dot_i64(w, e) != 0 {
                v.push(format!("<w_{i}, eta_{j}> != 0"));
            }
        }
        let x = linalg::dot_int(w, a);
        match &cert.condition {
            WCondition::Abs(b) => {
                if x.abs() > *b {
                    v.push(format!("|w_{i} . a| = {} exceeds {}", x.abs(), b));
                }
            }
            WCondition::Mod1 => {
                if !dist_circle(&x).is_zero() {
                    v.push(format!("||w_{i} . a|| = {} != 0", dist_circle(&x)));
                }
            }
        }
    }
    for (j, e) in cert.eta.iter().enumerate() {
        let x = dist_circle(&linalg::dot_int(e, alpha));
        if !x.is_zero() {
            v.push(format!("||eta_{j} . alpha|| = {x} != 0"));
        }
    }
    VerifyReport { pass: v.is_empty(), violations: v, max_height: cert.height() }
}

fn ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / k as f64 * ball_volume(k - 2),
    }
}

/// Lower bound for the volume of `{x : |x| <= length, dist(x, R a) <= width}`.
pub fn tube_volume(d: usize, width: f64, length: f64) -> f64 {
    if d == 0 {
        return 1.0;
    }
    let half = (length * length - width * width).max(0.0).sqrt();
    2.0 * half * ball_volume(d - 1) * width.powi(d as i32 - 1)
}

fn norm2(v: &[i64]) -> i128 {
    v.iter().map(|&x| x as i128 * x as i128).sum()
}

fn first_nonzero_positive(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Every nonzero `eta` with first nonzero entry positive, `|eta| <= length`
/// and distance at most `width` from the line `R a`, sorted by length then
/// lexicographically.
pub fn tube_points(a: &[ExactRational], width: &ExactRational, length: &ExactRational) -> Vec<Vec<i64>> {
    let d = a.len();
    let a2: ExactRational = a.iter().map(|x| x * x).sum();
    if d == 0 || a2.is_zero() {
        return Vec::new();
    }
    let af: Vec<f64> = a.iter().map(to_f64).collect();
    let an = af.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: Vec<f64> = af.iter().map(|x| x / an).collect();
    let k = (0..d).max_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs())).expect("d > 0");
    let w = to_f64(width);
    let lmax = length.floor().to_integer().to_i64().expect("length fits i64");
    let l2 = length * length;
    let w2a2 = width * width * &a2;
    let tol = 1e-9 * (1.0 + lmax as f64);
    let mut out = Vec::new();
    let mut cur = vec![0i64; d];
    for ek in -lmax..=lmax {
        let s0 = (ek as f64 - w) / u[k];
        let s1 = (ek as f64 + w) / u[k];
        let (slo, shi) = if s0 < s1 { (s0, s1) } else { (s1, s0) };
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|i| {
                if i == k {
                    return (ek, ek);
                }
                let (p, q) = (slo * u[i], shi * u[i]);
                let lo = (p.min(q) - w - tol).ceil() as i64;
                let hi = (p.max(q) + w + tol).floor() as i64;
                (lo.max(-lmax), hi.min(lmax))
            })
            .collect();
        fill(&ranges, 0, &mut cur, &mut |eta| {
            if eta.iter().all(|&x| x == 0) || !first_nonzero_positive(eta) {
                return;
            }
            if int(norm2(eta) as i64) > l2 {
                return;
            }
            let dot = linalg::dot_int(eta, a);
            let dist2 = int(norm2(eta) as i64) * &a2 - &dot * &dot;
            if dist2 <= w2a2 {
                out.push(eta.to_vec());
            }
        });
    }
    out.sort_by(|x, y| norm2(x).cmp(&norm2(y)).then_with(|| x.cmp(y)));
    out
}

fn fill(ranges: &[(i64, i64)], i: usize, cur: &mut Vec<i64>, f: &mut impl FnMut(&[i64])) {
    if i == ranges.len() {
        f(cur);
        return;
    }
    for x in ranges[i].0..=ranges[i].1 {
        cur[i] = x;
        fill(ranges, i + 1, cur, f);
    }
}

/// Shortest (then lexicographically smallest) nonzero integer vector in the tube.
pub fn tube_vector(a: &[ExactRational], width: &ExactRational, length: &ExactRational) -> Result<Vec<i64>, RbplError> {
    if a.iter().all(|x| x.is_zero()) {
        return Err(RbplError::Instance("tube direction is zero".into()));
    }
    match tube_points(a, width, length).into_iter().next() {
        Some(v) => Ok(v),
        None if tube_volume(a.len(), to_f64(width), to_f64(length)) >= 2f64.powi(a.len() as i32) => {
            Err(RbplError::Invariant("Minkowski region holds no lattice point".into()))
        }
        None => Err(RbplError::VolumeCondition),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RbplConfig {
    /// Below this modulus the solver reports degeneracy.
    pub small_n: u64,
    /// Tube width; `None` means `delta_j / (3^d M 2d)`.
    #[serde(with = "opt_q")]
    pub width: Option<ExactRational>,
    /// Largest tube length tried.
    pub max_length: i64,
    /// Stop when `|a_j|_inf <= w_slack K / N`.
    #[serde(with = "crate::ratmod::serde_q")]
    pub w_slack: ExactRational,
    pub term_cap: usize,
}

mod opt_q {
    use super::ExactRational;
    use crate::ratmod::{format_rational, parse_rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<ExactRational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(q) => s.serialize_some(&format_rational(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ExactRational>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|t| parse_rational(&t).map_err(serde::de::Error::custom)).transpose()
    }
}

impl Default for RbplConfig {
    fn default() -> Self {
        RbplConfig { small_n: 10, width: None, max_length: 1 << 16, w_slack: int(1), term_cap: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbplStep {
    pub eta: Vec<i64>,
    pub pivot: usize,
    pub q: i64,
    #[serde(with = "crate::ratmod::serde_q")]
    pub width: ExactRational,
    pub length: i64,
    /// Class size kept after grouping, over `N`.
    #[serde(with = "crate::ratmod::serde_q")]
    pub delta: ExactRational,
    /// `N max ||beta_j + a_j . {alpha k}||` on the kept class.
    #[serde(with = "crate::ratmod::serde_q")]
    pub k_measured: ExactRational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateReport {
    pub reason: String,
    pub steps: Vec<RbplStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RbplOutcome {
    Certificate { cert: Certificate, steps: Vec<RbplStep> },
    Degenerate(DegenerateReport),
}

impl RbplOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            RbplOutcome::Certificate { cert, .. } => Some(cert),
            RbplOutcome::Degenerate(_) => None,
        }
    }
}

fn sup_norm(v: &[ExactRational]) -> ExactRational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(ExactRational::zero)
}

fn mod_inverse(q: i64, n: i64) -> Option<i64> {
    let (mut r0, mut r1) = (q.rem_euclid(n), n);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let t = r0 / r1;
        (r0, r1) = (r1, r0 - t * r1);
        (s0, s1) = (s1, s0 - t * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(n))
}

pub fn solve(inst: &RbplInstance, cfg: &RbplConfig) -> Result<RbplOutcome, RbplError> {
    if !is_prime(inst.n) {
        return Err(RbplError::NotPrime(inst.n));
    }
    let d = inst.d;
    let n = inst.n as i64;
    let degenerate = |reason: String, steps: Vec<RbplStep>| Ok(RbplOutcome::Degenerate(DegenerateReport { reason, steps }));
    if inst.n < cfg.small_n {
        return degenerate(format!("N = {} below the cutoff {}", inst.n, cfg.small_n), Vec::new());
    }
    let m = inst.m_bound();
    let stop = &cfg.w_slack * &inst.k / int(n);
    let mut a_t = inst.a.clone();
    let mut beta = inst.beta.clone();
    let mut hs = inst.h.clone();
    let mut delta = inst.delta();
    let mut used = vec![false; d];
    // w[i] is the integer vector with a_t[i] = w[i] . a
    let mut w: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| (i == j) as i64).collect()).collect();
    let mut etas: Vec<Vec<i64>> = Vec::new();
    let mut steps: Vec<RbplStep> = Vec::new();
    loop {
        if sup_norm(&a_t) <= stop {
            break;
        }
        if etas.len() * (d + 1) > cfg.term_cap {
            return Err(RbplError::TermCap(etas.len() * (d + 1), cfg.term_cap));
        }
        let free: Vec<usize> = (0..d).filter(|&i| !used[i]).collect();
        let a_free: Vec<ExactRational> = free.iter().map(|&i| a_t[i].clone()).collect();
        let width = cfg.width.clone().unwrap_or_else(|| {
            &delta / (int(3).pow(d as i32) * &m * int(2 * d as i64))
        });
        // grow the tube until it holds an annihilating vector
        let mut length = 1i64;
        let found = loop {
            let pts = tube_points(&a_free, &width, &int(length));
            let hit = pts.into_iter().find(|p| {
                let e = embed(p, &free, d);
                dist_circle(&linalg::dot_int(&e, &inst.alpha)).is_zero()
            });
            if let Some(p) = hit {
                break Some(embed(&p, &free, d));
            }
            if length >= cfg.max_length {
                break None;
            }
            length = (length * 2).min(cfg.max_length);
        };
        let Some(eta) = found else {
            return degenerate(
                format!("no annihilating tube vector up to length {} (width {})", cfg.max_length, width),
                steps,
            );
        };
        let pivot = (0..d).find(|&i| eta[i] != 0).expect("nonzero");
        let q = eta[pivot];
        let Some(q_inv) = mod_inverse(q, n) else {
            return degenerate(format!("pivot {q} not invertible mod {n}"), steps);
        };
        // a_{j+1} and w^{j+1}
        let mut a_next = vec![ExactRational::zero(); d];
        let mut w_next = w.clone();
        for i in 0..d {
            if used[i] || i == pivot {
                continue;
            }
            a_next[i] = int(q) * &a_t[i] - int(eta[i]) * &a_t[pivot];
            w_next[i] = (0..d).map(|c| q * w[i][c] - eta[i] * w[pivot][c]).collect();
        }
        // h = q k: a . {alpha q k} = a_next . {alpha k} + L(k), L integer combination of a
        let mut classes: BTreeMap<ExactRational, Vec<i64>> = BTreeMap::new();
        for &h in &hs {
            let k = (h * q_inv).rem_euclid(n);
            let lhs = bracket_dot(&a_t, &inst.alpha, h);
            let l = lhs - bracket_dot(&a_next, &inst.alpha, k);
            classes.entry(frac_q(&l)).or_default().push(k);
        }
        let (shift, mut ks) = classes
            .into_iter()
            .max_by(|x, y| {
                x.1.len().cmp(&y.1.len()).then_with(|| {
                    let mx = x.1.iter().min();
                    let my = y.1.iter().min();
                    my.cmp(&mx)
                })
            })
            .expect("nonempty h set");
        ks.sort_unstable();
        let beta_next = &beta + &shift;
        let mut k_meas = ExactRational::zero();
        for &k in &ks {
            let before = &beta + bracket_dot(&a_t, &inst.alpha, (k * q).rem_euclid(n));
            let after = &beta_next + bracket_dot(&a_next, &inst.alpha, k);
            if !frac_q(&(&before - &after)).is_zero() {
                return Err(RbplError::Invariant(format!("substitution identity fails at k = {k}")));
            }
            k_meas = k_meas.max(dist_circle(&after) * int(n));
        }
        for i in 0..d {
            if used[i] || i == pivot {
                continue;
            }
            if linalg::dot_int(&w_next[i], &inst.a) != a_next[i] {
                return Err(RbplError::Invariant(format!("component {i} is not w . a")));
            }
        }
        used[pivot] = true;
        etas.push(eta.clone());
        for i in (0..d).filter(|&i| !used[i]) {
            if let Some(e) = etas.iter().find(|e| linalg::dot_i64(e, &w_next[i]) != 0) {
                return Err(RbplError::Invariant(format!("w_{i} not annihilated by {e:?}")));
            }
        }
        delta = rat(ks.len() as i64, n);
        steps.push(RbplStep { eta, pivot, q, width, length, delta: delta.clone(), k_measured: k_meas });
        a_t = a_next;
        w = w_next;
        beta = beta_next;
        hs = ks;
    }
    let ws: Vec<Vec<i64>> = (0..d).filter(|&i| !used[i]).map(|i| w[i].clone()).collect();
    let cert = Certificate::build(d, ws, etas, WCondition::Abs(stop), &inst.a, &inst.alpha);
    let report = verify(&inst.a, &inst.alpha, &cert);
    if !report.pass {
        return Err(RbplError::Invariant(report.violations.join("; ")));
    }
    Ok(RbplOutcome::Certificate { cert, steps })
}

fn embed(p: &[i64], free: &[usize], d: usize) -> Vec<i64> {
    let mut e = vec![0; d];
    for (x, &i) in p.iter().zip(free) {
        e[i] = *x;
    }
    e
}

fn box_vectors(d: usize, height: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let ranges = vec![(-height, height); d];
    let mut cur = vec![0; d];
    fill(&ranges, 0, &mut cur, &mut |v| {
        if first_nonzero_positive(v) {
            out.push(v.to_vec());
        }
    });
    out.sort_by(|x, y| {
        let hx = x.iter().map(|t| t.abs()).max();
        let hy = y.iter().map(|t| t.abs()).max();
        hx.cmp(&hy).then_with(|| norm2(x).cmp(&norm2(y))).then_with(|| x.cmp(y))
    });
    out
}

fn greedy_independent(vs: impl IntoIterator<Item = Vec<i64>>, limit: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for v in vs {
        if out.len() == limit {
            break;
        }
        let mut trial = out.clone();
        trial.push(v);
        if linalg::rank_int(&trial) == trial.len() {
            out = trial;
        }
    }
    out
}

/// Exhaustive search over integer vectors of sup-norm at most `height`.
///
/// Returns a certificate whose `eta`-span has the smallest possible dimension
/// among spans of annihilating vectors in the box, or `None`.
pub fn brute_force(
    a: &[ExactRational],
    alpha: &[ExactRational],
    threshold: &ExactRational,
    height: i64,
) -> Option<Certificate> {
    let d = a.len();
    let all = box_vectors(d, height);
    let rel: Vec<Vec<i64>> = all
        .iter()
        .filter(|v| dist_circle(&linalg::dot_int(v, alpha)).is_zero())
        .cloned()
        .collect();
    let small: Vec<Vec<i64>> = all
        .iter()
        .filter(|v| linalg::dot_int(v, a).abs() <= *threshold)
        .cloned()
        .collect();
    let try_span = |basis: &[Vec<i64>]| -> Option<Certificate> {
        let ws = greedy_independent(
            small.iter().filter(|w| basis.iter().all(|e| linalg::dot_i64(w, e) == 0)).cloned(),
            d - basis.len(),
        );
        (ws.len() + basis.len() == d).then(|| {
            Certificate::build(d, ws, basis.to_vec(), WCondition::Abs(threshold.clone()), a, alpha)
        })
    };
    // spans of dimension s, built from independent relation subsets in order
    for s in 0..=d {
        let mut seen: Vec<Vec<QVec>> = Vec::new();
        let mut found = None;
        subsets(&rel, s, &mut Vec::new(), 0, &mut |basis| {
            if found.is_some() {
                return;
            }
            if linalg::rank_int(basis) != basis.len() {
                return;
            }
            let rows = linalg::to_q_mat(basis);
            let key = linalg::rref(&rows).0;
            if seen.contains(&key) {
                return;
            }
            seen.push(key);
            found = try_span(basis);
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

fn subsets(pool: &[Vec<i64>], s: usize, cur: &mut Vec<Vec<i64>>, start: usize, f: &mut impl FnMut(&[Vec<i64>])) {
    if cur.len() == s {
        f(cur);
        return;
    }
    for i in start..pool.len() {
        cur.push(pool[i].clone());
        // prune dependent prefixes
        if linalg::rank_int(cur) == cur.len() {
            subsets(pool, s, cur, i + 1, f);
        }
        cur.pop();
    }
}

/// Turns a certificate for `((a, 1), (alpha, beta))` in dimension `d + 1`
/// into one for `(a, alpha)` with `||w . a|| = 0`.
pub fn extend_affine(
    cert: &Certificate,
    a: &[ExactRational],
    alpha: &[ExactRational],
    beta: &ExactRational,
) -> Result<Certificate, RbplError> {
    let d = a.len();
    let mut a1 = a.to_vec();
    a1.push(int(1));
    let mut al1 = alpha.to_vec();
    al1.push(beta.clone());
    let mut input = cert.clone();
    input.condition = WCondition::Mod1;
    let rep = verify(&a1, &al1, &input);
    if !rep.pass {
        return Err(RbplError::Certificate(rep.violations.join("; ")));
    }
    let split = |v: &Vec<i64>| (v[..d].to_vec(), v[d]);
    let us: Vec<(Vec<i64>, i64)> = cert.w.iter().map(split).collect();
    let ms: Vec<(Vec<i64>, i64)> = cert.eta.iter().map(split).collect();
    let (w_out, eta_out) = match ms.iter().position(|(_, nu)| *nu != 0) {
        Some(p) => {
            let (mu1, nu1) = &ms[p];
            let etas = ms
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != p)
                .map(|(_, (mu, nu))| (0..d).map(|c| nu * mu1[c] - mu[c] * nu1).collect::<Vec<i64>>())
                .map(|v| reduce_content(&v))
                .collect();
            (us.into_iter().map(|(u, _)| u).collect(), etas)
        }
        None => {
            let etas: Vec<Vec<i64>> = ms.into_iter().map(|(mu, _)| mu).collect();
            let ws = greedy_independent(us.into_iter().map(|(u, _)| u).filter(|u| u.iter().any(|&x| x != 0)), d - etas.len());
            (ws, etas)
        }
    };
    let out = Certificate::build(d, w_out, eta_out, WCondition::Mod1, a, alpha);
    let rep = verify(a, alpha, &out);
    if !rep.pass {
        return Err(RbplError::Invariant(rep.violations.join("; ")));
    }
    Ok(out)
}

fn reduce_content(v: &[i64]) -> Vec<i64> {
    let g = v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
    if g <= 1 {
        return v.to_vec();
    }
    v.iter().map(|x| x / g).collect()
}

/// Planted instance: `a = c eta*` plus optional noise, `alpha` annihilated by `eta*`.
#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub instance: RbplInstance,
    pub eta_star: Vec<i64>,
}

/// Builds a planted instance from integer data: `eta_star` (primitive),
/// `b` (an integer vector whose pivot entry is overwritten so that
/// `eta_star . b = 0 mod N`), the multiplier `c`, the noise vector and a base
/// point `h0` that fixes `beta`.
pub fn planted_instance(
    n: u64,
    eta_star: &[i64],
    b: &[i64],
    c: &ExactRational,
    noise: &[ExactRational],
    h0: i64,
) -> Result<PlantedInstance, RbplError> {
    let d = eta_star.len();
    let nn = n as i64;
    let p = (0..d)
        .find(|&i| eta_star[i] != 0)
        .ok_or_else(|| RbplError::Instance("eta* is zero".into()))?;
    let inv = mod_inverse(eta_star[p], nn).ok_or_else(|| RbplError::Instance("pivot not invertible".into()))?;
    let mut b = b.to_vec();
    let rest: i64 = (0..d).filter(|&i| i != p).map(|i| eta_star[i] * b[i]).sum();
    b[p] = (-rest).rem_euclid(nn) * inv % nn;
    let alpha: Vec<ExactRational> = b.iter().map(|&x| rat(x.rem_euclid(nn), nn)).collect();
    let a: Vec<ExactRational> = (0..d).map(|i| c * int(eta_star[i]) + &noise[i]).collect();
    let beta = -frac_q(&bracket_dot(&a, &alpha, h0));
    let eps = noise.iter().map(|x| x.abs()).max().unwrap_or_else(ExactRational::zero);
    let h_inf = eta_star.iter().map(|x| x.abs()).max().unwrap_or(1);
    // K/N covers both |noise . {alpha h}| and the noise left after one step
    let k = int(4 * d as i64 * h_inf) * eps * int(nn);
    let hs = RbplInstance::good_set(n, &a, &alpha, &beta, &k);
    let instance = RbplInstance::new(n, a, alpha, beta, k, hs)?;
    Ok(PlantedInstance { instance, eta_star: eta_star.to_vec() })
}

/// Random valid `(d+1)`-certificate data for the affine extension, with or
/// without an `eta` touching the last coordinate.
pub struct AffineCase {
    pub cert: Certificate,
    pub a: Vec<ExactRational>,
    pub alpha: Vec<ExactRational>,
    pub beta: ExactRational,
}

/// Builds an affine case from integer `etas` in dimension `d + 1`, integer
/// weights for `alpha`, rational weights `t` for `a` and an integer shift.
pub fn affine_case(
    n: u64,
    etas: &[Vec<i64>],
    alpha_weights: &[i64],
    t: &[ExactRational],
    shift: &[i64],
) -> Result<AffineCase, RbplError> {
    let d1 = etas.first().map_or(shift.len(), |e| e.len());
    let d = d1 - 1;
    if linalg::rank_int(etas) != etas.len() {
        return Err(RbplError::Instance("etas dependent".into()));
    }
    let ws = if etas.is_empty() {
        (0..d1).map(|i| (0..d1).map(|j| (i == j) as i64).collect()).collect()
    } else {
        linalg::kernel_int(etas, d1)
    };
    let nn = n as i64;
    let mut b = vec![0i64; d1];
    for (w, &r) in ws.iter().zip(alpha_weights.iter().cycle()) {
        for c in 0..d1 {
            b[c] += r * w[c];
        }
    }
    let al1: Vec<ExactRational> = b.iter().map(|&x| rat(x.rem_euclid(nn), nn)).collect();
    // a~ = sum t_j eta_j + z with last coordinate 1
    let mut a1: Vec<ExactRational> = (0..d1).map(|c| int(shift[c])).collect();
    let mut t = t.to_vec();
    if let Some(p) = etas.iter().position(|e| e[d] != 0) {
        let others: ExactRational = (0..etas.len()).filter(|&j| j != p).map(|j| &t[j] * int(etas[j][d])).sum();
        t[p] = (int(shift[d]) - others) / int(etas[p][d]);
        a1[d] = int(1) - int(shift[d]);
    } else {
        a1[d] = int(1);
    }
    for (e, tj) in etas.iter().zip(&t) {
        for c in 0..d1 {
            a1[c] += tj * int(e[c]);
        }
    }
    debug_assert!(a1[d] == int(1));
    let cert = Certificate::build(d1, ws, etas.to_vec(), WCondition::Mod1, &a1, &al1);
    Ok(AffineCase { cert, a: a1[..d].to_vec(), alpha: al1[..d].to_vec(), beta: al1[d].clone() })
}

fn random_primitive<R: Rng>(rng: &mut R, d: usize, h: i64) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..d).map(|_| rng.gen_range(-h..=h)).collect();
        let g = v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x));
        if g == 1 {
            return if first_nonzero_positive(&v) { v } else { v.iter().map(|x| -x).collect() };
        }
    }
}

/// Random planted instance; `noisy` adds a perturbation of `a` off the line `R eta*`,
/// small enough to keep `eta*` inside the solver's tube.
pub fn random_planted<R: Rng>(rng: &mut R, d: usize, n: u64, noisy: bool) -> Result<PlantedInstance, RbplError> {
    let eta = random_primitive(rng, d, 2);
    let b: Vec<i64> = (0..d).map(|_| rng.gen_range(0..n as i64)).collect();
    let c = rat(rng.gen_range(1..=7) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=4));
    let noise: Vec<ExactRational> = (0..d)
        .map(|_| if noisy { rat(rng.gen_range(-3..=3), 100_000 * n as i64) } else { int(0) })
        .collect();
    let h0 = rng.gen_range(0..n as i64);
    planted_instance(n, &eta, &b, &c, &noise, h0)
}

/// Random valid affine case in dimension `d + 1`; `nu_branch` selects
/// whether some `eta` has a nonzero last coordinate.
pub fn random_affine_case<R: Rng>(rng: &mut R, d: usize, n: u64, nu_branch: bool) -> Result<AffineCase, RbplError> {
    let d1 = d + 1;
    let s = if nu_branch { rng.gen_range(1..=d1) } else { rng.gen_range(0..=d) };
    loop {
        let mut etas: Vec<Vec<i64>> = (0..s)
            .map(|_| {
                let mut v = random_primitive(rng, d1, 2);
                if !nu_branch {
                    v[d] = 0;
                }
                v
            })
            .collect();
        if nu_branch && etas.iter().all(|e| e[d] == 0) {
            etas[0][d] = rng.gen_range(1..=2);
        }
        if !nu_branch && s > 0 && etas.iter().any(|e| e.iter().all(|&x| x == 0)) {
            continue;
        }
        if linalg::rank_int(&etas) != s {
            continue;
        }
        let weights: Vec<i64> = (0..d1).map(|_| rng.gen_range(0..n as i64)).collect();
        let t: Vec<ExactRational> = (0..s).map(|_| rat(rng.gen_range(-5..=5), rng.gen_range(1..=6))).collect();
        let shift: Vec<i64> = (0..d1).map(|_| rng.gen_range(-2..=2)).collect();
        return affine_case(n, &etas, &weights, &t, &shift);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<ExactRational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn tube_examples() {
        assert_eq!(tube_vector(&q(&[1, 0, 0]), &rat(1, 10), &int(2)).unwrap(), vec![1, 0, 0]);
        assert_eq!(tube_vector(&q(&[1, 1]), &rat(1, 10), &int(3)).unwrap(), vec![1, 1]);
        assert_eq!(tube_vector(&q(&[0, 0]), &rat(1, 10), &int(3)), Err(RbplError::Instance("tube direction is zero".into())));
        assert_eq!(tube_vector(&[int(1), rat(13, 8)], &rat(1, 100), &int(1)), Err(RbplError::VolumeCondition));
    }

    #[test]
    fn zero_a_gives_full_w() {
        let inst = RbplInstance::new(31, q(&[0, 0]), vec![rat(3, 31), rat(5, 31)], int(0), int(0), (0..31).collect()).unwrap();
        let cert = solve(&inst, &RbplConfig::default()).unwrap().certificate().cloned().unwrap();
        assert_eq!(cert.w, vec![vec![1, 0], vec![0, 1]]);
        assert!(cert.eta.is_empty());
    }

    #[test]
    fn brute_force_one_dim() {
        let cert = brute_force(&[int(1)], &[rat(1, 7)], &int(0), 7).unwrap();
        assert_eq!(cert.eta, vec![vec![7]]);
        assert!(cert.w.is_empty());
        assert!(brute_force(&[int(1)], &[rat(1, 7)], &int(0), 6).is_none());
    }

    #[test]
    fn non_prime_rejected() {
        assert_eq!(
            RbplInstance::new(33, q(&[0]), vec![int(0)], int(0), int(0), vec![]),
            Err(RbplError::NotPrime(33))
        );
    }

    #[test]
    fn pure_beta_relation() {
        let d = 3;
        let mut etas = vec![vec![0; d + 1]];
        etas[0][d] = 1;
        let case = affine_case(31, &etas, &[1, 2, 3], &[rat(1, 2)], &[0, 1, 0, 0]).unwrap();
        let out = extend_affine(&case.cert, &case.a, &case.alpha, &case.beta).unwrap();
        assert!(out.eta.is_empty());
        assert_eq!(out.w.len(), d);
    }
}
