//! Periodic Fourier expansions of products of fractional parts.
//!
//! Each factor is a smooth function of one or two fractional parts
//! `u = {theta(n, h)}` with denominators dividing the modulus. It is
//! multiplied by a bump that equals 1 on `[-1/2 + eps, 1/2 - eps]`, sampled
//! on a grid containing every value `u` can take and expanded by FFT. A torus
//! frequency `a` turns into the `Z/NZ` frequency `a * theta`, so truncated
//! factor expansions bin onto `Z/N x Z/H`. The product is formed pointwise
//! and transformed back; the error is measured exhaustively against the
//! exact function. The truncation radius and `eps` are chosen adaptively.

use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brackets::BracketTerm;
use crate::gowers::FnZN;
use crate::ratmod::{big, denominator_divides, frac_q, int, rat, to_f64, ExactRational};

pub use crate::gowers::{dft, idft};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error("phase {0} does not have denominator dividing the modulus")]
    NonPeriodic(String),
    #[error("only fractional-part products can be expanded, got {0}")]
    Unsupported(String),
    #[error("coefficient l1 bound {bound} exceeds the budget {budget}")]
    BudgetExceeded { bound: f64, budget: f64 },
    #[error("no expansion within {delta} found (best error {best})")]
    NotConverged { delta: f64, best: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FourierConfig {
    /// Smoothness order 0..=3 of the bump's transition.
    pub smooth_order: u32,
    /// Upper limit on the l1 bound of an expansion.
    pub budget: f64,
    /// Exponent `C` in the degeneracy threshold `N <= (delta / (2^d k))^-C`.
    pub degeneracy_exponent: f64,
    /// Coefficients smaller than this are dropped from the output.
    pub drop_tol: f64,
    /// Grid points per unit of `1/eps` when sampling a factor.
    pub oversample: f64,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig { smooth_order: 3, budget: 1e9, degeneracy_exponent: 1.0, drop_tol: 1e-14, oversample: 4.0 }
    }
}

/// Affine phase `slope_n * n + slope_h * h + offset` on `Z/N x Z/H`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phase2 {
    #[serde(with = "crate::ratmod::serde_q")]
    pub slope_n: ExactRational,
    #[serde(with = "crate::ratmod::serde_q")]
    pub slope_h: ExactRational,
    #[serde(with = "crate::ratmod::serde_q")]
    pub offset: ExactRational,
}

impl Phase2 {
    pub fn new(slope_n: ExactRational, slope_h: ExactRational, offset: ExactRational) -> Self {
        Phase2 { slope_n, slope_h, offset }
    }

    pub fn in_n(slope: ExactRational) -> Self {
        Phase2::new(slope, ExactRational::zero(), ExactRational::zero())
    }

    pub fn in_h(slope: ExactRational) -> Self {
        Phase2::new(ExactRational::zero(), slope, ExactRational::zero())
    }

    pub fn constant(c: ExactRational) -> Self {
        Phase2::new(ExactRational::zero(), ExactRational::zero(), c)
    }

    pub fn frac_at(&self, n: i64, h: i64) -> ExactRational {
        frac_q(&(&self.slope_n * int(n) + &self.slope_h * int(h) + &self.offset))
    }

    /// `{phase}` vanishes identically.
    pub fn is_trivial(&self) -> bool {
        self.slope_n.is_integer() && self.slope_h.is_integer() && self.offset.is_integer()
    }

    fn check(&self, n: u64, h: u64) -> Result<(), FourierError> {
        let ok = denominator_divides(&self.slope_n, &BigInt::from(n))
            && denominator_divides(&self.slope_h, &BigInt::from(h))
            && denominator_divides(&self.offset, &(BigInt::from(n) * h));
        if ok {
            Ok(())
        } else {
            Err(FourierError::NonPeriodic(format!("{}n + {}h + {}", self.slope_n, self.slope_h, self.offset)))
        }
    }
}

/// `a {p1} {p2}` on `[N] x [H]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilinearTerm {
    #[serde(with = "crate::ratmod::serde_q")]
    pub a: ExactRational,
    pub p1: Phase2,
    pub p2: Phase2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub coeff: Complex64,
    #[serde(with = "crate::ratmod::serde_q")]
    pub freq_n: ExactRational,
    #[serde(with = "crate::ratmod::serde_q")]
    pub freq_h: ExactRational,
}

/// `f(n, h) ~ sum_terms coeff * e(freq_n n + freq_h h)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierExpansion {
    pub n: u64,
    pub h: u64,
    pub terms: Vec<FourierTerm>,
    pub l1_bound: f64,
    pub measured_l1_error: f64,
    pub budget: f64,
    pub degenerate: bool,
    pub epsilon: f64,
    pub radius: usize,
}

impl FourierExpansion {
    pub fn eval(&self, n: i64, h: i64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * unit(to_f64(&(&t.freq_n * int(n) + &t.freq_h * int(h)))))
            .sum()
    }

    pub fn coeff_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    /// True when every frequency has denominator dividing `N` (resp. `H`).
    pub fn frequencies_periodic(&self) -> bool {
        let (nb, hb) = (BigInt::from(self.n), BigInt::from(self.h));
        self.terms
            .iter()
            .all(|t| denominator_divides(&t.freq_n, &nb) && denominator_divides(&t.freq_h, &hb))
    }

    /// Recomputes the mean absolute error against `target` over the whole domain.
    pub fn l1_error_against(&self, target: impl Fn(i64, i64) -> Complex64) -> f64 {
        let mut acc = 0.0;
        for n in 0..self.n as i64 {
            for h in 0..self.h as i64 {
                acc += (target(n, h) - self.eval(n, h)).norm();
            }
        }
        acc / (self.n * self.h) as f64
    }
}

fn unit(x: f64) -> Complex64 {
    let t = std::f64::consts::TAU * x;
    Complex64::new(t.cos(), t.sin())
}

/// Transition profile `S(s)` on `[0, 1]` with `S(0) = 0`, `S(1) = 1`.
fn smoothstep(order: u32, s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    match order {
        0 => s,
        1 => s * s * (3.0 - 2.0 * s),
        2 => s * s * s * (s * (6.0 * s - 15.0) + 10.0),
        _ => s.powi(4) * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s))),
    }
}

/// Bump on `(-1/2, 1/2]`: 1 on the plateau, smooth transition of width `eps`.
pub fn cutoff(order: u32, eps: f64, u: f64) -> f64 {
    smoothstep(order, (0.5 - u.abs()) / eps)
}

#[derive(Clone)]
enum Factor {
    Char { xn: ExactRational, xh: ExactRational },
    /// `e(a {p})`
    T1 { p: Phase2, a: f64 },
    /// `e(a {p1} {p2})`
    T2 { p1: Phase2, p2: Phase2, a: f64 },
}

impl Factor {
    fn exact(&self, n: i64, h: i64) -> Complex64 {
        match self {
            Factor::Char { xn, xh } => unit(to_f64(&(xn * int(n) + xh * int(h)))),
            Factor::T1 { p, a } => unit(a * to_f64(&p.frac_at(n, h))),
            Factor::T2 { p1, p2, a } => unit(a * to_f64(&p1.frac_at(n, h)) * to_f64(&p2.frac_at(n, h))),
        }
    }

    fn phases(&self) -> Vec<&Phase2> {
        match self {
            Factor::Char { .. } => vec![],
            Factor::T1 { p, .. } => vec![p],
            Factor::T2 { p1, p2, .. } => vec![p1, p2],
        }
    }
}

struct Grid2 {
    n: usize,
    h: usize,
    row: Arc<dyn Fft<f64>>,
    col: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Grid2 {
    fn new(n: usize, h: usize) -> Self {
        let mut p = FftPlanner::new();
        Grid2 {
            n,
            h,
            row: p.plan_fft_forward(h),
            col: p.plan_fft_forward(n),
            row_inv: p.plan_fft_inverse(h),
            col_inv: p.plan_fft_inverse(n),
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (row, col) = if inverse { (&self.row_inv, &self.col_inv) } else { (&self.row, &self.col) };
        for r in data.chunks_mut(self.h) {
            row.process(r);
        }
        let mut buf = vec![Complex64::zero(); self.n];
        for j in 0..self.h {
            for i in 0..self.n {
                buf[i] = data[i * self.h + j];
            }
            col.process(&mut buf);
            for i in 0..self.n {
                data[i * self.h + j] = buf[i];
            }
        }
        if !inverse {
            let s = 1.0 / (self.n * self.h) as f64;
            data.iter_mut().for_each(|x| *x *= s);
        }
    }
}

/// Centred integer for FFT index `j` of length `l`.
fn centred_index(j: usize, l: usize) -> i64 {
    if 2 * j > l {
        j as i64 - l as i64
    } else {
        j as i64
    }
}

/// Torus coefficients of a sampled factor, `(a, b, c_ab)` ordered by max(|a|,|b|).
struct TorusCoeffs {
    coeffs: Vec<(i64, i64, Complex64)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Kernel {
    /// `e(a u)` times the cutoff
    Lin,
    /// `e(a u v)` times the cutoff in each variable
    Bil,
    /// `e(u v)` on `[-1/2, 1/2]^2`, smoothly extended with period 2
    Box,
}

#[derive(Clone, Copy, PartialEq)]
struct TorusKey {
    kernel: Kernel,
    a: u64,
    l: usize,
    order: u32,
    eps: u64,
}

const TORUS_CACHE_LEN: usize = 8;

/// Recently sampled tables; the same kernel recurs across expansions.
static TORUS_CACHE: Mutex<Vec<(TorusKey, Arc<TorusCoeffs>)>> = Mutex::new(Vec::new());

fn torus_coeffs(kernel: Kernel, a: f64, l: usize, order: u32, eps: f64) -> Arc<TorusCoeffs> {
    let key = TorusKey { kernel, a: a.to_bits(), l, order, eps: eps.to_bits() };
    {
        let mut cache = TORUS_CACHE.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(i) = cache.iter().position(|(k, _)| *k == key) {
            let hit = cache.remove(i);
            let tc = hit.1.clone();
            cache.insert(0, hit);
            return tc;
        }
    }
    let tc = Arc::new(match kernel {
        Kernel::Lin => torus_coeffs_1d(move |u| unit(a * u), l, order, eps),
        Kernel::Bil => torus_coeffs_2d(move |u, v| unit(a * u * v), l, order, eps),
        Kernel::Box => box_coeffs(l, order),
    });
    let mut cache = TORUS_CACHE.lock().unwrap_or_else(|e| e.into_inner());
    cache.insert(0, (key, tc.clone()));
    cache.truncate(TORUS_CACHE_LEN);
    tc
}

fn torus_coeffs_1d(g: impl Fn(f64) -> Complex64, l: usize, order: u32, eps: f64) -> TorusCoeffs {
    let mut buf: Vec<Complex64> = (0..l)
        .map(|j| {
            let u = centred_index(j, l) as f64 / l as f64;
            g(u) * cutoff(order, eps, u)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(l).process(&mut buf);
    let s = 1.0 / l as f64;
    let mut coeffs: Vec<(i64, i64, Complex64)> =
        buf.iter().enumerate().map(|(j, c)| (centred_index(j, l), 0, c * s)).collect();
    coeffs.sort_by_key(|&(a, _, _)| (a.abs(), a));
    TorusCoeffs { coeffs }
}

fn torus_coeffs_2d(g: impl Fn(f64, f64) -> Complex64, l: usize, order: u32, eps: f64) -> TorusCoeffs {
    let mut data: Vec<Complex64> = Vec::with_capacity(l * l);
    let cut: Vec<f64> = (0..l).map(|j| cutoff(order, eps, centred_index(j, l) as f64 / l as f64)).collect();
    for i in 0..l {
        let u = centred_index(i, l) as f64 / l as f64;
        for j in 0..l {
            let v = centred_index(j, l) as f64 / l as f64;
            data.push(g(u, v) * cut[i] * cut[j]);
        }
    }
    Grid2::new(l, l).transform(&mut data, false);
    let mut coeffs: Vec<(i64, i64, Complex64)> = data
        .iter()
        .enumerate()
        .map(|(k, c)| (centred_index(k / l, l), centred_index(k % l, l), *c))
        .collect();
    coeffs.sort_by_key(|&(a, b, _)| (a.abs().max(b.abs()), a, b));
    TorusCoeffs { coeffs }
}

/// Period-2 grid of `l` points per axis for the box kernel.
fn box_coeffs(l: usize, order: u32) -> TorusCoeffs {
    let step = 2.0 / l as f64;
    let coord = |j: usize| centred_index(j, l) as f64 * step;
    let mut data = Vec::with_capacity(l * l);
    for i in 0..l {
        let x = coord(i);
        let cx = cutoff(order, 0.5, x.abs() - 0.5);
        let cx = if x.abs() <= 0.5 { 1.0 } else { cx };
        for j in 0..l {
            let y = coord(j);
            let cy = if y.abs() <= 0.5 { 1.0 } else { cutoff(order, 0.5, y.abs() - 0.5) };
            data.push(unit(x * y) * cx * cy);
        }
    }
    Grid2::new(l, l).transform(&mut data, false);
    let mut coeffs: Vec<(i64, i64, Complex64)> = data
        .iter()
        .enumerate()
        .map(|(k, c)| (centred_index(k / l, l), centred_index(k % l, l), *c))
        .collect();
    coeffs.sort_by_key(|&(a, b, _)| (a.abs().max(b.abs()), a, b));
    TorusCoeffs { coeffs }
}

fn index_mod(x: &ExactRational, m: u64) -> usize {
    (x * int(m as i64)).to_integer().mod_floor(&BigInt::from(m)).to_usize().expect("small modulus")
}

struct Domain {
    n: u64,
    h: u64,
}

impl Domain {
    fn size(&self) -> usize {
        (self.n * self.h) as usize
    }

    /// Table index of the frequency `(xn, xh)`.
    fn bin(&self, xn: &ExactRational, xh: &ExactRational) -> usize {
        index_mod(xn, self.n) * self.h as usize + index_mod(xh, self.h)
    }
}

/// A checked phase as integers: `slope_n * N`, `slope_h * H`, `offset * N H`.
#[derive(Clone, Copy)]
struct IntPhase {
    sn: i64,
    sh: i64,
    off: i64,
}

impl IntPhase {
    fn new(p: &Phase2, dom: &Domain) -> Self {
        let (n, h) = (int(dom.n as i64), int(dom.h as i64));
        let whole = |x: ExactRational| x.to_integer().to_i64().expect("checked phase fits in i64");
        IntPhase { sn: whole(&p.slope_n * &n), sh: whole(&p.slope_h * &h), off: whole(&p.offset * &n * &h) }
    }
}

/// One factor's truncated expansion binned onto the frequency table.
fn binned(factor: &Factor, tc: Option<&TorusCoeffs>, radius: i64, dom: &Domain) -> (Vec<Complex64>, f64) {
    let mut table = vec![Complex64::zero(); dom.size()];
    let (n, h) = (dom.n as i64, dom.h as i64);
    let nh = n * h;
    let put = |table: &mut Vec<Complex64>, xn: i64, xh: i64, off: i64, c: Complex64| {
        let ph = Complex64::from_polar(1.0, std::f64::consts::TAU * (off.rem_euclid(nh) as f64 / nh as f64));
        table[(xn.rem_euclid(n) * h + xh.rem_euclid(h)) as usize] += c * ph;
    };
    match factor {
        Factor::Char { xn, xh } => {
            table[dom.bin(xn, xh)] += Complex64::new(1.0, 0.0);
            (table, 1.0)
        }
        Factor::T1 { p, .. } => {
            let q = IntPhase::new(p, dom);
            let mut l1 = 0.0;
            for &(a, _, c) in &tc.expect("sampled").coeffs {
                if a.abs() > radius {
                    break;
                }
                put(&mut table, a * q.sn, a * q.sh, a * q.off, c);
                l1 += c.norm();
            }
            (table, l1)
        }
        Factor::T2 { p1, p2, .. } => {
            let (q1, q2) = (IntPhase::new(p1, dom), IntPhase::new(p2, dom));
            let mut l1 = 0.0;
            for &(a, b, c) in &tc.expect("sampled").coeffs {
                if a.abs().max(b.abs()) > radius {
                    break;
                }
                put(&mut table, a * q1.sn + b * q2.sn, a * q1.sh + b * q2.sh, a * q1.off + b * q2.off, c);
                l1 += c.norm();
            }
            (table, l1)
        }
    }
}

struct Attempt {
    values: Vec<Complex64>,
    l1_bound: f64,
    error: f64,
}

fn attempt(
    factors: &[Factor],
    sampled: &[Option<Arc<TorusCoeffs>>],
    radius: i64,
    dom: &Domain,
    grid: &Grid2,
    exact: &[Complex64],
) -> Attempt {
    let mut values = vec![Complex64::new(1.0, 0.0); dom.size()];
    let mut l1_bound = 1.0;
    for (f, tc) in factors.iter().zip(sampled) {
        let (mut table, l1) = binned(f, tc.as_deref(), radius, dom);
        grid.transform(&mut table, true);
        for (v, t) in values.iter_mut().zip(&table) {
            *v *= t;
        }
        l1_bound *= l1;
    }
    let error = values.iter().zip(exact).map(|(a, b)| (a - b).norm()).sum::<f64>() / dom.size() as f64;
    Attempt { values, l1_bound, error }
}

/// Least common multiple of the denominators `u` can have.
fn value_grid(factors: &[Factor]) -> u64 {
    let mut m = BigInt::from(1);
    for f in factors {
        for p in f.phases() {
            for x in [&p.slope_n, &p.slope_h, &p.offset] {
                m = m.lcm(x.denom());
            }
        }
    }
    m.to_u64().expect("grid fits in u64")
}

fn expand_factors(
    factors: Vec<Factor>,
    n: u64,
    h: u64,
    delta: f64,
    d: usize,
    k: f64,
    cfg: &FourierConfig,
) -> Result<FourierExpansion, FourierError> {
    if !(delta > 0.0) {
        return Err(FourierError::Parameter(format!("delta must be positive, got {delta}")));
    }
    if n == 0 || h == 0 {
        return Err(FourierError::Parameter("empty domain".into()));
    }
    let dom = Domain { n, h };
    let grid = Grid2::new(n as usize, h as usize);
    let exact: Vec<Complex64> = (0..n as i64)
        .flat_map(|x| (0..h as i64).map(move |y| (x, y)))
        .map(|(x, y)| factors.iter().map(|f| f.exact(x, y)).product())
        .collect();
    let m = value_grid(&factors).max(1);
    let eps_floor = 1.0 / (2.0 * m as f64);
    let k = k.max(1.0);
    let eps0 = delta / (2f64.powi(d as i32) * k);
    let threshold = (eps0).powf(-cfg.degeneracy_exponent);
    let degenerate = (n as f64) <= threshold;

    let mut eps = eps0.max(eps_floor);
    let mut best = f64::INFINITY;
    loop {
        let s = ((cfg.oversample / eps) / m as f64).ceil().max(1.0) as usize;
        let l = m as usize * s;
        let sampled: Vec<Option<Arc<TorusCoeffs>>> = factors
            .iter()
            .map(|f| match f {
                Factor::Char { .. } => None,
                Factor::T1 { a, .. } => Some(torus_coeffs(Kernel::Lin, *a, l, cfg.smooth_order, eps)),
                Factor::T2 { a, .. } => Some(torus_coeffs(Kernel::Bil, *a, l, cfg.smooth_order, eps)),
            })
            .collect();
        let full = (l / 2) as i64;
        let top = attempt(&factors, &sampled, full, &dom, &grid, &exact);
        best = best.min(top.error);
        if top.error <= delta {
            let mut radius = 0i64;
            let chosen = loop {
                let a = attempt(&factors, &sampled, radius, &dom, &grid, &exact);
                if a.error <= delta || radius >= full {
                    break (a, radius);
                }
                radius = if radius == 0 { 1 } else { (radius * 2).min(full) };
            };
            return finish(chosen.0, chosen.1 as usize, eps, degenerate, &dom, &grid, &exact, cfg);
        }
        if eps <= eps_floor {
            return Err(FourierError::NotConverged { delta, best });
        }
        eps = (eps / 2.0).max(eps_floor);
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    a: Attempt,
    radius: usize,
    eps: f64,
    degenerate: bool,
    dom: &Domain,
    grid: &Grid2,
    exact: &[Complex64],
    cfg: &FourierConfig,
) -> Result<FourierExpansion, FourierError> {
    if a.l1_bound > cfg.budget {
        return Err(FourierError::BudgetExceeded { bound: a.l1_bound, budget: cfg.budget });
    }
    let mut table = a.values;
    grid.transform(&mut table, false);
    table.iter_mut().filter(|c| c.norm() < cfg.drop_tol).for_each(|c| *c = Complex64::zero());
    let terms: Vec<FourierTerm> = table
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| FourierTerm {
            coeff: *c,
            freq_n: rat((i as u64 / dom.h) as i64, dom.n as i64),
            freq_h: rat((i as u64 % dom.h) as i64, dom.h as i64),
        })
        .collect();
    grid.transform(&mut table, true);
    let error = table.iter().zip(exact).map(|(a, b)| (a - b).norm()).sum::<f64>() / dom.size() as f64;
    Ok(FourierExpansion {
        n: dom.n,
        h: dom.h,
        terms,
        l1_bound: a.l1_bound,
        measured_l1_error: error,
        budget: cfg.budget,
        degenerate,
        epsilon: eps,
        radius,
    })
}

fn bilinear_factor(a: &ExactRational, p1: Phase2, p2: Phase2) -> Option<Factor> {
    if a.is_zero() || p1.is_trivial() || p2.is_trivial() {
        return None;
    }
    let af = to_f64(a);
    Some(Factor::T2 { p1, p2, a: af })
}

fn max_abs(xs: impl Iterator<Item = f64>) -> f64 {
    xs.map(f64::abs).fold(0.0, f64::max)
}

/// Expansion of `e(sum_i a_i {p1_i(n)} {p2_i(n)})` over `[N]`.
pub fn expand_frac_product(
    terms: &[BracketTerm],
    n: u64,
    delta: f64,
    cfg: &FourierConfig,
) -> Result<FourierExpansion, FourierError> {
    let mut factors = Vec::new();
    let mut coeffs = Vec::new();
    for t in terms {
        let BracketTerm::FracProd { a, p1, p2 } = t else {
            return Err(FourierError::Unsupported(format!("{t:?}")));
        };
        let q1 = Phase2::new(p1.slope.clone(), ExactRational::zero(), p1.offset.clone());
        let q2 = Phase2::new(p2.slope.clone(), ExactRational::zero(), p2.offset.clone());
        q1.check(n, 1)?;
        q2.check(n, 1)?;
        coeffs.push(to_f64(a));
        factors.extend(bilinear_factor(a, q1, q2));
    }
    let k = max_abs(coeffs.into_iter());
    let d = terms.len();
    expand_factors(factors, n, 1, delta, d, k, cfg)
}

/// Expansion of `e(sum_i a_i {p1_i(n,h)} {p2_i(n,h)})` over `[N] x [H]`.
pub fn expand_bilinear(
    terms: &[BilinearTerm],
    n: u64,
    h: u64,
    delta: f64,
    cfg: &FourierConfig,
) -> Result<FourierExpansion, FourierError> {
    let mut factors = Vec::new();
    for t in terms {
        t.p1.check(n, h)?;
        t.p2.check(n, h)?;
        factors.extend(bilinear_factor(&t.a, t.p1.clone(), t.p2.clone()));
    }
    let k = max_abs(terms.iter().map(|t| to_f64(&t.a)));
    expand_factors(factors, n, h, delta, terms.len(), k, cfg)
}

/// Expansion of `e(sum_i a_i {alpha_i n})`, splitting `a_i = [a_i] + {a_i}`:
/// the integer part contributes the exact character `e([a_i] alpha_i n)`.
pub fn expand_trivial(
    a: &[ExactRational],
    alpha: &[ExactRational],
    n: u64,
    delta: f64,
    cfg: &FourierConfig,
) -> Result<FourierExpansion, FourierError> {
    if a.len() != alpha.len() {
        return Err(FourierError::Parameter("a and alpha differ in length".into()));
    }
    let mut factors = Vec::new();
    let mut char_n = ExactRational::zero();
    for (ai, al) in a.iter().zip(alpha) {
        let p = Phase2::in_n(al.clone());
        p.check(n, 1)?;
        let ip = big(&crate::ratmod::int_part(ai));
        char_n += &ip * al;
        let fa = to_f64(&frac_q(ai));
        if fa != 0.0 {
            factors.push(Factor::T1 { p, a: fa });
        }
    }
    let char_n = frac_q(&char_n);
    if !char_n.is_zero() {
        factors.push(Factor::Char { xn: char_n, xh: ExactRational::zero() });
    }
    let k = max_abs(a.iter().map(to_f64));
    expand_factors(factors, n, 1, delta, a.len(), k, cfg)
}

/// Expansion of `e(sum_i x_i y_i)` with `x_i = {p_i(n, m)}`, `y_i = {q_i(n, m)}`,
/// as a product over `i` of one shared series
/// `e(xy) ~ sum_{alpha, beta in Z/2} c_{alpha beta} e(alpha x + beta y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxExpansion {
    pub n: u64,
    pub h: u64,
    pub factors: Vec<(Phase2, Phase2)>,
    /// `(alpha, beta, c)` with `alpha, beta` half-integers.
    pub coeffs: Vec<(f64, f64, Complex64)>,
    pub radius: usize,
    pub max_coeff: f64,
    pub l1_per_factor: f64,
    pub measured_l1_error: f64,
    pub degenerate: bool,
}

impl BoxExpansion {
    fn series(&self, x: f64, y: f64) -> Complex64 {
        self.coeffs.iter().map(|&(a, b, c)| c * unit(a * x + b * y)).sum()
    }

    pub fn eval(&self, n: i64, m: i64) -> Complex64 {
        self.factors
            .iter()
            .map(|(p, q)| self.series(to_f64(&p.frac_at(n, m)), to_f64(&q.frac_at(n, m))))
            .product()
    }

    pub fn exact(&self, n: i64, m: i64) -> Complex64 {
        let s: f64 = self
            .factors
            .iter()
            .map(|(p, q)| to_f64(&p.frac_at(n, m)) * to_f64(&q.frac_at(n, m)))
            .sum();
        unit(s)
    }
}

/// Period-2 expansion of `e(xy)` times a bump that is 1 on `[-1/2, 1/2]^2`.
pub fn expand_box_product(
    factors: &[(Phase2, Phase2)],
    n: u64,
    h: u64,
    delta: f64,
    cfg: &FourierConfig,
) -> Result<BoxExpansion, FourierError> {
    for (p, q) in factors {
        p.check(n, h)?;
        q.check(n, h)?;
    }
    let m = value_grid(
        &factors
            .iter()
            .map(|(p, q)| Factor::T2 { p1: p.clone(), p2: q.clone(), a: 0.0 })
            .collect::<Vec<_>>(),
    )
    .max(1);
    // grid of spacing 1/(s m) over a period of length 2
    let s = (8.0 / m as f64).ceil().max(1.0) as usize;
    let l = 2 * m as usize * s;
    let all = &torus_coeffs(Kernel::Box, 0.0, l, cfg.smooth_order, 0.0).coeffs;
    let full = (l / 2) as i64;
    let mut radius = 0i64;
    let eps0 = delta / (2f64.powi(factors.len() as i32));
    let degenerate = (n as f64) <= eps0.powf(-cfg.degeneracy_exponent);
    // per point: the fractional parts of every factor, the exact value and
    // the running partial sums of each factor's series
    let points: Vec<Vec<(f64, f64)>> = (0..n as i64)
        .flat_map(|x| (0..h as i64).map(move |y| (x, y)))
        .map(|(x, y)| factors.iter().map(|(p, q)| (to_f64(&p.frac_at(x, y)), to_f64(&q.frac_at(x, y)))).collect())
        .collect();
    let exact: Vec<Complex64> = points.iter().map(|uv| unit(uv.iter().map(|(u, v)| u * v).sum())).collect();
    let mut partial: Vec<Vec<Complex64>> = vec![vec![Complex64::zero(); factors.len()]; points.len()];
    let mut coeffs: Vec<(f64, f64, Complex64)> = Vec::new();
    let mut next = 0;
    loop {
        let start = coeffs.len();
        while next < all.len() && all[next].0.abs().max(all[next].1.abs()) <= radius {
            let (a, b, c) = all[next];
            if c.norm() >= cfg.drop_tol {
                coeffs.push((a as f64 / 2.0, b as f64 / 2.0, c));
            }
            next += 1;
        }
        let fresh = &coeffs[start..];
        partial.par_iter_mut().zip(&points).for_each(|(acc, uv)| {
            for (s, &(u, v)) in acc.iter_mut().zip(uv) {
                *s += fresh.iter().map(|&(a, b, c)| c * unit(a * u + b * v)).sum::<Complex64>();
            }
        });
        let err: f64 = partial
            .iter()
            .zip(&exact)
            .map(|(acc, e)| (e - acc.iter().product::<Complex64>()).norm())
            .sum();
        let measured = err / (n * h) as f64;
        if measured <= delta || factors.is_empty() {
            let l1: f64 = coeffs.iter().map(|c| c.2.norm()).sum();
            if l1.powi(factors.len() as i32) > cfg.budget {
                return Err(FourierError::BudgetExceeded { bound: l1.powi(factors.len() as i32), budget: cfg.budget });
            }
            return Ok(BoxExpansion {
                n,
                h,
                factors: factors.to_vec(),
                max_coeff: coeffs.iter().map(|c| c.2.norm()).fold(0.0, f64::max),
                l1_per_factor: l1,
                coeffs,
                radius: radius as usize,
                measured_l1_error: measured,
                degenerate,
            });
        }
        if radius >= full {
            return Err(FourierError::NotConverged { delta, best: measured });
        }
        radius = if radius == 0 { 1 } else { (radius * 2).min(full) };
    }
}

/// Normalised DFT of a function given as values on `Z/NZ`, as an expansion.
pub fn dft_expansion(f: &FnZN) -> FourierExpansion {
    let fh = dft(f);
    let terms = fh
        .values
        .iter()
        .enumerate()
        .map(|(i, c)| FourierTerm { coeff: *c, freq_n: rat(i as i64, f.n as i64), freq_h: ExactRational::zero() })
        .collect::<Vec<_>>();
    FourierExpansion {
        n: f.n as u64,
        h: 1,
        l1_bound: terms.iter().map(|t| t.coeff.norm()).sum(),
        terms,
        measured_l1_error: 0.0,
        budget: f64::INFINITY,
        degenerate: false,
        epsilon: 0.0,
        radius: f.n / 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::Phase;

    #[test]
    fn zero_phases_give_constant() {
        let cfg = FourierConfig::default();
        let e = expand_frac_product(
            &[BracketTerm::FracProd { a: int(0), p1: Phase::linear(rat(1, 31)), p2: Phase::linear(rat(2, 31)) }],
            31,
            0.05,
            &cfg,
        )
        .unwrap();
        assert_eq!(e.terms.len(), 1);
        assert!((e.terms[0].coeff - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(e.terms[0].freq_n.is_zero());
        let e = expand_trivial(&[], &[], 31, 0.05, &cfg).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert!(e.measured_l1_error < 1e-12);
    }

    #[test]
    fn integer_coefficients_are_exact_characters() {
        let cfg = FourierConfig::default();
        let e = expand_trivial(&[int(3), int(-1)], &[rat(2, 31), rat(5, 31)], 31, 0.05, &cfg).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].freq_n, rat(1, 31));
        assert!(e.measured_l1_error < 1e-12);
    }

    #[test]
    fn rejects_nonperiodic() {
        let cfg = FourierConfig::default();
        let r = expand_trivial(&[rat(1, 3)], &[rat(1, 2)], 31, 0.05, &cfg);
        assert!(matches!(r, Err(FourierError::NonPeriodic(_))));
    }

    #[test]
    fn one_variable_example() {
        let cfg = FourierConfig::default();
        let t = BracketTerm::FracProd { a: int(1), p1: Phase::linear(rat(1, 31)), p2: Phase::linear(rat(2, 31)) };
        let e = expand_frac_product(&[t], 31, 0.05, &cfg).unwrap();
        assert!(e.measured_l1_error <= 0.05);
        assert!(e.frequencies_periodic());
        assert!(e.coeff_l1() <= e.l1_bound + 1e-9);
    }

    #[test]
    fn box_product_empty_is_one() {
        let e = expand_box_product(&[], 7, 7, 0.05, &FourierConfig::default()).unwrap();
        assert!((e.eval(3, 4) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
