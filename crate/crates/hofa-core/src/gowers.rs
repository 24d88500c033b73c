//! Functions on `Z/NZ`, the normalised DFT, Gowers norms and the counting
//! operators `Lambda`, `Lambda^1` and the dual function `D`.
//!
//! Parallel loops always collect into an ordered vector before summing, so
//! results do not depend on the thread count.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GowersError {
    #[error("modulus mismatch: {0} vs {1}")]
    Modulus(usize, usize),
    #[error("Gowers norm order must be 1..=4, got {0}")]
    Order(usize),
    #[error("polynomials must vanish at 0")]
    NonzeroConstant,
    #[error("empty domain")]
    Empty,
}

/// A complex-valued function on `Z/NZ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FnZN {
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl FnZN {
    pub fn new(values: Vec<Complex64>) -> Self {
        FnZN { n: values.len(), values }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> Complex64) -> Self {
        FnZN::new((0..n).map(f).collect())
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        FnZN::new(vec![c; n])
    }

    pub fn indicator(n: usize, set: &[usize]) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for &a in set {
            v[a % n] = Complex64::new(1.0, 0.0);
        }
        FnZN::new(v)
    }

    /// `n -> e(num * n / N)`.
    pub fn character(n: usize, num: i64) -> Self {
        FnZN::from_fn(n, |x| e_frac((num * x as i64).rem_euclid(n as i64), n as i64))
    }

    pub fn at(&self, i: i64) -> Complex64 {
        self.values[i.rem_euclid(self.n as i64) as usize]
    }

    pub fn conj(&self) -> FnZN {
        FnZN::new(self.values.iter().map(|v| v.conj()).collect())
    }

    pub fn mul(&self, other: &FnZN) -> FnZN {
        FnZN::new(self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect())
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.n as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_one_bounded(&self) -> bool {
        self.sup_norm() <= 1.0 + 1e-12
    }
}

/// `e(a/q) = exp(2 pi i a/q)`.
pub fn e_frac(a: i64, q: i64) -> Complex64 {
    let t = std::f64::consts::TAU * (a.rem_euclid(q) as f64) / q as f64;
    Complex64::new(t.cos(), t.sin())
}

fn check_same(fs: &[&FnZN]) -> Result<usize, GowersError> {
    let n = fs[0].n;
    if n == 0 {
        return Err(GowersError::Empty);
    }
    for f in fs {
        if f.n != n {
            return Err(GowersError::Modulus(n, f.n));
        }
    }
    Ok(n)
}

struct Plans {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(n: usize) -> Self {
        let mut p = FftPlanner::new();
        Plans { fwd: p.plan_fft_forward(n), inv: p.plan_fft_inverse(n) }
    }

    fn dft(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut buf = v.to_vec();
        self.fwd.process(&mut buf);
        let s = 1.0 / v.len() as f64;
        buf.iter_mut().for_each(|x| *x *= s);
        buf
    }
}

/// `f^(xi) = E_n f(n) e(-xi n / N)`.
pub fn dft(f: &FnZN) -> FnZN {
    FnZN::new(Plans::new(f.n).dft(&f.values))
}

/// Inverse of [`dft`]: `f(n) = sum_xi f^(xi) e(xi n / N)`.
pub fn idft(fhat: &FnZN) -> FnZN {
    let mut buf = fhat.values.clone();
    Plans::new(fhat.n).inv.process(&mut buf);
    FnZN::new(buf)
}

/// `(Delta_h f)(n) = f(n + h) conj(f(n))`.
pub fn mult_derivative(f: &FnZN, h: i64) -> FnZN {
    FnZN::from_fn(f.n, |x| f.at(x as i64 + h) * f.values[x].conj())
}

fn u2_fourth(plans: &Plans, v: &[Complex64]) -> f64 {
    plans.dft(v).iter().map(|c| c.norm_sqr().powi(2)).sum()
}

fn derivative_vals(v: &[Complex64], h: usize) -> Vec<Complex64> {
    let n = v.len();
    (0..n).map(|x| v[(x + h) % n] * v[x].conj()).collect()
}

/// `||f||_{U^s}^{2^s}` by the derivative recursion, `s >= 2`.
fn power_norm(plans: &Plans, v: &[Complex64], s: usize) -> f64 {
    if s == 2 {
        return u2_fourth(plans, v);
    }
    let n = v.len();
    let parts: Vec<f64> = if s >= 3 && n >= 16 {
        (0..n).into_par_iter().map(|h| power_norm(plans, &derivative_vals(v, h), s - 1)).collect()
    } else {
        (0..n).map(|h| power_norm(plans, &derivative_vals(v, h), s - 1)).collect()
    };
    parts.iter().sum::<f64>() / n as f64
}

fn root(x: f64, s: usize) -> f64 {
    x.max(0.0).powf(1.0 / (1u32 << s) as f64)
}

/// `||f||_{U^s}` for `s` in `1..=4`; `U^2` by the DFT, higher orders by
/// averaging `||Delta_h f||` over `h`.
pub fn gowers_norm(f: &FnZN, s: usize) -> Result<f64, GowersError> {
    check_same(&[f])?;
    match s {
        1 => Ok(f.mean().norm()),
        2..=4 => Ok(root(power_norm(&Plans::new(f.n), &f.values, s), s)),
        _ => Err(GowersError::Order(s)),
    }
}

/// `||f||_{U^2}` from the quadruple average `E f(x) conj f(x+a) conj f(x+b) f(x+a+b)`.
pub fn u2_direct(f: &FnZN) -> f64 {
    let n = f.n;
    let v = &f.values;
    let rows: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..n {
                let fa = v[x] * v[(x + a) % n].conj();
                for b in 0..n {
                    acc += fa * v[(x + b) % n].conj() * v[(x + a + b) % n];
                }
            }
            acc
        })
        .collect();
    let total: Complex64 = rows.iter().sum();
    root(total.re / (n * n * n) as f64, 2)
}

/// The defining `2^s`-fold cube average; `O(N^{s+1} 2^s)`, only for small `N`.
pub fn gowers_norm_naive(f: &FnZN, s: usize) -> Result<f64, GowersError> {
    let n = check_same(&[f])?;
    if !(1..=4).contains(&s) {
        return Err(GowersError::Order(s));
    }
    let total_h = n.pow(s as u32);
    let rows: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut hs = vec![0usize; s];
            for idx in 0..total_h {
                let mut r = idx;
                for h in hs.iter_mut() {
                    *h = r % n;
                    r /= n;
                }
                let mut prod = Complex64::new(1.0, 0.0);
                for w in 0..(1usize << s) {
                    let mut pt = x;
                    for (j, h) in hs.iter().enumerate() {
                        if w >> j & 1 == 1 {
                            pt += h;
                        }
                    }
                    let val = f.values[pt % n];
                    prod *= if w.count_ones() % 2 == 1 { val.conj() } else { val };
                }
                acc += prod;
            }
            acc
        })
        .collect();
    let total: Complex64 = rows.iter().sum();
    Ok(root(total.re / (n * total_h) as f64, s))
}

/// Integer polynomial `sum_i c_i y^i`, evaluated mod `N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntPoly(pub Vec<i64>);

impl IntPoly {
    /// `c * y`.
    pub fn linear(c: i64) -> Self {
        IntPoly(vec![0, c])
    }

    pub fn eval_mod(&self, y: i64, n: i64) -> i64 {
        let mut acc = 0i64;
        for &c in self.0.iter().rev() {
            acc = (acc * y + c).rem_euclid(n);
        }
        acc
    }

    pub fn vanishes_at_zero(&self) -> bool {
        self.0.first().is_none_or(|&c| c == 0)
    }
}

fn check_polys(p: &IntPoly, q: &IntPoly) -> Result<(), GowersError> {
    if p.vanishes_at_zero() && q.vanishes_at_zero() {
        Ok(())
    } else {
        Err(GowersError::NonzeroConstant)
    }
}

/// `E_{x,y} f(x) g(x+P(y)) k(x+Q(y)) p(x+P(y)+Q(y))`.
pub fn lambda(
    f: &FnZN,
    g: &FnZN,
    k: &FnZN,
    p: &FnZN,
    pp: &IntPoly,
    qq: &IntPoly,
) -> Result<Complex64, GowersError> {
    let n = check_same(&[f, g, k, p])?;
    check_polys(pp, qq)?;
    let ni = n as i64;
    let rows: Vec<Complex64> = (0..ni)
        .into_par_iter()
        .map(|y| {
            let a = pp.eval_mod(y, ni);
            let b = qq.eval_mod(y, ni);
            (0..ni).map(|x| f.at(x) * g.at(x + a) * k.at(x + b) * p.at(x + a + b)).sum()
        })
        .collect();
    Ok(rows.iter().sum::<Complex64>() / (n * n) as f64)
}

/// `E_{x,y,z} f(x) g(x+y) k(x+z) p(x+y+z)` by direct summation.
pub fn lambda1(f: &FnZN, g: &FnZN, k: &FnZN, p: &FnZN) -> Result<Complex64, GowersError> {
    let n = check_same(&[f, g, k, p])? as i64;
    let rows: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..n {
                let fg = f.at(x) * g.at(x + y);
                for z in 0..n {
                    acc += fg * k.at(x + z) * p.at(x + y + z);
                }
            }
            acc
        })
        .collect();
    Ok(rows.iter().sum::<Complex64>() / (n * n * n) as f64)
}

/// `Lambda^1` as `sum_xi f^(xi) g^(-xi) k^(-xi) p^(xi)`.
pub fn lambda1_fourier(f: &FnZN, g: &FnZN, k: &FnZN, p: &FnZN) -> Result<Complex64, GowersError> {
    let n = check_same(&[f, g, k, p])?;
    let (fh, gh, kh, ph) = (dft(f), dft(g), dft(k), dft(p));
    Ok((0..n)
        .map(|xi| {
            let m = (n - xi) % n;
            fh.values[xi] * gh.values[m] * kh.values[m] * ph.values[xi]
        })
        .sum())
}

/// `D(f,g,k)(x) = E_y f(x - P(y) - Q(y)) g(x - Q(y)) k(x - P(y))`.
pub fn dual_d(f: &FnZN, g: &FnZN, k: &FnZN, pp: &IntPoly, qq: &IntPoly) -> Result<FnZN, GowersError> {
    let n = check_same(&[f, g, k])?;
    check_polys(pp, qq)?;
    let ni = n as i64;
    let shifts: Vec<(i64, i64)> = (0..ni).map(|y| (pp.eval_mod(y, ni), qq.eval_mod(y, ni))).collect();
    let values: Vec<Complex64> = (0..ni)
        .into_par_iter()
        .map(|x| {
            shifts.iter().map(|&(a, b)| f.at(x - a - b) * g.at(x - b) * k.at(x - a)).sum::<Complex64>()
                / n as f64
        })
        .collect();
    Ok(FnZN::new(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn dft_basics() {
        let one = FnZN::constant(7, c(1.0));
        let h = dft(&one);
        assert!((h.values[0] - c(1.0)).norm() < 1e-12);
        assert!(h.values[1..].iter().all(|v| v.norm() < 1e-12));
        let ch = dft(&FnZN::character(7, 1));
        assert!((ch.values[1] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn derivative_of_quadratic_phase() {
        let n = 11;
        let f = FnZN::from_fn(n, |x| e_frac((x * x) as i64, n as i64));
        let h = 3i64;
        let d = mult_derivative(&f, h);
        for x in 0..n as i64 {
            assert!((d.at(x) - e_frac(2 * x * h + h * h, n as i64)).norm() < 1e-12);
        }
        let d0 = mult_derivative(&f, 0);
        assert!(d0.values.iter().all(|v| (v - c(1.0)).norm() < 1e-12));
    }

    #[test]
    fn norms_of_constants() {
        let one = FnZN::constant(13, c(1.0));
        for s in 1..=4 {
            assert!((gowers_norm(&one, s).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((gowers_norm(&FnZN::character(13, 1), 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(gowers_norm(&one, 5).is_err());
    }

    #[test]
    fn lambda_trivial() {
        let one = FnZN::constant(5, c(1.0));
        let zero = FnZN::constant(5, c(0.0));
        let (p, q) = (IntPoly::linear(1), IntPoly::linear(2));
        assert!((lambda(&one, &one, &one, &one, &p, &q).unwrap() - c(1.0)).norm() < 1e-12);
        assert!(lambda(&one, &one, &one, &zero, &p, &q).unwrap().norm() < 1e-12);
        assert!(lambda(&one, &one, &one, &one, &IntPoly(vec![1, 1]), &q).is_err());
        assert!(lambda1(&one, &one, &FnZN::constant(6, c(1.0)), &one).is_err());
    }
}
