//! Two-step nilmanifolds with an explicit integer structure, and bracket
//! quadratics as nilsequences on them.
//!
//! A point is `(t, z)` with `t = (x, y)` in `Q^{2d}`. For a strictly upper
//! triangular integer matrix `C` put `B(t, t') = sum_{i<j} C_ij t_i t'_j`; the
//! group law is `(t, z)(t', z') = (t + t', z + z' + B(t, t'))` and the lattice
//! is the set of integer points. The elementary model has `C_{i, d+i} = 1`
//! and nothing else, so `B(t, t') = x . y'`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brackets::{BracketExpr, BracketTerm, Phase};
use crate::linalg::{self, QMat};
use crate::ratmod::{
    big, c_infty_norm, common_denominator, frac, frac_q, int, int_part, ExactPolynomial,
    ExactRational, RationalMod1,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NilError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("structure constants must be a strictly upper triangular {0}x{0} matrix")]
    Structure(usize),
    #[error("structure constant {value} exceeds the complexity bound {bound}")]
    Complexity { value: i64, bound: i64 },
    #[error("polynomial degree {degree} exceeds the cap {cap}")]
    Degree { degree: usize, cap: usize },
    #[error("horizontal characters are linearly dependent")]
    DependentCharacters,
    #[error("character {index} has C-infinity norm {value} along the sequence, expected 0")]
    NotAnnihilated { index: usize, value: String },
    #[error("basis change matrix is singular")]
    Singular,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElemNilmanifold {
    pub d: usize,
    /// `2d x 2d`, strictly upper triangular.
    pub c: Vec<Vec<i64>>,
    /// Vertical frequency of the nilcharacter `F = e(k * z)` on the fundamental domain.
    pub k: i64,
}

impl ElemNilmanifold {
    pub fn elementary(d: usize) -> Self {
        let mut c = vec![vec![0; 2 * d]; 2 * d];
        for i in 0..d {
            c[i][d + i] = 1;
        }
        ElemNilmanifold { d, c, k: 1 }
    }

    pub fn with_constants(d: usize, c: Vec<Vec<i64>>, k: i64, bound: i64) -> Result<Self, NilError> {
        if c.len() != 2 * d || c.iter().any(|r| r.len() != 2 * d) {
            return Err(NilError::Structure(2 * d));
        }
        for (i, row) in c.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if j <= i && v != 0 {
                    return Err(NilError::Structure(2 * d));
                }
                if v.abs() > bound {
                    return Err(NilError::Complexity { value: v, bound });
                }
            }
        }
        Ok(ElemNilmanifold { d, c, k })
    }

    pub fn dim(&self) -> usize {
        2 * self.d
    }

    /// `B(t, t') = sum_{i<j} C_ij t_i t'_j`.
    pub fn bilinear(&self, t: &[ExactRational], u: &[ExactRational]) -> ExactRational {
        let mut acc = ExactRational::zero();
        for (i, row) in self.c.iter().enumerate() {
            for (j, &cij) in row.iter().enumerate() {
                if cij != 0 {
                    acc += int(cij) * &t[i] * &u[j];
                }
            }
        }
        acc
    }

    fn check(&self, g: &GroupElement) -> Result<(), NilError> {
        if g.x.len() != self.d || g.y.len() != self.d {
            return Err(NilError::Dimension { expected: self.d, got: g.x.len().max(g.y.len()) });
        }
        Ok(())
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, NilError> {
        self.check(g)?;
        self.check(h)?;
        let t = g.horizontal();
        let u = h.horizontal();
        let sum: Vec<ExactRational> = t.iter().zip(&u).map(|(a, b)| a + b).collect();
        let z = &g.z + &h.z + self.bilinear(&t, &u);
        Ok(GroupElement::from_horizontal(self.d, &sum, z))
    }

    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement, NilError> {
        self.check(g)?;
        let t = g.horizontal();
        let neg: Vec<ExactRational> = t.iter().map(|a| -a.clone()).collect();
        let z = -g.z.clone() + self.bilinear(&t, &t);
        Ok(GroupElement::from_horizontal(self.d, &neg, z))
    }

    pub fn commutator(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, NilError> {
        let gh = self.mul(g, h)?;
        let gi = self.inv(g)?;
        let hi = self.inv(h)?;
        self.mul(&self.mul(&gh, &gi)?, &hi)
    }

    /// Representative of `g Gamma` in `(-1/2, 1/2]^{2d+1}`:
    /// `({t}, {z - B(t, [t])})`.
    pub fn project_fundamental(&self, g: &GroupElement) -> GroupElement {
        let t = g.horizontal();
        let ints: Vec<ExactRational> = t.iter().map(|a| big(&int_part(a))).collect();
        let ft: Vec<ExactRational> = t.iter().map(frac_q).collect();
        let z = frac_q(&(&g.z - self.bilinear(&t, &ints)));
        GroupElement::from_horizontal(self.d, &ft, z)
    }

    /// `F(g Gamma) = e(k (z - B(t, [t])))` as an exact phase; independent of the representative.
    pub fn character_phase(&self, g: &GroupElement) -> RationalMod1 {
        let t = g.horizontal();
        let ints: Vec<ExactRational> = t.iter().map(|a| big(&int_part(a))).collect();
        frac(&(int(self.k) * (&g.z - self.bilinear(&t, &ints))))
    }

    /// `omega(u, v) = B(u, v) - B(v, u)`; equals `x.w - y.z` in the elementary model.
    pub fn omega(&self, u: &[ExactRational], v: &[ExactRational]) -> Result<ExactRational, NilError> {
        for w in [u, v] {
            if w.len() != self.dim() {
                return Err(NilError::Dimension { expected: self.dim(), got: w.len() });
            }
        }
        Ok(self.bilinear(u, v) - self.bilinear(v, u))
    }

    /// `omega` on integer vectors.
    pub fn omega_int(&self, u: &[i64], v: &[i64]) -> i64 {
        let mut acc = 0i64;
        for (i, row) in self.c.iter().enumerate() {
            for (j, &cij) in row.iter().enumerate() {
                acc += cij * (u[i] * v[j] - u[j] * v[i]);
            }
        }
        acc
    }

    /// Gram matrix of `omega` in the standard basis.
    pub fn omega_matrix(&self) -> Vec<Vec<i64>> {
        let m = self.dim();
        (0..m)
            .map(|i| (0..m).map(|j| self.c[i][j] - self.c[j][i]).collect())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub x: Vec<ExactRational>,
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub y: Vec<ExactRational>,
    #[serde(with = "crate::ratmod::serde_q")]
    pub z: ExactRational,
}

impl GroupElement {
    pub fn identity(d: usize) -> Self {
        GroupElement {
            x: vec![ExactRational::zero(); d],
            y: vec![ExactRational::zero(); d],
            z: ExactRational::zero(),
        }
    }

    pub fn from_horizontal(d: usize, t: &[ExactRational], z: ExactRational) -> Self {
        GroupElement { x: t[..d].to_vec(), y: t[d..2 * d].to_vec(), z }
    }

    pub fn horizontal(&self) -> Vec<ExactRational> {
        self.x.iter().chain(&self.y).cloned().collect()
    }

    pub fn is_lattice(&self) -> bool {
        self.x.iter().chain(&self.y).chain(std::iter::once(&self.z)).all(|a| a.is_integer())
    }
}

/// `g(n) = (alpha n, beta n, P(n))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolySeq {
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub alpha: Vec<ExactRational>,
    #[serde(with = "crate::ratmod::serde_q::vec")]
    pub beta: Vec<ExactRational>,
    pub p: ExactPolynomial,
}

pub const DEFAULT_DEGREE_CAP: usize = 2;

impl PolySeq {
    pub fn new(alpha: Vec<ExactRational>, beta: Vec<ExactRational>, p: ExactPolynomial) -> Result<Self, NilError> {
        Self::with_degree_cap(alpha, beta, p, DEFAULT_DEGREE_CAP)
    }

    pub fn with_degree_cap(
        alpha: Vec<ExactRational>,
        beta: Vec<ExactRational>,
        p: ExactPolynomial,
        cap: usize,
    ) -> Result<Self, NilError> {
        if alpha.len() != beta.len() {
            return Err(NilError::Dimension { expected: alpha.len(), got: beta.len() });
        }
        if p.degree() > cap {
            return Err(NilError::Degree { degree: p.degree(), cap });
        }
        Ok(PolySeq { alpha, beta, p })
    }

    pub fn identity(d: usize) -> Self {
        PolySeq {
            alpha: vec![ExactRational::zero(); d],
            beta: vec![ExactRational::zero(); d],
            p: ExactPolynomial::zero(),
        }
    }

    pub fn from_horizontal(d: usize, psi: &[ExactRational], p: ExactPolynomial) -> Self {
        PolySeq { alpha: psi[..d].to_vec(), beta: psi[d..2 * d].to_vec(), p }
    }

    pub fn d(&self) -> usize {
        self.alpha.len()
    }

    /// Horizontal velocity `psi = (alpha, beta)`.
    pub fn psi(&self) -> Vec<ExactRational> {
        self.alpha.iter().chain(&self.beta).cloned().collect()
    }

    pub fn at(&self, n: i64) -> GroupElement {
        let nq = int(n);
        GroupElement {
            x: self.alpha.iter().map(|a| a * &nq).collect(),
            y: self.beta.iter().map(|b| b * &nq).collect(),
            z: self.p.eval(&nq),
        }
    }

    /// True when every horizontal coordinate has denominator dividing `n`.
    pub fn horizontal_denominator_divides(&self, n: u64) -> bool {
        self.psi().iter().all(|a| crate::ratmod::has_denominator(a, n))
    }
}

/// Exact phase of `F(g(n) Gamma)`.
pub fn nilsequence_phase(m: &ElemNilmanifold, g: &PolySeq, n: i64) -> RationalMod1 {
    let p = m.project_fundamental(&g.at(n));
    m.character_phase(&p)
}

pub fn eval_nilsequence(m: &ElemNilmanifold, g: &PolySeq, n: i64) -> Complex64 {
    nilsequence_phase(m, g, n).to_unit()
}

/// The bracket phase `k (P(n) - sum_{i<j} C_ij t_i n [t_j n])` realised by `F(g(n) Gamma)`.
pub fn bracket_expr(m: &ElemNilmanifold, g: &PolySeq) -> BracketExpr {
    let t = g.psi();
    let mut terms = Vec::new();
    for (i, row) in m.c.iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            if cij != 0 {
                terms.push(BracketTerm::NBracket {
                    a: int(-m.k * cij),
                    alpha: t[i].clone(),
                    beta: t[j].clone(),
                });
            }
        }
    }
    terms.push(BracketTerm::poly(g.p.scale(&int(m.k))));
    BracketExpr::free(terms)
}

/// `g = epsilon * g1 * gamma` with `gamma` rational of period `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub epsilon: GroupElement,
    pub g1: PolySeq,
    pub gamma: PolySeq,
    pub q: BigInt,
}

/// Splits off the part of `g` seen by the horizontal characters `etas`.
///
/// Requires `||eta . psi||_{C^inf[N]} = 0` for each `eta`, i.e. `eta . psi` is
/// an integer. `gamma` is the orthogonal projection of `psi` onto the row
/// space of the etas, `g1` keeps the rest and `epsilon = (0, P(0))`.
pub fn factorize_i(
    m: &ElemNilmanifold,
    g: &PolySeq,
    etas: &[Vec<i64>],
    n: u64,
) -> Result<Factorization, NilError> {
    let d = g.d();
    let psi = g.psi();
    for eta in etas {
        if eta.len() != 2 * d {
            return Err(NilError::Dimension { expected: 2 * d, got: eta.len() });
        }
    }
    if linalg::rank_int(etas) < etas.len() {
        return Err(NilError::DependentCharacters);
    }
    for (i, eta) in etas.iter().enumerate() {
        let p = ExactPolynomial::new(vec![ExactRational::zero(), linalg::dot_int(eta, &psi)]);
        let v = c_infty_norm(&p, n);
        if !v.is_zero() {
            return Err(NilError::NotAnnihilated { index: i, value: v.to_string() });
        }
    }
    let e: QMat = linalg::to_q_mat(etas);
    let gamma_h = if etas.is_empty() {
        vec![ExactRational::zero(); 2 * d]
    } else {
        let eet = linalg::mat_mul(&e, &linalg::transpose(&e));
        let inv = linalg::inverse(&eet).ok_or(NilError::DependentCharacters)?;
        let epsi = linalg::mat_vec(&e, &psi);
        linalg::mat_vec(&linalg::transpose(&e), &linalg::mat_vec(&inv, &epsi))
    };
    let psi1: Vec<ExactRational> = psi.iter().zip(&gamma_h).map(|(a, b)| a - b).collect();
    let p0 = g.p.coeff(0);
    let cross = m.bilinear(&psi1, &gamma_h);
    let p1 = g
        .p
        .sub(&ExactPolynomial::constant(p0.clone()))
        .sub(&ExactPolynomial::monomial(cross, 2));
    let q = common_denominator(&gamma_h);
    Ok(Factorization {
        epsilon: GroupElement::from_horizontal(d, &vec![ExactRational::zero(); 2 * d], p0),
        g1: PolySeq::from_horizontal(d, &psi1, p1),
        gamma: PolySeq::from_horizontal(d, &gamma_h, ExactPolynomial::zero()),
        q,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisChange {
    pub manifold: ElemNilmanifold,
    pub seq: PolySeq,
    /// Catalogued terms with `F(g(2n)) = F~(g~(n)) e(sum lower(n))`.
    pub lower: Vec<BracketTerm>,
}

impl BasisChange {
    pub fn lower_phase(&self, n: i64) -> ExactRational {
        self.lower.iter().map(|t| t.eval(n)).sum()
    }
}

/// Rewrites `F(g(2n) Gamma)` in the coordinates `x = A^{-T} (2 psi) n`.
///
/// With `s = 2 psi = A^T t~` and `U = A C A^T`, the new structure constants are
/// the strict upper part of `U - U^T`; the polynomial parts of the rewriting
/// go into `P~` and the products of fractional parts into `lower`.
pub fn change_basis(m: &ElemNilmanifold, g: &PolySeq, a: &[Vec<i64>]) -> Result<BasisChange, NilError> {
    let dim = m.dim();
    if a.len() != dim || a.iter().any(|r| r.len() != dim) {
        return Err(NilError::Dimension { expected: dim, got: a.len() });
    }
    let aq = linalg::to_q_mat(a);
    let at = linalg::transpose(&aq);
    let at_inv = linalg::inverse(&at).ok_or(NilError::Singular)?;
    let s: Vec<ExactRational> = g.psi().iter().map(|x| x * int(2)).collect();
    let t = linalg::mat_vec(&at_inv, &s);

    let cq = linalg::to_q_mat(&m.c);
    let u = linalg::mat_mul(&linalg::mat_mul(&aq, &cq), &at);
    let ui = |l: usize, k: usize| -> i64 {
        u[l][k].to_integer().try_into().expect("structure constants fit in i64")
    };
    let mut c_new = vec![vec![0i64; dim]; dim];
    for l in 0..dim {
        for k in l + 1..dim {
            c_new[l][k] = ui(l, k) - ui(k, l);
        }
    }

    let kq = int(m.k);
    let mut quad = ExactRational::zero();
    let mut lin = ExactRational::zero();
    let mut lower = Vec::new();
    let lin_phase = |c: &ExactRational| Phase::linear(c.clone());
    for l in 0..dim {
        for k in 0..l {
            let ulk = &u[l][k];
            if !ulk.is_zero() {
                quad += ulk * &t[l] * &t[k];
                lower.push(BracketTerm::FracProd {
                    a: &kq * ulk,
                    p1: lin_phase(&t[l]),
                    p2: lin_phase(&t[k]),
                });
            }
        }
        let ull = &u[l][l];
        if !ull.is_zero() {
            let half = ull / int(2);
            quad += &half * &t[l] * &t[l];
            lin += &half * &t[l];
            lower.push(BracketTerm::FracProd { a: &kq * &half, p1: lin_phase(&t[l]), p2: lin_phase(&t[l]) });
            lower.push(BracketTerm::FracLin { a: &kq * &half, p: lin_phase(&t[l]) });
        }
    }
    for (i, row) in m.c.iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            if cij == 0 {
                continue;
            }
            let c = &kq * int(cij);
            for k in 0..dim {
                if a[k][j] != 0 {
                    lower.push(BracketTerm::FracProd {
                        a: -(&c * int(a[k][j])),
                        p1: lin_phase(&s[i]),
                        p2: lin_phase(&t[k]),
                    });
                }
            }
            lower.push(BracketTerm::FracProd { a: c, p1: lin_phase(&s[i]), p2: lin_phase(&s[j]) });
        }
    }
    lower.retain(|t| !t.is_trivially_zero());

    let p_new = g
        .p
        .dilate(&int(2))
        .sub(&ExactPolynomial::new(vec![ExactRational::zero(), lin, quad]));
    Ok(BasisChange {
        manifold: ElemNilmanifold { d: m.d, c: c_new, k: m.k },
        seq: PolySeq::from_horizontal(m.d, &t, p_new),
        lower,
    })
}

/// Lattice element `gamma` with `project_fundamental(g) * gamma = g`.
pub fn lattice_part(m: &ElemNilmanifold, g: &GroupElement) -> GroupElement {
    let p = m.project_fundamental(g);
    m.mul(&m.inv(&p).expect("same dimension"), g).expect("same dimension")
}

pub fn zero_vec(d: usize) -> Vec<ExactRational> {
    vec![ExactRational::zero(); d]
}

pub fn unit_vec(d: usize, i: usize) -> Vec<ExactRational> {
    let mut v = zero_vec(d);
    v[i] = ExactRational::one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmod::rat;

    #[test]
    fn mul_example() {
        let m = ElemNilmanifold::elementary(3);
        let g = GroupElement { x: vec![rat(1, 2), int(0), int(0)], y: zero_vec(3), z: int(0) };
        let h = GroupElement { x: zero_vec(3), y: vec![rat(1, 3), int(0), int(0)], z: int(0) };
        assert_eq!(m.mul(&g, &h).unwrap().z, rat(1, 6));
        let id = GroupElement::identity(3);
        assert_eq!(m.mul(&id, &g).unwrap(), g);
        assert_eq!(m.mul(&g, &m.inv(&g).unwrap()).unwrap(), id);
        assert!(m.mul(&g, &GroupElement::identity(2)).is_err());
    }

    #[test]
    fn projection_example() {
        let m = ElemNilmanifold::elementary(1);
        let g = GroupElement { x: vec![rat(3, 4)], y: vec![rat(5, 3)], z: int(2) };
        let p = m.project_fundamental(&g);
        // [5/3] = 2, so z - x[y] = 1/2
        assert_eq!(p, GroupElement { x: vec![rat(-1, 4)], y: vec![rat(-1, 3)], z: rat(1, 2) });
        assert_eq!(m.project_fundamental(&p), p);
        assert!(lattice_part(&m, &g).is_lattice());
    }

    #[test]
    fn omega_basics() {
        let m = ElemNilmanifold::elementary(2);
        let e1 = unit_vec(4, 0);
        let e3 = unit_vec(4, 2);
        assert_eq!(m.omega(&e1, &e3).unwrap(), int(1));
        assert_eq!(m.omega(&e3, &e1).unwrap(), int(-1));
        assert!(m.omega(&e1, &unit_vec(3, 0)).is_err());
    }

    #[test]
    fn nilsequence_example() {
        let m = ElemNilmanifold::elementary(1);
        let g = PolySeq::new(vec![rat(1, 5)], vec![rat(2, 5)], ExactPolynomial::zero()).unwrap();
        assert_eq!(nilsequence_phase(&m, &g, 3).value(), &rat(2, 5));
        assert_eq!(bracket_expr(&m, &g).eval_mod1(3).value(), &rat(2, 5));
    }

    #[test]
    fn degree_cap() {
        let p = ExactPolynomial::monomial(int(1), 3);
        assert!(matches!(PolySeq::new(vec![], vec![], p.clone()), Err(NilError::Degree { .. })));
        assert!(PolySeq::with_degree_cap(vec![], vec![], p, 3).is_ok());
    }
}
