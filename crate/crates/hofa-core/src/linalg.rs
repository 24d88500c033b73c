//! Small dense linear algebra over the rationals.
//!
//! Matrices are row lists. Everything is exact; sizes here never exceed a
//! dozen rows so plain Gaussian elimination is fine.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ratmod::{int, ExactRational};

pub type QVec = Vec<ExactRational>;
pub type QMat = Vec<QVec>;

pub fn to_q(v: &[i64]) -> QVec {
    v.iter().map(|&x| int(x)).collect()
}

pub fn to_q_mat(m: &[Vec<i64>]) -> QMat {
    m.iter().map(|r| to_q(r)).collect()
}

pub fn dot(a: &[ExactRational], b: &[ExactRational]) -> ExactRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_int(a: &[i64], b: &[ExactRational]) -> ExactRational {
    a.iter().zip(b).map(|(&x, y)| int(x) * y).sum()
}

pub fn dot_i64(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// Reduced row echelon form; returns the reduced matrix and pivot columns.
pub fn rref(m: &[QVec]) -> (QMat, Vec<usize>) {
    let mut a: QMat = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &[QVec]) -> usize {
    rref(m).1.len()
}

pub fn rank_int(m: &[Vec<i64>]) -> usize {
    rank(&to_q_mat(m))
}

/// Basis of `{x : m x = 0}` in `Q^cols`.
pub fn kernel(m: &[QVec], cols: usize) -> QMat {
    if m.is_empty() {
        return (0..cols)
            .map(|i| (0..cols).map(|j| int((i == j) as i64)).collect())
            .collect();
    }
    let (a, pivots) = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![ExactRational::zero(); cols];
            v[f] = ExactRational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Integer basis of the rational kernel, each vector primitive.
pub fn kernel_int(m: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    kernel(&to_q_mat(m), cols)
        .iter()
        .map(|v| primitive_int(v).expect("kernel vector fits in i64"))
        .collect()
}

/// Scales a rational vector to a primitive integer vector (first nonzero entry positive).
pub fn primitive_int(v: &[ExactRational]) -> Option<Vec<i64>> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * ExactRational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return Some(vec![0; v.len()]);
    }
    let sign = ints.iter().find(|x| !x.is_zero()).map_or(1, |x| if x.is_negative() { -1 } else { 1 });
    ints.iter().map(|x| (x / &g * BigInt::from(sign)).to_i64()).collect()
}

pub fn inverse(m: &[QVec]) -> Option<QMat> {
    let n = m.len();
    let aug: QMat = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| int((i == j) as i64)));
            row
        })
        .collect();
    let (a, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn det(m: &[QVec]) -> ExactRational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = ExactRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return ExactRational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            let f = &a[i][c] / &a[c][c];
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] -= t;
            }
        }
    }
    d
}

/// Some solution of `m x = b`, if one exists.
pub fn solve(m: &[QVec], b: &[ExactRational]) -> Option<QVec> {
    let cols = m.first().map_or(0, |r| r.len());
    let aug: QMat = m
        .iter()
        .zip(b)
        .map(|(r, y)| {
            let mut row = r.clone();
            row.push(y.clone());
            row
        })
        .collect();
    let (a, pivots) = rref(&aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![ExactRational::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = a[r][cols].clone();
    }
    Some(x)
}

pub fn transpose(m: &[QVec]) -> QMat {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_mul(a: &[QVec], b: &[QVec]) -> QMat {
    let bt = transpose(b);
    a.iter().map(|r| bt.iter().map(|c| dot(r, c)).collect()).collect()
}

pub fn mat_vec(a: &[QVec], v: &[ExactRational]) -> QVec {
    a.iter().map(|r| dot(r, v)).collect()
}

/// True when the row spaces of `a` and `b` (vectors of length `cols`) coincide.
pub fn same_span(a: &[QVec], b: &[QVec]) -> bool {
    let ra = rank(a);
    let rb = rank(b);
    let mut both = a.to_vec();
    both.extend_from_slice(b);
    ra == rb && rank(&both) == ra
}

pub fn in_span(basis: &[QVec], v: &[ExactRational]) -> bool {
    let mut both = basis.to_vec();
    let r = rank(&both);
    both.push(v.to_vec());
    rank(&both) == r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmod::rat;

    #[test]
    fn rank_and_kernel() {
        let m = to_q_mat(&[vec![1, 2, 3], vec![2, 4, 6]]);
        assert_eq!(rank(&m), 1);
        let k = kernel(&m, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(mat_vec(&m, v).iter().all(|x| x.is_zero()));
        }
        assert_eq!(kernel_int(&[vec![2, 4, 6]], 3), vec![vec![2, -1, 0], vec![3, 0, -1]]);
    }

    #[test]
    fn inverse_det_solve() {
        let m = vec![vec![int(2), int(1)], vec![int(1), int(1)]];
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, vec![vec![int(1), int(-1)], vec![int(-1), int(2)]]);
        assert_eq!(det(&m), int(1));
        assert!(inverse(&to_q_mat(&[vec![1, 2], vec![2, 4]])).is_none());
        let x = solve(&m, &[int(3), rat(5, 2)]).unwrap();
        assert_eq!(mat_vec(&m, &x), vec![int(3), rat(5, 2)]);
        assert!(solve(&to_q_mat(&[vec![1, 1], vec![1, 1]]), &[int(0), int(1)]).is_none());
    }

    #[test]
    fn primitive() {
        assert_eq!(primitive_int(&[rat(-1, 2), rat(3, 4)]), Some(vec![2, -3]));
    }
}
