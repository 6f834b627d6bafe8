//! Dense Gaussian elimination over `Complex<T>`.
//!
//! Exact for rationals. For floats, pivots below `tolerance · max|entry|`
//! count as zero (rank-revealing with partial pivoting on the modulus).

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Scalar;

pub type CMatrix<T> = Vec<Vec<Complex<T>>>;

fn is_zero_pivot<T: Scalar>(z: &Complex<T>, scale: &T) -> bool {
    if T::EXACT {
        z.is_zero()
    } else {
        let tol = T::tolerance() * scale.clone();
        z.norm_sqr() <= tol.clone() * tol
    }
}

/// Reduces to row echelon form in place and returns the rank.
pub fn row_reduce<T: Scalar>(m: &mut CMatrix<T>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let scale = {
        let mut s = T::zero();
        for z in m.iter().flatten() {
            let n = z.re.abs() + z.im.abs();
            if n > s {
                s = n;
            }
        }
        if s.is_zero() {
            return 0;
        }
        s
    };
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let mut best = rank;
        let mut best_norm = m[rank][col].norm_sqr();
        for (r, row) in m.iter().enumerate().take(rows).skip(rank + 1) {
            let n = row[col].norm_sqr();
            if n > best_norm {
                best = r;
                best_norm = n;
            }
            if T::EXACT && !best_norm.is_zero() {
                // any nonzero pivot is exact; avoid scanning for the largest
                break;
            }
        }
        if is_zero_pivot(&m[best][col], &scale) {
            continue;
        }
        m.swap(rank, best);
        let pivot = m[rank][col].clone();
        let inv = Complex::new(T::one(), T::zero()) / pivot;
        let support: Vec<usize> = (col..cols).filter(|&c| !m[rank][c].is_zero()).collect();
        for &c in &support {
            m[rank][c] = m[rank][c].clone() * inv.clone();
        }
        let (head, tail) = m.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail.iter_mut() {
            let factor = row[col].clone();
            if factor.is_zero() {
                continue;
            }
            for &c in &support {
                row[c] = row[c].clone() - factor.clone() * pivot_row[c].clone();
            }
            if !T::EXACT {
                row[col] = Complex::zero();
            }
        }
        rank += 1;
    }
    rank
}

pub fn rank<T: Scalar>(m: &CMatrix<T>) -> usize {
    let mut work = m.clone();
    row_reduce(&mut work)
}

/// Dimension of the kernel of `m` acting on column vectors of length `cols`.
pub fn nullity<T: Scalar>(m: &CMatrix<T>, cols: usize) -> usize {
    cols - rank(m)
}

/// Rank of a real matrix.
pub fn real_rank<T: Scalar>(m: &[Vec<T>]) -> usize {
    let lifted: CMatrix<T> =
        m.iter().map(|row| row.iter().map(|x| Complex::new(x.clone(), T::zero())).collect()).collect();
    rank(&lifted)
}

/// Solves the square system `a x = b`; `None` when singular.
pub fn solve<T: Scalar>(a: &CMatrix<T>, b: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
    let n = a.len();
    let mut aug: CMatrix<T> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let r = row_reduce(&mut aug);
    if r < n || (0..n).any(|i| is_zero_pivot(&aug[i][i], &T::one())) {
        return None;
    }
    let mut x: Vec<Complex<T>> = vec![Complex::zero(); n];
    for i in (0..n).rev() {
        let mut acc = aug[i][n].clone();
        for j in i + 1..n {
            acc = acc - aug[i][j].clone() * x[j].clone();
        }
        x[i] = acc;
    }
    Some(x)
}
