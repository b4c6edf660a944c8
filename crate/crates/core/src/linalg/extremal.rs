//! Small integral points on extremal rays of `{v >= 0 : M v >= 0}`.
//!
//! Phase one of the simplex lands on a vertex of the slice `sum(v) = 1`. The
//! rows of `M` that are tight there span a space of rank `n - 1`; the first
//! `n - 1` independent ones in row order, together with the all-ones row,
//! form a square system whose Cramer numerators are a scaled copy of the
//! vertex. Those numerators are determinants of matrices with entries from
//! `M`, so they obey the Hadamard bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::{abs_all, determinant, normalize, BigMatrix, RowEchelon};
use super::simplex::phase_one;
use crate::error::{Error, Result};

/// A non-trivial, non-negative, gcd-reduced integral vector on an extremal
/// ray of the cone `{v >= 0 : M v >= 0}`.
///
/// The caller is expected to include the coordinate rows (e.g. an identity
/// block) in `M`, so that `v >= 0` is among the constraints.
pub fn extremal_vector(m: &BigMatrix) -> Result<Vec<BigInt>> {
    let n = m.cols();
    if n == 0 {
        return Err(Error::InfeasibleCone);
    }
    let vertex = phase_one(m).vertex.ok_or(Error::InfeasibleCone)?;
    let tight = tight_rows(m, &vertex);
    let support = independent_prefix(m, &tight, n - 1).ok_or_else(|| {
        Error::Internal(format!(
            "vertex has only {} independent tight rows, expected {}",
            RowEchelon::rank_of(m, &tight),
            n - 1
        ))
    })?;
    let rows: Vec<&[BigInt]> = support.iter().map(|&r| m.row(r)).collect();
    let v = cramer_vector(&rows, n)?;

    // The construction guarantees membership; check it anyway since a
    // violation means the pivoting produced a non-vertex.
    let image = m.mul_vec(&v)?;
    if v.iter().all(Zero::is_zero) || image.iter().any(Signed::is_negative) {
        return Err(Error::Internal("extremal vector left the cone".into()));
    }
    Ok(v)
}

/// Indices of rows with `M_r . vertex = 0`.
fn tight_rows(m: &BigMatrix, vertex: &[BigRational]) -> Vec<usize> {
    (0..m.rows())
        .filter(|&r| {
            let dot: BigRational = m
                .row(r)
                .iter()
                .zip(vertex)
                .filter(|(a, _)| !a.is_zero())
                .map(|(a, x)| BigRational::from_integer(a.clone()) * x)
                .sum();
            dot.is_zero()
        })
        .collect()
}

/// The first `want` linearly independent rows among `candidates`, scanning in
/// order.
fn independent_prefix(m: &BigMatrix, candidates: &[usize], want: usize) -> Option<Vec<usize>> {
    let mut echelon = RowEchelon::new(m.cols());
    let mut chosen = Vec::with_capacity(want);
    for &r in candidates {
        if chosen.len() == want {
            break;
        }
        if echelon.try_insert(m.row(r)) {
            chosen.push(r);
        }
    }
    (chosen.len() == want).then_some(chosen)
}

impl RowEchelon {
    fn rank_of(m: &BigMatrix, rows: &[usize]) -> usize {
        let mut e = RowEchelon::new(m.cols());
        for &r in rows {
            e.try_insert(m.row(r));
        }
        e.rank()
    }
}

/// Solves `A v = (1, 0, .., 0)` up to scale, where `A` has the all-ones row
/// on top of `tight` (which must hold `n - 1` independent rows). Returns
/// `(|det A_0|, .., |det A_{n-1}|)` divided by its gcd, where `A_i` replaces
/// column `i` of `A` by the first unit vector.
pub fn cramer_vector(tight: &[&[BigInt]], n: usize) -> Result<Vec<BigInt>> {
    if tight.len() + 1 != n {
        return Err(Error::Shape(format!("need {} tight rows for {} columns, got {}", n - 1, n, tight.len())));
    }
    let mut a = BigMatrix::zeros(n, n);
    for j in 0..n {
        a[(0, j)] = BigInt::one();
    }
    for (i, row) in tight.iter().enumerate() {
        for j in 0..n {
            a[(i + 1, j)] = row[j].clone();
        }
    }
    if determinant(&a)?.is_zero() {
        return Err(Error::Internal("tight rows are dependent on the all-ones row".into()));
    }
    let mut v = Vec::with_capacity(n);
    for col in 0..n {
        let mut ai = a.clone();
        for r in 0..n {
            ai[(r, col)] = if r == 0 { BigInt::one() } else { BigInt::zero() };
        }
        v.push(determinant(&ai)?);
    }
    abs_all(&mut v);
    normalize(&mut v);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn identity_picks_first_axis() {
        let v = extremal_vector(&BigMatrix::identity(2)).unwrap();
        assert_eq!(v, ints(&[1, 0]));
    }

    #[test]
    fn cramer_with_diagonal_tight_row() {
        let row = ints(&[1, -1]);
        let v = cramer_vector(&[&row], 2).unwrap();
        assert_eq!(v, ints(&[1, 1]));
    }

    #[test]
    fn infeasible_cone_errors() {
        let m = BigMatrix::identity(2).neg();
        assert!(matches!(extremal_vector(&m), Err(Error::InfeasibleCone)));
    }

    #[test]
    fn result_lies_in_cone() {
        let m = BigMatrix::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[-1, 2, 0], &[3, -1, -1]]);
        let v = extremal_vector(&m).unwrap();
        assert!(v.iter().any(|x| !x.is_zero()));
        assert!(m.mul_vec(&v).unwrap().iter().all(|x| !x.is_negative()));
    }
}
