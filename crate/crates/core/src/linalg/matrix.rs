use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bits::BitBound;
use crate::error::{Error, Result};

/// Dense row-major matrix of unbounded integers.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BigMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl BigMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows; all rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::Shape(format!("row of length {} in a matrix with {} columns", row.len(), cols)));
            }
            data.extend(row);
        }
        Ok(Self { rows: n, cols, data })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::from_rows(cols, rows).expect("ragged literal matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> impl Iterator<Item = &[BigInt]> {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn entries(&self) -> impl Iterator<Item = &BigInt> {
        self.data.iter()
    }

    pub fn push_row(&mut self, row: Vec<BigInt>) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::Shape(format!(
                "cannot append row of length {} to a matrix with {} columns",
                row.len(),
                self.cols
            )));
        }
        self.data.extend(row);
        self.rows += 1;
        Ok(())
    }

    /// Stack `other` below `self`.
    pub fn stack(&self, other: &BigMatrix) -> Result<BigMatrix> {
        if self.cols != other.cols {
            return Err(Error::Shape(format!("cannot stack {} columns on {} columns", other.cols, self.cols)));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(BigMatrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn mul(&self, other: &BigMatrix) -> Result<BigMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BigMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "cannot apply a {}-column matrix to a vector of length {}",
                self.cols,
                v.len()
            )));
        }
        Ok(self
            .row_vecs()
            .map(|row| row.iter().zip(v).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn sub(&self, other: &BigMatrix) -> Result<BigMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape("subtraction of differently shaped matrices".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(BigMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn neg(&self) -> BigMatrix {
        BigMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl Index<(usize, usize)> for BigMatrix {
    type Output = BigInt;

    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for BigMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for BigMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BigMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.row_vecs() {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Largest `log2 |entry|`; an all-zero (or empty) matrix is 0-bounded.
pub fn bit_bound(m: &BigMatrix) -> BitBound {
    BitBound::of_entries(m.entries())
}

/// Bit bound on the determinant of any `k`-bounded `n x n` matrix:
/// `k n + n log2(n) / 2`.
pub fn hadamard_bound(k: &BitBound, n: usize) -> BitBound {
    assert!(n >= 1, "hadamard bound needs n >= 1");
    let n32 = n as u32;
    k.scale(n32).add(&BitBound::log2_of(n as u64).scale(n32).halve_by(2))
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &BigMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::Shape(format!("determinant of a {}x{} matrix", m.rows, m.cols)));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a: Vec<Vec<BigInt>> = m.row_vecs().map(|r| r.to_vec()).collect();
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = !sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                // Division is exact by Sylvester's identity.
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    Ok(if sign { -det } else { det })
}

/// Rank of a set of integer rows, by fraction-free elimination.
pub fn rank(rows: &[Vec<BigInt>]) -> usize {
    RowEchelon::new(rows.first().map_or(0, |r| r.len())).extend_all(rows)
}

/// Incremental fraction-free row echelon form, used to pick linearly
/// independent rows greedily.
pub(crate) struct RowEchelon {
    cols: usize,
    // Reduced rows together with their pivot columns.
    basis: Vec<(usize, Vec<BigInt>)>,
}

impl RowEchelon {
    pub(crate) fn new(cols: usize) -> Self {
        Self { cols, basis: Vec::new() }
    }

    pub(crate) fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Adds `row` if it is independent of the rows seen so far.
    pub(crate) fn try_insert(&mut self, row: &[BigInt]) -> bool {
        debug_assert_eq!(row.len(), self.cols);
        let mut r = row.to_vec();
        for (pivot, b) in &self.basis {
            if r[*pivot].is_zero() {
                continue;
            }
            let f = r[*pivot].clone();
            let p = b[*pivot].clone();
            for (x, y) in r.iter_mut().zip(b) {
                *x = &*x * &p - &f * y;
            }
            normalize(&mut r);
        }
        match r.iter().position(|x| !x.is_zero()) {
            Some(pivot) => {
                self.basis.push((pivot, r));
                true
            }
            None => false,
        }
    }

    fn extend_all(mut self, rows: &[Vec<BigInt>]) -> usize {
        for r in rows {
            self.try_insert(r);
        }
        self.rank()
    }
}

/// Divide a vector by the gcd of its entries (no-op on the zero vector).
pub fn normalize(v: &mut [BigInt]) {
    use num_integer::Integer;
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x = &*x / &g;
        }
    }
}

pub(crate) fn abs_all(v: &mut [BigInt]) {
    for x in v.iter_mut() {
        if x.is_negative() {
            *x = -&*x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_small_determinants() {
        for n in 1..6 {
            assert_eq!(determinant(&BigMatrix::identity(n)).unwrap(), BigInt::one());
        }
        let m = BigMatrix::from_i64(&[&[2, 1], &[1, 1]]);
        assert_eq!(determinant(&m).unwrap(), BigInt::from(1));
        let m = BigMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        assert_eq!(determinant(&m).unwrap(), BigInt::from(-1));
    }

    #[test]
    fn non_square_is_rejected() {
        let m = BigMatrix::zeros(2, 3);
        assert!(matches!(determinant(&m), Err(Error::Shape(_))));
    }

    #[test]
    fn bit_bound_examples() {
        assert_eq!(bit_bound(&BigMatrix::identity(3)), BitBound::zero());
        let m = BigMatrix::from_i64(&[&[8, -3], &[0, 1]]);
        assert_eq!(bit_bound(&m), BitBound::from_bits(3));
        assert_eq!(bit_bound(&BigMatrix::zeros(2, 2)), BitBound::zero());
    }

    #[test]
    fn hadamard_examples() {
        assert_eq!(hadamard_bound(&BitBound::zero(), 4), BitBound::from_bits(4));
        assert_eq!(hadamard_bound(&BitBound::from_bits(3), 4), BitBound::from_bits(16));
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows: Vec<Vec<BigInt>> =
            [[1, 2, 3], [2, 4, 6], [0, 1, 1]].iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        assert_eq!(rank(&rows), 2);
    }
}
