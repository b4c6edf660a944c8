//! Exact phase-one simplex for cone feasibility.
//!
//! Decides whether `{v : v >= 0, M v >= 0, sum(v) = 1}` is non-empty. The
//! problem is kept in dictionary form: every slack `s_r = M_r . v` and the
//! artificial `a = 1 - sum(v)` start basic, so the dictionary has one column
//! per nonbasic variable (always `n`) rather than one per constraint.
//! Entering and leaving variables follow Bland's least-index rule, which
//! guarantees termination under exact arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::BigMatrix;

/// Result of phase one: the vertex reached, if the region is non-empty.
#[derive(Clone, Debug)]
pub(crate) struct PhaseOne {
    pub vertex: Option<Vec<BigRational>>,
}

struct Dictionary {
    n: usize,
    // Variable index held by each basic row and by each nonbasic column.
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    // x_basic[i] = constant[i] + sum_j coeff[i][j] * x_nonbasic[j]
    constant: Vec<BigRational>,
    coeff: Vec<Vec<BigRational>>,
    // Objective (value of the artificial) in the same form.
    obj_constant: BigRational,
    obj: Vec<BigRational>,
}

impl Dictionary {
    fn new(m: &BigMatrix) -> Self {
        let n = m.cols();
        let rows = m.rows();
        let int = |x: &BigInt| BigRational::from_integer(x.clone());
        let mut coeff: Vec<Vec<BigRational>> = m.row_vecs().map(|r| r.iter().map(int).collect()).collect();
        let mut constant = vec![BigRational::zero(); rows];
        // Artificial row: a = 1 - sum v.
        coeff.push(vec![-BigRational::one(); n]);
        constant.push(BigRational::one());
        // Variables: v_0..v_{n-1}, s_0..s_{rows-1}, a.
        let basic = (n..n + rows + 1).collect();
        Self {
            n,
            basic,
            nonbasic: (0..n).collect(),
            constant,
            coeff,
            obj_constant: BigRational::one(),
            obj: vec![-BigRational::one(); n],
        }
    }

    fn entering(&self) -> Option<usize> {
        // Least variable index with negative reduced cost.
        (0..self.obj.len()).filter(|&j| self.obj[j].is_negative()).min_by_key(|&j| self.nonbasic[j])
    }

    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(BigRational, usize)> = None;
        for i in 0..self.basic.len() {
            let c = &self.coeff[i][col];
            if !c.is_negative() {
                continue;
            }
            let ratio = &self.constant[i] / -c;
            let better = match &best {
                None => true,
                Some((r, bi)) => ratio < *r || (ratio == *r && self.basic[i] < self.basic[*bi]),
            };
            if better {
                best = Some((ratio, i));
            }
        }
        best.map(|(_, i)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.coeff[row][col].clone();
        // Solve the pivot row for the entering variable.
        let inv = -p.recip();
        let mut new_row: Vec<BigRational> = self.coeff[row].iter().map(|c| c * &inv).collect();
        new_row[col] = -inv.clone();
        let new_const = &self.constant[row] * &inv;

        for i in 0..self.basic.len() {
            if i == row {
                continue;
            }
            let f = self.coeff[i][col].clone();
            if f.is_zero() {
                continue;
            }
            for (j, nr) in new_row.iter().enumerate() {
                if j == col {
                    self.coeff[i][j] = &f * nr;
                } else if !nr.is_zero() {
                    let delta = &f * nr;
                    self.coeff[i][j] += delta;
                }
            }
            let delta = &f * &new_const;
            self.constant[i] += delta;
        }
        let f = self.obj[col].clone();
        if !f.is_zero() {
            for (j, nr) in new_row.iter().enumerate() {
                if j == col {
                    self.obj[j] = &f * nr;
                } else if !nr.is_zero() {
                    let delta = &f * nr;
                    self.obj[j] += delta;
                }
            }
            self.obj_constant += &f * &new_const;
        }
        self.coeff[row] = new_row;
        self.constant[row] = new_const;
        std::mem::swap(&mut self.basic[row], &mut self.nonbasic[col]);
    }

    fn point(&self) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.n];
        for (i, &var) in self.basic.iter().enumerate() {
            if var < self.n {
                v[var] = self.constant[i].clone();
            }
        }
        v
    }
}

/// Runs phase one on `{v >= 0, M v >= 0, sum v = 1}`.
pub(crate) fn phase_one(m: &BigMatrix) -> PhaseOne {
    let mut dict = Dictionary::new(m);
    loop {
        if dict.obj_constant.is_zero() {
            return PhaseOne { vertex: Some(dict.point()) };
        }
        let Some(col) = dict.entering() else {
            return PhaseOne { vertex: None };
        };
        // The artificial objective is bounded below by zero, so a leaving
        // row always exists.
        let row = dict.leaving(col).expect("phase-one objective is bounded");
        dict.pivot(row, col);
    }
}

/// Whether there is a rational `v >= 0`, `v != 0` with `M v >= 0`.
pub fn cone_feasible(m: &BigMatrix) -> bool {
    if m.cols() == 0 {
        return false;
    }
    phase_one(m).vertex.is_some()
}

/// An integral `v >= 0`, `v != 0` with `M v >= 0`, if one exists.
pub fn cone_point(m: &BigMatrix) -> Option<Vec<BigInt>> {
    if m.cols() == 0 {
        return None;
    }
    phase_one(m).vertex.map(|v| super::cone::to_integral(&v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_cones() {
        assert!(cone_feasible(&BigMatrix::identity(3)));
        assert!(!cone_feasible(&BigMatrix::identity(3).neg()));
    }

    #[test]
    fn vertex_is_feasible() {
        let m = BigMatrix::from_i64(&[&[1, -2, 0], &[-1, 0, 3], &[0, 1, -1]]);
        let res = phase_one(&m);
        let v = res.vertex.expect("feasible");
        let sum: BigRational = v.iter().cloned().sum();
        assert!(sum.is_one());
        for row in m.row_vecs() {
            let dot: BigRational = row.iter().zip(&v).map(|(a, b)| BigRational::from_integer(a.clone()) * b).sum();
            assert!(!dot.is_negative());
        }
    }

    #[test]
    fn single_row_cone() {
        // x - y >= 0 and -x + y >= 0 pin x = y.
        let m = BigMatrix::from_i64(&[&[1, -1], &[-1, 1]]);
        let v = phase_one(&m).vertex.unwrap();
        assert_eq!(v[0], v[1]);
    }
}
