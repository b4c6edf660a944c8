//! Null spaces and extreme rays of small pointed cones.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::{determinant, normalize, BigMatrix};

/// An integral basis of `{x : M x = 0}`, each vector gcd-reduced.
pub fn nullspace(m: &BigMatrix) -> Vec<Vec<BigInt>> {
    let n = m.cols();
    let mut rows: Vec<Vec<BigRational>> =
        m.row_vecs().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let (head, tail) = if i < r {
                    let (a, b) = rows.split_at_mut(r);
                    (&mut a[i], &b[0])
                } else {
                    let (a, b) = rows.split_at_mut(i);
                    (&mut b[0], &a[r])
                };
                for (x, y) in head.iter_mut().zip(tail) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); n];
            v[f] = BigRational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -rows[i][f].clone();
            }
            to_integral(&v)
        })
        .collect()
}

/// Clears denominators and divides out the content.
pub(crate) fn to_integral(v: &[BigRational]) -> Vec<BigInt> {
    use num_integer::Integer;
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let mut out: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    normalize(&mut out);
    out
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    acc
}

/// Extreme rays of the pointed cone `{u : G u >= 0}`, gcd-reduced and
/// sorted. Returns `None` when enumerating the candidate row subsets would
/// take more than `limit` steps.
pub fn extreme_rays(g: &BigMatrix, limit: u128) -> Option<Vec<Vec<BigInt>>> {
    let d = g.cols();
    if d == 0 {
        return Some(Vec::new());
    }
    let rows: Vec<Vec<BigInt>> = g
        .row_vecs()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .map(|r| {
            let mut r = r.to_vec();
            normalize(&mut r);
            r
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let feasible = |u: &[BigInt]| rows.iter().all(|r| !dot(r, u).is_negative());
    if d == 1 {
        let up = vec![BigInt::one()];
        let down = vec![-BigInt::one()];
        return Some([up, down].into_iter().filter(|u| feasible(u)).collect());
    }
    if binomial(rows.len(), d - 1) > limit {
        return None;
    }
    let mut found = BTreeSet::new();
    let mut pick: Vec<usize> = (0..d - 1).collect();
    if rows.len() < d - 1 {
        return Some(Vec::new());
    }
    loop {
        if let Some(u) = line_through(&rows, &pick, d) {
            for cand in [u.clone(), u.iter().map(|x| -x).collect()] {
                if feasible(&cand) {
                    found.insert(cand);
                }
            }
        }
        // Next (d-1)-subset in lexicographic order.
        let mut i = d - 1;
        loop {
            if i == 0 {
                return Some(found.into_iter().collect());
            }
            i -= 1;
            if pick[i] < rows.len() - (d - 1 - i) {
                pick[i] += 1;
                for j in i + 1..d - 1 {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// The generalised cross product of `d - 1` rows in dimension `d`, or `None`
/// when they are dependent.
fn line_through(rows: &[Vec<BigInt>], pick: &[usize], d: usize) -> Option<Vec<BigInt>> {
    let mut u = Vec::with_capacity(d);
    for skip in 0..d {
        let minor = BigMatrix::from_rows(
            d - 1,
            pick.iter().map(|&r| (0..d).filter(|&c| c != skip).map(|c| rows[r][c].clone()).collect()).collect(),
        )
        .expect("square minor");
        let det = determinant(&minor).expect("square minor");
        u.push(if skip % 2 == 0 { det } else { -det });
    }
    if u.iter().all(Zero::is_zero) {
        return None;
    }
    normalize(&mut u);
    Some(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn kernel_of_rank_one() {
        let m = BigMatrix::from_i64(&[&[1, -1, 0], &[2, -2, 0]]);
        let k = nullspace(&m);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
        assert!(nullspace(&BigMatrix::identity(3)).is_empty());
    }

    #[test]
    fn orthant_rays() {
        let rays = extreme_rays(&BigMatrix::identity(3), 1000).unwrap();
        assert_eq!(rays, vec![ints(&[0, 0, 1]), ints(&[0, 1, 0]), ints(&[1, 0, 0])]);
    }

    #[test]
    fn wedge_rays() {
        // x >= 0, y >= 0, x - y >= 0 in the plane.
        let g = BigMatrix::from_i64(&[&[1, 0], &[0, 1], &[1, -1]]);
        let rays = extreme_rays(&g, 1000).unwrap();
        assert_eq!(rays, vec![ints(&[1, 0]), ints(&[1, 1])]);
    }
}
