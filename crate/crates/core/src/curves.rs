//! Edge-vector coordinates for multicurves.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::BigMatrix;
use crate::triangulation::{Corner, Triangulation};

/// Intersection numbers of a multicurve with the ordered edges of a
/// triangulation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeVector(pub Vec<BigInt>);

impl EdgeVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![BigInt::zero(); n])
    }

    pub fn from_i64(v: &[i64]) -> Self {
        Self(v.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn scaled(&self, k: &BigInt) -> Self {
        Self(self.0.iter().map(|x| x * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Length and sign checks shared by every consumer.
    pub fn check_shape(&self, zeta: usize) -> Result<()> {
        if self.0.len() != zeta {
            return Err(Error::Length { expected: zeta, got: self.0.len() });
        }
        if self.0.iter().any(Signed::is_negative) {
            return Err(Error::Negative);
        }
        Ok(())
    }
}

impl fmt::Display for EdgeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for EdgeVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self(Vec::new()));
        }
        s.split(',')
            .map(|p| p.trim().parse::<BigInt>().map_err(|_| Error::Parse(format!("`{}` is not an integer", p.trim()))))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// `v[i] + v[j] - v[k]` at a corner with sides `i`, `j` opposite `k`. This is
/// twice the number of normal arcs cutting the corner.
pub fn corner_value(t: &Triangulation, v: &[BigInt], corner: Corner) -> BigInt {
    let (i, j, k) = t.corner_edges(corner);
    &v[i] + &v[j] - &v[k]
}

/// Whether `v` is the edge vector of a multicurve: non-zero, every corner
/// value even and non-negative, and every vertex has a corner with value 0.
pub fn is_multicurve(t: &Triangulation, v: &EdgeVector) -> Result<bool> {
    v.check_shape(t.zeta())?;
    Ok(multicurve_conditions(t, v.entries()))
}

pub(crate) fn multicurve_conditions(t: &Triangulation, v: &[BigInt]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return false;
    }
    for f in 0..t.faces().len() {
        for index in 0..3 {
            let c = corner_value(t, v, Corner { face: f, index });
            if c.is_negative() || c.is_odd() {
                return false;
            }
        }
    }
    (0..t.num_vertices()).all(|vx| t.corners_at(vx).iter().any(|&c| corner_value(t, v, c).is_zero()))
}

/// One chosen corner per vertex, indexed by vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CornerChoice(pub Vec<Corner>);

impl CornerChoice {
    pub fn validate(&self, t: &Triangulation) -> Result<()> {
        if self.0.len() != t.num_vertices() {
            return Err(Error::CornerChoice(format!("{} corners for {} vertices", self.0.len(), t.num_vertices())));
        }
        for (vx, c) in self.0.iter().enumerate() {
            if c.face >= t.faces().len() || c.index >= 3 || t.vertex_of(*c) != vx {
                return Err(Error::CornerChoice(format!("{c:?} is not a corner at vertex {vx}")));
            }
        }
        Ok(())
    }
}

fn corner_row(t: &Triangulation, corner: Corner) -> Vec<BigInt> {
    let (i, j, k) = t.corner_edges(corner);
    let mut row = vec![BigInt::zero(); t.zeta()];
    row[i] += 1;
    row[j] += 1;
    row[k] -= 1;
    row
}

/// Constraint matrix for one corner choice: the `2 zeta` corner rows
/// `v[i] + v[j] - v[k] >= 0` (face by face), then for each vertex the chosen
/// corner row and its negation. Parity is not encoded.
pub fn corner_matrix(t: &Triangulation, choice: &CornerChoice) -> Result<BigMatrix> {
    choice.validate(t)?;
    let mut rows = Vec::with_capacity(2 * t.zeta() + 2 * t.num_vertices());
    for f in 0..t.faces().len() {
        for index in 0..3 {
            rows.push(corner_row(t, Corner { face: f, index }));
        }
    }
    for &c in &choice.0 {
        let row = corner_row(t, c);
        rows.push(row.iter().map(|x| -x).collect());
        rows.push(row);
    }
    BigMatrix::from_rows(t.zeta(), rows)
}

/// Every corner choice, in lexicographic order of per-vertex corner indices
/// (the last vertex varies fastest).
pub fn enumerate_corner_choices(t: &Triangulation) -> impl Iterator<Item = CornerChoice> + '_ {
    let nv = t.num_vertices();
    let sizes: Vec<usize> = (0..nv).map(|v| t.corners_at(v).len()).collect();
    let mut counter: Option<Vec<usize>> = Some(vec![0; nv]);
    std::iter::from_fn(move || {
        let current = counter.take()?;
        let choice = CornerChoice(current.iter().enumerate().map(|(v, &i)| t.corners_at(v)[i]).collect());
        let mut next = current;
        let mut pos = nv;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            next[pos] += 1;
            if next[pos] < sizes[pos] {
                counter = Some(next);
                break;
            }
            next[pos] = 0;
        }
        Some(choice)
    })
}

pub fn count_corner_choices(t: &Triangulation) -> usize {
    (0..t.num_vertices()).map(|v| t.corners_at(v).len()).product()
}

/// Primitive components of a multicurve with multiplicities, found by
/// tracing normal arcs through faces. Components are returned sorted.
pub fn decompose(t: &Triangulation, v: &EdgeVector) -> Result<Vec<(EdgeVector, usize)>> {
    if !is_multicurve(t, v)? {
        return Err(Error::NotMulticurve);
    }
    let counts: Vec<usize> = v
        .entries()
        .iter()
        .map(|x| x.to_usize().ok_or_else(|| Error::Internal("edge weight too large to trace".into())))
        .collect::<Result<_>>()?;
    // Strand (e, q) is the q-th crossing of edge e counted from its tail.
    let offset: Vec<usize> = counts
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect();
    let total: usize = counts.iter().sum();
    // Each strand has a partner in each of the two faces containing its edge.
    let mut partner = vec![[(usize::MAX, 0usize); 2]; total];
    for face in t.faces() {
        let n: Vec<usize> = face.iter().map(|s| counts[s.edge]).collect();
        for i in 0..3 {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            let arcs = (n[i] + n[j] - n[k]) / 2;
            for a in 0..arcs {
                // Arc a (counted from the corner) meets side i at local
                // position n_i - 1 - a and side j at local position a.
                let pi = local_to_strand(face[i], n[i], n[i] - 1 - a, &offset);
                let pj = local_to_strand(face[j], n[j], a, &offset);
                let slot_i = usize::from(!face[i].forward);
                let slot_j = usize::from(!face[j].forward);
                partner[pi][slot_i] = (pj, slot_j);
                partner[pj][slot_j] = (pi, slot_i);
            }
        }
    }
    let edge_of: Vec<usize> = counts.iter().enumerate().flat_map(|(e, &n)| std::iter::repeat_n(e, n)).collect();
    let mut visited = vec![false; total];
    let mut found: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for start in 0..total {
        if visited[start] {
            continue;
        }
        let mut comp = vec![0usize; counts.len()];
        // Walk out of each strand through the face it was not entered from.
        let (mut cur, mut entered) = (start, 1usize);
        loop {
            visited[cur] = true;
            comp[edge_of[cur]] += 1;
            let (next, slot) = partner[cur][1 - entered];
            cur = next;
            entered = slot;
            if cur == start {
                break;
            }
            if visited[cur] {
                return Err(Error::Internal("strand tracing failed to close".into()));
            }
        }
        *found.entry(comp).or_insert(0) += 1;
    }
    Ok(found.into_iter().map(|(c, m)| (EdgeVector(c.into_iter().map(BigInt::from).collect()), m)).collect())
}

fn local_to_strand(side: crate::triangulation::Side, n: usize, local: usize, offset: &[usize]) -> usize {
    let q = if side.forward { local } else { n - 1 - local };
    offset[side.edge] + q
}

/// Whether `v` (assumed to be a multicurve) is primitive: a single component
/// with multiplicity one.
pub fn is_connected_curve(t: &Triangulation, v: &EdgeVector) -> Result<bool> {
    let parts = decompose(t, v)?;
    Ok(parts.len() == 1 && parts[0].1 == 1)
}

/// All multicurves with entries in `0..=max_entry`, in lexicographic order.
pub fn multicurves_up_to(t: &Triangulation, max_entry: u64) -> Vec<EdgeVector> {
    let zeta = t.zeta();
    let mut out = Vec::new();
    let mut cur = vec![0u64; zeta];
    loop {
        let v: Vec<BigInt> = cur.iter().map(|&x| BigInt::from(x)).collect();
        if multicurve_conditions(t, &v) {
            out.push(EdgeVector(v));
        }
        let mut pos = zeta;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if cur[pos] < max_entry {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 0;
        }
    }
}
