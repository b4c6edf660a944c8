//! Deciding whether a mapping class fixes some multicurve, with a checkable
//! certificate when it does.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use crate::bits::{vector_bits, BitBound};
use crate::curves::{corner_matrix, enumerate_corner_choices, multicurve_conditions, multicurves_up_to, EdgeVector};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{bit_bound, cone_feasible, extremal_vector, extreme_rays, hadamard_bound, nullspace, BigMatrix};
use crate::mapping::{Branch, CellMatrices, MappingClassPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Reducible,
    Irreducible,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Reducible => "reducible",
            Verdict::Irreducible => "irreducible",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BranchStats {
    pub explored: usize,
    pub pruned: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducibilityReport {
    pub verdict: Verdict,
    #[serde(serialize_with = "ser_vector")]
    pub certificate: Option<EdgeVector>,
    pub branch_stats: BranchStats,
    /// Bits allowed for any entry of a certificate on this instance.
    #[serde(serialize_with = "ser_bound")]
    pub bound: BitBound,
}

fn ser_vector<S: Serializer>(v: &Option<EdgeVector>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_seq(v.entries().iter().map(|x| x.to_string())),
        None => s.serialize_none(),
    }
}

fn ser_bound<S: Serializer>(b: &BitBound, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&b.to_string())
}

#[derive(Clone, Copy, Debug)]
pub struct DecideOptions {
    pub prune: bool,
    pub exec: Exec,
    /// Branches handed to the executor at a time.
    pub batch: usize,
    /// Before walking the branch tree, the cells of fixed multicurves with
    /// entries up to this value are searched first. Zero disables this.
    pub seed_entry: u64,
}

impl Default for DecideOptions {
    fn default() -> Self {
        Self { prune: true, exec: Exec::default(), batch: 64, seed_entry: 2 }
    }
}

/// `(A - Id; -(A - Id); B; F; Id)`.
pub fn assemble_m(cell: &CellMatrices, f: &BigMatrix) -> Result<BigMatrix> {
    let n = cell.a.cols();
    if !cell.a.is_square() || cell.b.cols() != n || f.cols() != n {
        return Err(Error::Shape(format!(
            "A is {}x{}, B has {} columns, F has {} columns",
            cell.a.rows(),
            n,
            cell.b.cols(),
            f.cols()
        )));
    }
    let fixed = fixed_block(cell)?;
    fixed.stack(f)?.stack(&BigMatrix::identity(n))
}

fn fixed_block(cell: &CellMatrices) -> Result<BigMatrix> {
    let d = cell.a.sub(&BigMatrix::identity(cell.a.cols()))?;
    d.stack(&d.neg())?.stack(&cell.b)
}

/// The certificate-size bound for systems whose entries fit in `k` bits.
pub fn certificate_bound(k: &BitBound, zeta: usize) -> BitBound {
    hadamard_bound(k, zeta).add_bits(1)
}

fn cell_bits(cell: &CellMatrices) -> BitBound {
    let d = cell.a.sub(&BigMatrix::identity(cell.a.cols())).expect("square cell map");
    bit_bound(&d).max(bit_bound(&cell.b))
}

/// Cap on the row subsets examined when listing the extreme rays of a
/// cell's fixed cone before falling back to linear programming.
const RAY_LIMIT: u128 = 200_000;

/// The corner systems of a triangulation: the face corner rows shared by
/// every choice, and for each choice the corners forced to vanish.
struct CornerSystems {
    faces: BigMatrix,
    matrices: Vec<BigMatrix>,
    vanishing: Vec<Vec<Vec<BigInt>>>,
}

impl CornerSystems {
    fn new(t: &crate::triangulation::Triangulation) -> Result<Self> {
        let shared = 3 * t.faces().len();
        let matrices: Vec<BigMatrix> =
            enumerate_corner_choices(t).map(|c| corner_matrix(t, &c)).collect::<Result<_>>()?;
        let faces =
            BigMatrix::from_rows(t.zeta(), matrices[0].row_vecs().take(shared).map(<[BigInt]>::to_vec).collect())?;
        let vanishing = matrices
            .iter()
            .map(|m| m.row_vecs().skip(shared).skip(1).step_by(2).map(<[BigInt]>::to_vec).collect())
            .collect();
        Ok(Self { faces, matrices, vanishing })
    }
}

/// Searches for a cell with a non-trivial fixed cone. The cells of small
/// fixed multicurves are tried first; otherwise the branch tree is walked,
/// and within a cell corner choices are tried in order. The first hit yields
/// the certificate.
pub fn decide(path: &MappingClassPath, opts: DecideOptions) -> Result<ReducibilityReport> {
    let start = path.start();
    let zeta = start.zeta();
    let corners = CornerSystems::new(start)?;

    let seeds: Vec<EdgeVector> = if opts.seed_entry > 0 {
        multicurves_up_to(start, opts.seed_entry).into_iter().filter(|v| path.fixes(v)).collect()
    } else {
        Vec::new()
    };
    let hit = opts.exec.find_map_first(&seeds, |v| match path.cell_of(v) {
        Ok(cell) => search_branch(&cell, &corners),
        Err(e) => Some(Err(e)),
    });
    if let Some(found) = hit {
        return certified(path, found, BranchStats { explored: seeds.len(), pruned: 0 });
    }

    let mut branches = if opts.prune { path.branches_in(corners.faces.clone()) } else { path.branches(false) };
    let mut explored = 0;
    let mut max_bits = BitBound::zero();
    loop {
        let batch: Vec<Branch> = branches.by_ref().take(opts.batch.max(1)).collect();
        if batch.is_empty() {
            break;
        }
        explored += batch.len();
        for b in &batch {
            max_bits = max_bits.max(cell_bits(&b.cell));
        }
        let hit = opts.exec.find_map_first(&batch, |b| search_branch(&b.cell, &corners));
        if let Some(found) = hit {
            let stats = BranchStats { explored, pruned: branches.pruned() };
            return certified(path, found, stats);
        }
    }
    Ok(ReducibilityReport {
        verdict: Verdict::Irreducible,
        certificate: None,
        branch_stats: BranchStats { explored, pruned: branches.pruned() },
        bound: certificate_bound(&max_bits, zeta),
    })
}

type Hit = Result<(CellMatrices, Vec<BigInt>)>;

fn certified(path: &MappingClassPath, found: Hit, stats: BranchStats) -> Result<ReducibilityReport> {
    let (cell, v0) = found?;
    let cert = EdgeVector(v0.iter().map(|x| x * 2).collect());
    if !path.fixes(&cert) {
        return Err(Error::Internal(format!("extracted certificate {cert} is not a fixed multicurve")));
    }
    Ok(ReducibilityReport {
        verdict: Verdict::Reducible,
        certificate: Some(cert),
        branch_stats: stats,
        bound: certificate_bound(&cell_bits(&cell), path.zeta()),
    })
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn search_branch(cell: &CellMatrices, corners: &CornerSystems) -> Option<Hit> {
    let fixed = match fixed_block(cell) {
        Ok(m) => m,
        Err(e) => return Some(Err(e)),
    };
    let first = match screen_by_rays(cell, corners) {
        Some(Some(j)) => j,
        Some(None) => return None,
        None => return search_by_lp(cell, &fixed, corners),
    };
    let m = assemble_m(cell, &corners.matrices[first]).expect("same width");
    Some(extremal_vector(&m).map(|v| (cell.clone(), v)))
}

/// Finds the first feasible corner choice from the extreme rays of the
/// cell's fixed cone. The fixed vectors form the kernel of `A - Id`; in
/// kernel coordinates the cone `{B v >= 0, v >= 0, faces . v >= 0}` is
/// small and pointed, and a choice is feasible exactly when some extreme
/// ray makes all its chosen corners vanish. `None` means the cone was too
/// large to list.
fn screen_by_rays(cell: &CellMatrices, corners: &CornerSystems) -> Option<Option<usize>> {
    let n = cell.a.cols();
    let d = cell.a.sub(&BigMatrix::identity(n)).expect("square cell map");
    let kernel = nullspace(&d);
    if kernel.is_empty() {
        return Some(None);
    }
    // Columns of `basis` span the kernel.
    let basis =
        BigMatrix::from_rows(kernel.len(), (0..n).map(|i| kernel.iter().map(|k| k[i].clone()).collect()).collect())
            .expect("kernel rows");
    let g = cell
        .b
        .mul(&basis)
        .and_then(|m| m.stack(&basis))
        .and_then(|m| m.stack(&corners.faces.mul(&basis)?))
        .expect("same width");
    let rays = extreme_rays(&g, RAY_LIMIT)?;
    let fixed: Vec<Vec<BigInt>> = rays.iter().map(|r| basis.mul_vec(r).expect("kernel width")).collect();
    Some(corners.vanishing.iter().position(|rows| fixed.iter().any(|v| rows.iter().all(|r| dot(r, v).is_zero()))))
}

fn search_by_lp(cell: &CellMatrices, fixed: &BigMatrix, corners: &CornerSystems) -> Option<Hit> {
    let id = BigMatrix::identity(cell.a.cols());
    // Without the corner rows the system is weaker; if even that is empty no
    // corner choice can succeed.
    if !cone_feasible(&fixed.stack(&id).expect("same width")) {
        return None;
    }
    for f in &corners.matrices {
        let m = fixed.stack(f).and_then(|m| m.stack(&id)).expect("same width");
        if cone_feasible(&m) {
            return Some(extremal_vector(&m).map(|v| (cell.clone(), v)));
        }
    }
    None
}

/// Whether `v` is a multicurve fixed by the path. Any malformed input gives
/// `false`.
pub fn verify_certificate(path: &MappingClassPath, v: &EdgeVector) -> bool {
    path.fixes(v)
}

/// The lexicographically first vector with entries in `0..=max_entry` that
/// passes [`verify_certificate`].
pub fn brute_force_invariant(path: &MappingClassPath, max_entry: u64, exec: Exec) -> Option<EdgeVector> {
    let zeta = path.zeta();
    if zeta == 0 {
        return None;
    }
    let t = path.start();
    let heads: Vec<u64> = (0..=max_entry).collect();
    exec.find_map_first(&heads, |&head| {
        let mut cur = vec![0u64; zeta];
        cur[0] = head;
        loop {
            let v: Vec<BigInt> = cur.iter().map(|&x| BigInt::from(x)).collect();
            if multicurve_conditions(t, &v) && path.path().apply_raw(&v) == v {
                return Some(EdgeVector(v));
            }
            let mut pos = zeta;
            loop {
                pos -= 1;
                if pos == 0 {
                    return None;
                }
                if cur[pos] < max_entry {
                    cur[pos] += 1;
                    break;
                }
                cur[pos] = 0;
            }
        }
    })
}

/// Whether a certificate respects the report's bound.
pub fn within_bound(report: &ReducibilityReport) -> bool {
    report.certificate.as_ref().is_none_or(|c| vector_bits(c.entries()) <= report.bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::{Move, Path};
    use crate::triangulation::Triangulation;

    fn s11() -> Triangulation {
        Triangulation::from_labels(&[[1, 2, 3], [-1, -2, -3]]).unwrap()
    }

    #[test]
    fn assemble_shapes() {
        let t = s11();
        let cell = CellMatrices { a: BigMatrix::identity(3), b: BigMatrix::zeros(1, 3) };
        let choice = enumerate_corner_choices(&t).next().unwrap();
        let f = corner_matrix(&t, &choice).unwrap();
        let m = assemble_m(&cell, &f).unwrap();
        assert_eq!(m.rows(), 6 + 1 + f.rows() + 3);
        assert!(m.row_vecs().take(6).all(|r| r.iter().all(|x| x == &BigInt::from(0))));
        let bad = BigMatrix::zeros(1, 2);
        assert!(assemble_m(&cell, &bad).is_err());
    }

    #[test]
    fn identity_is_reducible() {
        let p = MappingClassPath::identity(s11());
        let r = decide(&p, DecideOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Reducible);
        assert!(verify_certificate(&p, r.certificate.as_ref().unwrap()));
        assert!(within_bound(&r));
        assert!(brute_force_invariant(&p, 1, Exec::Sequential).is_some());
    }

    #[test]
    fn verifier_rejects_garbage() {
        let p = MappingClassPath::identity(s11());
        assert!(!verify_certificate(&p, &EdgeVector::from_i64(&[0, 0, 0])));
        assert!(!verify_certificate(&p, &EdgeVector::from_i64(&[1, 1])));
        assert!(!verify_certificate(&p, &EdgeVector::from_i64(&[-1, 1, 0])));
    }

    #[test]
    fn ray_screening_matches_lp() {
        for (name, len) in [("S_1_1", 2), ("S_0_4", 1)] {
            let (t, table) = crate::surfaces::builtin(name).unwrap();
            let corners = CornerSystems::new(&t).unwrap();
            for word in table.words_of_length(len) {
                let path = table.compile(&word).unwrap();
                for branch in path.branches(false) {
                    let fixed = fixed_block(&branch.cell).unwrap();
                    let lp = search_by_lp(&branch.cell, &fixed, &corners).map(|h| h.unwrap().1);
                    let rays = screen_by_rays(&branch.cell, &corners).unwrap();
                    let screened = rays
                        .map(|j| extremal_vector(&assemble_m(&branch.cell, &corners.matrices[j]).unwrap()).unwrap());
                    assert_eq!(lp, screened, "{name} {word}");
                }
            }
        }
    }

    #[test]
    fn flip_there_and_back() {
        let t = s11();
        let path = Path::new(t, vec![Move::Flip(0), Move::Flip(0)]).unwrap();
        let p = MappingClassPath::new(path).unwrap();
        let r = decide(&p, DecideOptions { exec: Exec::Sequential, ..Default::default() }).unwrap();
        assert_eq!(r.verdict, Verdict::Reducible);
    }
}
