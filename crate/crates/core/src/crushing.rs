//! Crushing a triangulation along a multicurve.
//!
//! Cutting along the curve splits every edge into gaps. Inside a face the
//! gaps next to a corner are joined in pairs by the strips between parallel
//! normal arcs; the one gap per side that opens onto the central region (the
//! core) is an end. Following the pairings, every gap lies on a chain: chains
//! with two core ends become the edges of the crushed triangulation (one
//! triangle per core), and closed chains are annuli between parallel copies
//! of the curve, which crush to twice-marked spheres and are dropped.
//!
//! Everything is computed on the canonical form of the source, so the result
//! depends only on the triangulation up to edge orientation.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::bits::{vector_bits, BitBound};
use crate::curves::{decompose, is_multicurve, multicurve_conditions, EdgeVector};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::BigMatrix;
use crate::mapping::{MappingClassPath, Move, Path};
use crate::reducibility::{decide, DecideOptions, Verdict};
use crate::triangulation::{invert_permutation, Side, Triangulation, UnionFind};

/// Gap count above which crushing refuses to work edge by edge.
pub const MAX_GAPS: usize = 1 << 22;

#[derive(Clone, Debug)]
pub struct CrushMap {
    source: Triangulation,
    curve: EdgeVector,
    target: Triangulation,
    edge_bijection: Vec<usize>,
    lift_matrix: BigMatrix,
    removed_components: usize,
    // Orientation of each source edge relative to the canonical form.
    reversed: Vec<bool>,
    counts: Vec<usize>,
    // Target edge through each gap (gaps counted from the canonical tail);
    // `None` inside a dropped annulus.
    gap_label: Vec<Vec<Option<usize>>>,
    // Gaps of each target edge as (source edge, canonical gap).
    chain_gaps: Vec<Vec<(usize, usize)>>,
}

impl CrushMap {
    pub fn source(&self) -> &Triangulation {
        &self.source
    }

    pub fn curve(&self) -> &EdgeVector {
        &self.curve
    }

    pub fn target(&self) -> &Triangulation {
        &self.target
    }

    /// Target edge assigned to each source edge. Target edges are labelled by
    /// the source edge they are matched with, so this is the identity
    /// permutation; it is kept explicit for reporting.
    pub fn edge_bijection(&self) -> &[usize] {
        &self.edge_bijection
    }

    /// Column `j` counts, per source edge, the crossings of target edge `j`.
    pub fn lift_matrix(&self) -> &BigMatrix {
        &self.lift_matrix
    }

    pub fn removed_components(&self) -> usize {
        self.removed_components
    }

    /// `3g + n - 3|S|` of the crushed surface.
    pub fn xi(&self) -> usize {
        let inv = self.target.invariants();
        3 * inv.genus + inv.marked_points - 3 * inv.components
    }

    /// Edge vector on the source of the curve `v` on the crushed surface.
    pub fn lift(&self, v: &EdgeVector) -> Result<EdgeVector> {
        if !is_multicurve(&self.target, v)? {
            return Err(Error::NotMulticurve);
        }
        let out = EdgeVector(self.lift_matrix.mul_vec(v.entries())?);
        if !multicurve_conditions(&self.source, out.entries()) {
            return Err(Error::Internal(format!("lift {out} of {v} is not a multicurve")));
        }
        Ok(out)
    }

    /// The lift together with the crushed curve itself.
    pub fn lift_union(&self, v: &EdgeVector) -> Result<EdgeVector> {
        let out = self.lift(v)?.add(&self.curve);
        if !multicurve_conditions(&self.source, out.entries()) {
            return Err(Error::Internal(format!("lift union {out} is not a multicurve")));
        }
        Ok(out)
    }

    fn canonical_gap(&self, edge: usize, gap: usize) -> usize {
        if self.reversed[edge] {
            self.counts[edge] - gap
        } else {
            gap
        }
    }

    /// Target edge through a gap given in the source's own orientation.
    fn label_at(&self, edge: usize, gap: usize) -> Option<usize> {
        self.gap_label[edge][self.canonical_gap(edge, gap)]
    }

    /// The target edge made only of gaps on `edge`, if there is one. It
    /// exists exactly when the curve meets the square around `edge` without
    /// crossing it.
    fn chain_within(&self, edge: usize) -> Option<usize> {
        (0..self.chain_gaps.len()).find(|&l| self.chain_gaps[l].iter().all(|&(x, _)| x == edge))
    }

    /// Structured summary for reports.
    pub fn summary(&self) -> CrushSummary {
        CrushSummary {
            target: self.target.canonical().labels(),
            invariants: self.target.invariants(),
            edge_bijection: self.edge_bijection.clone(),
            lift_matrix: self.lift_matrix.row_vecs().map(|r| r.iter().map(|x| x.to_string()).collect()).collect(),
            removed_components: self.removed_components,
            xi: self.xi(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrushSummary {
    pub target: Vec<[i64; 3]>,
    pub invariants: crate::triangulation::SurfaceInvariants,
    pub edge_bijection: Vec<usize>,
    pub lift_matrix: Vec<Vec<String>>,
    pub removed_components: usize,
    pub xi: usize,
}

fn gap_counts(curve: &EdgeVector) -> Result<Vec<usize>> {
    let counts: Vec<usize> = curve
        .entries()
        .iter()
        .map(|x| x.to_usize().filter(|&n| n < MAX_GAPS))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::TooLarge(format!("curve {curve} has too many strands to crush")))?;
    if counts.iter().map(|n| n + 1).sum::<usize>() > MAX_GAPS {
        return Err(Error::TooLarge(format!("curve {curve} has too many strands to crush")));
    }
    Ok(counts)
}

pub fn crush(t: &Triangulation, curve: &EdgeVector) -> Result<CrushMap> {
    if !is_multicurve(t, curve)? {
        return Err(Error::NotMulticurve);
    }
    let zeta = t.zeta();
    let (ct, reversed) = t.canonicalized();
    let counts = gap_counts(curve)?;
    let mut base = Vec::with_capacity(zeta);
    let mut total = 0;
    for &n in &counts {
        base.push(total);
        total += n + 1;
    }
    let node = |e: usize, g: usize| base[e] + g;
    let global = |s: Side, local: usize| if s.forward { local } else { counts[s.edge] - local };

    let faces = ct.faces();
    let mut uf = UnionFind::new(total);
    let mut core = vec![[0usize; 3]; faces.len()];
    for (f, face) in faces.iter().enumerate() {
        let n = face.map(|s| counts[s.edge]);
        for i in 0..3 {
            let (prev, next) = ((i + 2) % 3, (i + 1) % 3);
            // Arcs cutting the corner between sides `prev` and `i`; the first
            // of them along side `i` sit nearest the shared vertex.
            let cut = (n[prev] + n[i] - n[next]) / 2;
            for g in 0..cut {
                uf.union(
                    node(face[i].edge, global(face[i], g)),
                    node(face[prev].edge, global(face[prev], n[prev] - g)),
                );
            }
            core[f][i] = node(face[i].edge, global(face[i], cut));
        }
    }

    let mut ends: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (f, c) in core.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            ends.entry(uf.find(x)).or_default().push((f, i));
        }
    }
    let mut chains: Vec<(usize, [(usize, usize); 2])> = Vec::with_capacity(zeta);
    for (&root, occ) in &ends {
        match occ[..] {
            [p, q] => chains.push((root, [p, q])),
            _ => return Err(Error::Internal(format!("strip with {} core ends", occ.len()))),
        }
    }
    chains.sort_by_key(|c| c.1[0]);
    if chains.len() != zeta {
        return Err(Error::Internal(format!("{} strips for {} edges", chains.len(), zeta)));
    }
    let chain_of_root: BTreeMap<usize, usize> = chains.iter().enumerate().map(|(i, c)| (c.0, i)).collect();
    let mut occ_chain = vec![[0usize; 3]; faces.len()];
    for (t, (_, occ)) in chains.iter().enumerate() {
        for &(f, i) in occ {
            occ_chain[f][i] = t;
        }
    }

    // Every source edge has two core gaps and every strip two ends, so
    // edges and strips form even cycles. In each cycle the least edge takes
    // the strip at its forward side, and the rest alternate.
    const NONE: usize = usize::MAX;
    let mut edge_chain = vec![NONE; zeta];
    let mut chain_edge = vec![NONE; zeta];
    for first in 0..zeta {
        if edge_chain[first] != NONE {
            continue;
        }
        let mut e = first;
        let mut at = ct.edge_sides(e)[0];
        loop {
            let t = occ_chain[at.face][at.pos];
            if chain_edge[t] != NONE {
                return Err(Error::Internal("edge and strip cycle does not alternate".into()));
            }
            edge_chain[e] = t;
            chain_edge[t] = e;
            let [p, q] = chains[t].1;
            let other = if (at.face, at.pos) == p { q } else { p };
            let e2 = faces[other.0][other.1].edge;
            if edge_chain[e2] != NONE {
                break;
            }
            let sides = ct.edge_sides(e2);
            at = if (sides[0].face, sides[0].pos) == other { sides[1] } else { sides[0] };
            e = e2;
        }
    }

    let target_faces: Vec<[Side; 3]> = (0..faces.len())
        .map(|f| {
            [0, 1, 2].map(|i| {
                let t = occ_chain[f][i];
                Side::new(chain_edge[t], chains[t].1[0] == (f, i))
            })
        })
        .collect();
    let target = Triangulation::new(target_faces)
        .map_err(|e| Error::Internal(format!("crushed complex is not a triangulation: {e}")))?;

    let mut lift_matrix = BigMatrix::zeros(zeta, zeta);
    let mut gap_label = Vec::with_capacity(zeta);
    let mut chain_gaps = vec![Vec::new(); zeta];
    let mut annuli = BTreeSet::new();
    for e in 0..zeta {
        let mut labels = Vec::with_capacity(counts[e] + 1);
        for g in 0..=counts[e] {
            let root = uf.find(node(e, g));
            match chain_of_root.get(&root) {
                Some(&t) => {
                    let l = chain_edge[t];
                    lift_matrix[(e, l)] += 1;
                    chain_gaps[l].push((e, g));
                    labels.push(Some(l));
                }
                None => {
                    annuli.insert(root);
                    labels.push(None);
                }
            }
        }
        gap_label.push(labels);
    }

    Ok(CrushMap {
        source: t.clone(),
        curve: curve.clone(),
        target,
        edge_bijection: (0..zeta).collect(),
        lift_matrix,
        removed_components: annuli.len(),
        reversed,
        counts,
        gap_label,
        chain_gaps,
    })
}

/// `3g + n - 3|S|` of the surface crushed along `curve`.
pub fn xi(t: &Triangulation, curve: &EdgeVector) -> Result<usize> {
    Ok(crush(t, curve)?.xi())
}

/// What happened to one move of the source path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrushStep {
    /// A reordering of the source edges; the crushed triangulation is unchanged.
    Relabel,
    /// A flip whose square the curve crosses; both sides crush alike.
    Collapsed,
    /// A flip that survives as a flip of the given crushed edge.
    Flipped(usize),
}

#[derive(Clone, Debug)]
pub struct CrushedPath {
    pub path: Path,
    pub steps: Vec<CrushStep>,
    /// Index of the source move at which the closing relabelling was placed.
    pub relabel_at: Option<usize>,
    pub start: CrushMap,
}

/// Crushes every triangulation of `path` along the image of `curve` and
/// joins consecutive crushed triangulations by the surviving flips. Target
/// edges keep the labels they had at the start, except for a single reorder
/// placed at the last step that emitted nothing, which brings the end to
/// the labelling `crush` gives it directly.
pub fn crush_path(path: &Path, curve: &EdgeVector) -> Result<CrushedPath> {
    if !is_multicurve(path.start(), curve)? {
        return Err(Error::NotMulticurve);
    }
    let zeta = path.start().zeta();
    let vectors = path.trace(curve.entries());
    let maps: Vec<CrushMap> =
        (0..=path.len()).map(|k| crush(path.stop(k), &EdgeVector(vectors[k].clone()))).collect::<Result<_>>()?;

    // lambda[l] is the running label of the edge that `crush` labels `l`.
    let mut lambda: Vec<usize> = (0..zeta).collect();
    let mut current = maps[0].target.clone();
    let mut emitted: Vec<(usize, usize)> = Vec::new();
    let mut steps = Vec::with_capacity(path.len());
    for (k, m) in path.moves().iter().enumerate() {
        let (prev, next) = (&maps[k], &maps[k + 1]);
        let flipped = match m {
            Move::Flip(e) => Some(*e),
            Move::Reorder(_) => None,
        };
        let back = match m {
            Move::Reorder(p) => invert_permutation(p),
            Move::Flip(_) => (0..zeta).collect(),
        };
        let inner_prev = flipped.and_then(|e| prev.chain_within(e));
        let mut new_lambda = vec![0; zeta];
        for (l, slot) in new_lambda.iter_mut().enumerate() {
            let from = match next.chain_gaps[l].iter().find(|&&(x, _)| Some(x) != flipped) {
                Some(&(x, g)) => {
                    let lit = if next.reversed[x] { next.counts[x] - g } else { g };
                    prev.label_at(back[x], lit)
                }
                None => inner_prev,
            };
            let from =
                from.ok_or_else(|| Error::Internal(format!("crushed edge {l} at step {k} has no predecessor")))?;
            *slot = lambda[from];
        }
        crate::triangulation::check_permutation(&new_lambda, zeta)
            .map_err(|_| Error::Internal(format!("labels collide after step {k}")))?;
        let next_t = next.target.reorder(&new_lambda)?;

        let step = match (flipped, inner_prev, flipped.and_then(|e| next.chain_within(e))) {
            (Some(_), Some(l), Some(_)) => {
                let label = lambda[l];
                if !current.flip(label)?.equals(&next_t) {
                    return Err(Error::Internal(format!("step {k} is not a flip of crushed edge {label}")));
                }
                emitted.push((k, label));
                CrushStep::Flipped(label)
            }
            _ => {
                if !current.equals(&next_t) {
                    return Err(Error::Internal(format!("crushed triangulation moved at step {k}")));
                }
                if flipped.is_some() {
                    CrushStep::Collapsed
                } else {
                    CrushStep::Relabel
                }
            }
        };
        steps.push(step);
        current = next_t;
        lambda = new_lambda;
    }

    let pi = invert_permutation(&lambda);
    let identity = pi.iter().enumerate().all(|(i, &p)| i == p);
    let relabel_at = if identity {
        None
    } else {
        let slot = steps
            .iter()
            .rposition(|s| !matches!(s, CrushStep::Flipped(_)))
            .ok_or_else(|| Error::Internal("no stationary step to carry the final relabelling".into()))?;
        Some(slot)
    };
    let mut moves = Vec::with_capacity(emitted.len() + 1);
    let mut inserted = false;
    for &(k, label) in &emitted {
        match relabel_at {
            Some(s) if k > s => {
                if !inserted {
                    moves.push(Move::Reorder(pi.clone()));
                    inserted = true;
                }
                moves.push(Move::Flip(pi[label]));
            }
            _ => moves.push(Move::Flip(label)),
        }
    }
    if relabel_at.is_some() && !inserted {
        moves.push(Move::Reorder(pi.clone()));
    }
    let out = Path::new(maps[0].target.clone(), moves)?;
    if !out.end().equals(maps[path.len()].target()) {
        return Err(Error::Internal("crushed path does not end at the crushed end".into()));
    }
    let start = maps.into_iter().next().expect("at least one stop");
    Ok(CrushedPath { path: out, steps, relabel_at, start })
}

#[derive(Clone, Debug, Serialize)]
pub struct MaximalReport {
    #[serde(serialize_with = "ser_vector")]
    pub curve: EdgeVector,
    pub iterations: usize,
    /// Complexity of the curve after each iteration.
    pub xi: Vec<usize>,
    /// Bits allowed for any entry of `curve` by the per-stage bounds.
    #[serde(serialize_with = "ser_bound")]
    pub bound: BitBound,
}

fn ser_vector<S: serde::Serializer>(v: &EdgeVector, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.entries().iter().map(|x| x.to_string()))
}

fn ser_bound<S: serde::Serializer>(b: &BitBound, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&b.to_string())
}

/// The class induced on the surface crushed along an invariant multicurve.
pub fn crushed_class(path: &MappingClassPath, curve: &EdgeVector) -> Result<(CrushMap, MappingClassPath)> {
    let cp = crush_path(path.path(), curve)?;
    let class = MappingClassPath::new(cp.path)?;
    Ok((cp.start, class))
}

/// An invariant multicurve whose crushed class is irreducible, found by
/// crushing, deciding and lifting until the crushed class has no invariant
/// multicurve. `None` when the class itself is irreducible.
pub fn maximal_multicurve(path: &MappingClassPath, opts: DecideOptions) -> Result<Option<MaximalReport>> {
    let report = decide(path, opts)?;
    let Some(mut curve) = report.certificate else {
        return Ok(None);
    };
    let zeta = path.zeta();
    let mut bound = report.bound;
    let mut xis = Vec::new();
    for iteration in 1..=zeta + 1 {
        let (map, class) = crushed_class(path, &curve)?;
        xis.push(map.xi());
        let inner = decide(&class, opts)?;
        let Some(found) = inner.certificate else {
            return Ok(Some(MaximalReport { curve, iterations: iteration, xi: xis, bound }));
        };
        let next = map.lift_union(&found)?;
        if !path.fixes(&next) {
            return Err(Error::Internal(format!("lifted curve {next} is not invariant")));
        }
        let next_xi = xi(path.start(), &next)?;
        if next_xi >= map.xi() {
            return Err(Error::Internal("complexity did not drop after lifting".into()));
        }
        bound = bound.add(&inner.bound).add_bits(zeta as u64);
        curve = next;
    }
    Err(Error::Internal("maximal multicurve search did not stabilise".into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct CanonicalSystem {
    /// Sum of the components shared by every maximal multicurve found.
    #[serde(serialize_with = "ser_opt_vector")]
    pub system: Option<EdgeVector>,
    pub invariant_found: usize,
    pub maximal_found: usize,
    /// Entry size up to which the scan would have to run to be exhaustive for
    /// the maximal multicurve this crate constructs, if known.
    #[serde(serialize_with = "ser_opt_bound")]
    pub certified_bits: Option<BitBound>,
    pub approximate: bool,
}

fn ser_opt_vector<S: serde::Serializer>(v: &Option<EdgeVector>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_vector(v, s),
        None => s.serialize_none(),
    }
}

fn ser_opt_bound<S: serde::Serializer>(b: &Option<BitBound>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match b {
        Some(b) => ser_bound(b, s),
        None => s.serialize_none(),
    }
}

/// Approximates the canonical curve system by scanning every invariant
/// multicurve with entries up to `max_entry`, keeping those whose crushed
/// class is irreducible, and intersecting their component sets.
pub fn canonical_system_desk(path: &MappingClassPath, max_entry: u64, opts: DecideOptions) -> Result<CanonicalSystem> {
    let t = path.start();
    let zeta = t.zeta();
    let maximal = maximal_multicurve(path, opts)?;
    let Some(maximal) = maximal else {
        // Irreducible classes have an empty canonical system.
        return Ok(CanonicalSystem {
            system: None,
            invariant_found: 0,
            maximal_found: 0,
            certified_bits: Some(BitBound::zero()),
            approximate: false,
        });
    };
    let invariant: Vec<EdgeVector> = crate::curves::multicurves_up_to(t, max_entry)
        .into_iter()
        .filter(|v| path.path().apply_raw(v.entries()) == v.entries())
        .collect();
    let inner = DecideOptions { exec: Exec::Sequential, ..opts };
    let verdicts: Vec<Result<bool>> = opts.exec.map(&invariant, |v| {
        let (_, class) = crushed_class(path, v)?;
        Ok(decide(&class, inner)?.verdict == Verdict::Irreducible)
    });
    let mut common: Option<BTreeSet<Vec<BigInt>>> = None;
    let mut maximal_found = 0;
    for (v, is_max) in invariant.iter().zip(verdicts) {
        if !is_max? {
            continue;
        }
        maximal_found += 1;
        let parts: BTreeSet<Vec<BigInt>> = decompose(t, v)?.into_iter().map(|(c, _)| c.0).collect();
        common = Some(match common {
            None => parts,
            Some(c) => c.intersection(&parts).cloned().collect(),
        });
    }
    let system = common.filter(|c| !c.is_empty()).map(|c| {
        let mut sum = EdgeVector(vec![BigInt::zero(); zeta]);
        for part in c {
            sum = sum.add(&EdgeVector(part));
        }
        sum
    });
    let needed = maximal.bound;
    let approximate = vector_bits(&[BigInt::from(max_entry)]) < needed;
    Ok(CanonicalSystem {
        system,
        invariant_found: invariant.len(),
        maximal_found,
        certified_bits: Some(needed),
        approximate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s11() -> Triangulation {
        Triangulation::from_labels(&[[1, 2, 3], [-1, -2, -3]]).unwrap()
    }

    #[test]
    fn torus_along_a_curve() {
        let cm = crush(&s11(), &EdgeVector::from_i64(&[0, 1, 1])).unwrap();
        let inv = cm.target().invariants();
        assert_eq!((inv.genus, inv.marked_points, inv.components, inv.zeta), (0, 3, 1, 3));
        assert_eq!(cm.removed_components(), 0);
        assert_eq!(cm.xi(), 0);
    }

    #[test]
    fn parallel_copies_drop_an_annulus() {
        let cm = crush(&s11(), &EdgeVector::from_i64(&[0, 2, 2])).unwrap();
        assert_eq!(cm.removed_components(), 1);
        assert_eq!(cm.target().zeta(), 3);
    }

    #[test]
    fn empty_path_crushes_to_empty() {
        let p = Path::empty(s11());
        let cp = crush_path(&p, &EdgeVector::from_i64(&[0, 1, 1])).unwrap();
        assert!(cp.path.is_empty());
    }

    #[test]
    fn rejects_non_curves() {
        assert!(matches!(crush(&s11(), &EdgeVector::from_i64(&[1, 0, 0])), Err(Error::NotMulticurve)));
    }
}
