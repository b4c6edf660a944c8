//! Combinatorial ideal triangulations of marked surfaces.
//!
//! A triangulation is a list of faces, each a triple of signed sides walked
//! counterclockwise. Side `+e` traverses edge `e` from its tail to its head
//! and `-e` from head to tail; each edge is used exactly once with each sign.
//! Edge orientations are bookkeeping only: two triangulations are equal when
//! their [`CanonicalForm`]s agree, which forgets orientations and face order
//! but never edge labels.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One side of a face: an edge index and the direction it is walked in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Side {
    pub edge: usize,
    pub forward: bool,
}

impl Side {
    pub fn new(edge: usize, forward: bool) -> Self {
        Self { edge, forward }
    }

    /// Decodes a 1-based signed label.
    pub fn from_label(label: i64) -> Result<Self> {
        if label == 0 {
            return Err(Error::Triangulation("side label 0 is not allowed".into()));
        }
        Ok(Self { edge: (label.unsigned_abs() - 1) as usize, forward: label > 0 })
    }

    pub fn label(self) -> i64 {
        let e = self.edge as i64 + 1;
        if self.forward {
            e
        } else {
            -e
        }
    }

    // Endpoint slots: 2e is the tail of edge e, 2e + 1 its head.
    fn start_slot(self) -> usize {
        2 * self.edge + usize::from(!self.forward)
    }

    fn end_slot(self) -> usize {
        2 * self.edge + usize::from(self.forward)
    }
}

/// The corner of face `face` between its sides `index` and `index + 1`
/// (mod 3). It sits opposite side `index + 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Corner {
    pub face: usize,
    pub index: usize,
}

/// Location of one side of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SidePos {
    pub face: usize,
    pub pos: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceInvariants {
    pub genus: usize,
    pub marked_points: usize,
    pub components: usize,
    pub zeta: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub faces: Vec<usize>,
    pub edges: Vec<usize>,
    pub vertices: Vec<usize>,
    pub genus: usize,
}

/// The four sides of the square around a flippable edge, following the
/// layout of the standard flip picture: `a` and `c` are opposite, as are `b`
/// and `d`, and the cyclic order around the square is `a, b, c, d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Square {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    faces: Vec<[Side; 3]>,
    zeta: usize,
    // [forward occurrence, backward occurrence] for each edge.
    edge_sides: Vec<[SidePos; 2]>,
    corner_vertex: Vec<[usize; 3]>,
    vertex_corners: Vec<Vec<Corner>>,
    components: Vec<Component>,
    invariants: SurfaceInvariants,
}

pub(crate) struct UnionFind(Vec<usize>);

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller root so labels come out in a stable order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

impl Triangulation {
    /// Validates raw faces (0-based sides) and derives vertices and surface
    /// invariants.
    pub fn new(faces: Vec<[Side; 3]>) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::Triangulation("no faces".into()));
        }
        let max_edge = faces.iter().flatten().map(|s| s.edge).max().unwrap_or(0);
        let zeta = max_edge + 1;
        let mut seen: Vec<[Option<SidePos>; 2]> = vec![[None, None]; zeta];
        for (f, face) in faces.iter().enumerate() {
            for (pos, side) in face.iter().enumerate() {
                let slot = &mut seen[side.edge][usize::from(!side.forward)];
                if slot.is_some() {
                    let sign = if side.forward { '+' } else { '-' };
                    return Err(Error::Triangulation(format!("side {}{} appears more than once", sign, side.edge + 1)));
                }
                *slot = Some(SidePos { face: f, pos });
            }
        }
        let mut edge_sides = Vec::with_capacity(zeta);
        for (e, [fwd, bwd]) in seen.into_iter().enumerate() {
            match (fwd, bwd) {
                (Some(a), Some(b)) => edge_sides.push([a, b]),
                (None, None) => return Err(Error::Triangulation(format!("edge {} never appears", e + 1))),
                _ => {
                    return Err(Error::Triangulation(format!(
                        "edge {} appears once; every edge needs one + side and one - side",
                        e + 1
                    )))
                }
            }
        }
        if 3 * faces.len() != 2 * zeta {
            return Err(Error::Internal("side count mismatch".into()));
        }

        // Vertices: glue edge endpoints at every corner.
        let mut uf = UnionFind::new(2 * zeta);
        for face in &faces {
            for i in 0..3 {
                uf.union(face[i].end_slot(), face[(i + 1) % 3].start_slot());
            }
        }
        let mut vertex_id = BTreeMap::new();
        let mut corner_vertex = Vec::with_capacity(faces.len());
        let mut vertex_corners: Vec<Vec<Corner>> = Vec::new();
        for (f, face) in faces.iter().enumerate() {
            let mut ids = [0; 3];
            for i in 0..3 {
                let root = uf.find(face[i].end_slot());
                let next = vertex_id.len();
                let id = *vertex_id.entry(root).or_insert(next);
                if id == vertex_corners.len() {
                    vertex_corners.push(Vec::new());
                }
                vertex_corners[id].push(Corner { face: f, index: i });
                ids[i] = id;
            }
            corner_vertex.push(ids);
        }

        // Components: faces joined across edges.
        let mut cf = UnionFind::new(faces.len());
        for [a, b] in &edge_sides {
            cf.union(a.face, b.face);
        }
        let mut comp_index = BTreeMap::new();
        let mut components: Vec<Component> = Vec::new();
        for f in 0..faces.len() {
            let root = cf.find(f);
            let next = comp_index.len();
            let c = *comp_index.entry(root).or_insert(next);
            if c == components.len() {
                components.push(Component { faces: Vec::new(), edges: Vec::new(), vertices: Vec::new(), genus: 0 });
            }
            components[c].faces.push(f);
        }
        for (e, [a, _]) in edge_sides.iter().enumerate() {
            let c = comp_index[&cf.find(a.face)];
            components[c].edges.push(e);
        }
        for (v, corners) in vertex_corners.iter().enumerate() {
            let c = comp_index[&cf.find(corners[0].face)];
            components[c].vertices.push(v);
        }
        // Order components by least edge index.
        components.sort_by_key(|c| c.edges[0]);
        let mut genus = 0;
        for comp in &mut components {
            let chi = comp.vertices.len() as i64 - comp.edges.len() as i64 + comp.faces.len() as i64;
            if chi > 2 || (2 - chi) % 2 != 0 {
                return Err(Error::Triangulation(format!(
                    "component with Euler characteristic {chi} is not a closed oriented surface"
                )));
            }
            comp.genus = ((2 - chi) / 2) as usize;
            if comp.genus == 0 && comp.vertices.len() <= 2 {
                return Err(Error::Triangulation(format!(
                    "component is a sphere with {} marked point(s)",
                    comp.vertices.len()
                )));
            }
            genus += comp.genus;
        }
        let invariants =
            SurfaceInvariants { genus, marked_points: vertex_corners.len(), components: components.len(), zeta };
        debug_assert_eq!(
            6 * genus as i64 + 3 * invariants.marked_points as i64 - 6 * components.len() as i64,
            zeta as i64
        );
        Ok(Self { faces, zeta, edge_sides, corner_vertex, vertex_corners, components, invariants })
    }

    /// Validates faces given as 1-based signed labels.
    pub fn from_labels(faces: &[[i64; 3]]) -> Result<Self> {
        let faces = faces
            .iter()
            .map(|f| Ok([Side::from_label(f[0])?, Side::from_label(f[1])?, Side::from_label(f[2])?]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(faces)
    }

    pub fn faces(&self) -> &[[Side; 3]] {
        &self.faces
    }

    pub fn zeta(&self) -> usize {
        self.zeta
    }

    pub fn invariants(&self) -> SurfaceInvariants {
        self.invariants
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_corners.len()
    }

    pub fn vertex_of(&self, corner: Corner) -> usize {
        self.corner_vertex[corner.face][corner.index]
    }

    /// Corners around `vertex`, ordered by (face, index).
    pub fn corners_at(&self, vertex: usize) -> &[Corner] {
        &self.vertex_corners[vertex]
    }

    pub fn edge_sides(&self, edge: usize) -> [SidePos; 2] {
        self.edge_sides[edge]
    }

    /// Edges `(i, j, k)` of a corner: the two sides meeting there and the
    /// opposite one.
    pub fn corner_edges(&self, corner: Corner) -> (usize, usize, usize) {
        let face = &self.faces[corner.face];
        (face[corner.index].edge, face[(corner.index + 1) % 3].edge, face[(corner.index + 2) % 3].edge)
    }

    fn check_edge(&self, edge: usize) -> Result<()> {
        if edge >= self.zeta {
            return Err(Error::EdgeOutOfRange { edge, zeta: self.zeta });
        }
        Ok(())
    }

    pub fn is_flippable(&self, edge: usize) -> bool {
        edge < self.zeta && self.edge_sides[edge][0].face != self.edge_sides[edge][1].face
    }

    /// The square around `edge`.
    pub fn square(&self, edge: usize) -> Result<Square> {
        self.check_edge(edge)?;
        if !self.is_flippable(edge) {
            return Err(Error::NotFlippable(edge));
        }
        let [fwd, bwd] = self.edge_sides[edge];
        let f1 = &self.faces[fwd.face];
        let f2 = &self.faces[bwd.face];
        Ok(Square {
            a: f1[(fwd.pos + 1) % 3].edge,
            b: f1[(fwd.pos + 2) % 3].edge,
            c: f2[(bwd.pos + 1) % 3].edge,
            d: f2[(bwd.pos + 2) % 3].edge,
        })
    }

    /// Replaces `edge` by the other diagonal of its square. The new edge keeps
    /// the label; every other side keeps its label and orientation.
    pub fn flip(&self, edge: usize) -> Result<Triangulation> {
        self.check_edge(edge)?;
        if !self.is_flippable(edge) {
            return Err(Error::NotFlippable(edge));
        }
        let [fwd, bwd] = self.edge_sides[edge];
        let f1 = self.faces[fwd.face];
        let f2 = self.faces[bwd.face];
        let (x1, x2) = (f1[(fwd.pos + 1) % 3], f1[(fwd.pos + 2) % 3]);
        let (y1, y2) = (f2[(bwd.pos + 1) % 3], f2[(bwd.pos + 2) % 3]);
        let mut faces = self.faces.clone();
        faces[fwd.face] = [x2, y1, Side::new(edge, true)];
        faces[bwd.face] = [y2, x1, Side::new(edge, false)];
        Triangulation::new(faces)
    }

    /// Relabels edge `i` as `perm[i]`.
    pub fn reorder(&self, perm: &[usize]) -> Result<Triangulation> {
        check_permutation(perm, self.zeta)?;
        let faces = self.faces.iter().map(|f| f.map(|s| Side::new(perm[s.edge], s.forward))).collect();
        Triangulation::new(faces)
    }

    pub fn canonical(&self) -> CanonicalForm {
        canonicalize(&self.faces).0
    }

    /// Equality of canonical forms.
    pub fn equals(&self, other: &Triangulation) -> bool {
        self.zeta == other.zeta && self.canonical() == other.canonical()
    }

    /// The same triangulation rewritten in canonical form, together with, for
    /// each edge, whether its orientation was reversed in the rewrite.
    pub fn canonicalized(&self) -> (Triangulation, Vec<bool>) {
        let (form, reversed) = canonicalize(&self.faces);
        let t = Triangulation::new(form.0).expect("canonical form of a valid triangulation");
        (t, reversed)
    }
}

pub fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotPermutation(n));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::NotPermutation(n));
        }
        seen[p] = true;
    }
    Ok(())
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Faces rotated to their least rotation (by edge index), sorted, with the
/// first occurrence of each edge taken as its forward side.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalForm(Vec<[Side; 3]>);

impl CanonicalForm {
    pub fn faces(&self) -> &[[Side; 3]] {
        &self.0
    }

    /// 1-based signed labels.
    pub fn labels(&self) -> Vec<[i64; 3]> {
        self.0.iter().map(|f| f.map(Side::label)).collect()
    }
}

fn least_rotation(face: &[Side; 3]) -> usize {
    let key = |r: usize| [face[r].edge, face[(r + 1) % 3].edge, face[(r + 2) % 3].edge];
    (0..3).min_by_key(|&r| key(r)).unwrap()
}

fn canonicalize(faces: &[[Side; 3]]) -> (CanonicalForm, Vec<bool>) {
    let mut rotated: Vec<[Side; 3]> = faces
        .iter()
        .map(|f| {
            let r = least_rotation(f);
            [f[r], f[(r + 1) % 3], f[(r + 2) % 3]]
        })
        .collect();
    rotated.sort_by_key(|f| f.map(|s| s.edge));
    let zeta = faces.len() * 3 / 2;
    let mut reversed: Vec<Option<bool>> = vec![None; zeta];
    let mut out = Vec::with_capacity(rotated.len());
    for f in &rotated {
        let mut face = *f;
        for s in face.iter_mut() {
            let forward = match reversed[s.edge] {
                None => {
                    reversed[s.edge] = Some(!s.forward);
                    true
                }
                Some(_) => false,
            };
            *s = Side::new(s.edge, forward);
        }
        out.push(face);
    }
    (CanonicalForm(out), reversed.into_iter().map(|r| r.unwrap_or(false)).collect())
}

/// Structured text form of a triangulation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TriangulationFile {
    #[serde(default)]
    pub name: String,
    pub faces: Vec<[i64; 3]>,
}

impl TriangulationFile {
    pub fn parse(text: &str) -> Result<Triangulation> {
        let file: TriangulationFile = serde_json::from_str(text)?;
        Triangulation::from_labels(&file.faces)
    }

    /// Canonical serialization: faces in canonical order.
    pub fn canonical(name: &str, t: &Triangulation) -> Self {
        Self { name: name.to_string(), faces: t.canonical().labels() }
    }

    pub fn to_text(&self) -> String {
        let faces: Vec<String> = self.faces.iter().map(|f| format!("[{}, {}, {}]", f[0], f[1], f[2])).collect();
        format!(
            "{{\"name\": {}, \"faces\": [{}]}}",
            serde_json::to_string(&self.name).expect("string serializes"),
            faces.join(", ")
        )
    }
}

impl fmt::Display for Triangulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let faces: Vec<String> = self
            .faces
            .iter()
            .map(|face| format!("({}, {}, {})", face[0].label(), face[1].label(), face[2].label()))
            .collect();
        write!(f, "{}", faces.join(" "))
    }
}
