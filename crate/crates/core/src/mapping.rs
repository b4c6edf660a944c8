//! Mapping classes as paths of flips and reorderings, their action on edge
//! vectors, and the piecewise-linear cells of that action.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::curves::{is_multicurve, multicurve_conditions, multicurves_up_to, EdgeVector};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{cone_point, BigMatrix};
use crate::triangulation::{check_permutation, invert_permutation, Triangulation, TriangulationFile};

/// An elementary move in the graph of ordered triangulations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    Flip(usize),
    /// Edge `i` becomes edge `perm[i]`.
    Reorder(Vec<usize>),
}

impl Move {
    pub fn apply_to(&self, t: &Triangulation) -> Result<Triangulation> {
        match self {
            Move::Flip(e) => t.flip(*e),
            Move::Reorder(p) => t.reorder(p),
        }
    }

    pub fn inverse(&self) -> Move {
        match self {
            Move::Flip(e) => Move::Flip(*e),
            Move::Reorder(p) => Move::Reorder(invert_permutation(p)),
        }
    }
}

/// A sequence of moves from a starting triangulation. The intermediate
/// triangulations are computed once on construction.
#[derive(Clone, Debug)]
pub struct Path {
    moves: Vec<Move>,
    stops: Vec<Triangulation>,
}

impl Path {
    pub fn new(start: Triangulation, moves: Vec<Move>) -> Result<Self> {
        let mut stops = Vec::with_capacity(moves.len() + 1);
        stops.push(start);
        for m in &moves {
            let next = m.apply_to(stops.last().unwrap())?;
            stops.push(next);
        }
        Ok(Self { moves, stops })
    }

    pub fn empty(start: Triangulation) -> Self {
        Self { moves: Vec::new(), stops: vec![start] }
    }

    pub fn start(&self) -> &Triangulation {
        &self.stops[0]
    }

    pub fn end(&self) -> &Triangulation {
        self.stops.last().unwrap()
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    /// Triangulation before move `i` (index `len()` is the end).
    pub fn stop(&self, i: usize) -> &Triangulation {
        &self.stops[i]
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn flip_count(&self) -> usize {
        self.moves.iter().filter(|m| matches!(m, Move::Flip(_))).count()
    }

    /// Image of an edge vector, after checking that it is a multicurve.
    pub fn apply(&self, v: &EdgeVector) -> Result<EdgeVector> {
        if !is_multicurve(self.start(), v)? {
            return Err(Error::NotMulticurve);
        }
        Ok(EdgeVector(self.apply_raw(v.entries())))
    }

    /// The move-by-move action with no validity checks on the input.
    pub fn apply_raw(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut v = v.to_vec();
        for (i, m) in self.moves.iter().enumerate() {
            apply_move(&self.stops[i], m, &mut v);
        }
        v
    }

    /// The vector after each move, starting with `v` itself.
    pub fn trace(&self, v: &[BigInt]) -> Vec<Vec<BigInt>> {
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        let mut cur = v.to_vec();
        out.push(cur.clone());
        for (i, m) in self.moves.iter().enumerate() {
            apply_move(&self.stops[i], m, &mut cur);
            out.push(cur.clone());
        }
        out
    }
}

pub(crate) fn apply_move(t: &Triangulation, m: &Move, v: &mut Vec<BigInt>) {
    match m {
        Move::Flip(e) => {
            let sq = t.square(*e).expect("path moves are validated on construction");
            let ac = &v[sq.a] + &v[sq.c];
            let bd = &v[sq.b] + &v[sq.d];
            let top = if ac >= bd { ac } else { bd };
            v[*e] = top - &v[*e];
        }
        Move::Reorder(p) => {
            let mut out = vec![BigInt::zero(); v.len()];
            for (i, x) in v.drain(..).enumerate() {
                out[p[i]] = x;
            }
            *v = out;
        }
    }
}

/// A path whose end is (canonically) its start; it represents a mapping
/// class.
#[derive(Clone, Debug)]
pub struct MappingClassPath(Path);

impl MappingClassPath {
    pub fn new(path: Path) -> Result<Self> {
        if !path.end().equals(path.start()) {
            return Err(Error::NotClosed);
        }
        Ok(Self(path))
    }

    pub fn identity(t: Triangulation) -> Self {
        Self(Path::empty(t))
    }

    pub fn path(&self) -> &Path {
        &self.0
    }

    pub fn start(&self) -> &Triangulation {
        self.0.start()
    }

    pub fn zeta(&self) -> usize {
        self.0.start().zeta()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, v: &EdgeVector) -> Result<EdgeVector> {
        self.0.apply(v)
    }

    /// The inverse mapping class: moves reversed, reorders inverted.
    pub fn reverse(&self) -> MappingClassPath {
        let moves: Vec<Move> = self.0.moves.iter().rev().map(Move::inverse).collect();
        let path =
            Path::new(self.0.start().clone(), moves).expect("reversed moves of a closed path are valid from its start");
        MappingClassPath(path)
    }

    /// Concatenation: `self` first, then `other`.
    pub fn then(&self, other: &MappingClassPath) -> Result<MappingClassPath> {
        if !self.start().equals(other.start()) {
            return Err(Error::Table("paths start at different triangulations".into()));
        }
        let mut moves = self.0.moves.clone();
        moves.extend(other.0.moves.iter().cloned());
        MappingClassPath::new(Path::new(self.start().clone(), moves)?)
    }

    /// The cell of the piecewise-linear action containing `v`.
    pub fn cell_of(&self, v: &EdgeVector) -> Result<CellMatrices> {
        cell_of(&self.0, v)
    }

    pub fn branches(&self, prune: bool) -> Branches<'_> {
        Branches::new(&self.0, prune, None)
    }

    /// Like [`branches`](Self::branches) with pruning, but a subtree is also
    /// cut when its cell misses the cone `{v : region . v >= 0}`.
    pub fn branches_in(&self, region: BigMatrix) -> Branches<'_> {
        Branches::new(&self.0, true, Some(region))
    }

    /// Whether every multicurve with entries at most 2 (the 1-bounded ones)
    /// is fixed.
    pub fn acts_trivially(&self, exec: Exec) -> bool {
        let candidates = multicurves_up_to(self.start(), 2);
        exec.all(&candidates, |v| self.0.apply_raw(v.entries()) == v.entries())
    }

    /// Whether `v` is the edge vector of a multicurve fixed by this class.
    /// Malformed input yields `false`.
    pub fn fixes(&self, v: &EdgeVector) -> bool {
        if v.check_shape(self.zeta()).is_err() || !multicurve_conditions(self.start(), v.entries()) {
            return false;
        }
        self.0.apply_raw(v.entries()) == v.entries()
    }
}

/// Linear map `a` and inequalities `b` (rows with `b . v >= 0`) of one cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellMatrices {
    pub a: BigMatrix,
    pub b: BigMatrix,
}

fn permutation_matrix(perm: &[usize]) -> BigMatrix {
    let n = perm.len();
    let mut m = BigMatrix::zeros(n, n);
    for (i, &p) in perm.iter().enumerate() {
        m[(p, i)] = BigInt::one();
    }
    m
}

/// Running composition of cell matrices along a path.
#[derive(Clone, Debug)]
struct CellState {
    a: BigMatrix,
    b: BigMatrix,
}

impl CellState {
    fn start(n: usize) -> Self {
        Self { a: BigMatrix::identity(n), b: BigMatrix::zeros(1, n) }
    }

    fn reorder(&mut self, perm: &[usize]) {
        self.a = permutation_matrix(perm).mul(&self.a).expect("square permutation");
    }

    /// Composes one flip; `second` selects the `b + d` branch.
    fn flip(&mut self, t: &Triangulation, e: usize, second: bool) {
        let sq = t.square(e).expect("path moves are validated on construction");
        let n = self.a.cols();
        let (p, q, r, s) = if second { (sq.b, sq.d, sq.a, sq.c) } else { (sq.a, sq.c, sq.b, sq.d) };
        // Inequality row (E_p + E_q - E_r - E_s) composed with the map so far.
        let row: Vec<BigInt> =
            (0..n).map(|j| &self.a[(p, j)] + &self.a[(q, j)] - &self.a[(r, j)] - &self.a[(s, j)]).collect();
        self.b.push_row(row).expect("row width matches");
        // Row e of the map becomes row p + row q - row e.
        let new_e: Vec<BigInt> = (0..n).map(|j| &self.a[(p, j)] + &self.a[(q, j)] - &self.a[(e, j)]).collect();
        for (j, x) in new_e.into_iter().enumerate() {
            self.a[(e, j)] = x;
        }
    }

    fn finish(self) -> CellMatrices {
        CellMatrices { a: self.a, b: self.b }
    }
}

/// Walks the path choosing, at every flip, the branch realised by `v` (ties
/// go to the `a + c` branch).
pub fn cell_of(path: &Path, v: &EdgeVector) -> Result<CellMatrices> {
    if !is_multicurve(path.start(), v)? {
        return Err(Error::NotMulticurve);
    }
    let mut state = CellState::start(path.start().zeta());
    let mut cur = v.entries().to_vec();
    for (i, m) in path.moves.iter().enumerate() {
        let t = path.stop(i);
        match m {
            Move::Reorder(p) => state.reorder(p),
            Move::Flip(e) => {
                let sq = t.square(*e)?;
                let second = &cur[sq.a] + &cur[sq.c] < &cur[sq.b] + &cur[sq.d];
                state.flip(t, *e, second);
            }
        }
        apply_move(t, m, &mut cur);
    }
    Ok(state.finish())
}

/// One leaf of the branch tree: the branch taken at each flip (`false` for
/// the `a + c` branch) and the composed cell.
#[derive(Clone, Debug)]
pub struct Branch {
    pub choices: Vec<bool>,
    pub cell: CellMatrices,
}

/// Depth-first enumeration of the cells of a path's action, in
/// lexicographic order of branch choices. With pruning, a subtree is skipped
/// as soon as its partial inequality system admits no non-zero `v >= 0`.
pub struct Branches<'a> {
    path: &'a Path,
    prune: bool,
    region: Option<BigMatrix>,
    // Each pending subtree carries a point of its cone, reused by children
    // whose new row it satisfies.
    stack: Vec<(usize, Vec<bool>, CellState, Vec<BigInt>)>,
    pruned: usize,
}

impl<'a> Branches<'a> {
    fn new(path: &'a Path, prune: bool, region: Option<BigMatrix>) -> Self {
        let n = path.start().zeta();
        let start = CellState::start(n);
        let mut this = Self { path, prune, region, stack: Vec::new(), pruned: 0 };
        let witness = if prune { this.witness(&start.b) } else { Some(vec![BigInt::one(); n]) };
        match witness {
            Some(w) => this.stack.push((0, Vec::new(), start, w)),
            None => this.pruned += 1,
        }
        this
    }

    fn witness(&self, b: &BigMatrix) -> Option<Vec<BigInt>> {
        match &self.region {
            Some(r) => cone_point(&b.stack(r).expect("same width")),
            None => cone_point(b),
        }
    }

    /// Subtrees cut so far.
    pub fn pruned(&self) -> usize {
        self.pruned
    }
}

impl Iterator for Branches<'_> {
    type Item = Branch;

    fn next(&mut self) -> Option<Branch> {
        while let Some((mut pos, choices, mut state, w)) = self.stack.pop() {
            // Reorders do not branch.
            while let Some(Move::Reorder(p)) = self.path.moves.get(pos) {
                state.reorder(p);
                pos += 1;
            }
            let Some(Move::Flip(e)) = self.path.moves.get(pos) else {
                return Some(Branch { choices, cell: state.finish() });
            };
            let t = self.path.stop(pos);
            // Push the second branch first so the first is explored first.
            for second in [true, false] {
                let mut child = state.clone();
                child.flip(t, *e, second);
                let mut cw = w.clone();
                if self.prune {
                    let last = child.b.row(child.b.rows() - 1);
                    let dot: BigInt = last.iter().zip(&w).map(|(x, y)| x * y).sum();
                    if dot.is_negative() {
                        match self.witness(&child.b) {
                            Some(p) => cw = p,
                            None => {
                                self.pruned += 1;
                                continue;
                            }
                        }
                    }
                }
                let mut c = choices.clone();
                c.push(second);
                self.stack.push((pos + 1, c, child, cw));
            }
        }
        None
    }
}

/// One letter of a word: a generator name, possibly inverted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub name: String,
    pub inverse: bool,
}

/// A word in the generators, read left to right: `h1.h2` applies `h1` first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word(self.0.iter().chain(&other.0).cloned().collect())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::default());
        }
        s.split('.')
            .map(|tok| {
                let tok = tok.trim();
                let (inverse, name) = match tok.strip_prefix('~') {
                    Some(rest) => (true, rest),
                    None => (false, tok),
                };
                if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(Error::Parse(format!("bad letter `{tok}` in word")));
                }
                Ok(Letter { name: name.to_string(), inverse })
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.0.iter().map(|l| if l.inverse { format!("~{}", l.name) } else { l.name.clone() }).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Closed paths for a set of named generators on one base triangulation.
#[derive(Clone, Debug)]
pub struct GeneratorTable {
    base: Triangulation,
    generators: BTreeMap<String, MappingClassPath>,
    curves: BTreeMap<String, EdgeVector>,
}

impl GeneratorTable {
    /// Builds and checks a table: every path must close up, and every listed
    /// twisting curve must be a multicurve fixed by its generator.
    pub fn new(
        base: Triangulation,
        moves: BTreeMap<String, Vec<Move>>,
        curves: BTreeMap<String, EdgeVector>,
    ) -> Result<Self> {
        if moves.is_empty() {
            return Err(Error::Table("no generators".into()));
        }
        let mut generators = BTreeMap::new();
        for (name, ms) in moves {
            let path = Path::new(base.clone(), ms).map_err(|e| Error::Table(format!("generator `{name}`: {e}")))?;
            let mcp = MappingClassPath::new(path).map_err(|e| Error::Table(format!("generator `{name}`: {e}")))?;
            generators.insert(name, mcp);
        }
        for (name, curve) in &curves {
            let g = generators
                .get(name)
                .ok_or_else(|| Error::Table(format!("curve given for unknown generator `{name}`")))?;
            if !g.fixes(curve) {
                return Err(Error::Table(format!("generator `{name}` does not fix its twisting curve {curve}")));
            }
        }
        Ok(Self { base, generators, curves })
    }

    pub fn base(&self) -> &Triangulation {
        &self.base
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.generators.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Option<&MappingClassPath> {
        self.generators.get(name)
    }

    pub fn curve(&self, name: &str) -> Option<&EdgeVector> {
        self.curves.get(name)
    }

    /// Concatenates generator paths in word order; inverse letters use the
    /// reversed path.
    pub fn compile(&self, word: &Word) -> Result<MappingClassPath> {
        let mut moves = Vec::new();
        for letter in &word.0 {
            let g = self.generators.get(&letter.name).ok_or_else(|| Error::UnknownGenerator(letter.name.clone()))?;
            if letter.inverse {
                moves.extend(g.path().moves().iter().rev().map(Move::inverse));
            } else {
                moves.extend(g.path().moves().iter().cloned());
            }
        }
        MappingClassPath::new(Path::new(self.base.clone(), moves)?)
    }

    /// Every word of exactly `len` letters (generators and inverses), in a
    /// fixed order.
    pub fn words_of_length(&self, len: usize) -> Vec<Word> {
        let letters: Vec<Letter> =
            self.names().flat_map(|n| [false, true].map(|inverse| Letter { name: n.to_string(), inverse })).collect();
        let mut words = vec![Word::default()];
        for _ in 0..len {
            words = words
                .into_iter()
                .flat_map(|w| {
                    letters.iter().map(move |l| {
                        let mut w = w.clone();
                        w.0.push(l.clone());
                        w
                    })
                })
                .collect();
        }
        words
    }

    /// Parses a table file; `surface` must match the file's `faces` when the
    /// file carries them.
    pub fn parse(text: &str, surface: &Triangulation) -> Result<Self> {
        let file: GeneratorTableFile = serde_json::from_str(text)?;
        if let Some(faces) = &file.faces {
            let t = Triangulation::from_labels(faces)?;
            if !t.equals(surface) {
                return Err(Error::Table("generator table was written for a different base triangulation".into()));
            }
        }
        let curves = file.curves.into_iter().map(|(k, v)| (k, EdgeVector::from_i64(&v))).collect();
        Self::new(surface.clone(), file.generators, curves)
    }
}

/// Structured text form of a generator table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorTableFile {
    #[serde(default)]
    pub name: String,
    /// Base triangulation as 1-based signed labels, for consistency checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<[i64; 3]>>,
    pub generators: BTreeMap<String, Vec<Move>>,
    #[serde(default)]
    pub curves: BTreeMap<String, Vec<i64>>,
}

impl GeneratorTableFile {
    pub fn base_file(&self) -> Option<TriangulationFile> {
        self.faces.clone().map(|faces| TriangulationFile { name: self.name.clone(), faces })
    }
}

/// Checks a reorder permutation against a size.
pub fn validate_reorder(perm: &[usize], zeta: usize) -> Result<()> {
    check_permutation(perm, zeta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s11() -> Triangulation {
        Triangulation::from_labels(&[[1, 2, 3], [-1, -2, -3]]).unwrap()
    }

    #[test]
    fn flip_update_on_constant_vector() {
        let t = Triangulation::from_labels(&[[1, 2, 3], [-1, 4, -5], [-2, 5, -6], [-3, 6, -4]]).unwrap();
        let path = Path::new(t, vec![Move::Flip(0)]).unwrap();
        let v = vec![BigInt::one(); 6];
        assert_eq!(path.apply_raw(&v)[0], BigInt::one());
    }

    #[test]
    fn empty_path_is_identity() {
        let p = MappingClassPath::identity(s11());
        let v = EdgeVector::from_i64(&[0, 1, 1]);
        assert_eq!(p.apply(&v).unwrap(), v);
        let cell = p.cell_of(&v).unwrap();
        assert_eq!(cell.a, BigMatrix::identity(3));
        assert_eq!(cell.b, BigMatrix::zeros(1, 3));
        assert_eq!(p.branches(true).count(), 1);
        assert!(p.acts_trivially(Exec::Sequential));
        assert_eq!(p.reverse().len(), 0);
    }

    #[test]
    fn single_flip_cell() {
        let t = s11();
        let path = Path::new(t.clone(), vec![Move::Flip(0)]).unwrap();
        let sq = t.square(0).unwrap();
        // Make a + c strictly larger than b + d.
        let v = EdgeVector::from_i64(&[1, 2, 1]);
        assert!(&v.0[sq.a] + &v.0[sq.c] > &v.0[sq.b] + &v.0[sq.d]);
        let cell = cell_of(&path, &v).unwrap();
        let mut a = BigMatrix::identity(3);
        a[(0, sq.a)] += 1;
        a[(0, sq.c)] += 1;
        a[(0, 0)] -= 2;
        assert_eq!(cell.a, a);
        let mut row = vec![BigInt::zero(); 3];
        row[sq.a] += 1;
        row[sq.c] += 1;
        row[sq.b] -= 1;
        row[sq.d] -= 1;
        assert_eq!(cell.b.row(1), &row[..]);
    }

    #[test]
    fn word_syntax() {
        let w: Word = "a.~b.a".parse().unwrap();
        assert_eq!(w.len(), 3);
        assert!(w.0[1].inverse);
        assert_eq!(w.to_string(), "a.~b.a");
        assert!("".parse::<Word>().unwrap().is_empty());
        assert!("a..b".parse::<Word>().is_err());
    }

    #[test]
    fn move_json() {
        let m: Vec<Move> = serde_json::from_str(r#"[{"flip": 1}, {"reorder": [1, 0, 2]}]"#).unwrap();
        assert_eq!(m, vec![Move::Flip(1), Move::Reorder(vec![1, 0, 2])]);
    }

    #[test]
    fn unclosed_path_is_rejected() {
        let p = Path::new(s11(), vec![Move::Reorder(vec![1, 0, 2])]).unwrap();
        assert!(matches!(MappingClassPath::new(p), Err(Error::NotClosed)));
    }
}
