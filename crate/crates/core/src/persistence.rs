//! Persistence diagrams of slice filtrations over the two-element field.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bifiltration::{build_slice_upto, ParamPoint, SimplicialBifiltration, SliceFiltration};
use crate::error::{Error, Result};

/// An element of `Δ* ∪ {Δ}`: a proper point `(u, v)`, a point at infinity
/// `(u, ∞)`, or the diagonal element.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DiagramPoint {
    Proper { u: f64, v: f64 },
    Improper { u: f64 },
    Diagonal,
}

impl DiagramPoint {
    pub fn proper(u: f64, v: f64) -> Self {
        debug_assert!(u < v && v.is_finite());
        DiagramPoint::Proper { u, v }
    }

    pub fn improper(u: f64) -> Self {
        DiagramPoint::Improper { u }
    }

    pub fn birth(&self) -> Option<f64> {
        match *self {
            DiagramPoint::Proper { u, .. } | DiagramPoint::Improper { u } => Some(u),
            DiagramPoint::Diagonal => None,
        }
    }

    /// Death coordinate; `Some(inf)` for improper points.
    pub fn death(&self) -> Option<f64> {
        match *self {
            DiagramPoint::Proper { v, .. } => Some(v),
            DiagramPoint::Improper { .. } => Some(f64::INFINITY),
            DiagramPoint::Diagonal => None,
        }
    }

    pub fn is_proper(&self) -> bool {
        matches!(self, DiagramPoint::Proper { .. })
    }

    pub fn is_improper(&self) -> bool {
        matches!(self, DiagramPoint::Improper { .. })
    }

    fn sort_key(&self) -> (u8, f64, f64) {
        match *self {
            DiagramPoint::Proper { u, v } => (0, u, v),
            DiagramPoint::Improper { u } => (0, u, f64::INFINITY),
            DiagramPoint::Diagonal => (1, 0.0, 0.0),
        }
    }

    /// Total order by (u, v), diagonal last.
    pub fn cmp_total(&self, other: &Self) -> Ordering {
        let (k1, u1, v1) = self.sort_key();
        let (k2, u2, v2) = other.sort_key();
        k1.cmp(&k2).then(u1.total_cmp(&u2)).then(v1.total_cmp(&v2))
    }
}

impl fmt::Display for DiagramPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagramPoint::Proper { u, v } => write!(f, "({u}, {v})"),
            DiagramPoint::Improper { u } => write!(f, "({u}, inf)"),
            DiagramPoint::Diagonal => write!(f, "Δ"),
        }
    }
}

/// Degree-tagged multiset of non-diagonal points; the diagonal is implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    degree: usize,
    points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    /// Sorts points; drops diagonal entries; rejects malformed proper points.
    pub fn new(degree: usize, points: Vec<DiagramPoint>) -> Result<Self> {
        let mut pts = Vec::with_capacity(points.len());
        for p in points {
            match p {
                DiagramPoint::Proper { u, v } if !(u < v && u.is_finite() && v.is_finite()) => {
                    return Err(Error::Domain(format!("proper point needs finite u < v, got {p}")));
                }
                DiagramPoint::Improper { u } if !u.is_finite() => {
                    return Err(Error::Domain(format!("improper point needs finite u, got {p}")));
                }
                DiagramPoint::Diagonal => {}
                _ => pts.push(p),
            }
        }
        pts.sort_by(|a, b| a.cmp_total(b));
        Ok(Self { degree, points: pts })
    }

    pub fn empty(degree: usize) -> Self {
        Self { degree, points: Vec::new() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, i: usize) -> DiagramPoint {
        self.points[i]
    }

    pub fn proper_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_proper()).count()
    }

    pub fn improper_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_improper()).count()
    }

    /// Number of copies of `x` (exact comparison).
    pub fn count(&self, x: &DiagramPoint) -> usize {
        self.points.iter().filter(|p| *p == x).count()
    }

    pub fn to_csv(&self) -> String {
        write_diagrams_csv(std::slice::from_ref(self))
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

/// CSV with header `degree,u,v`; improper points carry `v = inf`.
pub fn write_diagrams_csv(diagrams: &[PersistenceDiagram]) -> String {
    let mut out = String::from("degree,u,v\n");
    for d in diagrams {
        for p in d.points() {
            out.push_str(&format!(
                "{},{},{}\n",
                d.degree(),
                fmt_num(p.birth().unwrap()),
                fmt_num(p.death().unwrap())
            ));
        }
    }
    out
}

/// Parses the CSV written by [`write_diagrams_csv`], one diagram per degree
/// in ascending order. A header line is optional.
pub fn read_diagrams_csv(text: &str) -> Result<Vec<PersistenceDiagram>> {
    let mut by_degree: std::collections::BTreeMap<usize, Vec<DiagramPoint>> = Default::default();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (ln == 0 && line.starts_with("degree")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::Domain(format!("line {}: expected `degree,u,v`, got `{line}`", ln + 1));
        if cols.len() != 3 {
            return Err(bad());
        }
        let k: usize = cols[0].parse().map_err(|_| bad())?;
        let u: f64 = cols[1].parse().map_err(|_| bad())?;
        let p = if cols[2].eq_ignore_ascii_case("inf") {
            DiagramPoint::Improper { u }
        } else {
            DiagramPoint::Proper { u, v: cols[2].parse().map_err(|_| bad())? }
        };
        by_degree.entry(k).or_default().push(p);
    }
    by_degree.into_iter().map(|(k, pts)| PersistenceDiagram::new(k, pts)).collect()
}

/// Degree-`k` diagram of a slice. Zero-persistence pairs are not reported.
///
/// The slice must contain simplices up to dimension `k + 1` (or the whole
/// complex); degrees above the complex dimension give an empty diagram.
pub fn compute_diagram(slice: &SliceFiltration<'_>, degree: usize) -> Result<PersistenceDiagram> {
    let bif = slice.source;
    if degree > bif.dimension() {
        return Ok(PersistenceDiagram::empty(degree));
    }
    if slice.max_dim < (degree + 1).min(bif.dimension()) {
        return Err(Error::Domain(format!(
            "slice truncated at dimension {} cannot give degree {degree}",
            slice.max_dim
        )));
    }
    if degree == 0 {
        Ok(degree_zero(slice))
    } else {
        Ok(reduce(slice, degree))
    }
}

/// Builds the truncated slice at `p` and returns its degree-`k` diagram.
pub fn diagram_at(bif: &SimplicialBifiltration, p: ParamPoint, degree: usize) -> Result<PersistenceDiagram> {
    if degree == 0 {
        if !p.is_valid() {
            return Err(Error::InvalidParam(p.a));
        }
        return Ok(degree_zero_direct(bif, p));
    }
    let slice = build_slice_upto(bif, p, degree + 1)?;
    compute_diagram(&slice, degree)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Union-find with the elder rule; a component's root is its earliest vertex.
fn degree_zero(slice: &SliceFiltration<'_>) -> PersistenceDiagram {
    let bif = slice.source;
    let pos = slice.positions();
    let n = bif.vertex_count();
    // Vertex simplex index for each vertex id.
    let mut vsimplex = vec![usize::MAX; n];
    for (i, s) in bif.simplices().iter().enumerate() {
        if s.len() == 1 {
            vsimplex[s[0]] = i;
        }
    }
    let mut parent: Vec<usize> = (0..n).collect();
    let mut points = Vec::new();
    for &s in &slice.order {
        if bif.simplex_dim(s) != 1 {
            continue;
        }
        let verts = &bif.simplices()[s];
        let (r0, r1) = (find(&mut parent, verts[0]), find(&mut parent, verts[1]));
        if r0 == r1 {
            continue;
        }
        let (old, young) = if pos[vsimplex[r0]] < pos[vsimplex[r1]] { (r0, r1) } else { (r1, r0) };
        parent[young] = old;
        let birth = slice.simplex_values[vsimplex[young]];
        let death = slice.simplex_values[s];
        if birth < death {
            points.push(DiagramPoint::Proper { u: birth, v: death });
        }
    }
    for v in 0..n {
        if find(&mut parent, v) == v {
            points.push(DiagramPoint::Improper { u: slice.simplex_values[vsimplex[v]] });
        }
    }
    PersistenceDiagram::new(0, points).expect("well-formed points")
}

/// Degree-0 diagram by a lower-star sweep over vertices, skipping the full
/// slice. Each edge enters with its later endpoint; how equal values are
/// ordered does not change the diagram.
fn degree_zero_direct(bif: &SimplicialBifiltration, p: ParamPoint) -> PersistenceDiagram {
    let vals = bif.vertex_slice_values(p);
    let vs = bif.vertex_simplices();
    let n = bif.vertex_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&x, &y| vals[x].total_cmp(&vals[y]).then(vs[x].cmp(&vs[y])));
    let mut rank = vec![usize::MAX; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    let mut points = Vec::new();
    for &v in &order {
        let death = vals[v];
        for &w in bif.neighbors(v) {
            if rank[w] > rank[v] {
                continue;
            }
            let (r0, r1) = (find(&mut parent, v), find(&mut parent, w));
            if r0 == r1 {
                continue;
            }
            // Roots are the earliest vertex of their component.
            let (old, young) = if rank[r0] < rank[r1] { (r0, r1) } else { (r1, r0) };
            parent[young] = old;
            if vals[young] < death {
                points.push(DiagramPoint::Proper { u: vals[young], v: death });
            }
        }
    }
    for v in 0..n {
        if find(&mut parent, v) == v {
            points.push(DiagramPoint::Improper { u: vals[v] });
        }
    }
    PersistenceDiagram::new(0, points).expect("well-formed points")
}

/// Symmetric difference of two ascending vectors.
fn xor_into(a: &mut Vec<usize>, b: &[usize]) {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    *a = out;
}

/// Reduces the columns of all dimension-`dim` simplices present in the slice,
/// skipping those whose position is a key of `skip` (clearing). Returns the
/// map from pivot position to owning column position, and the simplices
/// whose columns reduce to zero.
fn reduce_dim(
    slice: &SliceFiltration<'_>,
    pos: &[usize],
    dim: usize,
    skip: &HashMap<usize, usize>,
) -> (HashMap<usize, usize>, Vec<usize>) {
    let bif = slice.source;
    let mut cols: Vec<Vec<usize>> = Vec::new();
    let mut owners: Vec<usize> = Vec::new();
    let mut pivot: HashMap<usize, usize> = HashMap::new();
    let mut zero = Vec::new();
    for &s in &slice.order {
        if bif.simplex_dim(s) != dim || skip.contains_key(&pos[s]) {
            continue;
        }
        let mut col: Vec<usize> = bif.boundary(s).iter().map(|&f| pos[f]).collect();
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match pivot.get(&low) {
                Some(&c) => xor_into(&mut col, &cols[c]),
                None => break,
            }
        }
        match col.last() {
            Some(&low) => {
                pivot.insert(low, cols.len());
                cols.push(col);
                owners.push(pos[s]);
            }
            None => zero.push(s),
        }
    }
    let pairs = pivot.into_iter().map(|(low, c)| (low, owners[c])).collect();
    (pairs, zero)
}

fn reduce(slice: &SliceFiltration<'_>, degree: usize) -> PersistenceDiagram {
    let bif = slice.source;
    let pos = slice.positions();
    let value_at = |p: usize| slice.simplex_values[slice.order[p]];
    let mut points = Vec::new();
    let (pairs, _) = if degree < bif.dimension() {
        reduce_dim(slice, &pos, degree + 1, &HashMap::new())
    } else {
        (HashMap::new(), Vec::new())
    };
    for (&birth, &death) in &pairs {
        let (u, v) = (value_at(birth), value_at(death));
        if u < v {
            points.push(DiagramPoint::Proper { u, v });
        }
    }
    let (_, zero) = reduce_dim(slice, &pos, degree, &pairs);
    for s in zero {
        points.push(DiagramPoint::Improper { u: slice.simplex_values[s] });
    }
    PersistenceDiagram::new(degree, points).expect("well-formed points")
}

/// Degree-`k` diagram computed by matrix reduction even in degree 0; used to
/// cross-check the union-find path.
pub fn compute_diagram_by_reduction(slice: &SliceFiltration<'_>, degree: usize) -> Result<PersistenceDiagram> {
    if degree > slice.source.dimension() {
        return Ok(PersistenceDiagram::empty(degree));
    }
    if degree == 0 {
        let bif = slice.source;
        let pos = slice.positions();
        let mut points = Vec::new();
        let (pairs, _) = if bif.dimension() >= 1 {
            reduce_dim(slice, &pos, 1, &HashMap::new())
        } else {
            (HashMap::new(), Vec::new())
        };
        for (&b, &d) in &pairs {
            let (u, v) = (slice.simplex_values[slice.order[b]], slice.simplex_values[slice.order[d]]);
            if u < v {
                points.push(DiagramPoint::Proper { u, v });
            }
        }
        for &s in &slice.order {
            if bif.simplex_dim(s) == 0 && !pairs.contains_key(&pos[s]) {
                points.push(DiagramPoint::Improper { u: slice.simplex_values[s] });
            }
        }
        return PersistenceDiagram::new(0, points);
    }
    compute_diagram(slice, degree)
}

/// Dense bit vector over GF(2).
#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
    fn xor(&mut self, o: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a ^= b;
        }
    }
    fn top(&self) -> Option<usize> {
        self.0.iter().enumerate().rev().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + 63 - w.leading_zeros() as usize)
    }
}

/// Rank of a set of GF(2) vectors.
fn rank(vectors: impl IntoIterator<Item = Bits>) -> usize {
    let mut basis: HashMap<usize, Bits> = HashMap::new();
    for mut v in vectors {
        while let Some(t) = v.top() {
            match basis.get(&t) {
                Some(b) => v.xor(b),
                None => {
                    basis.insert(t, v);
                    break;
                }
            }
        }
    }
    basis.len()
}

/// Rank of `H_k(sublevel u) -> H_k(sublevel v)` by direct linear algebra:
/// `dim(Z_k(u) + B_k(v)) - dim B_k(v)`. Does not use the filtration order.
pub fn persistent_betti(slice: &SliceFiltration<'_>, degree: usize, u: f64, v: f64) -> Result<usize> {
    if !(u < v) {
        return Err(Error::Domain(format!("persistent Betti number needs u < v, got u = {u}, v = {v}")));
    }
    let bif = slice.source;
    let vals = &slice.simplex_values;
    let local = |dim: usize| -> HashMap<usize, usize> {
        (0..bif.simplex_count()).filter(|&s| bif.simplex_dim(s) == dim).enumerate().map(|(l, s)| (s, l)).collect()
    };
    let k_index = local(degree);
    let nk = k_index.len();
    if nk == 0 {
        return Ok(0);
    }
    // Cycles of the sublevel set at u.
    let mut cycles: Vec<Bits> = Vec::new();
    let in_u: Vec<usize> = {
        let mut s: Vec<usize> = k_index.keys().copied().filter(|&s| vals[s] <= u).collect();
        s.sort_unstable();
        s
    };
    if degree == 0 {
        for s in &in_u {
            let mut b = Bits::zeros(nk);
            b.set(k_index[s]);
            cycles.push(b);
        }
    } else {
        let km1 = local(degree - 1);
        let mut basis: HashMap<usize, (Bits, Bits)> = HashMap::new();
        for s in &in_u {
            let mut col = Bits::zeros(km1.len());
            for f in bif.boundary(*s) {
                col.set(km1[f]);
            }
            let mut comb = Bits::zeros(nk);
            comb.set(k_index[s]);
            loop {
                match col.top() {
                    None => {
                        cycles.push(comb);
                        break;
                    }
                    Some(t) => match basis.get(&t) {
                        Some((bc, bm)) => {
                            col.xor(bc);
                            comb.xor(bm);
                        }
                        None => {
                            basis.insert(t, (col, comb));
                            break;
                        }
                    },
                }
            }
        }
    }
    // Boundaries of the sublevel set at v.
    let boundaries: Vec<Bits> = (0..bif.simplex_count())
        .filter(|&s| bif.simplex_dim(s) == degree + 1 && vals[s] <= v)
        .map(|s| {
            let mut b = Bits::zeros(nk);
            for f in bif.boundary(s) {
                b.set(k_index[f]);
            }
            b
        })
        .collect();
    let rb = rank(boundaries.iter().cloned());
    let rzb = rank(boundaries.into_iter().chain(cycles));
    Ok(rzb - rb)
}

/// Multiplicity of `point` from persistent Betti numbers: the four-term
/// alternating sum for proper points and the two-term one for points at
/// infinity, at an `ε` below every gap between relevant values.
pub fn multiplicity(slice: &SliceFiltration<'_>, degree: usize, point: &DiagramPoint) -> Result<usize> {
    let mut vals: Vec<f64> = slice.simplex_values.clone();
    let (u, v) = match *point {
        DiagramPoint::Proper { u, v } => {
            vals.push(u);
            vals.push(v);
            (u, Some(v))
        }
        DiagramPoint::Improper { u } => {
            vals.push(u);
            (u, None)
        }
        DiagramPoint::Diagonal => return Err(Error::Domain("multiplicity of the diagonal is undefined".into())),
    };
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    let gap = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let eps = if gap.is_finite() { gap / 4.0 } else { 1.0 };
    let beta = |x: f64, y: f64| persistent_betti(slice, degree, x, y).map(|r| r as i64);
    let m = match v {
        Some(v) => beta(u + eps, v - eps)? - beta(u - eps, v - eps)? - beta(u + eps, v + eps)? + beta(u - eps, v + eps)?,
        None => {
            let top = vals.last().copied().unwrap_or(u) + 1.0;
            beta(u + eps, top)? - beta(u - eps, top)?
        }
    };
    usize::try_from(m).map_err(|_| Error::Inconsistent(format!("negative multiplicity {m} at {point}")))
}
