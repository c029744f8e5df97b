//! Simplicial complexes carrying a two-valued vertex function, and their
//! one-parameter slices along admissible lines.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum simplex dimension accepted by the loader.
pub const MAX_DIMENSION: usize = 3;

/// A point `(a, b)` of the open strip `]0,1[ x R`, i.e. the admissible line
/// with direction `(a, 1-a)` through `(b, -b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub a: f64,
    pub b: f64,
}

impl ParamPoint {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) || !b.is_finite() {
            return Err(Error::InvalidParam(a));
        }
        Ok(Self { a, b })
    }

    /// `min{a, 1-a}`, the normalization factor of the slice function.
    pub fn scale(&self) -> f64 {
        self.a.min(1.0 - self.a)
    }

    pub fn is_valid(&self) -> bool {
        self.a > 0.0 && self.a < 1.0 && self.b.is_finite()
    }

    pub fn dist_inf(&self, other: &ParamPoint) -> f64 {
        (self.a - other.a).abs().max((self.b - other.b).abs())
    }

    pub fn dist(&self, other: &ParamPoint) -> f64 {
        (self.a - other.a).hypot(self.b - other.b)
    }

    pub fn lerp(&self, other: &ParamPoint, t: f64) -> ParamPoint {
        ParamPoint {
            a: self.a + (other.a - self.a) * t,
            b: self.b + (other.b - self.b) * t,
        }
    }
}

/// Normalized slice value `min{a,1-a} * max{(f1-b)/a, (f2+b)/(1-a)}`.
pub fn slice_value(f1: f64, f2: f64, p: ParamPoint) -> f64 {
    let a = p.a;
    p.scale() * ((f1 - p.b) / a).max((f2 + p.b) / (1.0 - a))
}

/// Combinatorial part of a bifiltration, shared between bifiltrations that
/// differ only in their vertex values.
#[derive(Debug, PartialEq)]
struct Complex {
    vertex_count: usize,
    simplices: Vec<Vec<usize>>,
    dims: Vec<usize>,
    /// Indices of codimension-one faces.
    boundaries: Vec<Vec<usize>>,
    max_dim: usize,
    /// Simplex index of each vertex.
    vertex_simplex: Vec<usize>,
    /// `(simplex index, endpoints)` of every edge, by simplex index.
    edges: Vec<(usize, [usize; 2])>,
    /// Vertex adjacency in compressed rows.
    neighbor_offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Complex {
    fn build(vertex_count: usize, simplices: Vec<Vec<usize>>) -> Result<Self> {
        if vertex_count == 0 || simplices.is_empty() {
            return Err(Error::InvalidComplex("complex is empty".into()));
        }
        let mut index: HashMap<Vec<usize>, usize> = HashMap::with_capacity(simplices.len());
        let mut sorted = Vec::with_capacity(simplices.len());
        for (i, s) in simplices.into_iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidComplex(format!("simplex {i} has no vertices")));
            }
            if s.len() > MAX_DIMENSION + 1 {
                return Err(Error::InvalidComplex(format!(
                    "simplex {i} has dimension {} > {MAX_DIMENSION}",
                    s.len() - 1
                )));
            }
            let mut t = s.clone();
            t.sort_unstable();
            if t.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidComplex(format!("simplex {i} repeats a vertex: {s:?}")));
            }
            if let Some(&v) = t.iter().find(|&&v| v >= vertex_count) {
                return Err(Error::InvalidComplex(format!(
                    "simplex {i} uses vertex {v}, but only {vertex_count} vertices exist"
                )));
            }
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidComplex(format!("duplicate simplex {s:?}")));
            }
            sorted.push(t);
        }
        let mut boundaries = Vec::with_capacity(sorted.len());
        let mut dims = Vec::with_capacity(sorted.len());
        for s in &sorted {
            dims.push(s.len() - 1);
            if s.len() == 1 {
                boundaries.push(Vec::new());
                continue;
            }
            let mut faces = Vec::with_capacity(s.len());
            for skip in 0..s.len() {
                let face: Vec<usize> =
                    s.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &v)| v).collect();
                match index.get(&face) {
                    Some(&fi) => faces.push(fi),
                    None => {
                        return Err(Error::InvalidComplex(format!(
                            "face {face:?} of simplex {s:?} is missing"
                        )))
                    }
                }
            }
            faces.sort_unstable();
            boundaries.push(faces);
        }
        for v in 0..vertex_count {
            if !index.contains_key(&vec![v]) {
                return Err(Error::InvalidComplex(format!("vertex {v} is not listed as a 0-simplex")));
            }
        }
        let max_dim = dims.iter().copied().max().unwrap_or(0);
        let vertex_simplex = (0..vertex_count).map(|v| index[&vec![v]]).collect();
        let edges: Vec<(usize, [usize; 2])> = sorted
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len() == 2)
            .map(|(i, s)| (i, [s[0], s[1]]))
            .collect();
        let mut degree = vec![0usize; vertex_count + 1];
        for (_, [x, y]) in &edges {
            degree[*x + 1] += 1;
            degree[*y + 1] += 1;
        }
        let mut neighbor_offsets = degree;
        for v in 0..vertex_count {
            neighbor_offsets[v + 1] += neighbor_offsets[v];
        }
        let mut fill = neighbor_offsets.clone();
        let mut neighbors = vec![0; neighbor_offsets[vertex_count]];
        for (_, [x, y]) in &edges {
            neighbors[fill[*x]] = *y;
            fill[*x] += 1;
            neighbors[fill[*y]] = *x;
            fill[*y] += 1;
        }
        Ok(Self {
            vertex_count,
            simplices: sorted,
            dims,
            boundaries,
            max_dim,
            vertex_simplex,
            edges,
            neighbor_offsets,
            neighbors,
        })
    }
}

/// A finite simplicial complex with a vertex map `f = (f1, f2)`.
#[derive(Clone, Debug)]
pub struct SimplicialBifiltration {
    name: String,
    values: Vec<[f64; 2]>,
    complex: Arc<Complex>,
}

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    f1: f64,
    f2: f64,
}

#[derive(Serialize, Deserialize)]
struct ComplexFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    vertices: Vec<VertexRecord>,
    simplices: Vec<Vec<usize>>,
}

impl SimplicialBifiltration {
    /// Builds a bifiltration from an explicit simplex list in which every face
    /// (including every vertex) already appears exactly once.
    pub fn new(name: impl Into<String>, values: Vec<[f64; 2]>, simplices: Vec<Vec<usize>>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::InvalidComplex(format!("vertex {i} has a non-finite value")));
        }
        let complex = Complex::build(values.len(), simplices)?;
        Ok(Self { name: name.into(), values, complex: Arc::new(complex) })
    }

    /// Builds a bifiltration from top simplices, adding every missing face and
    /// every vertex. Simplices listed twice are rejected.
    pub fn from_maximal(
        name: impl Into<String>,
        values: Vec<[f64; 2]>,
        simplices: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = values.len();
        let mut seen = BTreeSet::new();
        for (i, s) in simplices.iter().enumerate() {
            let mut t = s.clone();
            t.sort_unstable();
            if t.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidComplex(format!("simplex {i} repeats a vertex: {s:?}")));
            }
            if t.len() > MAX_DIMENSION + 1 {
                return Err(Error::InvalidComplex(format!("simplex {i} has dimension {} > {MAX_DIMENSION}", t.len() - 1)));
            }
            if let Some(&v) = t.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidComplex(format!(
                    "simplex {i} uses vertex {v}, but only {n} vertices exist"
                )));
            }
            if t.is_empty() {
                return Err(Error::InvalidComplex(format!("simplex {i} has no vertices")));
            }
            if !seen.insert(t) {
                return Err(Error::InvalidComplex(format!("duplicate simplex {s:?}")));
            }
        }
        let mut all: BTreeSet<(usize, Vec<usize>)> = (0..n).map(|v| (0, vec![v])).collect();
        for s in &seen {
            let k = s.len();
            // Every nonempty subset is a face.
            for mask in 1u32..(1 << k) {
                let face: Vec<usize> = (0..k).filter(|j| mask & (1 << j) != 0).map(|j| s[j]).collect();
                all.insert((face.len() - 1, face));
            }
        }
        let simplices = all.into_iter().map(|(_, s)| s).collect();
        Self::new(name, values, simplices)
    }

    /// Same complex, new vertex values.
    pub fn with_values(&self, name: impl Into<String>, values: Vec<[f64; 2]>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::ComplexMismatch(format!(
                "{} values given for {} vertices",
                values.len(),
                self.values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::InvalidComplex(format!("vertex {i} has a non-finite value")));
        }
        Ok(Self { name: name.into(), values, complex: Arc::clone(&self.complex) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn vertex_count(&self) -> usize {
        self.complex.vertex_count
    }

    pub fn simplex_count(&self) -> usize {
        self.complex.simplices.len()
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.complex.simplices
    }

    pub fn simplex_dim(&self, i: usize) -> usize {
        self.complex.dims[i]
    }

    /// Codimension-one faces of simplex `i`, as simplex indices.
    pub fn boundary(&self, i: usize) -> &[usize] {
        &self.complex.boundaries[i]
    }

    pub fn dimension(&self) -> usize {
        self.complex.max_dim
    }

    pub fn same_complex(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.complex, &other.complex) || self.complex == other.complex
    }

    /// `max_v max(|f1(v)|, |f2(v)|)`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v[0].abs().max(v[1].abs())).fold(0.0, f64::max)
    }

    /// Largest sup-norm extent of `f` over a single edge; a proxy for the
    /// mesh resolution in value space.
    pub fn max_edge_extent(&self) -> f64 {
        self.simplices()
            .iter()
            .filter(|s| s.len() == 2)
            .map(|s| {
                let (p, q) = (self.values[s[0]], self.values[s[1]]);
                (p[0] - q[0]).abs().max((p[1] - q[1]).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Vertexwise `||f - g||_inf`.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(p, q)| (p[0] - q[0]).abs().max((p[1] - q[1]).abs()))
            .fold(0.0, f64::max))
    }

    /// Simplex index of each vertex.
    pub fn vertex_simplices(&self) -> &[usize] {
        &self.complex.vertex_simplex
    }

    /// `(simplex index, endpoints)` of every edge, ordered by simplex index.
    pub fn edges(&self) -> &[(usize, [usize; 2])] {
        &self.complex.edges
    }

    /// Vertices joined to `v` by an edge.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        let c = &self.complex;
        &c.neighbors[c.neighbor_offsets[v]..c.neighbor_offsets[v + 1]]
    }

    /// Slice values at every vertex.
    pub fn vertex_slice_values(&self, p: ParamPoint) -> Vec<f64> {
        self.values.iter().map(|v| slice_value(v[0], v[1], p)).collect()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_complex(other) {
            Ok(())
        } else {
            Err(Error::ComplexMismatch(format!(
                "`{}` and `{}` are defined on different complexes",
                self.name, other.name
            )))
        }
    }

    pub fn from_json_str(name: impl Into<String>, s: &str) -> Result<Self> {
        let file: ComplexFile = serde_json::from_str(s)?;
        let values = file.vertices.iter().map(|v| [v.f1, v.f2]).collect();
        let name = file.name.unwrap_or_else(|| name.into());
        Self::from_maximal(name, values, file.simplices)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("complex");
        Self::from_json_str(stem, &text)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = ComplexFile {
            name: Some(self.name.clone()),
            vertices: self.values.iter().map(|v| VertexRecord { f1: v[0], f2: v[1] }).collect(),
            simplices: self.complex.simplices.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

/// The lower-star filtration of a bifiltration along one admissible line.
#[derive(Clone, Debug)]
pub struct SliceFiltration<'a> {
    pub source: &'a SimplicialBifiltration,
    pub param: ParamPoint,
    /// Entry value of every simplex; `NaN` for simplices above `max_dim`,
    /// which are also absent from `order`.
    pub simplex_values: Vec<f64>,
    /// Simplex indices sorted by (value, dimension, index).
    pub order: Vec<usize>,
    /// Largest dimension present in `order`.
    pub max_dim: usize,
}

impl<'a> SliceFiltration<'a> {
    /// Position of each simplex in `order` (`usize::MAX` when truncated away).
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![usize::MAX; self.simplex_values.len()];
        for (i, &s) in self.order.iter().enumerate() {
            pos[s] = i;
        }
        pos
    }

    pub fn is_truncated(&self) -> bool {
        self.max_dim < self.source.dimension()
    }
}

pub fn build_slice(bif: &SimplicialBifiltration, p: ParamPoint) -> Result<SliceFiltration<'_>> {
    build_slice_upto(bif, p, bif.dimension())
}

/// Like [`build_slice`] but keeps only simplices of dimension `<= max_dim`.
/// Diagrams in degree `k` only need `max_dim = k + 1`.
pub fn build_slice_upto(bif: &SimplicialBifiltration, p: ParamPoint, max_dim: usize) -> Result<SliceFiltration<'_>> {
    if !p.is_valid() {
        return Err(Error::InvalidParam(p.a));
    }
    let vals = bif.vertex_slice_values(p);
    let max_dim = max_dim.min(bif.dimension());
    let simplex_values: Vec<f64> = bif
        .simplices()
        .iter()
        .map(|s| {
            if s.len() > max_dim + 1 {
                f64::NAN
            } else {
                s.iter().map(|&v| vals[v]).fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .collect();
    let mut keyed: Vec<(f64, usize, usize)> = (0..simplex_values.len())
        .filter(|&i| bif.simplex_dim(i) <= max_dim)
        .map(|i| (simplex_values[i], bif.simplex_dim(i), i))
        .collect();
    keyed.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let order = keyed.into_iter().map(|k| k.2).collect();
    Ok(SliceFiltration { source: bif, param: p, simplex_values, order, max_dim })
}

/// `max_v |f*_(a,b)(v) - g*_(a,b)(v)|` for two bifiltrations on one complex.
pub fn sup_norm_slice_gap(f: &SimplicialBifiltration, g: &SimplicialBifiltration, p: ParamPoint) -> Result<f64> {
    f.check_same(g)?;
    if !p.is_valid() {
        return Err(Error::InvalidParam(p.a));
    }
    Ok(f.values()
        .iter()
        .zip(g.values())
        .map(|(x, y)| (slice_value(x[0], x[1], p) - slice_value(y[0], y[1], p)).abs())
        .fold(0.0, f64::max))
}
